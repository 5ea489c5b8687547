"""Orbit geometry: stabilizers, codimensions, and the degeneration graph.

The six classes are orbits of the scaled automorphism group acting on the
space of Lorentzian inner products.  Their codimensions come from stabilizer
dimensions, computed both in closed form and by an exact rank computation;
the closure relations are re-derived from explicit metric curves (positive
evidence) and dimension/signature obstructions (negative evidence), not
transcribed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ._linalg import exact_inv, exact_rank, exact_zeros
from .curvature import closed_form_riemann, is_flat
from .liealg import aut_pattern
from .metrics import (
    CANONICAL_PAIRS,
    Metric,
    NotARepresentative,
    SignatureTriple,
    canonical_gram,
    canonical_metric,
    shear_matrix,
    xi_exact,
    xi_key_of,
)
from .numerics import APPROX, DEFAULT_TOL, QSqrt3
from .reduction import (
    FLAG_NEAR_DEGENERATE,
    classify_by_invariants_flagged,
    restricted_signatures,
)

SQRT3_F = math.sqrt(3.0)


class ParameterOutOfRange(ValueError):
    """Curve parameter outside the family's declared interval."""


class EvidenceFailure(RuntimeError):
    """A degeneration claim failed its recomputation."""


class OracleMismatch(RuntimeError):
    """Closed-form stabilizer dimension disagrees with the rank oracle."""


def _check_pair(lam: int, xi) -> str:
    key = xi_key_of(xi)
    if (int(lam), key) not in CANONICAL_PAIRS:
        raise NotARepresentative(f"({lam}, {key}) is not a canonical pair")
    return key


def dims_UW(lam: int, xi, n: int) -> tuple[int, int]:
    """Dimensions of the two stabilizer solution spaces, by exact rank.

    The corner space is {(b, d): (lam^2-xi^2-1) b = -lam xi d, (lam^2-1) d = 0}
    in R^2; the mixing space imposes (lam^2-1) a = -xi c on each of the n-4
    coordinate pairs.
    """
    key = _check_pair(lam, xi)
    lam_e = QSqrt3(int(lam))
    xi_e = xi_exact(key)
    one = QSqrt3(1)
    corner = np.array(
        [
            [lam_e * lam_e - xi_e * xi_e - one, lam_e * xi_e],
            [QSqrt3(0), lam_e * lam_e - one],
        ],
        dtype=object,
    )
    dim_u = 2 - exact_rank(corner)
    mixing = np.array([[lam_e * lam_e - one, xi_e]], dtype=object)
    dim_w = (n - 4) * (2 - exact_rank(mixing))
    return dim_u, dim_w


def _stabilizer_rank_oracle(lam: int, xi, n: int) -> int:
    """dim of {pattern matrices M : g^-1 M g is skew wrt the Lorentz form}."""
    key = _check_pair(lam, xi)
    g = shear_matrix(QSqrt3(int(lam)), xi_exact(key), n, exact=True)
    ginv = exact_inv(g)
    eps = [1] * (n - 1) + [-1]
    mask = aut_pattern(n).mask
    positions = [(i, j) for i in range(n) for j in range(n) if mask[i, j]]
    upper = [(r, s) for r in range(n) for s in range(r, n)]
    system = exact_zeros((len(upper), len(positions)))
    for col, (i, j) in enumerate(positions):
        u = ginv[:, i]  # g^-1 E_ij g = outer(u, v)
        v = g[j, :]
        for row, (r, s) in enumerate(upper):
            system[row, col] = eps[s] * u[s] * v[r] + eps[r] * u[r] * v[s]
    return len(positions) - exact_rank(system)


@lru_cache(maxsize=None)
def _stabilizer_dim_cached(lam: int, key: str, n: int) -> int:
    dim_u, dim_w = dims_UW(lam, key, n)
    closed = 1 + (n - 4) * (n - 5) // 2 + dim_u + dim_w
    oracle = _stabilizer_rank_oracle(lam, key, n)
    if closed != oracle:
        raise OracleMismatch(
            f"stabilizer dim at ({lam}, {key}), n={n}: closed form {closed}, rank {oracle}"
        )
    return closed


def stabilizer_dim(lam: int, xi, n: int) -> int:
    """Stabilizer dimension, closed form cross-checked by the rank oracle."""
    return _stabilizer_dim_cached(int(lam), _check_pair(lam, xi), n)


def moduli_dim(n: int) -> int:
    """Dimension of the space of inner products of a fixed signature."""
    return n * (n + 1) // 2


def acting_group_dim(n: int) -> int:
    """Dimension of the scaled automorphism group (the full block pattern)."""
    return n * n - 3 * n + 7


def codimension(lam: int, xi, n: int) -> int:
    """Codimension of the orbit through the (lam, xi) representative."""
    stab = stabilizer_dim(lam, xi, n)
    return moduli_dim(n) - (acting_group_dim(n) - stab)


# -- degeneration curves --------------------------------------------------------


@dataclass(frozen=True)
class CurveFamily:
    """A one-parameter family of metrics linking two classes.

    Interior parameters stay in the source class; the limit parameter (the
    open end of the interval) lands on the target representative.
    """

    name: str
    source: tuple[int, str]
    target: tuple[int, str]
    lo: float
    hi: float
    closed_lo: bool
    closed_hi: bool
    limit: float  # equals lo or hi, always an open end

    def params(self, t: float):
        raise NotImplementedError

    def contains(self, t: float) -> bool:
        above = t > self.lo or (self.closed_lo and t == self.lo)
        below = t < self.hi or (self.closed_hi and t == self.hi)
        return above and below


@dataclass(frozen=True)
class _DiagonalCurve(CurveFamily):
    def params(self, t):
        return (t, t)


@dataclass(frozen=True)
class _FixedLamCurve(CurveFamily):
    lam: float = 1.0

    def params(self, t):
        return (self.lam, t)


@dataclass(frozen=True)
class _HyperbolaCurve(CurveFamily):
    def params(self, s):
        return (s, math.sqrt(max(s * s - 1.0, 0.0)))


CURVE_FAMILIES: dict[str, CurveFamily] = {
    "A": _DiagonalCurve("A", (0, "0"), (1, "1"), 0.0, 1.0, True, False, 1.0),
    "B": _FixedLamCurve("B", (1, "1"), (1, "0"), 0.0, 1.0, False, True, 0.0, lam=1.0),
    "C": _FixedLamCurve("C", (2, "0"), (2, "sqrt3"), 0.0, SQRT3_F, True, False, SQRT3_F, lam=2.0),
    "D": _HyperbolaCurve("D", (2, "sqrt3"), (1, "0"), 1.0, 2.0, False, True, 1.0),
    "E": _DiagonalCurve("E", (2, "2"), (1, "1"), 1.0, 2.0, False, True, 1.0),
    "F": _FixedLamCurve("F", (2, "2"), (2, "sqrt3"), SQRT3_F, 2.0, False, True, SQRT3_F, lam=2.0),
}


def curve_sample(family: str, t: float, n: int) -> Metric:
    """The family's metric at parameter t (approx backend)."""
    fam = CURVE_FAMILIES.get(family)
    if fam is None:
        raise KeyError(f"unknown curve family {family!r}")
    if not fam.contains(t):
        raise ParameterOutOfRange(
            f"family {family} needs t in "
            f"{'[' if fam.closed_lo else '('}{fam.lo}, {fam.hi}{']' if fam.closed_hi else ')'}"
        )
    lam, xi = fam.params(t)
    return Metric(gram=canonical_gram(lam, xi, n, exact=False), backend=APPROX)


def _limit_metric(fam: CurveFamily, n: int) -> Metric:
    lam, xi = fam.params(fam.limit)
    return Metric(gram=canonical_gram(lam, xi, n, exact=False), backend=APPROX)


@dataclass(frozen=True)
class CurveEvidence:
    family: str
    samples: tuple[tuple[float, tuple[int, str], tuple[str, ...]], ...]


@dataclass
class DegenerationGraph:
    """Directed closure relations among the six orbits with evidence.

    edges maps (source, target) to an evidence tag ("curve:X" or
    "transitive"); non_edges maps every other ordered pair to its
    obstruction ("dimension" or "signature-jump").
    """

    n: int
    nodes: list[tuple[int, str]]
    edges: dict[tuple, str]
    non_edges: dict[tuple, str]
    evidence: dict[str, CurveEvidence] = field(default_factory=dict)
    codimensions: dict[tuple, int] = field(default_factory=dict)

    def outgoing(self, node: tuple[int, str]) -> list[tuple[int, str]]:
        return [dst for (src, dst) in self.edges if src == node]

    def direct_edges(self) -> set[tuple]:
        return {pair for pair, tag in self.edges.items() if tag.startswith("curve:")}

    def is_acyclic(self) -> bool:
        return all(
            self.codimensions[src] < self.codimensions[dst] for src, dst in self.edges
        )

    def to_json(self) -> dict:
        def fmt(pair):
            return {"lambda": pair[0], "xi": pair[1]}

        return {
            "n": self.n,
            "nodes": [fmt(p) for p in self.nodes],
            "edges": [
                {"from": fmt(s), "to": fmt(d), "evidence": tag}
                for (s, d), tag in sorted(self.edges.items())
            ],
            "non_edges": [
                {"from": fmt(s), "to": fmt(d), "obstruction": tag}
                for (s, d), tag in sorted(self.non_edges.items())
            ],
            "codimensions": {
                f"({lam},{xi})": c for (lam, xi), c in sorted(self.codimensions.items())
            },
        }

    def to_dot(self) -> str:
        lines = ["digraph degenerations {"]
        for lam, xi in self.nodes:
            lines.append(f'  "({lam},{xi})";')
        for (src, dst), tag in sorted(self.edges.items()):
            style = "solid" if tag.startswith("curve:") else "dashed"
            lines.append(
                f'  "({src[0]},{src[1]})" -> "({dst[0]},{dst[1]})"'
                f' [label="{tag}", style={style}];'
            )
        lines.append("}")
        return "\n".join(lines)


def _signature_blocks(pair: tuple[int, str], n: int) -> tuple[tuple, tuple]:
    metric, _ = canonical_metric(pair[0], pair[1], n)
    center, derived = restricted_signatures(metric)
    return center.as_tuple(), derived.as_tuple()


def _signature_jump(src_sigs, dst_sigs) -> bool:
    """In a limit, positive and negative counts can only drop."""
    for (ps, ms, _), (pd, md, _) in zip(src_sigs, dst_sigs):
        if pd > ps or md > ms:
            return True
    return False


def degeneration_graph(n: int, tol: float = DEFAULT_TOL, interior_samples: int = 10) -> DegenerationGraph:
    """Recompute the closure diagram from curves and obstructions."""
    if n < 4:
        raise ValueError("need n >= 4")
    nodes = list(CANONICAL_PAIRS)
    codims = {pair: codimension(pair[0], pair[1], n) for pair in nodes}

    edges: dict[tuple, str] = {}
    evidence: dict[str, CurveEvidence] = {}
    for name, fam in CURVE_FAMILIES.items():
        samples = []
        span = fam.hi - fam.lo
        ts = [fam.lo + span * (k + 0.5) / interior_samples for k in range(interior_samples)]
        near = fam.limit + (1e-4 if fam.limit == fam.lo else -1e-4)
        for t, flags in [(t, ()) for t in ts] + [(near, (FLAG_NEAR_DEGENERATE,))]:
            form, _ = classify_by_invariants_flagged(curve_sample(name, t, n), tol)
            if form.pair != fam.source:
                raise EvidenceFailure(
                    f"family {name}: sample t={t} classifies to {form.pair}, "
                    f"expected {fam.source}"
                )
            samples.append((t, form.pair, flags))
        limit_form, _ = classify_by_invariants_flagged(_limit_metric(fam, n), tol)
        if limit_form.pair != fam.target:
            raise EvidenceFailure(
                f"family {name}: limit classifies to {limit_form.pair}, "
                f"expected {fam.target}"
            )
        samples.append((fam.limit, limit_form.pair, ("limit",)))
        edges[(fam.source, fam.target)] = f"curve:{name}"
        evidence[name] = CurveEvidence(family=name, samples=tuple(samples))

    # transitive closure of the curve edges
    changed = True
    while changed:
        changed = False
        for (a, b), _tag in list(edges.items()):
            for (c, d) in list(edges):
                if c == b and (a, d) not in edges and a != d:
                    edges[(a, d)] = "transitive"
                    changed = True

    sigs = {pair: _signature_blocks(pair, n) for pair in nodes}
    non_edges: dict[tuple, str] = {}
    for src in nodes:
        for dst in nodes:
            if src == dst or (src, dst) in edges:
                continue
            if not codims[src] < codims[dst]:
                non_edges[(src, dst)] = "dimension"
            elif _signature_jump(sigs[src], sigs[dst]):
                non_edges[(src, dst)] = "signature-jump"
            else:
                raise EvidenceFailure(f"no obstruction found for non-edge {src} -> {dst}")

    graph = DegenerationGraph(
        n=n,
        nodes=nodes,
        edges=edges,
        non_edges=non_edges,
        evidence=evidence,
        codimensions=codims,
    )
    if not graph.is_acyclic():
        raise EvidenceFailure("degeneration edges do not strictly increase codimension")
    return graph


@lru_cache(maxsize=None)
def _graph_cached(n: int) -> DegenerationGraph:
    return degeneration_graph(n)


def is_closed(lam: int, xi, n: int = 4) -> bool:
    """True when the orbit has no outgoing degeneration; cross-checked as flat."""
    key = _check_pair(lam, xi)
    closed = not _graph_cached(n).outgoing((int(lam), key))
    flat = is_flat(closed_form_riemann(QSqrt3(int(lam)), xi_exact(key), 4), 0.0)
    if closed != flat:
        raise EvidenceFailure(
            f"closed-orbit and flatness disagree at ({lam}, {key}): {closed} vs {flat}"
        )
    return closed


@dataclass(frozen=True)
class OrbitReport:
    """Orbit-level invariants of one canonical class."""

    lam: int
    xi_key: str
    n: int
    dim_u: int
    dim_w: int
    stab_dim: int
    codim: int
    sig_center: SignatureTriple
    sig_derived: SignatureTriple
    closed: bool

    def to_json(self) -> dict:
        return {
            "lambda": self.lam,
            "xi": self.xi_key if self.xi_key == "sqrt3" else int(self.xi_key),
            "n": self.n,
            "dimU": self.dim_u,
            "dimW": self.dim_w,
            "stabilizer_dim": self.stab_dim,
            "codimension": self.codim,
            "signature_center": self.sig_center.as_tuple(),
            "signature_derived": self.sig_derived.as_tuple(),
            "closed": self.closed,
        }


def orbit_report(lam: int, xi, n: int) -> OrbitReport:
    key = _check_pair(lam, xi)
    dim_u, dim_w = dims_UW(lam, key, n)
    stab = stabilizer_dim(lam, key, n)
    codim = codimension(lam, key, n)
    metric, _ = canonical_metric(lam, key, n)
    sig_center, sig_derived = restricted_signatures(metric)
    return OrbitReport(
        lam=int(lam),
        xi_key=key,
        n=n,
        dim_u=dim_u,
        dim_w=dim_w,
        stab_dim=stab,
        codim=codim,
        sig_center=sig_center,
        sig_derived=sig_derived,
        closed=is_closed(lam, key, n),
    )
