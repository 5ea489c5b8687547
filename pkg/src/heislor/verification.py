"""Named end-to-end checks reproducing every published table and claim.

Each check returns a CheckResult; the CLI `verify` command and the
acceptance test suite both run them.  Tolerances are fixed here, not
configurable, because they are part of the acceptance contract.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .curvature import (
    closed_form_nabla,
    closed_form_ricci,
    closed_form_riemann,
    closed_form_u,
    curvature_report,
    derivation_identity_residual,
    frame_brackets,
    generic_curvature,
    ricci_spectrum,
)
from .liealg import aut_pattern, derivation_space_dim
from .metrics import (
    CANONICAL_PAIRS,
    Metric,
    act,
    canonical_gram,
    canonical_metric,
    xi_exact,
)
from .numerics import APPROX, EXACT, QSqrt3, bisect_root
from .orbits import codimension, degeneration_graph, is_closed
from .reduction import (
    classify,
    classify_by_invariants,
    restricted_signatures,
    verify_witness,
)

WITNESS_TOL = 1e-8
IVT_RESIDUAL = 1e-12
SPOT_CHECK_TOL = 1e-10

#: restricted signatures (center, derived) of the six classes, n-dependent
def signature_table(n: int) -> dict[tuple[int, str], tuple[tuple, tuple]]:
    return {
        (0, "0"): ((n - 3, 1, 0), (0, 1, 0)),
        (1, "0"): ((n - 3, 0, 1), (0, 0, 1)),
        (1, "1"): ((n - 3, 1, 0), (0, 0, 1)),
        (2, "0"): ((n - 2, 0, 0), (1, 0, 0)),
        (2, "sqrt3"): ((n - 3, 0, 1), (1, 0, 0)),
        (2, "2"): ((n - 3, 1, 0), (1, 0, 0)),
    }


#: codimensions of the six orbits as a function of n
def codimension_table(n: int) -> dict[tuple[int, str], int]:
    return {
        (0, "0"): 0,
        (1, "0"): n - 2,
        (1, "1"): 1,
        (2, "0"): 0,
        (2, "sqrt3"): 1,
        (2, "2"): 0,
    }


#: Ricci eigenvalues on the corner block for each class
RICCI_SPECTRA: dict[tuple[int, str], tuple[Fraction, ...]] = {
    (0, "0"): (Fraction(1, 2), Fraction(1, 2), Fraction(-1, 2), Fraction(0)),
    (1, "0"): (Fraction(0),) * 4,
    (1, "1"): (Fraction(0),) * 4,
    (2, "0"): (Fraction(9, 2), Fraction(9, 2), Fraction(-9, 2), Fraction(0)),
    (2, "sqrt3"): (Fraction(0),) * 4,
    (2, "2"): (Fraction(3, 2), Fraction(-3, 2), Fraction(-3, 2), Fraction(0)),
}

#: the six direct degeneration edges
DIRECT_EDGES = {
    ((0, "0"), (1, "1")),
    ((1, "1"), (1, "0")),
    ((2, "0"), (2, "sqrt3")),
    ((2, "sqrt3"), (1, "0")),
    ((2, "2"), (1, "1")),
    ((2, "2"), (2, "sqrt3")),
}


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    duration: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}  ({self.duration:.2f}s)  {self.detail}"


def _timed(name: str, fn) -> CheckResult:
    start = time.perf_counter()
    try:
        detail = fn()
        passed, detail = True, detail or ""
    except Exception as exc:  # noqa: BLE001 - a check failure is data, not a crash
        passed, detail = False, f"{type(exc).__name__}: {exc}"
    return CheckResult(name=name, passed=passed, detail=detail, duration=time.perf_counter() - start)


# -- randomized classification (six-class agreement + witness soundness) --------


def random_group_element(n: int, rng: np.random.Generator) -> np.ndarray:
    """A well-conditioned random element of the scaled automorphism pattern."""
    mask = aut_pattern(n).mask
    while True:
        phi = np.where(mask, rng.uniform(-1.0, 1.0, (n, n)), 0.0)
        det2 = abs(phi[0, 0] * phi[1, 1] - phi[0, 1] * phi[1, 0])
        mid = phi[2 : n - 1, 2 : n - 1]
        det_mid = abs(np.linalg.det(mid)) if mid.size else 1.0
        if det2 > 0.05 and det_mid > 0.05 and abs(phi[n - 1, n - 1]) > 0.2:
            scale = rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0])
            return scale * phi


def random_orbit_metric(
    pair: tuple[int, str], n: int, rng: np.random.Generator
) -> Metric:
    base = Metric(
        gram=canonical_gram(pair[0], float(xi_exact(pair[1])), n, exact=False),
        backend=APPROX,
    )
    return act(random_group_element(n, rng), base)


def run_randomized_classification(
    n_values=(4, 5, 6, 7, 8),
    samples: int = 1000,
    seed: int = 20240,
    collect_witness_stats: bool = True,
) -> tuple[CheckResult, CheckResult]:
    """Classify random orbit samples with both classifiers; verify witnesses.

    Returns the six-class agreement check and the witness soundness check.
    """
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    total = 0
    mismatches = []
    worst_residual = 0.0
    witness_failures = []
    for n in n_values:
        for pair in CANONICAL_PAIRS:
            for _ in range(samples):
                metric = random_orbit_metric(pair, n, rng)
                total += 1
                try:
                    form, _k, witness = classify(metric)
                    inv_form = classify_by_invariants(metric)
                except Exception as exc:  # noqa: BLE001
                    mismatches.append(f"{pair} n={n}: {type(exc).__name__}: {exc}")
                    continue
                if form.pair != pair or inv_form.pair != pair:
                    mismatches.append(
                        f"{pair} n={n}: classify={form.pair}, invariants={inv_form.pair}"
                    )
                if collect_witness_stats:
                    result = verify_witness(metric, witness, WITNESS_TOL)
                    worst_residual = max(worst_residual, result.residual)
                    if not result.ok:
                        witness_failures.append(f"{pair} n={n}: {result.detail}")
    elapsed = time.perf_counter() - start
    ok1 = not mismatches
    detail1 = (
        f"{total} classifications, zero confusion, {elapsed:.1f}s"
        if ok1
        else f"{len(mismatches)} mismatches, first: {mismatches[0]}"
    )
    crit1 = CheckResult("six-class-randomized", ok1, detail1, elapsed)
    ok9 = not witness_failures
    detail9 = (
        f"max residual {worst_residual:.2e} over {total} witnesses"
        if ok9
        else f"{len(witness_failures)} failures, first: {witness_failures[0]}"
    )
    crit9 = CheckResult("witness-soundness", ok9, detail9, elapsed)
    return crit1, crit9


# -- the remaining checks --------------------------------------------------------


def check_signature_table(n_values=tuple(range(4, 11))) -> CheckResult:
    def run():
        for n in n_values:
            expected = signature_table(n)
            for pair in CANONICAL_PAIRS:
                metric, _ = canonical_metric(pair[0], pair[1], n)
                center, derived = restricted_signatures(metric)
                if (center.as_tuple(), derived.as_tuple()) != expected[pair]:
                    raise AssertionError(
                        f"signatures at {pair}, n={n}: "
                        f"{(center.as_tuple(), derived.as_tuple())} != {expected[pair]}"
                    )
        return f"all six rows exact for n in {list(n_values)}"

    return _timed("signature-table", run)


def _tables_equal_exact(a: np.ndarray, b: np.ndarray) -> bool:
    return all(
        x == y for x, y in zip(a.reshape(-1).tolist(), b.reshape(-1).tolist())
    )


def check_curvature_oracle(n_values=(4, 6)) -> CheckResult:
    def run():
        for n in n_values:
            for pair in CANONICAL_PAIRS:
                lam = QSqrt3(pair[0])
                xi = xi_exact(pair[1])
                _, u_g, nabla_g, ops_g, ric_g = generic_curvature(lam, xi, n, exact=True)
                if not _tables_equal_exact(u_g.values, closed_form_u(lam, xi, n).values):
                    raise AssertionError(f"U mismatch at {pair}, n={n}")
                if not _tables_equal_exact(
                    nabla_g.values, closed_form_nabla(lam, xi, n).values
                ):
                    raise AssertionError(f"nabla mismatch at {pair}, n={n}")
                ops_c = closed_form_riemann(lam, xi, n)
                for key, op_g in ops_g.items():
                    if key in ops_c:
                        if not _tables_equal_exact(op_g, ops_c[key]):
                            raise AssertionError(f"R{key} mismatch at {pair}, n={n}")
                    elif any(not x.is_zero() for x in op_g.reshape(-1)):
                        # pairs touching the inert middle directions must vanish
                        raise AssertionError(f"R{key} nonzero at {pair}, n={n}")
                if not _tables_equal_exact(ric_g, closed_form_ricci(lam, xi, n)):
                    raise AssertionError(f"ric mismatch at {pair}, n={n}")
        return f"generic pipeline equals closed forms exactly, n in {list(n_values)}"

    return _timed("curvature-tables-oracle", run)


def check_flat_einstein_soliton(n_values=(4, 6)) -> CheckResult:
    def run():
        for n in n_values:
            for pair in CANONICAL_PAIRS:
                report = curvature_report(pair[0], pair[1], n, backend=EXACT)
                should_be_flat = pair == (1, "0")
                if report.flat != should_be_flat:
                    raise AssertionError(f"flatness wrong at {pair}, n={n}")
                if (report.einstein is not None) != should_be_flat:
                    raise AssertionError(f"Einstein test wrong at {pair}, n={n}")
                if report.soliton is None:
                    raise AssertionError(f"no soliton certificate at {pair}, n={n}")
                _c, d = report.soliton
                # the certificate is exact by construction; D must be a derivation
                brackets = frame_brackets(QSqrt3(pair[0]), xi_exact(pair[1]), n, exact=True)
                if derivation_identity_residual(d, brackets) != 0.0:
                    raise AssertionError(f"soliton D not a derivation at {pair}, n={n}")
        return f"flat iff (1,0); Einstein iff flat; exact soliton for all six, n in {list(n_values)}"

    return _timed("flat-einstein-soliton", run)


def check_ricci_spectra(n_values=(4, 6)) -> CheckResult:
    def run():
        for n in n_values:
            for pair, expected in RICCI_SPECTRA.items():
                spectrum = ricci_spectrum(pair[0], xi_exact(pair[1]), n, exact=True)
                got = sorted(spectrum, reverse=True)
                want = [QSqrt3(f) for f in sorted(expected, reverse=True)]
                if len(got) != len(want) or any(
                    not isinstance(g, QSqrt3) or g != w for g, w in zip(got, want)
                ):
                    raise AssertionError(f"spectrum at {pair}, n={n}: {got} != {want}")
        return "all six spectra reproduced exactly"

    return _timed("ricci-spectra", run)


def check_codimension_table(n_values=tuple(range(4, 11))) -> CheckResult:
    def run():
        for n in n_values:
            expected = codimension_table(n)
            for pair in CANONICAL_PAIRS:
                got = codimension(pair[0], pair[1], n)  # asserts the rank oracle inside
                if got != expected[pair]:
                    raise AssertionError(f"codim at {pair}, n={n}: {got} != {expected[pair]}")
            dim = derivation_space_dim(n)
            if dim != n * n - 3 * n + 7:
                raise AssertionError(f"derivation space dim at n={n}: {dim}")
        return f"codimension table, stabilizer oracle and derivation dim for n in {list(n_values)}"

    return _timed("codimension-table", run)


def check_degeneration_graph(n_values=(4, 5, 6)) -> CheckResult:
    def run():
        for n in n_values:
            graph = degeneration_graph(n)
            if graph.direct_edges() != DIRECT_EDGES:
                raise AssertionError(f"direct edges at n={n}: {graph.direct_edges()}")
            want_pairs = {
                (s, d)
                for s in CANONICAL_PAIRS
                for d in CANONICAL_PAIRS
                if s != d
            }
            covered = set(graph.edges) | set(graph.non_edges)
            if covered != want_pairs:
                raise AssertionError(f"uncovered ordered pairs at n={n}")
            sinks = [p for p in graph.nodes if not graph.outgoing(p)]
            if sinks != [(1, "0")]:
                raise AssertionError(f"closed orbits at n={n}: {sinks}")
            if not is_closed(1, "0", n) or any(
                is_closed(p[0], p[1], n) for p in CANONICAL_PAIRS if p != (1, "0")
            ):
                raise AssertionError("is_closed disagrees with the graph")
        return f"six direct edges, obstructed non-edges, unique flat sink, n in {list(n_values)}"

    return _timed("degeneration-graph", run)


def check_ivt_roots(samples: int = 100, seed: int = 7) -> CheckResult:
    sqrt3 = float(np.sqrt(3.0))
    ld = np.longdouble

    def run():
        rng = np.random.default_rng(seed)

        def phi(s):
            v = 3 * s * s - 8 * s + 5
            return np.sqrt(v) if v > 0 else ld(0)

        def solve(f):
            hi = ld(2)
            while f(hi) <= 0:
                hi = hi * 2
            return bisect_root(f, ld(5) / ld(3), hi, eps=IVT_RESIDUAL)

        worst = 0.0
        for t in map(ld, rng.uniform(0.0, sqrt3, samples)):
            f = lambda s: 3 * phi(s) - t * (3 * s - 4)  # noqa: E731
            s0 = solve(f)
            worst = max(worst, float(abs(f(s0))))
            if s0 < 5.0 / 3.0 - 1e-12:
                raise AssertionError(f"root below the domain: {s0}")
        for t in map(ld, rng.uniform(sqrt3, 20.0, samples)):
            f = lambda s: (3 + 2 * t) * phi(s) - (t + 2) * (3 * s - 4)  # noqa: E731
            s1 = solve(f)
            worst = max(worst, float(abs(f(s1))))
            if s1 < 5.0 / 3.0 - 1e-12:
                raise AssertionError(f"root below the domain: {s1}")
        s0 = float(solve(lambda s: 3 * phi(s) - 0 * (3 * s - 4)))
        if abs(s0 - 5.0 / 3.0) > SPOT_CHECK_TOL:
            raise AssertionError(f"t=0 root {s0} != 5/3")
        s1 = float(solve(lambda s: 7 * phi(s) - 4 * (3 * s - 4)))
        if abs(s1 - 11.0 / 3.0) > SPOT_CHECK_TOL:
            raise AssertionError(f"t=2 root {s1} != 11/3")
        return f"residuals <= {IVT_RESIDUAL:.0e} (worst {worst:.2e}), spot checks hit"

    return _timed("ivt-roots", run)


def run_all(
    n_min: int = 4,
    n_max: int = 8,
    samples: int = 200,
    seed: int = 20240,
) -> list[CheckResult]:
    """The full verification suite over n in [n_min, n_max]."""
    n_values = tuple(range(n_min, n_max + 1))
    table_ns = tuple(range(n_min, max(n_max, 10) + 1))
    crit1, crit9 = run_randomized_classification(n_values, samples=samples, seed=seed)
    return [
        crit1,
        check_signature_table(table_ns),
        check_curvature_oracle((4, 6)),
        check_flat_einstein_soliton((4, 6)),
        check_ricci_spectra((4, 6)),
        check_codimension_table(table_ns),
        check_degeneration_graph(tuple(n for n in (4, 5, 6) if n_min <= n <= max(n_max, 6))),
        check_ivt_roots(),
        crit9,
    ]
