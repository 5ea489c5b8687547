"""Curvature tables, their generic oracle, and the soliton machinery."""

from fractions import Fraction

import numpy as np
import pytest

from heislor.curvature import (
    closed_form_nabla,
    closed_form_ricci,
    closed_form_riemann,
    closed_form_u,
    curvature_report,
    derivation_identity_residual,
    einstein_test,
    frame_brackets,
    frame_signs,
    generic_curvature,
    is_flat,
    levi_civita,
    ricci_spectrum,
    riemann,
    riemann_apply,
    soliton_certificate,
    u_map,
)
from heislor.metrics import CANONICAL_PAIRS, NotARepresentative, xi_exact
from heislor.numerics import QSqrt3

HALF = QSqrt3(Fraction(1, 2))


def _exact_frame(pair, n):
    return QSqrt3(pair[0]), xi_exact(pair[1])


def _inner(u, v, eps):
    return sum(e * a * b for e, a, b in zip(eps, u, v))


# -- U-map ------------------------------------------------------------------------


def test_u_map_defining_identity_random():
    """2 <U(x,y), z> = <[z,x], y> + <x, [z,y]> on random frame triples."""
    lam, xi = 1.3, 0.4
    n = 5
    brackets = frame_brackets(lam, xi, n, exact=False)
    eps = frame_signs(n)
    u = u_map(brackets, eps).values
    rng = np.random.default_rng(0)
    for _ in range(20):
        i, j, k = rng.integers(0, n, 3)
        lhs = 2 * _inner(u[i, j], np.eye(n)[k], eps)
        rhs = _inner(brackets[k, i], np.eye(n)[j], eps) + _inner(
            np.eye(n)[i], brackets[k, j], eps
        )
        assert lhs == pytest.approx(rhs, abs=1e-12)


def test_u_component_examples():
    n = 4
    # (1, 0): U(x1, x1) = lam x2
    u = closed_form_u(QSqrt3(1), QSqrt3(0), n).values
    assert u[0, 0, 1] == QSqrt3(1)
    # any pair: U(x2, x2) = 0
    for pair in CANONICAL_PAIRS:
        u = closed_form_u(*_exact_frame(pair, n), n).values
        assert all(x.is_zero() for x in u[1, 1])


def test_u_middle_directions_inert():
    # central orthogonal directions contribute nothing for n >= 6
    u = u_map(frame_brackets(QSqrt3(2), QSqrt3(2), 6), frame_signs(6)).values
    for j in range(6):
        assert all(x.is_zero() for x in u[2, j])
        assert all(x.is_zero() for x in u[3, j])


def test_u_symmetry():
    table = u_map(frame_brackets(QSqrt3(2), xi_exact("sqrt3"), 5), frame_signs(5))
    assert table.symmetry_residual() == 0.0


# -- connection --------------------------------------------------------------------


def test_nabla_component_examples():
    n = 4
    # (2, 2): nabla_{x1} x1 = lam x2 = 2 x2
    nb = closed_form_nabla(QSqrt3(2), QSqrt3(2), n).values
    assert nb[0, 0, 1] == QSqrt3(2)
    # (0, 0): nabla_{x2} x2 = 0
    nb = closed_form_nabla(QSqrt3(0), QSqrt3(0), n).values
    assert all(x.is_zero() for x in nb[1, 1])


def test_torsion_free():
    for pair in CANONICAL_PAIRS:
        lam, xi = _exact_frame(pair, 5)
        brackets = frame_brackets(lam, xi, 5)
        nabla = levi_civita(u_map(brackets, frame_signs(5)), brackets).values
        for i in range(5):
            for j in range(5):
                diff = nabla[i, j] - nabla[j, i] - brackets[i, j]
                assert all(x.is_zero() for x in diff)


def test_metric_compatibility():
    """<nabla_X Y, Z> + <Y, nabla_X Z> = 0 for frame directions (ad-invariance)."""
    lam, xi = QSqrt3(2), xi_exact("sqrt3")
    n = 5
    eps = frame_signs(n)
    brackets = frame_brackets(lam, xi, n)
    nabla = levi_civita(u_map(brackets, eps), brackets).values
    eye = np.eye(n, dtype=int)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                val = _inner(nabla[i, j], eye[k], eps) + _inner(eye[j], nabla[i, k], eps)
                assert QSqrt3.coerce(val).is_zero()


def test_first_bianchi():
    lam, xi = QSqrt3(1), QSqrt3(1)
    n = 4
    brackets = frame_brackets(lam, xi, n)
    ops = riemann(levi_civita(u_map(brackets, frame_signs(n)), brackets), brackets)
    rng = np.random.default_rng(1)
    for _ in range(15):
        i, j, k = rng.integers(0, n, 3)
        total = (
            riemann_apply(ops, i, j, k)
            + riemann_apply(ops, j, k, i)
            + riemann_apply(ops, k, i, j)
        )
        assert all(x.is_zero() for x in total)


# -- curvature tensor ----------------------------------------------------------------


def test_riemann_flat_class_vanishes():
    ops = closed_form_riemann(QSqrt3(1), QSqrt3(0), 5)
    assert is_flat(ops, 0.0)
    _, _, _, ops_g, _ = generic_curvature(QSqrt3(1), QSqrt3(0), 5)
    assert is_flat(ops_g, 0.0)


def test_riemann_component_example_origin():
    # (0, 0): 4 R(x1, x2) x1 = (lam^4 - lam^2(xi^2-2) - 3) x2 = -3 x2
    ops = closed_form_riemann(QSqrt3(0), QSqrt3(0), 4)
    col = ops[(0, 1)][:, 0]
    assert col[1] == -3 * HALF * HALF
    assert col[1] == QSqrt3(Fraction(-3, 4))


def test_riemann_component_example_light_cone():
    # (1, 1): 4 R(x2, x_{n-1}) x_{n-1} = -3 xi^2 (lam^2 - 1) x2 = 0
    ops = closed_form_riemann(QSqrt3(1), QSqrt3(1), 6)
    assert all(x.is_zero() for x in ops[(1, 4)][:, 4])


def test_riemann_antisymmetry():
    ops = closed_form_riemann(QSqrt3(2), QSqrt3(2), 4)
    got = riemann_apply(ops, 1, 0, 0)
    assert all((a + b).is_zero() for a, b in zip(got, ops[(0, 1)][:, 0]))
    assert all(x.is_zero() for x in riemann_apply(ops, 1, 1, 0))


# -- Ricci ---------------------------------------------------------------------------


def test_ricci_component_examples():
    n = 4
    # (1, 1): 2 Ric(x2) = (1 - 3 + 1 + 1) x2 = 0
    ric = closed_form_ricci(QSqrt3(1), QSqrt3(1), n)
    assert all(x.is_zero() for x in ric[:, 1])
    # (0, 0): Ric = diag(1/2, 1/2, 0, ..., 0, -1/2)
    ric = closed_form_ricci(QSqrt3(0), QSqrt3(0), 6)
    diag_expected = [HALF, HALF, QSqrt3(0), QSqrt3(0), QSqrt3(0), -HALF]
    for i in range(6):
        for j in range(6):
            expected = diag_expected[i] if i == j else QSqrt3(0)
            assert ric[i, j] == expected
    # (1, 0): Ric = 0
    ric = closed_form_ricci(QSqrt3(1), QSqrt3(0), 4)
    assert all(x.is_zero() for x in ric.reshape(-1))


def test_ricci_example_two_zero():
    # (2, 0): 2 Ric(x1) = -15 x1 + 12 x_n  (lam^4 - lam^2 xi^2 - 1 = 15, etc.)
    ric = closed_form_ricci(QSqrt3(2), QSqrt3(0), 5)
    assert ric[0, 0] == -15 * HALF
    assert ric[4, 0] == 12 * HALF
    assert 2 * 2 ** 3 - 2 * (0 + 2) == 12  # coefficient oracle


def test_ricci_self_adjointness():
    # I_(n-1,1) * Ric is symmetric for every class
    for pair in CANONICAL_PAIRS:
        lam, xi = _exact_frame(pair, 5)
        ric = closed_form_ricci(lam, xi, 5)
        eps = frame_signs(5)
        for i in range(5):
            for j in range(5):
                assert eps[i] * ric[i, j] == eps[j] * ric[j, i]


def test_generic_equals_closed_forms_exactly():
    for n in (4, 6):
        for pair in CANONICAL_PAIRS:
            lam, xi = _exact_frame(pair, n)
            _, u_g, nb_g, ops_g, ric_g = generic_curvature(lam, xi, n)
            assert all(
                a == b
                for a, b in zip(
                    u_g.values.reshape(-1), closed_form_u(lam, xi, n).values.reshape(-1)
                )
            )
            assert all(
                a == b
                for a, b in zip(
                    nb_g.values.reshape(-1),
                    closed_form_nabla(lam, xi, n).values.reshape(-1),
                )
            )
            ops_c = closed_form_riemann(lam, xi, n)
            for key, op in ops_g.items():
                target = ops_c.get(key)
                if target is None:
                    assert all(x.is_zero() for x in op.reshape(-1))
                else:
                    assert all(a == b for a, b in zip(op.reshape(-1), target.reshape(-1)))
            assert all(
                a == b
                for a, b in zip(ric_g.reshape(-1), closed_form_ricci(lam, xi, n).reshape(-1))
            )


# -- flat / Einstein / soliton --------------------------------------------------------


def test_flat_only_at_one_zero():
    for pair in CANONICAL_PAIRS:
        lam, xi = _exact_frame(pair, 4)
        assert is_flat(closed_form_riemann(lam, xi, 4), 0.0) == (pair == (1, "0"))


def test_einstein_only_at_flat_class():
    for pair in CANONICAL_PAIRS:
        lam, xi = _exact_frame(pair, 5)
        c = einstein_test(closed_form_ricci(lam, xi, 5))
        if pair == (1, "0"):
            assert c == QSqrt3(0)
        else:
            assert c is None


def test_einstein_rejects_nilpotent_ricci():
    # (1, 1): Ric(x1) = (1/2) x1 - (1/2) x_n is not a multiple of x1
    ric = closed_form_ricci(QSqrt3(1), QSqrt3(1), 4)
    assert ric[0, 0] == HALF and ric[3, 0] == -HALF
    assert einstein_test(ric) is None


def test_soliton_flat_class_trivial():
    c, d = soliton_certificate(QSqrt3(1), QSqrt3(0), 4)
    assert c == QSqrt3(0)
    assert all(x.is_zero() for x in d.reshape(-1))


def test_soliton_origin_class_constant():
    # derivation constraint D_nn = D_11 + D_22 forces -1/2 - c = 2 (1/2 - c)
    c, d = soliton_certificate(QSqrt3(0), QSqrt3(0), 5)
    assert c == QSqrt3(Fraction(3, 2))
    assert d[4, 4] == d[0, 0] + d[1, 1]
    brackets = frame_brackets(QSqrt3(0), QSqrt3(0), 5)
    assert derivation_identity_residual(d, brackets) == 0.0


def test_soliton_exists_for_all_classes_exactly():
    for n in (4, 6):
        for pair in CANONICAL_PAIRS:
            lam, xi = _exact_frame(pair, n)
            cert = soliton_certificate(lam, xi, n)
            assert cert is not None
            c, d = cert
            ric = closed_form_ricci(lam, xi, n)
            recon = d.copy()
            for i in range(n):
                recon[i, i] = recon[i, i] + c
            assert all(a == b for a, b in zip(recon.reshape(-1), ric.reshape(-1)))
            assert derivation_identity_residual(d, frame_brackets(lam, xi, n)) == 0.0


def test_soliton_approx_backend():
    cert = soliton_certificate(2.0, 2.0, 5, exact=False)
    assert cert is not None
    c, d = cert
    ric = closed_form_ricci(2.0, 2.0, 5, exact=False)
    assert np.max(np.abs(ric - (c * np.eye(5) + d))) < 1e-12


# -- spectra and reports ---------------------------------------------------------------


def test_ricci_spectra_exact_values():
    expected = {
        (0, "0"): [HALF, HALF, QSqrt3(0), -HALF],
        (1, "0"): [QSqrt3(0)] * 4,
        (1, "1"): [QSqrt3(0)] * 4,
        (2, "0"): [QSqrt3(Fraction(9, 2)), QSqrt3(Fraction(9, 2)), QSqrt3(0), QSqrt3(Fraction(-9, 2))],
        (2, "sqrt3"): [QSqrt3(0)] * 4,
        (2, "2"): [QSqrt3(Fraction(3, 2)), QSqrt3(0), QSqrt3(Fraction(-3, 2)), QSqrt3(Fraction(-3, 2))],
    }
    for pair, want in expected.items():
        for n in (4, 7):
            got = ricci_spectrum(QSqrt3(pair[0]), xi_exact(pair[1]), n)
            assert got == want


def test_curvature_report_round_trip():
    report = curvature_report(2, "sqrt3", 5)
    blob = report.to_json()
    assert blob["flat"] is False and blob["einstein"] is None
    assert blob["xi"] == "sqrt3"
    assert blob["soliton"] is not None
    assert set(blob["spectrum"]) == {"0"}
    with pytest.raises(NotARepresentative):
        curvature_report(3, "0", 4)


def test_u_map_validates_frame_gram():
    from heislor.curvature import FrameNotPseudoOrthonormal

    brackets = frame_brackets(1.0, 0.0, 4, exact=False)
    eps = frame_signs(4)
    good = np.diag([1.0, 1, 1, -1])
    u_map(brackets, eps, frame_gram=good)  # accepted
    with pytest.raises(FrameNotPseudoOrthonormal):
        u_map(brackets, eps, frame_gram=np.eye(4))
