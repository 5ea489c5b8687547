"""Gram matrices, signatures, the group action and canonical representatives."""

import json

import numpy as np
import pytest

from heislor._linalg import exact_array, minkowski_gram, to_float
from heislor.liealg import build_algebra, center_and_derived
from heislor.metrics import (
    APPROX,
    CANONICAL_PAIRS,
    EXACT,
    AsymmetricInput,
    DependentBasis,
    Metric,
    NotARepresentative,
    WrongSignature,
    act,
    canonical_gram,
    canonical_metric,
    factor_metric,
    metric_from_json,
    metric_to_json,
    metric_to_json_str,
    restrict,
    shear_matrix,
    signature_of,
    xi_exact,
    xi_float,
)
from heislor.numerics import QSqrt3


def test_signature_identity_block():
    for n in (4, 7):
        sig = signature_of(minkowski_gram(n))
        assert sig.as_tuple() == (n - 1, 1, 0)
        sig_exact = signature_of(minkowski_gram(n, exact=True))
        assert sig_exact.as_tuple() == (n - 1, 1, 0)


def test_signature_one_by_one_zero():
    assert signature_of(np.array([[0.0]])).as_tuple() == (0, 0, 1)
    assert signature_of(exact_array([[0]])).as_tuple() == (0, 0, 1)


def test_signature_rejects_asymmetric():
    with pytest.raises(AsymmetricInput):
        signature_of(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_derived_restriction_of_flat_class_is_null():
    metric, _ = canonical_metric(1, "0", 5)
    basis = exact_array([[0], [0], [0], [0], [1]])
    block = restrict(metric, basis)
    assert signature_of(block).as_tuple() == (0, 0, 1)


def test_act_identity_and_isotropy():
    metric = Metric(gram=minkowski_gram(4), backend=APPROX)
    assert np.allclose(act(np.eye(4), metric).gram, metric.gram)
    # pseudo-orthogonal elements fix the canonical form
    theta = 0.37
    k = np.eye(4)
    k[0, 0] = k[3, 3] = np.cosh(theta)
    k[0, 3] = k[3, 0] = np.sinh(theta)
    assert np.allclose(act(k, metric).gram, metric.gram, atol=1e-12)


def test_act_matches_direct_multiplication_oracle():
    # oracle: plain g^-T I g^-1 for the (1, 0) shear at n = 4
    g = shear_matrix(1.0, 0.0, 4, exact=False)
    ginv = np.linalg.inv(g)
    expected = ginv.T @ minkowski_gram(4) @ ginv
    got = act(g, Metric(gram=minkowski_gram(4), backend=APPROX)).gram
    assert np.allclose(got, expected)
    assert np.allclose(
        got,
        np.array(
            [
                [1.0, 0, 0, -1],
                [0, 1, 0, 0],
                [0, 0, 1, 0],
                [-1, 0, 0, 0],
            ]
        ),
    )


def test_act_group_action_law():
    rng = np.random.default_rng(4)
    metric = Metric(gram=minkowski_gram(5), backend=APPROX)
    for _ in range(10):
        g1 = rng.uniform(-1, 1, (5, 5)) + 2 * np.eye(5)
        g2 = rng.uniform(-1, 1, (5, 5)) + 2 * np.eye(5)
        lhs = act(g1 @ g2, metric).gram
        rhs = act(g1, act(g2, metric)).gram
        assert np.allclose(lhs, rhs, atol=1e-10)


def test_signature_invariant_under_action():
    rng = np.random.default_rng(5)
    for pair in CANONICAL_PAIRS:
        metric, _ = canonical_metric(pair[0], pair[1], 5, backend=APPROX)
        for _ in range(5):
            g = rng.uniform(-1, 1, (5, 5)) + 2 * np.eye(5)
            assert (
                signature_of(act(g, metric).gram).as_tuple()
                == signature_of(metric.gram).as_tuple()
            )


def test_restrict_center_direction_formula():
    """<y, y> = (xi^2+1)(lam^2-xi^2-1) for y = lam(x1 + xi x_(n-1)) - (xi^2+1) x_n."""
    n = 5
    for lam_i, key in CANONICAL_PAIRS:
        metric, frame = canonical_metric(lam_i, key, n)
        lam = QSqrt3(lam_i)
        xi = xi_exact(key)
        coeffs = np.empty(n, dtype=object)
        coeffs[:] = [QSqrt3(0)] * n
        coeffs[0] = lam
        coeffs[n - 2] = lam * xi
        coeffs[n - 1] = -(xi * xi + 1)
        y = frame.columns @ coeffs  # frame vector in standard coordinates
        block = restrict(metric, y.reshape(n, 1))
        expected = (xi * xi + 1) * (lam * lam - xi * xi - 1)
        assert block[0, 0] == expected


def test_restrict_derived_ideal_formula():
    """Restriction to the derived ideal is the 1x1 matrix [lam^2 - 1]."""
    for lam_i, key in CANONICAL_PAIRS:
        metric, _ = canonical_metric(lam_i, key, 6)
        _, derived = center_and_derived(build_algebra(6))
        block = restrict(metric, derived)
        assert block[0, 0] == QSqrt3(lam_i * lam_i - 1)


def test_restrict_full_space_is_gram():
    metric, _ = canonical_metric(2, "2", 4, backend=APPROX)
    assert np.allclose(restrict(metric, np.eye(4)), metric.gram)


def test_restrict_rejects_dependent_basis():
    metric, _ = canonical_metric(0, "0", 4, backend=APPROX)
    b = np.zeros((4, 2))
    b[:, 0] = [1, 0, 0, 0]
    b[:, 1] = [2, 0, 0, 0]
    with pytest.raises(DependentBasis):
        restrict(metric, b)


def test_canonical_metric_identity_pair():
    metric, frame = canonical_metric(0, 0, 5)
    assert np.array_equal(to_float(metric.gram), minkowski_gram(5))
    assert np.array_equal(to_float(frame.columns), np.eye(5))


def test_canonical_metric_rejects_non_representative():
    with pytest.raises(NotARepresentative):
        canonical_metric(3, 3, 4)
    with pytest.raises(NotARepresentative):
        canonical_metric(0, 1, 4)


def test_canonical_frame_entries():
    # the (2, sqrt3) frame sends e_(n-1) to sqrt3 e_1 + e_(n-1)
    for n in (4, 6):
        _, frame = canonical_metric(2, "sqrt3", n)
        col = frame.columns[:, n - 2]
        assert col[0] == QSqrt3(0, 1)
        assert col[n - 2] == QSqrt3(1)


@pytest.mark.parametrize("n", range(4, 11))
def test_canonical_frames_pseudo_orthonormal_exact(n):
    ipq = minkowski_gram(n, exact=True)
    for pair in CANONICAL_PAIRS:
        metric, frame = canonical_metric(pair[0], pair[1], n)
        check = frame.columns.T @ metric.gram @ frame.columns
        assert all(
            check[i, j] == ipq[i, j] for i in range(n) for j in range(n)
        )


def test_factor_metric_round_trip():
    rng = np.random.default_rng(6)
    for pair in CANONICAL_PAIRS:
        base = canonical_gram(pair[0], xi_float(pair[1]), 5, exact=False)
        g = rng.uniform(-1, 1, (5, 5)) + 2 * np.eye(5)
        metric = act(g, Metric(gram=base, backend=APPROX))
        m = factor_metric(metric)
        minv = np.linalg.inv(m)
        assert np.max(np.abs(minv.T @ minkowski_gram(5) @ minv - metric.gram)) < 1e-9


def test_factor_metric_rejects_definite():
    with pytest.raises(WrongSignature):
        factor_metric(Metric(gram=np.eye(4), backend=APPROX))


def test_metric_json_round_trip_exact():
    metric, _ = canonical_metric(2, "sqrt3", 4)
    blob = metric_to_json_str(metric)
    again = metric_from_json(json.loads(blob))
    assert metric_to_json_str(again) == blob
    assert again.backend == EXACT
    assert again.gram[0, 2] == -QSqrt3(0, 1)


def test_metric_json_round_trip_approx():
    metric, _ = canonical_metric(1, "1", 5, backend=APPROX)
    blob = metric_to_json_str(metric)
    again = metric_from_json(json.loads(blob))
    assert metric_to_json_str(again) == blob


def test_metric_json_shape_validation():
    payload = metric_to_json(canonical_metric(0, "0", 4, backend=APPROX)[0])
    payload["n"] = 5
    with pytest.raises(ValueError):
        metric_from_json(payload)
