import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qflow.algebra import (
    QTensor,
    eig_sym3,
    frobenius,
    from_matrix,
    norm,
    symmetric_traceless,
    to_components,
    to_matrix,
    uniaxial,
)
from qflow.errors import InvalidInputError

finite = st.floats(-10.0, 10.0, allow_nan=False)
components = arrays(np.float64, (5,), elements=finite)


def jacobi_eigenvalues(a, sweeps=50):
    """Cyclic Jacobi rotations in plain Python: an independent eigenvalue oracle."""
    a = [list(map(float, row)) for row in a]
    for _ in range(sweeps):
        off = sum(a[i][j] ** 2 for i in range(3) for j in range(3) if i != j)
        if off < 1e-30:
            break
        for p_ in range(3):
            for q in range(p_ + 1, 3):
                if abs(a[p_][q]) < 1e-300:
                    continue
                theta = 0.5 * np.arctan2(2 * a[p_][q], a[q][q] - a[p_][p_])
                c, s = np.cos(theta), np.sin(theta)
                for k in range(3):
                    akp, akq = a[k][p_], a[k][q]
                    a[k][p_], a[k][q] = c * akp - s * akq, s * akp + c * akq
                for k in range(3):
                    apk, aqk = a[p_][k], a[q][k]
                    a[p_][k], a[q][k] = c * apk - s * aqk, s * apk + c * aqk
    return sorted((a[i][i] for i in range(3)), reverse=True)


@given(components)
def test_components_round_trip(c):
    m = to_matrix(c)
    assert np.allclose(m, m.T)
    assert abs(np.trace(m)) <= 1e-12
    assert np.array_equal(to_components(m), c)


@given(arrays(np.float64, (3, 3), elements=finite))
def test_projection_idempotent(m):
    p = symmetric_traceless(m)
    assert np.allclose(symmetric_traceless(p), p, atol=1e-12)


def test_qtensor_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        from_matrix(np.ones((2, 2)))
    with pytest.raises(InvalidInputError):
        from_matrix(np.full((3, 3), np.nan))


def test_qtensor_basics():
    q = from_matrix(np.diag([2.0, -1.0, -1.0]))
    assert q == QTensor(to_components(np.diag([2.0, -1.0, -1.0])))
    assert q.norm == pytest.approx(np.sqrt(6.0))
    assert np.allclose(np.asarray(q), np.diag([2.0, -1.0, -1.0]))


@pytest.mark.parametrize("s", [0.3, 1.0, 1.5, -0.7])
def test_uniaxial_norm(s):
    n = np.array([1.0, 2.0, 2.0]) / 3.0
    q = uniaxial(s, n)
    assert norm(q) == pytest.approx(np.sqrt(2.0 / 3.0) * abs(s), rel=1e-14)
    assert frobenius(q, q) == pytest.approx(2.0 / 3.0 * s * s, rel=1e-14)


@settings(max_examples=200)
@given(components)
def test_eig_matches_jacobi_oracle(c):
    q = to_matrix(c)
    eig = eig_sym3(q)
    scale = max(1.0, np.abs(q).max())
    assert np.allclose(eig.values, jacobi_eigenvalues(q), atol=1e-11 * scale)
    v = eig.vectors
    assert np.allclose(v.T @ v, np.eye(3), atol=1e-12)
    assert np.allclose(eig.reconstruct(), q, atol=1e-12 * scale)


def test_eig_vectorised_against_numpy():
    rng = np.random.default_rng(5)
    q = symmetric_traceless(rng.normal(size=(4000, 3, 3)))
    eig = eig_sym3(q)
    ref = np.linalg.eigvalsh(q)[..., ::-1]
    assert np.abs(eig.values - ref).max() < 1e-13


def test_uniaxial_eigenframe():
    n = np.array([0.0, 0.6, 0.8])
    eig = eig_sym3(uniaxial(1.5, n))
    assert np.allclose(eig.values, [1.0, -0.5, -0.5], atol=1e-14)
    assert abs(abs(eig.n1 @ n) - 1.0) < 1e-14
    assert eig.gap == pytest.approx(1.5)


def test_zero_tensor_gets_identity_frame():
    eig = eig_sym3(np.zeros((3, 3)))
    assert np.array_equal(eig.values, np.zeros(3))
    assert np.array_equal(eig.vectors, np.eye(3))


def test_sign_convention_is_deterministic():
    q = to_matrix(np.array([0.3, -0.2, 0.5, 0.1, -0.4]))
    a, b = eig_sym3(q).vectors, eig_sym3(-(-q)).vectors
    assert np.array_equal(a, b)
    big = np.argmax(np.abs(a), axis=0)
    assert np.all(a[big, np.arange(3)] > 0)
