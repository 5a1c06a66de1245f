import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tzl.jacobi import JacobiConvergenceError, jacobi_eigh


def _hermitian(seed, n):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return a + a.conj().T


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 12))
def test_matches_lapack(seed, n):
    a = _hermitian(seed, n)
    assert np.max(np.abs(jacobi_eigh(a) - np.linalg.eigvalsh(a))) <= 1e-12 * max(1, np.abs(a).max())


def test_vectors_diagonalise():
    a = _hermitian(3, 8)
    w, v = jacobi_eigh(a, vectors=True)
    assert np.max(np.abs(v.conj().T @ a @ v - np.diag(w))) <= 1e-12
    assert np.max(np.abs(v.conj().T @ v - np.eye(8))) <= 1e-13


def test_rejects_non_hermitian():
    with pytest.raises(ValueError):
        jacobi_eigh(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_sweep_cap():
    with pytest.raises(JacobiConvergenceError) as info:
        jacobi_eigh(_hermitian(1, 10), tol=1e-30, max_sweeps=1)
    assert info.value.sweeps == 1 and info.value.off_norm > 0
