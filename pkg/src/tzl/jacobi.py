"""Cyclic Jacobi eigenvalue iteration for complex Hermitian matrices."""

from __future__ import annotations

import math

import numpy as np


class JacobiConvergenceError(RuntimeError):
    def __init__(self, message: str, off_norm: float, sweeps: int):
        super().__init__(message)
        self.off_norm = off_norm
        self.sweeps = sweeps


def _off(a: np.ndarray) -> float:
    # summed directly; total minus diagonal cancels down to sqrt(eps) * |A|
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def jacobi_eigh(a, tol: float = 1e-14, max_sweeps: int = 50, vectors: bool = False):
    """Eigenvalues (ascending) of a Hermitian matrix by cyclic Jacobi sweeps.

    Each rotation annihilates one off-diagonal pair (k, l). Writing
    a_kl = |a_kl| e^{i phi}, the unitary acting on span(e_k, e_l) is
    [[c, -s e^{i phi}], [s e^{-i phi}, c]] with the usual real angle chosen
    from (a_ll - a_kk) / (2 |a_kl|). Iteration stops when the off-diagonal
    Frobenius norm drops below ``tol`` times the Frobenius norm.
    """
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    if not np.allclose(a, a.conj().T, rtol=0, atol=1e-10 * max(1.0, float(np.max(np.abs(a))) if n else 1.0)):
        raise ValueError("matrix is not Hermitian")
    a = 0.5 * (a + a.conj().T)
    v = np.eye(n, dtype=complex) if vectors else None
    scale = float(np.linalg.norm(a)) or 1.0
    sweeps = 0
    off = _off(a)
    while off > tol * scale:
        if sweeps >= max_sweeps:
            raise JacobiConvergenceError(
                f"Jacobi did not converge in {max_sweeps} sweeps (off-norm {off:.3e})", off, sweeps
            )
        sweeps += 1
        for k in range(n - 1):
            for l in range(k + 1, n):
                akl = a[k, l]
                mag = abs(akl)
                if mag <= 1e-300 or mag < 1e-18 * scale:
                    continue
                phase = akl / mag
                theta = (a[l, l].real - a[k, k].real) / (2.0 * mag)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # column update: A <- A J with J_kk = J_ll = c, J_lk = s e^{-i phi}, J_kl = -s e^{i phi}
                ak = a[:, k].copy()
                al = a[:, l].copy()
                a[:, k] = c * ak - s * np.conj(phase) * al
                a[:, l] = s * phase * ak + c * al
                ak = a[k, :].copy()
                al = a[l, :].copy()
                a[k, :] = c * ak - s * phase * al
                a[l, :] = s * np.conj(phase) * ak + c * al
                a[k, l] = 0.0
                a[l, k] = 0.0
                if v is not None:
                    vk = v[:, k].copy()
                    vl = v[:, l].copy()
                    v[:, k] = c * vk - s * np.conj(phase) * vl
                    v[:, l] = s * phase * vk + c * vl
        off = _off(a)
    w = np.real(np.diag(a))
    order = np.argsort(w, kind="stable")
    if vectors:
        return w[order], v[:, order]
    return w[order]
