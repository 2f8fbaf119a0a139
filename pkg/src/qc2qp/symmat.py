"""Dense symmetric matrices and the spectral primitives used everywhere else.

Symmetric matrices are plain ``float64`` ndarrays that went through :func:`sym`,
which mirrors the upper triangle so that ``A[i, j] == A[j, i]`` holds bit for
bit. The eigensolver is a cyclic Jacobi method; the matrices in this package
are at most a few dozen rows, where Jacobi is accurate and cheap.
"""
from typing import NamedTuple

import numpy as np

from .errors import EigenConvergenceError

__all__ = [
    "sym",
    "EigenDecomposition",
    "inner_product",
    "eigendecompose",
    "numerical_rank",
    "is_psd",
    "max_abs",
]


def sym(a):
    """Return a read-only symmetric copy of ``a`` built from its upper triangle."""
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    upper = np.triu(a)
    out = upper + np.triu(a, 1).T
    out.flags.writeable = False
    return out


def max_abs(a):
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


class EigenDecomposition(NamedTuple):
    """``basis @ diag(eigenvalues) @ basis.T`` with eigenvalues descending."""

    basis: np.ndarray
    eigenvalues: np.ndarray

    def reconstruct(self):
        return (self.basis * self.eigenvalues) @ self.basis.T


def inner_product(a, b):
    """Trace inner product ``Tr(A B^T)``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.sum(a * b))


def _jacobi(a, max_sweeps):
    a = np.array(a, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    if n < 2:
        return np.diag(a).copy(), v
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n), v
    tol = np.finfo(float).eps * scale
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.triu(a, 1) ** 2))
        if off <= tol:
            return np.diag(a).copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q]
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :]
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    raise EigenConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")


def eigendecompose(a, max_sweeps=100):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Eigenvalues come back sorted in descending order; equal eigenvalues keep
    the column order produced by the sweeps, so results are reproducible.
    """
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    w, v = _jacobi(a, max_sweeps)
    order = np.argsort(-w, kind="stable")
    return EigenDecomposition(v[:, order], w[order])


def numerical_rank(a, eps):
    """Number of singular values strictly greater than ``eps``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    w = eigendecompose(a).eigenvalues
    return int(np.sum(np.abs(w) > eps))


def is_psd(a, tol=0.0):
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    w = eigendecompose(a).eigenvalues
    return bool(w.size == 0 or w[-1] >= -tol)
