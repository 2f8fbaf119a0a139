"""Rank-one decompositions of PSD matrices constrained by quadratic forms.

A decomposition writes ``X = sum_i x_i x_i'`` with ``rank(X)`` terms. The
procedures here start from the spectral one and mix pairs of vectors with
plane rotations. A rotation keeps ``x_i x_i' + x_j x_j'`` fixed while moving
the form values ``x' G x`` around, so a pair with values of opposite sign can
always be turned into one isotropic vector plus a remainder.
"""
from dataclasses import dataclass
import math

import numpy as np

from .errors import DecompositionStall, NoCommonIsotropicVector
from .symmat import eigendecompose, max_abs

ZERO = "zero"
NONPOSITIVE = "nonpositive"


@dataclass(frozen=True)
class RankOneDecomposition:
    vectors: tuple
    reconstruction_residual: float

    def __len__(self):
        return len(self.vectors)

    def matrix(self):
        if not self.vectors:
            return None
        V = np.column_stack(self.vectors)
        return V @ V.T

    def form_values(self, G):
        return np.array([float(x @ G @ x) for x in self.vectors])


def _canonical_sign(x):
    """Flip ``x`` so that its first nonzero entry is positive."""
    nz = np.flatnonzero(np.abs(x) > 0)
    if nz.size and x[nz[0]] < 0:
        return -x
    return x


def _decomposition(X, vectors):
    vectors = tuple(np.array(v, dtype=float) for v in vectors)
    if vectors:
        V = np.column_stack(vectors)
        res = max_abs(np.asarray(X) - V @ V.T)
    else:
        res = max_abs(X)
    return RankOneDecomposition(vectors, res)


def spectral_rank_one(X, eps2):
    """``sqrt(lam_i) q_i`` for every eigenpair with ``lam_i >= eps2``."""
    X = np.asarray(X, dtype=float)
    ed = eigendecompose(X)
    lam = ed.eigenvalues
    if lam.size and lam[-1] < -10.0 * eps2:
        raise ValueError(f"matrix is not positive semidefinite (eigenvalue {lam[-1]:.3g})")
    vecs = [_canonical_sign(math.sqrt(l) * ed.basis[:, i]) for i, l in enumerate(lam) if l >= eps2]
    return _decomposition(X, vecs)


def _smaller_root(a, b, c):
    """Root of smaller magnitude of ``c g^2 + 2 b g + a = 0`` with ``a c < 0``."""
    disc = math.sqrt(b * b - a * c)
    sgn = 1.0 if b >= 0 else -1.0
    return -a / (b + sgn * disc)


def rotate_pair(xi, xj, G):
    """Rotate ``(xi, xj)`` so the first output is ``G``-isotropic.

    Requires ``xi'G xi`` and ``xj'G xj`` of opposite sign. Returns
    ``u = (xi + g xj)/sqrt(1+g^2)`` and ``v = (xj - g xi)/sqrt(1+g^2)``, where
    ``g`` is the smaller root of ``(xj'G xj) g^2 + 2 (xi'G xj) g + xi'G xi = 0``.
    ``u u' + v v' = xi xi' + xj xj'``.
    """
    xi = np.asarray(xi, dtype=float)
    xj = np.asarray(xj, dtype=float)
    a = float(xi @ G @ xi)
    b = float(xi @ G @ xj)
    c = float(xj @ G @ xj)
    if not a * c < 0:
        raise ValueError(f"form values must have opposite signs (got {a:.3g}, {c:.3g})")
    g = _smaller_root(a, b, c)
    r = math.sqrt(1.0 + g * g)
    return (xi + g * xj) / r, (xj - g * xi) / r


def _balance(vectors, G, mode, eps2):
    """Rotate pairs until every vector meets its target; returns the new list."""
    if mode not in (ZERO, NONPOSITIVE):
        raise ValueError(f"unknown mode {mode!r}")
    done = []
    active = [np.asarray(v, dtype=float) for v in vectors]

    def failing(val):
        return abs(val) >= eps2 if mode == ZERO else val >= eps2

    while True:
        vals = [float(v @ G @ v) for v in active]
        bad = [i for i, val in enumerate(vals) if failing(val)]
        if not bad:
            break
        i = max(bad, key=lambda k: abs(vals[k]))
        partners = [j for j in range(len(active)) if j != i and vals[j] * vals[i] < 0]
        if not partners:
            raise DecompositionStall(
                f"vector with form value {vals[i]:.3g} has no partner of opposite sign")
        j = max(partners, key=lambda k: abs(vals[k]))
        u, v = rotate_pair(active[i], active[j], G)
        done.append(u)
        active = [w for k, w in enumerate(active) if k not in (i, j)] + [v]
    return done + active


def balanced_decomposition(X, G, mode=ZERO, eps2=1e-5):
    """Rank-one decomposition of ``X`` whose terms respect the form ``G``.

    ``mode="zero"`` drives every ``|x'G x|`` below ``eps2``;
    ``mode="nonpositive"`` drives every ``x'G x`` below ``eps2``. Needs
    ``G . X`` within ``eps2 * scale`` of zero (resp. not above it), with
    ``scale = 1 + max|X| max|G|``.
    """
    X = np.asarray(X, dtype=float)
    G = np.asarray(G, dtype=float)
    scale = 1.0 + max_abs(X) * max_abs(G)
    gx = float(np.sum(G * X))
    if mode == ZERO and abs(gx) > eps2 * scale:
        raise ValueError(f"|G . X| = {abs(gx):.3g} exceeds tolerance")
    if mode == NONPOSITIVE and gx > eps2 * scale:
        raise ValueError(f"G . X = {gx:.3g} is positive")
    base = spectral_rank_one(X, eps2)
    vecs = _balance(base.vectors, G, mode, eps2)
    return _decomposition(X, [_canonical_sign(v) for v in vecs])


# ------------------------------------------------------------ joint isotropy


def _isotropic_frame(A, tol):
    """Orthonormal basis ``U`` with as many ``A``-isotropic columns as rotations allow.

    Returns ``(U, iso)`` where ``iso`` flags the columns with ``|u'Au| < tol``.
    """
    r = A.shape[0]
    cols = [np.eye(r)[:, k] for k in range(r)]
    done = []
    while True:
        vals = [float(c @ A @ c) for c in cols]
        bad = [k for k, v in enumerate(vals) if abs(v) >= tol]
        pos = [k for k in bad if vals[k] > 0]
        neg = [k for k in bad if vals[k] < 0]
        if not pos or not neg:
            break
        i = max(pos, key=lambda k: vals[k])
        j = min(neg, key=lambda k: vals[k])
        u, v = rotate_pair(cols[i], cols[j], A)
        done.append(u)
        cols = [c for k, c in enumerate(cols) if k not in (i, j)] + [v]
    U = np.column_stack(done + cols)
    iso = np.array([abs(float(U[:, k] @ A @ U[:, k])) < tol for k in range(r)])
    return U, iso


def _conic_zero(A, B, ui, uj, uk, tol, samples=720):
    """Point on the ``A``-isotropic conic in span(ui, uj, uk) where ``B`` vanishes.

    ``ui`` and ``uj`` are ``A``-isotropic with ``B``-values of opposite sign.
    Lines through ``ui`` meet the conic again at
    ``ui (d'Ad) - 2 (ui'A d) d``; as the direction ``d`` turns from ``uj``
    to the tangent at ``ui`` this point slides along the conic from ``uj``
    to ``ui``, so ``B`` changes sign on the way and bisection finds the zero.
    """
    # orthonormal directions in the plane complementary to ui inside the span
    P = np.column_stack([uj, uk])
    P = P - np.outer(ui, ui @ P) / (ui @ ui)
    e1 = P[:, 0] / np.linalg.norm(P[:, 0])
    e2 = P[:, 1] - e1 * (e1 @ P[:, 1])
    e2 /= np.linalg.norm(e2)

    def point(phi):
        d = math.cos(phi) * e1 + math.sin(phi) * e2
        x = ui * float(d @ A @ d) - 2.0 * float(ui @ A @ d) * d
        nx = np.linalg.norm(x)
        return x / nx if nx > 1e-12 else None

    def fval(x):
        return float(x @ B @ x)

    best = None
    phis = np.linspace(0.0, math.pi, samples + 1)
    pts = [point(p) for p in phis]
    for k in range(samples):
        x0, x1 = pts[k], pts[k + 1]
        if x0 is None or x1 is None:
            continue
        f0, f1 = fval(x0), fval(x1)
        for x, f in ((x0, f0), (x1, f1)):
            if abs(f) < tol and abs(float(x @ A @ x)) < tol:
                if best is None or abs(f) < best[0]:
                    best = (abs(f), x)
        if f0 * f1 < 0:
            lo, hi, flo = phis[k], phis[k + 1], f0
            x = None
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                x = point(mid)
                if x is None:
                    break
                fm = fval(x)
                if abs(fm) < tol * 1e-2:
                    break
                if fm * flo < 0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            if x is not None and abs(fval(x)) < tol and abs(float(x @ A @ x)) < tol:
                if best is None or abs(fval(x)) < best[0]:
                    best = (abs(fval(x)), x)
                    if best[0] < tol * 1e-2:
                        break
    return None if best is None else best[1]


def _sphere_search(A, B, tol, points=10_000):
    """Grid over the unit sphere in R^2 or R^3 followed by Newton polishing."""
    r = A.shape[0]
    if r == 2:
        th = np.linspace(0.0, math.pi, points, endpoint=False)
        U = np.stack([np.cos(th), np.sin(th)], axis=1)
    elif r == 3:
        m = int(math.sqrt(points))
        th, ph = np.meshgrid(np.linspace(0.0, math.pi, m), np.linspace(0.0, math.pi, m))
        th, ph = th.ravel(), ph.ravel()
        U = np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=1)
    else:
        return None
    fa = np.einsum("ij,jk,ik->i", U, A, U)
    fb = np.einsum("ij,jk,ik->i", U, B, U)
    obj = np.maximum(np.abs(fa), np.abs(fb))
    for idx in np.argsort(obj)[:10]:
        u = U[idx].copy()
        for _ in range(50):
            F = np.array([u @ A @ u, u @ B @ u])
            if max(abs(F)) < tol * 1e-2:
                break
            J = np.vstack([2 * A @ u, 2 * B @ u])
            # minimum-norm Newton step tangent to the sphere
            T = J - np.outer(J @ u, u)
            step, *_ = np.linalg.lstsq(T, -F, rcond=None)
            u = u + step
            u /= np.linalg.norm(u)
        if abs(u @ A @ u) < tol and abs(u @ B @ u) < tol:
            return u
    return None


def _joint_zero_in_span(V, M1, M2, eps2):
    """Unit ``u`` with ``x = V u`` isotropic for both forms, or ``None``."""
    A = V.T @ M1 @ V
    B = V.T @ M2 @ V
    A = 0.5 * (A + A.T)
    B = 0.5 * (B + B.T)
    r = A.shape[0]
    tol = eps2

    U, iso = _isotropic_frame(A, tol)
    bvals = np.array([float(U[:, k] @ B @ U[:, k]) for k in range(r)])
    cand = [k for k in range(r) if iso[k]]
    for k in sorted(cand, key=lambda k: abs(bvals[k])):
        if abs(bvals[k]) < tol:
            return U[:, k]

    pairs = [(i, j) for i in cand for j in cand if bvals[i] > 0 > bvals[j]]
    for i, j in pairs:
        ui, uj = U[:, i], U[:, j]
        cross = float(ui @ A @ uj)
        if abs(cross) < tol * 1e-3:
            # the whole plane is A-isotropic: one rotation against B finishes
            u, _ = rotate_pair(ui, uj, B)
            if abs(u @ A @ u) < tol and abs(u @ B @ u) < tol:
                return u
        for k in range(r):
            if k in (i, j):
                continue
            x = _conic_zero(A, B, ui, uj, U[:, k], tol)
            if x is not None:
                return x
    if r <= 3:
        return _sphere_search(A, B, tol)
    return None


def joint_zero_vector(X, M1, M2, eps2=1e-5, factor=None):
    """Vector ``x`` in range(X), ``X`` rank-one decomposable at ``x``, with
    ``|x'M1 x| < eps2`` and ``|x'M2 x| < eps2``.

    ``factor`` optionally supplies ``V`` with ``X = V V'`` (columns are tried
    as the starting frame); otherwise the spectral factor is used.
    """
    X = np.asarray(X, dtype=float)
    M1 = np.asarray(M1, dtype=float)
    M2 = np.asarray(M2, dtype=float)
    if factor is None:
        V = np.column_stack(spectral_rank_one(X, eps2).vectors)
    else:
        V = np.asarray(factor, dtype=float)
    u = _joint_zero_in_span(V, M1, M2, eps2)
    if u is None:
        raise NoCommonIsotropicVector(
            f"no real vector in the rank-{V.shape[1]} range is isotropic for both forms")
    u = u / np.linalg.norm(u)
    x = V @ u
    if abs(x @ M1 @ x) >= eps2 or abs(x @ M2 @ x) >= eps2:
        raise NoCommonIsotropicVector("refined vector misses the tolerance after mapping back")
    return _canonical_sign(x)
