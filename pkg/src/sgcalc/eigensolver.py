"""Dense symmetric eigensolver.

The default algorithm is cyclic Jacobi with a parallel (round-robin)
ordering: each round applies ``n/2`` disjoint plane rotations at once,
which vectorises well in numpy.  For matrices larger than
``JACOBI_MAX_SIZE`` the ``"auto"`` method hands the reduced problem to
LAPACK (``numpy.linalg.eigh``); both paths return the same
:class:`EigenDecomposition` and are held to the same residual contract.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError, SymmetryError

DEFAULT_TOL = 1e-12
MAX_SWEEPS = 60
#: above this size "auto" hands the reduced problem to LAPACK
JACOBI_MAX_SIZE = 256
SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenpairs ``L v = lam M v`` with ``M = diag(weight)``.

    ``vectors[:, k]`` is the k-th eigenvector; columns are orthonormal in
    the weighted inner product ``<u, v> = sum(u * v * weight)``.
    Eigenvectors inside a degenerate eigenspace are an arbitrary
    orthonormal basis; everything downstream is basis-invariant.
    """

    values: np.ndarray
    vectors: np.ndarray
    weight: np.ndarray
    sweeps: int = 0
    method: str = "jacobi"

    @property
    def size(self) -> int:
        return self.values.shape[0]

    def residual(self, L: np.ndarray) -> float:
        """``max_k ||L v_k - lam_k M v_k||_inf``."""
        R = L @ self.vectors - (self.weight[:, None] * self.vectors) * self.values[None, :]
        return float(np.max(np.abs(R)))

    def orthonormality_error(self) -> float:
        G = self.vectors.T @ (self.weight[:, None] * self.vectors)
        return float(np.max(np.abs(G - np.eye(self.size))))

    def reconstruct(self) -> np.ndarray:
        """``M V diag(lam) V^T M``, which equals L."""
        MV = self.weight[:, None] * self.vectors
        return (MV * self.values[None, :]) @ MV.T


def _check_symmetric(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise SymmetryError(f"expected a square matrix, got shape {A.shape}")
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    if A.size and np.max(np.abs(A - A.T)) > SYMMETRY_TOL * scale:
        raise SymmetryError("matrix is not symmetric within tolerance")
    return 0.5 * (A + A.T)


def _layout_shift(m: int) -> np.ndarray:
    """Permutation taking one round-robin layout to the next.

    In a layout ``players[:h] + players[h:][::-1]`` position ``i`` is paired
    with position ``i + h``, so each round works on two contiguous halves.
    """
    h = m // 2
    players = list(range(m))
    layout = players[:h] + players[h:][::-1]
    nxt = [players[0], players[-1]] + players[1:-1]
    new_layout = nxt[:h] + nxt[h:][::-1]
    where = {p: i for i, p in enumerate(layout)}
    return np.array([where[p] for p in new_layout], dtype=np.intp)


def jacobi_eigh(A: np.ndarray, tol: float = DEFAULT_TOL,
                max_sweeps: int = MAX_SWEEPS) -> tuple[np.ndarray, np.ndarray, int]:
    """Cyclic Jacobi on a symmetric matrix.

    Sweeps until the off-diagonal Frobenius norm drops below
    ``tol * ||A||_F``. Returns ``(values, vectors, sweeps)`` unsorted.
    """
    A = np.array(A, dtype=float, copy=True)
    n = A.shape[0]
    if n <= 1:
        return np.diag(A).copy(), np.eye(n), 0
    norm = np.linalg.norm(A)
    if norm == 0.0:
        return np.zeros(n), np.eye(n), 0
    m = n + (n % 2)
    if m != n:                      # a decoupled zero row keeps the pairing even
        A = np.pad(A, ((0, 1), (0, 1)))
    h = m // 2
    # B = V^T A V; V's rows are original coordinates, its columns follow
    # the current layout, so V ends up holding the eigenvectors.
    layout = np.concatenate([np.arange(h), np.arange(m - 1, h - 1, -1)])
    V = np.eye(m)[:, layout]
    B = A[np.ix_(layout, layout)]
    shift = _layout_shift(m)
    tiny = np.finfo(float).tiny
    idx = np.arange(h)

    def off_norm() -> float:
        off = B.copy()
        np.fill_diagonal(off, 0.0)
        return float(np.linalg.norm(off))

    def finish(sweeps):
        vals = np.diag(B).copy()
        if m == n:
            return vals, V, sweeps
        keep = np.flatnonzero(V[n] != 1.0)     # drop the padding eigenpair
        return vals[keep], V[:n, keep], sweeps

    for sweep in range(1, max_sweeps + 1):
        if off_norm() < tol * norm:
            return finish(sweep - 1)
        for _ in range(m - 1):
            apq = B[idx, idx + h]
            app = B[idx, idx]
            aqq = B[idx + h, idx + h]
            live = np.abs(apq) > tiny
            safe = np.where(live, apq, 1.0)
            with np.errstate(over="ignore"):
                theta = (aqq - app) / (2.0 * safe)
                t = np.sign(theta) / (np.abs(theta) + np.hypot(theta, 1.0))
            t[theta == 0.0] = 1.0
            t[~live] = 0.0
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            # B <- B J, then B <- J^T B, with pair (i, i + h)
            L, R = B[:, :h].copy(), B[:, h:].copy()
            B[:, :h] = c * L - s * R
            B[:, h:] = s * L + c * R
            L, R = B[:h, :].copy(), B[h:, :].copy()
            B[:h, :] = c[:, None] * L - s[:, None] * R
            B[h:, :] = s[:, None] * L + c[:, None] * R
            B[idx, idx + h] = 0.0
            B[idx + h, idx] = 0.0
            L, R = V[:, :h].copy(), V[:, h:].copy()
            V[:, :h] = c * L - s * R
            V[:, h:] = s * L + c * R
            B = B[np.ix_(shift, shift)]
            V = V[:, shift]
    if off_norm() < tol * norm:
        return finish(max_sweeps)
    raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")


def _solve(A: np.ndarray, tol: float, method: str) -> tuple[np.ndarray, np.ndarray, int, str]:
    if method == "auto":
        method = "jacobi" if A.shape[0] <= JACOBI_MAX_SIZE else "lapack"
    if method == "jacobi":
        values, vectors, sweeps = jacobi_eigh(A, tol)
    elif method == "lapack":
        values, vectors = np.linalg.eigh(A)
        sweeps = 0
    else:
        raise ValueError(f"unknown method {method!r}")
    order = np.argsort(values, kind="stable")
    return values[order], vectors[:, order], sweeps, method


def eigh(A: np.ndarray, tol: float = DEFAULT_TOL, method: str = "auto") -> EigenDecomposition:
    """Eigen-decomposition of a symmetric matrix, eigenvalues ascending."""
    A = _check_symmetric(A)
    values, vectors, sweeps, used = _solve(A, tol, method)
    return EigenDecomposition(values=values, vectors=vectors,
                              weight=np.ones(A.shape[0]), sweeps=sweeps, method=used)


def generalized_eigh(L: np.ndarray, M: np.ndarray, tol: float = DEFAULT_TOL,
                     method: str = "auto") -> EigenDecomposition:
    """Solve ``L v = lam M v`` for a positive diagonal ``M``.

    Args:
        L: symmetric matrix.
        M: the diagonal of M, either as a 1-D array or as a diagonal matrix.
    """
    L = _check_symmetric(L)
    M = np.asarray(M, dtype=float)
    w = np.diag(M).copy() if M.ndim == 2 else M.copy()
    if w.shape != (L.shape[0],):
        raise DomainError("weight length does not match the matrix")
    if np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise DomainError("weights must be strictly positive")
    r = 1.0 / np.sqrt(w)
    B = (r[:, None] * L) * r[None, :]
    values, U, sweeps, used = _solve(0.5 * (B + B.T), tol, method)
    return EigenDecomposition(values=values, vectors=r[:, None] * U,
                              weight=w, sweeps=sweeps, method=used)
