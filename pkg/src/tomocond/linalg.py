"""Dense linear algebra for the tomography pipeline.

Everything operates on plain numpy arrays, real or complex.  The SVD and
least-squares routines are thin wrappers around LAPACK that enforce the
contracts the rest of the package relies on: singular values sorted
nonincreasing and nonnegative, hard errors on rank deficiency, and an
explicit exception on non-convergence.  All functions are pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Singular values below RANK_RTOL * sigma_max count as zero.
RANK_RTOL = 1e-10

HERMITIAN_ATOL = 1e-12


class SvdConvergenceError(RuntimeError):
    """The SVD kernel failed to converge on the given matrix."""


class RankDeficiencyError(ValueError):
    """A solve that needs full column rank got a rank-deficient matrix."""

    def __init__(self, rank: int, needed: int):
        self.rank = rank
        self.needed = needed
        super().__init__(
            f"matrix is rank deficient: numerical rank {rank} < {needed} columns"
        )


def is_hermitian(m: np.ndarray, atol: float = HERMITIAN_ATOL) -> bool:
    """True iff m is square and equals its conjugate transpose entrywise."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return float(np.abs(m - m.conj().T).max(initial=0.0)) <= atol


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product, (a.rows*b.rows) x (a.cols*b.cols)."""
    return np.kron(np.asarray(a), np.asarray(b))


@dataclass(frozen=True)
class SvdResult:
    """Thin SVD ``a = U diag(s) V^H`` with s nonincreasing and >= 0.

    ``left_vectors`` and ``right_vectors`` hold the singular vectors as
    orthonormal columns; for real input both factors are real.
    """

    singular_values: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.left_vectors * self.singular_values) @ self.right_vectors.conj().T


def svd(m: np.ndarray) -> SvdResult:
    """Thin singular-value decomposition of a (possibly nonsquare) matrix."""
    m = np.atleast_2d(np.asarray(m))
    if not np.all(np.isfinite(m)):
        raise ValueError("svd requires finite entries")
    try:
        u, s, vh = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise SvdConvergenceError(f"SVD did not converge: {exc}") from exc
    return SvdResult(s, u, vh.conj().T)


def singular_values(m: np.ndarray) -> np.ndarray:
    return svd(m).singular_values


def numerical_rank(m: np.ndarray) -> int:
    """Rank counting singular values above RANK_RTOL * sigma_max."""
    s = singular_values(m)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > RANK_RTOL * s[0]))


def least_squares_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Minimizer of ||a x - b||_2 for a with full column rank.

    For square invertible ``a`` this equals ``a^{-1} b``.  Raises
    RankDeficiencyError naming the numerical rank otherwise.
    """
    a = np.atleast_2d(np.asarray(a))
    b = np.asarray(b)
    res = svd(a)
    s = res.singular_values
    n = a.shape[1]
    rank = 0 if (s.size == 0 or s[0] == 0.0) else int(np.sum(s > RANK_RTOL * s[0]))
    if rank < n:
        raise RankDeficiencyError(rank, n)
    coeff = (res.left_vectors.conj().T @ b) / s
    return res.right_vectors @ coeff


def spectral_norm(m: np.ndarray) -> float:
    """Largest singular value."""
    return float(singular_values(m)[0])


def frobenius_norm(m: np.ndarray) -> float:
    """Root sum of squared singular values (= entrywise 2-norm)."""
    return float(np.linalg.norm(np.asarray(m)))
