# numerics.py
"""
Dense complex linear algebra used by every other module.

Matrices are plain ``numpy`` arrays of dtype complex128. Functions here never
mutate their inputs; `as_matrix` returns read-only copies so values can be
shared freely.
"""

import logging
from typing import Iterable, Sequence, Tuple

import numpy as np
import scipy.linalg

from .config import DEFAULT_TOLERANCE, ToleranceConfig
from .errors import DimensionMismatch, NotHermitian, NotPSD

logger = logging.getLogger(__name__)

Matrix = np.ndarray


def as_matrix(data, rows: int = None, cols: int = None) -> Matrix:
    """Complex128 2-D read-only copy of `data`"""
    arr = np.array(data, dtype=np.complex128)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1) if rows is None else arr.reshape(rows, -1)
    if arr.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got shape {arr.shape}")
    if rows is not None and cols is not None and arr.shape != (rows, cols):
        raise DimensionMismatch(f"expected shape ({rows}, {cols}), got {arr.shape}")
    arr.setflags(write=False)
    return arr


def frozen(arr: np.ndarray) -> Matrix:
    arr = np.asarray(arr, dtype=np.complex128)
    arr.setflags(write=False)
    return arr


def adjoint(A: Matrix) -> Matrix:
    return A.conj().T


def identity(n: int) -> Matrix:
    return frozen(np.eye(n, dtype=np.complex128))


def op_norm(A: Matrix) -> float:
    """Spectral norm; 0 for empty matrices"""
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def max_abs(A: Matrix) -> float:
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(A)))


def hermitian_part(A: Matrix) -> Matrix:
    return (A + adjoint(A)) / 2


def check_square(A: Matrix, name: str = "matrix") -> int:
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {A.shape}")
    return A.shape[0]


def hermitian_eig(A: Matrix, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> Tuple[np.ndarray, Matrix]:
    """Eigenvalues (ascending) and eigenvectors of a Hermitian matrix"""
    n = check_square(A)
    if n == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=np.complex128)
    scale = max(op_norm(A), 1.0)
    asym = op_norm(A - adjoint(A))
    if asym > tol.eps_rel * scale:
        raise NotHermitian(f"matrix is not Hermitian (|A - A*| = {asym:.3e})", residual=asym)
    return scipy.linalg.eigh(hermitian_part(A))


def psd_sqrt(A: Matrix, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> Matrix:
    """Positive square root of a Hermitian PSD matrix by eigendecomposition.

    Eigenvalues in [-eps_rank, eps_rank] are treated as roundoff and set to
    zero; anything more negative raises NotPSD.
    """
    evals, evecs = hermitian_eig(A, tol)
    if evals.size == 0:
        return frozen(np.zeros((0, 0)))
    if evals[0] < -tol.eps_rank:
        raise NotPSD(f"matrix has eigenvalue {evals[0]:.3e} < -eps_rank", min_eigenvalue=float(evals[0]))
    roots = np.sqrt(np.where(evals > tol.eps_rank, evals, 0.0))
    B = (evecs * roots) @ adjoint(evecs)
    return frozen(hermitian_part(B))


def range_basis(A: Matrix, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> Matrix:
    """Orthonormal columns spanning the column space of A"""
    if A.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got shape {A.shape}")
    rows = A.shape[0]
    if A.size == 0:
        return frozen(np.zeros((rows, 0)))
    U, s, _ = scipy.linalg.svd(A, full_matrices=False)
    keep = s > tol.eps_rank
    return frozen(U[:, keep])


def rank_tol(A: Matrix, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> int:
    """Number of singular values above eps_rank"""
    if A.size == 0:
        return 0
    s = scipy.linalg.svdvals(A)
    return int(np.sum(s > tol.eps_rank))


def projection_onto(A: Matrix, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> Matrix:
    """Orthogonal projection onto the span of A's columns"""
    B = range_basis(A, tol)
    return frozen(hermitian_part(B @ adjoint(B)))


def complement_basis(B: Matrix, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> Matrix:
    """Orthonormal basis of the orthogonal complement of span(B)"""
    n = B.shape[0]
    return range_basis(np.eye(n) - B @ adjoint(B), tol)


def join_bases(bases: Iterable[Matrix], dim: int, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> Matrix:
    """Orthonormal basis of the closed span of several subspaces"""
    blocks = [b for b in bases if b.shape[1] > 0]
    if not blocks:
        return frozen(np.zeros((dim, 0)))
    return range_basis(np.hstack(blocks), tol)


def subspaces_orthogonal(A: Matrix, B: Matrix, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> bool:
    """True iff two orthonormal-column bases span orthogonal subspaces"""
    return overlap(A, B) <= tol.eps_rank


def overlap(A: Matrix, B: Matrix) -> float:
    return max_abs(adjoint(A) @ B)


def contains_subspace(P: Matrix, B: Matrix, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> bool:
    """True iff span(B) lies in the range of projection P"""
    return max_abs(P @ B - B) <= tol.eps_rank


def projection_residual(P: Matrix) -> float:
    """max(|P - P*|, |P^2 - P|) in operator norm"""
    return max(op_norm(P - adjoint(P)), op_norm(P @ P - P))


def is_projection(P: Matrix, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> bool:
    return projection_residual(P) <= tol.eps_rel


def min_eigenvalue(A: Matrix, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> float:
    evals, _ = hermitian_eig(A, tol)
    return float(evals[0]) if evals.size else 0.0


def gram_schmidt(vectors: Matrix, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> Tuple[Matrix, np.ndarray, Sequence[int]]:
    """Modified Gram-Schmidt in column order.

    Returns (Q, R, kept) where Q has orthonormal columns, `kept` lists the
    input columns that were linearly independent of the earlier ones and
    vectors[:, kept] == Q @ R with R upper triangular and invertible.
    """
    rows, cols = vectors.shape
    Q_cols = []
    R = np.zeros((cols, cols), dtype=np.complex128)
    kept = []
    for j in range(cols):
        v = np.array(vectors[:, j], dtype=np.complex128)
        coeffs = np.zeros(len(Q_cols), dtype=np.complex128)
        # two passes keep orthogonality close to machine precision
        for _ in range(2):
            for idx, q in enumerate(Q_cols):
                c = np.vdot(q, v)
                coeffs[idx] += c
                v = v - c * q
        norm = np.linalg.norm(v)
        if norm > tol.eps_rank:
            R[:len(Q_cols), len(kept)] = coeffs
            R[len(Q_cols), len(kept)] = norm
            Q_cols.append(v / norm)
            kept.append(j)
    k = len(kept)
    Q = np.column_stack(Q_cols) if Q_cols else np.zeros((rows, 0), dtype=np.complex128)
    return frozen(Q), R[:k, :k], kept


def block_diag(blocks: Sequence[Matrix]) -> Matrix:
    if not blocks:
        return frozen(np.zeros((0, 0)))
    return frozen(scipy.linalg.block_diag(*blocks).astype(np.complex128))
