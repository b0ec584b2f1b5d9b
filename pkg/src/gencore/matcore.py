"""Dense complex matrix kernel.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Every routine
that needs a factorization goes through :func:`svd`, so rank decisions,
norms, bases and pseudoinverses all share one tolerance rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

EPS = np.finfo(np.float64).eps


class MatrixError(ValueError):
    """Raised for malformed matrix input (shape, non-finite entries)."""


@dataclass(frozen=True)
class RankTolerance:
    """Singular-value cutoff used for every rank decision.

    With ``absolute=None`` the cutoff is ``max(m, n) * eps * sigma_max``;
    otherwise singular values ``<= absolute`` count as zero.
    """

    absolute: float | None = None

    def __post_init__(self):
        if self.absolute is not None and not (self.absolute > 0 and np.isfinite(self.absolute)):
            raise ValueError(f"absolute rank tolerance must be positive, got {self.absolute!r}")

    def threshold(self, sigma: np.ndarray, shape: tuple[int, int]) -> float:
        if self.absolute is not None:
            return float(self.absolute)
        smax = float(sigma[0]) if sigma.size else 0.0
        return max(shape) * EPS * smax


DEFAULT_TOL = RankTolerance()


def as_cmatrix(a) -> np.ndarray:
    """Validate and convert ``a`` to a 2-D complex128 array (copy)."""
    arr = np.array(a, dtype=np.complex128)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise MatrixError(f"expected a 2-D matrix, got {arr.ndim} dimensions")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise MatrixError(f"matrix dimensions must be positive, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise MatrixError("matrix has non-finite entries")
    return arr


def require_square(a: np.ndarray, what: str = "matrix") -> None:
    if a.shape[0] != a.shape[1]:
        raise MatrixError(f"{what} must be square, got shape {a.shape}")


def adjoint(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def svd(a: np.ndarray):
    """Thin SVD ``a = U diag(s) Vh``."""
    return np.linalg.svd(a, full_matrices=False)


def spectral_norm(a) -> float:
    a = np.asarray(a, dtype=np.complex128)
    if a.size == 0:
        return 0.0
    return float(np.linalg.svd(a, compute_uv=False)[0])


def fro_norm(a) -> float:
    return float(np.linalg.norm(a))


def rank_of(a, tol_policy: RankTolerance = DEFAULT_TOL) -> int:
    a = np.asarray(a, dtype=np.complex128)
    s = np.linalg.svd(a, compute_uv=False)
    return int(np.count_nonzero(s > tol_policy.threshold(s, a.shape)))


def _split(a: np.ndarray, tol_policy: RankTolerance):
    u, s, vh = svd(a)
    r = int(np.count_nonzero(s > tol_policy.threshold(s, a.shape)))
    return u, s, vh, r


@dataclass(frozen=True)
class SubspaceBasis:
    """Orthonormal basis (as columns) of a subspace of C^ambient_dim."""

    ambient_dim: int
    basis: np.ndarray = field(repr=False)

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=np.complex128)
        if b.ndim != 2 or b.shape[0] != self.ambient_dim:
            raise MatrixError(
                f"basis must have shape ({self.ambient_dim}, k), got {b.shape}"
            )
        k = b.shape[1]
        if k > self.ambient_dim:
            raise MatrixError("subspace dimension exceeds ambient dimension")
        if k:
            err = np.abs(b.conj().T @ b - np.eye(k)).max()
            if err > 1e-12 * max(1, k):
                raise MatrixError(f"basis columns are not orthonormal (error {err:.3g})")
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def zero(cls, n: int) -> "SubspaceBasis":
        return cls(n, np.zeros((n, 0), dtype=np.complex128))

    @classmethod
    def span(cls, vectors, tol_policy: RankTolerance = DEFAULT_TOL) -> "SubspaceBasis":
        """Orthonormalize the columns of ``vectors``."""
        return range_basis(vectors, tol_policy)


def range_basis(a, tol_policy: RankTolerance = DEFAULT_TOL) -> SubspaceBasis:
    a = as_cmatrix(a)
    u, _, _, r = _split(a, tol_policy)
    return SubspaceBasis(a.shape[0], u[:, :r].copy())


def null_basis(a, tol_policy: RankTolerance = DEFAULT_TOL) -> SubspaceBasis:
    a = as_cmatrix(a)
    m, n = a.shape
    # full V is needed when n > m
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    r = int(np.count_nonzero(s > tol_policy.threshold(s, a.shape)))
    return SubspaceBasis(n, vh[r:, :].conj().T.copy())


def projector(s: SubspaceBasis) -> np.ndarray:
    """Orthogonal projector ``B B*`` onto the span of ``s``."""
    b = s.basis
    return b @ b.conj().T
