import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gen import crandn, unitary
from gencore.matcore import (
    MatrixError,
    RankTolerance,
    SubspaceBasis,
    as_cmatrix,
    null_basis,
    projector,
    range_basis,
    rank_of,
    require_square,
    spectral_norm,
)


def test_as_cmatrix_scalar_becomes_1x1():
    a = as_cmatrix(3.0)
    assert a.shape == (1, 1) and a.dtype == np.complex128


@pytest.mark.parametrize("bad", [np.array([np.nan]), [[1.0, np.inf]], np.zeros((2, 2, 2)), np.zeros((0, 2))])
def test_as_cmatrix_rejects(bad):
    with pytest.raises(MatrixError):
        as_cmatrix(bad)


def test_require_square():
    with pytest.raises(MatrixError):
        require_square(np.zeros((2, 3)))


def test_rank_of_default_and_absolute_tolerance():
    a = np.diag([1.0, 1e-10, 0.0])
    assert rank_of(a) == 2
    assert rank_of(a, RankTolerance(1e-8)) == 1
    assert rank_of(np.zeros((3, 3))) == 0


def test_rank_tolerance_must_be_positive():
    with pytest.raises(ValueError):
        RankTolerance(-1.0)
    with pytest.raises(ValueError):
        RankTolerance(float("nan"))


def test_subspace_basis_checks_orthonormality():
    with pytest.raises(MatrixError):
        SubspaceBasis(2, np.array([[1.0], [1.0]]))
    with pytest.raises(MatrixError):
        SubspaceBasis(3, np.eye(2))
    assert SubspaceBasis.zero(4).dim == 0


def test_range_and_null_are_complementary():
    rng = np.random.default_rng(0)
    a = crandn(rng, 5, 2) @ crandn(rng, 2, 4)
    r, n = range_basis(a), null_basis(a)
    assert (r.ambient_dim, r.dim) == (5, 2)
    assert (n.ambient_dim, n.dim) == (4, 2)
    assert spectral_norm(a @ n.basis) < 1e-12 * spectral_norm(a)


def test_null_basis_of_wide_matrix_uses_full_v():
    a = np.array([[1.0, 0.0, 0.0]])
    assert null_basis(a).dim == 2


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 6), st.integers(0, 2**32 - 1))
def test_projector_is_orthogonal_idempotent(n, k, seed):
    k = min(k, n)
    rng = np.random.default_rng(seed)
    b = unitary(rng, n)[:, :k]
    p = projector(SubspaceBasis(n, b))
    assert spectral_norm(p @ p - p) < 1e-12
    assert spectral_norm(p - p.conj().T) < 1e-12
    assert abs(np.trace(p).real - k) < 1e-12
