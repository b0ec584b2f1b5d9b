"""Moore-Penrose, group, core and dual core inverses of square complex matrices.

All four inverses are assembled from one thin SVD ``a = U S V*`` truncated
at the rank tolerance.  Writing ``W = V_r* U_r`` (the cosines of the
principal angles between the range of ``a`` and the range of ``a*`` are
its singular values), the product formulas collapse to

    a^+ = V_r S^-1 U_r*
    a^# = U_r W^-1 S^-1 W^-1 V_r*          (= F (G F)^-2 G, F = U_r S, G = V_r*)
    a^core = a^# a a^+  = U_r (S W)^-1 U_r*
    a^dual = a^+ a a^#  = V_r (W S)^-1 V_r*

so no product of large factors is ever formed explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import InternalInconsistency, NotGroupInvertible
from .matcore import (
    DEFAULT_TOL,
    RankTolerance,
    adjoint,
    as_cmatrix,
    fro_norm,
    null_basis,
    range_basis,
    require_square,
    svd,
)
from .subgeo import gap as subspace_gap

# cond(W) above this means the range and the null space nearly intersect
INDEX_COND_LIMIT = 1e12
# relative residual allowed on the defining equations after construction
POSTCHECK_TOL = 1e-9


def _truncated_svd(a: np.ndarray, tol_policy: RankTolerance):
    u, s, vh = svd(a)
    r = int(np.count_nonzero(s > tol_policy.threshold(s, a.shape)))
    return u[:, :r], s[:r], vh[:r, :]


def rel_residual(diff: np.ndarray, scale: float) -> float:
    """``||diff||_F / scale`` with the scale floored at the tiniest normal."""
    return fro_norm(diff) / max(scale, np.finfo(float).tiny)


def mp_inverse(a, tol_policy: RankTolerance = DEFAULT_TOL) -> np.ndarray:
    a = as_cmatrix(a)
    u, s, vh = _truncated_svd(a, tol_policy)
    return (adjoint(vh) / s) @ adjoint(u)


def penrose_residuals(a, x) -> dict[str, float]:
    """Relative residuals of the four Penrose equations.

    Each is normalized by the product of the norms of the factors involved,
    e.g. ``||a x a - a|| / (||a||^2 ||x||)``.
    """
    a = as_cmatrix(a)
    x = as_cmatrix(x)
    na, nx = fro_norm(a), fro_norm(x)
    ax, xa = a @ x, x @ a
    return {
        "axa=a": rel_residual(ax @ a - a, na * na * nx),
        "xax=x": rel_residual(xa @ x - x, nx * nx * na),
        "(ax)*=ax": rel_residual(ax - adjoint(ax), na * nx),
        "(xa)*=xa": rel_residual(xa - adjoint(xa), na * nx),
    }


def index_ranks(a, tol_policy: RankTolerance = DEFAULT_TOL) -> tuple[int, int]:
    """``(rank(a), rank(a @ a))`` with consistent cutoffs.

    Singular values of ``a`` below the cutoff ``c`` are treated as noise;
    that noise, together with the rounding in forming ``a @ a``, can reach
    ``2 ||a|| c`` in the product, so ``rank(a @ a)`` uses that cutoff.  A
    cutoff relative to ``||a @ a||`` alone would count noise as rank for
    strongly non-normal ``a``.
    """
    a = as_cmatrix(a)
    require_square(a)
    s = np.linalg.svd(a, compute_uv=False)
    cut = tol_policy.threshold(s, a.shape)
    rank_a = int(np.count_nonzero(s > cut))
    s2 = np.linalg.svd(a @ a, compute_uv=False)
    cut2 = max(2.0 * float(s[0]) * cut, tol_policy.threshold(s2, a.shape))
    return rank_a, int(np.count_nonzero(s2 > cut2))


def is_group_invertible(a, tol_policy: RankTolerance = DEFAULT_TOL) -> bool:
    """Index at most one: ``rank(a @ a) == rank(a)``."""
    rank_a, rank_a2 = index_ranks(a, tol_policy)
    return rank_a == rank_a2


@dataclass(frozen=True)
class _GroupFactors:
    u: np.ndarray
    s: np.ndarray
    vh: np.ndarray
    w: np.ndarray


def _group_factors(a: np.ndarray, tol_policy: RankTolerance) -> _GroupFactors:
    require_square(a)
    rank_a, rank_a2 = index_ranks(a, tol_policy)
    if rank_a2 != rank_a:
        raise NotGroupInvertible(
            f"matrix is not group invertible: rank(a^2)={rank_a2} != rank(a)={rank_a}",
            rank_a=rank_a,
            rank_a2=rank_a2,
        )
    u, s, vh = _truncated_svd(a, tol_policy)
    w = vh @ u
    if w.size:
        ws = np.linalg.svd(w, compute_uv=False)
        cond = float(ws[0] / ws[-1]) if ws[-1] > 0 else np.inf
        if cond > INDEX_COND_LIMIT:
            raise NotGroupInvertible(
                "matrix is numerically of index > 1 (range and null space nearly intersect)",
                rank_a=rank_a,
                rank_a2=rank_a2,
                numerically_index_gt_1=True,
                cond_w=cond,
            )
    return _GroupFactors(u, s, vh, w)


def group_inverse(a, tol_policy: RankTolerance = DEFAULT_TOL) -> np.ndarray:
    a = as_cmatrix(a)
    f = _group_factors(a, tol_policy)
    n = a.shape[0]
    if not f.s.size:
        return np.zeros((n, n), dtype=np.complex128)
    winv_vh = np.linalg.solve(f.w, f.vh)
    return f.u @ np.linalg.solve(f.w, winv_vh / f.s[:, None])


def _postcheck(name: str, residuals: dict[str, float]) -> None:
    bad = {k: v for k, v in residuals.items() if not v <= POSTCHECK_TOL}
    if bad:
        raise InternalInconsistency(
            f"{name} failed its defining equations", residuals=bad
        )


def core_characterization_residuals(a, x) -> dict[str, float]:
    """Residuals of ``a x^2 = x``, ``x a^2 = a``, ``(a x)* = a x``."""
    na, nx = fro_norm(a), fro_norm(x)
    ax = a @ x
    return {
        "ax^2=x": rel_residual(ax @ x - x, na * nx * nx),
        "xa^2=a": rel_residual(x @ a @ a - a, nx * na * na),
        "(ax)*=ax": rel_residual(ax - adjoint(ax), na * nx),
    }


def core_inverse(a, tol_policy: RankTolerance = DEFAULT_TOL, check: bool = True) -> np.ndarray:
    a = as_cmatrix(a)
    f = _group_factors(a, tol_policy)
    n = a.shape[0]
    if not f.s.size:
        return np.zeros((n, n), dtype=np.complex128)
    x = f.u @ np.linalg.solve(f.s[:, None] * f.w, adjoint(f.u))
    if check:
        _postcheck("core inverse", core_characterization_residuals(a, x))
    return x


def dual_core_inverse(a, tol_policy: RankTolerance = DEFAULT_TOL, check: bool = True) -> np.ndarray:
    a = as_cmatrix(a)
    f = _group_factors(a, tol_policy)
    n = a.shape[0]
    if not f.s.size:
        return np.zeros((n, n), dtype=np.complex128)
    vr = adjoint(f.vh)
    x = vr @ np.linalg.solve(f.w * f.s[None, :], f.vh)
    if check:
        # dual core of a is the adjoint of the core inverse of a*
        xs = adjoint(x)
        _postcheck("dual core inverse", core_characterization_residuals(adjoint(a), xs))
    return x


@dataclass(frozen=True)
class InverseBundle:
    """A matrix with its generalized inverses and identity residuals."""

    a: np.ndarray
    mp: np.ndarray
    group: np.ndarray | None = None
    core: np.ndarray | None = None
    dual_core: np.ndarray | None = None
    group_exists: bool = False
    residuals: dict[str, float] = field(default_factory=dict)
    verified: bool = False


IDENTITY_TOL = 1e-8


def inverse_bundle(a, tol_policy: RankTolerance = DEFAULT_TOL) -> InverseBundle:
    """Compute every inverse that exists; verify the identity suite if possible."""
    a = as_cmatrix(a)
    require_square(a)
    mp = mp_inverse(a, tol_policy)
    try:
        g = group_inverse(a, tol_policy)
        c = core_inverse(a, tol_policy)
        d = dual_core_inverse(a, tol_policy)
    except NotGroupInvertible:
        return InverseBundle(a=a, mp=mp, residuals=penrose_residuals(a, mp))
    partial = InverseBundle(a, mp, g, c, d, True)
    res = {**penrose_residuals(a, mp), **verify_identities(partial)}
    return InverseBundle(
        a, mp, g, c, d, True, res, verified=all(v <= IDENTITY_TOL for v in res.values())
    )


def verify_identities(b: InverseBundle) -> dict[str, float]:
    """Relative residuals of the algebraic identities tying the inverses together.

    Each residual is ``||lhs - rhs||_F`` over the largest product of factor
    norms appearing in the identity.  The mixed element
    ``m = a a^+ + a^+ a - 1`` is inverted with a linear solve; if that solve
    fails the corresponding residual is ``inf``.
    """
    if b.group is None or b.core is None or b.dual_core is None:
        raise ValueError("bundle lacks group/core/dual core inverses")
    a, mp, g, c, d = b.a, b.mp, b.group, b.core, b.dual_core
    n = a.shape[0]
    eye = np.eye(n)
    N = fro_norm
    na, nmp, ng, nc, nd = N(a), N(mp), N(g), N(c), N(d)
    ca = c @ a
    m = a @ mp + mp @ a - eye
    res = {
        "group=core^2 a": rel_residual(c @ c @ a - g, max(nc * nc * na, ng)),
        "group=core a dual": rel_residual(c @ a @ d - g, max(nc * na * nd, ng)),
        "mp=dual a core": rel_residual(d @ a @ c - mp, max(nd * na * nc, nmp)),
        "core=group a mp": rel_residual(g @ a @ mp - c, max(ng * na * nmp, nc)),
        "dual=mp a group": rel_residual(mp @ a @ g - d, max(nmp * na * ng, nd)),
        "a mp core=core": rel_residual(a @ mp @ c - c, max(na * nmp * nc, nc)),
        "(a mp + mp a - 1) core=mp": rel_residual(m @ c - mp, max(N(m) * nc, nmp)),
        "group=a dual^2": rel_residual(a @ d @ d - g, max(na * nd * nd, ng)),
    }
    rhs = ca + adjoint(ca) - eye
    try:
        minv = np.linalg.solve(m, eye)
    except np.linalg.LinAlgError:
        res["(a mp + mp a - 1)^-1=core a + (core a)* - 1"] = np.inf
    else:
        scale = max(N(minv), 2 * nc * na + N(eye))
        res["(a mp + mp a - 1)^-1=core a + (core a)* - 1"] = rel_residual(minv - rhs, scale)
    return res


@dataclass(frozen=True)
class OuterCheck:
    """Verdict of :func:`check_prescribed_outer` with per-condition numbers."""

    ok: bool
    diagnostics: dict[str, float]


def check_prescribed_outer(
    a,
    x,
    which: Literal["core", "dual_core"] = "core",
    tol_policy: RankTolerance = DEFAULT_TOL,
    residual_tol: float = POSTCHECK_TOL,
    gap_tol: float = 1e-8,
) -> OuterCheck:
    """Test whether ``x`` is the outer inverse of ``a`` with the range/null
    space pair of the core (``R(a)``, ``N(a*)``) or dual core
    (``R(a*)``, ``N(a)``) inverse.
    """
    a = as_cmatrix(a)
    x = as_cmatrix(x)
    require_square(a)
    if x.shape != a.shape:
        raise ValueError(f"shape mismatch: a {a.shape}, x {x.shape}")
    if which == "core":
        want_range, want_null = range_basis(a, tol_policy), null_basis(adjoint(a), tol_policy)
    elif which == "dual_core":
        want_range, want_null = range_basis(adjoint(a), tol_policy), null_basis(a, tol_policy)
    else:
        raise ValueError(f"unknown outer-inverse kind {which!r}")
    na, nx = fro_norm(a), fro_norm(x)
    diag = {
        "xax=x": rel_residual(x @ a @ x - x, nx * nx * na),
        "axa=a": rel_residual(a @ x @ a - a, na * na * nx),
        "gap_range": subspace_gap(range_basis(x, tol_policy), want_range).gap,
        "gap_null": subspace_gap(null_basis(x, tol_policy), want_null).gap,
    }
    ok = (
        diag["xax=x"] <= residual_tol
        and diag["axa=a"] <= residual_tol
        and diag["gap_range"] <= gap_tol
        and diag["gap_null"] <= gap_tol
    )
    return OuterCheck(bool(ok), diag)
