"""Gap between subspaces and maximal angle between orthogonal projectors."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InternalInconsistency, NotAProjector, NotGroupInvertible
from .matcore import (
    DEFAULT_TOL,
    RankTolerance,
    SubspaceBasis,
    adjoint,
    as_cmatrix,
    projector,
    require_square,
    spectral_norm,
    svd,
)

PROJECTOR_TOL = 1e-8
# ||p - q|| may exceed 1 by this much from rounding before it is an error
CLAMP_SLACK = 1e-12
GAP_AGREEMENT_TOL = 1e-10


@dataclass(frozen=True)
class GapResult:
    delta_mn: float
    delta_nm: float
    gap: float


@dataclass(frozen=True)
class AngleResult:
    """Maximal angle ``psi`` with ``sin psi = ||p - q||``.

    ``cos_zero`` is set when ``psi`` is numerically ``pi/2``; callers that
    divide by ``cos_psi`` must check it.
    """

    psi: float
    sin_psi: float
    cos_psi: float
    cos_zero: bool


def _check_dims(m: SubspaceBasis, n: SubspaceBasis) -> None:
    if m.ambient_dim != n.ambient_dim:
        raise DimensionMismatch(
            f"ambient dimensions differ: {m.ambient_dim} vs {n.ambient_dim}",
            left=m.ambient_dim,
            right=n.ambient_dim,
        )


def delta(m: SubspaceBasis, n: SubspaceBasis) -> float:
    """Largest distance from a unit vector of ``m`` to ``n``: ``||(1 - P_n) P_m||``."""
    _check_dims(m, n)
    if m.dim == 0:
        return 0.0
    b = m.basis
    # (1 - P_n) applied to an orthonormal basis of m has the same norm as (1 - P_n) P_m
    resid = b - n.basis @ (adjoint(n.basis) @ b)
    return min(1.0, spectral_norm(resid))


def gap(m: SubspaceBasis, n: SubspaceBasis) -> GapResult:
    dmn, dnm = delta(m, n), delta(n, m)
    g = max(dmn, dnm)
    pdiff = min(1.0, spectral_norm(projector(m) - projector(n)))
    if abs(pdiff - g) > GAP_AGREEMENT_TOL:
        raise InternalInconsistency(
            "gap disagrees with the projector-difference norm",
            gap=g,
            projector_norm=pdiff,
        )
    return GapResult(dmn, dnm, g)


def _check_projector(p: np.ndarray, name: str) -> None:
    idem = spectral_norm(p @ p - p)
    herm = spectral_norm(p - adjoint(p))
    if idem > PROJECTOR_TOL or herm > PROJECTOR_TOL:
        raise NotAProjector(
            f"{name} is not a self-adjoint idempotent",
            idempotency_error=idem,
            self_adjointness_error=herm,
        )


def _angle_from_sin(s: float, cos: float | None = None) -> AngleResult:
    if s > 1.0 + CLAMP_SLACK:
        raise InternalInconsistency("projector difference norm exceeds 1", norm=s)
    s = min(max(s, 0.0), 1.0)
    psi = math.asin(s)
    if cos is None:
        cos = math.sqrt((1.0 - s) * (1.0 + s))
    cos_zero = abs(psi - math.pi / 2) <= 1e-12 or cos <= 1e-12
    return AngleResult(psi, s, cos, cos_zero)


def max_angle(p, q) -> AngleResult:
    p, q = as_cmatrix(p), as_cmatrix(q)
    if p.shape != q.shape:
        raise DimensionMismatch(f"projector shapes differ: {p.shape} vs {q.shape}")
    _check_projector(p, "p")
    _check_projector(q, "q")
    return _angle_from_sin(spectral_norm(p - q))


def psi_of(a, tol_policy: RankTolerance = DEFAULT_TOL, cross_check: bool = True) -> AngleResult:
    """Maximal angle between ``a a^+`` and ``a^+ a``.

    Both projectors have rank ``r = rank(a)``, so the cosine is also
    available as the smallest singular value of ``U_r* V_r``; that value is
    reported as ``cos_psi`` because it keeps full relative accuracy when the
    angle approaches ``pi/2``.
    """
    a = as_cmatrix(a)
    require_square(a)
    u, s, vh = svd(a)
    r = int(np.count_nonzero(s > tol_policy.threshold(s, a.shape)))
    if r == 0:
        return AngleResult(0.0, 0.0, 1.0, False)
    ur, vr = u[:, :r], adjoint(vh[:r, :])
    p, q = ur @ adjoint(ur), vr @ adjoint(vr)
    cos = float(np.linalg.svd(adjoint(ur) @ vr, compute_uv=False)[-1])
    res = _angle_from_sin(spectral_norm(p - q), min(cos, 1.0))
    if cross_check and not res.cos_zero:
        from .geninv import core_inverse

        try:
            ca_norm = spectral_norm(core_inverse(a, tol_policy) @ a)
        except NotGroupInvertible:
            ca_norm = None
        if ca_norm is not None and abs(ca_norm * res.cos_psi - 1.0) > 1e-8:
            raise InternalInconsistency(
                "1/cos(psi) disagrees with ||core(a) a||",
                cos_psi=res.cos_psi,
                core_a_norm=ca_norm,
            )
    return res
