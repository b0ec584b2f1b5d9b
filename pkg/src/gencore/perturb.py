"""Perturbation estimates for the core and dual core inverses.

Two families of estimates live here:

* norm bounds on ``||core(b) - core(a)||`` in terms of the Moore-Penrose
  inverses and the maximal angles ``psi_a``, ``psi_b`` (``angle_bound``,
  ``norm_core_bound``);
* gap-based bounds for the outer inverse with prescribed range and null
  space, driven by the constants ``kappa = ||a|| ||core(a)||`` and the gaps
  between the ranges / null spaces of ``a`` and ``a_n`` (``gap_bound_pair``,
  ``gap_bound_single``).

Every bound reports the measured left-hand side next to the bound, so
``slack = bound - actual`` can be studied directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import DimensionMismatch, HypothesisViolated
from .geninv import core_inverse, dual_core_inverse, mp_inverse
from .matcore import (
    DEFAULT_TOL,
    RankTolerance,
    adjoint,
    as_cmatrix,
    null_basis,
    range_basis,
    rank_of,
    require_square,
    spectral_norm,
)
from .subgeo import gap, psi_of

DENOM_GUARD = 1e-12
VALIDITY_SLACK = 1e-9

BoundName = Literal["angle_core", "angle_dual", "angle_mp", "norm_core", "gap_pair", "gap_single"]
Variant = Literal["core", "dual", "mp"]
VARIANTS: tuple[Variant, ...] = ("core", "dual", "mp")


@dataclass(frozen=True)
class DecompositionReport:
    term1: np.ndarray
    term2: np.ndarray
    term3: np.ndarray
    reconstructed_diff: np.ndarray
    actual_diff: np.ndarray
    residual: float


@dataclass(frozen=True)
class BoundReport:
    """One evaluated estimate.

    ``bound_value`` is ``None`` when a hypothesis fails; ``constants`` holds
    the named intermediate quantities (``kappa``, ``r``, ``s``, ``t``, ``w``,
    ``z``, cosines, norms) used to evaluate it.
    """

    bound_name: BoundName
    bound_value: float | None
    actual_value: float
    hypotheses: dict[str, bool]
    slack: float | None
    constants: dict[str, float] = field(default_factory=dict)
    dual_actual_value: float | None = None

    @property
    def hypotheses_hold(self) -> bool:
        return all(self.hypotheses.values())

    @property
    def valid(self) -> bool:
        """True when the hypotheses hold and the estimate is respected."""
        if not self.hypotheses_hold or self.bound_value is None:
            return False
        b = self.bound_value
        return self.actual_value <= b + VALIDITY_SLACK * max(1.0, b)


def _finish(name, bound, actual, hyps, consts, dual_actual=None) -> BoundReport:
    if all(hyps.values()):
        return BoundReport(name, bound, actual, hyps, bound - actual, consts, dual_actual)
    report = BoundReport(name, None, actual, hyps, None, consts, dual_actual)
    failed = sorted(k for k, v in hyps.items() if not v)
    raise HypothesisViolated(
        f"{name}: hypothesis violated ({', '.join(failed)})",
        report=report,
        bound=name,
        failed=failed,
        constants=consts,
    )


def _pair(a, b):
    a, b = as_cmatrix(a), as_cmatrix(b)
    require_square(a)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def core_diff_decomposition(
    a, b, tol_policy: RankTolerance = DEFAULT_TOL, dual: bool = False
) -> DecompositionReport:
    """Split ``core(b) - core(a)`` (or the dual core difference) into three terms.

    core:  bc b (b+ - a+)(1 - a ac) + bc (a - b) ac + (1 - bc b)(b - a) a+ ac
    dual:  (1 - ad a)(b+ - a+) b bd + ad (a - b) bd + ad a+ (b - a)(1 - b bd)
    """
    a, b = _pair(a, b)
    eye = np.eye(a.shape[0])
    ap, bp = mp_inverse(a, tol_policy), mp_inverse(b, tol_policy)
    if not dual:
        ac, bc = core_inverse(a, tol_policy), core_inverse(b, tol_policy)
        t1 = bc @ b @ (bp - ap) @ (eye - a @ ac)
        t2 = bc @ (a - b) @ ac
        t3 = (eye - bc @ b) @ (b - a) @ ap @ ac
        actual = bc - ac
    else:
        ad, bd = dual_core_inverse(a, tol_policy), dual_core_inverse(b, tol_policy)
        t1 = (eye - ad @ a) @ (bp - ap) @ b @ bd
        t2 = ad @ (a - b) @ bd
        t3 = ad @ ap @ (b - a) @ (eye - b @ bd)
        actual = bd - ad
    recon = t1 + t2 + t3
    residual = spectral_norm(recon - actual) / max(1.0, spectral_norm(actual))
    return DecompositionReport(t1, t2, t3, recon, actual, residual)


def angle_bound(
    a, b, variant: Variant = "core", tol_policy: RankTolerance = DEFAULT_TOL
) -> BoundReport:
    """Estimate ``||core(b) - core(a)||`` (``dual``: the dual core difference).

    core: ||b+ - a+||/cos psi_b + (||bc|| + ||a+||/cos psi_b) ||ac|| ||a - b||
    dual: same with dual cores in place of cores
    mp:   ||b+ - a+||/cos psi_b + ||a+||(||b+|| + ||a+||)/(cos psi_a cos psi_b) ||a - b||

    The ``mp`` form uses Moore-Penrose data only and also bounds the dual
    core difference, which is reported as ``dual_actual_value``.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    a, b = _pair(a, b)
    ap, bp = mp_inverse(a, tol_policy), mp_inverse(b, tol_policy)
    ac, bc = core_inverse(a, tol_policy), core_inverse(b, tol_policy)
    ad, bd = dual_core_inverse(a, tol_policy), dual_core_inverse(b, tol_policy)
    N = spectral_norm
    psi_a = psi_of(a, tol_policy, cross_check=False)
    psi_b = psi_of(b, tol_policy, cross_check=False)
    hyps = {
        "b_nonzero": rank_of(b, tol_policy) > 0,
        "cos_psi_b_positive": not psi_b.cos_zero,
    }
    if variant == "mp":
        hyps["a_nonzero"] = rank_of(a, tol_policy) > 0
        hyps["cos_psi_a_positive"] = not psi_a.cos_zero
    d_mp, d_a = N(bp - ap), N(a - b)
    consts = {
        "norm_mp_diff": d_mp,
        "norm_a_diff": d_a,
        "cos_psi_a": psi_a.cos_psi,
        "cos_psi_b": psi_b.cos_psi,
        "norm_mp_a": N(ap),
        "norm_mp_b": N(bp),
    }
    core_diff, dual_diff = N(bc - ac), N(bd - ad)
    bound = None
    if all(hyps.values()):
        cb = psi_b.cos_psi
        if variant == "core":
            bound = d_mp / cb + (N(bc) + N(ap) / cb) * N(ac) * d_a
        elif variant == "dual":
            bound = d_mp / cb + (N(bd) + N(ap) / cb) * N(ad) * d_a
        else:
            bound = d_mp / cb + N(ap) * (N(bp) + N(ap)) / (psi_a.cos_psi * cb) * d_a
    actual = dual_diff if variant == "dual" else core_diff
    dual_actual = dual_diff if variant == "mp" else None
    return _finish(f"angle_{variant}", bound, actual, hyps, consts, dual_actual)


def norm_core_bound(a, tol_policy: RankTolerance = DEFAULT_TOL) -> BoundReport:
    """``||core(a)|| <= ||a+|| / cos psi_a``; the dual core norm is reported alongside."""
    a = as_cmatrix(a)
    require_square(a)
    ac, ad = core_inverse(a, tol_policy), dual_core_inverse(a, tol_policy)
    psi = psi_of(a, tol_policy, cross_check=False)
    hyps = {"a_nonzero": rank_of(a, tol_policy) > 0, "cos_psi_a_positive": not psi.cos_zero}
    norm_mp = spectral_norm(mp_inverse(a, tol_policy))
    consts = {"norm_mp": norm_mp, "cos_psi_a": psi.cos_psi, "psi_a": psi.psi}
    bound = norm_mp / psi.cos_psi if all(hyps.values()) else None
    return _finish("norm_core", bound, spectral_norm(ac), hyps, consts, spectral_norm(ad))


def _gap_setup(a, a_n, tol_policy):
    a, a_n = _pair(a, a_n)
    ac = core_inverse(a, tol_policy)
    core_inverse(a_n, tol_policy)  # raises NotGroupInvertible for a_n
    norm_ac = spectral_norm(ac)
    kappa = spectral_norm(a) * norm_ac
    return a, a_n, ac, norm_ac, kappa


def gap_bound_pair(a, a_n, tol_policy: RankTolerance = DEFAULT_TOL) -> BoundReport:
    """Outer-inverse estimate with separate range gap ``s`` and null gap ``r``.

    Requires ``r < 1/(3+k)``, ``s < 1/(1+k)^2``, ``t < 2k/((1+k)(4+k))`` with
    ``k = ||a|| ||ac||``, ``t = ||ac|| ||a - a_n||``; then

        ||core(a_n) - ac|| <= ((1+k)(s+r) + (1+r)t) / (1 - (1+k)s - k r - (1+r)t) ||ac||
    """
    a, a_n, ac, norm_ac, k = _gap_setup(a, a_n, tol_policy)
    r = gap(null_basis(adjoint(a_n), tol_policy), null_basis(adjoint(a), tol_policy)).gap
    s = gap(range_basis(a_n, tol_policy), range_basis(a, tol_policy)).gap
    t = norm_ac * spectral_norm(a - a_n)
    denom = 1 - (1 + k) * s - k * r - (1 + r) * t
    hyps = {
        "a_nonzero": rank_of(a, tol_policy) > 0,
        "r_small": r < 1 / (3 + k),
        "s_small": s < 1 / (1 + k) ** 2,
        "t_small": t < 2 * k / ((1 + k) * (4 + k)),
        "denominator_positive": denom > DENOM_GUARD,
    }
    consts = {"kappa": k, "r": r, "s": s, "t": t, "denominator": denom}
    bound = None
    if all(hyps.values()):
        bound = ((1 + k) * (s + r) + (1 + r) * t) / denom * norm_ac
    actual = spectral_norm(core_inverse(a_n, tol_policy) - ac)
    return _finish("gap_pair", bound, actual, hyps, consts)


def gap_bound_single(a, a_n, tol_policy: RankTolerance = DEFAULT_TOL) -> BoundReport:
    """Outer-inverse estimate with the single gap ``w = gap(R(a_n), R(a))``.

    Requires ``w < 1/(3+k)^2`` and ``z = ||ac|| ||a - a_n|| < 2k/((1+k)(4+k))``;
    then

        ||core(a_n) - ac|| <= (2(1+k)w + (1+w)z) / (1 - (1+2k)w - (1+w)z) ||ac||

    The null-space gap ``gap(N(a_n*), N(a*))`` equals ``w`` in finite
    dimensions; it is recorded as ``w_null`` for inspection.
    """
    a, a_n, ac, norm_ac, k = _gap_setup(a, a_n, tol_policy)
    w = gap(range_basis(a_n, tol_policy), range_basis(a, tol_policy)).gap
    w_null = gap(null_basis(adjoint(a_n), tol_policy), null_basis(adjoint(a), tol_policy)).gap
    z = norm_ac * spectral_norm(a - a_n)
    denom = 1 - (1 + 2 * k) * w - (1 + w) * z
    hyps = {
        "a_nonzero": rank_of(a, tol_policy) > 0,
        "w_small": w < 1 / (3 + k) ** 2,
        "z_small": z < 2 * k / ((1 + k) * (4 + k)),
        "denominator_positive": denom > DENOM_GUARD,
    }
    consts = {"kappa": k, "w": w, "w_null": w_null, "z": z, "denominator": denom}
    bound = None
    if all(hyps.values()):
        bound = (2 * (1 + k) * w + (1 + w) * z) / denom * norm_ac
    actual = spectral_norm(core_inverse(a_n, tol_policy) - ac)
    return _finish("gap_single", bound, actual, hyps, consts)
