"""Derivatives of generalized inverses along polynomial matrix families.

A family ``a(t) = sum_k C_k t^k`` is differentiated exactly.  The
derivatives of ``a^core``, ``a^dual`` and ``a^#`` follow from the
Moore-Penrose derivative by closed formulas; central finite differences
provide an independent check of each.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .errors import DimensionMismatch, GroupInvertibilityLostNearT0, InternalInconsistency, NotGroupInvertible
from .geninv import core_inverse, dual_core_inverse, group_inverse, is_group_invertible, mp_inverse
from .matcore import DEFAULT_TOL, RankTolerance, adjoint, as_cmatrix, fro_norm, require_square

Formula = Literal["mp", "core", "dual_core", "group"]
FORMULAS: tuple[Formula, ...] = ("mp", "core", "dual_core", "group")

DEFAULT_H_SCHEDULE = (1e-3, 5e-4, 2.5e-4)
AGREEMENT_TOL = 1e-8


@dataclass(frozen=True)
class MatrixFamily:
    """Polynomial family; ``coefficients[k]`` multiplies ``t**k``."""

    coefficients: tuple[np.ndarray, ...]

    def __init__(self, coefficients: Sequence):
        coeffs = tuple(as_cmatrix(c) for c in coefficients)
        if not coeffs:
            raise ValueError("a family needs at least one coefficient")
        require_square(coeffs[0], "coefficient 0")
        for k, c in enumerate(coeffs):
            if c.shape != coeffs[0].shape:
                raise DimensionMismatch(
                    f"coefficient {k} has shape {c.shape}, expected {coeffs[0].shape}", index=k
                )
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def size(self) -> int:
        return self.coefficients[0].shape[0]

    def adjoint(self) -> "MatrixFamily":
        return MatrixFamily([adjoint(c) for c in self.coefficients])


def family_eval(f: MatrixFamily, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Horner evaluation of ``a(t)`` and ``a'(t)``."""
    coeffs = f.coefficients
    a = coeffs[-1].copy()
    da = np.zeros_like(a)
    for c in reversed(coeffs[:-1]):
        da = da * t + a
        a = a * t + c
    return a, da


def mp_derivative(a, a_prime, tol_policy: RankTolerance = DEFAULT_TOL) -> np.ndarray:
    """Derivative of ``a^+`` under a rank-preserving variation ``a'``.

        -a+ a' a+ + a+ a+* a'* (1 - a a+) + (1 - a+ a) a'* a+* a+

    Only valid while the rank is locally constant; :func:`fd_check` is the
    way to certify that on a given family.
    """
    a, da = as_cmatrix(a), as_cmatrix(a_prime)
    p = mp_inverse(a, tol_policy)
    ps = adjoint(p)
    das = adjoint(da)
    eye_m, eye_n = np.eye(a.shape[0]), np.eye(a.shape[1])
    return -p @ da @ p + p @ ps @ das @ (eye_m - a @ p) + (eye_n - p @ a) @ das @ ps @ p


def core_derivative(a, a_prime, mp, mp_prime, core) -> np.ndarray:
    eye = np.eye(a.shape[0])
    return (
        core @ a @ mp_prime @ (eye - a @ core)
        - core @ a_prime @ core
        + (eye - core @ a) @ a_prime @ mp @ core
    )


def dual_core_derivative(a, a_prime, mp, mp_prime, dual_core) -> np.ndarray:
    eye = np.eye(a.shape[0])
    d = dual_core
    return (
        (eye - d @ a) @ mp_prime @ a @ d
        - d @ a_prime @ d
        + d @ mp @ a_prime @ (eye - a @ d)
    )


def group_derivative_expressions(a, a_prime, core, core_prime, dual_core, dual_core_prime):
    """The three equivalent expressions for ``(a^#)'`` and their common scale.

    They are the product rule applied to ``a^# = ac^2 a``, ``a^# = a ad^2``
    and ``a^# = ac a ad``.  All terms are kept: ``ac'`` does not commute with
    ``ac`` (nor ``ad'`` with ``ad``), so shortcuts such as ``2 ac ac' a``
    are wrong even for invertible ``a``.

    The scale is the largest sum of term norms, so discrepancies can be
    measured relative to the size of what was added up.
    """
    c, dc, d, dd = core, core_prime, dual_core, dual_core_prime
    terms = (
        (dc @ c @ a, c @ dc @ a, c @ c @ a_prime),
        (a_prime @ d @ d, a @ dd @ d, a @ d @ dd),
        (dc @ a @ d, c @ a_prime @ d, c @ a @ dd),
    )
    exprs = tuple(sum(ts) for ts in terms)
    scale = max(sum(fro_norm(t) for t in ts) for ts in terms)
    return exprs, scale


def _rel(x: np.ndarray, scale: float) -> float:
    return fro_norm(x) / max(scale, np.finfo(float).tiny)


def group_derivative(a, a_prime, core, core_prime, dual_core, dual_core_prime) -> np.ndarray:
    (e1, e2, e3), scale = group_derivative_expressions(
        a, a_prime, core, core_prime, dual_core, dual_core_prime
    )
    disc = _group_discrepancies(e1, e2, e3, scale)
    if max(disc.values()) > AGREEMENT_TOL:
        raise InternalInconsistency("group-inverse derivative expressions disagree", **disc)
    return e1


def _group_discrepancies(e1, e2, e3, scale) -> dict[str, float]:
    return {
        "1-2": _rel(e1 - e2, scale),
        "1-3": _rel(e1 - e3, scale),
        "2-3": _rel(e2 - e3, scale),
    }


@dataclass(frozen=True)
class DerivativeBundle:
    t0: float
    a: np.ndarray
    a_prime: np.ndarray
    mp: np.ndarray
    mp_prime: np.ndarray
    core: np.ndarray
    core_prime: np.ndarray
    dual_core: np.ndarray
    dual_core_prime: np.ndarray
    group: np.ndarray
    group_prime: np.ndarray
    fd_errors: dict[str, float] = field(default_factory=dict)
    group_discrepancies: dict[str, float] = field(default_factory=dict)
    dual_adjoint_residual: float = 0.0


def _point(f: MatrixFamily, t: float, tol_policy: RankTolerance):
    a, da = family_eval(f, t)
    try:
        return a, da, core_inverse(a, tol_policy), dual_core_inverse(a, tol_policy), group_inverse(a, tol_policy)
    except NotGroupInvertible as exc:
        raise NotGroupInvertible(f"a({t!r}) is not group invertible", t=t, **exc.details) from exc


def _closed_forms(f: MatrixFamily, t0: float, tol_policy: RankTolerance):
    a, da, c, d, g = _point(f, t0, tol_policy)
    p = mp_inverse(a, tol_policy)
    dp = mp_derivative(a, da, tol_policy)
    dc = core_derivative(a, da, p, dp, c)
    dd = dual_core_derivative(a, da, p, dp, d)
    (e1, e2, e3), scale = group_derivative_expressions(a, da, c, dc, d, dd)
    disc = _group_discrepancies(e1, e2, e3, scale)
    if max(disc.values()) > AGREEMENT_TOL:
        raise InternalInconsistency("group-inverse derivative expressions disagree", **disc)
    return dict(a=a, a_prime=da, mp=p, mp_prime=dp, core=c, core_prime=dc,
                dual_core=d, dual_core_prime=dd, group=g, group_prime=e1), disc


def _value(f: MatrixFamily, t: float, which: Formula, tol_policy: RankTolerance) -> np.ndarray:
    a, _ = family_eval(f, t)
    if which == "mp":
        return mp_inverse(a, tol_policy)
    if not is_group_invertible(a, tol_policy):
        raise GroupInvertibilityLostNearT0(
            f"a(t) is not group invertible at t={t!r}", t=t
        )
    try:
        return {"core": core_inverse, "dual_core": dual_core_inverse, "group": group_inverse}[which](a, tol_policy)
    except NotGroupInvertible as exc:
        raise GroupInvertibilityLostNearT0(
            f"a(t) is numerically not group invertible at t={t!r}", t=t, **exc.details
        ) from exc


def fd_error(exact: np.ndarray, approx: np.ndarray) -> float:
    """``||approx - exact||_F / max(1, ||exact||_F)``."""
    return fro_norm(approx - exact) / max(1.0, fro_norm(exact))


def derivative_bundle(
    f: MatrixFamily, t0: float, tol_policy: RankTolerance = DEFAULT_TOL, h: float = 1e-5
) -> DerivativeBundle:
    """All closed-form derivatives at ``t0`` plus a central-difference check at step ``h``."""
    vals, disc = _closed_forms(f, t0, tol_policy)
    fd = {}
    for which in FORMULAS:
        central = (_value(f, t0 + h, which, tol_policy) - _value(f, t0 - h, which, tol_policy)) / (2 * h)
        fd[which] = fd_error(vals[f"{which}_prime"], central)
    # dual core derivative equals the adjoint of the core derivative of the adjoint family
    adj_vals, _ = _closed_forms(f.adjoint(), t0, tol_policy)
    dual_adj = _rel(
        vals["dual_core_prime"] - adjoint(adj_vals["core_prime"]),
        max(fro_norm(vals["dual_core_prime"]), 1.0),
    )
    return DerivativeBundle(t0=t0, **vals, fd_errors=fd, group_discrepancies=disc,
                            dual_adjoint_residual=dual_adj)


def cross_check_product_rule(b: DerivativeBundle) -> dict[str, float]:
    """Residuals of the product-rule identities

        (a+)'   = ad' a ac + ad a' ac + ad a ac'
        (ac)'   = g' a a+ + g a' a+ + g a (a+)'
        (ad)'   = (a+)' a g + a+ a' g + a+ a g'

    each relative to the sum of its term norms.
    """
    a, da = b.a, b.a_prime
    c, dc, d, dd = b.core, b.core_prime, b.dual_core, b.dual_core_prime
    p, dp, g, dg = b.mp, b.mp_prime, b.group, b.group_prime
    out = {}
    for name, lhs, terms in (
        ("mp_prime", dp, (dd @ a @ c, d @ da @ c, d @ a @ dc)),
        ("core_prime", dc, (dg @ a @ p, g @ da @ p, g @ a @ dp)),
        ("dual_core_prime", dd, (dp @ a @ g, p @ da @ g, p @ a @ dg)),
    ):
        scale = max(fro_norm(lhs), sum(fro_norm(t) for t in terms))
        out[name] = _rel(lhs - sum(terms), scale)
    return out


@dataclass(frozen=True)
class FDTable:
    which: str
    t0: float
    h: list[float]
    errors: list[float]
    orders: list[float]

    @property
    def order(self) -> float | None:
        return float(np.mean(self.orders)) if self.orders else None


def fd_check(
    f: MatrixFamily,
    t0: float,
    which: Formula = "core",
    h_schedule: Sequence[float] = DEFAULT_H_SCHEDULE,
    tol_policy: RankTolerance = DEFAULT_TOL,
) -> FDTable:
    """Compare the closed-form derivative against central differences.

    Raises :class:`GroupInvertibilityLostNearT0` as soon as any sampled
    point ``t0`` or ``t0 +- h`` fails the index check, which is the regime
    where the inverses are discontinuous.
    """
    if which not in FORMULAS:
        raise ValueError(f"unknown formula {which!r}")
    hs = [float(h) for h in h_schedule]
    if not hs or any(not (h > 0) for h in hs):
        raise ValueError("h_schedule must be non-empty and positive")
    for t in [t0] + [t0 + s * h for h in hs for s in (1, -1)]:
        a, _ = family_eval(f, t)
        if not is_group_invertible(a, tol_policy):
            raise GroupInvertibilityLostNearT0(f"a(t) is not group invertible at t={t!r}", t=t)
    try:
        vals, _ = _closed_forms(f, t0, tol_policy)
    except NotGroupInvertible as exc:
        raise GroupInvertibilityLostNearT0(str(exc), **exc.details) from exc
    exact = vals[f"{which}_prime"]
    errors = []
    for h in hs:
        central = (_value(f, t0 + h, which, tol_policy) - _value(f, t0 - h, which, tol_policy)) / (2 * h)
        errors.append(fd_error(exact, central))
    orders = []
    for (h1, e1), (h2, e2) in zip(zip(hs, errors), zip(hs[1:], errors[1:])):
        if e1 > 0 and e2 > 0 and h1 != h2:
            orders.append(math.log(e1 / e2) / math.log(h1 / h2))
    return FDTable(which, float(t0), hs, errors, orders)
