"""Desk-scale diagnosis of sequences ``a_n -> a`` of group invertible matrices.

Given finitely many samples and the claimed limit, the analyzer records
per-sample inverses, angles and gaps, then decides each of the equivalent
continuity statements (core / dual core / group inverse convergence,
boundedness, Moore-Penrose convergence with a bounded ``core(a_n) a_n`` or a
uniform angle bound, rank stabilization) as ``holds``, ``fails`` or
``undetermined``.

Quantifiers such as "for all sufficiently large n" are replaced by finite
proxies on the last ``k = max(3, 20% of samples)`` samples.  Writing
``e_n = ||a_n - a||`` and ``d_n`` for the distance of an inverse to its
claimed limit:

* convergence holds when every tail ``d_n`` is below ``convergence_tol``, or
  when ``d_n`` is non-increasing and shrinks at least like ``e_n**min_order``
  (log-log slope of ``d`` against ``e``); a non-positive slope means failure;
* a norm sequence is bounded when it stays below ``bound_threshold`` and does
  not grow like a negative power of ``e_n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .errors import DimensionMismatch, NotGroupInvertible
from .geninv import core_inverse, dual_core_inverse, group_inverse, index_ranks, mp_inverse
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

Tri = Literal["holds", "fails", "undetermined"]

STATEMENTS = (
    "core_converges",
    "dual_converges",
    "group_converges",
    "core_bounded",
    "dual_bounded",
    "mp_converges_and_core_a_bounded",
    "psi_uniformly_bounded",
    "rank_stabilizes",
    "eventually_zero",
)
# statements that are equivalent whenever the samples converge to their limit
EQUIVALENT_FAMILY = STATEMENTS[:7]


@dataclass(frozen=True)
class Thresholds:
    convergence_tol: float = 1e-6
    bound_threshold: float = 1e6
    angle_margin: float = 1e-3
    min_order: float = 0.5

    def __post_init__(self):
        for name in ("convergence_tol", "bound_threshold", "angle_margin", "min_order"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")


@dataclass(frozen=True)
class SampleRecord:
    index: int
    rank: int
    group_exists: bool
    norm_core: float
    norm_dual: float
    norm_group: float
    norm_mp: float
    norm_core_a: float
    psi: float
    cos_psi: float
    gap_range: float
    gap_null_adj: float
    gap_range_adj: float
    gap_null: float
    diff_a: float
    diff_core: float
    diff_dual: float
    diff_group: float
    diff_mp: float


@dataclass(frozen=True)
class FamilyTrace:
    samples: list[np.ndarray]
    limit: np.ndarray
    per_sample: list[SampleRecord]
    limit_rank: int
    limit_group_exists: bool
    limit_rank_sq: int


@dataclass(frozen=True)
class RankCriterion:
    holds: bool
    n0: int | None
    applicable: bool
    note: str


@dataclass(frozen=True)
class ContinuityVerdict:
    statements: dict[str, Tri]
    narrative: str
    overall: Tri
    components: dict[str, Tri] = field(default_factory=dict)
    rank_criterion: RankCriterion | None = None
    zero_limit: str | None = None


def _inverses(a, tol_policy):
    try:
        return (
            core_inverse(a, tol_policy),
            dual_core_inverse(a, tol_policy),
            group_inverse(a, tol_policy),
        )
    except NotGroupInvertible:
        return None


def build_trace(samples: Sequence, limit, tol_policy: RankTolerance = DEFAULT_TOL) -> FamilyTrace:
    """Evaluate every per-sample diagnostic against the claimed limit."""
    lim = as_cmatrix(limit)
    require_square(lim, "limit")
    mats = [as_cmatrix(s) for s in samples]
    for i, m in enumerate(mats):
        if m.shape != lim.shape:
            raise DimensionMismatch(
                f"sample {i + 1} has shape {m.shape}, limit has {lim.shape}", index=i + 1
            )
    nan = float("nan")
    lim_inv = _inverses(lim, tol_policy)
    lim_mp = mp_inverse(lim, tol_policy)
    lim_r = range_basis(lim, tol_policy)
    lim_na = null_basis(adjoint(lim), tol_policy)
    lim_ra = range_basis(adjoint(lim), tol_policy)
    lim_n = null_basis(lim, tol_policy)
    records = []
    for i, m in enumerate(mats, start=1):
        inv = _inverses(m, tol_policy)
        mp = mp_inverse(m, tol_policy)
        ang = psi_of(m, tol_policy, cross_check=False)
        if inv is not None:
            c, d, g = inv
            norms = (spectral_norm(c), spectral_norm(d), spectral_norm(g), spectral_norm(c @ m))
        else:
            norms = (nan, nan, nan, nan)
        if inv is not None and lim_inv is not None:
            diffs = tuple(spectral_norm(x - y) for x, y in zip(inv, lim_inv))
        else:
            diffs = (nan, nan, nan)
        records.append(
            SampleRecord(
                index=i,
                rank=rank_of(m, tol_policy),
                group_exists=inv is not None,
                norm_core=norms[0],
                norm_dual=norms[1],
                norm_group=norms[2],
                norm_mp=spectral_norm(mp),
                norm_core_a=norms[3],
                psi=ang.psi,
                cos_psi=ang.cos_psi,
                gap_range=gap(range_basis(m, tol_policy), lim_r).gap,
                gap_null_adj=gap(null_basis(adjoint(m), tol_policy), lim_na).gap,
                gap_range_adj=gap(range_basis(adjoint(m), tol_policy), lim_ra).gap,
                gap_null=gap(null_basis(m, tol_policy), lim_n).gap,
                diff_a=spectral_norm(m - lim),
                diff_core=diffs[0],
                diff_dual=diffs[1],
                diff_group=diffs[2],
                diff_mp=spectral_norm(mp - lim_mp),
            )
        )
    return FamilyTrace(
        samples=mats,
        limit=lim,
        per_sample=records,
        limit_rank=rank_of(lim, tol_policy),
        limit_group_exists=lim_inv is not None,
        limit_rank_sq=index_ranks(lim, tol_policy)[1],
    )


def sample_family(f, count: int) -> tuple[list[np.ndarray], np.ndarray]:
    """Samples ``a(1/n)`` for ``n = 1..count`` of a polynomial family, and the limit ``a(0)``."""
    from .calc import family_eval

    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    samples = [family_eval(f, 1.0 / n)[0] for n in range(1, count + 1)]
    return samples, family_eval(f, 0.0)[0]


def _tail_len(n: int) -> int:
    return min(n, max(3, math.ceil(0.2 * n)))


def _loglog_slope(y: np.ndarray, e: np.ndarray) -> float | None:
    mask = (y > 0) & (e > 0)
    y, e = y[mask], e[mask]
    if y.size < 2 or np.ptp(np.log(e)) < 1e-12:
        return None
    return float(np.polyfit(np.log(e), np.log(y), 1)[0])


def _and(*vals: Tri) -> Tri:
    if "fails" in vals:
        return "fails"
    if "undetermined" in vals:
        return "undetermined"
    return "holds"


def _converges(d: np.ndarray, e: np.ndarray, th: Thresholds) -> Tri:
    if np.any(np.isnan(d)):
        return "undetermined"
    if np.all(d <= th.convergence_tol):
        return "holds"
    if np.any(d[e == 0] > th.convergence_tol):
        return "fails"
    p = _loglog_slope(d, e)
    if p is None:
        return "undetermined"
    nonincreasing = bool(np.all(np.diff(d) <= 1e-12 * np.maximum(d[:-1], 1.0)))
    if p >= th.min_order and nonincreasing:
        return "holds"
    if p <= 0:
        return "fails"
    return "undetermined"


def _bounded(norms_all: np.ndarray, norms: np.ndarray, e: np.ndarray, th: Thresholds) -> Tri:
    if np.any(np.isnan(norms_all)):
        return "undetermined"
    if np.max(norms_all) > th.bound_threshold:
        return "fails"
    p = _loglog_slope(norms, e)
    if p is not None and p <= -th.min_order:
        return "fails"
    return "holds"


def rank_criterion(trace: FamilyTrace, tol_policy: RankTolerance = DEFAULT_TOL) -> RankCriterion:
    """Do the sample ranks settle on the rank of the limit?

    ``n0`` is the smallest (1-based) index from which every sample rank
    equals ``rank(limit)``; the criterion holds when the whole tail window
    lies past ``n0``.
    """
    ranks = [r.rank for r in trace.per_sample]
    target = trace.limit_rank
    n0 = None
    for i in range(len(ranks), 0, -1):
        if ranks[i - 1] != target:
            break
        n0 = i
    k = _tail_len(len(ranks))
    holds = n0 is not None and n0 <= len(ranks) - k + 1
    if trace.limit_group_exists:
        note = "ranks stabilize at rank(limit)" if holds else "ranks do not settle on rank(limit)"
        return RankCriterion(holds, n0, True, note)
    return RankCriterion(
        holds,
        n0,
        False,
        "criterion inapplicable: limit not (dual) core invertible "
        f"(rank(A^2)={trace.limit_rank_sq} < rank(A)={target})",
    )


def zero_limit_classify(trace: FamilyTrace) -> Literal["eventually_zero", "inverse_unbounded"]:
    """Decide which branch of the zero-limit dichotomy the samples follow.

    For samples of index one converging to zero, either the tail is
    identically zero or the group inverses are unbounded; there is no third
    case.  ``eventually_zero`` needs the whole tail window to be exactly 0.
    """
    if np.any(trace.limit != 0):
        raise ValueError("zero_limit_classify requires a zero limit")
    k = _tail_len(len(trace.samples))
    if all(not np.any(s) for s in trace.samples[-k:]):
        return "eventually_zero"
    return "inverse_unbounded"


def analyze_sequence(
    trace: FamilyTrace,
    tol_policy: RankTolerance = DEFAULT_TOL,
    thresholds: Thresholds = Thresholds(),
) -> ContinuityVerdict:
    n = len(trace.samples)
    if n < 3:
        raise ValueError(f"need at least 3 samples, got {n}")
    k = _tail_len(n)
    recs = trace.per_sample
    col = lambda name: np.array([getattr(r, name) for r in recs], dtype=float)  # noqa: E731
    tail = lambda arr: arr[-k:]  # noqa: E731
    e = col("diff_a")
    et = tail(e)
    th = thresholds

    lim_ok: Tri = "holds" if trace.limit_group_exists else "fails"
    conv = {name: _converges(tail(col(name)), et, th) for name in ("diff_core", "diff_dual", "diff_group", "diff_mp")}
    bnd = {
        name: _bounded(col(name), tail(col(name)), et, th)
        for name in ("norm_core", "norm_dual", "norm_core_a")
    }
    cos = col("cos_psi")
    sec = np.where(cos > 0, 1.0 / np.where(cos > 0, cos, 1.0), np.inf)
    psi_bound = _bounded(sec, tail(sec), et, th)
    if np.max(col("psi")) > math.pi / 2 - th.angle_margin:
        psi_bound = "fails"

    ranks = [r.rank for r in recs]
    rc = rank_criterion(trace, tol_policy)
    statements: dict[str, Tri] = {
        "core_converges": _and(lim_ok, conv["diff_core"]),
        "dual_converges": _and(lim_ok, conv["diff_dual"]),
        "group_converges": _and(lim_ok, conv["diff_group"]),
        "core_bounded": _and(lim_ok, bnd["norm_core"]),
        "dual_bounded": _and(lim_ok, bnd["norm_dual"]),
        "mp_converges_and_core_a_bounded": _and(conv["diff_mp"], bnd["norm_core_a"]),
        "psi_uniformly_bounded": _and(conv["diff_mp"], psi_bound),
        "rank_stabilizes": "holds" if rc.holds else "fails",
        "eventually_zero": "holds"
        if all(not np.any(s) for s in trace.samples[-k:])
        else "fails",
    }
    components: dict[str, Tri] = {
        "limit_group_invertible": lim_ok,
        "mp_converges": conv["diff_mp"],
        "core_a_bounded": bnd["norm_core_a"],
        "psi_bounded": psi_bound,
        "samples_group_invertible": "holds" if all(r.group_exists for r in recs) else "fails",
    }
    zero_limit = zero_limit_classify(trace) if not np.any(trace.limit) else None

    lines = []
    if not trace.limit_group_exists:
        lines.append(
            f"limit is not group invertible: rank(A^2)={trace.limit_rank_sq} "
            f"< rank(A)={trace.limit_rank}"
        )
    missing = [r.index for r in recs if not r.group_exists]
    if missing:
        lines.append(f"samples without a group inverse: {missing}")
    if bnd["norm_core"] == "fails":
        lines.append(f"core inverse norms grow to {np.nanmax(col('norm_core')):.6g}")
    if bnd["norm_core_a"] == "fails":
        lines.append(f"||core(a_n) a_n|| = 1/cos(psi_n) grows to {np.nanmax(col('norm_core_a')):.6g}")
    if conv["diff_mp"] == "holds":
        lines.append("Moore-Penrose inverses converge")
    elif conv["diff_mp"] == "fails":
        lines.append("Moore-Penrose inverses do not converge")
    if zero_limit is not None:
        lines.append(f"zero limit: {zero_limit}")
    lines.append(f"sample ranks (tail): {ranks[-k:]}, rank(limit)={trace.limit_rank}")
    if not rc.applicable:
        lines.append(rc.note)
    overall = statements["core_converges"]
    lines.insert(0, f"core inverse continuity along the samples: {overall}")
    return ContinuityVerdict(
        statements=statements,
        narrative="; ".join(lines),
        overall=overall,
        components=components,
        rank_criterion=rc,
        zero_limit=zero_limit,
    )
