"""Small hand-checkable inputs with known outputs, grouped by module."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gen import crandn, e2, planted_group
from gencore.calc import (
    MatrixFamily,
    core_derivative,
    cross_check_product_rule,
    derivative_bundle,
    dual_core_derivative,
    family_eval,
    fd_check,
    mp_derivative,
)
from gencore.errors import GroupInvertibilityLostNearT0, HypothesisViolated, NotGroupInvertible
from gencore.geninv import (
    check_prescribed_outer,
    core_inverse,
    dual_core_inverse,
    group_inverse,
    index_ranks,
    inverse_bundle,
    is_group_invertible,
    mp_inverse,
)
from gencore.limits import analyze_sequence, build_trace, rank_criterion, zero_limit_classify
from gencore.matcore import (
    adjoint,
    null_basis,
    projector,
    range_basis,
    rank_of,
    spectral_norm,
)
from gencore.perturb import (
    angle_bound,
    core_diff_decomposition,
    gap_bound_pair,
    gap_bound_single,
    norm_core_bound,
)
from gencore.subgeo import gap, max_angle, psi_of

I2 = np.eye(2)
D = np.diag([2.0, 0.0])
P = np.array([[1.0, 1.0], [0.0, 0.0]])
N = np.array([[0.0, 1.0], [0.0, 0.0]])
HALF = np.full((2, 2), 0.5)


def close(x, y, tol=1e-12):
    return float(np.max(np.abs(np.asarray(x) - np.asarray(y)))) <= tol


def same_span(basis, vectors):
    want = range_basis(np.array(vectors, dtype=complex).T)
    return gap(basis, want).gap < 1e-12


# matcore ---------------------------------------------------------------------


def test_spectral_norms():
    assert spectral_norm(I2) == pytest.approx(1.0)
    assert spectral_norm(np.zeros((2, 2))) == 0.0
    assert spectral_norm([[1, math.sqrt(3)], [0, 0]]) == pytest.approx(2.0)


def test_ranks():
    assert rank_of(D) == 1
    assert rank_of(N) == 1 and rank_of(N @ N) == 0
    assert rank_of(e2(math.pi / 3)) == 1


def test_bases():
    assert same_span(range_basis(e2(math.pi / 3)), [[1, 0]])
    assert range_basis(np.zeros((2, 2))).dim == 0
    assert range_basis(I2).dim == 2
    assert null_basis(I2).dim == 0
    assert same_span(null_basis(D), [[0, 1]])
    t = math.pi / 3
    assert same_span(null_basis(e2(t)), [[-math.sin(t), math.cos(t)]])


def test_projectors():
    assert close(projector(range_basis(np.array([[1.0], [0.0]]))), np.diag([1.0, 0.0]))
    assert close(projector(range_basis(np.zeros((2, 1)))), np.zeros((2, 2)))
    assert close(projector(range_basis(np.array([[1.0], [1.0]]))), HALF)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 7), st.integers(1, 7), st.integers(0, 7), st.integers(0, 2**32 - 1))
def test_matcore_consistency(m, n, r, seed):
    rng = np.random.default_rng(seed)
    r = min(r, m, n)
    a = crandn(rng, m, r) @ crandn(rng, r, n) if r else np.zeros((m, n))
    assert spectral_norm(a) == pytest.approx(spectral_norm(adjoint(a)), abs=1e-12 * max(1, spectral_norm(a)))
    assert rank_of(a) + null_basis(a).dim == n
    assert np.linalg.norm(projector(range_basis(a)) - a @ mp_inverse(a)) <= 1e-10


# geninv ----------------------------------------------------------------------


def test_mp_examples():
    assert close(mp_inverse(D), np.diag([0.5, 0.0]))
    assert close(mp_inverse(P), [[0.5, 0.0], [0.5, 0.0]])


def test_group_examples():
    assert not is_group_invertible(N)
    assert is_group_invertible(P) and is_group_invertible(I2)
    assert close(group_inverse(P), P)
    assert close(group_inverse(D), np.diag([0.5, 0.0]))
    with pytest.raises(NotGroupInvertible):
        group_inverse(N)


def test_core_examples():
    assert close(core_inverse(P), np.diag([1.0, 0.0]))
    assert close(core_inverse(I2), I2)
    assert close(dual_core_inverse(P), HALF)
    assert close(dual_core_inverse(I2), I2)
    a_star = adjoint(e2(math.pi / 3))
    assert close(dual_core_inverse(a_star), np.diag([2.0, 0.0]))


@pytest.mark.parametrize("a, tol", [(P, 1e-10), (I2, 1e-15), (e2(math.pi / 4), 1e-10)])
def test_bundle_residuals(a, tol):
    b = inverse_bundle(a)
    assert b.verified and max(b.residuals.values()) <= tol


def test_outer_examples():
    assert check_prescribed_outer(P, np.diag([1.0, 0.0]), "core").ok
    assert check_prescribed_outer(e2(math.pi / 3), np.diag([2.0, 0.0]), "core").ok
    assert not check_prescribed_outer(P, mp_inverse(P), "core").ok


def test_index_ranks_of_nilpotent():
    assert index_ranks(N) == (1, 0)


# subgeo ----------------------------------------------------------------------


def line(theta):
    return range_basis(np.array([[math.cos(theta)], [math.sin(theta)]]))


def test_gap_examples():
    assert gap(line(0), line(0)).gap == 0.0
    assert gap(line(0), line(math.pi / 2)).gap == pytest.approx(1.0)
    assert gap(line(0), line(math.pi / 6)).gap == pytest.approx(0.5)
    r = gap(line(0), range_basis(I2))
    assert (r.delta_mn, r.delta_nm, r.gap) == pytest.approx((0.0, 1.0, 1.0))


def test_angle_examples():
    p = np.diag([1.0, 0.0])
    assert max_angle(p, p).psi == 0.0
    assert max_angle(p, np.diag([0.0, 1.0])).psi == pytest.approx(math.pi / 2)
    a = e2(math.pi / 3)
    ap = mp_inverse(a)
    assert max_angle(a @ ap, ap @ a).psi == pytest.approx(math.pi / 3, abs=1e-12)
    assert psi_of(I2).psi == 0.0
    assert psi_of(np.zeros((2, 2))).psi == 0.0


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 7), st.integers(1, 7), st.sampled_from([1e-8, 1e-4, 1e-1, 1.0]), st.integers(0, 2**32 - 1))
def test_range_gap_equals_adjoint_null_gap(n, r, eps, seed):
    rng = np.random.default_rng(seed)
    a = crandn(rng, n, min(r, n)) @ crandn(rng, min(r, n), n)
    b = a + eps * crandn(rng, n, n)
    g_range = gap(range_basis(a), range_basis(b)).gap
    g_null = gap(null_basis(adjoint(a)), null_basis(adjoint(b))).gap
    assert g_range == pytest.approx(g_null, abs=1e-10)


# perturb ---------------------------------------------------------------------


def test_decomposition_examples():
    assert core_diff_decomposition(P, P).residual == 0.0
    assert core_diff_decomposition(e2(math.pi / 6), e2(math.pi / 6 + 0.01)).residual <= 1e-9
    rep = core_diff_decomposition(I2, 2 * I2)
    assert close(rep.actual_diff, -0.5 * I2) and rep.residual <= 1e-12
    assert close(rep.term1, np.zeros((2, 2)))


def test_angle_bound_examples():
    rep = angle_bound(e2(math.pi / 4), e2(math.pi / 4))
    assert rep.actual_value == pytest.approx(0.0, abs=1e-15) and rep.valid
    rep = angle_bound(e2(math.pi / 6), e2(math.pi / 6 + 0.01), "mp")
    assert rep.valid and rep.slack > 0
    rep = angle_bound(I2, 1.1 * I2, "core")
    expected = (1 - 1 / 1.1) + (1 / 1.1 + 1) * 1 * 0.1
    assert rep.bound_value == pytest.approx(expected, rel=1e-12)
    assert rep.actual_value == pytest.approx(1 - 1 / 1.1, rel=1e-12)


def test_angle_bounds_diverge_near_half_pi():
    a = e2(math.pi / 3)
    b = e2(math.pi / 2 - 1e-3)
    for variant in ("core", "dual", "mp"):
        rep = angle_bound(a, b, variant)
        assert rep.hypotheses_hold and rep.bound_value > 1e3


def test_norm_core_examples():
    assert norm_core_bound(I2).slack == pytest.approx(0.0, abs=1e-15)
    rep = norm_core_bound(e2(math.pi / 3))
    assert rep.bound_value == pytest.approx(2.0) and rep.actual_value == pytest.approx(2.0)
    rep = norm_core_bound(P)
    assert rep.valid and rep.constants["norm_mp"] == pytest.approx(1 / math.sqrt(2))


def test_gap_bound_examples():
    a = e2(math.pi / 4)
    rep = gap_bound_pair(a, a)
    c = rep.constants
    assert (c["r"], c["s"], c["t"]) == (0.0, 0.0, 0.0) and rep.bound_value == 0.0
    assert gap_bound_single(a, a).bound_value == 0.0
    for f in (gap_bound_pair, gap_bound_single):
        assert f(e2(math.pi / 6), e2(math.pi / 6 + 1e-3)).valid
    rep = gap_bound_single(D, np.diag([2 + 1e-4, 0.0]))
    assert rep.actual_value == pytest.approx(0.5 - 1 / (2 + 1e-4), rel=1e-9) and rep.valid
    with pytest.raises(NotGroupInvertible):
        gap_bound_pair(e2(math.pi / 6), N)


def test_gap_bound_hypothesis_failure():
    with pytest.raises(HypothesisViolated):
        gap_bound_pair(e2(0.3), e2(0.3) + np.diag([0.0, 1.0]))


# limits ----------------------------------------------------------------------


def test_rank_criterion_examples():
    trace = build_trace([P] * 5, P)
    rc = rank_criterion(trace)
    assert rc.holds and rc.n0 == 1
    trace = build_trace([e2(math.pi / 2 - 1 / n) for n in range(2, 12)], N)
    rc = rank_criterion(trace)
    assert rc.holds and not rc.applicable
    assert rc.note.startswith("criterion inapplicable: limit not (dual) core invertible")
    trace = build_trace([np.diag([2.0, 1.0 / n]) for n in range(1, 12)], D)
    assert not rank_criterion(trace).holds


def test_zero_limit_examples():
    z = np.zeros((2, 2))
    assert zero_limit_classify(build_trace([z] * 6, z)) == "eventually_zero"
    trace = build_trace([e2(math.pi / 4) / n for n in range(1, 30)], z)
    assert zero_limit_classify(trace) == "inverse_unbounded"
    norms = [r.norm_group for r in trace.per_sample]
    assert norms[-1] / norms[0] == pytest.approx(29, rel=1e-9)


def test_angle_monitor_matches_core_a_norm_per_sample():
    rng = np.random.default_rng(31)
    samples = [planted_group(rng, 4, 2) for _ in range(6)]
    trace = build_trace(samples, samples[-1])
    for rec in trace.per_sample:
        assert rec.norm_core_a * rec.cos_psi == pytest.approx(1.0, abs=1e-8)


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 6), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_equivalent_statements_agree_on_converging_sequences(n, r, seed):
    rng = np.random.default_rng(seed)
    r = min(r, n)
    x, y = crandn(rng, n, n), crandn(rng, n, n)
    lam = np.zeros(n, complex)
    lam[:r] = crandn(rng, r)
    build = lambda xx, ll: xx @ np.diag(ll) @ np.linalg.inv(xx)  # noqa: E731
    samples = [build(x + 2.0**-k * y, lam * (1 + 2.0**-k)) for k in range(1, 30)]
    v = analyze_sequence(build_trace(samples, build(x, lam)))
    verdicts = {s: v.statements[s] for s in list(v.statements)[:8]}
    assert set(verdicts.values()) == {"holds"}, verdicts


# calc ------------------------------------------------------------------------


def test_family_eval_examples():
    a, da = family_eval(MatrixFamily([np.zeros((2, 2)), I2]), 2.0)
    assert close(a, 2 * I2) and close(da, I2)
    a, da = family_eval(MatrixFamily([I2]), 5.0)
    assert close(a, I2) and close(da, np.zeros((2, 2)))
    e11 = np.diag([1.0, 0.0])
    a, da = family_eval(MatrixFamily([e11, e11]), 1.0)
    assert close(a, 2 * e11) and close(da, e11)


def test_mp_derivative_examples():
    assert close(mp_derivative(I2, I2), -I2)
    assert close(mp_derivative(D, np.diag([1.0, 0.0])), np.diag([-0.25, 0.0]))
    assert close(mp_derivative(e2(math.pi / 4), np.zeros((2, 2))), np.zeros((2, 2)))


def test_core_and_dual_derivative_examples():
    e11 = np.diag([1.0, 0.0])
    b = derivative_bundle(MatrixFamily([e11, e11]), 0.0)
    assert close(b.core_prime, -e11)
    b = derivative_bundle(MatrixFamily([np.zeros((2, 2)), I2]), 1.0)
    for name in ("core_prime", "dual_core_prime", "group_prime", "mp_prime"):
        assert close(getattr(b, name), -I2, 1e-12)
    b = derivative_bundle(MatrixFamily([P, P]), 0.0)
    assert close(b.dual_core_prime, -HALF, 1e-12)
    assert close(b.group_prime, -P, 1e-12)
    assert max(cross_check_product_rule(b).values()) <= 1e-10
    b = derivative_bundle(MatrixFamily([P]), 0.3)
    for name in ("core_prime", "dual_core_prime", "group_prime", "mp_prime"):
        assert close(getattr(b, name), np.zeros((2, 2)))
    direct = core_derivative(b.a, b.a_prime, b.mp, b.mp_prime, b.core)
    assert close(direct, np.zeros((2, 2)))
    assert close(dual_core_derivative(b.a, b.a_prime, b.mp, b.mp_prime, b.dual_core), np.zeros((2, 2)))


@pytest.mark.parametrize("coeffs, t0, tol", [
    ([np.zeros((2, 2)), I2], 1.0, 1e-12),
    ([P, P], 0.0, 1e-10),
    ([e2(math.pi / 6), e2(math.pi / 6)], 0.0, 1e-9),
])
def test_product_rule_residuals(coeffs, t0, tol):
    b = derivative_bundle(MatrixFamily(coeffs), t0)
    assert max(cross_check_product_rule(b).values()) <= tol


def test_zero_family_has_zero_derivatives():
    b = derivative_bundle(MatrixFamily([np.zeros((3, 3)), np.zeros((3, 3))]), 0.0)
    for name in ("mp_prime", "core_prime", "dual_core_prime", "group_prime"):
        assert not np.any(getattr(b, name))


def test_fd_examples():
    f = MatrixFamily([np.zeros((2, 2)), I2])
    tab = fd_check(f, 1.0, "core", h_schedule=[1e-2, 5e-3, 2.5e-3])
    ratios = [e1 / e2 for e1, e2 in zip(tab.errors, tab.errors[1:])]
    assert ratios == pytest.approx([4.0, 4.0], rel=0.01)
    const = fd_check(MatrixFamily([P]), 0.0, "group")
    assert max(const.errors) <= 1e-12 and const.order is None
    # a(t) = [[1, t], [0, 0]] keeps rank one and index one near 0
    g = MatrixFamily([np.diag([1.0, 0.0]), np.array([[0.0, 1.0], [0.0, 0.0]])])
    assert max(fd_check(g, 0.0, "core").errors) < 1e-5
    h = MatrixFamily([N, np.diag([1.0, 0.0])])
    with pytest.raises(GroupInvertibilityLostNearT0):
        fd_check(h, 0.0, "core")


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 5), st.integers(1, 5), st.floats(-0.4, 0.4), st.integers(0, 2**32 - 1))
def test_fd_check_succeeds_for_all_or_none(n, r, t0, seed):
    from gen import random_family

    f = random_family(np.random.default_rng(seed), n, min(r, n))
    outcomes = []
    for which in ("core", "dual_core", "group"):
        try:
            fd_check(f, t0, which)
            outcomes.append(True)
        except GroupInvertibilityLostNearT0:
            outcomes.append(False)
    assert len(set(outcomes)) == 1
