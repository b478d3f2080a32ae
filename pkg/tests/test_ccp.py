import csv
import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from risattack.ccp import (AttackProblem, CcpConfig, CcpTrace, ProblemKind, build_subproblem, compute_gamma,
                           lemma2_affine, lemma2_bound, max_aligned_snr, nemirovski_blocks, project_unit_modulus,
                           rank_one_factor, run_algorithm1, solve_attack, sprocedure_block, sprocedure_multiplier,
                           unit_modulus_blocks,
                           worst_case_snr_exact, write_trace)
from risattack.closed_form import LosInstance, lemma1_best
from risattack.conic import Affine, ComplexAffine, ConicProgram, Cone, lift_complex, solve

from .helpers import block_violation, instance_from_model, psd2_margin


def _crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


# --------------------------------------------------------------------------
# rank-one factor
# --------------------------------------------------------------------------

def test_rank_one_scalar_example():
    u = rank_one_factor(1.0, [1.0])
    R = np.outer(u, u.conj())
    assert R == pytest.approx(np.ones((2, 2)))
    assert np.linalg.eigvalsh(R) == pytest.approx([0.0, 2.0], abs=1e-12)
    assert np.linalg.norm(u) ** 2 == pytest.approx(2.0)


def test_rank_one_matches_block_matrix():
    rng = np.random.default_rng(0)
    hb, hs = _crandn(rng, 6), complex(*rng.standard_normal(2))
    u = rank_one_factor(hs, hb)
    R = np.block([[np.outer(hb, hb.conj()), (hb * hs)[:, None]],
                  [(np.conj(hs) * hb.conj())[None, :], np.array([[abs(hs) ** 2]])]])
    assert np.max(np.abs(R - np.outer(u, u.conj()))) <= 1e-14


def test_rank_one_quadratic_form():
    rng = np.random.default_rng(1)
    hb, hs = _crandn(rng, 5), complex(*rng.standard_normal(2))
    u = rank_one_factor(hs, hb)
    R = np.outer(u, u.conj())
    for _ in range(100):
        psi = _crandn(rng, 5)
        ph = np.r_[psi, 1.0]
        assert np.vdot(ph, R @ ph).real == pytest.approx(abs(hs + np.vdot(hb, psi)) ** 2, rel=1e-12, abs=1e-12)


# --------------------------------------------------------------------------
# unit-modulus blocks
# --------------------------------------------------------------------------

def _um_program(psi_local):
    N = len(psi_local)
    lift = lift_complex(N, 0, 4 * N)
    d_index = np.arange(2 * N, 4 * N)
    return lift, d_index, unit_modulus_blocks(lift, d_index, psi_local)


def test_unit_modulus_fixed_point():
    rng = np.random.default_rng(2)
    psi = np.exp(1j * rng.uniform(0, 2 * np.pi, 4))
    lift, d_index, blocks = _um_program(psi)
    x = np.zeros(16)
    x[:8] = lift.lift(psi)
    assert max(block_violation(b, x) for b in blocks) <= 1e-12


def test_unit_modulus_forces_slack():
    lift, d_index, blocks = _um_program(np.array([1.0 + 0j]))
    c = np.zeros(4)
    c[d_index[1]] = 1.0
    prog = ConicProgram(4, c, list(blocks))
    prog.add_affine([Affine.var(4, 0), Affine.var(4, 1)], Cone.ZERO)  # candidate psi = 0
    sol = solve(prog)
    assert sol.optimal
    assert sol.x[d_index[1]] == pytest.approx(2.0, abs=1e-7)


def test_unit_modulus_linear_cut_underestimates():
    """The cut charges ``d_{N+n}`` at least ``1 - |z|^2`` and exactly ``|z - p|^2`` on the circle."""
    rng = np.random.default_rng(3)
    for _ in range(1000):
        p = np.exp(1j * rng.uniform(0, 2 * np.pi))
        z = rng.uniform(0, 1) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        lift, d_index, blocks = _um_program(np.array([p]))
        x = np.zeros(4)
        x[:2] = lift.lift(np.array([z]))
        cut = blocks[1]
        need = -(cut.A @ x + cut.b)[0]
        assert need >= 1 - abs(z) ** 2 - 1e-12
        zc = z / abs(z)
        x[:2] = lift.lift(np.array([zc]))
        assert -(cut.A @ x + cut.b)[0] == pytest.approx(abs(zc - p) ** 2, abs=1e-12)


# --------------------------------------------------------------------------
# gamma calibration
# --------------------------------------------------------------------------

def test_max_aligned_examples():
    assert max_aligned_snr(1.5, np.zeros(3), 0.5) == pytest.approx(4.5)
    assert max_aligned_snr(1.0, [1.0, 1.0], 1.0) == pytest.approx(9.0)
    assert max_aligned_snr(2 * np.exp(1j * np.pi / 3), [3 * np.exp(-1j * np.pi / 7)], 1.0) == pytest.approx(25.0)


def test_max_aligned_grid_oracle():
    grid = np.exp(1j * 2 * np.pi * np.arange(64) / 64)
    best = max(abs(1.0 + a + b) ** 2 for a, b in itertools.product(grid, grid))
    assert best == pytest.approx(9.0)
    assert best <= max_aligned_snr(1.0, [1.0, 1.0], 1.0) + 1e-12


def test_gamma_examples():
    assert compute_gamma(1.0, [1.0], [[1.0, 1.0]], 1.0) == pytest.approx([9.0])
    assert compute_gamma(0.9, [1.0], [[1.0, 1.0]], 1.0) == pytest.approx([8.1])
    for bad in (0.0, -0.1, 1.1):
        with pytest.raises(ValueError):
            compute_gamma(bad, [1.0], [[1.0]], 1.0)


def test_gamma_matches_sdr_oracle():
    """Rank-relaxed lifted program solved by an independent SDP solver (N = 2)."""
    cp = pytest.importorskip("cvxpy")
    rng = np.random.default_rng(4)
    for _ in range(5):
        hb, hs = _crandn(rng, 2), complex(*rng.standard_normal(2))
        u = rank_one_factor(hs, hb)
        R = np.outer(u, u.conj())
        P = cp.Variable((3, 3), hermitian=True)
        prob = cp.Problem(cp.Maximize(cp.real(cp.trace(R @ P))), [P >> 0, cp.real(cp.diag(P)) == 1])
        prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-9, tol_gap_rel=1e-9, tol_feas=1e-9)
        sdr = prob.value
        assert compute_gamma(0.7, [hs], [hb], 1.0)[0] / 0.7 == pytest.approx(sdr, rel=1e-6)


# --------------------------------------------------------------------------
# Nemirovski pair
# --------------------------------------------------------------------------

def _min_epigraph(x_hat, eps):
    prog = ConicProgram(2, [1.0, 0.0])
    for blk in nemirovski_blocks(Affine.var(2, 0), Affine.var(2, 1), ComplexAffine.constant(2, x_hat), eps):
        prog.add(blk)
    sol = solve(prog)
    assert sol.optimal
    return sol.x


def test_nemirovski_zero_eps():
    a, xi = _min_epigraph(1 + 2j, 0.0)
    assert a == pytest.approx(5.0, abs=1e-6)
    assert xi == pytest.approx(0.0, abs=1e-6)


def test_nemirovski_zero_center():
    a, xi = _min_epigraph(0.0, 1.0)
    assert a == pytest.approx(1.0, abs=1e-6)
    assert xi >= 1.0 - 1e-7


def test_nemirovski_minimum_is_sum():
    rng = np.random.default_rng(5)
    for _ in range(20):
        x_hat, eps = complex(*rng.standard_normal(2)), rng.uniform(0, 2)
        a, _ = _min_epigraph(x_hat, eps)
        assert a == pytest.approx(abs(x_hat) ** 2 + eps ** 2, abs=1e-6)


def test_nemirovski_negative_eps():
    with pytest.raises(ValueError):
        nemirovski_blocks(Affine.var(2, 0), Affine.var(2, 1), ComplexAffine.constant(2, 0.0), -1.0)


# --------------------------------------------------------------------------
# linearised lower bound
# --------------------------------------------------------------------------

def test_lemma2_tight_at_expansion_point():
    rng = np.random.default_rng(6)
    hb, hs, psi = _crandn(rng, 4), complex(*rng.standard_normal(2)), _crandn(rng, 4)
    assert lemma2_bound(hs, hb, psi, psi) == pytest.approx(abs(hs + np.vdot(hb, psi)) ** 2)


def test_lemma2_zero_expansion_point():
    rng = np.random.default_rng(7)
    hb, hs, psi = _crandn(rng, 4), complex(*rng.standard_normal(2)), _crandn(rng, 4)
    want = abs(hs) ** 2 + 2 * (np.conj(hs) * np.vdot(hb, psi)).real
    assert lemma2_bound(hs, hb, psi, np.zeros(4)) == pytest.approx(want)
    assert want <= abs(hs + np.vdot(hb, psi)) ** 2


def test_lemma2_never_exceeds_truth():
    rng = np.random.default_rng(8)
    hb, hs = _crandn(rng, 3), complex(*rng.standard_normal(2))
    for _ in range(10_000):
        psi, loc = _crandn(rng, 3), _crandn(rng, 3)
        assert lemma2_bound(hs, hb, psi, loc) <= abs(hs + np.vdot(hb, psi)) ** 2 + 1e-12


def test_lemma2_affine_matches_numeric():
    rng = np.random.default_rng(9)
    hb, hs = _crandn(rng, 3), complex(*rng.standard_normal(2))
    lift = lift_complex(3)
    loc = _crandn(rng, 3)
    expr = lemma2_affine(lift, hs, hb, loc)
    for _ in range(20):
        psi = _crandn(rng, 3)
        assert expr.value(lift.lift(psi)) == pytest.approx(lemma2_bound(hs, hb, psi, loc))


# --------------------------------------------------------------------------
# S-procedure block
# --------------------------------------------------------------------------

def test_sprocedure_zero_eps_zero_alpha():
    n = 1
    f = Affine.constant(n, 3.0)
    x_hat = ComplexAffine.constant(n, 1.0 + 1.0j)
    blk = sprocedure_block(Affine.constant(n, 0.0), x_hat, f, 1.0, 0.0)
    # [[1, x], [x*, f - gamma]] >= 0  <=>  f - gamma >= |x|^2
    assert psd2_margin(blk, np.zeros(n)) == pytest.approx(0.0, abs=1e-12)
    assert block_violation(blk, np.zeros(n)) <= 1e-12


def test_sprocedure_gamma_zero_feasible_with_alpha_zero():
    rng = np.random.default_rng(10)
    hb, hs = _crandn(rng, 3), complex(*rng.standard_normal(2))
    lift = lift_complex(3, 0, 7)
    loc = np.exp(1j * rng.uniform(0, 2 * np.pi, 3))
    f = lemma2_affine(lift, hs, hb, loc)
    blk = sprocedure_block(Affine.var(7, 6), lift.inner(hb, hs), f, 0.0, 0.0)
    x = np.zeros(7)
    x[:6] = lift.lift(loc)
    # at the expansion point f = |x_hat|^2, so the block sits on the boundary
    assert block_violation(blk, x) <= 1e-10


def test_sprocedure_certifies_all_errors():
    rng = np.random.default_rng(11)
    N = 4
    checked = 0
    for _ in range(10):
        hs = np.array([1.0 + 0j, 1.2 * np.exp(1j * rng.uniform(0, 2 * np.pi))])
        hb = 0.3 * _crandn(rng, 2, N)
        eps = np.array([0.1, 0.15])
        gamma = 0.5 * compute_gamma(1.0, hs[1:], hb[1:], 1.0)
        problem = AttackProblem("P2Robust", hs, hb, 1.0, gamma=gamma, eps=eps)
        loc = np.exp(1j * rng.uniform(0, 2 * np.pi, N))
        sub = build_subproblem(problem, loc, 10.0)
        sol = solve(sub.program, tol=1e-7, gap_tol=1e-6)
        if not sol.optimal:
            continue
        lay = sub.layout
        psi = lay.psi.unlift(sol.x)
        assert sol.x[lay.alpha[0]] >= -1e-9
        for _ in range(1000):
            r, th = eps[1] * np.sqrt(rng.uniform()), rng.uniform(0, 2 * np.pi)
            delta = r * np.exp(1j * th)
            assert lemma2_bound(hs[1] + delta, hb[1], psi, loc) >= gamma[0] - 1e-6 * max(1.0, gamma[0])
        checked += 1
    assert checked >= 8


# --------------------------------------------------------------------------
# subproblem assembly
# --------------------------------------------------------------------------

def test_build_validates_inputs():
    with pytest.raises(ValueError):
        AttackProblem("P2", [1.0, 1.0], np.ones((2, 3)), 1.0)
    with pytest.raises(ValueError):
        AttackProblem("P1Robust", [1.0], np.ones((1, 3)), 1.0)
    with pytest.raises(ValueError):
        AttackProblem("P1", [1.0, 2.0], np.ones((1, 3)), 1.0)
    with pytest.raises(ValueError):
        AttackProblem("P2", [1.0, 1.0], np.ones((2, 3)), 1.0, gamma=[-1.0])
    with pytest.raises(ValueError):
        AttackProblem("P1", [1.0], np.ones((1, 3)), 0.0)
    problem = AttackProblem("P1", [1.0], np.ones((1, 3)), 1.0)
    with pytest.raises(ValueError):
        build_subproblem(problem, np.ones(2), 1.0)
    with pytest.raises(ValueError):
        build_subproblem(problem, np.ones(3), 0.0)
    with pytest.raises(ValueError):
        build_subproblem(problem, np.array([1, np.nan, 1]), 1.0)


def test_single_element_phase_opposition():
    rng = np.random.default_rng(12)
    done = 0
    while done < 10:
        hs, hb = complex(*rng.standard_normal(2)), complex(*rng.standard_normal(2))
        if not 1.5 <= max(abs(hs), abs(hb)) / min(abs(hs), abs(hb)):
            continue  # near-cancelling pairs converge to a shallower null than the analytic one
        # noise power sets the normalised magnitude; 1e-3 matches the simulated link budget
        psi, trace = run_algorithm1(AttackProblem("P1", [hs], [[hb]], 1e-3), CcpConfig(), rng)
        got = abs(hs + np.conj(hb) * psi[0]) ** 2
        want = (abs(hs) - abs(hb)) ** 2
        assert got >= want * (1 - 1e-12)
        assert 10 * np.log10(got / want) <= 0.05
        done += 1


def test_p2_with_zero_gamma_matches_p1():
    """A zero target leaves the subproblem unchanged whenever its slack stays idle."""
    idle = 0
    for seed in range(5):
        eff = instance_from_model(10, seed)
        p1 = AttackProblem("P1", eff.h_s, eff.h_breve, eff.noise_power)
        p2 = AttackProblem("P2", eff.h_s, eff.h_breve, eff.noise_power, gamma=[0.0])
        psi = np.exp(1j * np.random.default_rng(seed).uniform(0, 2 * np.pi, 10))
        for lam in (1.0, 1.5, 2.25):
            s1 = solve(build_subproblem(p1, psi, lam).program, tol=1e-7, gap_tol=1e-6)
            sub2 = build_subproblem(p2, psi, lam)
            s2 = solve(sub2.program, tol=1e-7, gap_tol=1e-6)
            assert s1.optimal and s2.optimal
            assert s2.objective_value >= s1.objective_value - 1e-6 * max(1.0, abs(s1.objective_value))
            if np.linalg.norm(s2.x[sub2.layout.t]) <= 1e-9:
                idle += 1
                assert s2.objective_value == pytest.approx(s1.objective_value, rel=1e-5, abs=1e-6)
            psi = sub2.layout.psi.unlift(s1.x)
    assert idle >= 5


def test_robust_with_zero_eps_tracks_nominal():
    for seed in range(20):
        eff = instance_from_model(6, 100 + seed)
        p1 = AttackProblem("P1", eff.h_s, eff.h_breve, eff.noise_power)
        pr = AttackProblem("P1Robust", eff.h_s, eff.h_breve, eff.noise_power, eps=[0.0, 0.0])
        psi = np.exp(1j * np.random.default_rng(seed).uniform(0, 2 * np.pi, 6))
        # compare one subproblem at a time from the same expansion point
        for lam in (1.0, 1.5, 2.25, 3.375):
            s1 = solve(build_subproblem(p1, psi, lam).program, tol=1e-7, gap_tol=1e-6)
            s2 = solve(build_subproblem(pr, psi, lam).program, tol=1e-7, gap_tol=1e-6)
            assert s1.optimal and s2.optimal
            assert s2.objective_value == pytest.approx(s1.objective_value, rel=1e-5, abs=1e-6)
            psi = build_subproblem(p1, psi, lam).layout.psi.unlift(s1.x)


# --------------------------------------------------------------------------
# outer loop
# --------------------------------------------------------------------------

def test_empty_surface():
    problem = AttackProblem("P1", [2.0], np.zeros((1, 0)), 1.0)
    psi, trace = run_algorithm1(problem, CcpConfig(), np.random.default_rng(0))
    assert psi.shape == (0,)
    assert trace.converged
    assert problem.snr(psi)[0] == 4.0


def test_los_instance_matches_closed_form():
    rng = np.random.default_rng(13)
    for N, hs, rho in [(4, 3.0, 0.5), (8, 2.0, 0.2), (3, 1.0, 0.3)]:
        phases = rng.uniform(0, 2 * np.pi, N)
        inst = LosInstance(hs, 0.4, rho, tuple(phases), noise_power=1e-3)
        problem = AttackProblem("P1", [inst.h_s], [inst.h_breve], inst.noise_power)
        psi, _ = solve_attack(problem, CcpConfig(restarts=3), rng)
        got = 10 * np.log10(problem.snr(psi)[0])
        want = 10 * np.log10(lemma1_best(inst)[1])
        assert abs(got - want) <= 0.1


def test_los_null_instance_not_beaten():
    rng = np.random.default_rng(14)
    inst = LosInstance(1.0, 0.0, 0.4, tuple(rng.uniform(0, 2 * np.pi, 5)))
    problem = AttackProblem("P1", [inst.h_s], [inst.h_breve], 1.0)
    psi, _ = solve_attack(problem, CcpConfig(restarts=2), rng)
    closed = lemma1_best(inst)[1]
    assert closed <= 1e-12
    assert closed <= problem.snr(psi)[0] * 10 ** 0.01


def test_two_element_grid_oracle():
    grid = np.exp(1j * 2 * np.pi * np.arange(256) / 256)
    for seed in range(5):
        eff = instance_from_model(2, 200 + seed)
        hs, hb = eff.h_s[0], eff.h_breve[0]
        problem = AttackProblem("P1", [hs], [hb], eff.noise_power)
        psi, _ = solve_attack(problem, CcpConfig(restarts=5), np.random.default_rng(seed))
        brute = np.min(np.abs(hs + np.conj(hb[0]) * grid[:, None] + np.conj(hb[1]) * grid[None, :]) ** 2)
        got = abs(hs + np.vdot(hb, psi)) ** 2
        assert 10 * np.log10(got) <= 10 * np.log10(brute) + 0.2


@pytest.mark.parametrize("kind", ["P1", "P2", "P1Robust", "P2Robust"])
def test_run_invariants(kind):
    N = 8
    for seed in range(3):
        eff = instance_from_model(N, 300 + seed)
        gamma = compute_gamma(0.9, eff.h_s[1:], eff.h_breve[1:], eff.noise_power) if kind in ("P2", "P2Robust") \
            else None
        eps = 0.05 * np.abs(eff.h_s) if "Robust" in kind else None
        problem = AttackProblem(kind, eff.h_s, eff.h_breve, eff.noise_power, gamma=gamma, eps=eps)
        psi, trace = run_algorithm1(problem, CcpConfig(), np.random.default_rng(seed))
        assert np.max(np.abs(np.abs(psi) - 1)) <= 1e-6
        n = trace.iterations
        assert len(trace.d_norm) == len(trace.t_norm) == len(trace.step) == len(trace.status) == n
        assert trace.descent_violations() == []
        if trace.converged:
            assert trace.final_status == "Optimal"
            assert trace.d_norm[-1] <= 1e-3 and trace.step[-1] <= 1e-3 and trace.t_norm[-1] <= 1e-3
        if kind in ("P1", "P1Robust"):
            assert all(t == 0 for t in trace.t_norm)
        if kind == "P2" and trace.converged:
            # pre-projection iterate satisfies the linearised constraint up to the slack
            raw_snr = np.abs(eff.h_s[1] + np.vdot(eff.h_breve[1], trace.psi_raw)) ** 2 / eff.noise_power
            assert raw_snr >= gamma[0] - trace.t_final[0] - 1e-6 * gamma[0]


def test_p1_dominates_p2_and_no_ris():
    p1s, p2s, none = [], [], []
    for seed in range(8):
        eff = instance_from_model(10, 400 + seed)
        gamma = compute_gamma(0.9, eff.h_s[1:], eff.h_breve[1:], eff.noise_power)
        a, _ = run_algorithm1(AttackProblem("P1", eff.h_s, eff.h_breve, eff.noise_power), rng=np.random.default_rng(seed))
        b, _ = run_algorithm1(AttackProblem("P2", eff.h_s, eff.h_breve, eff.noise_power, gamma=gamma),
                              rng=np.random.default_rng(seed))
        p1s.append(eff.snr(a)[0])
        p2s.append(eff.snr(b)[0])
        none.append(eff.snr(np.zeros(10))[0])
    assert np.median(p1s) <= np.median(p2s) <= np.median(none)


def test_unreachable_target_is_not_converged():
    # the slack d lets the subproblem grow |psi| toward any target, so only the outer loop can fail
    eff = instance_from_model(4, 500)
    gamma = [1e12]
    problem = AttackProblem("P2Robust", eff.h_s, eff.h_breve, eff.noise_power, gamma=gamma, eps=[0.0, 0.0])
    cfg = CcpConfig(max_outer_iters=3)
    psi, trace = run_algorithm1(problem, cfg, np.random.default_rng(0))
    assert not trace.converged
    assert np.all(np.abs(np.abs(psi) - 1) <= 1e-6)


@pytest.mark.parametrize("kind", ["P1Robust", "P2Robust"])
def test_robust_blocks_hold_at_subproblem_optimum(kind):
    """Every Optimal robust subproblem satisfies its determinant conditions and the epigraph bound."""
    seen = 0
    for seed in range(3):
        eff = instance_from_model(10, 350 + seed)
        eps = 0.1 * np.abs(eff.h_s)
        gamma = compute_gamma(0.9, eff.h_s[1:], eff.h_breve[1:], eff.noise_power) if kind == "P2Robust" else None
        problem = AttackProblem(kind, eff.h_s, eff.h_breve, eff.noise_power, gamma=gamma, eps=eps)

        def check(r, sub, sol):
            nonlocal seen
            if not sol.optimal:
                return
            seen += 1
            robust = [b for b in sub.program.blocks if b.cone is Cone.RSOC][problem.num_elements:]
            for blk in robust:
                assert block_violation(blk, sol.x) <= 1e-7
            if kind == "P2Robust":
                assert sprocedure_multiplier(sub, sol.x, 0) >= -1e-9
            lay = sub.layout
            x_hat = lay.psi.inner(eff.h_breve[0] * sub.scale, eff.h_s[0] * sub.scale).value(sol.x)
            a = sol.x[lay.epi]
            e1 = eps[0] * sub.scale
            assert a >= (abs(x_hat) ** 2 + e1 ** 2) * (1 - 1e-7) - 1e-7

        run_algorithm1(problem, CcpConfig(max_outer_iters=30), np.random.default_rng(seed), callback=check)
    assert seen > 10


def test_max_iterations_flagged():
    eff = instance_from_model(10, 600)
    problem = AttackProblem("P1", eff.h_s, eff.h_breve, eff.noise_power)
    psi, trace = run_algorithm1(problem, CcpConfig(max_outer_iters=2), np.random.default_rng(0))
    assert trace.iterations == 2
    assert not trace.converged
    assert trace.final_status == "MaxIter"
    assert psi.shape == (10,)


def test_omega_grows_only_for_p2():
    eff = instance_from_model(5, 700)
    gamma = compute_gamma(0.5, eff.h_s[1:], eff.h_breve[1:], eff.noise_power)
    _, t1 = run_algorithm1(AttackProblem("P2Robust", eff.h_s, eff.h_breve, eff.noise_power, gamma=gamma,
                                         eps=[0.0, 0.0]), CcpConfig(max_outer_iters=4), np.random.default_rng(0))
    _, t2 = run_algorithm1(AttackProblem("P2", eff.h_s, eff.h_breve, eff.noise_power, gamma=gamma),
                           CcpConfig(max_outer_iters=4), np.random.default_rng(0))
    assert set(t1.omega) == {1.0}
    assert t2.omega[:3] == pytest.approx([1.0, 1.5, 2.25])
    assert t1.lam[:3] == pytest.approx([1.0, 1.5, 2.25])


def test_config_validation():
    for kw in ({"mu": 1.0}, {"nu": 0.0}, {"lambda0": 0.0}, {"lambda_max": 0.5}, {"max_outer_iters": 0},
               {"restarts": 0}, {"init_policy": "zeros"}, {"solver_tol": 0.0}):
        with pytest.raises(ValueError):
            CcpConfig(**kw)
    assert CcpConfig().violations() == []


def test_zero_phase_init_is_deterministic():
    eff = instance_from_model(5, 800)
    problem = AttackProblem("P1", eff.h_s, eff.h_breve, eff.noise_power)
    a, _ = run_algorithm1(problem, CcpConfig(init_policy="zero-phase"), np.random.default_rng(1))
    b, _ = run_algorithm1(problem, CcpConfig(init_policy="zero-phase"), np.random.default_rng(2))
    assert np.array_equal(a, b)


# --------------------------------------------------------------------------
# projection and exact worst case
# --------------------------------------------------------------------------

def test_projection_examples():
    assert project_unit_modulus([2, -3j]) == pytest.approx([1, -1j])
    psi = np.exp(1j * np.array([0.3, 2.0]))
    assert project_unit_modulus(psi) == pytest.approx(psi)
    with pytest.raises(ValueError):
        project_unit_modulus([0, 1])


def test_worst_case_examples():
    assert worst_case_snr_exact(3.0, 1.0, 1.0) == pytest.approx((4.0, 16.0))
    assert worst_case_snr_exact(0.5, 1.0, 1.0)[0] == 0.0
    with pytest.raises(ValueError):
        worst_case_snr_exact(1.0, -1.0, 1.0)


@settings(max_examples=30, deadline=None)
@given(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
       st.floats(0.0, 5.0), st.floats(0.1, 10.0))
def test_worst_case_brackets_samples(x_hat, eps, s2):
    lo, hi = worst_case_snr_exact(x_hat, eps, s2)
    rng = np.random.default_rng(0)
    r = eps * np.sqrt(rng.uniform(size=10_000))
    th = rng.uniform(0, 2 * np.pi, 10_000)
    vals = np.abs(x_hat + r * np.exp(1j * th)) ** 2 / s2
    assert vals.min() >= lo - 1e-9 * max(1, hi)
    assert vals.max() <= hi + 1e-9 * max(1, hi)
    # boundary-aligned errors attain both ends
    u = x_hat / abs(x_hat) if x_hat != 0 else 1.0
    assert abs(x_hat + eps * u) ** 2 / s2 == pytest.approx(hi, rel=1e-9, abs=1e-9)
    if abs(x_hat) >= eps:
        assert abs(x_hat - eps * u) ** 2 / s2 == pytest.approx(lo, rel=1e-9, abs=1e-9)


# --------------------------------------------------------------------------
# trace dump
# --------------------------------------------------------------------------

def test_write_trace(tmp_path):
    eff = instance_from_model(4, 900)
    _, trace = run_algorithm1(AttackProblem("P1", eff.h_s, eff.h_breve, eff.noise_power),
                              rng=np.random.default_rng(0))
    path = tmp_path / "trace.csv"
    write_trace(trace, path)
    rows = list(csv.reader(open(path)))
    assert rows[0][:5] == ["iteration", "objective", "d_norm", "t_norm", "step"]
    assert len(rows) == trace.iterations + 1
    assert float(rows[1][1]) == trace.objective[0]


def test_descent_violations_detects_increase():
    tr = CcpTrace(objective=[1.0, 2.0], d_norm=[0, 0], t_norm=[0, 0], step=[0, 0], status=["Optimal"] * 2,
                  lam=[5.0, 5.0], omega=[1.0, 1.0])
    assert tr.descent_violations() == [1]
    tr.lam = [1.0, 1.5]
    assert tr.descent_violations() == []


def test_problem_kind_flags():
    assert ProblemKind("P2Robust").robust and ProblemKind("P2Robust").constrained
    assert not ProblemKind.P1.robust and not ProblemKind.P1.constrained
