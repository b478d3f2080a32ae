"""Fast oracle and invariant checks runnable without a test framework."""

from __future__ import annotations

import itertools

import numpy as np

from .ccp import (AttackProblem, CcpConfig, compute_gamma, lemma2_bound, nemirovski_blocks, rank_one_factor,
                  solve_attack)
from .closed_form import LosInstance, cascaded_magnitude, dirichlet_ratio, lemma1_best, lemma1_pattern
from .conic import Affine, ComplexAffine, ConicProgram, solve


def _check_conic():
    # min a s.t. [[a - xi, 3], [3, 1]] >= 0, [[xi, 1], [1, 1]] >= 0  ->  a = 9 + 1
    prog = ConicProgram(2, np.array([1.0, 0.0]))
    a, xi = Affine.var(2, 0), Affine.var(2, 1)
    for blk in nemirovski_blocks(a, xi, ComplexAffine.constant(2, 3.0), 1.0):
        prog.add(blk)
    sol = solve(prog)
    return sol.optimal and abs(sol.x[0] - 10.0) < 1e-6, f"a = {sol.x[0]:.9f}"


def _check_rank_one():
    rng = np.random.default_rng(1)
    hb = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    hs = complex(rng.standard_normal(), rng.standard_normal())
    u = rank_one_factor(hs, hb)
    psi = np.exp(1j * rng.uniform(0, 2 * np.pi, 4))
    quad = np.vdot(np.r_[psi, 1], np.outer(u, u.conj()) @ np.r_[psi, 1]).real
    err = abs(quad - abs(hs + np.vdot(hb, psi)) ** 2)
    return err < 1e-12, f"error {err:.2e}"


def _check_lemma1():
    rng = np.random.default_rng(2)
    inst = LosInstance(0.7, 1.1, 0.3, tuple(rng.uniform(0, 2 * np.pi, 6)))
    worst = 0.0
    for xi in np.linspace(-np.pi, np.pi, 101):
        want = abs(inst.h_s_mag - inst.rho_r * dirichlet_ratio(6, xi))
        worst = max(worst, abs(cascaded_magnitude(inst, lemma1_pattern(inst, xi)) - want))
    xi, snr = lemma1_best(LosInstance(5.0, 0.0, 1.0, (0.0, 0.0)))
    return worst < 1e-9 and xi == 0.0 and abs(snr - 9.0) < 1e-12, f"identity error {worst:.2e}, snr {snr}"


def _check_gamma():
    g = compute_gamma(0.9, [1.0], [[1.0, 1.0]], 1.0)
    return abs(g[0] - 8.1) < 1e-12, f"gamma {g[0]}"


def _check_lemma2():
    rng = np.random.default_rng(3)
    worst = -np.inf
    for _ in range(200):
        hb = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        hs = complex(rng.standard_normal(), rng.standard_normal())
        psi, loc = (rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3)))
        worst = max(worst, lemma2_bound(hs, hb, psi, loc) - abs(hs + np.vdot(hb, psi)) ** 2)
    return worst <= 1e-12, f"max(bound - truth) {worst:.2e}"


def _check_p1_grid():
    rng = np.random.default_rng(4)
    hb = 0.3 * (rng.standard_normal(2) + 1j * rng.standard_normal(2))  # no exact null
    hs = 1.0 + 0j
    problem = AttackProblem("P1", [hs], [hb], 1.0)
    psi, _ = solve_attack(problem, CcpConfig(restarts=3), np.random.default_rng(5))
    got = abs(hs + np.vdot(hb, psi)) ** 2
    grid = np.exp(1j * np.linspace(0, 2 * np.pi, 128, endpoint=False))
    best = min(abs(hs + np.conj(hb[0]) * a + np.conj(hb[1]) * b) ** 2 for a, b in itertools.product(grid, grid))
    ok = 10 * np.log10(max(got, 1e-12)) <= 10 * np.log10(max(best, 1e-12)) + 0.2
    return ok, f"ccp {got:.3e} grid {best:.3e}"


def _check_p1_single():
    hs, hb = 2.0 * np.exp(0.3j), 0.5 * np.exp(-1.2j)
    psi, _ = solve_attack(AttackProblem("P1", [hs], [[hb]], 1.0), CcpConfig(), np.random.default_rng(6))
    got = abs(hs + np.conj(hb) * psi[0])
    return abs(got - 1.5) < 1e-3, f"|h| = {got:.6f} (want 1.5)"


CHECKS = [
    ("conic solver on Nemirovski pair", _check_conic),
    ("rank-one factor identity", _check_rank_one),
    ("closed-form Dirichlet identity", _check_lemma1),
    ("gamma calibration", _check_gamma),
    ("linearised lower bound", _check_lemma2),
    ("single-element phase opposition", _check_p1_single),
    ("two-element grid oracle", _check_p1_grid),
]


def run_selftest(verbose: bool = True) -> bool:
    all_ok = True
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # report and keep going
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        all_ok &= bool(ok)
        if verbose:
            print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return all_ok
