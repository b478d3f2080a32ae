"""Penalty convex-concave procedure for destructive RIS beamforming.

Four problem kinds share one iteration loop:

``P1``
    minimise UE 1's received power ``|h_s,1 + h_breve_1^H psi|^2``.
``P2``
    as P1, with linearised minimum-SNR constraints for UEs ``2..K`` and slack
    variables ``t`` penalised by ``omega ||t||``.
``P1Robust``
    epigraph of the worst case over a bounded static-path error, written as two
    2x2 LMIs (Nemirovski form).
``P2Robust``
    P1Robust plus S-procedure LMIs certifying the minimum SNR of UEs ``2..K``
    for every admissible error.

Unit modulus ``|psi_n| = 1`` is split as ``|psi_n|^2 <= 1 + d_n`` (convex) and
a first-order under-estimate of ``|psi_n|^2 >= 1 - d_{N+n}``, with ``lambda ||d||``
added to the objective. Weights grow geometrically until capped.

Subproblems are formed in noise-normalised units: channels are divided by
``sigma`` so that every quadratic term is directly a linear SNR.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .conic import (Affine, ComplexAffine, ComplexLift, ConicBlock, ConicProgram, ConicSolution,
                    Cone, Status, hermitian_psd2x2_block, solve)

__all__ = [
    "ProblemKind",
    "AttackProblem",
    "CcpConfig",
    "CcpTrace",
    "Layout",
    "Subproblem",
    "rank_one_factor",
    "unit_modulus_blocks",
    "max_aligned_snr",
    "compute_gamma",
    "nemirovski_blocks",
    "lemma2_constant",
    "lemma2_affine",
    "lemma2_bound",
    "sprocedure_block",
    "sprocedure_multiplier",
    "restore_epigraph",
    "build_subproblem",
    "run_algorithm1",
    "solve_attack",
    "project_unit_modulus",
    "worst_case_snr_exact",
    "write_trace",
]


class ProblemKind(str, enum.Enum):
    P1 = "P1"
    P2 = "P2"
    P1_ROBUST = "P1Robust"
    P2_ROBUST = "P2Robust"

    @property
    def robust(self) -> bool:
        return self in (ProblemKind.P1_ROBUST, ProblemKind.P2_ROBUST)

    @property
    def constrained(self) -> bool:
        return self in (ProblemKind.P2, ProblemKind.P2_ROBUST)


@dataclass
class AttackProblem:
    """Inputs of one destructive-beamforming problem; UE index 0 is the target.

    For robust kinds ``h_s`` holds the *estimated* static scalars and ``eps``
    the error radii. ``gamma`` lists minimum SNRs (linear) for UEs ``1..K-1``.
    ``exact_worst_case`` swaps the Nemirovski epigraph for the exact one,
    ``a >= (|x_hat| + eps)^2``.
    """

    kind: ProblemKind
    h_s: np.ndarray
    h_breve: np.ndarray
    noise_power: float
    gamma: np.ndarray | None = None
    eps: np.ndarray | None = None
    exact_worst_case: bool = False

    def __post_init__(self):
        self.kind = ProblemKind(self.kind)
        self.h_s = np.atleast_1d(np.asarray(self.h_s, dtype=complex))
        self.h_breve = np.atleast_2d(np.asarray(self.h_breve, dtype=complex))
        K = self.h_s.shape[0]
        if self.h_breve.shape[0] != K:
            raise ValueError(f"h_breve has {self.h_breve.shape[0]} rows for {K} UEs")
        if not self.noise_power > 0:
            raise ValueError("noise power must be positive")
        if self.kind.constrained:
            if self.gamma is None:
                raise ValueError(f"{self.kind.value} needs gamma")
            self.gamma = np.atleast_1d(np.asarray(self.gamma, dtype=float))
            if self.gamma.shape[0] != K - 1 or np.any(self.gamma < 0):
                raise ValueError(f"gamma must hold {K - 1} nonnegative values")
        if self.kind.robust:
            if self.eps is None:
                raise ValueError(f"{self.kind.value} needs eps")
            self.eps = np.atleast_1d(np.asarray(self.eps, dtype=float))
            if self.eps.shape[0] != K or np.any(self.eps < 0):
                raise ValueError(f"eps must hold {K} nonnegative values")

    @property
    def num_elements(self) -> int:
        return self.h_breve.shape[1]

    @property
    def num_ues(self) -> int:
        return self.h_s.shape[0]

    def snr(self, psi) -> np.ndarray:
        """Nominal linear SNRs of all UEs (estimated channel for robust kinds)."""
        vals = self.h_s + self.h_breve.conj() @ np.asarray(psi, dtype=complex)
        return np.abs(vals) ** 2 / self.noise_power

    def worst_snr(self, psi) -> np.ndarray:
        """Worst-case (smallest) linear SNR of every UE over the error disk."""
        vals = np.abs(self.h_s + self.h_breve.conj() @ np.asarray(psi, dtype=complex))
        eps = self.eps if self.kind.robust else np.zeros_like(vals)
        return np.maximum(vals - eps, 0.0) ** 2 / self.noise_power


@dataclass
class CcpConfig:
    lambda0: float = 1.0
    omega0: float = 1.0
    mu: float = 1.5
    lambda_max: float = 1e4
    omega_max: float = 1e4
    nu: float = 1e-3
    max_outer_iters: int = 100
    init_policy: str = "random"
    restarts: int = 1
    solver_tol: float = 1e-7  # primal and dual residuals of each subproblem
    solver_gap_tol: float = 1e-6

    def __post_init__(self):
        problems = self.violations()
        if problems:
            raise ValueError("; ".join(problems))

    def violations(self) -> list[str]:
        out = []
        if not self.mu > 1:
            out.append("mu must be > 1")
        if not self.nu > 0:
            out.append("nu must be > 0")
        if not (self.lambda0 > 0 and self.omega0 > 0):
            out.append("initial weights must be > 0")
        if self.lambda_max < self.lambda0 or self.omega_max < self.omega0:
            out.append("weight caps must be >= initial weights")
        if self.max_outer_iters < 1:
            out.append("max_outer_iters must be >= 1")
        if self.restarts < 1:
            out.append("restarts must be >= 1")
        if not (self.solver_tol > 0 and self.solver_gap_tol > 0):
            out.append("solver tolerances must be > 0")
        if self.init_policy not in ("random", "zero-phase"):
            out.append("init_policy must be 'random' or 'zero-phase'")
        return out


@dataclass
class CcpTrace:
    objective: list[float] = field(default_factory=list)
    d_norm: list[float] = field(default_factory=list)
    t_norm: list[float] = field(default_factory=list)
    step: list[float] = field(default_factory=list)
    status: list[str] = field(default_factory=list)
    lam: list[float] = field(default_factory=list)
    omega: list[float] = field(default_factory=list)
    converged: bool = False
    final_status: str = Status.OPTIMAL.value
    psi_raw: np.ndarray | None = None
    t_final: np.ndarray | None = None
    restart: int = 0

    @property
    def iterations(self) -> int:
        return len(self.objective)

    def descent_violations(self, rtol: float = 1e-6) -> list[int]:
        """Iterations whose optimum rose above the previous one at equal weights."""
        bad = []
        for r in range(1, self.iterations):
            same = self.lam[r] == self.lam[r - 1] and self.omega[r] == self.omega[r - 1]
            if not same or self.status[r] != Status.OPTIMAL.value or self.status[r - 1] != Status.OPTIMAL.value:
                continue
            prev, cur = self.objective[r - 1], self.objective[r]
            if cur > prev + rtol * max(1.0, abs(prev)):
                bad.append(r)
        return bad


# --------------------------------------------------------------------------
# building blocks
# --------------------------------------------------------------------------

def rank_one_factor(h_s: complex, h_breve) -> np.ndarray:
    """Vector ``u`` with ``R = u u^H`` and ``u^H [psi; 1] = h_s + h_breve^H psi``."""
    return np.concatenate([np.asarray(h_breve, dtype=complex).reshape(-1), [np.conj(h_s)]])


def unit_modulus_blocks(lift: ComplexLift, d_index: np.ndarray, psi_local) -> list[ConicBlock]:
    """Penalised unit-modulus constraints linearised at ``psi_local``.

    Emits ``|psi_n|^2 <= 1 + d_n`` (rotated cone), the under-estimator
    ``|psi_n^(r)|^2 - 2 Re(conj(psi_n) psi_n^(r)) <= d_{N+n} - 1`` and ``d >= 0``.
    """
    n_vars = lift.num_vars
    N = lift.n
    psi_local = np.asarray(psi_local, dtype=complex)
    one = Affine.constant(n_vars, 1.0)
    blocks = []
    for n in range(N):
        z = lift.element(n)
        blocks.append(ConicBlock.from_affine(
            [one + Affine.var(n_vars, d_index[n]), one, z.re, z.im], Cone.RSOC))
    # d_{N+n} - 1 - |p|^2 + 2 (pr x + pi y) >= 0
    A = np.zeros((N, n_vars))
    rows = np.arange(N)
    A[rows, d_index[N:]] = 1.0
    A[rows, lift.re] = 2.0 * psi_local.real
    A[rows, lift.im] = 2.0 * psi_local.imag
    blocks.append(ConicBlock(A, -1.0 - np.abs(psi_local) ** 2, Cone.NONNEG))
    D = np.zeros((2 * N, n_vars))
    D[np.arange(2 * N), d_index] = 1.0
    blocks.append(ConicBlock(D, np.zeros(2 * N), Cone.NONNEG))
    return blocks


def max_aligned_snr(h_s: complex, h_breve, noise_power: float) -> float:
    """Largest achievable SNR ``(|h_s| + sum_n |h_breve_n|)^2 / sigma^2``.

    Co-phasing every reflection with the static path attains the bound, so it
    is simultaneously the optimum of the rank-relaxed lifted problem and of the
    original unit-modulus one.
    """
    if noise_power <= 0:
        raise ValueError("noise power must be positive")
    return float((abs(h_s) + np.sum(np.abs(h_breve))) ** 2 / noise_power)


def compute_gamma(c: float, h_s, h_breve, noise_power: float) -> np.ndarray:
    """Minimum SNRs ``c * max_aligned_snr`` for every UE given (rows of ``h_breve``)."""
    if not 0 < c <= 1:
        raise ValueError("c must lie in (0, 1]")
    h_s = np.atleast_1d(h_s)
    h_breve = np.atleast_2d(h_breve)
    return np.array([c * max_aligned_snr(h, hb, noise_power) for h, hb in zip(h_s, h_breve)])


def nemirovski_blocks(a: Affine, xi: Affine, x_hat: ComplexAffine, eps: float) -> list[ConicBlock]:
    """``[[a - xi, x_hat], [x_hat*, 1]] >= 0``, ``[[xi, eps], [eps, 1]] >= 0``, ``xi >= 0``.

    Together these force ``a >= |x_hat|^2 + eps^2``.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    n = a.coef.shape[0]
    one = Affine.constant(n, 1.0)
    return [
        hermitian_psd2x2_block(a - xi, one, x_hat),
        hermitian_psd2x2_block(xi, one, ComplexAffine.constant(n, eps)),
        ConicBlock.from_affine([xi], Cone.NONNEG),
    ]


def lemma2_constant(lift: ComplexLift, psi_local, h_breve) -> Affine:
    """``c = 2 Re(conj(g_r) g) - |g_r|^2`` with ``g = h_breve^H psi`` and ``g_r`` at ``psi_local``."""
    g = lift.inner(h_breve)
    g_r = complex(np.vdot(h_breve, psi_local))
    return 2.0 * (g.re * g_r.real + g.im * g_r.imag) - abs(g_r) ** 2


def lemma2_affine(lift: ComplexLift, h_s: complex, h_breve, psi_local) -> Affine:
    """Affine lower bound ``|h_s|^2 + 2 Re(conj(h_s) h_breve^H psi) + c`` of ``|h_s + h_breve^H psi|^2``."""
    g = lift.inner(h_breve)
    h_s = complex(h_s)
    cross = 2.0 * (g.re * h_s.real + g.im * h_s.imag)
    return cross + abs(h_s) ** 2 + lemma2_constant(lift, psi_local, h_breve)


def lemma2_bound(h_s: complex, h_breve, psi, psi_local) -> float:
    """Numeric value of the affine lower bound at ``psi``."""
    g = complex(np.vdot(h_breve, psi))
    g_r = complex(np.vdot(h_breve, psi_local))
    h_s = complex(h_s)
    return (abs(h_s) ** 2 + 2 * (np.conj(h_s) * g).real
            + 2 * (np.conj(g_r) * g).real - abs(g_r) ** 2)


def sprocedure_block(alpha: Affine, x_hat: ComplexAffine, f: Affine, gamma_sigma2: float,
                     eps: float) -> ConicBlock:
    """``[[1 + alpha, x_hat], [x_hat*, f - gamma sigma^2 - alpha eps^2]] >= 0``.

    With ``alpha >= 0`` this certifies
    ``|D|^2 + 2 Re(conj(x_hat) D) + f >= gamma sigma^2`` for every ``|D| <= eps``.
    """
    return hermitian_psd2x2_block(alpha + 1.0, f - gamma_sigma2 - alpha * (eps ** 2), x_hat)


# --------------------------------------------------------------------------
# subproblem assembly
# --------------------------------------------------------------------------

@dataclass
class Layout:
    num_vars: int
    psi: ComplexLift
    d: np.ndarray
    s_d: int
    epi: int  # power epigraph e (nominal) or robust a
    xi: int | None = None
    u: int | None = None
    t: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    s_t: int | None = None
    # multipliers stored as alpha / max(1, gamma_k); -1 where eps_k = 0
    alpha: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))


class Subproblem(NamedTuple):
    program: ConicProgram
    layout: Layout
    scale: float  # 1 / sigma used for normalisation
    gamma: np.ndarray = np.zeros(0)  # min-SNR targets in force (normalised units)


def _layout(kind: ProblemKind, N: int, K: int, exact: bool, eps=None) -> Layout:
    i = 2 * N
    d = np.arange(i, i + 2 * N)
    i += 2 * N
    s_d, epi = i, i + 1
    i += 2
    xi = u = s_t = None
    t = alpha = np.zeros(0, dtype=int)
    if kind.robust:
        if exact:
            u = i
        else:
            xi = i
        i += 1
    if kind is ProblemKind.P2:
        t = np.arange(i, i + K - 1)
        i += K - 1
        s_t = i
        i += 1
    if kind is ProblemKind.P2_ROBUST:
        alpha = np.full(K - 1, -1, dtype=int)
        for j in range(K - 1):
            if eps[j + 1] > 0:
                alpha[j] = i
                i += 1
    return Layout(i, ComplexLift(N, 0, i), d, s_d, epi, xi, u, t, s_t, alpha)


def restore_epigraph(problem: AttackProblem, sub: Subproblem, sol: ConicSolution) -> float:
    """Lift the robust epigraph variables of ``sol`` onto their feasible set in place.

    Given the returned ``psi``, the smallest feasible ``xi``/``u`` and ``a`` have
    closed forms, so residual-sized slips of the interior-point solution are
    removed without touching ``psi``. Returns the largest absolute shift applied.
    """
    if not (problem.kind.robust and sol.optimal):
        return 0.0
    lay, x = sub.layout, sol.x
    x1 = abs(lay.psi.inner(problem.h_breve[0] * sub.scale, problem.h_s[0] * sub.scale).value(x))
    eps1 = float(problem.eps[0]) * sub.scale
    old = x.copy()
    if problem.exact_worst_case:
        x[lay.u] = max(x[lay.u], x1)
        x[lay.epi] = max(x[lay.epi], (x[lay.u] + eps1) ** 2)
    else:
        x[lay.xi] = max(x[lay.xi], eps1 ** 2)
        x[lay.epi] = max(x[lay.epi], x[lay.xi] + x1 ** 2)
    sol.objective_value = float(sub.program.objective @ x)
    return float(np.max(np.abs(x - old)))


def _row_scale(gamma: float) -> float:
    # min-SNR rows carry constants of order gamma; dividing them out keeps the
    # solver's residual normalisation from loosening the small target rows
    return max(1.0, float(gamma))


def sprocedure_multiplier(sub: Subproblem, x, j: int) -> float:
    """Unscaled S-procedure multiplier of UE ``j + 1`` (NaN when none was needed)."""
    idx = sub.layout.alpha[j]
    if idx < 0:
        return float("nan")
    return float(x[idx]) * _row_scale(sub.gamma[j])


def build_subproblem(problem: AttackProblem, psi_local, lam: float, omega: float = 1.0) -> Subproblem:
    """Convex subproblem of ``problem`` linearised at ``psi_local``.

    The last entry of the augmented vector ``[psi; 1]`` is substituted out, so
    ``h_s`` enters every expression as a constant.
    """
    if lam <= 0 or omega <= 0:
        raise ValueError("penalty weights must be positive")
    kind, N, K = problem.kind, problem.num_elements, problem.num_ues
    psi_local = np.asarray(psi_local, dtype=complex).reshape(-1)
    if psi_local.shape[0] != N:
        raise ValueError(f"psi_local has length {psi_local.shape[0]}, expected {N}")
    if not np.all(np.isfinite(psi_local)):
        raise ValueError("psi_local must be finite")

    scale = 1.0 / math.sqrt(problem.noise_power)
    hs = problem.h_s * scale
    hb = problem.h_breve * scale

    lay = _layout(kind, N, K, problem.exact_worst_case, problem.eps)
    n = lay.num_vars
    c = np.zeros(n)
    c[lay.epi] = 1.0
    c[lay.s_d] = lam
    prog = ConicProgram(n, c)

    for blk in unit_modulus_blocks(lay.psi, lay.d, psi_local):
        prog.add(blk)
    prog.add_soc(Affine.var(n, lay.s_d), [Affine.var(n, j) for j in lay.d])

    x1 = lay.psi.inner(hb[0], hs[0])
    epi = Affine.var(n, lay.epi)
    one = Affine.constant(n, 1.0)
    if not kind.robust:
        prog.add(hermitian_psd2x2_block(epi, one, x1))
    else:
        eps1 = float(problem.eps[0]) * scale
        if problem.exact_worst_case:
            u = Affine.var(n, lay.u)
            prog.add_soc(u, [x1.re, x1.im])
            prog.add_rsoc(epi, one, [u + eps1])
        else:
            for blk in nemirovski_blocks(epi, Affine.var(n, lay.xi), x1, eps1):
                prog.add(blk)

    if kind is ProblemKind.P2:
        prog.objective[lay.s_t] = omega
        for j, k in enumerate(range(1, K)):
            tk = Affine.var(n, lay.t[j])
            # 2 Re(conj(x_r) x) - |x_r|^2 >= gamma - t
            lin = lemma2_affine(lay.psi, hs[k], hb[k], psi_local)
            prog.add_nonneg((lin - float(problem.gamma[j]) + tk) * (1.0 / _row_scale(problem.gamma[j])))
        prog.add_nonneg(*[Affine.var(n, j) for j in lay.t])
        prog.add_soc(Affine.var(n, lay.s_t), [Affine.var(n, j) for j in lay.t])
    elif kind is ProblemKind.P2_ROBUST:
        for j, k in enumerate(range(1, K)):
            f = lemma2_affine(lay.psi, hs[k], hb[k], psi_local)
            g = _row_scale(problem.gamma[j])
            if lay.alpha[j] < 0:
                # a single-point error set needs no multiplier; the block would
                # only reach f >= gamma as alpha -> infinity
                prog.add_nonneg((f - float(problem.gamma[j])) * (1.0 / g))
                continue
            alpha = Affine.var(n, lay.alpha[j], scale=g)
            x_hat = lay.psi.inner(hb[k], hs[k])
            blk = sprocedure_block(alpha, x_hat, f, float(problem.gamma[j]), float(problem.eps[k]) * scale)
            prog.add(ConicBlock(blk.A / g, blk.b / g, blk.cone))
            prog.add_nonneg(Affine.var(n, lay.alpha[j]))
    return Subproblem(prog, lay, scale, problem.gamma if problem.gamma is not None else np.zeros(0))


# --------------------------------------------------------------------------
# outer loop
# --------------------------------------------------------------------------

def project_unit_modulus(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    mag = np.abs(psi)
    if np.any(mag == 0):
        raise ValueError("cannot project a zero entry onto the unit circle")
    return psi / mag


def _initial_pattern(N: int, policy: str, rng: np.random.Generator) -> np.ndarray:
    if policy == "zero-phase":
        return np.ones(N, dtype=complex)
    return np.exp(1j * rng.uniform(0.0, 2 * np.pi, size=N))


def _merit(problem: AttackProblem, psi) -> tuple[float, float]:
    """(constraint violation, objective) of a unit-modulus pattern; lower is better."""
    if problem.kind.robust:
        hat = abs(problem.h_s[0] + np.vdot(problem.h_breve[0], psi))
        obj = (hat + problem.eps[0]) ** 2 / problem.noise_power
    else:
        obj = float(problem.snr(psi)[0])
    viol = 0.0
    if problem.kind.constrained and problem.num_ues > 1:
        have = problem.worst_snr(psi)[1:]
        need = problem.gamma
        viol = float(np.max(np.maximum(need - have, 0.0) / np.maximum(need, 1e-300), initial=0.0))
    return viol, obj


def run_algorithm1(problem: AttackProblem, config: CcpConfig | None = None,
                   rng: np.random.Generator | None = None, psi0=None,
                   callback: Callable[[int, Subproblem, ConicSolution], None] | None = None
                   ) -> tuple[np.ndarray, CcpTrace]:
    """Iterate convexified subproblems until slacks and steps fall below ``nu``.

    Returns the unit-modulus pattern and the per-iteration trace. A subproblem
    that does not solve to optimality ends the run with its status recorded;
    running out of iterations returns the best projected iterate seen, flagged
    unconverged.
    """
    config = config or CcpConfig()
    rng = rng if rng is not None else np.random.default_rng()
    N = problem.num_elements
    trace = CcpTrace()
    if N == 0:
        trace.converged = True
        trace.psi_raw = np.zeros(0, dtype=complex)
        return np.zeros(0, dtype=complex), trace

    psi = (np.asarray(psi0, dtype=complex).copy() if psi0 is not None
           else _initial_pattern(N, config.init_policy, rng))
    lam, omega = config.lambda0, config.omega0
    best = None  # (merit, psi_projected)

    for r in range(config.max_outer_iters):
        sub = build_subproblem(problem, psi, lam, omega)
        sol = solve(sub.program, tol=config.solver_tol, gap_tol=config.solver_gap_tol)
        restore_epigraph(problem, sub, sol)
        if callback is not None:
            callback(r, sub, sol)
        trace.lam.append(lam)
        trace.omega.append(omega)
        trace.status.append(sol.status.value)
        if not sol.optimal:
            trace.objective.append(float("nan"))
            trace.d_norm.append(float("nan"))
            trace.t_norm.append(float("nan"))
            trace.step.append(float("nan"))
            trace.final_status = sol.status.value
            break

        lay = sub.layout
        new = lay.psi.unlift(sol.x)
        d_norm = float(np.linalg.norm(sol.x[lay.d]))
        t = sol.x[lay.t] if lay.t.size else np.zeros(0)
        t_norm = float(np.linalg.norm(t))
        step = float(np.linalg.norm(new - psi))
        trace.objective.append(sol.objective_value)
        trace.d_norm.append(d_norm)
        trace.t_norm.append(t_norm)
        trace.step.append(step)
        psi = new
        trace.psi_raw = psi.copy()
        trace.t_final = t.copy()

        if np.all(np.abs(psi) > 0):
            proj = project_unit_modulus(psi)
            m = _merit(problem, proj)
            if best is None or m < best[0]:
                best = (m, proj)

        lam = min(config.mu * lam, config.lambda_max)
        if problem.kind is ProblemKind.P2:
            omega = min(config.mu * omega, config.omega_max)

        if d_norm <= config.nu and step <= config.nu and t_norm <= config.nu:
            trace.converged = True
            return project_unit_modulus(psi), trace
    else:
        trace.final_status = Status.MAX_ITER.value

    if best is None:
        return project_unit_modulus(psi if psi0 is None else np.asarray(psi0, dtype=complex)), trace
    return best[1], trace


def solve_attack(problem: AttackProblem, config: CcpConfig | None = None,
                 rng: np.random.Generator | None = None) -> tuple[np.ndarray, CcpTrace]:
    """Best of ``config.restarts`` independent random starts of :func:`run_algorithm1`."""
    config = config or CcpConfig()
    rng = rng if rng is not None else np.random.default_rng()
    best = None
    for i in range(config.restarts):
        psi, trace = run_algorithm1(problem, config, rng)
        trace.restart = i
        key = (not trace.converged, *_merit(problem, psi)) if psi.size else (False, 0.0, 0.0)
        if best is None or key < best[0]:
            best = (key, psi, trace)
    return best[1], best[2]


def worst_case_snr_exact(x_hat: complex, eps: float, noise_power: float) -> tuple[float, float]:
    """Extreme SNRs of ``|x_hat + D|^2 / sigma^2`` over ``|D| <= eps``."""
    if eps < 0 or noise_power <= 0:
        raise ValueError("need eps >= 0 and noise_power > 0")
    m = abs(x_hat)
    return max(m - eps, 0.0) ** 2 / noise_power, (m + eps) ** 2 / noise_power


TRACE_COLUMNS = ("iteration", "objective", "d_norm", "t_norm", "step", "lambda", "omega", "status")


def write_trace(trace: CcpTrace, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        for r in range(trace.iterations):
            w.writerow([r + 1, repr(trace.objective[r]), repr(trace.d_norm[r]), repr(trace.t_norm[r]),
                        repr(trace.step[r]), repr(trace.lam[r]), repr(trace.omega[r]), trace.status[r]])
