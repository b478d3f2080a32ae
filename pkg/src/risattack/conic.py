"""Real-valued conic programs and their solution.

A program is ``minimize c^T x`` subject to a list of blocks ``A_i x + b_i in K_i``
where each ``K_i`` is the zero cone, the nonnegative orthant, the second-order
cone ``{(t, w) : t >= ||w||}`` or the rotated second-order cone
``{(u, v, w) : u, v >= 0, u v >= ||w||^2}``.

Rotated cones are mapped onto ordinary second-order cones through the linear
change of coordinates ``(u + v, u - v, 2 w)`` and the whole program is handed to
the Clarabel interior-point solver. Residuals are recomputed here from the
returned primal/dual point so the status reported by :func:`solve` does not
depend on the backend's own bookkeeping.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path

import clarabel
import numpy as np
import scipy.sparse as sp

__all__ = [
    "Cone",
    "Status",
    "Affine",
    "ComplexAffine",
    "ConicBlock",
    "ConicProgram",
    "ConicSolution",
    "ComplexLift",
    "lift_complex",
    "hermitian_psd2x2_block",
    "solve",
    "kkt_residuals",
    "dump_program",
]

DEFAULT_TOL = 1e-8
_BACKEND_MARGIN = 0.1


class Cone(enum.Enum):
    ZERO = "Zero"
    NONNEG = "Nonneg"
    SOC = "SOC"
    RSOC = "RotatedSOC"


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    MAX_ITER = "MaxIter"
    NUMERICAL_FAILURE = "NumericalFailure"


_MIN_DIM = {Cone.ZERO: 1, Cone.NONNEG: 1, Cone.SOC: 2, Cone.RSOC: 3}


@dataclass(frozen=True)
class Affine:
    """Real affine expression ``coef @ x + const`` over a fixed variable count."""

    coef: np.ndarray
    const: float = 0.0

    @classmethod
    def zero(cls, n: int) -> Affine:
        return cls(np.zeros(n), 0.0)

    @classmethod
    def constant(cls, n: int, value: float) -> Affine:
        return cls(np.zeros(n), float(value))

    @classmethod
    def var(cls, n: int, index: int, scale: float = 1.0) -> Affine:
        coef = np.zeros(n)
        coef[index] = scale
        return cls(coef, 0.0)

    def __add__(self, other):
        if isinstance(other, Affine):
            return Affine(self.coef + other.coef, self.const + other.const)
        return Affine(self.coef, self.const + float(other))

    __radd__ = __add__

    def __neg__(self):
        return Affine(-self.coef, -self.const)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, scalar):
        scalar = float(scalar)
        return Affine(self.coef * scalar, self.const * scalar)

    __rmul__ = __mul__

    def value(self, x: np.ndarray) -> float:
        return float(self.coef @ x + self.const)


@dataclass(frozen=True)
class ComplexAffine:
    """Complex affine expression stored as its real and imaginary parts."""

    re: Affine
    im: Affine

    @classmethod
    def constant(cls, n: int, value: complex) -> ComplexAffine:
        value = complex(value)
        return cls(Affine.constant(n, value.real), Affine.constant(n, value.imag))

    def __add__(self, other):
        if isinstance(other, ComplexAffine):
            return ComplexAffine(self.re + other.re, self.im + other.im)
        other = complex(other)
        return ComplexAffine(self.re + other.real, self.im + other.imag)

    __radd__ = __add__

    def conj(self) -> ComplexAffine:
        return ComplexAffine(self.re, -self.im)

    def scale(self, w: complex) -> ComplexAffine:
        """Multiply by a complex constant."""
        w = complex(w)
        return ComplexAffine(self.re * w.real - self.im * w.imag,
                             self.re * w.imag + self.im * w.real)

    def value(self, x: np.ndarray) -> complex:
        return complex(self.re.value(x), self.im.value(x))


@dataclass
class ConicBlock:
    """One constraint block ``A x + b in cone``."""

    A: np.ndarray
    b: np.ndarray
    cone: Cone

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.b = np.asarray(self.b, dtype=float).reshape(-1)
        if self.A.shape[0] != self.b.shape[0]:
            raise ValueError(f"block rows mismatch: A has {self.A.shape[0]}, b has {self.b.shape[0]}")
        if self.b.shape[0] < _MIN_DIM[self.cone]:
            raise ValueError(f"{self.cone.value} block needs dimension >= {_MIN_DIM[self.cone]}, "
                             f"got {self.b.shape[0]}")

    @classmethod
    def from_affine(cls, rows: list[Affine], cone: Cone) -> ConicBlock:
        return cls(np.vstack([r.coef for r in rows]), np.array([r.const for r in rows]), cone)

    @property
    def dim(self) -> int:
        return self.b.shape[0]


@dataclass
class ConicProgram:
    num_vars: int
    objective: np.ndarray
    blocks: list[ConicBlock] = field(default_factory=list)

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float).reshape(-1)
        if self.objective.shape[0] != self.num_vars:
            raise ValueError("objective length differs from num_vars")
        for blk in self.blocks:
            self._check(blk)

    def _check(self, blk: ConicBlock):
        if blk.A.shape[1] != self.num_vars:
            raise ValueError(f"block has {blk.A.shape[1]} columns, program has {self.num_vars} variables")

    def add(self, block: ConicBlock) -> None:
        self._check(block)
        self.blocks.append(block)

    def add_affine(self, rows: list[Affine], cone: Cone) -> None:
        self.add(ConicBlock.from_affine(rows, cone))

    def add_nonneg(self, *exprs: Affine) -> None:
        self.add_affine(list(exprs), Cone.NONNEG)

    def add_soc(self, t: Affine, w: list[Affine]) -> None:
        self.add_affine([t, *w], Cone.SOC)

    def add_rsoc(self, u: Affine, v: Affine, w: list[Affine]) -> None:
        self.add_affine([u, v, *w], Cone.RSOC)


@dataclass
class ConicSolution:
    status: Status
    x: np.ndarray
    objective_value: float
    dual_objective: float
    primal_residual: float
    dual_residual: float
    gap: float
    iterations: int = 0
    s: np.ndarray | None = None
    z: np.ndarray | None = None

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


class ComplexLift:
    """Interleaved ``(Re, Im)`` placement of ``n`` complex variables.

    Complex variable ``i`` occupies real slots ``offset + 2 i`` (real part) and
    ``offset + 2 i + 1`` (imaginary part) of a vector of length ``num_vars``.
    """

    def __init__(self, n: int, offset: int = 0, num_vars: int | None = None):
        if n < 0:
            raise ValueError("n must be nonnegative")
        self.n = n
        self.offset = offset
        self.num_vars = offset + 2 * n if num_vars is None else num_vars
        self.re = offset + 2 * np.arange(n)
        self.im = self.re + 1

    def lift(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex).reshape(-1)
        out = np.empty(2 * self.n)
        out[0::2] = z.real
        out[1::2] = z.imag
        return out

    def unlift(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return x[self.re] + 1j * x[self.im]

    def element(self, i: int) -> ComplexAffine:
        return ComplexAffine(Affine.var(self.num_vars, self.re[i]), Affine.var(self.num_vars, self.im[i]))

    def inner(self, w, beta: complex = 0.0) -> ComplexAffine:
        """Real form of the complex affine scalar ``w^H z + beta``."""
        w = np.asarray(w, dtype=complex).reshape(-1)
        if w.shape[0] != self.n:
            raise ValueError(f"weight length {w.shape[0]} != {self.n}")
        re = np.zeros(self.num_vars)
        im = np.zeros(self.num_vars)
        # conj(w) z = (wr x + wi y) + 1j (wr y - wi x)
        re[self.re] = w.real
        re[self.im] = w.imag
        im[self.re] = -w.imag
        im[self.im] = w.real
        beta = complex(beta)
        return ComplexAffine(Affine(re, beta.real), Affine(im, beta.imag))


def lift_complex(n: int, offset: int = 0, num_vars: int | None = None) -> ComplexLift:
    return ComplexLift(n, offset, num_vars)


def hermitian_psd2x2_block(a: Affine, d: Affine, b: ComplexAffine) -> ConicBlock:
    """Exact cone form of ``[[a, b], [conj(b), d]] >= 0``.

    A 2x2 Hermitian matrix is PSD iff ``a >= 0``, ``d >= 0`` and ``a d >= |b|^2``,
    which is membership of ``(a, d, Re b, Im b)`` in the rotated cone.
    """
    return ConicBlock.from_affine([a, d, b.re, b.im], Cone.RSOC)


def _to_standard(program: ConicProgram):
    """Stack blocks as ``A_std x + s = b_std`` with ``s`` in a product of cones."""
    rows_A, rows_b, cones = [], [], []
    for blk in program.blocks:
        A, b = blk.A, blk.b
        if blk.cone is Cone.RSOC:
            T = _rsoc_map(blk.dim)
            A, b = T @ A, T @ b
        rows_A.append(-A)
        rows_b.append(b)
        cones.append((blk.cone, blk.dim))
    if rows_A:
        A_std = np.vstack(rows_A)
        b_std = np.concatenate(rows_b)
    else:
        A_std = np.zeros((0, program.num_vars))
        b_std = np.zeros(0)
    return A_std, b_std, cones


def _rsoc_map(dim: int) -> np.ndarray:
    T = np.zeros((dim, dim))
    T[0, 0] = T[0, 1] = 1.0
    T[1, 0], T[1, 1] = 1.0, -1.0
    T[2:, 2:] = 2.0 * np.eye(dim - 2)
    return T


def _clarabel_cones(cones):
    out = []
    for cone, dim in cones:
        if cone is Cone.ZERO:
            out.append(clarabel.ZeroConeT(dim))
        elif cone is Cone.NONNEG:
            out.append(clarabel.NonnegativeConeT(dim))
        else:
            out.append(clarabel.SecondOrderConeT(dim))
    return out


def _cone_violation(v: np.ndarray, cones) -> float:
    """Largest distance-like violation of ``v`` against the (self-dual) cone product."""
    worst, i = 0.0, 0
    for cone, dim in cones:
        seg = v[i:i + dim]
        i += dim
        if cone is Cone.ZERO:
            continue  # dual of the zero cone is free; primal side handled by the caller
        if cone is Cone.NONNEG:
            worst = max(worst, float(np.max(-seg, initial=0.0)))
        else:
            worst = max(worst, float(np.linalg.norm(seg[1:]) - seg[0]))
    return worst


def kkt_residuals(program: ConicProgram, x, s, z) -> tuple[float, float, float]:
    """Relative primal residual, dual residual and duality gap of ``(x, s, z)``.

    Normalisations follow the usual interior-point convention::

        primal = ||A x + s - b||_inf / max(1, ||b|| + ||x|| + ||s||)
        dual   = ||A^T z + c||_inf   / max(1, ||c|| + ||z||)
        gap    = |c^T x + b^T z|     / max(1, min(|c^T x|, |b^T z|))

    all in the standard (rotated-cones-mapped) coordinates.
    """
    A, b, cones = _to_standard(program)
    c = program.objective
    x, s, z = (np.asarray(v, dtype=float) for v in (x, s, z))
    inf = lambda v: float(np.max(np.abs(v), initial=0.0))  # noqa: E731
    r_p = inf(A @ x + s - b) / max(1.0, inf(b) + inf(x) + inf(s))
    r_p = max(r_p, _cone_violation(s, cones))
    zero_rows = _zero_rows(cones)
    if zero_rows.size:
        r_p = max(r_p, inf(s[zero_rows]))
    r_d = inf(A.T @ z + c) / max(1.0, inf(c) + inf(z))
    r_d = max(r_d, _cone_violation(z, cones))
    pobj, dobj = float(c @ x), float(-b @ z)
    gap = abs(pobj - dobj) / max(1.0, min(abs(pobj), abs(dobj)))
    return r_p, r_d, gap


def _zero_rows(cones) -> np.ndarray:
    idx, i = [], 0
    for cone, dim in cones:
        if cone is Cone.ZERO:
            idx.extend(range(i, i + dim))
        i += dim
    return np.array(idx, dtype=int)


_STATUS_MAP = {
    "PrimalInfeasible": Status.INFEASIBLE,
    "AlmostPrimalInfeasible": Status.INFEASIBLE,
    "DualInfeasible": Status.UNBOUNDED,
    "AlmostDualInfeasible": Status.UNBOUNDED,
    "MaxIterations": Status.MAX_ITER,
    "MaxTime": Status.MAX_ITER,
}


# Retried in order when a solve is not certified; the degenerate tangencies of
# penalised unit-modulus constraints often stall the default step rule.
_RETRY_SETTINGS = (
    {},
    {"max_step_fraction": 0.9, "static_regularization_constant": 1e-10},
    {"max_step_fraction": 0.7, "static_regularization_constant": 1e-11},
    {"max_step_fraction": 0.8, "static_regularization_constant": 1e-10, "equilibrate_enable": False},
)


def _run_backend(program, A, b, cones, tol, max_iter, overrides):
    n = program.num_vars
    settings = clarabel.DefaultSettings()
    settings.verbose = False
    settings.max_iter = max_iter
    # backend targets a tighter tolerance; its residual scaling differs from ours
    settings.tol_gap_abs = tol * _BACKEND_MARGIN
    settings.tol_gap_rel = tol * _BACKEND_MARGIN
    settings.tol_feas = tol * _BACKEND_MARGIN
    settings.tol_ktratio = 1e-7
    settings.presolve_enable = False
    for key, value in overrides.items():
        setattr(settings, key, value)
    solver = clarabel.DefaultSolver(sp.csc_matrix((n, n)), program.objective, sp.csc_matrix(A), b,
                                    _clarabel_cones(cones), settings)
    return solver.solve()


def solve(program: ConicProgram, tol: float = DEFAULT_TOL, max_iter: int = 200,
          gap_tol: float | None = None) -> ConicSolution:
    """Solve ``program`` and certify the result.

    ``Optimal`` is returned only when the recomputed primal and dual residuals
    are at most ``tol`` and the relative gap is at most ``gap_tol`` (defaults
    to ``tol``). ``Infeasible`` carries a
    Farkas certificate in ``z`` (``A^T z = 0``, ``b^T z < 0``); its normalised
    residual is stored in ``dual_residual``.
    """
    gap_tol = tol if gap_tol is None else gap_tol
    A, b, cones = _to_standard(program)
    nan = float("nan")
    fallback = None
    for overrides in _RETRY_SETTINGS:
        raw = _run_backend(program, A, b, cones, tol, max_iter, overrides)
        x, s, z = np.array(raw.x), np.array(raw.s), np.array(raw.z)
        name = str(raw.status)
        if name in ("Solved", "AlmostSolved", "InsufficientProgress"):
            r_p, r_d, gap = kkt_residuals(program, x, s, z)
            sol = ConicSolution(Status.NUMERICAL_FAILURE, x, float(program.objective @ x), float(-b @ z),
                                r_p, r_d, gap, raw.iterations, s, z)
            if max(r_p, r_d) <= tol and gap <= gap_tol:
                sol.status = Status.OPTIMAL
                return sol
            if fallback is None or max(r_p, r_d, gap) < max(fallback.primal_residual, fallback.dual_residual,
                                                            fallback.gap):
                fallback = sol
            continue

        status = _STATUS_MAP.get(name, Status.NUMERICAL_FAILURE)
        if status is Status.INFEASIBLE:
            bz = float(b @ z)
            cert = float(np.max(np.abs(A.T @ z), initial=0.0)) / max(abs(bz), 1e-300)
            if cert <= tol:
                return ConicSolution(status, x, nan, nan, nan, cert, nan, raw.iterations, s, z)
        elif status is not Status.NUMERICAL_FAILURE:
            return ConicSolution(status, x, nan, nan, nan, nan, nan, raw.iterations, s, z)
        if fallback is None:
            fallback = ConicSolution(status, x, nan, nan, nan, nan, nan, raw.iterations, s, z)
    return fallback


def dump_program(program: ConicProgram, path) -> None:
    """Write ``program`` as plain text for cross-checking with other solvers.

    Layout: a header line ``vars <n>``, the objective as ``c <values>``, then one
    ``block <cone> <dim>`` line per block followed by ``dim`` lines of
    ``<b_i> | <A_i row>``. The constraint is ``A x + b in cone``.
    """
    path = Path(path)
    fmt = lambda arr: " ".join(repr(float(v)) for v in arr)  # noqa: E731
    lines = [f"vars {program.num_vars}", "c " + fmt(program.objective)]
    for blk in program.blocks:
        lines.append(f"block {blk.cone.value} {blk.dim}")
        for row, bi in zip(blk.A, blk.b):
            lines.append(f"{float(bi)!r} | {fmt(row)}")
    path.write_text("\n".join(lines) + "\n")
