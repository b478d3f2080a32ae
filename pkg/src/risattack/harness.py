"""Monte-Carlo sweeps over surface size, CSI error level, SNR fraction and method.

A sweep is described by an :class:`ExperimentConfig`, normally loaded from a
YAML file. Every (method, N, eta, c, trial) cell draws its randomness from
``numpy.random.SeedSequence`` children keyed by the cell coordinates, so the
output does not depend on execution order or on the number of workers.

Seed keys (``SeedSequence(master_seed, spawn_key=key)``):

* channels: ``(0, trial)``; shared by every N and method, and the static
  paths are drawn first, so the no-RIS SNR of a trial is the same for all N
* CSI error: ``(1, trial, eta_index)``
* random precoders: ``(2, trial)``
* method: ``(3, method_id, N, eta_index, c_index, trial)``, each coordinate
  after the leading 3 offset by one so that ``-1`` (dimension ignored by the
  method) stays nonnegative
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .baselines import mrt_pattern, no_ris_snr, random_pattern
from .ccp import AttackProblem, CcpConfig, compute_gamma, solve_attack, worst_case_snr_exact
from .channel import (FadingConfig, SystemGeometry, effective_channel, generate_realization, linear_to_db,
                      matched_precoders, random_precoders, split_estimate)
from .closed_form import LosInstance, lemma1_best, lemma1_pattern

__all__ = [
    "METHODS",
    "WORKERS_ENV",
    "ConfigError",
    "PrecoderConfig",
    "OutputConfig",
    "ExperimentConfig",
    "TrialRecord",
    "RESULT_COLUMNS",
    "load_config",
    "parse_config",
    "dump_config",
    "run_sweep",
    "write_results",
    "summarize",
]

METHODS = ("P1", "P2", "P1Robust", "P2Robust", "Random", "MRT", "NoRIS", "Lemma1")
_METHOD_ID = {m: i for i, m in enumerate(METHODS)}
_USES_ETA = {"P1Robust", "P2Robust"}
_USES_C = {"P2", "P2Robust"}
_CCP_METHODS = {"P1", "P2", "P1Robust", "P2Robust"}
WORKERS_ENV = "RISATTACK_WORKERS"


class ConfigError(ValueError):
    """Invalid experiment configuration; ``problems`` lists every violation."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.problems))


@dataclass(frozen=True)
class PrecoderConfig:
    """``kind`` is ``matched`` (conjugate of the static path) or ``random``.

    ``tx_power_db`` is the squared precoder norm in dB.
    """

    kind: str = "matched"
    tx_power_db: float = 15.0

    def violations(self) -> list[str]:
        out = []
        if self.kind not in ("matched", "random"):
            out.append("kind must be 'matched' or 'random'")
        if not math.isfinite(self.tx_power_db):
            out.append("tx_power_db must be finite")
        return out

    @property
    def power(self) -> float:
        return 10.0 ** (self.tx_power_db / 10.0)


@dataclass(frozen=True)
class OutputConfig:
    results_csv: str = "results.csv"
    summary_json: str = "summary.json"
    timings_csv: str = "timings.csv"

    def violations(self) -> list[str]:
        return [f"{f.name} must be a non-empty file name" for f in dataclasses.fields(self)
                if not getattr(self, f.name)]


@dataclass
class ExperimentConfig:
    trials: int = 1
    N_values: list[int] = field(default_factory=lambda: [2, 5, 10, 20, 30])
    eta_values: list[float] = field(default_factory=lambda: [0.0])
    c_values: list[float] = field(default_factory=lambda: [0.9])
    methods: list[str] = field(default_factory=lambda: ["NoRIS", "Random", "MRT", "P1", "P2"])
    master_seed: int = 0
    workers: int = 1
    exact_worst_case: bool = False
    geometry: SystemGeometry = field(default_factory=SystemGeometry)
    fading: FadingConfig = field(default_factory=FadingConfig)
    precoder: PrecoderConfig = field(default_factory=PrecoderConfig)
    ccp: CcpConfig = field(default_factory=CcpConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def violations(self) -> list[str]:
        out = []
        if self.trials < 1:
            out.append("trials must be >= 1")
        for name in ("N_values", "eta_values", "c_values", "methods"):
            if not getattr(self, name):
                out.append(f"{name} must be non-empty")
        if any(n < 0 for n in self.N_values):
            out.append("N_values must be >= 0")
        if any(not 0.0 <= e <= 1.0 for e in self.eta_values):
            out.append("eta_values must lie in [0, 1]")
        if any(not 0.0 < c <= 1.0 for c in self.c_values):
            out.append("c_values must lie in (0, 1]")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            out.append(f"unknown methods {bad}; choose from {list(METHODS)}")
        for name in ("N_values", "eta_values", "c_values", "methods"):
            vals = getattr(self, name)
            if len(set(vals)) != len(vals):
                out.append(f"{name} has duplicates")
        if not 0 <= self.master_seed < 2 ** 64:
            out.append("master_seed must be a 64-bit unsigned integer")
        if self.workers < 1:
            out.append("workers must be >= 1")
        return out


# --------------------------------------------------------------------------
# loading and dumping
# --------------------------------------------------------------------------

_SECTIONS = {"geometry": SystemGeometry, "fading": FadingConfig, "precoder": PrecoderConfig,
             "ccp": CcpConfig, "output": OutputConfig}
_EXCLUDED = {"geometry": {"num_ris_elements"}}  # driven by N_values


def _coerce(value, default, where: str, problems: list[str]):
    """Convert a YAML value to the type of ``default``; append a message on mismatch."""
    if isinstance(default, bool):
        if isinstance(value, bool):
            return value
        problems.append(f"{where}: expected true/false, got {value!r}")
    elif isinstance(default, int):
        if isinstance(value, int) and not isinstance(value, bool):
            return value
        problems.append(f"{where}: expected an integer, got {value!r}")
    elif isinstance(default, float):
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
        if isinstance(value, str) and value.strip().lower() in ("inf", ".inf", "infinity"):
            return math.inf
        problems.append(f"{where}: expected a number, got {value!r}")
    elif isinstance(default, str):
        if isinstance(value, str):
            return value
        problems.append(f"{where}: expected a string, got {value!r}")
    elif isinstance(default, tuple):
        if isinstance(value, (list, tuple)):
            return tuple(tuple(float(x) for x in v) if isinstance(v, (list, tuple)) else float(v)
                         for v in value)
        problems.append(f"{where}: expected a list, got {value!r}")
    return None


def _coerce_list(value, item_default, where: str, problems: list[str]):
    if not isinstance(value, list):
        problems.append(f"{where}: expected a list, got {value!r}")
        return None
    before = len(problems)
    items = [_coerce(v, item_default, f"{where}[{i}]", problems) for i, v in enumerate(value)]
    return items if len(problems) == before else None


def _build_section(cls, raw, name: str, problems: list[str]):
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        problems.append(f"{name}: expected a mapping")
        return cls()
    defaults = cls()
    allowed = {f.name for f in dataclasses.fields(cls)} - _EXCLUDED.get(name, set())
    kwargs = {}
    for key, value in raw.items():
        if key not in allowed:
            problems.append(f"{name}.{key}: unknown key")
            continue
        v = _coerce(value, getattr(defaults, key), f"{name}.{key}", problems)
        if v is not None:
            kwargs[key] = v
    # collect semantic violations without tripping __post_init__
    obj = object.__new__(cls)
    for f in dataclasses.fields(cls):
        object.__setattr__(obj, f.name, kwargs.get(f.name, getattr(defaults, f.name)))
    bad = obj.violations()
    problems.extend(f"{name}: {msg}" for msg in bad)
    if bad:
        return defaults
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        problems.append(f"{name}: {exc}")
        return defaults


def parse_config(data) -> ExperimentConfig:
    """Validate a mapping (as produced by YAML) into an :class:`ExperimentConfig`."""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(["top level must be a mapping"])
    problems: list[str] = []
    base = ExperimentConfig()
    kwargs = {}
    scalar = {"trials": 0, "master_seed": 0, "workers": 0, "exact_worst_case": False}
    lists = {"N_values": 0, "eta_values": 0.0, "c_values": 0.0, "methods": ""}
    for key, value in data.items():
        if key in _SECTIONS:
            kwargs[key] = _build_section(_SECTIONS[key], value, key, problems)
        elif key in scalar:
            v = _coerce(value, scalar[key], key, problems)
            if v is not None:
                kwargs[key] = v
        elif key in lists:
            v = _coerce_list(value, lists[key], key, problems)
            if v is not None:
                kwargs[key] = v
        else:
            problems.append(f"{key}: unknown key")
    cfg = dataclasses.replace(base, **kwargs)
    problems.extend(cfg.violations())
    if problems:
        raise ConfigError(problems)
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError([f"{path}: {exc.strerror or exc}"]) from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{path}:{mark.line + 1}:{mark.column + 1}" if mark is not None else str(path)
        reason = getattr(exc, "problem", None) or str(exc)
        raise ConfigError([f"{where}: parse error: {reason}"]) from exc
    return parse_config(data)


def _plain(value):
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    if isinstance(value, float) and math.isinf(value):
        return ".inf"
    return value


def config_to_dict(cfg: ExperimentConfig) -> dict:
    out = {}
    for f in dataclasses.fields(cfg):
        value = getattr(cfg, f.name)
        if dataclasses.is_dataclass(value):
            skip = _EXCLUDED.get(f.name, set())
            out[f.name] = {g.name: _plain(getattr(value, g.name))
                           for g in dataclasses.fields(value) if g.name not in skip}
        else:
            out[f.name] = _plain(list(value) if isinstance(value, list) else value)
    return out


def dump_config(cfg: ExperimentConfig) -> str:
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False)


# --------------------------------------------------------------------------
# records
# --------------------------------------------------------------------------

@dataclass
class TrialRecord:
    """One (method, N, eta, c, trial) outcome.

    ``eta`` / ``c`` are None for methods that ignore them. SNRs are in dB and
    clamped at the floor. ``status`` is the final subproblem status for the
    iterative methods and ``Direct`` for closed-form ones.
    """

    method: str
    N: int
    eta: float | None
    c: float | None
    trial: int
    seed: int
    snr1_db: float
    snr1_worstcase_db: float
    snr1_nominal_db: float
    snr_k_db: tuple[float, ...]
    gamma_k_db: tuple[float, ...]
    iterations: int
    converged: bool
    status: str
    wall_time_ms: float = 0.0

    def sort_key(self):
        return (self.method, self.N, -1.0 if self.eta is None else self.eta,
                -1.0 if self.c is None else self.c, self.trial)


# wall time is kept out of the results file so identical seeds give identical bytes
RESULT_COLUMNS = ("method", "N", "eta", "c", "trial", "seed", "snr1_db", "snr1_worstcase_db",
                  "snr1_nominal_db", "snr_k_db", "gamma_k_db", "iterations", "converged", "status")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ";".join(repr(float(v)) for v in value)
    return str(value)


# --------------------------------------------------------------------------
# sweep
# --------------------------------------------------------------------------

def _rng(master_seed: int, *key: int) -> tuple[np.random.Generator, int]:
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss), int(ss.generate_state(1, np.uint64)[0])


def _db(x) -> float:
    return float(linear_to_db(x))


def _cell(cfg: ExperimentConfig, trial: int, N: int) -> list[TrialRecord]:
    """All methods for one channel realisation of one surface size."""
    geo = dataclasses.replace(cfg.geometry, num_ris_elements=N)
    s2 = cfg.fading.noise_power
    real = generate_realization(geo, cfg.fading, _rng(cfg.master_seed, 0, trial)[0])
    if cfg.precoder.kind == "matched":
        p = matched_precoders(real, cfg.precoder.power)
    else:
        rng_p = _rng(cfg.master_seed, 2, trial)[0]
        p = random_precoders(geo.num_bs_antennas, geo.num_ues, rng_p, cfg.precoder.power)
    eff = effective_channel(real, p, s2)

    # the CSI error draw is keyed by (trial, eta) only so every N sees the same error
    estimates = {}
    for ei, eta in enumerate(cfg.eta_values):
        rng_e = _rng(cfg.master_seed, 1, trial, ei)[0]
        eps = eta * np.abs(eff.h_s)
        est = np.array([split_estimate(h, e, rng_e)[0] for h, e in zip(eff.h_s, eps)])
        estimates[ei] = (est, eps)

    records = []
    for method in cfg.methods:
        etas = list(enumerate(cfg.eta_values)) if method in _USES_ETA else [(None, None)]
        cs = list(enumerate(cfg.c_values)) if method in _USES_C else [(None, None)]
        for ei, eta in etas:
            for ci, c in cs:
                key = (3, _METHOD_ID[method], N, -1 if ei is None else ei, -1 if ci is None else ci, trial)
                # SeedSequence keys must be nonnegative
                rng, seed = _rng(cfg.master_seed, *(k + 1 for k in key))
                t0 = time.perf_counter()
                rec = _run_method(cfg, method, eff, estimates.get(ei), eta, c, rng)
                rec.N, rec.trial, rec.seed = N, trial, seed
                rec.wall_time_ms = (time.perf_counter() - t0) * 1e3
                records.append(rec)
    return records


def _run_method(cfg, method, eff, estimate, eta, c, rng) -> TrialRecord:
    s2 = eff.noise_power
    K, N = eff.num_ues, eff.num_elements
    h_nom, eps = (eff.h_s, np.zeros(K)) if estimate is None else estimate
    iterations, converged, status = 0, True, "Direct"
    gamma = None
    try:
        if method == "NoRIS":
            psi = np.zeros(N, dtype=complex)
        elif method == "Random":
            psi = random_pattern(N, rng)
        elif method == "MRT":
            psi = mrt_pattern(eff.h_breve[1]) if K > 1 else np.ones(N, dtype=complex)
        elif method == "Lemma1":
            psi = _lemma1_on(eff) if N else np.zeros(0, dtype=complex)
        else:
            if method in _USES_C and K > 1:
                gamma = compute_gamma(c, h_nom[1:], eff.h_breve[1:], s2)
            elif method in _USES_C:
                gamma = np.zeros(0)
            problem = AttackProblem(method, h_nom, eff.h_breve, s2, gamma=gamma,
                                    eps=eps if method in _USES_ETA else None,
                                    exact_worst_case=cfg.exact_worst_case)
            psi, trace = solve_attack(problem, cfg.ccp, rng)
            iterations, converged, status = trace.iterations, trace.converged, trace.final_status
    except (ValueError, ArithmeticError) as exc:
        nan = float("nan")
        return TrialRecord(method, N, eta, c, 0, 0, nan, nan, nan, (nan,) * (K - 1), (), 0, False,
                           f"Error: {exc}")

    true_vals = eff.total(psi)
    nominal = h_nom[0] + np.vdot(eff.h_breve[0], psi)
    worst = worst_case_snr_exact(nominal, float(eps[0]), s2)[0]
    return TrialRecord(
        method=method, N=N, eta=eta, c=c, trial=0, seed=0,
        snr1_db=_db(abs(true_vals[0]) ** 2 / s2),
        snr1_worstcase_db=_db(worst),
        snr1_nominal_db=_db(abs(nominal) ** 2 / s2),
        snr_k_db=tuple(_db(v) for v in np.abs(true_vals[1:]) ** 2 / s2),
        gamma_k_db=() if gamma is None else tuple(_db(g) for g in gamma),
        iterations=iterations, converged=converged, status=status,
    )


def _lemma1_on(eff) -> np.ndarray:
    """Closed-form pattern using the mean reflected magnitude and the true phases."""
    hb = eff.h_breve[0]
    inst = LosInstance(abs(eff.h_s[0]), float(np.angle(eff.h_s[0])), float(np.mean(np.abs(hb))),
                       tuple(np.angle(hb)), eff.noise_power)
    xi, _ = lemma1_best(inst)
    return lemma1_pattern(inst, xi)


def _resolve_workers(cfg: ExperimentConfig) -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            workers = int(env)
        except ValueError:
            raise ConfigError([f"{WORKERS_ENV}={env!r} is not an integer"]) from None
        if workers < 1:
            raise ConfigError([f"{WORKERS_ENV} must be >= 1"])
        return workers
    return cfg.workers


def _cell_args(args):
    return _cell(*args)


def run_sweep(cfg: ExperimentConfig, workers: int | None = None) -> list[TrialRecord]:
    """Run every (trial, N) cell and return records sorted by (method, N, eta, c, trial)."""
    workers = workers or _resolve_workers(cfg)
    jobs = [(cfg, trial, N) for trial in range(cfg.trials) for N in cfg.N_values]
    if workers == 1 or len(jobs) == 1:
        chunks = [_cell_args(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_cell_args, jobs))
    records = [r for chunk in chunks for r in chunk]
    records.sort(key=TrialRecord.sort_key)
    return records


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------

def summarize(records) -> list[dict]:
    """Median, mean, 10th and 90th percentile of ``snr1_db`` per (method, N, eta, c)."""
    groups: dict = {}
    for r in records:
        groups.setdefault((r.method, r.N, r.eta, r.c), []).append(r.snr1_db)
    out = []
    for (method, N, eta, c), vals in sorted(groups.items(), key=lambda kv: (
            kv[0][0], kv[0][1], -1.0 if kv[0][2] is None else kv[0][2], -1.0 if kv[0][3] is None else kv[0][3])):
        arr = np.asarray(vals, dtype=float)
        out.append({"method": method, "N": N, "eta": eta, "c": c, "count": int(arr.size),
                    "median": float(np.median(arr)), "mean": float(np.mean(arr)),
                    "p10": float(np.percentile(arr, 10)), "p90": float(np.percentile(arr, 90))})
    return out


def write_results(records, path, summary_path=None, timings_path=None) -> None:
    """Write the results CSV and its JSON summary (default ``<stem>_summary.json``)."""
    path = Path(path)
    summary_path = Path(summary_path) if summary_path else path.with_name(path.stem + "_summary.json")
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(RESULT_COLUMNS)
            for r in records:
                w.writerow([_fmt(getattr(r, col)) for col in RESULT_COLUMNS])
        summary_path.write_text(json.dumps(summarize(records), indent=2) + "\n")
        if timings_path:
            with open(timings_path, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(("method", "N", "eta", "c", "trial", "wall_time_ms"))
                for r in records:
                    w.writerow([_fmt(v) for v in (r.method, r.N, r.eta, r.c, r.trial, r.wall_time_ms)])
    except OSError as exc:
        raise OSError(f"cannot write results to {exc.filename or path}: {exc.strerror or exc}") from exc


def run_experiment(cfg: ExperimentConfig, out_dir) -> list[TrialRecord]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = run_sweep(cfg)
    write_results(records, out / cfg.output.results_csv, out / cfg.output.summary_json,
                  out / cfg.output.timings_csv)
    (out / "config.yaml").write_text(dump_config(cfg))
    return records
