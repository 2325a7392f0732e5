"""Experiment harness behind the ``qkmm`` subcommands.

Every command takes an :class:`ExperimentConfig`, runs its instances
(optionally in a process pool), writes one CSV row per instance plus a JSON
summary, and returns a :class:`CommandOutput`.  Random instances for trial
``t`` come from ``default_rng(seed + t)``, so a row can be reproduced from the
config echo alone.
"""
from __future__ import annotations

import json
import math
import subprocess
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .. import __version__
from ..algorithms import (QkmmCircuitBundle, auto_normalize, build_hadamard_test, build_m2m,
                          build_mmm, build_swap_test, build_v2m, build_v2v, m2m_gate_stream)
from ..counting import (count_gate_stream, count_gates, hadamard_stack_model,
                        hadamard_test_model, predicted_counts)
from ..decompose import decompose_circuit
from ..density import MAX_QUBITS, dm_probabilities
from ..errors import ConfigurationError, ValidationError
from ..metrics import (accuracy_gate, bundle_truth, fidelity, marginal, matrix_overlap_fidelity,
                       reconstruct_magnitudes)
from ..noise import ALL_SOURCES, FIDELITY_CONVENTION, GATE, T1, T2, NoiseParams, apply_noise_model
from ..statevector import probabilities, sample_shots, simulate
from .io import RESULT_FORMAT_VERSION, load_matrix, write_csv, write_json

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

TASKS = ("v2v", "v2m", "m2m", "mmm", "swap", "hadamard", "gatecount")
METHODS = ("qkmm", "swap", "hadamard")
#: register qubits allowed in a density-matrix run (a decomposition ancilla
#: comes on top, still inside the engine's own limit)
DENSITY_REGISTER_CAP = 9
DEFAULT_SOURCE_SETS: tuple[tuple[str, ...], ...] = ((), (T1,), (T2,), (GATE,), (T1, T2, GATE))
PHASES = ("build_s", "decompose_s", "simulate_s", "estimate_s")


def artifact_version() -> str:
    """Package version, plus the commit hash when run from a git checkout."""
    try:
        out = subprocess.run(["git", "rev-parse", "--short", "HEAD"], capture_output=True,
                             text=True, cwd=Path(__file__).parent, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def _is_power_of_two(n: int) -> bool:
    return isinstance(n, int) and n >= 1 and not n & (n - 1)


def sources_label(sources: Sequence[str]) -> str:
    return "+".join(s for s in (T1, T2, GATE) if s in sources) or "none"


def parse_sources(text: str) -> tuple[tuple[str, ...], ...]:
    """``"none,T1,T2,GATE,all"`` or ``"T1+GATE"`` style lists of source subsets."""
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if item.lower() == "none":
            out.append(())
        elif item.lower() == "all":
            out.append((T1, T2, GATE))
        else:
            parts = tuple(p.strip().upper() for p in item.split("+"))
            bad = set(parts) - ALL_SOURCES
            if bad:
                raise ConfigurationError(f"unknown noise source(s) {sorted(bad)}")
            out.append(tuple(s for s in (T1, T2, GATE) if s in parts))
    if not out:
        raise ConfigurationError("empty source list")
    return tuple(out)


@dataclass(frozen=True)
class ExperimentConfig:
    task: str = "m2m"
    dims: tuple[int, ...] = (2, 4)
    shots: int = 1000
    seed: int = 0
    trials: int = 1
    noise: NoiseParams | None = None
    output_dir: str = "results"
    matrix_source: str = "random"
    exact: bool = False
    bound: float = 0.1
    methods: tuple[str, ...] = ("qkmm", "swap", "hadamard")
    parallel_counts: tuple[int, ...] = (2, 4, 8, 16, 32)
    source_sets: tuple[tuple[str, ...], ...] = DEFAULT_SOURCE_SETS
    workers: int = 1
    matrix_a: str | None = None
    matrix_b: str | None = None
    auto_normalize: bool = False
    format: str = "csv"
    explicit_x: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "parallel_counts", tuple(int(k) for k in self.parallel_counts))
        object.__setattr__(self, "source_sets",
                           tuple(tuple(s) for s in self.source_sets))
        if self.task not in TASKS:
            raise ConfigurationError(f"task must be one of {TASKS}, got {self.task!r}")
        if not self.dims:
            raise ConfigurationError("dims must not be empty")
        for d in self.dims:
            if d < 2 or not _is_power_of_two(d):
                raise ConfigurationError(f"dims must be powers of two >= 2, got {d}")
        if self.trials < 1:
            raise ConfigurationError("trials must be >= 1")
        if self.shots < 1:
            raise ConfigurationError("shots must be >= 1")
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1")
        if self.bound <= 0:
            raise ConfigurationError("bound must be positive")
        bad = set(self.methods) - set(METHODS)
        if bad or not self.methods:
            raise ConfigurationError(f"methods must be a non-empty subset of {METHODS}")
        for k in self.parallel_counts:
            if not _is_power_of_two(k):
                raise ConfigurationError(f"parallel counts must be powers of two, got {k}")
        if self.matrix_source not in ("random", "file"):
            raise ConfigurationError("matrix_source must be 'random' or 'file'")
        if self.matrix_source == "file" and not self.matrix_a:
            raise ConfigurationError("matrix_source 'file' needs matrix_a")
        if self.format not in ("csv", "json"):
            raise ConfigurationError("format must be csv or json")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["noise"] = None if self.noise is None else self.noise.to_dict()
        d["source_sets"] = [list(s) for s in self.source_sets]
        for key in ("dims", "methods", "parallel_counts"):
            d[key] = list(d[key])
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ConfigurationError(f"unknown config keys {sorted(extra)}")
        if data.get("noise") is not None and not isinstance(data["noise"], NoiseParams):
            data["noise"] = NoiseParams.from_dict(data["noise"])
        if isinstance(data.get("source_sets"), str):
            data["source_sets"] = parse_sources(data["source_sets"])
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        path = Path(path)
        text = path.read_text()
        raw = tomllib.loads(text) if path.suffix == ".toml" else json.loads(text)
        return cls.from_dict(raw)


@dataclass
class ResultRecord:
    """One instance: echo, phase timings, gate counts and metrics."""

    config_echo: dict
    timings: dict[str, float]
    gate_counts: dict[str, int | None]
    metrics: dict[str, float | int | str | None]
    artifact_version: str = field(default_factory=artifact_version)

    def row(self) -> dict:
        return {**self.config_echo, **self.gate_counts, **self.metrics, **self.timings}


@dataclass
class CommandOutput:
    records: list[ResultRecord]
    files: list[Path]
    summary: dict


# instances ----------------------------------------------------------------

def _unit_rows(rng: np.random.Generator, N: int) -> np.ndarray:
    M = rng.standard_normal((N, N))
    return M / np.linalg.norm(M, axis=1, keepdims=True)


def _unit_vector(rng: np.random.Generator, N: int) -> np.ndarray:
    v = rng.standard_normal(N)
    return v / np.linalg.norm(v)


def random_orthogonal(rng: np.random.Generator, N: int) -> np.ndarray:
    """Haar-random orthogonal matrix (QR with the sign fix)."""
    q, r = np.linalg.qr(rng.standard_normal((N, N)))
    return q * np.sign(np.diag(r))


def random_operands(task: str, N: int, rng: np.random.Generator, K: int = 2) -> tuple:
    """Spherically symmetric rows/columns/vectors, normalised."""
    if task in ("v2v", "swap", "hadamard"):
        return _unit_vector(rng, N), _unit_vector(rng, N)
    if task == "v2m":
        return _unit_rows(rng, N), _unit_vector(rng, N)
    if task == "m2m":
        return _unit_rows(rng, N), _unit_rows(rng, N).T
    if task == "mmm":
        return _unit_rows(rng, N), [random_orthogonal(rng, N) for _ in range(K)]
    raise ConfigurationError(f"no random operands for task {task!r}")


def _file_operands(config: ExperimentConfig) -> tuple[tuple, dict]:
    """Operands read from disk; returns (operands, scale factors or empty)."""
    A = load_matrix(config.matrix_a)
    B = load_matrix(config.matrix_b) if config.matrix_b else None
    scales: dict = {}
    task = config.task
    if task in ("v2v", "swap", "hadamard"):
        if B is None or A.ndim != 1 or B.ndim != 1:
            raise ValidationError(f"{task} needs two vectors (--matrix-a, --matrix-b)")
        if config.auto_normalize:
            scales = {"a": float(np.linalg.norm(A)), "b": float(np.linalg.norm(B))}
            A, B = A / scales["a"], B / scales["b"]
        return (A, B), scales
    if task == "v2m":
        if B is None or B.ndim != 1:
            raise ValidationError("v2m needs a matrix and a vector")
        if config.auto_normalize:
            A, row_scales = auto_normalize(A, "rows")
            scales = {"rows": row_scales.tolist(), "x": float(np.linalg.norm(B))}
            B = B / scales["x"]
        return (A, B), scales
    if task == "m2m":
        if B is None or B.ndim != 2:
            raise ValidationError("m2m needs two matrices")
        if config.auto_normalize:
            A, row_scales = auto_normalize(A, "rows")
            B, col_scales = auto_normalize(B, "columns")
            scales = {"rows": row_scales.tolist(), "columns": col_scales.tolist()}
        return (A, B), scales
    raise ConfigurationError(f"task {task!r} does not read operands from files")


def build_bundle(task: str, operands: tuple, explicit_x: bool = True) -> QkmmCircuitBundle:
    builders: dict[str, Callable] = {
        "v2v": build_v2v, "v2m": build_v2m, "m2m": build_m2m, "mmm": build_mmm,
        "swap": build_swap_test, "hadamard": build_hadamard_test,
    }
    return builders[task](*operands, explicit_x=explicit_x)


# one instance -------------------------------------------------------------

def _noisy_probabilities(bundle: QkmmCircuitBundle, noise: NoiseParams) -> tuple[np.ndarray, float, int]:
    if bundle.width > DENSITY_REGISTER_CAP:
        raise ConfigurationError(
            f"density-matrix runs are capped at {DENSITY_REGISTER_CAP} register qubits; "
            f"{bundle.task} at N={bundle.dimension} needs {bundle.width}")
    t0 = time.perf_counter()
    low = decompose_circuit(bundle.circuit, strict=True)
    t_dec = time.perf_counter() - t0
    if low.num_qubits > MAX_QUBITS:
        raise ConfigurationError(f"lowered circuit needs {low.num_qubits} qubits")
    dm = apply_noise_model(low, noise)
    p = marginal(dm_probabilities(dm), low.num_qubits, range(bundle.width))
    return p / p.sum(), t_dec, len(low.gates)


def _estimate_metrics(bundle: QkmmCircuitBundle, operands: tuple, ideal: np.ndarray,
                      observed: np.ndarray, config: ExperimentConfig, rng: np.random.Generator
                      ) -> dict:
    if config.exact:
        est = reconstruct_magnitudes(observed, bundle)
    else:
        hist = sample_shots(observed, config.shots, int(rng.integers(2 ** 63)))
        est = reconstruct_magnitudes(hist, bundle)
    truth = bundle_truth(bundle, *operands)
    err = np.abs(est.magnitudes - truth)
    out = {
        "fidelity": fidelity(ideal, observed),
        "matrix_fidelity": matrix_overlap_fidelity(est.magnitudes, truth),
        "mean_error": float(err.mean()),
        "max_error": float(err.max()),
        "pass_rate": accuracy_gate(est, truth, config.bound).pass_rate,
        "post_selected": "" if est.post_selected_shots is None else est.post_selected_shots,
    }
    if bundle.task in ("v2v", "swap", "hadamard"):
        out["sq_error"] = float(abs(est.magnitudes ** 2 - truth ** 2))
    return out


def run_instance(config: ExperimentConfig, N: int, trial: int) -> ResultRecord:
    """Build, (decompose,) simulate and estimate one random instance."""
    rng = np.random.default_rng(config.seed + trial)
    timings = dict.fromkeys(PHASES, 0.0)
    t0 = time.perf_counter()
    if config.matrix_source == "file":
        operands, _ = _file_operands(config)
    else:
        K = config.parallel_counts[0] if config.parallel_counts else 1
        operands = random_operands(config.task, N, rng, K)
    bundle = build_bundle(config.task, operands, config.explicit_x)
    timings["build_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    ideal = probabilities(simulate(bundle.circuit))
    measured = None
    if config.noise is not None:
        observed, timings["decompose_s"], measured = _noisy_probabilities(bundle, config.noise)
    else:
        observed = ideal
    timings["simulate_s"] = time.perf_counter() - t0 - timings["decompose_s"]

    t0 = time.perf_counter()
    metrics = _estimate_metrics(bundle, operands, ideal, observed, config, rng)
    timings["estimate_s"] = time.perf_counter() - t0
    counts = {"qubits": bundle.width,
              "gates_model": count_gates(bundle.circuit, "paper_model").total_elementary,
              "gates_measured": "" if measured is None else measured}
    echo = {"task": config.task, "dim": bundle.dimension, "trial": trial,
            "seed": config.seed + trial, "shots": "" if config.exact else config.shots}
    return ResultRecord(echo, timings, counts, metrics)


# pool ---------------------------------------------------------------------

def _map(fn: Callable, items: list, workers: int) -> list:
    """Ordered map, in a process pool when ``workers > 1``."""
    if workers <= 1 or len(items) <= 1:
        return [fn(*it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, *it) for it in items]
        return [f.result() for f in futures]


def _summarise(records: list[ResultRecord], keys: Sequence[str], group: Sequence[str]) -> list[dict]:
    rows = [r.row() for r in records]
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        groups.setdefault(tuple(row[g] for g in group), []).append(row)
    out = []
    for gkey, members in groups.items():
        entry = dict(zip(group, gkey))
        entry["n"] = len(members)
        for k in keys:
            vals = [m[k] for m in members if isinstance(m.get(k), (int, float))]
            if vals:
                entry[f"{k}_mean"] = float(np.mean(vals))
                entry[f"{k}_std"] = float(np.std(vals))
        out.append(entry)
    return out


def _write(config: ExperimentConfig, stem: str, kind: str, columns: list[str],
           records: list[ResultRecord], summary_rows: list[dict], extra: dict | None = None
           ) -> CommandOutput:
    out_dir = Path(config.output_dir)
    files = []
    rows = [r.row() for r in records]
    if config.format == "csv":
        files.append(write_csv(out_dir / f"{stem}.csv", columns, rows, kind))
    else:
        files.append(write_json(out_dir / f"{stem}.json",
                                {"format": RESULT_FORMAT_VERSION, "kind": kind,
                                 "columns": columns, "rows": rows}))
    summary = {
        "format": RESULT_FORMAT_VERSION,
        "command": kind,
        "artifact_version": artifact_version(),
        "config": config.to_dict(),
        "fidelity_convention": FIDELITY_CONVENTION,
        "summary": summary_rows,
        **(extra or {}),
    }
    files.append(write_json(out_dir / f"{stem}_summary.json", summary))
    return CommandOutput(records, files, summary)


# commands -----------------------------------------------------------------

RUN_COLUMNS = ["task", "dim", "trial", "seed", "shots", "qubits", "gates_model",
               "gates_measured", "fidelity", "matrix_fidelity", "mean_error", "max_error",
               "pass_rate", "sq_error", "post_selected", *PHASES]
METRIC_KEYS = ("fidelity", "matrix_fidelity", "mean_error", "max_error", "pass_rate",
               "sq_error")


def cmd_run(config: ExperimentConfig) -> CommandOutput:
    """``trials`` instances per dimension; one CSV row each plus a summary."""
    if config.task == "gatecount":
        return cmd_gatecount(config)
    dims = config.dims
    extra = {}
    if config.matrix_source == "file":
        operands, scales = _file_operands(config)
        dims = (len(operands[0]),)
        config = replace(config, dims=(max(2, 2 ** math.ceil(math.log2(len(operands[0])))),))
        extra["input_scales"] = scales
    items = [(config, N, t) for N in dims for t in range(config.trials)]
    records = _map(run_instance, items, config.workers)
    summary = _summarise(records, METRIC_KEYS + PHASES, ["task", "dim"])
    return _write(config, f"run_{config.task}", "run", RUN_COLUMNS, records, summary, extra)


COMPARE_COLUMNS = ["task", "dim", "method", "qubits", "repetitions", "gates_per_circuit",
                   "gates_total", "mean_error", "wall_s"]


def _pairs_for(task: str, operands: tuple) -> list[tuple[np.ndarray, np.ndarray]]:
    """The single-pair inner products a non-batching baseline must run."""
    if task == "v2v":
        return [operands]
    if task == "v2m":
        A, x_vec = operands
        return [(row, x_vec) for row in A]
    if task == "m2m":
        A, B = operands
        return [(A[i], B[:, j]) for i in range(A.shape[0]) for j in range(B.shape[1])]
    raise ConfigurationError(f"compare supports v2v, v2m and m2m, not {task!r}")


def compare_instance(config: ExperimentConfig, N: int, method: str) -> ResultRecord:
    rng = np.random.default_rng(config.seed)
    operands = random_operands(config.task, N, rng)
    t0 = time.perf_counter()
    if method == "qkmm":
        bundle = build_bundle(config.task, operands, config.explicit_x)
        est = reconstruct_magnitudes(probabilities(simulate(bundle.circuit)), bundle)
        err = float(np.mean(np.abs(est.magnitudes - bundle_truth(bundle, *operands))))
        qubits = bundle.width
        reps = 1
        per = count_gates(bundle.circuit, "paper_model").total_elementary
    else:
        builder = build_swap_test if method == "swap" else build_hadamard_test
        pairs = _pairs_for(config.task, operands)
        errs = []
        for a, b in pairs:
            bundle = builder(a, b, explicit_x=config.explicit_x)
            est = reconstruct_magnitudes(probabilities(simulate(bundle.circuit)), bundle)
            errs.append(abs(float(est.magnitudes) - abs(float(a @ b))))
        err = float(np.mean(errs))
        qubits = bundle.width
        reps = len(pairs)
        per = count_gates(bundle.circuit, "paper_model").total_elementary
    wall = time.perf_counter() - t0
    echo = {"task": config.task, "dim": N, "method": method}
    counts = {"qubits": qubits, "repetitions": reps, "gates_per_circuit": per,
              "gates_total": per * reps}
    return ResultRecord(echo, {"wall_s": wall}, counts, {"mean_error": err})


def cmd_compare(config: ExperimentConfig) -> CommandOutput:
    """Wall time and total gate count per method; baselines pay per pair."""
    if config.task not in ("v2v", "v2m", "m2m"):
        raise ConfigurationError("compare needs task v2v, v2m or m2m")
    items = [(config, N, m) for N in config.dims for m in config.methods]
    records = _map(compare_instance, items, config.workers)
    summary = [r.row() for r in records]
    return _write(config, f"compare_{config.task}", "compare", COMPARE_COLUMNS, records, summary)


NOISE_COLUMNS = ["task", "dim", "trial", "seed", "sources", "qubits", "gates_measured",
                 "fidelity", "matrix_fidelity", "mean_error", "max_error", "pass_rate",
                 "simulate_s"]


def noise_instance(config: ExperimentConfig, N: int, trial: int) -> list[ResultRecord]:
    """All source subsets on one instance, so they share circuit and input."""
    rng = np.random.default_rng(config.seed + trial)
    operands = random_operands(config.task, N, rng)
    bundle = build_bundle(config.task, operands, config.explicit_x)
    ideal = probabilities(simulate(bundle.circuit))
    base = config.noise or NoiseParams()
    sample_seed = int(rng.integers(2 ** 63))
    out = []
    for sources in config.source_sets:
        t0 = time.perf_counter()
        if sources:
            observed, _, measured = _noisy_probabilities(bundle, base.with_sources(sources))
        else:
            # nothing enabled: the noisy engine reproduces the ideal diagonal
            observed, measured = ideal, ""
        wall = time.perf_counter() - t0
        metrics = _estimate_metrics(bundle, operands, ideal, observed, config,
                                    np.random.default_rng(sample_seed))
        metrics.pop("sq_error", None)
        metrics.pop("post_selected", None)
        echo = {"task": config.task, "dim": N, "trial": trial, "seed": config.seed + trial,
                "sources": sources_label(sources)}
        out.append(ResultRecord(echo, {"simulate_s": wall},
                                {"qubits": bundle.width, "gates_measured": measured}, metrics))
    return out


def cmd_noise_sweep(config: ExperimentConfig) -> CommandOutput:
    """Fidelity and mean error per dimension for each enabled-source subset."""
    if config.noise is None:
        raise ConfigurationError("noise-sweep needs noise parameters")
    if config.task not in ("v2v", "v2m", "m2m", "swap", "hadamard"):
        raise ConfigurationError(f"noise-sweep does not support task {config.task!r}")
    items = [(config, N, t) for N in config.dims for t in range(config.trials)]
    records = [r for batch in _map(noise_instance, items, config.workers) for r in batch]
    summary = _summarise(records, ("fidelity", "matrix_fidelity", "mean_error", "pass_rate"),
                         ["dim", "sources"])
    return _write(config, f"noise_sweep_{config.task}", "noise_sweep", NOISE_COLUMNS,
                  records, summary, {"noise": (config.noise or NoiseParams()).to_dict()})


MMM_COLUMNS = ["dim", "K", "blocks_used", "qubits", "gates_simulated", "gates_per_product",
               "gates_model_per_product", "mean_error", "pass_rate", "wall_s",
               "wall_per_product_s"]


def mmm_instance(config: ExperimentConfig, N: int, K: int) -> ResultRecord:
    rng = np.random.default_rng(config.seed)
    A, blocks = random_operands("mmm", N, rng, K)
    t0 = time.perf_counter()
    bundle = build_mmm(A, blocks, explicit_x=config.explicit_x)
    p = probabilities(simulate(bundle.circuit))
    if config.exact:
        est = reconstruct_magnitudes(p, bundle)
    else:
        est = reconstruct_magnitudes(sample_shots(p, config.shots, int(rng.integers(2 ** 63))),
                                     bundle)
    wall = time.perf_counter() - t0
    truth = bundle_truth(bundle, A, blocks)
    model = count_gates(bundle.circuit, "paper_model").total_elementary
    sim = len(bundle.circuit.gates)
    echo = {"dim": N, "K": K}
    counts = {"blocks_used": K, "qubits": bundle.width, "gates_simulated": sim,
              "gates_per_product": sim / K, "gates_model_per_product": model / K}
    metrics = {"mean_error": float(np.mean(np.abs(est.magnitudes - truth))),
               "pass_rate": accuracy_gate(est, truth, config.bound).pass_rate}
    return ResultRecord(echo, {"wall_s": wall, "wall_per_product_s": wall / K}, counts, metrics)


def cmd_mmm_sweep(config: ExperimentConfig) -> CommandOutput:
    """Per-product cost as the number of B matrices sharing one circuit grows."""
    items = [(config, N, K) for N in config.dims for K in config.parallel_counts]
    records = _map(mmm_instance, items, config.workers)
    summary = [r.row() for r in records]
    return _write(config, "mmm_sweep", "mmm_sweep", MMM_COLUMNS, records, summary)


GATECOUNT_COLUMNS = ["dim", "n", "A_per_encoding", "X_total", "H_total", "S_printed",
                     "S_recomposed", "S_linear_gap", "model_count", "model_over_N2logN",
                     "hadamard_test_single", "hadamard_stack", "measured_elementary",
                     "measured_weighted"]
#: dimensions up to which the M2M circuit is lowered for measured counts
MEASURED_COUNT_LIMIT = 32


def gatecount_row(N: int, seed: int = 0, explicit_x: bool = True) -> ResultRecord:
    pred = predicted_counts(N)
    rng = np.random.default_rng(seed)
    A, B = random_operands("m2m", N, rng)
    t0 = time.perf_counter()
    model = count_gate_stream(m2m_gate_stream(A, B, explicit_x)).total_elementary
    measured_el = measured_w = ""
    if N <= MEASURED_COUNT_LIMIT:
        rep = count_gates(build_m2m(A, B, explicit_x).circuit, "measured")
        measured_el, measured_w = rep.total_elementary, rep.weighted_total
    wall = time.perf_counter() - t0
    row = {"dim": N, "n": pred.n, "A_per_encoding": pred.A_per_encoding,
           "X_total": pred.X_total, "H_total": pred.H_total, "S_printed": pred.S_printed,
           "S_recomposed": pred.S_recomposed,
           "S_linear_gap": pred.S_recomposed - pred.S_printed,
           "model_count": model, "model_over_N2logN": model / (N * N * pred.n),
           "hadamard_test_single": hadamard_test_model(N),
           "hadamard_stack": hadamard_stack_model(N),
           "measured_elementary": measured_el, "measured_weighted": measured_w}
    return ResultRecord({"dim": N}, {"wall_s": wall}, {}, row)


def cmd_gatecount(config: ExperimentConfig) -> CommandOutput:
    """Closed forms next to counts taken from built M2M circuits."""
    items = [(N, config.seed, config.explicit_x) for N in config.dims]
    records = _map(gatecount_row, items, config.workers)
    summary = [r.metrics for r in records]
    return _write(config, "gatecount", "gatecount", GATECOUNT_COLUMNS, records, summary)


COMMANDS = {
    "run": cmd_run,
    "compare": cmd_compare,
    "noise-sweep": cmd_noise_sweep,
    "mmm-sweep": cmd_mmm_sweep,
    "gatecount": cmd_gatecount,
}
