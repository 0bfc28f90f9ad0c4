"""Monte Carlo driver, parameter sweeps and result files."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .algorithms import (
    SCHEMES,
    _rb_hungarian,
    baseline_greedy_many,
    baseline_random_rb,
    pac_d2d_many,
    pac_no_d2d,
    pair_tables,
    phi_table,
)
from .model import ConfigError, SystemConfig, make_rng, sample_channels, sample_topology

__all__ = [
    "SWEEP_PARAMS",
    "DEFAULT_SWEEPS",
    "CSV_COLUMNS",
    "RESULTS_SCHEMA",
    "RunSpec",
    "ResultRecord",
    "ConvergenceTraces",
    "child_seed",
    "topology_channels",
    "config_for",
    "run_monte_carlo",
    "sweep_convergence",
    "emit_results",
    "read_results",
]

SWEEP_PARAMS = ("power_dbm", "num_cus", "num_d2d")

# The power grid is a chosen grid; the figure it mirrors does not list its points.
DEFAULT_SWEEPS = {
    "power_dbm": [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0],
    "num_cus": [2, 3, 4, 5, 6, 7, 8, 9, 10],
    "num_d2d": [2, 4, 6, 8, 10],
}

CSV_COLUMNS = (
    "sweep_param",
    "sweep_value",
    "scheme",
    "mean_sum_sr",
    "std_err",
    "mean_iterations",
    "num_topologies",
    "master_seed",
    "wall_time_s",
)

RESULTS_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["records"],
    "properties": {
        "records": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": list(CSV_COLUMNS),
                "additionalProperties": False,
                "properties": {
                    "sweep_param": {"type": ["string", "null"], "enum": [*SWEEP_PARAMS, None]},
                    "sweep_value": {"type": ["number", "null"]},
                    "scheme": {"type": "string", "enum": list(SCHEMES)},
                    "mean_sum_sr": {"type": "number", "minimum": 0},
                    "std_err": {"type": "number", "minimum": 0},
                    "mean_iterations": {"type": "number", "minimum": 0},
                    "num_topologies": {"type": "integer", "minimum": 1},
                    "master_seed": {"type": "integer", "minimum": 0},
                    "wall_time_s": {"type": "number", "minimum": 0},
                },
            },
        }
    },
}

# topologies evaluated per batched call; fixed so results never depend on load
CHUNK = 200


@dataclass(frozen=True)
class RunSpec:
    base: SystemConfig = field(default_factory=SystemConfig)
    schemes: tuple = SCHEMES
    num_topologies: int = 1000
    master_seed: int = 0
    sweep: tuple | None = None  # (param, values)

    def __post_init__(self):
        if self.num_topologies < 1:
            raise ConfigError("num_topologies must be >= 1")
        if self.master_seed < 0:
            raise ConfigError("master_seed must be nonnegative")
        unknown = set(self.schemes) - set(SCHEMES)
        if unknown or not self.schemes:
            raise ConfigError(f"unknown schemes {sorted(unknown)}; choose from {SCHEMES}")
        if self.sweep is not None:
            param, values = self.sweep
            if param not in SWEEP_PARAMS:
                raise ConfigError(f"unknown sweep parameter {param!r}")
            if not len(values):
                raise ConfigError("empty sweep")
            for v in values:
                config_for(self.base, param, v)

    def points(self):
        """``(param, value, config, seed_value)`` per sweep point.

        Power does not enter the topology or channel draws, so every power
        point reuses the same realizations (``seed_value=None``); this keeps
        the power curve a paired comparison.
        """
        if self.sweep is None:
            return [(None, None, self.base, None)]
        param, values = self.sweep
        return [
            (param, v, config_for(self.base, param, v), None if param == "power_dbm" else v)
            for v in values
        ]


@dataclass
class ResultRecord:
    sweep_param: str | None
    sweep_value: float | None
    scheme: str
    mean_sum_sr: float
    std_err: float
    mean_iterations: float
    num_topologies: int
    master_seed: int
    wall_time: float
    samples: np.ndarray | None = field(default=None, repr=False, compare=False)


def config_for(base: SystemConfig, param: str | None, value) -> SystemConfig:
    """Apply one sweep value to the base config (K follows M)."""
    if param is None:
        return base
    if param == "power_dbm":
        return base.with_power_dbm(float(value))
    if float(value) != int(value):
        raise ConfigError(f"{param} must be an integer, got {value}")
    if param == "num_cus":
        return base.with_counts(num_cus=int(value))
    if param == "num_d2d":
        return base.with_counts(num_d2d=int(value))
    raise ConfigError(f"unknown sweep parameter {param!r}")


def _value_key(value) -> int:
    if value is None:
        return 0
    return int(np.float64(value).view(np.uint64)) + 1


def child_seed(master_seed: int, sweep_value, t: int, stream: int = 0) -> np.random.SeedSequence:
    """Seed of topology ``t`` at one sweep point; ``stream`` separates channel and scheme randomness."""
    return np.random.SeedSequence(master_seed, spawn_key=(_value_key(sweep_value), t, stream))


def topology_channels(cfg: SystemConfig, master_seed: int, sweep_value, t: int):
    rng = make_rng(child_seed(master_seed, sweep_value, t, 0))
    topo = sample_topology(cfg, rng)
    return sample_channels(cfg, topo, rng)


def _run_chunk(cfg, schemes, chans, rngs):
    out = {}
    for name in schemes:
        t0 = time.perf_counter()
        if name == "pac_d2d":
            sols = pac_d2d_many(cfg, chans)
        elif name == "greedy":
            sols = baseline_greedy_many(cfg, chans)
        elif name == "pac_no_d2d":
            sols = [pac_no_d2d(cfg, c) for c in chans]
        else:
            sols = [baseline_random_rb(cfg, c, r) for c, r in zip(chans, rngs)]
        out[name] = (
            np.array([s.sum_sr for s in sols]),
            np.array([s.mean_iterations for s in sols]),
            time.perf_counter() - t0,
        )
    return out


def run_monte_carlo(spec: RunSpec) -> list:
    """Average every scheme's sum secrecy rate over random topologies.

    All schemes at a sweep point see the same channel realizations; the
    random-RB baseline draws its permutation from a separate stream.
    """
    records = []
    T = spec.num_topologies
    for param, value, cfg, seed_value in spec.points():
        sums = {s: np.empty(T) for s in spec.schemes}
        iters = {s: np.empty(T) for s in spec.schemes}
        wall = dict.fromkeys(spec.schemes, 0.0)
        for lo in range(0, T, CHUNK):
            ts = range(lo, min(T, lo + CHUNK))
            chans = [topology_channels(cfg, spec.master_seed, seed_value, t) for t in ts]
            rngs = [make_rng(child_seed(spec.master_seed, seed_value, t, 1)) for t in ts]
            for name, (sr, it, dt) in _run_chunk(cfg, spec.schemes, chans, rngs).items():
                sums[name][ts.start:ts.stop] = sr
                iters[name][ts.start:ts.stop] = it
                wall[name] += dt
        for name in spec.schemes:
            x = sums[name]
            se = float(x.std(ddof=1) / math.sqrt(T)) if T > 1 else 0.0
            records.append(ResultRecord(
                sweep_param=param,
                sweep_value=None if value is None else float(value),
                scheme=name,
                mean_sum_sr=float(x.mean()),
                std_err=se,
                mean_iterations=float(iters[name].mean()),
                num_topologies=T,
                master_seed=spec.master_seed,
                wall_time=wall[name],
                samples=x,
            ))
    return records


@dataclass
class ConvergenceTraces:
    """Objective traces of sampled (topology, CU, D2D) pairs, in bit/s/Hz."""

    triples: list            # (topology, cu, d2d)
    traces: list             # 1-D arrays, first entry is the q = 0 start
    iterations: np.ndarray

    def aligned(self) -> np.ndarray:
        """Traces stacked by iteration index, each held at its final value."""
        width = max(len(t) for t in self.traces)
        out = np.empty((len(self.traces), width))
        for i, tr in enumerate(self.traces):
            out[i, : len(tr)] = tr
            out[i, len(tr):] = tr[-1]
        return out


def sweep_convergence(spec: RunSpec, pair_samples: int = 200) -> ConvergenceTraces:
    """Sample CU-D2D pairs of the base config and record their alternating-optimization traces."""
    cfg = spec.base
    if cfg.num_d2d < 1:
        raise ConfigError("convergence traces need at least one D2D pair")
    pick = make_rng(np.random.SeedSequence(spec.master_seed, spawn_key=(0, 0, 2)))
    ts = pick.integers(0, spec.num_topologies, size=pair_samples)
    ms = pick.integers(0, cfg.num_cus, size=pair_samples)
    ns = pick.integers(0, cfg.num_d2d, size=pair_samples)

    uniq = sorted(set(int(t) for t in ts))
    chans = [topology_channels(cfg, spec.master_seed, None, t) for t in uniq]
    rbs = [_rb_hungarian(phi_table(cfg, c)) for c in chans]
    tables = pair_tables(cfg, chans, rbs)
    pos = {t: i for i, t in enumerate(uniq)}

    triples, traces, iters = [], [], []
    for t, m, n in zip(ts, ms, ns):
        i = pos[int(t)]
        triples.append((int(t), int(m), int(n)))
        traces.append(tables.trace((i, int(m), int(n))))
        iters.append(int(tables.iterations[i, m, n]))
    return ConvergenceTraces(triples=triples, traces=traces, iterations=np.array(iters))


# -- output -----------------------------------------------------------------

def _fmt(x) -> str:
    return "" if x is None else f"{x:.12g}"


def _row(r: ResultRecord) -> dict:
    return {
        "sweep_param": r.sweep_param,
        "sweep_value": r.sweep_value,
        "scheme": r.scheme,
        "mean_sum_sr": r.mean_sum_sr,
        "std_err": r.std_err,
        "mean_iterations": r.mean_iterations,
        "num_topologies": r.num_topologies,
        "master_seed": r.master_seed,
        "wall_time_s": r.wall_time,
    }


def _round12(x):
    return None if x is None else float(f"{x:.12g}")


def render_results(records, fmt: str = "csv") -> str:
    if not records:
        raise ValueError("no records to emit")
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in records:
            row = _row(r)
            w.writerow([
                row["sweep_param"] or "",
                _fmt(row["sweep_value"]),
                row["scheme"],
                *(_fmt(row[c]) for c in ("mean_sum_sr", "std_err", "mean_iterations")),
                row["num_topologies"],
                row["master_seed"],
                _fmt(row["wall_time_s"]),
            ])
        return buf.getvalue()
    if fmt == "json":
        rows = []
        for r in records:
            row = _row(r)
            for c in ("sweep_value", "mean_sum_sr", "std_err", "mean_iterations", "wall_time_s"):
                row[c] = _round12(row[c])
            rows.append(row)
        return json.dumps({"records": rows}, indent=2) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def emit_results(records, fmt: str, path) -> None:
    """Write records as CSV or JSON. ``path='-'`` writes to stdout."""
    text = render_results(records, fmt)
    if str(path) == "-":
        import sys

        sys.stdout.write(text)
        return
    Path(path).write_text(text)


def _parse_row(row: dict) -> ResultRecord:
    def num(x):
        return None if x in ("", None) else float(x)

    return ResultRecord(
        sweep_param=row["sweep_param"] or None,
        sweep_value=num(row["sweep_value"]),
        scheme=row["scheme"],
        mean_sum_sr=float(row["mean_sum_sr"]),
        std_err=float(row["std_err"]),
        mean_iterations=float(row["mean_iterations"]),
        num_topologies=int(row["num_topologies"]),
        master_seed=int(row["master_seed"]),
        wall_time=float(row["wall_time_s"]),
    )


def read_results(path, fmt: str | None = None) -> list:
    path = Path(path)
    fmt = fmt or ("json" if path.suffix == ".json" else "csv")
    text = path.read_text()
    if fmt == "json":
        return [_parse_row(r) for r in json.loads(text)["records"]]
    return [_parse_row(r) for r in csv.DictReader(io.StringIO(text))]
