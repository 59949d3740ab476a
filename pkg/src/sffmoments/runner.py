"""Run orchestration: deterministic parallel sampling, CSV and snapshots.

Work is partitioned by batch.  Each batch covers a fixed contiguous range
of sample indices; every sample draws from its own index-derived stream,
and in-batch sums follow a fixed chunked summation tree.  Results are
therefore byte-identical for a given (config, seed) at any worker count,
and a run split over several invocations reassembles exactly.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import analytics
from .ensembles import CUE, GUE, EnsembleSpec, heisenberg_time, spectra_batch
from .errors import ConfigError, SnapshotError
from .estimator import (
    DEFAULT_BATCHES,
    DEFAULT_NMAX,
    MomentAccumulator,
    MomentTable,
    TimeGrid,
    batch_bounds,
    chunk_size_for,
    finalize,
    make_grid,
    trace_powers,
)

CSV_SCHEMA = "sff-moments-result v1"
SNAPSHOT_MAGIC = "sffmoments-accumulator"
SNAPSHOT_VERSION = 1


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines one Monte Carlo run."""

    ensemble: str
    dim: int
    n_sim: int
    seed: int = 0
    tau_max: float = None
    tau_min: float = None
    n_times: int = None
    times: tuple = None            # explicit times override the tau grid
    include_t0: bool = False
    n_max: int = DEFAULT_NMAX
    batches: int = DEFAULT_BATCHES
    threads: int = 1
    subtract: str = "empirical"
    th_convention: str = "default"
    out_dir: str = None
    batch_range: tuple = None      # (lo, hi) half-open batch subset, for resume

    def __post_init__(self):
        if self.ensemble not in (CUE, GUE):
            raise ConfigError(f"ensemble must be cue or gue, got {self.ensemble!r}")
        if self.dim < 1:
            raise ConfigError("dim must be >= 1")
        if self.n_sim < self.batches or self.batches < 2:
            raise ConfigError("need n_sim >= batches >= 2")
        if self.n_max not in (1, 2, 3, 4):
            raise ConfigError("n_max must be 1..4")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.subtract not in ("empirical", "analytic"):
            raise ConfigError("subtract must be empirical or analytic")
        if self.th_convention not in ("default", "2d"):
            raise ConfigError("th-convention must be default or 2d")
        if self.times is None and self.tau_max is None:
            raise ConfigError("specify either explicit times or tau_max")
        if self.batch_range is not None:
            lo, hi = self.batch_range
            if not 0 <= lo < hi <= self.batches:
                raise ConfigError(f"batch_range {self.batch_range} outside [0, {self.batches}]")

    def identity(self) -> dict:
        """The fields that determine the accumulated sums (for snapshot matching)."""
        grid = build_grid(self)
        return {
            "ensemble": self.ensemble,
            "dim": self.dim,
            "n_sim": self.n_sim,
            "seed": self.seed,
            "n_max": self.n_max,
            "batches": self.batches,
            "th_convention": self.th_convention,
            "times": [float(t) for t in grid.times],
        }


def build_grid(cfg: RunConfig) -> TimeGrid:
    """Evaluation times from the config: explicit list, or a tau range."""
    if cfg.times is not None:
        times = np.asarray(cfg.times, dtype=float)
    else:
        th = heisenberg_time(cfg.ensemble, cfg.dim, cfg.th_convention)
        if cfg.ensemble == CUE:
            t_hi = max(1, round(cfg.tau_max * cfg.dim))
            if cfg.n_times is None:
                times = np.arange(1, t_hi + 1, dtype=float)
            else:
                times = np.unique(np.round(np.linspace(1, t_hi, cfg.n_times)))
        else:
            n = cfg.n_times if cfg.n_times is not None else 40
            lo = cfg.tau_min if cfg.tau_min is not None else 0.05
            times = np.linspace(lo * th, cfg.tau_max * th, n)
        if cfg.include_t0:
            times = np.concatenate([[0.0], times])
    return make_grid(cfg.ensemble, times, cfg.dim, cfg.th_convention)


def _fill_batch(acc: MomentAccumulator, spec: EnsembleSpec, b: int, bounds, chunk: int):
    lo, hi = bounds[b]
    i = lo
    while i < hi:
        j = min(i + chunk, hi)
        values = spectra_batch(spec, range(i, j))
        acc.accumulate_block(b, trace_powers(values, acc.grid))
        i = j


def run_accumulate(cfg: RunConfig) -> MomentAccumulator:
    """Execute the configured batches and return the filled accumulator."""
    grid = build_grid(cfg)
    acc = MomentAccumulator(grid, cfg.n_sim, cfg.batches, cfg.n_max)
    spec = EnsembleSpec(cfg.ensemble, cfg.dim, cfg.seed)
    bounds = batch_bounds(cfg.n_sim, cfg.batches)
    chunk = chunk_size_for(cfg.dim)
    lo, hi = cfg.batch_range if cfg.batch_range is not None else (0, cfg.batches)
    todo = range(lo, hi)
    if cfg.threads == 1:
        for b in todo:
            _fill_batch(acc, spec, b, bounds, chunk)
    else:
        # batches touch disjoint accumulator rows, so threads can share acc
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            list(pool.map(lambda b: _fill_batch(acc, spec, b, bounds, chunk), todo))
    return acc


def run_simulate(cfg: RunConfig):
    """Full run: accumulate, finalize, optionally persist CSV and snapshot.

    Returns (table, accumulator, paths) where paths maps artifact names to
    filenames (empty when out_dir is not set).  A partial run (batch_range
    set) persists only the snapshot.
    """
    acc = run_accumulate(cfg)
    complete = bool(np.all(acc.batch_counts > 0))
    table = finalize(acc, cfg.subtract) if complete else None
    paths = {}
    if cfg.out_dir:
        os.makedirs(cfg.out_dir, exist_ok=True)
        snap = os.path.join(cfg.out_dir, "accumulator.json")
        save_snapshot(acc, cfg, snap)
        paths["snapshot"] = snap
        if complete:
            csv = os.path.join(cfg.out_dir, "results.csv")
            write_result_csv(table, cfg, csv)
            paths["csv"] = csv
    return table, acc, paths


# -- CSV ---------------------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def result_header(n_max: int) -> str:
    cols = ["t", "tau"]
    cols += [f"mean_sff{k}" for k in range(1, n_max + 1)]
    cols += [f"se_sff{k}" for k in range(1, n_max + 1)]
    cols += ["mean_u_re", "mean_u_im", "conn2_empirical", "conn2_se",
             "pred_z", "pred_conn2", "pred_sff2"]
    cols += [f"envelope_sff{k}" for k in range(1, n_max + 1)]
    return ",".join(cols)


def write_result_csv(table: MomentTable, cfg: RunConfig, path: str):
    grid = table.grid
    pred = analytics.prediction_curve(cfg.ensemble, grid.times, cfg.dim, cfg.n_sim,
                                      cfg.n_max, cfg.th_convention)
    lines = [f"# {CSV_SCHEMA}", result_header(table.n_max)]
    for j in range(len(grid)):
        row = [grid.times[j], grid.taus[j]]
        row += [table.mean_sff[k, j] for k in range(table.n_max)]
        row += [table.se_sff[k, j] for k in range(table.n_max)]
        row += [table.mean_u[j].real, table.mean_u[j].imag,
                table.conn2_empirical[j], table.conn2_se[j],
                pred.z[j], pred.conn2[j], pred.sff2[j]]
        row += [pred.envelopes[k, j] for k in range(table.n_max)]
        lines.append(",".join(_fmt(x) for x in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_prediction_csv(kind: str, times, dim: int, n_sim: int, n_max: int,
                         convention: str, path: str):
    pred = analytics.prediction_curve(kind, times, dim, n_sim, n_max, convention)
    cols = ["t", "tau", "z", "conn2", "ubar", "sff2", "sff2_universal"]
    cols += [f"moment{k}" for k in range(1, n_max + 1)]
    cols += [f"envelope{k}" for k in range(1, n_max + 1)]
    lines = [f"# {CSV_SCHEMA}", ",".join(cols)]
    for j in range(len(pred.times)):
        row = [pred.times[j], pred.taus[j], pred.z[j], pred.conn2[j], pred.ubar[j],
               pred.sff2[j], pred.sff2_universal[j]]
        row += [pred.moments[k, j] for k in range(n_max)]
        row += [pred.envelopes[k, j] for k in range(n_max)]
        lines.append(",".join(_fmt(x) for x in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


# -- snapshots ----------------------------------------------------------------


def save_snapshot(acc: MomentAccumulator, cfg: RunConfig, path: str):
    payload = {
        "magic": SNAPSHOT_MAGIC,
        "version": SNAPSHOT_VERSION,
        "config": cfg.identity(),
        "grid_kind": acc.grid.kind,
        "heisenberg": acc.grid.heisenberg,
        "batch_counts": acc.batch_counts.tolist(),
        "batch_pow_sums": acc.batch_pow_sums.tolist(),
        "batch_u_re": acc.batch_u_sums.real.tolist(),
        "batch_u_im": acc.batch_u_sums.imag.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_snapshot(path: str):
    """Returns (accumulator, config identity dict)."""
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("magic") != SNAPSHOT_MAGIC:
        raise SnapshotError(f"{path}: not an accumulator snapshot")
    if payload.get("version") != SNAPSHOT_VERSION:
        raise SnapshotError(f"{path}: unsupported snapshot version {payload.get('version')}")
    ident = payload["config"]
    grid = make_grid(ident["ensemble"], np.asarray(ident["times"]), ident["dim"],
                     ident["th_convention"])
    acc = MomentAccumulator(grid, ident["n_sim"], ident["batches"], ident["n_max"])
    acc.batch_counts = np.asarray(payload["batch_counts"], dtype=np.int64)
    acc.batch_pow_sums = np.asarray(payload["batch_pow_sums"], dtype=float)
    acc.batch_u_sums = np.asarray(payload["batch_u_re"], dtype=float) \
        + 1j * np.asarray(payload["batch_u_im"], dtype=float)
    return acc, ident


def merge_snapshots(paths):
    """Merge snapshots of complementary batch ranges of one logical run."""
    if not paths:
        raise SnapshotError("no snapshots to merge")
    acc, ident = load_snapshot(paths[0])
    for p in paths[1:]:
        other, other_ident = load_snapshot(p)
        if other_ident != ident:
            raise SnapshotError(f"{p}: snapshot config does not match {paths[0]}")
        acc.merge(other)
    return acc, ident
