"""Monte Carlo harness and report emission.

Runs batches of single-POI searches against randomly drawn worlds,
aggregates the three normalized cost metrics (P / ceil(log2 n), D / n,
R / ceil(log2 n)) into summary rows mirroring the published comparison
table, and writes CSV table plus histogram plot data.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .geometry import Point2
from .placements import LayerPlacement, execution_layer, generate_layer, load_placement
from .simulator import run_batch
from .verifier import distance_bound, probe_coefficient, response_bound

__all__ = [
    "ExperimentConfig",
    "StatsRow",
    "sample_poi",
    "monte_carlo",
    "emit_report",
    "run_experiment",
]

_KNOWN = tuple(f"ALG{i}" for i in range(1, 9))
_METRICS = ("P", "D", "R")
_TOL = 1e-9
_HIST_BINS = 64


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one Monte Carlo campaign."""

    n: float = 2.0 ** 20
    trials: int = 100_000
    algorithms: tuple[str, ...] = tuple(f"ALG{i}" for i in range(1, 7))
    seed: int = 0
    poi_distribution: str = "uniform-angle-uniform-radius"
    output_dir: str | None = None
    placement_files: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if not self.algorithms:
            raise ValueError("no algorithms selected")
        for a in self.algorithms:
            if a not in _KNOWN:
                raise ValueError(f"unknown algorithm {a!r}")
        if self.poi_distribution != "uniform-angle-uniform-radius":
            raise ValueError(
                f"unknown POI distribution {self.poi_distribution!r}")


@dataclass(frozen=True)
class StatsRow:
    """One summary line: an algorithm crossed with one normalized metric.

    ``slack`` is the documented allowance above the asymptotic bound for
    the probe metric (a final partial layer can issue up to m - 2 extra
    probes, and the executed tour may locally exceed the analysis
    coefficient).
    """

    algorithm: str
    metric: str
    min: float
    avg: float
    max: float
    stddev: float
    bound: float
    slack: float = 0.0

    def __post_init__(self) -> None:
        if self.metric not in _METRICS:
            raise ValueError(f"unknown metric {self.metric!r}")
        if not (self.min <= self.avg + _TOL and self.avg <= self.max + _TOL):
            raise ValueError("summary ordering violated: min <= avg <= max")
        if self.max > self.bound + self.slack + _TOL:
            raise ValueError(
                f"{self.algorithm} {self.metric}: observed max {self.max} "
                f"exceeds bound {self.bound} + slack {self.slack}")


def sample_poi(rng: np.random.Generator, n: float) -> Point2:
    """One POI position: uniform angle and uniform distance from the
    center (the radial coordinate, not the area, is uniform)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    angle = rng.uniform(0.0, 2.0 * math.pi)
    dist = rng.uniform(0.0, n)
    return Point2(dist * math.cos(angle), dist * math.sin(angle))


def _poi_array(seed: int, trials: int, n: float) -> np.ndarray:
    """Per-trial POIs from splittable streams: trial i draws from the
    generator spawned at key (i,), so serial and parallel runs agree."""
    out = np.empty((trials, 2))
    root = np.random.SeedSequence(entropy=seed)
    for i, ss in enumerate(root.spawn(trials)):
        p = sample_poi(np.random.default_rng(ss), n)
        out[i, 0] = p.x
        out[i, 1] = p.y
    return out


def _placement_for(algorithm: str,
                   config: ExperimentConfig) -> LayerPlacement:
    if algorithm in config.placement_files:
        return load_placement(config.placement_files[algorithm])
    if algorithm in ("ALG7", "ALG8"):
        raise ValueError(
            f"{algorithm} placements are produced by the optimizer; "
            "pass a placement file")
    return generate_layer(algorithm)


def _rows_for(algorithm: str, placement: LayerPlacement, n: float,
              samples: dict[str, np.ndarray]) -> list[StatsRow]:
    executed = execution_layer(placement)
    logn = math.ceil(math.log2(n))
    c_table = probe_coefficient(placement)
    c_exec = probe_coefficient(executed)
    # finite-n allowance: every layer satisfies probes <= c * levels, and
    # the level total overshoots log2 n by at most one layer's largest
    # drop, so P <= c_eff * (log2 n + L_max) with c_eff the worse of the
    # analysis and executed-tour coefficients
    c_eff = max(c_table, c_exec)
    l_max = max(-math.log2(p.rho) for p in executed.probes)
    c_resp = response_bound(placement)
    bounds = {"P": c_table, "D": distance_bound(executed), "R": c_resp}
    # responses overshoot the same way: the level total of the responding
    # layers can exceed log2 n by one layer's largest drop
    slacks = {"P": c_eff * (1.0 + l_max / logn) - c_table,
              "D": 0.0, "R": c_resp * l_max / logn}
    rows = []
    for metric in _METRICS:
        vals = samples[metric]
        rows.append(StatsRow(
            algorithm=algorithm,
            metric=metric,
            min=float(vals.min()),
            avg=float(vals.mean()),
            max=float(vals.max()),
            stddev=float(vals.std()),
            bound=bounds[metric],
            slack=slacks[metric],
        ))
    return rows


def monte_carlo(config: ExperimentConfig,
                collect_samples: dict | None = None) -> list[StatsRow]:
    """Summary rows for every configured algorithm.

    Each trial places one POI by ``sample_poi`` and runs the single-POI
    search (vectorized); all algorithms see the same worlds.  Placements
    must be certified.  When ``collect_samples`` is given, the raw
    normalized per-trial arrays are stored into it keyed by
    (algorithm, metric), for histogram emission.
    """
    poi = _poi_array(config.seed, config.trials, config.n)
    logn = math.ceil(math.log2(config.n))
    rows: list[StatsRow] = []
    for algorithm in config.algorithms:
        placement = _placement_for(algorithm, config)
        if not placement.certified:
            raise ValueError(f"placement for {algorithm} is not certified")
        out = run_batch(execution_layer(placement), config.n, poi)
        if placement.coverage == "disk":
            if out["lost"].any() or not out["success"].all():
                raise RuntimeError(
                    f"{algorithm}: search failed on a certified placement")
        samples = {"P": out["P"] / logn, "D": out["D"] / config.n,
                   "R": out["R"] / logn}
        rows.extend(_rows_for(algorithm, placement, config.n, samples))
        if collect_samples is not None:
            for metric in _METRICS:
                collect_samples[(algorithm, metric)] = samples[metric]
    return rows


# ---------------------------------------------------------------------------
# Report emission
# ---------------------------------------------------------------------------

_TABLE_COLUMNS = (
    ("P", "min"), ("P", "avg"), ("P", "max"), ("P", "bound"),
    ("D", "min"), ("D", "avg"), ("D", "max"), ("D", "bound"),
    ("R", "avg"), ("R", "max"), ("R", "bound"),
)


def _cell(row: StatsRow, stat: str) -> float:
    return getattr(row, stat if stat != "bound" else "bound")


def bold_best(rows: Sequence[StatsRow]) -> set[tuple[str, str, str]]:
    """(algorithm, metric, stat) of the best (lowest) value per table
    column, mirroring the published bold highlighting."""
    best: set[tuple[str, str, str]] = set()
    for metric, stat in _TABLE_COLUMNS:
        cells = [(r.algorithm, _cell(r, stat)) for r in rows
                 if r.metric == metric]
        if not cells:
            continue
        low = min(v for _, v in cells)
        for alg, v in cells:
            if abs(v - low) <= 0.005:
                best.add((alg, metric, stat))
    return best


def emit_report(rows: Sequence[StatsRow], output_dir: str | Path,
                samples: Mapping[tuple[str, str], np.ndarray] | None = None,
                ) -> list[Path]:
    """Write ``table.csv`` (comparison-table layout, best cells wrapped
    in ``**``) and, when raw samples are given, one histogram CSV per
    metric with per-bin counts plus mean and stddev footer rows."""
    if not rows:
        raise ValueError("no rows to report")
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    algorithms = list(dict.fromkeys(r.algorithm for r in rows))
    by_key = {(r.algorithm, r.metric): r for r in rows}
    best = bold_best(rows)

    table = out / "table.csv"
    with table.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["algorithm"] +
                        [f"{m}_{s}" for m, s in _TABLE_COLUMNS])
        for alg in algorithms:
            line: list[str] = [alg]
            for metric, stat in _TABLE_COLUMNS:
                row = by_key[(alg, metric)]
                text = f"{_cell(row, stat):.4f}"
                if (alg, metric, stat) in best:
                    text = f"**{text}**"
                line.append(text)
            writer.writerow(line)
    written.append(table)

    if samples:
        for metric in _METRICS:
            algs = [a for a in algorithms if (a, metric) in samples]
            if not algs:
                continue
            hi = max(max(float(samples[(a, metric)].max()),
                         by_key[(a, metric)].bound) for a in algs)
            edges = np.linspace(0.0, hi * (1.0 + 1e-12), _HIST_BINS + 1)
            counts = {a: np.histogram(samples[(a, metric)], bins=edges)[0]
                      for a in algs}
            path = out / f"hist_{metric}.csv"
            with path.open("w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["bin_lo", "bin_hi"] + algs)
                for b in range(_HIST_BINS):
                    writer.writerow(
                        [f"{edges[b]:.6f}", f"{edges[b + 1]:.6f}"]
                        + [int(counts[a][b]) for a in algs])
                writer.writerow(["mean", ""] +
                                [f"{samples[(a, metric)].mean():.6f}"
                                 for a in algs])
                writer.writerow(["stddev", ""] +
                                [f"{samples[(a, metric)].std():.6f}"
                                 for a in algs])
            written.append(path)
    return written


def run_experiment(config: ExperimentConfig) -> list[Path]:
    """Full campaign: Monte Carlo plus report files in
    ``config.output_dir`` (which must be set)."""
    if config.output_dir is None:
        raise ValueError("config.output_dir is required")
    samples: dict[tuple[str, str], np.ndarray] = {}
    rows = monte_carlo(config, collect_samples=samples)
    return emit_report(rows, config.output_dir, samples)
