"""Ensemble experiments: instance sets, all drivers, metrics, gap studies and aggregates."""
from __future__ import annotations

import csv
import json
import logging
import math
import platform
import statistics
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Iterator

import numpy as np

from .circuits import build_circuit, run
from .errors import InvalidParameterError, NumericalError, ResourceLimitError
from .instances import (RfimInstance, assign_fields, gen_erdos_renyi, gen_watts_strogatz)
from .metrics import METRICS_COLUMNS, brute_force_ground, evaluate
from .schedule import Driver, ScheduleParams
from .spectral import gap_profile, runtime_estimate
from .statevector import EXACT, exact_distribution, sample

log = logging.getLogger(__name__)

RUNS_SCHEMA = "# rfox-runs v1"
SUMMARY_SCHEMA = "# rfox-summary v1"
GAP_SUMMARY_SCHEMA = "# rfox-gap-summary v1"
SUMMARY_METRICS = ("cost_diff", "eev", "hamming")
SUMMARY_COLUMNS = ("family", "n", "field_range", "driver", "completed", "failed") + tuple(
    f"{stat}_{m}" for m in SUMMARY_METRICS for stat in ("mean", "median"))
GAP_SUMMARY_COLUMNS = ("instance_id", "driver", "n_edges", "delta_min", "argmin_k",
                       "delta_min_interior", "spread", "runtime_estimate", "runtime_ratio_vs_rfox")

FAMILIES = {"erdos_renyi": 1, "watts_strogatz": 2}
_FAMILY_TAGS = {"erdos_renyi": "er", "watts_strogatz": "ws"}
_ALIASES = {"er": "erdos_renyi", "ws": "watts_strogatz"}


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines an ensemble run.

    ``model_params`` holds ``p_edge`` for Erdos-Renyi graphs or ``k`` and
    ``p_rewire`` for Watts-Strogatz graphs.  ``shots`` is ``EXACT`` for
    exact output probabilities or a positive integer for sampled records.
    """

    family: str = "erdos_renyi"
    n_values: tuple[int, ...] = (7, 9, 12)
    model_params: dict[str, float] = field(default_factory=lambda: {"p_edge": 0.8})
    field_ranges: tuple[float, ...] = (1.0, 3.0, 5.0)
    instances_per_cell: int = 20
    drivers: tuple[Driver, ...] = tuple(Driver)
    schedule: ScheduleParams = ScheduleParams()
    dt: float = 1.0
    shots: float = EXACT
    master_seed: int = 2024
    timing: bool = False

    def __post_init__(self):
        family = _ALIASES.get(self.family, self.family)
        if family not in FAMILIES:
            raise InvalidParameterError(f"unknown graph family {self.family!r}")
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "field_ranges", tuple(float(r) for r in self.field_ranges))
        object.__setattr__(self, "drivers", tuple(Driver.parse(d) for d in self.drivers))
        object.__setattr__(self, "model_params", dict(self.model_params))
        if not self.n_values or not self.field_ranges or not self.drivers:
            raise InvalidParameterError("n_values, field_ranges and drivers must be non-empty")
        if self.instances_per_cell < 1:
            raise InvalidParameterError("instances_per_cell must be >= 1")
        if any(r <= 0 for r in self.field_ranges):
            raise InvalidParameterError("field ranges must be positive")
        if self.master_seed < 0:
            raise InvalidParameterError("master_seed must be non-negative")
        if self.shots != EXACT and (int(self.shots) != self.shots or self.shots < 1):
            raise InvalidParameterError(f"shots must be a positive integer or exact, got {self.shots}")
        if not self.dt > 0:
            raise InvalidParameterError(f"dt must be positive, got {self.dt}")
        needed = {"erdos_renyi": {"p_edge"}, "watts_strogatz": {"k", "p_rewire"}}[family]
        missing = needed - set(self.model_params)
        if missing:
            raise InvalidParameterError(f"{family} needs model parameters {sorted(missing)}")

    @property
    def tag(self) -> str:
        return _FAMILY_TAGS[self.family]

    def to_dict(self) -> dict[str, Any]:
        return {
            "family": self.family,
            "n_values": list(self.n_values),
            "model_params": self.model_params,
            "field_ranges": list(self.field_ranges),
            "instances_per_cell": self.instances_per_cell,
            "drivers": [d.value for d in self.drivers],
            "delta": self.schedule.delta,
            "p": self.schedule.p,
            "cycles": self.schedule.cycles,
            "dt": self.dt,
            "shots": "exact" if self.shots == EXACT else int(self.shots),
            "master_seed": self.master_seed,
            "timing": self.timing,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentConfig":
        known = {"family", "n_values", "model_params", "field_ranges", "instances_per_cell",
                 "drivers", "delta", "p", "cycles", "dt", "shots", "master_seed", "timing"}
        unknown = set(data) - known
        if unknown:
            raise InvalidParameterError(f"unknown config keys: {', '.join(sorted(unknown))}")
        data = dict(data)
        sched = ScheduleParams(delta=float(data.pop("delta", 1e-3)), p=int(data.pop("p", 100)),
                               cycles=data.pop("cycles", None))
        if "shots" in data:
            data["shots"] = parse_shots(data["shots"])
        for key in ("n_values", "field_ranges", "drivers"):
            if key in data:
                data[key] = tuple(data[key])
        return cls(schedule=sched, **data)


def parse_shots(value) -> float:
    if value in (None, "exact", EXACT):
        return EXACT
    try:
        shots = int(value)
    except (TypeError, ValueError):
        raise InvalidParameterError(f"shots must be an integer or 'exact', got {value!r}") from None
    if shots < 1:
        raise InvalidParameterError(f"shots must be positive, got {shots}")
    return shots


def preset(name: str, full: bool = False) -> ExperimentConfig:
    """Desk-scale ensembles: ER(n, 0.8) or WS(n, 6, 0.7) on n in {7, 9, 12}.

    ``full`` raises the count to 150 instances per cell.
    """
    family = _ALIASES.get(name, name)
    params = {"erdos_renyi": {"p_edge": 0.8},
              "watts_strogatz": {"k": 6, "p_rewire": 0.7}}.get(family)
    if params is None:
        raise InvalidParameterError(f"unknown preset {name!r}; choose er or ws")
    return ExperimentConfig(family=family, model_params=params,
                            instances_per_cell=150 if full else 20)


# -- instance sets ----------------------------------------------------------

@dataclass(frozen=True)
class InstanceSpec:
    instance_id: str
    n: int
    field_range: float
    index: int
    graph_seed: int
    field_seed: int


def instance_seeds(config: ExperimentConfig, n: int, field_range: float,
                   index: int) -> tuple[int, int]:
    """Graph and field seeds derived from the master seed and the cell coordinates."""
    key = [config.master_seed, FAMILIES[config.family], n, int(round(field_range * 1000)), index]
    graph_seed, field_seed = np.random.SeedSequence(key).generate_state(2, dtype=np.uint32)
    return int(graph_seed), int(field_seed)


def iter_instance_specs(config: ExperimentConfig) -> Iterator[InstanceSpec]:
    for n in config.n_values:
        for r in config.field_ranges:
            for i in range(config.instances_per_cell):
                gs, fs = instance_seeds(config, n, r, i)
                yield InstanceSpec(f"{config.tag}-n{n}-r{r:g}-i{i:03d}", n, r, i, gs, fs)


def make_instance(config: ExperimentConfig, spec: InstanceSpec) -> RfimInstance:
    mp = config.model_params
    if config.family == "erdos_renyi":
        graph = gen_erdos_renyi(spec.n, float(mp["p_edge"]), spec.graph_seed)
    else:
        graph = gen_watts_strogatz(spec.n, int(mp["k"]), float(mp["p_rewire"]), spec.graph_seed)
    return assign_fields(graph, spec.field_range, spec.field_seed)


# -- ensemble runs ----------------------------------------------------------

@dataclass
class CellStats:
    family: str
    n: int
    field_range: float
    driver: Driver
    completed: int
    failed: int
    mean: dict[str, float]
    median: dict[str, float]

    def row(self) -> list[str]:
        out = [self.family, str(self.n), repr(self.field_range), self.driver.value,
               str(self.completed), str(self.failed)]
        for m in SUMMARY_METRICS:
            out += [_fmt(self.mean.get(m, math.nan)), _fmt(self.median.get(m, math.nan))]
        return out


@dataclass
class EnsembleSummary:
    cells: list[CellStats]
    trends: dict[str, dict[str, dict[str, float]]]  # driver -> metric -> {slope, intercept}
    failures: int
    rows_written: int

    def cell(self, n: int, field_range: float, driver) -> CellStats:
        driver = Driver.parse(driver)
        for c in self.cells:
            if c.n == n and c.field_range == field_range and c.driver is driver:
                return c
        raise KeyError((n, field_range, driver))

    def to_dict(self) -> dict[str, Any]:
        return {
            "failures": self.failures,
            "rows_written": self.rows_written,
            "cells": [{"family": c.family, "n": c.n, "field_range": c.field_range,
                       "driver": c.driver.value, "completed": c.completed, "failed": c.failed,
                       "mean": c.mean, "median": c.median} for c in self.cells],
            "trends": self.trends,
        }


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list[dict[str, Any]]
    summary: EnsembleSummary
    out_dir: Path | None = None


def run_single(instance: RfimInstance, driver, schedule: ScheduleParams = ScheduleParams(),
               dt: float = 1.0, shots=EXACT, seed: int = 0, gt=None, reference=None):
    """One instance under one driver: returns ``(MetricsReport, distribution)``.

    For sampled runs without an explicit reference the exact output
    distribution of the same circuit is used as the JS reference.
    """
    gt = brute_force_ground(instance) if gt is None else gt
    state = run(build_circuit(driver, instance, schedule, dt))
    dist = sample(state, shots, seed)
    if reference is None and not dist.exact:
        reference = exact_distribution(state)
    return evaluate(instance, dist, gt, reference), dist


def metrics_row(instance_id: str, driver: Driver, schedule: ScheduleParams, shots,
                report, wall_ms: float | None) -> dict[str, Any]:
    return {
        "instance_id": instance_id, "driver": driver.value, "p": schedule.p,
        "delta": schedule.delta, "shots": "exact" if shots == EXACT else int(shots),
        "winner": report.winner, "winner_energy": report.winner_energy, "e_min": report.e_min,
        "cost_diff": report.cost_difference, "eev": report.eev, "hamming": report.hamming_to_gs,
        "f_overlap": report.f_overlap, "d_js": report.d_js, "avg_hamming": report.avg_hamming,
        "wall_time_ms": "" if wall_ms is None else wall_ms,
    }


class _RowWriter:
    """Single writer for the per-run CSV; rows are flushed as they arrive."""

    def __init__(self, path: Path | None):
        self._fh = None
        if path is not None:
            self._fh = open(path, "w", newline="")
            self._fh.write(RUNS_SCHEMA + "\n")
            self._csv = csv.writer(self._fh, lineterminator="\n")
            self._csv.writerow(METRICS_COLUMNS)

    def write(self, row: dict[str, Any]) -> None:
        if self._fh is not None:
            self._csv.writerow([_fmt(row[c]) for c in METRICS_COLUMNS])
            self._fh.flush()

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()


def _ols(ys: list[float]) -> dict[str, float]:
    pts = [(i, y) for i, y in enumerate(ys) if math.isfinite(y)]
    if len(pts) < 2:
        return {"slope": math.nan, "intercept": math.nan}
    slope, intercept = np.polyfit([p[0] for p in pts], [p[1] for p in pts], 1)
    return {"slope": float(slope), "intercept": float(intercept)}


def summarize(config: ExperimentConfig, rows: list[dict[str, Any]],
              failed: dict[tuple, int]) -> EnsembleSummary:
    """Per-cell mean and median plus least-squares trend lines of the medians vs cell index."""
    by_cell: dict[tuple, list[dict]] = {}
    for row in rows:
        n, r = _cell_of(row["instance_id"])
        by_cell.setdefault((n, r, row["driver"]), []).append(row)
    cells = []
    for n in config.n_values:
        for r in config.field_ranges:
            for d in config.drivers:
                done = by_cell.get((n, r, d.value), [])
                mean = {m: statistics.fmean(x[m] for x in done) for m in SUMMARY_METRICS} if done else {}
                med = {m: float(statistics.median(x[m] for x in done)) for m in SUMMARY_METRICS} if done else {}
                cells.append(CellStats(config.family, n, r, d, len(done),
                                       failed.get((n, r, d.value), 0), mean, med))
    trends = {d.value: {m: _ols([c.median.get(m, math.nan) for c in cells if c.driver is d])
                        for m in SUMMARY_METRICS} for d in config.drivers}
    return EnsembleSummary(cells, trends, sum(failed.values()), len(rows))


def _cell_of(instance_id: str) -> tuple[int, float]:
    _, n, r, _ = instance_id.split("-")
    return int(n[1:]), float(r[1:])


def write_manifest(path: Path, command: str, config: dict[str, Any],
                   seeds: dict[str, Any] | None = None) -> None:
    from . import __version__
    import scipy

    manifest = {
        "tool": "rfox", "version": __version__, "command": command, "config": config,
        "seeds": seeds or {},
        "environment": {"python": platform.python_version(), "numpy": np.__version__,
                        "scipy": scipy.__version__},
    }
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def run_experiment(config: ExperimentConfig, out_dir=None,
                   progress: Callable[[str], None] | None = None) -> ExperimentResult:
    """Generate every instance, run every driver, evaluate and aggregate.

    With ``out_dir`` the per-run CSV (``runs.csv``), ``summary.csv``,
    ``summary.json`` and ``manifest.json`` are written there.  Failures of
    single runs are logged and skipped; a resource-limit error aborts the
    ensemble after flushing the rows written so far.
    """
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    specs = list(iter_instance_specs(config))
    if out is not None:
        write_manifest(out / "manifest.json", "bench", config.to_dict(),
                       {s.instance_id: {"graph_seed": s.graph_seed, "field_seed": s.field_seed}
                        for s in specs})
    writer = _RowWriter(out / "runs.csv" if out is not None else None)
    rows: list[dict[str, Any]] = []
    failed: dict[tuple, int] = {}
    try:
        for spec in specs:
            try:
                instance = make_instance(config, spec)
                gt = brute_force_ground(instance)
            except (InvalidParameterError, NumericalError) as exc:
                log.warning("instance %s skipped: %s", spec.instance_id, exc)
                for d in config.drivers:
                    key = (spec.n, spec.field_range, d.value)
                    failed[key] = failed.get(key, 0) + 1
                continue
            for d in config.drivers:
                t0 = time.perf_counter()
                try:
                    report, _ = run_single(instance, d, config.schedule, config.dt, config.shots,
                                           seed=spec.field_seed, gt=gt)
                except (InvalidParameterError, NumericalError, FloatingPointError) as exc:
                    log.warning("run %s/%s failed: %s", spec.instance_id, d.value, exc)
                    key = (spec.n, spec.field_range, d.value)
                    failed[key] = failed.get(key, 0) + 1
                    continue
                wall = (time.perf_counter() - t0) * 1e3 if config.timing else None
                row = metrics_row(spec.instance_id, d, config.schedule, config.shots, report, wall)
                rows.append(row)
                writer.write(row)
            if progress is not None:
                progress(spec.instance_id)
    except ResourceLimitError:
        writer.close()
        raise
    writer.close()
    summary = summarize(config, rows, failed)
    if out is not None:
        write_summary(summary, out)
    return ExperimentResult(config, rows, summary, out)


def write_summary(summary: EnsembleSummary, out: Path) -> None:
    with open(out / "summary.csv", "w", newline="") as fh:
        fh.write(SUMMARY_SCHEMA + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for c in summary.cells:
            w.writerow(c.row())
    (out / "summary.json").write_text(json.dumps(summary.to_dict(), indent=2) + "\n")


# -- gap studies ------------------------------------------------------------

@dataclass
class GapRecord:
    instance_id: str
    driver: Driver
    n_edges: int
    delta_min: float
    argmin_k: int
    delta_min_interior: float  # minimum over k >= 1 (the s = 0 slice excluded)
    spread: float
    runtime: float
    ratio_vs_rfox: float | None = None


@dataclass
class GapStudy:
    records: list[GapRecord]
    delta: float
    flatness_violations: int = 0
    hierarchy_violations: int = 0
    ratio_at_least_10: int = 0
    compared: int = 0

    def for_driver(self, driver) -> list[GapRecord]:
        d = Driver.parse(driver)
        return [r for r in self.records if r.driver is d]


def run_gap_study(config: ExperimentConfig, out_dir=None,
                  progress: Callable[[str], None] | None = None) -> GapStudy:
    """Gap profile of every (instance, driver); summary of minimum gaps and runtime ratios.

    Counts RFOX flatness violations (spread above ``4 delta |E|``) and
    instances where RFOX's minimum gap does not exceed the XX driver's.
    """
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        (out / "gaps").mkdir(parents=True, exist_ok=True)
        write_manifest(out / "manifest.json", "gap", config.to_dict())
    sched = config.schedule
    study = GapStudy([], sched.delta)
    for spec in iter_instance_specs(config):
        instance = make_instance(config, spec)
        per: dict[Driver, GapRecord] = {}
        for d in config.drivers:
            prof = gap_profile(d, instance, sched)
            if out is not None:
                prof.to_csv(out / "gaps" / f"{spec.instance_id}_{d.value}.csv",
                            instance_id=spec.instance_id)
            interior = prof.gaps[1:]
            rec = GapRecord(spec.instance_id, d, len(instance.edges), prof.delta_min,
                            prof.argmin_k,
                            float(interior.min()) if interior.size else prof.delta_min,
                            prof.spread(), runtime_estimate(prof.delta_min))
            per[d] = rec
            study.records.append(rec)
        rfox = per.get(Driver.RFOX)
        if rfox is not None:
            for rec in per.values():
                rec.ratio_vs_rfox = _ratio(rec.runtime, rfox.runtime)
            if rfox.spread > 4 * sched.delta * rfox.n_edges:
                study.flatness_violations += 1
            xx = per.get(Driver.XX)
            if xx is not None:
                study.compared += 1
                if not rfox.delta_min > xx.delta_min:
                    study.hierarchy_violations += 1
                if xx.ratio_vs_rfox >= 10:
                    study.ratio_at_least_10 += 1
        if progress is not None:
            progress(spec.instance_id)
    if out is not None:
        write_gap_summary(study, out / "gap_summary.csv")
    return study


def _ratio(runtime: float, reference: float) -> float:
    if math.isinf(runtime):
        return math.inf if not math.isinf(reference) else math.nan
    return runtime / reference


def write_gap_summary(study: GapStudy, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"{GAP_SUMMARY_SCHEMA} delta={study.delta!r} "
                 f"flatness_violations={study.flatness_violations} "
                 f"hierarchy_violations={study.hierarchy_violations}/{study.compared}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(GAP_SUMMARY_COLUMNS)
        for r in study.records:
            w.writerow([r.instance_id, r.driver.value, r.n_edges, repr(r.delta_min), r.argmin_k,
                        repr(r.delta_min_interior), repr(r.spread), repr(r.runtime),
                        "" if r.ratio_vs_rfox is None else repr(r.ratio_vs_rfox)])


def with_overrides(config: ExperimentConfig, **changes) -> ExperimentConfig:
    """Copy of ``config`` with non-``None`` overrides applied (flags over file)."""
    sched_keys = {"delta", "p", "cycles"}
    sched = {k: changes.pop(k) for k in list(changes) if k in sched_keys and changes[k] is not None}
    changes = {k: v for k, v in changes.items() if v is not None}
    if sched:
        changes["schedule"] = replace(config.schedule, **sched)
    return replace(config, **changes)
