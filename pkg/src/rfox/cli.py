"""Command-line entry point: ``rfox <subcommand> ...``.

Exit codes: 0 success, 1 invalid input, 2 resource limit, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import warnings
from pathlib import Path

from . import __version__
from .bench import (ExperimentConfig, metrics_row, parse_shots, preset, run_experiment,
                    run_gap_study, run_single, with_overrides, write_manifest, _fmt)
from .errors import InvalidParameterError, RfoxError, SchemaError
from .instances import (Graph, assign_fields, gen_erdos_renyi, gen_watts_strogatz,
                        load_instance, save_instance)
from .metrics import METRICS_COLUMNS, brute_force_ground
from .plots import emit_plots
from .schedule import Driver, ScheduleParams
from .spectral import gap_profile, magnus_check, runtime_estimate

log = logging.getLogger("rfox")


def _manifest_beside(out: Path, command: str, config: dict, seeds=None) -> None:
    write_manifest(out.with_name(out.stem + ".manifest.json"), command, config, seeds)


def _schedule(args) -> ScheduleParams:
    return ScheduleParams(delta=args.delta, p=args.p, cycles=args.cycles)


def _add_schedule(p: argparse.ArgumentParser, defaults: bool = True) -> None:
    p.add_argument("--p", type=int, default=100 if defaults else None, help="number of slices")
    p.add_argument("--delta", type=float, default=1e-3 if defaults else None,
                   help="RFOX kick amplitude")
    p.add_argument("--cycles", type=int, default=None,
                   help="envelope periods over the schedule (default: qubit count)")


def cmd_gen(args) -> int:
    if args.family in ("er", "erdos_renyi"):
        graph = gen_erdos_renyi(args.n, args.p_edge, args.seed)
    else:
        graph = gen_watts_strogatz(args.n, args.k, args.p_rewire, args.seed)
    field_seed = args.seed if args.field_seed is None else args.field_seed
    inst = assign_fields(graph, args.field_range, field_seed)
    out = Path(args.out)
    save_instance(inst, out)
    _manifest_beside(out, "gen", vars_clean(args), {"graph_seed": args.seed,
                                                    "field_seed": field_seed})
    print(f"wrote {out} (n={inst.n}, |E|={len(inst.edges)}, id={inst.content_hash()})")
    return 0


def cmd_oracle(args) -> int:
    inst = load_instance(args.instance)
    gt = brute_force_ground(inst, keep_table=False)
    result = {"x_min": gt.x_min, "e_min": gt.e_min, "degeneracy": gt.degeneracy}
    text = json.dumps(result, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
        _manifest_beside(Path(args.out), "oracle", vars_clean(args))
    print(text)
    return 0


def _load_reference(path):
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict) or not data:
        raise SchemaError(f"{path}: expected a non-empty object of bitstring -> weight")
    total = sum(float(v) for v in data.values())
    if total <= 0:
        raise SchemaError(f"{path}: weights must sum to a positive number")
    return {k: float(v) / total for k, v in data.items()}


def cmd_run(args) -> int:
    inst = load_instance(args.instance)
    sched = _schedule(args)
    shots = parse_shots(args.shots)
    reference = _load_reference(args.reference) if args.reference else None
    report, dist = run_single(inst, args.driver, sched, args.dt, shots, args.seed,
                              reference=reference)
    row = metrics_row(args.instance_id or inst.content_hash(), Driver.parse(args.driver),
                      sched, shots, report, None)
    if args.out:
        out = Path(args.out)
        with open(out, "w", newline="") as fh:
            fh.write("# rfox-runs v1\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(METRICS_COLUMNS)
            w.writerow([_fmt(row[c]) for c in METRICS_COLUMNS])
        _manifest_beside(out, "run", vars_clean(args), {"seed": args.seed})
    if args.counts_out:
        Path(args.counts_out).write_text(json.dumps(dist.counts, indent=2, sort_keys=True) + "\n")
    print(json.dumps(row, indent=2))
    return 0


def _config_from(args) -> ExperimentConfig:
    if args.config:
        try:
            base = ExperimentConfig.from_dict(json.loads(Path(args.config).read_text()))
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{args.config}: not valid JSON ({exc})") from exc
    else:
        base = preset(args.preset, full=args.full)
    return with_overrides(
        base,
        n_values=tuple(args.n) if args.n else None,
        field_ranges=tuple(args.field_ranges) if args.field_ranges else None,
        instances_per_cell=args.instances,
        drivers=tuple(args.drivers) if args.drivers else None,
        master_seed=args.master_seed,
        dt=getattr(args, "dt", None),
        shots=parse_shots(args.shots) if getattr(args, "shots", None) else None,
        timing=True if getattr(args, "timing", False) else None,
        delta=args.delta, p=args.p, cycles=args.cycles)


def _progress(enabled: bool):
    return (lambda tag: print(f"  done {tag}", file=sys.stderr)) if enabled else None


def cmd_bench(args) -> int:
    config = _config_from(args)
    result = run_experiment(config, args.out_dir, _progress(args.verbose))
    s = result.summary
    print(f"{s.rows_written} rows, {s.failures} failures -> {args.out_dir}")
    for c in s.cells:
        med = c.median.get("cost_diff", float("nan"))
        print(f"  n={c.n:<3} r={c.field_range:<4g} {c.driver.value:<9} median cost_diff={med:.4g}")
    return 0


def cmd_gap(args) -> int:
    if args.instance:
        inst = load_instance(args.instance)
        sched = _schedule_from_optional(args)
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        drivers = [Driver.parse(d) for d in (args.drivers or list(Driver))]
        tag = args.instance_id or inst.content_hash()
        write_manifest(out / "manifest.json", "gap", vars_clean(args))
        for d in drivers:
            prof = gap_profile(d, inst, sched)
            prof.to_csv(out / f"{tag}_{d.value}.csv", instance_id=tag)
            print(f"{d.value:<9} delta_min={prof.delta_min:.6g} at k={prof.argmin_k} "
                  f"spread={prof.spread():.3g} runtime~{runtime_estimate(prof.delta_min):.4g}")
        return 0
    config = _config_from(args)
    study = run_gap_study(config, args.out_dir, _progress(args.verbose))
    print(f"flatness violations: {study.flatness_violations}; RFOX <= XX minimum gap in "
          f"{study.hierarchy_violations}/{study.compared}; runtime ratio >= 10 in "
          f"{study.ratio_at_least_10}/{study.compared}")
    return 0


def _schedule_from_optional(args) -> ScheduleParams:
    return ScheduleParams(delta=1e-3 if args.delta is None else args.delta,
                          p=100 if args.p is None else args.p, cycles=args.cycles)


def cmd_magnus(args) -> int:
    if args.instance:
        inst = load_instance(args.instance)
    else:
        n = args.path
        graph = Graph(n, tuple((i, i + 1) for i in range(n - 1)),
                      {"model": "path", "params": {"n": n}, "seed": None})
        from .instances import RfimInstance
        inst = RfimInstance(graph, (1.0,) * (n - 1), (0.0,) * n, 1.0, graph.provenance)
    rows = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        for d in args.deltas:
            r = magnus_check(inst, d, n_steps=args.n_steps, cycles=args.cycles)
            rows.append(r)
            print(f"delta={d:<8g} err1={r.err1:.6e} err1/delta={r.err1 / d:.6f} "
                  f"err2={r.err2:.6e} y_coeff={r.y_coeff:+.6e} y_even={r.y_coeff_even:+.6e} "
                  f"step_change={r.step_change:.1e}")
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    print(f"[XX, ZX] == -2i YI exactly: {rows[0].commutator_exact}")
    if args.out:
        out = Path(args.out)
        out.write_text(json.dumps([vars(r) for r in rows], indent=2) + "\n")
        _manifest_beside(out, "magnus-check", vars_clean(args))
    return 0


def cmd_plot(args) -> int:
    for path in emit_plots(args.csv, args.out_dir):
        print(f"wrote {path}")
    return 0


def vars_clean(args) -> dict:
    return {k: v for k, v in vars(args).items() if k not in ("func",)}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rfox", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"rfox {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="progress and log output")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate one RFIM instance file")
    g.add_argument("--family", choices=["er", "ws", "erdos_renyi", "watts_strogatz"], default="er")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--p-edge", type=float, default=0.8)
    g.add_argument("--k", type=int, default=6)
    g.add_argument("--p-rewire", type=float, default=0.7)
    g.add_argument("--field-range", type=float, default=1.0)
    g.add_argument("--seed", type=int, default=0, help="graph seed")
    g.add_argument("--field-seed", type=int, default=None, help="field seed (default: --seed)")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    o = sub.add_parser("oracle", help="brute-force ground state of an instance")
    o.add_argument("instance")
    o.add_argument("--out")
    o.set_defaults(func=cmd_oracle)

    r = sub.add_parser("run", help="simulate one instance under one driver")
    r.add_argument("instance")
    r.add_argument("--driver", default="RFOX", choices=[d.value for d in Driver])
    _add_schedule(r)
    r.add_argument("--dt", type=float, default=1.0, help="baseline Trotter step")
    r.add_argument("--shots", default="exact", help="'exact' or a positive integer")
    r.add_argument("--seed", type=int, default=0, help="sampling seed")
    r.add_argument("--reference", help="JSON bitstring->weight distribution for d_js")
    r.add_argument("--instance-id")
    r.add_argument("--out", help="write the metrics row as CSV")
    r.add_argument("--counts-out", help="write the output distribution as JSON")
    r.set_defaults(func=cmd_run)

    def ensemble_flags(p):
        p.add_argument("--config", help="JSON experiment config; flags override its values")
        p.add_argument("--preset", default="er", choices=["er", "ws"])
        p.add_argument("--full", action="store_true", help="150 instances per cell")
        p.add_argument("--n", type=int, nargs="+")
        p.add_argument("--field-ranges", type=float, nargs="+")
        p.add_argument("--instances", type=int)
        p.add_argument("--drivers", nargs="+", choices=[d.value for d in Driver])
        p.add_argument("--master-seed", type=int)
        _add_schedule(p, defaults=False)
        p.add_argument("--out-dir", required=True)

    b = sub.add_parser("bench", help="full ensemble: all drivers, metrics, summary")
    ensemble_flags(b)
    b.add_argument("--dt", type=float)
    b.add_argument("--shots")
    b.add_argument("--timing", action="store_true", help="fill wall_time_ms")
    b.set_defaults(func=cmd_bench)

    gp = sub.add_parser("gap", help="gap profiles for one instance or an ensemble")
    gp.add_argument("instance", nargs="?")
    gp.add_argument("--instance-id")
    ensemble_flags(gp)
    gp.set_defaults(func=cmd_gap)

    m = sub.add_parser("magnus-check", help="one-period propagator vs effective Hamiltonian")
    m.add_argument("instance", nargs="?")
    m.add_argument("--path", type=int, default=3, help="path-graph size when no instance given")
    m.add_argument("--deltas", type=float, nargs="+", default=[4e-3, 2e-3, 1e-3])
    m.add_argument("--n-steps", type=int, default=2000)
    m.add_argument("--cycles", type=int)
    m.add_argument("--out")
    m.set_defaults(func=cmd_magnus)

    pl = sub.add_parser("plot", help="render SVG charts from gap or summary CSVs")
    pl.add_argument("csv", nargs="+")
    pl.add_argument("--out-dir", required=True)
    pl.set_defaults(func=cmd_plot)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except RfoxError as exc:
        print(f"rfox: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError) as exc:
        print(f"rfox: error: {exc}", file=sys.stderr)
        return InvalidParameterError.exit_code


if __name__ == "__main__":
    sys.exit(main())
