"""Command-line front end: single simulations, the density-cap sweep
experiment, invariant fuzzing, and gantt export.

Every command prints an effective-config header echoing all resolved seeds
and paths, so any output can be regenerated from its log alone.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import statistics
import sys
from dataclasses import dataclass
from pathlib import Path

from ._rat import ZERO, q
from .engine import (
    DeadlineMissError,
    InvariantViolationError,
    MaxPolicy,
    MoraPolicy,
    parse_policy,
    report_to_json_obj,
    run,
    write_trace_csv,
    write_trace_json,
)
from .gantt import render_gantt_svg, render_line_chart_svg
from .model import XSCALE, ModelError, PriorityOrder, load_processor_model
from .schedtest import UnschedulableError, min_processors, validate_offline_speeds
from .workload import (
    GenSpec,
    generate_actual_times,
    generate_taskset,
    hyperperiod,
    load_actual_times,
    load_taskset,
    make_periodic_jobs,
)

__all__ = ["main", "ExperimentConfig", "run_experiment", "validation_instance"]


def _resolve_model(arg):
    name = arg or os.environ.get("MORASIM_MODEL") or "xscale"
    if name.lower() == "xscale":
        return XSCALE, "xscale"
    path = Path(name)
    if not path.exists():
        raise FileNotFoundError(f"processor model file not found: {path}")
    return load_processor_model(path), str(path)


def _header(cmd, **kv):
    pairs = " ".join(f"{k}={v}" for k, v in kv.items())
    print(f"# morasim {cmd} | {pairs}")


# --- simulate -----------------------------------------------------------------


def cmd_simulate(args) -> int:
    try:
        model, model_name = _resolve_model(args.model)
        taskset_path = Path(args.taskset)
        if not taskset_path.exists():
            raise FileNotFoundError(f"task-set file not found: {taskset_path}")
        tasks = load_taskset(taskset_path)
        priority = PriorityOrder.parse(args.priority)
        policy = parse_policy(args.policy, q(args.const_speed) if args.const_speed else None)
        offline_speed = q(args.offline_speed)
        m = args.m if args.m else min_processors(tasks).m
        if args.horizon:
            horizon = q(args.horizon)
        else:
            horizon = q(args.hyperperiods) * hyperperiod(tasks)
        if args.actual:
            actual_path = Path(args.actual)
            if not actual_path.exists():
                raise FileNotFoundError(f"actual-times file not found: {actual_path}")
            actual = load_actual_times(actual_path)
            actual_src = str(actual_path)
        elif args.actual_seed is not None:
            actual = generate_actual_times(tasks, horizon, seed=args.actual_seed)
            actual_src = f"seed:{args.actual_seed}"
        else:
            actual = None
            actual_src = "wcet"
        if args.validate_speeds and isinstance(policy, MoraPolicy):
            if not validate_offline_speeds(tasks, offline_speed, m, model):
                raise ModelError(
                    f"offline speed {offline_speed} fails the density test on m={m}"
                )
        jobs = make_periodic_jobs(tasks, horizon, actual, offline_speed=offline_speed)
    except (OSError, ValueError, KeyError, ModelError) as ex:
        print(f"error: {ex}", file=sys.stderr)
        return 2

    _header(
        "simulate",
        taskset=taskset_path,
        policy=args.policy,
        m=m,
        priority=priority.value,
        horizon=horizon,
        actual=actual_src,
        offline_speed=offline_speed,
        model=model_name,
        check=args.check,
        out=args.out,
    )
    try:
        result = run(
            tasks, jobs, policy, model, m=m, horizon=horizon,
            priority=priority, check=args.check,
        )
        reference = result.report.total
        if not isinstance(policy, MaxPolicy) and not args.no_reference:
            reference = run(
                tasks, jobs, MaxPolicy(), model, m=m, horizon=horizon,
                priority=priority, record_events=False,
            ).report.total
        report = result.report.normalized_against(reference)
    except DeadlineMissError as ex:
        print(f"deadline miss: {ex}", file=sys.stderr)
        return 1

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_trace_json(result.trace, f"{out}.trace.json")
    write_trace_csv(result.trace, f"{out}.trace.csv")
    with open(f"{out}.report.json", "w", encoding="utf-8") as fh:
        json.dump(report_to_json_obj(report), fh, indent=2)
        fh.write("\n")
    print(f"total energy: {report.total} uJ ({float(report.total) / 1000:.3f} mJ)")
    print(f"normalized vs max: {float(report.normalized_pct):.4f} %")
    print(f"wrote {out}.trace.json {out}.trace.csv {out}.report.json")
    if result.violations:
        print(f"{len(result.violations)} invariant violations:", file=sys.stderr)
        for v in result.violations[:20]:
            print(f"  {v}", file=sys.stderr)
        return 1
    return 0


# --- experiment ------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    dmax_values: tuple
    sets_per_band: int
    band_max: object
    band_width: object
    hyperperiods: int
    priority: PriorityOrder
    seed: object
    offline_speed: object
    model_arg: str

    def __post_init__(self):
        if self.sets_per_band < 1:
            raise ModelError("sets-per-band must be at least 1")
        if not self.dmax_values:
            raise ModelError("need at least one density cap value")
        if self.band_width <= ZERO or self.band_max <= ZERO:
            raise ModelError("band geometry must be positive")
        if self.hyperperiods < 1:
            raise ModelError("hyperperiods must be at least 1")


def _experiment_one(payload):
    """One task set: generate, size, run both policies on identical actual
    times. Returns a plain dict (picklable for worker pools)."""
    (dmax_str, band_idx, set_idx, master, width_str, hyperperiods,
     priority_name, model_arg, offline_speed_str) = payload
    model, _ = _resolve_model(model_arg)
    priority = PriorityOrder(priority_name)
    dmax = q(dmax_str)
    width = q(width_str)
    seed_str = f"{master}:{dmax_str}:{band_idx}:{set_idx}"
    out = {"dmax": dmax_str, "seed": seed_str}
    try:
        band_lo = band_idx * width
        spec = GenSpec(band=(band_lo, band_lo + width), density_cap=dmax, seed=seed_str)
        tasks = generate_taskset(spec)
        m = min_processors(tasks).m
        horizon = hyperperiods * hyperperiod(tasks)
        actual = generate_actual_times(tasks, horizon, seed=f"{seed_str}:actual")
        offline_speed = q(offline_speed_str)
        jobs_max = make_periodic_jobs(tasks, horizon, actual)
        res_max = run(tasks, jobs_max, MaxPolicy(), model, m=m, horizon=horizon,
                      priority=priority, record_events=False)
        jobs_mora = make_periodic_jobs(tasks, horizon, actual, offline_speed=offline_speed)
        res_mora = run(tasks, jobs_mora, MoraPolicy(), model, m=m, horizon=horizon,
                       priority=priority, record_events=False)
        out["pct"] = float(q(100) * res_mora.report.total / res_max.report.total)
        out["ratio"] = m / len(tasks)
        out["n"] = len(tasks)
        out["m"] = m
    except (UnschedulableError, DeadlineMissError, ModelError) as ex:
        out["error"] = f"{type(ex).__name__}: {ex}"
    return out


def run_experiment(config: ExperimentConfig, out_dir, svg=True, workers=1, progress=None):
    """Sweep density caps over all bands; returns (aggregates, failures).

    aggregates: {dmax_str: {"pct": [..], "ratio": [..]}}, insertion-ordered
    by the dmax list; results are keyed by seed and sorted, so worker
    scheduling cannot change the output."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    n_bands = 0
    band_lo = ZERO
    while band_lo + config.band_width <= config.band_max:
        n_bands += 1
        band_lo = n_bands * config.band_width
    payloads = [
        (dmax_str, band_idx, set_idx, config.seed, str(config.band_width),
         config.hyperperiods, config.priority.value, config.model_arg,
         str(config.offline_speed))
        for dmax_str in config.dmax_values
        for band_idx in range(n_bands)
        for set_idx in range(config.sets_per_band)
    ]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_experiment_one, payloads, chunksize=8))
    else:
        results = []
        for i, payload in enumerate(payloads):
            results.append(_experiment_one(payload))
            if progress and (i + 1) % progress == 0:
                print(f"  ... {i + 1}/{len(payloads)} sets done", flush=True)
    results.sort(key=lambda r: r["seed"])
    aggregates = {d: {"pct": [], "ratio": []} for d in config.dmax_values}
    failures = []
    for r in results:
        if "error" in r:
            failures.append(r)
        else:
            aggregates[r["dmax"]]["pct"].append(r["pct"])
            aggregates[r["dmax"]]["ratio"].append(r["ratio"])

    cons_path = out_dir / "consumption.csv"
    with open(cons_path, "w", encoding="utf-8") as fh:
        fh.write("Dmax,policy,mean_pct,stddev_pct,n_sets\n")
        for d in config.dmax_values:
            pcts = aggregates[d]["pct"]
            if not pcts:
                continue
            sd = statistics.stdev(pcts) if len(pcts) > 1 else 0.0
            fh.write(f"{d},max,100,0,{len(pcts)}\n")
            fh.write(f"{d},mora,{statistics.mean(pcts):.6f},{sd:.6f},{len(pcts)}\n")
    ratio_path = out_dir / "ratio.csv"
    with open(ratio_path, "w", encoding="utf-8") as fh:
        fh.write("Dmax,mean_m_over_n\n")
        for d in config.dmax_values:
            ratios = aggregates[d]["ratio"]
            if ratios:
                fh.write(f"{d},{statistics.mean(ratios):.6f}\n")
    if svg:
        pts_pct = [
            (float(q(d)), statistics.mean(v["pct"]))
            for d, v in aggregates.items()
            if v["pct"]
        ]
        pts_ratio = [
            (float(q(d)), statistics.mean(v["ratio"]))
            for d, v in aggregates.items()
            if v["ratio"]
        ]
        (out_dir / "consumption.svg").write_text(
            render_line_chart_svg(
                [("mora", pts_pct), ("max", [(x, 100.0) for x, _ in pts_pct])],
                "Mean consumption vs max (%)",
                "per-task density cap",
                "% of max",
            )
        )
        (out_dir / "ratio.svg").write_text(
            render_line_chart_svg(
                [("m/n", pts_ratio)],
                "Mean processors per task",
                "per-task density cap",
                "m/n",
            )
        )
    return aggregates, failures


def cmd_experiment(args) -> int:
    try:
        config = ExperimentConfig(
            dmax_values=tuple(s.strip() for s in args.dmax.split(",") if s.strip()),
            sets_per_band=args.sets_per_band,
            band_max=q(args.band_max),
            band_width=q(args.band_width),
            hyperperiods=args.hyperperiods,
            priority=PriorityOrder.parse(args.priority),
            seed=args.seed,
            offline_speed=q(args.offline_speed),
            model_arg=args.model or "xscale",
        )
        for d in config.dmax_values:
            q(d)
    except (ModelError, ValueError, TypeError) as ex:
        print(f"error: {ex}", file=sys.stderr)
        return 2
    _header(
        "experiment",
        dmax=args.dmax,
        sets_per_band=config.sets_per_band,
        band_max=config.band_max,
        band_width=config.band_width,
        hyperperiods=config.hyperperiods,
        priority=config.priority.value,
        seed=config.seed,
        offline_speed=config.offline_speed,
        model=config.model_arg,
        out_dir=args.out_dir,
        workers=args.workers,
    )
    aggregates, failures = run_experiment(
        config, args.out_dir, svg=not args.no_svg, workers=args.workers,
        progress=args.progress,
    )
    for d in config.dmax_values:
        pcts = aggregates[d]["pct"]
        ratios = aggregates[d]["ratio"]
        if pcts:
            print(
                f"Dmax={d}: mora={statistics.mean(pcts):.2f}% of max, "
                f"m/n={statistics.mean(ratios):.3f}, n_sets={len(pcts)}"
            )
    if failures:
        print(f"{len(failures)} sets failed and were skipped:")
        for r in failures[:10]:
            print(f"  seed {r['seed']}: {r['error']}")
    print(f"wrote {Path(args.out_dir) / 'consumption.csv'} and {Path(args.out_dir) / 'ratio.csv'}")
    return 0


# --- gantt -------------------------------------------------------------------------


def cmd_gantt(args) -> int:
    try:
        path = Path(args.trace)
        if not path.exists():
            raise FileNotFoundError(f"trace file not found: {path}")
        try:
            with open(path, "r", encoding="utf-8") as fh:
                obj = json.load(fh)
        except ValueError as ex:
            raise ValueError(f"{path}: {ex}") from None
        if not isinstance(obj, dict) or "intervals" not in obj:
            raise ValueError(f"{path} does not look like a trace export")
        svg = render_gantt_svg(obj)
    except (OSError, ValueError, KeyError) as ex:
        print(f"error: {ex}", file=sys.stderr)
        return 2
    _header("gantt", trace=args.trace, out=args.out)
    Path(args.out).write_text(svg)
    print(f"wrote {args.out}")
    return 0


# --- validate ------------------------------------------------------------------------


def validation_instance(seed, n_max=8, m_max=4, priority=PriorityOrder.EDF):
    """Seeded random instance within the fuzzing envelope: up to n_max tasks,
    processor count from the density sizing capped at m_max, horizon two
    hyperperiods, actual times uniform in [C/10, C]."""
    rng = random.Random(f"validate:{seed}")
    for attempt in range(200):
        lo = q(rng.randrange(10, 230), 100)
        cap = q(rng.randrange(25, 101), 100)
        try:
            spec = GenSpec(
                band=(lo, lo + q(5, 100)),
                density_cap=cap,
                seed=f"vt:{seed}:{attempt}",
            )
            tasks = generate_taskset(spec)
            if len(tasks) > n_max:
                continue
            m = min_processors(tasks).m
        except (UnschedulableError, ModelError):
            continue
        if m > m_max:
            continue
        horizon = 2 * hyperperiod(tasks)
        actual = generate_actual_times(tasks, horizon, seed=f"va:{seed}:{attempt}")
        jobs = make_periodic_jobs(tasks, horizon, actual)
        return tasks, jobs, m, horizon
    raise ModelError(f"could not build a validation instance for seed {seed}")


def cmd_validate(args) -> int:
    try:
        model, model_name = _resolve_model(args.model)
        priority = PriorityOrder.parse(args.priority)
    except (OSError, ModelError) as ex:
        print(f"error: {ex}", file=sys.stderr)
        return 2
    _header(
        "validate",
        runs=args.runs,
        seed=args.seed,
        n_max=args.n_max,
        m_max=args.m_max,
        priority=priority.value,
        model=model_name,
    )
    counts = {}
    bad_seeds = []
    for i in range(args.runs):
        seed = f"{args.seed}:{i}"
        tasks, jobs, m, horizon = validation_instance(
            seed, n_max=args.n_max, m_max=args.m_max, priority=priority
        )
        try:
            res = run(
                tasks, jobs, MoraPolicy(), model, m=m, horizon=horizon,
                priority=priority, check="collect", record_events=False,
            )
            violations = res.violations
        except DeadlineMissError:
            violations = [None]
            counts["deadline_miss"] = counts.get("deadline_miss", 0) + 1
        except InvariantViolationError:
            violations = [None]
            counts["hard_invariant_error"] = counts.get("hard_invariant_error", 0) + 1
        for v in violations:
            if v is not None:
                counts[v.invariant] = counts.get(v.invariant, 0) + 1
        if violations:
            bad_seeds.append(seed)
    print(f"checked {args.runs} instances")
    if not counts:
        print("violations: none")
        return 0
    for name in sorted(counts):
        print(f"violations[{name}] = {counts[name]}")
    print(f"reproducer seeds: {', '.join(bad_seeds[:10])}")
    return 1


# --- argument parsing -------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="morasim",
        description="Dual-schedule DVFS scheduling simulator with online slack reclamation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one simulation and export trace + energy report")
    p.add_argument("--taskset", required=True, help="task-set JSON file")
    p.add_argument("--policy", default="mora", choices=["max", "const", "mora"])
    p.add_argument("--const-speed", default=None, help="speed for the const policy (decimal)")
    p.add_argument("--offline-speed", default="1", help="offline speed for mora (decimal)")
    p.add_argument("--m", type=int, default=None, help="processors (default: density sizing)")
    p.add_argument("--priority", default="edf", choices=["edf", "dm"])
    p.add_argument("--horizon", default=None, help="simulation horizon in ms (decimal)")
    p.add_argument("--hyperperiods", type=int, default=1, help="horizon as hyperperiod count")
    p.add_argument("--actual", default=None, help="actual-times JSON file")
    p.add_argument("--actual-seed", type=int, default=None, help="generate actual times")
    p.add_argument("--model", default=None, help="processor model JSON or 'xscale'")
    p.add_argument("--check", default="collect", choices=["off", "collect", "raise"])
    p.add_argument("--validate-speeds", action="store_true",
                   help="require the offline speeds to pass the density test")
    p.add_argument("--no-reference", action="store_true",
                   help="skip the reference run used for the normalized percentage")
    p.add_argument("--out", default="sim", help="output path prefix")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("experiment", help="density-cap sweep comparing mora against max")
    p.add_argument("--dmax", default="0.1,0.4,0.7,1.0", help="comma-separated density caps")
    p.add_argument("--sets-per-band", type=int, default=20)
    p.add_argument("--band-max", default="3.0", help="largest band upper edge (total density)")
    p.add_argument("--band-width", default="0.05")
    p.add_argument("--hyperperiods", type=int, default=5)
    p.add_argument("--priority", default="edf", choices=["edf", "dm"])
    p.add_argument("--seed", default="0")
    p.add_argument("--offline-speed", default="1")
    p.add_argument("--model", default=None)
    p.add_argument("--out-dir", default="experiment_out")
    p.add_argument("--no-svg", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--progress", type=int, default=0, help="print progress every N sets")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("gantt", help="render a trace JSON as a dual-schedule SVG")
    p.add_argument("--trace", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gantt)

    p = sub.add_parser("validate", help="fuzz random instances with invariant checking on")
    p.add_argument("--runs", type=int, default=200)
    p.add_argument("--seed", default="0")
    p.add_argument("--n-max", type=int, default=8)
    p.add_argument("--m-max", type=int, default=4)
    p.add_argument("--priority", default="edf", choices=["edf", "dm"])
    p.add_argument("--model", default=None)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
