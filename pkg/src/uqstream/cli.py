"""Command line front end.

Subcommands:
  run        one strategy over one stream; writes trace, summary and charts
  sweep      repeated runs across values of p, t or the buffer capacity
  tune       random hyperparameter search scored by full online runs
  toyframes  per-evaluation snapshot charts for datasets with one input
  synth      generate a synthetic dataset CSV

Every artifact-producing subcommand writes a manifest.json that embeds the
fully resolved configuration (seeds included); feeding that manifest back
as --config reproduces the run byte for byte. Exit codes: 0 success, 2 bad
configuration or arguments, 3 runtime fault.
"""

import argparse
import copy
import csv
import hashlib
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, data, svg, tuning
from .config import (
    CSV_SCHEMAS,
    AppConfig,
    ConfigError,
    DatasetSpec,
    load_config,
    to_dict,
    with_run_seed,
)
from .metrics import summarize
from .nn import TrainingFault
from .online import RunFault, run_online
from .seeding import derive_seed
from .strategies import StrategyConfig
from .uncertainty import predict_many

TRACE_COLUMNS = ("iteration", "accepted", "evicted_arrival_index",
                 "incoming_uncertainty", "test_mse", "test_mean_r2",
                 "cumulative_mse", "buffer_fill")


def _resolve_dataset(spec: DatasetSpec, run_seed: int):
    """Build and split the dataset; returns (pinned spec, split, fingerprint)."""
    seed = spec.seed if spec.seed is not None else derive_seed(run_seed, "dataset")
    spec = replace(spec, seed=seed)
    if spec.kind == "sine":
        ds = data.synth_sine(spec.n, x_range=spec.x_range,
                             noise_std=spec.noise_std, seed=seed)
    elif spec.kind == "auv":
        ds = data.synth_auv(spec.n, seed=seed, noise_std=spec.noise_std)
    else:
        ds = data.load_csv(spec.path, CSV_SCHEMAS[spec.csv_schema])
    x, y = ds.arrays()
    digest = hashlib.sha256()
    digest.update(x.tobytes())
    digest.update(y.tobytes())
    sp = data.split(ds)
    if spec.normalize:
        sp = data.normalize(sp)
    return spec, sp, digest.hexdigest()


def _prepare(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = with_run_seed(cfg, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    spec, sp, fingerprint = _resolve_dataset(cfg.dataset, cfg.run.run_seed)
    return replace(cfg, dataset=spec), sp, fingerprint, out


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _write_manifest(out: Path, command: str, cfg: AppConfig, fingerprint: str,
                    outputs) -> None:
    _write_json(out / "manifest.json", {
        "code_version": __version__,
        "command": command,
        "config": to_dict(cfg),
        "dataset_fingerprint": fingerprint,
        "outputs": sorted(outputs),
    })


def _cell(value) -> str:
    # repr keeps the float round-trippable; None becomes an empty field
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def _write_trace(path: Path, records) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for r in records:
            writer.writerow([_cell(getattr(r, c)) for c in TRACE_COLUMNS])


def _clip(values):
    finite = [float(v) for v in values if math.isfinite(v)]
    if len(finite) < 4:
        return None
    hi = 1.5 * float(np.percentile(finite, 95))
    return (0.0, hi) if hi > 0.0 else None


def _trace_charts(trace):
    its = [r.iteration for r in trace]
    mses = [r.test_mse for r in trace]
    mse_chart = svg.Chart(title="test MSE", xlabel="iteration", ylabel="MSE",
                          y_clip=_clip(mses))
    mse_chart.add_line(its, mses)
    r2_chart = svg.Chart(title="test mean R^2", xlabel="iteration", ylabel="R^2",
                         y_clip=(-1.0, 1.05))
    r2_chart.add_line(its, [r.test_mean_r2 for r in trace], color=svg.PALETTE[2])
    cum_chart = svg.Chart(title="cumulative test MSE", xlabel="iteration",
                          ylabel="sum of MSE")
    cum_chart.add_line(its, [r.cumulative_mse for r in trace], color=svg.PALETTE[3])
    unc_chart = svg.Chart(title="incoming uncertainty", xlabel="iteration",
                          ylabel="score",
                          y_clip=_clip([r.incoming_uncertainty for r in trace]))
    accepted = [r for r in trace if r.accepted]
    skipped = [r for r in trace if not r.accepted]
    if accepted:
        unc_chart.add_points([r.iteration for r in accepted],
                             [r.incoming_uncertainty for r in accepted],
                             label="accepted", color=svg.PALETTE[0])
    if skipped:
        unc_chart.add_points([r.iteration for r in skipped],
                             [r.incoming_uncertainty for r in skipped],
                             label="skipped", color=svg.PALETTE[7])
    return [mse_chart, r2_chart, cum_chart, unc_chart]


def _cmd_run(args) -> int:
    cfg, sp, fingerprint, out = _prepare(args)
    trace = run_online(sp.train, sp.test, sp.validation, cfg.run)
    _write_trace(out / "trace.csv", trace)
    summary = summarize(trace)
    _write_json(out / "summary.json", {
        "minimum_mse": summary.minimum_mse,
        "final_mean_r2": summary.final_mean_r2,
        "cumulative_mse": summary.cumulative_mse,
        "dataset_use": summary.dataset_use,
        "iterations": len(trace),
        "accepted_count": sum(1 for r in trace if r.accepted),
    })
    svg.write_svg(out / "curves.svg", _trace_charts(trace), columns=2)
    _write_manifest(out, "run", cfg, fingerprint,
                    ["trace.csv", "summary.json", "curves.svg"])
    print(f"{cfg.run.strategy.kind}: {len(trace)} iterations, "
          f"cumulative MSE {summary.cumulative_mse:.6g}, "
          f"dataset use {summary.dataset_use:.1%}")
    return 0


def _baseline_scores(cfg: AppConfig, sp, kind: str):
    base = replace(cfg.run, strategy=StrategyConfig(kind=kind))
    return [r.incoming_uncertainty
            for r in run_online(sp.train, sp.test, sp.validation, base)]


def _sweep_values(parameter: str, cfg: AppConfig, sp):
    if cfg.sweep.values is not None:
        return cfg.sweep.values
    if parameter == "p":
        return tuple(i / 10.0 for i in range(1, 10))
    if parameter == "buffer_size":
        return (10.0, 20.0, 50.0, 100.0, 200.0, 400.0)
    print("deriving gate values from fifo/firo baseline runs...")
    return tuple(tuning.threshold_candidates(_baseline_scores(cfg, sp, "fifo"),
                                             _baseline_scores(cfg, sp, "firo")))


def _cmd_sweep(args) -> int:
    cfg, sp, fingerprint, out = _prepare(args)
    parameter = "buffer_size" if args.parameter == "buffer" else args.parameter
    values = _sweep_values(parameter, cfg, sp)
    spec = tuning.SweepSpec(parameter, tuple(values), repeats=cfg.sweep.repeats)
    try:
        tuning._cell_config(spec, cfg.run, spec.values[0])
    except ValueError as exc:  # wrong strategy kind for this parameter
        raise ConfigError(str(exc)) from exc
    cells = tuning.sweep(spec, cfg.run, sp, jobs=args.jobs)

    with open(out / "sweep.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["parameter", "value", "repeat", "run_seed", "minimum_mse",
                         "final_mean_r2", "cumulative_mse", "dataset_use", "error"])
        for idx, cell in enumerate(cells):
            rep = idx % spec.repeats
            s = cell.summary
            writer.writerow([
                cell.parameter, _cell(cell.value), rep, cell.run_seed,
                _cell(None if s is None else s.minimum_mse),
                _cell(None if s is None else s.final_mean_r2),
                _cell(None if s is None else s.cumulative_mse),
                _cell(None if s is None else s.dataset_use),
                cell.error or "",
            ])
            if cell.trace is not None:
                cell_dir = out / "cells" / f"{args.parameter}={cell.value:g}_rep{rep}"
                cell_dir.mkdir(parents=True, exist_ok=True)
                _write_trace(cell_dir / "trace.csv", cell.trace)

    ok = [c for c in cells if c.summary is not None]
    cum_chart = svg.Chart(title=f"final cumulative MSE vs {args.parameter}",
                          xlabel=args.parameter, ylabel="cumulative MSE")
    use_chart = svg.Chart(title=f"dataset use vs {args.parameter}",
                          xlabel=args.parameter, ylabel="fraction accepted",
                          y_clip=(0.0, 1.05))
    if ok:
        cum_chart.add_points([c.value for c in ok],
                             [c.summary.cumulative_mse for c in ok], label="repeat")
        use_chart.add_points([c.value for c in ok],
                             [c.summary.dataset_use for c in ok], label="repeat")
        means_x = sorted({c.value for c in ok})
        cum_chart.add_line(means_x,
                           [float(np.mean([c.summary.cumulative_mse for c in ok
                                           if c.value == v])) for v in means_x],
                           label="mean", color=svg.PALETTE[1])
        use_chart.add_line(means_x,
                           [float(np.mean([c.summary.dataset_use for c in ok
                                           if c.value == v])) for v in means_x],
                           label="mean", color=svg.PALETTE[1])
    svg.write_svg(out / "sweep.svg", [cum_chart, use_chart], columns=2)
    _write_manifest(out, "sweep", cfg, fingerprint, ["sweep.csv", "sweep.svg"])
    failed = len(cells) - len(ok)
    print(f"swept {parameter} over {len(spec.values)} values x {spec.repeats} repeats"
          + (f" ({failed} cells failed)" if failed else ""))
    return 0


def _tune_space(cfg: AppConfig, sp) -> tuning.SearchSpace:
    if not cfg.tune.joint:
        return tuning.SearchSpace()
    kind = cfg.run.strategy.kind
    if kind == "riro":
        return tuning.SearchSpace(p_values=tuple(i / 10.0 for i in range(1, 10)))
    if kind in ("threshold", "threshold_greedy"):
        print("deriving gate values from fifo/firo baseline runs...")
        cands = tuning.threshold_candidates(_baseline_scores(cfg, sp, "fifo"),
                                            _baseline_scores(cfg, sp, "firo"))
        return tuning.SearchSpace(t_values=tuple(cands))
    raise ConfigError(
        f"joint tuning needs a strategy with a free parameter, not {kind!r}")


def _candidate_config(cfg: AppConfig, cand: tuning.Candidate) -> AppConfig:
    strategy = cfg.run.strategy
    if cand.p is not None:
        strategy = replace(strategy, p=cand.p)
    if cand.t is not None:
        strategy = replace(strategy, t=cand.t)
    run = replace(
        cfg.run,
        arch=replace(cfg.run.arch, hidden_layer_sizes=cand.hidden_sizes),
        train=replace(cfg.run.train, learning_rate=cand.learning_rate,
                      batch_size=cand.batch_size, patience=cand.patience),
        strategy=strategy,
    )
    return replace(cfg, run=run)


def _cmd_tune(args) -> int:
    cfg, sp, fingerprint, out = _prepare(args)
    space = _tune_space(cfg, sp)
    iterations = min(cfg.tune.iterations, space.size())
    objective = tuning.build_online_objective(cfg.run, sp)
    results = tuning.random_search(space, iterations, objective, cfg.run.run_seed)

    with open(out / "tune.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank", "score", "hidden_layers", "units", "learning_rate",
                         "batch_size", "patience", "p", "t"])
        for rank, (cand, score) in enumerate(results):
            writer.writerow([rank, _cell(score), cand.hidden_layers, cand.units,
                             _cell(cand.learning_rate), cand.batch_size,
                             cand.patience, _cell(cand.p), _cell(cand.t)])
    best, best_score = results[0]
    _write_json(out / "best_config.json", to_dict(_candidate_config(cfg, best)))
    _write_manifest(out, "tune", cfg, fingerprint, ["tune.csv", "best_config.json"])
    print(f"tried {len(results)} candidates; best cumulative MSE {best_score:.6g} "
          f"({best.hidden_layers}x{best.units} units, lr {best.learning_rate:g}, "
          f"batch {best.batch_size}, patience {best.patience})")
    return 0


def _cmd_toyframes(args) -> int:
    cfg, sp, fingerprint, out = _prepare(args)
    if sp.train.input_dim != 1:
        raise ConfigError("toyframes requires a dataset with one input dimension")
    xs = np.array([s.x[0] for s in sp.train.samples])
    grid = np.linspace(xs.min(), xs.max(), 161)[:, None]
    frames: list[str] = []

    def on_iteration(i, est, buffer, record):
        if i % cfg.run.eval_every != 0:
            return
        snapshot = copy.deepcopy(est)  # keep the live prediction stream untouched
        mean, std, _ = predict_many(snapshot, grid)
        chart = svg.Chart(title=f"iteration {i}: test MSE {record.test_mse:.4g}",
                          xlabel="input", ylabel="target")
        chart.add_band(grid[:, 0], mean[:, 0] - 2.0 * std[:, 0],
                       mean[:, 0] + 2.0 * std[:, 0])
        seen = sp.train.samples[:i + 1]
        chart.add_points([s.x[0] for s in seen], [s.y[0] for s in seen],
                         label="stream so far", color=svg.PALETTE[7])
        chart.add_points([s.x[0] for s in buffer.items],
                         [s.y[0] for s in buffer.items],
                         label="buffer", color=svg.PALETTE[1])
        chart.add_line(grid[:, 0], mean[:, 0], label="prediction",
                       color=svg.PALETTE[0])
        name = f"frame_{len(frames):04d}.svg"
        svg.write_svg(out / name, [chart])
        frames.append(name)

    run_online(sp.train, sp.test, sp.validation, cfg.run, on_iteration=on_iteration)
    _write_manifest(out, "toyframes", cfg, fingerprint, frames)
    print(f"wrote {len(frames)} frames to {out}")
    return 0


def _cmd_synth(args) -> int:
    if args.n < 1:
        raise ConfigError("--n must be positive")
    if args.noise_std is not None and args.noise_std < 0:
        raise ConfigError("--noise-std must be nonnegative")
    if args.kind == "sine":
        noise = 0.05 if args.noise_std is None else args.noise_std
        ds = data.synth_sine(args.n, noise_std=noise, seed=args.seed)
        schema = data.SINE_SCHEMA
    else:
        noise = 0.01 if args.noise_std is None else args.noise_std
        ds = data.synth_auv(args.n, seed=args.seed, noise_std=noise)
        schema = data.AUV_SCHEMA
    path = Path(args.out)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    data.write_csv(ds, path, schema)
    print(f"wrote {args.n} samples to {path}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uqstream",
        description="uncertainty-gated online learning on sample streams")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="config JSON or run manifest")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override the configured run seed")

    run_p = sub.add_parser("run", help="stream once and record the trace")
    common(run_p)
    run_p.set_defaults(func=_cmd_run)

    sweep_p = sub.add_parser("sweep", help="repeat runs across parameter values")
    common(sweep_p)
    sweep_p.add_argument("--parameter", choices=("p", "t", "buffer"), required=True)
    sweep_p.add_argument("--jobs", type=int, default=1,
                         help="worker processes for the sweep cells")
    sweep_p.set_defaults(func=_cmd_sweep)

    tune_p = sub.add_parser("tune", help="random search over hyperparameters")
    common(tune_p)
    tune_p.set_defaults(func=_cmd_tune)

    toy_p = sub.add_parser("toyframes", help="snapshot charts for 1-D datasets")
    common(toy_p)
    toy_p.set_defaults(func=_cmd_toyframes)

    synth_p = sub.add_parser("synth", help="generate a synthetic dataset CSV")
    synth_p.add_argument("--kind", choices=("sine", "auv"), required=True)
    synth_p.add_argument("--n", type=int, required=True)
    synth_p.add_argument("--noise-std", type=float, default=None)
    synth_p.add_argument("--seed", type=int, default=0)
    synth_p.add_argument("--out", required=True, help="CSV path to write")
    synth_p.set_defaults(func=_cmd_synth)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (RunFault, TrainingFault, OSError) as exc:
        print(f"fault: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
