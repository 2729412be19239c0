"""Command-line front end: ``foamfit {ingest,fit,eval,sweep,grid,report}``.

Exit status is 0 on success, 1 on invalid data or models and 2 on usage
errors.  ``--seed`` falls back to ``$FOAMFIT_SEED`` and then to 0.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .dataproc import (
    CyclePolicy,
    Curve,
    cycle_average,
    load_dataset,
    read_geometry,
    read_raw_csv,
    reduce,
    split_half_cycles,
    write_curve_csv,
)
from .discovery import (
    evaluate,
    load_model,
    read_report_csv,
    report_rows,
    run_grid,
    save_model,
    select_model,
    term_contributions,
    write_report_csv,
)
from .errors import FoamfitError
from .kinematics import Mode
from .report import MODES
from .training import Architecture, TrainConfig, fit, predict_modes, sparsity_sweep, write_loss_trace

ARCH_CHOICES = [a.cli_name for a in Architecture]
DEFAULT_POLICY = {Mode.TENSION: "tension", Mode.COMPRESSION: "compression", Mode.SHEAR: "all"}


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("FOAMFIT_SEED")
    if env is None or env.strip() == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise FoamfitError(f"FOAMFIT_SEED must be an integer, got {env!r}") from None


def _config(args, **overrides):
    cfg = TrainConfig(
        architecture=Architecture.parse(getattr(args, "arch", "si-mi")),
        alpha=getattr(args, "alpha", 0.0),
        seed=_seed(args),
    )
    if args.epochs is not None:
        warm = args.warm_epochs if args.warm_epochs is not None else min(cfg.warm_epochs, args.epochs)
        cfg = replace(cfg, epochs=args.epochs, warm_epochs=warm)
    elif args.warm_epochs is not None:
        cfg = replace(cfg, warm_epochs=args.warm_epochs)
    return replace(cfg, **overrides)


def _outdir(path):
    d = Path(path)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _fmt(v):
    return repr(float(v))


def _write_rows(path, header, rows):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _observed(data):
    return {"ten": data.tension, "com": data.compression, "shr": data.shear}


def _write_predictions(path, model, data):
    pred = predict_modes(model, data)
    rows = []
    for m, curve in _observed(data).items():
        for x, y, p in zip(curve.x, curve.y, pred[m]):
            rows.append([m, _fmt(x), _fmt(y), _fmt(p), _fmt(p - y)])
    _write_rows(path, ["mode", "x", "observed", "predicted", "residual"], rows)


def _write_contributions(path, model, data):
    rows = []
    for m, (xs, per_term) in term_contributions(model, data).items():
        for tid, stress in per_term.items():
            for x, s in zip(xs, stress):
                rows.append([m, _fmt(x), str(tid), _fmt(s)])
    _write_rows(path, ["mode", "x", "term", "stress_kpa"], rows)


def _print_report(report, out=None):
    out = out or sys.stdout
    r2 = " ".join(f"{m}={report.r2[m]:.3f}" for m in MODES)
    print(f"{report.architecture} alpha={report.alpha:g}: {report.nonzero_terms} non-zero terms, R2 {r2}", file=out)


def _save_fit(outdir, stem, report, data):
    save_model(outdir / f"{stem}.json", report.model, report.architecture, report.alpha, report.r2)
    write_loss_trace(outdir / f"{stem}_loss.csv", report.loss_trace)
    _write_predictions(outdir / f"{stem}_predictions.csv", report.model, data)
    _write_contributions(outdir / f"{stem}_contributions.csv", report.model, data)


# -- subcommands --------------------------------------------------------------


def cmd_ingest(args):
    mode = Mode(args.mode)
    geometry = read_geometry(args.geometry)
    rec = read_raw_csv(args.raw, mode, geometry)
    x, y = reduce(rec)
    halves = split_half_cycles(x, y)
    if not halves:
        raise FoamfitError(f"{args.raw}: recording has fewer than two distinct points")
    policy = args.average
    if policy == "auto":
        policy = "none" if len(halves) == 1 else DEFAULT_POLICY[mode]
    if policy == "none":
        curve = halves[0]
    else:
        reference = 0.0 if mode is Mode.SHEAR else 1.0
        curve = cycle_average(halves, CyclePolicy(policy), reference=reference, n_points=args.points)
    write_curve_csv(args.out, Curve(curve.x, curve.y))
    print(f"{mode.value}: {len(halves)} half-cycle(s), wrote {len(curve)} points to {args.out}")
    return 0


def cmd_fit(args):
    data = load_dataset(args.dataset)
    cfg = _config(args)
    report = fit(cfg, data)
    out = _outdir(args.out)
    stem = f"model_{cfg.architecture.cli_name}"
    _save_fit(out, stem, report, data)
    write_report_csv(out / f"{stem}_report.csv", report_rows([report], data.label))
    _print_report(report)
    print(report.model.render())
    return 0


def cmd_eval(args):
    model = load_model(args.model)
    data = load_dataset(args.dataset)
    r2, _ = evaluate(model, data)
    out = _outdir(args.out)
    _write_rows(out / "metrics.csv", ["mode", "r2"], [[m, _fmt(r2[m])] for m in MODES])
    _write_predictions(out / "residuals.csv", model, data)
    print(" ".join(f"{m}={r2[m]:.3f}" for m in MODES))
    return 0


def _parse_alphas(text):
    try:
        alphas = [float(a) for a in text.split(",") if a.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None
    if not alphas:
        raise argparse.ArgumentTypeError("need at least one alpha")
    return alphas


def cmd_sweep(args):
    data = load_dataset(args.dataset)
    cfg = _config(args, alpha=0.0)
    reports = sparsity_sweep(cfg, data, sorted(args.alphas))
    out = _outdir(args.out)
    for r in reports:
        _save_fit(out, f"model_{cfg.architecture.cli_name}_a{r.alpha:g}", r, data)
        _print_report(r)
    write_report_csv(out / "report.csv", report_rows(reports, data.label))
    return 0


def cmd_grid(args):
    data = load_dataset(args.dataset)
    cfg = _config(args)
    reports = run_grid(data, seed=cfg.seed, config=cfg, workers=args.workers)
    out = _outdir(args.out)
    for r in reports:
        _save_fit(out, f"model_{Architecture(r.architecture).cli_name}_a{r.alpha:g}", r, data)
        _print_report(r)
    write_report_csv(out / "report.csv", report_rows(reports, data.label))
    best = select_model(reports)
    save_model(out / "selected.json", best.model, best.architecture, best.alpha, best.r2)
    print(f"selected: {best.architecture} alpha={best.alpha:g}" + (f" ({best.warning})" if best.warning else ""))
    return 0


def cmd_report(args):
    rows = []
    for path in args.inputs:
        rows.extend(read_report_csv(path))
    write_report_csv(args.out, rows)
    print(f"merged {len(rows)} row(s) into {args.out}")
    return 0


# -- parser -------------------------------------------------------------------


def _add_training(p, alpha=True):
    p.add_argument("--dataset", required=True, help="leap, turbo, a dataset directory or a dataset.txt manifest")
    p.add_argument("--seed", type=int, default=None, help="random seed (default: $FOAMFIT_SEED or 0)")
    p.add_argument("--epochs", type=int, default=None, help="regularized-stage epochs (default 15000)")
    p.add_argument("--warm-epochs", type=int, default=None, help="unregularized warm-start epochs (default 5000)")
    p.add_argument("--out", default=".", help="output directory")
    if alpha:
        p.add_argument("--alpha", type=float, default=0.0)


def build_parser():
    parser = argparse.ArgumentParser(prog="foamfit", description="Sparse hyperelastic model discovery for foams.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="reduce a raw recording to a stretch-stress curve")
    p.add_argument("--mode", required=True, choices=[m.value for m in Mode])
    p.add_argument("--raw", required=True, help="CSV with header t,signal,displacement")
    p.add_argument("--geometry", required=True, help="key=value file (A, L / A, H / R, H)")
    p.add_argument("--average", default="auto", choices=["auto", "none"] + [c.value for c in CyclePolicy])
    p.add_argument("--points", type=int, default=200, help="grid size for cycle averaging")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("fit", help="two-stage fit of one architecture")
    _add_training(p)
    p.add_argument("--arch", default="si-mi", choices=ARCH_CHOICES)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("eval", help="goodness of fit of a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="fits over a list of regularization strengths")
    _add_training(p, alpha=False)
    p.add_argument("--arch", default="si-mi", choices=ARCH_CHOICES)
    p.add_argument("--alphas", type=_parse_alphas, default=[0.0, 1.0], help="comma-separated, e.g. 0,0.1,1")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("grid", help="the six-cell architecture x alpha experiment")
    _add_training(p, alpha=False)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("report", help="merge report CSVs into one table")
    p.add_argument("--inputs", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FoamfitError, OSError) as exc:
        print(f"foamfit {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
