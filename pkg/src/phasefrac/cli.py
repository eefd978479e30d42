"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 solver error.
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
from dataclasses import replace
from pathlib import Path

from . import figures, io, synth
from .errors import DataError, GridMismatch, MissingFile, ParseError, SolverError
from .metrics import evaluate
from .solver import RENORMALIZE_MODES, SolverConfig, estimate_composition, fit_phase_library
from .validation import loocv, resubstitution_predictions

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_SOLVER = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _solver_flags(p):
    p.add_argument("--tol", type=float, default=1e-8, help="convergence tolerance (default 1e-8)")
    p.add_argument("--max-iters", type=int, default=200, help="maximum sweeps (default 200)")
    p.add_argument("--seed", type=int, default=None, help="seeded random initialization instead of the warm start")
    p.add_argument(
        "--renormalize",
        choices=RENORMALIZE_MODES,
        default="carry",
        help="carry: rescale only the reported fractions each sweep (default); feedback: sweep on the rescaled fractions",
    )


def _config(args) -> SolverConfig:
    try:
        return SolverConfig(max_iterations=args.max_iters, convergence_tol=args.tol, init_seed=args.seed, renormalize=args.renormalize)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="phasefrac", description="Learn phase patterns from labeled spectra and estimate phase fractions.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("train", help="learn a phase library from a labeled manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="library file to write")
    _solver_flags(p)

    p = sub.add_parser("predict", help="estimate phase fractions of spectra")
    p.add_argument("--library", required=True)
    p.add_argument("--spectrum", required=True, nargs="+")
    p.add_argument("--out", help="also write the table to this CSV file")
    _solver_flags(p)

    p = sub.add_parser("cv", help="leave-one-out cross-validation")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", help="directory for report, predictions and bar-chart data")
    p.add_argument("--jobs", type=int, default=1, help="folds run in parallel")
    p.add_argument("--no-svg", action="store_true")
    _solver_flags(p)

    p = sub.add_parser("resub", help="train and evaluate on the same samples")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", help="directory for report and predictions")
    p.add_argument("--no-svg", action="store_true")
    _solver_flags(p)

    p = sub.add_parser("synth", help="generate a synthetic labeled dataset")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="JSON synth config file")
    src.add_argument("--preset", choices=sorted(synth.PRESETS))
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")

    p = sub.add_parser("export-phases", help="write learned patterns as plot data")
    p.add_argument("--library", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--manifest", help="overlay the single-phase samples of this dataset")
    p.add_argument("--no-svg", action="store_true")
    return parser


def _report_doc(report, sample_ids, traces) -> dict:
    doc = report.as_dict()
    doc["median_inference_sweeps"] = statistics.median(t.sweeps_used for t in traces)
    doc["per_sample"] = [
        {"sample_id": sid, "rho": s.rho, "cosine": s.cosine, "abs_errors": list(s.abs_errors), "dominant_hit": s.dominant_hit}
        for sid, s in zip(sample_ids, report.per_sample)
    ]
    return doc


def _print_report(report, label: str) -> None:
    print(f"{label}: N={len(report.per_sample)}")
    print(f"  mean rho           {report.mean_rho:.6f}")
    print(f"  MAE                {report.mae:.6f}")
    print(f"  mean cosine        {report.mean_cosine:.6f}")
    print(f"  dominant accuracy  {report.dominant_accuracy:.6f}")


def _write_eval(out, dataset, preds, report, traces, svg: bool) -> None:
    out = Path(out)
    rows = list(zip(dataset.sample_ids, preds))
    io.atomic_write(out / "predictions.csv", io.format_compositions(rows))
    io.atomic_write(out / "report.json", json.dumps(_report_doc(report, dataset.sample_ids, traces), indent=1) + "\n")
    figures.export_bars(out, dataset.sample_ids, dataset.compositions, preds, svg=svg)


def cmd_train(args) -> int:
    config = _config(args)
    dataset = io.load_dataset(args.manifest)
    library, trace = fit_phase_library(dataset, config)
    io.save_library(library, args.out)
    print(f"trained {library.M} phases on N={dataset.N} samples, K={dataset.K} angles")
    print(f"  sweeps {trace.sweeps_used}  converged {trace.converged}  E^2 {trace.final_objective:.6g}")
    print(f"  library written to {args.out}")
    return EXIT_OK


def cmd_predict(args) -> int:
    config = _config(args)
    library = io.load_library(args.library)
    rows = []
    for path in args.spectrum:
        spectrum = io.load_spectrum_for(path, library.grid)
        comp, _ = estimate_composition(spectrum, library, config)
        rows.append((Path(path).stem, comp))
    table = io.format_compositions(rows)
    sys.stdout.write(table)
    if args.out:
        io.atomic_write(args.out, table)
    return EXIT_OK


def cmd_cv(args) -> int:
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    config = _config(args)
    dataset = io.load_dataset(args.manifest)
    result = loocv(dataset, config, jobs=args.jobs)
    _print_report(result.report, "leave-one-out")
    print(f"  median inference sweeps {statistics.median(t.sweeps_used for t in result.predict_traces)}")
    print(f"  wall time {result.wall_time:.2f}s")
    if args.out:
        _write_eval(args.out, dataset, result.predictions, result.report, result.predict_traces, not args.no_svg)
        print(f"  outputs written to {args.out}")
    return EXIT_OK


def cmd_resub(args) -> int:
    config = _config(args)
    dataset = io.load_dataset(args.manifest)
    preds, traces, _, _ = resubstitution_predictions(dataset, config)
    report = evaluate(dataset.compositions, preds)
    _print_report(report, "resubstitution")
    if args.out:
        _write_eval(args.out, dataset, preds, report, traces, not args.no_svg)
        print(f"  outputs written to {args.out}")
    return EXIT_OK


def cmd_synth(args) -> int:
    if args.config:
        try:
            cfg = synth.SynthConfig.from_dict(json.loads(Path(args.config).read_text()))
        except FileNotFoundError:
            raise MissingFile(f"synth config not found: {args.config}") from None
        except (json.JSONDecodeError, TypeError, ValueError) as exc:
            raise ParseError(f"{args.config}: {exc}") from None
    else:
        cfg = synth.preset(args.preset)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    dataset, library = synth.generate(cfg)
    out = Path(args.out)
    manifest = io.save_dataset(dataset, out)
    io.save_library(library, out / "true_library.json")
    io.atomic_write(out / "synth_config.json", json.dumps(cfg.to_dict(), indent=1) + "\n")
    print(f"wrote N={dataset.N} samples, M={dataset.M} phases, K={dataset.K} angles")
    print(f"  manifest {manifest}")
    return EXIT_OK


def cmd_export_phases(args) -> int:
    library = io.load_library(args.library)
    overlay = io.load_dataset(args.manifest) if args.manifest else None
    if overlay is not None and not overlay.grid.matches(library.grid):
        raise GridMismatch("overlay dataset is not on the library grid")
    paths = figures.export_phase_curves(args.out, library, overlay, svg=not args.no_svg)
    for p in paths:
        print(p)
    return EXIT_OK


COMMANDS = {
    "train": cmd_train,
    "predict": cmd_predict,
    "cv": cmd_cv,
    "resub": cmd_resub,
    "synth": cmd_synth,
    "export-phases": cmd_export_phases,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required: " + ", ".join(COMMANDS))
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SolverError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
