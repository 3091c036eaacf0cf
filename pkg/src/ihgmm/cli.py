"""Command-line entry point: ``ihgmm experiment|benchmark|diagnose``.

Exit status is 0 on success, 1 for invalid input and 2 when a run fails.
"""
import argparse
import json
import logging
import sys
from pathlib import Path

from .cluster import METHODS, KMeansConfig
from .data import DatasetSpec, run_benchmark
from .exceptions import (
    DegenerateCenters,
    IhgmmError,
    Infeasible,
    LabelCardinalityMismatch,
    ParseError,
    ValidationError,
)
from .experiments import FULL_REPLICATES, ExperimentConfig, emit_outputs, named_config, run_experiment
from .model import GroundTruth, NoiseSpec, compute_diagnostics, generate_dataset, separation_delta
from .rng import substream

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 1, 2

log = logging.getLogger("ihgmm")


def _bool(text):
    t = text.strip().lower()
    if t in ("true", "1", "yes"):
        return True
    if t in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {text!r}")


def _methods(text):
    ms = [m.strip() for m in text.split(",") if m.strip()]
    if not ms:
        raise ValidationError("method list is empty")
    bad = [m for m in ms if m not in METHODS]
    if bad:
        raise ValidationError(f"unknown methods {bad}; choose from {sorted(METHODS)}")
    return tuple(ms)


def _label_col(text):
    try:
        return int(text)
    except ValueError:
        return text


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors, so they share exit status 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser():
    ap = _Parser(prog="ihgmm", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    exp = sub.add_parser("experiment", help="simulation grids").add_subparsers(dest="action", required=True)
    run = exp.add_parser("run", help="run a named grid or a JSON config")
    run.add_argument("config", help="named grid (e.g. exp3) or path to a config JSON")
    run.add_argument("--replicates", type=int)
    run.add_argument("--full", action="store_true", help=f"use {FULL_REPLICATES} replicates")
    run.add_argument("--seed", type=int)
    run.add_argument("--methods", type=str)
    run.add_argument("--out", default="results")
    run.add_argument("--jobs", type=int, default=1)
    run.add_argument("--no-diagnostics", action="store_true")
    exp.add_parser("list", help="show built-in grids")

    bench = sub.add_parser("benchmark", help="real datasets").add_subparsers(dest="action", required=True)
    brun = bench.add_parser("run", help="cluster one labelled CSV")
    brun.add_argument("--data", required=True)
    brun.add_argument("--label-col", type=_label_col, default=-1)
    brun.add_argument("--k", type=int)
    brun.add_argument("--standardize", type=_bool, default=False)
    brun.add_argument("--minmax", action="store_true", help="scale each feature to [-1, 1]")
    brun.add_argument("--methods", type=str, default="ihsc,psc,kmeans")
    brun.add_argument("--restarts", type=int, default=KMeansConfig.restarts)
    brun.add_argument("--seed", type=int, default=0)
    brun.add_argument("--json", action="store_true", help="print rows as JSON")

    diag = sub.add_parser("diagnose", help="model diagnostics")
    diag.add_argument("--data", help="ground-truth JSON; omit to draw a noiseless instance")
    diag.add_argument("--n", type=int, default=300)
    diag.add_argument("--p", type=int, default=300)
    diag.add_argument("--K", type=int, default=3)
    diag.add_argument("--R", type=float, default=20.0)
    diag.add_argument("--beta", type=float, default=1.0)
    grp = diag.add_mutually_exclusive_group()
    grp.add_argument("--C", type=float)
    grp.add_argument("--delta", type=float)
    diag.add_argument("--seed", type=int, default=0)
    return ap


def _load_config(ref):
    path = Path(ref)
    if path.suffix == ".json" or path.is_file():
        try:
            return ExperimentConfig.from_dict(json.loads(path.read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {ref}: {exc}") from exc
    return named_config(ref)


def cmd_experiment(args):
    if args.action == "list":
        from .experiments import NAMED_CONFIGS

        for name in sorted(NAMED_CONFIGS):
            cfg = NAMED_CONFIGS[name]()
            print(f"{name}\t{len(cfg.cells)} cells")
        return EXIT_OK
    cfg = _load_config(args.config)
    changes = {}
    if args.full:
        changes["replicates"] = FULL_REPLICATES
    if args.replicates is not None:
        changes["replicates"] = args.replicates
    if args.seed is not None:
        changes["base_seed"] = args.seed
    if args.methods is not None:
        changes["methods"] = list(_methods(args.methods))
    if args.no_diagnostics:
        changes["diagnostics"] = False
    if args.jobs < 1:
        raise ValidationError("--jobs must be >= 1")
    cfg = cfg.replace(**changes)
    n_slots = len(cfg.cells) * cfg.replicates
    log.info("running %s: %d cells x %d replicates", cfg.name, len(cfg.cells), cfg.replicates)

    def progress(c, r):
        done = c * cfg.replicates + r + 1
        if done % max(1, n_slots // 20) == 0:
            log.info("%d/%d replicates", done, n_slots)

    report = run_experiment(cfg, jobs=args.jobs, progress=progress)
    for path in emit_outputs(report, args.out):
        print(path)
    for row in report.rows:
        rate = "nan" if row["mean_rate"] is None else f"{row['mean_rate']:.4f}"
        print(
            f"cell {row['cell']:>2} n={row['n']} p={row['p']} K={row['K']} R={row['R']:g} "
            f"beta={row['beta']:g} {row['noise']:<4} {row['method']:<9} "
            f"rate={rate} exact={row['exact_proportion']:.2f} failures={row['failures']}"
        )
    return EXIT_OK


def cmd_benchmark(args):
    spec = DatasetSpec(
        path=args.data,
        label_column=args.label_col,
        standardize=args.standardize,
        minmax=args.minmax,
        expected_K=args.k,
    )
    cfg = KMeansConfig(restarts=args.restarts)
    rows = run_benchmark(spec, _methods(args.methods), cfg, seed=args.seed, K=args.k)
    if args.json:
        print(json.dumps([r.to_dict() for r in rows], indent=2))
    else:
        for r in rows:
            print(f"{r.dataset}\t{r.method}\t{r.fraction}\t{r.rate:.4f}\t{r.seconds:.2f}s")
    return EXIT_OK


def cmd_diagnose(args):
    if args.data:
        try:
            truth = GroundTruth.from_json(Path(args.data).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ValidationError(f"cannot read {args.data}: {exc}") from exc
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ParseError(f"malformed ground-truth JSON: {exc}") from exc
    else:
        delta = args.delta if args.delta is not None else separation_delta(args.C or 3.0, args.K, args.p, args.n)
        _, truth = generate_dataset(
            args.n, args.p, args.K, delta, args.R, args.beta, NoiseSpec("None"), substream(args.seed, 0)
        )
    diag = compute_diagnostics(truth)
    out = diag.to_dict()
    out["lemma_checks"] = diag.lemma_checks()
    print(json.dumps(out, indent=2))
    return EXIT_OK


COMMANDS = {"experiment": cmd_experiment, "benchmark": cmd_benchmark, "diagnose": cmd_diagnose}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return COMMANDS[args.command](args)
    except (ValidationError, ParseError, LabelCardinalityMismatch, Infeasible, DegenerateCenters) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (IhgmmError, ArithmeticError, OSError) as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
