"""Command line interface.

Subcommands: fld, rank, baselines, synth, calibrate. Reports are JSON
documents with stable field order and 17-significant-digit floats, so a
repeated run with the same inputs and seed is byte-identical. When
--out is given, stdout stays clean; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from pathlib import Path

from .baselines import DEFAULT_KNN_K, compute_baselines
from .errors import (
    ConfigError,
    DataError,
    DimensionError,
    FitError,
    FldError,
    FormatError,
    NumericalError,
)
from .fvec import dataset_entry, read_features
from .metrics import (
    KIND_FIDELITY,
    KIND_MEMORIZATION,
    CalibrationConstant,
    calibrate,
    fidelity_ranking,
    fld,
    memorization_ranking,
)
from .mog import FitConfig, fit
from .report import report_text
from .seeds import STAGE_CALIBRATION, STAGE_OPTIMIZER, subseed
from .synthetic import (
    EXPERIMENT_COPY_INJECTION,
    EXPERIMENT_DUPLICATION,
    EXPERIMENT_KDE_USHAPE,
    TwoMoonsConfig,
    experiment_columns,
    run_experiment,
)
from .tensor import Role, apply_standardizer, fit_standardizer

REPORT_SCHEMA = "fldeval/report-v1"

MIN_GEN_ROWS = 1000
MIN_TEST_ROWS = 500

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


def _warn(message: str) -> None:
    print(f"warning: {message}", file=sys.stderr)


def _add_fit_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0,
                        help="global seed; stage seeds are derived from it")
    parser.add_argument("--lr", type=float, default=0.5)
    parser.add_argument("--epochs", type=int, default=50)
    parser.add_argument("--batch-size", type=int, default=10_000)
    parser.add_argument("--no-standardize", action="store_true",
                        help="skip train-fitted feature standardization")


def _fit_config(args) -> FitConfig:
    return FitConfig(lr=args.lr, epochs=args.epochs, batch_size=args.batch_size,
                     seed=subseed(args.seed, STAGE_OPTIMIZER))


def _load_split(path: str, role: Role, fmt: str | None):
    return read_features(path, fmt, role=role)


def _load_triple(args, need_test: bool = True):
    fmt = args.format
    train = _load_split(args.train, Role.TRAIN, fmt)
    test = _load_split(args.test, Role.TEST, fmt) if need_test else None
    gen = _load_split(args.gen, Role.GENERATED, fmt)
    for other, name in ((test, "test"), (gen, "gen")):
        if other is not None and other.dim != train.dim:
            raise DimensionError(f"{name} dimension {other.dim} does not match train {train.dim}")
    if gen.n < MIN_GEN_ROWS:
        _warn(f"only {gen.n} generated rows; metrics are noisy below {MIN_GEN_ROWS}")
    if test is not None and test.n < MIN_TEST_ROWS:
        _warn(f"only {test.n} test rows; metrics are noisy below {MIN_TEST_ROWS}")
    return train, test, gen


def _inputs_section(args, names) -> dict:
    return {name: dataset_entry(getattr(args, name)) for name in names}


def _config_section(args, cfg: FitConfig | None = None) -> dict:
    section: dict = {"seed": args.seed}
    if cfg is not None:
        section["standardize"] = not args.no_standardize
        section["fit"] = {
            "lr": cfg.lr,
            "epochs": cfg.epochs,
            "batch_size": cfg.batch_size,
            "adam_beta1": cfg.adam_betas[0],
            "adam_beta2": cfg.adam_betas[1],
            "adam_eps": cfg.adam_eps,
            "base_likelihood_scale": cfg.base_likelihood_scale,
            "literal_base_distance": cfg.literal_base_distance,
            "use_base_likelihood": cfg.use_base_likelihood,
            "init_rule": cfg.init_rule,
            "init_value": cfg.init_value,
            "seed": cfg.seed,
        }
    return section


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _write_csv_rows(out: str | None, header, rows) -> None:
    if out is None:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    else:
        with open(out, "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)


def _cmd_fld(args) -> int:
    timings: dict[str, float] = {}
    start = time.perf_counter()
    train, test, gen = _load_triple(args)
    timings["load"] = time.perf_counter() - start

    cfg = _fit_config(args)
    constant = None
    start = time.perf_counter()
    if args.calibrate:
        constant = calibrate(train, test, cfg, seed=subseed(args.seed, STAGE_CALIBRATION),
                             standardize=not args.no_standardize)
    elif args.constant is not None:
        constant = CalibrationConstant(c_value=args.constant)
    timings["calibrate"] = time.perf_counter() - start

    start = time.perf_counter()
    result = fld(test, gen, train, cfg, constant, standardize=not args.no_standardize)
    timings["fit_and_score"] = time.perf_counter() - start

    document = {
        "schema": REPORT_SCHEMA,
        "command": "fld",
        "inputs": _inputs_section(args, ("train", "test", "gen")),
        "config": _config_section(args, cfg),
        "fld": {
            "fld_test": result.fld_test,
            "fld_train": result.fld_train,
            "gen_gap": result.gen_gap,
            "raw_nll_test": result.raw_nll_test,
            "overfitting": result.is_overfitting,
            "constant": {
                "c_value": result.constant.c_value,
                "method": result.constant.method,
                "split_seed": result.constant.split_seed,
            },
        },
        "baselines": None,
        "timings": timings if args.timings else None,
    }
    _emit(report_text(document), args.out)
    return EXIT_OK


def _cmd_baselines(args) -> int:
    train, test, gen = _load_triple(args)
    if not args.no_standardize:
        params = fit_standardizer(train)
        train = apply_standardizer(params, train)
        test = apply_standardizer(params, test)
        gen = apply_standardizer(params, gen)
    report = compute_baselines(train, test, gen, args.k)
    document = {
        "schema": REPORT_SCHEMA,
        "command": "baselines",
        "inputs": _inputs_section(args, ("train", "test", "gen")),
        "config": {"seed": args.seed, "standardize": not args.no_standardize,
                   "knn_k": report.knn_k},
        "fld": None,
        "baselines": {
            "fid_train": report.fid_train,
            "fid_test": report.fid_test,
            "fid_gap": report.fid_gap,
            "precision": report.precision,
            "recall": report.recall,
            "c_t": report.c_t,
            "auth_pct": report.auth_pct,
            "knn_k": report.knn_k,
        },
        "timings": None,
    }
    _emit(report_text(document), args.out)
    return EXIT_OK


def _cmd_rank(args) -> int:
    need_test = args.kind == KIND_FIDELITY
    if need_test and args.test is None:
        raise ConfigError("fidelity ranking needs --test")
    if args.top is not None and args.top < 1:
        raise ConfigError(f"--top must be at least 1, got {args.top}")
    train = _load_split(args.train, Role.TRAIN, args.format)
    gen = _load_split(args.gen, Role.GENERATED, args.format)
    if gen.dim != train.dim:
        raise DimensionError(f"gen dimension {gen.dim} does not match train {train.dim}")
    cfg = _fit_config(args)
    standardize = not args.no_standardize

    if args.kind == KIND_MEMORIZATION:
        if standardize:
            params = fit_standardizer(train)
            train_s = apply_standardizer(params, train)
            gen_s = apply_standardizer(params, gen)
        else:
            train_s, gen_s = train, gen
        model = fit(gen_s.with_role(Role.GENERATED), train_s, cfg)
        ranking = memorization_ranking(model, train_s)
    else:
        test = _load_split(args.test, Role.TEST, args.format)
        if test.dim != train.dim:
            raise DimensionError(f"test dimension {test.dim} does not match train {train.dim}")
        ranking = fidelity_ranking(gen, test, train, cfg, standardize=standardize)

    top = ranking.order if args.top is None else ranking.order[:args.top]
    ids = gen.ids if gen.ids is not None else tuple(str(i) for i in range(gen.n))
    rows = [(ids[int(j)], format(float(ranking.scores[int(j)]), ".17g"), rank + 1)
            for rank, j in enumerate(top)]
    _write_csv_rows(args.out, ("id", "log_score", "rank"), rows)
    return EXIT_OK


def _cmd_synth(args) -> int:
    moons = TwoMoonsConfig(n_total=args.n_total, noise=args.noise,
                           n_train=args.n_train, n_test=args.n_test,
                           seed=args.seed)
    cfg = FitConfig(lr=args.lr, epochs=args.epochs, batch_size=args.batch_size)
    grid = None
    if args.grid is not None:
        try:
            grid = tuple(float(v) for v in args.grid.split(",") if v.strip())
        except ValueError as exc:
            raise ConfigError(f"bad grid value: {exc}") from None
        if not grid:
            raise ConfigError("grid is empty")
    rows = run_experiment(args.experiment, seed=args.seed, moons=moons,
                          m=args.m, grid=grid, cfg=cfg)
    columns = experiment_columns(args.experiment)
    table = [[format(float(row[c]), ".17g") for c in columns] for row in rows]
    _write_csv_rows(args.out, columns, table)
    return EXIT_OK


def _cmd_calibrate(args) -> int:
    train = _load_split(args.train, Role.TRAIN, args.format)
    test = _load_split(args.test, Role.TEST, args.format)
    if test.dim != train.dim:
        raise DimensionError(f"test dimension {test.dim} does not match train {train.dim}")
    cfg = _fit_config(args)
    constant = calibrate(train, test, cfg, seed=subseed(args.seed, STAGE_CALIBRATION),
                         standardize=not args.no_standardize)
    print(format(constant.c_value, ".17g"))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fldeval",
        description="Overfitting-aware generative model evaluation from feature files.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io(p, *, test_required=True):
        p.add_argument("--train", required=True, help="train split features")
        p.add_argument("--test", required=test_required, help="test split features")
        p.add_argument("--gen", required=True, help="generated sample features")
        p.add_argument("--format", choices=("fvec", "csv"), default=None,
                       help="override format inference from the file suffix")
        p.add_argument("--out", default=None, help="output path (stdout when omitted)")

    p_fld = sub.add_parser("fld", help="score a generated set")
    add_io(p_fld)
    _add_fit_flags(p_fld)
    group = p_fld.add_mutually_exclusive_group()
    group.add_argument("--calibrate", action="store_true",
                       help="derive the zero constant from a train half-split")
    group.add_argument("--constant", type=float, default=None,
                       help="use a precomputed calibration constant")
    p_fld.add_argument("--timings", action="store_true",
                       help="include wall-clock timings (breaks byte-identical reports)")
    p_fld.set_defaults(func=_cmd_fld)

    p_base = sub.add_parser("baselines", help="FID, precision/recall, rank test, authenticity")
    add_io(p_base)
    p_base.add_argument("--seed", type=int, default=0)
    p_base.add_argument("--k", type=int, default=DEFAULT_KNN_K,
                        help="neighborhood size for precision/recall")
    p_base.add_argument("--no-standardize", action="store_true")
    p_base.set_defaults(func=_cmd_baselines)

    p_rank = sub.add_parser("rank", help="per-sample memorization or fidelity ranking")
    p_rank.add_argument("--kind", choices=(KIND_MEMORIZATION, KIND_FIDELITY), required=True)
    p_rank.add_argument("--train", required=True)
    p_rank.add_argument("--test", default=None, help="needed for fidelity rankings")
    p_rank.add_argument("--gen", required=True)
    p_rank.add_argument("--format", choices=("fvec", "csv"), default=None)
    p_rank.add_argument("--top", type=int, default=None, help="emit only the top K rows")
    p_rank.add_argument("--out", default=None)
    _add_fit_flags(p_rank)
    p_rank.set_defaults(func=_cmd_rank)

    p_synth = sub.add_parser("synth", help="two-moons experiment grids")
    p_synth.add_argument("--experiment", required=True,
                         choices=(EXPERIMENT_KDE_USHAPE, EXPERIMENT_COPY_INJECTION,
                                  EXPERIMENT_DUPLICATION))
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--grid", default=None,
                         help="comma-separated knob values overriding the default grid")
    p_synth.add_argument("--m", type=int, default=None, help="generated sample count")
    p_synth.add_argument("--n-total", type=int, default=3000)
    p_synth.add_argument("--noise", type=float, default=0.1)
    p_synth.add_argument("--n-train", type=int, default=2000)
    p_synth.add_argument("--n-test", type=int, default=1000)
    p_synth.add_argument("--lr", type=float, default=0.5)
    p_synth.add_argument("--epochs", type=int, default=50)
    p_synth.add_argument("--batch-size", type=int, default=10_000)
    p_synth.add_argument("--out", default=None)
    p_synth.set_defaults(func=_cmd_synth)

    p_cal = sub.add_parser("calibrate", help="print the train-split calibration constant")
    p_cal.add_argument("--train", required=True)
    p_cal.add_argument("--test", required=True)
    p_cal.add_argument("--format", choices=("fvec", "csv"), default=None)
    _add_fit_flags(p_cal)
    p_cal.set_defaults(func=_cmd_calibrate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, DimensionError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, FitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except FldError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
