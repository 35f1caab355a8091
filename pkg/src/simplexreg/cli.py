"""Command line interface.

Subcommands: tune, fit, predict, simulate, frechet-path, bench, validate.
Reports and predictions go to --output (or stdout when omitted) so data
streams stay clean for piping; human-readable progress and summaries go
to stderr.  All randomness is controlled by --seed and every report is a
deterministic function of its inputs; reports carry no timestamps.
Failures exit nonzero with a single-line `error: <kind>: <message>`.
"""

import argparse
import json
import os
import sys

import numpy as np

from .bench import BenchScenario, run_bench
from .datagen import SimSpec, generate
from .errors import SimplexRegError, ValidationError
from .frechet import frechet_path
from .ingestion import (
    DatasetSchema,
    apply_standardization,
    latlon_to_euclidean,
    load_csv,
    standardize,
    write_csv,
)
from .regressors import (
    KERNELS,
    KldModel,
    LogRatioOlsModel,
    fit_alpha_kernel,
    fit_alpha_knn,
    fit_kld,
    fit_logratio_ols,
)
from .selection import (
    DEFAULT_CLAMP,
    METRICS,
    TuningGrid,
    default_alpha_grid,
    default_h_grid,
    default_k_grid,
    js_divergence,
    kl_divergence,
    tune,
)
from .simplex import validate_composition_matrix

MODEL_SCHEMA_VERSION = 1

_FAMILIES = {"aknn": "alpha-knn", "akernel": "alpha-kernel"}


def _split_list(text):
    return [t.strip() for t in str(text).split(",") if t.strip()]


def _float_list(text):
    try:
        return [float(t) for t in _split_list(text)]
    except ValueError:
        raise ValidationError(f"cannot parse {text!r} as comma-separated numbers") from None


def _int_list(text):
    try:
        return [int(t) for t in _split_list(text)]
    except ValueError:
        raise ValidationError(f"cannot parse {text!r} as comma-separated integers") from None


def _threads(value):
    if value is None:
        return os.cpu_count() or 1
    return int(value)


def _schema_from_args(args, need_predictors=True, need_responses=True):
    resp = _split_list(args.response_cols) if getattr(args, "response_cols", None) else []
    pred = _split_list(args.predictor_cols) if getattr(args, "predictor_cols", None) else []
    if need_responses and not resp:
        raise ValidationError("--response-cols is required here")
    if need_predictors and not pred:
        raise ValidationError("--predictor-cols is required here")
    return DatasetSchema(
        response_cols=tuple(resp),
        predictor_cols=tuple(pred),
        delimiter=args.delimiter,
        has_header=not args.no_header,
    )


def _geo_convert(X, predictor_cols, geo_cols):
    if len(geo_cols) != 2:
        raise ValidationError("--geo-cols needs exactly two columns: lat,lon")
    positions = []
    for name in geo_cols:
        if name not in predictor_cols:
            raise ValidationError(
                f"geo column {name!r} is not among the predictor columns"
            )
        positions.append(predictor_cols.index(name))
    keep = [j for j in range(X.shape[1]) if j not in positions]
    sphere = latlon_to_euclidean(X[:, positions[0]], X[:, positions[1]])
    return np.column_stack([X[:, keep], sphere]) if keep else sphere


def _build_preprocess(X, predictor_cols, geo_cols, do_standardize):
    prep = {"geo_cols": None, "standardize": bool(do_standardize),
            "center": None, "scale": None}
    if geo_cols:
        geo = _split_list(geo_cols)
        X = _geo_convert(X, list(predictor_cols), geo)
        prep["geo_cols"] = geo
    if do_standardize:
        X, center, scale = standardize(X)
        prep["center"] = [float(v) for v in center]
        prep["scale"] = [float(v) for v in scale]
    return X, prep


def _apply_preprocess(X, predictor_cols, prep):
    if prep.get("geo_cols"):
        X = _geo_convert(X, list(predictor_cols), list(prep["geo_cols"]))
    if prep.get("standardize"):
        X = apply_standardization(X, prep["center"], prep["scale"])
    return X


def _write_text(args, text):
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _note(message):
    print(message, file=sys.stderr)


# ---------------------------------------------------------------------------
# subcommands


def cmd_tune(args):
    schema = _schema_from_args(args)
    X, U = load_csv(args.input, schema)
    X, _prep = _build_preprocess(X, schema.predictor_cols, args.geo_cols,
                                 args.standardize)
    zero_free = not np.any(U == 0)
    alphas = _float_list(args.alpha_grid) if args.alpha_grid else default_alpha_grid(zero_free)
    family = _FAMILIES[args.model]
    if family == "alpha-knn":
        ks = _int_list(args.k_grid) if args.k_grid else default_k_grid()
        grid = TuningGrid(alphas=tuple(alphas), ks=tuple(ks),
                          folds=args.folds, seed=args.seed)
    else:
        hs = _float_list(args.h_grid) if args.h_grid else default_h_grid(X, seed=args.seed)
        grid = TuningGrid(alphas=tuple(alphas), hs=tuple(hs),
                          folds=args.folds, seed=args.seed)
    report = tune(
        X, U, family, grid,
        metric=args.metric, clamp=args.clamp, kernel=args.kernel,
        threads=_threads(args.threads),
    )
    _write_text(args, report.to_json())
    chosen = (
        f"k={report.selected_k}" if family == "alpha-knn" else f"h={report.selected_h:.6g}"
    )
    _note(
        f"tune: selected alpha={report.selected_alpha} {chosen} "
        f"with mean {args.metric} divergence {report.selected_score:.6g}"
    )
    return 0


def _model_payload(args, schema, prep):
    payload = {
        "schema_version": MODEL_SCHEMA_VERSION,
        "model": args.model,
        "response_cols": list(schema.response_cols),
        "predictor_cols": list(schema.predictor_cols),
        "delimiter": schema.delimiter,
        "has_header": schema.has_header,
        "preprocessing": prep,
    }
    return payload


def cmd_fit(args):
    schema = _schema_from_args(args)
    X, U = load_csv(args.input, schema)
    X, prep = _build_preprocess(X, schema.predictor_cols, args.geo_cols,
                                args.standardize)
    payload = _model_payload(args, schema, prep)
    if args.model == "aknn":
        if args.alpha is None or args.k is None:
            raise ValidationError("fit aknn needs --alpha and --k")
        fit_alpha_knn(X, U, args.alpha, args.k)  # validates now, refit at predict
        payload.update(alpha=args.alpha, k=args.k, training_path=args.input)
    elif args.model == "akernel":
        if args.alpha is None or args.h is None:
            raise ValidationError("fit akernel needs --alpha and --h")
        fit_alpha_kernel(X, U, args.alpha, args.h, kernel=args.kernel)
        payload.update(alpha=args.alpha, h=args.h, kernel=args.kernel,
                       training_path=args.input)
    elif args.model == "kld":
        model = fit_kld(X, U)
        payload.update(
            coefficients=[[float(v) for v in row] for row in model.coef],
            iterations=model.iterations,
            objective=model.objective,
            hessian_damped=model.hessian_damped,
        )
    else:  # ols
        model = fit_logratio_ols(X, U, transform=args.transform)
        payload.update(
            coefficients=[[float(v) for v in row] for row in model.coef],
            transform=model.transform,
        )
    _write_text(args, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    _note(f"fit: {args.model} model written")
    return 0


def _rebuild_model(payload):
    kind = payload["model"]
    if kind == "kld":
        coef = np.asarray(payload["coefficients"], dtype=float)
        coef.flags.writeable = False
        return KldModel(
            coef=coef,
            iterations=int(payload.get("iterations", 0)),
            objective=float(payload.get("objective", 0.0)),
            objective_path=(),
            hessian_damped=bool(payload.get("hessian_damped", False)),
        )
    if kind == "ols":
        coef = np.asarray(payload["coefficients"], dtype=float)
        coef.flags.writeable = False
        return LogRatioOlsModel(coef=coef, transform=payload["transform"])
    schema = DatasetSchema(
        response_cols=tuple(payload["response_cols"]),
        predictor_cols=tuple(payload["predictor_cols"]),
        delimiter=payload["delimiter"],
        has_header=payload["has_header"],
    )
    path = payload["training_path"]
    if not os.path.exists(path):
        raise ValidationError(
            f"model references training data {path!r}, which does not exist"
        )
    X, U = load_csv(path, schema)
    X = _apply_preprocess(X, schema.predictor_cols, payload["preprocessing"])
    if kind == "aknn":
        return fit_alpha_knn(X, U, payload["alpha"], payload["k"])
    if kind == "akernel":
        return fit_alpha_kernel(
            X, U, payload["alpha"], payload["h"], kernel=payload["kernel"]
        )
    raise ValidationError(f"unknown model kind {kind!r} in model file")


def cmd_predict(args):
    with open(args.model_file, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    model = _rebuild_model(payload)
    truth_cols = _split_list(args.response_cols) if args.response_cols else []
    schema = DatasetSchema(
        response_cols=tuple(truth_cols),
        predictor_cols=tuple(payload["predictor_cols"]),
        delimiter=args.delimiter,
        has_header=not args.no_header,
    )
    X, truth = load_csv(args.input, schema)
    X = _apply_preprocess(X, schema.predictor_cols, payload["preprocessing"])
    pred = model.predict(X)
    names = list(payload["response_cols"])
    if len(names) != pred.shape[1]:
        names = [f"y{j + 1}" for j in range(pred.shape[1])]
    columns = [pred[:, j] for j in range(pred.shape[1])]
    if truth is not None:
        if truth.shape[1] != pred.shape[1]:
            raise ValidationError(
                f"truth has {truth.shape[1]} components, predictions "
                f"{pred.shape[1]}"
            )
        if args.metric == "kl":
            rows = kl_divergence(truth, pred, clamp=args.clamp)
        else:
            rows = js_divergence(truth, pred)
        columns.append(rows)
        names.append(args.metric)
    if args.output:
        write_csv(args.output, columns, names, delimiter=args.delimiter)
    else:
        write_csv(sys.stdout, columns, names, delimiter=args.delimiter)
    _note(f"predict: wrote {pred.shape[0]} rows")
    return 0


def cmd_simulate(args):
    spec = SimSpec(
        n=args.n,
        D=args.D,
        link=args.link,
        degree=args.degree,
        predictors=args.predictors,
        noise_scale=args.noise_scale,
        zero_fraction=args.zero_fraction,
        coef_seed=args.seed,
        data_seed=args.seed + 1,
    )
    X, U, coef = generate(spec)
    names = [f"x{j + 1}" for j in range(X.shape[1])]
    names += [f"y{j + 1}" for j in range(U.shape[1])]
    columns = [X[:, j] for j in range(X.shape[1])]
    columns += [U[:, j] for j in range(U.shape[1])]
    if args.output:
        write_csv(args.output, columns, names)
    else:
        write_csv(sys.stdout, columns, names)
    if args.truth_output:
        truth = {
            "schema_version": MODEL_SCHEMA_VERSION,
            "link": spec.link,
            "degree": spec.degree,
            "n": spec.n,
            "D": spec.D,
            "predictors": spec.predictors,
            "noise_scale": spec.noise_scale,
            "zero_fraction": spec.zero_fraction,
            "seed": args.seed,
            "coefficients": [[float(v) for v in row] for row in coef],
        }
        with open(args.truth_output, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(truth, indent=2, sort_keys=True) + "\n")
    _note(f"simulate: wrote {spec.n} rows (link={spec.link}, D={spec.D})")
    return 0


def cmd_frechet_path(args):
    schema = _schema_from_args(args, need_predictors=False)
    _, U = load_csv(args.input, schema)
    zero_free = not np.any(U == 0)
    alphas = _float_list(args.alpha_grid) if args.alpha_grid else default_alpha_grid(zero_free)
    path = frechet_path(U, alphas)
    names = ["alpha"] + list(schema.response_cols)
    columns = [np.array([a for a, _ in path])]
    means = np.vstack([m for _, m in path])
    columns += [means[:, j] for j in range(means.shape[1])]
    if args.output:
        write_csv(args.output, columns, names)
    else:
        write_csv(sys.stdout, columns, names)
    _note(f"frechet-path: {len(path)} grid points")
    return 0


def cmd_bench(args):
    scenario = BenchScenario(
        n_grid=tuple(_int_list(args.n)),
        d_grid=tuple(_int_list(args.D)),
        queries=args.queries,
        repeats=args.repeats,
        seed=args.seed,
        threads=_threads(args.threads),
    )
    report = run_bench(scenario)
    _write_text(args, report.to_json())
    for cell in report.cells:
        if cell.skipped:
            _note(f"bench: n={cell.n} D={cell.D} skipped ({cell.reason})")
        else:
            _note(
                f"bench: n={cell.n} D={cell.D} ols={cell.ols_seconds:.3f}s "
                f"kld={cell.kld_seconds:.3f}s aknn={cell.aknn_seconds:.3f}s"
            )
    return 0


def cmd_validate(args):
    schema = _schema_from_args(args, need_predictors=False)
    X, U = load_csv(args.input, schema)
    report = validate_composition_matrix(U)
    out = {
        "rows": report.rows,
        "zero_rows": report.zero_rows,
        "column_zero_counts": list(report.column_zero_counts),
        "predictor_cols": len(schema.predictor_cols),
    }
    _write_text(args, json.dumps(out, indent=2, sort_keys=True) + "\n")
    _note(
        f"validate: {report.rows} rows, {report.zero_rows} with zeros"
    )
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_io_args(sp, predictors=True, responses=True, responses_required=True):
    sp.add_argument("--input", required=True, help="input CSV path")
    if responses:
        sp.add_argument(
            "--response-cols",
            required=responses_required,
            help="comma-separated response column names "
            "(0-based indices with --no-header)",
        )
    if predictors:
        sp.add_argument(
            "--predictor-cols",
            required=True,
            help="comma-separated predictor column names",
        )
    sp.add_argument("--delimiter", default=",", help="field delimiter")
    sp.add_argument(
        "--no-header",
        action="store_true",
        help="file has no header row; columns are 0-based indices",
    )


def _add_preprocess_args(sp):
    sp.add_argument(
        "--geo-cols",
        default=None,
        help="lat,lon predictor columns to convert to unit-sphere "
        "coordinates before fitting",
    )
    sp.add_argument(
        "--standardize",
        action="store_true",
        help="center and scale predictors by sample standard deviation",
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="simplexreg",
        description="Regression for compositional responses",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("tune", help="cross-validated grid search")
    _add_io_args(sp)
    _add_preprocess_args(sp)
    sp.add_argument("--model", required=True, choices=("aknn", "akernel"))
    sp.add_argument("--alpha-grid", default=None, help="comma-separated exponents")
    sp.add_argument("--k-grid", default=None, help="comma-separated neighborhood sizes")
    sp.add_argument("--h-grid", default=None, help="comma-separated bandwidths")
    sp.add_argument("--kernel", default="gaussian", choices=tuple(KERNELS))
    sp.add_argument("--folds", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--metric", default="kl", choices=METRICS)
    sp.add_argument("--clamp", type=float, default=DEFAULT_CLAMP)
    sp.add_argument("--threads", type=int, default=None,
                    help="fold worker threads (default: available cores)")
    sp.add_argument("--output", default=None, help="report JSON path (default stdout)")
    sp.set_defaults(func=cmd_tune)

    sp = sub.add_parser("fit", help="fit one model and save it")
    _add_io_args(sp)
    _add_preprocess_args(sp)
    sp.add_argument("--model", required=True, choices=("aknn", "akernel", "kld", "ols"))
    sp.add_argument("--alpha", type=float, default=None)
    sp.add_argument("--k", type=int, default=None)
    sp.add_argument("--h", type=float, default=None)
    sp.add_argument("--kernel", default="gaussian", choices=tuple(KERNELS))
    sp.add_argument("--transform", default="alr", choices=("alr", "ilr"),
                    help="log-ratio coordinates for the ols model")
    sp.add_argument("--output", default=None, help="model JSON path (default stdout)")
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("predict", help="predict with a saved model")
    sp.add_argument("--input", required=True, help="query CSV path")
    sp.add_argument("--model-file", required=True, help="model JSON from fit")
    sp.add_argument("--response-cols", default=None,
                    help="truth columns in the query file; adds a "
                    "per-row divergence column")
    sp.add_argument("--delimiter", default=",")
    sp.add_argument("--no-header", action="store_true")
    sp.add_argument("--metric", default="kl", choices=METRICS)
    sp.add_argument("--clamp", type=float, default=DEFAULT_CLAMP)
    sp.add_argument("--output", default=None, help="predictions CSV (default stdout)")
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("simulate", help="generate a synthetic dataset")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--D", type=int, required=True)
    sp.add_argument("--link", default="polynomial", choices=("polynomial", "segmented"))
    sp.add_argument("--degree", type=int, default=1, choices=(1, 2, 3))
    sp.add_argument("--predictors", type=int, default=1)
    sp.add_argument("--noise-scale", type=float, default=0.1)
    sp.add_argument("--zero-fraction", type=float, default=0.0)
    sp.add_argument("--seed", type=int, default=0,
                    help="coefficient seed; the data stream uses seed + 1")
    sp.add_argument("--output", default=None, help="dataset CSV (default stdout)")
    sp.add_argument("--truth-output", default=None,
                    help="also write true coefficients as JSON")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("frechet-path", help="mean composition along an exponent grid")
    _add_io_args(sp, predictors=False)
    sp.add_argument("--alpha-grid", default=None, help="comma-separated exponents")
    sp.add_argument("--output", default=None, help="path CSV (default stdout)")
    sp.set_defaults(func=cmd_frechet_path)

    sp = sub.add_parser("bench", help="timing grid over synthetic datasets")
    sp.add_argument("--n", default="100000,200000,400000,800000",
                    help="comma-separated training sizes")
    sp.add_argument("--D", default="3,5", help="comma-separated composition sizes")
    sp.add_argument("--queries", type=int, default=1000)
    sp.add_argument("--repeats", type=int, default=3)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", type=int, default=None)
    sp.add_argument("--output", default=None, help="report JSON path (default stdout)")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("validate", help="check a composition table, report zeros")
    _add_io_args(sp, predictors=False)
    sp.add_argument("--output", default=None, help="report JSON path (default stdout)")
    sp.set_defaults(func=cmd_validate)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SimplexRegError as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
