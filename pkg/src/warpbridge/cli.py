"""Command-line interface.

Exit codes: 0 success, 2 input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import fileio
from .compare import bayes_factor, post_prob
from .demos import gaussian_kernel_demo, ttest_demo
from .errors import InputError, NumericalError
from .estimator import METHODS, BridgeConfig, BridgeResult, bridge_sampler
from .models import BUILTINS, ModelDef, rwm_sample
from .uncertainty import error_measures

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3
WARP3_NOTE = "approximate error measures are unavailable for method 'warp3' with repetitions = 1"

logger = logging.getLogger("warpbridge")


def _model_from_args(name: str, model_args: list[str]) -> ModelDef:
    if name not in BUILTINS:
        raise InputError(f"unknown model {name!r}; choose from {sorted(BUILTINS)}")
    kwargs = {}
    for item in model_args:
        key, sep, value = item.partition("=")
        if not sep:
            raise InputError(f"--model-arg expects KEY=VALUE, got {item!r}")
        try:
            kwargs[key.strip()] = int(value)
        except ValueError:
            try:
                kwargs[key.strip()] = float(value)
            except ValueError:
                raise InputError(f"--model-arg {key}: {value!r} is not a number") from None
    try:
        return BUILTINS[name](**kwargs)
    except TypeError as exc:
        raise InputError(f"bad arguments for model {name!r}: {exc}") from None


def _config(args) -> BridgeConfig:
    return BridgeConfig(
        method=args.method,
        max_iter=args.max_iter,
        tol=args.tol,
        n2=args.n2,
        repetitions=args.repetitions,
        seed=args.seed,
        workers=args.workers,
    )


def result_document(result: BridgeResult, model: str | None = None) -> dict:
    doc = fileio.result_to_dict(result)
    if model is not None:
        doc["model"] = model
    if result.repetitions > 1:
        s = error_measures(result)
        doc["summary"] = {
            "median": s.median,
            "min": s.min,
            "max": s.max,
            "iqr": s.iqr,
            "quantile_method": s.quantile_method,
        }
    elif result.method == "normal":
        e = error_measures(result)
        doc["error"] = {"re2": e.re2, "cv": e.cv, "percentage": e.percentage}
    else:
        doc["error_note"] = WARP3_NOTE
    return doc


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_estimate(args) -> int:
    model = _model_from_args(args.model, args.model_arg)
    samples = fileio.read_samples(args.samples, expected_names=model.spec.names)
    spec = fileio.read_bounds(args.bounds, model.spec.names) if args.bounds else model.spec
    result = bridge_sampler(samples, model.log_unnorm_posterior, spec, _config(args))
    _emit(fileio.dumps(result_document(result, args.model)), args.output)
    return EXIT_OK


def cmd_bf(args) -> int:
    a, b = fileio.read_result(args.result_a), fileio.read_result(args.result_b)
    labels = tuple(args.labels) if args.labels else (args.result_a, args.result_b)
    bf = bayes_factor(a, b, labels=labels)
    doc = {
        "log_bf": bf.log_bf,
        "bf": "overflow" if bf.overflow else bf.bf,
        "favored": bf.favored,
        "numerator": labels[0],
        "denominator": labels[1],
    }
    _emit(fileio.dumps(doc), args.output)
    return EXIT_OK


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise InputError(f"cannot parse {text!r} as comma-separated numbers") from None


def cmd_postprob(args) -> int:
    results = [fileio.read_result(p) for p in args.results]
    priors = _parse_floats(args.priors) if args.priors else None
    labels = args.labels.split(",") if args.labels else list(args.results)
    pp = post_prob(results, prior_probs=priors, labels=labels)
    doc = {"labels": list(pp.labels), "probabilities": pp.probs.tolist()}
    _emit(fileio.dumps(doc), args.output)
    return EXIT_OK


def cmd_sample(args) -> int:
    model = _model_from_args(args.model, args.model_arg)
    run = rwm_sample(
        model, chains=args.chains, iter=args.iter, warmup=args.warmup, seed=args.seed,
        step_scale=args.step_scale,
    )
    fileio.write_samples(run.samples, args.output)
    logger.info("acceptance rates: %s", np.round(run.acceptance, 3).tolist())
    return EXIT_OK


def cmd_demo(args) -> int:
    if args.study == "ttest":
        report = ttest_demo(seed=args.seed, iter=args.iter, warmup=args.warmup,
                            chains=args.chains, workers=args.workers)
        if not args.output:
            sys.stderr.write(
                f"log marginal likelihood H1: {report['h1']['log_ml']:.5f} "
                f"({report['h1']['percentage_error']:.3f}% error)\n"
                f"log marginal likelihood H0: {report['h0']['log_ml']:.5f} "
                f"({report['h0']['percentage_error']:.3f}% error)\n"
                f"BF10 (bridge): {report['bf10']:.5f}\n"
                f"BF10 (quadrature): {report['quadrature_bf10']:.5f}\n"
            )
        _emit(fileio.dumps(report), args.output)
    else:
        cfg = BridgeConfig(method=args.method, seed=args.seed, workers=args.workers,
                           repetitions=args.repetitions)
        result, analytic = gaussian_kernel_demo(p=args.p, n=args.n, seed=args.seed, config=cfg)
        doc = result_document(result, f"gaussian-kernel(p={args.p})")
        doc["analytic_log_ml"] = analytic
        _emit(fileio.dumps(doc), args.output)
    return EXIT_OK


def _add_bridge_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=METHODS, default="normal")
    p.add_argument("--repetitions", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--n2", type=int, default=None, help="proposal draws (default: match n1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="warpbridge", description="Bridge sampling estimates of log marginal likelihoods."
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate a log marginal likelihood from a sample file")
    p.add_argument("samples", help="delimited sample file (header row, optional 'chain' column)")
    p.add_argument("--bounds", help="JSON bounds table (default: the model's own bounds)")
    p.add_argument("--model", required=True, help=f"built-in density: {', '.join(sorted(BUILTINS))}")
    p.add_argument("--model-arg", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("-o", "--output")
    _add_bridge_flags(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("bf", help="Bayes factor between two result documents")
    p.add_argument("result_a")
    p.add_argument("result_b")
    p.add_argument("--labels", nargs=2)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_bf)

    p = sub.add_parser("postprob", help="posterior model probabilities from result documents")
    p.add_argument("results", nargs="+")
    p.add_argument("--priors", help="comma-separated prior model probabilities")
    p.add_argument("--labels", help="comma-separated model names")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_postprob)

    p = sub.add_parser("sample", help="draw posterior samples for a built-in model by RWM")
    p.add_argument("--model", required=True)
    p.add_argument("--model-arg", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--chains", type=int, default=4)
    p.add_argument("--iter", type=int, default=2000)
    p.add_argument("--warmup", type=int, default=1000)
    p.add_argument("--step-scale", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("demo", help="run a built-in study")
    p.add_argument("study", choices=["ttest", "gaussian-kernel"])
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--iter", type=int, default=16000)
    p.add_argument("--warmup", type=int, default=1000)
    p.add_argument("--chains", type=int, default=4)
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--method", choices=METHODS, default="normal")
    p.add_argument("--repetitions", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except InputError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_INPUT
    except NumericalError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
