"""Handle argument parsing"""

from __future__ import annotations

import argparse
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence

import yaml

from phmm.definitions import (
    DEFAULT_MH_CONCENTRATION,
    EM_MAX_ITERS,
    EM_TOLERANCE,
    DEFAULT_PARAMS,
    DEFAULT_PARAMS_ALIASES,
    Action,
    MissingMechanism,
    PredictMode,
    SamplerName,
)

ALL_SAMPLERS = "all"
DEFAULT_GRID = [0.0, 0.1, 0.3, 0.5, 0.7, 0.9]

description_action = {
    Action.SIMULATE: "Generate a synthetic dataset and its ground truth from a known HMM.",
    Action.FIT: "Fit an HMM to a dataset with a Gibbs sampler or EM and write its trace and report.",
    Action.BENCHMARK: "Sweep the missing rate for several samplers and tabulate time, ESS and accuracy.",
    Action.PREDICT: "Forecast, decode or impute from a fitted trace.",
    Action.REPORT: "Summarise a fitted trace: efficiency, accuracy and posterior mean/std.",
}

extra_description_action = {
    Action.FIT: """

Samplers:

    collapsed   z at observed positions only; gaps handled with powers of A
    partial     full latent path, missing positions emit with probability 1
    vanilla     full latent path and imputed missing observations
    em          Baum-Welch point estimate (use --restarts for multiple starts)

Traces are written as trace.csv and trace.json; the report as report.json/report.csv.
""",
}

# flags whose value must be supplied by the command line or a --config file
required_flags = {
    Action.SIMULATE: ["out"],
    Action.FIT: ["data", "out"],
    Action.BENCHMARK: ["out"],
    Action.PREDICT: ["mode", "trace", "data", "out"],
    Action.REPORT: ["trace"],
}


def probability(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"{text} is not in [0, 1]")
    return value


def positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"{text} is not a positive integer")
    return value


def non_negative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"{text} is negative")
    return value


def add_common_arguments(parser: argparse.ArgumentParser) -> None:
    """Add common arguments to a parser"""

    logging_levels = ["debug", "info", "warn", "error"]

    parser.add_argument(
        "-l",
        "--loglevel",
        dest="loglevel",
        default="warn",
        choices=logging_levels,
        help=f"logging level ({', '.join(logging_levels)})",
        metavar="level",
    )

    parser.add_argument(
        "-p",
        "--profile",
        dest="profile",
        metavar="file",
        help="profiling output file",
    )

    parser.add_argument(
        "-v",
        "--version",
        dest="version",
        action="store_true",
        help="print version information and exit",
    )

    parser.add_argument(
        "--print-args",
        dest="print_args",
        action="store_true",
        help="print arguments passed to phmm",
    )

    parser.add_argument(
        "--pdb",
        action="store_true",
        help="enter interactive post-mortem with pdb if an exception is raised",
    )


def add_action_arguments(parser: argparse.ArgumentParser) -> None:
    """Arguments shared by every action"""
    add_common_arguments(parser)
    parser.add_argument(
        "--config",
        metavar="file",
        help="JSON or YAML file supplying values for any flag; command-line flags take precedence",
    )
    parser.add_argument("--seed", type=int, default=0, help="random seed")
    parser.add_argument(
        "--overwrite",
        action="store_true",
        default=False,
        help="replace existing output files",
    )


def add_model_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n", type=positive_int, default=500, help="number of sequences")
    parser.add_argument("--T", type=positive_int, default=20, help="length of each sequence")
    parser.add_argument("--K", type=positive_int, default=None, help="number of latent states")
    parser.add_argument("--M", type=positive_int, default=None, help="number of observed symbols")
    parser.add_argument(
        "--params",
        metavar="file",
        default=DEFAULT_PARAMS,
        help="parameter file, or 'default' / 'paper-default' for the built-in parameters",
    )
    parser.add_argument(
        "--default-params",
        dest="params",
        action="store_const",
        const=DEFAULT_PARAMS,
        help="use the 3-state, 3-symbol default parameters",
    )
    parser.add_argument(
        "--paper-default",
        dest="params",
        action="store_const",
        const=DEFAULT_PARAMS,
        help="same as --default-params",
    )
    parser.add_argument(
        "--missing",
        default=MissingMechanism.RANDOM.value,
        choices=[m.value for m in MissingMechanism],
        help="missing-data mechanism",
    )


def add_chain_arguments(parser: argparse.ArgumentParser, iters: int, burn_in: int) -> None:
    parser.add_argument("--iters", type=positive_int, default=iters, help="Gibbs iterations")
    parser.add_argument("--burn-in", type=non_negative_int, default=burn_in, help="iterations discarded")
    parser.add_argument("--thin", type=positive_int, default=1, help="keep every thin-th draw after burn-in")
    parser.add_argument(
        "--mh-concentration",
        type=float,
        default=DEFAULT_MH_CONCENTRATION,
        help="concentration of the Dirichlet proposals for rows of A and pi",
    )
    parser.add_argument("--priors", metavar="file", default=None, help="Dirichlet priors (default: all 1)")
    parser.add_argument("--workers", type=positive_int, default=1, help="worker threads (capped by PHMM_THREADS)")
    parser.add_argument("--restarts", type=positive_int, default=1, help="EM starts; the best final loglik wins")
    parser.add_argument("--em-max-iters", type=positive_int, default=EM_MAX_ITERS, help="EM iteration limit")
    parser.add_argument("--em-tol", type=float, default=EM_TOLERANCE, help="EM loglik tolerance")


def _add_parser(parent, action: Action, formatter=argparse.ArgumentDefaultsHelpFormatter) -> argparse.ArgumentParser:
    return parent.add_parser(
        action.value,
        help=description_action[action],
        description=description_action[action] + extra_description_action.get(action, ""),
        formatter_class=formatter,
        allow_abbrev=False,
    )


def prepare_parser_simulate(parent: argparse._SubParsersAction[argparse.ArgumentParser]):
    parse_action_simulate = _add_parser(parent, Action.SIMULATE)
    add_action_arguments(parse_action_simulate)
    add_model_arguments(parse_action_simulate)
    parse_action_simulate.add_argument("--p", type=probability, default=0.0, help="missing probability")
    parse_action_simulate.add_argument("--out", metavar="dir", help="output directory")
    parse_action_simulate.add_argument(
        "--format", choices=["csv", "json"], default="csv", help="dataset file format"
    )


def prepare_parser_fit(parent: argparse._SubParsersAction[argparse.ArgumentParser]):
    parse_action_fit = _add_parser(parent, Action.FIT, argparse.RawDescriptionHelpFormatter)
    add_action_arguments(parse_action_fit)
    parse_action_fit.add_argument(
        "--sampler",
        default=SamplerName.COLLAPSED.value,
        choices=[s.value for s in SamplerName],
        help="inference method",
    )
    add_chain_arguments(parse_action_fit, iters=5000, burn_in=2500)
    parse_action_fit.add_argument("--data", metavar="file", help="dataset CSV or JSON")
    parse_action_fit.add_argument("--truth", metavar="file", help="ground-truth JSON for MSE and accuracy")
    parse_action_fit.add_argument("--K", type=positive_int, default=None, help="number of latent states")
    parse_action_fit.add_argument("--M", type=positive_int, default=None, help="number of observed symbols")
    parse_action_fit.add_argument("--keep-latents", action="store_true", default=False, help="store z in the trace")
    parse_action_fit.add_argument(
        "--cv-mask", type=float, default=None, metavar="fraction", help="fraction of observed entries held out"
    )
    parse_action_fit.add_argument("--cv-folds", type=positive_int, default=1, help="cross-validation folds")
    parse_action_fit.add_argument("--cv-draws", type=positive_int, default=100, help="imputation draws per fold")
    parse_action_fit.add_argument("--out", metavar="dir", help="output directory")


def prepare_parser_benchmark(parent: argparse._SubParsersAction[argparse.ArgumentParser]):
    parse_action_benchmark = _add_parser(parent, Action.BENCHMARK)
    add_action_arguments(parse_action_benchmark)
    add_model_arguments(parse_action_benchmark)
    add_chain_arguments(parse_action_benchmark, iters=1000, burn_in=500)
    parse_action_benchmark.add_argument(
        "--grid", type=probability, nargs="+", default=DEFAULT_GRID, help="missing probabilities"
    )
    parse_action_benchmark.add_argument(
        "--samplers",
        nargs="+",
        default=[ALL_SAMPLERS],
        choices=[ALL_SAMPLERS, *(s.value for s in SamplerName)],
        help=f"samplers to compare ({ALL_SAMPLERS} = the three Gibbs samplers)",
    )
    parse_action_benchmark.add_argument("--replicates", type=positive_int, default=1, help="seeds per grid cell")
    parse_action_benchmark.add_argument("--jobs", type=positive_int, default=1, help="grid cells run in parallel")
    parse_action_benchmark.add_argument(
        "--no-latents", dest="keep_latents", action="store_false", default=True, help="skip latent accuracy"
    )
    parse_action_benchmark.add_argument("--out", metavar="dir", help="output directory")


def prepare_parser_predict(parent: argparse._SubParsersAction[argparse.ArgumentParser]):
    parse_action_predict = _add_parser(parent, Action.PREDICT)
    add_action_arguments(parse_action_predict)
    parse_action_predict.add_argument("--mode", choices=[m.value for m in PredictMode], help="what to predict")
    parse_action_predict.add_argument("--trace", metavar="file", help="trace CSV or JSON written by fit")
    parse_action_predict.add_argument("--data", metavar="file", help="sequences to predict for")
    parse_action_predict.add_argument("--truth", metavar="file", help="ground truth with complete data")
    parse_action_predict.add_argument("--W", type=positive_int, default=1, help="forecast horizon")
    parse_action_predict.add_argument("--draws", type=positive_int, default=100, help="posterior draws")
    parse_action_predict.add_argument(
        "--full-path", action="store_true", default=False, help="decode the whole latent path"
    )
    parse_action_predict.add_argument("--out", metavar="dir", help="output directory")


def prepare_parser_report(parent: argparse._SubParsersAction[argparse.ArgumentParser]):
    parse_action_report = _add_parser(parent, Action.REPORT)
    add_action_arguments(parse_action_report)
    parse_action_report.add_argument("--trace", metavar="file", help="trace CSV or JSON written by fit")
    parse_action_report.add_argument("--data", metavar="file", help="dataset the trace was fitted to")
    parse_action_report.add_argument("--truth", metavar="file", help="ground-truth JSON")
    parse_action_report.add_argument("--out", metavar="dir", help="also write the report files here")


def prepare_parser():
    """Prepare argument parser for phmm.main.select_action()"""

    parser = argparse.ArgumentParser(
        formatter_class=argparse.ArgumentDefaultsHelpFormatter, prog="phmm", allow_abbrev=False
    )

    add_common_arguments(parser)

    # subparsers for each action (simulate, fit, ...)
    subparse_action = parser.add_subparsers(dest="action", metavar="action", required=False)

    prepare_parser_simulate(subparse_action)
    prepare_parser_fit(subparse_action)
    prepare_parser_benchmark(subparse_action)
    prepare_parser_predict(subparse_action)
    prepare_parser_report(subparse_action)

    return parser, subparse_action


def load_config(path: str) -> Dict[str, Any]:
    """Flag values from a JSON or YAML mapping; keys may use dashes or underscores"""
    with open(path) as stream:
        data = yaml.safe_load(stream)
    if not isinstance(data, Mapping):
        raise ValueError(f"{path}: expected a mapping of flag names to values")
    return {str(key).lstrip("-").replace("-", "_"): value for key, value in data.items()}


def _apply_config(parser: argparse.ArgumentParser, action_parser: argparse.ArgumentParser, path: str) -> None:
    try:
        values = load_config(path)
    except (OSError, ValueError, yaml.YAMLError) as err:
        parser.error(f"cannot read --config {path}: {err}")
    known = {action.dest for action in action_parser._actions}
    unknown = sorted(set(values) - known)
    if unknown:
        parser.error(f"--config {path}: unknown flag(s) {', '.join(unknown)}")
    action_parser.set_defaults(**values)


def validate(parser: argparse.ArgumentParser, args: argparse.Namespace) -> argparse.Namespace:
    """Checks argparse cannot express; failures exit with a usage error"""
    action = Action(args.action)
    for name in required_flags[action]:
        if getattr(args, name, None) is None:
            parser.error(f"{action.value}: --{name.replace('_', '-')} is required")
    try:
        if action == Action.FIT:
            args.sampler = SamplerName(args.sampler)
        if action == Action.PREDICT:
            args.mode = PredictMode(args.mode)
        if action in (Action.SIMULATE, Action.BENCHMARK):
            args.missing = MissingMechanism(args.missing)
            if args.params in DEFAULT_PARAMS_ALIASES:
                args.params = DEFAULT_PARAMS
            if args.params == DEFAULT_PARAMS and ({args.K, args.M} - {None, 3}):
                parser.error(f"{DEFAULT_PARAMS} parameters have K = M = 3")
        if action == Action.BENCHMARK:
            args.samplers = expand_samplers(args.samplers)
            args.grid = [probability(str(p)) for p in args.grid]
    except (ValueError, argparse.ArgumentTypeError) as err:
        parser.error(str(err))
    if action == Action.SIMULATE:
        if args.missing == MissingMechanism.BLOCK and not args.p < 1.0:
            parser.error("--missing block needs --p < 1")
    if action in (Action.FIT, Action.BENCHMARK):
        if args.burn_in >= args.iters:
            parser.error(f"--burn-in ({args.burn_in}) must be smaller than --iters ({args.iters})")
        if not args.mh_concentration > 0:
            parser.error("--mh-concentration must be positive")
    if action == Action.FIT and args.cv_mask is not None and not 0.0 < args.cv_mask < 1.0:
        parser.error("--cv-mask must lie in (0, 1)")
    if action == Action.BENCHMARK and MissingMechanism(args.missing) == MissingMechanism.BLOCK and max(args.grid) >= 1.0:
        parser.error("--missing block needs every grid value < 1")
    return args


def expand_samplers(names: Sequence[str]) -> List[SamplerName]:
    expanded: List[SamplerName] = []
    for name in names:
        for sampler in SamplerName.gibbs() if name == ALL_SAMPLERS else (SamplerName(name),):
            if sampler not in expanded:
                expanded.append(sampler)
    return expanded


def parse(argv: Optional[Sequence[str]] = None):
    """Parse args for phmm.main.select_action()"""

    parser, subparsers = prepare_parser()
    args = parser.parse_args(argv)
    if args.action is None:
        return args
    action_parser = subparsers.choices[args.action]
    if args.config is not None:
        if not Path(args.config).is_file():
            parser.error(f"--config: no such file {args.config}")
        _apply_config(parser, action_parser, args.config)
        args = parser.parse_args(argv)
    return validate(action_parser, args)


def print_help() -> None:
    """Print help for phmm.main.select_action()"""

    parser, _ = prepare_parser()
    parser.print_help()
