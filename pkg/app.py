import argparse
import logging
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

# Add the current directory to the path so we can import modules
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from components.reports import generate_sweep_report
from components.singlet_demo import singlet_demo
from components.spin_scenario import spin_scenario
from components.validation import run_invariant_suite
from data.data_manager import OUTPUT_FORMATS, ExperimentManager
from data.sample_data import generate_singlet_config
from utils.config import get_log_level
from utils.errors import ConfigError, EsrError, ParameterRangeError
from utils.export import generate_report, reports_to_frame, rows_to_frame
from utils.montecarlo import fair_sampling_diagnostic
from utils.states import ProperMixture

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION_FAILED = 1
EXIT_CONFIG_ERROR = 2
EXIT_LIBRARY_ERROR = 3

_ANGLE = re.compile(r"^([+-]?)(\d+(?:\.\d*)?|\.\d+)?\*?(pi)?(?:/(\d+(?:\.\d*)?))?$")


def parse_angle(text):
    """Real number, or a multiple of pi such as pi, -pi/2, 3pi/4, 2*pi"""
    text = text.strip().lower()
    try:
        return float(text)
    except ValueError:
        pass
    match = _ANGLE.match(text)
    if not match or not (match.group(2) or match.group(3)):
        raise ConfigError(f"cannot read {text!r} as an angle", "--sweep")
    sign, coefficient, pi, denominator = match.groups()
    value = float(coefficient) if coefficient else 1.0
    if pi:
        value *= math.pi
    if denominator:
        value /= float(denominator)
    return -value if sign == "-" else value


def parse_sweep_args(values):
    """--sweep NAME START..END STEPS"""
    name, bounds, steps = values
    if ".." not in bounds:
        raise ConfigError(f"range must read START..END, got {bounds!r}", "--sweep")
    start, end = bounds.split("..", 1)
    try:
        steps = int(steps)
    except ValueError:
        raise ConfigError(f"steps must be an integer, got {steps!r}", "--sweep") from None
    return ExperimentManager.parse_sweep(
        {"parameter": name, "start": parse_angle(start), "end": parse_angle(end), "steps": steps},
        "--sweep",
    )


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config (JSON); defaults to the built-in spin experiment")
    common.add_argument("--sweep", nargs=3, metavar=("NAME", "START..END", "STEPS"), help="sweep theta or phi")
    common.add_argument("--n", type=int, help="Monte Carlo copies")
    common.add_argument("--seed", type=int, help="Monte Carlo seed")
    common.add_argument("--z", type=float, help="confidence multiplier for the half-width")
    common.add_argument("--shards", type=int, help="parallel Monte Carlo streams")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=OUTPUT_FORMATS, help="output format")
    common.add_argument("--log-level", default=None, help="logging level (default: ESR_LOG_LEVEL or WARNING)")

    parser = argparse.ArgumentParser(
        prog="esr-experiments",
        description="Detection-conditioned quantum probabilities: analytic tables, Monte Carlo checks, invariants",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analytic", parents=[common], help="analytic probabilities over the sweep")
    sub.add_parser("mc", parents=[common], help="analytic probabilities plus Monte Carlo columns")
    sub.add_parser("validate", parents=[common], help="run the invariant suite on the configured objects")
    sub.add_parser("demo-singlet", parents=[common], help="reduced vs composite probabilities of an entangled pair")
    sub.add_parser(
        "fair-sampling", parents=[common], help="per-component make-up of the detected subensemble of a proper mixture"
    )

    spin = sub.add_parser("spin", parents=[common], help="spin-1/2 mixture from flags")
    spin.add_argument("--p-plus", type=float, default=0.6)
    spin.add_argument("--d-plus", type=float, default=0.9)
    spin.add_argument("--d-minus", type=float, default=0.8)
    spin.add_argument("--theta", type=parse_angle, default=math.pi / 3)
    spin.add_argument("--phi", type=parse_angle, default=0.0)
    return parser


def configure_logging(level):
    level = (level or get_log_level()).upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )


def _load(args, fallback=None):
    if args.config is None and fallback is not None:
        config = ExperimentManager.parse_config(fallback())
    else:
        config = ExperimentManager.load_config(args.config)
    if args.sweep is not None:
        config = ExperimentManager.with_sweep(config, parse_sweep_args(args.sweep))
    return config


def _monte_carlo(args, config):
    overrides = {key: getattr(args, key) for key in ("n", "seed", "z", "shards") if getattr(args, key) is not None}
    mc = replace(config.monte_carlo, **overrides)
    if mc.n < 1:
        raise ConfigError("must be at least 1", "--n")
    if mc.seed < 0:
        raise ConfigError("must be a non-negative integer", "--seed")
    if mc.shards < 1:
        raise ConfigError("must be at least 1", "--shards")
    return mc


def _fair_sampling(args, config):
    state = config.states[config.target_state]
    if not isinstance(state, ProperMixture):
        raise ConfigError("the fair-sampling diagnostic needs a proper mixture", "target_state")
    mc = _monte_carlo(args, config)
    report = fair_sampling_diagnostic(
        state,
        ExperimentManager.build_property(config),
        ExperimentManager.detection_model_for(config),
        mc.n,
        mc.seed,
        mc.z,
        mc.shards,
    )
    return reports_to_frame([(config.target_state, report)])


def _emit(df, args, config=None):
    fmt = args.format or (config.output.format if config is not None else "csv")
    path = args.out or (config.output.path if config is not None else None)
    generate_report(df, fmt, path)


def _spin_rows(args):
    if args.sweep is None:
        values = [args.theta]
    else:
        sweep = parse_sweep_args(args.sweep)
        if sweep.parameter != "theta":
            raise ConfigError("the spin command sweeps theta only", "--sweep")
        values = sweep.values()
    with ThreadPoolExecutor(max_workers=min(len(values), os.cpu_count() or 1)) as pool:
        return list(pool.map(
            lambda theta: spin_scenario(args.p_plus, args.d_plus, args.d_minus, theta, args.phi),
            values,
        ))


def run_cli(argv=None):
    """
    Run one command

    Parameters:
    - argv: Argument list without the program name (default: sys.argv[1:])

    Returns:
    - exit code: 0 success, 1 failed invariant, 2 config error, 3 library error
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_CONFIG_ERROR
    configure_logging(args.log_level)

    try:
        if args.command == "analytic":
            config = _load(args)
            _emit(generate_sweep_report(config), args, config)
        elif args.command == "mc":
            config = _load(args)
            _emit(generate_sweep_report(config, with_mc=True, mc=_monte_carlo(args, config)), args, config)
        elif args.command == "validate":
            config = _load(args)
            report = run_invariant_suite(config)
            _emit(report, args, config)
            if not report["passed"].all():
                failed = report.loc[~report["passed"], "check"].tolist()
                print(f"error: invariant checks failed: {', '.join(failed)}", file=sys.stderr)
                return EXIT_VALIDATION_FAILED
        elif args.command == "demo-singlet":
            config = _load(args, fallback=generate_singlet_config)
            _emit(singlet_demo(config), args, config)
        elif args.command == "fair-sampling":
            config = _load(args)
            _emit(_fair_sampling(args, config), args, config)
        elif args.command == "spin":
            _emit(rows_to_frame(_spin_rows(args)), args)
    except (ConfigError, ParameterRangeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except EsrError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_LIBRARY_ERROR
    return EXIT_OK


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
