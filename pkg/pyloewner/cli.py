"""
:Module: cli
:Synopsis: command-line entry point: `simulate`, `check` and
`example {cubic,scan,proposition}` on a JSON scenario file.

Exit codes: 0 ok, 2 config error, 3 unconverged, 4 degenerate or
inconclusive.

"""

import os
import sys
from argparse import ArgumentParser, RawTextHelpFormatter
from .io_utils import ConfigError
from .loewner_dynamics import IntegrationBlowupError
from .scenario import ScenarioConfig
from .workhorse import (do_scenario_simulate, do_scenario_check,
                        do_scenario_example, EXAMPLES, EXIT_CONFIG_ERROR,
                        EXIT_UNCONVERGED)


def get_parser():
    parser = ArgumentParser(
        prog="pyloewner", description="pyloewner: Loewner coefficient "
        "dynamics and optimality conditions for pairs of functionals",
        formatter_class=RawTextHelpFormatter)
    subparsers = parser.add_subparsers(dest="command")

    def _add_common(sub, config_required=True):
        sub.add_argument("--config", action="store",
                         required=config_required,
                         help="path to the JSON scenario file")
        sub.add_argument("--out", action="store", default=".",
                         help="output directory (created if needed)")
        sub.add_argument("--format", action="store", default="csv",
                         choices=["json", "csv"],
                         help="format of tabular outputs (trajectory, scan)")
        sub.add_argument("--jobs", action="store", type=int, default=1,
                         help="number of parallel jobs")
        sub.add_argument("--no-cache", action="store_true",
                         help="don't cache computations under "
                         "<out>/cache_dir")
        sub.add_argument("--verbose", action="store_true",
                         help="print progress")

    _add_common(subparsers.add_parser(
        "simulate", help="integrate the flow, write trajectory and limit"))
    _add_common(subparsers.add_parser(
        "check", help="run the condition checks, write report.json"))
    example = subparsers.add_parser(
        "example", help="threshold root, p_lambda scan, or local search")
    example.add_argument("which", choices=EXAMPLES,
                         help="cubic: threshold root\n"
                         "scan: maximum of p_lambda over a lambda grid\n"
                         "proposition: local search around u = pi")
    _add_common(example, config_required=False)
    return parser


def main(argv=None):
    """Runs the command line; returns the exit code."""
    parser = get_parser()
    try:
        opts = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG_ERROR if exc.code else 0
    if opts.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG_ERROR
    if opts.jobs < 1:
        sys.stderr.write("--jobs must be >= 1, got %i\n" % opts.jobs)
        return EXIT_CONFIG_ERROR

    try:
        if opts.config is None:
            scenario = ScenarioConfig()
        else:
            scenario = ScenarioConfig.from_json(opts.config)
        scenario.sanitize(command=opts.command)
    except ConfigError as exc:
        sys.stderr.write("%s\n" % exc)
        return EXIT_CONFIG_ERROR

    output_dir = os.path.abspath(opts.out)
    caching = not opts.no_cache
    verbose = int(opts.verbose)
    try:
        if opts.command == "simulate":
            return do_scenario_simulate(scenario, output_dir,
                                        fmt=opts.format, caching=caching,
                                        verbose=verbose)
        if opts.command == "check":
            return do_scenario_check(scenario, output_dir, caching=caching,
                                     verbose=verbose)
        return do_scenario_example(scenario, opts.which, output_dir,
                                   fmt=opts.format, n_jobs=opts.jobs,
                                   caching=caching, verbose=verbose)
    except IntegrationBlowupError as exc:
        sys.stderr.write("%s\n" % exc)
        return EXIT_UNCONVERGED
