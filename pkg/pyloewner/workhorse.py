"""
:Module: workhorse
:Synopsis: orchestration of the simulate / check / example commands on a
sanitized scenario: caching, estimators, output files and exit codes.

"""

import os
from collections import OrderedDict
import numpy as np
from joblib import Memory
from .io_utils import (save_json, save_table_csv, save_trajectory_csv,
                       trajectory_to_dict, complex_to_pairs)
from .loewner_dynamics import LoewnerFlow
from .conditions import (ConditionChecker, INCONCLUSIVE,
                         lemma1_initial_adjoint)
from .extremal_search import (cubic_root_lambda0, example_argmax_threshold,
                              example_scan, proposition1_verdict, CUBIC,
                              SCAN_COLUMNS)

# exit codes
EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_UNCONVERGED = 3
EXIT_INCONCLUSIVE = 4

EXAMPLES = ("cubic", "scan", "proposition")


def _get_memory(output_dir, caching=True, verbose=0):
    if caching:
        return Memory(location=os.path.join(output_dir, "cache_dir"),
                      verbose=verbose)
    return Memory(None)


def _write_trajectory(traj, output_dir, fmt):
    if fmt == "json":
        return save_json(trajectory_to_dict(traj), output_dir,
                         "trajectory.json")
    return save_trajectory_csv(traj, output_dir, "trajectory.csv")


def do_scenario_simulate(scenario, output_dir, fmt="csv", caching=True,
                         verbose=0):
    """Integrates the scenario's flow and writes the limit report and the
    trajectory.

    When the scenario carries a functional lambda, the adjoint system is
    integrated too, seeded from the limit coefficients, and the report
    gives its terminal error against (0, conj(lambda_2), ...).

    Returns
    -------
    exit_code: int
        0 on convergence, 3 otherwise

    """
    mem = _get_memory(output_dir, caching=caching)
    tol = scenario.tolerances["convergence"]
    flow = LoewnerFlow(scenario.n, horizon=scenario.horizon,
                       step=scenario.step, sample_every=scenario.sample_every,
                       tol=tol, exact_tail=scenario.exact_tail,
                       verbose=verbose)
    flow = mem.cache(flow.fit)(scenario.driving)
    report = flow.get_limit_report()
    traj = flow.trajectory_

    if scenario.lambda_ is not None:
        # the adjoint seed needs a(inf), known only after the first run
        psi0 = lemma1_initial_adjoint(scenario.lambda_, flow.limit_,
                                      anchor_first=True)
        adjoint_flow = LoewnerFlow(
            scenario.n, horizon=scenario.horizon, step=scenario.step,
            sample_every=scenario.sample_every, tol=tol, verbose=verbose)
        adjoint_flow = mem.cache(adjoint_flow.fit)(scenario.driving,
                                                   psi0=psi0)
        traj = adjoint_flow.trajectory_
        target = np.concatenate(([0.], np.conj(scenario.lambda_)))
        psi_T = traj.psi_samples[-1]
        report["adjoint_initial"] = complex_to_pairs(psi0)
        report["adjoint_terminal"] = complex_to_pairs(psi_T)
        report["adjoint_error"] = float(np.max(np.abs(psi_T - target)))
        report["adjoint_tail_bound"] = traj.adjoint_tail_error_estimate

    save_json(report, output_dir, "limit.json")
    _write_trajectory(traj, output_dir, fmt)
    return EXIT_OK if flow.converged_ else EXIT_UNCONVERGED


def do_scenario_check(scenario, output_dir, caching=True, verbose=0):
    """Runs the condition pipeline and writes report.json.

    Returns
    -------
    exit_code: int
        0 unless the verdict is INCONCLUSIVE (4)

    """
    mem = _get_memory(output_dir, caching=caching)
    tols = scenario.tolerances
    checker = ConditionChecker(
        tol=tols["residual"], argmax_tol=tols["argmax"],
        degeneracy_tol=tols["degeneracy"], m_max=scenario.m_max,
        normalize=scenario.normalize_rotation, verbose=verbose)
    checker = mem.cache(checker.fit)(scenario.lambda_, scenario.mu,
                                     scenario.a)
    checker.transform(output_dir)
    if checker.report_.verdict == INCONCLUSIVE:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def _cubic_report():
    lam0 = cubic_root_lambda0()
    return OrderedDict([
        ("lambda0", lam0),
        ("residual", float(abs(np.polyval(CUBIC, lam0)))),
        ("argmax_threshold", example_argmax_threshold())])


def do_scenario_example(scenario, which, output_dir, fmt="csv", n_jobs=1,
                        caching=True, verbose=0):
    """Runs one of the cubic / scan / proposition examples.

    Returns
    -------
    exit_code: int

    """
    if which not in EXAMPLES:
        raise ValueError("Unknown example '%s'; expecting one of %s" % (
            which, EXAMPLES))
    mem = _get_memory(output_dir, caching=caching)
    log = print if verbose else (lambda x: None)

    if which == "cubic":
        save_json(mem.cache(_cubic_report)(), output_dir, "cubic.json")
    elif which == "scan":
        rows = mem.cache(example_scan, ignore=["n_jobs"])(
            scenario.example["scan_lambdas"], n_jobs=n_jobs)
        if fmt == "json":
            save_json([OrderedDict(zip(SCAN_COLUMNS, row)) for row in rows],
                      output_dir, "scan.json")
        else:
            save_table_csv(rows, SCAN_COLUMNS, output_dir, "scan.csv")
    else:
        cached_verdict = mem.cache(proposition1_verdict,
                                   ignore=["n_jobs", "log"])
        results = []
        for lam in scenario.example["proposition_lambdas"]:
            _, details = cached_verdict(lam, scenario.search, n_jobs=n_jobs,
                                        log=log)
            results.append(details)
        save_json(OrderedDict([("search", scenario.search.to_dict()),
                               ("results", results)]),
                  output_dir, "proposition.json")
    return EXIT_OK
