"""
:Module: extremal_search
:Synopsis: the L = lambda a_2 + a_4 example: the cubic threshold root, the
family p_lambda(u), and a multi-start Nelder-Mead search over piecewise
constant perturbations of a driving function, used to find (or fail to
find) functionals improving on the Koebe function.

"""

from collections import OrderedDict
import numpy as np
import scipy.optimize
from joblib import Parallel, delayed
from .series_core import check_functional, functional_value
from .loewner_dynamics import (ConstantDriving, PerturbedDriving,
                               make_driving_function, integrate,
                               extract_limit_coefficients)
from .hamiltonian import TrigPolynomial, attains_maximum_at

# 25 lambda^3 + 37 lambda^2 + 16 lambda + 3
CUBIC = np.array([25., 37., 16., 3.])

# verdicts
LOCAL_MAX_AT_KOEBE = "LOCAL_MAX_AT_KOEBE"
IMPROVEMENT_FOUND = "IMPROVEMENT_FOUND"
MAX_AT_PI = "MAX_AT_PI"
MAX_OFF_PI = "MAX_OFF_PI"

# minimal gain over the Koebe value counted as an improvement
IMPROVEMENT_MARGIN = 1e-6

SCAN_COLUMNS = ("lambda", "argmax", "p_at_pi", "max_p", "verdict")


class SearchError(RuntimeError):
    """Raised when the search objective is not finite.

    The offending perturbation is available as `offsets`.
    """

    def __init__(self, offsets, value):
        self.offsets = np.array(offsets, dtype=float)
        super(SearchError, self).__init__(
            "Non-finite objective %s at offsets %s" % (value, self.offsets))


def cubic_root_lambda0():
    """Real root in (-1, 0) of 25 lambda^3 + 37 lambda^2 + 16 lambda + 3,
    located by bisection and polished by Newton's method."""
    poly = np.poly1d(CUBIC)
    dpoly = poly.deriv()
    root = scipy.optimize.bisect(poly, -1., 0., xtol=1e-12)
    return float(scipy.optimize.newton(poly, root, fprime=dpoly, tol=1e-15,
                                       maxiter=20))


def example_polynomial(lam):
    """p_lambda(u) = -2 (cos 3u + 4 cos 2u + (9 + lambda) cos u), i.e.
    H(0, a0, psi(0), u) for L = lambda a_2 + a_4 at the Koebe function."""
    return TrigPolynomial([-2. * (9. + lam), -8., -2.])


def _maximized_at_pi(lam, tol_u=1e-6):
    P = example_polynomial(lam)
    return attains_maximum_at(P, np.pi, tol_u=tol_u)


def example_argmax_threshold(lower=-1.2, upper=-.8, xtol=1e-9):
    """Smallest lambda for which p_lambda attains its maximum at pi,
    located by bisection of the verdict of `attains_maximum_at`.

    Since p_lambda(u) - p_lambda(pi) = -2 (1 + cos u) ((2 cos u + 1)^2 + 1
    + lambda), the exact value is -1.
    """
    if _maximized_at_pi(lower)[0] or not _maximized_at_pi(upper)[0]:
        raise ValueError("[%g, %g] does not bracket the threshold" % (
            lower, upper))
    while upper - lower > xtol:
        mid = .5 * (lower + upper)
        if _maximized_at_pi(mid)[0]:
            upper = mid
        else:
            lower = mid
    return .5 * (lower + upper)


def _scan_row(lam):
    at_pi, diag = _maximized_at_pi(lam)
    return (float(lam), diag["argmax"], diag["value_at"], diag["value"],
            MAX_AT_PI if at_pi else MAX_OFF_PI)


def example_scan(lambdas, n_jobs=1):
    """Locates the maximum of p_lambda for each lambda.

    Returns
    -------
    rows: list of tuples
        (lambda, argmax, p(pi), max p, verdict), in input order

    """
    return Parallel(n_jobs=n_jobs)(delayed(_scan_row)(lam)
                                   for lam in lambdas)


class SearchConfig(object):
    """Settings of the driving-function search.

    Parameters
    ----------
    control_horizon: float, optional (default 4)
        perturbations live on [0, control_horizon]

    n_segments: int, optional (default 8)
        number of piecewise-constant perturbation segments

    eps0: float, optional (default .3)
        perturbation scale of the starting points

    max_iter: int, optional (default 400)
        Nelder-Mead iteration cap, per start

    n_starts: int, optional (default 16)
        number of deterministic starting points

    horizon: float, optional (default 30)
        integration horizon, used when the base driving function is not
        constant before it

    step: float, optional (default 5e-3)
        RK4 step

    grading: float, optional (default 2)
        ratio between the lengths of consecutive segments, > 1; segments
        shrink towards t = 0 and the partition with P segments refines the
        one with P - 1 by splitting its first segment

    max_offset: float, optional (default 1.2)
        offsets are confined to [-max_offset, max_offset]; a uniform offset
        near 2 pi / 3 rotates the Koebe function and leaves the
        neighborhood of u = pi

    """

    def __init__(self, control_horizon=4., n_segments=8, eps0=.3,
                 max_iter=400, n_starts=16, horizon=30., step=5e-3,
                 grading=2., max_offset=1.2):
        self.control_horizon = control_horizon
        self.n_segments = n_segments
        self.eps0 = eps0
        self.max_iter = max_iter
        self.n_starts = n_starts
        self.horizon = horizon
        self.step = step
        self.grading = grading
        self.max_offset = max_offset

    def sanitize(self):
        """Validates the settings; returns self."""
        if not 0. < self.control_horizon <= self.horizon:
            raise ValueError(
                "Expecting 0 < control_horizon <= horizon, got %s and %s" % (
                    self.control_horizon, self.horizon))
        for name in ["n_segments", "max_iter", "n_starts"]:
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise ValueError("%s must be a positive integer, got %r" % (
                    name, value))
            setattr(self, name, int(value))
        if not self.eps0 > 0.:
            raise ValueError("eps0 must be positive, got %s" % self.eps0)
        if not self.grading > 1.:
            raise ValueError("grading must be > 1, got %s" % (
                self.grading))
        if not self.max_offset > 0.:
            raise ValueError("max_offset must be positive, got %s" % (
                self.max_offset))
        if not 0. < self.step <= self.control_horizon:
            raise ValueError(
                "Expecting 0 < step <= control_horizon, got %s" % self.step)
        return self

    def edges(self, n_segments=None):
        """Segment edges 0 < T / g^(P - 1) < ... < T / g < T, with T the
        control horizon and g the grading.

        Edges for P segments are a subset of the edges for P + 1.
        """
        P = self.n_segments if n_segments is None else n_segments
        return np.concatenate(([0.], self.control_horizon / (
            self.grading ** np.arange(P - 1, -1, -1.))))

    def start_points(self, n_segments=None):
        """Deterministic starting perturbations: +/- k eps0 on the first
        segment only or on all of them, k = 1, 2, ..., clipped into the
        offset box. Duplicates are dropped, so fewer than n_starts points
        come back when the box is exhausted."""
        P = self.n_segments if n_segments is None else n_segments
        starts, seen = [], set()
        k = 1
        while len(starts) < self.n_starts:
            for pattern in ["first", "all"]:
                for sign in [1., -1.]:
                    x0 = np.zeros(P)
                    if pattern == "first":
                        x0[0] = sign * k * self.eps0
                    else:
                        x0[:] = sign * k * self.eps0
                    x0 = np.clip(x0, -self.max_offset, self.max_offset)
                    if tuple(x0) not in seen:
                        seen.add(tuple(x0))
                        starts.append(x0)
            if k * self.eps0 >= self.max_offset:
                break
            k += 1
        return starts[:self.n_starts]

    def to_dict(self):
        return OrderedDict(
            (name, getattr(self, name)) for name in [
                "control_horizon", "n_segments", "eps0", "max_iter",
                "n_starts", "horizon", "step", "grading", "max_offset"])

    def __repr__(self):
        return str(self.__dict__)


def limit_objective(lam, driving, cfg):
    """Re L(a(inf)) for the flow driven by `driving`.

    When the driving function is constant from some time <= cfg.horizon
    on, the flow is only integrated up to that time and the tail is
    closed exactly.
    """
    n = len(lam) + 1
    T = cfg.horizon
    if driving.tail_start <= T:
        T = max(driving.tail_start, cfg.step)
    traj = integrate(driving, n, T=T, h=min(cfg.step, T))
    a_inf, _, _ = extract_limit_coefficients(traj, driving=driving)
    return float(np.real(functional_value(lam, a_inf)))


def search_objective(offsets, lam, base, cfg, edges=None):
    """Re L of the limit coefficients for base + offsets.

    Parameters
    ----------
    offsets: array_like of P floats
        perturbation of each segment

    lam: array_like of n - 1 complex
        functional

    base: DrivingFunction
        unperturbed driving function

    cfg: SearchConfig

    edges: array_like of P + 1 floats, optional
        segment edges, cfg.edges() by default

    Raises
    ------
    SearchError
        if the objective is not finite

    """
    if edges is None:
        edges = cfg.edges()
    if not np.all(np.isfinite(offsets)):
        raise SearchError(offsets, np.nan)
    driving = PerturbedDriving(base, edges, offsets)
    value = limit_objective(check_functional(lam), driving, cfg)
    if not np.isfinite(value):
        raise SearchError(offsets, value)
    return value


def _single_start_search(x0, lam, base, cfg, edges):
    """Nelder-Mead from x0; returns (best objective, best offsets)."""
    # vertices step towards 0 so that none is clipped onto x0
    direction = np.where(x0 > 0., -1., 1.)
    simplex = np.vstack([x0] + [x0 + cfg.eps0 * d * e
                                for d, e in zip(direction, np.eye(len(x0)))])
    bounds = [(-cfg.max_offset, cfg.max_offset)] * len(x0)
    res = scipy.optimize.minimize(
        lambda x: -search_objective(x, lam, base, cfg, edges=edges),
        x0, method="Nelder-Mead", bounds=bounds,
        options=dict(initial_simplex=simplex, maxiter=cfg.max_iter,
                     xatol=1e-6, fatol=1e-10))
    return -float(res.fun), np.array(res.x, dtype=float)


def lift_offsets(offsets, coarse_edges, fine_edges):
    """Offsets of a coarse partition carried onto a refinement of it.

    Every fine segment takes the offset of the coarse segment holding it,
    so both describe the same driving function.
    """
    coarse_edges = np.asarray(coarse_edges, dtype=float)
    fine_edges = np.asarray(fine_edges, dtype=float)
    if not np.all(np.isin(coarse_edges, fine_edges)):
        raise ValueError("Edges %s do not refine %s" % (fine_edges,
                                                        coarse_edges))
    idx = np.searchsorted(coarse_edges, fine_edges[:-1], side='right') - 1
    return np.asarray(offsets, dtype=float)[idx]


def _best(results):
    # max objective, ties broken by the lexicographically smallest offsets
    return min(results, key=lambda r: (-r[0], tuple(r[1])))


def _search(lam, base, cfg, n_jobs=1, log=lambda x: None):
    """Runs the multi-start search on 1, 2, ..., n_segments segments.

    The best control of each level is lifted onto the next (nested) level
    and competes with that level's starts, so the result never decreases
    when n_segments grows.
    """
    cfg.sanitize()
    lam = check_functional(lam)
    base = make_driving_function(base)
    edges = cfg.edges(1)
    baseline = search_objective(np.zeros(1), lam, base, cfg, edges=edges)
    log("Baseline objective: %.12g" % baseline)
    best_value, best_offsets = baseline, np.zeros(1)

    for P in range(1, cfg.n_segments + 1):
        coarse_edges, edges = edges, cfg.edges(P)
        carried = (best_value,
                   lift_offsets(best_offsets, coarse_edges, edges))
        starts = cfg.start_points(P)
        log("Running %i Nelder-Mead starts over %i segments of [0, %g]" % (
            len(starts), P, cfg.control_horizon))
        start_results = Parallel(n_jobs=n_jobs)(
            delayed(_single_start_search)(x0, lam, base, cfg, edges)
            for x0 in starts)
        best_value, best_offsets = _best(start_results + [carried])
        log("Best objective with %i segments: %.12g" % (P, best_value))

    return OrderedDict([
        ("baseline", baseline), ("best_objective", best_value),
        ("best_offsets", best_offsets), ("edges", edges),
        ("best_driving", PerturbedDriving(base, edges, best_offsets)),
        ("start_objectives", [r[0] for r in start_results])])


def search_improvement(lam, base, cfg=None, n_jobs=1, log=lambda x: None):
    """Multi-start local search for a driving function improving Re L.

    The perturbation base(t) + eps_i on [t_i, t_{i+1}) (0 beyond the
    control horizon) is optimized by Nelder-Mead from the deterministic
    starts of cfg, on 1, 2, ..., cfg.n_segments nested segments in turn.
    The unperturbed base and the best control of the coarser level take
    part in each reduction, so the result never falls below the base and
    never decreases with n_segments. The best value is a lower bound on
    the supremum of Re L.

    Returns
    -------
    best_objective: float

    best_driving: PerturbedDriving

    """
    if cfg is None:
        cfg = SearchConfig()
    result = _search(lam, base, cfg, n_jobs=n_jobs, log=log)
    return result["best_objective"], result["best_driving"]


class ExtremalSearch(object):
    """Estimator wrapper around `search_improvement`.

    Parameters
    ----------
    config: SearchConfig, optional (default None)
        search settings (defaults if None)

    n_jobs: int, optional (default 1)
        number of starts run in parallel

    verbose: int, optional (default 1)
        verbosity level, set to 0 for no verbose

    Attributes
    ----------
    baseline_: float
        objective of the unperturbed driving function

    best_objective_: float

    best_offsets_: 1D array

    best_driving_: PerturbedDriving

    edges_: 1D array
        segment edges

    start_objectives_: list of floats
        best objective of each start

    """

    def __init__(self, config=None, n_jobs=1, verbose=1):
        self.config = config
        self.n_jobs = n_jobs
        self.verbose = verbose

    def _log(self, msg):
        if self.verbose:
            print(msg)

    def __repr__(self):
        return str(self.__dict__)

    def fit(self, lam, base=None):
        """Searches around `base` (u = pi by default).

        Returns
        -------
        self: ExtremalSearch
            fitted object

        """
        cfg = self.config if self.config is not None else SearchConfig()
        if base is None:
            base = ConstantDriving(np.pi)
        result = _search(lam, base, cfg, n_jobs=self.n_jobs, log=self._log)
        self.baseline_ = result["baseline"]
        self.best_objective_ = result["best_objective"]
        self.best_offsets_ = result["best_offsets"]
        self.best_driving_ = result["best_driving"]
        self.edges_ = result["edges"]
        self.start_objectives_ = result["start_objectives"]
        return self


def proposition1_verdict(lam, cfg=None, n_jobs=1, log=lambda x: None):
    """Searches for driving functions beating the Koebe function on
    Re(lambda a_2 + a_4) (n = 4), starting from u = pi.

    Failing to find an improvement supports, but does not prove, that the
    Koebe function is a local maximum.

    Returns
    -------
    verdict: string
        IMPROVEMENT_FOUND iff the best objective exceeds both the Koebe
        value 2 lambda + 4 and the computed baseline by more than 1e-6,
        LOCAL_MAX_AT_KOEBE otherwise

    details: OrderedDict

    """
    lam = float(lam)
    if not np.isfinite(lam):
        raise ValueError("lambda must be finite, got %s" % lam)
    if cfg is None:
        cfg = SearchConfig()
    result = _search([lam, 0., 1.], ConstantDriving(np.pi), cfg,
                     n_jobs=n_jobs, log=log)
    koebe_value = 2. * lam + 4.
    gain = result["best_objective"] - max(koebe_value, result["baseline"])
    verdict = (IMPROVEMENT_FOUND if gain > IMPROVEMENT_MARGIN
               else LOCAL_MAX_AT_KOEBE)
    log("lambda=%g: %s (gain %g)" % (lam, verdict, gain))
    details = OrderedDict([
        ("lambda", lam), ("verdict", verdict),
        ("koebe_value", koebe_value), ("baseline", result["baseline"]),
        ("best_objective", result["best_objective"]), ("gain", gain),
        ("best_offsets", list(result["best_offsets"])),
        ("edges", list(result["edges"])),
        ("note", "improvement found" if verdict == IMPROVEMENT_FOUND
         else "no improvement found within the search budget")])
    return verdict, details
