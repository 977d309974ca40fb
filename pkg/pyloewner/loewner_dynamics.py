"""
:Module: loewner_dynamics
:Synopsis: driving functions, right-hand sides of the coefficient, adjoint
and companion systems of the Loewner flow, fixed-step RK4 integration and
extraction of the limit coefficients a(inf).

The three systems integrated jointly are

    da/dt   = -2 sum_s e^{-s(t + iu)} A^s a
    dpsi/dt =  2 sum_s e^{-s(t + iu)} (s + 1) (A^T)^s psi
    dq/dt   =  2 sum_s e^{-s(t + iu)} (s + 1) A^s q

with s = 1..n-1 and A = A(a(t)).

"""

import cmath
from collections import OrderedDict
import numpy as np
from numba import njit
from sklearn.utils.validation import check_is_fitted
from .series_core import (_shift, _shift_transposed, check_coefficients,
                          check_adjoint, initial_coefficients)
from .io_utils import save_trajectory_csv, save_json, complex_to_pairs


class IntegrationBlowupError(RuntimeError):
    """Raised when the integrated state stops being finite."""

    def __init__(self, time, msg=None):
        self.time = time
        if msg is None:
            msg = "Non-finite state detected at t=%g" % time
        super(IntegrationBlowupError, self).__init__(msg)


class DrivingFunction(object):
    """Base class for driving functions u(t), t >= 0.

    Subclasses evaluate elementwise on arrays of times and expose the
    times at which u is not smooth (`breakpoints`) and the time from which
    on u stays constant (`tail_start`).
    """
    kind = None

    def __call__(self, t):
        raise NotImplementedError

    def derivative(self, t):
        raise NotImplementedError

    @property
    def breakpoints(self):
        return ()

    @property
    def tail_start(self):
        raise NotImplementedError

    @property
    def tail_value(self):
        return float(self(np.array(self.tail_start)))

    def to_dict(self):
        raise NotImplementedError

    def __repr__(self):
        return str(self.__dict__)


class ConstantDriving(DrivingFunction):
    """u(t) = value for all t."""
    kind = "constant"

    def __init__(self, value):
        self.value = float(value)

    def __call__(self, t):
        return np.full(np.shape(t), self.value)

    def derivative(self, t):
        return np.zeros(np.shape(t))

    @property
    def tail_start(self):
        return 0.

    def to_dict(self):
        return OrderedDict([("kind", self.kind), ("value", self.value)])


class PiecewiseConstantDriving(DrivingFunction):
    """u(t) = values[i] on [breakpoints[i - 1], breakpoints[i]).

    values has one more entry than breakpoints; the last one is the tail
    value taken beyond the last breakpoint.
    """
    kind = "piecewise"

    def __init__(self, breakpoints, values):
        breakpoints = np.array(breakpoints, dtype=float).ravel()
        values = np.array(values, dtype=float).ravel()
        if len(values) != len(breakpoints) + 1:
            raise ValueError(
                "Expecting %i values for %i breakpoints, got %i" % (
                    len(breakpoints) + 1, len(breakpoints), len(values)))
        if np.any(np.diff(breakpoints) <= 0.) or np.any(breakpoints < 0.):
            raise ValueError(
                "breakpoints must be nonnegative and strictly increasing, "
                "got %s" % breakpoints)
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite, got %s" % values)
        self._breakpoints = breakpoints
        self.values = values

    def __call__(self, t):
        return self.values[np.searchsorted(self._breakpoints, t,
                                           side='right')]

    def derivative(self, t):
        return np.zeros(np.shape(t))

    @property
    def breakpoints(self):
        return tuple(self._breakpoints)

    @property
    def tail_start(self):
        return self._breakpoints[-1] if len(self._breakpoints) else 0.

    def to_dict(self):
        return OrderedDict([("kind", self.kind),
                            ("breakpoints", list(self._breakpoints)),
                            ("values", list(self.values))])


class PowerSeriesDriving(DrivingFunction):
    """u(t) = u0 + sum_{m=1}^M u_m t^m on [0, horizon], held at u(horizon)
    afterwards."""
    kind = "power_series"

    def __init__(self, u0, coefficients, horizon):
        self.u0 = float(u0)
        self.coefficients = np.array(coefficients, dtype=float).ravel()
        self.horizon = float(horizon)
        if not self.horizon > 0.:
            raise ValueError("horizon must be positive, got %s" % horizon)
        self._poly = np.concatenate((self.coefficients[::-1], [self.u0]))
        self._dpoly = np.polyder(self._poly)

    def __call__(self, t):
        return np.polyval(self._poly, np.minimum(t, self.horizon))

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t < self.horizon, np.polyval(self._dpoly, t), 0.)

    @property
    def breakpoints(self):
        return (self.horizon,)

    @property
    def tail_start(self):
        return self.horizon

    def to_dict(self):
        return OrderedDict([("kind", self.kind), ("u0", self.u0),
                            ("coefficients", list(self.coefficients)),
                            ("horizon", self.horizon)])


class PerturbedDriving(DrivingFunction):
    """u(t) = base(t) + offsets[i] on [edges[i], edges[i + 1]), and
    u(t) = base(t) beyond edges[-1]."""
    kind = "perturbed"

    def __init__(self, base, edges, offsets):
        if not isinstance(base, DrivingFunction):
            base = make_driving_function(base)
        edges = np.array(edges, dtype=float).ravel()
        offsets = np.array(offsets, dtype=float).ravel()
        if len(edges) != len(offsets) + 1 or edges[0] != 0.:
            raise ValueError(
                "Expecting %i edges starting at 0 for %i offsets, got %s" % (
                    len(offsets) + 1, len(offsets), edges))
        if np.any(np.diff(edges) <= 0.):
            raise ValueError("edges must be strictly increasing, got %s" % (
                edges))
        self.base = base
        self.edges = edges
        self.offsets = offsets
        self._padded = np.concatenate((offsets, [0.]))

    def __call__(self, t):
        idx = np.searchsorted(self.edges[1:], t, side='right')
        return self.base(t) + self._padded[idx]

    def derivative(self, t):
        return self.base.derivative(t)

    @property
    def breakpoints(self):
        # only edges where the offset jumps
        jumps = self.edges[1:][self._padded[1:] != self._padded[:-1]]
        return tuple(np.union1d(self.base.breakpoints, jumps))

    @property
    def tail_start(self):
        return max(self.base.tail_start, self.edges[-1])

    def to_dict(self):
        return OrderedDict([("kind", self.kind),
                            ("base", self.base.to_dict()),
                            ("edges", list(self.edges)),
                            ("offsets", list(self.offsets))])


_DRIVING_KINDS = dict((cls.kind, cls) for cls in [
    ConstantDriving, PiecewiseConstantDriving, PowerSeriesDriving,
    PerturbedDriving])


def make_driving_function(desc):
    """Builds a driving function from its dict description (as produced by
    `DrivingFunction.to_dict`).

    Raises
    ------
    ValueError
        unknown kind or bad parameters

    """
    if isinstance(desc, DrivingFunction):
        return desc
    params = dict(desc)
    kind = params.pop("kind", None)
    if kind not in _DRIVING_KINDS:
        raise ValueError("Unknown driving function kind '%s'; expecting one "
                         "of %s" % (kind, sorted(_DRIVING_KINDS)))
    try:
        return _DRIVING_KINDS[kind](**params)
    except TypeError as exc:
        raise ValueError("Bad parameters for '%s' driving function: %s" % (
            kind, exc))


@njit(cache=True)
def _joint_rhs(t, u, y, dy, with_psi, with_q, buf, tmp):
    """dy <- right-hand side of the stacked state y = [a, psi, q]."""
    n = y.shape[1]
    a = y[0]
    z = cmath.exp(complex(-t, -u))
    for r in range(3):
        for i in range(n):
            dy[r, i] = 0j

    zs = 1. + 0j
    for i in range(n):
        buf[i] = a[i]
    for s in range(1, n):
        zs *= z
        _shift(a, buf, tmp)
        for i in range(n):
            buf[i] = tmp[i]
            dy[0, i] -= 2. * zs * buf[i]

    if with_psi:
        zs = 1. + 0j
        for i in range(n):
            buf[i] = y[1, i]
        for s in range(1, n):
            zs *= z
            _shift_transposed(a, buf, tmp)
            for i in range(n):
                buf[i] = tmp[i]
                dy[1, i] += 2. * (s + 1) * zs * buf[i]

    if with_q:
        zs = 1. + 0j
        for i in range(n):
            buf[i] = y[2, i]
        for s in range(1, n):
            zs *= z
            _shift(a, buf, tmp)
            for i in range(n):
                buf[i] = tmp[i]
                dy[2, i] += 2. * (s + 1) * zs * buf[i]


@njit(cache=True)
def _rk4_march(y0, t_nodes, h_nodes, u_nodes, with_psi, with_q,
               sample_every, samples):
    """Classical RK4 over the prepared schedule.

    Returns (failed step index or -1, number of samples written, state).
    """
    n_steps = t_nodes.shape[0]
    n = y0.shape[1]
    y = y0.copy()
    k1 = np.empty_like(y)
    k2 = np.empty_like(y)
    k3 = np.empty_like(y)
    k4 = np.empty_like(y)
    ytmp = np.empty_like(y)
    buf = np.empty(n, dtype=np.complex128)
    tmp = np.empty(n, dtype=np.complex128)
    samples[0, :, :] = y
    n_samples = 1
    for i in range(n_steps):
        t = t_nodes[i]
        h = h_nodes[i]
        _joint_rhs(t, u_nodes[i, 0], y, k1, with_psi, with_q, buf, tmp)
        for r in range(3):
            for j in range(n):
                ytmp[r, j] = y[r, j] + .5 * h * k1[r, j]
        _joint_rhs(t + .5 * h, u_nodes[i, 1], ytmp, k2, with_psi, with_q,
                   buf, tmp)
        for r in range(3):
            for j in range(n):
                ytmp[r, j] = y[r, j] + .5 * h * k2[r, j]
        _joint_rhs(t + .5 * h, u_nodes[i, 1], ytmp, k3, with_psi, with_q,
                   buf, tmp)
        for r in range(3):
            for j in range(n):
                ytmp[r, j] = y[r, j] + h * k3[r, j]
        _joint_rhs(t + h, u_nodes[i, 2], ytmp, k4, with_psi, with_q,
                   buf, tmp)
        finite = True
        for r in range(3):
            for j in range(n):
                y[r, j] += h / 6. * (k1[r, j] + 2. * k2[r, j] +
                                     2. * k3[r, j] + k4[r, j])
                if not cmath.isfinite(y[r, j]):
                    finite = False
        if not finite:
            return i, n_samples, y
        if (i + 1) % sample_every == 0 or i == n_steps - 1:
            samples[n_samples, :, :] = y
            n_samples += 1
    return -1, n_samples, y


def _evaluate_rhs(t, a, u_val, psi=None, q=None):
    a = check_coefficients(a)
    n = len(a)
    if t < 0.:
        raise ValueError("t must be nonnegative, got %s" % t)
    y = np.zeros((3, n), dtype=np.complex128)
    y[0] = a
    if psi is not None:
        y[1] = check_adjoint(psi, n=n)
    if q is not None:
        y[2] = check_adjoint(q, n=n)
    dy = np.empty_like(y)
    _joint_rhs(float(t), float(u_val), y, dy, psi is not None,
               q is not None, np.empty(n, dtype=np.complex128),
               np.empty(n, dtype=np.complex128))
    return dy


def coefficient_rhs(t, a, u_val):
    """da/dt = -2 sum_{s=1}^{n-1} e^{-s(t + iu)} A^s a; entry 0 is
    exactly 0."""
    return _evaluate_rhs(t, a, u_val)[0]


def adjoint_rhs(t, a, psi, u_val):
    """dpsi/dt = 2 sum_{s=1}^{n-1} e^{-s(t + iu)} (s + 1) (A^T)^s psi; the
    last entry is exactly 0."""
    return _evaluate_rhs(t, a, u_val, psi=psi)[1]


def companion_rhs(t, a, q, u_val):
    """dq/dt = 2 sum_{s=1}^{n-1} e^{-s(t + iu)} (s + 1) A^s q; entry 0 is
    exactly 0."""
    return _evaluate_rhs(t, a, u_val, q=q)[2]


class Trajectory(object):
    """Sampled solution of the joint system.

    Attributes
    ----------
    times: 1D array
        sample times, times[0] = 0

    a_samples: 2D array of shape (n_samples, n)
        coefficient vectors at the sample times

    psi_samples, q_samples: 2D arrays of shape (n_samples, n) or None
        adjoint / companion states, if integrated

    horizon: float
        final time T

    step: float
        nominal step h

    tail_error_estimate: float
        bound K e^{-T} on |a(inf) - a(T)|

    adjoint_tail_error_estimate: float
        the same bound for psi (0 when psi was not integrated)

    """

    def __init__(self, times, a_samples, psi_samples=None, q_samples=None,
                 horizon=None, step=None, tail_error_estimate=np.inf,
                 adjoint_tail_error_estimate=0.):
        self.times = times
        self.a_samples = a_samples
        self.psi_samples = psi_samples
        self.q_samples = q_samples
        self.horizon = horizon
        self.step = step
        self.tail_error_estimate = tail_error_estimate
        self.adjoint_tail_error_estimate = adjoint_tail_error_estimate

    @property
    def n(self):
        return self.a_samples.shape[1]

    def __repr__(self):
        return str(self.__dict__)


def _make_schedule(u, T, h):
    """Splits [0, T] at the breakpoints of u and lays a uniform RK4 grid of
    step <= h on each piece."""
    edges = np.unique(np.concatenate(
        ([0., T], [b for b in u.breakpoints if 0. < b < T])))
    t_nodes, h_nodes, u_nodes = [], [], []
    for t_start, t_end in zip(edges[:-1], edges[1:]):
        n_seg = max(int(np.ceil((t_end - t_start) / h - 1e-9)), 1)
        h_seg = (t_end - t_start) / n_seg
        t = t_start + h_seg * np.arange(n_seg)
        nodes = np.column_stack((t, t + .5 * h_seg, t + h_seg))

        # stay inside the piece, the jump at t_end belongs to the next one
        nodes = np.minimum(nodes, np.nextafter(t_end, t_start))
        t_nodes.append(t)
        h_nodes.append(np.full(n_seg, h_seg))
        u_nodes.append(np.asarray(u(nodes), dtype=float))
    return (np.concatenate(t_nodes), np.concatenate(h_nodes),
            np.concatenate(u_nodes))


def _tail_bounds(y, T, with_psi):
    """K e^{-T} style bounds on what the forcing terms can still add after
    T, computed from the state at T."""
    n = y.shape[1]
    a = y[0]
    buf = a.copy()
    tmp = np.empty(n, dtype=np.complex128)
    bound_a = 0.
    for s in range(1, n):
        _shift(a, buf, tmp)
        buf, tmp = tmp, buf
        bound_a += 2. * np.max(np.abs(buf)) * np.exp(-s * T) / s
    bound_psi = 0.
    if with_psi:
        buf = y[1].copy()
        for s in range(1, n):
            _shift_transposed(a, buf, tmp)
            buf, tmp = tmp, buf
            bound_psi += (2. * (s + 1) * np.max(np.abs(buf)) *
                          np.exp(-s * T) / s)
    return bound_a, bound_psi


def integrate(u, n, T=30., h=1e-3, psi0=None, q0=None, a0=None,
              sample_every=1, log=lambda x: None):
    """Integrates the coefficient system, and optionally the adjoint and
    companion systems, with classical RK4.

    Parameters
    ----------
    u: DrivingFunction or dict
        the driving function

    n: int
        truncation order, n >= 2

    T: float, optional (default 30)
        horizon

    h: float, optional (default 1e-3)
        step; each smooth piece of u gets a uniform grid of step <= h

    psi0: array_like of n complex, optional (default None)
        initial adjoint state; the adjoint system is integrated iff given

    q0: array_like of n complex, optional (default None)
        initial companion state; integrated iff given

    a0: array_like of n complex, optional (default None)
        initial coefficients, a0 = (1, 0, ..., 0) by default

    sample_every: int, optional (default 1)
        keep every sample_every-th step (the final state is always kept)

    log: callable, optional
        logger

    Returns
    -------
    traj: Trajectory

    Raises
    ------
    IntegrationBlowupError
        if the state becomes non-finite

    """
    u = make_driving_function(u)
    if n < 2:
        raise ValueError("n must be >= 2, got %s" % n)
    if not T > 0.:
        raise ValueError("T must be positive, got %s" % T)
    if not 0. < h <= T:
        raise ValueError("Expecting 0 < h <= T, got h=%s, T=%s" % (h, T))
    if sample_every < 1:
        raise ValueError("sample_every must be >= 1, got %s" % sample_every)

    y0 = np.zeros((3, n), dtype=np.complex128)
    y0[0] = initial_coefficients(n) if a0 is None else check_coefficients(
        a0, n=n)
    with_psi = psi0 is not None
    with_q = q0 is not None
    if with_psi:
        y0[1] = check_adjoint(psi0, n=n)
    if with_q:
        y0[2] = check_adjoint(q0, n=n)

    t_nodes, h_nodes, u_nodes = _make_schedule(u, float(T), float(h))
    n_steps = len(t_nodes)
    log("Integrating n=%i over [0, %g] in %i RK4 steps (psi: %s, q: %s)" % (
        n, T, n_steps, with_psi, with_q))
    samples = np.empty((n_steps // sample_every + 2, 3, n),
                       dtype=np.complex128)
    failed, n_samples, y = _rk4_march(y0, t_nodes, h_nodes, u_nodes,
                                      with_psi, with_q, int(sample_every),
                                      samples)
    if failed >= 0:
        raise IntegrationBlowupError(t_nodes[failed] + h_nodes[failed])

    steps = np.arange(n_steps)
    kept = ((steps + 1) % sample_every == 0) | (steps == n_steps - 1)
    times = np.concatenate(([0.], (t_nodes + h_nodes)[kept]))
    times[-1] = T
    samples = samples[:n_samples]
    bound_a, bound_psi = _tail_bounds(y, T, with_psi)
    log("Done; tail bound on a(inf) - a(T): %g" % bound_a)
    return Trajectory(times, samples[:, 0].copy(),
                      psi_samples=samples[:, 1].copy() if with_psi else None,
                      q_samples=samples[:, 2].copy() if with_q else None,
                      horizon=float(T), step=float(h),
                      tail_error_estimate=bound_a,
                      adjoint_tail_error_estimate=bound_psi)


def close_tail(a_tau, tau, tail_value):
    """Exact a(inf) when the driving function is constant (= c) on
    [tau, inf).

    The remaining flow is then a rotated Koebe map composed with w(z, tau),
    whence a(inf) = sum_{m=1}^n m (rho e^{-tau})^{m-1} A^{m-1} a(tau) with
    rho = -e^{-ic}.
    """
    a = check_coefficients(a_tau)
    n = len(a)
    rho = -np.exp(-1j * tail_value) * np.exp(-tau)
    out = a.copy()
    v = a.copy()
    tmp = np.empty(n, dtype=np.complex128)
    weight = 1. + 0j
    for m in range(2, n + 1):
        _shift(a, v, tmp)
        v, tmp = tmp, v
        weight *= rho
        out += m * weight * v
    return out


def extract_limit_coefficients(traj, tol=1e-8, driving=None):
    """Limit coefficients a(inf) of a trajectory.

    Parameters
    ----------
    traj: Trajectory
        an integrated trajectory

    tol: float, optional (default 1e-8)
        tail bound above which the result is flagged as unconverged

    driving: DrivingFunction, optional (default None)
        if given and constant from some time <= T on, the tail is closed
        exactly (tail bound 0)

    Returns
    -------
    a_inf: 1D array of n complex128

    tail_bound: float

    converged: bool

    """
    a_T = traj.a_samples[-1]
    if driving is not None and driving.tail_start <= traj.horizon:
        return close_tail(a_T, traj.horizon, driving.tail_value), 0., True
    bound = traj.tail_error_estimate
    return a_T.copy(), bound, bool(bound <= tol)


class LoewnerFlow(object):
    """Integrates the Loewner coefficient flow for a given driving function
    and extracts its limit coefficients.

    Parameters
    ----------
    n: int
        truncation order

    horizon: float, optional (default 30)
        integration horizon T

    step: float, optional (default 1e-3)
        RK4 step h

    sample_every: int, optional (default 1)
        trajectory subsampling

    tol: float, optional (default 1e-8)
        tolerance on the tail bound

    exact_tail: bool, optional (default False)
        if set, close the tail exactly when the driving function is
        eventually constant

    verbose: int, optional (default 1)
        verbosity level, set to 0 for no verbose

    Attributes
    ----------
    trajectory_: Trajectory

    limit_: 1D array of n complex128
        limit coefficients

    tail_bound_: float

    converged_: bool

    """

    def __init__(self, n, horizon=30., step=1e-3, sample_every=1, tol=1e-8,
                 exact_tail=False, verbose=1):
        self.n = n
        self.horizon = horizon
        self.step = step
        self.sample_every = sample_every
        self.tol = tol
        self.exact_tail = exact_tail
        self.verbose = verbose

    def _log(self, msg):
        if self.verbose:
            print(msg)

    def __repr__(self):
        return str(self.__dict__)

    def fit(self, driving, psi0=None, q0=None, a0=None):
        """Integrates the flow driven by `driving`.

        Returns
        -------
        self: LoewnerFlow
            fitted object

        """
        self.driving_ = make_driving_function(driving)
        self.trajectory_ = integrate(
            self.driving_, self.n, T=self.horizon, h=self.step, psi0=psi0,
            q0=q0, a0=a0, sample_every=self.sample_every, log=self._log)
        self.limit_, self.tail_bound_, self.converged_ = \
            extract_limit_coefficients(
                self.trajectory_, tol=self.tol,
                driving=self.driving_ if self.exact_tail else None)
        if not self.converged_:
            self._log("Tail bound %g exceeds tolerance %g; increase the "
                      "horizon" % (self.tail_bound_, self.tol))
        return self

    def get_limit_report(self):
        """The limit coefficients and their provenance, as an ordered
        dict."""
        check_is_fitted(self, "limit_")
        return OrderedDict([
            ("n", self.n),
            ("driving", self.driving_.to_dict()),
            ("horizon", self.trajectory_.horizon),
            ("step", self.trajectory_.step),
            ("limit", complex_to_pairs(self.limit_)),
            ("tail_bound", self.tail_bound_),
            ("converged", self.converged_)])

    def transform(self, output_dir, prefix="", write_trajectory=True):
        """Writes the limit report (JSON) and the trajectory (CSV).

        Returns
        -------
        output: dict
            paths of the written files, keyed 'limit' and 'trajectory'

        """
        check_is_fitted(self, "trajectory_")
        output = {}
        output["limit"] = save_json(self.get_limit_report(), output_dir,
                                    "%slimit.json" % prefix)
        if write_trajectory:
            output["trajectory"] = save_trajectory_csv(
                self.trajectory_, output_dir, "%strajectory.csv" % prefix)
        self._log("Wrote %s" % ", ".join(sorted(output.values())))
        return output
