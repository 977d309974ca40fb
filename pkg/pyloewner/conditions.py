"""
:Module: conditions
:Synopsis: initial adjoint values of a functional, checkers for the four
sufficient conditions under which a common extremal function of two
functionals is the Koebe function, the derivatives u_{t^m}(alpha, 0) of the
optimal driving function, the necessary constant c_m, the degeneracy order
of H_uu and the rotation normalization.

Notations
---------
For a functional nu and coefficients a, psi(nu) is the initial adjoint
vector, and

    D(nu)   = sum_{k=2}^n (-1)^k (k - 1)^2 Re psi_k(nu)
    N_m(nu) = sum_{k=2}^n (-1)^k (k - 1)^(m + 1) Im psi_k(nu)

so that at (t, a, u) = (0, a0, pi): H_uu = -2 D, H_{ut^m} = 2 (-1)^m N_m.

"""

from collections import OrderedDict
import numpy as np
import scipy.linalg
from sklearn.utils.validation import check_is_fitted
from .series_core import (check_coefficients, check_functional,
                          initial_coefficients, blend_functionals,
                          rotate_pair, rotate_functional, reduce_angle,
                          derivative_functional_coefficients)
from .hamiltonian import (hamiltonian_mixed, transport_derivative,
                          theorem1_polynomial, maximize_trig,
                          attains_maximum_at, DegeneratePolynomialError)
from .io_utils import save_json

# sampled blending weights
ALPHAS = (0., .25, .5, .75, 1.)

# verdicts
KOEBE_IMPLIED = "KOEBE_IMPLIED"
NOT_KOEBE_CERTIFIED = "NOT_KOEBE_CERTIFIED"
INCONCLUSIVE = "INCONCLUSIVE"
PASS, FAIL = "PASS", "FAIL"

REPORT_FIELDS = ("th1", "th2", "th3", "th4", "u_derivs", "c_m",
                 "degeneracy_order", "verdict")


class DegenerateDenominatorError(ValueError):
    """Raised when |H_uu| at (0, a0, pi) is below the degeneracy threshold;
    see `degeneracy_order`."""
    pass


def _check_pair(lam, mu, a_inf):
    a_inf = check_coefficients(a_inf)
    n = len(a_inf)
    return (check_functional(lam, n=n), check_functional(mu, n=n), a_inf)


def _scale(lam, mu):
    return max(np.sum(np.abs(lam)), np.sum(np.abs(mu)), np.finfo(float).tiny)


def lemma1_initial_adjoint(lam, a_inf, anchor_first=False):
    """Initial adjoint psi(0) of a functional, given the limit coefficients.

    psi_k(0) = sum_{j=1}^{n-k+1} conj(lambda_{j+k-1}) j a_j, k = 2..n.

    Parameters
    ----------
    lam: array_like of n - 1 complex
        functional (lambda_2, ..., lambda_n)

    a_inf: array_like of n complex
        limit coefficients

    anchor_first: bool, optional (default False)
        if set, psi_1(0) takes the k = 1 value of the same sum, which also
        drives psi_1 to 0 at infinity; otherwise psi_1(0) = 0

    Returns
    -------
    psi0: 1D array of n complex128

    """
    psi0 = derivative_functional_coefficients(lam, a_inf)
    if not anchor_first:
        psi0[0] = 0.
    return psi0


def companion_initial_values(lam, a_inf):
    """Coefficients c_2, ..., c_{n+1} of
    (conj(lambda_n) z^2 + ... + conj(lambda_2) z^n) f'(z).

    Reversed, they give the anchored initial adjoint.
    """
    a_inf = check_coefficients(a_inf)
    n = len(a_inf)
    lam = check_functional(lam, n=n)
    poly = np.zeros(n + 1, dtype=np.complex128)
    poly[n + 2 - np.arange(2, n + 1)] = np.conj(lam)
    fprime = np.arange(1, n + 1) * a_inf
    return np.convolve(poly, fprime)[2:n + 2]


def blended_adjoint(lam, mu, alpha, a_inf):
    """Initial adjoint of (1 - alpha) lambda + alpha mu."""
    return lemma1_initial_adjoint(blend_functionals(lam, mu, alpha), a_inf)


def _alternating_sum(psi, power, part):
    k = np.arange(2, len(psi) + 1)
    return float(np.sum((-1.) ** k * (k - 1.) ** power * part(psi[1:])))


def th2_denominator(lam, mu, a_inf, alpha):
    """D(alpha) = sum_k (-1)^k (k - 1)^2 Re psi_k(alpha, 0), affine in
    alpha."""
    return _alternating_sum(blended_adjoint(lam, mu, alpha, a_inf), 2,
                            np.real)


def _numerator(psi, m):
    return _alternating_sum(psi, m + 1, np.imag)


def check_th1(lam, a_inf, tol=1e-6, rel_tol=1e-9, min_gap=None):
    """Checks that the polynomial of the functional attains its maximum at
    u = pi.

    Returns
    -------
    result: OrderedDict
        verdict (PASS, FAIL or INCONCLUSIVE), argmax, gap, reason

    """
    P = theorem1_polynomial(lam, a_inf)
    try:
        passed, diag = attains_maximum_at(P, np.pi, tol_u=tol,
                                          rel_tol=rel_tol, min_gap=min_gap)
    except DegeneratePolynomialError as exc:
        return OrderedDict([("verdict", INCONCLUSIVE), ("argmax", None),
                            ("gap", None), ("reason", str(exc))])
    return OrderedDict([("verdict", PASS if passed else FAIL),
                        ("argmax", diag["argmax"]), ("gap", diag["gap"]),
                        ("reason", None)])


def check_th2(lam, mu, a_inf, tol=1e-9):
    """Checks that D(alpha) does not vanish on [0, 1].

    D being affine in alpha, this holds iff D(0) and D(1) share their sign
    and none of them is within tol * scale of 0.

    Returns
    -------
    result: OrderedDict
        verdict (PASS or FAIL), d0, d1

    """
    lam, mu, a_inf = _check_pair(lam, mu, a_inf)
    d0 = th2_denominator(lam, mu, a_inf, 0.)
    d1 = th2_denominator(lam, mu, a_inf, 1.)
    thr = tol * _scale(lam, mu)
    passed = d0 * d1 > 0. and min(abs(d0), abs(d1)) > thr
    return OrderedDict([("verdict", PASS if passed else FAIL), ("d0", d0),
                        ("d1", d1)])


def check_th3(lam, mu, a_inf):
    """Residual N_0(lambda) - N_0(mu) of the third condition."""
    lam, mu, a_inf = _check_pair(lam, mu, a_inf)
    return (_numerator(lemma1_initial_adjoint(lam, a_inf), 0) -
            _numerator(lemma1_initial_adjoint(mu, a_inf), 0))


def check_th4(lam, mu, a_inf, m_max=None, tol=1e-9):
    """Residual pairs (N_m(lambda), N_m(mu)) for m = 1..m_max.

    Parameters
    ----------
    m_max: int, optional (default n - 1)
        last order checked; orders 1..n-1 imply all the others

    Returns
    -------
    residuals: list of (float, float)

    passed: bool
        True iff all residuals are within tol * scale

    """
    lam, mu, a_inf = _check_pair(lam, mu, a_inf)
    if m_max is None:
        m_max = len(a_inf) - 1
    if m_max < 1:
        raise ValueError("m_max must be >= 1, got %s" % m_max)
    psi_lam = lemma1_initial_adjoint(lam, a_inf)
    psi_mu = lemma1_initial_adjoint(mu, a_inf)
    residuals = [(_numerator(psi_lam, m), _numerator(psi_mu, m))
                 for m in range(1, m_max + 1)]
    thr = tol * _scale(lam, mu)
    passed = all(abs(r) <= thr for pair in residuals for r in pair)
    return residuals, passed


def th4_vandermonde_check(lam, a_inf):
    """Recovers Im psi_k(0), k = 2..n, from the residuals N_1, ..., N_{n-1}
    by solving their Vandermonde system (nodes 1..n-1).

    Returns
    -------
    recovered: 1D array of n - 1 floats

    direct: 1D array of n - 1 floats
        Im psi_k(0) computed directly

    """
    a_inf = check_coefficients(a_inf)
    n = len(a_inf)
    psi = lemma1_initial_adjoint(lam, a_inf)
    nodes = np.arange(1., n)
    residuals = np.array([_numerator(psi, m) for m in range(1, n)])
    vander = nodes[None, :] ** np.arange(1, n)[:, None]
    y = scipy.linalg.solve(vander, residuals)
    k = np.arange(2, n + 1)
    recovered = y * (-1.) ** k / (k - 1.)
    return recovered, psi[1:].imag.copy()


def _degeneracy_threshold(psi, order, degeneracy_tol):
    k = np.arange(2, len(psi) + 1)
    return degeneracy_tol * max(
        2. * np.sum((k - 1.) ** order * np.abs(psi[1:])),
        np.finfo(float).tiny)


def u_derivative_at_zero(lam, mu, alpha, a_inf, m, degeneracy_tol=1e-8,
                         include_transport=False):
    """u_{t^m}(alpha, 0) = -H_{ut^m} / H_uu at (0, a0, psi(alpha, 0), pi).

    Valid when the fourth condition holds for all orders p < m; this is
    not re-verified here.

    Parameters
    ----------
    include_transport: bool, optional (default False)
        for m = 1 only: add the state-transport term of dH_u/dt to the
        numerator (it vanishes for real data and for n <= 3)

    Raises
    ------
    DegenerateDenominatorError
        if |H_uu| is below degeneracy_tol * scale

    """
    lam, mu, a_inf = _check_pair(lam, mu, a_inf)
    if m < 1:
        raise ValueError("m must be >= 1, got %s" % m)
    if include_transport and m != 1:
        raise ValueError("include_transport is only defined for m = 1")
    n = len(a_inf)
    psi = blended_adjoint(lam, mu, alpha, a_inf)
    a0 = initial_coefficients(n)
    huu = hamiltonian_mixed(0., a0, psi, np.pi, q=2, m=0)
    if abs(huu) <= _degeneracy_threshold(psi, 2, degeneracy_tol):
        raise DegenerateDenominatorError(
            "H_uu = %g vanishes at alpha=%g; use degeneracy_order to find "
            "the first nonvanishing even derivative" % (huu, alpha))
    num = hamiltonian_mixed(0., a0, psi, np.pi, q=1, m=m)
    if include_transport:
        num += transport_derivative(0., a0, psi, np.pi, q=1, m=0)
    return float(-num / huu)


def necessary_cm(lam, mu, a_inf, m_max=None, tol=1e-9, degeneracy_tol=1e-8,
                 alphas=ALPHAS):
    """Looks for the constant c_m of the necessary conditions.

    Finds the first m <= m_max at which the fourth condition fails and
    fits N_m(alpha) = c_m D(alpha) by least squares over the sampled
    alphas.

    Returns
    -------
    result: OrderedDict or None
        None when the fourth condition holds up to m_max; otherwise m,
        c_m, proportional (max deviation <= tol * |c_m|) and max_deviation

    Raises
    ------
    DegenerateDenominatorError
        if D(alpha) degenerates at a sampled alpha

    """
    lam, mu, a_inf = _check_pair(lam, mu, a_inf)
    residuals, passed = check_th4(lam, mu, a_inf, m_max=m_max, tol=tol)
    if passed:
        return None
    thr = tol * _scale(lam, mu)
    m = 1 + [max(abs(r) for r in pair) > thr
             for pair in residuals].index(True)

    nums, dens = [], []
    for alpha in alphas:
        psi = blended_adjoint(lam, mu, alpha, a_inf)
        den = _alternating_sum(psi, 2, np.real)
        if 2. * abs(den) <= _degeneracy_threshold(psi, 2, degeneracy_tol):
            raise DegenerateDenominatorError(
                "D(alpha) = %g vanishes at alpha=%g; use degeneracy_order "
                "to find the first nonvanishing even derivative" % (
                    den, alpha))
        nums.append(_numerator(psi, m))
        dens.append(den)
    nums, dens = np.array(nums), np.array(dens)
    c_m = float(scipy.linalg.lstsq(dens[:, None], nums)[0][0])
    deviation = float(np.max(np.abs(nums - c_m * dens)))
    proportional = deviation <= tol * abs(c_m) + 1e-14 * np.max(np.abs(nums))
    return OrderedDict([("m", m), ("c_m", c_m),
                        ("proportional", bool(proportional and c_m != 0.)),
                        ("max_deviation", deviation)])


def degeneracy_order(lam, mu, a_inf, tol=1e-8, alphas=ALPHAS):
    """Minimal even order 2l such that, at (0, a0, pi) and for every
    sampled alpha, H_{u^q} vanishes for 2 <= q < 2l and H_{u^{2l}} < 0.

    Returns
    -------
    order: int or None
        2 in the nondegenerate case, None when no such order <= 2(n - 1)
        exists

    """
    lam, mu, a_inf = _check_pair(lam, mu, a_inf)
    n = len(a_inf)
    a0 = initial_coefficients(n)
    psis = [blended_adjoint(lam, mu, alpha, a_inf) for alpha in alphas]

    def _derivative(psi, q):
        return hamiltonian_mixed(0., a0, psi, np.pi, q=q, m=0)

    for order in range(2, 2 * (n - 1) + 1, 2):
        if all(_derivative(psi, order) <
               -_degeneracy_threshold(psi, order, tol) for psi in psis):
            return order
        for q in (order, order + 1):
            if any(abs(_derivative(psi, q)) >
                   _degeneracy_threshold(psi, q, tol) for psi in psis):
                return None
    return None


def normalize_rotation(lam, a_inf, tol_u=1e-6):
    """Rotates (lambda, a) so that the polynomial of the functional attains
    its maximum at pi.

    Returns
    -------
    beta: float
        rotation angle in [0, 2pi); 0 when the maximum is already within
        tol_u of pi

    nu: 1D array of n - 1 complex128
        rotated functional

    a_rot: 1D array of n complex128
        rotated coefficients

    Raises
    ------
    DegeneratePolynomialError

    """
    a_inf = check_coefficients(a_inf)
    lam = check_functional(lam, n=len(a_inf))
    u_star, _, _ = maximize_trig(theorem1_polynomial(lam, a_inf))
    beta = (u_star - np.pi + np.pi) % (2 * np.pi) - np.pi
    if abs(beta) <= tol_u:
        return 0., lam, a_inf
    beta = reduce_angle(beta)
    nu, a_rot = rotate_pair(lam, a_inf, beta)
    return beta, nu, a_rot


def condition_verdict(th1_ok, th2_ok, th3_ok, th4_ok, c_m=None):
    """Overall verdict from the condition outcomes.

    KOEBE_IMPLIED needs all four conditions. NOT_KOEBE_CERTIFIED needs th1
    to th3 and a proportional c_m, i.e. every premise of the sufficient
    conditions but th4; anything else is INCONCLUSIVE.
    """
    premises_ok = th1_ok and th2_ok and th3_ok
    if premises_ok and th4_ok:
        return KOEBE_IMPLIED
    if premises_ok and c_m is not None and c_m["proportional"]:
        return NOT_KOEBE_CERTIFIED
    return INCONCLUSIVE


class ConditionReport(object):
    """Outcome of the condition checks on a (lambda, mu, a) triple.

    Attributes
    ----------
    th1: OrderedDict
        verdict, argmax, gap, reason, rotation

    th2: OrderedDict
        verdict, d0, d1

    th3: float
        residual

    th4: OrderedDict
        verdict, residuals (one [m, lambda-side, mu-side] per order),
        vandermonde_error

    u_derivs: list of OrderedDict
        m, alpha, value (None when degenerate)

    c_m: OrderedDict or None

    degeneracy_order: int or None

    verdict: string
        KOEBE_IMPLIED, NOT_KOEBE_CERTIFIED or INCONCLUSIVE

    """

    def __init__(self, th1, th2, th3, th4, u_derivs, c_m, degeneracy_order,
                 verdict):
        self.th1 = th1
        self.th2 = th2
        self.th3 = th3
        self.th4 = th4
        self.u_derivs = u_derivs
        self.c_m = c_m
        self.degeneracy_order = degeneracy_order
        self.verdict = verdict

    def to_dict(self):
        return OrderedDict((field, getattr(self, field))
                           for field in REPORT_FIELDS)

    def __repr__(self):
        return str(self.__dict__)


def validate_report(doc):
    """Checks that a (decoded) JSON document is a condition report.

    Raises
    ------
    ValueError
        on missing or unknown fields, or bad values

    """
    if not isinstance(doc, dict):
        raise ValueError("A report is a JSON object, got %s" % type(doc))
    if list(doc.keys()) != list(REPORT_FIELDS):
        raise ValueError("Report fields must be %s, got %s" % (
            list(REPORT_FIELDS), list(doc.keys())))
    if doc["verdict"] not in (KOEBE_IMPLIED, NOT_KOEBE_CERTIFIED,
                              INCONCLUSIVE):
        raise ValueError("Unknown verdict %r" % doc["verdict"])
    for name in ("th1", "th2", "th4"):
        if doc[name]["verdict"] not in (PASS, FAIL, INCONCLUSIVE):
            raise ValueError("Unknown %s verdict %r" % (
                name, doc[name]["verdict"]))
    th3 = doc["th3"]
    if (isinstance(th3, bool) or not isinstance(th3, (int, float)) or
            not np.isfinite(th3)):
        raise ValueError("th3 residual must be a finite real, got %r" % (
            doc["th3"]))
    for row in doc["th4"]["residuals"]:
        if len(row) != 3 or not all(np.isfinite(row)):
            raise ValueError("Bad th4 residual row %r" % (row,))
    order = doc["degeneracy_order"]
    if order is not None and (order < 2 or order % 2):
        raise ValueError("degeneracy_order must be even >= 2, got %r" % (
            order,))
    return doc


class ConditionChecker(object):
    """Runs the condition checks on two functionals and their common
    candidate extremal coefficients.

    The pipeline is: rotation normalization, th1, th2, th3, th4 (with a
    Vandermonde cross-check), u-derivatives, c_m, degeneracy order,
    verdict.

    Parameters
    ----------
    tol: float, optional (default 1e-9)
        residual tolerance (relative to max(sum |lambda_k|, sum |mu_k|))

    argmax_tol: float, optional (default 1e-6)
        tolerance on |u* - pi| in th1

    degeneracy_tol: float, optional (default 1e-8)
        relative threshold under which H_uu (and higher) count as 0

    m_max: int, optional (default None, meaning n - 1)
        last order of th4

    normalize: bool, optional (default True)
        rotate the pair so that the th1 maximum sits at pi first

    verbose: int, optional (default 1)
        verbosity level, set to 0 for no verbose

    Attributes
    ----------
    report_: ConditionReport

    rotation_: float
        angle of the applied rotation

    """

    def __init__(self, tol=1e-9, argmax_tol=1e-6, degeneracy_tol=1e-8,
                 m_max=None, normalize=True, verbose=1):
        self.tol = tol
        self.argmax_tol = argmax_tol
        self.degeneracy_tol = degeneracy_tol
        self.m_max = m_max
        self.normalize = normalize
        self.verbose = verbose

    def _log(self, msg):
        if self.verbose:
            print(msg)

    def __repr__(self):
        return str(self.__dict__)

    def fit(self, lam, mu, a_inf):
        """Checks the conditions on (lambda, mu, a_inf).

        Returns
        -------
        self: ConditionChecker
            fitted object

        """
        a_inf = check_coefficients(a_inf)
        n = len(a_inf)
        lam = check_functional(lam, n=n, nondegenerate=True)
        mu = check_functional(mu, n=n, nondegenerate=True)

        self.rotation_ = 0.
        if self.normalize:
            try:
                self.rotation_, lam, a_inf = normalize_rotation(
                    lam, a_inf, tol_u=self.argmax_tol)
                mu = rotate_functional(mu, self.rotation_)
            except DegeneratePolynomialError:
                pass
            if self.rotation_:
                self._log("Rotated the pair by beta=%g" % self.rotation_)

        th1 = check_th1(lam, a_inf, tol=self.argmax_tol)
        th1["rotation"] = self.rotation_
        self._log("th1: %s" % th1["verdict"])
        th2 = check_th2(lam, mu, a_inf, tol=self.tol)
        self._log("th2: %s (D(0)=%g, D(1)=%g)" % (th2["verdict"], th2["d0"],
                                                  th2["d1"]))
        th3 = check_th3(lam, mu, a_inf)
        th3_ok = abs(th3) <= self.tol * _scale(lam, mu)
        self._log("th3: residual %g" % th3)
        residuals, th4_ok = check_th4(lam, mu, a_inf, m_max=self.m_max,
                                      tol=self.tol)
        vander_error = 0.
        for nu in (lam, mu):
            recovered, direct = th4_vandermonde_check(nu, a_inf)
            vander_error = max(vander_error,
                               float(np.max(np.abs(recovered - direct))))
        th4 = OrderedDict([
            ("verdict", PASS if th4_ok else FAIL),
            ("residuals", [[m + 1, r[0], r[1]]
                           for m, r in enumerate(residuals)]),
            ("vandermonde_error", vander_error)])
        self._log("th4: %s" % th4["verdict"])

        c_m = None
        if not th4_ok:
            try:
                c_m = necessary_cm(lam, mu, a_inf, m_max=self.m_max,
                                   tol=self.tol,
                                   degeneracy_tol=self.degeneracy_tol)
            except DegenerateDenominatorError as exc:
                self._log(str(exc))
        m = c_m["m"] if c_m is not None else 1
        u_derivs = []
        for alpha in ALPHAS:
            try:
                value = u_derivative_at_zero(
                    lam, mu, alpha, a_inf, m,
                    degeneracy_tol=self.degeneracy_tol)
            except DegenerateDenominatorError:
                value = None
            u_derivs.append(OrderedDict([("m", m), ("alpha", alpha),
                                         ("value", value)]))
        order = degeneracy_order(lam, mu, a_inf, tol=self.degeneracy_tol)

        verdict = condition_verdict(th1["verdict"] == PASS,
                                    th2["verdict"] == PASS, th3_ok, th4_ok,
                                    c_m)
        self._log("Verdict: %s" % verdict)
        self.report_ = ConditionReport(th1, th2, th3, th4, u_derivs, c_m,
                                       order, verdict)
        return self

    def transform(self, output_dir, basename="report.json"):
        """Writes the report as JSON; returns the path."""
        check_is_fitted(self, "report_")
        return save_json(self.report_.to_dict(), output_dir, basename)
