"""
:Module: hamiltonian
:Synopsis: closed-form pseudo-Hamiltonian H(t, a, psi, u) and its mixed
derivatives in u and t; the trigonometric polynomial whose maximum at u=pi
is the first sufficient condition, and its global maximization.

"""

import numpy as np
from .series_core import (_shift, TWO_PI, check_coefficients, check_adjoint,
                          check_functional, derivative_functional_coefficients,
                          reduce_angle)

# grid for global maximization of trigonometric polynomials; 8192 / 2 is pi
N_GRID = 8192


class DegeneratePolynomialError(ValueError):
    """Raised on all-zero trigonometric polynomials."""
    pass


def shift_products(a, psi):
    """W_s = (A^s a)^T psi, for s = 1..n-1 (no conjugation, psi already
    holds the conjugated adjoint)."""
    a = check_coefficients(a)
    n = len(a)
    psi = check_adjoint(psi, n=n)
    w = np.zeros(n - 1, dtype=np.complex128)
    v = a.copy()
    tmp = np.empty(n, dtype=np.complex128)
    for s in range(1, n):
        _shift(a, v, tmp)
        v, tmp = tmp, v
        w[s - 1] = np.dot(v, psi)
    return w


def hamiltonian_mixed(t, a, psi, u_val, q=0, m=0):
    """Mixed derivative d^q/du^q d^m/dt^m of the pseudo-Hamiltonian

        H(t, a, psi, u) = Re{-2 sum_{s=1}^{n-1} e^{-s(t + iu)} (A^s a)^T psi}

    Parameters
    ----------
    t: float
        time

    a: array_like of n complex
        coefficient vector

    psi: array_like of n complex
        conjugated adjoint vector

    u_val: float or array of floats
        control value(s); arrays are evaluated elementwise

    q, m: int, optional (default 0)
        orders of differentiation in u and t; q = m = 0 gives H

    Returns
    -------
    h: float or array of floats (shape of u_val)

    """
    if q < 0 or m < 0:
        raise ValueError("Orders must be nonnegative, got q=%s, m=%s" % (
            q, m))
    w = shift_products(a, psi)
    s = np.arange(1., len(w) + 1.)
    factor = (-1j * s) ** q * (-s) ** m
    phase = np.exp(-np.multiply.outer(t + 1j * np.asarray(u_val, float), s))
    return np.real(-2. * np.dot(phase, factor * w))


def transport_derivative(t, a, psi, u_val, q=1, m=0):
    """State-transport part of the total time derivative of H_{u^q t^m}.

    Along solutions of the coefficient and adjoint systems,

        d/dt H_{u^q t^m} = H_{u^q t^(m+1)} + H_{u^(q+1) t^m} du/dt
                           + transport_derivative(t, a, psi, u, q, m)

    where the last term gathers dH/da . da/dt + dH/dpsi . dpsi/dt and
    equals Re{-4 sum_{s, j} (-is)^q (-s)^m (j - s) e_{s+j} W_{s+j}},
    e_p = e^{-p(t + iu)}, s + j <= n - 1. It is identically 0 for q = 0,
    for n <= 3, and for real (a, psi) at u = pi.
    """
    w = shift_products(a, psi)
    n_s = len(w)
    weights = np.zeros(n_s, dtype=np.complex128)
    for s in range(1, n_s + 1):
        for j in range(1, n_s + 1 - s):
            weights[s + j - 1] += (-1j * s) ** q * (-s) ** m * (j - s)
    p = np.arange(1., n_s + 1.)
    phase = np.exp(-np.multiply.outer(t + 1j * np.asarray(u_val, float), p))
    return np.real(-4. * np.dot(phase, weights * w))


class TrigPolynomial(object):
    """P(u) = Re(sum_{k=2}^n c_k e^{-i(k-1)u}).

    Parameters
    ----------
    c: array_like of n - 1 complex
        coefficients, c[0] is c_2

    """

    def __init__(self, c):
        self.c = np.atleast_1d(np.array(c, dtype=np.complex128))
        self._freqs = np.arange(1., len(self.c) + 1.)

    @property
    def n(self):
        return len(self.c) + 1

    @property
    def scale(self):
        return np.sum(np.abs(self.c))

    def derivative(self, u, order=1):
        """order-th derivative of P at u (elementwise on arrays)."""
        phase = np.exp(-1j * np.multiply.outer(np.asarray(u, float),
                                                self._freqs))
        return np.real(np.dot(phase, (-1j * self._freqs) ** order * self.c))

    def __call__(self, u):
        return self.derivative(u, order=0)

    def __repr__(self):
        return str(self.__dict__)


def theorem1_polynomial(lam, a_inf):
    """Polynomial P(u) = Re(-sum_k sum_j conj(lambda_{j+k-1}) j a_j
    e^{-i(k-1)u}), i.e c_k = -psi_k(0) with psi(0) the initial adjoint of the
    functional.

    2 P(u) equals H(0, a0, psi(0), u).
    """
    a_inf = check_coefficients(a_inf)
    lam = check_functional(lam, n=len(a_inf))
    return TrigPolynomial(-derivative_functional_coefficients(lam,
                                                              a_inf)[1:])


def maximize_trig(P, n_grid=N_GRID, max_iter=50):
    """Global maximization of a trigonometric polynomial on [0, 2pi).

    A uniform grid locates the best point (lowest index on ties), then a
    safeguarded Newton iteration on P' polishes it: steps are limited to one
    grid spacing and only accepted when P does not decrease.

    Parameters
    ----------
    P: TrigPolynomial
        the polynomial

    n_grid: int, optional (default 8192)
        grid size

    max_iter: int, optional (default 50)
        max number of Newton iterations

    Returns
    -------
    u_star: float
        maximizer, in [0, 2pi)

    value: float
        P(u_star)

    gap: float
        value minus the best grid value farther than pi / 64 from u_star
        (small gaps flag competing peaks)

    Raises
    ------
    DegeneratePolynomialError
        if all coefficients vanish

    """
    if not np.any(P.c != 0.):
        raise DegeneratePolynomialError(
            "Can't maximize an all-zero trigonometric polynomial")
    spacing = TWO_PI / n_grid
    grid = spacing * np.arange(n_grid)
    values = P(grid)
    best = np.argmax(values)
    u, value = grid[best], values[best]
    for _ in range(max_iter):
        d1, d2 = P.derivative(u, 1), P.derivative(u, 2)
        if d2 >= 0.:
            # flat or convex here: Newton has nothing to say
            break
        step = np.clip(-d1 / d2, -spacing, spacing)
        new_value = P(u + step)
        if new_value < value:
            break
        u, value = u + step, new_value
        if abs(step) < 1e-15:
            break
    u = reduce_angle(u)

    dist = np.abs((grid - u + np.pi) % TWO_PI - np.pi)
    far = dist > np.pi / 64
    gap = value - values[far].max() if np.any(far) else np.inf
    return u, float(value), float(gap)


def attains_maximum_at(P, u0=np.pi, tol_u=1e-6, rel_tol=1e-9,
                       min_gap=None, n_grid=N_GRID):
    """Decides whether P attains its global maximum at u0.

    Accepted iff |u* - u0| <= tol_u after refinement and
    P(u0) >= max over the grid - rel_tol * scale, scale = sum |c_k|.

    Parameters
    ----------
    min_gap: float, optional (default None)
        if given, additionally require the second-peak gap to exceed
        min_gap * scale (strict maximum)

    Returns
    -------
    verdict: bool

    diagnostics: dict
        argmax, value, value at u0, gap

    """
    u_star, value, gap = maximize_trig(P, n_grid=n_grid)
    dist = abs((u_star - u0 + np.pi) % TWO_PI - np.pi)
    grid = TWO_PI * np.arange(n_grid) / n_grid
    value_u0 = float(P(u0))
    verdict = (dist <= tol_u and
               value_u0 >= P(grid).max() - rel_tol * P.scale)
    if min_gap is not None:
        verdict = verdict and gap > min_gap * P.scale
    return bool(verdict), dict(argmax=u_star, value=value, value_at=value_u0,
                               gap=gap)
