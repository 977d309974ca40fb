"""
:Module: series_core
:Synopsis: routine functions for doing coefficient-vector business: the
strictly-shifting action A(a) and its powers, rotations of functions and
functionals, blending of functionals, Koebe reference coefficients.

Conventions
-----------
A coefficient vector is a 1D complex array of length n whose entry 0 holds
a_1 (always 1). A functional is a 1D complex array of length n - 1 whose
entry 0 holds lambda_2. An adjoint vector is a 1D complex array of length n
whose entry 0 holds psi_bar_1.

"""

import numpy as np
from numba import njit

# house-hold constants
TWO_PI = 2. * np.pi


@njit(cache=True)
def _shift(a, v, out):
    """out <- A v, i.e (A v)_i = sum_{j < i} a_{i - j} v_j.

    A is multiplication by f(z) = sum_k a_k z^k on truncated series, so
    A^s a holds the coefficients of f^(s + 1).
    """
    n = v.shape[0]
    out[0] = 0.
    for i in range(1, n):
        acc = 0j
        for j in range(i):
            acc += a[i - j - 1] * v[j]
        out[i] = acc


@njit(cache=True)
def _shift_transposed(a, v, out):
    """out <- A^T v, i.e (A^T v)_i = sum_{j > i} a_{j - i} v_j."""
    n = v.shape[0]
    for i in range(n):
        acc = 0j
        for j in range(i + 1, n):
            acc += a[j - i - 1] * v[j]
        out[i] = acc


def check_coefficients(a, n=None):
    """Sanitizes a coefficient vector.

    Parameters
    ----------
    a: array_like of n complex
        coefficients (a_1, ..., a_n); a_1 must be 1

    n: int, optional (default None)
        expected truncation order

    Returns
    -------
    a: 1D array of complex128
        a fresh copy of the input

    Raises
    ------
    ValueError
        if a is not 1D, has length < 2, does not match n or has a_1 != 1

    """
    a = np.array(a, dtype=np.complex128)
    if a.ndim != 1 or len(a) < 2:
        raise ValueError(
            "Expecting 1D coefficient vector of length >= 2, got shape %s" % (
                a.shape,))
    if n is not None and len(a) != n:
        raise ValueError(
            "Coefficient vector has length %i, expected n=%i" % (len(a), n))
    if a[0] != 1.:
        raise ValueError("a_1 must be exactly 1, got %s" % a[0])
    if not np.all(np.isfinite(a)):
        raise ValueError("Coefficient vector has non-finite entries")
    return a


def check_functional(lam, n=None, nondegenerate=False):
    """Sanitizes a functional (lambda_2, ..., lambda_n).

    Parameters
    ----------
    lam: array_like of n - 1 complex
        functional coefficients, lam[0] is lambda_2

    n: int, optional (default None)
        expected truncation order

    nondegenerate: bool, optional (default False)
        if set, lambda_n = 0 is an error

    Returns
    -------
    lam: 1D array of complex128

    """
    lam = np.array(lam, dtype=np.complex128)
    if lam.ndim != 1 or len(lam) < 1:
        raise ValueError(
            "Expecting 1D functional of length >= 1, got shape %s" % (
                lam.shape,))
    if n is not None and len(lam) != n - 1:
        raise ValueError(
            "Functional has %i coefficients, expected n - 1 = %i" % (
                len(lam), n - 1))
    if not np.all(np.isfinite(lam)):
        raise ValueError("Functional has non-finite entries")
    if nondegenerate and lam[-1] == 0.:
        raise ValueError("lambda_n must be nonzero, got lambda = %s" % lam)
    return lam


def check_adjoint(psi, n=None):
    """Sanitizes an adjoint vector (psi_bar_1, ..., psi_bar_n)."""
    psi = np.array(psi, dtype=np.complex128)
    if psi.ndim != 1 or (n is not None and len(psi) != n):
        raise ValueError(
            "Expecting adjoint vector of length %s, got shape %s" % (
                n, psi.shape))
    return psi


def reduce_angle(beta):
    """Reduces a rotation angle modulo 2pi, into [0, 2pi)."""
    beta = float(beta) % TWO_PI
    # x % 2pi can round up to 2pi for tiny negative x
    return 0. if beta >= TWO_PI else beta


def initial_coefficients(n):
    """Returns a0 = (1, 0, ..., 0), the coefficients of the identity map."""
    if n < 2:
        raise ValueError("n must be >= 2, got %s" % n)
    a0 = np.zeros(n, dtype=np.complex128)
    a0[0] = 1.
    return a0


def koebe_coefficients(n, beta=0.):
    """Coefficients of the Koebe function k(z) = z / (1 - z)^2, optionally
    rotated.

    Parameters
    ----------
    n: int
        truncation order, n >= 2

    beta: float, optional (default 0)
        rotation angle; the k-th coefficient becomes k e^{i(k - 1)beta}

    Returns
    -------
    a: 1D array of n complex128
        (1, 2, ..., n) when beta = 0

    """
    if n < 2:
        raise ValueError("n must be >= 2, got %s" % n)
    k = np.arange(1, n + 1)
    return k * np.exp(1j * (k - 1) * beta)


def apply_shift_power(a, v, s):
    """Computes A^s v where (A v)_i = sum_{j=1}^{i-1} a_{i-j} v_j.

    The matrix is never built: A is applied s times as a truncated
    convolution.

    Parameters
    ----------
    a: array_like of n complex
        coefficient vector defining A

    v: array_like of n complex
        the vector being acted on

    s: int
        power, 1 <= s <= n - 1

    Returns
    -------
    w: 1D array of n complex128
        A^s v; its first s entries are exactly 0

    """
    a = check_coefficients(a)
    n = len(a)
    v = np.array(v, dtype=np.complex128)
    if v.shape != (n,):
        raise ValueError("v has shape %s, expected (%i,)" % (v.shape, n))
    if not 1 <= s <= n - 1:
        raise ValueError("s must lie in [1, %i], got %s" % (n - 1, s))
    out = np.empty(n, dtype=np.complex128)
    for _ in range(s):
        _shift(a, v, out)
        v, out = out, v
    return v


def apply_shift_power_transposed(a, v, s):
    """Computes (A^T)^s v where (A^T v)_i = sum_{j=i+1}^n a_{j-i} v_j.

    With J the index reversal, (A^T)^s v = J A^s J v; the last s entries of
    the result are exactly 0.
    """
    a = check_coefficients(a)
    n = len(a)
    v = np.array(v, dtype=np.complex128)
    if v.shape != (n,):
        raise ValueError("v has shape %s, expected (%i,)" % (v.shape, n))
    if not 1 <= s <= n - 1:
        raise ValueError("s must lie in [1, %i], got %s" % (n - 1, s))
    out = np.empty(n, dtype=np.complex128)
    for _ in range(s):
        _shift_transposed(a, v, out)
        v, out = out, v
    return v


def rotate_coefficients(a, beta):
    """a_k -> e^{i(k - 1)beta} a_k, the coefficients of
    f_beta(z) = e^{-i beta} f(e^{i beta} z)."""
    a = check_coefficients(a)
    return a * np.exp(1j * np.arange(len(a)) * beta)


def rotate_functional(lam, beta):
    """lambda_k -> e^{i(k - 1)beta} lambda_k, k = 2..n."""
    lam = check_functional(lam)
    return lam * np.exp(1j * np.arange(1, len(lam) + 1) * beta)


def rotate_pair(lam, a, beta):
    """Rotates a (functional, coefficients) pair by the same angle.

    Parameters
    ----------
    lam: array_like of n - 1 complex
        functional (lambda_2, ..., lambda_n)

    a: array_like of n complex
        coefficient vector

    beta: float
        rotation angle (radians)

    Returns
    -------
    nu: 1D array of n - 1 complex128
        rotated functional, nu_k = e^{i(k - 1)beta} lambda_k

    a_rot: 1D array of n complex128
        rotated coefficients, e^{i(k - 1)beta} a_k

    Notes
    -----
    The phases cancel in sum_k conj(nu_k) a_rot_k, so the functional value
    is unchanged.

    """
    a = check_coefficients(a)
    lam = check_functional(lam, n=len(a))
    return rotate_functional(lam, beta), rotate_coefficients(a, beta)


def blend_functionals(lam, mu, alpha):
    """Returns (1 - alpha) lambda + alpha mu, for alpha in [0, 1]."""
    lam = check_functional(lam)
    mu = check_functional(mu, n=len(lam) + 1)
    if not 0. <= alpha <= 1.:
        raise ValueError("alpha must lie in [0, 1], got %s" % alpha)
    if alpha == 0.:
        return lam
    if alpha == 1.:
        return mu
    return lam + alpha * (mu - lam)


def functional_value(lam, a):
    """L(f) = sum_{k=2}^n conj(lambda_k) a_k."""
    a = check_coefficients(a)
    lam = check_functional(lam, n=len(a))
    return np.dot(np.conj(lam), a[1:])


def derivative_functional_coefficients(lam, a):
    """The sums sum_{j=1}^{n-k+1} conj(lambda_{j+k-1}) j a_j, k = 1..n.

    For k >= 2 these are the initial adjoint values attached to the
    functional; the k = 1 entry extends the same sum with lambda_1 := 0.
    """
    a = check_coefficients(a)
    n = len(a)
    lam = check_functional(lam, n=n)
    lam_bar = np.concatenate(([0.], np.conj(lam)))
    ja = np.arange(1, n + 1) * a
    return np.array([np.dot(lam_bar[k:], ja[:n - k]) for k in range(n)])
