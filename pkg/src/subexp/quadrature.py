"""Thin checked wrappers around adaptive and fixed Gauss-Legendre quadrature."""

import warnings

import numpy as np
from scipy import integrate

from .errors import NumericalError

EPSABS = 1e-14
EPSREL = 1e-10

_GL_CACHE = {}


def gauss_legendre(n):
    """Nodes and weights on [-1, 1], cached."""
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def quad(f, a, b, epsabs=EPSABS, epsrel=EPSREL, limit=400, **kwargs):
    """scipy's QUADPACK driver, raising NumericalError when it gives up.

    Returns (value, abserr). Warnings are promoted to errors only when the
    reported error estimate misses the requested tolerance.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        res = integrate.quad(f, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit,
                             full_output=1, **kwargs)
    val, err = res[0], res[1]
    if len(res) > 3:
        tol = max(epsabs, epsrel * abs(val))
        if not np.isfinite(val) or err > 100 * tol:
            raise NumericalError(f"quadrature did not converge on [{a}, {b}]: {res[3][:80]}", err)
    return val, err


def quad_split(f, points, singular_power=None, **kwargs):
    """Integrate over consecutive breakpoints; ``points[-1]`` may be inf.

    When ``singular_power`` is given, ``f(u) ~ u**(-singular_power)`` near 0
    and the first panel is integrated with the algebraic weight
    ``u**(-singular_power)`` and integrand ``f(u) * u**singular_power``.
    """
    total = 0.0
    err = 0.0
    for lo, hi in zip(points[:-1], points[1:]):
        if hi <= lo:
            continue
        if lo == 0.0 and singular_power:
            s = singular_power
            v, e = quad(lambda u: f(u) * u ** s if u > 0 else 0.0, lo, hi,
                        weight="alg", wvar=(-s, 0.0), **kwargs)
        else:
            v, e = quad(f, lo, hi, **kwargs)
        total += v
        err += e
    return total, err
