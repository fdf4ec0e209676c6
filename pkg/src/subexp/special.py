"""Special functions used by the closed-form asymptotics.

Log-Gamma (Lanczos below 10, Stirling above), Gamma ratios with the large
argument expansion, the lower real branch of Lambert W, and the Beta-tail
identity linking ``(1/Gamma(b)) int (1-u^x) u^(a-1) (1-u)^(b-1) du`` to a
difference of Gamma ratios.
"""

import math

import numpy as np
from scipy import integrate

from .errors import DomainError, NumericalError

EULER_GAMMA = 0.57721566490153286061
_HALF_LOG_2PI = 0.91893853320467274178

# Lanczos coefficients, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])


def _stirling_series(x):
    r = 1.0 / x
    r2 = r * r
    return r * (1.0 / 12 - r2 * (1.0 / 360 - r2 * (1.0 / 1260 - r2 * (1.0 / 1680 - r2 / 1188))))


def _lanczos(x):
    z = x - 1.0
    acc = np.full_like(z, _LANCZOS[0])
    for i in range(1, len(_LANCZOS)):
        acc = acc + _LANCZOS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * np.log(t) - t + np.log(acc)


def log_gamma(x):
    """Natural log of Gamma(x) for x > 0 (scalar or array)."""
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError("log_gamma requires x > 0")
    out = np.empty_like(arr)
    small = arr < 0.5
    mid = (arr >= 0.5) & (arr < 10.0)
    big = arr >= 10.0
    if np.any(small):
        xs = arr[small]
        out[small] = _lanczos(xs + 1.0) - np.log(xs)
    if np.any(mid):
        out[mid] = _lanczos(arr[mid])
    if np.any(big):
        xb = arr[big]
        out[big] = (xb - 0.5) * np.log(xb) - xb + _HALF_LOG_2PI + _stirling_series(xb)
    return out if out.ndim else float(out)


def _is_pole(z):
    return (z <= 0) & (z == np.floor(z))


def log_abs_gamma(z):
    """Return (log|Gamma(z)|, sign Gamma(z)) for real z that is not a pole."""
    arr = np.asarray(z, dtype=float)
    if np.any(_is_pole(arr)):
        raise DomainError("Gamma has a pole at non-positive integers")
    out = np.empty_like(arr)
    sign = np.ones_like(arr)
    pos = arr > 0
    if np.any(pos):
        out[pos] = log_gamma(arr[pos])
    neg = ~pos
    if np.any(neg):
        zn = arr[neg]
        s = np.sin(np.pi * zn)
        # reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z)
        out[neg] = math.log(math.pi) - np.log(np.abs(s)) - log_gamma(1.0 - zn)
        sign[neg] = np.sign(s)
    if out.ndim:
        return out, sign
    return float(out), float(sign)


def gamma_fn(z):
    """Signed Gamma function on the real line (poles raise)."""
    lg, s = log_abs_gamma(z)
    return s * np.exp(lg)


def rgamma(z):
    """1/Gamma(z), continued by zero at the poles."""
    arr = np.asarray(z, dtype=float)
    out = np.zeros_like(arr)
    ok = ~_is_pole(arr)
    if np.any(ok):
        lg, s = log_abs_gamma(arr[ok])
        out[ok] = s * np.exp(-lg)
    return out if out.ndim else float(out)


def _log_gamma_ratio(x, c):
    # ln Gamma(x+c) - ln Gamma(x) for x > 0, x + c > 0
    x, cc = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(c, dtype=float))
    y = x + cc
    out = np.empty(x.shape)
    big = (x >= 10.0) & (y >= 10.0)
    if np.any(big):
        xb, cb = x[big], cc[big]
        out[big] = (cb * np.log(xb) + (xb + cb - 0.5) * np.log1p(cb / xb) - cb
                    + _stirling_series(xb + cb) - _stirling_series(xb))
    rest = ~big
    if np.any(rest):
        out[rest] = log_gamma(y[rest]) - log_gamma(x[rest])
    return out


def gamma_ratio(x, c):
    """Gamma(x+c)/Gamma(x) for x > 0; negative c allowed.

    Beyond x = 1e6 the large-argument expansion
    ``x^c (1 + c(c-1)/(2x) + c(c-1)(c-2)(3c-1)/(24 x^2))`` is used.
    When x + c <= 0 the ratio is continued through the reflection formula;
    poles of the numerator raise DomainError.
    """
    xa = np.asarray(x, dtype=float)
    ca = np.asarray(c, dtype=float)
    if np.any(~(xa > 0)):
        raise DomainError("gamma_ratio requires x > 0")
    xa, ca = np.broadcast_arrays(xa, ca)
    z = xa + ca
    if np.any(_is_pole(z)):
        raise DomainError("x + c is a pole of Gamma")
    out = np.empty(xa.shape)
    asym = (xa > 1e6) & (np.abs(ca) <= 1e3)
    if np.any(asym):
        xs, cs = xa[asym], ca[asym]
        corr = 1.0 + cs * (cs - 1) / (2 * xs) + cs * (cs - 1) * (cs - 2) * (3 * cs - 1) / (24 * xs * xs)
        out[asym] = np.exp(cs * np.log(xs)) * corr
    pos = ~asym & (z > 0)
    if np.any(pos):
        out[pos] = np.exp(_log_gamma_ratio(xa[pos], ca[pos]))
    neg = ~asym & (z <= 0)
    if np.any(neg):
        lg, s = log_abs_gamma(z[neg])
        out[neg] = s * np.exp(lg - log_gamma(xa[neg]))
    return out if out.ndim else float(out)


def ratio_over(y, b):
    """Gamma(y)/Gamma(y+b) for y > 0, returning 0 where y+b is a pole."""
    ya = np.asarray(y, dtype=float)
    ya, bb = np.broadcast_arrays(ya, np.asarray(b, dtype=float))
    z = ya + bb
    out = np.zeros(ya.shape)
    pos = z > 0
    if np.any(pos):
        out[pos] = np.exp(-_log_gamma_ratio(ya[pos], bb[pos]))
    neg = (~pos) & ~_is_pole(z)
    if np.any(neg):
        out[neg] = np.exp(log_gamma(ya[neg])) * rgamma(z[neg])
    return out if out.ndim else float(out)


def lambert_w_minus1(y, max_iter=60):
    """Lower real branch W_{-1} on [-1/e, 0), vectorised.

    Seeds with the branch-point series near -1/e and with
    ``ln(-y) - ln(-ln(-y))`` towards 0, then runs Halley iterations on
    ``w - y e^{-w}`` (scaled to avoid overflow as y -> 0-).
    """
    scalar = np.ndim(y) == 0
    ya = np.atleast_1d(np.asarray(y, dtype=float))
    em1 = -math.exp(-1.0)
    if np.any(~((ya >= em1 - 1e-17) & (ya < 0))):
        raise DomainError("lambert_w_minus1 requires -1/e <= y < 0")
    ya = np.maximum(ya, em1)
    w = np.empty_like(ya)
    near = ya < -0.25
    if np.any(near):
        p = -np.sqrt(np.maximum(2.0 * (1.0 + math.e * ya[near]), 0.0))
        w[near] = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p ** 3 - 43.0 / 540.0 * p ** 4
    far = ~near
    if np.any(far):
        l1 = np.log(-ya[far])
        l2 = np.log(-l1)
        w[far] = l1 - l2 + l2 / l1
    w = np.minimum(w, -1.0)
    log_my = np.log(-ya)
    active = ya > em1
    for _ in range(max_iter):
        if not np.any(active):
            break
        wa = w[active]
        # y e^{-w} written through logs
        q = -np.exp(log_my[active] - wa)
        f = wa - q
        fp = 1.0 + q
        fpp = -q
        denom = 2.0 * fp * fp - f * fpp
        step = np.where(denom != 0, 2.0 * f * fp / np.where(denom != 0, denom, 1.0), 0.0)
        new = np.minimum(wa - step, -1.0)
        done = np.abs(new - wa) <= 4e-16 * np.abs(new)
        w[active] = new
        idx = np.flatnonzero(active)
        active[idx[done]] = False
    w = np.where(ya == em1, -1.0, w)
    return float(w[0]) if scalar else w


def gaussian_laplace_integral(x, nu):
    """J(x, nu) = int_0^inf u^(nu-1) exp(-u^2 - x u) du for x >= 0, nu > 0.

    Parabolic cylinder form ``Gamma(nu) 2^(-nu/2) e^(x^2/8) D_{-nu}(x/sqrt 2)``
    up to x = 25; beyond, the asymptotic series
    ``x^-nu sum_k (-1)^k Gamma(nu + 2k) / (k! x^(2k))``, truncated at its
    smallest term.
    """
    from scipy.special import pbdv

    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xa < 0) or not nu > 0:
        raise DomainError("gaussian_laplace_integral requires x >= 0, nu > 0")
    out = np.empty_like(xa)
    lg = float(log_gamma(nu))
    small = xa <= 25.0
    if np.any(small):
        xs = xa[small]
        d, _ = pbdv(-nu, xs / math.sqrt(2.0))
        out[small] = np.exp(lg - 0.5 * nu * math.log(2.0) + xs * xs / 8.0) * d
    big = ~small
    if np.any(big):
        xb = xa[big]
        inv2 = 1.0 / (xb * xb)
        term = np.ones_like(xb)
        acc = np.ones_like(xb)
        for k in range(400):
            nxt = -term * (nu + 2 * k) * (nu + 2 * k + 1) * inv2 / (k + 1)
            if np.all(np.abs(nxt) <= 1e-17 * np.abs(acc)):
                break
            grow = np.abs(nxt) > np.abs(term)
            nxt = np.where(grow, 0.0, nxt)
            acc = acc + nxt
            term = nxt
        out[big] = np.exp(lg - nu * np.log(xb)) * acc
    return out if np.ndim(x) else float(out[0])


def beta_tail_identity(a, b, x):
    """Both sides of the Beta-tail identity.

    lhs = (1/Gamma(b)) int_0^1 (1-u^x) u^(a-1) (1-u)^(b-1) du, computed by
    quadrature after factoring ``(1-u)`` out of ``1-u^x`` so the endpoint
    singularity is carried by an algebraic weight (this is what makes
    b in (-1, 0) integrable numerically).
    rhs = Gamma(a)/Gamma(a+b) - Gamma(x+a)/Gamma(x+a+b).
    """
    if not (a > 0 and b > -1):
        raise DomainError("beta_tail_identity requires a > 0 and b > -1")
    if x < 0:
        raise DomainError("x must be non-negative")
    rhs = float(ratio_over(a, b) - ratio_over(x + a, b)) if x > 0 else 0.0
    if x == 0 or b == 0:
        return 0.0, rhs

    def core(u):
        # (1 - u^x)/(1 - u), continuous at u = 1 with value x
        if u >= 1.0:
            return float(x)
        if u <= 0.0:
            return 1.0
        return -math.expm1(x * math.log(u)) / (1.0 - u)

    val, err, *rest = integrate.quad(core, 0.0, 1.0, weight="alg", wvar=(a - 1.0, b),
                                     epsabs=1e-15, epsrel=1e-13, limit=200, full_output=1)
    if len(rest) >= 2 and err > 1e-9 * max(abs(val), 1.0):
        raise NumericalError("beta_tail_identity quadrature did not converge", err)
    lhs = float(rgamma(b)) * val
    return lhs, rhs
