"""Subordinator models: Lévy measures, Laplace exponents and exact moments.

Every model exposes the tail ``pi_bar(u) = pi((u, inf))``. Variants with a
closed-form Laplace exponent override :meth:`LevyModel.phi` and friends; the
rest go through integration by parts against the tail,

    phi(x)              = x int_0^inf e^{-xu} pi_bar(u) du
    int e^{-xv} v^k pi  = int_0^inf pi_bar(u) e^{-xu} (k u^{k-1} - x u^k) du,

which needs nothing but ``pi_bar``. An independent oracle that integrates the
density directly is available as :func:`phi_quadrature`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import special as sc

from .errors import ConfigurationError, DomainError, NumericalError
from .quadrature import quad_split
from .special import _log_gamma_ratio, gamma_fn, gaussian_laplace_integral, log_gamma, ratio_over


def _breakpoints(x, top=1.0):
    pts = [0.0]
    if x > 0:
        for m in (0.1, 1.0, 10.0, 50.0):
            p = m / x
            if p < top:
                pts.append(p)
    pts += [top, math.inf]
    return pts


class LevyModel:
    """Base class. Subclasses provide ``tail`` and usually closed forms."""

    variant = "LevyModel"
    #: pi_bar(u) ~ const * u**(-tail_power_at_zero) as u -> 0 (0 for log or finite)
    tail_power_at_zero = 0.0

    # -- Lévy measure -------------------------------------------------
    def tail(self, u):
        raise NotImplementedError

    def density(self, v):
        return None

    @property
    def total_mass(self):
        return math.inf

    @property
    def mean_jump(self):
        return self.laplace_moment(0.0, 1)

    # -- Laplace exponent ----------------------------------------------
    def phi(self, x):
        return _vectorize(self._phi_generic, x)

    def phi_derivative(self, x, order):
        sign = 1.0 if order == 1 else -1.0
        return _vectorize(lambda s: sign * self.laplace_moment(s, order), x)

    def laplace_moment(self, x, k):
        """int_0^inf e^{-xv} v^k pi(dv) for k = 1, 2 by parts against the tail."""
        if k not in (1, 2):
            raise DomainError("laplace_moment supports k = 1, 2")
        x = float(x)

        def f(u):
            return float(self.tail(u)) * math.exp(-x * u) * (k * u ** (k - 1) - x * u ** k)

        val, _ = quad_split(f, _breakpoints(x), singular_power=self.tail_power_at_zero or None)
        return val

    def _phi_generic(self, x):
        x = float(x)
        if x == 0.0:
            return 0.0

        def f(u):
            return float(self.tail(u)) * math.exp(-x * u)

        val, _ = quad_split(f, _breakpoints(x), singular_power=self.tail_power_at_zero or None)
        return x * val

    def small_jump_moment(self, eps, k=1):
        """int_0^eps v^k pi(dv)."""
        def f(u):
            return k * u ** (k - 1) * float(self.tail(u))

        val, _ = quad_split(f, [0.0, eps], singular_power=self.tail_power_at_zero or None)
        return val - eps ** k * float(self.tail(eps))

    def truncation_defect(self, x, eps):
        """int_0^eps (1 - e^{-xv} - xv) pi(dv) (non-positive).

        Replacing jumps below ``eps`` by their mean drift changes the Laplace
        exponent by exactly minus this amount.
        """
        x = float(x)

        def f(u):
            return x * math.expm1(-x * u) * float(self.tail(u))

        val, _ = quad_split(f, [0.0, eps], singular_power=self.tail_power_at_zero or None)
        h = -math.expm1(-x * eps) - x * eps
        return val - h * float(self.tail(eps))

    # -- serialization --------------------------------------------------
    def params(self):
        return {}

    def expansion(self):
        return None

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{self.variant}({args})"


def _vectorize(fn, x):
    if np.ndim(x) == 0:
        return float(fn(float(x)))
    arr = np.asarray(x, dtype=float)
    return np.array([fn(float(v)) for v in arr.ravel()]).reshape(arr.shape)


# ---------------------------------------------------------------------------
# Stable


@dataclass(frozen=True, repr=False)
class Stable(LevyModel):
    """alpha-stable subordinator, phi(x) = x**alpha."""

    alpha: float
    variant = "Stable"

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise ConfigurationError("Stable requires 0 < alpha < 1")

    @property
    def tail_power_at_zero(self):
        return self.alpha

    def tail(self, u):
        u = np.asarray(u, dtype=float)
        return u ** (-self.alpha) / math.gamma(1.0 - self.alpha)

    def density(self, v):
        a = self.alpha
        return a / math.gamma(1.0 - a) * np.asarray(v, dtype=float) ** (-1.0 - a)

    @property
    def mean_jump(self):
        return math.inf

    def phi(self, x):
        return np.asarray(x, dtype=float) ** self.alpha * 1.0 if np.ndim(x) else float(x) ** self.alpha

    def phi_derivative(self, x, order):
        a = self.alpha
        x = np.asarray(x, dtype=float) if np.ndim(x) else float(x)
        if order == 1:
            return a * x ** (a - 1.0)
        if order == 2:
            return a * (a - 1.0) * x ** (a - 2.0)
        raise DomainError("order must be 1 or 2")

    def laplace_moment(self, x, k):
        a = self.alpha
        return a / math.gamma(1.0 - a) * math.gamma(k - a) * float(x) ** (a - k)

    def small_jump_moment(self, eps, k=1):
        a = self.alpha
        return a / math.gamma(1.0 - a) * eps ** (k - a) / (k - a)

    def params(self):
        return {"alpha": self.alpha}


# ---------------------------------------------------------------------------
# Gamma subordinator


@dataclass(frozen=True, repr=False)
class GammaSubordinator(LevyModel):
    """pi(du) = u^{-1} e^{-u} du, phi(x) = ln(1 + x)."""

    variant = "GammaSub"

    def tail(self, u):
        return sc.exp1(np.asarray(u, dtype=float))

    def density(self, v):
        v = np.asarray(v, dtype=float)
        return np.exp(-v) / v

    @property
    def mean_jump(self):
        return 1.0

    def phi(self, x):
        return np.log1p(x) if np.ndim(x) else math.log1p(float(x))

    def phi_derivative(self, x, order):
        x = np.asarray(x, dtype=float) if np.ndim(x) else float(x)
        if order == 1:
            return 1.0 / (1.0 + x)
        if order == 2:
            return -1.0 / (1.0 + x) ** 2
        raise DomainError("order must be 1 or 2")

    def laplace_moment(self, x, k):
        return math.factorial(k - 1) / (1.0 + float(x)) ** k


# ---------------------------------------------------------------------------
# (a, b, c) family


def _beta_fn(p, q):
    # B(p, q) for p > 0, q > 0
    return math.exp(float(log_gamma(p) + log_gamma(q) - log_gamma(p + q)))


def _incomplete_beta(p, q, z, omz):
    """Unregularized B_z(p, q) = int_0^z t^{p-1}(1-t)^{q-1} dt, q > -1, q != 0.

    ``omz`` is 1 - z, passed separately to keep precision near z = 1.
    """
    if q > 0:
        return sc.betainc(p, q, z) * _beta_fn(p, q)
    # B_z(p, q) = [(p+q) B_z(p, q+1) - z^p (1-z)^q] / q, q+1 > 0
    with np.errstate(divide="ignore"):
        return ((p + q) * sc.betainc(p, q + 1.0, z) * _beta_fn(p, q + 1.0)
                - z ** p * omz ** q) / q


_BERNOULLI = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730)


def _inv_pow_diff(y, b, p):
    # y^-p - (y+b)^-p without cancellation
    return y ** -p * -np.expm1(-p * np.log1p(b / y))


def _polygamma_diff(order, y, b):
    """digamma(y) - digamma(y+b) (order 0) or trigamma(y) - trigamma(y+b) (order 1).

    Direct differences lose all digits once y >> |b|; there the asymptotic
    series is differenced term by term.
    """
    y = np.asarray(y, dtype=float)
    fn = sc.digamma if order == 0 else (lambda z: sc.polygamma(1, z))
    out = np.asarray(fn(y) - fn(y + b), dtype=float)
    big = y > 20.0
    if np.any(big):
        yb = y[big]
        if order == 0:
            val = -np.log1p(b / yb) - 0.5 * _inv_pow_diff(yb, b, 1)
            for k, B in enumerate(_BERNOULLI, start=1):
                val = val - B / (2 * k) * _inv_pow_diff(yb, b, 2 * k)
        else:
            val = _inv_pow_diff(yb, b, 1) + 0.5 * _inv_pow_diff(yb, b, 2)
            for k, B in enumerate(_BERNOULLI, start=1):
                val = val + B * _inv_pow_diff(yb, b, 2 * k + 1)
        out = np.where(big, 0.0, out)
        out[big] = val
    return out


def _rgamma_prime(z):
    # d/dz 1/Gamma(z); finite at poles, (-1)^n n! at z = -n
    if z <= 0 and z == math.floor(z):
        n = int(-z)
        return (-1.0) ** n * math.factorial(n)
    return -sc.digamma(z) * sc.rgamma(z)


@dataclass(frozen=True, repr=False)
class ABC(LevyModel):
    """The (a, b, c) family, pi(dx) = scale c^{-1} e^{-ax}(1 - e^{-x/c})^{b-1} dx.

    ``scale`` multiplies the whole measure (1 for the plain family). ``label``
    and ``origin`` record a named alias (Beta-coalescent, barrier walk) so that
    serialization round-trips to the user-facing parameters.
    """

    a: float
    b: float
    c: float
    scale: float = 1.0
    label: str = "ABC"
    origin: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if not (self.a > 0 and self.c > 0 and self.b > -1 and self.b != 0 and self.scale > 0):
            raise ConfigurationError("ABC requires a > 0, b > -1, b != 0, c > 0")

    @property
    def variant(self):
        return self.label

    @property
    def tail_power_at_zero(self):
        return max(-self.b, 0.0)

    @property
    def total_mass(self):
        return math.inf if self.b <= 0 else self.scale * _beta_fn(self.a * self.c, self.b)

    def tail(self, u):
        u = np.asarray(u, dtype=float)
        z = np.exp(-u / self.c)
        return self.scale * _incomplete_beta(self.a * self.c, self.b, z, -np.expm1(-u / self.c))

    def density(self, v):
        v = np.asarray(v, dtype=float)
        return (self.scale / self.c * np.exp(-self.a * v)
                * (-np.expm1(-v / self.c)) ** (self.b - 1.0))

    def _lead(self):
        # scale * Gamma(b)
        return self.scale * float(gamma_fn(self.b))

    def phi(self, x):
        a, b, c = self.a, self.b, self.c
        y0 = a * c
        xa = np.asarray(x, dtype=float)
        y = y0 + c * xa
        if y0 + b > 0:
            # -R(y0) expm1(ln R(y) - ln R(y0)) keeps accuracy as x -> 0
            d = _log_gamma_ratio(y0, b) - _log_gamma_ratio(y, b)
            out = self._lead() * float(ratio_over(y0, b)) * -np.expm1(d)
        else:
            out = self._lead() * (float(ratio_over(y0, b)) - np.asarray(ratio_over(y, b)))
        out = np.where(xa == 0, 0.0, out)
        return out if np.ndim(x) else float(out)

    def phi_derivative(self, x, order):
        if order not in (1, 2):
            raise DomainError("order must be 1 or 2")
        a, b, c = self.a, self.b, self.c
        xa = np.atleast_1d(np.asarray(x, dtype=float))
        y = a * c + c * xa
        out = np.empty_like(xa)
        ok = y + b > 0
        if np.any(ok):
            yo = y[ok]
            r = np.asarray(ratio_over(yo, b))
            d0 = _polygamma_diff(0, yo, b)
            if order == 1:
                out[ok] = -self._lead() * c * r * d0
            else:
                d1 = _polygamma_diff(1, yo, b)
                out[ok] = -self._lead() * c * c * r * (d0 * d0 + d1)
        for i in np.flatnonzero(~ok):
            # y + b <= 0 only for tiny x when ac + b <= 0
            if order == 1:
                yi = y[i]
                rp = math.gamma(yi) * (sc.digamma(yi) * sc.rgamma(yi + b) + _rgamma_prime(yi + b))
                out[i] = -self._lead() * c * rp
            else:
                out[i] = -self.laplace_moment(xa[i], 2)
        return out if np.ndim(x) else float(out[0])

    @property
    def mean_jump(self):
        return float(self.phi_derivative(0.0, 1))

    def params(self):
        if self.origin:
            return dict(self.origin)
        p = {"a": self.a, "b": self.b, "c": self.c}
        if self.scale != 1.0:
            p["scale"] = self.scale
        return p


def BetaCoalescent(alpha, beta):
    """Limit of collision counts in the Beta(alpha, beta)-coalescent.

    Lévy measure (1/Gamma(alpha)) e^{-beta z/c}(1 - e^{-z/c})^{alpha-3} dz with
    c = 2 - alpha, i.e. the (a, b, c) family with a = beta/c, b = alpha - 2 and
    overall weight c/Gamma(alpha).
    """
    if not (1.0 < alpha < 2.0 and beta > 0):
        raise ConfigurationError("BetaCoalescent requires 1 < alpha < 2 and beta > 0")
    c = 2.0 - alpha
    return ABC(a=beta / c, b=alpha - 2.0, c=c, scale=c / math.gamma(alpha),
               label="BetaCoalescent", origin=(("alpha", alpha), ("beta", beta)))


def BarrierWalk(c):
    """Absorption-time subordinator of the barrier random walk with tail index c."""
    if not (0.0 < c < 1.0):
        raise ConfigurationError("BarrierWalk requires 0 < c < 1")
    return ABC(a=1.0 / c, b=-c, c=c, scale=c, label="BarrierWalk", origin=(("c", c),))


# ---------------------------------------------------------------------------
# Compound Poisson


_LAWS = ("exponential", "gamma", "uniform", "custom")


@dataclass(frozen=True, repr=False)
class CompoundPoisson(LevyModel):
    """Finite Lévy measure of mass ``total_mass``.

    Use the constructors :meth:`exponential`, :meth:`gamma` and :meth:`uniform`
    for laws with closed forms, or pass ``tail_fn`` directly (law "custom").
    ``lower_expansion`` lists pairs (c_i, gamma_i) with
    pi((0, u)) = sum c_i u^{gamma_i} + o(u), 0 < gamma_1 < ... < gamma_p = 1.
    """

    total_mass_: float
    tail_fn: Optional[Callable] = None
    lower_expansion: Optional[tuple] = None
    law: str = "custom"
    law_params: tuple = ()
    inverse_moment_finite_: Optional[bool] = None

    variant = "CompoundPoisson"

    def __post_init__(self):
        if not (self.total_mass_ > 0):
            raise ConfigurationError("total_mass must be positive")
        if self.law not in _LAWS:
            raise ConfigurationError(f"unknown law {self.law!r}")
        if self.law == "custom" and self.tail_fn is None:
            raise ConfigurationError("custom compound Poisson needs tail_fn")
        if self.lower_expansion is not None:
            exps = [g for _, g in self.lower_expansion]
            if not exps or exps[-1] != 1.0 or exps[0] <= 0 or any(
                    b <= a for a, b in zip(exps, exps[1:])):
                raise ConfigurationError("lower_expansion exponents must satisfy 0 < g1 < ... < gp = 1")

    @classmethod
    def exponential(cls, mass=1.0, rate=1.0):
        return cls(mass, law="exponential", law_params=(float(rate),),
                   lower_expansion=((mass * rate, 1.0),))

    @classmethod
    def gamma(cls, mass=1.0, shape=2.0, rate=1.0):
        if not (shape > 0 and rate > 0):
            raise ConfigurationError("gamma law requires shape > 0, rate > 0")
        exp = None
        if shape == 1.0:
            exp = ((mass * rate, 1.0),)
        elif shape < 1.0:
            exp = ((mass * rate ** shape / math.gamma(shape + 1.0), shape), (0.0, 1.0))
        return cls(mass, law="gamma", law_params=(float(shape), float(rate)), lower_expansion=exp)

    @classmethod
    def uniform(cls, mass=1.0, low=0.0, high=1.0):
        if not (0.0 <= low < high):
            raise ConfigurationError("uniform law requires 0 <= low < high")
        exp = ((mass / (high - low), 1.0),) if low == 0 else None
        return cls(mass, law="uniform", law_params=(float(low), float(high)), lower_expansion=exp)

    @property
    def total_mass(self):
        return self.total_mass_

    @property
    def inverse_moment_finite(self):
        """Whether int v^{-1} pi(dv) < inf (light mass at zero)."""
        if self.law == "exponential":
            return False
        if self.law == "gamma":
            return self.law_params[0] > 1.0
        if self.law == "uniform":
            return self.law_params[0] > 0.0
        if self.inverse_moment_finite_ is not None:
            return self.inverse_moment_finite_
        if self.lower_expansion is not None:
            return False
        return None

    def tail(self, u):
        u = np.asarray(u, dtype=float)
        m = self.total_mass_
        if self.law == "exponential":
            return m * np.exp(-self.law_params[0] * u)
        if self.law == "gamma":
            k, lam = self.law_params
            return m * sc.gammaincc(k, lam * u)
        if self.law == "uniform":
            lo, hi = self.law_params
            return m * np.clip((hi - u) / (hi - lo), 0.0, 1.0)
        return np.vectorize(self.tail_fn, otypes=[float])(u) if u.ndim else float(self.tail_fn(float(u)))

    def density(self, v):
        v = np.asarray(v, dtype=float)
        m = self.total_mass_
        if self.law == "exponential":
            lam = self.law_params[0]
            return m * lam * np.exp(-lam * v)
        if self.law == "gamma":
            k, lam = self.law_params
            return m * np.exp(k * np.log(lam) + (k - 1) * np.log(v) - lam * v - math.lgamma(k))
        if self.law == "uniform":
            lo, hi = self.law_params
            return np.where((v >= lo) & (v <= hi), m / (hi - lo), 0.0)
        return None

    def phi(self, x):
        m = self.total_mass_
        xa = np.asarray(x, dtype=float)
        if self.law == "exponential":
            lam = self.law_params[0]
            out = m * xa / (xa + lam)
        elif self.law == "gamma":
            k, lam = self.law_params
            out = -m * np.expm1(-k * np.log1p(xa / lam))
        elif self.law == "uniform":
            lo, hi = self.law_params
            # m * (1 - (e^{-x lo} - e^{-x hi}) / (x (hi - lo)))
            with np.errstate(invalid="ignore", divide="ignore"):
                w = hi - lo
                mean_exp = np.exp(-xa * lo) * -np.expm1(-xa * w) / (xa * w)
                out = m * (1.0 - mean_exp)
                # cancellation for small x: series m (x mu - x^2 E[V^2]/2)
                mu = (lo + hi) / 2
                m2 = (lo * lo + lo * hi + hi * hi) / 3
                small = xa * hi < 1e-4
                out = np.where(small, m * (xa * mu - xa * xa * m2 / 2), out)
        else:
            return super().phi(x)
        out = np.where(xa == 0, 0.0, out)
        return out if np.ndim(x) else float(out)

    def phi_derivative(self, x, order):
        if order not in (1, 2):
            raise DomainError("order must be 1 or 2")
        m = self.total_mass_
        if self.law == "exponential":
            lam = self.law_params[0]
            xa = np.asarray(x, dtype=float) if np.ndim(x) else float(x)
            return m * lam / (xa + lam) ** 2 if order == 1 else -2 * m * lam / (xa + lam) ** 3
        if self.law == "gamma":
            k, lam = self.law_params
            xa = np.asarray(x, dtype=float) if np.ndim(x) else float(x)
            if order == 1:
                return m * k / lam * (1 + xa / lam) ** (-k - 1)
            return -m * k * (k + 1) / lam ** 2 * (1 + xa / lam) ** (-k - 2)
        if self.law == "uniform":
            # m/w * int_lo^hi v^k e^{-xv} dv through upper incomplete Gamma(k+1, .);
            # quadrature where x * w is small and the closed form cancels
            lo, hi = self.law_params
            xa = np.atleast_1d(np.asarray(x, dtype=float))
            poly = (lambda y: 1 + y) if order == 1 else (lambda y: 2 + 2 * y + y * y)
            big = xa * (hi - lo) > 0.1
            out = np.empty_like(xa)
            xb = xa[big]
            val = np.exp(-xb * lo) * (poly(xb * lo) - np.exp(-xb * (hi - lo)) * poly(xb * hi))
            out[big] = m / (hi - lo) * val / xb ** (order + 1) * (1 if order == 1 else -1)
            if np.any(~big):
                out[~big] = super().phi_derivative(xa[~big], order)
            return out if np.ndim(x) else float(out[0])
        return super().phi_derivative(x, order)

    @property
    def mean_jump(self):
        m = self.total_mass_
        if self.law == "exponential":
            return m / self.law_params[0]
        if self.law == "gamma":
            k, lam = self.law_params
            return m * k / lam
        if self.law == "uniform":
            lo, hi = self.law_params
            return m * (lo + hi) / 2
        return self.laplace_moment(0.0, 1)

    def params(self):
        p = {"total_mass": self.total_mass_}
        if self.law == "exponential":
            p.update(law="exponential", rate=self.law_params[0])
        elif self.law == "gamma":
            p.update(law="gamma", shape=self.law_params[0], rate=self.law_params[1])
        elif self.law == "uniform":
            p.update(law="uniform", low=self.law_params[0], high=self.law_params[1])
        else:
            p.update(law="custom")
        return p

    def expansion(self):
        return None if self.lower_expansion is None else [list(t) for t in self.lower_expansion]


# ---------------------------------------------------------------------------
# Infinite mass with a power expansion at zero


@dataclass(frozen=True, repr=False)
class InfinitePowerTail(LevyModel):
    """Tail pi_bar(u) = e^{-u^2} sum_i c_i u^{-gamma_i}.

    Near zero pi_bar(u) = sum c_i u^{-gamma_i} + O(u^{1-gamma_0}), which is the
    infinite-mass power expansion with c_0 = 1/Gamma(1 - gamma_0) and last
    exponent gamma_p = gamma_0 - 1. ``remainder_order`` is the order of the
    neglected term relative to u^{-gamma_0} and is informational.
    """

    coeffs: tuple
    remainder_order: float = 1.0

    variant = "InfinitePowerTail"

    def __post_init__(self):
        cs = tuple((float(c), float(g)) for c, g in self.coeffs)
        object.__setattr__(self, "coeffs", cs)
        if len(cs) < 2:
            raise ConfigurationError("need at least the leading and the gamma_0 - 1 terms")
        g = [t[1] for t in cs]
        g0 = g[0]
        if not (0.0 < g0 < 1.0):
            raise ConfigurationError("gamma_0 must lie in (0, 1)")
        if any(b >= a for a, b in zip(g, g[1:])):
            raise ConfigurationError("exponents must be strictly decreasing")
        if abs(g[-1] - (g0 - 1.0)) > 1e-12:
            raise ConfigurationError("last exponent must equal gamma_0 - 1")
        if abs(cs[0][0] * math.gamma(1.0 - g0) - 1.0) > 1e-10:
            raise ConfigurationError("c_0 must equal 1/Gamma(1 - gamma_0)")
        v = np.geomspace(1e-10, 12.0, 4000)
        if np.any(self.density(v) <= 0):
            raise ConfigurationError("coefficients give a non-positive Lévy density")

    @property
    def gamma0(self):
        return self.coeffs[0][1]

    @property
    def tail_power_at_zero(self):
        return self.gamma0

    def tail(self, u):
        u = np.asarray(u, dtype=float)
        s = sum(c * u ** (-g) for c, g in self.coeffs)
        return np.exp(-u * u) * s

    def density(self, v):
        v = np.asarray(v, dtype=float)
        s = sum(c * v ** (-g) for c, g in self.coeffs)
        ds = sum(c * g * v ** (-g - 1.0) for c, g in self.coeffs)
        return np.exp(-v * v) * (2.0 * v * s + ds)

    @property
    def mean_jump(self):
        return sum(c * math.gamma((1.0 - g) / 2.0) / 2.0 for c, g in self.coeffs)

    # closed forms through J(x, nu) = int u^{nu-1} e^{-u^2 - xu} du
    def phi(self, x):
        xa = np.asarray(x, dtype=float)
        out = xa * sum(c * gaussian_laplace_integral(xa, 1.0 - g) for c, g in self.coeffs)
        return out if np.ndim(x) else float(out)

    def laplace_moment(self, x, k):
        # density e^{-v^2} sum c (2 v^{1-g} + g v^{-1-g})
        xa = np.asarray(x, dtype=float)
        out = sum(c * (2.0 * gaussian_laplace_integral(xa, k + 2.0 - g)
                       + (g * gaussian_laplace_integral(xa, k - g) if g != 0 else 0.0))
                  for c, g in self.coeffs)
        return out if np.ndim(x) else float(out)

    def phi_derivative(self, x, order):
        if order not in (1, 2):
            raise DomainError("order must be 1 or 2")
        m = self.laplace_moment(x, order)
        return m if order == 1 else -m

    def params(self):
        return {"remainder_order": self.remainder_order}

    def expansion(self):
        return [list(t) for t in self.coeffs]


# ---------------------------------------------------------------------------
# module-level operations


def phi(model: LevyModel, x):
    """Laplace exponent phi(x) = int (1 - e^{-xv}) pi(dv)."""
    if np.any(np.asarray(x) < 0):
        raise DomainError("phi requires x >= 0")
    return model.phi(x)


def phi_derivative(model: LevyModel, x, order=1):
    """phi' (order 1) or phi'' (order 2)."""
    if order not in (1, 2):
        raise DomainError("order must be 1 or 2")
    if np.any(np.asarray(x) <= 0):
        raise DomainError("phi_derivative requires x > 0")
    return model.phi_derivative(x, order)


def pi_tail(model: LevyModel, u):
    """pi((u, inf))."""
    if np.any(np.asarray(u) <= 0):
        raise DomainError("pi_tail requires u > 0")
    out = model.tail(u)
    return float(out) if np.ndim(u) == 0 else np.asarray(out)


def x_psi(model: LevyModel):
    """lim_{x->0} x/phi(x) = 1/mean jump, 0 when the mean jump is infinite."""
    m = model.mean_jump
    return 0.0 if not math.isfinite(m) else 1.0 / m


def check_H(model: LevyModel, x_grid: Sequence[float]):
    """Sampled diagnostic for limsup x phi'(x)/phi(x) < 1.

    Returns (max over the grid, value at the largest grid point).
    """
    x = np.asarray(x_grid, dtype=float)
    if x.ndim != 1 or x.size == 0 or np.any(x <= 0) or np.any(np.diff(x) <= 0):
        raise DomainError("grid must be positive and strictly increasing")
    r = x * np.asarray(model.phi_derivative(x, 1)) / np.asarray(model.phi(x))
    return float(r.max()), float(r[-1])


def exact_log_moments(model: LevyModel, n_max: int):
    """ln E[I^n] = sum_{i<=n} ln(i / phi(i)), n = 1..n_max."""
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    i = np.arange(1, n_max + 1, dtype=float)
    ph = np.asarray(model.phi(i), dtype=float)
    if np.any(~(ph > 0)):
        raise DomainError("phi(i) must be positive")
    return np.cumsum(np.log(i) - np.log(ph))


def exact_moments(model: LevyModel, n_max: int, log=False):
    """E[I^n] = n! / prod_{i<=n} phi(i), n = 1..n_max.

    With ``log=True`` the natural logs are returned. Entries that overflow
    double precision come back as inf with a warning pointing at ``log=True``.
    """
    lm = exact_log_moments(model, n_max)
    if log:
        return lm
    with np.errstate(over="ignore"):
        out = np.exp(lm)
    if np.any(np.isinf(out)):
        warnings.warn("moments overflow double precision; use log=True", RuntimeWarning)
    return out


def phi_quadrature(model: LevyModel, x):
    """Oracle: phi(x) from the density, independent of the closed forms.

    Near zero the integrand (1 - e^{-xv}) pi(v) behaves like v^{-gamma}, handled
    by an algebraic weight.
    """
    x = float(x)
    if x == 0:
        return 0.0
    if model.density(1.0) is None:
        return model._phi_generic(x)
    s = model.tail_power_at_zero

    def f(v):
        return -math.expm1(-x * v) * float(model.density(v))

    pts = _breakpoints(x)
    if isinstance(model, CompoundPoisson) and model.law == "uniform":
        lo, hi = model.law_params
        pts = sorted({p for p in _breakpoints(x, top=hi)[:-1] if p >= lo} | {0.0, lo})
    val, _ = quad_split(f, pts, singular_power=s or None)
    return val


def laplace_moment_quadrature(model: LevyModel, x, k):
    """Oracle: int e^{-xv} v^k pi(dv) from the density."""
    x = float(x)
    if model.density(1.0) is None:
        return model.laplace_moment(x, k)
    s = max(model.tail_power_at_zero + 1.0 - k, 0.0)

    def f(v):
        return math.exp(-x * v) * v ** k * float(model.density(v))

    val, _ = quad_split(f, _breakpoints(x), singular_power=s or None)
    return val


__all__ = [
    "LevyModel", "Stable", "GammaSubordinator", "ABC", "BetaCoalescent", "BarrierWalk",
    "CompoundPoisson", "InfinitePowerTail", "phi", "phi_derivative", "pi_tail", "x_psi",
    "check_H", "exact_moments", "exact_log_moments", "phi_quadrature",
    "laplace_moment_quadrature",
]
