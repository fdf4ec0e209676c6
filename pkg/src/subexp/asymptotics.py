"""Large-t asymptotics of the tail and density of I, all on log scale.

The general equivalents are

    P(I > t) ~ c_I t psi'(t)^{1/2} / psi(t) exp(-F(t)),
    k(t)     ~ c_I psi'(t)^{1/2} exp(-F(t)),   F(t) = int_{x_psi+1}^t psi(r)/r dr,

with an unknown constant c_I. :func:`closed_form` turns the power-expansion
cases into explicit ``t^p exp(sum coef t^power)`` forms, up to a constant.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from .errors import ConfigurationError, DomainError, UnsupportedRegimeError
from .levy import ABC, CompoundPoisson, GammaSubordinator, InfinitePowerTail, LevyModel, Stable
from .psi import PsiEvaluator, gamma_psi_closed
from .quadrature import quad
from .special import EULER_GAMMA, gamma_fn, lambert_w_minus1

_CAVEAT = ("exponents in this band produce additional power contributions in or in "
           "front of the exponential; no general formula is available")


# ---------------------------------------------------------------------------
# general equivalents


def tail_log_asym(ev: PsiEvaluator, t):
    """ln t + 1/2 ln psi'(t) - ln psi(t) - F(t), without ln c_I."""
    t = np.asarray(t, dtype=float) if np.ndim(t) else float(t)
    return (np.log(t) + 0.5 * np.log(ev.psi_prime(t)) - np.log(ev.psi(t))
            - ev.exponent_integral(t))


def density_log_asym(ev: PsiEvaluator, t):
    """1/2 ln psi'(t) - F(t), without ln c_I."""
    t = np.asarray(t, dtype=float) if np.ndim(t) else float(t)
    return 0.5 * np.log(ev.psi_prime(t)) - ev.exponent_integral(t)


def density_log_asym_rv(ev: PsiEvaluator, t, index):
    """Regularly varying form: -1/2 ln(1 - index) + 1/2 ln(psi(t)/t) - F(t).

    Valid when phi is regularly varying with ``index`` in [0, 1); it differs
    from :func:`density_log_asym` by a vanishing amount as t grows.
    """
    t = np.asarray(t, dtype=float) if np.ndim(t) else float(t)
    return (-0.5 * math.log1p(-index) + 0.5 * np.log(ev.psi(t) / t)
            - ev.exponent_integral(t))


def fprime_expansion(ev: PsiEvaluator, x):
    """psi/x + psi'/psi - 1/x - psi''/(2 psi'), the expansion of k/P(I > x)."""
    x = np.asarray(x, dtype=float) if np.ndim(x) else float(x)
    p, p1, p2 = ev.psi(x), ev.psi_prime(x), ev.psi_second(x)
    return p / x + p1 / p - 1.0 / x - p2 / (2.0 * p1)


def ssmp_moment_log_asym(ev: PsiEvaluator, alpha, a, t):
    """Log of (t/psi(alpha t))^{1+a/alpha} psi'(alpha t)^{1/2} exp(-F(alpha t)/alpha).

    Large-time decay of E[X(t)^a] for the non-increasing self-similar Markov
    process of index ``alpha`` whose Lamperti subordinator has exponent phi.
    """
    if not (alpha > 0 and a >= 0):
        raise DomainError("alpha must be positive and a non-negative")
    t = np.asarray(t, dtype=float) if np.ndim(t) else float(t)
    s = alpha * t
    return ((1.0 + a / alpha) * np.log(t / ev.psi(s)) + 0.5 * np.log(ev.psi_prime(s))
            - ev.exponent_integral(s) / alpha)


# ---------------------------------------------------------------------------
# explicit forms


@dataclass
class AsymptoticForm:
    """``ln(asymptotic) = log_value_fn(t) + ln(constant)``.

    For the power forms ``log_value_fn(t) = p ln t + sum coef t^power``.
    """

    kind: str
    prefactor_exponent: float
    exp_terms: List[Tuple[float, float]]
    constant_known: bool = False
    constant: Optional[float] = None
    log_value_fn: Optional[Callable] = field(default=None, repr=False)
    note: str = ""

    def __post_init__(self):
        if self.kind not in ("tail", "density", "ssmp_moment"):
            raise ConfigurationError(f"unknown kind {self.kind!r}")
        powers = [p for _, p in self.exp_terms]
        if any(b >= a for a, b in zip(powers, powers[1:])):
            raise ConfigurationError("exp_terms powers must be strictly decreasing")
        if self.exp_terms and not self.exp_terms[0][0] < 0:
            raise ConfigurationError("leading exponential coefficient must be negative")
        if self.constant_known and not (self.constant is not None and 0 < self.constant < math.inf):
            raise ConfigurationError("a known constant must lie in (0, inf)")
        if self.log_value_fn is None:
            self.log_value_fn = self._power_log_value

    def _power_log_value(self, t):
        t = np.asarray(t, dtype=float) if np.ndim(t) else float(t)
        out = self.prefactor_exponent * np.log(t)
        for coef, power in self.exp_terms:
            out = out + coef * t ** power
        return out

    def __call__(self, t):
        return self.log_value_fn(t)

    def log_value(self, t):
        """Including ln(constant) when known."""
        c = math.log(self.constant) if self.constant_known else 0.0
        return self.log_value_fn(t) + c

    def to_dict(self):
        return {"kind": self.kind,
                "prefactor_exponent": self.prefactor_exponent,
                "exp_terms": [[float(c), float(p)] for c, p in self.exp_terms],
                "constant_known": self.constant_known,
                "constant": self.constant}

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d):
        return cls(kind=d.get("kind", "tail"), prefactor_exponent=float(d["prefactor_exponent"]),
                   exp_terms=[(float(c), float(p)) for c, p in d["exp_terms"]],
                   constant_known=bool(d["constant_known"]), constant=d.get("constant"))


def _scaled(terms, k):
    # tail of k*pi at t equals tail of pi at k t
    return [(c * k ** p, p) for c, p in terms]


def _stable_terms(alpha):
    return -alpha / (2 * (1 - alpha)), [(-(1 - alpha), 1 / (1 - alpha))], alpha


def _case2_terms(coeffs):
    g0 = coeffs[0][1]
    cp, gp = coeffs[-1]
    middle = coeffs[1:-1]
    if middle and not middle[0][1] < g0 - 0.5:
        raise UnsupportedRegimeError(f"Case 2 needs gamma_1 < gamma_0 - 1/2; {_CAVEAT}")
    pref = -g0 / (2 * (1 - g0)) - cp * math.gamma(1 - gp) / (1 - g0)
    terms = [(-(1 - g0), 1 / (1 - g0))]
    for c, g in middle:
        if c != 0:
            terms.append((-c * math.gamma(1 - g) / (1 - g0 + g), (1 - g0 + g) / (1 - g0)))
    return pref, terms, g0


def _case1_terms(mass, expansion):
    exps = [g for _, g in expansion]
    if len(expansion) > 1 and not exps[0] > 0.5:
        raise UnsupportedRegimeError(f"Case 1 needs gamma_1 > 1/2; {_CAVEAT}")
    cp = expansion[-1][0]
    terms = [(-mass, 1.0)]
    for c, g in expansion[:-1]:
        if c != 0:
            terms.append((c / mass * math.gamma(1 + g) / (1 - g) * mass ** (1 - g), 1 - g))
    return cp / mass, terms, 0.0


def _abc_terms(m: ABC):
    a, b, c = m.a, m.b, m.c
    if -1 < b < -0.5:
        gb = abs(math.gamma(b))
        pref = (b * a + b * (b - 1) / (2 * c) + b / 2) / (1 + b)
        terms = [(-(1 + b) * (gb / c ** b) ** (1 / (1 + b)), 1 / (1 + b)),
                 (gb * math.gamma(a * c) / (math.gamma(b + a * c) * (1 + b)), 1.0)]
        index = -b
    elif 0.5 < b < 1:
        mass = math.gamma(a * c) * math.gamma(b) / math.gamma(a * c + b)
        pref = 0.0
        terms = [(-mass, 1.0), ((1.0 / (mass * c)) ** b * math.gamma(b) / (1 - b), 1 - b)]
        index = 0.0
    elif b == 1:
        pref, terms, index = a, [(-1.0 / (a * c), 1.0)], 0.0
    elif b > 1:
        pref = 0.0
        terms = [(-math.gamma(a * c) * math.gamma(b) / math.gamma(a * c + b), 1.0)]
        index = 0.0
    else:
        raise UnsupportedRegimeError(f"(a,b,c) family with b in [-1/2, 1/2]; {_CAVEAT}")
    return pref, _scaled(terms, m.scale), index


def _gamma_log_value(kind):
    # P ~ t^{1} (ln t)^{-1/2} exp(int_2^t W_{-1}(-e^{-1/r}/r) dr) up to a constant
    def w(r):
        return float(lambert_w_minus1(-math.exp(-1.0 / r) / r))

    def fn(t):
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(ts <= 1.0):
            raise DomainError("Gamma subordinator form needs t > 1")
        order = np.argsort(ts)
        acc, prev, out = 0.0, 2.0, np.empty_like(ts)
        for i in order:
            v, _ = quad(w, prev, ts[i])
            acc += v
            prev = ts[i]
            out[i] = acc
        val = np.log(ts) - 0.5 * np.log(np.log(ts)) + out
        if kind == "density":
            val = val + np.log(gamma_psi_closed(ts) / ts)
        return val if np.ndim(t) else float(val[0])

    return fn


def closed_form(model: LevyModel, kind="tail") -> AsymptoticForm:
    """Explicit power form of the tail (or density) asymptotic.

    Supported: Stable, Gamma subordinator, compound Poisson (Case 1, including
    the light case with int v^{-1} pi(dv) < inf), infinite power tails (Case 2)
    and the (a, b, c) family outside b in [-1/2, 1/2]. The density form adds
    ln(psi(t)/t), i.e. index/(1 - index) to the power of t.
    """
    if kind not in ("tail", "density"):
        raise DomainError("kind must be 'tail' or 'density'")
    constant = None
    if isinstance(model, GammaSubordinator):
        return AsymptoticForm(kind=kind, prefactor_exponent=1.0 if kind == "tail" else 1.0,
                              exp_terms=[], log_value_fn=_gamma_log_value(kind),
                              note="Gamma subordinator: ln t - 1/2 ln ln t + int_2^t W_{-1}(-e^{-1/r}/r) dr")
    if isinstance(model, Stable):
        pref, terms, index = _stable_terms(model.alpha)
    elif isinstance(model, InfinitePowerTail):
        pref, terms, index = _case2_terms(model.coeffs)
    elif isinstance(model, ABC):
        pref, terms, index = _abc_terms(model)
    elif isinstance(model, CompoundPoisson):
        mass = model.total_mass
        if model.lower_expansion is not None:
            exp = [tuple(t) for t in model.lower_expansion]
            pref, terms, index = _case1_terms(mass, exp)
            if len(exp) == 1:
                constant = mz_constant(model)
        elif model.inverse_moment_finite:
            pref, terms, index = 0.0, [(-mass, 1.0)], 0.0
        else:
            raise UnsupportedRegimeError("compound Poisson model needs a lower expansion "
                                         "or a finite inverse moment")
    else:
        raise UnsupportedRegimeError(f"no closed form for {model.variant}")
    if kind == "density":
        pref += index / (1 - index)
        if constant is not None:
            constant *= model.total_mass
    return AsymptoticForm(kind=kind, prefactor_exponent=pref, exp_terms=terms,
                          constant_known=constant is not None, constant=constant)


# ---------------------------------------------------------------------------
# Maulik-Zwart constants


def _richardson(values, ks, powers):
    # S_K = S + sum_j A_j K^{-p_j}; solve the linear system for S
    n = len(powers) + 1
    A = np.ones((n, n))
    for j, p in enumerate(powers):
        A[:, j + 1] = np.asarray(ks[:n], dtype=float) ** (-p)
    return float(np.linalg.solve(A, np.asarray(values[:n]))[0])


def mz_constant(model: CompoundPoisson, b=None, delta=None, K=2000, return_error=False):
    """Constant c_I of P(I > t) ~ c_I t^{b/|pi|} e^{-|pi| t} when pi(0, u) = b u + o(u^{1+delta}).

    With beta = b/|pi| the constant is
    ``|pi|^beta e^{beta gamma_E} / prod_k (phi(k)/|pi|) e^{beta/k}``.
    The log-product is summed to K, 2K and 4K terms and the truncation error,
    made of powers K^{-delta} and K^{-1}, is removed by Richardson
    extrapolation.
    """
    mass = model.total_mass
    if not math.isfinite(mass):
        raise DomainError("mz_constant requires a finite Lévy measure")
    if b is None:
        exp = model.lower_expansion
        if exp is None or len(exp) != 1:
            raise DomainError("need pi(0,u) = b u + o(u^{1+delta}); pass b explicitly")
        b = exp[0][0]
    if not b > 0:
        raise DomainError("b must be positive (b = 0 is the light case, see mz_constant_lighttail)")
    delta = 1.0 if delta is None else float(delta)
    if not delta > 0:
        raise DomainError("delta must be positive")
    beta = b / mass
    k = np.arange(1, 4 * K + 1, dtype=float)
    ratio = np.asarray(model.phi(k), dtype=float) / mass
    if np.any(ratio <= 0):
        raise DomainError("a factor of the product is non-positive")
    cum = np.cumsum(np.log(ratio) + beta / k)
    sums = [cum[K - 1], cum[2 * K - 1], cum[4 * K - 1]]
    ks = [K, 2 * K, 4 * K]
    p1 = min(delta, 1.0)
    p2 = 2.0 if p1 == 1.0 else 1.0
    s2 = _richardson(sums, ks, [p1, p2])
    s1 = _richardson(sums[1:], ks[1:], [p1])
    log_c = beta * math.log(mass) + beta * EULER_GAMMA - s2
    c = math.exp(log_c)
    if return_error:
        return c, abs(s2 - s1) * c
    return c


@dataclass
class LightTailConstant:
    estimate: float
    stderr: float
    ci_halfwidth: float
    n_samples: int
    reliable: bool
    note: str = ""


def mz_constant_lighttail(model: CompoundPoisson, n_samples, seed=0, eps=None):
    """Monte Carlo estimate of c_I = E[exp(|pi| e^{-X} I)], X ~ pi/|pi| independent of I.

    Applies when int v^{-1} pi(dv) < inf, where P(I > t) ~ c_I e^{-|pi| t}.
    ``reliable`` is False when the running variance keeps growing across
    the last halvings of the sample, a symptom of an infinite variance.
    """
    from .monte_carlo import sample_I, sample_jumps

    n_samples = int(n_samples)
    if n_samples <= 0:
        raise DomainError("n_samples must be positive")
    if not math.isfinite(model.total_mass):
        raise DomainError("model must have a finite Lévy measure")
    rng = np.random.default_rng([seed, 7919])
    I = sample_I(model, n_samples, seed=seed, keep_samples=True).samples
    X = sample_jumps(model, n_samples, rng)
    vals = np.exp(model.total_mass * np.exp(-X) * I)
    est = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else math.inf
    reliable = True
    note = ""
    if n_samples >= 64:
        vs = [np.var(vals[: n_samples >> j], ddof=1) for j in (2, 1, 0)]
        if vs[0] < vs[1] < vs[2] and vs[2] > 4 * vs[0]:
            reliable = False
            note = "running variance grows with the sample; estimator may have infinite variance"
    if model.inverse_moment_finite is False:
        reliable = False
        note = "int v^{-1} pi(dv) is infinite; the constant does not apply"
    return LightTailConstant(est, se, 2.5758293035489 * se, n_samples, reliable, note)


def form_offset(ev: PsiEvaluator, form: AsymptoticForm, t_large=1e6):
    """lim (tail_log_asym(t) - form(t)) as t grows, evaluated at ``t_large``.

    Converts a constant fitted against the general equivalent into the
    normalization of an explicit form: c_form = c_general * exp(offset).
    """
    t = max(float(t_large), ev.lower * 10.0)
    fn = density_log_asym if form.kind == "density" else tail_log_asym
    return float(fn(ev, t) - form.log_value_fn(t))


__all__ = ["AsymptoticForm", "tail_log_asym", "density_log_asym", "density_log_asym_rv",
           "fprime_expansion", "ssmp_moment_log_asym", "closed_form", "mz_constant",
           "mz_constant_lighttail", "LightTailConstant", "form_offset"]
