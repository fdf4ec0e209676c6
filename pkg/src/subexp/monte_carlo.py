"""Monte Carlo for I = int_0^inf exp(-xi_r) dr and the discrete applications.

One simulator covers both schemes. Jumps of size >= eps arrive at rate
``lam = pi_bar(eps)``; smaller jumps are replaced by the drift
``b = int_0^eps v pi(dv)``. Between jumps the integral of e^{-xi} is explicit:

    w (1 - e^{-b D}) / b    (w D when b = 0),

with w = e^{-xi} at the start of the holding time D ~ Exp(lam). For a finite
measure and eps = 0 this is the random affine recursion I = E + e^{-X} I'.
The approximating subordinator has Laplace exponent
``phi_eps = phi - int_0^eps (1 - e^{-xv} - xv) pi(dv)``, so its moments, and
therefore the eps-bias, are known exactly.

Replicates are simulated in fixed-size blocks; block ``k`` draws from
``SeedSequence([seed, k])`` so results do not depend on the worker count.
"""

from __future__ import annotations

import json
import math
import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import special as sc
from scipy.interpolate import PchipInterpolator

from .errors import (ConfigurationError, DomainError, ResourceError,
                     StatisticalPowerError, UnsupportedRegimeError)
from .levy import ABC, CompoundPoisson, LevyModel, Stable

BLOCK_SIZE = 1 << 16
Z99 = 2.5758293035489004
_MAGIC = b"SXPI"
_VERSION = 1
_LOOKUP = 1 << 16


# ---------------------------------------------------------------------------
# schemes and summaries


@dataclass(frozen=True)
class SimScheme:
    kind: str = "affine_recursion"
    eps: float = 0.0
    horizon_tail_bound: float = 1e-12

    def __post_init__(self):
        if self.kind not in ("affine_recursion", "compensated_path", "exact_special"):
            raise ConfigurationError(f"unknown scheme {self.kind!r}")
        if (self.eps > 0) != (self.kind == "compensated_path"):
            raise ConfigurationError("eps > 0 exactly for the compensated_path scheme")
        if not (0 < self.horizon_tail_bound < 1):
            raise ConfigurationError("horizon_tail_bound must lie in (0, 1)")


@dataclass
class SampleSummary:
    n: int
    seed: int
    moment_estimates: List[Tuple[int, float, float]]
    tail_estimates: List[Tuple[float, float, float]]
    truncation_eps: float
    scheme: str = "affine_recursion"
    exact_moments_eps: List[float] = field(default_factory=list)
    samples: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def moment(self, order):
        for k, m, se in self.moment_estimates:
            if k == order:
                return m, se
        raise KeyError(order)

    def to_dict(self):
        d = asdict(self)
        d.pop("samples")
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _threads():
    env = os.environ.get("SUBEXP_THREADS")
    n = int(env) if env else (os.cpu_count() or 1)
    return max(1, n)


# ---------------------------------------------------------------------------
# jump laws


class JumpSampler:
    """Draws from pi restricted to [eps, inf), normalized.

    Exact methods for the stable, named compound Poisson laws and the finite
    (a, b, c) family; otherwise inversion of ``pi_bar`` tabulated in log-log
    coordinates up to ``cap``. Jumps beyond ``cap`` are returned as inf: they
    push e^{-xi} below the horizon anyway.
    """

    def __init__(self, model: LevyModel, eps=0.0, cap=None, table_size=4000):
        self.model = model
        self.eps = float(eps)
        self.cap = float(cap) if cap is not None else 40.0
        self.method = self._pick()
        if self.method == "table":
            self._build(table_size)

    def _pick(self):
        m = self.model
        if isinstance(m, Stable):
            return "pareto"
        if isinstance(m, CompoundPoisson) and m.law != "custom" and self.eps == 0:
            return m.law
        if isinstance(m, ABC) and m.b > 0 and self.eps == 0:
            return "beta"
        return "table"

    @property
    def rate(self):
        m = self.model
        if self.eps == 0:
            return m.total_mass
        return float(m.tail(self.eps))

    def _build(self, size):
        m = self.model
        lo = self.eps if self.eps > 0 else 1e-12
        if not math.isfinite(float(m.tail(lo))) and self.eps == 0:
            raise ConfigurationError("infinite Lévy measure needs eps > 0")
        u = np.geomspace(lo, self.cap, size)
        tail = np.asarray(m.tail(u), dtype=float)
        top = float(m.tail(self.eps)) if self.eps > 0 else m.total_mass
        with np.errstate(divide="ignore"):
            y = -np.log(tail / top)
        keep = np.isfinite(y)
        y, lu = y[keep], np.log(u[keep])
        # strictly increasing abscissa: keep the right end of flat stretches
        idx = np.flatnonzero(np.diff(y) > 0)
        sel = np.concatenate([idx, [len(y) - 1]])
        self._y = y[sel]
        self._lu = lu[sel]
        # PCHIP through the table, resampled on a uniform y-grid so that a
        # draw costs one multiply and one linear interpolation
        interp = PchipInterpolator(self._y, self._lu, extrapolate=False)
        self._ymax = self._y[-1]
        self._y0 = self._y[0]
        self._dy = (self._ymax - self._y0) / (_LOOKUP - 1)
        self._table = interp(np.linspace(self._y0, self._ymax, _LOOKUP))

    def sample(self, n, rng):
        m = self.model
        meth = self.method
        if meth == "pareto":
            return self.eps * rng.random(n) ** (-1.0 / m.alpha)
        if meth == "exponential":
            return rng.exponential(1.0 / m.law_params[0], n)
        if meth == "gamma":
            k, lam = m.law_params
            return rng.gamma(k, 1.0 / lam, n)
        if meth == "uniform":
            lo, hi = m.law_params
            return rng.uniform(lo, hi, n)
        if meth == "beta":
            # e^{-X/c} ~ Beta(ac, b)
            z = rng.beta(m.a * m.c, m.b, n)
            with np.errstate(divide="ignore"):
                return -m.c * np.log(z)
        y = -np.log1p(-rng.random(n))  # -ln U with U in (0, 1]
        pos = np.maximum(y - self._y0, 0.0) / self._dy
        i = np.minimum(pos.astype(np.int64), _LOOKUP - 2)
        f = pos - i
        lu = self._table[i] * (1.0 - f) + self._table[i + 1] * f
        return np.where(y <= self._ymax, np.exp(lu), np.inf)


def sample_jumps(model: LevyModel, n, rng, eps=0.0):
    """n draws from pi/|pi| (finite measures) or from pi on [eps, inf)."""
    return JumpSampler(model, eps).sample(int(n), rng)


# ---------------------------------------------------------------------------
# eps selection and exact moments of the approximation


def phi_eps(model: LevyModel, x, eps):
    """Laplace exponent of the subordinator with jumps < eps replaced by drift."""
    if eps == 0:
        return float(model.phi(x))
    return float(model.phi(x)) - model.truncation_defect(x, eps)


def eps_moments(model: LevyModel, eps):
    """(E[I_eps], E[I_eps^2]) of the approximating process."""
    p1, p2 = phi_eps(model, 1.0, eps), phi_eps(model, 2.0, eps)
    return 1.0 / p1, 2.0 / (p1 * p2)


def choose_eps(model: LevyModel, rel_bias=1e-3, start=0.5, max_rate=1e6):
    """Largest eps = start * 2^-k whose exact bias on E[I] and E[I^2] is below rel_bias."""
    if math.isfinite(model.total_mass):
        return 0.0
    m1 = 1.0 / float(model.phi(1.0))
    m2 = 2.0 / (float(model.phi(1.0)) * float(model.phi(2.0)))
    eps = start
    for _ in range(60):
        e1, e2 = eps_moments(model, eps)
        if abs(e1 / m1 - 1) < rel_bias and abs(e2 / m2 - 1) < rel_bias:
            break
        eps /= 2
    rate = float(model.tail(eps))
    if rate > max_rate:
        raise ResourceError(f"jump rate {rate:.3g} at eps={eps:.3g} exceeds the budget "
                            f"{max_rate:.3g}; allow a larger eps")
    return eps


def default_scheme(model: LevyModel, eps=None):
    if math.isfinite(model.total_mass):
        return SimScheme("affine_recursion")
    eps = choose_eps(model) if eps is None else eps
    return SimScheme("compensated_path", eps=eps)


# ---------------------------------------------------------------------------
# the simulator


def _simulate_block(sampler: JumpSampler, drift, n, rng, horizon, max_steps):
    lam = sampler.rate
    w = np.ones(n)
    acc = np.zeros(n)
    idx = np.arange(n)
    for _ in range(max_steps):
        if idx.size == 0:
            return acc
        k = idx.size
        d = rng.exponential(1.0 / lam, k)
        wi = w[idx]
        if drift > 0:
            acc[idx] += wi * -np.expm1(-drift * d) / drift
            wi = wi * np.exp(-drift * d)
        else:
            acc[idx] += wi * d
        wi = wi * np.exp(-sampler.sample(k, rng))
        w[idx] = wi
        idx = idx[wi >= horizon]
    raise ResourceError(f"more than {max_steps} jumps per replicate; increase eps")


def _block_rngs(seed, nblocks):
    return [np.random.default_rng(np.random.SeedSequence([int(seed), k])) for k in range(nblocks)]


def simulate_I(model: LevyModel, n, seed=0, scheme: SimScheme = None, max_steps=1_000_000,
               threads=None):
    """Raw samples of I (or of its eps-approximation)."""
    n = int(n)
    if n <= 0:
        raise DomainError("n must be positive")
    scheme = scheme or default_scheme(model)
    if scheme.kind == "exact_special":
        return exact_sampler_special(model, n, seed)
    if scheme.kind == "affine_recursion" and not math.isfinite(model.total_mass):
        raise ConfigurationError("affine recursion needs a finite Lévy measure")
    eps = scheme.eps
    cap = -math.log(scheme.horizon_tail_bound) + 1.0
    sampler = JumpSampler(model, eps, cap=cap)
    drift = model.small_jump_moment(eps, 1) if eps > 0 else 0.0
    nblocks = -(-n // BLOCK_SIZE)
    rngs = _block_rngs(seed, nblocks)
    sizes = [min(BLOCK_SIZE, n - k * BLOCK_SIZE) for k in range(nblocks)]

    def run(k):
        return _simulate_block(sampler, drift, sizes[k], rngs[k], scheme.horizon_tail_bound,
                               max_steps)

    workers = min(threads or _threads(), nblocks)
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(run, range(nblocks)))
    else:
        parts = [run(k) for k in range(nblocks)]
    return np.concatenate(parts)


def summarize(samples, seed, t_list=(), orders=(1, 2), eps=0.0, scheme="affine_recursion",
              exact_eps=(), keep_samples=False):
    x = np.asarray(samples, dtype=float)
    n = x.size
    moments = []
    for k in orders:
        v = x ** k
        se = float(v.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf
        moments.append((int(k), float(v.mean()), se))
    tails = [tuple(r) for r in tail_estimate(x, t_list)] if len(t_list) else []
    return SampleSummary(n=n, seed=int(seed), moment_estimates=moments, tail_estimates=tails,
                         truncation_eps=float(eps), scheme=scheme,
                         exact_moments_eps=[float(v) for v in exact_eps],
                         samples=x if keep_samples else None)


def sample_I(model: LevyModel, n, seed=0, scheme: SimScheme = None, t_list=(), orders=(1, 2),
             keep_samples=False, threads=None):
    """Simulate n replicates of I and summarize moments and tails.

    ``exact_moments_eps`` in the summary holds E[I_eps], E[I_eps^2] of the
    simulated approximation; their gap to 1/phi(1), 2/(phi(1)phi(2)) is the
    eps-bias.
    """
    scheme = scheme or default_scheme(model)
    x = simulate_I(model, n, seed, scheme, threads=threads)
    exact = eps_moments(model, scheme.eps) if scheme.kind != "exact_special" else ()
    return summarize(x, seed, t_list, orders, scheme.eps, scheme.kind, exact, keep_samples)


# ---------------------------------------------------------------------------
# exact special cases


def _kanter_A(u, alpha):
    return (np.sin(alpha * u) ** (alpha / (1 - alpha)) * np.sin((1 - alpha) * u)
            / np.sin(u) ** (1 / (1 - alpha)))


def mittag_leffler(n, c, rng):
    """Generalized Mittag-Leffler(c, c) variates, E[M] = Gamma(c)/Gamma(2c).

    M = sigma^{-c} size-biased by sigma^{-c}, sigma positive c-stable. With
    Kanter's representation sigma = (A(U)/E)^{(1-c)/c}, the bias tilts E to a
    Gamma(2 - c) variable and U by A(U)^{-(1-c)}; the latter is drawn by
    rejection against the uniform law since A is increasing.
    """
    a0 = c ** (c / (1 - c)) * (1 - c)
    out = np.empty(0)
    while out.size < n:
        k = int((n - out.size) * 1.6) + 16
        u = rng.random(k) * np.pi
        u = u[u > 0]
        A = _kanter_A(u, c)
        keep = rng.random(u.size) < (a0 / A) ** (1 - c)
        out = np.concatenate([out, A[keep]])
    A = out[:n]
    e = rng.gamma(2.0 - c, 1.0, n)
    return (e / A) ** (1 - c)


def special_case(model: LevyModel, tol=1e-12):
    """'mittag_leffler', 'exponential_power', both or neither for an (a, b, c) model."""
    if not isinstance(model, ABC):
        return []
    kinds = []
    a, b, c = model.a, model.b, model.c
    if abs(a - 1) <= tol and abs(b + c) <= tol:
        kinds.append("mittag_leffler")
    if abs(c - 1 / (a + 1)) <= tol and abs(b - (-1 + 1 / (a + 1))) <= tol:
        kinds.append("exponential_power")
    return kinds


def exact_sampler_special(model: LevyModel, n, seed=0, method="auto"):
    """Exact samples of I for the two explicit (a, b, c) cases.

    a = 1, b = -c: I is a multiple of a Mittag-Leffler(c, c) variable.
    c = 1/(a+1), b = c - 1: I is a multiple of e(1)^{1/(a+1)}.
    The multiple is fixed by E[I] = 1/phi(1).
    """
    n = int(n)
    if n <= 0:
        raise DomainError("n must be positive")
    kinds = special_case(model)
    if not kinds:
        raise UnsupportedRegimeError("model is not one of the two explicit (a, b, c) cases")
    if method == "auto":
        method = kinds[0]
    if method not in kinds:
        raise UnsupportedRegimeError(f"{method} does not apply to {model!r}")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0xE5]))
    mean = 1.0 / float(model.phi(1.0))
    if method == "mittag_leffler":
        c = model.c
        m = mittag_leffler(n, c, rng)
        return m * mean / (math.gamma(c) / math.gamma(2 * c))
    p = 1.0 / (model.a + 1.0)
    e = rng.exponential(1.0, n) ** p
    return e * mean / math.gamma(1.0 + p)


# ---------------------------------------------------------------------------
# tails and the constant c_I


def tail_estimate(samples, t_list):
    """Rows (t, p_hat, half-width) with Wilson-score 99% half-widths."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n == 0:
        raise DomainError("empty sample")
    t = np.asarray(t_list, dtype=float)
    cnt = n - np.searchsorted(x, t, side="right")
    p = cnt / n
    z2 = Z99 * Z99
    half = Z99 / (1 + z2 / n) * np.sqrt(p * (1 - p) / n + z2 / (4 * n * n))
    return np.column_stack([t, p, half])


def _tail_cov(p, n):
    # Cov(ln p_s, ln p_t) for s <= t: (p_t - p_s p_t)/(n p_s p_t) = (1 - p_s)/(n p_s)
    ps = np.maximum.outer(p, p)
    return (1.0 - ps) / (n * ps)


@dataclass
class CIFit:
    c_hat: float
    stderr: float
    log_c: float
    log_c_se: float
    slope: float
    slope_z: float
    t: np.ndarray = field(repr=False)
    residuals: np.ndarray = field(repr=False)


def fit_cI(model: LevyModel, ev, samples, t_window, form=None, min_exceed=100,
           convert_to=None):
    """GLS fit of ln p_hat(t) - reference(t) to a constant over ``t_window``.

    ``reference`` is the general equivalent :func:`tail_log_asym` unless an
    AsymptoticForm is passed. Empirical survival values at different t are
    correlated; the fit uses Cov(ln p_s, ln p_t) = (1 - p_s)/(n p_s) for
    s <= t. Also reports the GLS slope of the residuals against t and its
    z-statistic as a trend diagnostic.

    With ``convert_to`` (an AsymptoticForm) the fit is still made against
    the general equivalent and the constant is then rescaled into the
    normalization of that form; this keeps the O(1/psi^2) accuracy of the
    general equivalent.
    """
    from .asymptotics import tail_log_asym

    x = np.asarray(samples, dtype=float)
    n = x.size
    t = np.asarray(t_window, dtype=float)
    rows = tail_estimate(x, t)
    cnt = np.rint(rows[:, 1] * n)
    if cnt[-1] < min_exceed:
        raise StatisticalPowerError(f"only {int(cnt[-1])} exceedances at t={t[-1]}; "
                                    f"need {min_exceed}")
    p = rows[:, 1]
    ref = form.log_value_fn(t) if form is not None else tail_log_asym(ev, t)
    y = np.log(p) - ref
    S = _tail_cov(p, n)
    Si = np.linalg.inv(S)
    one = np.ones_like(t)
    prec = float(one @ Si @ one)
    lc = float(one @ Si @ y) / prec
    lse = math.sqrt(1.0 / prec)
    X = np.column_stack([one, t])
    cov_b = np.linalg.inv(X.T @ Si @ X)
    beta = cov_b @ X.T @ Si @ y
    slope = float(beta[1])
    z = slope / math.sqrt(cov_b[1, 1])
    if convert_to is not None:
        from .asymptotics import form_offset

        lc += form_offset(ev, convert_to)
    c = math.exp(lc)
    return CIFit(c_hat=c, stderr=c * lse, log_c=lc, log_c_se=lse, slope=slope, slope_z=float(z),
                 t=t, residuals=y - lc)


def slope_check(samples, t_lo, t_hi):
    """Finite-difference slope of -ln p_hat between t_lo and t_hi with its 99% half-width."""
    x = np.asarray(samples, dtype=float)
    n = x.size
    rows = tail_estimate(x, [t_lo, t_hi])
    p_lo, p_hi = rows[:, 1]
    if p_hi <= 0:
        raise StatisticalPowerError("no exceedances at the upper end of the slope window")
    h = t_hi - t_lo
    slope = (math.log(p_lo) - math.log(p_hi)) / h
    # Var(ln p_lo - ln p_hi) = (1/p_hi - 1/p_lo)/n
    var = (1.0 / p_hi - 1.0 / p_lo) / n / (h * h)
    return slope, Z99 * math.sqrt(var)


# ---------------------------------------------------------------------------
# discrete applications


def _sample_binom_ge2(m, x, rng):
    """Binomial(m, x) conditioned on >= 2."""
    out = np.empty(m.size, dtype=np.int64)
    small = m * x < 1.0
    if np.any(small):
        ms, xs = m[small], x[small]
        q = xs / (1.0 - xs)
        p2 = np.exp(sc.gammaln(ms + 1) - sc.gammaln(ms - 1) - math.log(2.0)
                    + 2 * np.log(xs) + (ms - 2) * np.log1p(-xs))
        h = sc.bdtrc(1, ms, xs)
        target = rng.random(ms.size) * h
        j = np.full(ms.size, 2, dtype=np.int64)
        pj = p2
        cum = pj.copy()
        todo = cum < target
        while np.any(todo):
            i = np.flatnonzero(todo)
            pj[i] = pj[i] * (ms[i] - j[i]) / (j[i] + 1) * q[i]
            j[i] += 1
            cum[i] += pj[i]
            todo[i] = (cum[i] < target[i]) & (j[i] < ms[i])
        out[small] = j
    big = ~small
    if np.any(big):
        mb, xb = m[big], x[big]
        res = rng.binomial(mb, xb)
        bad = res < 2
        while np.any(bad):
            i = np.flatnonzero(bad)
            res[i] = rng.binomial(mb[i], xb[i])
            bad[i] = res[i] < 2
        out[big] = res
    return out


def _sample_merger_x(m, alpha, beta, rng):
    """x with density proportional to P(Bin(m,x) >= 2) x^{alpha-3} (1-x)^{beta-1}."""
    out = np.empty(m.size)
    todo = np.arange(m.size)
    mb = max(1.0, 2.0 ** (1.0 - beta))
    while todo.size:
        mi = m[todo]
        mm = mi.astype(float)
        x0 = np.minimum(math.sqrt(2.0) / mm, 0.5)
        wa = mm * mm / 2 * mb * x0 ** alpha / alpha
        wb = mb * (x0 ** (alpha - 2) - 2.0 ** (2 - alpha)) / (2 - alpha)
        wc = np.full(mm.size, 2.0 ** (3 - alpha) * 0.5 ** beta / beta)
        tot = wa + wb + wc
        r = rng.random(mm.size) * tot
        u = rng.random(mm.size)
        x = np.where(r < wa, x0 * u ** (1 / alpha),
                     np.where(r < wa + wb,
                              (x0 ** (alpha - 2) - u * (x0 ** (alpha - 2) - 2.0 ** (2 - alpha)))
                              ** (1 / (alpha - 2)),
                              1 - 0.5 * u ** (1 / beta)))
        env = np.where(x < x0, mm * mm / 2 * x * x * mb,
                       np.where(x < 0.5, mb, 2.0 ** (3 - alpha) * (1 - x) ** (beta - 1))
                       / x ** (alpha - 3))
        x = np.clip(x, 1e-300, 1 - 1e-16)
        target = sc.bdtrc(1, mi, x) * (1 - x) ** (beta - 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(x < 0.5, target / env,
                             sc.bdtrc(1, mi, x) * x ** (alpha - 3) / 2.0 ** (3 - alpha))
        acc = rng.random(mm.size) < ratio
        out[todo[acc]] = x[acc]
        todo = todo[~acc]
    return out


def beta_coalescent_collisions(n_particles, alpha, beta, n_runs, seed=0):
    """Number of collision events of the Beta(alpha, beta)-coalescent from n blocks to 1.

    Uses the embedded jump chain: an event with participation probability x
    has intensity x^{-2} Lambda(dx) with Lambda = Beta(alpha, beta); it is a
    merger when at least two of the m blocks participate, and j participating
    blocks become one.
    """
    if not (1 < alpha < 2 and beta > 0):
        raise DomainError("requires 1 < alpha < 2 and beta > 0")
    n_particles = int(n_particles)
    if n_particles < 2:
        raise DomainError("n_particles must be at least 2")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0xBC]))
    m = np.full(int(n_runs), n_particles, dtype=np.int64)
    count = np.zeros(int(n_runs), dtype=np.int64)
    live = np.flatnonzero(m > 1)
    while live.size:
        mm = m[live]
        x = _sample_merger_x(mm, alpha, beta, rng)
        j = _sample_binom_ge2(mm, x, rng)
        m[live] = mm - j + 1
        count[live] += 1
        live = live[m[live] > 1]
    return count


def barrier_walk_absorption(n_barrier, c, n_runs, seed=0, tail_fn=None, inverse_fn=None):
    """Steps of a non-decreasing walk conditioned to stay at or below the barrier.

    With ``m`` units left, a step s in {1, ..., m} is drawn from the step law
    conditioned on s <= m, by inversion: U uniform on (tail(m+1), 1) mapped
    through ``inverse_fn``. The default step law has P(s >= k) = k^{-c}.
    The walk is absorbed when it reaches the barrier.
    """
    if not (0 < c < 1):
        raise DomainError("c must lie in (0, 1)")
    if tail_fn is None:
        def tail_fn(k):
            return np.asarray(k, dtype=float) ** (-c)
    if inverse_fn is None:
        def inverse_fn(u):
            return np.floor(u ** (-1.0 / c))
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0xBA]))
    m = np.full(int(n_runs), int(n_barrier), dtype=np.int64)
    count = np.zeros(int(n_runs), dtype=np.int64)
    live = np.flatnonzero(m > 0)
    while live.size:
        mm = m[live]
        lo = tail_fn(mm + 1)
        u = lo + (1 - lo) * rng.random(mm.size)
        step = np.clip(inverse_fn(u).astype(np.int64), 1, mm)
        m[live] = mm - step
        count[live] += 1
        live = live[m[live] > 0]
    return count


# ---------------------------------------------------------------------------
# binary sample files


def write_samples(path, samples):
    """Little-endian f8 samples after a 16-byte header: magic, version (u4), count (u8)."""
    x = np.ascontiguousarray(samples, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sIQ", _MAGIC, _VERSION, x.size))
        fh.write(x.tobytes())


def read_samples(path):
    with open(path, "rb") as fh:
        magic, version, count = struct.unpack("<4sIQ", fh.read(16))
        if magic != _MAGIC or version != _VERSION:
            raise ConfigurationError(f"{path}: not a sample file")
        x = np.frombuffer(fh.read(), dtype="<f8")
    if x.size != count:
        raise ConfigurationError(f"{path}: truncated ({x.size} of {count} samples)")
    return x.copy()


__all__ = ["SimScheme", "SampleSummary", "JumpSampler", "sample_jumps", "phi_eps",
           "eps_moments", "choose_eps", "default_scheme", "simulate_I", "sample_I",
           "summarize", "mittag_leffler", "special_case", "exact_sampler_special",
           "tail_estimate", "fit_cI", "CIFit", "slope_check", "beta_coalescent_collisions",
           "barrier_walk_absorption", "write_samples", "read_samples"]
