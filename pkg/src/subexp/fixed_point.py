"""Monotone iteration for the hazard rate f' = k / P(I > .) and for psi(x)/x.

The two operators act on non-negative functions of x > 0:

    Theta(g)(x)     = int_0^inf (1 - exp(-int_x^{x e^v} g(u) du)) pi(dv)
    Theta_phi(g)(x) = phi(x g(x)).

f' is the unique fixed point of Theta and psi(x)/x that of Theta_phi.
Integrating by parts in v, with G a primitive of g and q(x) = x g(x),

    Theta(g)(x) = int_0^inf pi_bar(v) q(x e^v) exp(-(G(x e^v) - G(x))) dv,

which is finite term by term even for infinite Lévy measures. By default q
is piecewise linear in ln x, so G is piecewise quadratic and can be inverted
in closed form; substituting w = G(x e^v) - G(x) turns the integral into
int_0^inf e^{-w} pi_bar(v(w)) dw and the discrete operator is exactly
monotone. The opt-in ``hermite`` scheme carries G as a cubic Hermite spline
and integrates in v: second order more accurate on smooth iterates, not
monotone on rough ones. Beyond the grid, g is continued by a power law.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from .errors import ConfigurationError, DomainError
from .levy import LevyModel, check_H, x_psi
from .quadrature import gauss_legendre, quad_split

_PANELS_PER_DECADE = 4
_GL_PER_PANEL = 8
_W_MIN = 1e-12
_EXP_CUTOFF = 40.0  # e^{-40} ~ 4e-18


@dataclass(frozen=True)
class GridFunction:
    """Samples on a geometric grid; constant to the left, power law to the right."""

    grid: np.ndarray
    values: np.ndarray
    right_exponent: float = 0.0

    def __post_init__(self):
        x = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if x.ndim != 1 or x.shape != v.shape or x.size < 2:
            raise ConfigurationError("grid and values must be 1-d arrays of equal length >= 2")
        if np.any(x <= 0) or np.any(np.diff(x) <= 0):
            raise ConfigurationError("grid must be positive and strictly increasing")
        if np.any(~(v >= 0)):
            raise ConfigurationError("values must be non-negative")
        object.__setattr__(self, "grid", x)
        object.__setattr__(self, "values", v)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        g, v = self.grid, self.values
        out = np.interp(np.log(x), np.log(g), v)
        right = x > g[-1]
        if np.any(right):
            out = np.where(right, v[-1] * (np.maximum(x, g[-1]) / g[-1]) ** self.right_exponent,
                           out)
        return out

    def with_values(self, values, right_exponent=None):
        p = self.right_exponent if right_exponent is None else right_exponent
        return GridFunction(self.grid, values, p)


def geometric_grid(x_lo, x_hi, m=512):
    if not (0 < x_lo < x_hi) or m < 16:
        raise ConfigurationError("need 0 < x_lo < x_hi and at least 16 points")
    if x_hi < 10 * x_lo:
        raise ConfigurationError(f"grid must span more than a decade; need x_hi >= {10 * x_lo}")
    return np.geomspace(x_lo, x_hi, m)


def trusted_mask(grid):
    """Grid points outside the top decade, which feels the right extrapolation."""
    grid = np.asarray(grid)
    return grid <= grid[-1] / 10.0


# ---------------------------------------------------------------------------
# primitives


def _primitive(lx, q):
    """G on the grid from q = dG/d ln x, trapezoid with endpoint derivative correction."""
    h = np.diff(lx)
    dq = np.gradient(q, lx)
    inc = 0.5 * h * (q[:-1] + q[1:]) - h * h / 12.0 * (dq[1:] - dq[:-1])
    return np.concatenate([[0.0], np.cumsum(inc)])


class _Primitive:
    """G(s) and q(s) = dG/ds in s = ln x, with a power-law continuation.

    ``linear``: q piecewise linear in s and G its exact (quadratic) integral.
    Both are monotone in the node values, so the discrete Theta inherits the
    operator's monotonicity. ``hermite``: G from a corrected trapezoid rule
    and a cubic Hermite spline; about four orders more accurate on smooth
    iterates, but it can overshoot between nodes when g is rough.
    """

    def __init__(self, g: GridFunction, scheme="linear"):
        if scheme not in ("linear", "hermite"):
            raise ConfigurationError("scheme must be 'linear' or 'hermite'")
        self.scheme = scheme
        self.lx = np.log(g.grid)
        self.q = g.grid * g.values
        if scheme == "hermite":
            self.G = _primitive(self.lx, self.q)
            self.spline = CubicHermiteSpline(self.lx, self.G, self.q)
        else:
            h = np.diff(self.lx)
            self.G = np.concatenate([[0.0], np.cumsum(0.5 * h * (self.q[:-1] + self.q[1:]))])
            self.slope = np.diff(self.q) / h
        self.p = g.right_exponent
        self.s_hi = self.lx[-1]

    def _inside(self, s):
        if self.scheme == "hermite":
            return self.spline(s), np.maximum(self.spline(s, 1), 0.0)
        i = np.clip(np.searchsorted(self.lx, s, side="right") - 1, 0, self.lx.size - 2)
        d = s - self.lx[i]
        sl = self.slope[i]
        return self.G[i] + d * (self.q[i] + 0.5 * sl * d), self.q[i] + sl * d

    def offset_inverse(self, w):
        """v_i(w) = min{v : G(s_i + v) - G(s_i) >= w} for every node i (rows) and w (columns).

        Linear scheme only. Flat stretches of G are skipped; ``inf`` where the
        continuation never reaches the target.
        """
        lx, q, G, sl = self.lx, self.q, self.G, self.slope
        m = lx.size
        w = np.asarray(w, dtype=float)[None, :]
        h = np.diff(lx)
        cell = 0.5 * h * (q[:-1] + q[1:])
        # start in the node's own cell, where the increment is exact
        j = np.broadcast_to(np.arange(m)[:, None], (m, w.shape[1])).copy()
        dG = np.broadcast_to(w, j.shape).copy()
        own = np.concatenate([cell, [0.0]])[:, None]
        far = (dG > own) & (j < m - 1)
        if np.any(far):
            T = G[j[far]] + dG[far]
            jj = np.searchsorted(G, T, side="left") - 1
            j[far] = np.clip(jj, 0, m - 1)
            dG[far] = T - G[j[far]]
        out = np.empty(j.shape)
        inner = j < m - 1
        ji, d = j[inner], np.maximum(dG[inner], 0.0)
        qi, si = q[ji], sl[ji]
        den = qi + np.sqrt(np.maximum(qi * qi + 2.0 * si * d, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(den > 0, 2.0 * d / den, 0.0)
        i = np.broadcast_to(np.arange(m)[:, None], j.shape)
        out[inner] = (lx[ji] - lx[i[inner]]) + np.minimum(step, h[ji])
        # power-law continuation: G = G_m + q_m expm1(r so) / r
        qh, r = q[-1], self.p + 1.0
        d = np.maximum(dG[~inner], 0.0)
        with np.errstate(divide="ignore", over="ignore"):
            out[~inner] = (self.s_hi - lx[i[~inner]]) + (
                np.log1p(r * d / qh) / r if qh > 0 else np.inf)
        return out

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        inside = s <= self.s_hi
        G = np.empty(s.shape)
        q = np.empty(s.shape)
        G[inside], q[inside] = self._inside(s[inside])
        so = s[~inside] - self.s_hi
        qh, r = self.q[-1], self.p + 1.0
        e = np.exp(np.minimum(r * so, 700.0))
        q[~inside] = qh * e
        G[~inside] = self.G[-1] + qh * np.expm1(np.minimum(r * so, 700.0)) / r
        return G, q


# ---------------------------------------------------------------------------
# the jump-size quadrature shared by Theta and the integral-equation check


@dataclass
class _VRule:
    v: np.ndarray
    w: np.ndarray  # weights for dv, including the Jacobian of v = e^s
    tail: np.ndarray
    v_min: float
    head: float  # int_0^{v_min} pi_bar(v) dv


def _v_rule(model: LevyModel, v_min, v_max):
    # log-spaced panels up to v = 1, then panels of width 1/4: at large v
    # the integrand decays like exp(-c e^v)
    nodes, weights = gauss_legendre(_GL_PER_PANEL)
    top = min(1.0, v_max)
    v, w = _log_panels(v_min, top, nodes, weights)
    if v_max > top:
        k = int(math.ceil((v_max - top) * 4))
        vv, ww = _panels(np.linspace(top, v_max, k + 1), nodes, weights)
        v, w = np.concatenate([v, vv]), np.concatenate([w, ww])
    tail = np.asarray(model.tail(v), dtype=float)
    gam = model.tail_power_at_zero
    head = float(model.tail(v_min)) * v_min / (1.0 - gam)
    return _VRule(v=v, w=w, tail=tail, v_min=v_min, head=head)


def _panels(edges, nodes, weights):
    a, b = edges[:-1, None], edges[1:, None]
    return (0.5 * (b - a) * nodes + 0.5 * (a + b)).ravel(), (0.5 * (b - a) * weights).ravel()


def _log_panels(lo, hi, nodes, weights):
    d0, d1 = math.log10(lo), math.log10(hi)
    k = max(1, int(math.ceil((d1 - d0) * _PANELS_PER_DECADE)))
    s, ws = _panels(np.linspace(d0, d1, k + 1) * math.log(10.0), nodes, weights)
    v = np.exp(s)
    return v, ws * v


def _rule_for(model, q_lo, q_hi):
    v_max = math.log1p(_EXP_CUTOFF / max(q_lo, 1e-300))
    v_max = min(max(v_max, 1.0), 60.0)
    v_min = 1e-10 / max(1.0, q_hi)
    return _v_rule(model, v_min, v_max)


def _w_rule():
    """Nodes and weights for int_0^W e^{-w} h(w) dw, W = _EXP_CUTOFF, log-refined at 0."""
    nodes, weights = gauss_legendre(_GL_PER_PANEL)
    w, ww = _log_panels(_W_MIN, 1.0, nodes, weights)
    w2, ww2 = _panels(np.arange(1.0, _EXP_CUTOFF + 1.0, 2.0), nodes, weights)
    w, ww = np.concatenate([w, w2]), np.concatenate([ww, ww2])
    return w, ww * np.exp(-w)


_W_RULE = _w_rule()


# ---------------------------------------------------------------------------
# operators


def theta_apply(g: GridFunction, model: LevyModel, rule: Optional[_VRule] = None,
                scheme="linear"):
    """Theta(g) on the grid of g (``scheme`` as in the primitive: linear or hermite)."""
    q = g.grid * g.values
    if not np.any(q > 0):
        return g.with_values(np.zeros_like(q))
    if scheme == "linear":
        return g.with_values(_theta_substituted(g, model))
    rule = rule or _rule_for(model, max(q[q > 0].min(), 1e-12), q.max())
    P = _Primitive(g, scheme)
    lx = P.lx
    s = lx[:, None] + rule.v[None, :]
    Gs, qs = P(s)
    dG = Gs - P.G[:, None]
    body = (rule.w * rule.tail)[None, :] * qs * np.exp(-np.maximum(dG, 0.0))
    out = body.sum(axis=1) + rule.head * q
    return g.with_values(np.maximum(out, 0.0))


def _theta_substituted(g: GridFunction, model: LevyModel):
    # with w = G(x e^v) - G(x) the by-parts integral becomes
    # int_0^inf e^{-w} pi_bar(v(w)) dw; a larger g gives a smaller v(w), so
    # any positive-weight rule in w keeps Theta monotone
    P = _Primitive(g, "linear")
    w, ww = _W_RULE
    v = np.maximum(P.offset_inverse(np.concatenate([[_W_MIN], w])), 1e-300)
    tail = np.zeros(v.shape)
    fin = np.isfinite(v)
    tail[fin] = np.asarray(model.tail(v[fin]), dtype=float)
    head = tail[:, 0] * _W_MIN / (1.0 - model.tail_power_at_zero)
    return np.maximum(tail[:, 1:] @ ww + head, 0.0)


def theta_phi_apply(g: GridFunction, model: LevyModel):
    """Theta_phi(g)(x) = phi(x g(x))."""
    return g.with_values(np.asarray(model.phi(g.grid * g.values), dtype=float))


# ---------------------------------------------------------------------------
# iteration


@dataclass
class FixedPointResult:
    g: GridFunction
    residual: float
    iterations: int
    converged: bool
    trusted: np.ndarray = field(repr=False)
    history: List[np.ndarray] = field(default_factory=list, repr=False)

    @property
    def grid(self):
        return self.g.grid

    @property
    def values(self):
        return self.g.values


def default_seed(model: LevyModel):
    m = model.total_mass
    return 0.5 * m if math.isfinite(m) else 1.0


def _right_exponent(grid, values, cap):
    """Log-slope over the last tenth of the grid, clipped to [0, cap]."""
    n = max(3, grid.size // 10)
    x, v = np.log(grid[-n:]), values[-n:]
    if np.any(v <= 0):
        return 0.0
    slope = np.polyfit(x, np.log(v), 1)[0]
    return float(np.clip(slope, 0.0, cap))


def kappa_hat(model: LevyModel, grid):
    """Estimate of limsup x phi'(x)/phi(x): its value at the top of the grid."""
    return check_H(model, grid)[1]


def _iterate(step, g0: GridFunction, trusted, tol, max_iter, keep_history, exp_cap=None):
    g = g0
    hist = [g.values.copy()] if keep_history else []
    best, best_res = g, math.inf
    for n in range(1, max_iter + 1):
        new = step(g)
        if exp_cap is not None:
            new = new.with_values(new.values, _right_exponent(new.grid, new.values, exp_cap))
        diff = np.abs(new.values - g.values)[trusted].max()
        scale = np.abs(new.values)[trusted].max()
        res = diff / scale if scale > 0 else 0.0
        g = new
        if keep_history:
            hist.append(g.values.copy())
        if res < best_res:
            best, best_res = g, res
        if res <= tol:
            return FixedPointResult(g, res, n, True, trusted, hist)
    warnings.warn(f"fixed-point iteration stopped after {max_iter} steps "
                  f"(residual {best_res:.3g})", RuntimeWarning)
    return FixedPointResult(best, best_res, max_iter, False, trusted, hist)


def iterate_to_fprime(model: LevyModel, grid, a0=None, tol=1e-10, max_iter=500,
                      keep_history=False, scheme="linear"):
    """Iterate Theta from the constant a0 until the sup-norm update is below tol.

    The update is measured relative to sup |g| over the trusted sub-grid. On
    hitting ``max_iter`` the best iterate is returned with ``converged=False``.
    ``scheme="hermite"`` trades exact monotonicity for accuracy (see
    :class:`_Primitive`).
    """
    grid = np.asarray(grid, dtype=float)
    a0 = default_seed(model) if a0 is None else float(a0)
    if not a0 > 0:
        raise DomainError("a0 must be positive")
    if math.isfinite(model.total_mass) and not a0 < model.total_mass:
        raise DomainError("a0 must lie in (0, |pi|) for a finite Lévy measure")
    kh = kappa_hat(model, grid)
    cap = kh / (1.0 - kh) if kh < 1 else 0.0
    g0 = GridFunction(grid, np.full(grid.size, a0), 0.0)
    trusted = trusted_mask(grid)
    state = {}

    def step(g):
        if scheme == "linear":
            return theta_apply(g, model, scheme=scheme)
        q = g.grid * g.values
        key = (float(q[q > 0].min()) if np.any(q > 0) else 1e-12, float(q.max()))
        rule = state.get("rule")
        # rebuild the v-rule only when the range of q has moved by a factor 2
        if rule is None or not (state["lo"] / 2 <= key[0] and key[1] <= state["hi"] * 2):
            state["rule"] = rule = _rule_for(model, key[0] / 2, key[1] * 2)
            state["lo"], state["hi"] = key[0] / 2, key[1] * 2
        return theta_apply(g, model, rule, scheme)

    return _iterate(step, g0, trusted, tol, max_iter, keep_history, exp_cap=cap)


def iterate_to_psi_ratio(model: LevyModel, grid, a0=None, tol=1e-12, max_iter=5000,
                         keep_history=False):
    """Iterate Theta_phi from the constant a0; the limit is psi(x)/x for x > x_psi."""
    grid = np.asarray(grid, dtype=float)
    a0 = default_seed(model) if a0 is None else float(a0)
    g0 = GridFunction(grid, np.full(grid.size, a0), 0.0)
    return _iterate(lambda g: theta_phi_apply(g, model), g0, trusted_mask(grid), tol, max_iter,
                    keep_history)


# ---------------------------------------------------------------------------
# thresholds and bounds


def x_a(model: LevyModel, a, grid):
    """Smallest grid point from which phi(x a) >= a."""
    grid = np.asarray(grid, dtype=float)
    ok = np.asarray(model.phi(grid * a)) >= a
    bad = np.flatnonzero(~ok)
    if bad.size == 0:
        return float(grid[0])
    if bad[-1] == grid.size - 1:
        return math.inf
    return float(grid[bad[-1] + 1])


def _envelope_lhs(model: LevyModel, kappa, x):
    """pi(1, inf) + phi(y) + y int_0^1 e^{-yv}((1-k)(e^{v/(1-k)} - 1) - v) pi(dv), y = x^{1/(1-k)}."""
    k1 = 1.0 - kappa
    y = x ** (1.0 / k1)

    def H(v):
        return math.exp(-y * v) * (k1 * math.expm1(v / k1) - v)

    def dH(v):
        return math.exp(-y * v) * (math.expm1(v / k1) - y * (k1 * math.expm1(v / k1) - v))

    pts = sorted({0.0, *[p for p in (0.1 / y, 1.0 / y, 10.0 / y) if p < 1.0], 1.0})
    val, _ = quad_split(lambda v: dH(v) * float(model.tail(v)), pts,
                        singular_power=model.tail_power_at_zero or None)
    integral = val - H(1.0) * float(model.tail(1.0))
    return float(model.tail(1.0)) + float(model.phi(y)) + y * integral


def x_kappa(model: LevyModel, kappa, a, grid):
    """Smallest grid point beyond which the envelope x^{kappa/(1-kappa)} is self-reproducing."""
    grid = np.asarray(grid, dtype=float)
    ok = np.array([_envelope_lhs(model, kappa, x) <= x ** (kappa / (1 - kappa)) for x in grid])
    ok &= grid >= a ** (1 - kappa)
    bad = np.flatnonzero(~ok)
    if bad.size == 0:
        return float(grid[0])
    if bad[-1] == grid.size - 1:
        return math.inf
    return float(grid[bad[-1] + 1])


def sandwich_bounds(model: LevyModel, grid, kappa):
    """(psi(x)/x, x^{kappa/(1-kappa)}) on the grid; the lower bound is 0 for x <= x_psi."""
    from .psi import PsiEvaluator

    grid = np.asarray(grid, dtype=float)
    lower = np.zeros_like(grid)
    dom = grid > x_psi(model)
    if np.any(dom):
        ev = PsiEvaluator(model)
        lower[dom] = np.asarray(ev.psi(grid[dom])) / grid[dom]
    upper = grid ** (kappa / (1.0 - kappa))
    return lower, upper


def sandwich_threshold(model: LevyModel, grid, a0=None):
    """max(x_kappa, x_a, x_psi) with kappa halfway between kappa_hat and 1."""
    a0 = default_seed(model) if a0 is None else a0
    kh = kappa_hat(model, grid)
    kappa = kh + 0.5 * (1.0 - kh)
    return max(x_kappa(model, kappa, a0, grid), x_a(model, a0, grid), x_psi(model)), kappa


# ---------------------------------------------------------------------------
# density and the integral equation


def density_from_fprime(fp, lower_mass=True):
    """k = f' exp(-F) with F the primitive of f' from the left grid edge.

    The unknown int_0^{x_lo} f' only scales k; the result is normalized so
    that its trapezoid integral over the grid is one.
    """
    g = fp.g if isinstance(fp, FixedPointResult) else fp
    x = g.grid
    lx = np.log(x)
    F = _primitive(lx, x * g.values)
    k = g.values * np.exp(-F)
    z = np.trapezoid(k * x, lx)
    if not (0.9 <= z <= 1.1):
        warnings.warn(f"density integrates to {z:.4g} before normalization", RuntimeWarning)
    if not z > 0:
        raise DomainError("density vanishes on the grid")
    return GridFunction(x, k / z, 0.0)


def density_moment(k: GridFunction, order=1):
    x = k.grid
    return float(np.trapezoid(k.values * x ** (order + 1), np.log(x)))


def verify_integral_equation(k: GridFunction, model: LevyModel, rule=None):
    """sup over trusted grid points of |k(x) - int_x^inf pi_bar(ln(y/x)) k(y) dy| / k(x).

    The right side is evaluated as int_0^inf pi_bar(v) k(x e^v) x e^v dv on
    the same jump-size quadrature as Theta, with ln k interpolated by a cubic
    spline in ln x and continued linearly in x beyond the grid.
    """
    x, kv = k.grid, k.values
    pos = kv > 1e-280
    if not np.any(pos):
        return 0.0
    lx = np.log(x)
    lk = np.where(pos, np.log(np.where(pos, kv, 1.0)), -700.0)
    # last usable points define the exponential rate on the right
    i = np.flatnonzero(pos)[-1]
    j = max(i - 4, 0)
    rate = (lk[j] - lk[i]) / (x[i] - x[j]) if i > j else 1.0
    rate = max(rate, 0.0)
    spline = CubicSpline(lx[: i + 1], lk[: i + 1])

    def logk(s):
        out = np.empty(s.shape)
        inside = s <= lx[i]
        out[inside] = spline(s[inside])
        y = np.exp(s[~inside])
        out[~inside] = lk[i] - rate * (y - x[i])
        return out

    if rule is None:
        span = math.log(x[-1] / x[0]) + 5.0
        rule = _v_rule(model, 1e-10 / max(1.0, x[-1] * max(rate, 1.0)), min(span, 60.0))
    s = lx[:, None] + rule.v[None, :]
    body = (rule.w * rule.tail)[None, :] * np.exp(np.maximum(logk(s), -745.0) + s)
    rhs = body.sum(axis=1) + rule.head * x * kv
    mask = trusted_mask(x) & pos
    if not np.any(mask):
        return 0.0
    return float(np.max(np.abs(kv[mask] - rhs[mask]) / kv[mask]))


# ---------------------------------------------------------------------------
# CSV


def write_grid_csv(path, g: GridFunction, meta=None):
    """Columns x, value under '# key=value' metadata lines."""
    with open(path, "w") as fh:
        for key, val in (meta or {}).items():
            fh.write(f"# {key}={val}\n")
        fh.write(f"# right_exponent={g.right_exponent!r}\n")
        fh.write("x,value\n")
        for a, b in zip(g.grid, g.values):
            fh.write(f"{float(a)!r},{float(b)!r}\n")


def read_grid_csv(path):
    meta = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                meta[key] = val
            elif line and line != "x,value":
                a, b = line.split(",")
                rows.append((float(a), float(b)))
    arr = np.array(rows)
    p = float(meta.pop("right_exponent", 0.0))
    return GridFunction(arr[:, 0], arr[:, 1], p), meta


__all__ = ["GridFunction", "geometric_grid", "trusted_mask", "theta_apply", "theta_phi_apply",
           "FixedPointResult", "default_seed", "kappa_hat", "iterate_to_fprime",
           "iterate_to_psi_ratio", "x_a", "x_kappa", "sandwich_bounds", "sandwich_threshold",
           "density_from_fprime", "density_moment", "verify_integral_equation",
           "write_grid_csv", "read_grid_csv"]
