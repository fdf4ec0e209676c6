"""Inverse psi of x -> x/phi(x), its derivatives and the exponent integral.

``psi(x)`` solves ``y / phi(y) = x`` for ``x > x_psi``. The root is found in
log space, ``h(s) = s - ln phi(e^s) - ln x``, whose slope ``1 - y phi'(y)/phi(y)``
is positive for every subordinator. Differentiating the defining relation gives

    psi'  = phi(psi) / (1 - x phi'(psi))
    psi'' = (2 phi'(psi) psi' + x phi''(psi) psi'^2) / (1 - x phi'(psi)).
"""

import math
import threading

import numpy as np

from .errors import DomainError, NumericalError, SingularityError
from .levy import LevyModel, Stable, x_psi as _x_psi
from .quadrature import gauss_legendre
from .special import lambert_w_minus1

_GL_NODES = 24
_CHECKPOINTS_PER_OCTAVE = 4


class PsiEvaluator:
    """Cached numerical inverse of x -> x/phi(x) for one model.

    Parameters
    ----------
    model : LevyModel
    root_tolerance : float
        Relative residual target ``|psi/phi(psi) - x| <= tol * x``.
    """

    def __init__(self, model: LevyModel, root_tolerance=1e-12):
        self.model = model
        self.root_tolerance = float(root_tolerance)
        self.x_psi = _x_psi(model)
        self.lower = self.x_psi + 1.0
        self._lock = threading.Lock()
        # F(lower * 2^(k/4)) for k = 0, 1, ..., len - 1
        self._cum = [0.0]

    # -- psi -----------------------------------------------------------
    def psi(self, x):
        xa = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any(~(xa > self.x_psi)):
            raise DomainError(f"psi requires x > x_psi = {self.x_psi}")
        if isinstance(self.model, Stable):
            out = xa ** (1.0 / (1.0 - self.model.alpha))
        else:
            out = self._solve(xa)
        return float(out[0]) if np.ndim(x) == 0 else out

    def _h(self, s, lx):
        y = np.exp(s)
        ph = np.asarray(self.model.phi(y), dtype=float)
        return s - np.log(ph) - lx

    def _solve(self, xa):
        model = self.model
        lx = np.log(xa)
        # initial guess x phi(x), exact for constant phi
        s = np.log(xa * np.asarray(model.phi(xa), dtype=float))
        h = self._h(s, lx)
        lo = np.where(h <= 0, s, -np.inf)
        hi = np.where(h > 0, s, np.inf)
        hlo = np.where(h <= 0, h, np.nan)
        hhi = np.where(h > 0, h, np.nan)
        step = np.log(2.0)
        for _ in range(1000):
            need_up = ~np.isfinite(hi)
            need_dn = ~np.isfinite(lo)
            if not (need_up.any() or need_dn.any()):
                break
            if need_up.any():
                st = np.where(np.isfinite(lo), lo, s)[need_up] + step
                hv = self._h(st, lx[need_up])
                idx = np.flatnonzero(need_up)
                pos = hv > 0
                hi[idx[pos]], hhi[idx[pos]] = st[pos], hv[pos]
                lo[idx[~pos]], hlo[idx[~pos]] = st[~pos], hv[~pos]
            if need_dn.any():
                st = np.where(np.isfinite(hi), hi, s)[need_dn] - step
                hv = self._h(st, lx[need_dn])
                idx = np.flatnonzero(need_dn)
                pos = hv > 0
                hi[idx[pos]], hhi[idx[pos]] = st[pos], hv[pos]
                lo[idx[~pos]], hlo[idx[~pos]] = st[~pos], hv[~pos]
            step = min(2.0 * step, 8.0)
        else:
            raise NumericalError("psi bracket expansion exceeded 1000 doublings")
        return np.exp(self._refine(lo, hi, hlo, hhi, lx))

    def _refine(self, lo, hi, hlo, hhi, lx):
        model = self.model
        tol = self.root_tolerance
        s = np.where(-hlo < hhi, lo, hi)
        hs = np.where(-hlo < hhi, hlo, hhi)
        active = np.abs(hs) > tol
        for _ in range(200):
            if not active.any():
                break
            idx = np.flatnonzero(active)
            y = np.exp(s[idx])
            ph = np.asarray(model.phi(y), dtype=float)
            dph = np.asarray(model.phi_derivative(y, 1), dtype=float)
            slope = 1.0 - y * dph / ph
            with np.errstate(divide="ignore", invalid="ignore"):
                cand = s[idx] - hs[idx] / slope
            l, u = lo[idx], hi[idx]
            bad = ~np.isfinite(cand) | (cand <= l) | (cand >= u)
            cand = np.where(bad, 0.5 * (l + u), cand)
            hc = self._h(cand, lx[idx])
            pos = hc > 0
            hi[idx[pos]] = cand[pos]
            lo[idx[~pos]] = cand[~pos]
            s[idx], hs[idx] = cand, hc
            width = hi[idx] - lo[idx]
            done = (np.abs(hc) <= tol) | (width <= 4e-16 * np.maximum(1.0, np.abs(cand)))
            active[idx[done]] = False
        else:
            raise NumericalError("psi root refinement did not converge",
                                 float(np.max(np.abs(hs[active]))))
        # one more Newton step takes a converged root to rounding level
        y = np.exp(s)
        slope = 1.0 - y * np.asarray(model.phi_derivative(y, 1), dtype=float) / np.asarray(
            model.phi(y), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            cand = s - hs / slope
        ok = np.isfinite(cand) & (cand >= lo) & (cand <= hi)
        if ok.any():
            hc = self._h(cand[ok], lx[ok])
            better = np.abs(hc) <= np.abs(hs[ok])
            s[np.flatnonzero(ok)[better]] = cand[ok][better]
        return s

    # -- derivatives ---------------------------------------------------
    def _denominator(self, x, y):
        d = 1.0 - x * np.asarray(self.model.phi_derivative(y, 1), dtype=float)
        if np.any(d <= 1e-12):
            bad = float(np.max(x * np.asarray(self.model.phi_derivative(y, 1))))
            raise SingularityError(f"1 - x phi'(psi(x)) vanishes (x phi'(psi) = {bad})")
        return d

    def psi_prime(self, x):
        xa = np.atleast_1d(np.asarray(x, dtype=float))
        if isinstance(self.model, Stable):
            a = self.model.alpha
            out = xa ** (a / (1.0 - a)) / (1.0 - a)
        else:
            y = np.atleast_1d(self.psi(xa))
            out = np.asarray(self.model.phi(y)) / self._denominator(xa, y)
        return float(out[0]) if np.ndim(x) == 0 else out

    def psi_second(self, x):
        xa = np.atleast_1d(np.asarray(x, dtype=float))
        if isinstance(self.model, Stable):
            a = self.model.alpha
            out = a / (1.0 - a) ** 2 * xa ** ((2 * a - 1.0) / (1.0 - a))
        else:
            y = np.atleast_1d(self.psi(xa))
            den = self._denominator(xa, y)
            p1 = np.asarray(self.model.phi(y)) / den
            d1 = np.asarray(self.model.phi_derivative(y, 1))
            d2 = np.asarray(self.model.phi_derivative(y, 2))
            out = (2.0 * d1 * p1 + xa * d2 * p1 * p1) / den
        return float(out[0]) if np.ndim(x) == 0 else out

    # -- exponent integral ---------------------------------------------
    def _checkpoint(self, k):
        return self.lower * 2.0 ** (k / _CHECKPOINTS_PER_OCTAVE)

    def _piece(self, a, b):
        # int_a^b psi(r)/r dr = int_{ln a}^{ln b} psi(e^s) ds, Gauss-Legendre
        if b <= a:
            return 0.0
        nodes, weights = gauss_legendre(_GL_NODES)
        la, lb = math.log(a), math.log(b)
        s = 0.5 * (lb - la) * nodes + 0.5 * (lb + la)
        return 0.5 * (lb - la) * float(np.dot(weights, self.psi(np.exp(s))))

    def _extend(self, k):
        with self._lock:
            while len(self._cum) <= k:
                j = len(self._cum)
                self._cum.append(self._cum[-1] + self._piece(self._checkpoint(j - 1),
                                                               self._checkpoint(j)))

    def exponent_integral(self, t):
        """int_{x_psi + 1}^t psi(r)/r dr (scalar or array)."""
        ta = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(~(ta >= self.lower)):
            raise DomainError(f"exponent_integral requires t >= x_psi + 1 = {self.lower}")
        if isinstance(self.model, Stable):
            a = self.model.alpha
            p = 1.0 / (1.0 - a)
            out = (ta ** p - self.lower ** p) / p
            return float(out[0]) if np.ndim(t) == 0 else out
        out = np.empty_like(ta)
        ks = np.floor(_CHECKPOINTS_PER_OCTAVE * np.log2(ta / self.lower) + 1e-12).astype(int)
        ks = np.maximum(ks, 0)
        self._extend(int(ks.max()))
        for i, (tv, k) in enumerate(zip(ta, ks)):
            base = self._checkpoint(k)
            if base > tv:
                k -= 1
                base = self._checkpoint(k)
            out[i] = self._cum[k] + self._piece(base, tv)
        return float(out[0]) if np.ndim(t) == 0 else out

    def checkpoints(self):
        """Cached (t_k, F(t_k)) pairs."""
        with self._lock:
            cum = list(self._cum)
        t = np.array([self._checkpoint(k) for k in range(len(cum))])
        return t, np.array(cum)


def psi(ev: PsiEvaluator, x):
    return ev.psi(x)


def psi_prime(ev: PsiEvaluator, x):
    return ev.psi_prime(x)


def psi_second(ev: PsiEvaluator, x):
    return ev.psi_second(x)


def exponent_integral(ev: PsiEvaluator, t):
    return ev.exponent_integral(t)


def gamma_psi_closed(t):
    """psi for the Gamma subordinator, -t W_{-1}(-e^{-1/t}/t) - 1, t > 1."""
    ta = np.asarray(t, dtype=float)
    if np.any(~(ta > 1.0)):
        raise DomainError("gamma_psi_closed requires t > 1")
    w = lambert_w_minus1(-np.exp(-1.0 / ta) / ta)
    return -ta * w - 1.0


__all__ = ["PsiEvaluator", "psi", "psi_prime", "psi_second", "exponent_integral",
           "gamma_psi_closed"]
