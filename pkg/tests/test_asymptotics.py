import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import exp_model
from subexp.asymptotics import (AsymptoticForm, closed_form, density_log_asym,
                                density_log_asym_rv, form_offset, fprime_expansion, mz_constant,
                                mz_constant_lighttail, ssmp_moment_log_asym, tail_log_asym)
from subexp.errors import ConfigurationError, DomainError, UnsupportedRegimeError
from subexp.levy import ABC, CompoundPoisson, GammaSubordinator, InfinitePowerTail, Stable
from subexp.psi import PsiEvaluator


def stable_display(alpha, t):
    return -alpha / (2 * (1 - alpha)) * np.log(t) - (1 - alpha) * t ** (1 / (1 - alpha))


def test_stable_tail_value():
    ev = PsiEvaluator(Stable(0.5))
    t = 10.0
    ref = math.log(t) + 0.5 * math.log(2 * t) - math.log(t * t) - (t * t - 1) / 2
    assert tail_log_asym(ev, t) == pytest.approx(ref, abs=1e-9)
    assert tail_log_asym(ev, 1.0) == pytest.approx(0.5 * math.log(2.0), abs=1e-15)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
def test_stable_display_differences(alpha):
    ev = PsiEvaluator(Stable(alpha))
    t = np.array([10.0, 20.0, 40.0, 80.0])
    d = np.asarray(tail_log_asym(ev, t)) - stable_display(alpha, t)
    assert np.ptp(d) <= 1e-8


def test_density_values():
    ev = PsiEvaluator(Stable(0.5))
    assert density_log_asym(ev, 10.0) == pytest.approx(0.5 * math.log(20) - 49.5, abs=1e-9)
    for model in (Stable(0.3), GammaSubordinator(), exp_model(), ABC(2.0, -0.7, 0.5)):
        e = PsiEvaluator(model)
        t = e.lower * np.array([1.5, 10.0, 100.0])
        dens, tail = np.asarray(density_log_asym(e, t)), np.asarray(tail_log_asym(e, t))
        # both carry F(t), which can be ~1e7, so compare at rounding level of F
        assert np.all(np.abs(dens - tail - np.log(e.psi(t) / t)) <= 1e-14 * np.abs(tail) + 1e-12)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
def test_regularly_varying_density_form(alpha):
    ev = PsiEvaluator(Stable(alpha))
    t = np.array([3.0, 30.0])
    # psi' = psi/((1 - alpha) t) exactly for the stable model
    ratio = np.exp(np.asarray(density_log_asym_rv(ev, t, alpha)) - np.asarray(density_log_asym(ev, t)))
    assert ratio == pytest.approx(1.0, abs=1e-12)
    m = ABC(1.0, -0.6, 1.0)
    e = PsiEvaluator(m)
    gaps = [abs(float(density_log_asym_rv(e, s, 0.6) - density_log_asym(e, s))) for s in (10.0, 1e3, 1e5)]
    assert gaps[2] < gaps[1] < gaps[0]


def test_fprime_expansion_stable():
    ev = PsiEvaluator(Stable(0.5))
    x = np.array([0.5, 3.0, 40.0])
    assert fprime_expansion(ev, x) == pytest.approx(x + 1 / (2 * x), rel=1e-13)
    g = PsiEvaluator(GammaSubordinator())
    lead = [fprime_expansion(g, x) * x / g.psi(x) for x in (1e2, 1e4, 1e6)]
    assert abs(lead[2] - 1) < abs(lead[1] - 1) < abs(lead[0] - 1) < 0.1


def test_closed_form_abc_cases():
    f = closed_form(ABC(2.0, 1.0, 0.5))
    assert f.prefactor_exponent == 2.0 and f.exp_terms == [(-1.0, 1.0)]
    f = closed_form(ABC(2.0, 3.0, 0.5))
    expected = -math.gamma(1.0) * math.gamma(3.0) / math.gamma(4.0)
    assert f.prefactor_exponent == 0.0
    assert f.exp_terms[0] == pytest.approx((expected, 1.0))
    a, b, c = 1.5, -0.7, 0.8
    f = closed_form(ABC(a, b, c))
    lead = -(1 + b) * (abs(math.gamma(b)) / c ** b) ** (1 / (1 + b))
    assert f.exp_terms[0] == pytest.approx((lead, 1 / (1 + b)), rel=1e-14)
    for b in (-0.5, 0.0001, 0.3, 0.5):
        with pytest.raises(UnsupportedRegimeError, match="additional power"):
            closed_form(ABC(1.0, b, 1.0))


def test_case2_single_term_is_stable():
    alpha = 0.4
    m = InfinitePowerTail(((1 / math.gamma(1 - alpha), alpha), (0.0, alpha - 1)))
    f, s = closed_form(m), closed_form(Stable(alpha))
    assert f.prefactor_exponent == pytest.approx(s.prefactor_exponent)
    assert f.exp_terms == pytest.approx(s.exp_terms)


@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8])
def test_stable_form_matches_general(alpha):
    ev = PsiEvaluator(Stable(alpha))
    t = np.geomspace(10.0, 100.0, 12)
    d = np.asarray(tail_log_asym(ev, t)) - closed_form(Stable(alpha))(t)
    assert np.ptp(d) <= 1e-6


@pytest.mark.parametrize("model", [ABC(1.0, 2.0, 1.0), ABC(2.0, 1.0, 0.5), ABC(1.0, -0.7, 0.5),
                                   ABC(1.0, 1.5, 1.0), GammaSubordinator(),
                                   InfinitePowerTail(((1.0 / math.gamma(0.8), 0.2), (0.3, -0.8))),
                                   CompoundPoisson.gamma(1.0, 1.0, 2.0),
                                   CompoundPoisson.uniform(2.0, 0.5, 1.0)], ids=repr)
def test_closed_forms_converge_to_general(model):
    ev = PsiEvaluator(model)
    f = closed_form(model)
    t = ev.lower * np.array([10.0, 20.0, 200.0, 400.0])
    d = np.asarray(tail_log_asym(ev, t)) - np.asarray(f(t))
    assert abs(d[3] - d[2]) < abs(d[1] - d[0])
    assert abs(d[3] - d[2]) < 0.05


def test_closed_form_slow_correction():
    # b in (1/2, 1): the o(1) remainder decays like t^{-(b - 1/2)}, so only a slow drift is left
    model = ABC(1.0, 0.8, 1.0)
    ev = PsiEvaluator(model)
    t = ev.lower * np.array([10.0, 100.0, 1000.0, 10000.0])
    d = np.diff(np.asarray(tail_log_asym(ev, t)) - np.asarray(closed_form(model)(t)))
    assert np.all(np.abs(d[1:]) < np.abs(d[:-1])) and abs(d[-1]) < 0.01


def test_exp_model_fully_explicit():
    m = exp_model()
    f = closed_form(m)
    assert f.prefactor_exponent == 1.0 and f.exp_terms == [(-1.0, 1.0)]
    assert f.constant_known and f.constant == pytest.approx(1.0, abs=1e-8)
    assert form_offset(PsiEvaluator(m), f) == pytest.approx(2 - math.log(2), abs=1e-5)


def test_mz_constant_telescoping(oracles):
    m = exp_model()
    assert mz_constant(m) == pytest.approx(oracles["mz_exp"], abs=1e-8)
    a, b = mz_constant(m, K=1000), mz_constant(m, K=10000)
    assert abs(a - b) / b < 1e-8


@pytest.mark.parametrize("mass, rate", [(2.0, 3.0), (0.5, 1.0), (1.0, 0.25)])
def test_mz_constant_gamma_function_product(mass, rate):
    # prod (1 + r/k)^{-1} e^{r/k} = Gamma(1 + r) e^{gamma r}, so c_I = |pi|^r / Gamma(1 + r)
    m = CompoundPoisson.exponential(mass, rate)
    assert mz_constant(m) == pytest.approx(mass ** rate / math.gamma(1 + rate), rel=1e-8)


def test_mz_constant_errors():
    with pytest.raises(DomainError):
        mz_constant(exp_model(), b=0.0)
    with pytest.raises(DomainError):
        mz_constant(Stable(0.5))


def test_lighttail_constant():
    m = CompoundPoisson.uniform(1.0, 1.0, 2.0)
    with pytest.raises(DomainError):
        mz_constant_lighttail(m, 0)
    r1 = mz_constant_lighttail(m, 20_000, seed=3)
    r2 = mz_constant_lighttail(m, 40_000, seed=3)
    assert r1.reliable and 1.0 < r1.estimate < math.inf and r1.ci_halfwidth > 0
    assert r2.ci_halfwidth / r1.ci_halfwidth == pytest.approx(1 / math.sqrt(2), rel=0.15)
    assert not mz_constant_lighttail(exp_model(), 1000).reliable


def test_ssmp_moment():
    ev = PsiEvaluator(Stable(0.5))
    t = 10.0
    assert ssmp_moment_log_asym(ev, 1.0, 2.0, t) == pytest.approx(
        3 * math.log(t / 100) + 0.5 * math.log(20) - 49.5, abs=1e-9)
    for model in (Stable(0.5), exp_model()):
        e = PsiEvaluator(model)
        t = e.lower * np.array([2.0, 20.0])
        assert ssmp_moment_log_asym(e, 1.0, 0.0, t) == pytest.approx(tail_log_asym(e, t), abs=1e-12)
        s = 2.0 * t
        expected = np.log(t / e.psi(s)) + 0.5 * np.log(e.psi_prime(s)) - np.asarray(e.exponent_integral(s)) / 2
        assert ssmp_moment_log_asym(e, 2.0, 0.0, t) == pytest.approx(expected, abs=1e-12)
    e = PsiEvaluator(GammaSubordinator())
    vals = ssmp_moment_log_asym(e, 0.7, 1.5, np.geomspace(10.0, 1e4, 20))
    assert np.all(np.diff(vals) < 0)
    with pytest.raises(DomainError):
        ssmp_moment_log_asym(e, 0.0, 1.0, 10.0)


@pytest.mark.parametrize("model", [GammaSubordinator(), exp_model(), ABC(1.0, -0.7, 0.5)], ids=repr)
def test_exponent_dominates_slope(model):
    ev = PsiEvaluator(model)
    errs = []
    for t in (1e2, 1e3, 1e4):
        h = 1e-4 * t
        slope = -(tail_log_asym(ev, t + h) - tail_log_asym(ev, t - h)) / (2 * h)
        errs.append(abs(slope / (ev.psi(t) / t) - 1))
    assert errs[0] < 0.2 and errs[2] < 1e-2
    assert errs[2] <= errs[0] + 1e-8


def test_form_json_round_trip_and_invariants():
    f = closed_form(ABC(1.0, -0.7, 0.5))
    g = AsymptoticForm.from_dict(f.to_dict())
    assert g.to_json() == f.to_json()
    with pytest.raises(ConfigurationError):
        AsymptoticForm("tail", 1.0, [(1.0, 1.0)])
    with pytest.raises(ConfigurationError):
        AsymptoticForm("tail", 1.0, [(-1.0, 0.5), (1.0, 1.0)])
    with pytest.raises(ConfigurationError):
        AsymptoticForm("tail", 1.0, [(-1.0, 1.0)], constant_known=True, constant=0.0)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 0.9))
def test_stable_difference_is_constant(alpha):
    ev = PsiEvaluator(Stable(alpha))
    t = np.array([5.0, 11.0, 23.0])
    d = np.asarray(tail_log_asym(ev, t)) - stable_display(alpha, t)
    scale = max(1.0, float(np.max(np.abs(stable_display(alpha, t)))))
    assert np.ptp(d) <= 1e-12 * scale + 1e-10
