import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import exp_model
from subexp import monte_carlo as mc
from subexp.asymptotics import closed_form
from subexp.errors import (ConfigurationError, DomainError, ResourceError,
                           StatisticalPowerError, UnsupportedRegimeError)
from subexp.levy import ABC, BarrierWalk, BetaCoalescent, Stable, exact_log_moments
from subexp.psi import PsiEvaluator


@pytest.fixture(scope="module")
def exp_samples():
    return mc.simulate_I(exp_model(), 2_000_000, seed=11)


def within(mean, se, exact, slack=0.0):
    return abs(mean - exact) <= 3 * se + slack


# -- sample_I ---------------------------------------------------------------


def test_exponential_measure_moments():
    s = mc.sample_I(exp_model(), 1_000_000, seed=1)
    assert s.scheme == "affine_recursion" and s.truncation_eps == 0.0
    assert within(*s.moment(1), 2.0)
    assert within(*s.moment(2), 6.0)


def test_stable_compensated_path():
    model = Stable(0.5)
    scheme = mc.SimScheme("compensated_path", eps=1e-4)
    s = mc.sample_I(model, 100_000, seed=2, scheme=scheme)
    mean, se = s.moment(1)
    bias = abs(s.exact_moments_eps[0] - 1.0)
    assert within(mean, se, 1.0, bias)
    assert bias < 1e-2


def test_seed_determinism():
    a = mc.simulate_I(exp_model(), 1000, seed=5)
    b = mc.simulate_I(exp_model(), 1000, seed=5)
    c = mc.simulate_I(exp_model(), 1000, seed=6)
    assert a[0] == b[0] and np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_independent_of_thread_count():
    n = 2 * mc.BLOCK_SIZE + 123
    a = mc.simulate_I(exp_model(), n, seed=9, threads=1)
    b = mc.simulate_I(exp_model(), n, seed=9, threads=4)
    assert np.array_equal(a, b)


def test_summary_invariants():
    s = mc.sample_I(exp_model(), 20_000, seed=3, t_list=[0.5, 2.0, 8.0, 1e3])
    for t, p, half in s.tail_estimates:
        assert 0.0 <= p <= 1.0 and half > 0
    assert all(m > 0 and se > 0 for _, m, se in s.moment_estimates)
    again = mc.sample_I(exp_model(), 20_000, seed=3, t_list=[0.5, 2.0, 8.0, 1e3])
    assert s.to_json() == again.to_json()


def test_sample_errors():
    with pytest.raises(DomainError):
        mc.sample_I(exp_model(), 0)
    with pytest.raises(ConfigurationError):
        mc.SimScheme("compensated_path", eps=0.0)
    with pytest.raises(ConfigurationError):
        mc.SimScheme("affine_recursion", eps=0.1)
    with pytest.raises(ConfigurationError):
        mc.simulate_I(Stable(0.5), 10, scheme=mc.SimScheme("affine_recursion"))


def test_jump_rate_budget():
    with pytest.raises(ResourceError, match="larger eps"):
        mc.choose_eps(Stable(0.5), max_rate=1.0)
    with pytest.raises(ResourceError):
        mc.simulate_I(Stable(0.5), 100, scheme=mc.SimScheme("compensated_path", eps=1e-3),
                      max_steps=3)


def test_eps_refinement():
    model = Stable(0.5)
    eps = mc.choose_eps(model)
    s1 = mc.sample_I(model, 200_000, seed=4, scheme=mc.SimScheme("compensated_path", eps=eps))
    s2 = mc.sample_I(model, 200_000, seed=5,
                     scheme=mc.SimScheme("compensated_path", eps=eps / 2))
    m1, se1 = s1.moment(1)
    m2, _ = s2.moment(1)
    assert abs(m2 - m1) < mc.Z99 * se1


def test_chosen_eps_bias_is_small():
    for model in (Stable(0.5), ABC(1.0, 0.5, 1.0)):
        e1, e2 = mc.eps_moments(model, mc.choose_eps(model))
        assert e1 * float(model.phi(1.0)) == pytest.approx(1.0, rel=1e-3)
        assert e2 * float(model.phi(1.0)) * float(model.phi(2.0)) / 2 == pytest.approx(1.0, rel=1e-3)


# -- exact special cases -----------------------------------------------------


@pytest.mark.parametrize("a", [1.0, 2.0])
def test_exponential_power_sampler_moments(a):
    c = 1.0 / (a + 1.0)
    model = ABC(a, c - 1.0, c)
    x = mc.exact_sampler_special(model, 400_000, seed=1, method="exponential_power")
    # I / E[I] has the law of (a+1) e^{1/(a+1)} / E[...], moments (a+1)^n Gamma(n/(a+1) + 1)
    y = x / (1.0 / float(model.phi(1.0)))
    for n in (2, 3):
        m = np.mean(y ** n)
        se = np.std(y ** n) / math.sqrt(y.size)
        target = math.gamma(n * c + 1) / math.gamma(c + 1) ** n
        assert abs(m - target) <= 3 * se
        lm = exact_log_moments(model, n)
        assert math.exp(lm[n - 1] - n * lm[0]) == pytest.approx(target, rel=1e-10)


def test_mittag_leffler_mean_and_moment_ratio():
    c = 0.5
    rng = np.random.default_rng(0)
    m = mc.mittag_leffler(400_000, c, rng)
    exact = math.gamma(c) / math.gamma(2 * c)
    assert abs(m.mean() - exact) <= 3 * m.std() / math.sqrt(m.size)
    # second over squared first moment: 2 Gamma(c) Gamma(2c)^2 / (Gamma(3c) Gamma(c)^2)
    ratio = 2 * math.gamma(2 * c) ** 2 / (math.gamma(3 * c) * math.gamma(c))
    model = ABC(1.0, -c, c)
    lm = exact_log_moments(model, 2)
    assert math.exp(lm[1] - 2 * lm[0]) == pytest.approx(ratio, rel=1e-10)
    assert np.mean(m ** 2) / np.mean(m) ** 2 == pytest.approx(ratio, rel=0.02)


def test_exact_sampler_dispatch():
    model = ABC(1.0, -0.5, 0.5)
    assert mc.special_case(model) == ["mittag_leffler", "exponential_power"]
    a = mc.exact_sampler_special(model, 100, seed=3)
    assert np.array_equal(a, mc.exact_sampler_special(model, 100, seed=3))
    with pytest.raises(UnsupportedRegimeError):
        mc.exact_sampler_special(ABC(1.0, 0.5, 1.0), 10)
    with pytest.raises(UnsupportedRegimeError):
        mc.exact_sampler_special(ABC(2.0, -2 / 3, 1 / 3), 10, method="mittag_leffler")
    with pytest.raises(DomainError):
        mc.exact_sampler_special(model, 0)


# -- tails and c_I -----------------------------------------------------------


def test_tail_estimate_edges():
    x = np.array([0.5, 1.0, 2.0])
    rows = mc.tail_estimate(x, [0.0, 10.0])
    assert rows[0, 1] == 1.0
    assert rows[1, 1] == 0.0 and rows[1, 2] > 0
    with pytest.raises(DomainError):
        mc.tail_estimate([], [1.0])


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.0, 100.0), min_size=1, max_size=200),
       st.lists(st.floats(-1.0, 120.0), min_size=1, max_size=10))
def test_tail_estimate_properties(samples, ts):
    rows = mc.tail_estimate(samples, sorted(ts))
    assert np.all((rows[:, 1] >= 0) & (rows[:, 1] <= 1))
    assert np.all(rows[:, 2] > 0)
    assert np.all(np.diff(rows[:, 1]) <= 0)


def test_fit_cI_exponential_measure(exp_samples):
    model = exp_model()
    ev = PsiEvaluator(model)
    form = closed_form(model)
    window = np.linspace(7.0, 11.0, 9)
    fit = mc.fit_cI(model, ev, exp_samples, window, convert_to=form)
    assert abs(fit.c_hat - 1.0) <= 3 * fit.stderr
    assert abs(fit.slope_z) < 3
    shifted = mc.fit_cI(model, ev, exp_samples, window + 0.5, convert_to=form)
    assert abs(shifted.c_hat - fit.c_hat) < fit.stderr


def test_fit_cI_needs_exceedances(exp_samples):
    model = exp_model()
    with pytest.raises(StatisticalPowerError):
        mc.fit_cI(model, PsiEvaluator(model), exp_samples[:100_000], np.linspace(12, 16, 5))


def test_slope_check_exponential_measure(exp_samples):
    # -ln P(I > t) = t - ln(1 + t): exact slope over [6, 8]
    slope, half = mc.slope_check(exp_samples, 6.0, 8.0)
    exact = 1.0 - (math.log(9.0) - math.log(7.0)) / 2.0
    assert abs(slope - exact) <= half


# -- discrete applications ---------------------------------------------------


def test_two_particles_collide_once():
    assert np.all(mc.beta_coalescent_collisions(2, 1.2, 1.0, 50, seed=1) == 1)


def test_unit_barrier_absorbs_in_one_step():
    assert np.all(mc.barrier_walk_absorption(1, 0.5, 50, seed=1) == 1)


def test_application_errors():
    with pytest.raises(DomainError):
        mc.beta_coalescent_collisions(1, 1.2, 1.0, 5)
    with pytest.raises(DomainError):
        mc.beta_coalescent_collisions(8, 2.5, 1.0, 5)
    with pytest.raises(DomainError):
        mc.barrier_walk_absorption(8, 1.5, 5)


def test_barrier_walk_rescaled_means_stabilize():
    c = 0.5
    means = []
    for n in (2 ** 9, 2 ** 10, 2 ** 11):
        cnt = mc.barrier_walk_absorption(n, c, 20_000, seed=n)
        means.append(cnt.mean() / n ** c)
    assert all(abs(b / a - 1) < 0.1 for a, b in zip(means, means[1:]))
    assert means[-1] == pytest.approx(1.0 / float(BarrierWalk(c).phi(1.0)), rel=0.1)


def test_beta_coalescent_counts_stabilize():
    alpha = 1.2
    means = [mc.beta_coalescent_collisions(n, alpha, 1.0, 2000, seed=n).mean() / n ** (2 - alpha)
             for n in (2 ** 7, 2 ** 8, 2 ** 9)]
    assert all(abs(b / a - 1) < 0.1 for a, b in zip(means, means[1:]))
    assert float(BetaCoalescent(alpha, 1.0).phi(1.0)) > 0


# -- sample files --------------------------------------------------------------


def test_binary_round_trip(tmp_path):
    x = mc.simulate_I(exp_model(), 1000, seed=2)
    path = tmp_path / "s.bin"
    mc.write_samples(path, x)
    raw = path.read_bytes()
    assert raw[:4] == b"SXPI" and len(raw) == 16 + 8 * 1000
    assert np.array_equal(mc.read_samples(path), x)
    path.write_bytes(raw[:-8])
    with pytest.raises(ConfigurationError, match="truncated"):
        mc.read_samples(path)
    path.write_bytes(b"XXXX" + raw[4:])
    with pytest.raises(ConfigurationError):
        mc.read_samples(path)
