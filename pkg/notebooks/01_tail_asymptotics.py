# %% [markdown]
# # Tail asymptotics of I
#
# For a drift-free subordinator with Laplace exponent phi, the exponential
# functional I = int_0^inf exp(-xi_r) dr has a tail governed by psi, the
# inverse of x -> x/phi(x):
#
#     ln P(I > t) = ln c_I + ln t + 0.5 ln psi'(t) - ln psi(t) - int psi(r)/r dr + o(1).
#
# This script checks the formula against simulation for the compound Poisson
# process with Exp(1) jumps, where everything is explicit.

# %%
import numpy as np

from subexp import CompoundPoisson, PsiEvaluator, Stable, closed_form, mz_constant, tail_log_asym
from subexp import monte_carlo as mc

model = CompoundPoisson.exponential(1.0, 1.0)
ev = PsiEvaluator(model)
print("x_psi =", ev.x_psi)
print("psi(3), psi(10) =", ev.psi(np.array([3.0, 10.0])), "(exactly x - 1 here)")

# %% [markdown]
# The constant comes from the telescoping product for finite measures, and
# the explicit form for this model is t e^{-t}.

# %%
print("c_I =", mz_constant(model))
form = closed_form(model)
print(form.to_json())

# %%
x = mc.simulate_I(model, 2_000_000, seed=1)
t = np.array([4.0, 6.0, 8.0, 10.0])
rows = mc.tail_estimate(x, t)
for (tt, p, half), ref in zip(rows, np.exp(form.log_value_fn(t))):
    print(f"t={tt:4.1f}  p_hat={p:.3e} +- {half:.1e}   t e^-t={ref:.3e}   ratio={p / ref:.3f}")

# %% [markdown]
# The exact survival function is (1 + t) e^{-t}, so the ratio tends to 1
# like 1 + 1/t. Fitting c_I against the general equivalent and converting
# to the explicit normalization removes most of that drift.

# %%
fit = mc.fit_cI(model, ev, x, np.linspace(7, 11, 9), convert_to=form)
print(f"c_hat = {fit.c_hat:.4f} +- {fit.stderr:.4f}, trend z = {fit.slope_z:.2f}")

# %% [markdown]
# ## Stable subordinators
#
# For Stable(alpha), psi(x) = x^{1/(1-alpha)} and the general equivalent
# matches the closed display up to a constant.

# %%
for alpha in (0.3, 0.5, 0.7):
    e = PsiEvaluator(Stable(alpha))
    tt = np.array([10.0, 20.0, 40.0, 80.0])
    display = -alpha / (2 * (1 - alpha)) * np.log(tt) - (1 - alpha) * tt ** (1 / (1 - alpha))
    print(alpha, tail_log_asym(e, tt) - display)
