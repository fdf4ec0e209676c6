import json
import math
from pathlib import Path

import pytest

from subexp import levy

ORACLES = json.loads(Path(__file__).with_name("oracles.json").read_text())


@pytest.fixture(scope="session")
def oracles():
    return ORACLES


def exp_model():
    """pi(du) = e^{-u} du."""
    return levy.CompoundPoisson.exponential(1.0, 1.0)


def catalog():
    """One representative of each model family, keyed by a readable id."""
    return {
        "stable_0.5": levy.Stable(0.5),
        "gamma_sub": levy.GammaSubordinator(),
        "abc_1_0.5_1": levy.ABC(1.0, 0.5, 1.0),
        "abc_ml": levy.ABC(1.0, -0.5, 0.5),
        "beta_coalescent": levy.BetaCoalescent(1.2, 1.0),
        "barrier_walk": levy.BarrierWalk(0.5),
        "cp_exponential": exp_model(),
        "cp_gamma": levy.CompoundPoisson.gamma(2.0, 2.0, 1.5),
        "cp_uniform": levy.CompoundPoisson.uniform(1.0, 0.5, 2.0),
        "infinite_power_tail": levy.InfinitePowerTail(((1.0 / math.gamma(0.8), 0.2), (0.3, -0.8)), 1.0),
    }


def rel(a, b):
    return abs(a - b) / abs(b)
