from fractions import Fraction

import numpy as np
import pytest

from revpref import Dataset
from revpref.synth import CobbDouglasAgent, cobb_douglas_demand


@pytest.fixture
def two_cycle_dataset():
    """Two goods, two observations, budgets of one."""
    return Dataset(
        [[Fraction(1, 2), 1], [1, Fraction(1, 2)]],
        [[Fraction(4, 10), Fraction(8, 10)], [1, 0]],
    )


@pytest.fixture
def cobb_douglas_dataset():
    """One Cobb-Douglas agent alpha=(1/2, 1/2) at prices (2, 1) and (1, 2), income 1."""
    agent = CobbDouglasAgent((Fraction(1, 2), Fraction(1, 2)))
    prices = [(2, 1), (1, 2)]
    return Dataset(prices, [cobb_douglas_demand(agent, p, 1) for p in prices])


def random_dataset(rng, K, n, exact=True):
    """Log-uniform prices on [0.1, 10] and Dirichlet bundles scaled by a random budget."""
    P = np.exp(rng.uniform(np.log(0.1), np.log(10), size=(K, n)))
    X = rng.dirichlet(np.ones(n), size=K) * rng.uniform(0.5, 3.0, size=(K, 1))
    return Dataset(P.tolist(), X.tolist(), exact=exact)


def random_cobb_douglas_dataset(rng, K, n):
    alpha = rng.dirichlet(np.ones(n))
    agent = CobbDouglasAgent([Fraction(float(a)) for a in alpha[:-1]] + [1 - sum(Fraction(float(a)) for a in alpha[:-1])])
    P = np.exp(rng.uniform(np.log(0.1), np.log(10), size=(K, n)))
    incomes = rng.uniform(0.5, 2.0, size=K)
    return Dataset(P.tolist(), [cobb_douglas_demand(agent, p.tolist(), float(I)) for p, I in zip(P, incomes)])


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)
