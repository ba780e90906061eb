"""Synthetic consumers and the experiments built on them.

Cobb-Douglas demand, two-selves (Jekyll/Hyde) consumers, the four-good
two-observation family indexed by ``theta`` and ``delta``, the curve
relating preference instability to CCEI, a Monte Carlo over random prices,
and a random-choice power comparison of budget designs.

Random draws use counter-based Philox streams keyed on ``(seed, block)`` so
results do not depend on how trials are chunked or parallelised.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Literal, Sequence

import numpy as np
from numpy.typing import NDArray

from .dataset import Dataset, as_exact, check_garp
from .indices import ccei

RNG_BLOCK = 4096


def _rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[seed & (2**64 - 1), block]))


# -- agents -----------------------------------------------------------------


@dataclass(frozen=True)
class CobbDouglasAgent:
    """Cobb-Douglas consumer with expenditure shares ``alpha``."""

    alpha: tuple

    def __init__(self, alpha):
        a = tuple(as_exact(v) for v in alpha)
        if not a:
            raise ValueError("alpha needs at least one share")
        if any(v < 0 for v in a):
            raise ValueError("shares must be non-negative")
        if abs(float(sum(a)) - 1.0) > 1e-12:
            raise ValueError(f"shares must sum to one, got {float(sum(a))}")
        object.__setattr__(self, "alpha", a)

    @property
    def n(self) -> int:
        return len(self.alpha)

    def demand(self, p, income=1):
        return cobb_douglas_demand(self, p, income)


def cobb_douglas_demand(a: CobbDouglasAgent, p: Sequence, income=1) -> tuple:
    """``x_l = alpha_l * income / p_l``.

    Exact when shares, prices and income are rationals (ints, Fractions or
    decimal-representable floats); the bundle then exhausts the budget
    exactly.
    """
    if len(p) != a.n:
        raise ValueError(f"need {a.n} prices, got {len(p)}")
    p = [as_exact(v) for v in p]
    income = as_exact(income)
    if any(v <= 0 for v in p):
        raise ValueError("prices must be strictly positive")
    if income <= 0:
        raise ValueError("income must be positive")
    return tuple(as_exact(al) * income / pl for al, pl in zip(a.alpha, p))


@dataclass(frozen=True)
class JekyllHydeSpec:
    """A consumer whose purchases alternate between two Cobb-Douglas selves.

    ``schedule[k]`` is ``"hyde"`` or ``"jekyll"`` and picks the self that
    buys at ``prices[k]`` with budget ``income``.
    """

    hyde: CobbDouglasAgent
    jekyll: CobbDouglasAgent
    schedule: tuple
    prices: tuple
    income: object = 1

    def __post_init__(self):
        if len(self.schedule) != len(self.prices):
            raise ValueError("schedule and prices must have the same length")
        bad = set(self.schedule) - {"hyde", "jekyll"}
        if bad:
            raise ValueError(f"unknown selves in schedule: {sorted(bad)}")

    @property
    def K(self) -> int:
        return len(self.schedule)


def jekyll_hyde_dataset(spec: JekyllHydeSpec) -> Dataset:
    bundles = []
    for who, p in zip(spec.schedule, spec.prices):
        agent = spec.hyde if who == "hyde" else spec.jekyll
        bundles.append(cobb_douglas_demand(agent, p, spec.income))
    return Dataset([[as_exact(v) for v in p] for p in spec.prices], bundles)


_ODD_PRICES = (Fraction(1, 3), Fraction(1))
_EVEN_PRICES = (Fraction(1, 2), Fraction(1, 2))
_TEN_HYDE = CobbDouglasAgent((Fraction(1, 10), Fraction(9, 10)))
_TEN_JEKYLL = CobbDouglasAgent((Fraction(9, 10), Fraction(1, 10)))


def alice_spec(periods: int = 10) -> JekyllHydeSpec:
    """Hyde in every period except the last; prices alternate."""
    prices = tuple(_ODD_PRICES if k % 2 == 0 else _EVEN_PRICES for k in range(periods))
    schedule = ("hyde",) * (periods - 1) + ("jekyll",)
    return JekyllHydeSpec(_TEN_HYDE, _TEN_JEKYLL, schedule, prices)


def bob_spec(periods: int = 10) -> JekyllHydeSpec:
    """Hyde in odd periods, Jekyll in even periods; prices alternate."""
    prices = tuple(_ODD_PRICES if k % 2 == 0 else _EVEN_PRICES for k in range(periods))
    schedule = tuple("hyde" if k % 2 == 0 else "jekyll" for k in range(periods))
    return JekyllHydeSpec(_TEN_HYDE, _TEN_JEKYLL, schedule, prices)


# -- the four-good theta family --------------------------------------------

THETA_PRICES = (2, 3, 1, 1)
THETA_PRICES_PRIME = (1, 1, 2, 3)


@dataclass(frozen=True)
class ThetaExample:
    """Two Cobb-Douglas selves whose shares are tilted by ``theta``.

    ``alpha = (1/2 + theta - delta, 1/2 - theta - delta, delta, delta)`` buys at
    prices (2, 3, 1, 1); ``alpha'`` mirrors it onto goods 3 and 4 and buys at
    (1, 1, 2, 3). Requires ``delta >= 0`` and
    ``-1/2 + delta < theta < 1/2 - delta``.
    """

    theta: object
    delta: object = 0

    def __post_init__(self):
        th, de = as_exact(self.theta), as_exact(self.delta)
        if de < 0:
            raise ValueError("delta must be non-negative")
        if not (-Fraction(1, 2) + de < th < Fraction(1, 2) - de):
            raise ValueError(f"theta={self.theta} outside (-1/2 + delta, 1/2 - delta)")
        object.__setattr__(self, "theta", th)
        object.__setattr__(self, "delta", de)

    @property
    def alpha(self) -> CobbDouglasAgent:
        th, de = self.theta, self.delta
        half = Fraction(1, 2)
        return CobbDouglasAgent((half + th - de, half - th - de, de, de))

    @property
    def alpha_prime(self) -> CobbDouglasAgent:
        th, de = self.theta, self.delta
        half = Fraction(1, 2)
        return CobbDouglasAgent((de, de, half + th - de, half - th - de))


def theta_example_dataset(t: ThetaExample) -> Dataset:
    x1 = cobb_douglas_demand(t.alpha, THETA_PRICES, 1)
    x2 = cobb_douglas_demand(t.alpha_prime, THETA_PRICES_PRIME, 1)
    return Dataset([THETA_PRICES, THETA_PRICES_PRIME], [x1, x2])


def predicted_ccei(t: ThetaExample) -> Fraction:
    """Closed form ``5/12 + theta/6 + 25 delta/6`` for the theta family."""
    return Fraction(5, 12) + t.theta / 6 + Fraction(25, 6) * t.delta


def preference_instability(theta, delta=0) -> float:
    """Euclidean distance between the two selves' shares in the theta family.

    ``sqrt(1 + 4 theta^2 + 8 delta (2 delta - 1))``. No range check, so the
    boundary ``theta = +-1/2`` can be evaluated.
    """
    theta, delta = float(theta), float(delta)
    return math.sqrt(1 + 4 * theta**2 + 8 * delta * (2 * delta - 1))


def ccei_instability_curve(delta, i_grid: Sequence[float]) -> list[tuple[float, float, float]]:
    """Both branches of CCEI as a function of instability ``i``.

    Returns ``(i, upper, lower)`` with
    ``(5/2 +- sqrt((i^2 - 1 - 8 delta (2 delta - 1)) / 4) + 25 delta) / 6``.
    The upper branch corresponds to ``theta >= 0``. Points below the minimum
    attainable instability are skipped with a warning.
    """
    delta = float(delta)
    base = 1 + 8 * delta * (2 * delta - 1)
    out = []
    for i in i_grid:
        i = float(i)
        rad = (i * i - base) / 4
        if rad < 0:
            if rad > -1e-15:
                rad = 0.0
            else:
                warnings.warn(
                    f"instability {i} below the minimum {math.sqrt(max(base, 0.0)):.6g}; skipped",
                    stacklevel=2,
                )
                continue
        root = math.sqrt(rad)
        out.append((i, (2.5 + root + 25 * delta) / 6, (2.5 - root + 25 * delta) / 6))
    return out


# -- Monte Carlo over random prices -----------------------------------------

PriceSampler = Callable[[np.random.Generator, int], tuple[NDArray, NDArray]]


def uniform_price_sampler(low: float = 0.1, high: float = 10.0) -> PriceSampler:
    """Each of the 4 prices in each observation i.i.d. uniform on ``[low, high]``."""

    def sample(rng: np.random.Generator, size: int):
        p = rng.uniform(low, high, size=(size, 4))
        q = rng.uniform(low, high, size=(size, 4))
        return p, q

    sample.description = f"uniform[{low},{high}] i.i.d. per good, p and p' independent"
    return sample


def fixed_price_sampler() -> PriceSampler:
    """Degenerate sampler returning the family's own prices every draw."""

    def sample(rng: np.random.Generator, size: int):
        p = np.tile(np.array(THETA_PRICES, dtype=float), (size, 1))
        q = np.tile(np.array(THETA_PRICES_PRIME, dtype=float), (size, 1))
        return p, q

    sample.description = "fixed p=(2,3,1,1), p'=(1,1,2,3)"
    return sample


SAMPLERS = {"uniform": uniform_price_sampler, "fixed": fixed_price_sampler}


def two_obs_ccei(A: NDArray) -> NDArray:
    """Vectorised CCEI for stacks of 2x2 cross-expenditure matrices.

    With two observations a violation needs both bundles revealed (weakly)
    over each other at e = 1 and one of the links strict; the index is then
    the larger of the two cross ratios. Shape ``(m, 2, 2)`` -> ``(m,)``.
    """
    r01 = A[:, 0, 1] / A[:, 0, 0]
    r10 = A[:, 1, 0] / A[:, 1, 1]
    violates = (r01 <= 1) & (r10 <= 1) & ((r01 < 1) | (r10 < 1))
    return np.where(violates, np.maximum(r01, r10), 1.0)


def _theta_shares(theta: float, delta: float = 0.0):
    a = np.array([0.5 + theta - delta, 0.5 - theta - delta, delta, delta])
    b = np.array([delta, delta, 0.5 + theta - delta, 0.5 - theta - delta])
    return a, b


def _two_obs_cross(alpha, alpha_p, p, q) -> NDArray:
    x1 = alpha / p  # income 1
    x2 = alpha_p / q
    A = np.empty((p.shape[0], 2, 2))
    A[:, 0, 0] = np.einsum("ij,ij->i", p, x1)
    A[:, 0, 1] = np.einsum("ij,ij->i", p, x2)
    A[:, 1, 0] = np.einsum("ij,ij->i", q, x1)
    A[:, 1, 1] = np.einsum("ij,ij->i", q, x2)
    return A


@dataclass(frozen=True)
class MonteCarloResult:
    frequency: float
    trials: int
    theta_low: float
    theta_high: float
    seed: int
    sampler: str
    positive: int = 0


def monte_carlo_relation(
    trials: int,
    theta_low: float = 0.01,
    theta_high: float = 0.49,
    seed: int = 0,
    sampler: str | PriceSampler = "uniform",
) -> MonteCarloResult:
    """Share of random price draws where instability and CCEI move together.

    Each draw builds the two-observation dataset for ``theta_low`` and for
    ``theta_high`` at the same prices; the draw counts as positive when the
    more unstable agent (``theta_high``) has the strictly larger CCEI.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if not 0 < theta_low < theta_high < 0.5:
        raise ValueError("need 0 < theta_low < theta_high < 1/2")
    sample = SAMPLERS[sampler]() if isinstance(sampler, str) else sampler
    lo_a, lo_b = _theta_shares(theta_low)
    hi_a, hi_b = _theta_shares(theta_high)
    positive = 0
    for block, start in enumerate(range(0, trials, RNG_BLOCK)):
        size = min(RNG_BLOCK, trials - start)
        p, q = sample(_rng(seed, block), size)
        c_lo = two_obs_ccei(_two_obs_cross(lo_a, lo_b, p, q))
        c_hi = two_obs_ccei(_two_obs_cross(hi_a, hi_b, p, q))
        positive += int(np.count_nonzero(c_hi > c_lo))
    return MonteCarloResult(
        frequency=positive / trials,
        trials=trials,
        theta_low=theta_low,
        theta_high=theta_high,
        seed=seed,
        sampler=getattr(sample, "description", str(sampler)),
        positive=positive,
    )


# -- random-choice power ----------------------------------------------------

POWER_PRICES1 = (1, 1, Fraction(1, 10))
POWER_PRICES2 = (1, Fraction(1, 10), 1)
POWER_PRICES4 = (Fraction(1, 10), 1, 1)
POWER_DESIGNS = {"A": (POWER_PRICES1, POWER_PRICES2), "B": (POWER_PRICES1, POWER_PRICES4)}
POWER_HYDE = CobbDouglasAgent((Fraction(1, 100), Fraction(98, 100), Fraction(1, 100)))
POWER_JEKYLL = CobbDouglasAgent((Fraction(1, 100), Fraction(1, 100), Fraction(98, 100)))


def power_design_spec(design: Sequence) -> JekyllHydeSpec:
    """Hyde buys at the first budget, Jekyll at the second, income 1."""
    return JekyllHydeSpec(POWER_HYDE, POWER_JEKYLL, ("hyde", "jekyll"), tuple(design))


@dataclass(frozen=True)
class PowerReport:
    """Per-design outcome of a power comparison.

    For random choosers ``rate`` is the GARP-violation frequency and
    ``stderr`` its binomial standard error; for a Jekyll/Hyde agent ``ccei``
    holds the index on that design.
    """

    design: str
    agent: str
    trials: int = 0
    violations: int = 0
    ccei: Fraction | float | None = None
    ccei_attained: bool | None = None

    @property
    def rate(self) -> float:
        return self.violations / self.trials if self.trials else math.nan

    @property
    def stderr(self) -> float:
        r = self.rate
        return math.sqrt(r * (1 - r) / self.trials) if self.trials else math.nan


def _random_violations(design: Sequence, trials: int, seed: int, tag: int) -> int:
    P = np.array([[float(v) for v in p] for p in design])
    K, n = P.shape
    count = 0
    for block, start in enumerate(range(0, trials, RNG_BLOCK)):
        size = min(RNG_BLOCK, trials - start)
        rng = np.random.Generator(np.random.Philox(key=[seed & (2**64 - 1), (tag << 32) | block]))
        shares = rng.dirichlet(np.ones(n), size=(size, K))
        X = shares / P[None, :, :]  # income 1
        A = np.einsum("ki,mli->mkl", P, X)
        if K == 2:
            count += int(np.count_nonzero(two_obs_ccei(A) < 1))
        else:
            for m in range(size):
                d = Dataset(P, X[m], exact=False)
                count += not check_garp(d)[0]
    return count


def bronars_power(
    designs: dict[str, Sequence] | Sequence[Sequence],
    agent: Literal["random"] | JekyllHydeSpec | Callable[[Sequence], JekyllHydeSpec] = "random",
    trials: int = 10_000,
    seed: int = 0,
) -> list[PowerReport]:
    """Compare budget designs by their power to expose irrational choice.

    ``agent="random"`` draws each bundle uniformly on the budget line
    (symmetric Dirichlet expenditure shares, income 1) and records the
    GARP-violation frequency. Otherwise ``agent`` is a Jekyll/Hyde spec (or a
    callable producing one for a design) and the CCEI of its choices on each
    design is reported.
    """
    if not isinstance(designs, dict):
        designs = {str(i): d for i, d in enumerate(designs)}
    reports = []
    for tag, (name, design) in enumerate(designs.items()):
        if len(design) < 2:
            raise ValueError(f"design {name!r} needs at least two budgets")
        if agent == "random":
            if trials < 1:
                raise ValueError("trials must be at least 1")
            v = _random_violations(design, trials, seed, tag)
            reports.append(PowerReport(name, "random", trials, v))
        else:
            spec = agent(design) if callable(agent) else JekyllHydeSpec(
                agent.hyde, agent.jekyll, agent.schedule, tuple(design), agent.income
            )
            res = ccei(jekyll_hyde_dataset(spec))
            reports.append(PowerReport(name, "jekyll-hyde", ccei=res.value, ccei_attained=res.attained))
    return reports
