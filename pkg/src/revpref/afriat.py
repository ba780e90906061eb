"""Afriat inequalities: certify rationalizability and build the utility."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .dataset import Dataset
from .lp import LinearProgram, solve_lp


@dataclass(frozen=True)
class AfriatSolution:
    """Utility levels ``V`` and multipliers ``lam`` (each >= 1) with

    ``V[l] <= V[k] + lam[k] * p^k.(x^l - x^k)`` for every pair ``k, l``.
    """

    V: NDArray[np.float64]
    lam: NDArray[np.float64]

    def violation(self, d: Dataset) -> float:
        """Largest amount by which any inequality fails (<= 0 when all hold)."""
        A = d.prices_float @ d.bundles_float.T
        budgets = np.diag(A)
        lhs = self.V[None, :] - self.V[:, None] - self.lam[:, None] * (A - budgets[:, None])
        return float(max(lhs.max(), (1.0 - self.lam).max()))

    def shifted(self, c: float) -> "AfriatSolution":
        return AfriatSolution(self.V + c, self.lam.copy())


def afriat_program(d: Dataset) -> LinearProgram:
    """Feasibility LP over ``V`` (free) and ``lam >= 1`` with a zero objective."""
    A = d.prices_float @ d.bundles_float.T
    lp = LinearProgram()
    V = [lp.add_variable(("V", k), lower=None) for k in range(d.K)]
    lam = [lp.add_variable(("lam", k), lower=1.0) for k in range(d.K)]
    for k in range(d.K):
        for l in range(d.K):
            if k == l:
                continue
            # V[l] - V[k] - lam[k] (A[k,l] - A[k,k]) <= 0
            lp.add_constraint({V[l]: 1.0, V[k]: -1.0, lam[k]: -(A[k, l] - A[k, k])}, 0.0, label=(k, l))
    lp.set_objective({})
    return lp


def solve_afriat(d: Dataset) -> AfriatSolution | None:
    """Solve the Afriat inequalities; ``None`` when the data is not rationalizable."""
    lp = afriat_program(d)
    out = solve_lp(lp)
    if out.status != "optimal":
        return None
    K = d.K
    return AfriatSolution(V=out.x[:K].copy(), lam=out.x[K:].copy())


def evaluate_utility(s: AfriatSolution, d: Dataset, x) -> float:
    """Afriat utility ``min_k V[k] + lam[k] p^k.(x - x^k)``.

    Concave, increasing, and equal to ``V[k]`` at each observed bundle.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (d.n,):
        raise ValueError(f"bundle must have {d.n} components, got shape {x.shape}")
    P, X = d.prices_float, d.bundles_float
    return float(np.min(s.V + s.lam * (P @ x - np.einsum("ki,ki->k", P, X))))
