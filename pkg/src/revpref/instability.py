"""Preference-instability program.

For every anchor observation ``k`` we look for a utility profile
``U[:, k]`` (one level per observation) that has the "correct" gradient
``lam[k] p^k`` at ``x^k`` and arbitrary supergradients ``q[l, k] >= 0`` at
the other bundles:

* type 1, for every ``h`` and ``l != k``:
  ``U[h, k] <= U[l, k] + q[l, k].(x^h - x^l)``
* type 2, for every ``l``:
  ``U[l, k] <= U[k, k] + lam[k] p^k.(x^l - x^k)``

The program ``phi`` then measures how far these K utilities are from
collapsing into one Afriat solution::

    phi = sum_{k<h} |U[:, k] - U[:, h]|_1 + sum_{l != k} |q[l, k] - lam[l] p^l|_1

over the feasible set with ``lam >= 1``. ``phi == 0`` exactly when the data
is rationalizable. Under the L1 norm the program is an LP; absolute values
are linearised with one auxiliary variable per component.

Reported ``phi`` values depend on the ``lam >= 1`` normalisation and on the
L1 choice of norm; both are recorded on the solution.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .dataset import Dataset
from .lp import LinearProgram, LpOutcome, solve_lp

LAMBDA_FLOOR = 1.0


class Norm(str, enum.Enum):
    L1 = "l1"


@dataclass(frozen=True)
class PhiSystem:
    """Constraint system for all anchors, before any objective is attached."""

    K: int
    n: int
    lp: LinearProgram = field(repr=False)
    type1: tuple = field(repr=False)  # (anchor k, h, l) per row
    type2: tuple = field(repr=False)  # (anchor k, l) per row

    @property
    def num_type1(self) -> int:
        return len(self.type1)

    @property
    def num_type2(self) -> int:
        return len(self.type2)

    def type1_for(self, k: int) -> int:
        return sum(1 for row in self.type1 if row[0] == k)

    def type2_for(self, k: int) -> int:
        return sum(1 for row in self.type2 if row[0] == k)

    @property
    def num_U(self) -> int:
        return sum(1 for v in self.lp.variables if v.name[0] == "U")

    @property
    def num_lambda(self) -> int:
        return sum(1 for v in self.lp.variables if v.name[0] == "lam")

    @property
    def num_q_vectors(self) -> int:
        return len({v.name[1:3] for v in self.lp.variables if v.name[0] == "q"})

    def residuals(self, U, q, lam, d: Dataset) -> NDArray[np.float64]:
        """``lhs - rhs`` of every type-1 then type-2 row (feasible iff all <= 0)."""
        X, P = d.bundles_float, d.prices_float
        out = []
        for k, h, l in self.type1:
            out.append(U[h, k] - U[l, k] - q[(l, k)] @ (X[h] - X[l]))
        for k, l in self.type2:
            out.append(U[l, k] - U[k, k] - lam[k] * (P[k] @ (X[l] - X[k])))
        return np.array(out)


def build_phi_system(d: Dataset) -> PhiSystem:
    """Variables and the two constraint families for every anchor."""
    K, n = d.K, d.n
    X, P = d.bundles_float, d.prices_float
    lp = LinearProgram()
    for k in range(K):
        for h in range(K):
            lp.add_variable(("U", h, k), lower=None)
    for k in range(K):
        lp.add_variable(("lam", k), lower=LAMBDA_FLOOR)
    for k in range(K):
        for l in range(K):
            if l != k:
                for i in range(n):
                    lp.add_variable(("q", l, k, i), lower=0.0)

    type1, type2 = [], []
    for k in range(K):
        for h in range(K):
            for l in range(K):
                if l == k:
                    continue
                coeffs = {("U", h, k): 1.0}
                coeffs[("U", l, k)] = coeffs.get(("U", l, k), 0.0) - 1.0
                for i in range(n):
                    coeffs[("q", l, k, i)] = -(X[h, i] - X[l, i])
                lp.add_constraint(coeffs, 0.0, label=("type1", k, h, l))
                type1.append((k, h, l))
        for l in range(K):
            coeffs = {("U", l, k): 1.0}
            coeffs[("U", k, k)] = coeffs.get(("U", k, k), 0.0) - 1.0
            coeffs[("lam", k)] = -(P[k] @ (X[l] - X[k]))
            lp.add_constraint(coeffs, 0.0, label=("type2", k, l))
            type2.append((k, l))
    return PhiSystem(K, n, lp, tuple(type1), tuple(type2))


def linear_utility_point(d: Dataset):
    """A point of the system for any data: ``q[l, k] = p^k``, ``lam = 1``,
    ``U[h, k] = p^k.x^h``."""
    K = d.K
    X, P = d.bundles_float, d.prices_float
    U = (P @ X.T).T  # U[h, k] = p^k . x^h
    q = {(l, k): P[k].copy() for k in range(K) for l in range(K) if l != k}
    lam = np.ones(K)
    return U, q, lam


@dataclass(frozen=True)
class PhiSolution:
    """Optimiser of the instability program.

    ``U[h, k]`` is anchor ``k``'s utility level at ``x^h``; ``q[(l, k)]``
    the supergradient anchor ``k`` assigns to ``x^l``.
    """

    U: NDArray[np.float64]
    q: dict
    lam: NDArray[np.float64]
    phi: float
    lp_value: float
    norm: Norm = Norm.L1
    lambda_floor: float = LAMBDA_FLOOR

    @property
    def metadata(self) -> dict:
        return {"norm": self.norm.value, "lambda_floor": self.lambda_floor}


def phi_objective(U, q, lam, d: Dataset) -> float:
    """Sum of L1 distances between anchor utilities and from the Afriat gradients."""
    K = U.shape[0]
    P = d.prices_float
    total = 0.0
    for k in range(K):
        for h in range(k + 1, K):
            total += np.abs(U[:, k] - U[:, h]).sum()
    for (l, k), vec in sorted(q.items()):
        total += np.abs(vec - lam[l] * P[l]).sum()
    return float(total)


def solve_phi(d: Dataset, norm: Norm | str = Norm.L1) -> PhiSolution:
    """Minimise ``phi`` over the per-anchor systems."""
    norm = Norm(norm)
    system = build_phi_system(d)
    lp = system.lp
    K, n = d.K, d.n
    P = d.prices_float
    objective = {}
    for k in range(K):
        for h in range(k + 1, K):
            for j in range(K):
                t = lp.add_variable(("tU", j, k, h), lower=0.0)
                lp.add_constraint({("U", j, k): 1.0, ("U", j, h): -1.0, t: -1.0}, 0.0)
                lp.add_constraint({("U", j, k): -1.0, ("U", j, h): 1.0, t: -1.0}, 0.0)
                objective[t] = 1.0
    for k in range(K):
        for l in range(K):
            if l == k:
                continue
            for i in range(n):
                t = lp.add_variable(("tq", l, k, i), lower=0.0)
                lp.add_constraint({("q", l, k, i): 1.0, ("lam", l): -P[l, i], t: -1.0}, 0.0)
                lp.add_constraint({("q", l, k, i): -1.0, ("lam", l): P[l, i], t: -1.0}, 0.0)
                objective[t] = 1.0
    lp.set_objective(objective)
    out: LpOutcome = solve_lp(lp)
    if out.status != "optimal":
        raise RuntimeError(f"instability program ended {out.status}; the feasible set is never empty")
    U, q, lam = _unpack(out, lp, K, n)
    return PhiSolution(U, q, lam, phi_objective(U, q, lam, d), out.value, norm)


def _unpack(out: LpOutcome, lp: LinearProgram, K: int, n: int):
    x = out.x
    U = np.empty((K, K))
    for k in range(K):
        for h in range(K):
            U[h, k] = x[lp.index(("U", h, k))]
    lam = np.array([x[lp.index(("lam", k))] for k in range(K)])
    q = {}
    for k in range(K):
        for l in range(K):
            if l != k:
                q[(l, k)] = np.array([x[lp.index(("q", l, k, i))] for i in range(n)])
    return U, q, lam


def is_rationalizing_certificate(s: PhiSolution, d: Dataset, tol: float = 1e-9) -> bool:
    """True when all anchors share one utility profile and every
    supergradient equals the Afriat gradient ``lam[l] p^l``."""
    U = s.U
    spread = float((U.max(axis=1) - U.min(axis=1)).max()) if U.size else 0.0
    if spread > tol:
        return False
    P = d.prices_float
    for (l, k), vec in s.q.items():
        if np.abs(vec - s.lam[l] * P[l]).max(initial=0.0) > tol:
            return False
    return True
