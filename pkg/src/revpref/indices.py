"""Rationality indices: CCEI, per-observation efficiency, Varian, money pump."""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .dataset import (
    Dataset,
    ViolationWitness,
    as_exact,
    check_e_acyclic,
    check_levels_acyclic,
    cross_expenditure,
    transitive_closure,
)

# Exact search for the Varian index is only attempted up to this many observations.
VARIAN_EXACT_MAX_K = 12


@dataclass(frozen=True)
class CceiResult:
    """Critical cost efficiency index.

    ``value`` is the supremum of the efficiency levels at which the data is
    e-acyclic. ``attained`` tells whether the data is still e-acyclic at
    ``value`` itself; with the weak revealed-preference relation the
    supremum is typically not attained when the data violates GARP.
    ``witness`` is a violating cycle at the smallest violating level.
    """

    value: Fraction | float
    attained: bool
    witness: ViolationWitness | None = None

    def __float__(self) -> float:
        return float(self.value)


def _candidate_levels(d: Dataset) -> list:
    r = cross_expenditure(d).ratios()
    K = d.K
    zero, one = (Fraction(0), Fraction(1)) if d.exact else (0.0, 1.0)
    cands = {zero, one}
    for k in range(K):
        for l in range(K):
            if k != l and r[k, l] <= one:
                cands.add(r[k, l])
    return sorted(cands)


def ccei(d: Dataset) -> CceiResult:
    """Afriat's critical cost efficiency index, computed exactly.

    Acyclicity can only change at the cross-expenditure ratios
    ``A[k, l] / A[k, k]``, and it is monotone in the efficiency level, so a
    binary search over those candidates (plus a probe of the open gap above
    the last acyclic candidate) locates the supremum exactly.
    """
    cands = _candidate_levels(d)
    ok_one, w_one = check_e_acyclic(d, cands[-1])
    if ok_one:
        return CceiResult(cands[-1], True, None)
    # invariant: cands[lo] acyclic, cands[hi] not
    lo, hi = 0, len(cands) - 1
    witness_hi = w_one
    while hi - lo > 1:
        mid = (lo + hi) // 2
        ok, w = check_e_acyclic(d, cands[mid])
        if ok:
            lo = mid
        else:
            hi, witness_hi = mid, w
    gap = (cands[lo] + cands[hi]) / 2
    ok_gap, w_gap = check_e_acyclic(d, gap)
    if ok_gap:
        return CceiResult(cands[hi], False, witness_hi)
    return CceiResult(cands[lo], True, w_gap)


def ccei_bisection(d: Dataset, tol: float = 1e-9) -> float:
    """Plain bisection on the efficiency level; a cross-check for :func:`ccei`."""
    if check_e_acyclic(d, 1)[0]:
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if check_e_acyclic(d, mid)[0]:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def efficiency_vector_acyclic(d: Dataset, e: Sequence) -> bool:
    """Acyclicity with one cost-efficiency coefficient per observation.

    x^k is revealed preferred to x^l when ``e[k] p^k.x^k >= p^k.x^l``; the
    data passes when no chain leads back to x^k from some x^l with
    ``e[k] p^k.x^k > p^k.x^l``.
    """
    if len(e) != d.K:
        raise ValueError(f"need {d.K} coefficients, got {len(e)}")
    levels = [as_exact(v) if d.exact else float(v) for v in e]
    if any(not 0 <= v <= 1 for v in levels):
        raise ValueError("efficiency coefficients must lie in [0, 1]")
    return check_levels_acyclic(d, levels)[0]


# -- Varian index -----------------------------------------------------------


def _ssq(values) -> Fraction | float:
    return sum((1 - v) ** 2 for v in values)


def _sum_gap(values) -> Fraction | float:
    return sum(1 - v for v in values)


AGGREGATORS: dict[str, Callable] = {"ssq": _ssq, "sum": _sum_gap}


class _RowLevels:
    """Ordered efficiency states of one observation.

    With breakpoints ``v_0 = 0 < v_1 < ... < v_m = 1`` (the row's cross
    ratios), state ``2j`` is the point ``e = v_j`` and state ``2j + 1`` the
    open gap ``(v_j, v_{j+1})``. Higher states reveal weakly more.
    """

    def __init__(self, ratios_row, k: int, one):
        self.k = k
        self.ratios = ratios_row
        pts = {one * 0, one}
        for l, r in enumerate(ratios_row):
            if l != k and r <= one:
                pts.add(r)
        self.points = sorted(pts)

    @property
    def top(self) -> int:
        return 2 * (len(self.points) - 1)

    def value(self, s: int):
        """Supremum of the coefficient within state ``s``."""
        return self.points[(s + 1) // 2]

    def attained(self, s: int) -> bool:
        return s % 2 == 0

    def edges(self, s: int):
        j = s // 2
        v = self.points[j]
        K = len(self.ratios)
        weak = np.zeros(K, dtype=bool)
        strict = np.zeros(K, dtype=bool)
        for l in range(K):
            r = self.ratios[l]
            if s % 2 == 0:
                weak[l] = r <= v
                strict[l] = r < v
            else:
                weak[l] = strict[l] = r <= v
        return weak, strict

    def state_of(self, e, attained: bool) -> int:
        """State holding level ``e`` (or levels just below it if not attained)."""
        pts = self.points
        for j, v in enumerate(pts):
            if v == e:
                return 2 * j if attained else max(2 * j - 1, 0)
            if v > e:
                return 2 * j - 1
        return self.top


@dataclass(frozen=True)
class VarianResult:
    """Per-observation efficiency vector closest to one.

    ``e`` holds suprema; ``attained[k]`` is False when ``e[k]`` itself is
    only approached from below. ``heuristic`` marks a greedy result for
    datasets too large for the exact search.
    """

    e: tuple
    aggregate_min: Fraction | float
    aggregate_ssq: Fraction | float
    attained: tuple[bool, ...]
    aggregator: str = "ssq"
    heuristic: bool = False

    def __iter__(self):
        # allows ``e, amin, assq = varian_index(d)``
        return iter((self.e, self.aggregate_min, self.aggregate_ssq))


def _feasible(rows: list[_RowLevels], states: Sequence[int], cache: dict) -> bool:
    key = tuple(states)
    hit = cache.get(key)
    if hit is not None:
        return hit
    K = len(rows)
    weak = np.zeros((K, K), dtype=bool)
    strict = np.zeros((K, K), dtype=bool)
    for k, (row, s) in enumerate(zip(rows, states)):
        weak[k], strict[k] = row.edges(s)
    np.fill_diagonal(weak, False)
    np.fill_diagonal(strict, False)
    closure = transitive_closure(weak).matrix
    ok = not np.any(strict & closure.T)
    cache[key] = ok
    return ok


def varian_index(
    d: Dataset,
    aggregator: str = "ssq",
    max_exact: int = VARIAN_EXACT_MAX_K,
) -> VarianResult:
    """Varian-style efficiency vector.

    Chooses one coefficient per observation, each at least the CCEI, so
    that the per-observation relation is acyclic and ``aggregator``
    (default: sum of squared shortfalls from one) is minimised. Exact
    branch-and-bound up to ``max_exact`` observations, greedy above.
    Ties go to the lexicographically largest vector.
    """
    if aggregator not in AGGREGATORS:
        raise ValueError(f"unknown aggregator {aggregator!r}; choose from {sorted(AGGREGATORS)}")
    agg = AGGREGATORS[aggregator]
    one = Fraction(1) if d.exact else 1.0
    ratios = cross_expenditure(d).ratios()
    K = d.K
    rows = [_RowLevels(ratios[k], k, one) for k in range(K)]
    base = ccei(d)
    floor = [row.state_of(base.value, base.attained) for row in rows]
    cache: dict = {}

    if K > max_exact:
        states = _greedy(rows, floor, cache)
        heuristic = True
    else:
        states = _branch_and_bound(rows, floor, agg, cache)
        heuristic = False

    e = tuple(row.value(s) for row, s in zip(rows, states))
    return VarianResult(
        e=e,
        aggregate_min=min(e),
        aggregate_ssq=_ssq(e),
        attained=tuple(row.attained(s) for row, s in zip(rows, states)),
        aggregator=aggregator,
        heuristic=heuristic,
    )


def _greedy(rows, floor, cache):
    states = list(floor)
    for k, row in enumerate(rows):
        for s in range(row.top, states[k], -1):
            trial = states[:k] + [s] + states[k + 1 :]
            if _feasible(rows, trial, cache):
                states = trial
                break
    return states


def _branch_and_bound(rows, floor, agg, cache):
    K = len(rows)
    best: list = [None, None]  # (score, e-vector, states)

    def better(score, vec):
        if best[0] is None:
            return True
        if score != best[0]:
            return score < best[0]
        return vec > best[1][0]

    def visit(k, states):
        if k == K:
            vec = tuple(rows[i].value(s) for i, s in enumerate(states))
            score = agg(vec)
            if better(score, vec):
                best[0], best[1] = score, (vec, list(states))
            return
        row = rows[k]
        for s in range(row.top, floor[k] - 1, -1):
            partial = [rows[i].value(states[i]) for i in range(k)] + [row.value(s)]
            if best[0] is not None and agg(partial) > best[0]:
                continue
            trial = states + [s] + floor[k + 1 :]
            if not _feasible(rows, trial, cache):
                continue
            visit(k + 1, states + [s])

    visit(0, [])
    return best[1][1]


# -- money pump -------------------------------------------------------------


@dataclass(frozen=True)
class MoneyPumpReport:
    """Money pump index over every GARP-violating simple cycle."""

    cycles: tuple[tuple[tuple[int, ...], Fraction | float], ...] = field(default=())
    max_cycle_len: int = 2

    @property
    def max_mpi(self):
        return max((m for _, m in self.cycles), default=0)

    @property
    def mean_mpi(self):
        if not self.cycles:
            return 0
        values = [m for _, m in self.cycles]
        if all(isinstance(m, Fraction) for m in values):
            common = math.lcm(*{m.denominator for m in values})
            return Fraction(sum(m.numerator * (common // m.denominator) for m in values), common * len(values))
        return math.fsum(values) / len(values)

    def __len__(self) -> int:
        return len(self.cycles)


def default_cycle_cap(K: int) -> int:
    return max(K, 2) if K <= 10 else 4


def money_pump(d: Dataset, max_cycle_len: int | None = None) -> MoneyPumpReport:
    """Enumerate revealed-preference cycles and their money pump index.

    For a cycle ``k_1 -> ... -> k_m -> k_1`` in R(1) with at least one
    strict link, the index is the share of the cycle's total expenditure
    that an arbitrageur could extract by buying each revealed-worse bundle
    at the prices of the observation that revealed it:
    ``sum(A[k, k] - A[k, next]) / sum(A[k, k])``. Cycles are listed once,
    starting at their smallest index.
    """
    K = d.K
    cap = default_cycle_cap(K) if max_cycle_len is None else int(max_cycle_len)
    if cap < 2:
        raise ValueError("max_cycle_len must be at least 2")
    A = cross_expenditure(d).values
    s = d.slack
    if d.exact:
        # integer copy scaled by the common denominator; ratios are unchanged
        scale = math.lcm(*(v.denominator for v in A.flat))
        M = [[int(v * scale) for v in row] for row in A]
        ratio = Fraction
    else:
        M = A.tolist()
        ratio = operator.truediv
    succ = [[l for l in range(K) if l != k and M[k][k] >= M[k][l] - s] for k in range(K)]
    strict = [[M[k][k] > M[k][l] + s for l in range(K)] for k in range(K)]

    found = []

    def extend(path, on_path, saved, spent, n_strict):
        # saved / spent / n_strict cover the links along ``path`` so far
        last = path[-1]
        head = path[0]
        own = M[last][last]
        for nxt in succ[last]:
            if nxt == head:
                if n_strict or strict[last][head]:
                    mpi = ratio(saved + own - M[last][head], spent + own)
                    found.append((tuple(path), mpi))
            elif nxt > head and nxt not in on_path and len(path) < cap:
                on_path.add(nxt)
                path.append(nxt)
                extend(path, on_path, saved + own - M[last][nxt], spent + own, n_strict + strict[last][nxt])
                path.pop()
                on_path.discard(nxt)

    for start in range(K):
        extend([start], {start}, 0, 0, 0)
    found.sort(key=lambda c: (len(c[0]), c[0]))
    return MoneyPumpReport(tuple(found), cap)
