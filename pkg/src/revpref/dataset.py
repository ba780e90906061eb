"""Consumer datasets and revealed-preference relations.

A dataset is a sequence of observations ``(x^k, p^k)``: the bundle bought
and the prices it was bought at. Everything downstream (indices, Afriat
inequalities, the instability program) works from the cross-expenditure
matrix ``A[k, l] = p^k . x^l``.

Values are held as :class:`fractions.Fraction` by default so that the
revealed-preference comparisons are exact. Floats are read through their
shortest decimal representation, so ``0.1`` means ``1/10``.
"""

from __future__ import annotations

import csv
import io
import math
from collections import deque
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Iterable, Literal, Sequence, TextIO

import numpy as np
from numpy.typing import NDArray

# Comparison slack used when a dataset is built with ``exact=False``.
FLOAT_SLACK = 1e-12


class DatasetError(ValueError):
    """Raised for malformed or inadmissible consumer data.

    ``row`` is the 1-based data row (header excluded) when the problem can
    be pinned to one observation.
    """

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message)
        self.row = row


def as_exact(value) -> Fraction:
    """Convert a number or numeric string to an exact rational."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, Decimal):
        if not value.is_finite():
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if not math.isfinite(v):
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(repr(v))
    if isinstance(value, str):
        text = value.strip()
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a number: {value!r}") from exc
    raise TypeError(f"cannot interpret {type(value).__name__} as a number")


def _to_matrix(rows, exact: bool) -> NDArray:
    rows = [list(r) for r in rows]
    if exact:
        out = np.empty((len(rows), len(rows[0]) if rows else 0), dtype=object)
        for i, r in enumerate(rows):
            for j, v in enumerate(r):
                out[i, j] = as_exact(v)
        return out
    arr = np.asarray(rows, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DatasetError("non-finite value in data")
    return arr


@dataclass(frozen=True, eq=False)
class Dataset:
    """Observations ``(x^k, p^k)`` of a single consumer.

    Parameters
    ----------
    prices : array-like, shape (K, n)
        Strictly positive price vectors, one row per observation.
    bundles : array-like, shape (K, n)
        Non-negative consumption bundles.
    exact : bool, default True
        Store values as rationals and compare exactly. With ``exact=False``
        values are float64 and comparisons carry a ``FLOAT_SLACK`` margin.
    """

    prices: NDArray
    bundles: NDArray
    exact: bool = True
    _float_cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __init__(self, prices, bundles, exact: bool = True):
        p_rows = [list(r) for r in prices]
        x_rows = [list(r) for r in bundles]
        if not p_rows:
            raise DatasetError("dataset needs at least one observation")
        if len(p_rows) != len(x_rows):
            raise DatasetError(
                f"{len(p_rows)} price rows but {len(x_rows)} bundle rows"
            )
        n = len(p_rows[0])
        if n == 0:
            raise DatasetError("dataset needs at least one good")
        for k, (p, x) in enumerate(zip(p_rows, x_rows), start=1):
            if len(p) != n or len(x) != n:
                raise DatasetError(f"ragged row {k}: expected {n} goods", row=k)
        try:
            P = _to_matrix(p_rows, exact)
            X = _to_matrix(x_rows, exact)
        except (TypeError, ValueError) as exc:
            raise DatasetError(str(exc)) from exc
        for k in range(len(p_rows)):
            if any(v <= 0 for v in P[k]):
                raise DatasetError(f"non-positive price at row {k + 1}", row=k + 1)
            if any(v < 0 for v in X[k]):
                raise DatasetError(f"negative quantity at row {k + 1}", row=k + 1)
            if sum(P[k] * X[k]) <= 0:
                raise DatasetError(f"zero expenditure at row {k + 1}", row=k + 1)
        P.setflags(write=False)
        X.setflags(write=False)
        object.__setattr__(self, "prices", P)
        object.__setattr__(self, "bundles", X)
        object.__setattr__(self, "exact", bool(exact))
        object.__setattr__(self, "_float_cache", {})

    @property
    def K(self) -> int:
        return self.prices.shape[0]

    @property
    def n(self) -> int:
        return self.prices.shape[1]

    @property
    def slack(self) -> float:
        return 0 if self.exact else FLOAT_SLACK

    @property
    def prices_float(self) -> NDArray[np.float64]:
        if "p" not in self._float_cache:
            self._float_cache["p"] = np.asarray(self.prices, dtype=float)
        return self._float_cache["p"]

    @property
    def bundles_float(self) -> NDArray[np.float64]:
        if "x" not in self._float_cache:
            self._float_cache["x"] = np.asarray(self.bundles, dtype=float)
        return self._float_cache["x"]

    @property
    def expenditures(self) -> NDArray:
        """Observed budgets ``I^k = p^k . x^k``."""
        return np.diagonal(cross_expenditure(self).values).copy()

    def observation(self, k: int) -> tuple[NDArray, NDArray]:
        return self.bundles[k], self.prices[k]

    def to_array(self) -> NDArray[np.float64]:
        """Float matrix laid out like the CSV format: ``[p1..pn, x1..xn]``."""
        return np.hstack([self.prices_float, self.bundles_float])

    def __len__(self) -> int:
        return self.K

    def __repr__(self) -> str:
        return f"Dataset(K={self.K}, n={self.n}, exact={self.exact})"


@dataclass(frozen=True)
class ExpenditureMatrix:
    """``values[k, l] = p^k . x^l``; the diagonal holds the budgets."""

    values: NDArray
    exact: bool = True

    @property
    def K(self) -> int:
        return self.values.shape[0]

    def ratios(self) -> NDArray:
        """Row-normalised cross expenditures ``A[k, l] / A[k, k]``."""
        diag = np.diagonal(self.values)
        return self.values / diag[:, None]

    def as_float(self) -> NDArray[np.float64]:
        return np.asarray(self.values, dtype=float)


@dataclass(frozen=True)
class Relation:
    """Boolean K x K matrix; ``matrix[k, l]`` means x^k is related to x^l."""

    matrix: NDArray[np.bool_]
    kind: Literal["direct", "transitive-closure"] = "direct"

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=bool)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("relation matrix must be square")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __eq__(self, other):
        if not isinstance(other, Relation):
            return NotImplemented
        return self.kind == other.kind and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash((self.kind, self.matrix.tobytes()))


@dataclass(frozen=True)
class ViolationWitness:
    """A revealed-preference cycle that breaks e-acyclicity.

    ``cycle`` lists 0-based observation indices; each member is revealed
    preferred to the next and the last to the first, with the first link
    strict. ``severity`` is the smallest efficiency level at which every
    link of the cycle is present.
    """

    cycle: tuple[int, ...]
    severity: Fraction | float

    def __post_init__(self):
        if len(self.cycle) < 2:
            raise ValueError("a violation cycle has at least two members")


def cross_expenditure(d: Dataset) -> ExpenditureMatrix:
    key = "A"
    cached = d._float_cache.get(key)
    if cached is not None:
        return cached
    K, n = d.K, d.n
    if d.exact:
        A = np.empty((K, K), dtype=object)
        for k in range(K):
            p = d.prices[k]
            for l in range(K):
                x = d.bundles[l]
                acc = Fraction(0)
                # left-to-right over goods
                for i in range(n):
                    acc += p[i] * x[i]
                A[k, l] = acc
    else:
        A = d.prices_float @ d.bundles_float.T
    A.setflags(write=False)
    out = ExpenditureMatrix(A, exact=d.exact)
    d._float_cache[key] = out
    return out


def _check_level(e) -> None:
    if not 0 <= e <= 1:
        raise ValueError(f"efficiency level must lie in [0, 1], got {e}")


def _coerce_level(d: Dataset, e):
    return as_exact(e) if d.exact else float(e)


def _edges(d: Dataset, levels: Sequence) -> tuple[NDArray[np.bool_], NDArray[np.bool_]]:
    """Weak and strict revealed-preference edges for per-row efficiency levels."""
    A = cross_expenditure(d).values
    K = d.K
    s = d.slack
    weak = np.zeros((K, K), dtype=bool)
    strict = np.zeros((K, K), dtype=bool)
    for k in range(K):
        budget = levels[k] * A[k, k]
        for l in range(K):
            weak[k, l] = budget >= A[k, l] - s
            strict[k, l] = budget > A[k, l] + s
    return weak, strict


def revealed_relation(d: Dataset, e=1) -> Relation:
    """Direct e-revealed preference: x^k R(e) x^l iff e p^k.x^k >= p^k.x^l."""
    _check_level(e)
    e = _coerce_level(d, e)
    weak, _ = _edges(d, [e] * d.K)
    return Relation(weak, kind="direct")


def transitive_closure(r: Relation | NDArray) -> Relation:
    """Smallest transitive relation containing ``r`` (Warshall)."""
    m = np.array(r.matrix if isinstance(r, Relation) else r, dtype=bool)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("relation matrix must be square")
    for mid in range(m.shape[0]):
        m |= m[:, mid : mid + 1] & m[mid : mid + 1, :]
    return Relation(m, kind="transitive-closure")


def _shortest_path(adj: NDArray[np.bool_], src: int, dst: int) -> list[int] | None:
    """BFS path src -> dst (inclusive), neighbours visited in index order."""
    if src == dst:
        return [src]
    parent = {src: None}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for v in np.flatnonzero(adj[u]):
            v = int(v)
            if v in parent:
                continue
            parent[v] = u
            if v == dst:
                path = [v]
                while parent[path[-1]] is not None:
                    path.append(parent[path[-1]])
                return path[::-1]
            queue.append(v)
    return None


def _canonical(cycle: list[int]) -> tuple[int, ...]:
    i = cycle.index(min(cycle))
    return tuple(cycle[i:] + cycle[:i])


def find_violation(
    d: Dataset, weak: NDArray[np.bool_], strict: NDArray[np.bool_]
) -> ViolationWitness | None:
    """Shortest cycle with a strict link, or None when the relation is acyclic.

    Self-loops are ignored. Ties are broken by the lexicographically smallest
    cycle after rotating it to start at its smallest index.
    """
    adj = weak.copy()
    np.fill_diagonal(adj, False)
    closure = transitive_closure(adj).matrix
    best: tuple[int, ...] | None = None
    K = weak.shape[0]
    for k in range(K):
        for l in range(K):
            if k == l or not strict[k, l] or not closure[l, k]:
                continue
            path = _shortest_path(adj, l, k)
            cyc = _canonical([k] + path[:-1])
            if best is None or (len(cyc), cyc) < (len(best), best):
                best = cyc
    if best is None:
        return None
    ratios = cross_expenditure(d).ratios()
    nxt = best[1:] + best[:1]
    severity = max(ratios[a, b] for a, b in zip(best, nxt))
    return ViolationWitness(best, severity)


def check_levels_acyclic(d: Dataset, levels: Sequence) -> tuple[bool, ViolationWitness | None]:
    weak, strict = _edges(d, levels)
    witness = find_violation(d, weak, strict)
    return witness is None, witness


def check_e_acyclic(d: Dataset, e=1) -> tuple[bool, ViolationWitness | None]:
    """Test e-acyclicity and return a shortest violating cycle if any.

    The dataset is e-acyclic when ``x^l R^T(e) x^k`` implies
    ``e p^k.x^k <= p^k.x^l`` for every pair. ``check_e_acyclic(d, 1)`` is
    the GARP test.
    """
    _check_level(e)
    e = _coerce_level(d, e)
    return check_levels_acyclic(d, [e] * d.K)


def check_garp(d: Dataset) -> tuple[bool, ViolationWitness | None]:
    return check_e_acyclic(d, 1)


def load_dataset(source: TextIO | str | Iterable[str], exact: bool = True) -> Dataset:
    """Read a dataset from CSV text with header ``p1..pn,x1..xn``.

    Cells are decimals (``0.3``, ``1e-3``) or fractions (``1/3``), all read
    exactly. ``source`` may be an open text stream, a string holding the
    CSV, or an iterable of lines. Row numbers in errors are 1-based data rows.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.reader(source)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise DatasetError("empty input: missing header row") from None
    if len(header) % 2 or not header:
        raise DatasetError(f"header must be p1..pn,x1..xn, got {header}")
    n = len(header) // 2
    expected = [f"p{i}" for i in range(1, n + 1)] + [f"x{i}" for i in range(1, n + 1)]
    if header != expected:
        raise DatasetError(f"header must be {','.join(expected)}, got {','.join(header)}")

    prices, bundles = [], []
    for row_no, row in enumerate(reader, start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2 * n:
            raise DatasetError(
                f"ragged row {row_no}: expected {2 * n} fields, got {len(row)}", row=row_no
            )
        try:
            values = [Fraction(c.strip()) for c in row]
        except Exception:
            raise DatasetError(f"non-numeric field at row {row_no}", row=row_no) from None
        prices.append(values[:n])
        bundles.append(values[n:])
    if not prices:
        raise DatasetError("no data rows")
    if exact:
        return Dataset(prices, bundles, exact=True)
    return Dataset(
        [[float(v) for v in r] for r in prices],
        [[float(v) for v in r] for r in bundles],
        exact=False,
    )


def _format_value(v) -> str:
    if isinstance(v, Fraction):
        num, den = v.numerator, v.denominator
        twos = fives = 0
        while den % 2 == 0:
            den //= 2
            twos += 1
        while den % 5 == 0:
            den //= 5
            fives += 1
        if den == 1:
            # terminating decimal: write it exactly
            digits = max(twos, fives)
            scaled = num * 10**digits // v.denominator
            return str(Decimal(scaled).scaleb(-digits))
        return f"{v.numerator}/{v.denominator}"
    return repr(float(v))


def dump_dataset(d: Dataset, out: TextIO) -> None:
    """Write ``d`` in the CSV format read by :func:`load_dataset`."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow([f"p{i}" for i in range(1, d.n + 1)] + [f"x{i}" for i in range(1, d.n + 1)])
    for k in range(d.K):
        writer.writerow([_format_value(v) for v in list(d.prices[k]) + list(d.bundles[k])])
