"""Dense two-phase simplex for small linear programs.

Problems are ``min c.v`` subject to ``A v <= b`` and per-variable bounds.
The solver uses Bland's rule throughout so it cannot cycle, and it is
fully deterministic: the same program always yields the same vertex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Literal, Mapping

import numpy as np
from numpy.typing import NDArray

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-9
STURDY_PIVOT = 1e-3
REINVERT_EVERY = 50
BLAND_AFTER = 50
HARRIS_TOL = 1e-9
REFRESH_TOL = 1e-7


class LPError(ValueError):
    """Malformed program (non-finite coefficients, bad dimensions)."""


class LPNumericalError(RuntimeError):
    """The simplex finished but its answer failed the post-hoc checks."""


@dataclass(frozen=True)
class Variable:
    index: int
    name: Hashable
    lower: float
    upper: float


class LinearProgram:
    """Builder for ``min c.v  s.t.  A v <= b,  lower <= v <= upper``.

    Variables are registered with :meth:`add_variable` and referred to by
    the returned index (or their name) in :meth:`add_constraint`.
    """

    def __init__(self):
        self.variables: list[Variable] = []
        self._by_name: dict[Hashable, int] = {}
        self._rows: list[dict[int, float]] = []
        self._rhs: list[float] = []
        self._labels: list[Hashable] = []
        self._objective: dict[int, float] = {}

    @classmethod
    def from_arrays(cls, c, A_ub=None, b_ub=None, bounds=None) -> "LinearProgram":
        """Build from dense arrays; ``bounds`` defaults to ``v >= 0``."""
        c = np.asarray(c, dtype=float)
        lp = cls()
        nvar = c.shape[0]
        if bounds is None:
            bounds = [(0.0, None)] * nvar
        elif len(bounds) != nvar:
            raise LPError("bounds length does not match objective")
        for j, (lo, hi) in enumerate(bounds):
            lp.add_variable(j, lower=lo, upper=hi)
        lp.set_objective({j: c[j] for j in range(nvar) if c[j] != 0})
        if A_ub is not None:
            A_ub = np.atleast_2d(np.asarray(A_ub, dtype=float))
            b_ub = np.asarray(b_ub, dtype=float).ravel()
            if A_ub.shape != (b_ub.shape[0], nvar):
                raise LPError(f"A_ub has shape {A_ub.shape}, expected {(b_ub.shape[0], nvar)}")
            for i in range(A_ub.shape[0]):
                lp.add_constraint({j: A_ub[i, j] for j in np.flatnonzero(A_ub[i])}, b_ub[i])
        return lp

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    @property
    def num_constraints(self) -> int:
        return len(self._rows)

    def add_variable(self, name: Hashable = None, lower: float | None = 0.0, upper: float | None = None) -> int:
        idx = len(self.variables)
        name = idx if name is None else name
        if name in self._by_name:
            raise LPError(f"duplicate variable {name!r}")
        lo = -math.inf if lower is None else float(lower)
        hi = math.inf if upper is None else float(upper)
        if math.isnan(lo) or math.isnan(hi) or lo == math.inf or hi == -math.inf:
            raise LPError(f"invalid bounds for {name!r}: ({lower}, {upper})")
        self.variables.append(Variable(idx, name, lo, hi))
        self._by_name[name] = idx
        return idx

    def index(self, name: Hashable) -> int:
        return self._by_name[name]

    def _resolve(self, coeffs: Mapping) -> dict[int, float]:
        out: dict[int, float] = {}
        for key, val in coeffs.items():
            j = key if isinstance(key, (int, np.integer)) and 0 <= key < len(self.variables) else self._by_name[key]
            out[int(j)] = out.get(int(j), 0.0) + float(val)
        return out

    def add_constraint(self, coeffs: Mapping, rhs: float, label: Hashable = None) -> int:
        """Add ``sum(coeffs[v] * v) <= rhs``; returns the row index."""
        self._rows.append(self._resolve(coeffs))
        self._rhs.append(float(rhs))
        self._labels.append(label)
        return len(self._rows) - 1

    def set_objective(self, coeffs: Mapping) -> None:
        self._objective = self._resolve(coeffs)

    def to_arrays(self) -> tuple[NDArray, NDArray, NDArray, NDArray, NDArray]:
        """Dense ``(c, A, b, lower, upper)``."""
        nv, m = len(self.variables), len(self._rows)
        c = np.zeros(nv)
        for j, v in self._objective.items():
            c[j] = v
        A = np.zeros((m, nv))
        for i, row in enumerate(self._rows):
            for j, v in row.items():
                A[i, j] = v
        b = np.array(self._rhs, dtype=float)
        lo = np.array([v.lower for v in self.variables])
        hi = np.array([v.upper for v in self.variables])
        return c, A, b, lo, hi


@dataclass(frozen=True)
class LpOutcome:
    status: Literal["optimal", "infeasible", "unbounded"]
    value: float
    x: NDArray[np.float64] = field(repr=False)
    names: tuple = field(default=(), repr=False)
    iterations: int = 0

    @property
    def assignment(self) -> dict:
        return dict(zip(self.names, self.x.tolist()))

    @property
    def success(self) -> bool:
        return self.status == "optimal"


def _validate(c, A, b, lo, hi):
    for name, arr in (("objective", c), ("constraint matrix", A), ("right-hand side", b)):
        if not np.all(np.isfinite(arr)):
            raise LPError(f"non-finite coefficient in {name}")


class _Tableau:
    """Standard-form tableau ``T`` with basis bookkeeping.

    Row 0..m-1 are constraints, the last row holds reduced costs; the last
    column holds the right-hand side.
    """

    def __init__(self, A, b, basis):
        m, N = A.shape
        self.T = np.zeros((m + 1, N + 1))
        self.T[:m, :N] = A
        self.T[:m, N] = b
        self.A, self.b = A, b
        self.cost = np.zeros(N)
        self.basis = list(basis)
        self.iterations = 0

    def set_costs(self, cost):
        m = len(self.basis)
        T = self.T
        self.cost = np.zeros(T.shape[1] - 1)
        self.cost[: len(cost)] = cost
        T[m, :] = 0.0
        T[m, :-1] = self.cost
        for i, j in enumerate(self.basis):
            if T[m, j] != 0.0:
                T[m, :] -= T[m, j] * T[i, :]

    def reinvert(self) -> bool:
        """Rebuild the tableau from the original data and the current basis.

        Returns False (leaving the tableau alone) if the basis matrix is
        numerically singular.
        """
        m = len(self.basis)
        B = self.A[:, self.basis]
        try:
            body = np.linalg.solve(B, np.column_stack([self.A, self.b]))
        except np.linalg.LinAlgError:
            return False
        if not np.all(np.isfinite(body)):
            return False
        T = self.T
        T[:m, :] = body
        T[:m, self.basis] = np.eye(m)
        rhs = T[:m, -1]
        rhs[(rhs < 0.0) & (rhs > -FEAS_TOL)] = 0.0
        T[m, :-1] = self.cost - self.cost[self.basis] @ body[:, :-1]
        T[m, self.basis] = 0.0
        T[m, -1] = -(self.cost[self.basis] @ body[:, -1])
        return True

    def refresh(self) -> bool:
        """Cheap consistency check before declaring a terminal status.

        Recomputes the basic values and reduced costs from the original data.
        If they agree with the tableau the fresh values are copied in and
        True is returned; otherwise the whole tableau is rebuilt and False
        is returned so the caller keeps iterating.
        """
        m = len(self.basis)
        B = self.A[:, self.basis]
        try:
            xb = np.linalg.solve(B, self.b)
            y = np.linalg.solve(B.T, self.cost[self.basis])
        except np.linalg.LinAlgError:
            return True
        red = self.cost - self.A.T @ y
        red[self.basis] = 0.0
        T = self.T
        scale = max(1.0, np.abs(xb).max(initial=0.0), np.abs(red).max(initial=0.0))
        if (
            np.all(np.isfinite(xb))
            and np.abs(xb - T[:m, -1]).max(initial=0.0) <= REFRESH_TOL * scale
            and np.abs(red - T[m, :-1]).max(initial=0.0) <= REFRESH_TOL * scale
        ):
            T[:m, -1] = xb
            T[m, :-1] = red
            T[m, -1] = -(self.cost[self.basis] @ xb)
            return True
        self.reinvert()
        return False

    def pivot(self, r, j):
        T = self.T
        T[r, :] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        nz = np.flatnonzero(col)
        if nz.size:
            # the tableau stays sparse, so only touch the pivot row's support
            cz = np.flatnonzero(T[r, :])
            if cz.size * 2 < T.shape[1]:
                T[np.ix_(nz, cz)] -= np.outer(col[nz], T[r, cz])
            else:
                T[nz, :] -= np.outer(col[nz], T[r, :])
        T[:, j] = 0.0
        T[r, j] = 1.0
        self.basis[r] = j
        self.iterations += 1

    def run(self, allowed: NDArray[np.bool_], max_iter: int) -> Literal["optimal", "unbounded"]:
        T = self.T
        m = len(self.basis)
        fresh = False  # tableau rebuilt since the last pivot
        stalled = 0  # consecutive degenerate pivots
        while True:
            if self.iterations > max_iter:
                raise LPNumericalError("simplex iteration limit reached")
            if self.iterations and self.iterations % REINVERT_EVERY == 0 and not fresh:
                fresh = self.reinvert()
            reduced = T[m, :-1]
            candidates = np.flatnonzero((reduced < -PIVOT_TOL) & allowed)
            if candidates.size == 0:
                if not fresh and self.reinvert():
                    fresh = True
                    continue
                return "optimal"
            bland = stalled >= BLAND_AFTER
            if bland:
                j = int(candidates[0])  # Bland: lowest index enters
            else:
                j = int(candidates[np.argmin(reduced[candidates])])  # Dantzig
            col = T[:m, j]
            rows = np.flatnonzero(col > PIVOT_TOL)
            if rows.size == 0:
                if not fresh and self.reinvert():
                    fresh = True
                    continue
                return "unbounded"
            ratios = np.maximum(T[rows, -1], 0.0) / col[rows]
            best = ratios.min()
            tied = rows[ratios <= best + PIVOT_TOL * max(1.0, abs(best))]
            if bland:
                # skip near-singular pivots when a sturdier tied row exists
                sturdy = tied[col[tied] >= STURDY_PIVOT * col[tied].max()]
                r = int(min(sturdy, key=lambda i: self.basis[i]))  # lowest basic index leaves
            else:
                r = int(tied[np.argmax(col[tied])])  # largest pivot among ties
            self.pivot(r, j)
            fresh = False
            stalled = stalled + 1 if best <= PIVOT_TOL else 0
            drift = T[:m, -1]
            drift[(drift < 0.0) & (drift > -FEAS_TOL)] = 0.0

    def run_dual(
        self, allowed: NDArray[np.bool_], max_iter: int, inverse: slice | None = None
    ) -> Literal["optimal", "infeasible"]:
        """Dual simplex from a dual-feasible basis (all reduced costs >= 0).

        The most negative basic value leaves and the entering column comes
        from the dual ratio test; after a run of dual-degenerate pivots the
        choice falls back to smallest indices, Bland style.
        """
        T = self.T
        m = len(self.basis)
        fresh = False
        stalled = 0
        every = max(REINVERT_EVERY, m)
        while True:
            if self.iterations > max_iter:
                raise LPNumericalError("simplex iteration limit reached")
            if self.iterations and self.iterations % every == 0 and not fresh:
                fresh = self.reinvert()
            rhs = T[:m, -1]
            rows = np.flatnonzero(rhs < -0.1 * FEAS_TOL)  # margin below the post-hoc check
            if rows.size == 0:
                if not fresh:
                    fresh = True
                    if not self.refresh() or np.any(T[:m, -1] < -0.1 * FEAS_TOL):
                        continue
                return "optimal"
            bland = stalled >= BLAND_AFTER
            if bland:
                r = int(min(rows, key=lambda i: self.basis[i]))
            elif inverse is not None:
                # dual steepest edge: the slack block holds the rows of B^-1
                weights = np.einsum("ij,ij->i", T[rows, inverse], T[rows, inverse])
                r = int(rows[np.argmax(rhs[rows] ** 2 / weights)])
            else:
                r = int(rows[np.argmin(rhs[rows])])
            row = T[r, :-1]
            cand = np.flatnonzero((row < -PIVOT_TOL) & allowed)
            if cand.size == 0:
                if not fresh:
                    fresh = True
                    self.reinvert()
                    continue
                return "infeasible"
            alpha = -row[cand]
            ratios = np.maximum(T[m, cand], 0.0) / alpha
            best = ratios.min()
            if bland:
                tied = ratios <= best + PIVOT_TOL * max(1.0, best)
                tied &= alpha >= STURDY_PIVOT * alpha[tied].max()
                j = int(cand[tied][0])
            else:
                # Harris: relax the bound slightly, then take the largest pivot
                bound = ((np.maximum(T[m, cand], 0.0) + HARRIS_TOL) / alpha).min()
                eligible = ratios <= bound
                j = int(cand[eligible][np.argmax(alpha[eligible])])
            self.pivot(r, j)
            fresh = False
            stalled = stalled + 1 if best <= PIVOT_TOL else 0
            red = T[m, :-1]
            red[(red < 0.0) & (red > -PIVOT_TOL)] = 0.0

def solve_lp(p: LinearProgram, max_iter: int | None = None) -> LpOutcome:
    """Solve ``p`` with the two-phase simplex method.

    Returns an :class:`LpOutcome` whose ``status`` is ``"optimal"``,
    ``"infeasible"`` or ``"unbounded"``. Optimal assignments are polished by
    re-solving the final basis against the original data and then checked
    against every constraint and bound; a failed check raises
    :class:`LPNumericalError`.
    """
    c, A, b, lo, hi = p.to_arrays()
    _validate(c, A, b, lo, hi)
    names = tuple(v.name for v in p.variables)
    nv, m0 = c.shape[0], A.shape[0]

    # Map each original variable onto non-negative standard columns:
    # v = shift + sum(sign * y_col).
    shift = np.zeros(nv)
    cols: list[list[tuple[int, float]]] = []
    ncol = 0
    extra_rows: list[tuple[int, float]] = []  # (column, upper bound on y)
    for j in range(nv):
        if math.isfinite(lo[j]):
            shift[j] = lo[j]
            cols.append([(ncol, 1.0)])
            if math.isfinite(hi[j]):
                extra_rows.append((ncol, hi[j] - lo[j]))
            ncol += 1
        elif math.isfinite(hi[j]):
            shift[j] = hi[j]
            cols.append([(ncol, -1.0)])
            ncol += 1
        else:
            cols.append([(ncol, 1.0), (ncol + 1, -1.0)])
            ncol += 2
    if np.any(hi - lo < -FEAS_TOL):
        return LpOutcome("infeasible", math.nan, np.full(nv, math.nan), names)

    m = m0 + len(extra_rows)
    As = np.zeros((m, ncol))
    cs = np.zeros(ncol)
    for j, parts in enumerate(cols):
        for col, sign in parts:
            As[:m0, col] = sign * A[:, j]
            cs[col] = sign * c[j]
    bs = np.empty(m)
    bs[:m0] = b - A @ shift
    for i, (col, ub) in enumerate(extra_rows):
        As[m0 + i, col] = 1.0
        bs[m0 + i] = ub

    if np.all(cs >= 0.0):
        # the all-slack basis is dual feasible: no phase 1 needed
        N = ncol + m
        full = np.zeros((m, N))
        full[:, :ncol] = As
        full[np.arange(m), ncol + np.arange(m)] = 1.0
        limit = max_iter if max_iter is not None else 50 * (m + N) + 1000
        tab = _Tableau(full, bs, list(ncol + np.arange(m)))
        cost = np.zeros(N)
        cost[:ncol] = cs
        tab.set_costs(cost)
        if tab.run_dual(np.ones(N, dtype=bool), limit, slice(ncol, N)) == "infeasible":
            return LpOutcome("infeasible", math.nan, np.full(nv, math.nan), names, tab.iterations)
        return _finish(full, bs, tab, N, shift, cols, A, b, c, lo, hi, names)

    # Slacks make every row an equality; rows with negative rhs are negated
    # and get an artificial variable.
    neg = bs < 0
    n_art = int(neg.sum())
    N = ncol + m + n_art
    full = np.zeros((m, N))
    full[:, :ncol] = As
    full[np.arange(m), ncol + np.arange(m)] = 1.0
    rhs = bs.copy()
    full[neg] *= -1.0
    rhs[neg] *= -1.0
    basis = list(ncol + np.arange(m))
    art_rows = np.flatnonzero(neg)
    for a, i in enumerate(art_rows):
        full[i, ncol + m + a] = 1.0
        basis[i] = ncol + m + a

    limit = max_iter if max_iter is not None else 50 * (m + N) + 1000
    tab = _Tableau(full, rhs, basis)
    n_real = ncol + m
    allowed = np.ones(N, dtype=bool)

    if n_art:
        phase1 = np.zeros(N)
        phase1[n_real:] = 1.0
        tab.set_costs(phase1)
        tab.run(allowed, limit)
        infeas = -tab.T[m, -1]
        if infeas > FEAS_TOL * max(1.0, np.abs(rhs).max()):
            return LpOutcome("infeasible", math.nan, np.full(nv, math.nan), names, tab.iterations)
        # drive remaining artificials out of the basis
        for r in range(m):
            if tab.basis[r] >= n_real:
                row = tab.T[r, :n_real]
                nz = np.flatnonzero(np.abs(row) > PIVOT_TOL)
                if nz.size:
                    tab.pivot(r, int(nz[0]))
        allowed[n_real:] = False

    cost = np.zeros(N)
    cost[:ncol] = cs
    tab.set_costs(cost)
    status = tab.run(allowed, limit)
    if status == "unbounded":
        return LpOutcome("unbounded", -math.inf, np.full(nv, math.nan), names, tab.iterations)

    return _finish(full, rhs, tab, N, shift, cols, A, b, c, lo, hi, names)


def _finish(full, rhs, tab, N, shift, cols, A, b, c, lo, hi, names) -> LpOutcome:
    """Map the final basis back onto the original variables and check it."""
    y = _polish(full, rhs, tab, N)
    v = shift.copy()
    for j, parts in enumerate(cols):
        for col, sign in parts:
            v[j] += sign * y[col]
    _verify(A, b, lo, hi, v)
    value = float(c @ v)
    return LpOutcome("optimal", value, v, names, tab.iterations)


def _polish(full, rhs, tab: _Tableau, N) -> NDArray:
    """Basic solution recomputed from the original columns of the final basis."""
    m = full.shape[0]
    basis = tab.basis
    y = np.zeros(N)
    keep = [r for r in range(m) if basis[r] < N]
    B = full[:, [basis[r] for r in keep]]
    try:
        sol = np.linalg.solve(B, rhs) if B.shape[0] == B.shape[1] else np.linalg.lstsq(B, rhs, rcond=None)[0]
    except np.linalg.LinAlgError:
        sol = tab.T[keep, -1]
    tableau_vals = tab.T[keep, -1]
    # fall back to the tableau if the refit is not an improvement
    if not np.all(np.isfinite(sol)) or np.abs(sol - tableau_vals).max(initial=0.0) > 1e-6:
        sol = tableau_vals
    for r, val in zip(keep, sol):
        y[basis[r]] = max(val, 0.0)
    return y


def _verify(A, b, lo, hi, v) -> None:
    slack = A @ v - b
    if slack.size and slack.max() > FEAS_TOL:
        raise LPNumericalError(f"constraint violated by {slack.max():.3e}")
    if np.any(v < lo - FEAS_TOL) or np.any(v > hi + FEAS_TOL):
        raise LPNumericalError("bound violated")
