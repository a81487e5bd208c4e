"""Exact linear programming over the rationals.

The engine is a dense two-phase tableau simplex.  Arithmetic is exact
(gmpy2 rationals inside, Fractions at the interface), so the only way to
fail to terminate is cycling.  Entering columns follow the most negative
reduced cost until a run of degenerate pivots, after which Bland's rule
takes over and rules cycling out.

:class:`Tableau` is exposed because column generation needs to add columns
to a live basis without re-solving from scratch.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from gmpy2 import mpq

from .exact import as_rational

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_ZERO = Fraction(0)
_Q0 = mpq(0)
_Q1 = mpq(1)


def _q(v) -> mpq:
    v = as_rational(v)
    return mpq(v.numerator, v.denominator)


def _f(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


@dataclass(frozen=True)
class HPolytope:
    """``{x : <a, x> >= b for (a, b) in inequalities, <a, x> == b for (a, b) in equalities}``."""

    ambient_dim: int
    inequalities: tuple = ()
    equalities: tuple = ()

    def __post_init__(self):
        ineq = tuple((tuple(as_rational(v) for v in a), as_rational(b)) for a, b in self.inequalities)
        eq = tuple((tuple(as_rational(v) for v in a), as_rational(b)) for a, b in self.equalities)
        for a, _ in ineq + eq:
            if len(a) != self.ambient_dim:
                raise ValueError(f"normal of length {len(a)} in a {self.ambient_dim}-dimensional polytope")
        object.__setattr__(self, "inequalities", ineq)
        object.__setattr__(self, "equalities", eq)

    def contains(self, x: Sequence) -> bool:
        x = [as_rational(v) for v in x]
        return (all(_dot(a, x) >= b for a, b in self.inequalities)
                and all(_dot(a, x) == b for a, b in self.equalities))


@dataclass(frozen=True)
class LpProblem:
    objective: tuple
    constraints: HPolytope
    sense: str = "max"

    def __post_init__(self):
        obj = tuple(as_rational(v) for v in self.objective)
        if len(obj) != self.constraints.ambient_dim:
            raise ValueError("objective length does not match the constraint dimension")
        if self.sense not in ("max", "min"):
            raise ValueError(f"sense must be 'max' or 'min', got {self.sense!r}")
        object.__setattr__(self, "objective", obj)


@dataclass
class LpResult:
    """Outcome of :func:`lp_solve`.

    ``duals`` holds one multiplier per inequality followed by one per
    equality.  At an optimum ``sum(y_i a_i) == objective`` and
    ``sum(y_i b_i) == value``; inequality multipliers are >= 0 when
    minimizing and <= 0 when maximizing.  ``ray`` is a Farkas multiplier
    vector (same layout) when infeasible, or an improving primal direction
    when unbounded.
    """

    status: str
    value: Optional[Fraction] = None
    primal: Optional[list] = None
    duals: Optional[list] = None
    ray: Optional[list] = None


def _dot(a, x) -> Fraction:
    return sum((p * q for p, q in zip(a, x)), _ZERO)


class Tableau:
    """Standard-form simplex tableau: minimize ``c.z`` s.t. ``A z = b, z >= 0``.

    One artificial column per row is kept at indices ``0..m-1`` for the whole
    life of the tableau, which gives ``B^-1`` for free; structural columns
    follow from index ``m`` on.  Artificials never re-enter after phase 1.
    Entries are gmpy2 rationals internally; every accessor returns Fractions.
    """

    DEGENERATE_LIMIT = 10

    def __init__(self, A: Sequence[Sequence], b: Sequence, c: Sequence):
        m = len(b)
        self.m = m
        b = [_q(v) for v in b]
        self.sign = [(-1 if bi < 0 else 1) for bi in b]
        self.rows = []
        for i in range(m):
            s = self.sign[i]
            art = [_Q0] * m
            art[i] = _Q1
            self.rows.append(art + [s * _q(v) for v in A[i]] + [s * b[i]])
        self.costs = [_Q0] * m + [_q(v) for v in c]
        self.basis = list(range(m))
        self.status = None
        self.iterations = 0
        self._phase1()

    @property
    def ncols(self) -> int:
        return len(self.costs)

    def _objective_row(self, costs):
        obj = list(costs) + [_Q0]
        for i, bv in enumerate(self.basis):
            cb = costs[bv]
            if cb:
                row = self.rows[i]
                obj = [o - cb * r for o, r in zip(obj, row)]
        return obj

    def _pivot(self, r: int, col: int):
        row = self.rows[r]
        piv = row[col]
        if piv != 1:
            row = [v / piv for v in row]
            self.rows[r] = row
        nz = [j for j, v in enumerate(row) if v]
        for i in range(self.m):
            if i != r:
                target = self.rows[i]
                f = target[col]
                if f:
                    for j in nz:
                        target[j] -= f * row[j]
        f = self.obj[col]
        if f:
            obj = self.obj
            for j in nz:
                obj[j] -= f * row[j]
        self.basis[r] = col
        self.iterations += 1

    def _iterate(self, first_allowed: int) -> Optional[int]:
        """Pivot to optimality; return an unbounded column, or None at optimality.

        The most negative reduced cost enters until ``DEGENERATE_LIMIT``
        degenerate pivots occur in a row; from then on Bland's rule is used,
        which cannot cycle.
        """
        bland = False
        stalled = 0
        while True:
            enter = None
            obj = self.obj
            if bland:
                for j in range(first_allowed, self.ncols):
                    if obj[j] < 0:
                        enter = j
                        break
            else:
                low = _Q0
                for j in range(first_allowed, self.ncols):
                    if obj[j] < low:
                        low, enter = obj[j], j
            if enter is None:
                return None
            leave = None
            best = None
            for i in range(self.m):
                a = self.rows[i][enter]
                if a > 0:
                    ratio = self.rows[i][-1] / a
                    if (best is None or ratio < best
                            or (ratio == best and self.basis[i] < self.basis[leave])):
                        best, leave = ratio, i
            if leave is None:
                return enter
            if best == 0:
                stalled += 1
                if stalled >= self.DEGENERATE_LIMIT:
                    bland = True
            else:
                stalled = 0
            self._pivot(leave, enter)

    def _phase1(self):
        m = self.m
        phase1_costs = [_Q1] * m + [_Q0] * (self.ncols - m)
        self.obj = self._objective_row(phase1_costs)
        self._iterate(m)
        infeas = -self.obj[-1]
        if infeas > 0:
            self.status = INFEASIBLE
            # phase-1 duals are a Farkas certificate: y.b > 0, y.A <= 0
            self.farkas = [_f(self.sign[k] * (1 - self.obj[k])) for k in range(m)]
            return
        # drive zero-level artificials out of the basis where possible
        for i in range(m):
            if self.basis[i] < m:
                col = next((j for j in range(m, self.ncols) if self.rows[i][j] != 0), None)
                if col is not None:
                    self._pivot(i, col)
        self.obj = self._objective_row(self.costs)
        self.status = None
        self.reoptimize()

    def reoptimize(self) -> str:
        col = self._iterate(self.m)
        if col is None:
            self.status = OPTIMAL
            self.unbounded_column = None
        else:
            self.status = UNBOUNDED
            self.unbounded_column = col
        return self.status

    def add_column(self, a: Sequence, cost) -> int:
        """Append a structural column, keeping the current basis."""
        if self.status == INFEASIBLE:
            raise RuntimeError("cannot extend an infeasible tableau")
        nz = [(k, self.sign[k] * _q(v)) for k, v in enumerate(a) if v]
        cost = _q(cost)
        for row in self.rows:
            entry = _Q0
            for k, v in nz:
                entry += row[k] * v
            row.insert(len(row) - 1, entry)
        reduced = cost
        for k, v in nz:
            reduced += self.obj[k] * v  # obj[k] == -y_k
        self.obj.insert(len(self.obj) - 1, reduced)
        self.costs.append(cost)
        return self.ncols - 1

    def duals(self) -> list:
        """Dual multipliers ``y`` for the rows exactly as passed in (reduced costs are ``c - yA``)."""
        return [_f(-self.sign[k] * self.obj[k]) for k in range(self.m)]

    def value(self) -> Fraction:
        return _f(-self.obj[-1])

    def solution(self) -> list:
        """Values of the structural variables, in column order."""
        z = [_ZERO] * (self.ncols - self.m)
        for i, bv in enumerate(self.basis):
            if bv >= self.m:
                z[bv - self.m] = _f(self.rows[i][-1])
        return z

    def unbounded_direction(self) -> list:
        col = self.unbounded_column
        d = [_ZERO] * (self.ncols - self.m)
        d[col - self.m] = Fraction(1)
        for i, bv in enumerate(self.basis):
            if bv >= self.m:
                d[bv - self.m] = _f(-self.rows[i][col])
        return d


def lp_solve(problem: LpProblem) -> LpResult:
    """Optimize a linear objective over an :class:`HPolytope` with free variables."""
    poly = problem.constraints
    n = poly.ambient_dim
    cons = [(a, b, True) for a, b in poly.inequalities] + [(a, b, False) for a, b in poly.equalities]
    n_ineq = len(poly.inequalities)
    sgn = -1 if problem.sense == "max" else 1
    c = [sgn * v for v in problem.objective]

    # columns: x+ (n), x- (n), surplus (one per inequality)
    A, b = [], []
    for i, (a, rhs, is_ineq) in enumerate(cons):
        surplus = [_ZERO] * n_ineq
        if is_ineq:
            surplus[i] = -Fraction(1)
        A.append(list(a) + [-v for v in a] + surplus)
        b.append(rhs)
    costs = c + [-v for v in c] + [_ZERO] * n_ineq

    if not cons:
        if any(problem.objective):
            return LpResult(UNBOUNDED, ray=[-v for v in c])
        return LpResult(OPTIMAL, value=_ZERO, primal=[_ZERO] * n, duals=[])

    tab = Tableau(A, b, costs)
    if tab.status == INFEASIBLE:
        return LpResult(INFEASIBLE, ray=tab.farkas)
    if tab.status == UNBOUNDED:
        d = tab.unbounded_direction()
        return LpResult(UNBOUNDED, ray=[d[j] - d[n + j] for j in range(n)])
    z = tab.solution()
    x = [z[j] - z[n + j] for j in range(n)]
    y = tab.duals()
    if sgn < 0:
        y = [-v for v in y]
    value = _dot(problem.objective, x)
    return LpResult(OPTIMAL, value=value, primal=x, duals=y)
