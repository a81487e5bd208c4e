"""The classical correlation polytope C(m, n, d).

C(m, n, d) holds the m-input/n-output conditional distributions obtainable
by sending one d-level classical message with shared randomness.  Its
vertices are the deterministic maps x -> y that use at most d distinct
outputs, i.e. 0/1 row-stochastic matrices with at most d non-zero columns.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Iterator, Optional, Sequence

from .exact import as_rational, binomial, format_rational, parse_rational, primitive, stirling2
from .gpt import CorrelationMatrix
from .lp import HPolytope, LpProblem, OPTIMAL, Tableau, lp_solve

_ZERO = Fraction(0)


@dataclass(frozen=True)
class VertexDescriptor:
    """A deterministic strategy: row ``x`` is sent to column ``assignment[x]``."""

    assignment: tuple
    n: int

    @property
    def column_set(self) -> tuple:
        return tuple(sorted(set(self.assignment)))

    def to_correlation(self) -> CorrelationMatrix:
        return CorrelationMatrix(tuple(tuple(1 if y == a else 0 for y in range(self.n))
                                       for a in self.assignment))

    def flat(self) -> list[int]:
        out = [0] * (len(self.assignment) * self.n)
        for x, y in enumerate(self.assignment):
            out[x * self.n + y] = 1
        return out

    def to_json(self) -> dict:
        return {"assignment": list(self.assignment), "column_set": list(self.column_set)}


@dataclass(frozen=True)
class GameMatrix:
    """Payoff ``g[x][y]`` for input x and output y; any rational entries."""

    rows: tuple

    def __post_init__(self):
        rows = tuple(tuple(as_rational(v) for v in r) for r in self.rows)
        if not rows or not rows[0] or any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("a game must be a non-empty rectangular matrix")
        object.__setattr__(self, "rows", rows)

    @property
    def m(self) -> int:
        return len(self.rows)

    @property
    def n(self) -> int:
        return len(self.rows[0])

    def scaled(self, factor) -> "GameMatrix":
        f = as_rational(factor)
        return GameMatrix(tuple(tuple(f * v for v in r) for r in self.rows))

    def to_json(self) -> dict:
        return {"m": self.m, "n": self.n, "rows": [[format_rational(v) for v in r] for r in self.rows]}

    @classmethod
    def from_json(cls, data) -> "GameMatrix":
        if not isinstance(data, dict) or not isinstance(data.get("rows"), list):
            raise ValueError("game JSON needs a 'rows' array")
        if not all(isinstance(r, list) for r in data["rows"]):
            raise ValueError("'rows' must be an array of arrays")
        return cls(tuple(tuple(parse_rational(v) for v in r) for r in data["rows"]))


def vertex_count(m: int, n: int, d: int) -> int:
    """Number of vertices: ``sum_k k! C(n, k) S(m, k)`` for ``k <= min(d, m, n)``."""
    if min(m, n, d) < 1:
        raise ValueError("m, n and d must all be at least 1")
    return sum(factorial(k) * binomial(n, k) * stirling2(m, k) for k in range(1, min(d, m, n) + 1))


def column_sets(n: int, d: int) -> list[tuple]:
    """Non-empty column subsets of size at most d, in lexicographic order."""
    sets = [c for k in range(1, min(d, n) + 1) for c in itertools.combinations(range(n), k)]
    return sorted(sets)


def vertices_iter(m: int, n: int, d: int, part: Optional[tuple[int, int]] = None) -> Iterator[VertexDescriptor]:
    """Stream every vertex exactly once.

    Order is by column set (lexicographic), then by assignment.  ``part=(i,
    k)`` restricts the stream to the column sets whose position is ``i``
    modulo ``k``, so k consumers together see every vertex once.
    """
    if min(m, n, d) < 1:
        raise ValueError("m, n and d must all be at least 1")
    for pos, cols in enumerate(column_sets(n, min(d, m))):
        if part is not None and pos % part[1] != part[0]:
            continue
        need = len(cols)
        for assignment in itertools.product(cols, repeat=m):
            if len(set(assignment)) == need:
                yield VertexDescriptor(assignment, n)


def is_vertex(p: CorrelationMatrix, d: int) -> bool:
    if any(v not in (0, 1) for r in p.rows for v in r):
        return False
    return len(p.nonzero_columns()) <= d


def _as_game(g) -> GameMatrix:
    return g if isinstance(g, GameMatrix) else GameMatrix(tuple(tuple(r) for r in g))


def payoff(g, p: CorrelationMatrix) -> Fraction:
    """``sum_{x,y} g[x][y] p(y|x)``."""
    g = _as_game(g)
    if (g.m, g.n) != (p.m, p.n):
        raise ValueError(f"game is {g.m}x{g.n} but correlation is {p.m}x{p.n}")
    return sum((a * b for gr, pr in zip(g.rows, p.rows) for a, b in zip(gr, pr)), _ZERO)


def game_max(g, d: int) -> tuple[Fraction, VertexDescriptor]:
    """Maximum payoff over C(m, n, d) and a vertex attaining it.

    Only column subsets of size ``min(d, n)`` are scanned: enlarging the
    subset can only raise each row maximum.  Ties go to the first subset in
    lexicographic order and, within a row, to the smallest column.
    """
    g = _as_game(g)
    best = None
    best_assign = None
    for cols in itertools.combinations(range(g.n), min(d, g.n)):
        total = _ZERO
        assign = []
        for row in g.rows:
            y = max(cols, key=lambda c: (row[c], -c))
            assign.append(y)
            total += row[y]
        if best is None or total > best:
            best, best_assign = total, tuple(assign)
    return best, VertexDescriptor(best_assign, g.n)


def game_max_bruteforce(g, d: int) -> Fraction:
    """Maximum payoff by scanning every vertex of C(m, n, d)."""
    g = _as_game(g)
    den = 1
    for r in g.rows:
        for v in r:
            den = den * v.denominator // _gcd(den, v.denominator)
    ig = [[int(v * den) for v in r] for r in g.rows]
    best = None
    for vert in vertices_iter(g.m, g.n, d):
        s = 0
        for row, y in zip(ig, vert.assignment):
            s += row[y]
        if best is None or s > best:
            best = s
    return Fraction(best, den)


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


# -- membership --------------------------------------------------------------

@dataclass
class MembershipCertificate:
    """Inside: convex weights on vertices.  Outside: a game with a strict payoff gap."""

    verdict: str
    m: int
    n: int
    d: int
    weights: Optional[list] = None          # [(VertexDescriptor, Fraction)]
    game: Optional[GameMatrix] = None
    payoff: Optional[Fraction] = None       # g . p
    classical_max: Optional[Fraction] = None
    iterations: int = 0

    @property
    def inside(self) -> bool:
        return self.verdict == "inside"

    def verify(self, p: CorrelationMatrix) -> bool:
        """Re-check the certificate from scratch against ``p``."""
        if (p.m, p.n) != (self.m, self.n):
            return False
        if self.inside:
            if not self.weights or any(w <= 0 for _, w in self.weights):
                return False
            if sum(w for _, w in self.weights) != 1:
                return False
            if any(len(v.column_set) > self.d for v, _ in self.weights):
                return False
            acc = [[_ZERO] * self.n for _ in range(self.m)]
            for v, w in self.weights:
                for x, y in enumerate(v.assignment):
                    acc[x][y] += w
            return tuple(tuple(r) for r in acc) == p.rows
        value = payoff(self.game, p)
        cmax = game_max_bruteforce(self.game, self.d) if vertex_count(self.m, self.n, self.d) <= 5000 \
            else game_max(self.game, self.d)[0]
        return value == self.payoff and cmax == self.classical_max and value > cmax

    def to_json(self) -> dict:
        out = {"verdict": self.verdict, "m": self.m, "n": self.n, "d": self.d}
        if self.inside:
            out["weights"] = [{"vertex": v.to_json(), "weight": format_rational(w)} for v, w in self.weights]
        else:
            out["game"] = self.game.to_json()
            out["payoff"] = format_rational(self.payoff)
            out["classical_max"] = format_rational(self.classical_max)
        return out


def _initial_vertex(p: CorrelationMatrix, d: int) -> VertexDescriptor:
    mass = [sum(r[y] for r in p.rows) for y in range(p.n)]
    cols = sorted(sorted(range(p.n), key=lambda y: (-mass[y], y))[:min(d, p.n)])
    assign = tuple(max(cols, key=lambda c: (row[c], -c)) for row in p.rows)
    return VertexDescriptor(assign, p.n)


def _normalized_game(y: Sequence[Fraction], m: int, n: int) -> GameMatrix:
    ints = primitive(y)
    return GameMatrix(tuple(tuple(ints[x * n:(x + 1) * n]) for x in range(m)))


def membership(p: CorrelationMatrix, d: int, max_iter: int = 100000) -> MembershipCertificate:
    """Decide ``p in C(m, n, d)`` exactly, returning a checkable certificate.

    Column generation on ``min sum(s+ + s-) + a`` subject to
    ``sum_v lam_v V_v + s+ - s- = p`` and ``sum_v lam_v + a = 1``.  Pricing is
    :func:`game_max` on the dual matrix.  A zero optimum gives the convex
    weights; otherwise the duals form a game separating ``p`` from the polytope.
    """
    if d < 1:
        raise ValueError("d must be at least 1")
    m, n = p.m, p.n
    mn = m * n
    if d >= min(m, n):
        # every deterministic map is a vertex; read off a decomposition directly
        return _inside_by_product(p, d)

    b = [v for r in p.rows for v in r] + [Fraction(1)]
    A = []
    for k in range(mn + 1):
        row = []
        if k < mn:
            row += [1 if j == k else 0 for j in range(mn)]     # s+
            row += [-1 if j == k else 0 for j in range(mn)]    # s-
            row += [0]                                          # a
        else:
            row += [0] * (2 * mn) + [1]
        A.append(row)
    costs = [1] * (2 * mn + 1)
    tab = Tableau(A, b, costs)
    first_vertex_col = tab.ncols
    columns: dict = {}

    def add_vertex(v: VertexDescriptor):
        if v.assignment in columns:
            raise ArithmeticError("pricing returned a column already in the master problem")
        columns[v.assignment] = tab.add_column(v.flat() + [1], 0)

    add_vertex(_initial_vertex(p, d))
    tab.reoptimize()
    it = 0
    while True:
        it += 1
        if it > max_iter:
            raise RuntimeError("column generation did not converge")
        duals = tab.duals()
        y, mu = duals[:mn], duals[mn]
        g = GameMatrix(tuple(tuple(y[x * n:(x + 1) * n]) for x in range(m)))
        best, vert = game_max(g, d)
        if best + mu <= 0:
            break
        add_vertex(vert)
        tab.reoptimize()

    if tab.value() == 0:
        z = tab.solution()
        verts = {col: assignment for assignment, col in columns.items()}
        weights = []
        for col in sorted(verts):
            w = z[col - tab.m]
            if w > 0:
                weights.append((VertexDescriptor(verts[col], n), w))
        return MembershipCertificate("inside", m, n, d, weights=weights, iterations=it)

    game = _normalized_game(y, m, n)
    value = payoff(game, p)
    cmax, _ = game_max(game, d)
    if not value > cmax:
        raise ArithmeticError("separating game does not separate")
    return MembershipCertificate("outside", m, n, d, game=game, payoff=value,
                                 classical_max=cmax, iterations=it)


def _inside_by_product(p: CorrelationMatrix, d: int) -> MembershipCertificate:
    """Decompose when every deterministic map is a vertex.

    Repeatedly peel off the map that sends each row to its first remaining
    positive entry, with weight equal to the smallest of those entries.
    """
    m, n = p.m, p.n
    rest = [list(r) for r in p.rows]
    left = Fraction(1)
    weights = []
    while left > 0:
        assign = tuple(next(y for y in range(n) if r[y] > 0) for r in rest)
        w = min(rest[x][y] for x, y in enumerate(assign))
        for x, y in enumerate(assign):
            rest[x][y] -= w
        left -= w
        weights.append((VertexDescriptor(assign, n), w))
    return MembershipCertificate("inside", m, n, d, weights=weights)


def membership_by_enumeration(p: CorrelationMatrix, d: int) -> bool:
    """Membership by one LP over the complete vertex list (small instances only)."""
    verts = list(vertices_iter(p.m, p.n, d))
    k = len(verts)
    ineq = [([1 if j == i else 0 for j in range(k)], 0) for i in range(k)]
    eq = []
    for x in range(p.m):
        for yy in range(p.n):
            eq.append(([1 if v.assignment[x] == yy else 0 for v in verts], p.rows[x][yy]))
    eq.append(([1] * k, 1))
    res = lp_solve(LpProblem([0] * k, HPolytope(k, ineq, eq), "max"))
    return res.status == OPTIMAL


def random_vertex(m: int, n: int, d: int, rng: random.Random) -> VertexDescriptor:
    """A vertex drawn by choosing ``min(d, n)`` columns, then one of them per row."""
    cols = sorted(rng.sample(range(n), min(d, n)))
    return VertexDescriptor(tuple(rng.choice(cols) for _ in range(m)), n)


def random_inside_point(m: int, n: int, d: int, k: int, rng: random.Random,
                        max_weight: int = 20) -> tuple[CorrelationMatrix, list]:
    """A convex combination of ``k`` random vertices with random positive rational weights."""
    verts = [random_vertex(m, n, d, rng) for _ in range(k)]
    raw = [rng.randint(1, max_weight) for _ in range(k)]
    total = sum(raw)
    weights = [Fraction(w, total) for w in raw]
    acc = [[_ZERO] * n for _ in range(m)]
    for v, w in zip(verts, weights):
        for x, y in enumerate(v.assignment):
            acc[x][y] += w
    return CorrelationMatrix(tuple(tuple(r) for r in acc)), list(zip(verts, weights))
