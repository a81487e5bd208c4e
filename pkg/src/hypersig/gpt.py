"""Generic GPT objects: systems, measurements, correlations.

States and normalized effects are :class:`RatMatrix` values; the outcome
probability is the trace rule ``Tr[E^T W]``.  A measurement is a probability
vector over normalized effects that sums to the unit effect.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from gmpy2 import mpq

from .exact import RatMatrix, as_rational, format_rational, parse_rational
from .lp import HPolytope, LpProblem, OPTIMAL, lp_solve

_MPQ0 = mpq(0)
_MPQ1 = mpq(1)


class ModelInconsistencyError(ValueError):
    """A state/effect pairing produced a negative probability."""


def probability(effect: RatMatrix, state: RatMatrix) -> Fraction:
    """Trace rule ``Tr[effect^T state]``."""
    if effect.shape != state.shape:
        raise ValueError(f"effect {effect.shape} and state {state.shape} do not match")
    return effect.pairing(state)


def tensor_state(left: RatMatrix, right: RatMatrix) -> RatMatrix:
    """``left (x) right^T`` for column vectors: the 3x3 product-state matrix."""
    return _outer(left, right)


def tensor_effect(left: RatMatrix, right: RatMatrix) -> RatMatrix:
    return _outer(left, right)


def _outer(u: RatMatrix, v: RatMatrix) -> RatMatrix:
    a, b = u.flat(), v.flat()
    return RatMatrix(len(a), len(b), (x * y for x in a for y in b))


@dataclass(frozen=True)
class SystemSpec:
    """A finite GPT system.

    ``channels`` holds objects with ``apply_state`` / ``apply_effect`` methods
    (the reversible dynamics).  :meth:`validate` checks normalization,
    positivity and that every channel permutes the extremal states.
    """

    linear_dim: int
    extremal_states: tuple
    extremal_effects: tuple
    unit_effect: RatMatrix
    channels: tuple = ()
    name: str = ""

    def validate(self) -> None:
        for k, w in enumerate(self.extremal_states):
            if probability(self.unit_effect, w) != 1:
                raise ValueError(f"state {k} is not normalized")
        for i, w in enumerate(self.extremal_states):
            for j, e in enumerate(self.extremal_effects):
                if probability(e, w) < 0:
                    raise ModelInconsistencyError(f"Tr[E_{j}^T W_{i}] < 0")
        states = set(self.extremal_states)
        for c in self.channels:
            image = {c.apply_state(w) for w in self.extremal_states}
            if image != states:
                raise ValueError(f"channel {c} does not permute the extremal states")


@dataclass(frozen=True)
class Measurement:
    """Weights over normalized effects with ``sum(w_y E_y) == unit``.

    ``indices`` records positions in a system's effect list when the
    measurement came from one; explicit-matrix measurements leave it ``None``.
    """

    weights: tuple
    effects: tuple
    indices: Optional[tuple] = None

    def __post_init__(self):
        w = tuple(as_rational(v) for v in self.weights)
        if len(w) != len(self.effects):
            raise ValueError("one weight per effect is required")
        if any(v <= 0 for v in w):
            raise ValueError("measurement weights must be strictly positive")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "effects", tuple(self.effects))
        if self.indices is not None:
            object.__setattr__(self, "indices", tuple(self.indices))

    @classmethod
    def from_indices(cls, system: SystemSpec, indices: Sequence[int], weights: Sequence) -> "Measurement":
        return cls(tuple(weights), tuple(system.extremal_effects[i] for i in indices), tuple(indices))

    def __len__(self):
        return len(self.weights)

    def total(self) -> RatMatrix:
        acc = None
        for w, e in zip(self.weights, self.effects):
            term = e.scale(w)
            acc = term if acc is None else acc + term
        return acc

    def is_normalized(self, unit: RatMatrix) -> bool:
        return self.total() == unit

    def to_json(self) -> dict:
        if self.indices is None:
            raise ValueError("only indexed measurements have a JSON form")
        return {"effects": list(self.indices), "weights": [format_rational(w) for w in self.weights]}

    @classmethod
    def from_json(cls, data: dict, system: SystemSpec) -> "Measurement":
        try:
            idx = [int(i) for i in data["effects"]]
            weights = [parse_rational(w) for w in data["weights"]]
        except (KeyError, TypeError) as exc:
            raise ValueError("measurement JSON needs 'effects' and 'weights'") from exc
        return cls.from_indices(system, idx, weights)


@dataclass(frozen=True)
class CorrelationMatrix:
    """Row-stochastic ``m x n`` matrix of conditional probabilities ``p(y|x)``."""

    rows: tuple

    def __post_init__(self):
        rows = tuple(tuple(as_rational(v) for v in r) for r in self.rows)
        if not rows or not rows[0]:
            raise ValueError("a correlation needs at least one row and one column")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ValueError("ragged correlation matrix")
        for x, r in enumerate(rows):
            if any(v < 0 for v in r):
                raise ValueError(f"row {x} has a negative entry")
            if sum(r) != 1:
                raise ValueError(f"row {x} sums to {format_rational(sum(r))}, not 1")
        object.__setattr__(self, "rows", rows)

    @property
    def m(self) -> int:
        return len(self.rows)

    @property
    def n(self) -> int:
        return len(self.rows[0])

    def __getitem__(self, idx):
        x, y = idx
        return self.rows[x][y]

    def nonzero_columns(self) -> list[int]:
        return [y for y in range(self.n) if any(r[y] for r in self.rows)]

    def to_json(self) -> dict:
        return {"m": self.m, "n": self.n,
                "rows": [[format_rational(v) for v in r] for r in self.rows]}

    @classmethod
    def from_json(cls, data) -> "CorrelationMatrix":
        if not isinstance(data, dict) or not isinstance(data.get("rows"), list):
            raise ValueError("correlation JSON needs a 'rows' array")
        rows = data["rows"]
        if not all(isinstance(r, list) for r in rows):
            raise ValueError("'rows' must be an array of arrays")
        out = cls(tuple(tuple(parse_rational(v) for v in r) for r in rows))
        if ("m" in data and data["m"] != out.m) or ("n" in data and data["n"] != out.n):
            raise ValueError("declared m/n do not match the rows")
        return out

    @classmethod
    def identity(cls, n: int) -> "CorrelationMatrix":
        return cls(tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)))


def correlation(states: Sequence[RatMatrix], meas: Measurement,
                unit: Optional[RatMatrix] = None) -> CorrelationMatrix:
    """``p(y|x) = w_y Tr[E_y^T W_x]`` for each encoding state ``W_x``."""
    if unit is not None:
        for x, w in enumerate(states):
            if probability(unit, w) != 1:
                raise ValueError(f"state {x} is not normalized")
    rows = []
    for x, w in enumerate(states):
        row = []
        for y, (wt, e) in enumerate(zip(meas.weights, meas.effects)):
            v = wt * probability(e, w)
            if v < 0:
                raise ModelInconsistencyError(f"negative probability p({y}|{x}) = {format_rational(v)}")
            row.append(v)
        rows.append(row)
    return CorrelationMatrix(tuple(tuple(r) for r in rows))


def measurement_supported(effects: Sequence[RatMatrix], unit: RatMatrix) -> bool:
    """True iff some strictly positive ``p`` has ``sum(p_y E_y) == unit``.

    Solved as ``max t`` subject to ``p_y >= t``, ``t <= 1`` and the linear
    normalization; support holds exactly when the optimum is positive.
    """
    n = len(effects)
    if n == 0:
        return False
    dim = n + 1
    ineq = []
    for y in range(n):
        a = [0] * dim
        a[y], a[n] = 1, -1
        ineq.append((a, 0))
    ineq.append(([0] * n + [-1], -1))
    eq = []
    for k in range(len(unit.flat())):
        eq.append(([e.flat()[k] for e in effects] + [0], unit.flat()[k]))
    res = lp_solve(LpProblem([0] * n + [1], HPolytope(dim, ineq, eq), "max"))
    return res.status == OPTIMAL and res.value > 0


# -- extremal measurement enumeration ------------------------------------

def _to_fraction(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


class _SubsetScanner:
    """Depth-first scan over effect subsets in increasing index order.

    Along the current path it keeps an echelon basis of the chosen effects,
    each basis vector's expansion in those effects, and the unit effect's
    residual against the basis together with the accumulated coefficients.
    A dependent effect prunes the whole subtree (supersets stay dependent).
    Once the residual vanishes the unit decomposition is unique and every
    superset would give the new effects weight 0, so that subtree is pruned
    too.  Arithmetic is exact (gmpy2 rationals).
    """

    def __init__(self, effects, unit, n_min, n_max):
        self.vecs = [[mpq(v.numerator, v.denominator) for v in e] for e in effects]
        self.unit = [mpq(v.numerator, v.denominator) for v in unit]
        self.n_min = n_min
        self.n_max = n_max

    def run(self, first_indices) -> list:
        found = []
        for i in first_indices:
            self._extend([], [i], self.unit, [], found)
        return found

    def _extend(self, basis, chosen, residual, coef, found):
        k = len(chosen) - 1
        v = list(self.vecs[chosen[-1]])
        combo = [_MPQ0] * k + [_MPQ1]
        for piv, b, cb in basis:
            f = v[piv]
            if f:
                v = [x - f * y for x, y in zip(v, b)]
                for t, c in enumerate(cb):
                    if c:
                        combo[t] -= f * c
        piv = next((i for i, x in enumerate(v) if x), None)
        if piv is None:
            return
        inv = 1 / v[piv]
        v = [x * inv for x in v]
        combo = [c * inv for c in combo]
        coef = coef + [_MPQ0]
        f = residual[piv]
        if f:
            residual = [x - f * y for x, y in zip(residual, v)]
            coef = [w + f * c for w, c in zip(coef, combo)]
        if not any(residual):
            if len(chosen) >= self.n_min and all(w > 0 for w in coef):
                found.append((tuple(chosen), tuple(coef)))
            return
        if len(chosen) < self.n_max:
            basis = basis + [(piv, v, combo)]
            for j in range(chosen[-1] + 1, len(self.vecs)):
                chosen.append(j)
                self._extend(basis, chosen, residual, coef, found)
                chosen.pop()


def _scan_chunk(args):
    effects, unit, n_min, n_max, firsts = args
    found = _SubsetScanner(effects, unit, n_min, n_max).run(firsts)
    return [(sub, tuple(_to_fraction(w) for w in ws)) for sub, ws in found]


def enumerate_extremal_measurements(sys: SystemSpec, n_min: int = 2, n_max: Optional[int] = None,
                                    effect_indices: Optional[Sequence[int]] = None,
                                    workers: int = 1) -> list[Measurement]:
    """Every extremal measurement supported on extremal normalized effects.

    A subset qualifies when its effects are linearly independent and the
    unit effect decomposes over them with strictly positive weights (the
    decomposition is then unique).  Results are sorted by outcome count and
    then by effect indices, independent of ``workers``.
    """
    if n_max is None:
        n_max = sys.linear_dim
    if n_max > sys.linear_dim:
        raise ValueError(f"n_max={n_max} exceeds the linear dimension {sys.linear_dim}")
    pool = list(range(len(sys.extremal_effects))) if effect_indices is None else sorted(effect_indices)
    effects = [sys.extremal_effects[i].flat() for i in pool]
    unit = sys.unit_effect.flat()

    firsts = list(range(len(pool)))
    if workers <= 1:
        found = _scan_chunk((effects, unit, n_min, n_max, firsts))
    else:
        chunks = [firsts[w::workers] for w in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = ex.map(_scan_chunk, [(effects, unit, n_min, n_max, c) for c in chunks])
            found = [item for part in parts for item in part]

    out = []
    for sub, weights in found:
        meas = Measurement.from_indices(sys, [pool[j] for j in sub], weights)
        if not meas.is_normalized(sys.unit_effect):
            raise ArithmeticError(f"weights for {meas.indices} do not reproduce the unit effect")
        out.append(meas)
    out.sort(key=lambda m: (len(m), m.indices))
    return out
