"""The square-state system ("squit"), its bipartite composite and the toy models.

Conventions
-----------
Single-system states and normalized effects are 3x1 column vectors.  The
bipartite factorized state is ``W_{4i+j} = w_i w_j^T`` and the factorized
effect ``E_{4i+j} = e_i e_j^T``; indices 16..23 are the entangled ones.  A
product channel ``U1 (x) U2`` acts as ``M -> U1 M U2^T`` on states and on
effects alike (the U's are orthogonal), and the swap acts by transposition.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

from .exact import RatMatrix, format_rational
from .gpt import Measurement, SystemSpec, probability, tensor_effect, tensor_state
from .lp import HPolytope
from .vertex import enumerate_vertices

_COS = (1, 0, -1, 0)
_SIN = (0, 1, 0, -1)

ENTANGLED = tuple(range(16, 24))
FACTORIZED = tuple(range(16))


class ConstructionError(RuntimeError):
    """A hard-coded object disagrees with its independent derivation."""


@dataclass(frozen=True)
class ElementaryChannel:
    """``U_k^s``: rotation by ``k pi/2`` (s=+1) or the matching reflection (s=-1)."""

    k: int
    s: int

    @property
    def matrix(self) -> RatMatrix:
        return _elementary_matrix(self.k, self.s)

    def apply_state(self, w: RatMatrix) -> RatMatrix:
        return self.matrix @ w

    apply_effect = apply_state

    def __str__(self):
        return f"U{self.k}{'+' if self.s > 0 else '-'}"


@lru_cache(maxsize=None)
def _elementary_matrix(k: int, s: int) -> RatMatrix:
    c, sn = _COS[k], _SIN[k]
    return RatMatrix.from_rows([[c, -s * sn, 0], [sn, s * c, 0], [0, 0, 1]])


ELEMENTARY_CHANNELS = tuple(ElementaryChannel(k, s) for s in (1, -1) for k in range(4))


def elementary_lookup(U: RatMatrix) -> Optional[ElementaryChannel]:
    """The group element equal to ``U``, or None if ``U`` is not in the group."""
    for ch in ELEMENTARY_CHANNELS:
        if ch.matrix == U:
            return ch
    return None


def squit_states() -> tuple:
    return tuple(RatMatrix.column(v) for v in ((1, 0, 1), (0, 1, 1), (-1, 0, 1), (0, -1, 1)))


def squit_effects() -> tuple:
    return tuple(RatMatrix.column(v) for v in ((1, 1, 1), (-1, 1, 1), (-1, -1, 1), (1, -1, 1)))


UNIT = RatMatrix.column((0, 0, 1))


def build_elementary() -> SystemSpec:
    """The squit, with its states regenerated from ``w_0`` and ``e_0`` by rotations as a check."""
    states, effects = squit_states(), squit_effects()
    for x in range(4):
        rot = _elementary_matrix(x, 1)
        if rot @ states[0] != states[x] or rot @ effects[0] != effects[x]:
            raise ConstructionError(f"rotation U{x}+ does not generate state/effect {x}")
    sys = SystemSpec(3, states, effects, UNIT, ELEMENTARY_CHANNELS, name="squit")
    sys.validate()
    return sys


def squit_state_polytope() -> HPolytope:
    """States as the points with non-negative probability on every extremal effect."""
    return HPolytope(3, [(e.scale(Fraction(1, 2)).flat(), 0) for e in squit_effects()],
                     [(UNIT.flat(), 1)])


# -- bipartite system --------------------------------------------------------

def _half(rows):
    return RatMatrix.from_rows(rows).scale(Fraction(1, 2))


ENTANGLED_STATES = (
    _half([[-1, 1, 0], [1, 1, 0], [0, 0, 2]]),
    _half([[-1, -1, 0], [-1, 1, 0], [0, 0, 2]]),
    _half([[1, -1, 0], [-1, -1, 0], [0, 0, 2]]),
    _half([[1, 1, 0], [1, -1, 0], [0, 0, 2]]),
    _half([[-1, -1, 0], [1, -1, 0], [0, 0, 2]]),
    _half([[1, -1, 0], [1, 1, 0], [0, 0, 2]]),
    _half([[1, 1, 0], [-1, 1, 0], [0, 0, 2]]),
    _half([[-1, 1, 0], [-1, -1, 0], [0, 0, 2]]),
)

ENTANGLED_EFFECTS = tuple(RatMatrix.from_rows(r) for r in (
    [[-1, 1, 0], [1, 1, 0], [0, 0, 1]],
    [[-1, -1, 0], [-1, 1, 0], [0, 0, 1]],
    [[1, -1, 0], [-1, -1, 0], [0, 0, 1]],
    [[1, 1, 0], [1, -1, 0], [0, 0, 1]],
    [[-1, 1, 0], [-1, -1, 0], [0, 0, 1]],
    [[1, 1, 0], [-1, 1, 0], [0, 0, 1]],
    [[1, -1, 0], [1, 1, 0], [0, 0, 1]],
    [[-1, -1, 0], [1, -1, 0], [0, 0, 1]],
))

BIPARTITE_UNIT = tensor_effect(UNIT, UNIT)


def factorized_states() -> tuple:
    w = squit_states()
    return tuple(tensor_state(w[i], w[j]) for i in range(4) for j in range(4))


def factorized_effects() -> tuple:
    e = squit_effects()
    return tuple(tensor_effect(e[i], e[j]) for i in range(4) for j in range(4))


def bipartite_state_polytope() -> HPolytope:
    """Bipartite states compatible with every factorized effect (9 coordinates)."""
    return HPolytope(9, [(E.flat(), 0) for E in factorized_effects()],
                     [(BIPARTITE_UNIT.flat(), 1)])


def bipartite_effect_polytope() -> HPolytope:
    """Normalized bipartite effects non-negative on every factorized state."""
    return HPolytope(9, [(W.flat(), 0) for W in factorized_states()],
                     [(BIPARTITE_UNIT.flat(), 1)])


@lru_cache(maxsize=None)
def build_bipartite(check: bool = True) -> tuple[tuple, tuple]:
    """The 24 extremal bipartite states and the 24 extremal normalized effects.

    With ``check`` the listed entangled matrices are verified against their
    generation by single-system channels, and both lists are compared as sets
    with a double-description enumeration of the corresponding polytopes.
    """
    states = factorized_states() + ENTANGLED_STATES
    effects = factorized_effects() + ENTANGLED_EFFECTS
    if check:
        for k in range(4):
            rot, ref = _elementary_matrix(k, 1), _elementary_matrix(k, -1)
            if (states[16 + k] != states[16] @ rot.T or states[20 + k] != states[16] @ ref.T
                    or effects[16 + k] != rot @ effects[16] or effects[20 + k] != ref @ effects[16]):
                raise ConstructionError(f"entangled objects 16+{k}/20+{k} do not follow from W_16, E_16")
        derived_states = {RatMatrix(3, 3, v) for v in enumerate_vertices(bipartite_state_polytope())}
        derived_effects = {RatMatrix(3, 3, v) for v in enumerate_vertices(bipartite_effect_polytope())}
        if derived_states != set(states):
            raise ConstructionError("listed bipartite states differ from the enumerated vertices")
        if derived_effects != set(effects):
            raise ConstructionError("listed bipartite effects differ from the enumerated vertices")
    return states, effects


# -- reversible channels -------------------------------------------------------

@dataclass(frozen=True)
class BipartiteChannel:
    """``W^swap (U_left (x) U_right)`` with its induced index permutations."""

    swap: int
    left: ElementaryChannel
    right: ElementaryChannel
    state_perm: tuple = field(default=(), compare=False)
    effect_perm: tuple = field(default=(), compare=False)

    def apply_state(self, M: RatMatrix) -> RatMatrix:
        out = self.left.matrix @ M @ self.right.matrix.T
        return out.T if self.swap else out

    apply_effect = apply_state

    def is_identity(self) -> bool:
        return self.swap == 0 and self.left == self.right == ElementaryChannel(0, 1)

    def __str__(self):
        core = f"{self.left}x{self.right}"
        return f"W.{core}" if self.swap else core

    def to_json(self) -> dict:
        return {"name": str(self), "swap": self.swap,
                "left": [self.left.k, self.left.s], "right": [self.right.k, self.right.s],
                "state_perm": list(self.state_perm), "effect_perm": list(self.effect_perm)}


def _induced_perm(apply, items: Sequence[RatMatrix]) -> tuple:
    where = {M: i for i, M in enumerate(items)}
    perm = []
    for M in items:
        img = apply(M)
        if img not in where:
            raise ConstructionError("channel maps an extremal object outside the extremal list")
        perm.append(where[img])
    if sorted(perm) != list(range(len(items))):
        raise ConstructionError("induced map is not a permutation")
    return tuple(perm)


@lru_cache(maxsize=None)
def bipartite_group() -> tuple:
    """All 128 candidate reversible channels ``W^i (U_j^s1 (x) U_k^s2)``."""
    states, effects = build_bipartite(check=False)
    out = []
    for swap in (0, 1):
        for left in ELEMENTARY_CHANNELS:
            for right in ELEMENTARY_CHANNELS:
                ch = BipartiteChannel(swap, left, right)
                sp = _induced_perm(ch.apply_state, states)
                ep = _induced_perm(ch.apply_effect, effects)
                for block in (FACTORIZED, ENTANGLED):
                    if {sp[i] for i in block} != set(block) or {ep[i] for i in block} != set(block):
                        raise ConstructionError(f"{ch} mixes factorized and entangled objects")
                out.append(BipartiteChannel(swap, left, right, sp, ep))
    return tuple(out)


def bipartite_system() -> SystemSpec:
    states, effects = build_bipartite()
    return SystemSpec(9, states, effects, BIPARTITE_UNIT, bipartite_group(), name="squit x squit")


# -- consistency circuit -------------------------------------------------------

@dataclass(frozen=True)
class ConsistencyReport:
    x: int
    y: int
    admissible: bool
    worst_value: Optional[Fraction]
    channel: Optional[str]

    def to_json(self) -> dict:
        return {"x": self.x, "y": self.y, "admissible": self.admissible,
                "worst_value": None if self.worst_value is None else format_rational(self.worst_value),
                "channel": self.channel if self.channel else "circuit inapplicable"}


def _power(U: RatMatrix, n: int) -> RatMatrix:
    return U if n else RatMatrix.identity(U.rows)


def consistency_value(x: int, y: int, n: tuple) -> Fraction:
    """``Tr[(U^n3)^T E^T U^n0 W (U^n1)^T E U^n2 W]`` with ``U = W_x E_y``."""
    states, effects = build_bipartite(check=False)
    W, E = states[x], effects[y]
    U = W @ E
    n0, n1, n2, n3 = n
    prod = _power(U, n3).T @ E.T @ _power(U, n0) @ W @ _power(U, n1).T @ E @ _power(U, n2) @ W
    return prod.trace()


def consistency_scan(pairs: Optional[Sequence[tuple[int, int]]] = None) -> list[ConsistencyReport]:
    """Evaluate the four-copy circuit on every entangled (state, effect) pair.

    A pair whose ``W_x E_y`` is not an elementary channel gets
    ``admissible=True`` with ``channel=None``: the circuit does not constrain it.
    """
    states, effects = build_bipartite(check=False)
    if pairs is None:
        pairs = [(x, y) for x in ENTANGLED for y in ENTANGLED]
    reports = []
    for x, y in pairs:
        ch = elementary_lookup(states[x] @ effects[y])
        if ch is None:
            reports.append(ConsistencyReport(x, y, True, None, None))
            continue
        worst = min(consistency_value(x, y, n) for n in itertools.product((0, 1), repeat=4))
        reports.append(ConsistencyReport(x, y, worst >= 0, worst, str(ch)))
    return reports


@lru_cache(maxsize=None)
def admissible_pairs() -> frozenset:
    return frozenset((r.x, r.y) for r in consistency_scan() if r.admissible)


# -- toy models ----------------------------------------------------------------

@dataclass(frozen=True)
class ToyModel:
    name: str
    state_indices: tuple
    effect_indices: tuple
    reversible: tuple = field(default=(), compare=False)

    def is_consistent(self, admissible=None) -> bool:
        admissible = admissible_pairs() if admissible is None else admissible
        xs = [x for x in self.state_indices if x >= 16]
        ys = [y for y in self.effect_indices if y >= 16]
        return all((x, y) in admissible for x in xs for y in ys)

    def extensions(self) -> list[tuple[str, int]]:
        """Single entangled indices that can be added without breaking consistency."""
        out = []
        for x in ENTANGLED:
            if x not in self.state_indices:
                if ToyModel("", self.state_indices + (x,), self.effect_indices).is_consistent():
                    out.append(("state", x))
            if x not in self.effect_indices:
                if ToyModel("", self.state_indices, self.effect_indices + (x,)).is_consistent():
                    out.append(("effect", x))
        return out

    def system(self) -> SystemSpec:
        states, effects = build_bipartite(check=False)
        return SystemSpec(9, tuple(states[i] for i in self.state_indices),
                          tuple(effects[j] for j in self.effect_indices),
                          BIPARTITE_UNIT, self.reversible, name=self.name)

    def to_json(self) -> dict:
        states, effects = build_bipartite(check=False)
        return {
            "name": self.name,
            "state_indices": list(self.state_indices),
            "effect_indices": list(self.effect_indices),
            "states": {str(i): states[i].to_json() for i in self.state_indices},
            "effects": {str(j): effects[j].to_json() for j in self.effect_indices},
            "unit_effect": BIPARTITE_UNIT.to_json(),
            "reversible": [ch.to_json() for ch in self.reversible],
        }


def _model(name, extra_states, extra_effects) -> ToyModel:
    return ToyModel(name, FACTORIZED + tuple(extra_states), FACTORIZED + tuple(extra_effects))


def classify_models() -> list[ToyModel]:
    """PR, HS, the two Hybrid models and the eight Frozen models, with dynamics attached."""
    adm = admissible_pairs()
    bases = [
        _model("PR", ENTANGLED, ()),
        _model("HS", (), ENTANGLED),
        _model("Hybrid-A", (20, 22), (20, 22)),
        _model("Hybrid-B", (21, 23), (21, 23)),
    ] + [_model(f"Frozen-{i}", (i,), (i,)) for i in ENTANGLED]
    out = []
    for m in bases:
        if not m.is_consistent(adm):
            raise ConstructionError(f"model {m.name} fails the consistency circuit")
        out.append(ToyModel(m.name, m.state_indices, m.effect_indices, model_reversible(m)))
    return out


def get_model(name: str) -> ToyModel:
    for m in classify_models():
        if m.name.lower() == name.lower():
            return m
    known = ", ".join(m.name for m in classify_models())
    raise KeyError(f"unknown model {name!r}; known models: {known}")


def preserves(ch: BipartiteChannel, model: ToyModel) -> bool:
    S, E = set(model.state_indices), set(model.effect_indices)
    return {ch.state_perm[i] for i in S} == S and {ch.effect_perm[j] for j in E} == E


def _channel(swap: int, left: ElementaryChannel, right: ElementaryChannel) -> BipartiteChannel:
    for ch in bipartite_group():
        if ch.swap == swap and ch.left == left and ch.right == right:
            return ch
    raise KeyError((swap, left, right))


def model_reversible(model: ToyModel) -> tuple:
    """Reversible channels of the bipartite system that a model admits.

    A channel ``W^i (U1 (x) U2)`` is kept only if each factor is itself
    admissible: ``U1 (x) I`` and ``I (x) U2`` (every single-system channel
    must also act locally on one half of the composite) and, for ``i = 1``,
    the bare swap.  Each kept channel is checked to preserve the model.
    """
    ident = ElementaryChannel(0, 1)
    local = [u for u in ELEMENTARY_CHANNELS
             if preserves(_channel(0, u, ident), model) and preserves(_channel(0, ident, u), model)]
    swaps = [0] + ([1] if preserves(_channel(1, ident, ident), model) else [])
    out = []
    for ch in bipartite_group():
        if ch.swap in swaps and ch.left in local and ch.right in local:
            if not preserves(ch, model):
                raise ConstructionError(f"{ch} is generated by admissible factors but breaks {model.name}")
            out.append(ch)
    return tuple(out)


def model_symmetries(model: ToyModel) -> tuple:
    """All 128-group elements mapping the model's states and effects onto themselves."""
    return tuple(ch for ch in bipartite_group() if preserves(ch, model))


# -- measurement orbits ----------------------------------------------------------

def canonical_form(meas: Measurement, group: Sequence[BipartiteChannel]) -> tuple:
    """Lexicographically least sorted ``(effect_index, weight)`` list over the orbit."""
    pairs = list(zip(meas.indices, meas.weights))
    return min(tuple(sorted((g.effect_perm[i], w) for i, w in pairs)) for g in group)


@dataclass
class MeasurementClass:
    representative: tuple  # sorted ((effect_index, weight), ...)
    members: list

    @property
    def outcome_count(self) -> int:
        return len(self.representative)

    def as_measurement(self, system: SystemSpec) -> Measurement:
        return Measurement.from_indices(system, [i for i, _ in self.representative],
                                        [w for _, w in self.representative])


def dedup_measurements(measurements: Sequence[Measurement], group: Sequence[BipartiteChannel]) -> list:
    """Group measurements into orbits; classes sorted by outcome count, then representative."""
    classes: dict = {}
    for meas in measurements:
        key = canonical_form(meas, group)
        classes.setdefault(key, []).append(meas)
    return [MeasurementClass(k, classes[k]) for k in sorted(classes, key=lambda k: (len(k), k))]


# Extremal measurements of the HS model, one representative per orbit, as
# listed: label -> {effect index: weight}.
_F = Fraction
REFERENCE_MEASUREMENTS = {
    0: {16: _F(1, 2), 18: _F(1, 2)},
    1: {0: _F(1, 4), 2: _F(1, 4), 8: _F(1, 4), 10: _F(1, 4)},
    2: {0: _F(1, 4), 2: _F(1, 4), 9: _F(1, 4), 11: _F(1, 4)},
    3: {0: _F(1, 8), 1: _F(1, 8), 10: _F(1, 8), 11: _F(1, 8), 18: _F(1, 4), 23: _F(1, 4)},
    4: {0: _F(1, 8), 5: _F(1, 8), 10: _F(1, 8), 15: _F(1, 8), 20: _F(1, 4), 23: _F(1, 4)},
    5: {0: _F(1, 6), 10: _F(1, 6), 17: _F(1, 6), 18: _F(1, 6), 20: _F(1, 6), 23: _F(1, 6)},
    6: {0: _F(1, 8), 1: _F(1, 8), 6: _F(1, 8), 8: _F(1, 8), 10: _F(1, 8), 15: _F(1, 8), 23: _F(1, 4)},
    7: {0: _F(1, 12), 1: _F(1, 12), 4: _F(1, 12), 10: _F(1, 6), 15: _F(1, 12),
        18: _F(1, 6), 20: _F(1, 6), 23: _F(1, 6)},
    8: {0: _F(1, 12), 1: _F(1, 12), 6: _F(1, 6), 8: _F(1, 12), 9: _F(1, 12),
        15: _F(1, 6), 16: _F(1, 6), 23: _F(1, 6)},
    9: {0: _F(1, 6), 1: _F(1, 12), 6: _F(1, 12), 9: _F(1, 12), 11: _F(1, 6),
        14: _F(1, 12), 18: _F(1, 6), 23: _F(1, 6)},
    10: {0: _F(1, 8), 5: _F(1, 8), 11: _F(1, 8), 14: _F(1, 8), 18: _F(1, 8),
         19: _F(1, 8), 20: _F(1, 8), 23: _F(1, 8)},
    11: {0: _F(1, 12), 1: _F(1, 12), 4: _F(1, 12), 6: _F(1, 12), 9: _F(1, 12),
         10: _F(1, 12), 15: _F(1, 6), 20: _F(1, 6), 23: _F(1, 6)},
    12: {0: _F(1, 16), 1: _F(1, 16), 4: _F(1, 16), 6: _F(1, 8), 9: _F(1, 8),
         15: _F(3, 16), 16: _F(1, 8), 20: _F(1, 8), 23: _F(1, 8)},
    13: {0: _F(1, 12), 1: _F(1, 12), 4: _F(1, 12), 7: _F(1, 12), 10: _F(1, 12),
         11: _F(1, 12), 13: _F(1, 12), 14: _F(1, 12), 18: _F(1, 3)},
    14: {0: _F(1, 10), 2: _F(1, 10), 5: _F(1, 10), 11: _F(1, 5), 13: _F(1, 10),
         18: _F(1, 10), 19: _F(1, 10), 22: _F(1, 10), 23: _F(1, 10)},
}


def reference_measurement(label: int) -> Measurement:
    _, effects = build_bipartite(check=False)
    row = REFERENCE_MEASUREMENTS[label]
    idx = sorted(row)
    return Measurement(tuple(row[i] for i in idx), tuple(effects[i] for i in idx), tuple(idx))


def label_classes(classes: Sequence[MeasurementClass], group: Sequence[BipartiteChannel]) -> dict:
    """Map each class index to the reference label in the same orbit (or None)."""
    keys = {canonical_form(reference_measurement(lbl), group): lbl for lbl in REFERENCE_MEASUREMENTS}
    return {k: keys.get(c.representative) for k, c in enumerate(classes)}
