"""Vertex enumeration by the double description method, in exact arithmetic."""

from __future__ import annotations

from fractions import Fraction
from math import gcd

from .exact import primitive
from .lp import HPolytope


class UnboundedPolytopeError(ValueError):
    """Raised instead of returning a partial vertex list for an unbounded input."""


def _idot(a, x) -> int:
    return sum(p * q for p, q in zip(a, x))


def _normalize(vec: list[int]) -> tuple[int, ...]:
    g = 0
    for v in vec:
        g = gcd(g, v)
    if g > 1:
        vec = [v // g for v in vec]
    return tuple(vec)


def _homogenized_constraints(h: HPolytope):
    """Integer constraints ``a.z >= 0`` on ``z = (x, t)`` for the cone over ``h``."""
    cons = []
    for a, b in h.inequalities:
        cons.append(primitive(list(a) + [-b]))
    for a, b in h.equalities:
        row = primitive(list(a) + [-b])
        cons.append(row)
        cons.append(tuple(-v for v in row))
    cons.append(tuple([0] * h.ambient_dim + [1]))  # t >= 0
    # drop exact duplicates; process in lexicographic normal order
    return sorted(set(c for c in cons if any(c)))


def _cone_generators(dim: int, constraints):
    """Extreme rays and lineality basis of ``{z : c.z >= 0 for c in constraints}``."""
    lines = [tuple(1 if i == j else 0 for j in range(dim)) for i in range(dim)]
    rays: list[tuple[int, ...]] = []
    seen: list[tuple[int, ...]] = []
    for c in constraints:
        pivot = next((l for l in lines if _idot(c, l) != 0), None)
        if pivot is not None:
            cp = _idot(c, pivot)
            if cp < 0:
                pivot = tuple(-v for v in pivot)
                cp = -cp
            new_lines = []
            for l in lines:
                if l is pivot or l == pivot or l == tuple(-v for v in pivot):
                    continue
                cl = _idot(c, l)
                new_lines.append(_normalize([cp * a - cl * b for a, b in zip(l, pivot)]) if cl else l)
            new_rays = []
            for r in rays:
                cr = _idot(c, r)
                new_rays.append(_normalize([cp * a - cr * b for a, b in zip(r, pivot)]) if cr else r)
            new_rays.append(pivot)
            lines, rays = new_lines, new_rays
            seen.append(c)
            continue

        values = [_idot(c, r) for r in rays]
        pos = [r for r, v in zip(rays, values) if v > 0]
        zero = [r for r, v in zip(rays, values) if v == 0]
        neg = [(r, v) for r, v in zip(rays, values) if v < 0]
        if not neg:
            seen.append(c)
            continue
        tight = {r: frozenset(i for i, s in enumerate(seen) if _idot(s, r) == 0) for r in rays}
        combined = []
        for p, vp in ((r, v) for r, v in zip(rays, values) if v > 0):
            for q, vq in neg:
                common = tight[p] & tight[q]
                if not _adjacent(common, p, q, rays, tight):
                    continue
                combined.append(_normalize([vp * b - vq * a for a, b in zip(p, q)]))
        rays = pos + zero + combined
        seen.append(c)
    return rays, lines


def _adjacent(common, p, q, rays, tight) -> bool:
    # combinatorial test: no third ray is tight on every constraint p and q share
    for r in rays:
        if r is p or r is q:
            continue
        if common <= tight[r]:
            return False
    return True


def enumerate_vertices(h: HPolytope) -> list[tuple[Fraction, ...]]:
    """All vertices of a bounded H-polytope, lexicographically sorted.

    Raises
    ------
    UnboundedPolytopeError
        If the polytope has a recession direction (or a lineality space).
    """
    cons = _homogenized_constraints(h)
    rays, lines = _cone_generators(h.ambient_dim + 1, cons)
    if lines:
        raise UnboundedPolytopeError(f"polytope contains {len(lines)} line(s)")
    if not any(r[-1] > 0 for r in rays):
        return []  # empty polytope
    verts = set()
    for r in rays:
        t = r[-1]
        if t == 0:
            raise UnboundedPolytopeError(f"recession direction {r[:-1]}")
        verts.add(tuple(Fraction(v, t) for v in r[:-1]))
    return sorted(verts)
