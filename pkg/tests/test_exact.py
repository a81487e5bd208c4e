import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypersig.exact import (
    RatMatrix,
    as_rational,
    binomial,
    format_rational,
    nullspace,
    parse_rational,
    primitive,
    rank,
    solve_unique,
    stirling2,
)
from hypersig.squit import UNIT, squit_effects

small_rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6)


def matrices(max_rows=5, max_cols=5):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(small_rationals, min_size=c, max_size=c), min_size=r, max_size=r)))


def stirling_by_listing(m, k):
    # count surjections onto k labels, divide out the label permutations
    surj = sum(1 for f in itertools.product(range(k), repeat=m) if len(set(f)) == k)
    return surj // math.factorial(k)


class TestScalars:
    def test_reduced_and_positive_denominator(self):
        q = as_rational(" -6/4 ")
        assert (q.numerator, q.denominator) == (-3, 2)

    def test_floats_and_bools_refused(self):
        with pytest.raises(TypeError):
            as_rational(0.5)
        with pytest.raises(TypeError):
            as_rational(True)

    @given(small_rationals)
    def test_format_parse_roundtrip(self, q):
        assert parse_rational(format_rational(q)) == q

    def test_format_integer_has_no_slash(self):
        assert format_rational(Fraction(4, 2)) == "2"
        assert format_rational(Fraction(-1, 2)) == "-1/2"

    def test_parse_rejects_garbage(self):
        with pytest.raises(ValueError):
            parse_rational("one half")


class TestCombinatorics:
    def test_binomial_examples(self):
        assert binomial(7, 4) == 35
        assert binomial(9, 0) == 1
        assert binomial(7, 8) == 0

    def test_binomial_pascal(self):
        for n in range(1, 20):
            for k in range(1, n):
                assert binomial(n, k) == binomial(n - 1, k) + binomial(n - 1, k - 1)

    def test_stirling_examples(self):
        assert stirling2(7, 4) == 350
        assert stirling2(3, 2) == 3
        assert all(stirling2(m, 1) == 1 for m in range(1, 12))
        assert stirling2(0, 0) == 1 and stirling2(4, 0) == 0

    def test_stirling_alternating_sum(self):
        for m in range(0, 12):
            for k in range(0, 9):
                alt = sum((-1) ** j * binomial(k, j) * (k - j) ** m for j in range(k + 1)) // math.factorial(k)
                assert stirling2(m, k) == alt

    def test_stirling_by_listing(self):
        for m in range(1, 7):
            for k in range(1, m + 1):
                assert stirling2(m, k) == stirling_by_listing(m, k)

    def test_deterministic_function_count(self):
        for m in range(1, 7):
            for n in range(1, 7):
                total = sum(math.factorial(k) * binomial(n, k) * stirling2(m, k) for k in range(1, min(m, n) + 1))
                assert total == n ** m

    def test_large_arguments_do_not_recurse(self):
        assert stirling2(1500, 2) == 2 ** 1499 - 1


class TestRatMatrix:
    def test_shape_and_access(self):
        M = RatMatrix.from_rows([[1, 2, 3], [4, 5, 6]])
        assert M.shape == (2, 3)
        assert M[1, 2] == 6
        assert M.T.shape == (3, 2)

    def test_product_and_trace(self):
        A = RatMatrix.from_rows([[1, 2], [3, 4]])
        assert (A @ RatMatrix.identity(2)) == A
        assert A.trace() == 5
        assert A.pairing(A) == 1 + 4 + 9 + 16

    def test_exact_equality_and_hash(self):
        A = RatMatrix.from_rows([["1/2", 0]])
        B = RatMatrix.from_rows([[Fraction(2, 4), 0]])
        assert A == B and hash(A) == hash(B)

    def test_json_roundtrip(self):
        A = RatMatrix.from_rows([["1/3", -2], [0, "7/9"]])
        assert RatMatrix.from_json(A.to_json()) == A
        assert A.to_json() == [["1/3", "-2"], ["0", "7/9"]]

    def test_ragged_rejected(self):
        with pytest.raises(ValueError):
            RatMatrix.from_rows([[1, 2], [3]])

    @given(matrices(3, 3), matrices(3, 3))
    def test_pairing_is_trace_of_transpose_product(self, a, b):
        A = RatMatrix.from_rows(a)
        B = RatMatrix.from_rows(b)
        if A.shape == B.shape:
            assert A.pairing(B) == (A.T @ B).trace()


class TestLinearAlgebra:
    def test_rank_examples(self):
        assert rank(RatMatrix.identity(3)) == 3
        assert rank(RatMatrix.zeros(3, 4)) == 0
        cols = RatMatrix.from_columns([e.flat() for e in squit_effects()])
        assert rank(cols) == 3

    @settings(max_examples=60, deadline=None)
    @given(matrices())
    def test_rank_transpose_invariant(self, rows):
        M = RatMatrix.from_rows(rows)
        assert rank(M) == rank(M.T)

    @settings(max_examples=60, deadline=None)
    @given(matrices())
    def test_rank_nullity(self, rows):
        M = RatMatrix.from_rows(rows)
        ns = nullspace(M)
        assert rank(M) + len(ns) == M.shape[1]
        for v in ns:
            assert all(sum(a * x for a, x in zip(r, v)) == 0 for r in rows)

    def test_solve_unique_examples(self):
        e = squit_effects()
        A = RatMatrix.from_columns([e[0].flat(), e[2].flat()])
        assert solve_unique(A, UNIT.flat()) == [Fraction(1, 2), Fraction(1, 2)]
        A = RatMatrix.from_columns([e[0].flat(), e[1].flat()])
        assert solve_unique(A, UNIT.flat()) is None
        b = [Fraction(1, 3), 2, -1]
        assert solve_unique(RatMatrix.identity(3), b) == b

    def test_solve_unique_needs_independent_columns(self):
        A = RatMatrix.from_columns([[1, 0], [2, 0]])
        assert solve_unique(A, [1, 0]) is None

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 4).flatmap(lambda n: st.tuples(
        st.lists(st.lists(small_rationals, min_size=n, max_size=n), min_size=n, max_size=n),
        st.lists(small_rationals, min_size=n, max_size=n))))
    def test_solve_unique_roundtrip(self, data):
        rows, x = data
        A = RatMatrix.from_rows(rows)
        b = [sum(a * v for a, v in zip(r, x)) for r in rows]
        sol = solve_unique(A, b)
        if rank(A) == len(x):
            assert sol == x
        else:
            assert sol is None

    def test_primitive(self):
        assert primitive([Fraction(1, 2), Fraction(-1, 3), 0]) == (3, -2, 0)
        assert primitive([0, 0]) == (0, 0)

    def test_rank_random_integer_matrices_against_float(self):
        import numpy as np
        rng = random.Random(5)
        for _ in range(30):
            r, c = rng.randint(1, 6), rng.randint(1, 6)
            rows = [[rng.randint(-3, 3) for _ in range(c)] for _ in range(r)]
            assert rank(RatMatrix.from_rows(rows)) == np.linalg.matrix_rank(np.array(rows, dtype=float))
