import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from hypersig.analysis import (
    CAPACITY_BOUND_BITS,
    WITNESS_GAME,
    XI,
    XI_CAPACITY_BITS,
    XI_STATES,
    build_xi,
    capacity_blahut_arimoto,
    elementary_signaling_dimension,
    full_report,
    realize_xi,
    verify_hypersignaling,
    verify_xi,
    xi_measurement,
    xi_states,
)
from hypersig.gpt import CorrelationMatrix, Measurement, correlation
from hypersig.polytope import game_max, payoff
from hypersig.squit import BIPARTITE_UNIT, UNIT, build_bipartite, build_elementary, get_model


def mutual_information(W, r):
    q = r @ W
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(W > 0, W * np.log2(W / q), 0.0)
    return float(r @ t.sum(axis=1))


def capacity_oracle(W, starts=40, seed=0):
    """Multistart Nelder-Mead over softmax-parametrized priors."""
    scipy_opt = pytest.importorskip("scipy.optimize")
    rng = np.random.default_rng(seed)
    best = 0.0

    def neg(z):
        r = np.exp(z - z.max())
        return -mutual_information(W, r / r.sum())

    for _ in range(starts):
        res = scipy_opt.minimize(neg, rng.normal(size=W.shape[0]), method="Nelder-Mead",
                                 options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20000, "maxfev": 40000})
        best = max(best, -res.fun)
    return best


def xi_array():
    return np.array([[float(v) for v in r] for r in XI.rows])


class TestSpecimen:
    def test_build(self):
        p = build_xi()
        assert p == XI
        assert p[0, 0] == Fraction(1, 2)
        assert all(sum(r) == 1 for r in p.rows)

    def test_measurement_normalized(self):
        assert xi_measurement().is_normalized(BIPARTITE_UNIT)

    def test_witness_game(self):
        assert payoff(WITNESS_GAME, XI) == Fraction(1, 2)
        assert game_max(WITNESS_GAME, 4)[0] == Fraction(10, 21)
        assert Fraction(1, 2) - Fraction(10, 21) == Fraction(1, 42)


class TestHypersignaling:
    def test_confirmed(self):
        rep = verify_xi()
        assert rep.confirmed
        assert rep.reference_payoff == Fraction(1, 2)
        assert rep.reference_classical_max == Fraction(10, 21)
        assert rep.witness.verify(XI)
        assert rep.payoff_achieved > rep.classical_max

    def test_enough_symbols(self):
        rep = verify_hypersignaling(XI, 7, xi_states(), xi_measurement())
        assert not rep.confirmed and rep.witness.inside

    def test_squit_identity_not_hypersignaling(self):
        sq = build_elementary()
        m = Measurement.from_indices(sq, (0, 2), (Fraction(1, 2),) * 2)
        states = (sq.extremal_states[0], sq.extremal_states[2])
        rep = verify_hypersignaling(CorrelationMatrix.identity(2), 2, states, m, unit=UNIT)
        assert not rep.confirmed

    def test_realization_must_reproduce(self):
        wrong = CorrelationMatrix(tuple(tuple(Fraction(1, 7) for _ in range(7)) for _ in range(7)))
        with pytest.raises(ValueError):
            verify_hypersignaling(wrong, 4, xi_states(), xi_measurement())

    def test_realizations_per_model(self):
        assert realize_xi(get_model("PR")) is None
        assert realize_xi(get_model("HS"))[0] == XI_STATES
        for name in ["Hybrid-A", "Hybrid-B"] + [f"Frozen-{i}" for i in range(16, 24)]:
            si, meas = realize_xi(get_model(name))
            states, _ = build_bipartite()
            assert correlation([states[i] for i in si], meas, BIPARTITE_UNIT) == XI


class TestSignalingDimension:
    def test_squit(self):
        sd = elementary_signaling_dimension()
        assert sd.value == 2
        assert sd.lower_bound_correlation == CorrelationMatrix.identity(2)
        assert not sd.lower_bound_certificate.inside
        assert sd.lower_bound_certificate.verify(sd.lower_bound_correlation)
        assert sd.outcome_counts == [2, 2]


class TestCapacity:
    def test_specimen_value(self):
        res = capacity_blahut_arimoto(XI, tol=1e-9)
        assert res.converged
        assert abs(res.capacity_bits - XI_CAPACITY_BITS) < 1e-6
        assert res.capacity_bits < CAPACITY_BOUND_BITS < 2
        assert res.capacity_bits <= res.upper_bound_bits <= res.capacity_bits + 1e-9

    def test_oracle_agreement(self):
        assert abs(capacity_oracle(xi_array()) - XI_CAPACITY_BITS) < 1e-6

    def test_sanity_channels(self):
        assert abs(capacity_blahut_arimoto(CorrelationMatrix.identity(2)).capacity_bits - 1.0) < 1e-6
        const = [[0.25, 0.75]] * 3
        assert abs(capacity_blahut_arimoto(const).capacity_bits) < 1e-6
        bsc = [[0.9, 0.1], [0.1, 0.9]]
        h = -(0.9 * math.log2(0.9) + 0.1 * math.log2(0.1))
        assert abs(capacity_blahut_arimoto(bsc).capacity_bits - (1 - h)) < 1e-8

    def test_bounds(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            m, n = rng.integers(2, 6, size=2)
            W = rng.dirichlet(np.ones(n), size=m)
            c = capacity_blahut_arimoto(W).capacity_bits
            assert -1e-12 <= c <= math.log2(min(m, n)) + 1e-9

    def test_iterates_monotone(self):
        res = capacity_blahut_arimoto(XI, tol=1e-9, record_history=True)
        h = np.array(res.history)
        assert (np.diff(h) >= -1e-12).all()

    def test_column_merging_never_helps(self):
        W = xi_array()
        base = capacity_blahut_arimoto(W).capacity_bits
        for a, b in itertools.combinations(range(7), 2):
            merged = np.delete(W, b, axis=1)
            merged[:, a if a < b else a - 1] += W[:, b]
            assert capacity_blahut_arimoto(merged).capacity_bits <= base + 2e-9

    def test_zero_columns_dropped(self):
        W = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
        assert abs(capacity_blahut_arimoto(W).capacity_bits - 1.0) < 1e-9

    def test_unconverged_is_flagged(self):
        res = capacity_blahut_arimoto(XI, tol=1e-9, max_iter=5)
        assert not res.converged and res.iterations == 5

    def test_invalid(self):
        with pytest.raises(ValueError):
            capacity_blahut_arimoto(XI, tol=0)
        with pytest.raises(ValueError):
            capacity_blahut_arimoto([[0.5, 0.6]])


class TestReports:
    def test_pr(self):
        rep = full_report("PR")
        assert rep["ok"]
        assert len(rep["measurement_classes"]) == 2
        assert rep["hypersignaling"]["confirmed"] is False
        assert rep["hypersignaling"]["possible"] is False
        assert rep["hypersignaling"]["max_outcomes"] == 4

    def test_hybrid_b(self):
        rep = full_report("Hybrid-B")
        assert rep["ok"]
        assert rep["hypersignaling"]["confirmed"] is True
        assert rep["hypersignaling"]["payoff"] == "7/2"
        assert rep["paper_checks"]["capacity_below_1_78"] is True

    @pytest.mark.slow
    def test_hs(self):
        rep = full_report("HS")
        assert rep["ok"], rep["errors"]
        assert len(rep["measurement_classes"]) == 15
        assert rep["hypersignaling"]["confirmed"]
        assert all(rep["paper_checks"].values())

    def test_unknown(self):
        rep = full_report("nope")
        assert not rep["ok"]
