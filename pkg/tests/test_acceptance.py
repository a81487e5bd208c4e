"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""

import itertools
import json
import random
import time
from fractions import Fraction

import pytest

from hypersig.analysis import (
    WITNESS_GAME,
    XI,
    build_xi,
    capacity_blahut_arimoto,
    elementary_signaling_dimension,
    xi_measurement,
)
from hypersig.gpt import CorrelationMatrix, enumerate_extremal_measurements
from hypersig.polytope import (
    game_max,
    membership,
    membership_by_enumeration,
    payoff,
    random_inside_point,
    vertex_count,
    vertices_iter,
)
from hypersig.squit import (
    BIPARTITE_UNIT,
    ENTANGLED_EFFECTS,
    ENTANGLED_STATES,
    admissible_pairs,
    bipartite_effect_polytope,
    bipartite_state_polytope,
    classify_models,
    dedup_measurements,
    factorized_effects,
    factorized_states,
    get_model,
    label_classes,
)
from hypersig.vertex import enumerate_vertices

RESULTS = {}


@pytest.fixture(scope="module", autouse=True)
def summary(request):
    yield
    tr = request.config.pluginmanager.get_plugin("terminalreporter")
    if tr is not None:
        tr.write_line("")
        tr.write_line("acceptance summary")
        for k in sorted(RESULTS):
            tr.write_line(RESULTS[k])


def record(capsys, number, ok, detail):
    line = f"[criterion {number:2d}] {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[number] = line
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


def timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


def test_criterion_01_vertex_count(capsys):
    count, t_count = timed(vertex_count, 7, 7, 4)
    streamed, t_stream = timed(lambda: sum(1 for _ in vertices_iter(7, 7, 4)))
    ok = count == streamed == 359863 and t_count < 1 and t_stream < 30
    record(capsys, 1, ok, f"count={count} ({t_count:.4f}s), streamed={streamed} ({t_stream:.1f}s)")


def test_criterion_02_witness_game(capsys):
    def closed_form():
        return payoff(WITNESS_GAME, XI), game_max(WITNESS_GAME, 4)[0]

    (value, cmax), t_closed = timed(closed_form)
    ints = [[int(v * 21) for v in r] for r in WITNESS_GAME.rows]

    def scan():
        return max(sum(ints[x][y] for x, y in enumerate(v.assignment)) for v in vertices_iter(7, 7, 4))

    best, t_scan = timed(scan)
    ok = (value == Fraction(1, 2) and cmax == Fraction(10, 21) and Fraction(best, 21) == cmax
          and t_closed < 1 and t_scan < 60)
    record(capsys, 2, ok, f"payoff={value}, closed-form max={cmax} ({t_closed:.3f}s), "
                          f"full scan max={Fraction(best, 21)} ({t_scan:.1f}s)")


def test_criterion_03_build_xi(capsys):
    p = build_xi()
    listed = tuple(tuple(Fraction(v, 2) for v in row) for row in (
        (1, 0, 0, 0, 0, 1, 0), (0, 1, 0, 0, 0, 0, 1), (0, 1, 1, 0, 0, 0, 0), (0, 0, 1, 0, 0, 0, 1),
        (0, 0, 0, 1, 0, 1, 0), (0, 0, 0, 1, 0, 0, 1), (0, 0, 0, 0, 1, 1, 0)))
    normalized = xi_measurement().total() == BIPARTITE_UNIT
    ok = p.rows == listed and normalized
    record(capsys, 3, ok, f"derived specimen matches listed matrix: {p.rows == listed}; sum w E = unit: {normalized}")


def test_criterion_04_membership(capsys):
    out4 = membership(XI, 4)
    in7 = membership(XI, 7)
    rng = random.Random(20240)
    inside_ok = 0
    t0 = time.perf_counter()
    for _ in range(100):
        p, _ = random_inside_point(7, 7, 4, 10, rng)
        cert = membership(p, 4)
        if cert.inside and cert.verify(p):
            inside_ok += 1
    elapsed = time.perf_counter() - t0
    ok = (not out4.inside and out4.verify(XI) and out4.payoff > out4.classical_max
          and in7.inside and in7.verify(XI) and inside_ok == 100)
    record(capsys, 4, ok, f"xi,d=4 {out4.verdict} (payoff {out4.payoff} > max {out4.classical_max}); "
                          f"xi,d=7 {in7.verdict}; random inside {inside_ok}/100 ({elapsed:.0f}s)")


def test_criterion_05_double_description(capsys):
    states = set(enumerate_vertices(bipartite_state_polytope()))
    effects = set(enumerate_vertices(bipartite_effect_polytope()))
    listed_s = {tuple(w.flat()) for w in factorized_states() + ENTANGLED_STATES}
    listed_e = {tuple(e.flat()) for e in factorized_effects() + ENTANGLED_EFFECTS}
    ok = len(states) == 24 and len(effects) == 24 and states == listed_s and effects == listed_e
    record(capsys, 5, ok, f"{len(states)} states, {len(effects)} effects; sets match listed: "
                          f"{states == listed_s and effects == listed_e}")


def test_criterion_06_consistency(capsys):
    adm = admissible_pairs()
    expected = frozenset([(x, x) for x in range(16, 24)] + [(20, 22), (22, 20), (21, 23), (23, 21)])
    record(capsys, 6, adm == expected, f"admissible pairs: {sorted(adm)}")


def test_criterion_07_measurement_classes(capsys, hs_enumeration, group):
    hs_meas, t_single = hs_enumeration
    hs_classes = dedup_measurements(hs_meas, group)
    counts = [c.outcome_count for c in hs_classes]
    hs_labels = label_classes(hs_classes, group)

    pr_meas = enumerate_extremal_measurements(get_model("PR").system(), 2, 9)
    pr_classes = dedup_measurements(pr_meas, group)
    pr_labels = sorted(label_classes(pr_classes, group).values())

    parallel = enumerate_extremal_measurements(get_model("HS").system(), 2, 9, workers=2)
    dump = lambda ms: json.dumps([m.to_json() for m in ms])
    identical = dump(parallel) == dump(hs_meas)

    ok = (sorted(counts) == [2, 4, 4, 6, 6, 6, 7, 8, 8, 8, 8, 9, 9, 9, 9]
          and sorted(hs_labels.values()) == list(range(15))
          and pr_labels == [1, 2] and t_single < 600 and identical)
    record(capsys, 7, ok, f"HS: {len(hs_meas)} measurements, {len(hs_classes)} classes {counts} "
                          f"({t_single:.0f}s single-threaded); PR classes labelled {pr_labels}; "
                          f"parallel identical: {identical}")


def test_criterion_08_reversible(capsys):
    counts = {m.name: len(m.reversible) for m in classify_models()}
    frozen = [counts[f"Frozen-{i}"] for i in range(16, 24)]
    ok = (counts["PR"] == counts["HS"] == 128 and counts["Hybrid-A"] == counts["Hybrid-B"] == 4
          and frozen == [2, 2, 2, 2, 1, 1, 1, 1])
    record(capsys, 8, ok, f"PR {counts['PR']}, HS {counts['HS']}, Hybrid {counts['Hybrid-A']}/"
                          f"{counts['Hybrid-B']}, Frozen {frozen}")


def test_criterion_09_capacity(capsys):
    xi = capacity_blahut_arimoto(XI, tol=1e-9)
    ident = capacity_blahut_arimoto(CorrelationMatrix.identity(2)).capacity_bits
    const = capacity_blahut_arimoto([[0.5, 0.5], [0.5, 0.5]]).capacity_bits
    ok = (xi.converged and xi.capacity_bits < 1.78 and xi.capacity_bits < 2.0
          and abs(ident - 1.0) < 1e-6 and abs(const) < 1e-6)
    record(capsys, 9, ok, f"C(xi)={xi.capacity_bits:.9f} bits in {xi.iterations} iterations; "
                          f"identity {ident:.9f}; constant {const:.2e}")


def test_criterion_10_oracle_equivalence(capsys):
    rng = random.Random(10)
    game_mismatch = 0
    for _ in range(50):
        m, n, d = rng.randint(1, 4), rng.randint(1, 4), rng.randint(1, 4)
        g = [[Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(n)] for _ in range(m)]
        brute = max(sum(g[x][y] for x, y in enumerate(v.assignment)) for v in vertices_iter(m, n, d))
        if game_max(g, d)[0] != brute:
            game_mismatch += 1
    member_cases = member_mismatch = 0
    for m, n, d in itertools.product(range(1, 5), range(1, 5), range(1, 5)):
        for _ in range(2):
            rows = []
            for _ in range(m):
                raw = [rng.randint(0, 3) * (rng.random() < 0.6) for _ in range(n)]
                if not any(raw):
                    raw[rng.randrange(n)] = 1
                rows.append([Fraction(v, sum(raw)) for v in raw])
            p = CorrelationMatrix(tuple(tuple(r) for r in rows))
            cert = membership(p, d)
            member_cases += 1
            if cert.inside != membership_by_enumeration(p, d) or not cert.verify(p):
                member_mismatch += 1
    ok = game_mismatch == 0 and member_mismatch == 0
    record(capsys, 10, ok, f"game_max vs scan: {50 - game_mismatch}/50 agree; "
                           f"membership vs full LP: {member_cases - member_mismatch}/{member_cases} agree")


def test_criterion_11_signaling_dimension(capsys):
    sd = elementary_signaling_dimension()
    lower_ok = (sd.lower_bound_correlation == CorrelationMatrix.identity(2)
                and not sd.lower_bound_certificate.inside
                and sd.lower_bound_certificate.verify(sd.lower_bound_correlation))
    upper_ok = sd.outcome_counts and all(c == 2 for c in sd.outcome_counts)
    ok = sd.value == 2 and lower_ok and upper_ok
    record(capsys, 11, ok, f"signaling dimension {sd.value}; identity outside C(2,2,1): {lower_ok}; "
                           f"extremal measurement outcome counts {sd.outcome_counts}")
