"""Command-line entry point: ``hypersig <group> <command> [options]``.

Exit status: 0 when the query is answered or the check passes, 1 when a
verification fails, 2 on invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from fractions import Fraction

from .analysis import (
    WITNESS_GAME,
    XI,
    XI_STATES,
    build_xi,
    capacity_blahut_arimoto,
    elementary_signaling_dimension,
    full_report,
    measurement_classes,
    verify_hypersignaling,
    xi_measurement,
    xi_states,
)
from .exact import format_rational
from .gpt import CorrelationMatrix, Measurement, correlation
from .polytope import GameMatrix, game_max, membership, random_inside_point, vertex_count
from .squit import bipartite_system, build_bipartite, classify_models, consistency_scan, get_model

EXIT_OK, EXIT_FAILED, EXIT_INPUT = 0, 1, 2


class InputError(ValueError):
    pass


def _dump(obj) -> str:
    return json.dumps(obj, separators=(",", ":"))


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _correlation(args) -> CorrelationMatrix:
    if args.input is None:
        return XI
    return CorrelationMatrix.from_json(_load_json(args.input))


# -- poly -------------------------------------------------------------------------

def cmd_poly_count(args):
    _require_mnd(args, need=("m", "n", "d"))
    return EXIT_OK, {"count": str(vertex_count(args.m, args.n, args.d))}


def cmd_poly_max(args):
    game = WITNESS_GAME if args.input is None else GameMatrix.from_json(_load_json(args.input))
    d = 4 if args.d is None else args.d
    _positive("d", d)
    value, vert = game_max(game, d)
    return EXIT_OK, {"value": format_rational(value), "d": d, "argmax": vert.to_json()}


def cmd_poly_member(args):
    p = _correlation(args)
    d = 4 if args.d is None else args.d
    _positive("d", d)
    cert = membership(p, d)
    if not cert.verify(p):
        return EXIT_FAILED, {"error": "certificate failed re-verification", "certificate": cert.to_json()}
    return EXIT_OK, cert.to_json()


def cmd_poly_sample(args):
    _require_mnd(args, need=("m", "n", "d"))
    _positive("k", args.k)
    rng = random.Random(args.seed)
    p, _ = random_inside_point(args.m, args.n, args.d, args.k, rng)
    return EXIT_OK, p.to_json()


def _positive(name, value):
    if value is None or value < 1:
        raise InputError(f"--{name} must be a positive integer")


def _require_mnd(args, need):
    for name in need:
        _positive(name, getattr(args, name))


# -- model ------------------------------------------------------------------------

def _model(args):
    try:
        return get_model(args.name)
    except KeyError as exc:
        raise InputError(exc.args[0]) from exc


def cmd_model_build(args):
    states, effects = build_bipartite(check=True)
    out = {"states": len(states), "effects": len(effects), "models": []}
    for m in classify_models():
        out["models"].append({
            "name": m.name,
            "state_indices": list(m.state_indices),
            "effect_indices": list(m.effect_indices),
            "reversible_channels": len(m.reversible),
            "consistent": m.is_consistent(),
        })
    return EXIT_OK, out


def cmd_model_consistency(args):
    reports = consistency_scan()
    adm = sorted([r.x, r.y] for r in reports if r.admissible)
    expected = sorted([[x, x] for x in range(16, 24)] + [[20, 22], [22, 20], [21, 23], [23, 21]])
    out = {"pairs": [r.to_json() for r in reports], "admissible": adm, "matches_expected": adm == expected}
    return (EXIT_OK if adm == expected else EXIT_FAILED), out


def cmd_model_measurements(args):
    model = _model(args)
    _, classes, labels = measurement_classes(model, workers=args.threads)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["class_id", "outcome_count", "effect_index", "weight"])
        for k, c in enumerate(classes):
            for idx, wt in c.representative:
                w.writerow([k, c.outcome_count, idx, format_rational(wt)])
        return EXIT_OK, buf.getvalue()
    return EXIT_OK, {
        "model": model.name,
        "classes": [
            {"class_id": k, "label": labels[k], "outcome_count": c.outcome_count, "orbit_size": len(c.members),
             "measurement": {"effects": [i for i, _ in c.representative],
                             "weights": [format_rational(x) for _, x in c.representative]}}
            for k, c in enumerate(classes)
        ],
    }


def cmd_model_dump(args):
    if args.format != "json":
        raise InputError("model dump supports --format json only")
    return EXIT_OK, _model(args).to_json()


# -- verify -----------------------------------------------------------------------

def cmd_verify_xi(args):
    report = verify_hypersignaling(build_xi(), 4, xi_states(), xi_measurement(),
                                   model="HS", state_indices=XI_STATES)
    ok = (report.confirmed and report.reference_payoff == Fraction(1, 2)
          and report.reference_classical_max == Fraction(10, 21))
    out = {
        "payoff": format_rational(report.reference_payoff),
        "classical_max": format_rational(report.reference_classical_max),
        "verdict": "hypersignaling" if report.confirmed else "not hypersignaling",
    }
    return (EXIT_OK if ok else EXIT_FAILED), out


def cmd_verify_hypersignaling(args):
    """Input: ``{"states": [...], "measurement": {...}, "correlation": {...}?, "model": "HS"?}``."""
    if args.input is None:
        states, meas = xi_states(), xi_measurement()
        idx, p, model = XI_STATES, XI, "HS"
    else:
        data = _load_json(args.input)
        if not isinstance(data, dict) or "states" not in data or "measurement" not in data:
            raise InputError("realization JSON needs 'states' and 'measurement'")
        system = bipartite_system()
        try:
            idx = tuple(int(i) for i in data["states"])
            if not idx or any(i < 0 for i in idx):
                raise ValueError
            states = tuple(system.extremal_states[i] for i in idx)
        except (TypeError, ValueError, IndexError) as exc:
            raise InputError("'states' must be indices 0..23") from exc
        try:
            meas = Measurement.from_json(data["measurement"], system)
        except IndexError as exc:
            raise InputError("measurement effect index out of range") from exc
        model = str(data.get("model", ""))
        if "correlation" in data:
            p = CorrelationMatrix.from_json(data["correlation"])
        else:
            p = correlation(states, meas, system.unit_effect)
    K = 4 if args.K is None else args.K
    _positive("K", K)
    report = verify_hypersignaling(p, K, states, meas, model=model, state_indices=idx)
    return (EXIT_OK if report.confirmed else EXIT_FAILED), report.to_json()


def cmd_verify_signaling_dimension(args):
    sd = elementary_signaling_dimension()
    return (EXIT_OK if sd.value == 2 else EXIT_FAILED), sd.to_json()


# -- capacity / report ---------------------------------------------------------------

def cmd_capacity(args):
    p = _correlation(args)
    if args.tol <= 0:
        raise InputError("--tol must be positive")
    res = capacity_blahut_arimoto(p, tol=args.tol, max_iter=args.max_iter)
    return (EXIT_OK if res.converged else EXIT_FAILED), res.to_json()


def cmd_report(args):
    if args.all:
        names = [m.name for m in classify_models()]
    else:
        names = [args.name]
    docs = [full_report(n, workers=args.threads) for n in names]
    ok = all(d["ok"] for d in docs)
    out = docs[0] if not args.all else {"ok": ok, "reports": docs}
    return (EXIT_OK if ok else EXIT_FAILED), out


# -- parser ---------------------------------------------------------------------------

def _common(defaults: bool) -> argparse.ArgumentParser:
    # global flags are accepted before or after the subcommand
    kw = (lambda v: {"default": v}) if defaults else (lambda v: {"default": argparse.SUPPRESS})
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, help="worker processes for enumeration", **kw(1))
    common.add_argument("--seed", type=int, help="seed for randomized commands", **kw(0))
    common.add_argument("--output", "-o", help="write the result here instead of standard output", **kw(None))
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common(False)
    parser = argparse.ArgumentParser(prog="hypersig", description="Exact hypersignaling verification toolkit.",
                                     parents=[_common(True)])
    groups = parser.add_subparsers(dest="group", required=True)

    poly = groups.add_parser("poly", help="classical correlation polytope C(m,n,d)").add_subparsers(
        dest="command", required=True)
    p = poly.add_parser("count", parents=[common], help="number of vertices")
    _mnd(p)
    p.set_defaults(func=cmd_poly_count)
    p = poly.add_parser("max", parents=[common], help="classical maximum of a game (default: the witness game)")
    p.add_argument("-d", type=int)
    p.add_argument("--input", "-i")
    p.set_defaults(func=cmd_poly_max)
    p = poly.add_parser("member", parents=[common], help="membership with certificate (default input: xi)")
    p.add_argument("-d", type=int)
    p.add_argument("--input", "-i")
    p.set_defaults(func=cmd_poly_member)
    p = poly.add_parser("sample", parents=[common], help="random convex combination of k vertices")
    _mnd(p)
    p.add_argument("-k", type=int, default=10)
    p.set_defaults(func=cmd_poly_sample)

    model = groups.add_parser("model", help="bipartite squit toy models").add_subparsers(
        dest="command", required=True)
    p = model.add_parser("build", parents=[common])
    p.set_defaults(func=cmd_model_build)
    p = model.add_parser("consistency", parents=[common])
    p.set_defaults(func=cmd_model_consistency)
    for name, func in (("measurements", cmd_model_measurements), ("dump", cmd_model_dump)):
        p = model.add_parser(name, parents=[common])
        p.add_argument("--name", default="HS")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.set_defaults(func=func)

    verify = groups.add_parser("verify", help="headline verifications").add_subparsers(
        dest="command", required=True)
    p = verify.add_parser("xi", parents=[common])
    p.set_defaults(func=cmd_verify_xi)
    p = verify.add_parser("hypersignaling", parents=[common])
    p.add_argument("--input", "-i")
    p.add_argument("-K", type=int)
    p.set_defaults(func=cmd_verify_hypersignaling)
    p = verify.add_parser("signaling-dimension", parents=[common])
    p.set_defaults(func=cmd_verify_signaling_dimension)

    p = groups.add_parser("capacity", parents=[common], help="Blahut-Arimoto capacity (default input: xi)")
    p.add_argument("--input", "-i")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--max-iter", type=int, default=100000)
    p.set_defaults(func=cmd_capacity)

    p = groups.add_parser("report", parents=[common], help="full pipeline report")
    p.add_argument("--name", default="HS")
    p.add_argument("--all", action="store_true", help="every model; nonzero exit if any check fails")
    p.set_defaults(func=cmd_report)
    return parser


def _mnd(p):
    p.add_argument("-m", type=int, required=True)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-d", type=int, required=True)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits 2 on bad flags
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    try:
        code, result = args.func(args)
    except (InputError, ValueError, KeyError, TypeError) as exc:
        print(f"hypersig: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = result if isinstance(result, str) else _dump(result) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
