"""Command-line front end: solve, estimate, circuit, bench, cover."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .cnf import DimacsError, Formula, assignment_str, parse_assignment, parse_dimacs
from .covering import (
    BinarySpace, ChoiceSpace, CoverError, as_fraction, build_binary_cover, build_choice_cover, dump_cover,
    verify_cover,
)
from .hybrid import Strategy, solve
from .pbs import FastBallParams, PbsInstance, PbsStats, fast_ball, promise_ball
from .resources import (
    GAMMA0, QubitModel, beta_of_c, dantsin_exponent, epsilon_overhead, f_of_c, qubit_count, r_tilde,
    threshold_ratio,
)

log = logging.getLogger("hybridsat")

EXIT_SAT, EXIT_UNSAT, EXIT_UNKNOWN, EXIT_ERROR = 10, 20, 0, 1
STRATEGY_ALIASES = {
    "brute": ("brute", None),
    "schoening": ("schoening", None),
    "naive": ("naive", None),
    "promise": ("split", "promise"),
    "fastball": ("split", "fastball"),
    "qball": ("split", "qball"),
    "qfastball": ("split", "qfastball"),
    "split-schoening": ("split", "schoening"),
}
BENCH_COLUMNS = ["instance", "mode", "solver", "radius", "r_tilde", "outcome", "nodes", "leaves",
                 "oracle_queries", "clause_evals", "work", "wall_time"]


class UsageError(ValueError):
    pass


def read_formula(path: str) -> Formula:
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    return parse_dimacs(text)


def make_strategy(name: str, args) -> Strategy:
    if name not in STRATEGY_ALIASES:
        raise UsageError(f"unknown strategy {name!r}; choose from {sorted(STRATEGY_ALIASES)}")
    kind, pbs = STRATEGY_ALIASES[name]
    return Strategy(kind=kind, pbs=pbs or "promise", rho=as_fraction(args.rho), d=args.d, t=args.t,
                    qubits=args.qubits, m=args.m, seed=args.seed, tries=args.tries)


# ---------------------------------------------------------------- solve


def cmd_solve(args) -> int:
    try:
        f = read_formula(args.instance)
    except DimacsError as exc:
        print(f"error: {args.instance}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    strategy = make_strategy(args.strategy, args)
    rep = solve(f, strategy)
    d = rep.to_dict()
    if args.format == "json":
        print(json.dumps(d, sort_keys=True))
    else:
        print(rep.outcome)
        if rep.assignment is not None:
            print(assignment_str(rep.assignment))
        for key in sorted(d):
            if key not in ("outcome", "assignment"):
                print(f"{key}={d[key]}")
    return {"SAT": EXIT_SAT, "UNSAT": EXIT_UNSAT}.get(rep.outcome, EXIT_UNKNOWN)


# ------------------------------------------------------------- estimate


def parse_grid(spec: str) -> list[float]:
    """'a:b:step' inclusive range, or a comma list."""
    try:
        if ":" in spec:
            a, b, step = (float(x) for x in spec.split(":"))
            if step <= 0 or b < a:
                raise ValueError
            count = int(round((b - a) / step))
            return [round(a + i * step, 12) for i in range(count + 1)]
        return [float(x) for x in spec.split(",") if x]
    except ValueError:
        raise UsageError(f"bad grid {spec!r}; use a:b:step or a comma list") from None


def estimate_rows(cs, eps: float, n: int, qm: QubitModel) -> list[dict]:
    epsilon = epsilon_overhead(eps)
    classical = GAMMA0 + epsilon
    rows = []
    for c in cs:
        if c < 0 or c >= qm.B:
            raise UsageError(f"c={c} outside [0, {qm.B})")
        beta = beta_of_c(c, qm) if c > 0 else 0.0
        f = f_of_c(c, qm) if c > 0 else 0.0
        rows.append({
            "kind": "grid", "c": c, "beta": beta, "f": f, "exponent_classical": classical,
            "exponent_dantsin": dantsin_exponent(), "exponent_hybrid": classical - f,
            "r_tilde": r_tilde(n, c * n, qm) if c > 0 else 0, "value": "",
        })
    rows.append({"kind": "threshold", "c": "", "beta": "", "f": "", "exponent_classical": GAMMA0,
                 "exponent_dantsin": dantsin_exponent(), "exponent_hybrid": "", "r_tilde": "",
                 "value": threshold_ratio()})
    return rows


def cmd_estimate(args) -> int:
    qm = QubitModel(args.A, args.B, args.C)
    rows = estimate_rows(parse_grid(args.grid), args.eps, args.n, qm)
    if args.format == "json":
        print(json.dumps(rows))
    else:
        w = csv.DictWriter(sys.stdout, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return 0


# -------------------------------------------------------------- circuit


def circuit_report(f: Formula, r: int, center=None, verify: str = "sample", samples: int = 100, seed: int = 0,
                   dump_path: str | None = None) -> dict:
    from .amplification import enumerate_marked, leaves
    from .cnf import subsume_center
    from .qball.builder import QBallBuilder
    from .qball.dump import dump_program, parse_program
    from .qball.machine import Machine, random_tape

    n = f.num_vars
    if not 1 <= r <= n:
        raise UsageError(f"r={r} must lie in [1, n={n}]")
    center = tuple(center) if center is not None else (0,) * n
    g = subsume_center(f, center)
    b = QBallBuilder(g, r)
    q1, q2 = b.build_qball1(), b.build_qball2()
    stats = b.stats()
    report = {
        "schema": 1,
        "n": n,
        "r": r,
        "cells": stats["qubits"],
        "ancillas": stats["ancilla_qubits"],
        "gates": stats["gates_qball1"] + stats["gates_qball2"],
        "gates_qball1": stats["gates_qball1"],
        "gates_qball2": stats["gates_qball2"],
        "product_gates_qball1": stats["product_gates_qball1"],
        "elementary_estimate_qball1": stats["elementary_estimate_qball1"],
        "per_subroutine_gates": stats["max_gates_per_subroutine"],
        "qubit_bound": qubit_count(n, r),
    }
    rng = random.Random(seed)
    free = Machine(b.layout, check_ledger=False)
    for prog in (q1, q2):
        for _ in range(samples):
            t = random_tape(b.layout, rng)
            before = list(t)
            free.run(prog, t)
            free.run(prog, t, inverse=True)
            if t != before:
                raise AssertionError(f"{prog.name}: forward then inverse changed a tape")
    report["reversibility_tapes"] = 2 * samples
    if verify == "all":
        ref = enumerate_marked(f, r, "reference", center)
        circ = enumerate_marked(f, r, "circuit", center)
        if ref.marked_vectors != circ.marked_vectors:
            raise AssertionError("reference and circuit marked sets differ")
        report["marked"] = ref.marked
        report["total"] = ref.total
    elif verify == "sample":
        lv_ref = leaves(f, r, center)
        m = b.machine()
        for leaf in rng.sample(lv_ref, min(samples, len(lv_ref))):
            t = b.tape_for(leaf.choices)
            m.run(q1, t)
            m.run(q2, t)
            if tuple(b.read_effenc(t)) != leaf.flips or bool(t[b.sat.slot]) != leaf.satisfied:
                raise AssertionError(f"circuit disagrees with the reference at s={leaf.choices}")
        report["checked_choices"] = min(samples, len(lv_ref))
    if dump_path:
        text = dump_program(q1, b.layout)
        root, lay = parse_program(text)
        if dump_program(root, lay) != text:
            raise AssertionError("listing does not round-trip")
        Path(dump_path).write_text(text)
        report["dump"] = dump_path
    return report


def cmd_circuit(args) -> int:
    try:
        f = read_formula(args.instance)
    except DimacsError as exc:
        print(f"error: {args.instance}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    center = parse_assignment(args.center) if args.center else None
    rep = circuit_report(f, args.r, center, args.verify, args.samples, args.seed, args.dump)
    print(json.dumps(rep, sort_keys=True))
    return 0


# ---------------------------------------------------------------- bench


def parse_manifest(text: str) -> list[dict]:
    entries = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            e = json.loads(line)
        except json.JSONDecodeError as exc:
            raise UsageError(f"manifest line {lineno}: {exc.msg}") from None
        if not isinstance(e, dict) or "instance" not in e:
            raise UsageError(f"manifest line {lineno}: need an object with an 'instance' field")
        if ("strategy" in e) == ("pbs" in e):
            raise UsageError(f"manifest line {lineno}: give exactly one of 'strategy' or 'pbs'")
        e["_line"] = lineno
        entries.append(e)
    return entries


def run_entry(entry: dict, base: str, seed: int) -> dict:
    path = Path(entry["instance"])
    if not path.is_absolute():
        path = Path(base) / path
    f = parse_dimacs(path.read_text())
    params = entry.get("params", {})
    row = {"instance": entry["instance"], "r_tilde": ""}
    if "strategy" in entry:
        ns = argparse.Namespace(rho=params.get("rho", "1/3"), d=params.get("d", 1), t=params.get("t", 3),
                                qubits=params.get("qubits"), m=params.get("m"), seed=params.get("seed", seed),
                                tries=params.get("tries"))
        rep = solve(f, make_strategy(entry["strategy"], ns))
        row.update(mode="solve", solver=entry["strategy"], radius=rep.extra.get("radius", ""),
                   r_tilde=rep.extra.get("r_tilde", ""), outcome=rep.outcome, nodes=rep.nodes, leaves=rep.leaves,
                   oracle_queries=rep.oracle_queries, clause_evals=rep.clause_evals, work=rep.work,
                   wall_time=round(rep.wall_time, 6))
        return row
    from time import perf_counter

    from .hybrid import qfastball

    radius = int(entry["radius"])
    center = parse_assignment(entry["center"]) if "center" in entry else (0,) * f.num_vars
    inst = PbsInstance(f, center, radius)
    st = PbsStats()
    t0 = perf_counter()
    solver = entry["pbs"]
    if solver == "promise":
        res = promise_ball(inst, stats=st)
    elif solver == "fastball":
        res = fast_ball(inst, FastBallParams(params.get("t", 3)), stats=st)
    elif solver == "qfastball":
        res, rt = qfastball(inst, FastBallParams(params.get("t", 3)), params["qubits"], seed=seed, stats=st)
        row["r_tilde"] = rt
    else:
        raise UsageError(f"unknown pbs solver {solver!r} in manifest line {entry['_line']}")
    row.update(mode="pbs", solver=solver, radius=radius, outcome="FOUND" if res.found else "NONE",
               nodes=st.nodes, leaves=st.leaves, oracle_queries=st.oracle_queries, clause_evals=st.clause_evals,
               work=st.nodes + st.oracle_queries, wall_time=round(perf_counter() - t0, 6))
    return row


def growth_fits(rows: list[dict]) -> dict[str, float]:
    """Least-squares growth factor of work per unit radius, per PBS solver."""
    by: dict[str, list[tuple[int, float]]] = {}
    for row in rows:
        if row["mode"] == "pbs" and row["work"] > 0:
            by.setdefault(row["solver"], []).append((row["radius"], math.log(row["work"])))
    fits = {}
    for solver, pts in by.items():
        xs = [x for x, _ in pts]
        if len(set(xs)) < 2:
            continue
        mx = sum(xs) / len(xs)
        my = sum(y for _, y in pts) / len(pts)
        slope = sum((x - mx) * (y - my) for x, y in pts) / sum((x - mx) ** 2 for x in xs)
        fits[solver] = math.exp(slope)
    return fits


def cmd_bench(args) -> int:
    text = Path(args.manifest).read_text()
    entries = parse_manifest(text)
    base = str(Path(args.manifest).parent)
    if args.jobs > 1 and len(entries) > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(run_entry, entries, [base] * len(entries), [args.seed] * len(entries)))
    else:
        rows = [run_entry(e, base, args.seed) for e in entries]
    out = io.StringIO()
    w = csv.DictWriter(out, fieldnames=BENCH_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    if args.out:
        Path(args.out).write_text(out.getvalue())
    else:
        sys.stdout.write(out.getvalue())
    for solver, g in sorted(growth_fits(rows).items()):
        print(f"fit solver={solver} growth_per_radius={g:.4f}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------- cover


def cmd_cover(args) -> int:
    if args.choice:
        k, t = args.choice
        code = build_choice_cover(k, t)
        ok = verify_cover(code.words, code.radius, ChoiceSpace(k, t))
        text = f"# choice k={k} t={t} radius={code.radius} words={len(code)}\n" + "".join(
            "".join(str(x) for x in w) + "\n" for w in code.words)
    else:
        if args.n is None:
            raise UsageError("cover needs --n or --choice")
        cover = build_binary_cover(args.n, args.rho, args.d)
        ok = args.n > 24 or verify_cover(cover.centers, cover.radius, BinarySpace(args.n))
        text = dump_cover(cover, args.rho)
    if not ok:
        print("error: constructed cover failed verification", file=sys.stderr)
        return EXIT_ERROR
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true")
    common.add_argument("--seed", type=int, default=0, help="root seed for every random choice")
    p = argparse.ArgumentParser(prog="hybridsat", description="Space-splitting and hybrid 3-SAT solvers.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common], help="solve a DIMACS instance")
    s.add_argument("instance", help="DIMACS file, or - for stdin")
    s.add_argument("--strategy", default="brute", help=f"one of {', '.join(sorted(STRATEGY_ALIASES))}")
    s.add_argument("--rho", default="1/3", help="relative PBS radius for space splitting")
    s.add_argument("--d", type=int, default=1, help="number of cover blocks")
    s.add_argument("--t", type=int, default=3, help="FastBall code length")
    s.add_argument("--qubits", type=float, help="qubit budget M for qfastball")
    s.add_argument("--m", type=int, help="quantum sub-solver size for the naive hybrid")
    s.add_argument("--tries", type=int, help="Schoening restarts")
    s.add_argument("--format", choices=("text", "json"), default="text")
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("estimate", parents=[common], help="resource-model table")
    e.add_argument("--grid", default="0:0.5:0.01", help="c values, a:b:step or comma list")
    e.add_argument("--eps", type=float, default=0.0, help="FastBall base is 2 + eps")
    e.add_argument("--n", type=int, default=1000, help="n used for the r_tilde column (M = c n)")
    e.add_argument("--A", type=float, default=10.0)
    e.add_argument("--B", type=float, default=50.0)
    e.add_argument("--C", type=float, default=16.0)
    e.add_argument("--format", choices=("csv", "json"), default="csv")
    e.set_defaults(func=cmd_estimate)

    c = sub.add_parser("circuit", parents=[common], help="build and check the QBall circuits for an instance")
    c.add_argument("instance")
    c.add_argument("--r", type=int, required=True)
    c.add_argument("--center", help="center bit string (default all zero)")
    c.add_argument("--verify", choices=("none", "sample", "all"), default="sample")
    c.add_argument("--samples", type=int, default=100)
    c.add_argument("--dump", help="write the QBall_1 listing here")
    c.set_defaults(func=cmd_circuit)

    b = sub.add_parser("bench", parents=[common], help="run a manifest of solver runs, CSV out")
    b.add_argument("manifest", help="one JSON object per line")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("cover", parents=[common], help="build a covering set or choice code")
    v.add_argument("--n", type=int)
    v.add_argument("--rho", default="1/3")
    v.add_argument("--d", type=int, default=1)
    v.add_argument("--choice", type=int, nargs=2, metavar=("K", "T"))
    v.add_argument("--out")
    v.set_defaults(func=cmd_cover)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, CoverError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
