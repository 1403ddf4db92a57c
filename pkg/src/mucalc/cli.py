"""Command line entry point (``mucalc`` / ``python -m mucalc``).

Inputs are picked by file extension: ``.mu`` formula text, ``.hes.json``
equation systems, ``.lts.json`` transition systems, ``.pg.json`` parity
games. A formula can also be given inline instead of a file name.

Every command that transforms something also checks the result (sampled
equivalence, size bounds, classification) and exits non-zero if a check
fails.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench
from .guarded import (
    DEFAULT_CAP, BudgetExceeded, epsilon_eliminate, normalize_automaton_form, tau0,
    unravel_hes,
)
from .hes import (
    classify_formula, classify_guardedness, formula_to_hes, formula_to_vectorial,
    hes_from_json, hes_to_json, hes_to_vectorial,
)
from .parity import (
    ParityGame, expand_lower_pipeline, gt_lower_pipeline, solve_bruteforce, solve_zielonka,
)
from .semantics import check_equiv, lts_from_json, lts_to_json, model_check, model_check_hes
from .syntax import ParseError, modal_depth, parse, render, size


def _kind(path: str) -> str:
    for ext, kind in ((".hes.json", "hes"), (".lts.json", "lts"), (".pg.json", "game"),
                      (".mu", "formula")):
        if path.endswith(ext):
            return kind
    return "formula" if not Path(path).exists() else "unknown"


def load(path: str):
    """(kind, object) for a file path or an inline formula."""
    kind = _kind(path)
    p = Path(path)
    if kind == "unknown":
        raise SystemExit(f"cannot tell the input type of {path}")
    text = p.read_text() if p.exists() else path
    if kind == "formula":
        return kind, parse(text.strip())
    if kind == "hes":
        return kind, hes_from_json(text)
    if kind == "lts":
        return kind, lts_from_json(text)
    return kind, ParityGame.from_json(text)


def _load_as(path: str, *kinds: str):
    kind, obj = load(path)
    if kind not in kinds:
        raise SystemExit(f"{path}: expected {' or '.join(kinds)}, got {kind}")
    return kind, obj


def _emit(args, data: dict, text: str | None = None):
    if args.json or text is None:
        print(json.dumps(data, indent=2, default=str))
    else:
        print(text)


def _check(cond: bool, what: str, failures: list):
    if not cond:
        failures.append(what)


def _equiv(a, b, args) -> dict:
    v = check_equiv(a, b, budget=args.samples, seed=args.seed, max_states=args.lts_states)
    out = {"equivalent": v.equivalent, "checked": v.checked}
    if not v.equivalent:
        out["counterexample_state"] = v.state
        out["counterexample_lts"] = lts_to_json(v.lts)
    return out


# -- subcommands -----------------------------------------------------------------

def cmd_parse(args, failures):
    _, phi = _load_as(args.input, "formula")
    again = parse(render(phi))
    _check(again is phi, "render/parse round trip", failures)
    _emit(args, {"formula": render(phi), "size": size(phi), "modal_depth": modal_depth(phi),
                 "closed": not phi.free}, render(phi))


def cmd_analyze(args, failures):
    kind, obj = _load_as(args.input, "formula", "hes")
    rep = classify_formula(obj) if kind == "formula" else classify_guardedness(obj)
    occ = [{"in": o.source, "variable": o.target, "status": s}
           for o, s in rep.occurrences()]
    data = {"level": rep.level, "occurrences": occ}
    lines = [f"level: {rep.level}"] + [f"  {o['variable']} in {o['in']}: {o['status']}" for o in occ]
    _emit(args, data, "\n".join(lines))


def cmd_to_hes(args, failures):
    _, phi = _load_as(args.input, "formula")
    h = formula_to_hes(phi)
    if args.normalize:
        h = h.normalized()
    _check(_equiv(phi, h, args)["equivalent"], "formula_to_hes equivalence", failures)
    _emit(args, hes_to_json(h), json.dumps(hes_to_json(h), indent=2))


def cmd_to_vec(args, failures):
    kind, obj = _load_as(args.input, "formula", "hes")
    vf = formula_to_vectorial(obj) if kind == "formula" else hes_to_vectorial(obj)
    _check(_equiv(obj, vf.hes, args)["equivalent"], "vectorial equivalence", failures)
    _emit(args, {"parents": vf.parents, **hes_to_json(vf.hes)}, str(vf))


def cmd_guard(args, failures):
    _, phi = _load_as(args.input, "formula")
    out = tau0(phi, cap=args.cap)
    level = classify_formula(out, source=phi).level
    eq = _equiv(phi, out, args)
    _check(eq["equivalent"], "tau0 equivalence", failures)
    _check(level in ("downwards-guarded", "epsilon-free"), "tau0 output downwards guarded", failures)
    data = {"input_size": size(phi), "output_size": size(out), "modal_depth": modal_depth(out),
            "level": level, **eq, "formula": render(out)}
    _emit(args, data, render(out))


def cmd_unravel(args, failures):
    kind, obj = _load_as(args.input, "formula", "hes")
    h = obj if kind == "hes" else formula_to_hes(obj)
    out = unravel_hes(h, cap=args.cap)
    bound = 2 ** (len(h) - 1) * h.max_equation_size()
    eq = _equiv(h, out, args)
    _check(eq["equivalent"], "unravel equivalence", failures)
    _check(size(out) <= bound, "unravel size bound", failures)
    _emit(args, {"variables": len(h), "output_size": size(out), "bound": bound, **eq,
                 "formula": render(out)}, render(out))


def cmd_eps_elim(args, failures):
    kind, obj = _load_as(args.input, "formula", "hes")
    h = obj if kind == "hes" else formula_to_hes(obj)
    h = normalize_automaton_form(h)
    out = epsilon_eliminate(h, cap=args.cap)
    eq = _equiv(h, out, args)
    eps_free = classify_guardedness(out).is_epsilon_free
    n, k = len(h), len(h.blocks)
    _check(eq["equivalent"], "epsilon elimination equivalence", failures)
    _check(eps_free, "output epsilon-free", failures)
    _check(len(out) <= n * k, "at most nk equations", failures)
    _emit(args, {"equations": len(out), "bound_nk": n * k, "epsilon_free": eps_free, **eq,
                 "hes": hes_to_json(out)}, str(out))


def cmd_check_equiv(args, failures):
    _, a = _load_as(args.left, "formula", "hes")
    _, b = _load_as(args.right, "formula", "hes")
    eq = _equiv(a, b, args)
    _check(eq["equivalent"], "equivalence", failures)
    _emit(args, eq, "equivalent on samples" if eq["equivalent"]
          else f"counterexample at state {eq['counterexample_state']}")


def cmd_check(args, failures):
    _, t = _load_as(args.lts, "lts")
    kind, obj = _load_as(args.input, "formula", "hes")
    mask = model_check(obj, t) if kind == "formula" else model_check_hes(obj, t)[obj.entry]
    states = [s for s in range(t.n) if mask >> s & 1]
    _emit(args, {"states": states}, " ".join(map(str, states)))


def cmd_solve_game(args, failures):
    _, g = _load_as(args.input, "game")
    w0, w1 = solve_zielonka(g)
    if args.verify:
        _check((w0, w1) == solve_bruteforce(g), "Zielonka agrees with brute force", failures)
    bits = lambda m: [g.ids[v] for v in range(g.n) if m >> v & 1]
    data = {"W0": bits(w0), "W1": bits(w1), "winner_at_init": 0 if w0 >> g.init & 1 else 1}
    _emit(args, data, f"W0 = {data['W0']}\nW1 = {data['W1']}")


def cmd_pipeline(args, failures):
    _, g = _load_as(args.input, "game")
    v = g.init if args.vertex is None else g.ids.index(args.vertex)
    fn = gt_lower_pipeline if args.which == "gt-lower" else expand_lower_pipeline
    trace: dict = {}
    got = fn(g, v, cap=args.cap, trace=trace)
    w0, _ = solve_zielonka(g)
    want = 0 if w0 >> v & 1 else 1
    _check(got == want, f"{args.which} agrees with Zielonka", failures)
    _emit(args, {"vertex": g.ids[v], "winner": got, "zielonka": want, "trace": trace},
          f"player {got} wins from vertex {g.ids[v]}")


def _range(text: str) -> range:
    a, _, b = text.partition("..")
    return range(int(a), int(b or a) + 1)


def cmd_bench(args, failures):
    rep = bench.bench_report(args.family, _range(args.n), args.transform, cap=args.cap,
                             m=args.m, seed=args.seed)
    rows = rep["rows"]
    if args.family == "phi":
        for r in rows:
            _check(r["input_size"] == 3 * r["n"] + 1 or args.transform != "tau0",
                   f"size of phi_{r['n']}", failures)
            if args.transform == "tau0" and not r["truncated"]:
                _check(r["modal_depth"] >= 2 ** (r["n"] - 1), f"depth of tau0(phi_{r['n']})", failures)
    print(bench.report_to_csv(rep) if args.format == "csv" else bench.report_to_json(rep), end="")


def cmd_fuzz(args, failures):
    cases = bench.fuzz(args.cases, seed=args.seed, samples=args.samples,
                       max_states=args.lts_states, workers=args.workers)
    for c in cases:
        _check(c.ok, f"fuzz case {c.index} ({c.kind})", failures)
    data = {"seed": args.seed, "version": bench.version(), "cases": [c.__dict__ for c in cases]}
    bad = [c for c in cases if not c.ok]
    _emit(args, data, f"{len(cases) - len(bad)}/{len(cases)} cases passed")


# -- argument parsing ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mucalc", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--cap", type=int, default=DEFAULT_CAP, help="size cap for exponential steps")
    common.add_argument("--lts-states", type=int, default=5, help="max states of sampled LTSs")
    common.add_argument("--samples", type=int, default=20, help="number of sampled LTSs")
    sub = p.add_subparsers(dest="cmd", required=True)

    def add(name, fn, help_, *inputs):
        s = sub.add_parser(name, parents=[common], help=help_)
        for i in inputs:
            s.add_argument(i)
        s.set_defaults(fn=fn)
        return s

    add("parse", cmd_parse, "parse and pretty-print a formula", "input")
    add("analyze", cmd_analyze, "guardedness report", "input")
    add("to-hes", cmd_to_hes, "formula to equation system", "input").add_argument(
        "--normalize", action="store_true", help="merge adjacent equally-qualified blocks")
    add("to-vec", cmd_to_vec, "vectorial form", "input")
    add("guard", cmd_guard, "guarded transformation tau0", "input")
    add("unravel", cmd_unravel, "equation system to flat formula", "input")
    add("eps-elim", cmd_eps_elim, "epsilon elimination on an equation system", "input")
    add("check-equiv", cmd_check_equiv, "sampled equivalence check", "left", "right")
    add("check", cmd_check, "model check a formula on an LTS", "input", "lts")
    add("solve-game", cmd_solve_game, "solve a parity game", "input").add_argument(
        "--verify", action="store_true", help="cross-check with positional brute force")
    s = add("pipeline", cmd_pipeline, "solve a game through a guarded transformation")
    s.add_argument("which", choices=["gt-lower", "expand-lower"])
    s.add_argument("input")
    s.add_argument("--vertex", type=int)
    s = add("bench", cmd_bench, "size/depth benchmark on a formula family")
    s.add_argument("--family", choices=["phi", "ns"], default="phi")
    s.add_argument("--n", default="1..6", help="range A..B")
    s.add_argument("-m", type=int, help="second parameter of the ns family (default n)")
    s.add_argument("--transform", choices=bench.TRANSFORMS, default="tau0")
    s.add_argument("--format", choices=["csv", "json"], default="csv")
    s = add("fuzz", cmd_fuzz, "random transform/oracle campaign")
    s.add_argument("--cases", type=int, default=60)
    s.add_argument("--workers", type=int, default=1)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    failures: list[str] = []
    try:
        args.fn(args, failures)
    except (ParseError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except BudgetExceeded as e:
        print(f"truncated: {e}", file=sys.stderr)
        return 3
    for f in failures:
        print(f"check failed: {f}", file=sys.stderr)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
