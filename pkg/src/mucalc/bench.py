"""Benchmark families, size/depth reports and a fuzz driver."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import time
from dataclasses import asdict, dataclass, field

from .guarded import (
    DEFAULT_CAP, BudgetExceeded, epsilon_eliminate, normalize_automaton_form, tau0,
    unravel_hes,
)
from .hes import HES, classify_formula, classify_guardedness, formula_to_hes, hes_to_json
from .randgen import random_formula, random_hes, random_lts
from .semantics import check_equiv, disjoint_union
from .syntax import Formula, dia, disj, lor, modal_depth, mu, render, size, var

__all__ = [
    "generate_phi", "generate_ns", "BenchRow", "bench_report", "report_to_csv",
    "report_to_json", "input_hash", "version", "FuzzCase", "fuzz", "TRANSFORMS",
]

TRANSFORMS = ("tau0", "unravel", "eps-elim")


def version() -> str:
    try:
        from importlib.metadata import version as _v
        return _v("artifact")
    except Exception:
        return "0+unknown"


def generate_phi(n: int) -> Formula:
    """``mu X1 ... mu Xn. (X1 | ... | Xn) | <a>(X1 | ... | Xn)``.

    The disjunction of variables is one shared node, so the size is 3n+1.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    xs = disj(var(f"X{i}") for i in range(1, n + 1))
    body = lor(xs, dia("a", xs))
    for i in range(n, 0, -1):
        body = mu(f"X{i}", body)
    return body


def generate_ns(n: int, m: int) -> Formula:
    """``mu X1 ... mu Xn. X1 | ... | Xn | <a>(OR_j mu Yj.<a>(Yj | X1 | ... | Xn))``.

    Once turned into an equation system this is a single mu-block with n+m
    equations; the chain ``X1 = X2, ..., X(n-1) = Xn`` has no modality.
    """
    if n < 1 or m < 1:
        raise ValueError("n and m must be at least 1")
    xs = [var(f"X{i}") for i in range(1, n + 1)]
    ys = [mu(f"Y{j}", dia("a", disj([var(f"Y{j}"), *xs]))) for j in range(1, m + 1)]
    body = disj([*xs, dia("a", disj(ys))])
    for i in range(n, 0, -1):
        body = mu(f"X{i}", body)
    return body


def input_hash(obj) -> str:
    text = render(obj) if isinstance(obj, Formula) else json.dumps(hes_to_json(obj), sort_keys=True)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass
class BenchRow:
    n: int
    input_size: int
    output_size: int | None
    modal_depth: int | None
    wall_time: float
    truncated: bool
    input_hash: str


def _family(name: str, n: int, m: int | None) -> Formula:
    if name == "phi":
        return generate_phi(n)
    if name == "ns":
        return generate_ns(n, m if m is not None else n)
    raise ValueError(f"unknown family {name!r}")


def _hes_depth(h: HES) -> int:
    return max(modal_depth(e) for b in h.blocks for e in b.eqs.values())


def _run(transform: str, phi: Formula, cap: int):
    """(input size, output size, modal depth) of one transform run."""
    if transform == "tau0":
        out = tau0(phi, cap=cap)
        return size(phi), size(out), modal_depth(out)
    h = formula_to_hes(phi)
    if transform == "unravel":
        out = unravel_hes(h, cap=cap)
        return h.size(), size(out), modal_depth(out)
    if transform == "eps-elim":
        out = epsilon_eliminate(normalize_automaton_form(h), cap=cap)
        return h.size(), out.size(), _hes_depth(out)
    raise ValueError(f"unknown transform {transform!r}; pick one of {TRANSFORMS}")


def bench_report(family: str, ns, transform: str, cap: int = DEFAULT_CAP,
                 m: int | None = None, seed: int = 0) -> dict:
    """Run ``transform`` over a formula family for every ``n`` in ``ns``.

    A run that exceeds ``cap`` is kept as a truncated row.
    """
    if transform not in TRANSFORMS:
        raise ValueError(f"unknown transform {transform!r}; pick one of {TRANSFORMS}")
    rows = []
    for n in ns:
        phi = _family(family, n, m)
        in_size = size(phi) if transform == "tau0" else formula_to_hes(phi).size()
        t = time.perf_counter()
        try:
            in_size, out_size, md = _run(transform, phi, cap)
            truncated = False
        except BudgetExceeded:
            out_size = md = None
            truncated = True
        rows.append(BenchRow(n, in_size, out_size, md, time.perf_counter() - t,
                             truncated, input_hash(phi)))
    return {
        "family": family, "transform": transform, "seed": seed, "cap": cap,
        "version": version(), "rows": [asdict(r) for r in rows],
    }


def report_to_json(report: dict) -> str:
    return json.dumps(report, indent=2)


def report_to_csv(report: dict) -> str:
    buf = io.StringIO()
    meta = {k: v for k, v in report.items() if k != "rows"}
    buf.write("# " + json.dumps(meta, sort_keys=True) + "\n")
    cols = list(BenchRow.__dataclass_fields__)
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in report["rows"]:
        w.writerow({k: "" if r[k] is None else r[k] for k in cols})
    return buf.getvalue()


# -- fuzzing ------------------------------------------------------------------

@dataclass
class FuzzCase:
    index: int
    kind: str
    ok: bool
    input_hash: str
    detail: dict = field(default_factory=dict)


def _fuzz_one(i: int, seed: int, samples: int, max_states: int) -> FuzzCase:
    kind = ("tau0", "unravel", "eps-elim")[i % 3]
    s = seed * 1_000_003 + i
    ltss = [random_lts(s * 31 + k, max_states, ("a", "b"), ("p", "q")) for k in range(samples)]
    big = [disjoint_union(ltss)]
    if kind == "tau0":
        phi = random_formula(s, max_binders=4, depth=7)
        out = tau0(phi)
        v = check_equiv(phi, out, ltss=big)
        level = classify_formula(out, source=phi).level
        ok = v.equivalent and level in ("downwards-guarded", "epsilon-free")
        return FuzzCase(i, kind, ok, input_hash(phi),
                        {"equivalent": v.equivalent, "status": level, "out_size": size(out)})
    h = random_hes(s, blocks=1 + s % 3, n_vars=1 + s % 4, props=("p", "q"), actions=("a", "b"))
    if kind == "unravel":
        out = unravel_hes(h)
        bound = 2 ** (len(h) - 1) * h.max_equation_size()
        v = check_equiv(h, out, ltss=big)
        ok = v.equivalent and size(out) <= bound
        return FuzzCase(i, kind, ok, input_hash(h),
                        {"equivalent": v.equivalent, "out_size": size(out), "bound": bound})
    out = epsilon_eliminate(normalize_automaton_form(h))
    v = check_equiv(h, out, ltss=big)
    eps_free = classify_guardedness(out).is_epsilon_free
    ok = v.equivalent and eps_free
    return FuzzCase(i, kind, ok, input_hash(h),
                    {"equivalent": v.equivalent, "epsilon_free": eps_free, "out_size": out.size()})


def fuzz(cases: int = 60, seed: int = 0, samples: int = 8, max_states: int = 5,
         workers: int = 1) -> list[FuzzCase]:
    """Cycle through the three transforms on seeded random inputs.

    Results come back ordered by case index whatever ``workers`` is.
    """
    if workers <= 1:
        return [_fuzz_one(i, seed, samples, max_states) for i in range(cases)]
    from concurrent.futures import ProcessPoolExecutor
    with ProcessPoolExecutor(workers) as ex:
        return list(ex.map(_fuzz_one, range(cases), [seed] * cases, [samples] * cases,
                           [max_states] * cases))
