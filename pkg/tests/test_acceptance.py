"""Acceptance gate: eight end-to-end criteria, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py`` (or ``python3 tests/test_acceptance.py``); the
lines are repeated in the pytest terminal summary.
Each criterion runs at full size and must also finish inside its time budget.
"""
import itertools
import sys
import time
from contextlib import contextmanager

from mucalc import (
    HES, PRODUCT_SIZE_CONSTANT, EpsStats, EqBlock, ParityGame, check_equiv, classify_formula,
    classify_guardedness, disjoint_union, enumerate_ltss, epsilon_eliminate,
    exhaustive_bruteforce, enumerate_edge_relations, expand_lower_pipeline,
    gt_lower_pipeline, is_bmu, model_check, modal_depth, parse, product_construction,
    random_formula, random_game, random_hes, random_lts, size, solve_zielonka, tau0,
    unravel_hes, walukiewicz_formula,
)
from mucalc.bench import generate_phi
from mucalc.syntax import propositions

RESULTS: dict = {}


@contextmanager
def criterion(k: int, title: str, budget: float):
    info: dict = {}
    t = time.perf_counter()
    ok, err = False, None
    try:
        yield info
        ok = True
    except AssertionError as e:
        err = e
    took = time.perf_counter() - t
    in_time = took < budget
    verdict = "PASS" if ok and in_time else "FAIL"
    extra = ", ".join(f"{k_}={v}" for k_, v in info.items())
    line = f"criterion {k} [{title}]: {verdict} ({took:.1f}s / {budget:.0f}s budget){' ' + extra if extra else ''}"
    if err is not None:
        line += f" :: {err}"
    RESULTS[k] = line
    print(line)
    if err is not None:
        raise err
    assert in_time, f"criterion {k} over budget: {took:.1f}s"


def _lts_batch(seed, count, max_states, actions, props):
    return disjoint_union([random_lts(seed * 1000 + j, max_states, actions, props)
                           for j in range(count)])


# 1 ------------------------------------------------------------------------------------

def test_c1_phi_sizes():
    with criterion(1, "phi sizes 3n+1", 1.0) as info:
        got = [size(generate_phi(n)) for n in range(1, 13)]
        info["sizes"] = got
        assert got == [3 * n + 1 for n in range(1, 13)]


# 2 ------------------------------------------------------------------------------------

def test_c2_blowup_witness():
    with criterion(2, "tau0 blowup on phi_n", 30.0) as info:
        depths = []
        for n in range(3, 9):
            phi = generate_phi(n)
            out = tau0(phi)
            depths.append(modal_depth(out))
            assert modal_depth(out) >= 2 ** (n - 1), f"n={n}"
            assert size(out) <= 2 ** size(phi), f"n={n}"
        info["depths"] = depths


# 3 ------------------------------------------------------------------------------------

def test_c3_tau0_correctness():
    # one action and one proposition, so the same formulas can be checked on
    # every LTS with at most three states as well
    acts, props = ("a",), ("p",)
    with criterion(3, "tau0 equivalence + downwards guarded", 300.0) as info:
        exhaustive = disjoint_union(list(enumerate_ltss(3, acts, props)))
        not_down_block_order = 0
        for seed in range(500):
            phi = random_formula(seed, max_binders=5, depth=8, props=props, actions=acts)
            out = tau0(phi)
            rnd = _lts_batch(seed, 20, 6, acts, props)
            for t in (rnd, exhaustive):
                assert model_check(out, t) == model_check(phi, t), f"seed {seed}: not equivalent"
            assert classify_formula(out, source=phi).is_downwards_guarded, \
                f"seed {seed}: not downwards guarded"
            not_down_block_order += not classify_formula(out).is_downwards_guarded
        info["exhaustive_states"] = exhaustive.n
        info["down_only_via_binder_priority"] = not_down_block_order


# 4 ------------------------------------------------------------------------------------

EXAMPLE_FLAT = "mu X.[a]ff & [b]ff & [c]ff | <a>(mu Y.<b>(Y | X)) | mu Z.<a>X | <c>Z"


def test_c4_unravel():
    with criterion(4, "unravel equivalence + 2^(n-1) bound", 120.0) as info:
        worst = 0.0
        for seed in range(200):
            n = 1 + seed % 4
            h = random_hes(seed, blocks=1 + (seed // 4) % n, n_vars=n, props=("p", "q"),
                           actions=("a", "b"), depth=3)
            flat = unravel_hes(h)
            bound = 2 ** (n - 1) * h.max_equation_size()
            assert size(flat) <= bound, f"seed {seed}: {size(flat)} > {bound}"
            worst = max(worst, size(flat) / bound)
            assert check_equiv(h, flat, ltss=[_lts_batch(seed, 20, 5, ("a", "b"), ("p", "q"))]), \
                f"seed {seed}"
        vec = HES([EqBlock("mu", {
            "X": parse("[a]ff & [b]ff & [c]ff | <a>Y | Z"),
            "Y": parse("<b>(Y | X)"),
            "Z": parse("<a>X | <c>Z"),
        })], "X")
        flat = unravel_hes(vec)
        samples = [_lts_batch(s, 20, 5, ("a", "b", "c"), ()) for s in range(10)]
        assert check_equiv(flat, parse(EXAMPLE_FLAT), ltss=samples)
        info["max_size_over_bound"] = round(worst, 3)


# 5 ------------------------------------------------------------------------------------

def test_c5_epsilon_elimination():
    with criterion(5, "epsilon elimination", 300.0) as info:
        max_steps = 0
        for seed in range(200):
            n = 1 + seed % 4
            h = random_hes(seed, blocks=1 + (seed // 4) % min(2, n), n_vars=n,
                           props=("p", "q")[: 1 + seed % 2], actions=("a", "b"),
                           automaton_normal=True)
            stats = EpsStats()
            out = epsilon_eliminate(h, stats=stats)
            k = len(h.blocks)
            assert classify_guardedness(out).is_epsilon_free, f"seed {seed}"
            assert len(out) <= n * k, f"seed {seed}: {len(out)} equations"
            assert all(s <= stats.lattice_height for s in stats.kleene_steps), f"seed {seed}"
            max_steps = max([max_steps, *stats.kleene_steps])
            assert check_equiv(h, out, ltss=[_lts_batch(seed, 20, 5, ("a", "b"), ("p", "q"))]), \
                f"seed {seed}"
        info["max_kleene_steps"] = max_steps


# 6 ------------------------------------------------------------------------------------

def test_c6_product_construction():
    with criterion(6, "product construction", 180.0) as info:
        worst = 0.0
        for seed in range(300):
            phi = random_formula(seed, max_binders=3, depth=6)
            t = random_lts(seed, 5, ("a", "b"), ("p", "q"))
            s0 = seed % t.n
            out, one = product_construction(phi, t, s0)
            assert is_bmu(out) and one.n == 1
            assert bool(model_check(out, one) & 1) == bool(model_check(phi, t) >> s0 & 1), \
                f"seed {seed}"
            base = set(t.props) | propositions(phi)
            assert len(one.props) == len(base) * t.n
            bound = PRODUCT_SIZE_CONSTANT * (size(phi) * t.size()) ** 2
            assert size(out) <= bound, f"seed {seed}"
            worst = max(worst, size(out) / bound)
        info["c"] = PRODUCT_SIZE_CONSTANT
        info["max_size_over_bound"] = round(worst, 4)


# 7 ------------------------------------------------------------------------------------

def _exhaustive_small_games():
    """Zielonka vs positional brute force on every game with at most 4 vertices
    and priorities in {0, 1}. Vertices are sorted by (owner, priority), which
    covers every game up to isomorphism."""
    count = 0
    for n in range(1, 5):
        rels = enumerate_edge_relations(n)
        for kinds in itertools.combinations_with_replacement(
                [(0, 0), (0, 1), (1, 0), (1, 1)], n):
            owner = [o for o, _ in kinds]
            prio = [p for _, p in kinds]
            oracle = exhaustive_bruteforce(n, owner, prio, rels)
            for r, w in zip(rels.tolist(), oracle.tolist()):
                edges = [(v, u) for v in range(n) for u in range(n) if r >> (n * v + u) & 1]
                got = solve_zielonka(ParityGame(owner, prio, edges))[0]
                assert got == w, f"owner={owner} prio={prio} edges={edges}"
                count += 1
    return count


def test_c7_pipelines():
    with criterion(7, "pipelines vs Zielonka", 600.0) as info:
        for seed in range(100):
            g = random_game(seed, max_vertices=5, max_prio=3)
            w0, _ = solve_zielonka(g)
            want = 0 if w0 >> g.init & 1 else 1
            assert gt_lower_pipeline(g) == want, f"gt-lower, seed {seed}"
            assert expand_lower_pipeline(g) == want, f"expand-lower, seed {seed}"
        info["exhaustive_games"] = _exhaustive_small_games()


# 8 ------------------------------------------------------------------------------------

def test_c8_walukiewicz_linear():
    with criterion(8, "Walukiewicz size affine", 1.0) as info:
        sizes = [size(walukiewicz_formula(d)) for d in range(9)]
        second = [c - 2 * b + a for a, b, c in zip(sizes, sizes[1:], sizes[2:])]
        info["sizes"] = sizes
        assert all(x == 0 for x in second)


if __name__ == "__main__":
    failed = 0
    for fn in (test_c1_phi_sizes, test_c2_blowup_witness, test_c3_tau0_correctness,
               test_c4_unravel, test_c5_epsilon_elimination, test_c6_product_construction,
               test_c7_pipelines, test_c8_walukiewicz_linear):
        try:
            fn()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
