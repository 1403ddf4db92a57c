import itertools

import pytest
from hypothesis import given, strategies as st

from mucalc import (
    HES, EqBlock, VectorialForm, build_guardedness_graph, classify_formula,
    classify_guardedness, dia, formula_to_hes, formula_to_vectorial, hes_from_json,
    hes_to_json, hes_to_vectorial, model_check, model_check_hes, mu, parse, random_formula,
    random_hes, var,
)
from mucalc.bench import generate_ns

from conftest import sample_union

seeds = st.integers(0, 10**6)
BOX_FF = "[a]ff & [b]ff & [c]ff"
GUARDED_EX = f"mu X.{BOX_FF} | <a>(mu Y.<b>(Y | X)) | mu Z.<a>X | <c>Z"
UNGUARDED_EX = f"mu X.{BOX_FF} | <a>(mu Y.<b>(Y | X)) | mu Z.X | <c>Z"


def hes(*blocks, entry=None):
    bs = [EqBlock(q, {x: parse(e) for x, e in eqs.items()}) for q, eqs in blocks]
    return HES(bs, entry or next(iter(bs[0].eqs)))


def test_single_binder():
    h = formula_to_hes(parse("mu X.<a>X"))
    assert len(h.blocks) == 1 and h.blocks[0].qual == "mu"
    assert h.equation("X") is dia("a", var("X"))


def test_non_fixpoint_formula_gets_vacuous_root():
    h = formula_to_hes(parse("p | <a>(mu X.<a>X)"))
    assert h.entry not in ("X",) and len(h) == 2


def test_open_formula_rejected():
    with pytest.raises(ValueError):
        formula_to_hes(parse("<a>X"))


@pytest.mark.parametrize("n,m", [(1, 1), (2, 1), (2, 2), (3, 2), (4, 3)])
def test_ns_family_single_block(n, m):
    h = formula_to_hes(generate_ns(n, m)).normalized()
    assert len(h.blocks) == 1 and h.blocks[0].qual == "mu" and len(h) == n + m
    xs = " | ".join(f"X{i}" for i in range(1, n + 1))
    ys = " | ".join(f"Y{j}" for j in range(1, m + 1))
    want = {f"X{i}": f"X{i + 1}" for i in range(1, n)}
    want[f"X{n}"] = f"{xs} | <a>({ys})"
    want.update({f"Y{j}": f"<a>(Y{j} | {xs})" for j in range(1, m + 1)})
    assert h.blocks[0].eqs == {x: parse(e) for x, e in want.items()}


@given(seeds)
def test_formula_to_hes_preserves_semantics(seed):
    phi = random_formula(seed, max_binders=4, depth=7)
    t = sample_union(seed)
    assert model_check_hes(formula_to_hes(phi), t)[formula_to_hes(phi).entry] == model_check(phi, t)


@given(seeds)
def test_formula_to_hes_is_tree_with_back_edges(seed):
    phi = random_formula(seed, max_binders=5, depth=8)
    vf = formula_to_vectorial(phi)
    assert vf.violations() == []
    assert vf.hes == formula_to_hes(phi)


# -- guardedness --------------------------------------------------------------------

def test_graph_guarded_self_edge():
    g = build_guardedness_graph(hes(("mu", {"X": "<a>X"})))
    assert g.labels == {("X", "X"): frozenset({True})}


def test_graph_parallel_edges():
    g = build_guardedness_graph(hes(("mu", {"X": "X | <a>X"})))
    assert g.labels == {("X", "X"): frozenset({True, False})}


def test_weak_guardedness_example():
    rep = classify_formula(parse("mu X.q | (mu Y.(q & X) | (~q & Y) | <a>Y)"))
    st_ = {(o.source, o.target, o.guarded): s for o, s in rep.occurrences()}
    assert st_[("Y", "Y", False)] == "unguarded"
    assert st_[("Y", "Y", True)] == "guarded"
    assert st_[("Y", "X", False)] == "weakly-guarded"
    assert rep.level == "unguarded"


def test_example_formula_is_guarded():
    rep = classify_formula(parse(GUARDED_EX))
    assert rep.is_guarded and rep.offending() == []


def test_variant_is_not_guarded_at_last_x():
    rep = classify_formula(parse(UNGUARDED_EX))
    assert not rep.is_guarded
    bad = [o for o in rep.offending() if o.target == "X"]
    assert len(bad) == 1 and bad[0].source == "Z" and not bad[0].guarded


def test_single_guarded_equation_is_epsilon_free():
    assert classify_guardedness(hes(("mu", {"X": "<a>X"}))).level == "epsilon-free"


def _reach(edges, nodes):
    r = {(x, y) for x, y in edges}
    for k, i, j in itertools.product(nodes, nodes, nodes):
        if (i, k) in r and (k, j) in r:
            r.add((i, j))
    return r


def _level_oracle(h):
    g = build_guardedness_graph(h)
    nodes = h.variables()
    ung = [e for e in g.labels if False in g.labels[e]]
    reach = _reach(ung, nodes)
    if any((y, x) in reach for x, y in ung):
        return "unguarded"
    if not ung:
        return "epsilon-free"
    if all(h.block_of(y) < h.block_of(x) for x, y in ung):
        return "downwards-guarded"
    return "guarded"


@given(seeds)
def test_levels_match_independent_oracle(seed):
    h = random_hes(seed, blocks=1 + seed % 3, n_vars=1 + seed % 5, props=("p", "q"),
                   actions=("a", "b"), depth=3)
    rep = classify_guardedness(h)
    assert rep.level == _level_oracle(h)
    # the level chain
    assert not rep.is_epsilon_free or rep.is_downwards_guarded
    assert not rep.is_downwards_guarded or rep.is_guarded


# -- vectorial form -----------------------------------------------------------------

def test_skip_edge_routed_through_helper():
    h = hes(("mu", {"X": "<a>Y | p"}), ("nu", {"W": "[a]W"}), ("mu", {"Y": "<b>X"}))
    vf = hes_to_vectorial(h)
    assert vf.hes.equation("X") is parse("<a>H$Y$1 | p")
    assert vf.hes.block_of("H$Y$1") == 1 and vf.hes.equation("H$Y$1") is var("Y")


def test_vectorial_input_unchanged():
    h = hes(("mu", {"X": "<a>Y"}), ("nu", {"Y": "[a]X & Y"}))
    assert hes_to_vectorial(h).hes == h


def test_chain_rejects_skip_edges():
    h = hes(("mu", {"X": "<a>Y"}), ("nu", {"W": "X"}), ("mu", {"Y": "X"}))
    with pytest.raises(ValueError):
        VectorialForm(h)


@given(seeds)
def test_hes_to_vectorial_semantics_and_growth(seed):
    h = random_hes(seed, blocks=1 + seed % 4, n_vars=1 + seed % 5, props=("p",), actions=("a",))
    vf = hes_to_vectorial(h)
    assert vf.violations() == []
    assert len(vf.hes) <= len(h) + len(h) * len(h.blocks)
    t = sample_union(seed, actions=("a",), props=("p",))
    assert model_check_hes(vf.hes, t)[h.entry] == model_check_hes(h, t)[h.entry]


@given(seeds)
def test_hes_to_vectorial_keeps_guardedness(seed):
    h = random_hes(seed, blocks=3, n_vars=4, props=("p",), actions=("a",))
    assert classify_guardedness(hes_to_vectorial(h).hes).is_guarded == classify_guardedness(h).is_guarded


# -- structure and format -------------------------------------------------------------

def test_invariants_checked():
    with pytest.raises(ValueError, match="defined twice"):
        hes(("mu", {"X": "Y"}), ("nu", {"X": "p"}))
    with pytest.raises(ValueError, match="entry"):
        HES([EqBlock("mu", {"X": var("X")})], "Y")
    with pytest.raises(ValueError, match="fixpoint-free"):
        HES([EqBlock("mu", {"X": mu("Y", var("Y"))})], "X")


def test_size_sums_equations():
    h = hes(("mu", {"X": "<a>X | p"}), ("nu", {"Y": "X"}))
    assert h.size() == 4 + 1


def test_normalized_merges_equal_blocks():
    h = hes(("mu", {"X": "Y"}), ("mu", {"Y": "<a>X"}), ("nu", {"Z": "X"}))
    assert [b.qual for b in h.normalized().blocks] == ["mu", "nu"]


@given(seeds)
def test_json_roundtrip(seed):
    h = random_hes(seed, blocks=2, n_vars=4, props=("p", "q"), actions=("a", "b"))
    assert hes_from_json(hes_to_json(h)) == h
