import pytest
from hypothesis import given, strategies as st

from mucalc import (
    FF, TT, ParseError, box, dia, fixpoint_map, is_bmu, is_fixpoint_free, is_propositional,
    is_well_named, land, lor, make_block, model_check, modal_depth, mu, nprop, nu, parse,
    prop, random_formula, random_lts, render, size, substitute, var, vec,
)
from mucalc.bench import generate_phi

seeds = st.integers(0, 10**6)


def test_parse_basic():
    assert parse("mu X. <a> X") is mu("X", dia("a", var("X")))


def test_precedence_and_binds_tighter():
    got = parse("mu X.[a]ff | <a>X")
    assert got is mu("X", lor(box("a", FF), dia("a", var("X"))))
    assert parse("p | q & r") is lor(prop("p"), land(prop("q"), prop("r")))


def test_fixpoint_scope_extends_right():
    assert parse("mu X. p | <a>X") is mu("X", lor(prop("p"), dia("a", var("X"))))


def test_rebinding_rejected():
    with pytest.raises(ParseError, match="bound twice"):
        parse("mu X. mu X. X")


def test_syntax_error_has_position():
    with pytest.raises(ParseError) as e:
        parse("mu X. <a X")
    assert e.value.pos is not None


def test_free_variable_rejected_when_closed_required():
    with pytest.raises(ParseError):
        parse("<a>X", closed=True)
    assert parse("<a>X").free == frozenset({"X"})


def test_render_examples():
    assert render(mu("X", dia("a", var("X")))) == "mu X.<a>X"
    assert render(lor(prop("p"), nprop("q"))) == "p | ~q"


@given(seeds)
def test_render_parse_roundtrip(seed):
    phi = random_formula(seed, max_binders=4, depth=7)
    assert parse(render(phi)) is phi


def test_sizes():
    assert size(var("X")) == 1
    assert size(parse("mu X. X | X")) == 3
    assert size(generate_phi(4)) == 13
    assert [size(generate_phi(n)) for n in range(1, 13)] == [3 * n + 1 for n in range(1, 13)]


def test_vecfix_block_shared_in_size():
    blk = make_block([("X", dia("a", var("Y"))), ("Y", var("X"))])
    a, b = vec("mu", "X", blk), vec("mu", "Y", blk)
    # 2 entry nodes + block (1 block node + its 2 equations' distinct nodes)
    alone = size(a) - 1
    assert size(lor(a, b)) == 1 + 2 + alone


def test_modal_depth():
    assert modal_depth(prop("q")) == 0 and modal_depth(var("X")) == 0
    assert modal_depth(parse("mu X.<a><a>X")) == 2


def _md_tree(phi):
    if phi.kind in ("dia", "box"):
        return 1 + _md_tree(phi.body)
    if phi.kind == "vec":
        return max(_md_tree(b) for _, b in phi.block.eqs)
    return max((_md_tree(c) for c in phi.children), default=0)


@given(seeds)
def test_modal_depth_matches_recursion(seed):
    phi = random_formula(seed, max_binders=3, depth=6)
    assert modal_depth(phi) == _md_tree(phi)


def test_substitute_examples():
    psi = parse("mu X.<a>X")
    assert substitute(dia("a", var("X")), "X", psi) is dia("a", psi)
    assert substitute(parse("mu X.X"), "X", prop("p")) is parse("mu X.X")


def test_substitute_avoids_capture():
    # substituting a formula mentioning Y under a binder for Y must rename it
    phi = parse("mu Y. X | <a>Y")
    out = substitute(phi, "X", var("Y"))
    assert out.free == frozenset({"Y"})
    t = random_lts(3, 4, ("a",), ("p",))
    for rho in range(1 << t.n):
        assert model_check(out, t, {"Y": rho}) == model_check(phi, t, {"X": rho})


@given(seeds, seeds)
def test_substitution_commutes(s1, s2):
    phi = random_formula(s1, max_binders=2, depth=5)
    body = phi.body if phi.kind == "fix" else phi
    x = phi.name if phi.kind == "fix" else "X1"
    psi = random_formula(s2, max_binders=2, depth=4)
    t = random_lts(s1 ^ s2, 5, ("a", "b"), ("p", "q"))
    env = {y: 0b10101 & t.full for y in body.free - {x}}
    want = model_check(body, t, {**env, x: model_check(psi, t)})
    assert model_check(substitute(body, x, psi), t, env) == want


def test_substitution_never_inflates_beyond_sum():
    phi, psi = parse("<a>X | [b]X & p"), parse("mu Z.<a>Z | q")
    assert size(substitute(phi, "X", psi)) <= size(phi) + size(psi)


def test_hash_consing_identity():
    assert parse("<a>(p | q)") is dia("a", lor(prop("p"), prop("q")))
    assert parse("<a>(p | q)") is not parse("<a>(q | p)")


@given(seeds)
def test_bmu_iff_depth_zero(seed):
    phi = random_formula(seed, max_binders=2, depth=5, p_var=0.4)
    assert is_bmu(phi) == (modal_depth(phi) == 0)
    assert is_propositional(phi) == (is_bmu(phi) and is_fixpoint_free(phi))


def test_propositional_examples():
    assert is_propositional(parse("(p | q) & ~r"))
    assert not is_propositional(parse("mu X. p | X"))
    assert is_bmu(parse("mu X. p | X"))


def test_well_named_and_fixpoint_map():
    phi = parse("mu X. <a>(nu Y. [b]Y & X)")
    assert is_well_named(phi)
    fp = fixpoint_map(phi)
    assert set(fp) == {"X", "Y"} and fp["X"] is phi
    assert not is_well_named(lor(mu("X", var("X")), nu("X", var("X"))))


def test_constants():
    assert render(TT) == "tt" and render(FF) == "ff"
    assert size(TT) == 1
