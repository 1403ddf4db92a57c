import pytest
from hypothesis import given, strategies as st

from mucalc import (
    HES, BudgetExceeded, EpsStats, EqBlock, check_equiv, classify_formula,
    classify_guardedness, epsilon_eliminate, formula_to_hes, is_automaton_normal,
    modal_depth, normalize_automaton_form, parse, random_formula, random_hes,
    replace_non_weakly_guarded, simplify, size, strip_vacuous_binders, tau0, unfold,
    unravel_hes, var,
)
from mucalc.bench import generate_ns, generate_phi

from conftest import sample_union

seeds = st.integers(0, 10**6)
EXAMPLE = "mu X.[a]ff & [b]ff & [c]ff | <a>(mu Y.<b>(Y | X)) | mu Z.<a>X | <c>Z"


def system(*blocks):
    bs = [EqBlock(q, {x: parse(e) for x, e in eqs.items()}) for q, eqs in blocks]
    return HES(bs, next(iter(bs[0].eqs)))


# -- unfolding and sigma-hat replacement -----------------------------------------------

def test_unfold_examples():
    phi = parse("mu X.<a>X")
    assert unfold(phi).kind == "dia" and unfold(phi).body is phi
    assert unfold(parse("nu X.q")) is parse("q")
    with pytest.raises(ValueError):
        unfold(parse("<a>p"))


@given(seeds)
def test_unfold_preserves_semantics(seed):
    phi = random_formula(seed, max_binders=3, depth=6)
    if phi.kind == "fix":
        assert check_equiv(phi, unfold(phi), ltss=[sample_union(seed)])


def test_replacement_examples():
    assert replace_non_weakly_guarded(parse("mu X.X")) is parse("mu X.ff")
    assert replace_non_weakly_guarded(parse("nu X.X")) is parse("nu X.tt")
    out = replace_non_weakly_guarded(parse("mu X.X | <a>X"))
    assert out is parse("mu X.ff | <a>X")
    assert check_equiv(out, parse("mu X.X | <a>X"))


def test_replacement_keeps_weakly_guarded():
    # X occurs unguarded only through Y, a cycle of length two
    phi = parse("mu X.q | (mu Y.(q & X) | (~q & Y) | <a>Y)")
    assert replace_non_weakly_guarded(phi) is phi


@given(seeds)
def test_replacement_preserves_semantics(seed):
    phi = random_formula(seed, max_binders=3, depth=6, p_unguarded=0.8)
    if phi.kind == "fix":
        assert check_equiv(phi, replace_non_weakly_guarded(phi), ltss=[sample_union(seed)])


# -- tau0 --------------------------------------------------------------------------------

def test_tau0_fixes_guarded_formula():
    assert tau0(parse("mu X.<a>X")) is parse("mu X.<a>X")


def test_tau0_rejects_open():
    with pytest.raises(ValueError):
        tau0(parse("mu X.<a>Y"))


@pytest.mark.parametrize("n", range(1, 11))
def test_tau0_phi_depth_exact(n):
    out = tau0(generate_phi(n))
    assert modal_depth(out) == 2 ** (n - 1)
    assert size(out) <= 2 ** size(generate_phi(n))


def test_tau0_phi_doubles():
    sizes = [size(tau0(generate_phi(n))) for n in range(3, 11)]
    assert all(b / a >= 1.8 for a, b in zip(sizes, sizes[1:]))


@given(seeds)
def test_tau0_equivalent_and_downwards_guarded(seed):
    phi = random_formula(seed, max_binders=5, depth=8)
    out = tau0(phi)
    assert check_equiv(phi, out, ltss=[sample_union(seed)])
    assert classify_formula(out, source=phi).is_downwards_guarded
    assert size(out) <= 2 ** size(phi)


@given(seeds)
def test_tau0_output_guarded_under_block_order(seed):
    # guardedness does not depend on the priority used
    out = tau0(random_formula(seed, max_binders=5, depth=8))
    assert classify_formula(out).is_guarded


def test_tau0_cap():
    with pytest.raises(BudgetExceeded):
        tau0(generate_phi(12), cap=1000)


# -- unravelling -----------------------------------------------------------------------

def test_unravel_single_equation():
    assert unravel_hes(system(("mu", {"X": "<a>X"}))) is parse("mu X.<a>X")


def test_unravel_vectorial_example():
    h = system(("mu", {"X": "[a]ff & [b]ff & [c]ff | <a>Y | Z", "Y": "<b>(Y | X)",
                       "Z": "<a>X | <c>Z"}))
    flat = unravel_hes(h)
    assert not flat.free
    assert check_equiv(flat, parse(EXAMPLE), ltss=[sample_union(3, 30, 5, "abc", ())])


def test_unravel_rejects_open():
    with pytest.raises(ValueError):
        unravel_hes(system(("mu", {"X": "<a>Y"})))


@given(seeds)
def test_unravel_equivalent_and_bounded(seed):
    h = random_hes(seed, blocks=1 + seed % 4, n_vars=1 + seed % 4, props=("p", "q"),
                   actions=("a", "b"))
    flat = unravel_hes(h)
    assert size(flat) <= 2 ** (len(h) - 1) * h.max_equation_size()
    assert check_equiv(h, flat, ltss=[sample_union(seed)])


# -- automaton normal form and epsilon elimination -------------------------------------

def test_normalize_example():
    h = normalize_automaton_form(system(("mu", {"X": "<a>(X | q)"})))
    assert len(h.blocks) == 1
    (aux,) = [x for x in h.variables() if x != "X"]
    assert h.equation("X") is parse(f"<a>{aux}") and h.equation(aux) is parse("X | q")


def test_normalize_idempotent():
    h = system(("mu", {"X": "<a>X | p"}), ("nu", {"Y": "[b]X & Y"}))
    assert normalize_automaton_form(h) == h


@given(seeds)
def test_normalize_equivalent(seed):
    h = random_hes(seed, blocks=2, n_vars=3, props=("p", "q"), actions=("a", "b"), depth=4)
    out = normalize_automaton_form(h)
    assert is_automaton_normal(out)
    assert check_equiv(h, out, ltss=[sample_union(seed)])
    assert classify_guardedness(out).is_guarded == classify_guardedness(h).is_guarded


def test_eps_examples():
    assert epsilon_eliminate(system(("mu", {"X": "X | <a>X"}))) == system(("mu", {"X": "<a>X"}))
    assert epsilon_eliminate(system(("nu", {"X": "X & [a]X"}))) == system(("nu", {"X": "[a]X"}))


def test_eps_requires_normal_form():
    with pytest.raises(ValueError):
        epsilon_eliminate(system(("mu", {"X": "<a>(X | p)"})))


@given(seeds)
def test_eps_random(seed):
    h = random_hes(seed, blocks=1 + seed % 3, n_vars=1 + seed % 5, props=("p", "q"),
                   actions=("a", "b"), automaton_normal=True)
    stats = EpsStats()
    out = epsilon_eliminate(h, stats=stats)
    assert classify_guardedness(out).is_epsilon_free
    assert len(out) <= len(h) * len(h.blocks) and len(out.blocks) <= len(h.blocks)
    assert max(stats.kleene_steps, default=0) <= stats.lattice_height
    assert check_equiv(h, out, ltss=[sample_union(seed)])


def test_eps_ns_family():
    h = normalize_automaton_form(formula_to_hes(generate_ns(2, 2)))
    out = epsilon_eliminate(h)
    assert classify_guardedness(out).is_epsilon_free
    assert check_equiv(h, out, ltss=[sample_union(5, 30, 5, ("a",), ())])


def test_eps_cap():
    h = normalize_automaton_form(formula_to_hes(generate_ns(3, 3)))
    with pytest.raises(BudgetExceeded):
        epsilon_eliminate(h, cap=2)


# -- helpers ---------------------------------------------------------------------------

def test_simplify():
    assert simplify(parse("mu X. ff | <a>X & tt")) is parse("mu X.<a>X")
    assert simplify(parse("nu Y. p")) is parse("p")


def test_strip_vacuous_binders():
    assert strip_vacuous_binders(parse("mu X. p | (nu Y. q)")) is parse("p | q")
    with pytest.raises(ValueError):
        strip_vacuous_binders(parse("mu X. p | <a>X"))
    assert var("X").kind == "var"
