"""Seeded random instances: transition systems, formulas, equation systems."""
from __future__ import annotations

import random
from typing import Sequence

from .hes import HES, EqBlock
from .syntax import (
    FF, TT, Formula, box, dia, fix, land, lor, nprop, prop, var,
)

__all__ = ["random_lts", "random_formula", "random_hes", "random_game", "unguarded_rate", "rng_of"]


def rng_of(seed) -> random.Random:
    return seed if isinstance(seed, random.Random) else random.Random(seed)


def random_lts(seed, max_states: int = 4, actions: Sequence[str] = ("a",),
               props: Sequence[str] = ("p",), density: float = 0.35,
               n_states: int | None = None):
    from .semantics import LTS

    rng = rng_of(seed)
    n = n_states or rng.randint(1, max_states)
    trans = [(s, a, t) for s in range(n) for a in actions for t in range(n)
             if rng.random() < density]
    labels = [[p for p in props if rng.random() < 0.5] for _ in range(n)]
    return LTS(n, trans, labels, actions, props)


def random_formula(seed, max_binders: int = 3, depth: int = 6,
                   props: Sequence[str] = ("p", "q"), actions: Sequence[str] = ("a", "b"),
                   p_unguarded: float = 0.5, p_var: float = 0.6) -> Formula:
    """A closed, well-named formula in positive normal form.

    When a variable leaf is drawn, with probability ``p_unguarded`` it is taken
    from the variables whose binder has no modality between it and the leaf;
    otherwise the leaf is placed under a modality (unless it already is).
    """
    rng = rng_of(seed)
    counter = [0]

    def leaf(scope):
        if scope and rng.random() < p_var:
            open_ = [x for x, g in scope if not g]
            if open_ and rng.random() < p_unguarded:
                return var(rng.choice(open_))
            x, g = rng.choice(scope)
            if g:
                return var(x)
            m = dia if rng.random() < 0.5 else box
            return m(rng.choice(actions), var(x))
        r = rng.random()
        if r < 0.05:
            return TT
        if r < 0.1:
            return FF
        p = rng.choice(props)
        return prop(p) if r < 0.6 else nprop(p)

    def gen(d, scope):
        if d <= 0 or rng.random() < 0.2:
            return leaf(scope)
        r = rng.random()
        if counter[0] < max_binders and r < 0.3:
            counter[0] += 1
            x = f"X{counter[0]}"
            sigma = rng.choice(("mu", "nu"))
            return fix(sigma, x, gen(d - 1, scope + [(x, False)]))
        if r < 0.5:
            return lor(gen(d - 1, scope), gen(d - 1, scope))
        if r < 0.7:
            return land(gen(d - 1, scope), gen(d - 1, scope))
        m = dia if r < 0.85 else box
        return m(rng.choice(actions), gen(d - 1, [(x, True) for x, _ in scope]))

    return gen(depth, [])


def unguarded_rate(phi: Formula) -> tuple[int, int]:
    """(unguarded, total) variable occurrences, counted on the syntax tree.

    An occurrence is unguarded when no modality separates it from its binder.
    """
    unguarded = total = 0
    stack = [(phi, {})]
    while stack:
        n, guard = stack.pop()
        k = n.kind
        if k == "var":
            if n.name in guard:
                total += 1
                unguarded += not guard[n.name]
            continue
        if k == "fix":
            guard = {**guard, n.name: False}
        elif k in ("dia", "box"):
            guard = {x: True for x in guard}
        stack.extend((c, guard) for c in n.children)
    return unguarded, total


def _random_expr(rng, d, variables, props, actions, automaton_normal):
    if d <= 0 or rng.random() < 0.25:
        r = rng.random()
        if r < 0.55 and variables:
            return var(rng.choice(variables))
        if r < 0.6:
            return TT
        if r < 0.65:
            return FF
        p = rng.choice(props)
        return prop(p) if r < 0.85 else nprop(p)
    r = rng.random()
    if r < 0.35:
        return lor(*(_random_expr(rng, d - 1, variables, props, actions, automaton_normal)
                     for _ in range(2)))
    if r < 0.6:
        return land(*(_random_expr(rng, d - 1, variables, props, actions, automaton_normal)
                      for _ in range(2)))
    m = dia if r < 0.8 else box
    if automaton_normal:
        return m(rng.choice(actions), var(rng.choice(variables)))
    return m(rng.choice(actions),
             _random_expr(rng, d - 1, variables, props, actions, automaton_normal))


def random_hes(seed, blocks: int = 2, n_vars: int = 3, props: Sequence[str] = ("p",),
               actions: Sequence[str] = ("a",), depth: int = 3,
               automaton_normal: bool = False) -> HES:
    """A closed HES with ``blocks`` blocks (at most ``n_vars``) and ``n_vars`` equations.

    With ``automaton_normal`` every modality is applied to a single variable.
    """
    rng = rng_of(seed)
    blocks = max(1, min(blocks, n_vars))
    sizes = [1] * blocks
    for _ in range(n_vars - blocks):
        sizes[rng.randrange(blocks)] += 1
    names = [f"X{i}" for i in range(n_vars)]
    qual = rng.choice(("mu", "nu"))
    out, pos = [], 0
    for b, k in enumerate(sizes):
        eqs = {}
        for x in names[pos:pos + k]:
            eqs[x] = _random_expr(rng, depth, names, props, actions, automaton_normal)
        out.append(EqBlock(qual, eqs))
        qual = "nu" if qual == "mu" else "mu"
        pos += k
    return HES(out, names[0])


def random_game(seed, max_vertices: int = 5, max_prio: int = 3, n_vertices: int | None = None,
                out_degree: int = 2):
    """A total parity game with priorities in ``0..max_prio - 1``."""
    from .parity import ParityGame

    rng = rng_of(seed)
    n = n_vertices or rng.randint(1, max_vertices)
    owner = [rng.randrange(2) for _ in range(n)]
    prio = [rng.randrange(max_prio) for _ in range(n)]
    edges = set()
    for v in range(n):
        for _ in range(rng.randint(1, out_degree)):
            edges.add((v, rng.randrange(n)))
    return ParityGame(owner, prio, sorted(edges), init=0)

