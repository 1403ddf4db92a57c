"""Guarded transformation, unraveling of equation systems and epsilon elimination."""
from __future__ import annotations

from dataclasses import dataclass, field

from . import dnf
from .hes import HES, EqBlock
from .syntax import (
    FF, TT, Formula, call_deep, fix, fresh_name, iter_nodes, rebuild,
    sigma_hat, size, substitute, var,
)

__all__ = [
    "BudgetExceeded", "DEFAULT_CAP", "unfold", "replace_non_weakly_guarded",
    "tau0", "unravel_hes", "normalize_automaton_form", "is_automaton_normal",
    "epsilon_eliminate", "EpsStats", "simplify", "strip_vacuous_binders",
]

DEFAULT_CAP = 1_000_000


class BudgetExceeded(RuntimeError):
    """An exponential procedure outgrew its node budget."""

    def __init__(self, what: str, cap: int, reached: int):
        super().__init__(f"{what}: size {reached} exceeds cap {cap}")
        self.what, self.cap, self.reached = what, cap, reached


def _need_fix(phi: Formula, what: str):
    if phi.kind != "fix":
        raise ValueError(f"{what} expects a fixpoint formula, got {phi.kind}")


def unfold(phi: Formula) -> Formula:
    """``sigma X.psi`` becomes ``psi[sigma X.psi / X]`` with the fixpoint shared."""
    _need_fix(phi, "unfold")
    return substitute(phi.body, phi.name, phi)


def _replace_unguarded(body: Formula, x: str, by: Formula) -> Formula:
    """Replace occurrences of ``x`` reached through boolean connectives only.

    These are exactly the occurrences that are not weakly guarded: a modality
    guards an occurrence, and an inner binder makes it at worst weakly guarded.
    """
    memo: dict[int, Formula] = {}

    def go(n: Formula) -> Formula:
        if x not in n.free:
            return n
        if n.kind == "var":
            return by
        if n.kind not in ("or", "and"):
            return n
        r = memo.get(id(n))
        if r is None:
            r = rebuild(n, (go(n.left), go(n.right)))
            memo[id(n)] = r
        return r

    return call_deep(body.height, go, body)


def replace_non_weakly_guarded(phi: Formula) -> Formula:
    """``sigma X.psi`` with non-weakly-guarded ``X`` replaced by ff (mu) or tt (nu)."""
    _need_fix(phi, "replace_non_weakly_guarded")
    return fix(phi.sigma, phi.name,
               _replace_unguarded(phi.body, phi.name, sigma_hat(phi.sigma)))


def tau0(phi: Formula, cap: int = DEFAULT_CAP) -> Formula:
    """Classic guarded transformation working from the innermost binders out.

    A strict fixpoint subformula ``sigma X.psi`` becomes
    ``f(t(psi))[sigma X.f(t(psi)) / X]`` where ``t`` transforms the body and
    ``f`` replaces non-weakly-guarded occurrences of ``X``; the outermost
    fixpoint is not unfolded.
    """
    if phi.free:
        raise ValueError(f"formula has free variables {sorted(phi.free)}")
    memo: dict[int, Formula] = {}

    def check(n: Formula):
        s = size(n)
        if s > cap:
            raise BudgetExceeded("tau0", cap, s)

    def guard_body(n: Formula) -> Formula:
        return _replace_unguarded(t(n.body), n.name, sigma_hat(n.sigma))

    def t(n: Formula) -> Formula:
        if not n.children:
            return n
        r = memo.get(id(n))
        if r is not None:
            return r
        if n.kind == "vec":
            raise ValueError("tau0 is defined for non-vectorial formulas")
        if n.kind == "fix":
            body = guard_body(n)
            r = substitute(body, n.name, fix(n.sigma, n.name, body))
            check(r)
        else:
            r = rebuild(n, tuple(t(c) for c in n.children))
        memo[id(n)] = r
        return r

    def run():
        if phi.kind == "fix":
            return fix(phi.sigma, phi.name, guard_body(phi))
        return t(phi)

    # unfolding can multiply the height; leave generous headroom
    out = call_deep(max(phi.height * 64, 2000), run)
    check(out)
    return out


# -- unraveling -------------------------------------------------------------------

def unravel_hes(h: HES, cap: int = DEFAULT_CAP) -> Formula:
    """Flat formula equivalent to a closed HES.

    Variables are ordered linearly by block, then by position, with the
    entry variable on top. The formula for ``X`` under a context set ``Y``
    (``X`` being the least element of ``Y``) translates ``e_X`` and handles a
    variable ``V`` as follows: ``X`` itself and members of ``Y`` above ``X``
    stay variables; ``V`` below ``X`` opens a binder with context ``Y + V``;
    ``V`` above ``X`` and outside ``Y`` opens a binder with context
    ``Y + V`` minus everything below ``V``.
    """
    if not h.is_closed:
        raise ValueError(f"system has free variables {list(h.free)}")
    order = [h.entry] + [x for x in h.variables() if x != h.entry]
    rank = {x: len(order) - i for i, x in enumerate(order)}   # larger = higher
    per_ctx = h.max_equation_size()
    memo: dict[frozenset, Formula] = {}
    busy: set[frozenset] = set()

    def build(x: str, ctx: frozenset) -> Formula:
        r = memo.get(ctx)
        if r is not None:
            return r
        assert min(ctx, key=rank.__getitem__) == x
        assert ctx not in busy, "cyclic context nesting"
        if (len(memo) + 1) * per_ctx > cap:
            raise BudgetExceeded("unravel_hes", cap, (len(memo) + 1) * per_ctx)
        busy.add(ctx)
        e_memo: dict[int, Formula] = {}

        def t(n: Formula) -> Formula:
            if n.kind == "var":
                v = n.name
                if v == x or (v in ctx and rank[v] > rank[x]):
                    return n
                if rank[v] < rank[x]:
                    return build(v, ctx | {v})
                keep = frozenset(z for z in ctx if rank[z] > rank[v])
                return build(v, keep | {v})
            if not n.free:
                return n
            r = e_memo.get(id(n))
            if r is None:
                r = rebuild(n, tuple(t(c) for c in n.children))
                e_memo[id(n)] = r
            return r

        r = fix(h.qual(x), x, t(h.equation(x)))
        busy.discard(ctx)
        memo[ctx] = r
        return r

    depth = (1 << min(len(order), 20)) * (2 + max(
        e.height for b in h.blocks for e in b.eqs.values()))
    return call_deep(depth, build, h.entry, frozenset({h.entry}))


# -- automaton normal form --------------------------------------------------------

def is_automaton_normal(h: HES) -> bool:
    return all(n.body.kind == "var"
               for b in h.blocks for e in b.eqs.values()
               for n in iter_nodes(e) if n.kind in ("dia", "box"))


def normalize_automaton_form(h: HES) -> HES:
    """Give every modality a single variable as argument.

    The argument of a modality is moved into an auxiliary equation of the
    same block. Equal arguments within a block share one auxiliary variable.
    """
    taken = set(h.variables()) | set(h.free)
    blocks: list[EqBlock] = []
    for b in h.blocks:
        eqs: dict[str, Formula] = {}
        aux: dict[int, str] = {}
        memo: dict[int, Formula] = {}

        def go(n: Formula) -> Formula:
            if not n.children:
                return n
            r = memo.get(id(n))
            if r is not None:
                return r
            if n.kind in ("dia", "box") and n.body.kind != "var":
                body = n.body
                name = aux.get(id(body))
                if name is None:
                    name = fresh_name("A", taken)
                    taken.add(name)
                    aux[id(body)] = name
                    eqs[name] = go(body)
                r = rebuild(n, (var(name),))
            else:
                r = rebuild(n, tuple(go(c) for c in n.children))
            memo[id(n)] = r
            return r

        out = {x: go(e) for x, e in b.eqs.items()}
        out.update(eqs)
        blocks.append(EqBlock(b.qual, out))
    return HES(blocks, h.entry, h.free)


# -- epsilon elimination -----------------------------------------------------------

@dataclass
class EpsStats:
    lattice_height: int = 0
    kleene_steps: list[int] = field(default_factory=list)
    max_clauses: int = 0


def copy_name(x: str, block: int) -> str:
    return f"{x}'{block}"


def epsilon_eliminate(h: HES, stats: EpsStats | None = None,
                      cap: int = DEFAULT_CAP, prune: bool = True) -> HES:
    """Equivalent system without unguarded dependency edges.

    Each variable of block ``l`` gets a copy in every more significant block
    ``i < l`` with the same right-hand side; the copy records that a state of
    priority ``i`` was passed. Variables are then processed from the least
    significant upwards: first the unguarded self-reference is solved by
    Kleene iteration in the lattice of normal forms, then every unguarded
    reference to the variable elsewhere is replaced by its right-hand side,
    with less significant variables redirected to their copies in its block.
    """
    if not h.is_closed:
        raise ValueError("epsilon elimination needs a closed system")
    if not is_automaton_normal(h):
        raise ValueError("system is not in automaton normal form")
    stats = stats if stats is not None else EpsStats()
    k = len(h.blocks)
    block: dict[str, int] = {}
    base: dict[str, str] = {}
    eq: dict[str, frozenset] = {}
    for i, b in enumerate(h.blocks):
        for x, e in b.eqs.items():
            d = dnf.from_formula(e)
            block[x], base[x], eq[x] = i, x, d
            for j in range(i):
                c = copy_name(x, j)
                if c in h:
                    raise ValueError(f"name clash with copy variable {c}")
                block[c], base[c], eq[c] = j, x, d
    props = {a[1] for d in eq.values() for a in dnf.atoms(d) if a[0] in ("p", "np")}
    H = 2 * len(props) + 3 * len(eq)
    stats.lattice_height = H
    qual = [b.qual for b in h.blocks]

    def copy_in(v: str, i: int) -> str:
        """The variable behaving like ``v`` but with the priority of block ``i``."""
        if block[v] <= i:
            return v
        b0 = base[v]
        return b0 if block[b0] == i else copy_name(b0, i)

    def watch(d):
        stats.max_clauses = max(stats.max_clauses, len(d))
        total = dnf.weight(d)
        if total > cap:
            raise BudgetExceeded("epsilon_eliminate", cap, total)
        return d

    def drop_self_loop(z: str):
        e = eq[z]
        a = ("var", z)
        if a not in dnf.atoms(e):
            stats.kleene_steps.append(0)
            return
        cur = dnf.substitute(e, a, dnf.TRUE if qual[block[z]] == "nu" else dnf.FALSE)
        steps = 0
        while True:
            steps += 1
            nxt = watch(dnf.substitute(e, a, cur))
            if nxt == cur:
                break
            assert steps <= H, "Kleene iteration exceeded the lattice height"
            cur = nxt
        stats.kleene_steps.append(steps)
        eq[z] = cur

    order = sorted(eq, key=lambda x: (block[x], x))
    for x in reversed(order):
        drop_self_loop(x)
        i = block[x]
        repl = dnf.rename(eq[x], lambda a, i=i: a if a[0] in ("p", "np")
                          else a[:-1] + (copy_in(a[-1], i),))
        a = ("var", x)
        for y in order:
            if y != x and a in dnf.atoms(eq[y]):
                eq[y] = watch(dnf.substitute(eq[y], a, repl))
    for y, d in eq.items():
        assert not any(a[0] == "var" for a in dnf.atoms(d)), f"{y} still has epsilon edges"

    keep = set(eq)
    if prune:
        keep, stack = {h.entry}, [h.entry]
        while stack:
            for a in dnf.atoms(eq[stack.pop()]):
                if a[0] in ("dia", "box") and a[2] not in keep:
                    keep.add(a[2])
                    stack.append(a[2])
    blocks = []
    for i in range(k):
        eqs = {x: dnf.to_formula(eq[x]) for x in order if block[x] == i and x in keep}
        if eqs:
            blocks.append(EqBlock(qual[i], eqs))
    return HES(blocks, h.entry)


# -- simplification ------------------------------------------------------------------

def simplify(phi: Formula) -> Formula:
    """Constant folding and removal of binders whose variable does not occur."""
    memo: dict[int, Formula] = {}

    def go(n: Formula) -> Formula:
        if not n.children or n.kind == "vec":
            return n
        r = memo.get(id(n))
        if r is not None:
            return r
        k = n.kind
        if k in ("or", "and"):
            a, b = go(n.left), go(n.right)
            unit, zero = (FF, TT) if k == "or" else (TT, FF)
            if a is zero or b is zero:
                r = zero
            elif a is unit:
                r = b
            elif b is unit or a is b:
                r = a
            else:
                r = rebuild(n, (a, b))
        elif k == "fix":
            body = go(n.body)
            r = body if n.name not in body.free else fix(n.sigma, n.name, body)
        else:
            r = rebuild(n, (go(n.body),))
        memo[id(n)] = r
        return r

    return call_deep(phi.height, go, phi)


def strip_vacuous_binders(phi: Formula) -> Formula:
    """Delete every fixpoint binder; each must have no remaining occurrence."""
    memo: dict[int, Formula] = {}

    def go(n: Formula) -> Formula:
        if not n.children:
            return n
        r = memo.get(id(n))
        if r is not None:
            return r
        if n.kind == "fix":
            if n.name in n.body.free:
                raise ValueError(f"binder {n.name} still has occurrences")
            r = go(n.body)
        elif n.kind == "vec":
            raise ValueError("vectorial binder left in formula")
        else:
            r = rebuild(n, tuple(go(c) for c in n.children))
        memo[id(n)] = r
        return r

    return call_deep(phi.height, go, phi)
