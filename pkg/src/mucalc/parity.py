"""Parity games and the reductions that solve them through formula transformations.

Convention: max-parity. Player 0 wins a play iff the largest priority seen
infinitely often is even. Vertex sets are int bitmasks.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .guarded import (
    DEFAULT_CAP, epsilon_eliminate, normalize_automaton_form,
    strip_vacuous_binders, unravel_hes,
)
from .hes import classify_guardedness, formula_to_hes
from .semantics import LTS, eval_propositional, model_check
from .syntax import (
    FF, TT, Formula, box, call_deep, conj, dia, disj, land, lor, make_block,
    nprop, prop, rebuild, size, var, vec, fix,
)

__all__ = [
    "ParityGame", "solve_zielonka", "solve_bruteforce", "game_to_lts", "lts_to_game",
    "walukiewicz_formula", "product_construction", "gt_lower_pipeline",
    "expand_lower_pipeline", "exhaustive_bruteforce", "enumerate_edge_relations",
    "ACTION", "OWNER0", "prio_prop", "PRODUCT_SIZE_CONSTANT",
]

ACTION = "e"
OWNER0 = "owner0"
# size(phi') <= c * (size(phi) * |T|)^2 with |T| = states + transitions
PRODUCT_SIZE_CONSTANT = 1


def prio_prop(i: int) -> str:
    return f"prio_{i}"


@dataclass
class ParityGame:
    owner: list[int]
    prio: list[int]
    edges: list[tuple[int, int]]
    init: int = 0
    ids: list[int] | None = None
    succ: list[int] = field(init=False, repr=False)

    def __post_init__(self):
        n = len(self.owner)
        if n == 0 or len(self.prio) != n:
            raise ValueError("owner and priority needed for every vertex")
        if any(o not in (0, 1) for o in self.owner):
            raise ValueError("owners must be 0 or 1")
        if any(p < 0 for p in self.prio):
            raise ValueError("priorities must be non-negative")
        self.edges = sorted(set((int(u), int(v)) for u, v in self.edges))
        self.succ = [0] * n
        for u, v in self.edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge {(u, v)} out of range")
            self.succ[u] |= 1 << v
        dead = [v for v in range(n) if not self.succ[v]]
        if dead:
            raise ValueError(f"vertex {dead[0]} has no successor")
        if not 0 <= self.init < n:
            raise ValueError("initial vertex out of range")
        if self.ids is None:
            self.ids = list(range(n))

    @property
    def n(self) -> int:
        return len(self.owner)

    @property
    def max_prio(self) -> int:
        return max(self.prio)

    def successors(self, v: int) -> list[int]:
        return [u for u in range(self.n) if self.succ[v] >> u & 1]

    def reachable(self, v: int) -> int:
        seen, stack = 1 << v, [v]
        while stack:
            u = stack.pop()
            new = self.succ[u] & ~seen
            seen |= new
            stack.extend(w for w in range(self.n) if new >> w & 1)
        return seen

    def restrict(self, mask: int, init: int) -> "ParityGame":
        """Subgame on a successor-closed vertex set."""
        keep = [v for v in range(self.n) if mask >> v & 1]
        idx = {v: i for i, v in enumerate(keep)}
        return ParityGame([self.owner[v] for v in keep], [self.prio[v] for v in keep],
                          [(idx[u], idx[v]) for u, v in self.edges if u in idx and v in idx],
                          idx[init], [self.ids[v] for v in keep])

    def to_json(self) -> dict:
        return {
            "vertices": [{"id": self.ids[v], "owner": self.owner[v], "prio": self.prio[v]}
                         for v in range(self.n)],
            "edges": [[self.ids[u], self.ids[v]] for u, v in self.edges],
            "init": self.ids[self.init],
        }

    @classmethod
    def from_json(cls, data: dict | str) -> "ParityGame":
        if isinstance(data, str):
            data = json.loads(data)
        verts = data["vertices"]
        ids = [v["id"] for v in verts]
        idx = {x: i for i, x in enumerate(ids)}
        if len(idx) != len(ids):
            raise ValueError("duplicate vertex id")
        return cls([v["owner"] for v in verts], [v["prio"] for v in verts],
                   [(idx[u], idx[v]) for u, v in data["edges"]],
                   idx[data.get("init", ids[0])], ids)


# -- Zielonka --------------------------------------------------------------------

def _attractor(g: ParityGame, area: int, target: int, player: int) -> int:
    attr = target & area
    changed = True
    while changed:
        changed = False
        rest = area & ~attr
        v = 0
        while rest:
            if rest & 1:
                s = g.succ[v] & area
                if (s & attr) if g.owner[v] == player else not (s & ~attr):
                    attr |= 1 << v
                    changed = True
            rest >>= 1
            v += 1
    return attr


def _zielonka(g: ParityGame, area: int) -> tuple[int, int]:
    if not area:
        return 0, 0
    d = max(g.prio[v] for v in range(g.n) if area >> v & 1)
    p = d % 2
    top = sum(1 << v for v in range(g.n) if area >> v & 1 and g.prio[v] == d)
    a = _attractor(g, area, top, p)
    w = _zielonka(g, area & ~a)
    if not w[1 - p]:
        return (area, 0) if p == 0 else (0, area)
    b = _attractor(g, area, w[1 - p], 1 - p)
    w2 = list(_zielonka(g, area & ~b))
    w2[1 - p] |= b
    return w2[0], w2[1]


def solve_zielonka(g: ParityGame) -> tuple[int, int]:
    """Winning regions ``(W0, W1)`` as bitmasks."""
    return _zielonka(g, (1 << g.n) - 1)


def solve_bruteforce(g: ParityGame) -> tuple[int, int]:
    """Winning regions by enumerating every pair of positional strategies.

    Player 0 wins from ``v`` iff some strategy of player 0 wins against every
    strategy of player 1; each pair of positional strategies yields a lasso.
    """
    n = g.n
    mine = [v for v in range(n) if g.owner[v] == 0]
    theirs = [v for v in range(n) if g.owner[v] == 1]
    w0 = 0
    for s0 in itertools.product(*(g.successors(v) for v in mine)):
        good = (1 << n) - 1
        for s1 in itertools.product(*(g.successors(v) for v in theirs)):
            f = [0] * n
            for v, t in zip(mine, s0):
                f[v] = t
            for v, t in zip(theirs, s1):
                f[v] = t
            good &= _lasso_even(f, g.prio)
            if not good:
                break
        w0 |= good
    return w0, ((1 << n) - 1) & ~w0


def _lasso_even(f: list[int], prio: list[int]) -> int:
    """Vertices whose play under the successor function ``f`` is won by player 0."""
    out = 0
    for v in range(len(f)):
        pos: dict[int, int] = {}
        path = []
        u = v
        while u not in pos:
            pos[u] = len(path)
            path.append(u)
            u = f[u]
        if max(prio[x] for x in path[pos[u]:]) % 2 == 0:
            out |= 1 << v
    return out


def enumerate_edge_relations(n: int) -> np.ndarray:
    """All total edge relations on ``n`` vertices as ``n*n``-bit integers."""
    rows = [r for r in range(1, 1 << n)]
    out = np.zeros(len(rows) ** n, dtype=np.int64)
    for i, combo in enumerate(itertools.product(rows, repeat=n)):
        out[i] = sum(r << (n * v) for v, r in enumerate(combo))
    return out


def exhaustive_bruteforce(n: int, owner: list[int], prio: list[int],
                          relations: np.ndarray) -> np.ndarray:
    """Player-0 regions for many games sharing owners and priorities.

    Vectorised form of :func:`solve_bruteforce`: every positional strategy
    profile is a successor function ``f``; it is compatible with a relation iff
    every edge ``v -> f(v)`` is present.
    """
    full = (1 << n) - 1
    mine = [v for v in range(n) if owner[v] == 0]
    theirs = [v for v in range(n) if owner[v] == 1]
    rel = relations.astype(np.int64)

    def has(v, t):
        return (rel >> (n * v + t)) & 1

    w0 = np.zeros(len(rel), dtype=np.int64)
    for s0 in itertools.product(range(n), repeat=len(mine)):
        ok0 = np.ones(len(rel), dtype=np.int64)
        for v, t in zip(mine, s0):
            ok0 &= has(v, t)
        if not ok0.any():
            continue
        good = np.full(len(rel), full, dtype=np.int64)
        for s1 in itertools.product(range(n), repeat=len(theirs)):
            f = [0] * n
            for v, t in zip(mine, s0):
                f[v] = t
            for v, t in zip(theirs, s1):
                f[v] = t
            ok1 = np.ones(len(rel), dtype=np.int64)
            for v, t in zip(theirs, s1):
                ok1 &= has(v, t)
            win = _lasso_even(f, prio)
            good = np.where(ok1 == 1, good & win, good)
        w0 |= np.where(ok0 == 1, good, 0)
    return w0


# -- games as transition systems ------------------------------------------------------

def game_to_lts(g: ParityGame) -> LTS:
    """One action; ``owner0`` marks player-0 vertices, ``prio_i`` the priority."""
    props = [OWNER0] + [prio_prop(i) for i in range(g.max_prio + 1)]
    labels = [([OWNER0] if g.owner[v] == 0 else []) + [prio_prop(g.prio[v])]
              for v in range(g.n)]
    return LTS(g.n, [(u, ACTION, v) for u, v in g.edges], labels, [ACTION], props)


def lts_to_game(t: LTS, init: int = 0) -> ParityGame:
    prio = []
    for v in range(t.n):
        ps = [int(p[5:]) for p in t.labels[v] if p.startswith("prio_")]
        if len(ps) != 1:
            raise ValueError(f"state {v} needs exactly one priority label")
        prio.append(ps[0])
    owner = [0 if OWNER0 in t.labels[v] else 1 for v in range(t.n)]
    return ParityGame(owner, prio, [(s, u) for s, _, u in t.trans], init)


def walukiewicz_formula(d: int) -> Formula:
    """Closed formula true exactly at the vertices player 0 wins (priorities <= d).

    ``sigma_d X_d ... sigma_0 X_0. OR_i prio_i & ((owner0 & <e>X_i) | (~owner0 & [e]X_i))``
    with ``sigma_i = nu`` for even and ``mu`` for odd ``i``; the highest
    priority is bound outermost.
    """
    if d < 0:
        raise ValueError("d must be non-negative")
    own, other = prop(OWNER0), nprop(OWNER0)
    body = disj(land(prop(prio_prop(i)),
                     lor(land(own, dia(ACTION, var(f"X{i}"))),
                         land(other, box(ACTION, var(f"X{i}")))))
                for i in range(d + 1))
    for i in range(d + 1):
        body = fix("nu" if i % 2 == 0 else "mu", f"X{i}", body)
    return body


# -- product construction -------------------------------------------------------------

def product_construction(phi: Formula, t: LTS, s0: int) -> tuple[Formula, LTS]:
    """Compile ``t`` into ``phi``: a vectorial formula without modalities plus a
    one-state system, such that ``t, s0 |= phi`` iff the result holds.

    States are numbered from 1 in the names: proposition ``q`` at state ``s``
    becomes ``q_{s+1}``, variable ``X`` becomes ``X_{s+1}``.
    """
    if phi.free:
        raise ValueError(f"formula has free variables {sorted(phi.free)}")
    if not 0 <= s0 < t.n:
        raise ValueError(f"state {s0} out of range")
    from .syntax import propositions

    m = t.n
    memo: dict[tuple[int, int], Formula] = {}
    blocks: dict[int, object] = {}

    def tr(s: int, n: Formula) -> Formula:
        k = n.kind
        if k in ("tt", "ff"):
            return n
        if k == "prop":
            return prop(f"{n.name}_{s + 1}")
        if k == "nprop":
            return nprop(f"{n.name}_{s + 1}")
        if k == "var":
            return var(f"{n.name}_{s + 1}")
        key = (s, id(n))
        r = memo.get(key)
        if r is not None:
            return r
        if k == "dia":
            r = disj(tr(u, n.body) for u in t.successors(s, n.name))
        elif k == "box":
            r = conj(tr(u, n.body) for u in t.successors(s, n.name))
        elif k in ("or", "and"):
            r = rebuild(n, (tr(s, n.left), tr(s, n.right)))
        elif k == "fix":
            blk = blocks.get(id(n))
            if blk is None:
                blk = make_block((f"{n.name}_{u + 1}", tr(u, n.body)) for u in range(m))
                blocks[id(n)] = blk
            r = vec(n.sigma, f"{n.name}_{s + 1}", blk)
        else:
            raise ValueError(f"unsupported node {k} in product construction")
        memo[key] = r
        return r

    out = call_deep(phi.height * 4 + 64, tr, s0, phi)
    base_props = sorted(set(t.props) | propositions(phi))
    label = [f"{q}_{s + 1}" for s in range(m) for q in sorted(t.labels[s])]
    one = LTS(1, [], [label], [], [f"{q}_{s + 1}" for s in range(m) for q in base_props])
    return out, one


# -- pipelines ----------------------------------------------------------------------------

def _strip_modalities(phi: Formula, box_to=None, dia_to=None) -> Formula:
    """Replace ``[a]psi`` by ``box_to`` and ``<a>psi`` by ``dia_to``; ``None`` keeps ``psi``."""
    memo: dict[int, Formula] = {}

    def go(n: Formula) -> Formula:
        if not n.children:
            return n
        r = memo.get(id(n))
        if r is not None:
            return r
        if n.kind == "box":
            r = go(n.body) if box_to is None else box_to
        elif n.kind == "dia":
            r = go(n.body) if dia_to is None else dia_to
        else:
            r = rebuild(n, tuple(go(c) for c in n.children))
        memo[id(n)] = r
        return r

    return call_deep(phi.height, go, phi)


def _diamond_prefix(phi: Formula) -> Formula:
    """Put ``<e>`` in front of every variable and every fixpoint subformula."""
    memo: dict[int, Formula] = {}

    def go(n: Formula) -> Formula:
        if n.kind == "var":
            return dia(ACTION, n)
        if not n.children:
            return n
        r = memo.get(id(n))
        if r is not None:
            return r
        if n.kind == "vec":
            blk = n.block
            r = memo.get(id(blk))
            if r is None:
                r = make_block((x, go(b)) for x, b in blk.eqs)
                memo[id(blk)] = r
            r = dia(ACTION, vec(n.sigma, n.name, r))
        elif n.kind == "fix":
            r = dia(ACTION, fix(n.sigma, n.name, go(n.body)))
        else:
            r = rebuild(n, tuple(go(c) for c in n.children))
        memo[id(n)] = r
        return r

    return call_deep(phi.height * 2, go, phi)


def _prepare(g: ParityGame, v: int, trace: dict):
    sub = g.restrict(g.reachable(v), v)
    lts = game_to_lts(sub)
    w = walukiewicz_formula(sub.max_prio)
    phi, one = product_construction(w, lts, sub.init)
    trace.update(vertices=sub.n, formula_size=size(w), product_size=size(phi))
    return phi, one


def gt_lower_pipeline(g: ParityGame, v: int | None = None, cap: int = DEFAULT_CAP,
                      trace: dict | None = None) -> int:
    """Winner (0 or 1) from ``v`` via guarded transformation of the product formula.

    Only the part of the game reachable from ``v`` is compiled. The guarded
    system is unravelled, boxes become ``tt`` and diamonds ``ff``, the then
    unused binders are deleted and the remaining propositional formula is
    evaluated on the single state.
    """
    trace = trace if trace is not None else {}
    v = g.init if v is None else v
    phi, one = _prepare(g, v, trace)
    h = epsilon_eliminate(normalize_automaton_form(formula_to_hes(phi)), cap=cap)
    if not classify_guardedness(h).is_epsilon_free:
        raise AssertionError("epsilon elimination left unguarded edges")
    flat = unravel_hes(h, cap=cap)
    trace.update(guarded_equations=len(h), guarded_size=size(flat))
    plain = strip_vacuous_binders(_strip_modalities(flat, box_to=TT, dia_to=FF))
    trace["propositional_size"] = size(plain)
    return 0 if eval_propositional(plain, one.labels[0]) else 1


def expand_lower_pipeline(g: ParityGame, v: int | None = None, cap: int = DEFAULT_CAP,
                          trace: dict | None = None) -> int:
    """Winner (0 or 1) from ``v`` via unravelling of the diamond-padded product formula."""
    trace = trace if trace is not None else {}
    v = g.init if v is None else v
    phi, one = _prepare(g, v, trace)
    loop = LTS(1, [(0, ACTION, 0)], one.labels, [ACTION], one.props)
    padded = _diamond_prefix(phi)
    h = formula_to_hes(padded)
    if not classify_guardedness(h).is_epsilon_free:
        raise AssertionError("padded system is not epsilon-free")
    flat = unravel_hes(h, cap=cap)
    plain = _strip_modalities(flat)
    trace.update(equations=len(h), unravelled_size=size(flat), stripped_size=size(plain))
    return 0 if model_check(plain, loop) & 1 else 1
