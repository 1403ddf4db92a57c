"""Hierarchical equation systems, vectorial form and guardedness analysis."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator

from .syntax import (
    Block, Formula, call_deep, fresh_name, is_fixpoint_free, iter_nodes, parse,
    rebuild, render, size, var,
)

__all__ = [
    "EqBlock", "HES", "VectorialForm", "Occurrence", "GuardednessGraph",
    "GuardednessReport", "LEVELS", "formula_to_hes", "formula_to_vectorial",
    "build_guardedness_graph", "classify_guardedness", "classify_formula",
    "hes_to_vectorial", "hes_from_json", "hes_to_json", "binder_priority",
]

LEVELS = ("unguarded", "guarded", "downwards-guarded", "epsilon-free")


@dataclass
class EqBlock:
    qual: str
    eqs: dict[str, Formula] = field(default_factory=dict)


@dataclass
class HES:
    """Ordered blocks of fixpoint equations with a designated entry variable.

    Block 0 is the outermost block, i.e. has the highest priority. ``free``
    lists variables that are referenced but not defined; it is computed when
    omitted. ``origin`` optionally maps a variable to the binder name it was
    generated from.
    """

    blocks: list[EqBlock]
    entry: str
    free: tuple[str, ...] | None = None
    origin: dict[str, str] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        self._index: dict[str, int] = {}
        for i, b in enumerate(self.blocks):
            if b.qual not in ("mu", "nu"):
                raise ValueError(f"bad block qualifier {b.qual!r}")
            if not b.eqs:
                raise ValueError(f"block {i} is empty")
            for x, e in b.eqs.items():
                if x in self._index:
                    raise ValueError(f"variable {x} defined twice")
                if not isinstance(e, Formula) or not is_fixpoint_free(e):
                    raise ValueError(f"right-hand side of {x} must be fixpoint-free")
                self._index[x] = i
        if not self.blocks or self.entry not in self.blocks[0].eqs:
            raise ValueError("entry variable must be defined in the first block")
        used = set().union(*(e.free for b in self.blocks for e in b.eqs.values()))
        actual = tuple(sorted(used - self._index.keys()))
        if self.free is None:
            self.free = actual
        else:
            self.free = tuple(self.free)
            missing = set(actual) - set(self.free)
            if missing:
                raise ValueError(f"undeclared free variables: {sorted(missing)}")
            clash = set(self.free) & self._index.keys()
            if clash:
                raise ValueError(f"free variables also defined: {sorted(clash)}")

    # -- queries -----------------------------------------------------------
    def variables(self) -> list[str]:
        return [x for b in self.blocks for x in b.eqs]

    def block_of(self, x: str) -> int:
        return self._index[x]

    def equation(self, x: str) -> Formula:
        return self.blocks[self._index[x]].eqs[x]

    def qual(self, x: str) -> str:
        return self.blocks[self._index[x]].qual

    def __contains__(self, x: str) -> bool:
        return x in self._index

    def __len__(self) -> int:
        return len(self._index)

    @property
    def is_closed(self) -> bool:
        return not self.free

    def size(self) -> int:
        return sum(size(e) for b in self.blocks for e in b.eqs.values())

    def max_equation_size(self) -> int:
        """Largest equation ``X = e_X``, counting the left-hand side."""
        return max(1 + size(e) for b in self.blocks for e in b.eqs.values())

    def edges(self) -> set[tuple[str, str]]:
        """Variable dependency edges between defined variables."""
        out = set()
        for b in self.blocks:
            for x, e in b.eqs.items():
                out.update((x, y) for y in e.free if y in self._index)
        return out

    def normalized(self) -> "HES":
        """Merge adjacent blocks with equal qualifiers."""
        blocks: list[EqBlock] = []
        for b in self.blocks:
            if blocks and blocks[-1].qual == b.qual:
                blocks[-1].eqs.update(b.eqs)
            else:
                blocks.append(EqBlock(b.qual, dict(b.eqs)))
        return HES(blocks, self.entry, self.free)

    def map_equations(self, fn) -> "HES":
        return HES([EqBlock(b.qual, {x: fn(x, e) for x, e in b.eqs.items()})
                    for b in self.blocks], self.entry, self.free)

    def __str__(self) -> str:
        lines = []
        for i, b in enumerate(self.blocks):
            for x, e in b.eqs.items():
                mark = "*" if x == self.entry else " "
                lines.append(f"{mark}[{i}:{b.qual}] {x} = {render(e)}")
        return "\n".join(lines)


def hes_to_json(h: HES) -> dict:
    return {
        "blocks": [{"qual": b.qual, "eqs": {x: render(e) for x, e in b.eqs.items()}}
                   for b in h.blocks],
        "entry": h.entry,
        "free": list(h.free),
    }


def hes_from_json(data: dict | str) -> HES:
    if isinstance(data, str):
        data = json.loads(data)
    blocks = [EqBlock(b["qual"], {x: parse(t) for x, t in b["eqs"].items()})
              for b in data["blocks"]]
    return HES(blocks, data["entry"], data.get("free"))


# -- formula -> equational form ------------------------------------------------

def formula_to_hes(phi: Formula) -> HES:
    """One single-equation block per fixpoint binder, in depth-first order.

    Distinct binder nodes that reuse a name (as produced by unfolding) get
    distinct equation variables; a binder shared in the DAG under the same
    context yields a single equation.
    """
    return _equational(phi)[0]


def formula_to_vectorial(phi: Formula) -> "VectorialForm":
    h, parents = _equational(phi)
    return VectorialForm(h, parents)


def _equational(phi: Formula) -> tuple[HES, list[int]]:
    if phi.free:
        raise ValueError(f"formula has free variables {sorted(phi.free)}")
    return call_deep(phi.height, _equational_rec, phi)


def _equational_rec(phi: Formula) -> tuple[HES, list[int]]:
    blocks: list[EqBlock] = []
    parents: list[int] = []
    taken: set[str] = set()
    binder_memo: dict = {}
    e_memo: dict = {}

    origin: dict[str, str] = {}

    def claim(x: str) -> str:
        # deterministic renaming, so equal inputs give equal systems
        src, i = x, 1
        while x in taken:
            x, i = f"{src}${i}", i + 1
        taken.add(x)
        origin[x] = src
        return x

    def ctx(n, env):
        return (id(n), tuple(env[v] for v in sorted(n.free)))

    def e(n: Formula, env: dict, cur: int) -> Formula:
        k = n.kind
        if k == "var":
            return var(env[n.name])
        if not n.children:
            return n
        key = ctx(n, env)
        r = e_memo.get(key)
        if r is not None:
            return r
        if k == "fix":
            r = var(bind_fix(n, env, cur))
        elif k == "vec":
            r = var(bind_vec(n, env, cur)[n.name])
        else:
            r = rebuild(n, tuple(e(c, env, cur) for c in n.children))
        e_memo[key] = r
        return r

    def bind_fix(n: Formula, env: dict, cur: int) -> str:
        key = ctx(n, env)
        if key in binder_memo:
            return binder_memo[key]
        x = claim(n.name)
        binder_memo[key] = x
        idx = len(blocks)
        blocks.append(EqBlock(n.sigma))
        parents.append(cur)
        blocks[idx].eqs[x] = e(n.body, {**env, n.name: x}, idx)
        return x

    def bind_vec(n: Formula, env: dict, cur: int) -> dict:
        blk = n.block
        key = (id(blk), n.sigma, tuple(env[v] for v in sorted(blk.free)))
        if key in binder_memo:
            return binder_memo[key]
        names = {y: claim(y) for y in blk.variables}
        binder_memo[key] = names
        idx = len(blocks)
        blocks.append(EqBlock(n.sigma))
        parents.append(cur)
        inner = {**env, **names}
        for y, body in blk.eqs:
            blocks[idx].eqs[names[y]] = e(body, inner, idx)
        return names

    if phi.kind == "fix":
        entry = bind_fix(phi, {}, -1)
    elif phi.kind == "vec":
        entry = bind_vec(phi, {}, -1)[phi.name]
    else:
        used = {n.name for n in iter_nodes(phi) if isinstance(n, Formula) and n.kind == "fix"}
        used |= {x for n in iter_nodes(phi) if isinstance(n, Block) for x in n.variables}
        entry = "X0"
        while entry in used:
            entry += "'"
        entry = claim(entry)
        del origin[entry]
        blocks.append(EqBlock("mu"))
        parents.append(-1)
        blocks[0].eqs[entry] = e(phi, {}, 0)
    return HES(blocks, entry, origin=origin), parents


# -- vectorial form ---------------------------------------------------------------

class VectorialForm:
    """An HES whose blocks form a tree with back edges.

    ``parents[j]`` is the block immediately above block ``j`` (``-1`` for the
    root). Dependency edges may stay inside a block, go to a child block or go
    to any ancestor block. Without explicit parents the blocks form a chain.
    """

    def __init__(self, hes: HES, parents: list[int] | None = None):
        if parents is None:
            parents = list(range(-1, len(hes.blocks) - 1))
        if len(parents) != len(hes.blocks):
            raise ValueError("one parent per block required")
        for j, p in enumerate(parents):
            if not -1 <= p < j or (p == -1 and j != 0):
                raise ValueError(f"block {j} has invalid parent {p}")
        self.hes = hes
        self.parents = list(parents)
        bad = self.violations()
        if bad:
            x, y = bad[0]
            raise ValueError(f"not in vectorial form: edge {x} -> {y} skips blocks")

    def ancestors(self, i: int) -> set[int]:
        out = set()
        while self.parents[i] >= 0:
            i = self.parents[i]
            out.add(i)
        return out

    def violations(self) -> list[tuple[str, str]]:
        h = self.hes
        bad = []
        for x, y in sorted(h.edges()):
            i, j = h.block_of(x), h.block_of(y)
            if i == j or self.parents[j] == i or j in self.ancestors(i):
                continue
            bad.append((x, y))
        return bad

    def __str__(self) -> str:
        return str(self.hes)


def hes_to_vectorial(h: HES) -> VectorialForm:
    """Route every edge that skips blocks through chains of helper variables.

    An occurrence of ``Y`` (block ``j``) in block ``i`` with ``j >= i + 2``
    becomes ``H$Y$(i+1)``, where ``H$Y$k = H$Y$(k+1)`` lives in block ``k`` and
    ``H$Y$(j-1) = Y``. Chains towards the same target are shared.
    """
    from .syntax import substitute

    taken = set(h.variables()) | set(h.free)
    helper: dict[tuple[str, int], str] = {}
    added: dict[int, dict[str, Formula]] = {}

    def chain(y: str, k: int) -> str:
        """Helper variable in block ``k`` that forwards to ``y``."""
        key = (y, k)
        if key not in helper:
            name = f"H${y}${k}"
            if name in taken:
                name = fresh_name(name, taken)
            taken.add(name)
            helper[key] = name
            j = h.block_of(y)
            target = y if k == j - 1 else chain(y, k + 1)
            added.setdefault(k, {})[name] = var(target)
        return helper[key]

    blocks = []
    for i, b in enumerate(h.blocks):
        eqs = {}
        for x, e in b.eqs.items():
            for y in sorted(e.free):
                if y in h and h.block_of(y) >= i + 2:
                    e = substitute(e, y, var(chain(y, i + 1)))
            eqs[x] = e
        blocks.append(EqBlock(b.qual, eqs))
    for k, eqs in added.items():
        blocks[k].eqs.update(eqs)
    return VectorialForm(HES(blocks, h.entry, h.free))


# -- guardedness -------------------------------------------------------------------

@dataclass(frozen=True)
class Occurrence:
    """A variable occurrence in ``source``'s equation, addressed by tree path."""

    source: str
    path: tuple[int, ...]
    target: str
    guarded: bool


@dataclass
class GuardednessGraph:
    """Dependency graph with guarded/unguarded edge labels.

    ``labels[(x, y)]`` holds ``True`` for a guarded and ``False`` for an
    unguarded occurrence of ``y`` in ``e_x``; both may be present.
    """

    hes: HES
    labels: dict[tuple[str, str], frozenset]

    def edges(self, guarded: bool | None = None) -> list[tuple[str, str]]:
        return sorted(k for k, v in self.labels.items()
                      if guarded is None or guarded in v)

    def occurrences(self) -> Iterator[Occurrence]:
        """Enumerate occurrences by walking each equation as a tree."""
        for x in self.hes.variables():
            stack = [(self.hes.equation(x), (), False)]
            while stack:
                n, path, g = stack.pop()
                if n.kind == "var":
                    if n.name in self.hes:
                        yield Occurrence(x, path, n.name, g)
                    continue
                g2 = g or n.kind in ("dia", "box")
                for i in reversed(range(len(n.children))):
                    stack.append((n.children[i], path + (i,), g2))


def build_guardedness_graph(h: HES) -> GuardednessGraph:
    labels: dict[tuple[str, str], set] = {}
    for x in h.variables():
        seen = set()
        stack = [(h.equation(x), False)]
        while stack:
            n, g = stack.pop()
            if (id(n), g) in seen or (not n.free and n.kind != "var"):
                continue
            seen.add((id(n), g))
            if n.kind == "var":
                if n.name in h:
                    labels.setdefault((x, n.name), set()).add(g)
                continue
            g2 = g or n.kind in ("dia", "box")
            stack.extend((c, g2) for c in n.children)
    return GuardednessGraph(h, {k: frozenset(v) for k, v in labels.items()})


@dataclass
class GuardednessReport:
    graph: GuardednessGraph
    on_unguarded_cycle: frozenset   # unguarded edges lying on an unguarded cycle
    level: str

    @property
    def is_guarded(self) -> bool:
        return LEVELS.index(self.level) >= 1

    @property
    def is_downwards_guarded(self) -> bool:
        return LEVELS.index(self.level) >= 2

    @property
    def is_epsilon_free(self) -> bool:
        return self.level == "epsilon-free"

    def status(self, occ: Occurrence) -> str:
        """``guarded``, ``weakly-guarded`` or ``unguarded``."""
        if occ.guarded or (occ.source, occ.target) not in self.on_unguarded_cycle:
            return "guarded"
        if occ.source != occ.target:
            return "weakly-guarded"
        return "unguarded"

    def is_weakly_guarded(self, occ: Occurrence) -> bool:
        return self.status(occ) != "unguarded"

    def occurrences(self) -> Iterator[tuple[Occurrence, str]]:
        for occ in self.graph.occurrences():
            yield occ, self.status(occ)

    def offending(self) -> list[Occurrence]:
        """Occurrences on an unguarded cycle."""
        return [o for o, s in self.occurrences() if s != "guarded"]


def binder_priority(phi: Formula) -> dict[str, frozenset]:
    """For each binder name of a well-named formula, the names bound above it."""
    up: dict[str, frozenset] = {}
    stack = [(phi, frozenset())]
    seen = set()
    while stack:
        n, anc = stack.pop()
        if (id(n), anc) in seen:
            continue
        seen.add((id(n), anc))
        if isinstance(n, Formula) and n.kind == "fix":
            up[n.name] = up.get(n.name, frozenset()) | anc
            anc = anc | {n.name}
        elif isinstance(n, Formula) and n.kind == "vec":
            names = n.block.variables
            for y in names:
                up[y] = up.get(y, frozenset()) | anc
            anc = anc | set(names)
            stack.extend((b, anc) for b in n.block.children)
            continue
        stack.extend((c, anc) for c in n.children)
    return up


def classify_guardedness(h: HES, above=None) -> GuardednessReport:
    """Guardedness level of ``h`` plus per-occurrence information.

    ``above(x, y)`` decides whether ``y`` has strictly higher priority than
    ``x``; by default this is the block order.
    """
    if above is None:
        def above(x, y):
            return h.block_of(y) < h.block_of(x)
    g = build_guardedness_graph(h)
    unguarded = g.edges(guarded=False)
    succ: dict[str, set] = {}
    for x, y in unguarded:
        succ.setdefault(x, set()).add(y)

    reach_memo: dict[str, set] = {}

    def reach(y: str) -> set:
        if y not in reach_memo:
            seen, stack = {y}, [y]
            while stack:
                for z in succ.get(stack.pop(), ()):
                    if z not in seen:
                        seen.add(z)
                        stack.append(z)
            reach_memo[y] = seen
        return reach_memo[y]

    cyc = frozenset((x, y) for x, y in unguarded if x in reach(y))
    if not unguarded:
        level = "epsilon-free"
    elif all(above(x, y) for x, y in unguarded):
        level = "downwards-guarded"
    elif not cyc:
        level = "guarded"
    else:
        level = "unguarded"
    return GuardednessReport(g, cyc, level)


def classify_formula(phi: Formula, source: Formula | None = None) -> GuardednessReport:
    """Classify ``phi`` through its equational form.

    With ``source``, variable priority is inherited from the binder nesting
    of that well-named formula: a binder copy produced by unfolding keeps
    the priority of the binder it was copied from. Variables without an
    origin (the vacuous root) sit on top.
    """
    h = formula_to_hes(phi)
    if source is None:
        return classify_guardedness(h)
    up = binder_priority(source)
    origin = h.origin or {}

    def above(x, y):
        ox, oy = origin.get(x), origin.get(y)
        if oy is None:
            return ox is not None
        return ox is not None and oy in up.get(ox, ())

    return classify_guardedness(h, above)
