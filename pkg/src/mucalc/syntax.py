"""Hash-consed formulas of the modal mu-calculus.

Every formula is a node in a global DAG: two structurally equal formulas are
the very same Python object, so ``is`` and ``==`` coincide and the size of a
formula is simply the number of distinct nodes reachable from it.

Node kinds::

    tt, ff                       constants
    prop p, nprop p              proposition and its negation
    var X                        fixpoint variable
    or, and                      binary boolean connectives
    dia a, box a                 <a>phi and [a]phi
    fix (sigma, X)               mu X.phi / nu X.phi
    vec (sigma, entry)           simultaneous fixpoint over a shared Block

Concrete syntax (ASCII or Unicode)::

    phi ::= tt | ff | p | ~p | X | phi "|" phi | phi "&" phi
          | <a>phi | [a]phi | mu X.phi | nu X.phi | (phi)
          | mu X.{X1.phi1; ...; Xm.phim}

``&`` binds tighter than ``|``, modalities bind tighter than both and the
body of a fixpoint extends as far right as possible.
"""
from __future__ import annotations

import re
import sys
import threading
import weakref
from typing import Iterable, Iterator

__all__ = [
    "Formula", "Block", "ParseError", "TT", "FF",
    "prop", "nprop", "var", "lor", "land", "dia", "box", "fix", "mu", "nu",
    "vec", "make_block", "disj", "conj", "sigma_hat",
    "parse", "render", "size", "modal_depth", "substitute", "fresh_name",
    "iter_nodes", "fixpoint_map", "binders", "is_fixpoint_free",
    "is_propositional", "is_bmu", "is_well_named", "propositions", "actions",
    "call_deep",
]

SIGMAS = ("mu", "nu")

sys.setrecursionlimit(max(sys.getrecursionlimit(), 1_000_000))

_table: "weakref.WeakValueDictionary[tuple, object]" = weakref.WeakValueDictionary()
_lock = threading.RLock()


class Formula:
    """An interned formula node. Never instantiate directly."""

    __slots__ = ("kind", "name", "sigma", "children", "free", "fv", "md",
                 "height", "__weakref__")

    kind: str
    name: str | None
    sigma: str | None
    children: tuple
    free: frozenset
    fv: tuple           # free variables, sorted
    md: int
    height: int

    @property
    def body(self) -> "Formula":
        return self.children[0]

    @property
    def left(self) -> "Formula":
        return self.children[0]

    @property
    def right(self) -> "Formula":
        return self.children[1]

    @property
    def block(self) -> "Block":
        return self.children[0]

    @property
    def is_fixpoint(self) -> bool:
        return self.kind in ("fix", "vec")

    def __repr__(self) -> str:
        return f"Formula({render(self)!r})"

    def __str__(self) -> str:
        return render(self)


class Block:
    """The equation set ``{X1.phi1; ...; Xm.phim}`` of a vectorial fixpoint.

    A block is shared between all ``vec`` nodes that use it, whatever their
    entry variable, so it is counted once by :func:`size`.
    """

    __slots__ = ("eqs", "free", "fv", "md", "height", "__weakref__")

    eqs: tuple
    free: frozenset
    fv: tuple
    md: int
    height: int

    @property
    def variables(self) -> tuple:
        return tuple(x for x, _ in self.eqs)

    @property
    def children(self) -> tuple:
        return tuple(b for _, b in self.eqs)

    def body(self, x: str) -> Formula:
        for y, b in self.eqs:
            if y == x:
                return b
        raise KeyError(x)

    def __len__(self) -> int:
        return len(self.eqs)

    def __repr__(self) -> str:
        inner = "; ".join(f"{x}.{render(b)}" for x, b in self.eqs)
        return f"Block({{{inner}}})"


def _intern(key: tuple, build):
    node = _table.get(key)
    if node is not None:
        return node
    with _lock:
        node = _table.get(key)
        if node is None:
            node = build()
            _table[key] = node
    return node


def _node(kind: str, name=None, sigma=None, children: tuple = ()) -> Formula:
    key = (kind, name, sigma, children)

    def build():
        n = Formula.__new__(Formula)
        n.kind, n.name, n.sigma, n.children = kind, name, sigma, children
        if kind == "var":
            n.free = frozenset((name,))
        elif kind == "fix":
            n.free = children[0].free - {name}
        elif kind == "vec":
            n.free = children[0].free
        elif children:
            n.free = frozenset().union(*(c.free for c in children))
        else:
            n.free = frozenset()
        n.fv = tuple(sorted(n.free))
        if kind in ("dia", "box"):
            n.md = 1 + children[0].md
        elif children:
            n.md = max(c.md for c in children)
        else:
            n.md = 0
        n.height = 1 + max((c.height for c in children), default=0)
        return n

    return _intern(key, build)


TT = _node("tt")
FF = _node("ff")


def prop(p: str) -> Formula:
    return _node("prop", p)


def nprop(p: str) -> Formula:
    return _node("nprop", p)


def var(x: str) -> Formula:
    return _node("var", x)


def lor(a: Formula, b: Formula) -> Formula:
    return _node("or", children=(a, b))


def land(a: Formula, b: Formula) -> Formula:
    return _node("and", children=(a, b))


def dia(a: str, phi: Formula) -> Formula:
    return _node("dia", a, children=(phi,))


def box(a: str, phi: Formula) -> Formula:
    return _node("box", a, children=(phi,))


def fix(sigma: str, x: str, phi: Formula) -> Formula:
    if sigma not in SIGMAS:
        raise ValueError(f"bad fixpoint qualifier {sigma!r}")
    return _node("fix", x, sigma, (phi,))


def mu(x: str, phi: Formula) -> Formula:
    return fix("mu", x, phi)


def nu(x: str, phi: Formula) -> Formula:
    return fix("nu", x, phi)


def make_block(eqs: Iterable[tuple[str, Formula]]) -> Block:
    eqs = tuple((x, b) for x, b in eqs)
    names = [x for x, _ in eqs]
    if not eqs:
        raise ValueError("empty vectorial block")
    if len(set(names)) != len(names):
        raise ValueError("duplicate variable in vectorial block")
    key = ("block", None, None, eqs)

    def build():
        b = Block.__new__(Block)
        b.eqs = eqs
        b.free = frozenset().union(*(f.free for _, f in eqs)) - set(names)
        b.fv = tuple(sorted(b.free))
        b.md = max(f.md for _, f in eqs)
        b.height = 1 + max(f.height for _, f in eqs)
        return b

    return _intern(key, build)


def vec(sigma: str, entry: str, block: Block) -> Formula:
    if sigma not in SIGMAS:
        raise ValueError(f"bad fixpoint qualifier {sigma!r}")
    if entry not in block.variables:
        raise ValueError(f"entry variable {entry} not defined in block")
    return _node("vec", entry, sigma, (block,))


def disj(items: Iterable[Formula]) -> Formula:
    """Left-nested disjunction; the empty disjunction is ``ff``."""
    out = None
    for f in items:
        out = f if out is None else lor(out, f)
    return FF if out is None else out


def conj(items: Iterable[Formula]) -> Formula:
    out = None
    for f in items:
        out = f if out is None else land(out, f)
    return TT if out is None else out


def sigma_hat(sigma: str) -> Formula:
    return FF if sigma == "mu" else TT


# -- deep recursion ---------------------------------------------------------

_DEEP_HEIGHT = 1200
_deep_state = threading.local()
_stack_lock = threading.Lock()


def call_deep(height: int, fn, *args, **kwargs):
    """Run ``fn`` on a thread with a large C stack when ``height`` demands it.

    The transformations recurse along the DAG; CPython's default 8 MB main
    stack overflows a few thousand frames deep.
    """
    if height < _DEEP_HEIGHT or getattr(_deep_state, "active", False):
        return fn(*args, **kwargs)
    result: list = []
    error: list = []

    def runner():
        _deep_state.active = True
        try:
            result.append(fn(*args, **kwargs))
        except BaseException as exc:  # re-raised on the caller's thread
            error.append(exc)

    with _stack_lock:
        old = threading.stack_size(1 << 30)
        try:
            t = threading.Thread(target=runner)
            t.start()
        finally:
            threading.stack_size(old)
    t.join()
    if error:
        raise error[0]
    return result[0]


# -- metrics ----------------------------------------------------------------

def iter_nodes(phi: Formula | Block) -> Iterator[Formula | Block]:
    """Yield every distinct node (formulas and blocks) reachable from ``phi``."""
    seen = {id(phi)}
    stack = [phi]
    while stack:
        n = stack.pop()
        yield n
        for c in n.children:
            if id(c) not in seen:
                seen.add(id(c))
                stack.append(c)


def size(phi: Formula) -> int:
    """Number of distinct subformulas.

    A block shared by ``k`` vectorial nodes contributes ``k + |block|``: each
    entry node counts once, the block node and its bodies count once.
    """
    return sum(1 for _ in iter_nodes(phi))


def modal_depth(phi: Formula) -> int:
    return phi.md


def is_fixpoint_free(phi: Formula) -> bool:
    return not any(isinstance(n, Block) or n.kind in ("fix", "vec")
                   for n in iter_nodes(phi))


def is_bmu(phi: Formula) -> bool:
    return phi.md == 0


def is_propositional(phi: Formula) -> bool:
    return phi.md == 0 and is_fixpoint_free(phi) and not phi.free


def propositions(phi: Formula | Block) -> set[str]:
    return {n.name for n in iter_nodes(phi)
            if isinstance(n, Formula) and n.kind in ("prop", "nprop")}


def actions(phi: Formula | Block) -> set[str]:
    return {n.name for n in iter_nodes(phi)
            if isinstance(n, Formula) and n.kind in ("dia", "box")}


def binders(phi: Formula) -> list[Formula]:
    """Distinct fixpoint nodes (``fix`` and ``vec``) in ``phi``."""
    return [n for n in iter_nodes(phi)
            if isinstance(n, Formula) and n.kind in ("fix", "vec")]


def is_well_named(phi: Formula) -> bool:
    """Each variable name is bound by exactly one binder node (or block)."""
    owner: dict[str, object] = {}
    for n in iter_nodes(phi):
        if isinstance(n, Block):
            names = [(x, n) for x in n.variables]
        elif n.kind == "fix":
            names = [(n.name, n)]
        else:
            continue
        for x, o in names:
            if owner.setdefault(x, o) is not o:
                return False
    return True


def fixpoint_map(phi: Formula) -> dict[str, Formula]:
    """Map each bound variable to its defining fixpoint formula.

    Variables of a vectorial block have no binder node of their own; they map
    to their equation body.
    """
    if not is_well_named(phi):
        raise ValueError("fixpoint map is only defined for well-named formulas")
    out = {}
    for n in iter_nodes(phi):
        if isinstance(n, Block):
            for x, b in n.eqs:
                out[x] = b
        elif n.kind == "fix":
            out[n.name] = n
    return out


# -- substitution -----------------------------------------------------------

def fresh_name(base: str, avoid: Iterable[str] = ()) -> str:
    """``base$k`` for the smallest ``k`` not in ``avoid`` (deterministic)."""
    base = base.split("$", 1)[0] or "X"
    avoid = set(avoid)
    k = 1
    while f"{base}${k}" in avoid:
        k += 1
    return f"{base}${k}"


def rebuild(n: Formula, children: tuple) -> Formula:
    """Same node kind with new children."""
    if children == n.children:
        return n
    return _node(n.kind, n.name, n.sigma, children)


def substitute(phi: Formula, x: str, psi: Formula) -> Formula:
    """``phi[psi/x]``: replace free occurrences of ``x``, avoiding capture."""
    return call_deep(phi.height + psi.height, _substitute, phi, x, psi)


def _substitute(phi: Formula, x: str, psi: Formula) -> Formula:
    capture = psi.free
    memo: dict[int, object] = {}

    def go(n):
        if x not in n.free:
            return n
        r = memo.get(id(n))
        if r is not None:
            return r
        k = n.kind
        if k == "var":
            r = psi
        elif k == "fix":
            y, body = n.name, n.body
            if y in capture:
                y2 = fresh_name(y, capture | body.free)
                body = _substitute(body, y, var(y2))
                y = y2
            r = fix(n.sigma, y, go(body))
        elif k == "vec":
            blk, entry = n.block, n.name
            clash = [y for y in blk.variables if y in capture]
            if clash:
                blk, ren = _rename_block(blk, clash, capture)
                entry = ren.get(entry, entry)
            r = vec(n.sigma, entry, go_block(blk))
        else:
            r = rebuild(n, tuple(go(c) for c in n.children))
        memo[id(n)] = r
        return r

    def go_block(blk):
        r = memo.get(id(blk))
        if r is None:
            r = make_block((y, go(b)) for y, b in blk.eqs)
            memo[id(blk)] = r
        return r

    return go(phi)


def _rename_block(blk: Block, names, avoid) -> tuple[Block, dict]:
    avoid = set(avoid) | set(blk.variables) | blk.free
    ren = {}
    for y in names:
        ren[y] = fresh_name(y, avoid)
        avoid.add(ren[y])
    eqs = []
    for y, b in blk.eqs:
        for old, new in ren.items():
            b = _substitute(b, old, var(new))
        eqs.append((ren.get(y, y), b))
    return make_block(eqs), ren


# -- parsing ----------------------------------------------------------------

class ParseError(ValueError):
    def __init__(self, msg: str, pos: int | None = None):
        self.pos = pos
        super().__init__(msg if pos is None else f"{msg} at position {pos}")


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<lp>\() | (?P<rp>\))
  | (?P<or>\||∨) | (?P<and>&|∧) | (?P<neg>~|¬)
  | (?P<la><|⟨) | (?P<ra>>|⟩) | (?P<lb>\[) | (?P<rb>\])
  | (?P<dot>\.) | (?P<lc>\{) | (?P<rc>\}) | (?P<semi>;)
  | (?P<mu>μ) | (?P<nu>ν) | (?P<top>⊤) | (?P<bot>⊥)
  | (?P<VAR>[A-Z][A-Za-z0-9_$']*)
  | (?P<ident>[a-z][A-Za-z0-9_]*)
""", re.VERBOSE)

_KEYWORDS = {"mu": "mu", "nu": "nu", "tt": "top", "ff": "bot"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tok = m.group()
            if kind == "ident":
                kind = _KEYWORDS.get(tok, kind)
            out.append((kind, tok, pos))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.bound: set[str] = set()

    def peek(self) -> str:
        return self.toks[self.i][0]

    def take(self, kind: str | None = None):
        tok = self.toks[self.i]
        if kind is not None and tok[0] != kind:
            want = {"VAR": "variable", "ident": "identifier"}.get(kind, repr(kind))
            got = tok[1] or "end of input"
            raise ParseError(f"expected {want}, got {got!r}", tok[2])
        self.i += 1
        return tok

    def bind(self, x: str, pos: int):
        if x in self.bound:
            raise ParseError(f"variable {x} bound twice", pos)
        self.bound.add(x)

    def formula(self) -> Formula:
        left = self.conj()
        while self.peek() == "or":
            self.take()
            left = lor(left, self.conj())
        return left

    def conj(self) -> Formula:
        left = self.unary()
        while self.peek() == "and":
            self.take()
            left = land(left, self.unary())
        return left

    def unary(self) -> Formula:
        kind, text, pos = self.take()
        if kind in ("mu", "nu"):
            _, x, xpos = self.take("VAR")
            self.take("dot")
            if self.peek() == "lc":
                return self._vector(kind, x, xpos)
            self.bind(x, xpos)
            return fix(kind, x, self.formula())
        if kind == "la":
            a = self.take("ident")[1]
            self.take("ra")
            return dia(a, self.unary())
        if kind == "lb":
            a = self.take("ident")[1]
            self.take("rb")
            return box(a, self.unary())
        if kind == "neg":
            return nprop(self.take("ident")[1])
        if kind == "lp":
            f = self.formula()
            self.take("rp")
            return f
        if kind == "top":
            return TT
        if kind == "bot":
            return FF
        if kind == "ident":
            return prop(text)
        if kind == "VAR":
            return var(text)
        raise ParseError(f"unexpected {text or 'end of input'!r}", pos)

    def _vector(self, sigma: str, entry: str, entry_pos: int) -> Formula:
        self.take("lc")
        eqs = []
        while True:
            _, x, xpos = self.take("VAR")
            self.bind(x, xpos)
            self.take("dot")
            eqs.append((x, self.formula()))
            if self.peek() == "semi":
                self.take()
                continue
            self.take("rc")
            break
        try:
            blk = make_block(eqs)
        except ValueError as exc:
            raise ParseError(str(exc), entry_pos) from None
        if entry not in blk.variables:
            raise ParseError(f"entry variable {entry} not defined in block", entry_pos)
        return vec(sigma, entry, blk)


def parse(text: str, closed: bool = False) -> Formula:
    """Parse a well-named formula in positive normal form."""
    p = _Parser(text)
    f = p.formula()
    if p.peek() != "eof":
        kind, tok, pos = p.toks[p.i]
        raise ParseError(f"unexpected {tok!r}", pos)
    if closed and f.free:
        raise ParseError(f"free variable(s) {', '.join(sorted(f.free))} in closed formula")
    return f


# -- rendering --------------------------------------------------------------

_LEVEL = {"fix": 0, "or": 1, "and": 2}


def render(phi: Formula) -> str:
    """Minimal-parenthesis text for ``phi``.

    Shared binders are printed once per occurrence; repeated binder names are
    renamed apart so that the text parses again.
    """
    return call_deep(phi.height, _render, phi)


def _render(phi: Formula) -> str:
    taken: set[str] = set()
    for n in iter_nodes(phi):
        if isinstance(n, Formula) and n.kind in ("var", "fix"):
            taken.add(n.name)
        elif isinstance(n, Block):
            taken.update(n.variables)
    used: set[str] = set()
    out: list[str] = []

    def claim(x: str) -> str:
        if x in used:
            x = fresh_name(x, taken)
        used.add(x)
        taken.add(x)
        return x

    def emit(n: Formula, env: dict, req: int, tail: bool):
        k = n.kind
        level = _LEVEL.get(k, 3)
        paren = level < req or (k == "fix" and not tail)
        if paren:
            out.append("(")
            tail = True
        if k == "tt":
            out.append("tt")
        elif k == "ff":
            out.append("ff")
        elif k == "prop":
            out.append(n.name)
        elif k == "nprop":
            out.append("~" + n.name)
        elif k == "var":
            out.append(env.get(n.name, n.name))
        elif k in ("or", "and"):
            emit(n.left, env, level, False)
            out.append(" | " if k == "or" else " & ")
            emit(n.right, env, level + 1, tail)
        elif k in ("dia", "box"):
            out.append(f"<{n.name}>" if k == "dia" else f"[{n.name}]")
            emit(n.body, env, 3, tail)
        elif k == "fix":
            x = claim(n.name)
            out.append(f"{n.sigma} {x}.")
            emit(n.body, {**env, n.name: x}, 0, True)
        elif k == "vec":
            blk = n.block
            inner = dict(env)
            for y in blk.variables:
                inner[y] = claim(y)
            out.append(f"{n.sigma} {inner[n.name]}.{{")
            for i, (y, b) in enumerate(blk.eqs):
                if i:
                    out.append("; ")
                out.append(f"{inner[y]}.")
                emit(b, inner, 0, True)
            out.append("}")
        if paren:
            out.append(")")

    emit(phi, {}, 0, True)
    return "".join(out)
