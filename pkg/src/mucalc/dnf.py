"""Disjunctive normal forms over modal atoms.

An expression is a frozenset of clauses. Clauses form an antichain under
inclusion, so two expressions denote the same element of the free
distributive lattice iff they are equal. The empty clause set is ``ff``; the
set holding only the empty clause is ``tt``.

Atoms::

    ("p", q)  ("np", q)  ("var", X)  ("dia", a, X)  ("box", a, X)

Internally a clause is an int bitmask over interned atoms; the functions
below take and return atoms as tuples. A clause holding both ``("p", q)``
and ``("np", q)`` is dropped: it denotes the empty set in every model, and
pruning it keeps expressions small.
"""
from __future__ import annotations

from typing import Iterable

from .syntax import FF, TT, Formula, box, conj, dia, disj, nprop, prop, var

DNF = frozenset
TRUE: DNF = frozenset({0})
FALSE: DNF = frozenset()

_bit: dict[tuple, int] = {}
_atom: list[tuple] = []
_pos_lits = 0  # bits of ("p", q) atoms; the ("np", q) partner sits one bit higher


def _intern(a: tuple) -> int:
    global _pos_lits
    b = _bit.get(a)
    if b is not None:
        return b
    if a[0] in ("p", "np"):
        pos = len(_atom)
        for x in (("p", a[1]), ("np", a[1])):
            _bit[x] = 1 << len(_atom)
            _atom.append(x)
        _pos_lits |= 1 << pos
        return _bit[a]
    b = _bit[a] = 1 << len(_atom)
    _atom.append(a)
    return b


def clause_atoms(c: int) -> list[tuple]:
    out = []
    while c:
        low = c & -c
        out.append(_atom[low.bit_length() - 1])
        c ^= low
    return out


def clauses(e: DNF) -> list[frozenset]:
    """The clauses of ``e`` as sets of atoms."""
    return [frozenset(clause_atoms(c)) for c in e]


def minimize(cs: Iterable[int]) -> DNF:
    """Drop inconsistent clauses and absorbed supersets."""
    pos = _pos_lits
    kept: list[int] = []
    # each kept clause is filed under its lowest bit; a subset of c must be
    # filed under some bit of c
    index: dict[int, list[int]] = {}
    for c in sorted(set(cs), key=lambda c: bin(c).count("1")):
        if not c:
            return TRUE
        if ((c & pos) << 1) & c:
            continue
        rest, absorbed = c, False
        while rest and not absorbed:
            low = rest & -rest
            rest ^= low
            for k in index.get(low, ()):
                if k & c == k:
                    absorbed = True
                    break
        if absorbed:
            continue
        kept.append(c)
        index.setdefault(c & -c, []).append(c)
    return frozenset(kept)


def atom(a: tuple) -> DNF:
    return frozenset({_intern(a)})


def d_or(a: DNF, b: DNF) -> DNF:
    if not a:
        return b
    if not b:
        return a
    return minimize(a | b)


def d_and(a: DNF, b: DNF) -> DNF:
    if a == TRUE:
        return b
    if b == TRUE:
        return a
    return minimize({x | y for x in a for y in b})


def substitute(e: DNF, a: tuple, repl: DNF) -> DNF:
    """Replace atom ``a`` by ``repl``."""
    bit = _intern(a)
    keep = [c for c in e if not c & bit]
    hit = [c & ~bit for c in e if c & bit]
    if not hit:
        return e
    return d_or(minimize(keep), d_and(minimize(hit), repl))


def rename(e: DNF, fn) -> DNF:
    """Apply ``fn`` to every atom."""
    out = []
    for c in e:
        m = 0
        for x in clause_atoms(c):
            m |= _intern(fn(x))
        out.append(m)
    return minimize(out)


def atoms(e: DNF) -> set:
    m = 0
    for c in e:
        m |= c
    return set(clause_atoms(m))


def from_formula(phi: Formula) -> DNF:
    """DNF of a fixpoint-free formula whose modalities apply to variables."""
    memo: dict[int, DNF] = {}

    def go(n: Formula) -> DNF:
        r = memo.get(id(n))
        if r is not None:
            return r
        k = n.kind
        if k == "tt":
            r = TRUE
        elif k == "ff":
            r = FALSE
        elif k == "prop":
            r = atom(("p", n.name))
        elif k == "nprop":
            r = atom(("np", n.name))
        elif k == "var":
            r = atom(("var", n.name))
        elif k in ("dia", "box"):
            if n.body.kind != "var":
                raise ValueError("modality not applied to a single variable")
            r = atom((k, n.name, n.body.name))
        elif k == "or":
            r = d_or(go(n.left), go(n.right))
        elif k == "and":
            r = d_and(go(n.left), go(n.right))
        else:
            raise ValueError(f"unexpected {k} node in equation")
        memo[id(n)] = r
        return r

    return go(phi)


def _atom_formula(a: tuple) -> Formula:
    if a[0] == "p":
        return prop(a[1])
    if a[0] == "np":
        return nprop(a[1])
    if a[0] == "var":
        return var(a[1])
    m = dia if a[0] == "dia" else box
    return m(a[1], var(a[2]))


def to_formula(e: DNF) -> Formula:
    if not e:
        return FF
    if e == TRUE:
        return TT
    cs = sorted(sorted(clause_atoms(c)) for c in e)
    return disj(conj(_atom_formula(a) for a in c) for c in cs)


def weight(e: DNF) -> int:
    """Total number of atom occurrences over all clauses."""
    return sum(bin(c).count("1") for c in e)
