"""Fixpoint-iteration semantics over finite labelled transition systems.

State sets are Python ints used as bitsets over dense state indices. This is
the reference oracle for every transformation in the package, so it is kept
deliberately naive: plain Kleene iteration from the bottom (mu) or the top
(nu) of the powerset lattice.
"""
from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy import sparse

from .hes import HES
from .syntax import Block, Formula, call_deep

__all__ = [
    "LTS", "model_check", "model_check_hes", "holds", "eval_propositional",
    "check_equiv", "EquivVerdict", "enumerate_ltss", "disjoint_union",
    "lts_from_json", "lts_to_json", "semantics_of",
]

_DENSE_LIMIT = 256


class LTS:
    """Finite labelled transition system with states ``0..n-1``."""

    def __init__(self, n_states: int, trans: Iterable[tuple[int, str, int]] = (),
                 labels: Sequence[Iterable[str]] | None = None,
                 actions: Iterable[str] | None = None,
                 props: Iterable[str] | None = None):
        if n_states < 1:
            raise ValueError("an LTS needs at least one state")
        self.n = n_states
        self.trans = tuple(sorted(set((int(s), a, int(t)) for s, a, t in trans)))
        for s, a, t in self.trans:
            if not (0 <= s < n_states and 0 <= t < n_states):
                raise ValueError(f"transition {(s, a, t)} out of range")
        labels = list(labels) if labels is not None else [()] * n_states
        if len(labels) != n_states:
            raise ValueError("one label set per state required")
        self.labels = tuple(frozenset(l) for l in labels)
        used_a = {a for _, a, _ in self.trans}
        used_p = set().union(*self.labels)
        self.actions = tuple(sorted(set(actions or ()) | used_a))
        self.props = tuple(sorted(set(props or ()) | used_p))
        self.full = (1 << n_states) - 1
        self._succ = {a: [0] * n_states for a in self.actions}
        for s, a, t in self.trans:
            self._succ[a][s] |= 1 << t
        self._prop = {p: 0 for p in self.props}
        for s, lab in enumerate(self.labels):
            for p in lab:
                self._prop[p] |= 1 << s
        self._mat: dict = {}

    def __repr__(self) -> str:
        return f"LTS(n={self.n}, trans={len(self.trans)}, props={self.props})"

    def __eq__(self, other) -> bool:
        return (isinstance(other, LTS) and self.n == other.n
                and self.trans == other.trans and self.labels == other.labels
                and self.actions == other.actions and self.props == other.props)

    def size(self) -> int:
        """|S| + |->|."""
        return self.n + len(self.trans)

    def successors(self, s: int, a: str) -> list[int]:
        m = self._succ.get(a, [0] * self.n)[s]
        return [t for t in range(self.n) if m >> t & 1]

    def prop_mask(self, p: str) -> int:
        return self._prop.get(p, 0)

    def diamond(self, a: str, target: int) -> int:
        succ = self._succ.get(a)
        if succ is None or not target:
            return 0
        if self.n <= _DENSE_LIMIT:
            out = 0
            for s, m in enumerate(succ):
                if m & target:
                    out |= 1 << s
            return out
        mat = self._mat.get(a)
        if mat is None:
            rows = [s for s, b, _ in self.trans if b == a]
            cols = [t for _, b, t in self.trans if b == a]
            mat = sparse.csr_matrix((np.ones(len(rows), dtype=np.int32), (rows, cols)),
                                    shape=(self.n, self.n))
            self._mat[a] = mat
        hit = mat @ _unpack(target, self.n)
        return _pack(hit > 0)

    def box(self, a: str, target: int) -> int:
        return self.full & ~self.diamond(a, self.full & ~target)

    def states(self, mask: int) -> list[int]:
        return [s for s in range(self.n) if mask >> s & 1]


def _unpack(mask: int, n: int) -> np.ndarray:
    raw = np.frombuffer(mask.to_bytes((n + 7) // 8, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:n].astype(np.int32)


def _pack(bits: np.ndarray) -> int:
    return int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little")


def lts_to_json(t: LTS) -> dict:
    return {
        "states": t.n,
        "actions": list(t.actions),
        "props": list(t.props),
        "trans": [[s, a, u] for s, a, u in t.trans],
        "labels": {str(s): sorted(l) for s, l in enumerate(t.labels) if l},
    }


def lts_from_json(data: dict | str) -> LTS:
    if isinstance(data, str):
        data = json.loads(data)
    n = data["states"]
    labels = [data.get("labels", {}).get(str(s), ()) for s in range(n)]
    return LTS(n, [tuple(x) for x in data.get("trans", ())], labels,
               data.get("actions"), data.get("props"))


def disjoint_union(ltss: Sequence[LTS]) -> LTS:
    trans, labels, off = [], [], 0
    for t in ltss:
        trans.extend((s + off, a, u + off) for s, a, u in t.trans)
        labels.extend(t.labels)
        off += t.n
    return LTS(off, trans, labels,
               set().union(*(t.actions for t in ltss)),
               set().union(*(t.props for t in ltss)))


def enumerate_ltss(max_states: int = 3, actions: Sequence[str] = ("a",),
                   props: Sequence[str] = ("p",)) -> Iterator[LTS]:
    """Every LTS with at most ``max_states`` states over the given alphabets."""
    for n in range(1, max_states + 1):
        pairs = [(s, a, t) for a in actions for s in range(n) for t in range(n)]
        label_sets = [frozenset(c) for r in range(len(props) + 1)
                      for c in itertools.combinations(props, r)]
        for bits in range(1 << len(pairs)):
            trans = [pairs[i] for i in range(len(pairs)) if bits >> i & 1]
            for labels in itertools.product(label_sets, repeat=n):
                yield LTS(n, trans, labels, actions, props)


# -- formula semantics -----------------------------------------------------------

class _Evaluator:
    def __init__(self, lts: LTS):
        self.lts = lts
        self.memo: dict = {}

    def eval(self, n: Formula, env: dict) -> int:
        k = n.kind
        if k == "var":
            return env[n.name]
        t = self.lts
        if k == "prop":
            return t.prop_mask(n.name)
        if k == "nprop":
            return t.full & ~t.prop_mask(n.name)
        if k == "tt":
            return t.full
        if k == "ff":
            return 0
        key = (id(n), tuple(env[v] for v in n.fv))
        r = self.memo.get(key)
        if r is not None:
            return r
        if k == "or":
            r = self.eval(n.left, env) | self.eval(n.right, env)
        elif k == "and":
            r = self.eval(n.left, env) & self.eval(n.right, env)
        elif k == "dia":
            r = t.diamond(n.name, self.eval(n.body, env))
        elif k == "box":
            r = t.box(n.name, self.eval(n.body, env))
        elif k == "fix":
            r = self._fix(n, env)
        elif k == "vec":
            r = self._vec(n.sigma, n.block, env)[n.name]
        else:
            raise ValueError(f"unknown node kind {k}")
        self.memo[key] = r
        return r

    def _fix(self, n: Formula, env: dict) -> int:
        x, body, least = n.name, n.body, n.sigma == "mu"
        cur = 0 if least else self.lts.full
        for _ in range(self.lts.n + 1):
            nxt = self.eval(body, {**env, x: cur})
            if nxt == cur:
                return cur
            # iterates ascend from the bottom for mu, descend from the top for nu
            assert (cur & ~nxt if least else nxt & ~cur) == 0, "non-monotone iteration"
            cur = nxt
        raise AssertionError("Kleene iteration exceeded |S| + 1 steps")

    def _vec(self, sigma: str, blk: Block, env: dict) -> dict:
        key = (id(blk), sigma, tuple(env[v] for v in blk.fv))
        r = self.memo.get(key)
        if r is not None:
            return r
        least = sigma == "mu"
        cur = {x: 0 if least else self.lts.full for x in blk.variables}
        for _ in range(len(blk) * self.lts.n + 1):
            inner = {**env, **cur}
            nxt = {x: self.eval(b, inner) for x, b in blk.eqs}
            if nxt == cur:
                self.memo[key] = cur
                return cur
            for x in cur:
                assert (cur[x] & ~nxt[x] if least else nxt[x] & ~cur[x]) == 0
            cur = nxt
        raise AssertionError("vectorial iteration exceeded m|S| + 1 steps")


def model_check(phi: Formula, lts: LTS, env: dict | None = None) -> int:
    """The set of states satisfying ``phi`` as a bitmask."""
    env = dict(env or {})
    missing = phi.free - env.keys()
    if missing:
        raise ValueError(f"unbound free variables {sorted(missing)}")
    return call_deep(phi.height, _Evaluator(lts).eval, phi, env)


def holds(phi: Formula | HES, lts: LTS, state: int = 0, env: dict | None = None) -> bool:
    return bool(semantics_of(phi, lts, env) >> state & 1)


class _HesSolver:
    def __init__(self, h: HES, lts: LTS):
        self.h, self.lts = h, lts
        self.ev = _Evaluator(lts)
        k = len(h.blocks)
        # outer variables that the blocks from i onwards read
        self.deps: list[tuple] = []
        for i in range(k):
            inner = set().union(*(b.eqs.keys() for b in h.blocks[i:]))
            used = set().union(*(e.free for b in h.blocks[i:] for e in b.eqs.values()))
            self.deps.append(tuple(sorted(used - inner)))
        self.memo: dict = {}

    def solve(self, i: int, rho: dict) -> dict:
        h = self.h
        if i == len(h.blocks):
            return {}
        key = (i, tuple(rho[v] for v in self.deps[i]))
        r = self.memo.get(key)
        if r is not None:
            return r
        blk = h.blocks[i]
        least = blk.qual == "mu"
        tau = {z: 0 if least else self.lts.full for z in blk.eqs}
        for _ in range(len(blk.eqs) * self.lts.n + 1):
            inner = self.solve(i + 1, {**rho, **tau})
            env = {**rho, **tau, **inner}
            nxt = {z: self.ev.eval(e, env) for z, e in blk.eqs.items()}
            if nxt == tau:
                r = {**tau, **inner}
                self.memo[key] = r
                return r
            for z in tau:
                assert (tau[z] & ~nxt[z] if least else nxt[z] & ~tau[z]) == 0
            tau = nxt
        raise AssertionError("block iteration exceeded m|S| + 1 steps")


def model_check_hes(h: HES, lts: LTS, env: dict | None = None) -> dict[str, int]:
    """Solution of every variable of ``h`` (nested block-wise fixpoints)."""
    env = dict(env or {})
    missing = set(h.free) - env.keys()
    if missing:
        raise ValueError(f"unbound free variables {sorted(missing)}")
    height = 4 * len(h.blocks) + max(e.height for b in h.blocks for e in b.eqs.values())
    return call_deep(height, _HesSolver(h, lts).solve, 0, env)


def semantics_of(obj: Formula | HES, lts: LTS, env: dict | None = None) -> int:
    if isinstance(obj, HES):
        return model_check_hes(obj, lts, env)[obj.entry]
    return model_check(obj, lts, env)


def eval_propositional(phi: Formula, labels: Iterable[str]) -> bool:
    """Truth value of a purely propositional formula under a valuation."""
    labels = frozenset(labels)
    memo: dict[int, bool] = {}

    def go(n: Formula) -> bool:
        k = n.kind
        if k == "tt":
            return True
        if k == "ff":
            return False
        if k == "prop":
            return n.name in labels
        if k == "nprop":
            return n.name not in labels
        if k not in ("or", "and"):
            raise ValueError(f"not purely propositional: contains {k} node")
        r = memo.get(id(n))
        if r is None:
            if k == "or":
                r = go(n.left) or go(n.right)
            else:
                r = go(n.left) and go(n.right)
            memo[id(n)] = r
        return r

    return call_deep(phi.height, go, phi)


# -- equivalence oracle --------------------------------------------------------------

@dataclass
class EquivVerdict:
    equivalent: bool
    checked: int
    lts: LTS | None = None
    state: int | None = None
    env: dict | None = None

    def __bool__(self) -> bool:
        return self.equivalent

    def __str__(self) -> str:
        if self.equivalent:
            return f"equivalent on {self.checked} samples"
        return f"counterexample: state {self.state} of {self.lts!r}"


def _vocabulary(obj) -> tuple[set, set, set]:
    from .syntax import actions, propositions
    if isinstance(obj, HES):
        eqs = [e for b in obj.blocks for e in b.eqs.values()]
        acts = set().union(*(actions(e) for e in eqs))
        props = set().union(*(propositions(e) for e in eqs))
        return acts, props, set(obj.free)
    return actions(obj), propositions(obj), set(obj.free)


def check_equiv(a: Formula | HES, b: Formula | HES, budget: int = 20, seed: int = 0,
                max_states: int = 5, ltss: Iterable[LTS] | None = None) -> EquivVerdict:
    """Compare two formulas/systems on sampled (or given) LTSs.

    A returned counterexample has been re-checked; a pass is only evidence.
    """
    from .randgen import random_lts

    acts_a, props_a, free_a = _vocabulary(a)
    acts_b, props_b, free_b = _vocabulary(b)
    if free_a != free_b:
        raise ValueError(f"free variables differ: {sorted(free_a)} vs {sorted(free_b)}")
    acts = sorted(acts_a | acts_b) or ["a"]
    props = sorted(props_a | props_b) or ["p"]
    rng = random.Random(seed)
    if ltss is None:
        ltss = (random_lts(rng.randrange(1 << 30), max_states, acts, props)
                for _ in range(budget))
    checked = 0
    for t in ltss:
        env = {x: rng.getrandbits(t.n) for x in sorted(free_a)}
        sa, sb = semantics_of(a, t, env), semantics_of(b, t, env)
        checked += 1
        if sa != sb:
            diff = sa ^ sb
            s = (diff & -diff).bit_length() - 1
            # replay the disagreement from scratch before reporting it
            if holds(a, t, s, env) == holds(b, t, s, env):
                raise AssertionError("counterexample did not replay")
            return EquivVerdict(False, checked, t, s, env)
    return EquivVerdict(True, checked)
