"""The first Grigorchuk group acting on the rooted binary tree.

Elements are stored as interned portraits.  A portrait is either one of the
nucleus letters e, a, b, c, d or a triple (root swap, left section, right
section) whose sections are again portraits; a triple that coincides with
the decomposition of a nucleus letter is always replaced by that letter, so
the interned id is a canonical key and equality is an integer comparison.

The wreath recursion used throughout (right action, words read left to
right)::

    a = (e, e) swap     b = (a, c)     c = (a, d)     d = (e, b)
"""

from __future__ import annotations

from .errors import DomainError, SchemaError
from .groups import DEFAULT_RADIUS_CAP, Group, GroupElement, RadiusExceeded, lcm

E, A, B, C, D = range(5)
LETTERS = "eabcd"
_NUCLEUS = {E: (0, E, E), A: (1, E, E), B: (0, A, C), C: (0, A, D), D: (0, E, B)}
_KLEIN = {B, C, D}


class GrigorchukGroup(Group):
    kind = "grigorchuk"

    def __init__(self):
        super().__init__()
        self._nodes: list[tuple] = [_NUCLEUS[i] for i in range(5)]
        self._index: dict[tuple, int] = {}
        self._mul_memo: dict[tuple[int, int], int] = {}
        self._inv_memo: dict[int, int] = {E: E, A: A, B: B, C: C, D: D}
        self._token_memo: dict[int, str] = {i: LETTERS[i] for i in range(5)}

    def descriptor(self):
        return {"kind": "grigorchuk"}

    # -- portrait arithmetic --------------------------------------------------
    def sections(self, g: int) -> tuple[int, int, int]:
        return self._nodes[g]

    def _make(self, perm: int, s0: int, s1: int) -> int:
        node = (perm, s0, s1)
        for letter, dec in _NUCLEUS.items():
            if dec == node:
                return letter
        idx = self._index.get(node)
        if idx is None:
            idx = len(self._nodes)
            self._nodes.append(node)
            self._index[node] = idx
        return idx

    def _mul(self, g: int, h: int) -> int:
        if g == E:
            return h
        if h == E:
            return g
        if g == h and g < 5:
            return E
        if g in _KLEIN and h in _KLEIN:
            return (_KLEIN - {g, h}).pop()
        memo = self._mul_memo.get((g, h))
        if memo is not None:
            return memo
        pg, g0, g1 = self._nodes[g]
        ph, h0, h1 = self._nodes[h]
        if pg == 0:
            out = self._make(ph, self._mul(g0, h0), self._mul(g1, h1))
        else:
            out = self._make(1 - ph, self._mul(g0, h1), self._mul(g1, h0))
        self._mul_memo[(g, h)] = out
        return out

    def _inv(self, g: int) -> int:
        memo = self._inv_memo.get(g)
        if memo is not None:
            return memo
        p, g0, g1 = self._nodes[g]
        if p == 0:
            out = self._make(0, self._inv(g0), self._inv(g1))
        else:
            out = self._make(1, self._inv(g1), self._inv(g0))
        self._inv_memo[g] = out
        return out

    def _identity_rep(self):
        return E

    def basic_generator_reps(self):
        return [A, B, C, D]

    def portrait_token(self, g: int) -> str:
        tok = self._token_memo.get(g)
        if tok is None:
            p, g0, g1 = self._nodes[g]
            tok = f"({'s' if p else '-'}{self.portrait_token(g0)},{self.portrait_token(g1)})"
            self._token_memo[g] = tok
        return tok

    def sort_token(self, g):
        return self.portrait_token(g.rep)

    def sphere_order(self, g, word):
        # spheres in shortlex order make every recorded BFS word shortlex-minimal
        return word

    # -- words ----------------------------------------------------------------
    def from_word(self, word: str) -> GroupElement:
        rep = E
        for ch in word:
            i = LETTERS.find(ch)
            if i < 0:
                raise SchemaError(f"Grigorchuk words use letters a, b, c, d (and e); got {ch!r}")
            rep = self._mul(rep, i)
        return self.element(rep)

    def parse(self, obj):
        if not isinstance(obj, str):
            raise SchemaError(f"Grigorchuk element must be a word string, got {obj!r}")
        return self.from_word(obj)

    def shortlex_word(self, g: GroupElement, cap: int = DEFAULT_RADIUS_CAP) -> str:
        word = self.metric().word(g, cap)
        return "".join("abcd"[i] for i in word)

    def serialize(self, g):
        metric = self.metric()
        if g in metric.lengths:
            return "".join("abcd"[i] for i in metric.words[g])
        try:
            return self.shortlex_word(g, cap=12)
        except RadiusExceeded:
            return "portrait:" + self.portrait_token(g.rep)

    def word_of(self, g):
        return [(i, 1) for i in self.metric().word(g)]

    # -- tree action ----------------------------------------------------------
    def act(self, g: GroupElement, vertex: tuple[int, ...]) -> tuple[int, ...]:
        """Image of a vertex (tuple of 0/1 from the root) under ``g``."""
        out = []
        rep = g.rep
        for x in vertex:
            p, s0, s1 = self._nodes[rep]
            out.append(x ^ p)
            rep = s0 if x == 0 else s1
        return tuple(out)


def _require(g: GroupElement) -> GrigorchukGroup:
    if not isinstance(g.group, GrigorchukGroup):
        raise DomainError(f"{g.group!r} is not an automaton group")
    return g.group


def wreath_decompose(g: GroupElement) -> tuple[GroupElement, GroupElement, bool]:
    """First-level sections and root permutation of ``g``."""
    grp = _require(g)
    p, s0, s1 = grp.sections(g.rep)
    return grp.element(s0), grp.element(s1), bool(p)


def recursive_order(g: GroupElement, cap: int) -> int | None:
    """Order of ``g`` computed through the wreath recursion.

    g = (g0, g1) has order lcm(|g0|, |g1|); g = (g0, g1)swap has order
    2 |g0 g1|.  Returns None once the order is known to exceed ``cap``.
    """
    grp = _require(g)

    def rec(rep: int, budget: int) -> int | None:
        if rep == E:
            return 1
        if budget < 2:
            return None
        if rep < 5:
            return 2
        p, s0, s1 = grp.sections(rep)
        if p == 0:
            o0 = rec(s0, budget)
            o1 = rec(s1, budget) if o0 is not None else None
            if o1 is None:
                return None
            o = lcm(o0, o1)
            return o if o <= budget else None
        o = rec(grp._mul(s0, s1), budget // 2)
        return None if o is None else 2 * o

    return rec(g.rep, cap)
