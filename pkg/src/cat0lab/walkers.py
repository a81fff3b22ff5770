"""Vectorized simultaneous random walks for Monte Carlo drift estimates.

A walker holds the positions of many independent walks at once and
right-multiplies each by a letter of the group's default symmetric
generating set.  Groups without a dedicated walker fall back to a list of
``GroupElement`` objects.
"""

from __future__ import annotations

import numpy as np

from .groups import CyclicGroup, FreeGroup, Group, InfiniteDihedral, Lattice, distance_norm
from .measures import FiniteSupportMeasure


class _ObjectWalker:
    def __init__(self, group: Group, n: int):
        self.letters = group.generating_set().elements
        self.pos = [group.identity()] * n

    def step(self, letters, active):
        for i in np.flatnonzero(active):
            self.pos[i] = self.pos[i] * self.letters[letters[i]]

    def lengths(self):
        return np.array([distance_norm(g) for g in self.pos], dtype=np.int64)


class _LatticeWalker:
    def __init__(self, group: Lattice, n: int):
        S = group.generating_set().elements
        self.delta = np.array([s.rep for s in S], dtype=np.int64)
        self.pos = np.zeros((n, group.rank), dtype=np.int64)

    def step(self, letters, active):
        self.pos[active] += self.delta[letters[active]]

    def lengths(self):
        return np.abs(self.pos).sum(axis=1)


class _CyclicWalker:
    def __init__(self, group: CyclicGroup, n: int):
        S = group.generating_set().elements
        self.delta = np.array([s.rep for s in S], dtype=np.int64)
        self.n = group.n
        self.pos = np.zeros(n, dtype=np.int64)

    def step(self, letters, active):
        self.pos[active] = (self.pos[active] + self.delta[letters[active]]) % self.n

    def lengths(self):
        return np.minimum(self.pos, self.n - self.pos)


class _DihedralInfWalker:
    """Reduced alternating words stored as (first letter, length)."""

    def __init__(self, group: InfiniteDihedral, n: int):
        S = group.generating_set().elements
        self.code = np.array([s.rep[0] for s in S], dtype=np.int64)
        self.first = np.zeros(n, dtype=np.int64)
        self.length = np.zeros(n, dtype=np.int64)

    def step(self, letters, active):
        x = self.code[letters]
        last = np.where(self.length % 2 == 1, self.first, 1 - self.first)
        empty = active & (self.length == 0)
        cancel = active & (self.length > 0) & (last == x)
        grow = active & (self.length > 0) & (last != x)
        self.first[empty] = x[empty]
        self.length[empty] = 1
        self.length[cancel] -= 1
        self.length[grow] += 1

    def lengths(self):
        return self.length.copy()


class _FreeWalker:
    """Freely reduced words kept as a letter stack per walk."""

    def __init__(self, group: FreeGroup, n: int):
        S = group.generating_set().elements
        codes = [s.rep[0] for s in S]
        self.code = np.array(codes, dtype=np.int8)
        self.stack = np.zeros((n, 64), dtype=np.int8)
        self.length = np.zeros(n, dtype=np.int64)
        self.rows = np.arange(n)

    def step(self, letters, active):
        x = self.code[letters]
        top = self.stack[self.rows, np.maximum(self.length - 1, 0)]
        cancel = active & (self.length > 0) & (top == -x)
        push = active & ~cancel
        self.length[cancel] -= 1
        if push.any():
            need = int(self.length[push].max()) + 1
            if need > self.stack.shape[1]:
                grown = np.zeros((self.stack.shape[0], 2 * need), dtype=np.int8)
                grown[:, :self.stack.shape[1]] = self.stack
                self.stack = grown
            rows = self.rows[push]
            self.stack[rows, self.length[push]] = x[push]
            self.length[push] += 1

    def lengths(self):
        return self.length.copy()


def make_walker(group: Group, n: int):
    if isinstance(group, Lattice):
        return _LatticeWalker(group, n)
    if isinstance(group, FreeGroup):
        return _FreeWalker(group, n)
    if isinstance(group, InfiniteDihedral):
        return _DihedralInfWalker(group, n)
    if isinstance(group, CyclicGroup):
        return _CyclicWalker(group, n)
    return _ObjectWalker(group, n)


class CompiledMeasure:
    """A measure whose support elements are spelled over the default generating set."""

    def __init__(self, mu: FiniteSupportMeasure):
        group = mu.group
        S = group.generating_set().elements
        index = {s: i for i, s in enumerate(S)}
        words = []
        for g in mu.support():
            words.append([index[s] for s in group.letter_word(g)])
        width = max(1, max(len(w) for w in words))
        self.table = np.full((len(words), width), -1, dtype=np.int64)
        for i, w in enumerate(words):
            self.table[i, :len(w)] = w
        p = np.array([float(w) for w in mu.weights.values()])
        self.p = p / p.sum()
        self.group = group

    def advance(self, walker, rng: np.random.Generator, n: int):
        picks = rng.choice(len(self.p), size=n, p=self.p)
        rows = self.table[picks]
        for j in range(rows.shape[1]):
            col = rows[:, j]
            active = col >= 0
            walker.step(np.where(active, col, 0), active)


def simulate_lengths(mu: FiniteSupportMeasure, n_max: int, samples: int, seed: int):
    """Per-step sums of d(e, X_n) and d(e, X_n)^2 over ``samples`` walks.

    Returns (sum_d, sum_d2), arrays of length n_max + 1 indexed by n.
    """
    rng = np.random.default_rng(seed)
    compiled = CompiledMeasure(mu)
    walker = make_walker(mu.group, samples)
    s1 = np.zeros(n_max + 1)
    s2 = np.zeros(n_max + 1)
    for n in range(1, n_max + 1):
        compiled.advance(walker, rng, samples)
        d = walker.lengths().astype(np.float64)
        s1[n] = d.sum()
        s2[n] = (d * d).sum()
    return s1, s2
