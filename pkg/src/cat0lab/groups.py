"""Finitely generated groups with decidable equality, word metrics and orders.

Every group exposes the same small oracle interface: multiplication,
inversion, a canonical hashable key per element, a finite list of basic
generators and a way to spell an element as a word in them.  Word lengths
are computed by breadth-first enumeration of balls, memoized per
generating set and optionally persisted to a JSON-lines cache on disk.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from .errors import DomainError, RadiusExceeded, ResourceError, SchemaError

CACHE_FORMAT_VERSION = 1
DEFAULT_RADIUS_CAP = 64
DEFAULT_MAX_ELEMENTS = 2_000_000


class Group:
    """Base class for the concrete group oracles.

    Subclasses implement ``_mul``, ``_inv``, ``_identity_rep``,
    ``basic_generator_reps`` and the (de)serialisation hooks.  ``_key``
    must return a canonical hashable normal form; by default the internal
    representation already is one.
    """

    kind = "abstract"

    def __init__(self):
        self._metrics: dict[tuple, _BallEnumerator] = {}

    # -- oracle primitives -------------------------------------------------
    def _identity_rep(self):
        raise NotImplementedError

    def _mul(self, a, b):
        raise NotImplementedError

    def _inv(self, a):
        raise NotImplementedError

    def _key(self, rep):
        return rep

    def basic_generator_reps(self) -> list:
        raise NotImplementedError

    def descriptor(self) -> dict:
        raise NotImplementedError

    def parse(self, obj) -> "GroupElement":
        raise NotImplementedError

    def serialize(self, g: "GroupElement"):
        raise NotImplementedError

    def word_of(self, g: "GroupElement") -> list[tuple[int, int]]:
        """Spell ``g`` as [(basic generator index, +1/-1), ...]."""
        raise NotImplementedError

    def norm(self, g: "GroupElement") -> int | None:
        """Closed-form word length for the default generating set, if known."""
        return None

    def sort_token(self, g: "GroupElement") -> str:
        return json.dumps(self.serialize(g), sort_keys=True)

    def sphere_order(self, g: "GroupElement", word: tuple):
        return self.sort_token(g)

    # -- derived API -------------------------------------------------------
    @property
    def name(self) -> str:
        if not hasattr(self, "_name"):
            self._name = json.dumps(self.descriptor(), sort_keys=True)
        return self._name

    def __eq__(self, other):
        return isinstance(other, Group) and self.name == other.name

    def __hash__(self):
        return hash(self.name)

    def __repr__(self):
        return f"{type(self).__name__}({self.descriptor()})"

    def element(self, rep) -> "GroupElement":
        return GroupElement(self, rep)

    def identity(self) -> "GroupElement":
        return GroupElement(self, self._identity_rep())

    def basic_generators(self) -> list["GroupElement"]:
        return [GroupElement(self, r) for r in self.basic_generator_reps()]

    def generating_set(self) -> "GeneratingSet":
        """Symmetric closure of the basic generators (identity removed)."""
        out: list[GroupElement] = []
        seen = set()
        for g in self.basic_generators():
            for h in (g, g.inverse()):
                if h.key not in seen and not h.is_identity():
                    seen.add(h.key)
                    out.append(h)
        return GeneratingSet(tuple(out), symmetric=True)

    def is_finite(self) -> bool:
        return False

    def order(self) -> int | None:
        return None

    def metric(self, S: "GeneratingSet | None" = None, *, cache_dir=None,
               max_elements: int = DEFAULT_MAX_ELEMENTS) -> "_BallEnumerator":
        S = S or self.generating_set()
        tag = (S.key(), str(cache_dir), max_elements)
        if tag not in self._metrics:
            self._metrics[tag] = _BallEnumerator(self, S, cache_dir=cache_dir,
                                                 max_elements=max_elements)
        return self._metrics[tag]

    def letter_word(self, g: "GroupElement") -> list["GroupElement"]:
        """``word_of`` expressed as a list of generator/inverse elements."""
        gens = self.basic_generators()
        return [gens[i] if e > 0 else gens[i].inverse() for i, e in self.word_of(g)]


@dataclass(frozen=True, eq=False)
class GroupElement:
    group: Group
    rep: Any
    _key_cache: list = field(default_factory=list, repr=False, compare=False)

    @property
    def key(self):
        if not self._key_cache:
            self._key_cache.append(self.group._key(self.rep))
        return self._key_cache[0]

    def __eq__(self, other):
        if not isinstance(other, GroupElement):
            return NotImplemented
        if self.key != other.key:
            return False
        return self.group is other.group or self.group == other.group

    def __hash__(self):
        return hash(self.key)

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return multiply(self, other)

    def __pow__(self, n: int) -> "GroupElement":
        if n < 0:
            return self.inverse() ** (-n)
        result, base = self.group.identity(), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def inverse(self) -> "GroupElement":
        return GroupElement(self.group, self.group._inv(self.rep))

    def is_identity(self) -> bool:
        return self.key == self.group._key(self.group._identity_rep())

    def __repr__(self):
        return f"<{self.group.kind} {self.group.serialize(self)!r}>"


def _check_same(a: GroupElement, b: GroupElement):
    if a.group is not b.group and a.group != b.group:
        raise DomainError(f"mixed-group operands: {a.group!r} and {b.group!r}")


def multiply(a: GroupElement, b: GroupElement) -> GroupElement:
    _check_same(a, b)
    return GroupElement(a.group, a.group._mul(a.rep, b.rep))


def sort_key(g: GroupElement):
    return g.group.sort_token(g)


@dataclass(frozen=True)
class GeneratingSet:
    elements: tuple
    symmetric: bool = True

    def __post_init__(self):
        if not self.elements:
            raise DomainError("generating set must be nonempty")
        group = self.elements[0].group
        for s in self.elements:
            _check_same(s, self.elements[0])
            if s.is_identity():
                raise DomainError("generating set must not contain the identity")
        if self.symmetric:
            keys = {s.key for s in self.elements}
            for s in self.elements:
                if s.inverse().key not in keys:
                    raise DomainError(f"generating set flagged symmetric but {s!r}^-1 missing")
        object.__setattr__(self, "group", group)

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    def key(self) -> str:
        payload = [sort_key(s) for s in self.elements]
        return hashlib.sha256(json.dumps(payload).encode()).hexdigest()[:16]


@dataclass
class WordMetricBall:
    radius: int
    elements: dict  # GroupElement -> word length, sorted by (length, normal form)

    def __len__(self):
        return len(self.elements)

    def __contains__(self, g):
        return g in self.elements

    def sphere(self, r: int) -> list[GroupElement]:
        return [g for g, n in self.elements.items() if n == r]


class _BallEnumerator:
    """Incremental breadth-first ball enumeration with memoized spheres."""

    def __init__(self, group: Group, S: GeneratingSet, *, cache_dir=None,
                 max_elements: int = DEFAULT_MAX_ELEMENTS):
        self.group = group
        self.S = S
        self.max_elements = max_elements
        self.cache_dir = Path(cache_dir) if cache_dir else None
        e = group.identity()
        self.lengths: dict = {e: 0}
        self.words: dict = {e: ()}
        self.spheres: list[list[GroupElement]] = [[e]]

    @property
    def radius(self) -> int:
        return len(self.spheres) - 1

    def _cache_path(self, radius: int) -> Path | None:
        if self.cache_dir is None:
            return None
        tag = hashlib.sha256(self.group.name.encode()).hexdigest()[:12]
        return self.cache_dir / f"ball_v{CACHE_FORMAT_VERSION}_{self.group.kind}_{tag}_{self.S.key()}_r{radius}.jsonl"

    def _load(self, radius: int) -> bool:
        path = self._cache_path(radius)
        if path is None or not path.exists():
            return False
        try:
            loaded = self._read(path)
        except (ValueError, KeyError, TypeError, IndexError):
            loaded = None  # unreadable cache files are ignored and overwritten
        if loaded is None:
            return False
        spheres, lengths, words = loaded
        self.spheres, self.lengths, self.words = spheres, lengths, words
        return True

    def _read(self, path: Path):
        with path.open() as fh:
            header = json.loads(fh.readline())
            if header.get("version") != CACHE_FORMAT_VERSION or header.get("group") != self.group.descriptor():
                return None
            gens = list(self.S)
            spheres: list[list[GroupElement]] = []
            lengths, words = {}, {}
            for line in fh:
                rec = json.loads(line)
                word = tuple(rec["word"])
                g = self.group.identity()
                for i in word:
                    g = g * gens[i]
                n = rec["length"]
                while len(spheres) <= n:
                    spheres.append([])
                spheres[n].append(g)
                lengths[g] = n
                words[g] = word
        return spheres, lengths, words

    def _save(self):
        path = self._cache_path(self.radius)
        if path is None:
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        with tmp.open("w") as fh:
            fh.write(json.dumps({"version": CACHE_FORMAT_VERSION, "group": self.group.descriptor(),
                                 "generating_set": [self.group.serialize(s) for s in self.S],
                                 "radius": self.radius}) + "\n")
            for sphere in self.spheres:
                for g in sphere:
                    fh.write(json.dumps({"nf": self.group.serialize(g), "length": self.lengths[g],
                                         "word": list(self.words[g])}) + "\n")
        os.replace(tmp, path)

    def grow_to(self, radius: int):
        if radius <= self.radius:
            return
        if self._load(radius):
            return
        gens = list(self.S)
        while self.radius < radius:
            nxt: list[GroupElement] = []
            r = self.radius + 1
            for g in self.spheres[-1]:
                w = self.words[g]
                for i, s in enumerate(gens):
                    h = g * s
                    if h not in self.lengths:
                        self.lengths[h] = r
                        self.words[h] = w + (i,)
                        nxt.append(h)
                        if len(self.lengths) > self.max_elements:
                            raise ResourceError(
                                f"ball enumeration exceeded {self.max_elements} elements at radius {r}")
            nxt.sort(key=lambda g: self.group.sphere_order(g, self.words[g]))
            self.spheres.append(nxt)
        self._save()

    def ball(self, radius: int) -> WordMetricBall:
        self.grow_to(radius)
        elems = {}
        for r in range(radius + 1):
            for g in self.spheres[r]:
                elems[g] = r
        return WordMetricBall(radius, elems)

    def length(self, g: GroupElement, cap: int = DEFAULT_RADIUS_CAP) -> int:
        _check_same(g, self.group.identity())
        if g in self.lengths:
            return self.lengths[g]
        while self.radius < cap:
            self.grow_to(self.radius + 1)
            if g in self.lengths:
                return self.lengths[g]
            if not self.spheres[-1]:
                break
        raise RadiusExceeded(cap)

    def word(self, g: GroupElement, cap: int = DEFAULT_RADIUS_CAP) -> tuple:
        self.length(g, cap)
        return self.words[g]


# -- public operations ----------------------------------------------------------

def word_length(g: GroupElement, S: GeneratingSet | None = None,
                cap: int = DEFAULT_RADIUS_CAP, cache_dir=None) -> int:
    """Length of a shortest S-word for ``g`` (breadth-first, memoized)."""
    return g.group.metric(S, cache_dir=cache_dir).length(g, cap)


def ball(group: Group, radius: int, S: GeneratingSet | None = None,
         cap: int = DEFAULT_RADIUS_CAP, cache_dir=None,
         max_elements: int = DEFAULT_MAX_ELEMENTS) -> WordMetricBall:
    if radius < 0:
        raise DomainError("radius must be nonnegative")
    if radius > cap:
        raise RadiusExceeded(cap, f"radius {radius} exceeds configured cap {cap}")
    return group.metric(S, cache_dir=cache_dir, max_elements=max_elements).ball(radius)


def element_order(g: GroupElement, cap: int) -> int | None:
    """Least n <= cap with g^n = e, or None when the order exceeds ``cap``."""
    if cap < 1:
        raise DomainError("cap must be >= 1")
    h = g
    for n in range(1, cap + 1):
        if h.is_identity():
            return n
        h = h * g
    return None


def distance_norm(g: GroupElement) -> int:
    """Word length w.r.t. the default generating set, closed form when available."""
    n = g.group.norm(g)
    if n is None:
        n = word_length(g)
    return n


# -- concrete groups -------------------------------------------------------------

class Lattice(Group):
    """Z^d with the standard basis as basic generators."""

    kind = "lattice"

    def __init__(self, rank: int):
        super().__init__()
        if rank < 1:
            raise DomainError("lattice rank must be >= 1")
        self.rank = rank

    def descriptor(self):
        return {"kind": "lattice", "rank": self.rank}

    def _identity_rep(self):
        return (0,) * self.rank

    def _mul(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def _inv(self, a):
        return tuple(-x for x in a)

    def basic_generator_reps(self):
        return [tuple(int(i == j) for j in range(self.rank)) for i in range(self.rank)]

    def norm(self, g):
        return sum(abs(x) for x in g.rep)

    def word_of(self, g):
        word = []
        for i, x in enumerate(g.rep):
            word.extend([(i, 1 if x > 0 else -1)] * abs(x))
        return word

    def parse(self, obj):
        if isinstance(obj, int) and self.rank == 1:
            obj = [obj]
        if not isinstance(obj, (list, tuple)) or len(obj) != self.rank:
            raise SchemaError(f"lattice element must be a list of {self.rank} ints, got {obj!r}")
        return self.element(tuple(int(x) for x in obj))

    def serialize(self, g):
        return list(g.rep) if self.rank > 1 else g.rep[0]


class FreeGroup(Group):
    """Free group F_k; elements are freely reduced tuples of +-(i+1)."""

    kind = "free"

    def __init__(self, rank: int):
        super().__init__()
        if not 1 <= rank <= 26:
            raise DomainError("free group rank must be in 1..26")
        self.rank = rank

    def descriptor(self):
        return {"kind": "free", "rank": self.rank}

    def _identity_rep(self):
        return ()

    def _mul(self, a, b):
        out = list(a)
        for x in b:
            if out and out[-1] == -x:
                out.pop()
            else:
                out.append(x)
        return tuple(out)

    def _inv(self, a):
        return tuple(-x for x in reversed(a))

    def basic_generator_reps(self):
        return [(i + 1,) for i in range(self.rank)]

    def norm(self, g):
        return len(g.rep)

    def word_of(self, g):
        return [(abs(x) - 1, 1 if x > 0 else -1) for x in g.rep]

    def parse(self, obj):
        if not isinstance(obj, str):
            raise SchemaError(f"free group element must be a word string, got {obj!r}")
        rep: tuple = ()
        for ch in obj.replace(" ", ""):
            i = ord(ch.lower()) - ord("a")
            if not 0 <= i < self.rank:
                raise SchemaError(f"unknown letter {ch!r} for F_{self.rank}")
            rep = self._mul(rep, ((i + 1) if ch.islower() else -(i + 1),))
        return self.element(rep)

    def serialize(self, g):
        return "".join(chr(ord("a") + abs(x) - 1) if x > 0 else chr(ord("A") + abs(x) - 1)
                       for x in g.rep)


class InfiniteDihedral(Group):
    """D_inf = <s, t | s^2 = t^2 = e>; reduced words alternate s and t."""

    kind = "dihedral_inf"
    letters = "st"

    def descriptor(self):
        return {"kind": "dihedral_inf"}

    def _identity_rep(self):
        return ()

    def _mul(self, a, b):
        out = list(a)
        for x in b:
            if out and out[-1] == x:
                out.pop()
            else:
                out.append(x)
        return tuple(out)

    def _inv(self, a):
        return tuple(reversed(a))

    def basic_generator_reps(self):
        return [(0,), (1,)]

    def norm(self, g):
        return len(g.rep)

    def word_of(self, g):
        return [(x, 1) for x in g.rep]

    def parse(self, obj):
        if not isinstance(obj, str) or set(obj) - set(self.letters):
            raise SchemaError(f"D_inf element must be a word over 's','t', got {obj!r}")
        rep: tuple = ()
        for ch in obj:
            rep = self._mul(rep, (self.letters.index(ch),))
        return self.element(rep)

    def serialize(self, g):
        return "".join(self.letters[x] for x in g.rep)


class CyclicGroup(Group):
    """Z/n with generator 1."""

    kind = "cyclic"

    def __init__(self, order: int):
        super().__init__()
        if order < 2:
            raise DomainError("cyclic group order must be >= 2")
        self.n = order

    def descriptor(self):
        return {"kind": "cyclic", "order": self.n}

    def is_finite(self):
        return True

    def order(self):
        return self.n

    def _identity_rep(self):
        return 0

    def _mul(self, a, b):
        return (a + b) % self.n

    def _inv(self, a):
        return (-a) % self.n

    def basic_generator_reps(self):
        return [1]

    def norm(self, g):
        return min(g.rep, self.n - g.rep)

    def word_of(self, g):
        k = g.rep
        return [(0, 1)] * k if k <= self.n - k else [(0, -1)] * (self.n - k)

    def parse(self, obj):
        if not isinstance(obj, int):
            raise SchemaError(f"cyclic group element must be an int, got {obj!r}")
        return self.element(obj % self.n)

    def serialize(self, g):
        return g.rep


class DihedralGroup(Group):
    """Finite dihedral group of order 2n; (k, f) stands for r^k s^f, s r s = r^-1."""

    kind = "dihedral"

    def __init__(self, order: int):
        super().__init__()
        if order < 2:
            raise DomainError("dihedral parameter n must be >= 2")
        self.n = order

    def descriptor(self):
        return {"kind": "dihedral", "order": self.n}

    def is_finite(self):
        return True

    def order(self):
        return 2 * self.n

    def _identity_rep(self):
        return (0, 0)

    def _mul(self, a, b):
        k1, f1 = a
        k2, f2 = b
        return ((k1 + (-k2 if f1 else k2)) % self.n, f1 ^ f2)

    def _inv(self, a):
        k, f = a
        return (k, 1) if f else ((-k) % self.n, 0)

    def basic_generator_reps(self):
        return [(1 % self.n, 0), (0, 1)]

    def word_of(self, g):
        k, f = g.rep
        return [(0, 1)] * k + [(1, 1)] * f

    def parse(self, obj):
        if not (isinstance(obj, (list, tuple)) and len(obj) == 2):
            raise SchemaError(f"dihedral element must be [k, f], got {obj!r}")
        return self.element((int(obj[0]) % self.n, int(obj[1]) & 1))

    def serialize(self, g):
        return list(g.rep)


def group_from_descriptor(desc: dict) -> Group:
    """Build a group from {"kind": ..., "rank"/"order": int}."""
    from .grigorchuk import GrigorchukGroup

    if not isinstance(desc, dict) or "kind" not in desc:
        raise SchemaError(f"group descriptor needs a 'kind': {desc!r}")
    kind = desc["kind"]
    extra = set(desc) - {"kind", "rank", "order"}
    if extra:
        raise SchemaError(f"unknown group descriptor keys {sorted(extra)}")
    try:
        if kind == "lattice":
            return Lattice(int(desc.get("rank", 1)))
        if kind == "free":
            return FreeGroup(int(desc.get("rank", 2)))
        if kind == "dihedral_inf":
            return InfiniteDihedral()
        if kind == "cyclic":
            return CyclicGroup(int(desc["order"]))
        if kind == "dihedral":
            return DihedralGroup(int(desc["order"]))
        if kind == "grigorchuk":
            return GrigorchukGroup()
    except KeyError as exc:
        raise SchemaError(f"group descriptor {desc!r} missing {exc}") from None
    except DomainError as exc:
        raise SchemaError(str(exc)) from None
    raise SchemaError(f"unknown group kind {kind!r}")


def product_of(gs: Iterable[GroupElement], group: Group) -> GroupElement:
    out = group.identity()
    for g in gs:
        out = out * g
    return out


def lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)
