"""Computable group backends: finite, abelian, free, and free products.

Every backend keeps elements in a canonical payload (an ``int`` for finite
groups, an integer vector for abelian groups, a reduced letter tuple for free
groups and a syllable tuple for free products), so equality of elements is
equality of payloads.  Payload-level methods are prefixed with an underscore
and do no validation; they are the hot path of every search.
"""

from __future__ import annotations

import json
import string
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Hashable, Iterator, Sequence

from .errors import AlphabetMismatch, GroupSpecError, HandleMismatch, ResourceLimit
from .words import Alphabet, Word, parse_word, reduce_letters

DEFAULT_MAX_ELEMENTS = 10**7


@dataclass(frozen=True, slots=True)
class GroupElement:
    group: "Group"
    payload: Hashable

    def __mul__(self, other: GroupElement) -> GroupElement:
        return multiply(self, other)

    def inverse(self) -> GroupElement:
        return inverse_elt(self)

    def is_identity(self) -> bool:
        return self.payload == self.group.identity_payload

    def word(self) -> Word:
        """Shortlex-least geodesic word representing this element."""
        return Word(self.group.alphabet, self.group._rep(self.payload))

    def __str__(self) -> str:
        return self.group.format(self)

    def __repr__(self) -> str:
        return f"<{self.group.kind} element {self.group.format(self)!r}>"


class Group:
    """Base class of all group backends (a group handle).

    Subclasses fill in ``identity_payload`` and the payload methods
    ``_letter``, ``_mul``, ``_inv``, ``_length`` and ``_rep``.  Handles compare
    by identity and are treated as immutable once built; the ball cache is an
    internal memo that never changes observable results.
    """

    kind: str = "abstract"
    identity_payload: Hashable = None

    def __init__(self, alphabet: Alphabet):
        self.alphabet = alphabet
        self._layers: list[list[Hashable]] | None = None
        self._seen: set[Hashable] | None = None

    def __getstate__(self):
        state = self.__dict__.copy()
        state["_layers"] = None
        state["_seen"] = None
        return state

    # payload level -------------------------------------------------------
    def _letter(self, i: int) -> Hashable:
        return self._letters[i]

    def _mul(self, p, q):
        raise NotImplementedError

    def _inv(self, p):
        raise NotImplementedError

    def _length(self, p) -> int:
        raise NotImplementedError

    def _rep(self, p) -> tuple[int, ...]:
        raise NotImplementedError

    def _conj(self, a, x):
        return self._mul(self._mul(self._inv(x), a), x)

    def _evaluate(self, letters: Sequence[int]):
        p = self.identity_payload
        for i in letters:
            p = self._mul(p, self._letters[i])
        return p

    # element level -------------------------------------------------------
    @property
    def identity(self) -> GroupElement:
        return GroupElement(self, self.identity_payload)

    def element(self, payload: Hashable) -> GroupElement:
        return GroupElement(self, payload)

    def element_of(self, w: Word) -> GroupElement:
        if w.alphabet != self.alphabet:
            raise AlphabetMismatch("word alphabet differs from the group's generating set")
        return GroupElement(self, self._evaluate(w.letters))

    def parse(self, text: str) -> GroupElement:
        return self.element_of(parse_word(text, self.alphabet))

    def generators(self) -> list[GroupElement]:
        return [GroupElement(self, p) for p in self._letters]

    def format(self, e: GroupElement) -> str:
        return " ".join(self.alphabet.symbols[i] for i in self._rep(e.payload))

    def __repr__(self) -> str:
        return f"<{type(self).__name__} on {' '.join(self.alphabet.generators)}>"

    # ball cache ----------------------------------------------------------
    def _ball_layers(self, radius: int, cap: int) -> list[list[Hashable]]:
        """Spheres ``S_0 .. S_min(radius, last nonempty)`` of the Cayley graph."""
        if self._layers is None:
            self._layers = [[self.identity_payload]]
            self._seen = {self.identity_payload}
        layers, seen = self._layers, self._seen
        total = sum(len(layer) for layer in layers[: radius + 1])
        if total > cap:
            raise ResourceLimit(cap, radius)
        letters = self._letters
        while len(layers) <= radius and layers[-1]:
            nxt: list[Hashable] = []
            for p in layers[-1]:
                for g in letters:
                    q = self._mul(p, g)
                    if q not in seen:
                        if total + len(nxt) + 1 > cap:
                            # roll back this partial sphere so the cache stays exact
                            seen.difference_update(nxt)
                            raise ResourceLimit(cap, len(layers))
                        seen.add(q)
                        nxt.append(q)
            total += len(nxt)
            layers.append(nxt)
        return layers[: radius + 1]


# ---------------------------------------------------------------------------
# finite groups


class FiniteGroup(Group):
    kind = "finite"

    def __init__(
        self,
        table: Sequence[Sequence[int]],
        generator_map: dict[str, int],
        generators: Sequence[str] | None = None,
        elements: Sequence[str] | None = None,
        involutions: Sequence[str] = (),
    ):
        n = len(table)
        if n == 0:
            raise GroupSpecError("finite group needs at least one element")
        tbl = tuple(tuple(int(v) for v in row) for row in table)
        full = set(range(n))
        for row in tbl:
            if len(row) != n or set(row) != full:
                raise GroupSpecError("table rows must be permutations of 0..n-1")
        for c in range(n):
            if {tbl[r][c] for r in range(n)} != full:
                raise GroupSpecError("table columns must be permutations of 0..n-1")
        ident = [e for e in range(n) if all(tbl[e][b] == b and tbl[b][e] == b for b in range(n))]
        if len(ident) != 1:
            raise GroupSpecError("table has no two-sided identity")
        e = ident[0]
        for a in range(n):
            for b in range(n):
                ab = tbl[a][b]
                for c in range(n):
                    if tbl[ab][c] != tbl[a][tbl[b][c]]:
                        raise GroupSpecError("table is not associative")
        inv = tuple(tbl[a].index(e) for a in range(n))

        if generators is None:
            generators = list(generator_map)
        involutions = set(involutions)
        for g in generators:
            if g not in generator_map:
                raise GroupSpecError(f"generator {g!r} missing from generator_map")
            x = generator_map[g]
            if not 0 <= x < n:
                raise GroupSpecError(f"generator {g!r} maps outside the table")
            if inv[x] == x:
                involutions.add(g)
            elif g in involutions:
                raise GroupSpecError(f"generator {g!r} declared an involution but has order > 2")
        super().__init__(Alphabet.from_generators(generators, involutions))

        self.order = n
        self.table = tbl
        self.inverse_map = inv
        self.identity_payload = e
        self.element_names = tuple(elements) if elements is not None else tuple(str(i) for i in range(n))
        if len(self.element_names) != n:
            raise GroupSpecError("elements list length differs from table size")
        self.generator_map = {g: generator_map[g] for g in generators}
        letters = []
        for sym in self.alphabet.symbols:
            if sym in self.generator_map:
                letters.append(self.generator_map[sym])
            else:
                letters.append(inv[self.generator_map[sym[:-3]]])
        self._letters = tuple(letters)

        # BFS distance table; first discovery gives the shortlex-least geodesic
        dist = [-1] * n
        rep: list[tuple[int, ...]] = [()] * n
        dist[e] = 0
        order = [e]
        queue = deque([e])
        while queue:
            a = queue.popleft()
            for i, g in enumerate(self._letters):
                b = tbl[a][g]
                if dist[b] < 0:
                    dist[b] = dist[a] + 1
                    rep[b] = rep[a] + (i,)
                    order.append(b)
                    queue.append(b)
        if len(order) != n:
            raise GroupSpecError("generators do not generate the whole table")
        self.distance = tuple(dist)
        self.reps = tuple(rep)
        self.bfs_order = tuple(order)
        self.diameter = max(dist)

    def _mul(self, p, q):
        return self.table[p][q]

    def _inv(self, p):
        return self.inverse_map[p]

    def _length(self, p) -> int:
        return self.distance[p]

    def _rep(self, p) -> tuple[int, ...]:
        return self.reps[p]

    def elements(self) -> list[GroupElement]:
        """All elements in BFS-distance-then-shortlex order."""
        return [GroupElement(self, p) for p in self.bfs_order]


# ---------------------------------------------------------------------------
# finitely generated abelian groups


class AbelianGroup(Group):
    """Z^rank x Z/m_1 x ... with one generator per coordinate."""

    kind = "abelian"

    def __init__(self, generators: Sequence[str], rank: int, torsion: Sequence[int] = (), involutions: Sequence[str] = ()):
        torsion = [int(m) for m in torsion]
        if rank < 0 or any(m < 2 for m in torsion):
            raise GroupSpecError("rank must be >= 0 and torsion moduli >= 2")
        if len(generators) != rank + len(torsion):
            raise GroupSpecError("abelian group needs exactly rank + len(torsion) generators")
        self.rank = rank
        self.torsion = tuple(torsion)
        self.moduli: tuple[int | None, ...] = (None,) * rank + self.torsion
        for g in involutions:
            if g not in generators or self.moduli[list(generators).index(g)] != 2:
                raise GroupSpecError(f"involution {g!r} must generate a Z/2 coordinate")
        super().__init__(Alphabet.from_generators(generators, involutions))
        d = len(self.moduli)
        self.identity_payload = (0,) * d
        letters = []
        self._coord_symbols: list[tuple[int, int]] = []
        for k, g in enumerate(generators):
            pos = self.alphabet.index(g)
            neg = self.alphabet.inverse[pos]
            self._coord_symbols.append((pos, neg))
        for i in range(self.alphabet.size):
            for k, (pos, neg) in enumerate(self._coord_symbols):
                if i in (pos, neg):
                    step = 1 if i == pos else -1
                    m = self.moduli[k]
                    vec = [0] * d
                    vec[k] = step % m if m else step
                    letters.append(tuple(vec))
                    break
        self._letters = tuple(letters)

    def vector(self, e: GroupElement) -> tuple[int, ...]:
        return e.payload

    def from_vector(self, vec: Sequence[int]) -> GroupElement:
        return GroupElement(self, tuple(v % m if m else v for v, m in zip(vec, self.moduli)))

    def _mul(self, p, q):
        return tuple((a + b) % m if m else a + b for a, b, m in zip(p, q, self.moduli))

    def _inv(self, p):
        return tuple(-a % m if m else -a for a, m in zip(p, self.moduli))

    def _conj(self, a, x):
        return a

    def _length(self, p) -> int:
        return sum(min(v, m - v) if m else abs(v) for v, m in zip(p, self.moduli))

    def _rep(self, p) -> tuple[int, ...]:
        out: list[int] = []
        for v, m, (pos, neg) in zip(p, self.moduli, self._coord_symbols):
            if m:
                if v <= m - v:
                    out += [pos] * v
                else:
                    out += [neg] * (m - v)
            elif v >= 0:
                out += [pos] * v
            else:
                out += [neg] * (-v)
        return tuple(out)


# ---------------------------------------------------------------------------
# free groups


class FreeGroup(Group):
    kind = "free"
    identity_payload = ()

    def __init__(self, generators: Sequence[str]):
        if not generators:
            raise GroupSpecError("free group needs at least one generator")
        super().__init__(Alphabet.from_generators(generators))
        self.rank = len(generators)
        self._letters = tuple((i,) for i in range(self.alphabet.size))
        self._inverse = self.alphabet.inverse

    def _mul(self, p, q):
        inv = self._inverse
        i, n = 0, min(len(p), len(q))
        while i < n and p[-1 - i] == inv[q[i]]:
            i += 1
        return p[: len(p) - i] + q[i:]

    def _inv(self, p):
        inv = self._inverse
        return tuple(inv[i] for i in reversed(p))

    def _length(self, p) -> int:
        return len(p)

    def _rep(self, p) -> tuple[int, ...]:
        return p

    def _evaluate(self, letters):
        return reduce_letters(letters, self._inverse)


# ---------------------------------------------------------------------------
# free products


def factor_name(i: int) -> str:
    """Display name of factor ``i`` (0-based): A, B, ..., Z, F26, F27, ..."""
    return string.ascii_uppercase[i] if i < 26 else f"F{i}"


class FreeProduct(Group):
    """Free product of finite, abelian and free factors.

    A payload is a tuple of ``(factor_index, factor_payload)`` syllables with
    0-based factor indices; no syllable is a factor identity and adjacent
    syllables lie in distinct factors.
    """

    kind = "free_product"
    identity_payload = ()

    def __init__(self, factors: Sequence[Group]):
        if not factors:
            raise GroupSpecError("free product needs at least one factor")
        for f in factors:
            if isinstance(f, FreeProduct):
                raise GroupSpecError("free product factors must be finite, abelian or free")
        try:
            alphabet = Alphabet.union([f.alphabet for f in factors])
        except GroupSpecError as exc:
            raise GroupSpecError(f"factor generator names must be globally distinct ({exc})") from None
        super().__init__(alphabet)
        self.factors = tuple(factors)
        self._offsets: list[int] = []
        self._symbol_factor: list[tuple[int, int]] = []
        off = 0
        for k, f in enumerate(factors):
            self._offsets.append(off)
            self._symbol_factor += [(k, j) for j in range(f.alphabet.size)]
            off += f.alphabet.size
        letters = []
        for k, j in self._symbol_factor:
            h = factors[k]._letter(j)
            letters.append(() if h == factors[k].identity_payload else ((k, h),))
        self._letters = tuple(letters)
        self._ids = tuple(f.identity_payload for f in factors)

    def symbol_factor(self, i: int) -> tuple[int, int]:
        """(factor index, local symbol index) of ambient symbol ``i``."""
        return self._symbol_factor[i]

    def embed(self, k: int, h: GroupElement) -> GroupElement:
        if h.group is not self.factors[k]:
            raise HandleMismatch("element does not belong to that factor")
        return GroupElement(self, () if h.payload == self._ids[k] else ((k, h.payload),))

    def _mul(self, p, q):
        if not p:
            return q
        if not q:
            return p
        if p[-1][0] != q[0][0]:
            return p + q
        out = list(p)
        ids = self._ids
        factors = self.factors
        for k, h in q:
            if out and out[-1][0] == k:
                merged = factors[k]._mul(out[-1][1], h)
                out.pop()
                if merged != ids[k]:
                    out.append((k, merged))
            else:
                out.append((k, h))
        return tuple(out)

    def _inv(self, p):
        factors = self.factors
        return tuple((k, factors[k]._inv(h)) for k, h in reversed(p))

    def _length(self, p) -> int:
        factors = self.factors
        return sum(factors[k]._length(h) for k, h in p)

    def _rep(self, p) -> tuple[int, ...]:
        out: list[int] = []
        for k, h in p:
            off = self._offsets[k]
            out += [off + i for i in self.factors[k]._rep(h)]
        return tuple(out)


# ---------------------------------------------------------------------------
# module-level operations


def _same_group(a: GroupElement, b: GroupElement) -> Group:
    if a.group is not b.group:
        raise HandleMismatch("elements belong to different group handles")
    return a.group


def element_of(handle: Group, w: Word) -> GroupElement:
    return handle.element_of(w)


def multiply(a: GroupElement, b: GroupElement) -> GroupElement:
    g = _same_group(a, b)
    return GroupElement(g, g._mul(a.payload, b.payload))


def inverse_elt(a: GroupElement) -> GroupElement:
    return GroupElement(a.group, a.group._inv(a.payload))


def conjugate(a: GroupElement, x: GroupElement) -> GroupElement:
    """``a^x = x^-1 a x``."""
    g = _same_group(a, x)
    return GroupElement(g, g._conj(a.payload, x.payload))


def x_length(a: GroupElement) -> int:
    return a.group._length(a.payload)


def ball_enumerate(
    handle: Group,
    radius: int,
    max_elements: int = DEFAULT_MAX_ELEMENTS,
    workers: int = 1,
) -> Iterator[GroupElement]:
    """Yield ``B_radius(1)`` in (x_length, shortlex) order, identity first.

    Raises ResourceLimit once the ball would hold more than ``max_elements``
    elements.  With ``workers > 1`` each sphere is expanded in parallel
    chunks and merged in frontier order, so the output is identical.
    """
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if workers > 1:
        layers = _parallel_layers(handle, radius, max_elements, workers)
    else:
        layers = handle._ball_layers(radius, max_elements)
    for layer in layers:
        for p in layer:
            yield GroupElement(handle, p)


def _parallel_layers(handle: Group, radius: int, cap: int, workers: int) -> list[list[Hashable]]:
    letters = handle._letters
    mul = handle._mul

    def expand(chunk):
        return [mul(p, g) for p in chunk for g in letters]

    layers = [[handle.identity_payload]]
    seen = {handle.identity_payload}
    total = 1
    with ThreadPoolExecutor(max_workers=workers) as pool:
        while len(layers) <= radius and layers[-1]:
            frontier = layers[-1]
            size = max(1, -(-len(frontier) // (4 * workers)))
            chunks = [frontier[i : i + size] for i in range(0, len(frontier), size)]
            nxt = []
            for cand in pool.map(expand, chunks):
                for q in cand:
                    if q not in seen:
                        seen.add(q)
                        nxt.append(q)
            total += len(nxt)
            if total > cap:
                raise ResourceLimit(cap, len(layers))
            layers.append(nxt)
    return layers


# ---------------------------------------------------------------------------
# group spec files


def group_from_spec(spec: dict[str, Any], _nested: bool = False) -> Group:
    """Build a backend from the JSON group description."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise GroupSpecError("group spec must be an object with a 'kind' field")
    kind = spec["kind"]
    involutions = spec.get("involutions", [])
    if kind == "free":
        if involutions:
            raise GroupSpecError("free groups have no self-inverse generators")
        return FreeGroup(list(spec["generators"]))
    if kind == "abelian":
        gens = list(spec["generators"])
        torsion = list(spec.get("torsion", []))
        rank = int(spec.get("rank", len(gens) - len(torsion)))
        return AbelianGroup(gens, rank, torsion, involutions)
    if kind == "finite":
        gmap = spec["generator_map"]
        return FiniteGroup(
            spec["table"],
            {str(k): int(v) for k, v in gmap.items()},
            generators=list(spec.get("generators", list(gmap))),
            elements=spec.get("elements"),
            involutions=involutions,
        )
    if kind == "free_product":
        if _nested:
            raise GroupSpecError("nested free products are not supported")
        return FreeProduct([group_from_spec(f, _nested=True) for f in spec["factors"]])
    raise GroupSpecError(f"unknown group kind {kind!r}")


def load_group(path: str | Path) -> Group:
    with open(path, encoding="utf-8") as fh:
        spec = json.load(fh)
    try:
        return group_from_spec(spec)
    except (KeyError, TypeError) as exc:
        raise GroupSpecError(f"malformed group spec: {exc}") from None


def cyclic_group(name: str, n: int) -> FiniteGroup:
    """Z/n as a table backend with one generator."""
    table = [[(a + b) % n for b in range(n)] for a in range(n)]
    return FiniteGroup(table, {name: 1 % n})


def permutation_group(generators: dict[str, Sequence[int]]) -> FiniteGroup:
    """Table backend for the permutation group generated by ``generators``.

    Permutations are image tuples; products compose left to right
    (``(a*b)(i) = b[a[i]]``).
    """
    gens = {k: tuple(v) for k, v in generators.items()}
    degree = len(next(iter(gens.values())))
    ident = tuple(range(degree))
    elems = [ident]
    index = {ident: 0}
    queue = deque([ident])
    while queue:
        a = queue.popleft()
        for g in gens.values():
            b = tuple(g[a[i]] for i in range(degree))
            if b not in index:
                index[b] = len(elems)
                elems.append(b)
                queue.append(b)
    table = [[index[tuple(b[a[i]] for i in range(degree))] for b in elems] for a in elems]
    return FiniteGroup(
        table,
        {k: index[v] for k, v in gens.items()},
        elements=[" ".join(map(str, p)) for p in elems],
    )
