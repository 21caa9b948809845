"""Symmetrized alphabets and words over them.

A generator ``g`` contributes the symbol ``g`` and, unless it is declared
self-inverse, the symbol ``g^-1``.  Words store symbol indices; the textual
form is a whitespace separated token list such as ``"p p^-1 q"``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import AlphabetMismatch, GroupSpecError, MalformedToken, UnknownSymbol

INVERSE_SUFFIX = "^-1"


@dataclass(frozen=True)
class Alphabet:
    """An ordered symmetrized generating set.

    ``symbols`` is the declared order used for shortlex comparisons and
    ``inverse[i]`` is the index of the formal inverse of symbol ``i``.
    """

    symbols: tuple[str, ...]
    inverse: tuple[int, ...]

    def __post_init__(self):
        n = len(self.symbols)
        if len(self.inverse) != n:
            raise GroupSpecError("involution must cover every symbol")
        if len(set(self.symbols)) != n:
            raise GroupSpecError("symbol names must be pairwise distinct")
        for i, j in enumerate(self.inverse):
            if not 0 <= j < n or self.inverse[j] != i:
                raise GroupSpecError("inverse map is not an involution")
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.symbols)})

    @classmethod
    def from_generators(cls, generators: Sequence[str], involutions: Iterable[str] = ()) -> Alphabet:
        involutions = set(involutions)
        unknown = involutions.difference(generators)
        if unknown:
            raise GroupSpecError(f"involutions name unknown generators: {sorted(unknown)}")
        symbols: list[str] = []
        inverse: list[int] = []
        for g in generators:
            _check_name(g)
            i = len(symbols)
            if g in involutions:
                symbols.append(g)
                inverse.append(i)
            else:
                symbols += [g, g + INVERSE_SUFFIX]
                inverse += [i + 1, i]
        return cls(tuple(symbols), tuple(inverse))

    @classmethod
    def union(cls, alphabets: Sequence[Alphabet]) -> Alphabet:
        symbols: list[str] = []
        inverse: list[int] = []
        for a in alphabets:
            off = len(symbols)
            symbols += a.symbols
            inverse += [off + j for j in a.inverse]
        return cls(tuple(symbols), tuple(inverse))

    @property
    def size(self) -> int:
        return len(self.symbols)

    @property
    def generators(self) -> tuple[str, ...]:
        return tuple(s for s in self.symbols if not s.endswith(INVERSE_SUFFIX))

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownSymbol(name) from None

    def is_self_inverse(self, i: int) -> bool:
        return self.inverse[i] == i


def _check_name(name: str) -> None:
    if not isinstance(name, str) or not name:
        raise GroupSpecError(f"generator name must be a nonempty string, got {name!r}")
    if any(c.isspace() for c in name) or "^" in name or name.endswith(INVERSE_SUFFIX):
        raise GroupSpecError(f"illegal generator name {name!r}")
    if "(" in name or ")" in name or ":" in name:
        raise GroupSpecError(f"illegal generator name {name!r}")


@dataclass(frozen=True)
class Word:
    alphabet: Alphabet
    letters: tuple[int, ...] = ()

    def __post_init__(self):
        n = self.alphabet.size
        if any(not 0 <= i < n for i in self.letters):
            raise UnknownSymbol(f"index out of range in {self.letters!r}")

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return format_word(self)


def parse_word(text: str, alphabet: Alphabet) -> Word:
    letters = []
    for token in text.split():
        if token.endswith(INVERSE_SUFFIX):
            base = token[: -len(INVERSE_SUFFIX)]
            if not base or "^" in base:
                raise MalformedToken(token)
            i = alphabet.index(base)
            letters.append(alphabet.inverse[i])
        elif "^" in token:
            raise MalformedToken(token)
        else:
            letters.append(alphabet.index(token))
    return Word(alphabet, tuple(letters))


def format_word(w: Word) -> str:
    return " ".join(w.alphabet.symbols[i] for i in w.letters)


def reduce_letters(letters: Iterable[int], inverse: Sequence[int]) -> tuple[int, ...]:
    """Free reduction on raw letter indices (single stack pass)."""
    out: list[int] = []
    for i in letters:
        if out and out[-1] == inverse[i]:
            out.pop()
        else:
            out.append(i)
    return tuple(out)


def free_reduce(w: Word) -> Word:
    return Word(w.alphabet, reduce_letters(w.letters, w.alphabet.inverse))


def invert(w: Word) -> Word:
    inv = w.alphabet.inverse
    return Word(w.alphabet, tuple(inv[i] for i in reversed(w.letters)))


def concat_reduce(u: Word, v: Word) -> Word:
    if u.alphabet != v.alphabet:
        raise AlphabetMismatch("words are over different alphabets")
    return Word(u.alphabet, reduce_letters(u.letters + v.letters, u.alphabet.inverse))


def cyclic_reduce(w: Word) -> tuple[Word, Word]:
    """Split a freely reduced word as ``conjugator * core * conjugator^-1``."""
    inv = w.alphabet.inverse
    letters = w.letters
    k = 0
    while 2 * k + 1 < len(letters) and letters[k] == inv[letters[-1 - k]]:
        k += 1
    core = letters[k : len(letters) - k]
    return Word(w.alphabet, core), Word(w.alphabet, letters[:k])
