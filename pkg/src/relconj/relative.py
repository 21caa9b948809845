"""Syllable structure of elements over ``X`` together with the parabolic factors.

In a free product each factor element is a single edge of the relative Cayley
graph, so the syllable decomposition of the normal form is a relative
geodesic and its syllable count is the relative length.  Free groups are
handled with trivial parabolics: every letter is its own ``FREE_LETTER``
syllable.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Union

from .errors import FactorMismatch, IndexOutOfRange, UnsupportedBackend
from .groups import FreeGroup, FreeProduct, Group, GroupElement, factor_name


class Marker(enum.Enum):
    FREE_LETTER = "free_letter"
    ALL = "all"

    def __repr__(self) -> str:
        return self.name


FREE_LETTER = Marker.FREE_LETTER
ALL = Marker.ALL


@dataclass(frozen=True)
class Syllable:
    """One edge of a relative geodesic.

    ``factor`` is a 0-based factor index with ``element`` a non-identity
    element of that factor, or FREE_LETTER with ``element`` an alphabet index.
    """

    factor: Union[int, Marker]
    element: Union[GroupElement, int]

    @property
    def is_parabolic(self) -> bool:
        return self.factor is not FREE_LETTER


@dataclass(frozen=True)
class RelativeWord:
    group: Group
    syllables: tuple[Syllable, ...] = ()

    def __len__(self) -> int:
        return len(self.syllables)

    def element(self) -> GroupElement:
        return evaluate(self)

    def __str__(self) -> str:
        return format_relative(self)


def _check_backend(g: Group) -> None:
    if not isinstance(g, (FreeProduct, FreeGroup)):
        raise UnsupportedBackend(f"{g.kind} groups carry no relative structure")


def syllable_payload(group: Group, syl: Syllable):
    """Ambient payload of a single syllable."""
    if syl.factor is FREE_LETTER:
        return group._letters[syl.element]
    h = syl.element
    if h.payload == group.factors[syl.factor].identity_payload:
        return ()
    return ((syl.factor, h.payload),)


def relative_normal_form(e: GroupElement) -> RelativeWord:
    g = e.group
    _check_backend(g)
    if isinstance(g, FreeGroup):
        return RelativeWord(g, tuple(Syllable(FREE_LETTER, i) for i in e.payload))
    factors = g.factors
    return RelativeWord(g, tuple(Syllable(k, GroupElement(factors[k], h)) for k, h in e.payload))


def evaluate(x: RelativeWord) -> GroupElement:
    g = x.group
    p = g.identity_payload
    for syl in x.syllables:
        p = g._mul(p, syllable_payload(g, syl))
    return GroupElement(g, p)


def relative_length(e: GroupElement) -> int:
    _check_backend(e.group)
    return len(e.payload)


def prefix(x: RelativeWord, j: int) -> GroupElement:
    """The element ``x_j`` spelled by the first ``j`` syllables."""
    if not 0 <= j <= len(x.syllables):
        raise IndexOutOfRange(f"prefix length {j} outside 0..{len(x.syllables)}")
    return evaluate(RelativeWord(x.group, x.syllables[:j]))


def parabolic_membership(e: GroupElement) -> Union[int, Marker, None]:
    """Factor index containing ``e``, ALL for the identity, else None."""
    g = e.group
    if not isinstance(g, FreeProduct):
        raise UnsupportedBackend("parabolic membership needs a free product")
    if not e.payload:
        return ALL
    if len(e.payload) == 1:
        return e.payload[0][0]
    return None


def in_factor(e: GroupElement, k: int) -> bool:
    m = parabolic_membership(e)
    return m is ALL or m == k


def factor_part(e: GroupElement, k: int) -> GroupElement:
    """The factor-``k`` element equal to ``e`` (which must lie in factor ``k``)."""
    factor = e.group.factors[k]
    if not e.payload:
        return factor.identity
    if len(e.payload) != 1 or e.payload[0][0] != k:
        raise FactorMismatch(f"element does not lie in factor {factor_name(k)}")
    return GroupElement(factor, e.payload[0][1])


def splice(x: RelativeWord, position: int, replacement: GroupElement) -> RelativeWord:
    """Substitute the parabolic syllable at ``position`` and renormalize."""
    if not 0 <= position < len(x.syllables):
        raise IndexOutOfRange(f"position {position} outside 0..{len(x.syllables) - 1}")
    syl = x.syllables[position]
    if syl.factor is FREE_LETTER:
        raise FactorMismatch("cannot splice a free letter")
    if replacement.group is not x.group.factors[syl.factor]:
        raise FactorMismatch(f"replacement is not an element of factor {factor_name(syl.factor)}")
    g = x.group
    left = evaluate(RelativeWord(g, x.syllables[:position])).payload
    right = evaluate(RelativeWord(g, x.syllables[position + 1 :])).payload
    mid = syllable_payload(g, Syllable(syl.factor, replacement))
    return relative_normal_form(GroupElement(g, g._mul(g._mul(left, mid), right)))


def format_relative(x: RelativeWord) -> str:
    """Render as ``(A: u u) (B: v)``; free letters are bare tokens."""
    g = x.group
    parts = []
    for syl in x.syllables:
        if syl.factor is FREE_LETTER:
            parts.append(g.alphabet.symbols[syl.element])
        else:
            parts.append(f"({factor_name(syl.factor)}: {syl.element})")
    return " ".join(parts)
