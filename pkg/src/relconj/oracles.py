"""Parabolic GCP solvers and independent ground-truth checks.

The parabolic solvers feed ``compress_parabolic_components``.  The global
oracles (``bfs_conjugator_search`` and ``free_product_conjugacy_single``) do
not call into the search code of :mod:`relconj.gcp`; they only use the group
backends, so they can cross-check it.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import HandleMismatch, LengthMismatch, ResourceLimit, UnsupportedBackend
from .gcp import ConjugacyInstance
from .groups import (
    DEFAULT_MAX_ELEMENTS,
    AbelianGroup,
    FiniteGroup,
    FreeGroup,
    FreeProduct,
    Group,
    GroupElement,
)
from .relative import relative_normal_form, syllable_payload
from .words import Word, cyclic_reduce


def _common_group(g_list, f_list, group: Optional[Group]) -> Group:
    if len(g_list) != len(f_list):
        raise LengthMismatch("oracle lists differ in length")
    elems = [*g_list, *f_list]
    if group is None:
        if not elems:
            raise ValueError("empty lists need an explicit group")
        group = elems[0].group
    if any(e.group is not group for e in elems):
        raise HandleMismatch("oracle inputs belong to different groups")
    return group


def abelian_gcp(
    g_list: Sequence[GroupElement], f_list: Sequence[GroupElement], group: Optional[Group] = None
) -> Optional[GroupElement]:
    # conjugation is trivial, so the lists are conjugate iff they are equal
    group = _common_group(g_list, f_list, group)
    return group.identity if list(g_list) == list(f_list) else None


def finite_gcp(
    g_list: Sequence[GroupElement], f_list: Sequence[GroupElement], group: Optional[FiniteGroup] = None
) -> Optional[GroupElement]:
    """First ``h`` in BFS-then-shortlex order with ``g_i^h = f_i`` for all i."""
    group = _common_group(g_list, f_list, group)
    if not isinstance(group, FiniteGroup):
        raise UnsupportedBackend("finite_gcp needs a finite table backend")
    g = [e.payload for e in g_list]
    f = [e.payload for e in f_list]
    table, inv = group.table, group.inverse_map
    for h in group.bfs_order:
        hi = inv[h]
        if all(table[table[hi][a]][h] == b for a, b in zip(g, f)):
            return GroupElement(group, h)
    return None


@dataclass(frozen=True)
class ParabolicOracle:
    factor: Group
    kind: str

    def theta_bound(self, mu: int) -> int:
        if self.kind == "finite_bruteforce":
            return self.factor.diameter
        return 0

    def solve(self, g_list, f_list) -> Optional[GroupElement]:
        if self.kind == "finite_bruteforce":
            return finite_gcp(g_list, f_list, self.factor)
        return abelian_gcp(g_list, f_list, self.factor)


def oracle_for(factor: Group) -> ParabolicOracle:
    if isinstance(factor, FiniteGroup):
        return ParabolicOracle(factor, "finite_bruteforce")
    if isinstance(factor, AbelianGroup) or (isinstance(factor, FreeGroup) and factor.rank == 1):
        return ParabolicOracle(factor, "abelian_equality")
    raise UnsupportedBackend(f"no GCP oracle for {factor!r}")


def default_oracles(group: FreeProduct) -> dict[int, ParabolicOracle]:
    """Oracles for every factor that has one (non-abelian free factors have none)."""
    out = {}
    for k, f in enumerate(group.factors):
        try:
            out[k] = oracle_for(f)
        except UnsupportedBackend:
            pass
    return out


# ---------------------------------------------------------------------------
# independent global oracles


def bfs_conjugator_search(
    inst: ConjugacyInstance, max_radius: int, max_elements: int = DEFAULT_MAX_ELEMENTS
) -> Optional[GroupElement]:
    """Exhaustive Cayley-graph BFS; returns the first conjugator found."""
    g = inst.group
    mul, inv = g._mul, g._inv
    pairs = [(a.payload, b.payload) for a, b in zip(inst.a, inst.b)]

    def works(x):
        xi = inv(x)
        return all(mul(mul(xi, a), x) == b for a, b in pairs)

    start = g.identity_payload
    if works(start):
        return GroupElement(g, start)
    seen = {start}
    frontier = [start]
    for _ in range(max_radius):
        nxt = []
        for p in frontier:
            for letter in g._letters:
                q = mul(p, letter)
                if q in seen:
                    continue
                if len(seen) >= max_elements:
                    raise ResourceLimit(max_elements, max_radius)
                seen.add(q)
                if works(q):
                    return GroupElement(g, q)
                nxt.append(q)
        if not nxt:
            break
        frontier = nxt
    return None


def _factor_conjugate(factor: Group, a, b) -> bool:
    if isinstance(factor, AbelianGroup):
        return a == b
    if isinstance(factor, FiniteGroup):
        t, inv = factor.table, factor.inverse_map
        return any(t[t[inv[h]][a]][h] == b for h in range(factor.order))
    if isinstance(factor, FreeGroup):
        return _free_conjugate(factor, a, b)
    raise UnsupportedBackend(f"no single-element conjugacy test for {factor!r}")


def _free_conjugate(group: FreeGroup, a: tuple, b: tuple) -> bool:
    ca = cyclic_reduce(Word(group.alphabet, a))[0].letters
    cb = cyclic_reduce(Word(group.alphabet, b))[0].letters
    if len(ca) != len(cb):
        return False
    return not ca or any(ca[i:] + ca[:i] == cb for i in range(len(ca)))


def _cyclically_reduce_syllables(group: FreeProduct, p: tuple) -> tuple:
    while len(p) >= 2 and p[0][0] == p[-1][0]:
        # conjugating by the last syllable folds it into the first
        last = ((p[-1][0], p[-1][1]),)
        p = group._mul(group._mul(last, p), group._inv(last))
    return p


def free_product_conjugacy_single(a: GroupElement, b: GroupElement) -> bool:
    """Normal-form conjugacy test for single elements of a free product."""
    g = a.group
    if b.group is not g:
        raise HandleMismatch("elements belong to different groups")
    if isinstance(g, FreeGroup):
        return _free_conjugate(g, a.payload, b.payload)
    if not isinstance(g, FreeProduct):
        raise UnsupportedBackend("free_product_conjugacy_single needs a free product")
    ca = _cyclically_reduce_syllables(g, a.payload)
    cb = _cyclically_reduce_syllables(g, b.payload)
    if len(ca) != len(cb):
        return False
    if not ca:
        return True
    if len(ca) == 1:
        (ka, ha), (kb, hb) = ca[0], cb[0]
        return ka == kb and _factor_conjugate(g.factors[ka], ha, hb)
    n = len(ca)
    return any(ca[i:] + ca[:i] == cb for i in range(n))


# ---------------------------------------------------------------------------
# calibration


@dataclass(frozen=True)
class CalibrationReport:
    k: int
    samples: int
    chi_lower_estimate: int
    witness_a: GroupElement
    witness_x: GroupElement
    seed: int = 0
    x_radius: int = 0
    accepted: int = 0

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "samples": self.samples,
            "chi_lower_estimate": self.chi_lower_estimate,
            "witness": {"a": str(self.witness_a), "x": str(self.witness_x)},
            "seed": self.seed,
            "x_radius": self.x_radius,
            "accepted": self.accepted,
        }


def trace_max_length(a: GroupElement, x: GroupElement) -> int:
    """Largest X-length of ``a^{x_j}`` over the prefixes ``x_j`` of the
    relative normal form of ``x``."""
    g = a.group
    cur = a.payload
    best = g._length(cur)
    for syl in relative_normal_form(x).syllables:
        cur = g._conj(cur, syllable_payload(g, syl))
        best = max(best, g._length(cur))
    return best


def calibrate_chi(
    handle: Group,
    k: int,
    samples: int,
    seed: int,
    x_radius: Optional[int] = None,
    max_elements: int = DEFAULT_MAX_ELEMENTS,
) -> CalibrationReport:
    """Empirical lower estimate of the synchronous-vertex constant at ``k``.

    For every level ``l <= k`` and sample index ``i`` a generator seeded by
    ``(seed, l, i)`` draws ``a`` from the X-ball of radius ``l`` and ``x`` from
    the ball of radius ``x_radius``; pairs with ``|a^x|_X > l`` are dropped.
    Taking the maximum over all levels makes the estimate monotone in ``k``.
    """
    if not isinstance(handle, (FreeProduct, FreeGroup)):
        raise UnsupportedBackend("calibration needs a free or free product backend")
    if k < 0 or samples < 0:
        raise ValueError("k and samples must be nonnegative")
    if x_radius is None:
        x_radius = k + 2
    x_ball = [p for layer in handle._ball_layers(x_radius, max_elements) for p in layer]
    best = (0, handle.identity_payload, handle.identity_payload)
    accepted = 0
    for level in range(k + 1):
        a_ball = [p for layer in handle._ball_layers(level, max_elements) for p in layer]
        for i in range(samples):
            rng = random.Random(f"{seed}:{level}:{i}")
            a = rng.choice(a_ball)
            x = rng.choice(x_ball)
            if handle._length(handle._conj(a, x)) > level:
                continue
            accepted += 1
            val = trace_max_length(GroupElement(handle, a), GroupElement(handle, x))
            if val > best[0]:
                best = (val, a, x)
    val, a, x = best
    return CalibrationReport(
        k, samples, val, GroupElement(handle, a), GroupElement(handle, x), seed, x_radius, accepted
    )
