"""Generalized conjugacy: bounds, pigeonhole shortening, component compression
and bounded conjugator search.

Given lists ``a`` and ``b`` the question is whether one element ``x`` satisfies
``a_i^x = b_i`` for every ``i``.  Conjugators are manipulated as relative
words; along a relative word ``x = g_1 ... g_l`` the tuple trace records
``(a_1^{x_j}, ..., a_m^{x_j})`` for every prefix ``x_j``.
"""

from __future__ import annotations

import enum
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping, Optional, Protocol, Sequence, Union

from .errors import (
    HandleMismatch,
    InconsistentDuplicates,
    IndexOutOfRange,
    LengthMismatch,
    MissingConstant,
    NotAConjugator,
    OracleFailure,
    ProfileError,
    RelconjError,
    ResourceLimit,
    UnsupportedBackend,
)
from .groups import DEFAULT_MAX_ELEMENTS, FreeProduct, Group, GroupElement, x_length
from .relative import (
    FREE_LETTER,
    RelativeWord,
    factor_part,
    in_factor,
    relative_normal_form,
    splice,
    syllable_payload,
)
from .words import Word, parse_word

# ---------------------------------------------------------------------------
# instances


@dataclass(frozen=True)
class ConjugacyInstance:
    group: Group
    a: tuple[GroupElement, ...]
    b: tuple[GroupElement, ...]
    mu: int
    dropped: tuple[int, ...] = ()

    @property
    def m(self) -> int:
        return len(self.a)


def instance_from_elements(a: Sequence[GroupElement], b: Sequence[GroupElement]) -> ConjugacyInstance:
    """Build an instance, dropping repeated ``a_i`` after checking ``b_i`` agrees."""
    if len(a) != len(b):
        raise LengthMismatch(f"lists have lengths {len(a)} and {len(b)}")
    if not a:
        raise LengthMismatch("lists must be nonempty")
    group = a[0].group
    if any(e.group is not group for e in (*a, *b)):
        raise HandleMismatch("instance elements belong to different groups")
    mu = max(x_length(e) for e in (*a, *b))
    first: dict[Any, int] = {}
    keep_a, keep_b, dropped = [], [], []
    for i, (ai, bi) in enumerate(zip(a, b)):
        j = first.get(ai.payload)
        if j is None:
            first[ai.payload] = i
            keep_a.append(ai)
            keep_b.append(bi)
        elif b[j] != bi:
            raise InconsistentDuplicates(j, i)
        else:
            dropped.append(i)
    return ConjugacyInstance(group, tuple(keep_a), tuple(keep_b), mu, tuple(dropped))


def make_instance(
    handle: Group,
    a_words: Sequence[Union[Word, str]],
    b_words: Sequence[Union[Word, str]],
) -> ConjugacyInstance:
    def elt(w):
        if isinstance(w, str):
            w = parse_word(w, handle.alphabet)
        return handle.element_of(w)

    if len(a_words) != len(b_words):
        raise LengthMismatch(f"lists have lengths {len(a_words)} and {len(b_words)}")
    return instance_from_elements([elt(w) for w in a_words], [elt(w) for w in b_words])


def load_instance(handle: Group, path: Union[str, Path]) -> ConjugacyInstance:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict) or not isinstance(data.get("a"), list) or not isinstance(data.get("b"), list):
        raise ValueError("instance file must hold an object with lists 'a' and 'b'")
    return make_instance(handle, data["a"], data["b"])


def verify_conjugator(inst: ConjugacyInstance, x: GroupElement) -> bool:
    g = inst.group
    if x.group is not g:
        raise HandleMismatch("conjugator belongs to a different group")
    xp = x.payload
    return all(g._conj(ai.payload, xp) == bi.payload for ai, bi in zip(inst.a, inst.b))


# ---------------------------------------------------------------------------
# constants profile


def _lookup(table: Mapping, key, extend: bool, name: str, same_family: Callable = None):
    if key in table:
        return table[key]
    if extend:
        if same_family is None:
            below = [k for k in table if k <= key]
        else:
            below = [k for k in table if same_family(k) and k <= key]
        if below:
            return table[max(below)]
    raise MissingConstant(name, key)


@dataclass(frozen=True)
class ConstantsProfile:
    """Values of chi(k), eta(lambda, c, k) and theta(mu).

    ``certified`` must only be set when the caller vouches that the values are
    genuine upper bounds; calibration never sets it.
    """

    chi: Mapping[int, int] = field(default_factory=dict)
    eta: Mapping[tuple[int, int, int], int] = field(default_factory=dict)
    theta: Mapping[int, int] = field(default_factory=dict)
    certified: bool = False
    monotone_extend: bool = False

    def chi_at(self, k: int) -> int:
        return _lookup(self.chi, k, self.monotone_extend, "chi")

    def eta_at(self, lam: int, c: int, k: int) -> int:
        return _lookup(
            self.eta, (lam, c, k), self.monotone_extend, "eta", lambda key: key[:2] == (lam, c)
        )

    def theta_at(self, mu: int) -> int:
        return _lookup(self.theta, mu, self.monotone_extend, "theta")

    def g_at(self, mu: int) -> int:
        return max(self.theta_at(mu), self.eta_at(1, 0, self.chi_at(mu)))

    def validate(self, force: bool = False) -> None:
        for name, table in (("chi", self.chi), ("theta", self.theta)):
            _check_monotone(name, table)
        families: dict[tuple[int, int], dict[int, int]] = {}
        for (lam, c, k), v in self.eta.items():
            families.setdefault((lam, c), {})[k] = v
        for fam, table in families.items():
            _check_monotone(f"eta{fam}", table)
        values = [*self.chi.values(), *self.eta.values(), *self.theta.values()]
        if any(v < 0 for v in values):
            raise ProfileError("constants must be nonnegative")
        if values and not any(values) and not force:
            raise ProfileError("degenerate profile (every constant is zero); pass force to accept it")

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> ConstantsProfile:
        try:
            chi = {int(k): int(v) for k, v in data.get("chi", {}).items()}
            theta = {int(k): int(v) for k, v in data.get("theta", {}).items()}
            eta = {}
            for k, v in data.get("eta", {}).items():
                parts = tuple(int(p) for p in str(k).split(","))
                if len(parts) != 3:
                    raise ValueError(f"eta key {k!r} must be 'lambda,c,k'")
                eta[parts] = int(v)
        except (AttributeError, ValueError, TypeError) as exc:
            raise ProfileError(f"malformed constants profile: {exc}") from None
        return cls(chi, eta, theta, bool(data.get("certified", False)), bool(data.get("monotone_extend", False)))

    def to_json(self) -> dict[str, Any]:
        return {
            "chi": {str(k): v for k, v in sorted(self.chi.items())},
            "eta": {",".join(map(str, k)): v for k, v in sorted(self.eta.items())},
            "theta": {str(k): v for k, v in sorted(self.theta.items())},
            "certified": self.certified,
            "monotone_extend": self.monotone_extend,
        }


def _check_monotone(name: str, table: Mapping[int, int]) -> None:
    prev = None
    for k in sorted(table):
        if prev is not None and table[k] < prev:
            raise ProfileError(f"{name} must be nondecreasing (fails at {k})")
        prev = table[k]


def load_profile(path: Union[str, Path], force: bool = False) -> ConstantsProfile:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ProfileError("constants file must hold a JSON object")
    profile = ConstantsProfile.from_json(data)
    profile.validate(force=force)
    return profile


# ---------------------------------------------------------------------------
# bounds


def relative_length_bound(mu: int, alphabet_size: int, profile: ConstantsProfile) -> int:
    """``(|X|^chi(mu) + 1) ^ (|X|^mu + 1)``, exactly."""
    if alphabet_size < 1 or mu < 0:
        raise ValueError("need alphabet_size >= 1 and mu >= 0")
    chi = profile.chi_at(mu)
    return (alphabet_size**chi + 1) ** (alphabet_size**mu + 1)


def theorem4_bound(mu: int, alphabet_size: int, profile: ConstantsProfile) -> int:
    """X-length radius that must contain a conjugator of conjugate lists."""
    return relative_length_bound(mu, alphabet_size, profile) * profile.g_at(mu)


def exact_decimal(n: int) -> str:
    """Decimal text of ``n`` regardless of the interpreter's digit limit."""
    getter = getattr(sys, "get_int_max_str_digits", None)
    if getter is None:
        return str(n)
    old = getter()
    sys.set_int_max_str_digits(0)
    try:
        return str(n)
    finally:
        sys.set_int_max_str_digits(old)


# ---------------------------------------------------------------------------
# tuple traces and shortening


@dataclass(frozen=True)
class TupleTrace:
    entries: tuple[tuple[GroupElement, ...], ...]

    def __len__(self) -> int:
        return len(self.entries)

    def first_repeat(self) -> Optional[tuple[int, int]]:
        """Least ``s`` whose tuple recurs, paired with its next occurrence ``t``."""
        seen: dict[tuple, int] = {}
        best: Optional[tuple[int, int]] = None
        for t, entry in enumerate(self.entries):
            key = tuple(e.payload for e in entry)
            s = seen.get(key)
            if s is None:
                seen[key] = t
            elif best is None or s < best[0]:
                best = (s, t)
        return best

    def distinct_count(self) -> int:
        return len({tuple(e.payload for e in entry) for entry in self.entries})


def _syllable_payloads(x: RelativeWord) -> list:
    g = x.group
    return [syllable_payload(g, syl) for syl in x.syllables]


def tuple_trace(x: RelativeWord, inst: ConjugacyInstance) -> TupleTrace:
    g = inst.group
    if x.group is not g:
        raise HandleMismatch("relative word and instance live in different groups")
    cur = tuple(ai.payload for ai in inst.a)
    rows = [cur]
    for sp in _syllable_payloads(x):
        cur = tuple(g._conj(p, sp) for p in cur)
        rows.append(cur)
    return TupleTrace(tuple(tuple(GroupElement(g, p) for p in row) for row in rows))


def _require_conjugator(x: RelativeWord, inst: ConjugacyInstance) -> None:
    if not verify_conjugator(inst, x.element()):
        raise NotAConjugator(f"{x} does not conjugate a to b")


def _shorten_once(x: RelativeWord, inst: ConjugacyInstance) -> Optional[tuple[int, int, RelativeWord]]:
    trace = tuple_trace(x, inst)
    rep = trace.first_repeat()
    if rep is None:
        return None
    s, t = rep
    g = x.group
    syl = _syllable_payloads(x)
    p = g.identity_payload
    # x_s x_t^-1 x = (g_1 .. g_s)(g_{t+1} .. g_l)
    for sp in syl[:s] + syl[t:]:
        p = g._mul(p, sp)
    return s, t, relative_normal_form(GroupElement(g, p))


def pigeonhole_shorten(x: RelativeWord, inst: ConjugacyInstance) -> Optional[RelativeWord]:
    """Cut out the loop between the first repeated pair of trace tuples."""
    _require_conjugator(x, inst)
    step = _shorten_once(x, inst)
    return None if step is None else step[2]


@dataclass(frozen=True)
class ShortenStep:
    s: int
    t: int
    before: int
    after: int


def shortening_steps(x: RelativeWord, inst: ConjugacyInstance) -> tuple[RelativeWord, list[ShortenStep]]:
    _require_conjugator(x, inst)
    steps = []
    while True:
        step = _shorten_once(x, inst)
        if step is None:
            break
        s, t, y = step
        steps.append(ShortenStep(s, t, len(x), len(y)))
        x = y
    _require_conjugator(x, inst)
    return x, steps


def shorten_to_fixpoint(x: RelativeWord, inst: ConjugacyInstance) -> RelativeWord:
    return shortening_steps(x, inst)[0]


# ---------------------------------------------------------------------------
# parabolic component compression


class ParabolicSolver(Protocol):
    kind: str

    def theta_bound(self, mu: int) -> int: ...

    def solve(self, g_list: Sequence[GroupElement], f_list: Sequence[GroupElement]) -> Optional[GroupElement]: ...


def connectors(
    x: RelativeWord, inst: ConjugacyInstance, position: int
) -> tuple[tuple[GroupElement, ...], tuple[GroupElement, ...]]:
    """Conjugates of the ``a_i`` by the prefixes ending just before and just
    after the syllable at ``position``."""
    if not 0 <= position < len(x.syllables):
        raise IndexOutOfRange(f"position {position} outside 0..{len(x.syllables) - 1}")
    g = inst.group
    pre = g.identity_payload
    syl = _syllable_payloads(x)
    for sp in syl[:position]:
        pre = g._mul(pre, sp)
    post = g._mul(pre, syl[position])
    gs = tuple(GroupElement(g, g._conj(ai.payload, pre)) for ai in inst.a)
    fs = tuple(GroupElement(g, g._conj(ai.payload, post)) for ai in inst.a)
    return gs, fs


@dataclass(frozen=True)
class CompressionRecord:
    position: int
    factor: Any
    case: str  # "case1", "case2" or "free_letter"
    original: Optional[GroupElement] = None
    witness: Optional[GroupElement] = None
    connector_mu: Optional[int] = None
    theta_bound: Optional[int] = None
    profile_theta: Optional[int] = None
    deleted: bool = False


def compress_with_report(
    x: RelativeWord,
    inst: ConjugacyInstance,
    oracles: Optional[Mapping[int, ParabolicSolver]] = None,
    profile: Optional[ConstantsProfile] = None,
) -> tuple[RelativeWord, list[CompressionRecord]]:
    """Replace every parabolic syllable whose connectors all lie in its factor
    by the factor oracle's witness; see ``compress_parabolic_components``."""
    _require_conjugator(x, inst)
    if oracles is None:
        from .oracles import default_oracles

        oracles = default_oracles(inst.group) if isinstance(inst.group, FreeProduct) else {}
    records: list[CompressionRecord] = []
    pos = 0
    while pos < len(x.syllables):
        syl = x.syllables[pos]
        if syl.factor is FREE_LETTER:
            records.append(CompressionRecord(pos, "free_letter", "free_letter"))
            pos += 1
            continue
        k = syl.factor
        gs, fs = connectors(x, inst, pos)
        if not all(in_factor(e, k) for e in (*gs, *fs)):
            records.append(CompressionRecord(pos, k, "case1", original=syl.element))
            pos += 1
            continue
        oracle = oracles.get(k)
        if oracle is None:
            raise UnsupportedBackend(f"no GCP oracle for parabolic factor {k}")
        g_loc = [factor_part(e, k) for e in gs]
        f_loc = [factor_part(e, k) for e in fs]
        witness = oracle.solve(g_loc, f_loc)
        if witness is None:
            raise OracleFailure(f"oracle rejected connector lists at syllable {pos} although {syl.element} conjugates them")
        mu_c = max((x_length(e) for e in (*gs, *fs)), default=0)
        bound = oracle.theta_bound(mu_c)
        if x_length(witness) > bound:
            raise OracleFailure(f"oracle witness {witness} exceeds its theta bound {bound}")
        profile_theta = None
        if profile is not None:
            try:
                profile_theta = profile.theta_at(mu_c)
            except MissingConstant:
                pass
        deleted = witness.is_identity()
        records.append(
            CompressionRecord(pos, k, "case2", syl.element, witness, mu_c, bound, profile_theta, deleted)
        )
        before = len(x.syllables)
        x = splice(x, pos, witness)
        if len(x.syllables) < before:
            # a deletion may merge the neighbours; revisit the merged syllable
            pos = max(pos - 1, 0)
        else:
            pos += 1
    _require_conjugator(x, inst)
    return x, records


def compress_parabolic_components(
    x: RelativeWord,
    inst: ConjugacyInstance,
    oracles: Optional[Mapping[int, ParabolicSolver]] = None,
    profile: Optional[ConstantsProfile] = None,
) -> RelativeWord:
    """Swap each fully connected parabolic syllable for a short oracle witness.

    A syllable qualifies when every connector (the conjugates of the ``a_i``
    by the prefixes on either side of it) lies in the syllable's factor.  The
    syllable element conjugates the left connectors onto the right ones, so
    the oracle must find some witness; substituting it keeps ``x`` a
    conjugator and never increases the relative length.
    """
    return compress_with_report(x, inst, oracles, profile)[0]


# ---------------------------------------------------------------------------
# bounded search


class Status(str, enum.Enum):
    CONJUGATE = "conjugate"
    NOT_CONJUGATE = "not_conjugate"
    INCONCLUSIVE = "inconclusive"


@dataclass
class SearchStats:
    elements_enumerated: int = 0
    candidates_checked: int = 0
    wall_time: float = 0.0
    radius_reached: int = 0

    def absorb(self, other: SearchStats) -> None:
        self.elements_enumerated += other.elements_enumerated
        self.candidates_checked += other.candidates_checked
        self.wall_time += other.wall_time
        self.radius_reached = other.radius_reached


@dataclass
class Decision:
    status: Status
    witness: Optional[GroupElement] = None
    radius: Optional[int] = None
    stats: SearchStats = field(default_factory=SearchStats)
    reason: Optional[str] = None

    @property
    def is_conjugate(self) -> bool:
        return self.status is Status.CONJUGATE


@dataclass(frozen=True)
class SearchConfig:
    mode: str = "heuristic"
    max_radius: int = 8
    max_elements: int = DEFAULT_MAX_ELEMENTS
    workers: int = 1


def _first_hit(group: Group, a: tuple, b: tuple, chunk: Sequence) -> Optional[int]:
    conj = group._conj
    for idx, x in enumerate(chunk):
        for ai, bi in zip(a, b):
            if conj(ai, x) != bi:
                break
        else:
            return idx
    return None


def _first_hit_task(args):
    return _first_hit(*args)


def _conjugate_decision(inst: ConjugacyInstance, x: GroupElement, stats: SearchStats, radius: int) -> Decision:
    if not verify_conjugator(inst, x):
        raise RelconjError(f"internal error: search produced a non-conjugator {x}")
    return Decision(Status.CONJUGATE, x, radius, stats)


def solve_bounded(
    inst: ConjugacyInstance,
    radius: int,
    config: Optional[SearchConfig] = None,
    certified: bool = False,
) -> Decision:
    """Check every element of the X-ball of ``radius`` in enumeration order.

    The first verifying element is returned, which is the shortlex-least
    conjugator of minimal X-length.  Exhaustion yields NotConjugate only when
    ``certified`` is set; hitting the element cap yields Inconclusive.
    """
    config = config or SearchConfig()
    g = inst.group
    a = tuple(e.payload for e in inst.a)
    b = tuple(e.payload for e in inst.b)
    stats = SearchStats()
    t0 = time.perf_counter()
    pool = ProcessPoolExecutor(max_workers=config.workers) if config.workers > 1 else None
    try:
        r = 0
        while r <= radius:
            try:
                layers = g._ball_layers(r, config.max_elements)
            except ResourceLimit as exc:
                stats.wall_time = time.perf_counter() - t0
                return Decision(Status.INCONCLUSIVE, None, stats.radius_reached, stats, reason=str(exc))
            if len(layers) <= r:
                break  # the whole (finite) group has been searched
            layer = layers[r]
            stats.elements_enumerated += len(layer)
            stats.radius_reached = r
            hit = _search_layer(g, a, b, layer, pool, config.workers)
            if hit is not None:
                stats.candidates_checked += hit + 1
                stats.wall_time = time.perf_counter() - t0
                return _conjugate_decision(inst, GroupElement(g, layer[hit]), stats, r)
            stats.candidates_checked += len(layer)
            r += 1
    finally:
        if pool is not None:
            pool.shutdown()
    stats.radius_reached = radius if r > radius else stats.radius_reached
    stats.wall_time = time.perf_counter() - t0
    status = Status.NOT_CONJUGATE if certified else Status.INCONCLUSIVE
    return Decision(status, None, radius, stats)


def _search_layer(g, a, b, layer, pool, workers) -> Optional[int]:
    if pool is None or len(layer) < 64:
        return _first_hit(g, a, b, layer)
    size = -(-len(layer) // (4 * workers))
    starts = range(0, len(layer), size)
    tasks = [(g, a, b, layer[s : s + size]) for s in starts]
    # map preserves chunk order, so the earliest hit wins as in the serial scan
    for s, hit in zip(starts, pool.map(_first_hit_task, tasks)):
        if hit is not None:
            return s + hit
    return None


def radius_schedule(limit: int) -> list[int]:
    radii, r = [0], 1
    while r < limit:
        radii.append(r)
        r *= 2
    if limit > 0:
        radii.append(limit)
    return radii


def solve(
    inst: ConjugacyInstance,
    profile: Optional[ConstantsProfile] = None,
    config: Optional[SearchConfig] = None,
) -> Decision:
    """Decide conjugacy of the instance lists.

    Certified mode searches the whole radius R = L * g of the profile and may
    conclude NotConjugate.  Heuristic mode deepens through radii 0, 1, 2, 4, ...
    up to ``min(R, max_radius)`` and reports Inconclusive when nothing is found.
    """
    config = config or SearchConfig()
    bound = None
    if profile is not None:
        bound = theorem4_bound(inst.mu, inst.group.alphabet.size, profile)
    if config.mode == "certified":
        if profile is None:
            raise MissingConstant("profile", "certified mode")
        if not profile.certified:
            raise ProfileError("certified mode requires a profile marked certified")
        return solve_bounded(inst, bound, config, certified=True)
    if config.mode != "heuristic":
        raise ValueError(f"unknown mode {config.mode!r}")
    limit = config.max_radius if bound is None else min(bound, config.max_radius)
    total = SearchStats()
    for r in radius_schedule(limit):
        d = solve_bounded(inst, r, config)
        total.absorb(d.stats)
        if d.status is Status.CONJUGATE:
            return _conjugate_decision(inst, d.witness, total, r)
        if d.reason is not None:
            return Decision(Status.INCONCLUSIVE, None, total.radius_reached, total, d.reason)
    return Decision(Status.INCONCLUSIVE, None, limit, total)
