"""
Stage-indexed distributions on S and semimeasures on Ω.

A computably enumerable object is modelled as a finite replay: every string
carries a sparse history of (stage, value) pairs and its value at stage s is
the last value listed at or before s (0 before the first entry, frozen after
S_max). Values are exact rationals; fixture values are dyadic, mixtures are
not in general.
"""

import logging
from bisect import bisect_right
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import (Dict, FrozenSet, Iterable, List, Mapping, Optional,
                    Sequence, Tuple, Union)

from .cantor import (BitString, Dyadic, Rational, ceil_to_grid, format_value,
                     length_lex_key, parse_bits, prefixes)
from .errors import DomainError

logger = logging.getLogger(__name__)

Snapshot = Dict[BitString, Fraction]


class Unbounded(Enum):
    """Sentinels standing in for infinite integer results."""

    INFINITE = "infinite"
    MINUS_INFINITE = "-infinite"

    def __str__(self) -> str:
        return self.value


def _exact(value: Rational) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Dyadic(value)
    raise DomainError(f"inexact value {value!r}; only ints and Fractions are allowed")


class StagedValuation:
    """Finite-support valuation replayed over stages 0..S_max."""

    kind = "valuation"

    def __init__(self, histories: Mapping[BitString, Iterable[Tuple[int, Rational]]],
                 s_max: Optional[int] = None, member_id: str = "") -> None:
        self.member_id = member_id
        self._stages: Dict[BitString, List[int]] = {}
        self._values: Dict[BitString, List[Fraction]] = {}
        last_stage = 0
        for x, history in histories.items():
            parse_bits(x)
            stages: List[int] = []
            values: List[Fraction] = []
            for stage, value in history:
                stage = int(stage)
                if stage < 0:
                    raise DomainError(f"negative stage {stage} for {x!r}")
                if stages and stage <= stages[-1]:
                    raise DomainError(f"stages for {x!r} must be strictly increasing")
                stages.append(stage)
                values.append(_exact(value))
            self._stages[x] = stages
            self._values[x] = values
            if stages:
                last_stage = max(last_stage, stages[-1])
        if s_max is None:
            s_max = last_stage
        if s_max < last_stage:
            raise DomainError(f"S_max {s_max} is below the last listed stage {last_stage}")
        self.s_max = s_max

    @property
    def support(self) -> FrozenSet[BitString]:
        return frozenset(self._stages)

    def ordered_support(self) -> List[BitString]:
        return sorted(self._stages, key=length_lex_key)

    def history(self, x: BitString) -> Tuple[Tuple[int, Fraction], ...]:
        return tuple(zip(self._stages.get(x, ()), self._values.get(x, ())))

    def value(self, x: BitString, s: int) -> Fraction:
        stages = self._stages.get(x)
        if not stages:
            return Dyadic(0)
        i = bisect_right(stages, s)
        return self._values[x][i - 1] if i else Dyadic(0)

    def snapshot(self, s: int) -> Snapshot:
        return {x: self.value(x, s) for x in self.ordered_support()}

    def positive_support(self, s: int) -> FrozenSet[BitString]:
        return frozenset(x for x in self._stages if self.value(x, s) > 0)

    def event_stages(self) -> List[int]:
        """Stage 0 plus every stage at which some value is listed."""
        events = {0}
        for stages in self._stages.values():
            events.update(stages)
        return sorted(events)

    def max_length(self) -> int:
        return max((len(x) for x in self._stages), default=0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StagedValuation):
            return NotImplemented
        return (self.kind == other.kind and self.s_max == other.s_max
                and self._stages == other._stages and self._values == other._values)

    def __repr__(self) -> str:
        return (f"{type(self).__name__}(id={self.member_id!r}, "
                f"support={len(self._stages)}, s_max={self.s_max})")

    @classmethod
    def from_snapshots(cls, snapshots: Sequence[Mapping[BitString, Rational]],
                       member_id: str = "") -> "StagedValuation":
        """Compress one snapshot per stage (index = stage) into histories."""
        histories: Dict[BitString, List[Tuple[int, Rational]]] = {}
        last: Dict[BitString, Rational] = {}
        for stage, snap in enumerate(snapshots):
            for x in sorted(snap, key=length_lex_key):
                value = snap[x]
                history = histories.setdefault(x, [])
                if value != last.get(x, 0):
                    history.append((stage, value))
                    last[x] = value
        return cls(histories, s_max=max(len(snapshots) - 1, 0), member_id=member_id)


class StagedDistribution(StagedValuation):
    """m on S: nonnegative, stage-monotone, total mass at most 1."""

    kind = "distribution"


class StagedSemimeasure(StagedValuation):
    """P on Ω: superadditive, P(ε) ≤ 1, stage-monotone; support prefix-closed."""

    kind = "semimeasure"

    def __init__(self, histories: Mapping[BitString, Iterable[Tuple[int, Rational]]],
                 s_max: Optional[int] = None, member_id: str = "") -> None:
        closed: Dict[BitString, Iterable[Tuple[int, Rational]]] = dict(histories)
        for x in list(histories):
            for p in prefixes(x):
                closed.setdefault(p, ())
        super().__init__(closed, s_max=s_max, member_id=member_id)


Staged = Union[StagedDistribution, StagedSemimeasure]


@dataclass(frozen=True)
class Violation:
    stage: int
    x: Optional[BitString]
    kind: str
    detail: str

    def __str__(self) -> str:
        where = "" if self.x is None else f", x={self.x!r}"
        return f"{self.kind} violation at stage {self.stage}{where}: {self.detail}"


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    violation: Optional[Violation] = None

    def __bool__(self) -> bool:
        return self.valid

    def __str__(self) -> str:
        return "valid" if self.valid else str(self.violation)


def _fail(stage: int, x: Optional[BitString], kind: str, detail: str) -> ValidationReport:
    return ValidationReport(False, Violation(stage, x, kind, detail))


def _check_stages(obj: StagedValuation, superadditive: bool) -> ValidationReport:
    previous: Optional[Snapshot] = None
    for s in obj.event_stages():
        snap = obj.snapshot(s)
        for x, v in snap.items():
            if v < 0:
                return _fail(s, x, "negative", f"value {format_value(v)} is negative")
            if previous is not None and v < previous[x]:
                return _fail(s, x, "monotonicity",
                             f"value {format_value(v)} drops below {format_value(previous[x])}")
        if superadditive:
            for x, v in snap.items():
                children = snap.get(x + "0", 0) + snap.get(x + "1", 0)
                if v < children:
                    return _fail(s, x, "superadditivity",
                                 f"{format_value(v)} < children sum {format_value(children)}")
            if snap.get("", 0) > 1:
                return _fail(s, "", "mass", f"P(ε) = {format_value(snap[''])} exceeds 1")
        else:
            total = sum(snap.values(), Fraction(0))
            if total > 1:
                return _fail(s, None, "mass", f"total mass {format_value(total)} exceeds 1")
        previous = snap
    return ValidationReport(True)


def validate_semimeasure(P: StagedSemimeasure) -> ValidationReport:
    """Superadditivity, P(ε) ≤ 1 and stage monotonicity at every stage."""
    return _check_stages(P, superadditive=True)


def validate_distribution(m: StagedDistribution) -> ValidationReport:
    """Mass bound and stage monotonicity at every stage."""
    return _check_stages(m, superadditive=False)


def validate(obj: Staged) -> ValidationReport:
    if isinstance(obj, StagedSemimeasure):
        return validate_semimeasure(obj)
    return validate_distribution(obj)


def mixture_weight(i: int) -> Fraction:
    """w_i = 1/(i²+i), indexed from 1."""
    if i < 1:
        raise DomainError(f"mixture weights are indexed from 1, got {i}")
    return Fraction(1, i * i + i)


def weight_partial_sum(n: int) -> Fraction:
    return sum((mixture_weight(i) for i in range(1, n + 1)), Fraction(0))


def mixture(family: Sequence[Staged]) -> Staged:
    """Σ_i g_i / (i²+i) over an ordered family of one kind."""
    if not family:
        raise DomainError("empty family")
    kinds = {member.kind for member in family}
    if len(kinds) > 1:
        raise DomainError(f"family mixes kinds: {sorted(kinds)}")
    for member in family:
        report = validate(member)
        if not report:
            raise DomainError(f"family member {member.member_id!r} is invalid: {report}")

    support = set()
    events = set()
    for member in family:
        support.update(member.support)
        events.update(member.event_stages())

    histories: Dict[BitString, List[Tuple[int, Fraction]]] = {}
    for x in sorted(support, key=length_lex_key):
        points: List[Tuple[int, Fraction]] = []
        last = Fraction(0)
        for s in sorted(events):
            v = sum((mixture_weight(i) * member.value(x, s)
                     for i, member in enumerate(family, 1)), Fraction(0))
            if v != last:
                points.append((s, v))
                last = v
        histories[x] = points
    s_max = max(member.s_max for member in family)
    logger.debug(f"mixed {len(family)} {family[0].kind} member(s) "
                 f"over {len(support)} strings")
    return type(family[0])(histories, s_max=s_max, member_id="mixture")


def dominance_constant(g: Staged, f: Staged, s: int) -> int:
    """Smallest power of two c with g(x,s) ≤ c·f(x,s) on the support of g."""
    c = 1
    for x in g.ordered_support():
        gv = g.value(x, s)
        if gv == 0:
            continue
        fv = f.value(x, s)
        if fv == 0:
            raise DomainError(f"not dominated on finite support: f({x!r}) = 0 < g({x!r})")
        while gv > c * fv:
            c *= 2
    return c


def norm_exponent(v: Rational) -> int:
    """‖v‖ = ⌈log₂ v⌉ − 1, exact."""
    v = Fraction(v)
    if v <= 0:
        raise DomainError("norm undefined at zero")
    e = v.numerator.bit_length() - v.denominator.bit_length()
    while Fraction(2) ** e < v:
        e += 1
    while Fraction(2) ** (e - 1) >= v:
        e -= 1
    return e - 1


def complexity(m: StagedDistribution, x: BitString, s: int) -> Union[int, Unbounded]:
    """K_s(x) = −‖m(x,s)‖, or INFINITE where m(x,s) = 0."""
    v = m.value(x, s)
    if v == 0:
        return Unbounded.INFINITE
    return -norm_exponent(v)


def tail_sum(m: StagedDistribution, x: BitString, s: int) -> Fraction:
    """Σ m(xy, s) over proper extensions xy in the support."""
    return sum((m.value(y, s) for y in m.support if y != x and y.startswith(x)),
               Dyadic(0))


def _tail_sums(m: StagedDistribution, s: int) -> Dict[BitString, Fraction]:
    tails: Dict[BitString, Fraction] = defaultdict(lambda: Dyadic(0))
    for y in m.support:
        v = m.value(y, s)
        if v:
            for i in range(len(y)):
                tails[y[:i]] += v
    return tails


def round_up_domain(m: StagedDistribution, s: int) -> List[BitString]:
    """Prefix closure of the strings with positive mass at stage s."""
    domain = set()
    for x in m.positive_support(s):
        domain.update(prefixes(x))
    return sorted(domain, key=length_lex_key)


def round_up_monotone(M: StagedSemimeasure, m: StagedDistribution, s: int) -> Dict[BitString, Dyadic]:
    """Snapshot M′ at stage s with short dyadic values.

    M₁(x) = (M(x,s) + tail_sum(m,x,s)) / 2 is rounded up to a multiple of
    2^-(K_s(x)+1). The round-up increment is below m(x,s)/2, which the tail
    added to the parent absorbs, so M′ stays superadditive and M′(ε) ≤ 1.
    """
    tails = _tail_sums(m, s)
    result: Dict[BitString, Dyadic] = {}
    domain = round_up_domain(m, s)
    for x in domain:
        k = complexity(m, x, s)
        if k is Unbounded.INFINITE:
            raise DomainError(f"complexity undefined, cannot set grid: m({x!r}, {s}) = 0")
        halved = (M.value(x, s) + tails.get(x, Dyadic(0))) / 2
        result[x] = ceil_to_grid(halved, k + 1)
    dropped = [x for x in M.support if x not in result and M.value(x, s) > 0]
    if dropped:
        logger.debug(f"stage {s}: {len(dropped)} M-supported string(s) "
                     "outside the m cone ignored")
    return result


def replay_round_up(M: StagedSemimeasure, m: StagedDistribution) -> StagedSemimeasure:
    """Run round_up_monotone at every stage and stack the snapshots."""
    s_total = max(M.s_max, m.s_max)
    events = set(M.event_stages()) | set(m.event_stages())
    snapshots: List[Dict[BitString, Dyadic]] = []
    current: Dict[BitString, Dyadic] = {}
    for s in range(s_total + 1):
        if s in events:
            current = round_up_monotone(M, m, s)
        snapshots.append(current)
    replayed = StagedSemimeasure.from_snapshots(snapshots, member_id="round-up")
    assert isinstance(replayed, StagedSemimeasure)
    return replayed
