"""
t-closed partial continuous transforms realized as interval allocations.

A staged semimeasure P is generated from the uniform measure by assigning to
every string x a clopen set B(x, s) of inputs with λ(B(x, s)) = P(x, s).
Children are carved from their parent's set, siblings never overlap, and
allocated inputs are never taken back at a later stage. Since B(x, s) is a
union of cylinders no deeper than t_level(|x|), whether an input maps into
xΩ depends only on its first t_level(|x|) bits.
"""

import logging
from bisect import bisect_right
from dataclasses import dataclass
from typing import (Any, Dict, Iterable, Iterator, List, Mapping, Sequence,
                    Tuple, Union)

from .cantor import (EMPTY, OMEGA, BitString, ClopenSet, Dyadic, as_dyadic,
                     complement, is_dyadic, length_lex_key, measure,
                     parse_bits, prefixes)
from .errors import DomainError, InvariantViolation
from .semimeasure import StagedSemimeasure, validate_semimeasure

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LevelBound:
    """Per-length depth bound t_level(n), nondecreasing in n.

    Lengths past the last listed level reuse the last value.
    """

    levels: Tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.levels:
            raise DomainError("t_level needs at least one level")
        for n, t in enumerate(self.levels):
            if int(t) != t or t < 1:
                raise DomainError(f"t_level({n}) = {t} is not a positive integer")
            if n and t < self.levels[n - 1]:
                raise DomainError(f"t_level decreases at length {n}")

    def at(self, n: int) -> int:
        return self.levels[min(n, len(self.levels) - 1)]

    __call__ = at

    def of_strings(self, strings: Iterable[BitString]) -> int:
        """t(ŝ): the largest level bound over the strings of ŝ (0 for ∅)."""
        return max((self.at(len(x)) for x in strings), default=0)

    def to_list(self) -> List[int]:
        return list(self.levels)

    @classmethod
    def from_raw(cls, raw: Sequence[int]) -> "LevelBound":
        """Running maximum of ``raw``, so the result is nondecreasing."""
        levels: List[int] = []
        for t in raw:
            levels.append(max(t, levels[-1]) if levels else t)
        return cls(tuple(levels))

    @classmethod
    def fitting(cls, P: StagedSemimeasure) -> "LevelBound":
        """Smallest bound under which every value has fewer than t bits."""
        raw = [1] * (P.max_length() + 1)
        for x in P.support:
            for _, value in P.history(x):
                if not is_dyadic(value):
                    raise DomainError(f"P({x!r}) = {value} is not dyadic")
                raw[len(x)] = max(raw[len(x)], as_dyadic(value).bit_length() + 1)
        return cls.from_raw(raw)


def check_bit_budget(P: StagedSemimeasure, bound: LevelBound) -> None:
    """Every P(x,s) must be a multiple of 2^-t_level(|x|) for exact carving."""
    for x in P.ordered_support():
        t = bound.at(len(x))
        for stage, value in P.history(x):
            if not is_dyadic(value):
                raise DomainError(f"P({x!r}, {stage}) = {value} is not dyadic")
            if as_dyadic(value).exponent > t:
                raise DomainError(
                    f"P({x!r}, {stage}) = {as_dyadic(value)} does not fit "
                    f"t_level({len(x)}) = {t}")


def within_strict_budget(P: StagedSemimeasure, bound: LevelBound) -> bool:
    """True iff every value has bit length < t_level(|x|)."""
    return all(is_dyadic(value) and as_dyadic(value).bit_length() < bound.at(len(x))
               for x in P.support for _, value in P.history(x))


class Allocation:
    """Stage-indexed map x ↦ B(x, s) over a prefix-closed domain."""

    def __init__(self, bound: LevelBound, s_max: int,
                 histories: Mapping[BitString, Sequence[Tuple[int, ClopenSet]]]) -> None:
        self.bound = bound
        self.s_max = s_max
        self._domain = tuple(sorted(histories, key=length_lex_key))
        self._stages = {x: [s for s, _ in histories[x]] for x in self._domain}
        self._sets = {x: [b for _, b in histories[x]] for x in self._domain}

    @property
    def domain(self) -> Tuple[BitString, ...]:
        return self._domain

    def __contains__(self, x: object) -> bool:
        return x in self._stages

    def allocated(self, x: BitString, s: int) -> ClopenSet:
        """B(x, s)."""
        if x not in self._stages:
            raise DomainError(f"{x!r} is outside the allocation domain")
        i = bisect_right(self._stages[x], s)
        return self._sets[x][i - 1] if i else EMPTY

    def stage_history(self, x: BitString) -> List[int]:
        """Stages at which B(x) grew."""
        if x not in self._stages:
            raise DomainError(f"{x!r} is outside the allocation domain")
        return list(self._stages[x])

    def export(self, s: int) -> Dict[str, Any]:
        return {
            "t_level": self.bound.to_list(),
            "stages": self.s_max,
            "stage": s,
            "entries": [{"x": x, "B": self.allocated(x, s).to_list()}
                        for x in self._domain],
        }

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Allocation):
            return NotImplemented
        return (self.bound == other.bound and self.s_max == other.s_max
                and self._stages == other._stages and self._sets == other._sets)

    def __repr__(self) -> str:
        return f"Allocation(domain={len(self._domain)}, s_max={self.s_max})"


def carve_leftmost(free: ClopenSet, amount: Dyadic, t: int) -> ClopenSet:
    """Leftmost part of ``free`` of measure ``amount`` at granularity 2^-t."""
    if amount.exponent > t:
        raise InvariantViolation(f"carve amount {amount} is finer than depth {t}")
    remaining = amount
    taken: List[BitString] = []
    for y in free.cylinders:
        if remaining == 0:
            break
        size = Dyadic(1, 1 << len(y))
        if size <= remaining:
            taken.append(y)
            remaining -= size
            continue
        # split y into its leftmost dyadic pieces down to depth t
        path = y
        for j in range(len(y) + 1, t + 1):
            piece = Dyadic(1, 1 << j)
            if piece <= remaining:
                taken.append(path + "0")
                remaining -= piece
                path += "1"
            else:
                path += "0"
            if remaining == 0:
                break
        break
    if remaining:
        raise InvariantViolation(f"insufficient free space: {remaining} left uncarved")
    return ClopenSet(taken)


def build_allocation(P: StagedSemimeasure, bound: LevelBound) -> Allocation:
    """Interval allocation generating P from λ.

    Stages are replayed in order and, within a stage, strings in length-lex
    order. Each string takes the leftmost free part of its parent's set not
    held by its sibling.
    """
    report = validate_semimeasure(P)
    if not report:
        raise DomainError(f"not a valid semimeasure: {report}")
    check_bit_budget(P, bound)

    domain = P.ordered_support()
    current: Dict[BitString, ClopenSet] = {x: EMPTY for x in domain}
    histories: Dict[BitString, List[Tuple[int, ClopenSet]]] = {x: [] for x in domain}
    for s in P.event_stages():
        grown = 0
        for x in domain:
            held = current[x]
            target = as_dyadic(P.value(x, s))
            held_measure = measure(held)
            if target == held_measure:
                continue
            if target < held_measure:
                raise InvariantViolation(f"B({x!r}) would shrink at stage {s}")
            if x:
                sibling = current.get(x[:-1] + ("1" if x[-1] == "0" else "0"), EMPTY)
                free = current[x[:-1]] - sibling - held
            else:
                free = OMEGA - held
            carved = carve_leftmost(free, target - held_measure, bound.at(len(x)))
            current[x] = held | carved
            histories[x].append((s, current[x]))
            grown += 1
        logger.debug(f"stage {s}: {grown} allocation(s) grew")
    return Allocation(bound, P.s_max, histories)


def preimage_cylinder(A: Allocation, x: BitString, s: int) -> ClopenSet:
    """{α : A(α) ⊆ xΩ} at stage s, which is B(x, s)."""
    return A.allocated(parse_bits(x), s)


def preimage_clopen(A: Allocation, s_set: Union[ClopenSet, Iterable[BitString]],
                    s: int) -> ClopenSet:
    """Union of B(x, s) over the generator strings ŝ.

    A ClopenSet contributes its canonical cylinders; a plain list of strings
    is taken as given.
    """
    strings = s_set.cylinders if isinstance(s_set, ClopenSet) else [parse_bits(x) for x in s_set]
    result = EMPTY
    for x in strings:
        result = result | A.allocated(x, s)
    return result


def apply(A: Allocation, alpha_prefix: BitString, s: int) -> BitString:
    """Longest x in the domain with cylinder(alpha_prefix) ⊆ B(x, s).

    Sibling sets are disjoint and nested in their parent's, so the candidates
    form a chain and a greedy descent finds the longest one.
    """
    parse_bits(alpha_prefix)
    if "" not in A or not A.allocated("", s).covers(alpha_prefix):
        return ""
    x = ""
    while True:
        for bit in "01":
            child = x + bit
            if child in A and A.allocated(child, s).covers(alpha_prefix):
                x = child
                break
        else:
            return x


def pushforward(A: Allocation, s: int) -> Dict[BitString, Dyadic]:
    """A(λ): x ↦ λ(B(x, s)) over the domain."""
    return {x: measure(A.allocated(x, s)) for x in A.domain}


def is_excluded(A: Allocation, u: BitString, v: BitString, s: int) -> bool:
    """True when uΩ×vΩ is certified to lie outside the graph at stage s.

    That is, some prefix y of v in the domain has uΩ ∩ B(y, s) = ∅. False only
    means nothing is certified at this stage.
    """
    parse_bits(u)
    parse_bits(v)
    return any(y in A and not A.allocated(y, s).meets(u) for y in prefixes(v))


def excluded_rectangles(A: Allocation, s: int) -> Iterator[Tuple[BitString, BitString]]:
    """Enumerate rectangles (u, y) with uΩ×yΩ outside the graph at stage s."""
    for y in A.domain:
        for u in complement(A.allocated(y, s)):
            yield (u, y)


def use_bound(A: Allocation, n: int) -> int:
    """Input bits that suffice to certify an output of length n."""
    return A.bound.at(n)
