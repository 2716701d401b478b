"""
Exact kernel for Cantor space.

Bit strings are plain ``str`` values over "0"/"1" (ε is the empty string);
a string x stands for the cylinder xΩ of all infinite sequences extending it.
Clopen sets are kept as sorted canonical antichains of cylinders and every
measure is an exact dyadic rational, so equality checks are exact.
"""

import itertools
import re
from bisect import bisect_left
from fractions import Fraction
from typing import (Any, FrozenSet, Iterable, Iterator, List, Optional, Tuple,
                    Union)

BitString = str
Rational = Union[int, Fraction]

_BITS = re.compile(r"^[01]*$")
_VALUE_TEXT = re.compile(r"^\s*(\d+)\s*(?:/\s*(?:2\^(\d+)|(\d+)))?\s*$")


def parse_bits(text: str) -> BitString:
    """Return ``text`` unchanged if it is a 0/1 string, else raise ValueError."""
    if not isinstance(text, str) or not _BITS.match(text):
        raise ValueError(f"not a bit string: {text!r}")
    return text


def length_lex_key(x: BitString) -> Tuple[int, str]:
    """Sort key: shorter strings first, then lexicographic."""
    return (len(x), x)


def prefixes(x: BitString) -> List[BitString]:
    """All prefixes of x from ε up to x itself."""
    return [x[:i] for i in range(len(x) + 1)]


class Dyadic(Fraction):
    """Exact nonnegative rational n/2^k.

    Sums, differences and products of dyadics (and ints) stay dyadic; mixing
    with a general Fraction falls back to Fraction. A negative result raises
    ValueError, so subtraction is only defined when it stays nonnegative.
    """

    __slots__ = ()

    def __new__(cls, numerator: Rational = 0,
                denominator: Optional[Rational] = None) -> "Dyadic":
        self = super().__new__(cls, numerator, denominator)
        den = self.denominator
        if den & (den - 1):
            raise ValueError(f"not a dyadic rational: {self.numerator}/{den}")
        if self.numerator < 0:
            raise ValueError(f"dyadic values are nonnegative: {self.numerator}/{den}")
        return self

    @property
    def exponent(self) -> int:
        """k in the canonical form n/2^k."""
        return self.denominator.bit_length() - 1

    def bit_length(self) -> int:
        """Smallest b with the value an integer multiple of 2^-(b-1)."""
        return self.exponent + 1

    def to_text(self) -> str:
        return f"{self.numerator}/2^{self.exponent}"

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        return f"Dyadic('{self.to_text()}')"

    def __reduce__(self) -> Tuple[Any, Tuple[int, int]]:
        return (self.__class__, (self.numerator, self.denominator))

    def __add__(self, other: Any) -> Any:
        return _keep_dyadic(Fraction.__add__(self, other), other)

    def __radd__(self, other: Any) -> Any:
        return _keep_dyadic(Fraction.__radd__(self, other), other)

    def __sub__(self, other: Any) -> Any:
        return _keep_dyadic(Fraction.__sub__(self, other), other)

    def __rsub__(self, other: Any) -> Any:
        return _keep_dyadic(Fraction.__rsub__(self, other), other)

    def __mul__(self, other: Any) -> Any:
        return _keep_dyadic(Fraction.__mul__(self, other), other)

    def __rmul__(self, other: Any) -> Any:
        return _keep_dyadic(Fraction.__rmul__(self, other), other)


def _keep_dyadic(result: Any, other: Any) -> Any:
    """Re-wrap ``result`` as Dyadic when ``other`` was an int or a Dyadic."""
    if result is NotImplemented:
        return result
    if isinstance(other, (int, Dyadic)):
        return Dyadic(result)
    return result


ZERO = Dyadic(0)
ONE = Dyadic(1)


def is_dyadic(value: Rational) -> bool:
    den = Fraction(value).denominator
    return den & (den - 1) == 0


def as_dyadic(value: Rational) -> Dyadic:
    """Convert an exact rational known to be dyadic."""
    if isinstance(value, Dyadic):
        return value
    return Dyadic(value)


def parse_value(text: str) -> Fraction:
    """Parse "n/2^k", "n/d" or "n"; dyadic results come back as Dyadic."""
    match = _VALUE_TEXT.match(text) if isinstance(text, str) else None
    if not match:
        raise ValueError(f"malformed exact value: {text!r}")
    numerator = int(match.group(1))
    if match.group(2) is not None:
        value = Fraction(numerator, 1 << int(match.group(2)))
    elif match.group(3) is not None:
        if int(match.group(3)) == 0:
            raise ValueError(f"zero denominator: {text!r}")
        value = Fraction(numerator, int(match.group(3)))
    else:
        value = Fraction(numerator)
    return Dyadic(value) if is_dyadic(value) else value


def format_value(value: Rational) -> str:
    """Dyadics as "n/2^k", any other rational as "n/d"."""
    value = Fraction(value)
    if is_dyadic(value):
        return as_dyadic(value).to_text()
    return f"{value.numerator}/{value.denominator}"


def ceil_to_grid(value: Rational, k: int) -> Dyadic:
    """Round ``value`` up to the nearest integer multiple of 2^-k."""
    scaled = Fraction(value) * (Fraction(2) ** k)
    steps = -((-scaled.numerator) // scaled.denominator)
    if k >= 0:
        return Dyadic(steps, 1 << k)
    return Dyadic(steps << -k)


def _canonicalize(strings: Iterable[BitString]) -> Tuple[BitString, ...]:
    members = {parse_bits(x) for x in strings}
    antichain = {x for x in members
                 if not any(x[:i] in members for i in range(len(x)))}
    if not antichain:
        return ()
    for n in range(max(map(len, antichain)), 0, -1):
        zeros = [x for x in antichain if len(x) == n and x[-1] == "0"]
        for x in zeros:
            sibling = x[:-1] + "1"
            if sibling in antichain:
                antichain.discard(x)
                antichain.discard(sibling)
                antichain.add(x[:-1])
    return tuple(sorted(antichain))


class ClopenSet:
    """Finite union of cylinders in canonical form.

    The canonical form is the sorted antichain with every pair of sibling
    cylinders x0, x1 merged into x, so two ClopenSets are equal as point sets
    exactly when their cylinder tuples are equal. Ω is ("",), ∅ is ().
    """

    __slots__ = ("_cylinders", "_members")

    def __init__(self, cylinders: Iterable[BitString] = ()) -> None:
        self._cylinders = _canonicalize(cylinders)
        self._members = frozenset(self._cylinders)

    @classmethod
    def _trusted(cls, canonical: Iterable[BitString]) -> "ClopenSet":
        obj = cls.__new__(cls)
        obj._cylinders = tuple(canonical)
        obj._members = frozenset(obj._cylinders)
        return obj

    @property
    def cylinders(self) -> Tuple[BitString, ...]:
        return self._cylinders

    @property
    def members(self) -> FrozenSet[BitString]:
        return self._members

    def to_list(self) -> List[BitString]:
        return list(self._cylinders)

    def __iter__(self) -> Iterator[BitString]:
        return iter(self._cylinders)

    def __len__(self) -> int:
        return len(self._cylinders)

    def __bool__(self) -> bool:
        return bool(self._cylinders)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ClopenSet):
            return NotImplemented
        return self._cylinders == other._cylinders

    def __hash__(self) -> int:
        return hash(self._cylinders)

    def __repr__(self) -> str:
        return f"ClopenSet({list(self._cylinders)!r})"

    def __or__(self, other: "ClopenSet") -> "ClopenSet":
        return union(self, other)

    def __and__(self, other: "ClopenSet") -> "ClopenSet":
        return intersect(self, other)

    def __sub__(self, other: "ClopenSet") -> "ClopenSet":
        return difference(self, other)

    def __invert__(self) -> "ClopenSet":
        return complement(self)

    def __le__(self, other: "ClopenSet") -> bool:
        return is_subset(self, other)

    def measure(self) -> Dyadic:
        return measure(self)

    def depth(self) -> int:
        return depth(self)

    def covers(self, u: BitString) -> bool:
        """True iff the cylinder uΩ lies inside this set."""
        return any(u[:i] in self._members for i in range(len(u) + 1))

    def meets(self, u: BitString) -> bool:
        """True iff the cylinder uΩ intersects this set."""
        if self.covers(u):
            return True
        lo = bisect_left(self._cylinders, u)
        return lo < len(self._cylinders) and self._cylinders[lo].startswith(u)

    def cells(self, d: int) -> Iterator[BitString]:
        """Depth-d cylinders whose union is this set, in left-to-right order."""
        if d < self.depth():
            raise ValueError(f"cell depth {d} is below the set depth {self.depth()}")
        for x in self._cylinders:
            for tail in itertools.product("01", repeat=d - len(x)):
                yield x + "".join(tail)

    def leftmost_deepest(self) -> BitString:
        """Longest cylinder, leftmost among those of equal length."""
        if not self._cylinders:
            raise ValueError("empty clopen set has no cylinders")
        return min(self._cylinders, key=lambda x: (-len(x), x))


EMPTY = ClopenSet._trusted(())
OMEGA = ClopenSet._trusted(("",))


def cylinder(x: BitString) -> ClopenSet:
    """The canonical clopen set {xΩ}."""
    return ClopenSet._trusted((parse_bits(x),))


def union(a: ClopenSet, b: ClopenSet) -> ClopenSet:
    return ClopenSet(itertools.chain(a.cylinders, b.cylinders))


def intersect(a: ClopenSet, b: ClopenSet) -> ClopenSet:
    # xΩ ∩ yΩ is the longer cylinder when one string prefixes the other
    found = []
    ordered = b.cylinders
    for x in a.cylinders:
        if any(x[:i] in b.members for i in range(len(x) + 1)):
            found.append(x)
            continue
        lo = bisect_left(ordered, x)
        hi = bisect_left(ordered, x + "2")
        found.extend(ordered[lo:hi])
    return ClopenSet(found)


def complement(a: ClopenSet) -> ClopenSet:
    free: List[BitString] = []

    def walk(prefix: BitString, members: List[BitString]) -> None:
        if not members:
            free.append(prefix)
            return
        if members[0] == prefix:
            return
        n = len(prefix)
        walk(prefix + "0", [x for x in members if x[n] == "0"])
        walk(prefix + "1", [x for x in members if x[n] == "1"])

    walk("", list(a.cylinders))
    return ClopenSet._trusted(free)


def difference(a: ClopenSet, b: ClopenSet) -> ClopenSet:
    """a ∖ b, canonical."""
    return intersect(a, complement(b))


def measure(a: ClopenSet) -> Dyadic:
    """λ(a): the sum of 2^-|x| over the cylinders of a."""
    if not a.cylinders:
        return ZERO
    d = depth(a)
    return Dyadic(sum(1 << (d - len(x)) for x in a.cylinders), 1 << d)


def is_subset(a: ClopenSet, b: ClopenSet) -> bool:
    return not intersect(a, complement(b))


def depth(a: ClopenSet) -> int:
    """Longest cylinder string; 0 for Ω and, by convention, for ∅."""
    return max((len(x) for x in a.cylinders), default=0)
