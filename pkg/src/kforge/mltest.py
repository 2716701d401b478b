"""
The Martin-Löf test induced by a distribution m through concatenation.

T(β) = Σ_{x ⪯ β} m(x)·2^|x| is the λ-density of τ, the image of m⊗λ under
(x, α) ↦ xα, so λ(T) = Σ m(x) ≤ 1 is exactly the distribution's mass bound.
"""

import logging
from fractions import Fraction
from typing import List, Set, Union

from .cantor import (BitString, ClopenSet, Dyadic, cylinder, intersect,
                     measure, parse_bits, prefixes)
from .errors import DomainError
from .semimeasure import StagedDistribution, Unbounded, norm_exponent

logger = logging.getLogger(__name__)


def concat(x: BitString, alpha_prefix: BitString) -> BitString:
    """P(x, α) = xα on finite prefixes."""
    return parse_bits(x) + parse_bits(alpha_prefix)


def _check_threshold(c: Union[int, Fraction]) -> None:
    c = Fraction(c)
    if c < 0 or (c > 0 and (c.numerator & (c.numerator - 1)
                            or c.denominator & (c.denominator - 1))):
        raise DomainError(f"threshold {c} is not zero or a power of two")


class ConcatTest:
    """T derived from m; holds no state besides the generator."""

    def __init__(self, m: StagedDistribution) -> None:
        self.m = m

    def weight(self, x: BitString, s: int) -> Fraction:
        """m(x, s)·2^|x|, the jump of T on entering xΩ."""
        return self.m.value(x, s) * (1 << len(x))

    def test_value(self, beta_prefix: BitString, s: int) -> Fraction:
        """Infimum of T over the cylinder of beta_prefix."""
        return sum((self.weight(x, s) for x in prefixes(parse_bits(beta_prefix))
                    if x in self.m.support), Dyadic(0))

    def deficiency(self, beta_prefix: BitString, s: int) -> Union[int, Unbounded]:
        v = self.test_value(beta_prefix, s)
        if v == 0:
            return Unbounded.MINUS_INFINITE
        return norm_exponent(v)

    def deficiency_profile(self, beta_prefix: BitString, s: int) -> List[Union[int, Unbounded]]:
        """Deficiency of every prefix of beta_prefix, ε first."""
        return [self.deficiency(p, s) for p in prefixes(parse_bits(beta_prefix))]

    def passes(self, beta_prefix: BitString, c: Union[int, Fraction], s: int) -> bool:
        """True iff the cylinder of beta_prefix lies in ρ = {T ≤ c}."""
        return self.test_value(beta_prefix, s) <= c

    def tau_clopen(self, a: ClopenSet, s: int) -> Fraction:
        """τ(a) = ∫_a T dλ at stage s."""
        total = Fraction(0)
        for x in self.m.ordered_support():
            w = self.weight(x, s)
            if w:
                total += w * measure(intersect(a, cylinder(x)))
        return total

    def expectation(self, s: int) -> Fraction:
        """λ(T) = Σ m(x, s); raises if it exceeds 1."""
        total = sum((self.m.value(x, s) for x in self.m.support), Fraction(0))
        if total > 1:
            raise DomainError(f"not a test: expectation {total} exceeds 1")
        return total

    def max_test_value(self, s: int) -> Fraction:
        """max T at stage s, attained on ε or on a supported string."""
        return max((self.test_value(x, s) for x in self.m.support | {""}),
                   default=Fraction(0))

    def fail_region(self, c: Union[int, Fraction], s: int, depth: int) -> ClopenSet:
        """Union of the cylinders y, |y| ≤ depth, with test_value(y) > c.

        T only grows along extensions and only changes on supported strings,
        so the scan follows the support trie and stops at the first prefix
        whose accumulated value exceeds c.
        """
        _check_threshold(c)
        positive = {x for x in self.m.support if self.m.value(x, s) > 0}
        if depth < max((len(x) for x in positive), default=0):
            reach = max(len(x) for x in positive)
            logger.warning(f"fail region at depth {depth} is an under-approximation "
                           f"(support reaches depth {reach})")
        on_trie: Set[BitString] = set()
        for x in positive:
            on_trie.update(prefixes(x))
        failed: List[BitString] = []

        def walk(p: BitString, acc: Fraction) -> None:
            if len(p) > depth:
                return
            if p in positive:
                acc += self.weight(p, s)
            if acc > c:
                failed.append(p)
                return
            for bit in "01":
                if p + bit in on_trie:
                    walk(p + bit, acc)

        walk("", Fraction(0))
        return ClopenSet(failed)


def test_value(test: ConcatTest, beta_prefix: BitString, s: int) -> Fraction:
    return test.test_value(beta_prefix, s)


def deficiency(test: ConcatTest, beta_prefix: BitString, s: int) -> Union[int, Unbounded]:
    return test.deficiency(beta_prefix, s)


def tau_clopen(test: ConcatTest, a: ClopenSet, s: int) -> Fraction:
    return test.tau_clopen(a, s)


def expectation(test: ConcatTest, s: int) -> Fraction:
    return test.expectation(s)


def fail_region(test: ConcatTest, c: Union[int, Fraction], s: int, depth: int) -> ClopenSet:
    return test.fail_region(c, s, depth)
