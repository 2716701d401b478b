#!/usr/bin/env python3
"""
Tests for interval allocations and their queries.
"""

import itertools
import unittest

from kforge.cantor import EMPTY, OMEGA, ClopenSet, Dyadic, cylinder, is_subset, measure
from kforge.errors import DomainError, InvariantViolation
from kforge.fixture_generator import SemimeasureGenerator
from kforge.pct import (Allocation, LevelBound, apply, build_allocation,
                        carve_leftmost, check_bit_budget, excluded_rectangles,
                        is_excluded, preimage_clopen, preimage_cylinder,
                        pushforward, use_bound, within_strict_budget)
from kforge.semimeasure import StagedSemimeasure


def all_strings(max_len):
    for n in range(max_len + 1):
        for bits in itertools.product("01", repeat=n):
            yield "".join(bits)


def forced_fixture():
    P = StagedSemimeasure({"": [(0, Dyadic(1))], "0": [(0, Dyadic(1, 2))],
                           "1": [(0, Dyadic(1, 4))]})
    return P, build_allocation(P, LevelBound((1, 2)))


class TestLevelBound(unittest.TestCase):
    """Test per-length depth bounds."""

    def test_at_extends_last_level(self):
        """Test that lengths past the last level reuse it."""
        bound = LevelBound((2, 3))
        self.assertEqual(bound.at(0), 2)
        self.assertEqual(bound(1), 3)
        self.assertEqual(bound.at(7), 3)

    def test_rejects_decreasing_or_nonpositive(self):
        """Test that bad level bounds are rejected."""
        with self.assertRaises(DomainError):
            LevelBound((3, 2))
        with self.assertRaises(DomainError):
            LevelBound((0,))
        with self.assertRaises(DomainError):
            LevelBound(())

    def test_from_raw_running_max(self):
        """Test the running maximum."""
        self.assertEqual(LevelBound.from_raw([4, 2, 5, 3]).to_list(), [4, 4, 5, 5])

    def test_of_strings(self):
        """Test the bound over a set of strings."""
        bound = LevelBound((1, 2, 4))
        self.assertEqual(bound.of_strings(["0", "11"]), 4)
        self.assertEqual(bound.of_strings([]), 0)

    def test_fitting_meets_strict_budget(self):
        """Test that the fitted bound leaves a spare bit."""
        P, _ = forced_fixture()
        bound = LevelBound.fitting(P)
        self.assertTrue(within_strict_budget(P, bound))
        self.assertEqual(bound.to_list(), [2, 4])


class TestBitBudget(unittest.TestCase):
    """Test the bit budget preconditions."""

    def test_forced_fixture_fits_but_not_strictly(self):
        """Test a bound that fits exactly but has no spare bit."""
        P, _ = forced_fixture()
        check_bit_budget(P, LevelBound((1, 2)))
        self.assertFalse(within_strict_budget(P, LevelBound((1, 2))))

    def test_too_fine_value(self):
        """Test that a value finer than the bound is rejected."""
        P = StagedSemimeasure({"": [(0, Dyadic(1, 8))]})
        with self.assertRaises(DomainError):
            check_bit_budget(P, LevelBound((2,)))
        with self.assertRaises(DomainError):
            build_allocation(P, LevelBound((2,)))

    def test_invalid_semimeasure(self):
        """Test that an invalid semimeasure is rejected."""
        P = StagedSemimeasure({"": [(0, Dyadic(1, 4))], "0": [(0, Dyadic(1, 2))]})
        with self.assertRaises(DomainError):
            build_allocation(P, LevelBound((4,)))


class TestCarve(unittest.TestCase):
    """Test leftmost carving."""

    def test_splits_leftmost(self):
        """Test carving the leftmost part of a cylinder."""
        self.assertEqual(carve_leftmost(OMEGA, Dyadic(3, 8), 3).to_list(), ["00", "010"])

    def test_takes_whole_cylinders_first(self):
        """Test that whole cylinders are taken before splitting."""
        free = ClopenSet(["01", "1"])
        self.assertEqual(carve_leftmost(free, Dyadic(1, 2), 2).to_list(), ["01", "10"])

    def test_insufficient_space(self):
        """Test carving more than is free."""
        with self.assertRaises(InvariantViolation):
            carve_leftmost(cylinder("0"), Dyadic(3, 4), 2)


class TestForcedAllocation(unittest.TestCase):
    """Test the worked allocation example and its queries."""

    def setUp(self):
        self.P, self.A = forced_fixture()

    def test_forced_sets(self):
        """Test the sets of the forced fixture."""
        self.assertEqual(self.A.allocated("", 0), OMEGA)
        self.assertEqual(self.A.allocated("0", 0).to_list(), ["0"])
        self.assertEqual(self.A.allocated("1", 0).to_list(), ["10"])

    def test_preimage_cylinder(self):
        """Test the preimage of a single cylinder."""
        self.assertEqual(preimage_cylinder(self.A, "1", 0).to_list(), ["10"])
        self.assertEqual(preimage_cylinder(self.A, "", 0), self.A.allocated("", 0))
        with self.assertRaises(DomainError):
            preimage_cylinder(self.A, "01", 0)

    def test_preimage_clopen(self):
        """Test the preimage of a clopen set."""
        self.assertEqual(preimage_clopen(self.A, ["0", "1"], 0).to_list(), ["0", "10"])
        self.assertEqual(preimage_clopen(self.A, EMPTY, 0), EMPTY)
        self.assertEqual(preimage_clopen(self.A, cylinder("1"), 0),
                         preimage_cylinder(self.A, "1", 0))

    def test_apply(self):
        """Test applying the allocation."""
        self.assertEqual(apply(self.A, "10", 0), "1")
        self.assertEqual(apply(self.A, "", 0), "")
        self.assertEqual(apply(self.A, "0", 0), "0")
        self.assertEqual(apply(self.A, "11", 0), "")

    def test_pushforward(self):
        """Test that the pushforward of λ is P."""
        self.assertEqual(pushforward(self.A, 0),
                         {"": Dyadic(1), "0": Dyadic(1, 2), "1": Dyadic(1, 4)})
        self.assertEqual(pushforward(Allocation(LevelBound((1,)), 0, {}), 0), {})

    def test_is_excluded(self):
        """Test certified exclusion of rectangles."""
        self.assertTrue(is_excluded(self.A, "11", "0", 0))
        self.assertFalse(is_excluded(self.A, "", "1", 0))
        self.assertFalse(is_excluded(self.A, "0", "0", 0))

    def test_excluded_rectangles(self):
        """Test the enumeration of excluded rectangles."""
        rectangles = list(excluded_rectangles(self.A, 0))
        self.assertIn(("1", "0"), rectangles)
        self.assertIn(("11", "1"), rectangles)
        for u, y in rectangles:
            self.assertTrue(is_excluded(self.A, u, y, 0))

    def test_use_bound(self):
        """Test the use bound."""
        self.assertEqual(use_bound(self.A, 0), 1)
        self.assertEqual(use_bound(self.A, 5), 2)

    def test_export(self):
        """Test the allocation export."""
        exported = self.A.export(0)
        self.assertEqual(exported["t_level"], [1, 2])
        self.assertEqual(exported["stages"], 0)
        self.assertEqual(exported["entries"], [{"x": "", "B": [""]}, {"x": "0", "B": ["0"]},
                                               {"x": "1", "B": ["10"]}])


class TestStagedAllocation(unittest.TestCase):
    """Test allocations replayed over several stages."""

    def test_two_stage_growth_merges(self):
        """Test growth across two stages."""
        P = StagedSemimeasure({"": [(0, Dyadic(1))],
                               "0": [(0, Dyadic(1, 4)), (1, Dyadic(1, 2))]})
        A = build_allocation(P, LevelBound((1, 2)))
        self.assertEqual(A.allocated("0", 0).to_list(), ["00"])
        self.assertEqual(A.allocated("0", 1).to_list(), ["0"])
        self.assertEqual(A.stage_history("0"), [0, 1])

    def test_zero_string_gets_empty_set(self):
        """Test that zero mass gets the empty set."""
        P = StagedSemimeasure({"": [(0, Dyadic(1, 2))], "1": [(0, Dyadic(0))]})
        A = build_allocation(P, LevelBound((2,)))
        self.assertEqual(A.allocated("1", 0), EMPTY)

    def test_deterministic(self):
        """Test that rebuilding gives the same allocation."""
        gen = SemimeasureGenerator(seed=3, max_depth=5, stages=5)
        P = gen.generate_member("P")
        self.assertEqual(build_allocation(P, gen.bound), build_allocation(P, gen.bound))

    def test_exact_generation_and_invariants(self):
        """Test generation and nesting on random semimeasures."""
        for seed in range(100):
            gen = SemimeasureGenerator(seed, max_depth=8, max_size=25, stages=1 + seed % 12)
            P = gen.generate_member("P")
            A = build_allocation(P, gen.bound)
            for s in range(P.s_max + 1):
                generated = pushforward(A, s)
                for x in A.domain:
                    self.assertEqual(generated[x], P.value(x, s), f"seed {seed} stage {s} x {x!r}")
                    b = A.allocated(x, s)
                    self.assertLessEqual(b.depth(), gen.bound.at(len(x)))
                    if x:
                        self.assertTrue(is_subset(b, A.allocated(x[:-1], s)))
                    if x.endswith("0") and x[:-1] + "1" in A:
                        self.assertFalse(b & A.allocated(x[:-1] + "1", s))
                    if s:
                        self.assertTrue(is_subset(A.allocated(x, s - 1), b))

    def test_bit_flip_invariance(self):
        """Test that membership depends only on the first t_level bits."""
        for seed in range(20):
            gen = SemimeasureGenerator(seed, max_depth=4, max_size=12, stages=3,
                                       bound=LevelBound((2, 3, 4, 5, 6)))
            P = gen.generate_member("P")
            A = build_allocation(P, gen.bound)
            for x in A.domain:
                b = A.allocated(x, P.s_max)
                t = gen.bound.at(len(x))
                for u in all_strings(t):
                    if len(u) != t:
                        continue
                    inside = {b.covers(u + w) for w in ("00", "01", "10", "11")}
                    self.assertEqual(len(inside), 1, f"seed {seed} x {x!r} u {u}")

    def test_duality_and_exclusion_brute_force(self):
        """Test apply against preimages and exclusion on all short inputs."""
        for seed in range(10):
            gen = SemimeasureGenerator(seed, max_depth=3, max_size=10, stages=2,
                                       bound=LevelBound((2, 3, 4, 5)))
            P = gen.generate_member("P")
            A = build_allocation(P, gen.bound)
            s = P.s_max
            for u in all_strings(6):
                out = apply(A, u, s)
                cells_u = set(cylinder(u).cells(6))
                for x in A.domain:
                    b = A.allocated(x, s)
                    if x:
                        self.assertEqual(out.startswith(x), cells_u <= set(b.cells(6)))
                for v in ("0", "1", "01", "10", "110"):
                    expected = any(y in A and not (cells_u & set(A.allocated(y, s).cells(6)))
                                   for y in (v[:i] for i in range(len(v) + 1)))
                    self.assertEqual(is_excluded(A, u, v, s), expected)

    def test_measure_matches_value(self):
        """Test that every allocated set has measure P(x)."""
        gen = SemimeasureGenerator(seed=11, max_depth=6, stages=4)
        P = gen.generate_member("P")
        A = build_allocation(P, gen.bound)
        for x in A.domain:
            self.assertEqual(measure(preimage_cylinder(A, x, 2)), P.value(x, 2))


if __name__ == "__main__":
    unittest.main()
