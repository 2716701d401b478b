#!/usr/bin/env python3
"""
Tests for the reduction instance, witnesses and exports.
"""

import json
import shutil
import tempfile
import unittest
from fractions import Fraction
from pathlib import Path

from kforge.cantor import EMPTY, ClopenSet, Dyadic, is_subset, measure
from kforge.errors import DomainError, FixtureError
from kforge.fixture_generator import random_instance_families
from kforge.fixtures import load_family, write_json
from kforge.reduction import (build_instance, build_instance_from_files,
                              decode, dominance_c, find_witness,
                              instance_to_json, load_instance, verify_chain,
                              witness_point, witness_summaries)
from kforge.semimeasure import complexity, dominance_constant

MICRO = Path(__file__).resolve().parent.parent / "fixtures" / "micro"

B_FINAL = {
    "": ["00", "010", "0110", "011100"],
    "0": ["000", "010100"],
    "1": ["001", "0100"],
    "00": ["0000"],
    "11": [],
}
POINTS = {"": "011100", "0": "010100", "1": "0100", "00": "0000"}


def micro_instance():
    return build_instance_from_files(MICRO / "family_s.json", MICRO / "family_omega.json")


class TestMicroInstance(unittest.TestCase):
    """Test the hand-checked micro fixture end to end."""

    @classmethod
    def setUpClass(cls):
        cls.inst = micro_instance()

    def test_constants(self):
        """Test c, t_level and depth of the micro instance."""
        self.assertEqual(self.inst.c, 1)
        self.assertEqual(self.inst.depth, 9)
        self.assertEqual(self.inst.stage, 1)
        self.assertEqual(self.inst.bound.to_list(), [8, 8, 9])
        self.assertEqual(dominance_c(self.inst), 1)

    def test_complexities(self):
        """Test the complexities of the micro strings."""
        expected = {"": 5, "0": 5, "1": 5, "00": 6, "11": 3}
        for x, k in expected.items():
            self.assertEqual(complexity(self.inst.m, x, 1), k)

    def test_round_up(self):
        """Test M′ of the micro instance."""
        self.assertEqual(self.inst.mprime, {"": Dyadic(29, 64), "0": Dyadic(9, 64),
                                            "1": Dyadic(3, 16), "00": Dyadic(1, 16),
                                            "11": Dyadic(0)})
        self.assertEqual(self.inst.mprime_staged.value("", 0), Dyadic(7, 16))
        self.assertEqual(self.inst.mprime_staged.value("0", 0), Dyadic(1, 8))

    def test_allocation(self):
        """Test the micro allocation."""
        for x, cylinders in B_FINAL.items():
            self.assertEqual(self.inst.U.allocated(x, 1).to_list(), cylinders)
        self.assertEqual(self.inst.U.allocated("", 0).to_list(), ["00", "010", "0110"])
        self.assertEqual(self.inst.supported(), ["", "0", "1", "00"])

    def test_fail_region(self):
        """Test the micro fail region."""
        self.assertEqual(self.inst.fail.to_list(), ["11"])
        self.assertEqual(self.inst.test.expectation(1), Fraction(15, 32))
        self.assertEqual(self.inst.fail_region_at(12).to_list(), ["11"])
        with self.assertRaises(DomainError):
            self.inst.fail_region_at(5)

    def test_tau(self):
        """Test τ of the allocated sets."""
        expected = {"": Fraction(119, 1024), "0": Fraction(43, 1024),
                    "1": Fraction(13, 256), "00": Fraction(5, 256)}
        for x, tau in expected.items():
            self.assertEqual(self.inst.test.tau_clopen(self.inst.U.allocated(x, 1), 1), tau)

    def test_witnesses(self):
        """Test the micro witnesses and points."""
        for x, cylinders in B_FINAL.items():
            if x == "11":
                continue
            self.assertEqual(find_witness(self.inst, x).to_list(), cylinders)
            self.assertEqual(witness_point(self.inst, x), POINTS[x])
            self.assertEqual(decode(self.inst, POINTS[x]), x)

    def test_zero_target(self):
        """Test that a zero-mass target is rejected."""
        with self.assertRaises(DomainError):
            find_witness(self.inst, "11")
        with self.assertRaisesRegex(DomainError, "target not in supported cone"):
            verify_chain(self.inst, "11")

    def test_outside_domain(self):
        """Test that a string outside the domain is rejected."""
        with self.assertRaises(DomainError):
            find_witness(self.inst, "01")
        with self.assertRaises(DomainError):
            verify_chain(self.inst, "010")

    def test_chain(self):
        """Test the witness chain."""
        chain = verify_chain(self.inst, "00")
        self.assertEqual([p for p, _ in chain], ["", "0", "00"])
        self.assertEqual(chain[-1][1].to_list(), ["0000"])

    def test_dominance_of_members(self):
        """Test the dominance constant of a member against the mixture."""
        P0 = self.inst.family_omega[0]
        self.assertEqual(dominance_constant(P0, self.inst.M, 1), 2)

    def test_summaries(self):
        """Test per-string witness summaries."""
        summaries = witness_summaries(self.inst)
        self.assertEqual([s.x for s in summaries], ["", "0", "1", "00"])
        self.assertEqual(summaries[0].to_json()["tau"], "119/2^10")

    def test_export_matches_golden(self):
        """Test the export against the golden file."""
        golden = json.loads((MICRO / "instance.json").read_text())
        self.assertEqual(instance_to_json(self.inst, MICRO / "instance.json"), golden)

    def test_load_golden(self):
        """Test loading the golden export."""
        inst, data = load_instance(MICRO / "instance.json")
        self.assertEqual(inst.c, data["c"])
        self.assertEqual(inst.U, self.inst.U)


class TestInstanceErrors(unittest.TestCase):
    """Test rejected inputs."""

    def test_empty_family(self):
        """Test that an empty family is rejected."""
        omega = load_family(MICRO / "family_omega.json").members
        with self.assertRaisesRegex(DomainError, "empty family"):
            build_instance([], omega)

    def test_zero_omega(self):
        """Test that a zero semimeasure family is rejected."""
        with self.assertRaisesRegex(DomainError, "empty support"):
            build_instance_from_files(MICRO / "family_s.json", MICRO / "zero_omega.json")

    def test_swapped_kinds(self):
        """Test that swapped family kinds are rejected."""
        with self.assertRaises(DomainError):
            build_instance_from_files(MICRO / "family_omega.json", MICRO / "family_s.json")

    def test_digest_mismatch(self):
        """Test that an edited fixture is detected on load."""
        with tempfile.TemporaryDirectory() as tmp:
            for name in ("family_s.json", "family_omega.json"):
                shutil.copy(MICRO / name, Path(tmp) / name)
            inst = build_instance_from_files(Path(tmp) / "family_s.json",
                                             Path(tmp) / "family_omega.json")
            export = Path(tmp) / "out" / "instance.json"
            write_json(instance_to_json(inst, export), export)
            rebuilt, data = load_instance(export)
            self.assertEqual(data["fixtures"]["family_s"]["path"], "../family_s.json")
            self.assertEqual(rebuilt.c, inst.c)
            with open(Path(tmp) / "family_s.json", "a") as handle:
                handle.write("\n")
            with self.assertRaises(FixtureError):
                load_instance(export)


class TestRandomInstances(unittest.TestCase):
    """Property checks over seeded random instances."""

    def test_witness_properties(self):
        """Test witness properties on random instances."""
        for seed in range(12):
            family_s, family_omega = random_instance_families(seed, members=2)
            inst = build_instance(family_s, family_omega)
            self.assertGreaterEqual(inst.c, 1)
            self.assertEqual(inst.c & (inst.c - 1), 0)
            for x in inst.supported():
                b = inst.U.allocated(x, inst.stage)
                tau = inst.test.tau_clopen(b, inst.stage)
                self.assertLess(tau, inst.c * inst.mprime[x])
                witness = find_witness(inst, x)
                self.assertTrue(is_subset(witness, b))
                self.assertEqual(witness & inst.fail, EMPTY)
                self.assertGreaterEqual(measure(witness), inst.mprime[x] - tau / inst.c)
                point = witness.leftmost_deepest()
                self.assertLessEqual(inst.test.test_value(point, inst.stage), inst.c)
                self.assertTrue(decode(inst, point).startswith(x))
                t = inst.bound.at(len(x))
                self.assertTrue(decode(inst, point[:t]).startswith(x))
                chain = verify_chain(inst, x)
                self.assertEqual(len(chain), len(x) + 1)

    def test_c_is_minimal(self):
        """Test that c is the smallest dominating power of two."""
        for seed in range(12):
            inst = build_instance(*random_instance_families(seed))
            if inst.c == 1:
                continue
            half = inst.c // 2
            self.assertTrue(any(
                inst.test.tau_clopen(inst.U.allocated(x, inst.stage), inst.stage)
                >= half * inst.mprime[x] for x in inst.supported()))

    def test_deterministic(self):
        """Test that building twice gives the same instance."""
        first = build_instance(*random_instance_families(5, stages=4))
        second = build_instance(*random_instance_families(5, stages=4))
        self.assertEqual(first.c, second.c)
        self.assertEqual(first.bound, second.bound)
        self.assertEqual(first.U, second.U)
        self.assertEqual(first.fail, second.fail)
        self.assertEqual(instance_to_json(first), instance_to_json(second))

    def test_budget_fits_grid(self):
        """Test that allocated sets stay within the depth bound."""
        for seed in range(10):
            inst = build_instance(*random_instance_families(seed, max_depth=3))
            for x in inst.U.domain:
                self.assertLessEqual(inst.U.allocated(x, inst.stage).depth(),
                                     inst.bound.at(len(x)))
            self.assertIsInstance(inst.fail, ClopenSet)


if __name__ == "__main__":
    unittest.main()
