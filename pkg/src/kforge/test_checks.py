#!/usr/bin/env python3
"""
Tests for the invariant suite.
"""

import dataclasses
import unittest
from fractions import Fraction

from kforge.cantor import OMEGA, measure
from kforge.checks import CheckResult, run_checks
from kforge.fixture_generator import random_instance_families
from kforge.mltest import ConcatTest
from kforge.reduction import build_instance
from kforge.test_reduction import micro_instance


def failed(results):
    return {f"{r.module}.{r.name}" for r in results if not r.passed}


class ZeroTest(ConcatTest):
    """T that reports 0 on every cylinder while τ still integrates m."""

    def test_value(self, beta_prefix, s):
        return Fraction(0)


class SquaredTauTest(ConcatTest):
    """τ plus λ², which is not additive."""

    def tau_clopen(self, a, s):
        return super().tau_clopen(a, s) + measure(a) * measure(a)


class TestRunChecks(unittest.TestCase):
    """Test the suite on sound and deliberately broken instances."""

    @classmethod
    def setUpClass(cls):
        cls.inst = micro_instance()

    def test_micro_instance_passes(self):
        """Test that the micro instance passes every check."""
        results = run_checks(self.inst)
        self.assertEqual(failed(results), set())
        modules = {r.module for r in results}
        self.assertEqual(modules, {"cantor", "semimeasure", "pct", "mltest", "reduction"})

    def test_random_instances_pass(self):
        """Test that random instances pass every check."""
        for seed in range(5):
            inst = build_instance(*random_instance_families(seed, stages=3))
            self.assertEqual(failed(run_checks(inst)), set(), f"seed {seed}")

    def test_oversized_c(self):
        """Test that doubling c fails minimality and the Markov bound."""
        with self.assertLogs("kforge.checks", level="WARNING"):
            results = run_checks(dataclasses.replace(self.inst, c=2))
        self.assertEqual(failed(results), {"reduction.c-minimality", "mltest.markov-bound"})

    def test_errors_count_as_failures(self):
        """Test that errors raised inside a check count as failures."""
        with self.assertLogs("kforge.checks", level="WARNING"):
            results = run_checks(dataclasses.replace(self.inst, fail=OMEGA))
        self.assertIn("reduction.witnesses", failed(results))
        self.assertIn("reduction.chains", failed(results))

    def test_broken_test_values(self):
        """Test that T disagreeing with τ fails the integral identity."""
        broken = dataclasses.replace(self.inst, test=ZeroTest(self.inst.m))
        with self.assertLogs("kforge.checks", level="WARNING") as logs:
            results = run_checks(broken)
        self.assertIn("mltest.integral-identity", failed(results))
        self.assertTrue(any("cell sum of T" in line for line in logs.output))

    def test_integral_identity_runs_at_depth(self):
        """Test that the integral identity is checked on deep random instances."""
        for seed in range(3):
            inst = build_instance(*random_instance_families(seed, stages=3))
            if inst.test.tau_clopen(inst.U.allocated("", inst.stage), inst.stage) == 0:
                continue
            broken = dataclasses.replace(inst, test=ZeroTest(inst.m))
            with self.assertLogs("kforge.checks", level="WARNING"):
                results = run_checks(broken)
            self.assertIn("mltest.integral-identity", failed(results), f"seed {seed}")

    def test_non_additive_tau(self):
        """Test that a non-additive τ fails the additivity check."""
        broken = dataclasses.replace(self.inst, test=SquaredTauTest(self.inst.m))
        with self.assertLogs("kforge.checks", level="WARNING"):
            results = run_checks(broken)
        self.assertIn("mltest.tau-additivity", failed(results))

    def test_result_text(self):
        """Test the text form of a check result."""
        self.assertEqual(str(CheckResult("pct", "nesting", True)), "[ok] pct.nesting")
        self.assertEqual(str(CheckResult("pct", "nesting", False, "escapes")),
                         "[FAILED] pct.nesting: escapes")


if __name__ == "__main__":
    unittest.main()
