"""
Invariant suite behind ``kforge verify``.

Every check takes a built instance and returns a failure detail, or None when
it holds. run_checks runs them all in registration order and never raises for
a failing check; a KforgeError inside a check counts as a failure.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

from .cantor import EMPTY, OMEGA, as_dyadic, cylinder, is_subset, measure
from .errors import KforgeError
from .mltest import ConcatTest
from .pct import build_allocation, pushforward
from .reduction import (ReductionInstance, decode, find_witness, verify_chain,
                        witness_point)
from .semimeasure import (Staged, Unbounded, complexity, mixture_weight,
                          round_up_domain, validate, weight_partial_sum)

logger = logging.getLogger(__name__)


Check = Callable[[ReductionInstance], Optional[str]]
_CHECKS: List[Tuple[str, str, Check]] = []


@dataclass(frozen=True)
class CheckResult:
    module: str
    name: str
    passed: bool
    detail: str = ""

    def __str__(self) -> str:
        status = "ok" if self.passed else "FAILED"
        suffix = f": {self.detail}" if self.detail else ""
        return f"[{status}] {self.module}.{self.name}{suffix}"


def check(module: str, name: str) -> Callable[[Check], Check]:
    def register(fn: Check) -> Check:
        _CHECKS.append((module, name, fn))
        return fn
    return register


def _stages(inst: ReductionInstance) -> range:
    return range(inst.stage + 1)


def _sibling_pairs(inst: ReductionInstance) -> List[Tuple[str, str]]:
    return [(x, x[:-1] + "1") for x in inst.domain
            if x.endswith("0") and x[:-1] + "1" in inst.U]


# cantor

@check("cantor", "measure-complement")
def _measure_complement(inst: ReductionInstance) -> Optional[str]:
    """λ(B(x)) and λ of its complement sum to 1."""
    for x in inst.domain:
        a = inst.U.allocated(x, inst.stage)
        if measure(a) + measure(~a) != 1:
            return f"λ(B({x!r})) + λ(complement) ≠ 1"
    return None


@check("cantor", "inclusion-exclusion")
def _inclusion_exclusion(inst: ReductionInstance) -> Optional[str]:
    """λ obeys inclusion-exclusion on pairs of allocated sets."""
    sets = [(x, inst.U.allocated(x, inst.stage)) for x in inst.domain]
    for i, (x, a) in enumerate(sets):
        for y, b in sets[i:]:
            if measure(a | b) + measure(a & b) != measure(a) + measure(b):
                return f"fails for B({x!r}), B({y!r})"
    return None


# semimeasure

@check("semimeasure", "weight-telescoping")
def _telescoping(inst: ReductionInstance) -> Optional[str]:
    """The first n mixture weights sum to 1 - 1/(n+1)."""
    for n in range(1, 65):
        if weight_partial_sum(n) != 1 - Fraction(1, n + 1):
            return f"partial sum differs at n={n}"
    return None


def _dominated(family: Tuple[Staged, ...], mix: Staged) -> Optional[str]:
    for i, g in enumerate(family, 1):
        scale = 1 / mixture_weight(i)
        for x in g.support:
            for s, value in g.history(x):
                if value > scale * mix.value(x, s):
                    return f"member {g.member_id!r} exceeds (i²+i)·mixture at ({x!r}, {s})"
    return None


@check("semimeasure", "mixture-domination")
def _mixture_domination(inst: ReductionInstance) -> Optional[str]:
    """Each mixture dominates its members with the mixture weight."""
    return (_dominated(inst.family_s, inst.m)
            or _dominated(inst.family_omega, inst.M))


@check("semimeasure", "valid-inputs")
def _valid_inputs(inst: ReductionInstance) -> Optional[str]:
    """m, M and M′ are valid staged semimeasures."""
    for label, obj in (("m", inst.m), ("M", inst.M), ("M′", inst.mprime_staged)):
        report = validate(obj)
        if not report:
            return f"{label}: {report}"
    return None


@check("semimeasure", "round-up-contract")
def _round_up_contract(inst: ReductionInstance) -> Optional[str]:
    """M′ is a semimeasure on the complexity grid, nondecreasing in s."""
    previous: Dict[str, Fraction] = {}
    for s in _stages(inst):
        for x in round_up_domain(inst.m, s):
            v = inst.mprime_staged.value(x, s)
            children = (inst.mprime_staged.value(x + "0", s)
                        + inst.mprime_staged.value(x + "1", s))
            if v < children:
                return f"not superadditive at ({x!r}, {s})"
            k = complexity(inst.m, x, s)
            if isinstance(k, Unbounded) or as_dyadic(v).bit_length() > k + 2:
                return f"bit length of M′({x!r}, {s}) exceeds K+2"
            if 2 * v < inst.M.value(x, s):
                return f"M′({x!r}, {s}) < M/2"
            if v < previous.get(x, 0):
                return f"M′({x!r}) decreases at stage {s}"
            previous[x] = v
        if inst.mprime_staged.value("", s) > 1:
            return f"M′(ε) exceeds 1 at stage {s}"
    return None


@check("semimeasure", "complexity-antitone")
def _complexity_antitone(inst: ReductionInstance) -> Optional[str]:
    """Complexity never rises as the stages advance."""
    for x in inst.m.ordered_support():
        last = None
        for s in _stages(inst):
            k = complexity(inst.m, x, s)
            if isinstance(k, int):
                if last is not None and k > last:
                    return f"K({x!r}) grows at stage {s}"
                last = k
    return None


# pct

@check("pct", "exact-generation")
def _exact_generation(inst: ReductionInstance) -> Optional[str]:
    """λ(B(x, s)) = M′(x, s) at every stage."""
    for s in _stages(inst):
        generated = pushforward(inst.U, s)
        for x in inst.domain:
            if generated[x] != inst.mprime_staged.value(x, s):
                return f"λ(B({x!r}, {s})) = {generated[x]} ≠ M′ = {inst.mprime_staged.value(x, s)}"
    return None


@check("pct", "nesting")
def _nesting(inst: ReductionInstance) -> Optional[str]:
    """Children sit inside their parent's set."""
    for s in _stages(inst):
        for x in inst.domain:
            if x and not is_subset(inst.U.allocated(x, s), inst.U.allocated(x[:-1], s)):
                return f"B({x!r}, {s}) escapes its parent"
    return None


@check("pct", "disjoint-siblings")
def _disjoint_siblings(inst: ReductionInstance) -> Optional[str]:
    for s in _stages(inst):
        for x, y in _sibling_pairs(inst):
            if inst.U.allocated(x, s) & inst.U.allocated(y, s):
                return f"B({x!r}, {s}) meets B({y!r}, {s})"
    return None


@check("pct", "depth-bound")
def _depth_bound(inst: ReductionInstance) -> Optional[str]:
    """No cylinder of B(x) is deeper than t_level(|x|)."""
    for x in inst.domain:
        if inst.U.allocated(x, inst.stage).depth() > inst.bound.at(len(x)):
            return f"B({x!r}) is deeper than t_level({len(x)})"
    return None


@check("pct", "stage-monotone")
def _stage_monotone(inst: ReductionInstance) -> Optional[str]:
    """Allocated inputs are never taken back."""
    for x in inst.domain:
        previous = EMPTY
        for s in inst.U.stage_history(x):
            current = inst.U.allocated(x, s)
            if not is_subset(previous, current):
                return f"B({x!r}) loses inputs at stage {s}"
            previous = current
    return None


@check("pct", "deterministic-rebuild")
def _deterministic_rebuild(inst: ReductionInstance) -> Optional[str]:
    """Rebuilding the allocation gives the same sets."""
    if build_allocation(inst.mprime_staged, inst.bound) != inst.U:
        return "rebuilding the allocation gave a different result"
    return None


# mltest

@check("mltest", "expectation")
def _expectation(inst: ReductionInstance) -> Optional[str]:
    """τ(Ω) is the expectation of T and at most 1."""
    total = inst.test.expectation(inst.stage)
    if inst.test.tau_clopen(OMEGA, inst.stage) != total:
        return "τ(Ω) differs from the expectation"
    return None


@check("mltest", "markov-bound")
def _markov(inst: ReductionInstance) -> Optional[str]:
    """c·λ(fail region) is at most the expectation."""
    if measure(inst.fail) * inst.c > inst.test.expectation(inst.stage):
        return f"λ(fail region) = {measure(inst.fail)} exceeds expectation/c"
    return None


@check("mltest", "tau-additivity")
def _tau_additivity(inst: ReductionInstance) -> Optional[str]:
    """τ adds over disjoint siblings and obeys inclusion-exclusion on overlaps."""
    tau = inst.test.tau_clopen
    s = inst.stage
    for x, y in _sibling_pairs(inst):
        a, b = inst.U.allocated(x, s), inst.U.allocated(y, s)
        if tau(a | b, s) != tau(a, s) + tau(b, s):
            return f"τ not additive on B({x!r}), B({y!r})"
    # B(x) against each half of Ω, which it may straddle
    for x in inst.domain:
        a = inst.U.allocated(x, s)
        for half in ("0", "1"):
            b = cylinder(half)
            if tau(a | b, s) + tau(a & b, s) != tau(a, s) + tau(b, s):
                return f"inclusion-exclusion fails on B({x!r}) and {half}Ω"
    return None


@check("mltest", "integral-identity")
def _integral_identity(inst: ReductionInstance) -> Optional[str]:
    """Cell sum of T over B(ε) equals τ(B(ε)).

    T is constant on cylinders as deep as the support of m, so the sum is
    exact once the cells also refine B(ε).
    """
    a = inst.U.allocated("", inst.stage)
    test: ConcatTest = inst.test
    d = max(a.depth(), inst.m.max_length())
    riemann = sum((test.test_value(u, inst.stage) for u in a.cells(d)), Fraction(0))
    if riemann / (1 << d) != test.tau_clopen(a, inst.stage):
        return "cell sum of T differs from τ(B(ε))"
    return None


# reduction

@check("reduction", "dominance")
def _dominance(inst: ReductionInstance) -> Optional[str]:
    """τ(B(x)) < c·M′(x) for every supported x."""
    for x in inst.supported():
        if not inst.test.tau_clopen(inst.U.allocated(x, inst.stage), inst.stage) < inst.c * inst.mprime[x]:
            return f"τ(B({x!r})) ≥ c·M′({x!r})"
    return None


@check("reduction", "c-minimality")
def _c_minimality(inst: ReductionInstance) -> Optional[str]:
    """c/2 no longer dominates."""
    if inst.c == 1:
        return None
    half = Fraction(inst.c, 2)
    for x in inst.supported():
        if not inst.test.tau_clopen(inst.U.allocated(x, inst.stage), inst.stage) < half * inst.mprime[x]:
            return None
    return f"c/2 = {half} already dominates"


@check("reduction", "witnesses")
def _witnesses(inst: ReductionInstance) -> Optional[str]:
    bound = inst.test.expectation(inst.stage) / inst.c
    for x in inst.supported():
        witness = find_witness(inst, x)
        if measure(witness) < inst.mprime[x] - bound:
            return f"witness for {x!r} is smaller than the Markov bound allows"
    return None


@check("reduction", "chains")
def _chains(inst: ReductionInstance) -> Optional[str]:
    """Witnesses for successive prefixes are nested."""
    for a in inst.supported():
        verify_chain(inst, a)
    return None


@check("reduction", "round-trip")
def _round_trip(inst: ReductionInstance) -> Optional[str]:
    """Witness points decode back to their target and pass the test."""
    for a in inst.supported():
        w = witness_point(inst, a)
        if not decode(inst, w).startswith(a):
            return f"decode of the witness point for {a!r} does not extend it"
        if inst.test.test_value(w, inst.stage) > inst.c:
            return f"witness point for {a!r} fails the test"
        if not decode(inst, w[:inst.bound.at(len(a))]).startswith(a):
            return f"use bound t_level({len(a)}) is not enough for {a!r}"
    return None


def run_checks(inst: ReductionInstance) -> List[CheckResult]:
    results = []
    for module, name, fn in _CHECKS:
        try:
            detail = fn(inst)
        except (KforgeError, AssertionError) as exc:
            detail = str(exc) or type(exc).__name__
        results.append(CheckResult(module, name, detail is None, detail or ""))
        if detail is not None:
            logger.warning(f"check {module}.{name} failed: {detail}")
    passed = sum(r.passed for r in results)
    logger.info(f"{passed}/{len(results)} checks passed")
    return results
