"""
Reduction of any target string to a test-passing input.

Builds U with U(λ) = M′ from the two fixture families, computes the
dominance constant c with τ(B(x)) < c·M′(x) on the whole domain, and, for a
target x, returns the part of U⁻¹(xΩ) = B(x) that avoids the fail region
{T > c}. The strict inequality is what keeps that part nonempty: if B(x)
lay inside {T > c}, τ(B(x)) would exceed c·λ(B(x)) = c·M′(x).
"""

import logging
import os
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from .cantor import (BitString, ClopenSet, Dyadic, format_value, is_subset,
                     measure, parse_bits, prefixes)
from .errors import DomainError, FixtureError, InvariantViolation
from .fixtures import file_digest, load_family, load_instance_export
from .mltest import ConcatTest
from .pct import Allocation, LevelBound, apply, build_allocation
from .semimeasure import (StagedDistribution, StagedSemimeasure, Unbounded,
                          complexity, mixture, replay_round_up,
                          round_up_domain, round_up_monotone)

logger = logging.getLogger(__name__)

EXPORT_FORMAT = "kforge-instance"
EXPORT_VERSION = 1


@dataclass(frozen=True)
class WitnessSummary:
    x: BitString
    complexity: int
    mprime: Dyadic
    tau: Fraction
    witness: ClopenSet
    point: BitString

    def to_json(self) -> Dict[str, Any]:
        return {
            "x": self.x,
            "K": self.complexity,
            "mprime": format_value(self.mprime),
            "tau": format_value(self.tau),
            "witness": self.witness.to_list(),
            "witness_measure": format_value(measure(self.witness)),
            "point": self.point,
        }


@dataclass(frozen=True, eq=False)
class ReductionInstance:
    """Everything the reduction needs, frozen at the final stage."""

    family_s: Tuple[StagedDistribution, ...]
    family_omega: Tuple[StagedSemimeasure, ...]
    m: StagedDistribution
    M: StagedSemimeasure
    mprime_staged: StagedSemimeasure
    mprime: Dict[BitString, Dyadic]
    bound: LevelBound
    U: Allocation
    c: int
    stage: int
    depth: int
    test: ConcatTest
    fail: ClopenSet
    sources: Dict[str, Dict[str, str]] = field(default_factory=dict)

    @property
    def domain(self) -> Tuple[BitString, ...]:
        return self.U.domain

    def supported(self) -> List[BitString]:
        """Domain strings with M′(x) > 0, the valid reduction targets."""
        return [x for x in self.U.domain if self.mprime.get(x, 0) > 0]

    def fail_region_at(self, depth: Optional[int] = None) -> ClopenSet:
        if depth is None or depth == self.depth:
            return self.fail
        if depth < self.depth:
            raise DomainError(f"depth {depth} is below the exactness depth {self.depth}")
        return self.test.fail_region(self.c, self.stage, depth)


def level_bound_for(m: StagedDistribution, stage: int) -> LevelBound:
    """t_level(n) = max K_s(x)+3 over stages s ≤ stage and |x| = n."""
    raw: Dict[int, int] = {}
    for s in m.event_stages():
        if s > stage:
            break
        for x in round_up_domain(m, s):
            k = complexity(m, x, s)
            if isinstance(k, Unbounded):
                raise DomainError(f"complexity undefined, cannot set grid: m({x!r}, {s}) = 0")
            raw[len(x)] = max(raw.get(len(x), 0), k + 3)
    if not raw:
        raise DomainError("empty support")
    return LevelBound.from_raw([raw.get(n, 1) for n in range(max(raw) + 1)])


def _smallest_dominating_power(U: Allocation, test: ConcatTest,
                               mprime: Dict[BitString, Dyadic], stage: int) -> int:
    c = 1
    for x in U.domain:
        value = mprime.get(x, Dyadic(0))
        tau = test.tau_clopen(U.allocated(x, stage), stage)
        if value == 0:
            if tau > 0:
                raise InvariantViolation(f"M′({x!r}) = 0 but τ(B({x!r})) = {tau}")
            continue
        while not tau < c * value:
            c *= 2
    return c


def build_instance(family_s: Sequence[StagedDistribution],
                   family_omega: Sequence[StagedSemimeasure],
                   sources: Optional[Dict[str, Dict[str, str]]] = None) -> ReductionInstance:
    """Assemble m, M, M′, t_level, U and c from the two families."""
    m = mixture(family_s)
    M = mixture(family_omega)
    if not isinstance(m, StagedDistribution) or not isinstance(M, StagedSemimeasure):
        raise DomainError("family_S must hold distributions and family_Omega semimeasures")
    stage = max(m.s_max, M.s_max)
    if not m.positive_support(stage) or not M.positive_support(stage):
        raise DomainError("empty support")

    mprime_staged = replay_round_up(M, m)
    mprime = round_up_monotone(M, m, stage)
    bound = level_bound_for(m, stage)
    U = build_allocation(mprime_staged, bound)
    test = ConcatTest(m)
    c = _smallest_dominating_power(U, test, mprime, stage)
    depth = max(max(bound.levels), m.max_length())
    fail = test.fail_region(c, stage, depth)
    logger.info(f"instance built: {len(U.domain)} domain strings, "
                f"t_level={bound.to_list()}, c={c}, depth={depth}")
    return ReductionInstance(
        family_s=tuple(family_s), family_omega=tuple(family_omega), m=m, M=M,
        mprime_staged=mprime_staged, mprime=mprime, bound=bound, U=U, c=c,
        stage=stage, depth=depth, test=test, fail=fail, sources=dict(sources or {}))


def build_instance_from_files(path_s: Union[str, Path],
                              path_omega: Union[str, Path]) -> ReductionInstance:
    family_s = load_family(path_s)
    family_omega = load_family(path_omega)
    if family_s.kind != "distribution":
        raise DomainError(f"{path_s}: family_S must be a distribution family")
    if family_omega.kind != "semimeasure":
        raise DomainError(f"{path_omega}: family_Omega must be a semimeasure family")
    sources = {
        "family_s": {"path": str(Path(path_s).resolve()), "sha256": family_s.digest or ""},
        "family_omega": {"path": str(Path(path_omega).resolve()),
                         "sha256": family_omega.digest or ""},
    }
    return build_instance(family_s.members, family_omega.members, sources)  # type: ignore[arg-type]


def dominance_c(inst: ReductionInstance) -> int:
    """Smallest power of two c ≥ 1 with τ(B(x)) < c·M′(x) on the domain."""
    return _smallest_dominating_power(inst.U, inst.test, inst.mprime, inst.stage)


def find_witness(inst: ReductionInstance, x: BitString,
                 depth: Optional[int] = None) -> ClopenSet:
    """B(x) ∖ {T > c}: inputs mapping into xΩ that pass the test."""
    parse_bits(x)
    if x not in inst.U:
        raise DomainError(f"{x!r} is outside the domain")
    if inst.mprime.get(x, 0) == 0:
        raise DomainError(f"M′({x!r}) = 0: no inputs map into {x!r}")
    witness = inst.U.allocated(x, inst.stage) - inst.fail_region_at(depth)
    if not witness:
        raise InvariantViolation(f"dominance invariant violated: B({x!r}) lies in the fail region")
    return witness


def verify_chain(inst: ReductionInstance, a: BitString,
                 depth: Optional[int] = None) -> List[Tuple[BitString, ClopenSet]]:
    """Witness sets for every prefix of a, each nested in the previous one."""
    parse_bits(a)
    for p in prefixes(a):
        if p not in inst.U or inst.mprime.get(p, 0) == 0:
            raise DomainError(f"target not in supported cone: {p!r}")
    chain = [(p, find_witness(inst, p, depth)) for p in prefixes(a)]
    for (p, outer), (q, inner) in zip(chain, chain[1:]):
        if not is_subset(inner, outer):
            raise InvariantViolation(f"witness for {q!r} is not nested in the one for {p!r}")
    return chain


def witness_point(inst: ReductionInstance, a: BitString,
                  depth: Optional[int] = None) -> BitString:
    """Leftmost deepest cylinder of the last set in a's chain."""
    return verify_chain(inst, a, depth)[-1][1].leftmost_deepest()


def decode(inst: ReductionInstance, beta_prefix: BitString) -> BitString:
    """Output certified by U for the input prefix beta_prefix."""
    return apply(inst.U, beta_prefix, inst.stage)


def witness_summaries(inst: ReductionInstance) -> List[WitnessSummary]:
    summaries = []
    for x in inst.supported():
        witness = find_witness(inst, x)
        k = complexity(inst.m, x, inst.stage)
        assert isinstance(k, int)
        summaries.append(WitnessSummary(
            x=x, complexity=k, mprime=inst.mprime[x],
            tau=inst.test.tau_clopen(inst.U.allocated(x, inst.stage), inst.stage),
            witness=witness, point=witness.leftmost_deepest()))
    return summaries


def instance_to_json(inst: ReductionInstance,
                     out_path: Optional[Union[str, Path]] = None) -> Dict[str, Any]:
    """Export dict; fixture paths are made relative to the export's directory."""
    data: Dict[str, Any] = {
        "format": EXPORT_FORMAT,
        "version": EXPORT_VERSION,
        "stages": inst.stage,
        "depth": inst.depth,
        "t_level": inst.bound.to_list(),
        "c": inst.c,
        "witnesses": [summary.to_json() for summary in witness_summaries(inst)],
    }
    if inst.sources:
        base = Path(out_path).resolve().parent if out_path else Path.cwd()
        data["fixtures"] = {
            key: {"path": Path(os.path.relpath(src["path"], base)).as_posix(),
                  "sha256": src["sha256"]}
            for key, src in sorted(inst.sources.items())
        }
    return data


def load_instance(path: Union[str, Path],
                  strict: bool = True) -> Tuple[ReductionInstance, Dict[str, Any]]:
    """Rebuild the instance behind an export and check it still matches.

    Digests must match the fixture files. With ``strict`` the rebuilt c and
    t_level must also equal the exported ones.
    """
    data = load_instance_export(path)
    if "fixtures" not in data:
        raise FixtureError("export carries no fixture sources", path=str(path))
    base = Path(path).resolve().parent
    resolved = {}
    for key in ("family_s", "family_omega"):
        source = base / data["fixtures"][key]["path"]
        if file_digest(source) != data["fixtures"][key]["sha256"]:
            raise FixtureError(f"fixture digest mismatch for {key}", path=str(source))
        resolved[key] = source
    inst = build_instance_from_files(resolved["family_s"], resolved["family_omega"])
    if strict and (inst.c != data["c"] or inst.bound.to_list() != data["t_level"]):
        raise InvariantViolation("export disagrees with the rebuilt instance (c or t_level)")
    return inst, data
