#!/usr/bin/env python3
"""
Seeded generators for random fixture families.
Provides a base class and the two concrete generators used by the property
tests and by src/fixtures/generate.py.
"""

import random
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Dict, List, Optional, Set, Tuple, Union

from .cantor import BitString, Dyadic, length_lex_key
from .fixtures import family_to_json, write_json
from .pct import LevelBound
from .semimeasure import Staged, StagedDistribution, StagedSemimeasure


def random_tree(rng: random.Random, max_depth: int, max_size: int,
                within: Optional[Set[BitString]] = None) -> List[BitString]:
    """Random prefix-closed set of strings containing ε, in length-lex order.

    Each child is kept with probability 3/4; ``within`` restricts the strings
    that may appear.
    """
    tree = [""]
    frontier = [""]
    while frontier and len(tree) < max_size:
        x = frontier.pop(0)
        if len(x) >= max_depth:
            continue
        for bit in "01":
            child = x + bit
            if within is not None and child not in within:
                continue
            if len(tree) < max_size and rng.randrange(4) < 3:
                tree.append(child)
                frontier.append(child)
    return sorted(tree, key=length_lex_key)


class FixtureGenerator(ABC):
    """Abstract base class for family generators."""

    kind = ""

    def __init__(self, seed: int = 0, max_depth: int = 4, max_size: int = 15,
                 stages: int = 3) -> None:
        self.rng = random.Random(seed)
        self.max_depth = max_depth
        self.max_size = max_size
        self.stages = stages

    @abstractmethod
    def generate_member(self, member_id: str) -> Staged:
        """Return one valid staged member."""
        pass

    def generate_family(self, size: int, prefix: str = "g") -> List[Staged]:
        return [self.generate_member(f"{prefix}{i}") for i in range(1, size + 1)]

    def write_family(self, path: Union[str, Path], size: int,
                     description: Optional[str] = None) -> str:
        """Generate a family and write it as a fixture file."""
        members = self.generate_family(size)
        return write_json(family_to_json(self.kind, members, description), path)


class DistributionGenerator(FixtureGenerator):
    """Distributions with parent-first positivity.

    Every string becomes positive no earlier than its parent, so the positive
    support is prefix-closed at every stage. Values are powers of two no larger
    than 2^-5, which keeps the mass at most 1 for up to 32 strings.
    """

    kind = "distribution"

    def __init__(self, seed: int = 0, max_depth: int = 4, max_size: int = 15,
                 stages: int = 3) -> None:
        super().__init__(seed, max_depth, min(max_size, 32), stages)

    def generate_member(self, member_id: str) -> StagedDistribution:
        first: Dict[BitString, int] = {}
        histories: Dict[BitString, List[Tuple[int, Dyadic]]] = {}
        last = self.stages - 1
        for x in random_tree(self.rng, self.max_depth, self.max_size):
            start = 0 if not x else min(first[x[:-1]] + self.rng.randrange(2), last)
            first[x] = start
            value = Dyadic(1, 1 << self.rng.randint(5, 9))
            if start < last and self.rng.randrange(2):
                later = self.rng.randint(start + 1, last)
                histories[x] = [(start, value * Dyadic(1, 2)), (later, value)]
            else:
                histories[x] = [(start, value)]
        return StagedDistribution(histories, s_max=last, member_id=member_id)


class SemimeasureGenerator(FixtureGenerator):
    """Semimeasures grown top-down, stage by stage.

    At each stage every string may grow by a random multiple of
    2^-t_level(|x|) within the room its parent leaves beside its sibling, so
    superadditivity and the bit budget hold at every stage.
    """

    kind = "semimeasure"

    def __init__(self, seed: int = 0, max_depth: int = 4, max_size: int = 15,
                 stages: int = 3, bound: Optional[LevelBound] = None,
                 within: Optional[Set[BitString]] = None) -> None:
        super().__init__(seed, max_depth, max_size, stages)
        self.within = within
        if bound is None:
            bound = LevelBound.from_raw([n + 2 + self.rng.randrange(3)
                                         for n in range(max_depth + 1)])
        self.bound = bound

    def generate_member(self, member_id: str) -> StagedSemimeasure:
        tree = random_tree(self.rng, self.max_depth, self.max_size, self.within)
        current: Dict[BitString, Dyadic] = {x: Dyadic(0) for x in tree}
        snapshots = []
        for s in range(self.stages):
            for x in tree:
                if s and self.rng.randrange(3):
                    continue
                if x:
                    sibling = x[:-1] + ("1" if x[-1] == "0" else "0")
                    room = current[x[:-1]] - current.get(sibling, Dyadic(0)) - current[x]
                else:
                    room = 1 - current[x]
                grid = 1 << self.bound.at(len(x))
                steps = int(room * grid)
                least = 1 if not (s or x) else 0
                current[x] = current[x] + Dyadic(self.rng.randint(least, steps), grid)
            snapshots.append(dict(current))
        member = StagedSemimeasure.from_snapshots(snapshots, member_id=member_id)
        assert isinstance(member, StagedSemimeasure)
        return member


def random_instance_families(seed: int, members: int = 2, max_depth: int = 4,
                             max_size: int = 15, stages: int = 3
                             ) -> Tuple[List[Staged], List[Staged]]:
    """Distribution and semimeasure families whose supports share one cone."""
    family_s = DistributionGenerator(seed, max_depth, max_size, stages).generate_family(members)
    cone: Set[BitString] = set()
    for m in family_s:
        cone.update(m.support)
    omega = SemimeasureGenerator(seed + 1, max_depth, max_size, stages,
                                 bound=LevelBound((max_depth + 4,)), within=cone)
    return family_s, omega.generate_family(members, prefix="P")
