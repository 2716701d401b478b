#!/usr/bin/env python3
"""
Writes a seeded random fixture pair (family_s.json, family_omega.json).
The pair always builds: both families share one support cone.
"""

import argparse
from pathlib import Path

from kforge.fixture_generator import random_instance_families
from kforge.fixtures import family_to_json, write_json


def main() -> None:
    """Generate one random fixture pair."""
    parser = argparse.ArgumentParser(description="Generate a random kforge fixture pair")
    parser.add_argument("--seed", type=int, default=0, help="Random seed")
    parser.add_argument("--members", type=int, default=2, help="Members per family")
    parser.add_argument("--max-depth", type=int, default=4, help="Longest string length")
    parser.add_argument("--stages", type=int, default=3, help="Number of stages")
    parser.add_argument("--out-dir", default=None,
                        help="Output directory (default: src/fixtures/random_<seed>)")
    args = parser.parse_args()

    out_dir = Path(args.out_dir or Path(__file__).parent / f"random_{args.seed}")
    family_s, family_omega = random_instance_families(
        args.seed, members=args.members, max_depth=args.max_depth, stages=args.stages)
    note = f"generated with seed {args.seed}"
    print(f"Generated: {write_json(family_to_json('distribution', family_s, note), out_dir / 'family_s.json')}")
    print(f"Generated: {write_json(family_to_json('semimeasure', family_omega, note), out_dir / 'family_omega.json')}")


if __name__ == "__main__":
    main()
