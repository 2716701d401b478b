#!/usr/bin/env python3
"""
Command line front door: fixture ingestion and one subcommand per operation.

Results go to stdout (or --out) as exact text, JSON or CSV; logs go to stderr.
Exit codes: 0 ok, 1 domain or invariant failure, 2 unreadable or malformed input.
"""

import argparse
import json
import logging
import sys
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence

import pandas as pd

from . import __version__
from .cantor import (ClopenSet, format_value, length_lex_key, parse_bits,
                     parse_value)
from .checks import run_checks
from .errors import DomainError, FixtureError, KforgeError
from .fixtures import dump_json, load_family, write_json
from .logging_utils import setup_logging
from .pct import apply, preimage_clopen
from .reduction import (ReductionInstance, build_instance_from_files, decode,
                        dominance_c, find_witness, instance_to_json,
                        load_instance, verify_chain)
from .report import (checks_table, snapshot_table, to_csv_text, witness_table,
                     write_report)
from .semimeasure import Snapshot, mixture, round_up_monotone, validate
from .settings import Settings, load_settings, resolve_depth

logger = logging.getLogger("kforge.cli")

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_INPUT = 2


class Output:
    """A command result in its three renderings."""

    def __init__(self, result: Any, text: str,
                 table: Optional[pd.DataFrame] = None) -> None:
        self.result = result
        self.text = text
        self.table = table


def _clopen_text(a: ClopenSet) -> str:
    return json.dumps(a.to_list())


def _snapshot_output(snapshot: Snapshot, stage: int) -> Output:
    ordered = sorted(snapshot, key=length_lex_key)
    text = "\n".join(f"{x}\t{format_value(snapshot[x])}" for x in ordered)
    result = {"stage": stage, "values": {x: format_value(snapshot[x]) for x in ordered}}
    return Output(result, text, snapshot_table(snapshot))


def _select_stage(requested: Optional[int], s_max: int) -> int:
    if requested is None:
        return s_max
    if not 0 <= requested <= s_max:
        raise DomainError(f"stage {requested} outside 0..{s_max}")
    return requested


def _parse_set(text: str) -> List[str]:
    try:
        strings = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FixtureError(f"--set is not JSON: {exc.msg}")
    if not isinstance(strings, list) or not all(isinstance(x, str) for x in strings):
        raise FixtureError("--set must be a JSON list of bit strings")
    try:
        return [parse_bits(x) for x in strings]
    except ValueError as exc:
        raise FixtureError(f"--set: {exc}")


def _bits(text: str) -> str:
    try:
        return parse_bits(text)
    except ValueError as exc:
        raise FixtureError(str(exc))


def _threshold(text: str) -> Fraction:
    try:
        return parse_value(text)
    except ValueError as exc:
        raise FixtureError(f"--c: {exc}")


# Commands over fixture files

def cmd_validate(args: argparse.Namespace, settings: Settings) -> Output:
    """Check every member of a family; exit 1 if any is invalid."""
    family = load_family(args.path)
    lines = []
    failed = False
    for member in family.members:
        report = validate(member)
        lines.append(f"{member.member_id}: {report}")
        failed = failed or not report
    result = {"kind": family.kind, "valid": not failed, "members": lines}
    if failed:
        args.exit_code = EXIT_DOMAIN
        return Output(result, "\n".join(lines))
    return Output(result, "valid")


def cmd_mixture(args: argparse.Namespace, settings: Settings) -> Output:
    """Mixture of a family at a stage."""
    family = load_family(args.path)
    mixed = mixture(family.members)
    stage = _select_stage(args.stage, mixed.s_max)
    return _snapshot_output(mixed.snapshot(stage), stage)


def cmd_round_up(args: argparse.Namespace, settings: Settings) -> Output:
    """M′ from the two families at a stage."""
    family_s = load_family(args.family_s)
    family_omega = load_family(args.family_omega)
    m, M = mixture(family_s.members), mixture(family_omega.members)
    stage = _select_stage(args.stage, max(m.s_max, M.s_max))
    return _snapshot_output(round_up_monotone(M, m, stage), stage)  # type: ignore[arg-type]


def cmd_build(args: argparse.Namespace, settings: Settings) -> Output:
    """Build the full instance, export it and optionally write the witness report."""
    inst = build_instance_from_files(args.family_s, args.family_omega)
    write_json(instance_to_json(inst, args.export), args.export)
    if args.report:
        write_report(witness_table(inst), args.report)
    t_level = inst.bound.to_list()
    text = f"c = {inst.c}\nt_level = {t_level}"
    return Output({"c": inst.c, "t_level": t_level}, text)


# Queries over an instance export

def _instance(args: argparse.Namespace) -> ReductionInstance:
    inst, _ = load_instance(args.instance)
    return inst


def cmd_apply(args: argparse.Namespace, settings: Settings) -> Output:
    """Output of the allocation on an input prefix."""
    inst = _instance(args)
    out = apply(inst.U, _bits(args.alpha), _select_stage(args.stage, inst.stage))
    return Output(out, out)


def cmd_preimage(args: argparse.Namespace, settings: Settings) -> Output:
    """Union of B(x) over the given strings."""
    inst = _instance(args)
    a = preimage_clopen(inst.U, _parse_set(args.set), _select_stage(args.stage, inst.stage))
    return Output(a.to_list(), _clopen_text(a))


def cmd_witness(args: argparse.Namespace, settings: Settings) -> Output:
    """Inputs that map into xΩ and pass the test at threshold c."""
    inst = _instance(args)
    depth = resolve_depth(args.depth, inst.depth, settings)
    a = find_witness(inst, _bits(args.x), depth)
    return Output(a.to_list(), _clopen_text(a))


def cmd_chain(args: argparse.Namespace, settings: Settings) -> Output:
    """Nested witnesses for each prefix of a, then the point they share."""
    inst = _instance(args)
    depth = resolve_depth(args.depth, inst.depth, settings)
    chain = verify_chain(inst, _bits(args.a), depth)
    point = chain[-1][1].leftmost_deepest()
    lines = [f"{p}\t{_clopen_text(c)}" for p, c in chain] + [f"point\t{point}"]
    result = {"chain": [{"prefix": p, "set": c.to_list()} for p, c in chain], "point": point}
    return Output(result, "\n".join(lines))


def cmd_decode(args: argparse.Namespace, settings: Settings) -> Output:
    inst = _instance(args)
    out = decode(inst, _bits(args.beta))
    return Output(out, out)


def cmd_tau(args: argparse.Namespace, settings: Settings) -> Output:
    """τ of a clopen set."""
    inst = _instance(args)
    value = inst.test.tau_clopen(ClopenSet(_parse_set(args.set)),
                                 _select_stage(args.stage, inst.stage))
    return Output(format_value(value), format_value(value))


def cmd_test_value(args: argparse.Namespace, settings: Settings) -> Output:
    """T on the cylinder of beta."""
    inst = _instance(args)
    value = inst.test.test_value(_bits(args.beta), _select_stage(args.stage, inst.stage))
    return Output(format_value(value), format_value(value))


def cmd_fail_region(args: argparse.Namespace, settings: Settings) -> Output:
    """Inputs whose test value exceeds c, at the resolved depth."""
    inst = _instance(args)
    stage = _select_stage(args.stage, inst.stage)
    depth = resolve_depth(args.depth, inst.depth, settings)
    c = inst.c if args.c is None else _threshold(args.c)
    a = inst.test.fail_region(c, stage, depth)
    return Output(a.to_list(), _clopen_text(a))


def cmd_dominance(args: argparse.Namespace, settings: Settings) -> Output:
    """Smallest power of two dominating τ(B(x)) by M′(x), with the per-string table."""
    inst = _instance(args)
    c = dominance_c(inst)
    return Output(c, str(c), witness_table(inst))


def cmd_verify(args: argparse.Namespace, settings: Settings) -> Output:
    """Run the invariant suite; exit 1 if any check fails."""
    inst = _instance(args)
    results = run_checks(inst)
    passed = sum(r.passed for r in results)
    if passed < len(results):
        args.exit_code = EXIT_DOMAIN
    lines = [str(r) for r in results] + [f"{passed}/{len(results)} checks passed"]
    result = [{"module": r.module, "name": r.name, "passed": r.passed, "detail": r.detail}
              for r in results]
    return Output(result, "\n".join(lines), checks_table(results))


COMMANDS: Dict[str, Callable[[argparse.Namespace, Settings], Output]] = {
    "validate": cmd_validate,
    "mixture": cmd_mixture,
    "round-up": cmd_round_up,
    "build": cmd_build,
    "apply": cmd_apply,
    "preimage": cmd_preimage,
    "witness": cmd_witness,
    "chain": cmd_chain,
    "decode": cmd_decode,
    "tau": cmd_tau,
    "test-value": cmd_test_value,
    "fail-region": cmd_fail_region,
    "dominance": cmd_dominance,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["text", "json", "csv"], default=None,
                        help="Output format (default from config)")
    common.add_argument("--out", help="Write the result here instead of stdout")
    common.add_argument("--config", help="YAML settings file (also KFORGE_CONFIG)")
    common.add_argument("--log-file", help="Also write timestamped logs to this file")
    common.add_argument("--verbose", action="store_true", help="Log at DEBUG level")

    parser = argparse.ArgumentParser(
        prog="kforge", description="Exact finite-stage reductions to test-passing inputs")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, parents=[common], help=help_text)

    p = add("validate", "Check every member of a fixture family")
    p.add_argument("path")

    p = add("mixture", "Print the weighted mixture of a family at a stage")
    p.add_argument("path")
    p.add_argument("--stage", type=int)

    for name, help_text in (("round-up", "Print the rounded-up semimeasure M′ at a stage"),
                            ("build", "Build a reduction instance and write its export")):
        p = add(name, help_text)
        p.add_argument("--family-s", required=True, help="Distribution family (S)")
        p.add_argument("--family-omega", required=True, help="Semimeasure family (Ω)")
        if name == "round-up":
            p.add_argument("--stage", type=int)
        else:
            p.add_argument("--export", required=True, help="Instance export path")
            p.add_argument("--report", help="Also write the witness table as CSV")

    def query(name: str, help_text: str, staged: bool = False,
              deep: bool = False) -> argparse.ArgumentParser:
        p = add(name, help_text)
        p.add_argument("--instance", required=True, help="Instance export from `build`")
        if staged:
            p.add_argument("--stage", type=int)
        if deep:
            p.add_argument("--depth", type=int)
        return p

    query("apply", "Certified output for an input prefix", staged=True).add_argument(
        "--alpha", required=True)
    query("preimage", "Union of B(x) over a list of strings", staged=True).add_argument(
        "--set", required=True, help="JSON list of bit strings")
    query("witness", "Test-passing inputs mapping into xΩ", deep=True).add_argument(
        "--x", required=True)
    query("chain", "Nested witnesses for every prefix of a", deep=True).add_argument(
        "--a", required=True)
    query("decode", "Output certified for an input prefix").add_argument(
        "--beta", required=True)
    query("tau", "τ of a clopen set", staged=True).add_argument(
        "--set", required=True, help="JSON list of bit strings")
    query("test-value", "T on a cylinder", staged=True).add_argument(
        "--beta", required=True)
    query("fail-region", "Clopen set where T exceeds c", staged=True, deep=True).add_argument(
        "--c", help="Threshold, zero or a power of two (default: the instance's c)")
    query("dominance", "Recompute the dominance constant c")
    query("verify", "Run the full invariant suite")
    return parser


def render(output: Output, command: str, fmt: str) -> str:
    if fmt == "json":
        return dump_json({"command": command, "result": output.result})
    if fmt == "csv":
        if output.table is not None:
            return to_csv_text(output.table)
        logger.warning(f"{command} has no table form; writing text")
    return output.text + "\n"


def run(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    args.exit_code = EXIT_OK
    try:
        settings = load_settings(args.config)
        setup_logging(args.log_file, "DEBUG" if args.verbose else settings.log_level)
        output = COMMANDS[args.command](args, settings)
        body = render(output, args.command, args.format or settings.format)
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as f:
                f.write(body)
        else:
            sys.stdout.write(body)
    except FixtureError as exc:
        logger.debug("input error", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except KforgeError as exc:
        logger.debug("domain error", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return args.exit_code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
