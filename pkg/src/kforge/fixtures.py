"""
Fixture files: families of staged distributions or semimeasures as JSON.

    { "kind": "distribution" | "semimeasure",
      "members": [ { "id": str, "entries": [
          { "x": bitstring, "stages": [[stage, "n/2^k"], ...] } ] } ] }

Stage values are sparse; the value at stage s is the last value listed with
index ≤ s. Every value in a fixture must be dyadic.
"""

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from .cantor import format_value, is_dyadic, parse_value
from .errors import DomainError, FixtureError
from .schema_tools import get_json_from_file, validate
from .semimeasure import Staged, StagedDistribution, StagedSemimeasure

logger = logging.getLogger(__name__)

KINDS = {"distribution": StagedDistribution, "semimeasure": StagedSemimeasure}


@dataclass(frozen=True)
class Family:
    """An ordered, single-kind list of staged members read from one file."""

    kind: str
    members: Tuple[Staged, ...]
    path: Optional[str] = None
    digest: Optional[str] = None

    @property
    def s_max(self) -> int:
        return max((member.s_max for member in self.members), default=0)


def file_digest(path: Union[str, Path]) -> str:
    """sha256 of the file bytes."""
    try:
        return hashlib.sha256(Path(path).read_bytes()).hexdigest()
    except OSError as exc:
        raise FixtureError(f"cannot read file ({exc.strerror})", path=str(path))


def parse_family(data: Any, filename: str = "") -> Family:
    """Turn already-decoded fixture JSON into a Family."""
    validate(data, "family.schema.json", filename)
    cls = KINDS[data["kind"]]
    members: List[Staged] = []
    for i, raw in enumerate(data["members"]):
        histories: Dict[str, List[Tuple[int, Any]]] = {}
        for j, entry in enumerate(raw["entries"]):
            x = entry["x"]
            if x in histories:
                raise FixtureError(f"duplicate entry for {x!r}", path=filename or None,
                                   position=f"members[{i}].entries[{j}]")
            history = []
            for k, (stage, text) in enumerate(entry["stages"]):
                position = f"members[{i}].entries[{j}].stages[{k}]"
                try:
                    value = parse_value(text)
                except ValueError as exc:
                    raise FixtureError(str(exc), path=filename or None, position=position)
                if not is_dyadic(value):
                    raise FixtureError(f"non-dyadic value {text!r}", path=filename or None,
                                       position=position)
                history.append((stage, value))
            histories[x] = history
        try:
            members.append(cls(histories, s_max=raw.get("s_max"), member_id=raw["id"]))
        except DomainError as exc:
            raise FixtureError(str(exc), path=filename or None, position=f"members[{i}]")
    logger.debug(f"parsed {len(members)} {data['kind']} member(s) "
                 f"from {filename or '<memory>'}")
    return Family(data["kind"], tuple(members), path=filename or None)


def load_family(path: Union[str, Path]) -> Family:
    """Read, schema-check and parse a fixture file."""
    data = get_json_from_file(path)
    family = parse_family(data, str(path))
    return Family(family.kind, family.members, path=str(path), digest=file_digest(path))


def member_to_json(member: Staged) -> Dict[str, Any]:
    entries = []
    for x in member.ordered_support():
        entries.append({"x": x, "stages": [[s, format_value(v)] for s, v in member.history(x)]})
    return {"id": member.member_id, "s_max": member.s_max, "entries": entries}


def family_to_json(kind: str, members: Sequence[Staged],
                   description: Optional[str] = None) -> Dict[str, Any]:
    data: Dict[str, Any] = {"kind": kind, "members": [member_to_json(m) for m in members]}
    if description:
        data["description"] = description
    return data


def dump_json(data: Any) -> str:
    """Deterministic JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(data: Any, path: Union[str, Path]) -> str:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    try:
        with open(out, "w", encoding="utf-8", newline="\n") as f:
            f.write(dump_json(data))
    except OSError as exc:
        raise FixtureError(f"cannot write file ({exc.strerror})", path=str(out))
    return str(out)


def load_instance_export(path: Union[str, Path]) -> Dict[str, Any]:
    """Read and schema-check an instance export written by ``kforge build``."""
    data = get_json_from_file(path)
    validate(data, "instance.schema.json", str(path))
    return data
