"""
JSON loading and JSON Schema validation for fixture and export files.

Schemas live in ``kforge/schemas`` and are checked with Draft4Validator,
first the schema itself, then the instance.
"""

import json
from functools import lru_cache
from pathlib import Path
from typing import Any, Iterable, List, Union

from jsonschema import Draft4Validator
from jsonschema.exceptions import ValidationError

from .errors import FixtureError

SCHEMA_DIR = Path(__file__).parent / "schemas"


def get_json_from_file(filename: Union[str, Path]) -> Any:
    """Loads json from a file."""
    try:
        with open(filename, "r") as f:
            return json.load(f)
    except OSError as exc:
        raise FixtureError(f"cannot read file ({exc.strerror})", path=str(filename))
    except json.JSONDecodeError as exc:
        raise FixtureError(exc.msg, path=str(filename),
                           position=f"line {exc.lineno} column {exc.colno}")


@lru_cache(maxsize=None)
def get_validator(schema_name: str) -> Draft4Validator:
    """Load a packaged schema, check that it is a valid schema and wrap it."""
    schema = get_json_from_file(SCHEMA_DIR / schema_name)
    Draft4Validator.check_schema(schema)
    return Draft4Validator(schema)


def format_path(path: Iterable[Any]) -> str:
    """Render a JSON instance path as members[0].entries[2].x."""
    text = ""
    for part in path:
        if isinstance(part, int):
            text += f"[{part}]"
        else:
            text += f".{part}" if text else str(part)
    return text or "<root>"


def collect_errors(errors: Iterable[ValidationError], level: int = 0) -> List[str]:
    """Recurse through errors and their context, keeping message and path."""
    messages: List[str] = []
    for e in errors:
        messages.append("  " * level + f"{format_path(e.absolute_path)}: {e.message}")
        if e.context:
            messages.extend(collect_errors(e.context, level + 1))
    return messages


def validate(instance: Any, schema_name: str, filename: str = "") -> None:
    """Raise FixtureError at the first schema error of ``instance``."""
    validator = get_validator(schema_name)
    errors = sorted(validator.iter_errors(instance),
                    key=lambda e: (len(e.absolute_path), format_path(e.absolute_path)))
    if errors:
        first = errors[0]
        detail = "; ".join(collect_errors([first]))
        raise FixtureError(f"schema violation ({detail})", path=filename or None,
                           position=format_path(first.absolute_path))
