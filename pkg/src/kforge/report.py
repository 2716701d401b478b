#!/usr/bin/env python3
"""
Tabular reports over a built instance, written as CSV.
Used by the CLI for ``--format csv`` and by ``kforge build --report``.
"""

import json
from pathlib import Path
from typing import Iterable, Mapping, Union

import pandas as pd

from .cantor import BitString, Rational, format_value, length_lex_key, measure
from .checks import CheckResult
from .errors import FixtureError
from .pct import Allocation
from .reduction import ReductionInstance, witness_summaries


def witness_table(inst: ReductionInstance) -> pd.DataFrame:
    """One row per supported target with its witness summary."""
    rows = []
    for summary in witness_summaries(inst):
        row = summary.to_json()
        row["witness"] = json.dumps(row["witness"])
        rows.append(row)
    columns = ["x", "K", "mprime", "tau", "witness", "witness_measure", "point"]
    return pd.DataFrame(rows, columns=columns)


def checks_table(results: Iterable[CheckResult]) -> pd.DataFrame:
    rows = [{"module": r.module, "name": r.name, "passed": r.passed, "detail": r.detail}
            for r in results]
    return pd.DataFrame(rows, columns=["module", "name", "passed", "detail"])


def snapshot_table(snapshot: Mapping[BitString, Rational]) -> pd.DataFrame:
    rows = [{"x": x, "value": format_value(snapshot[x])}
            for x in sorted(snapshot, key=length_lex_key)]
    return pd.DataFrame(rows, columns=["x", "value"])


def allocation_table(A: Allocation, s: int) -> pd.DataFrame:
    rows = []
    for x in A.domain:
        b = A.allocated(x, s)
        rows.append({"x": x, "B": json.dumps(b.to_list()), "measure": format_value(measure(b)),
                     "depth": b.depth(), "t_level": A.bound.at(len(x))})
    return pd.DataFrame(rows, columns=["x", "B", "measure", "depth", "t_level"])


def to_csv_text(df: pd.DataFrame) -> str:
    """CSV text with "\\n" line endings on every platform."""
    return df.to_csv(index=False, lineterminator="\n")


def write_report(df: pd.DataFrame, output_file: Union[str, Path]) -> str:
    """Write a report table to CSV, creating parent directories."""
    out = Path(output_file)
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8", newline="") as f:
            f.write(to_csv_text(df))
    except OSError as exc:
        raise FixtureError(f"cannot write report ({exc.strerror})", path=str(out))
    return str(out)
