"""Machine-readable run reports (schema ``tesc-report/1``).

Reports are reproducible bit-for-bit given identical inputs and seeds,
except for the timing fields, which are explicitly excluded from that
guarantee.
"""

from __future__ import annotations

import json
from importlib import resources
from typing import Any

from .engine import LevelOutcome

SCHEMA_VERSION = "tesc-report/1"


def level_outcome_to_dict(outcome: LevelOutcome) -> dict[str, Any]:
    record: dict[str, Any] = {"h": outcome.h, "status": outcome.status}
    if outcome.result is not None:
        record["result"] = outcome.result.to_dict()
    if outcome.error is not None:
        record["error"] = outcome.error
    if outcome.error_details is not None:
        record["details"] = outcome.error_details
    return record


def build_report(
    command: list[str],
    config: dict[str, Any],
    outcomes: list[LevelOutcome],
    tc: dict[str, Any] | None = None,
    warnings: list[str] | None = None,
) -> dict[str, Any]:
    return {
        "schema": SCHEMA_VERSION,
        "command": command,
        "config": config,
        "results": [level_outcome_to_dict(o) for o in outcomes],
        "transaction_correlation": tc,
        "warnings": warnings or [],
    }


def dump_report(report: dict[str, Any], fh) -> None:
    json.dump(report, fh, indent=2, sort_keys=False)
    fh.write("\n")


def load_schema() -> dict[str, Any]:
    with resources.files("tesc").joinpath("schemas/tesc-report-1.json").open("rb") as fh:
        return json.load(fh)
