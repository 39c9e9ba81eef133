# scripts/report.py
"""The versioned JSON document written by `bscope`."""

import datetime
from pathlib import Path

from pydantic import BaseModel, Field

from beltrami_scope import __version__
from beltrami_scope.reports import (
    BeltramiReport,
    BoundaryClassification,
    CalibrationResult,
    CrossValidation,
    IndexReport,
    OracleResult,
    OrbitRecord,
    SlkResult,
)
from scripts.config import RunConfig

REPORT_VERSION = 1


class ReportDocument(BaseModel):
    report_version: int = REPORT_VERSION
    tool_version: str = __version__
    command: str
    config: RunConfig = Field(description="Echo of the validated run config; replaying it reproduces the run.")
    index: IndexReport | None = None
    slk: SlkResult | None = None
    beltrami: BeltramiReport | None = None
    boundary: BoundaryClassification | None = None
    oracle: OracleResult | None = None
    orbits: list[OrbitRecord] = Field(default_factory=list)
    cross_validation: CrossValidation | None = None
    calibration: CalibrationResult | None = None
    notes: list[str] = Field(default_factory=list)
    created_at: str | None = Field(None, description="UTC timestamp; omitted with --no-timestamp.")

    def stamp(self) -> "ReportDocument":
        return self.model_copy(
            update={"created_at": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")}
        )

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)


def parse_report(text: str) -> ReportDocument:
    return ReportDocument.model_validate_json(text)


def write_report(document: ReportDocument, out: str | Path | None) -> str:
    text = document.to_json()
    if out is not None:
        Path(out).write_text(text + "\n")
    return text
