"""Questionnaire score ingestion and correlation with entrainment metrics.

Scales are opaque: each record is (dyad, scale, raw, max) and the score is
normalized to raw/max in [0, 1], so any Likert-style instrument fits.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from .errors import (DuplicateRecord, InsufficientPairs, ParseError,
                     ScoreOutOfRange)
from .metrics import EntrainmentReport, metric_value
from .stats import TestResult, pearson, power_pearson

METRIC_KINDS = ("convergence", "synchrony", "proximity_mean")


@dataclass(frozen=True)
class PerceptionRecord:
    dyad_id: str
    scale: str
    raw_score: float
    max_score: float

    @property
    def normalized(self) -> float:
        return self.raw_score / self.max_score


@dataclass(frozen=True)
class PerceptionCorrelation:
    """Pearson result pairing one scale with one (feature, metric)."""

    scale: str
    feature: str
    metric: str
    test: TestResult
    power: float | None
    n_used: int
    n_excluded_records: int
    n_excluded_reports: int


def load_perception_csv(path: str | Path) -> list[PerceptionRecord]:
    """Read ``dyad_id,scale,raw,max`` rows into normalized records.

    Raises ParseError on malformed rows, DuplicateRecord on repeated
    (dyad, scale) pairs and ScoreOutOfRange when raw lies outside [0, max].
    """
    records: list[PerceptionRecord] = []
    seen: set[tuple[str, str]] = set()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["dyad_id", "scale", "raw", "max"]:
            raise ParseError(f"{path}: expected header dyad_id,scale,raw,max")
        for ln, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ParseError(f"{path}:{ln}: expected 4 fields")
            dyad, scale = row[0].strip(), row[1].strip()
            try:
                raw, mx = float(row[2]), float(row[3])
            except ValueError as exc:
                raise ParseError(f"{path}:{ln}: non-numeric score") from exc
            if mx <= 0:
                raise ParseError(f"{path}:{ln}: max score must be positive")
            if raw < 0 or raw > mx:
                raise ScoreOutOfRange(f"{path}:{ln}: raw={raw} outside [0, {mx}]")
            if (dyad, scale) in seen:
                raise DuplicateRecord(f"{path}:{ln}: duplicate ({dyad}, {scale})")
            seen.add((dyad, scale))
            records.append(PerceptionRecord(dyad, scale, raw, mx))
    return records


def correlate_with_entrainment(records: list[PerceptionRecord],
                               reports: list[EntrainmentReport],
                               scale: str, feature: str, metric: str,
                               alpha: float = 0.01) -> PerceptionCorrelation:
    """Pearson correlation between a perception scale and a metric.

    Dyads are matched by id; dyads missing either side are excluded and
    counted. Raises InsufficientPairs below 3 complete pairs.
    """
    scores = {r.dyad_id: r.normalized for r in records if r.scale == scale}
    values: dict[str, float] = {}
    for report in reports:
        v = metric_value(report, feature, metric)
        if v is not None:
            values[report.dyad_id] = v
    paired = sorted(set(scores) & set(values))
    n_excl_records = len(scores) - len(paired)
    n_excl_reports = len(values) - len(paired)
    if len(paired) < 3:
        raise InsufficientPairs(
            f"only {len(paired)} dyads have both a '{scale}' score and "
            f"{feature}/{metric}")
    test = pearson([scores[d] for d in paired], [values[d] for d in paired])
    if abs(test.statistic) >= 1.0:
        power = 1.0
    elif test.n >= 4:
        power = power_pearson(test.statistic, test.n, alpha)
    else:
        power = None
    return PerceptionCorrelation(
        scale, feature, metric, test, power,
        n_used=len(paired),
        n_excluded_records=n_excl_records,
        n_excluded_reports=n_excl_reports)
