"""End-to-end study analysis from a session manifest.

A manifest is one JSON file describing a study: per-dyad audio paths with a
condition label, optional segment-CSV overrides, optional perception CSV and
config overrides. Each dyad runs the full chain (decode, frame analysis,
segmentation, aggregation, standardization, KNN resampling, metrics) in
isolation: a failing dyad becomes an error-status entry, never a crash. The
aggregation stage adds per-condition significant-positive fractions, the
Kruskal-Wallis condition comparison with Shapiro/Levene pre-checks (recorded,
never gating) and perception correlations with power annotations.

The whole pipeline is a pure function of the input bytes and config;
repeated runs produce byte-identical outputs.
"""

from __future__ import annotations

import dataclasses
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__ as _version
from .audio import load_wav
from .errors import EntrainError, InsufficientData, ParseError
from .features import FEATURES, aggregate_features
from .metrics import (EntrainmentReport, ProximitySeries, SynchronyConfig,
                      analyze_dyad, metric_value, proximity, report_to_dict)
from .perception import (PerceptionCorrelation, load_perception_csv,
                         correlate_with_entrainment)
from .preprocess import (ResampledTrack, grid_from_points, knn_regress,
                         standardize_track, zscore)
from .prosody import FrameConfig, pitch_autocorrelation, rms_intensity
from .segmentation import VadConfig, detect_utterances, read_segments_csv
from .stats import TestResult, kruskal_wallis, levene, shapiro_wilk
from .errors import InsufficientPairs

SPEAKER_A = "tutor"
SPEAKER_B = "participant"
FLAG_METRICS = ("convergence", "synchrony")
ALL_METRICS = ("convergence", "synchrony", "proximity_mean")


@dataclass(frozen=True)
class PipelineConfig:
    frame: FrameConfig = field(default_factory=FrameConfig)
    vad: VadConfig = field(default_factory=VadConfig)
    grid_step: float = 0.100
    k: int = 7
    alpha: float = 0.01
    delta: float = 0.0
    sync_search: tuple[float, float, float] | None = None
    window: float = 120.0
    zscore_after_knn: bool = False

    def merged(self, overrides: dict) -> "PipelineConfig":
        """New config with ``overrides`` applied (nested frame/vad dicts)."""
        if not overrides:
            return self
        known = {f.name for f in dataclasses.fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise ParseError(f"unknown config keys: {sorted(unknown)}")
        changes: dict = {}
        for key, value in overrides.items():
            if key == "frame":
                changes["frame"] = dataclasses.replace(self.frame, **value)
            elif key == "vad":
                changes["vad"] = dataclasses.replace(self.vad, **value)
            elif key == "sync_search" and value is not None:
                changes["sync_search"] = tuple(value)
            else:
                changes[key] = value
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        if d["sync_search"] is not None:
            d["sync_search"] = list(d["sync_search"])
        return d


@dataclass(frozen=True)
class DyadSpec:
    dyad_id: str
    condition: str
    tutor_wav: Path
    participant_wav: Path
    tutor_segments_csv: Path | None = None
    participant_segments_csv: Path | None = None
    overrides: dict = field(default_factory=dict)


@dataclass(frozen=True)
class StudyManifest:
    dyads: list[DyadSpec]
    config: PipelineConfig
    perception_csv: Path | None = None


@dataclass
class SessionResult:
    """Everything one dyad contributes to a study report."""

    dyad_id: str
    condition: str
    report: EntrainmentReport | None = None
    error: str | None = None
    preprocess_issues: dict[str, str] = field(default_factory=dict)
    tracks: dict[str, dict[str, ResampledTrack]] = field(default_factory=dict)
    proximity: dict[str, ProximitySeries] = field(default_factory=dict)


def load_manifest(path: str | Path) -> StudyManifest:
    """Parse a study manifest; relative paths resolve against its directory."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict) or "dyads" not in doc:
        raise ParseError(f"{path}: manifest must be an object with 'dyads'")
    base = path.parent

    def resolve(p) -> Path | None:
        return None if p is None else (base / p)

    config = PipelineConfig().merged(doc.get("config", {}))
    dyads: list[DyadSpec] = []
    seen: set[str] = set()
    for i, entry in enumerate(doc["dyads"]):
        try:
            dyad_id = entry["dyad_id"]
            spec = DyadSpec(
                dyad_id=dyad_id,
                condition=entry.get("condition", "default"),
                tutor_wav=resolve(entry["tutor_wav"]),
                participant_wav=resolve(entry["participant_wav"]),
                tutor_segments_csv=resolve(entry.get("tutor_segments_csv")),
                participant_segments_csv=resolve(entry.get("participant_segments_csv")),
                overrides=entry.get("config", {}))
        except KeyError as exc:
            raise ParseError(f"{path}: dyad #{i} missing field {exc}") from exc
        if dyad_id in seen:
            raise ParseError(f"{path}: duplicate dyad_id {dyad_id!r}")
        seen.add(dyad_id)
        dyads.append(spec)
    return StudyManifest(dyads, config, resolve(doc.get("perception_csv")))


def _speaker_tracks(wav: Path, segments_csv: Path | None, speaker: str,
                    cfg: PipelineConfig):
    """Utterance feature points for one speaker, grouped by feature."""
    audio = load_wav(wav)
    intensity = rms_intensity(audio, cfg.frame)
    pitch = pitch_autocorrelation(audio, cfg.frame)
    if segments_csv is not None:
        segments = [dataclasses.replace(s, speaker=speaker)
                    for s in read_segments_csv(segments_csv)]
        segments.sort(key=lambda s: s.start_time)
    else:
        segments = detect_utterances(intensity, cfg.vad, speaker)
    points = aggregate_features(pitch, intensity, segments)
    by_feature: dict[str, list] = {f: [] for f in FEATURES}
    for p in points:
        by_feature[p.feature].append(p)
    return by_feature


def analyze_session(spec: DyadSpec, config: PipelineConfig) -> SessionResult:
    """Run the full per-dyad pipeline; every failure becomes report status."""
    cfg = config.merged(spec.overrides)
    result = SessionResult(spec.dyad_id, spec.condition)
    try:
        points_a = _speaker_tracks(spec.tutor_wav, spec.tutor_segments_csv,
                                   SPEAKER_A, cfg)
        points_b = _speaker_tracks(spec.participant_wav,
                                   spec.participant_segments_csv,
                                   SPEAKER_B, cfg)
    except (EntrainError, OSError) as exc:
        result.error = f"{type(exc).__name__}: {exc}"
        return result

    tracks: dict[str, dict[str, ResampledTrack]] = {SPEAKER_A: {}, SPEAKER_B: {}}
    for feature in FEATURES:
        pa, pb = points_a[feature], points_b[feature]
        if not pa or not pb:
            who = [s for s, p in ((SPEAKER_A, pa), (SPEAKER_B, pb)) if not p]
            result.preprocess_issues[feature] = f"no points for {', '.join(who)}"
            continue
        try:
            grid = grid_from_points([pa, pb], cfg.grid_step)
            for speaker, pts in ((SPEAKER_A, pa), (SPEAKER_B, pb)):
                if cfg.zscore_after_knn:
                    track = standardize_track(knn_regress(pts, grid, cfg.k))
                else:
                    track = knn_regress(zscore(pts), grid, cfg.k)
                tracks[speaker][feature] = track
        except EntrainError as exc:
            result.preprocess_issues[feature] = f"{type(exc).__name__}: {exc}"
            tracks[SPEAKER_A].pop(feature, None)
            tracks[SPEAKER_B].pop(feature, None)

    sync = SynchronyConfig(delta=cfg.delta, search_range=cfg.sync_search)
    result.report = analyze_dyad(tracks[SPEAKER_A], tracks[SPEAKER_B],
                                 spec.dyad_id, cfg.alpha, sync)
    result.tracks = tracks
    for feature in FEATURES:
        ta = tracks[SPEAKER_A].get(feature)
        tb = tracks[SPEAKER_B].get(feature)
        if ta is not None and tb is not None:
            result.proximity[feature] = proximity(ta, tb)
    return result


def _analyze_entry(args: tuple[DyadSpec, PipelineConfig]) -> SessionResult:
    spec, config = args
    try:
        return analyze_session(spec, config)
    except Exception as exc:  # fault isolation: nothing escapes a worker
        return SessionResult(spec.dyad_id, spec.condition,
                             error=f"{type(exc).__name__}: {exc}")


@dataclass(frozen=True)
class FractionResult:
    n_significant: int
    n_total: int

    @property
    def fraction(self) -> float:
        return self.n_significant / self.n_total if self.n_total else 0.0


@dataclass(frozen=True)
class ConditionComparison:
    feature: str
    metric: str
    kruskal: TestResult
    shapiro: dict[str, TestResult | str]
    levene: TestResult | str
    group_sizes: dict[str, int]
    medians: dict[str, float]


def significant_positive_fraction(reports_by_condition: dict[str, list[EntrainmentReport]],
                                  feature: str, metric: str) -> dict[str, FractionResult]:
    """Per condition, the fraction of dyads whose (feature, metric) flag is set."""
    if metric not in FLAG_METRICS:
        raise ValueError(f"metric must be one of {FLAG_METRICS}, got {metric!r}")
    out: dict[str, FractionResult] = {}
    for condition in sorted(reports_by_condition):
        reports = reports_by_condition[condition]
        n_sig = 0
        for report in reports:
            fm = report.features.get(feature)
            res = None if fm is None else getattr(fm, metric)
            if res is not None and res.significant_positive:
                n_sig += 1
        out[condition] = FractionResult(n_sig, len(reports))
    return out


def compare_conditions(reports_by_condition: dict[str, list[EntrainmentReport]],
                       feature: str, metric: str) -> ConditionComparison:
    """Kruskal-Wallis across conditions plus Shapiro/Levene pre-checks.

    Pre-check results are recorded, never used to switch tests. Raises
    InsufficientData unless >= 2 conditions have >= 2 valued dyads.
    """
    groups: dict[str, list[float]] = {}
    for condition in sorted(reports_by_condition):
        values = [v for r in reports_by_condition[condition]
                  if (v := metric_value(r, feature, metric)) is not None]
        if len(values) >= 2:
            groups[condition] = values
    if len(groups) < 2:
        raise InsufficientData(
            f"need >= 2 conditions with >= 2 dyads carrying {feature}/{metric}")

    shapiro: dict[str, TestResult | str] = {}
    for condition, values in groups.items():
        try:
            shapiro[condition] = shapiro_wilk(values)
        except EntrainError as exc:
            shapiro[condition] = f"{type(exc).__name__}: {exc}"
    try:
        lev: TestResult | str = levene(list(groups.values()))
    except EntrainError as exc:
        lev = f"{type(exc).__name__}: {exc}"
    kw = kruskal_wallis(list(groups.values()))
    return ConditionComparison(
        feature, metric, kw, shapiro, lev,
        group_sizes={c: len(v) for c, v in groups.items()},
        medians={c: float(np.median(v)) for c, v in groups.items()})


@dataclass
class StudyReport:
    config: PipelineConfig
    sessions: list[SessionResult]
    fractions: dict[str, dict[str, dict[str, FractionResult]]]
    comparisons: dict[str, dict[str, ConditionComparison | str]]
    perception: list[PerceptionCorrelation]

    def to_dict(self) -> dict:
        def test_dict(t: TestResult | str) -> dict | str:
            if isinstance(t, str):
                return t
            return {"method": t.method, "statistic": t.statistic,
                    "p_value": t.p_value, "n": t.n,
                    "group_sizes": list(t.group_sizes) if t.group_sizes else None}

        dyads = []
        for s in self.sessions:
            entry: dict = {"dyad_id": s.dyad_id, "condition": s.condition,
                           "error": s.error}
            if s.report is not None:
                entry["report"] = report_to_dict(s.report)
                entry["preprocess_issues"] = dict(sorted(s.preprocess_issues.items()))
            dyads.append(entry)

        comparisons: dict = {}
        for feature, per_metric in self.comparisons.items():
            comparisons[feature] = {}
            for metric, comp in per_metric.items():
                if isinstance(comp, str):
                    comparisons[feature][metric] = {"error": comp}
                else:
                    comparisons[feature][metric] = {
                        "kruskal_wallis": test_dict(comp.kruskal),
                        "shapiro": {c: test_dict(t) for c, t in comp.shapiro.items()},
                        "levene": test_dict(comp.levene),
                        "group_sizes": comp.group_sizes,
                        "medians": comp.medians,
                    }

        return {
            "tool": {"name": "entrain", "version": _version},
            "config": self.config.to_dict(),
            "dyads": dyads,
            "significant_positive_fractions": {
                feature: {
                    metric: {cond: {"fraction": fr.fraction,
                                    "n_significant": fr.n_significant,
                                    "n_total": fr.n_total}
                             for cond, fr in per_cond.items()}
                    for metric, per_cond in per_metric.items()}
                for feature, per_metric in self.fractions.items()},
            "condition_comparisons": comparisons,
            "perception_correlations": [
                {"scale": pc.scale, "feature": pc.feature, "metric": pc.metric,
                 "r": pc.test.statistic, "n": pc.n_used,
                 "p_value": pc.test.p_value, "power": pc.power,
                 "n_excluded_records": pc.n_excluded_records,
                 "n_excluded_reports": pc.n_excluded_reports}
                for pc in self.perception],
        }


def run_study(manifest: StudyManifest, workers: int | None = None) -> StudyReport:
    """Analyze every dyad (in parallel) and aggregate the study statistics."""
    jobs = [(spec, manifest.config) for spec in manifest.dyads]
    if workers is None:
        import os
        workers = min(len(jobs), os.cpu_count() or 1) or 1
    if workers <= 1 or len(jobs) <= 1:
        sessions = [_analyze_entry(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            sessions = list(pool.map(_analyze_entry, jobs))

    by_condition: dict[str, list[EntrainmentReport]] = {}
    for s in sessions:
        if s.report is not None:
            by_condition.setdefault(s.condition, []).append(s.report)

    fractions = {
        feature: {metric: {c: fr for c, fr in
                           significant_positive_fraction(by_condition, feature, metric).items()}
                  for metric in FLAG_METRICS}
        for feature in FEATURES} if by_condition else {}

    comparisons: dict[str, dict[str, ConditionComparison | str]] = {}
    for feature in FEATURES:
        comparisons[feature] = {}
        for metric in ALL_METRICS:
            try:
                comparisons[feature][metric] = compare_conditions(
                    by_condition, feature, metric)
            except EntrainError as exc:
                comparisons[feature][metric] = f"{type(exc).__name__}: {exc}"

    perception: list[PerceptionCorrelation] = []
    if manifest.perception_csv is not None:
        records = load_perception_csv(manifest.perception_csv)
        reports = [s.report for s in sessions if s.report is not None]
        for scale in sorted({r.scale for r in records}):
            for feature in FEATURES:
                for metric in ALL_METRICS:
                    try:
                        perception.append(correlate_with_entrainment(
                            records, reports, scale, feature, metric,
                            manifest.config.alpha))
                    except InsufficientPairs:
                        continue

    return StudyReport(manifest.config, sessions, fractions, comparisons,
                       perception)


def emit_outputs(study: StudyReport, out_dir: str | Path) -> list[Path]:
    """Write study_report.json, dyads.csv and per-dyad plot CSVs.

    Output is deterministic: identical studies produce byte-identical files.
    Returns the paths written.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    report_path = out / "study_report.json"
    report_path.write_text(
        json.dumps(study.to_dict(), indent=2, sort_keys=True, allow_nan=False)
        + "\n")
    written.append(report_path)

    rows = ["dyad_id,condition,feature,metric,value,n,p_value,significant_positive"]
    for s in study.sessions:
        if s.report is None:
            continue
        for feature in FEATURES:
            fm = s.report.features.get(feature)
            if fm is None:
                continue
            for metric in ALL_METRICS:
                if metric == "proximity_mean":
                    value, n, p, sig = fm.proximity_mean, "", "", ""
                else:
                    res = getattr(fm, metric)
                    if res is None:
                        value = n = p = sig = ""
                    else:
                        value, n, p, sig = res.r, res.n, res.p_value, int(res.significant_positive)
                if value is None:
                    value = ""
                rows.append(",".join(map(str, [s.dyad_id, s.condition, feature,
                                               metric, value, n, p, sig])))
    dyads_path = out / "dyads.csv"
    dyads_path.write_text("\n".join(rows) + "\n")
    written.append(dyads_path)

    plot_dir = out / "plots"
    plot_dir.mkdir(exist_ok=True)
    for s in study.sessions:
        for feature in FEATURES:
            ta = s.tracks.get(SPEAKER_A, {}).get(feature)
            tb = s.tracks.get(SPEAKER_B, {}).get(feature)
            prox = s.proximity.get(feature)
            if ta is None or tb is None or prox is None:
                continue
            lines = [f"time_s,z_{SPEAKER_A},z_{SPEAKER_B},proximity"]
            for t, a, b, d in zip(ta.grid.times(), ta.values, tb.values,
                                  prox.values):
                lines.append(f"{t!r},{a!r},{b!r},{d!r}")
            p = plot_dir / f"{s.dyad_id}__{feature}.csv"
            p.write_text("\n".join(lines) + "\n")
            written.append(p)
    return written
