"""Command-line interface.

``entrain analyze --manifest study.json --out DIR`` runs a batch study and
writes ``study_report.json``, ``dyads.csv`` and per-dyad plot CSVs. With
``--stream`` a single dyad is replayed through the sliding-window estimator
and one JSON event per (grid step, feature) is written to stdout::

    {"t": ..., "feature": ..., "window_convergence_r": ..., "window_convergence_p": ...,
     "window_synchrony_r": ..., "window_synchrony_p": ...}

Config precedence: defaults < manifest ``config`` < per-dyad ``config`` <
command-line flags. Exit status is 0 on success and 1 on any fatal IO or
parse error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .errors import DegenerateDistribution, EntrainError
from .features import FEATURES
from .pipeline import (SPEAKER_A, SPEAKER_B, StudyManifest, _speaker_tracks,
                       emit_outputs, load_manifest, run_study)
from .preprocess import zscore
from .streaming import StreamConfig, StreamingEntrainment


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entrain",
        description="Acoustic-prosodic entrainment analysis")
    sub = parser.add_subparsers(dest="command", required=True)
    an = sub.add_parser("analyze", help="analyze a study manifest")
    an.add_argument("--manifest", required=True, help="study manifest JSON")
    an.add_argument("--out", help="output directory (batch mode)")
    an.add_argument("--alpha", type=float, help="significance level (default 0.01)")
    an.add_argument("--grid-step", type=float, help="resampling grid step in s")
    an.add_argument("--k", type=int, help="KNN neighborhood size")
    an.add_argument("--delta", type=float, help="synchrony lag in s")
    an.add_argument("--window", type=float, help="streaming window in s")
    an.add_argument("--workers", type=int, help="parallel dyad workers")
    an.add_argument("--dyad", help="dyad id to stream (default: the only one)")
    an.add_argument("--stream", action="store_true",
                    help="emit sliding-window JSON events for one dyad")
    return parser


def _flag_overrides(args: argparse.Namespace) -> dict:
    overrides = {}
    for flag, key in (("alpha", "alpha"), ("grid_step", "grid_step"),
                      ("k", "k"), ("delta", "delta"), ("window", "window")):
        value = getattr(args, flag)
        if value is not None:
            overrides[key] = value
    return overrides


def _stream_dyad(manifest: StudyManifest, dyad_id: str | None,
                 out=sys.stdout) -> int:
    if dyad_id is None:
        if len(manifest.dyads) != 1:
            raise EntrainError(
                "--stream needs a single-dyad manifest or --dyad ID")
        spec = manifest.dyads[0]
    else:
        matches = [d for d in manifest.dyads if d.dyad_id == dyad_id]
        if not matches:
            raise EntrainError(f"no dyad {dyad_id!r} in manifest")
        spec = matches[0]

    cfg = manifest.config.merged(spec.overrides)
    points_a = _speaker_tracks(spec.tutor_wav, spec.tutor_segments_csv,
                               SPEAKER_A, cfg)
    points_b = _speaker_tracks(spec.participant_wav,
                               spec.participant_segments_csv, SPEAKER_B, cfg)

    stream_cfg = StreamConfig(grid_step=cfg.grid_step, k=cfg.k,
                              window=cfg.window, delta=cfg.delta,
                              alpha=cfg.alpha)
    events = []  # (t, feature, event)
    for feature in FEATURES:
        pa, pb = points_a[feature], points_b[feature]
        if len(pa) < 2 or len(pb) < 2:
            continue
        try:
            standardized = zscore(pa) + zscore(pb)
        except DegenerateDistribution:
            continue
        est = StreamingEntrainment(SPEAKER_A, SPEAKER_B, stream_cfg)
        merged = sorted(((p.time, p.speaker, p.value) for p in standardized),
                        key=lambda x: (x[0], x[1]))
        for t, speaker, value in merged:
            for ev in est.update(t, value, speaker):
                events.append((ev.t, feature, ev))
    events.sort(key=lambda e: (e[0], FEATURES.index(e[1])))
    for t, feature, ev in events:
        out.write(json.dumps({
            "t": t, "feature": feature,
            "window_convergence_r": ev.convergence_r,
            "window_convergence_p": ev.convergence_p,
            "window_synchrony_r": ev.synchrony_r,
            "window_synchrony_p": ev.synchrony_p}) + "\n")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        manifest = load_manifest(args.manifest)
        config = manifest.config.merged(_flag_overrides(args))
        manifest = dataclasses.replace(manifest, config=config)
        if args.stream:
            return _stream_dyad(manifest, args.dyad)
        if not args.out:
            raise EntrainError("--out is required in batch mode")
        study = run_study(manifest, workers=args.workers)
        emit_outputs(study, args.out)
        failed = [s.dyad_id for s in study.sessions if s.error is not None]
        print(f"analyzed {len(study.sessions)} dyad(s)"
              + (f", {len(failed)} with errors: {', '.join(failed)}" if failed else ""))
        return 0
    except (EntrainError, OSError) as exc:
        print(f"entrain: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
