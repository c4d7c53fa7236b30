"""Acoustic-prosodic entrainment analysis.

Measures how two speakers' prosody (pitch, intensity) becomes similar over a
conversation: per-utterance feature extraction, KNN-regression resampling
onto a shared grid, and the proximity / convergence / synchrony metrics,
in batch and sliding-window form, plus the nonparametric statistics used to
compare study conditions.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND as kernel_backend
from .audio import AudioBuffer, load_wav, save_wav
from .features import FEATURES, UtteranceFeaturePoint, aggregate_features
from .metrics import (CorrelationResult, EntrainmentReport, FeatureMetrics,
                      ProximitySeries, SynchronyConfig, analyze_dyad,
                      convergence, metric_value, proximity, report_to_dict,
                      synchrony)
from .perception import (PerceptionCorrelation, PerceptionRecord,
                         correlate_with_entrainment, load_perception_csv)
from .pipeline import (DyadSpec, PipelineConfig, StudyManifest, StudyReport,
                       analyze_session, compare_conditions, emit_outputs,
                       load_manifest, run_study,
                       significant_positive_fraction)
from .preprocess import (ResampledTrack, TimeGrid, grid_from_points,
                         knn_regress, standardize_track, zscore)
from .prosody import (FrameConfig, FrameTrack, pitch_autocorrelation,
                      rms_intensity)
from .segmentation import (UtteranceSegment, VadConfig, detect_utterances,
                           read_segments_csv, utterance_center,
                           write_segments_csv)
from .stats import (TestResult, kruskal_wallis, levene, pearson,
                    power_pearson, shapiro_wilk)
from .streaming import StreamConfig, StreamingEntrainment, WindowEvent

__all__ = [
    "AudioBuffer", "load_wav", "save_wav",
    "FrameConfig", "FrameTrack", "rms_intensity", "pitch_autocorrelation",
    "VadConfig", "UtteranceSegment", "detect_utterances", "utterance_center",
    "read_segments_csv", "write_segments_csv",
    "FEATURES", "UtteranceFeaturePoint", "aggregate_features",
    "TimeGrid", "ResampledTrack", "zscore", "knn_regress",
    "standardize_track", "grid_from_points",
    "ProximitySeries", "CorrelationResult", "SynchronyConfig",
    "FeatureMetrics", "EntrainmentReport", "proximity", "convergence",
    "synchrony", "analyze_dyad", "metric_value", "report_to_dict",
    "StreamConfig", "StreamingEntrainment", "WindowEvent",
    "TestResult", "pearson", "kruskal_wallis", "shapiro_wilk", "levene",
    "power_pearson",
    "PerceptionRecord", "PerceptionCorrelation", "load_perception_csv",
    "correlate_with_entrainment",
    "PipelineConfig", "DyadSpec", "StudyManifest", "StudyReport",
    "load_manifest", "analyze_session", "run_study", "compare_conditions",
    "significant_positive_fraction", "emit_outputs",
    "kernel_backend",
]
