"""Music genre classification from projected log-Mel frames.

Front-end, feature families (MEL-SPEC, MEL-RP, MEL-PCA, MEL-AE, MARSYAS),
track aggregation, classifiers and artist-filtered cross-validation.
"""

from .audio_io import AudioClip, load_audio
from .evaluation import (
    AuditLog,
    ExperimentConfig,
    ExperimentResult,
    LeakageError,
    permuted_labels,
    run_experiment,
    run_sweep,
    run_transfer,
)
from .features import FrameStore, fit_frame_model, track_vector
from .manifest import DatasetManifest, TrackEntry, load_manifest

__version__ = "0.1.0"
