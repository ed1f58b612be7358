"""saltkit: latent-space speaker anonymization and voice-privacy metrics.

The pipeline replaces each frame of a source utterance with the mean of
its nearest reference-pool frames, blends per-speaker matches under a
randomly drawn (optionally extrapolated) weight vector, and mixes back a
preservation share of the source.  Everything downstream of a feature
extractor is here; audio <-> feature conversion lives in a separate
adapter package.
"""

from .blender import BlendConfig, PseudoSpeaker, anonymize, draw_pseudo_speaker
from .featstore import (
    FeatureFileError,
    PoolManifest,
    SpeakerPool,
    build_pool,
    load_pool,
    read_features,
    read_manifest,
    save_pool,
    write_features,
    write_manifest,
)
from .matcher import MatchResult, knn_match, knn_match_naive
from .metrics import ScoreSet, compute_eer, gain_vd, pca_project, pearson, weighted_average
from .pitch import F0Params, PitchTrack, estimate_f0, pitch_correlation

__version__ = "0.1.0"

__all__ = [
    "BlendConfig",
    "F0Params",
    "FeatureFileError",
    "MatchResult",
    "PitchTrack",
    "PoolManifest",
    "PseudoSpeaker",
    "ScoreSet",
    "SpeakerPool",
    "__version__",
    "anonymize",
    "build_pool",
    "compute_eer",
    "draw_pseudo_speaker",
    "estimate_f0",
    "gain_vd",
    "knn_match",
    "knn_match_naive",
    "load_pool",
    "pca_project",
    "pearson",
    "pitch_correlation",
    "read_features",
    "read_manifest",
    "save_pool",
    "weighted_average",
    "write_features",
    "write_manifest",
]
