"""Audio bridge for the feature-domain engine: a pretrained self-supervised
encoder turns waveforms into feature files, and a pretrained vocoder turns
(anonymized) feature files back into waveforms.  The two sides meet only on
the shared byte format."""

from .audio import read_wave_mono, write_wave_mono
from .config import VARIANT_LAYERS, AdapterConfig
from .extract import (
    BatchResult,
    batch_extract,
    extract_features,
    extract_file,
    read_audio_manifest,
    write_feature_manifest,
)
from .featfile import FeatureFileError, read_features, write_features
from .models import (
    check_layer,
    encoder_hop,
    encoder_min_samples,
    load_encoder,
    load_vocoder,
    vocoder_hop,
)
from .vocode import vocode_features, vocode_file

__version__ = "0.1.0"

__all__ = [
    "AdapterConfig",
    "BatchResult",
    "FeatureFileError",
    "VARIANT_LAYERS",
    "batch_extract",
    "check_layer",
    "encoder_hop",
    "encoder_min_samples",
    "extract_features",
    "extract_file",
    "load_encoder",
    "load_vocoder",
    "read_audio_manifest",
    "read_features",
    "read_wave_mono",
    "vocode_features",
    "vocode_file",
    "vocoder_hop",
    "write_feature_manifest",
    "write_features",
    "write_wave_mono",
]
