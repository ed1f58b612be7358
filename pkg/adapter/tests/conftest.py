import pytest
from audio_helpers import SR, tone

from salt_adapter import AdapterConfig, load_encoder, load_vocoder, write_wave_mono
from salt_adapter.tinymodels import save_tiny_checkpoints


@pytest.fixture(scope="session")
def checkpoints(tmp_path_factory):
    return save_tiny_checkpoints(tmp_path_factory.mktemp("ckpt"), seed=0)


@pytest.fixture(scope="session")
def cfg(checkpoints):
    encoder_dir, vocoder_dir = checkpoints
    return AdapterConfig(
        encoder_checkpoint=str(encoder_dir), vocoder_checkpoint=str(vocoder_dir)
    )


@pytest.fixture(scope="session")
def encoder(cfg):
    return load_encoder(cfg.encoder_checkpoint)


@pytest.fixture(scope="session")
def vocoder(cfg):
    return load_vocoder(cfg.vocoder_checkpoint)


@pytest.fixture(scope="session")
def tone_wav(tmp_path_factory):
    """One second of a clean 220 Hz tone."""
    path = tmp_path_factory.mktemp("audio") / "tone220.wav"
    write_wave_mono(path, tone(220.0), SR)
    return path


@pytest.fixture(scope="session")
def wav_corpus(tmp_path_factory):
    """Four speakers x two utterances plus a speaker<TAB>audio manifest."""
    root = tmp_path_factory.mktemp("corpus")
    lines = []
    for idx, (speaker, freq) in enumerate(
        [("SPKA", 180.0), ("SPKB", 220.0), ("SPKC", 260.0), ("SPKD", 300.0)]
    ):
        for j in range(2):
            name = f"{speaker}_{j:03d}.wav"
            write_wave_mono(root / name, tone(freq + 11 * j, seconds=0.7 + 0.1 * j), SR)
            lines.append(f"{speaker}\t{name}")
    manifest = root / "audio.tsv"
    manifest.write_text("\n".join(lines) + "\n")
    return {"dir": root, "manifest": manifest}
