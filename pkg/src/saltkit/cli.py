"""Command-line front end: pool building, batch anonymization, pre-matching,
metric evaluation, and plot-data emission.

Every command is deterministic given (flags, seed, sorted inputs).  Exit
codes are a stable contract: 0 success, 1 partial failure (some items
processed, some not), 2 invalid invocation or unusable input.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import blender, featstore, metrics, pitch
from .matcher import knn_match
from .prng import SplitMix64, key_seed, substream_seed

log = logging.getLogger(__name__)

FEATURE_SUFFIX = ".saltfeat"
PROVENANCE_SUFFIX = ".prov"


def _setup_logging() -> None:
    name = os.environ.get("SALT_LOG", "warning").upper()
    level = getattr(logging, name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


class InvocationError(ValueError):
    """Bad flags, unreadable inputs, or format violations (exit 2)."""


def _read_config(path: str) -> dict[str, str]:
    """Config file mirrors the flags: ``key<TAB>value`` per line."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("\t")
        if not sep:
            raise InvocationError(f"{path}:{lineno}: expected 'key<TAB>value'")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _resolve(args: argparse.Namespace, config: dict[str, str], name: str, conv, default=None):
    """Flag wins over config file wins over hard default."""
    value = getattr(args, name)
    if value is not None:
        return value
    if name in config:
        try:
            return conv(config[name])
        except ValueError:
            raise InvocationError(f"config key {name!r}: bad value {config[name]!r}") from None
    if default is None:
        raise InvocationError(f"missing required option --{name.replace('_', '-')}")
    return default


def _collect_feature_files(inputs: list[str]) -> list[Path]:
    files: list[Path] = []
    for item in inputs:
        p = Path(item)
        if p.is_dir():
            files.extend(sorted(p.glob(f"*{FEATURE_SUFFIX}")))
        elif p.is_file():
            files.append(p)
        else:
            raise InvocationError(f"input not found: {item}")
    files = sorted(files, key=str)
    if not files:
        raise InvocationError("no input feature files found")
    names = [f.name for f in files]
    if len(set(names)) != len(names):
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise InvocationError(f"duplicate output names from inputs: {dupes}")
    return files


def _speaker_of(path: Path) -> str:
    """Speaker id for per-speaker mode: file stem up to the first underscore."""
    return path.stem.partition("_")[0]


# ---------------------------------------------------------------------------
# build-pool


def cmd_build_pool(args: argparse.Namespace) -> int:
    config = _read_config(args.config) if args.config else {}
    manifest_path = _resolve(args, config, "manifest", str)
    out_path = _resolve(args, config, "out", str)
    manifest = featstore.read_manifest(manifest_path)
    manifest.n_speakers = _resolve(args, config, "n_speakers", int, manifest.n_speakers)
    manifest.n_utterances = _resolve(args, config, "n_utterances", int, manifest.n_utterances)
    manifest.seed = _resolve(args, config, "seed", int, manifest.seed)

    pool = featstore.build_pool(manifest)
    featstore.save_pool(pool, out_path)
    log.info("pool: %d speakers, dims %d -> %s", len(pool), pool.dims, out_path)
    return 0


# ---------------------------------------------------------------------------
# anonymize


@dataclass
class RunConfig:
    """Anonymization run parameters; mirrors the anonymize flags."""

    pool: str
    out: str
    k: int = blender.DEFAULT_K
    m: int = blender.DEFAULT_M
    scale: float = 0.0
    preserve: float = 0.0
    seed: int = 0
    workers: int = 1
    mode: str = "utterance"

    def __post_init__(self) -> None:
        if self.mode not in ("utterance", "speaker"):
            raise InvocationError(f"mode must be 'utterance' or 'speaker', got {self.mode!r}")
        if self.workers < 1:
            raise InvocationError("workers must be >= 1")


def run_anonymize(cfg: RunConfig, inputs: list[str]) -> int:
    files = _collect_feature_files(inputs)
    pool = featstore.load_pool(cfg.pool)
    bcfg = blender.BlendConfig(
        m=cfg.m, k=cfg.k, scale=cfg.scale, preserve=cfg.preserve, seed=cfg.seed
    )
    bcfg.validate_for_pool(pool)
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    # Identity assignment is fixed up front, serially, so the worker count
    # cannot influence which pseudo speaker an utterance receives.
    plans: list[tuple[Path, int, blender.PseudoSpeaker | None]] = []
    speaker_pseudos: dict[str, blender.PseudoSpeaker] = {}
    for index, path in enumerate(files):
        if cfg.mode == "speaker":
            speaker = _speaker_of(path)
            seed = key_seed(cfg.seed, speaker)
            if speaker not in speaker_pseudos:
                speaker_pseudos[speaker] = blender.draw_pseudo_speaker(
                    pool, bcfg, SplitMix64(seed)
                )
            plans.append((path, seed, speaker_pseudos[speaker]))
        else:
            plans.append((path, substream_seed(cfg.seed, index), None))

    def work(plan: tuple[Path, int, blender.PseudoSpeaker | None]) -> None:
        path, stream_seed, pseudo = plan
        source = featstore.read_features(path)
        output, record = blender.anonymize(
            source, pool, bcfg, stream_seed=stream_seed, pseudo=pseudo
        )
        record.extras["source"] = path.name
        record.extras["mode"] = cfg.mode
        featstore.write_features(output, out_dir / path.name)
        (out_dir / path.name).with_suffix(PROVENANCE_SUFFIX).write_text(record.to_text())

    failures = 0
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool_exec:
        for plan, result in zip(plans, pool_exec.map(_guarded(work), plans)):
            if result is not None:
                failures += 1
                log.error("failed %s: %s", plan[0], result)
    if failures:
        print(f"error: {failures} of {len(plans)} inputs failed", file=sys.stderr)
        return 1
    log.info("anonymized %d utterances -> %s", len(plans), out_dir)
    return 0


def _guarded(fn):
    """Run fn, returning the exception instead of raising (batch mode)."""

    def wrapper(item):
        try:
            fn(item)
            return None
        except Exception as exc:  # noqa: BLE001 - batch isolation boundary
            return exc

    return wrapper


def cmd_anonymize(args: argparse.Namespace) -> int:
    config = _read_config(args.config) if args.config else {}
    cfg = RunConfig(
        pool=_resolve(args, config, "pool", str),
        out=_resolve(args, config, "out", str),
        k=_resolve(args, config, "k", int, blender.DEFAULT_K),
        m=_resolve(args, config, "m", int, blender.DEFAULT_M),
        scale=_resolve(args, config, "scale", float, 0.0),
        preserve=_resolve(args, config, "preserve", float, 0.0),
        seed=_resolve(args, config, "seed", int, 0),
        workers=_resolve(args, config, "workers", int, 1),
        mode=_resolve(args, config, "mode", str, "utterance"),
    )
    return run_anonymize(cfg, args.inputs)


# ---------------------------------------------------------------------------
# prematch


def _read_train_manifest(path: str) -> list[tuple[str, Path, str]]:
    """Lines: ``speaker<TAB>feature_path[<TAB>audio_path]``.

    The optional third column carries the original audio path for the
    pairing manifest; it defaults to the feature path.
    """
    base = Path(path).parent
    rows: list[tuple[str, Path, str]] = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) not in (2, 3) or not all(parts):
            raise InvocationError(
                f"{path}:{lineno}: expected 'speaker<TAB>feature_path[<TAB>audio_path]'"
            )
        speaker, feat = parts[0], parts[1]
        feat_path = Path(feat) if Path(feat).is_absolute() else base / feat
        audio = parts[2] if len(parts) == 3 else str(feat_path)
        rows.append((speaker, feat_path, audio))
    return rows


def cmd_prematch(args: argparse.Namespace) -> int:
    config = _read_config(args.config) if args.config else {}
    train_path = _resolve(args, config, "manifest", str)
    out_path = _resolve(args, config, "out", str)
    k = _resolve(args, config, "k", int, blender.DEFAULT_K)
    reference_path = args.reference or config.get("reference") or train_path

    train = _read_train_manifest(train_path)
    if not train:
        raise InvocationError(f"{train_path}: no training utterances listed")
    # The reference defaults to the train manifest itself, which may carry the
    # optional audio column, so parse it with the same reader.
    by_speaker: dict[str, list[Path]] = {}
    for speaker, feat_path, _ in _read_train_manifest(reference_path):
        by_speaker.setdefault(speaker, []).append(feat_path)
    ref_sets = {
        speaker: np.concatenate([featstore.read_features(p) for p in paths], axis=0)
        for speaker, paths in by_speaker.items()
    }

    out_dir = Path(out_path)
    out_dir.mkdir(parents=True, exist_ok=True)
    pairs: list[str] = []
    skipped: list[str] = []
    for speaker, feat_path, audio in train:
        refs = ref_sets.get(speaker)
        if refs is None:
            skipped.append(f"{speaker}\t{feat_path}")
            log.warning("no reference set for speaker %r, skipping %s", speaker, feat_path)
            continue
        source = featstore.read_features(feat_path)
        result = knn_match(source, refs, k)
        matched_path = out_dir / f"{speaker}__{feat_path.stem}{FEATURE_SUFFIX}"
        featstore.write_features(result.matched, matched_path)
        pairs.append(f"{matched_path}\t{audio}")

    (out_dir / "pairs.tsv").write_text("\n".join(pairs) + ("\n" if pairs else ""))
    if skipped:
        print(
            "error: skipped utterances without reference sets:\n" + "\n".join(skipped),
            file=sys.stderr,
        )
        return 1
    log.info("pre-matched %d utterances -> %s", len(pairs), out_dir)
    return 0


# ---------------------------------------------------------------------------
# eval


def _read_weights_file(path: str, expected: int) -> np.ndarray:
    values: list[float] = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise InvocationError(f"{path}:{lineno}: bad weight {line!r}") from None
    if len(values) != expected:
        raise InvocationError(f"{path}: {len(values)} weights for {expected} subsets")
    return np.asarray(values, dtype=np.float64)


def _subset_weights(n: int, weights_file: str | None) -> np.ndarray:
    if weights_file:
        return _read_weights_file(weights_file, n)
    if n == len(metrics.VPC_WEIGHTS):
        return np.asarray(metrics.VPC_WEIGHTS, dtype=np.float64)
    return np.full(n, 1.0 / n)


def _eval_eer(path: str) -> tuple[float, dict[str, str]]:
    eer, threshold = metrics.compute_eer(metrics.read_scores(path))
    return eer, {"threshold": repr(threshold)}


def _eval_pitch(path: str) -> tuple[float, dict[str, str]]:
    """Input: manifest of ``orig_wav<TAB>anon_wav`` lines; value is the mean
    per-utterance F0 correlation."""
    base = Path(path).parent
    rhos: list[float] = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        orig, sep, anon = line.partition("\t")
        if not sep or not orig or not anon:
            raise InvocationError(f"{path}:{lineno}: expected 'orig_wav<TAB>anon_wav'")
        tracks = []
        for item in (orig, anon):
            p = Path(item) if Path(item).is_absolute() else base / item
            samples, rate = pitch.read_wave_mono(p)
            tracks.append(pitch.estimate_f0(samples, rate))
        rhos.append(pitch.pitch_correlation(tracks[0], tracks[1]))
    if not rhos:
        raise InvocationError(f"{path}: no utterance pairs listed")
    return float(np.mean(rhos)), {"pairs": str(len(rhos))}


def _load_embedding_dir(path: str) -> dict[str, np.ndarray]:
    d = Path(path)
    if not d.is_dir():
        raise InvocationError(f"embedding directory not found: {path}")
    dumps = sorted(d.glob(f"*{FEATURE_SUFFIX}"))
    if not dumps:
        raise InvocationError(f"no embedding dumps in {path}")
    return {f.stem: featstore.read_features(f) for f in dumps}


def _eval_gvd(pair: str) -> tuple[float, dict[str, str]]:
    """Input: ``orig_dir:anon_dir``, each holding one embedding dump per
    speaker (rows = utterance embeddings)."""
    orig_dir, sep, anon_dir = pair.partition(":")
    if not sep or not orig_dir or not anon_dir:
        raise InvocationError(f"gvd subset must be 'orig_dir:anon_dir', got {pair!r}")
    orig = _load_embedding_dir(orig_dir)
    anon = _load_embedding_dir(anon_dir)
    m_oo = metrics.similarity_matrix(orig, orig)
    m_aa = metrics.similarity_matrix(anon, anon)
    return metrics.gain_vd(m_aa, m_oo), {}


_EVALUATORS = {"eer": _eval_eer, "pitch": _eval_pitch, "gvd": _eval_gvd}


def cmd_eval(args: argparse.Namespace) -> int:
    config = _read_config(args.config) if args.config else {}
    metric = _resolve(args, config, "metric", str)
    if metric not in _EVALUATORS:
        raise InvocationError(f"unknown metric {metric!r}, choose from {sorted(_EVALUATORS)}")
    weights_file = args.weights_file or config.get("weights_file")
    weights = _subset_weights(len(args.inputs), weights_file)

    lines = [f"metric\t{metric}", f"subsets\t{len(args.inputs)}"]
    values: list[float] = []
    evaluate = _EVALUATORS[metric]
    for i, item in enumerate(args.inputs):
        value, extras = evaluate(item)
        values.append(value)
        lines.append(f"subset.{i}.input\t{item}")
        lines.append(f"subset.{i}.value\t{float(value)!r}")
        lines.append(f"subset.{i}.weight\t{float(weights[i])!r}")
        for key in sorted(extras):
            lines.append(f"subset.{i}.{key}\t{extras[key]}")
    lines.append(f"weighted_average\t{metrics.weighted_average(values, weights)!r}")

    report = "\n".join(lines) + "\n"
    sys.stdout.write(report)
    if args.out:
        Path(args.out).write_text(report)
    return 0


# ---------------------------------------------------------------------------
# pca


def cmd_pca(args: argparse.Namespace) -> int:
    config = _read_config(args.config) if args.config else {}
    out_path = _resolve(args, config, "out", str)
    dumps = _load_embedding_dir(args.embeddings)

    speakers: list[str] = []
    blocks: list[np.ndarray] = []
    for speaker in sorted(dumps):
        block = dumps[speaker]
        speakers.extend([speaker] * block.shape[0])
        blocks.append(block)
    stacked = np.concatenate(blocks, axis=0)
    projected, ratios = metrics.pca_project(stacked, out_dims=2)

    lines = [
        f"{spk}\t{float(projected[i, 0])!r}\t{float(projected[i, 1])!r}"
        for i, spk in enumerate(speakers)
    ]
    Path(out_path).write_text("\n".join(lines) + "\n")
    for i, ratio in enumerate(ratios):
        sys.stdout.write(f"explained.{i}\t{float(ratio)!r}\n")
    return 0


# ---------------------------------------------------------------------------
# parser / entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="saltkit",
        description="Speaker anonymization over latent features: "
        "kNN matching against a reference pool, randomly weighted blending.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="key<TAB>value config file; explicit flags win")

    p = sub.add_parser("build-pool", help="sample speakers/utterances into a pool archive")
    p.add_argument("--manifest", help="speaker<TAB>path manifest with #-header parameters")
    p.add_argument("--out", help="output pool archive path")
    p.add_argument("--n-speakers", type=int, dest="n_speakers")
    p.add_argument("--n-utterances", type=int, dest="n_utterances")
    p.add_argument("--seed", type=int)
    add_config(p)
    p.set_defaults(func=cmd_build_pool)

    p = sub.add_parser("anonymize", help="anonymize feature files against a pool")
    p.add_argument("inputs", nargs="+", help="feature files and/or directories of them")
    p.add_argument("--pool", help="pool archive from build-pool")
    p.add_argument("--out", help="output directory")
    p.add_argument("--k", type=int, help="neighbors per frame (default 4)")
    p.add_argument("--m", type=int, help="speakers per pseudo identity (default 4)")
    p.add_argument("--scale", type=float, help="extrapolation strength s (default 0)")
    p.add_argument("--preserve", type=float, help="source preservation p in [0,1] (default 0)")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, help="parallel workers (default 1)")
    p.add_argument(
        "--mode",
        choices=("utterance", "speaker"),
        help="pseudo-speaker assignment: fresh per utterance, or one per source "
        "speaker (speaker id = file stem up to the first underscore)",
    )
    add_config(p)
    p.set_defaults(func=cmd_anonymize)

    p = sub.add_parser(
        "prematch", help="reconstruct training features against own-speaker references"
    )
    p.add_argument("--manifest", help="speaker<TAB>feature_path[<TAB>audio_path] lines")
    p.add_argument("--reference", help="reference manifest (default: the train manifest)")
    p.add_argument("--k", type=int, help="neighbors per frame (default 4)")
    p.add_argument("--out", help="output directory")
    add_config(p)
    p.set_defaults(func=cmd_prematch)

    p = sub.add_parser("eval", help="compute a metric over evaluation subsets")
    p.add_argument("inputs", nargs="+", help="per-subset inputs (format depends on metric)")
    p.add_argument("--metric", choices=sorted(_EVALUATORS))
    p.add_argument(
        "--weights-file",
        dest="weights_file",
        help="one weight per line; default: standard six-subset weights, else uniform",
    )
    p.add_argument("--out", help="also write the report to this file")
    add_config(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("pca", help="project speaker embedding dumps to 2-D plot data")
    p.add_argument("embeddings", help="directory of per-speaker embedding dumps")
    p.add_argument("--out", help="output speaker_id<TAB>x<TAB>y file")
    add_config(p)
    p.set_defaults(func=cmd_pca)
    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InvocationError, featstore.FeatureFileError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
