"""Command-line front end: single-file extraction, vocoding, and manifest
batches.

Exit codes match the engine's contract: 0 success, 1 partial failure (some
manifest entries processed, some not), 2 invalid invocation or unusable
input.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import VARIANT_LAYERS, AdapterConfig
from .extract import batch_extract, extract_file, write_feature_manifest
from .featfile import FeatureFileError
from .vocode import vocode_file

log = logging.getLogger(__name__)


def _setup_logging() -> None:
    name = os.environ.get("SALT_LOG", "warning").upper()
    level = getattr(logging, name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _config_from_args(args: argparse.Namespace) -> AdapterConfig:
    return AdapterConfig(
        encoder_checkpoint=getattr(args, "encoder_checkpoint", "") or "",
        vocoder_checkpoint=getattr(args, "vocoder_checkpoint", "") or "",
        variant=args.variant,
        layer=args.layer,
        sample_rate=args.sample_rate,
        workers=getattr(args, "workers", 1),
    )


def cmd_extract(args: argparse.Namespace) -> int:
    extract_file(args.audio, args.out, _config_from_args(args))
    log.info("extracted %s -> %s", args.audio, args.out)
    return 0


def cmd_vocode(args: argparse.Namespace) -> int:
    vocode_file(args.features, args.out, _config_from_args(args))
    log.info("vocoded %s -> %s", args.features, args.out)
    return 0


def cmd_batch_extract(args: argparse.Namespace) -> int:
    result = batch_extract(args.manifest, args.out_dir, _config_from_args(args))
    manifest_out = args.out_manifest or os.path.join(args.out_dir, "manifest.tsv")
    write_feature_manifest(result, manifest_out)
    log.info("wrote %d feature files and %s", len(result.written), manifest_out)
    if result.failures:
        listing = "\n".join(f"  {path}: {reason}" for path, reason in result.failures)
        print(
            f"error: {len(result.failures)} of "
            f"{len(result.failures) + len(result.written)} inputs failed:\n{listing}",
            file=sys.stderr,
        )
        return 1
    return 0


def _add_shared(p: argparse.ArgumentParser, *, vocoder: bool = False) -> None:
    if vocoder:
        p.add_argument("--vocoder-checkpoint", required=True, help="vocoder checkpoint directory")
    else:
        p.add_argument("--encoder-checkpoint", required=True, help="encoder checkpoint directory")
        p.add_argument(
            "--variant",
            choices=sorted(VARIANT_LAYERS),
            default="base",
            help="encoder variant; sets the default tap layer",
        )
        p.add_argument(
            "--layer", type=int, help="hidden-state index to tap (default: variant's)"
        )
    p.add_argument(
        "--sample-rate", type=int, default=AdapterConfig().sample_rate, help="audio rate in Hz"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="salt-adapter",
        description="bridge recorded audio to and from the feature-domain engine",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="one WAV -> one feature file")
    p.add_argument("audio", help="16-bit PCM mono WAV input")
    p.add_argument("--out", required=True, help="output feature file path")
    _add_shared(p)
    p.set_defaults(func=cmd_extract, variant="base")

    p = sub.add_parser("vocode", help="one feature file -> one WAV")
    p.add_argument("features", help="feature file input")
    p.add_argument("--out", required=True, help="output WAV path")
    _add_shared(p, vocoder=True)
    p.set_defaults(func=cmd_vocode, variant="base", layer=None)

    p = sub.add_parser("batch-extract", help="extract a speaker<TAB>audio manifest")
    p.add_argument("--manifest", required=True, help="speaker<TAB>audio_path lines")
    p.add_argument("--out-dir", required=True, help="directory for feature files")
    p.add_argument(
        "--out-manifest", help="feature manifest path (default: <out-dir>/manifest.tsv)"
    )
    p.add_argument("--workers", type=int, default=1, help="parallel workers (default 1)")
    _add_shared(p)
    p.set_defaults(func=cmd_batch_extract)
    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FeatureFileError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
