#!/usr/bin/env python3
"""Generate a synthetic feature corpus (Gaussian speaker clusters) plus its
manifest, ready for `saltkit build-pool` / `saltkit anonymize`.

Example:
    python scripts/make_synthetic_corpus.py out/corpus --speakers 20 --utterances 8
"""

import argparse

from saltkit.synth import make_corpus


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out_dir", help="directory to create the corpus in")
    parser.add_argument("--speakers", type=int, default=8)
    parser.add_argument("--utterances", type=int, default=4, help="per speaker")
    parser.add_argument("--frames", type=int, default=60, help="per utterance")
    parser.add_argument("--dims", type=int, default=32)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--spread", type=float, default=3.0, help="between-speaker std")
    parser.add_argument("--jitter", type=float, default=0.25, help="within-speaker std")
    args = parser.parse_args()

    manifest = make_corpus(
        args.out_dir,
        n_speakers=args.speakers,
        n_utterances=args.utterances,
        frames=args.frames,
        dims=args.dims,
        seed=args.seed,
        spread=args.spread,
        jitter=args.jitter,
    )
    print(f"wrote corpus manifest: {manifest}")


if __name__ == "__main__":
    main()
