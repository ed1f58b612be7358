#!/usr/bin/env python3
"""Measure how extrapolation widens the pseudo-speaker distribution.

For each scale s, one fixed source utterance is anonymized under many
seeds against a synthetic pool; the spread of the resulting utterance
means (trace of their covariance) should grow strictly with s.  Emits a
TSV of per-seed means for external plotting.

Example:
    python scripts/run_spread_experiment.py --seeds 500 --scales 0 1 2 --out spread.tsv
"""

import argparse

import numpy as np

from saltkit.blender import BlendConfig, anonymize
from saltkit.prng import SplitMix64, substream_seed
from saltkit.synth import make_pool, utterance_features

SOURCE_STREAM = 1_000_003  # substream index reserved for the source utterance


def spread_trace(pool, source, scale: float, seeds: int, k: int, m: int) -> tuple[float, np.ndarray]:
    cfg = BlendConfig(m=m, k=k, scale=scale, preserve=0.0, seed=0)
    means = np.empty((seeds, source.shape[1]))
    for i in range(seeds):
        output, _ = anonymize(source, pool, cfg, stream_seed=substream_seed(0, i))
        means[i] = output.mean(axis=0)
    centered = means - means.mean(axis=0)
    trace = float(np.trace(centered.T @ centered) / (seeds - 1))
    return trace, means


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--speakers", type=int, default=16)
    parser.add_argument("--dims", type=int, default=32)
    parser.add_argument("--frames", type=int, default=48, help="reference frames per speaker")
    parser.add_argument("--source-frames", type=int, default=24)
    parser.add_argument("--seeds", type=int, default=500, help="pseudo-speaker draws per scale")
    parser.add_argument("--scales", type=float, nargs="+", default=[0.0, 1.0, 2.0])
    parser.add_argument("--pool-seed", type=int, default=0)
    parser.add_argument("--k", type=int, default=4)
    parser.add_argument("--m", type=int, default=4)
    parser.add_argument("--out", help="optional TSV of per-seed utterance means")
    args = parser.parse_args()

    pool = make_pool(
        n_speakers=args.speakers,
        dims=args.dims,
        frames_per_speaker=args.frames,
        seed=args.pool_seed,
    )
    rng = SplitMix64(substream_seed(args.pool_seed, SOURCE_STREAM))
    center = utterance_features(np.zeros(args.dims), 1, rng)[0].astype(np.float64)
    source = utterance_features(center, args.source_frames, rng)

    rows = []
    for scale in args.scales:
        trace, means = spread_trace(pool, source, scale, args.seeds, args.k, args.m)
        print(f"scale {scale:g}: covariance trace of utterance means = {trace:.6f}")
        rows.extend(
            f"{scale:g}\t{seed}\t" + "\t".join(repr(float(v)) for v in mean)
            for seed, mean in enumerate(means)
        )
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("\n".join(rows) + "\n")
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
