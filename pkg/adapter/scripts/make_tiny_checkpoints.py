"""Write tiny seeded encoder/vocoder checkpoints for demos and tests.

Usage: python3 scripts/make_tiny_checkpoints.py OUT_DIR [--seed N]
"""

from __future__ import annotations

import argparse

from salt_adapter.tinymodels import save_tiny_checkpoints


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out_dir")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    encoder_dir, vocoder_dir = save_tiny_checkpoints(args.out_dir, seed=args.seed)
    print(f"encoder checkpoint: {encoder_dir}")
    print(f"vocoder checkpoint: {vocoder_dir}")


if __name__ == "__main__":
    main()
