"""Run the 3x4x3 variant grid on the synthetic benchmark and print the table.

Axes: cnn (cgs, cgs_2d, cgs_avg), fusion (slice_attention, avg_pool,
max_pool, concat), tagger (bilstm, lstm, none). Every cell trains from the
same seed, so one run is comparable across rows.
"""

import argparse
import time
from dataclasses import replace

from fgn.config import default_config
from fgn.synth import split_corpus, synthetic_atlas, synthetic_corpus
from fgn.train import CNN_GRID, FUSION_GRID, TAGGER_GRID, ablate, format_ablation_table


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--epochs", type=int, default=10,
                        help="epochs per cell; 10 separates the variants, 50 saturates")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    atlas, pools = synthetic_atlas()
    train_set, dev_set = split_corpus(synthetic_corpus(pools))
    config = replace(default_config(), epochs=args.epochs, seed=args.seed)
    grid = {"cnn": list(CNN_GRID), "fusion": list(FUSION_GRID), "tagger": list(TAGGER_GRID)}

    start = time.perf_counter()
    cells = ablate(config, grid, train_set, dev_set, atlas,
                   log=lambda line: print("# " + line))
    print(format_ablation_table(cells))
    print("# %d cells in %.1fs" % (len(cells), time.perf_counter() - start))
    return 0 if all(c.error is None for c in cells) else 1


if __name__ == "__main__":
    raise SystemExit(main())
