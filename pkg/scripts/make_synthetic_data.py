"""Write the synthetic benchmark to disk: glyph atlas, train/dev files, config.

The output directory is ready for the CLI:

    python3 scripts/make_synthetic_data.py --out data/synth
    fgn train --config data/synth/config.json --train data/synth/train.txt \
        --dev data/synth/dev.txt --atlas data/synth/glyphs --out model.fgn
"""

import argparse
import json
from pathlib import Path

from fgn.config import config_to_dict, default_config
from fgn.corpus import write_conll
from fgn.synth import (split_corpus, synthetic_atlas, synthetic_corpus,
                       write_atlas_dir)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--sentences", type=int, default=50)
    parser.add_argument("--per-pool", type=int, default=10,
                        help="glyphs per entity pool (PER, LOC) and filler pool")
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    atlas, pools = synthetic_atlas(per_pool=args.per_pool, filler=args.per_pool,
                                   seed=args.seed)
    write_atlas_dir(atlas, out / "glyphs")
    sentences = synthetic_corpus(pools, n_sentences=args.sentences, seed=args.seed + 4)
    train_set, dev_set = split_corpus(sentences)
    write_conll(train_set, out / "train.txt")
    write_conll(dev_set, out / "dev.txt")
    (out / "config.json").write_text(json.dumps(config_to_dict(default_config()), indent=2),
                                     encoding="utf-8")
    print("wrote %d glyphs, %d train / %d dev sentences to %s"
          % (len(atlas.entries), len(train_set), len(dev_set), out))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
