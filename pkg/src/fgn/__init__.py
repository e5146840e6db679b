"""Glyph-fused sequence tagging for Chinese NER.

The pieces, bottom to top: a small reverse-mode autodiff engine over numpy
arrays (`tensor`, `ops`), a glyph image pipeline (`glyphs`), the character
graph sequence encoder (`cgs_cnn`), character embeddings (`embedding`),
out-of-sync sliding-window fusion with slice attention (`fusion`), a
BiLSTM-CRF tagger (`tagger`), and training/ablation drivers (`train`).
"""

from .tensor import Tensor, Parameter
from .config import RunConfig, load_config, default_config, full_scale_config
from .glyphs import GlyphAtlas, load_atlas
from .corpus import TaggedSentence, EntitySpan, load_conll, decode_entities, evaluate
from .model import FgnModel
from .train import train, ablate

__all__ = [
    "Tensor",
    "Parameter",
    "RunConfig",
    "load_config",
    "default_config",
    "full_scale_config",
    "GlyphAtlas",
    "load_atlas",
    "TaggedSentence",
    "EntitySpan",
    "load_conll",
    "decode_entities",
    "evaluate",
    "FgnModel",
    "train",
    "ablate",
]
