"""Run configuration: dataclasses, JSON loading with strict keys, presets."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from .cgs_cnn import CgsCnnConfig
from .fusion import FUSION_VARIANTS, WindowSpec, validate_window
from .tagger import TAGGER_VARIANTS

EMBEDDING_KINDS = ("lookup_table", "file_backed")


@dataclass(frozen=True)
class FusionConfig:
    variant: str = "slice_attention"
    k_char: int = 8
    s_char: int = 4
    k_glyph: int = 16
    s_glyph: int = 8
    include_parts: bool = True

    def __post_init__(self):
        if self.variant not in FUSION_VARIANTS:
            raise ValueError("fusion variant must be one of %s, got %r"
                             % (", ".join(FUSION_VARIANTS), self.variant))


@dataclass(frozen=True)
class TaggerConfig:
    variant: str = "bilstm"
    dropout_rate: float = 0.5
    constrain_transitions: bool = False

    def __post_init__(self):
        if self.variant not in TAGGER_VARIANTS:
            raise ValueError("tagger variant must be one of %s, got %r"
                             % (", ".join(TAGGER_VARIANTS), self.variant))
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("tagger dropout_rate must be in [0, 1), got %r" % (self.dropout_rate,))


@dataclass(frozen=True)
class EmbeddingConfig:
    kind: str = "lookup_table"
    frozen: bool | None = None
    path: str | None = None
    dev_path: str | None = None

    def __post_init__(self):
        if self.kind not in EMBEDDING_KINDS:
            raise ValueError("embedding kind must be one of %s, got %r"
                             % (", ".join(EMBEDDING_KINDS), self.kind))
        if self.frozen is None:
            object.__setattr__(self, "frozen", self.kind == "file_backed")
        if self.kind == "file_backed" and not self.frozen:
            raise ValueError("file_backed embeddings are frozen by definition")


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    epochs: int = 50
    batch_size: int = 1
    learning_rate: float = 0.002
    d_char: int = 32
    d_hidden: int = 128
    cnn: CgsCnnConfig = field(default_factory=CgsCnnConfig)
    fusion: FusionConfig = field(default_factory=FusionConfig)
    tagger: TaggerConfig = field(default_factory=TaggerConfig)
    embedding: EmbeddingConfig = field(default_factory=EmbeddingConfig)

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0, got %d" % self.epochs)
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1, got %d" % self.batch_size)
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive, got %r" % (self.learning_rate,))
        if self.d_char < 1 or self.d_hidden < 1:
            raise ValueError("d_char and d_hidden must be positive")
        if self.fusion.variant != "concat":
            validate_window(self.window_spec())

    def window_spec(self) -> WindowSpec:
        return WindowSpec(d_char=self.d_char, k_char=self.fusion.k_char, s_char=self.fusion.s_char,
                          d_glyph=self.cnn.glyph_dim, k_glyph=self.fusion.k_glyph,
                          s_glyph=self.fusion.s_glyph)

    def fused_dim(self) -> int:
        if self.fusion.variant == "concat":
            return self.d_char + self.cnn.glyph_dim
        pair = self.fusion.k_char * self.fusion.k_glyph
        if self.fusion.include_parts:
            return self.d_char + self.cnn.glyph_dim + pair
        return pair

    def tagger_output_dim(self) -> int:
        return self.fused_dim() if self.tagger.variant == "none" else self.d_hidden


def default_config() -> RunConfig:
    """Desk-scale defaults: small vectors, window 8/4 over 32-d chars and 16/8 over 64-d glyphs (7 slices)."""
    return RunConfig()


def full_scale_config() -> RunConfig:
    """Production-scale vector sizes; the window is 96/12 and 8/1 so both streams cut 57 slices."""
    return RunConfig(
        d_char=768,
        d_hidden=764,
        fusion=FusionConfig(k_char=96, s_char=12, k_glyph=8, s_glyph=1),
    )


# ---- JSON (strict keys) ----

_WINDOW_KEYS = ("k_char", "s_char", "k_glyph", "s_glyph")
_CNN_KEYS = ("variant", "conv3d_channels", "tianzige_channels", "pyramid_channels",
             "pool1d_window", "pool1d_stride", "dropout_rate")
_FUSION_KEYS = ("variant", "window", "include_parts")
_TAGGER_KEYS = ("variant", "dropout_rate", "constrain_transitions")
_EMBED_KEYS = ("kind", "frozen", "path", "dev_path")
_TOP_KEYS = ("seed", "epochs", "batch_size", "learning_rate", "d_char", "d_hidden",
             "cnn", "fusion", "tagger", "embedding")


def _check_keys(data: dict, allowed, where: str) -> None:
    if not isinstance(data, dict):
        raise ValueError("config section %s must be an object" % where)
    for key in data:
        if key not in allowed:
            raise ValueError("unknown config key %r in %s" % (key, where))


def config_from_dict(data: dict) -> RunConfig:
    _check_keys(data, _TOP_KEYS, "the top level")
    kwargs = {k: data[k] for k in ("seed", "epochs", "batch_size", "learning_rate",
                                   "d_char", "d_hidden") if k in data}
    if "cnn" in data:
        _check_keys(data["cnn"], _CNN_KEYS, "cnn")
        cnn = dict(data["cnn"])
        if "pyramid_channels" in cnn:
            cnn["pyramid_channels"] = tuple(cnn["pyramid_channels"])
        kwargs["cnn"] = CgsCnnConfig(**cnn)
    if "fusion" in data:
        _check_keys(data["fusion"], _FUSION_KEYS, "fusion")
        fusion = dict(data["fusion"])
        window = fusion.pop("window", {})
        _check_keys(window, _WINDOW_KEYS, "fusion.window")
        kwargs["fusion"] = FusionConfig(**fusion, **window)
    if "tagger" in data:
        _check_keys(data["tagger"], _TAGGER_KEYS, "tagger")
        kwargs["tagger"] = TaggerConfig(**data["tagger"])
    if "embedding" in data:
        _check_keys(data["embedding"], _EMBED_KEYS, "embedding")
        kwargs["embedding"] = EmbeddingConfig(**data["embedding"])
    return RunConfig(**kwargs)


def config_to_dict(config: RunConfig) -> dict:
    return {
        "seed": config.seed,
        "epochs": config.epochs,
        "batch_size": config.batch_size,
        "learning_rate": config.learning_rate,
        "d_char": config.d_char,
        "d_hidden": config.d_hidden,
        "cnn": {
            "variant": config.cnn.variant,
            "conv3d_channels": config.cnn.conv3d_channels,
            "tianzige_channels": config.cnn.tianzige_channels,
            "pyramid_channels": list(config.cnn.pyramid_channels),
            "pool1d_window": config.cnn.pool1d_window,
            "pool1d_stride": config.cnn.pool1d_stride,
            "dropout_rate": config.cnn.dropout_rate,
        },
        "fusion": {
            "variant": config.fusion.variant,
            "include_parts": config.fusion.include_parts,
            "window": {
                "k_char": config.fusion.k_char,
                "s_char": config.fusion.s_char,
                "k_glyph": config.fusion.k_glyph,
                "s_glyph": config.fusion.s_glyph,
            },
        },
        "tagger": {
            "variant": config.tagger.variant,
            "dropout_rate": config.tagger.dropout_rate,
            "constrain_transitions": config.tagger.constrain_transitions,
        },
        "embedding": {
            "kind": config.embedding.kind,
            "frozen": config.embedding.frozen,
            "path": config.embedding.path,
            "dev_path": config.embedding.dev_path,
        },
    }


def load_config(path) -> RunConfig:
    return config_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def with_variants(config: RunConfig, cnn: str | None = None, fusion: str | None = None,
                  tagger: str | None = None) -> RunConfig:
    """Copy of config with ablation switches applied."""
    out = config
    if cnn is not None:
        out = replace(out, cnn=replace(out.cnn, variant=cnn))
    if fusion is not None:
        out = replace(out, fusion=replace(out.fusion, variant=fusion))
    if tagger is not None:
        out = replace(out, tagger=replace(out.tagger, variant=tagger))
    return out
