"""The assembled network: embed, glyph-encode, fuse, tag.

A model file carries everything needed to run stand-alone: parameters, the
config, the label scheme, the character vocabulary, and the glyph atlas, all
as FGNMDL1 records. Loading rebuilds the model at the stored seed and then
overwrites every parameter, so a save/load round trip is bit-exact.
"""

from __future__ import annotations

import json

import numpy as np

from .cgs_cnn import encode_sequence, init_cgs_params
from .config import RunConfig, config_from_dict, config_to_dict
from .corpus import TaggedSentence
from .embedding import FileBackedEmbedding, LookupTableEmbedding
from .fusion import fuse_character, init_fusion_params
from .glyphs import GlyphAtlas, sentence_to_graphs
from .serialize import array_to_bytes, bytes_to_array, read_records, write_records
from .tagger import (LabelScheme, bilstm_encode, init_crf_params,
                     init_tagger_params, nll_loss, viterbi_decode)


class FgnModel:
    def __init__(self, config: RunConfig, scheme: LabelScheme, vocab, atlas: GlyphAtlas):
        self.config = config
        self.scheme = scheme
        self.vocab = tuple(vocab)
        self.atlas = atlas
        rng = np.random.default_rng(config.seed)
        # parameter creation order is fixed; it defines the init rng stream
        if config.embedding.kind == "lookup_table":
            self.provider = LookupTableEmbedding(self.vocab, config.d_char, rng,
                                                 frozen=bool(config.embedding.frozen))
        else:
            if config.embedding.path is None:
                raise ValueError("file_backed embeddings need embedding.path in the config")
            self.provider = FileBackedEmbedding.from_file(config.embedding.path)
            if self.provider.dim != config.d_char:
                raise ValueError("embedding file holds %d-d vectors but the config says d_char=%d"
                                 % (self.provider.dim, config.d_char))
        self.cnn_params = init_cgs_params(config.cnn, rng)
        if config.fusion.variant == "slice_attention":
            self.fusion_params = init_fusion_params(config.fusion.k_char * config.fusion.k_glyph, rng)
        else:
            self.fusion_params = None
        self.tagger_params = init_tagger_params(config.tagger.variant, config.fused_dim(),
                                                config.d_hidden, rng, config.tagger.dropout_rate)
        self.crf = init_crf_params(scheme.label_count, config.tagger_output_dim(), rng)
        self.mask_scheme = scheme if config.tagger.constrain_transitions else None

    def parameters(self) -> list:
        params = list(self.provider.parameters())
        params.extend(self.cnn_params.values())
        if self.fusion_params is not None:
            params.extend(self.fusion_params.parameters())
        params.extend(self.tagger_params.parameters())
        params.extend(self.crf.parameters())
        return params

    def hidden_states(self, sentence: str, sentence_index: int = 0, training: bool = False,
                      rng: np.random.Generator | None = None, provider=None) -> list:
        provider = provider if provider is not None else self.provider
        char_vecs = provider.embed(sentence_index, sentence)
        graphs = sentence_to_graphs(self.atlas, sentence)
        glyph_vecs = encode_sequence(graphs, self.config.cnn, self.cnn_params, training, rng)
        spec = self.config.window_spec()
        xs = [fuse_character(c, g, spec, self.fusion_params,
                             variant=self.config.fusion.variant,
                             include_parts=self.config.fusion.include_parts)
              for c, g in zip(char_vecs, glyph_vecs)]
        return bilstm_encode(xs, self.tagger_params, training, rng)

    def loss(self, sentences: list, training: bool = True,
             rng: np.random.Generator | None = None, provider=None):
        batch = []
        for s in sentences:
            hs = self.hidden_states(s.chars, s.index, training, rng, provider)
            y = [self.scheme.label_index(lab) for lab in s.labels]
            batch.append((hs, y))
        return nll_loss(batch, self.crf, self.mask_scheme)

    def decode(self, sentence: str, sentence_index: int = 0, provider=None) -> list:
        hs = self.hidden_states(sentence, sentence_index, training=False, provider=provider)
        path = viterbi_decode(hs, self.crf, self.mask_scheme)
        return [self.scheme.labels[i] for i in path]

    def predict_sentence(self, sentence: str, sentence_index: int = 0, provider=None) -> TaggedSentence:
        labels = self.decode(sentence, sentence_index, provider)
        return TaggedSentence(sentence, tuple(labels), sentence_index)

    # ---- persistence ----

    def save(self, path) -> None:
        meta = {
            "format": 1,
            "config": config_to_dict(self.config),
            "entity_types": list(self.scheme.entity_types),
            "labels": list(self.scheme.labels),
            "vocab": "".join(self.vocab),
            "fallback_seed": self.atlas.fallback_seed,
        }
        records = {"meta/model": bytes_to_array(json.dumps(meta).encode("utf-8"))}
        for cp, img in sorted(self.atlas.entries.items()):
            records["atlas/U+%04X" % cp] = img
        for p in self.parameters():
            records["param/" + p.name] = p.data
        write_records(path, records)

    @classmethod
    def load(cls, path) -> "FgnModel":
        records = read_records(path)
        if "meta/model" not in records:
            raise OSError("model file %s has no meta record" % path)
        meta = json.loads(array_to_bytes(records["meta/model"]).decode("utf-8"))
        if meta.get("format") != 1:
            raise OSError("model file %s has unsupported format %r" % (path, meta.get("format")))
        config = config_from_dict(meta["config"])
        scheme = LabelScheme(entity_types=tuple(meta["entity_types"]), labels=tuple(meta["labels"]))
        atlas = GlyphAtlas(fallback_seed=int(meta["fallback_seed"]))
        for name, arr in records.items():
            if name.startswith("atlas/U+"):
                atlas.add(int(name[len("atlas/U+"):], 16), arr)
        model = cls(config, scheme, meta["vocab"], atlas)
        for p in model.parameters():
            key = "param/" + p.name
            if key not in records:
                raise OSError("model file %s is missing parameter %s" % (path, p.name))
            stored = records[key]
            if stored.shape != p.data.shape:
                raise OSError("model file %s: parameter %s has shape %r, expected %r"
                              % (path, p.name, stored.shape, p.data.shape))
            p.data[...] = stored
        return model
