"""Release gate: one test per shipping requirement, in order.

Each test states a property the package must hold end to end — gradient
integrity, CRF agreement with enumeration, normalization, the window
contract, attention contracts, encoder shape/locality, synthetic overfit,
ablation determinism, and round-trips — with explicit tolerances and wall
clock budgets. `pytest -v tests/test_acceptance.py` prints one pass/fail
line per requirement.
"""

import itertools
import time
from dataclasses import replace

import numpy as np
import pytest
from numpy.random import default_rng

from fgn.cgs_cnn import CgsCnnConfig, encode_sequence, init_cgs_params
from fgn.checks import run_checks
from fgn.config import FusionConfig, RunConfig, default_config
from fgn.corpus import EntitySpan, decode_entities, encode_entities
from fgn.fusion import (WindowSpec, fuse_character, init_fusion_params,
                        slice_attention, validate_window)
from fgn.glyphs import GlyphAtlas
from fgn.model import FgnModel
from fgn.synth import split_corpus, synthetic_atlas, synthetic_corpus
from fgn.tagger import (LabelScheme, brute_force_best, brute_force_loglik,
                        crf_log_likelihood, init_crf_params, viterbi_decode)
from fgn.tensor import Tensor
from fgn.train import CNN_GRID, FUSION_GRID, TAGGER_GRID, ablate, format_ablation_table, train


@pytest.fixture(scope="module")
def oracle_instances():
    """500 random CRF instances, sentence lengths 1..4 over 2..4 labels."""
    rng = default_rng(20260819)
    instances = []
    for _ in range(500):
        tau = int(rng.integers(1, 5))
        label_count = int(rng.integers(2, 5))
        crf = init_crf_params(label_count, 4, rng)
        crf.transitions.data[:] = rng.normal(size=(label_count, label_count))
        crf.start_scores.data[:] = rng.normal(size=label_count)
        hs = [Tensor(rng.normal(size=4)) for _ in range(tau)]
        y = [int(v) for v in rng.integers(0, label_count, size=tau)]
        instances.append((hs, y, crf))
    return instances


@pytest.fixture(scope="module")
def synthetic_data():
    atlas, pools = synthetic_atlas(per_pool=10, filler=10)
    assert len(atlas.entries) == 30
    sentences = synthetic_corpus(pools, n_sentences=50)
    train_set, dev_set = split_corpus(sentences, dev_fraction=0.2)
    return atlas, train_set, dev_set


def test_gradient_integrity():
    # every differentiable op, and the assembled loss on a 3-character
    # sentence, agree with central finite differences; budget one minute
    start = time.perf_counter()
    results = run_checks("all")
    elapsed = time.perf_counter() - start
    failed = [name for name, report in results if not report.passed]
    assert failed == []
    assert any(name == "full_fgn_loss" for name, _ in results)
    for _, report in results:
        assert report.max_rel_error < report.tolerance
    assert elapsed < 60.0, "gradient checks took %.1fs" % elapsed


def test_crf_oracle_equivalence(oracle_instances):
    # forward-algorithm likelihood within 1e-10 of full enumeration, and
    # Viterbi attains the enumerated maximum, on all 500 instances in <10s
    start = time.perf_counter()
    for hs, y, crf in oracle_instances:
        got = float(crf_log_likelihood(hs, y, crf).data)
        want = brute_force_loglik(hs, y, crf)
        assert abs(got - want) < 1e-10
        path = viterbi_decode(hs, crf)
        best = brute_force_best(hs, crf)
        ll_path = float(crf_log_likelihood(hs, path, crf).data)
        ll_best = float(crf_log_likelihood(hs, best, crf).data)
        assert ll_path >= ll_best - 1e-12
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, "oracle sweep took %.1fs" % elapsed


def test_crf_normalization(oracle_instances):
    # P(y|s) from the production likelihood sums to 1 over every possible
    # label sequence, on all oracle instances
    for hs, _, crf in oracle_instances:
        label_count, tau = crf.label_count, len(hs)
        total = sum(np.exp(float(crf_log_likelihood(hs, list(y), crf).data))
                    for y in itertools.product(range(label_count), repeat=tau))
        assert abs(total - 1.0) < 1e-10


def test_window_contract():
    full = WindowSpec(d_char=768, k_char=96, s_char=12, d_glyph=64, k_glyph=8, s_glyph=1)
    assert validate_window(full) == 57
    small = WindowSpec(d_char=8, k_char=4, s_char=2, d_glyph=4, k_glyph=2, s_glyph=1)
    assert validate_window(small) == 3
    # swapping the strides breaks the slice-count equation: 85 vs 53
    broken = WindowSpec(d_char=768, k_char=96, s_char=8, d_glyph=64, k_glyph=12, s_glyph=1)
    with pytest.raises(ValueError) as err:
        validate_window(broken)
    assert "85" in str(err.value) and "53" in str(err.value)


def test_slice_attention_contracts():
    rng = default_rng(42)
    params = init_fusion_params(6, rng)
    for _ in range(25):
        slices = [Tensor(rng.normal(size=6)) for _ in range(int(rng.integers(1, 8)))]
        _, weights = slice_attention(slices, params)
        assert np.all(weights >= 0.0)
        assert abs(weights.sum() - 1.0) < 1e-12

    # with zero attention parameters every slice weighs the same, so the
    # whole fused vector matches avg_pool bit for bit
    spec = WindowSpec(d_char=8, k_char=4, s_char=2, d_glyph=4, k_glyph=2, s_glyph=1)
    zero = init_fusion_params(8, rng)
    for p in zero.parameters():
        p.data[...] = 0.0
    for _ in range(10):
        c_v = Tensor(rng.normal(size=8))
        g_v = Tensor(rng.normal(size=4))
        att = fuse_character(c_v, g_v, spec, zero, variant="slice_attention")
        avg = fuse_character(c_v, g_v, spec, None, variant="avg_pool")
        assert np.array_equal(att.data, avg.data)


def test_cgs_cnn_shape_and_locality():
    rng = default_rng(7)
    config = CgsCnnConfig(dropout_rate=0.0)
    params = init_cgs_params(config, default_rng(0))
    for tau in (1, 4, 17):
        graphs = [rng.random((50, 50)) for _ in range(tau)]
        vecs = encode_sequence(graphs, config, params)
        assert len(vecs) == tau
        assert all(v.shape == (64,) for v in vecs)

    # cgs_2d treats characters independently: a perturbed neighbor leaves
    # the vector untouched
    flat = CgsCnnConfig(variant="cgs_2d", dropout_rate=0.0)
    flat_params = init_cgs_params(flat, default_rng(0))
    graphs = [rng.random((50, 50)) for _ in range(4)]
    base = [v.data.copy() for v in encode_sequence(graphs, flat, flat_params)]
    poked = list(graphs)
    poked[2] = rng.random((50, 50))
    after = encode_sequence(poked, flat, flat_params)
    assert np.array_equal(after[1].data, base[1])
    assert not np.array_equal(after[2].data, base[2])

    # cgs mixes along the sentence with two 3-wide sequence convolutions:
    # influence reaches exactly two positions
    base = [v.data.copy() for v in encode_sequence(graphs, config, params)]
    near = list(graphs)
    near[2] = rng.random((50, 50))
    after = encode_sequence(near, config, params)
    assert not np.array_equal(after[0].data, base[0])
    far = list(graphs)
    far[3] = rng.random((50, 50))
    after = encode_sequence(far, config, params)
    assert np.array_equal(after[0].data, base[0])


def test_synthetic_overfit(synthetic_data):
    # 50 sentences over 30 synthetic glyphs whose quadrant pattern carries
    # the entity type: the default model must reach dev F1 = 1.0 within 50
    # epochs and five minutes on one core
    atlas, train_set, dev_set = synthetic_data
    config = default_config()
    assert config.epochs == 50
    start = time.perf_counter()
    result = train(config, train_set, dev_set, atlas)
    elapsed = time.perf_counter() - start
    assert result.best_f1 == 1.0, "best dev F1 %.4f at epoch %d" % (result.best_f1, result.best_epoch)
    assert result.best_epoch <= 50
    assert elapsed < 300.0, "training took %.0fs" % elapsed


def test_ablation_harness(synthetic_data):
    # the full 3x4x3 grid completes on the synthetic corpus and re-running
    # a cell with the same seed reproduces its F1 exactly
    atlas, train_set, dev_set = synthetic_data
    config = replace(default_config(), epochs=1)
    grid = {"cnn": list(CNN_GRID), "fusion": list(FUSION_GRID), "tagger": list(TAGGER_GRID)}
    cells = ablate(config, grid, train_set, dev_set, atlas)
    assert len(cells) == 36
    errors = [(c.cnn, c.fusion, c.tagger, c.error) for c in cells if c.error is not None]
    assert errors == []

    table = format_ablation_table(cells)
    assert len(table.splitlines()) == 38           # header + rule + 36 rows

    by_key = {(c.cnn, c.fusion, c.tagger): c.f1 for c in cells}
    for key in (("cgs", "slice_attention", "bilstm"), ("cgs_2d", "max_pool", "lstm")):
        rerun = ablate(config, {"cnn": [key[0]], "fusion": [key[1]], "tagger": [key[2]]},
                       train_set, dev_set, atlas)
        assert rerun[0].error is None
        assert rerun[0].f1 == by_key[key]


def test_roundtrips(tmp_path):
    # (a) a saved model predicts bit-identically after loading
    config = RunConfig(seed=9, d_char=8, d_hidden=6,
                       fusion=FusionConfig(k_char=4, s_char=2, k_glyph=32, s_glyph=16))
    scheme = LabelScheme.from_entity_types(("LOC", "PER"))
    atlas, pools = synthetic_atlas(per_pool=3, filler=2)
    vocab = pools["PER"] + pools["LOC"] + pools["O"]
    model = FgnModel(config, scheme, vocab, atlas)
    path = tmp_path / "model.fgn"
    model.save(path)
    loaded = FgnModel.load(path)
    for sentence in (vocab[:5], vocab[3:6], "未见过字"):
        assert loaded.decode(sentence) == model.decode(sentence)
        a = model.loss([model.predict_sentence(sentence)], training=False)
        b = loaded.loss([loaded.predict_sentence(sentence)], training=False)
        assert float(a.data) == float(b.data)      # bit-identical forward pass

    # (b) encoding well-formed entities and decoding them back is the
    # identity, across 1000 random span layouts
    rng = default_rng(1000)
    for _ in range(1000):
        length = int(rng.integers(1, 15))
        spans, i = [], 0
        while i < length:
            i += int(rng.integers(0, 4))
            if i >= length:
                break
            run = int(rng.integers(1, min(4, length - i) + 1))
            etype = ("PER", "LOC", "ORG")[int(rng.integers(3))]
            spans.append(EntitySpan(i, i + run - 1, etype))
            i += run
        assert decode_entities(encode_entities(length, spans)) == spans
