"""Named gradient checks behind `fgn gradcheck`.

Every check builds a deterministic scalar loss over Parameters (inputs are
wrapped as Parameters so their gradients are verified too) and runs the
finite-difference comparison. Fixed random direction vectors mix gradient
signs so sign errors cannot cancel in the sum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cgs_cnn import CgsCnnConfig, encode_sequence, init_cgs_params
from .config import default_config
from .corpus import TaggedSentence
from .fusion import WindowSpec, fuse_character, init_fusion_params
from .glyphs import GlyphAtlas
from .gradcheck import GradCheckReport, grad_check
from .model import FgnModel
from .ops import conv2d, conv3d, dropout, lstm_step, maxpool2d, pool1d
from .ops import init_lstm_params
from .tagger import (LabelScheme, TaggerParams, bilstm_encode, init_crf_params,
                     nll_loss)
from .tensor import Parameter, Tensor, sigmoid, softmax, tanh


@dataclass
class CheckSpec:
    name: str
    modules: tuple      # which CLI module selections include this check
    build: callable
    tolerance: float = 1e-4
    max_coords: int | None = None


def _p(rng, shape, name):
    return Parameter(rng.standard_normal(shape), name=name)


def _dot(x: Tensor, direction: np.ndarray) -> Tensor:
    return (x * Tensor(direction)).sum()


def _build_sigmoid():
    rng = np.random.default_rng(101)
    x = _p(rng, (5,), "x")
    return (lambda: sigmoid(x).sum()), [x]


def _build_tanh():
    rng = np.random.default_rng(102)
    x = _p(rng, (6,), "x")
    r = rng.standard_normal(6)
    return (lambda: _dot(tanh(x), r)), [x]


def _build_softmax():
    rng = np.random.default_rng(103)
    x = _p(rng, (5,), "x")
    r = rng.standard_normal(5)
    return (lambda: _dot(softmax(x), r)), [x]


def _build_affine():
    rng = np.random.default_rng(104)
    w = _p(rng, (3, 4), "w")
    b = _p(rng, (3,), "b")
    x = _p(rng, (4,), "x")
    r = rng.standard_normal(3)
    return (lambda: _dot(w @ x + b, r)), [w, b, x]


def _build_dropout():
    rng = np.random.default_rng(105)
    x = _p(rng, (4, 5), "x")
    r = rng.standard_normal((4, 5))
    return (lambda: _dot(dropout(x, 0.3, True, np.random.default_rng(77)), r)), [x]


def _build_conv2d():
    rng = np.random.default_rng(106)
    x = _p(rng, (2, 6, 6), "x")
    k = _p(rng, (3, 2, 3, 3), "k")
    r = rng.standard_normal((3, 6, 6))
    return (lambda: _dot(conv2d(x, k), r)), [x, k]


def _build_conv3d():
    rng = np.random.default_rng(107)
    x = _p(rng, (1, 3, 6, 6), "x")
    k = _p(rng, (2, 1, 3, 3, 3), "k")
    r = rng.standard_normal((2, 3, 6, 6))
    return (lambda: _dot(conv3d(x, k), r)), [x, k]


def _build_maxpool2d():
    rng = np.random.default_rng(108)
    x = _p(rng, (2, 6, 6), "x")
    r1 = rng.standard_normal((2, 3, 3))
    r2 = rng.standard_normal((2, 4, 4))
    return (lambda: _dot(maxpool2d(x, 2, 2), r1) + _dot(maxpool2d(x, 3, 1), r2)), [x]


def _build_pool1d():
    rng = np.random.default_rng(109)
    x = _p(rng, (11,), "x")
    r = rng.standard_normal(3)
    return (lambda: _dot(pool1d(x, 4, 3, "max"), r) + _dot(pool1d(x, 4, 3, "avg"), r)), [x]


def _build_encode_sequence():
    rng = np.random.default_rng(110)
    config = CgsCnnConfig(dropout_rate=0.0)
    params = init_cgs_params(config, np.random.default_rng(0))
    graphs = [rng.random((50, 50)) for _ in range(2)]
    dirs = [rng.standard_normal(64) for _ in range(2)]

    def loss():
        vecs = encode_sequence(graphs, config, params, training=False)
        total = _dot(vecs[0], dirs[0])
        return total + _dot(vecs[1], dirs[1])

    return loss, list(params.values())


def _build_lstm_step():
    rng = np.random.default_rng(111)
    cell = init_lstm_params(4, 4, np.random.default_rng(1), "cell")
    for p in cell.parameters():
        p.data[...] = rng.standard_normal(p.data.shape)
    x = _p(rng, (4,), "x")
    h0 = _p(rng, (4,), "h0")
    c0 = _p(rng, (4,), "c0")
    rh = rng.standard_normal(4)
    rc = rng.standard_normal(4)

    def loss():
        h, c = lstm_step(x, h0, c0, cell)
        return _dot(h, rh) + _dot(c, rc)

    return loss, cell.parameters() + [x, h0, c0]


def _build_fusion():
    rng = np.random.default_rng(112)
    spec = WindowSpec(d_char=8, k_char=4, s_char=2, d_glyph=4, k_glyph=2, s_glyph=1)
    params = init_fusion_params(8, np.random.default_rng(2))
    for p in params.parameters():
        p.data[...] = rng.standard_normal(p.data.shape)
    c_v = _p(rng, (8,), "c_v")
    g_v = _p(rng, (4,), "g_v")
    r = rng.standard_normal(8 + 4 + 8)

    def loss():
        return _dot(fuse_character(c_v, g_v, spec, params, "slice_attention"), r)

    return loss, params.parameters() + [c_v, g_v]


def _build_bilstm_crf():
    rng = np.random.default_rng(113)
    fwd = init_lstm_params(5, 4, np.random.default_rng(3), "fwd")
    bwd = init_lstm_params(5, 4, np.random.default_rng(4), "bwd")
    tg = TaggerParams(variant="bilstm", forward_cell=fwd, backward_cell=bwd)
    crf = init_crf_params(3, 4, np.random.default_rng(5))
    for p in tg.parameters() + crf.parameters():
        p.data[...] = 0.5 * rng.standard_normal(p.data.shape)
    xs = [_p(rng, (5,), "x%d" % t) for t in range(3)]
    y = [1, 0, 2]

    def loss():
        return nll_loss([(bilstm_encode(xs, tg), y)], crf)

    return loss, tg.parameters() + crf.parameters() + xs


def _build_crf_passthrough():
    rng = np.random.default_rng(114)
    scheme = LabelScheme.from_entity_types(["PER"])
    crf = init_crf_params(scheme.label_count, 4, np.random.default_rng(6))
    for p in crf.parameters():
        p.data[...] = 0.5 * rng.standard_normal(p.data.shape)
    hs = [_p(rng, (4,), "h%d" % t) for t in range(3)]
    y = [scheme.label_index(lab) for lab in ("B-PER", "E-PER", "O")]
    return (lambda: nll_loss([(hs, y)], crf, scheme)), crf.parameters() + hs


def _build_full_fgn():
    from dataclasses import replace
    base = default_config()
    config = replace(base, cnn=replace(base.cnn, dropout_rate=0.0),
                     tagger=replace(base.tagger, dropout_rate=0.0))
    scheme = LabelScheme.from_entity_types(["PER"])
    atlas = GlyphAtlas(fallback_seed=5)   # fallback glyphs: continuous, no pooling ties
    sentence = TaggedSentence("甲乙丙", ("S-PER", "O", "O"), 0)
    model = FgnModel(config, scheme, tuple("甲乙丙"), atlas)

    def loss():
        return model.loss([sentence], training=False)

    return loss, model.parameters()


CHECKS = (
    CheckSpec("sigmoid_sum", (), _build_sigmoid, tolerance=1e-6),
    CheckSpec("tanh", (), _build_tanh),
    CheckSpec("softmax", (), _build_softmax),
    CheckSpec("affine", (), _build_affine),
    CheckSpec("dropout_fixed_mask", (), _build_dropout),
    CheckSpec("conv2d", ("cnn",), _build_conv2d),
    CheckSpec("conv3d", ("cnn",), _build_conv3d),
    CheckSpec("maxpool2d", ("cnn",), _build_maxpool2d),
    CheckSpec("pool1d_max_avg", ("cnn",), _build_pool1d),
    CheckSpec("encode_sequence", ("cnn",), _build_encode_sequence, max_coords=4),
    CheckSpec("lstm_step", ("tagger",), _build_lstm_step),
    CheckSpec("fuse_character_attention", ("fusion",), _build_fusion),
    CheckSpec("bilstm_crf_nll", ("tagger",), _build_bilstm_crf),
    CheckSpec("crf_passthrough_masked", ("tagger",), _build_crf_passthrough),
    CheckSpec("full_fgn_loss", ("full",), _build_full_fgn, max_coords=3),
)


def run_checks(module: str = "all") -> list:
    """Run the selected checks; returns (name, GradCheckReport) pairs."""
    if module not in ("all", "cnn", "fusion", "tagger"):
        raise ValueError("gradcheck module must be all, cnn, fusion or tagger, got %r" % (module,))
    results = []
    for spec in CHECKS:
        if module != "all" and module not in spec.modules:
            continue
        loss_fn, params = spec.build()
        report = grad_check(loss_fn, params, tolerance=spec.tolerance,
                            rng=np.random.default_rng(99),
                            max_coords_per_param=spec.max_coords)
        results.append((spec.name, report))
    return results


def format_report_line(name: str, report: GradCheckReport) -> str:
    state = "PASS" if report.passed else "FAIL"
    worst = report.worst()
    where = worst.name if worst is not None else "-"
    return "%s %-28s max_rel=%.3e (param %s, tol %.0e)" % (state, name, report.max_rel_error,
                                                           where, report.tolerance)
