"""Character/glyph fusion.

Both vectors are cut by an out-of-sync sliding window: different window sizes
and strides per stream, constrained so the two streams yield the same number
of slices. Each slice pair fuses by outer product; slice attention (or a
pooling ablation) combines the n fused vectors into one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import (Parameter, Tensor, concat, max_axis0, narrow, sigmoid,
                     softmax, stack_rows, uniform_fan_init)

FUSION_VARIANTS = ("slice_attention", "avg_pool", "max_pool", "concat")


@dataclass(frozen=True)
class WindowSpec:
    d_char: int
    k_char: int
    s_char: int
    d_glyph: int
    k_glyph: int
    s_glyph: int


def validate_window(spec: WindowSpec) -> int:
    """Return the shared slice count n, or reject the spec."""
    for field in ("d_char", "k_char", "s_char", "d_glyph", "k_glyph", "s_glyph"):
        if getattr(spec, field) < 1:
            raise ValueError("window field %s must frame a positive size, got %r"
                             % (field, getattr(spec, field)))
    if spec.k_char > spec.d_char or spec.k_glyph > spec.d_glyph:
        raise ValueError("window size exceeds its vector: k_char %d over d_char %d, k_glyph %d over d_glyph %d"
                         % (spec.k_char, spec.d_char, spec.k_glyph, spec.d_glyph))
    qc, rc = divmod(spec.d_char - spec.k_char, spec.s_char)
    qg, rg = divmod(spec.d_glyph - spec.k_glyph, spec.s_glyph)
    nc = "%d+%d/%d" % (qc + 1, rc, spec.s_char) if rc else "%d" % (qc + 1)
    ng = "%d+%d/%d" % (qg + 1, rg, spec.s_glyph) if rg else "%d" % (qg + 1)
    if rc or rg or qc != qg:
        raise ValueError("sliding windows disagree: character stream yields %s slices, glyph stream yields %s"
                         % (nc, ng))
    return qc + 1


def extract_slices(vec: Tensor, k: int, s: int, n: int) -> list:
    """n windows of width k at stride s over a vector."""
    d = vec.data.shape[0]
    if vec.data.ndim != 1:
        raise ValueError("extract_slices works on vectors, got shape %r" % (vec.shape,))
    if d - k != s * (n - 1):
        raise ValueError("cannot cut %d slices of width %d at stride %d from a %d-d vector"
                         % (n, k, s, d))
    return [narrow(vec, s * i, k) for i in range(n)]


def fuse_pair(c_s: Tensor, g_s: Tensor) -> Tensor:
    """Outer product of a slice pair, flattened row-major."""
    kc = c_s.data.shape[0]
    kg = g_s.data.shape[0]
    return (c_s.reshape((kc, 1)) * g_s.reshape((1, kg))).reshape((kc * kg,))


@dataclass
class FusionParams:
    score_weight: Parameter   # (D, D) over fused slices, D = k_char*k_glyph
    score_bias: Parameter     # (D,)
    query: Parameter          # (D,)

    def parameters(self) -> list:
        return [self.score_weight, self.score_bias, self.query]


def init_fusion_params(dim: int, rng: np.random.Generator) -> FusionParams:
    return FusionParams(
        score_weight=Parameter(uniform_fan_init(rng, (dim, dim), dim, dim), name="fusion/score_weight"),
        score_bias=Parameter(np.zeros(dim), name="fusion/score_bias"),
        query=Parameter(np.zeros(dim), name="fusion/query"),
    )


def _combine(slices: list, weights: Tensor) -> Tensor:
    return weights @ stack_rows(slices)


def slice_attention(slices: list, params: FusionParams) -> tuple:
    """Score each fused slice against a sigmoided query; softmax-average them.

    Returns (fusion vector, attention weights as a plain array).
    """
    dim = params.score_bias.data.shape[0]
    for i, s in enumerate(slices):
        if s.data.shape != (dim,):
            raise ValueError("slice %d has shape %r, attention params expect (%d,)"
                             % (i, s.shape, dim))
    m = stack_rows(slices)                                    # (n, D)
    gates = sigmoid(m @ params.score_weight.transpose((1, 0)) + params.score_bias)
    scores = gates @ sigmoid(params.query)                    # (n,)
    weights = softmax(scores)
    fused = weights @ m
    return fused, weights.data.copy()


def fuse_character(c_v: Tensor, g_v: Tensor, spec: WindowSpec, params: FusionParams | None,
                   variant: str = "slice_attention", include_parts: bool = True) -> Tensor:
    """Fused per-character representation.

    include_parts appends the raw character and glyph vectors around the
    fusion vector; with it off the output is the fusion vector alone. concat
    skips fusion entirely and returns [c_v, g_v].
    """
    if variant not in FUSION_VARIANTS:
        raise ValueError("fusion variant must be one of %s, got %r"
                         % (", ".join(FUSION_VARIANTS), variant))
    if variant == "concat":
        return concat([c_v, g_v])
    n = validate_window(spec)
    c_slices = extract_slices(c_v, spec.k_char, spec.s_char, n)
    g_slices = extract_slices(g_v, spec.k_glyph, spec.s_glyph, n)
    fused_slices = [fuse_pair(c, g) for c, g in zip(c_slices, g_slices)]
    if variant == "slice_attention":
        if params is None:
            raise ValueError("slice_attention needs FusionParams")
        f_v, _ = slice_attention(fused_slices, params)
    elif variant == "avg_pool":
        n_slices = len(fused_slices)
        f_v = _combine(fused_slices, Tensor(np.ones(n_slices) / n_slices))
    else:
        f_v = max_axis0(stack_rows(fused_slices))
    if include_parts:
        return concat([c_v, g_v, f_v])
    return f_v
