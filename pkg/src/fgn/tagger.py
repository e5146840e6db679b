"""Sequence tagging: BiLSTM encoding, linear-chain CRF, Viterbi decoding.

The two LSTM directions are combined by elementwise sum, so the hidden size
stays d_h. The CRF scores a path as emission + transition terms plus a
learned start score for the first label; the partition function runs in log
space. Brute-force enumeration twins of the CRF functions serve as oracles
for small instances.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .ops import LstmCellParams, dropout, init_lstm_params, lstm_step
from .tensor import (Parameter, Tensor, logsumexp, narrow, stack_rows, take,
                     uniform_fan_init)

TAGGER_VARIANTS = ("bilstm", "lstm", "none")

# finite stand-in for a forbidden transition; keeps every forward pass NaN/Inf-free
MASK_PENALTY = -1e4


@dataclass(frozen=True)
class LabelScheme:
    """BMES x entity types, plus O. Label order: O first, then B/M/E/S per type."""

    entity_types: tuple
    labels: tuple

    @classmethod
    def from_entity_types(cls, entity_types) -> "LabelScheme":
        types = tuple(sorted(set(entity_types)))
        labels = ["O"]
        for t in types:
            labels.extend(["%s-%s" % (p, t) for p in "BMES"])
        return cls(entity_types=types, labels=tuple(labels))

    @cached_property
    def _index(self) -> dict:
        return {lab: i for i, lab in enumerate(self.labels)}

    @property
    def label_count(self) -> int:
        return len(self.labels)

    def label_index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise ValueError("label %r is not in the scheme %s" % (label, list(self.labels))) from None

    def is_valid_start(self, label: str) -> bool:
        return label == "O" or label[0] in "BS"

    def is_valid_transition(self, prev: str, nxt: str) -> bool:
        if prev == "O" or prev[0] in "ES":
            return nxt == "O" or nxt[0] in "BS"
        # inside an entity: stay in it (M) or close it (E), same type
        return nxt[0] in "ME" and nxt[2:] == prev[2:]

    def transition_penalties(self, penalty: float = MASK_PENALTY) -> tuple:
        """(L,L) additive transition mask and (L,) start mask; 0 where valid."""
        labs = self.labels
        trans = np.zeros((len(labs), len(labs)))
        start = np.zeros(len(labs))
        for i, a in enumerate(labs):
            if not self.is_valid_start(a):
                start[i] = penalty
            for j, b in enumerate(labs):
                if not self.is_valid_transition(a, b):
                    trans[i, j] = penalty
        return trans, start


@dataclass
class CrfParams:
    emission_weight: Parameter   # (L, d_h)
    transitions: Parameter       # (L, L), score of moving row-label -> column-label
    start_scores: Parameter      # (L,), score of opening with each label

    def parameters(self) -> list:
        return [self.emission_weight, self.transitions, self.start_scores]

    @property
    def label_count(self) -> int:
        return self.transitions.data.shape[0]


def init_crf_params(label_count: int, d_hidden: int, rng: np.random.Generator) -> CrfParams:
    return CrfParams(
        emission_weight=Parameter(uniform_fan_init(rng, (label_count, d_hidden), d_hidden, label_count),
                                  name="crf/emission_weight"),
        transitions=Parameter(np.zeros((label_count, label_count)), name="crf/transitions"),
        start_scores=Parameter(np.zeros(label_count), name="crf/start_scores"),
    )


@dataclass
class TaggerParams:
    variant: str
    forward_cell: LstmCellParams | None
    backward_cell: LstmCellParams | None
    dropout_rate: float = 0.0

    def parameters(self) -> list:
        out = []
        if self.forward_cell is not None:
            out.extend(self.forward_cell.parameters())
        if self.backward_cell is not None and self.backward_cell is not self.forward_cell:
            out.extend(self.backward_cell.parameters())
        return out


def init_tagger_params(variant: str, d_in: int, d_hidden: int, rng: np.random.Generator,
                       dropout_rate: float = 0.0) -> TaggerParams:
    if variant not in TAGGER_VARIANTS:
        raise ValueError("tagger variant must be one of %s, got %r"
                         % (", ".join(TAGGER_VARIANTS), variant))
    fwd = bwd = None
    if variant in ("bilstm", "lstm"):
        fwd = init_lstm_params(d_in, d_hidden, rng, "tagger/fwd")
    if variant == "bilstm":
        bwd = init_lstm_params(d_in, d_hidden, rng, "tagger/bwd")
    return TaggerParams(variant=variant, forward_cell=fwd, backward_cell=bwd,
                        dropout_rate=dropout_rate)


def _run_lstm(xs: list, cell: LstmCellParams) -> list:
    h = Tensor(np.zeros(cell.hidden_size))
    c = Tensor(np.zeros(cell.hidden_size))
    out = []
    for x in xs:
        h, c = lstm_step(x, h, c, cell)
        out.append(h)
    return out


def bilstm_encode(xs: list, params: TaggerParams, training: bool = False,
                  rng: np.random.Generator | None = None) -> list:
    """Hidden sequence per variant: both directions summed, forward only, or pass-through."""
    if len(xs) == 0:
        raise ValueError("bilstm_encode needs a non-empty input sequence")
    if params.variant == "none":
        return list(xs)
    hs = _run_lstm(xs, params.forward_cell)
    if params.variant == "bilstm":
        back = _run_lstm(list(reversed(xs)), params.backward_cell)
        hs = [f + b for f, b in zip(hs, reversed(back))]
    if training and params.dropout_rate > 0.0:
        hs = [dropout(h, params.dropout_rate, training, rng) for h in hs]
    return hs


# ---- CRF scoring ----


def _emission_matrix(hs: list, crf: CrfParams) -> Tensor:
    return stack_rows(hs) @ crf.emission_weight.transpose((1, 0))


def _effective_scores(crf: CrfParams, scheme: LabelScheme | None):
    """Transition/start tensors, with the BMES validity mask added when a scheme is given."""
    if scheme is None:
        return crf.transitions, crf.start_scores
    tmask, smask = scheme.transition_penalties()
    return crf.transitions + Tensor(tmask), crf.start_scores + Tensor(smask)


def _check_labels(y, label_count: int, tau: int) -> list:
    y = [int(v) for v in y]
    if len(y) != tau:
        raise ValueError("label sequence length %d does not match %d hidden states" % (len(y), tau))
    for v in y:
        if not 0 <= v < label_count:
            raise ValueError("label index %d outside [0, %d)" % (v, label_count))
    return y


def crf_log_likelihood(hs: list, y, crf: CrfParams, scheme: LabelScheme | None = None) -> Tensor:
    """log P(y | sentence) under the linear-chain CRF."""
    tau = len(hs)
    label_count = crf.label_count
    y = _check_labels(y, label_count, tau)
    emissions = _emission_matrix(hs, crf)
    trans, start = _effective_scores(crf, scheme)

    flat_emit = np.arange(tau) * label_count + np.asarray(y)
    score = take(emissions, flat_emit).sum() + take(start, np.asarray(y[:1])).sum()
    if tau > 1:
        pair_idx = np.asarray(y[:-1]) * label_count + np.asarray(y[1:])
        score = score + take(trans, pair_idx).sum()

    alpha = start + narrow(emissions, 0, 1).reshape((label_count,))
    for t in range(1, tau):
        row = narrow(emissions, t, 1).reshape((label_count,))
        alpha = logsumexp(alpha.reshape((label_count, 1)) + trans + row, axis=0)
    log_z = logsumexp(alpha, axis=0)
    return score - log_z


def nll_loss(batch: list, crf: CrfParams, scheme: LabelScheme | None = None) -> Tensor:
    """Summed negative log-likelihood over (hidden sequence, labels) pairs."""
    if len(batch) == 0:
        raise ValueError("nll_loss needs a non-empty batch")
    total = None
    for hs, y in batch:
        ll = crf_log_likelihood(hs, y, crf, scheme)
        total = ll if total is None else total + ll
    return -total


def _score_table(hs: list, crf: CrfParams, scheme: LabelScheme | None):
    h = np.stack([t.data for t in hs])
    emissions = h @ crf.emission_weight.data.T
    trans = crf.transitions.data
    start = crf.start_scores.data
    if scheme is not None:
        tmask, smask = scheme.transition_penalties()
        trans = trans + tmask
        start = start + smask
    return emissions, trans, start


def viterbi_decode(hs: list, crf: CrfParams, scheme: LabelScheme | None = None) -> list:
    """Highest-scoring label sequence; ties break to the lowest label index."""
    emissions, trans, start = _score_table(hs, crf, scheme)
    tau, label_count = emissions.shape
    delta = start + emissions[0]
    back = np.zeros((tau, label_count), dtype=np.int64)
    for t in range(1, tau):
        step = delta[:, None] + trans
        best_prev = np.argmax(step, axis=0)           # first max = lowest index
        back[t] = best_prev
        delta = step[best_prev, np.arange(label_count)] + emissions[t]
    path = [int(np.argmax(delta))]
    for t in range(tau - 1, 0, -1):
        path.append(int(back[t][path[-1]]))
    path.reverse()
    return path


# ---- brute-force oracles ----

ENUMERATION_GUARD = 100_000


def _path_score(emissions, trans, start, y) -> float:
    score = start[y[0]] + emissions[0, y[0]]
    for t in range(1, len(y)):
        score += trans[y[t - 1], y[t]] + emissions[t, y[t]]
    return float(score)


def _guard(label_count: int, tau: int) -> None:
    if label_count ** tau > ENUMERATION_GUARD:
        raise ValueError("enumeration of %d^%d label sequences exceeds the %d guard"
                         % (label_count, tau, ENUMERATION_GUARD))


def brute_force_loglik(hs: list, y, crf: CrfParams, scheme: LabelScheme | None = None) -> float:
    emissions, trans, start = _score_table(hs, crf, scheme)
    tau, label_count = emissions.shape
    _guard(label_count, tau)
    y = _check_labels(y, label_count, tau)
    scores = [_path_score(emissions, trans, start, list(cand))
              for cand in itertools.product(range(label_count), repeat=tau)]
    scores = np.asarray(scores)
    m = scores.max()
    log_z = m + np.log(np.exp(scores - m).sum())
    return _path_score(emissions, trans, start, y) - log_z


def brute_force_best(hs: list, crf: CrfParams, scheme: LabelScheme | None = None) -> list:
    emissions, trans, start = _score_table(hs, crf, scheme)
    tau, label_count = emissions.shape
    _guard(label_count, tau)
    best_y, best_score = None, -np.inf
    for cand in itertools.product(range(label_count), repeat=tau):
        s = _path_score(emissions, trans, start, list(cand))
        if s > best_score:
            best_y, best_score = list(cand), s
    return best_y
