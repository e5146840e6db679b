"""Corpus ingestion, BMES span decoding, entity-level scoring.

The file layout is one `char label` pair per line, blank line between
sentences. Span decoding is strict: a malformed run is dropped, never
repaired, so the metric cannot be gamed by half-formed predictions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .tagger import LabelScheme

_LABEL_RE = re.compile(r"O|[BMES]-\S+")


@dataclass(frozen=True)
class EntitySpan:
    start: int          # inclusive
    end: int            # inclusive
    entity_type: str

    def __post_init__(self):
        if not 0 <= self.start <= self.end:
            raise ValueError("entity span [%d, %d] is not ordered" % (self.start, self.end))


@dataclass(frozen=True)
class TaggedSentence:
    chars: str
    labels: tuple
    index: int

    def __post_init__(self):
        if len(self.chars) != len(self.labels):
            raise ValueError("sentence %d has %d characters but %d labels"
                             % (self.index, len(self.chars), len(self.labels)))


class CorpusError(ValueError):
    pass


def parse_conll(text: str, source: str = "<text>") -> tuple:
    """(sentences, scheme) from `char label` lines with blank-line separators."""
    sentences: list[TaggedSentence] = []
    chars: list[str] = []
    labels: list[str] = []
    entity_types: set[str] = set()

    def flush():
        if chars:
            sentences.append(TaggedSentence("".join(chars), tuple(labels), len(sentences)))
            chars.clear()
            labels.clear()

    for lineno, line in enumerate(text.lstrip("﻿").splitlines(), start=1):
        line = line.strip()
        if not line:
            flush()
            continue
        fields = line.split()
        if len(fields) != 2:
            raise CorpusError("%s line %d: expected `char label`, got %d fields"
                              % (source, lineno, len(fields)))
        ch, label = fields
        if len(ch) != 1:
            raise CorpusError("%s line %d: token %r is not a single character" % (source, lineno, ch))
        if not _LABEL_RE.fullmatch(label):
            raise CorpusError("%s line %d: label %r is not O or [BMES]-type" % (source, lineno, label))
        if label != "O":
            entity_types.add(label[2:])
        chars.append(ch)
        labels.append(label)
    flush()
    if not sentences:
        raise CorpusError("%s: no sentences found" % source)
    return sentences, LabelScheme.from_entity_types(entity_types)


def load_conll(path) -> tuple:
    path = Path(path)
    return parse_conll(path.read_text(encoding="utf-8"), source=path.name)


def write_conll(sentences: list, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for s in sentences:
            for ch, label in zip(s.chars, s.labels):
                f.write("%s %s\n" % (ch, label))
            f.write("\n")


def decode_entities(labels) -> list:
    """Strict BMES walk: only complete B..E runs (same type throughout) and S singletons count."""
    spans = []
    i = 0
    n = len(labels)
    while i < n:
        lab = labels[i]
        if lab.startswith("S-"):
            spans.append(EntitySpan(i, i, lab[2:]))
            i += 1
        elif lab.startswith("B-"):
            t = lab[2:]
            j = i + 1
            while j < n and labels[j] == "M-" + t:
                j += 1
            if j < n and labels[j] == "E-" + t:
                spans.append(EntitySpan(i, j, t))
                i = j + 1
            else:
                i += 1   # broken run: skip the B, rescan from the next label
        else:
            i += 1
    return spans


def encode_entities(length: int, spans: list) -> list:
    """Entity list -> BMES labels; spans must be in-bounds and non-overlapping."""
    labels = ["O"] * length
    occupied = [False] * length
    for span in spans:
        if span.end >= length:
            raise ValueError("entity span [%d, %d] exceeds sentence length %d"
                             % (span.start, span.end, length))
        if any(occupied[span.start:span.end + 1]):
            raise ValueError("entity span [%d, %d] overlaps another span" % (span.start, span.end))
        for i in range(span.start, span.end + 1):
            occupied[i] = True
        if span.start == span.end:
            labels[span.start] = "S-" + span.entity_type
        else:
            labels[span.start] = "B-" + span.entity_type
            labels[span.end] = "E-" + span.entity_type
            for i in range(span.start + 1, span.end):
                labels[i] = "M-" + span.entity_type
    return labels


def evaluate(gold: list, pred: list) -> tuple:
    """Entity-level (precision, recall, F1) with exact (start, end, type) matching."""
    if len(gold) != len(pred):
        raise ValueError("evaluate got %d gold sentences but %d predictions" % (len(gold), len(pred)))
    tp = n_pred = n_gold = 0
    for sent, labels in zip(gold, pred):
        if len(labels) != len(sent.chars):
            raise ValueError("sentence %d: %d predicted labels for %d characters"
                             % (sent.index, len(labels), len(sent.chars)))
        g = set(decode_entities(sent.labels))
        p = set(decode_entities(labels))
        tp += len(g & p)
        n_pred += len(p)
        n_gold += len(g)
    precision = tp / n_pred if n_pred else 0.0
    recall = tp / n_gold if n_gold else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1
