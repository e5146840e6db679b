"""Adam with bias correction."""

from __future__ import annotations

import numpy as np


class AdamState:
    def __init__(self, params: list, learning_rate: float = 0.002,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        if learning_rate <= 0:
            raise ValueError("learning rate must be positive, got %r" % (learning_rate,))
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self.m = [np.zeros_like(p.data) for p in params]
        self.v = [np.zeros_like(p.data) for p in params]


def adam_step(params: list, state: AdamState) -> None:
    """Apply one update to every trainable parameter, then zero all gradients."""
    if len(params) != len(state.m):
        raise ValueError("parameter list does not match optimizer state (%d vs %d)"
                         % (len(params), len(state.m)))
    state.step_count += 1
    t = state.step_count
    bc1 = 1.0 - state.beta1 ** t
    bc2 = 1.0 - state.beta2 ** t
    for p, m, v in zip(params, state.m, state.v):
        if p.trainable:
            g = p.grad
            m *= state.beta1
            m += (1.0 - state.beta1) * g
            v *= state.beta2
            v += (1.0 - state.beta2) * g * g
            p.data -= state.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
        p.grad[...] = 0.0


def zero_grads(params: list) -> None:
    for p in params:
        if p.grad is None:
            p.grad = np.zeros_like(p.data)
        else:
            p.grad[...] = 0.0


def snapshot(params: list) -> dict:
    return {p.name: p.data.copy() for p in params}


def restore(params: list, state: dict) -> None:
    for p in params:
        p.data[...] = state[p.name]
