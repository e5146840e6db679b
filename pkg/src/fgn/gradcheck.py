"""Finite-difference validation of analytic gradients."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .optim import zero_grads


@dataclass
class ParamCheck:
    name: str
    coords_checked: int
    max_rel_error: float
    worst_analytic: float
    worst_numeric: float


@dataclass
class GradCheckReport:
    eps: float
    tolerance: float
    entries: list[ParamCheck] = field(default_factory=list)

    @property
    def max_rel_error(self) -> float:
        return max((e.max_rel_error for e in self.entries), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tolerance

    def worst(self) -> ParamCheck | None:
        return max(self.entries, key=lambda e: e.max_rel_error, default=None)


def grad_check(loss_fn, params: list, eps: float = 1e-5, tolerance: float = 1e-4,
               rng: np.random.Generator | None = None,
               max_coords_per_param: int | None = None) -> GradCheckReport:
    """Compare backward() gradients of loss_fn() against central differences.

    loss_fn must rebuild its graph on every call and be deterministic (seed
    any dropout internally). Coordinates may be subsampled via
    max_coords_per_param to keep large parameters affordable.
    """
    zero_grads(params)
    loss = loss_fn()
    if loss.data.shape != ():
        raise ValueError("grad_check needs a scalar loss, got shape %r" % (loss.shape,))
    loss.backward()
    analytic = {p.name: p.grad.copy() for p in params}
    zero_grads(params)

    report = GradCheckReport(eps=eps, tolerance=tolerance)
    for p in params:
        flat = p.data.reshape(-1)
        size = flat.shape[0]
        if max_coords_per_param is not None and size > max_coords_per_param:
            if rng is None:
                rng = np.random.default_rng(0)
            coords = rng.choice(size, size=max_coords_per_param, replace=False)
        else:
            coords = np.arange(size)
        a_flat = analytic[p.name].reshape(-1)
        worst = (0.0, 0.0, 0.0)
        for i in coords:
            keep = flat[i]
            flat[i] = keep + eps
            up = float(loss_fn().data)
            flat[i] = keep - eps
            down = float(loss_fn().data)
            flat[i] = keep
            numeric = (up - down) / (2.0 * eps)
            a = float(a_flat[i])
            rel = abs(a - numeric) / max(1.0, abs(a), abs(numeric))
            if rel > worst[0]:
                worst = (rel, a, numeric)
        report.entries.append(ParamCheck(
            name=p.name, coords_checked=len(coords),
            max_rel_error=worst[0], worst_analytic=worst[1], worst_numeric=worst[2]))
    return report
