"""Finite-difference verification of the recorded analytic gradients.

The checker never participates in training; it exists so every
differentiable operation in the model can be validated end to end
against central differences at 64-bit precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DeterminismError, NumericError
from .numerics import Parameter, Tensor


@dataclass
class GradCheckReport:
    max_rel_error: float
    worst_parameter: str
    worst_index: tuple[int, int]
    entries_checked: int
    eps: float
    tol: float
    passed: bool

    def summary(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return (
            f"grad_check {status}: max rel error {self.max_rel_error:.3e} "
            f"at {self.worst_parameter}[{self.worst_index[0]},{self.worst_index[1]}] "
            f"({self.entries_checked} entries, eps={self.eps:g}, tol={self.tol:g})"
        )


def grad_check(
    loss_fn: Callable[[], Tensor],
    params: Sequence[Parameter],
    eps: float = 1e-5,
    tol: float = 1e-4,
    max_entries: int = 200,
    seed: int = 0,
    rel_floor: float = 1e-6,
) -> GradCheckReport:
    """Compare analytic gradients of ``loss_fn`` against central differences.

    ``loss_fn`` must rebuild its computation from the current parameter
    values on every call and return a 1x1 scalar tensor. Every parameter
    entry is checked when the total count is small; otherwise a seeded
    random subsample of ``max_entries`` entries is used. Relative error
    uses ``|a - f| / max(rel_floor, |a|, |f|)`` so near-zero gradients do
    not produce spurious failures from finite-difference roundoff.
    """
    if eps <= 0.0:
        raise NumericError("grad_check requires eps > 0")

    base = loss_fn().item()
    again = loss_fn().item()
    if base != again:
        raise DeterminismError(
            f"loss function is not deterministic: {base!r} != {again!r} on repeat evaluation"
        )

    for p in params:
        p.zero_grad()
    loss_fn().backward()
    analytic = {p.name: (np.zeros_like(p.value.data) if p.grad is None else p.grad.copy())
                for p in params}

    coords: list[tuple[int, int, int]] = []  # (param position, row, col)
    for pi, p in enumerate(params):
        r, c = p.shape
        for i in range(r):
            for j in range(c):
                coords.append((pi, i, j))
    if len(coords) > max_entries:
        rng = np.random.default_rng(seed)
        picked = rng.choice(len(coords), size=max_entries, replace=False)
        coords = [coords[k] for k in sorted(picked)]

    max_err = 0.0
    worst = (params[0].name, (0, 0)) if params else ("<none>", (0, 0))
    for pi, i, j in coords:
        p = params[pi]
        saved = p.value.data[i, j]
        p.value.data[i, j] = saved + eps
        up = loss_fn().item()
        p.value.data[i, j] = saved - eps
        down = loss_fn().item()
        p.value.data[i, j] = saved
        fd = (up - down) / (2.0 * eps)
        an = analytic[p.name][i, j]
        err = abs(an - fd) / max(rel_floor, abs(an), abs(fd))
        if err > max_err:
            max_err = err
            worst = (p.name, (i, j))

    return GradCheckReport(
        max_rel_error=max_err,
        worst_parameter=worst[0],
        worst_index=worst[1],
        entries_checked=len(coords),
        eps=eps,
        tol=tol,
        passed=max_err <= tol,
    )
