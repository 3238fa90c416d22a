"""Gradient attribution: which predicted metric drives the bad verdict."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NotBad
from ..evaluator import EvaluatorInput, EvaluatorModel, backward, encode, forward
from ..gateway import Gateway


@dataclass
class Attribution:
    sensitivities: dict[str, float]  # metric -> |d(cls loss)/d(mn_i)|, target "good"
    ranking: list[str]  # descending sensitivity; ties keep model metric order


def attribution_from_h(model: EvaluatorModel, h: np.ndarray) -> Attribution:
    state = forward(model, np.atleast_2d(h))
    y_hat = float(state.y_hat[0])
    if y_hat >= 0.5:
        raise NotBad(f"attribution needs a bad-classified input (y_hat={y_hat:.3f})")
    # gradient toward the passing label: how each predicted metric would have
    # to move for the classifier to call this pair good
    grads = backward(model, state, np.array([1.0]), state.MN)
    g = np.abs(grads.cls_wrt_metrics[0])
    sensitivities = {name: float(g[i]) for i, name in enumerate(model.metric_names)}
    order = sorted(range(len(g)), key=lambda i: (-g[i], i))
    return Attribution(
        sensitivities=sensitivities,
        ranking=[model.metric_names[i] for i in order],
    )


def attribute(model: EvaluatorModel, inp: EvaluatorInput, gateway: Gateway) -> Attribution:
    return attribution_from_h(model, encode(gateway, inp))
