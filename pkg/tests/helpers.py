"""Shared test scaffolding: hand-built evaluator models and fixture priming."""

from __future__ import annotations

import numpy as np

from promptgauge.evaluator import EvaluatorInput, EvaluatorModel, ModelDims, forward
from promptgauge.gateway.recording import prime_embedding
from promptgauge.prompts import CORE_METRICS, evaluator_input_text

TEST_PREFIX = "Score the prompt/query pair on four quality dimensions."


def steering_model(
    metric_coupling=(0.03, 0.01, 0.005, 0.2),
    gain: float = 4.0,
    h_scale: float = 0.5,
    encoder_backend_id: str = "scripted/sim-1",
) -> EvaluatorModel:
    """Evaluator whose score is a monotone function of h[0].

    The regression head is zeroed (predicted metrics are constant), but the
    fusion path still reads the metric columns with the given couplings, so
    the classification gradient w.r.t. each predicted metric is proportional
    to its coupling. That gives tests full control over both the score and
    the attribution ranking.
    """
    dims = ModelDims(encoder_dim=4, n_metrics=4, reg_hidden=4, fusion_hidden=4, fused_dim=4)
    params = {
        "W1": np.zeros((4, 4)),
        "b1": np.zeros(4),
        "W2": np.zeros((4, 4)),
        "b2": np.zeros(4),
        "W3": np.zeros((4, 8)),
        "b3": np.zeros(4),
        "W4": np.zeros((4, 4)),
        "b4": np.zeros(4),
        "wc": np.zeros(4),
        "bc": np.zeros(()),
    }
    params["W3"][0, 0] = h_scale
    params["W3"][0, 4:] = np.asarray(metric_coupling)
    params["W4"][0, 0] = 1.0
    params["wc"][0] = gain
    return EvaluatorModel(
        dims=dims,
        params=params,
        metric_weights=np.full(4, 0.25),
        metric_names=CORE_METRICS,
        norm_means=np.zeros(4),
        norm_stds=np.ones(4),
        reg_lambda=1.0,
        weight_step=0.1,
        prefix=TEST_PREFIX,
        encoder_backend_id=encoder_backend_id,
    )


def solve_h0(model: EvaluatorModel, target_y_hat: float) -> float:
    """Bisect for the h[0] value at which the steering model scores target."""
    lo, hi = -60.0, 60.0
    for _ in range(200):
        mid = (lo + hi) / 2.0
        y = float(forward(model, np.array([[mid, 0.0, 0.0, 0.0]])).y_hat[0])
        if y < target_y_hat:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0


def prime_eval_embedding(
    store, model: EvaluatorModel, query_text: str, prompt_text: str, h0: float,
    backend_id: str, embed_model_id: str,
) -> None:
    text = evaluator_input_text(model.prefix, query_text, prompt_text)
    prime_embedding(store, backend_id, embed_model_id, text, [h0, 0.0, 0.0, 0.0])


def eval_input(model: EvaluatorModel, query_text: str, prompt_text: str) -> EvaluatorInput:
    return EvaluatorInput(prefix=model.prefix, query_text=query_text, prompt_text=prompt_text)
