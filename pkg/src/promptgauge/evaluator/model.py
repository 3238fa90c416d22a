"""Execution-free evaluator: frozen text encoder + trainable numpy heads.

Architecture, for encoder vector h of dimension D:

    regression   a1 = tanh(W1 h + b1)         mn = W2 a1 + b2     (M metrics,
                                                                   normalized)
    fusion       u  = [h; mn]                 a2 = tanh(W3 u + b3)
                 z  = tanh(W4 a2 + b4)                            (F features)
    classifier   y_hat = sigmoid(wc . z + bc)

The objective is binary cross-entropy plus lambda * sum_i w_i * squared
error on normalized metric i, with the metric weights w living on the
simplex and updated from the classification gradient w.r.t. the predicted
metrics. All gradients are analytic; tests hold them to central finite
differences.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import prompts
from ..errors import DimensionMismatch, PrefixMismatch
from ..gateway import Gateway

PARAM_NAMES = ("W1", "b1", "W2", "b2", "W3", "b3", "W4", "b4", "wc", "bc")

WEIGHT_FLOOR = 1e-6


def sigmoid(x):
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _softplus(x):
    return np.log1p(np.exp(-np.abs(x))) + np.maximum(x, 0.0)


def prefix_hash(prefix: str) -> str:
    return hashlib.sha256(prefix.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ModelDims:
    encoder_dim: int
    n_metrics: int = 4
    reg_hidden: int = 64
    fusion_hidden: int = 64
    fused_dim: int = 32


@dataclass(frozen=True)
class EvaluatorInput:
    prefix: str
    query_text: str
    prompt_text: str


@dataclass
class Prediction:
    y_hat: float
    m_hat: np.ndarray  # denormalized, metric units
    z: np.ndarray

    @property
    def is_good(self) -> bool:
        return self.y_hat >= 0.5  # strictly below 0.5 counts as bad


@dataclass
class EvaluatorModel:
    dims: ModelDims
    params: dict[str, np.ndarray]
    metric_weights: np.ndarray
    metric_names: tuple[str, ...]
    norm_means: np.ndarray
    norm_stds: np.ndarray
    reg_lambda: float
    weight_step: float
    prefix: str
    encoder_backend_id: str
    training_manifest: dict = field(default_factory=dict)

    def __post_init__(self):
        self.metric_weights = np.asarray(self.metric_weights, dtype=np.float64)
        self.norm_means = np.asarray(self.norm_means, dtype=np.float64)
        self.norm_stds = np.asarray(self.norm_stds, dtype=np.float64)
        if np.any(self.norm_stds <= 0):
            raise ValueError("normalization stds must be positive")

    @property
    def prefix_digest(self) -> str:
        return prefix_hash(self.prefix)

    def normalize_targets(self, metrics: np.ndarray) -> np.ndarray:
        return (metrics - self.norm_means) / self.norm_stds

    def denormalize(self, mn: np.ndarray) -> np.ndarray:
        return mn * self.norm_stds + self.norm_means

    # persistence ----------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "dims": self.dims.__dict__,
            "params": {k: v.tolist() for k, v in self.params.items()},
            "metric_weights": self.metric_weights.tolist(),
            "metric_names": list(self.metric_names),
            "norm_means": self.norm_means.tolist(),
            "norm_stds": self.norm_stds.tolist(),
            "reg_lambda": self.reg_lambda,
            "weight_step": self.weight_step,
            "prefix": self.prefix,
            "prefix_hash": self.prefix_digest,
            "encoder_backend_id": self.encoder_backend_id,
            "training_manifest": self.training_manifest,
        }

    @staticmethod
    def from_json(data: dict) -> "EvaluatorModel":
        return EvaluatorModel(
            dims=ModelDims(**data["dims"]),
            params={k: np.asarray(v, dtype=np.float64) for k, v in data["params"].items()},
            metric_weights=np.asarray(data["metric_weights"]),
            metric_names=tuple(data["metric_names"]),
            norm_means=np.asarray(data["norm_means"]),
            norm_stds=np.asarray(data["norm_stds"]),
            reg_lambda=float(data["reg_lambda"]),
            weight_step=float(data["weight_step"]),
            prefix=data["prefix"],
            encoder_backend_id=data["encoder_backend_id"],
            training_manifest=data.get("training_manifest", {}),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), sort_keys=True), encoding="utf-8")

    @staticmethod
    def load(path: str | Path) -> "EvaluatorModel":
        return EvaluatorModel.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def init_params(dims: ModelDims, rng: np.random.Generator) -> dict[str, np.ndarray]:
    def layer(n_out: int, n_in: int) -> np.ndarray:
        return rng.standard_normal((n_out, n_in)) / np.sqrt(n_in)

    d, m = dims.encoder_dim, dims.n_metrics
    return {
        "W1": layer(dims.reg_hidden, d),
        "b1": np.zeros(dims.reg_hidden),
        "W2": layer(m, dims.reg_hidden),
        "b2": np.zeros(m),
        "W3": layer(dims.fusion_hidden, d + m),
        "b3": np.zeros(dims.fusion_hidden),
        "W4": layer(dims.fused_dim, dims.fusion_hidden),
        "b4": np.zeros(dims.fused_dim),
        "wc": rng.standard_normal(dims.fused_dim) / np.sqrt(dims.fused_dim),
        "bc": np.zeros(()),
    }


@dataclass
class ForwardState:
    H: np.ndarray
    A1: np.ndarray
    MN: np.ndarray
    U: np.ndarray
    A2: np.ndarray
    Z: np.ndarray
    logit: np.ndarray
    y_hat: np.ndarray


def forward(model: EvaluatorModel, H: np.ndarray) -> ForwardState:
    H = np.atleast_2d(np.asarray(H, dtype=np.float64))
    if H.shape[1] != model.dims.encoder_dim:
        raise DimensionMismatch(
            f"encoder vector has dim {H.shape[1]}, model expects {model.dims.encoder_dim}"
        )
    p = model.params
    A1 = np.tanh(H @ p["W1"].T + p["b1"])
    MN = A1 @ p["W2"].T + p["b2"]
    U = np.hstack([H, MN])
    A2 = np.tanh(U @ p["W3"].T + p["b3"])
    Z = np.tanh(A2 @ p["W4"].T + p["b4"])
    logit = Z @ p["wc"] + p["bc"]
    return ForwardState(H=H, A1=A1, MN=MN, U=U, A2=A2, Z=Z, logit=logit, y_hat=sigmoid(logit))


def predict_from_state(model: EvaluatorModel, state: ForwardState, index: int = 0) -> Prediction:
    return Prediction(
        y_hat=float(state.y_hat[index]),
        m_hat=model.denormalize(state.MN[index]),
        z=state.Z[index].copy(),
    )


@dataclass
class LossBreakdown:
    total: float
    classification: float
    regression: np.ndarray  # per-metric mean squared error, normalized scale


def loss(
    model: EvaluatorModel, state: ForwardState, y: np.ndarray, targets_norm: np.ndarray
) -> LossBreakdown:
    y = np.asarray(y, dtype=np.float64)
    cls = float(np.mean(y * _softplus(-state.logit) + (1.0 - y) * _softplus(state.logit)))
    reg = np.mean((state.MN - targets_norm) ** 2, axis=0)
    total = cls + model.reg_lambda * float(np.dot(model.metric_weights, reg))
    return LossBreakdown(total=total, classification=cls, regression=reg)


@dataclass
class Gradients:
    params: dict[str, np.ndarray]
    cls_wrt_metrics: np.ndarray  # per-example d(cls loss)/d(mn), shape (B, M)

    @property
    def cls_wrt_metrics_mean(self) -> np.ndarray:
        return self.cls_wrt_metrics.mean(axis=0)


def backward(
    model: EvaluatorModel, state: ForwardState, y: np.ndarray, targets_norm: np.ndarray
) -> Gradients:
    p = model.params
    d = model.dims.encoder_dim
    batch = state.H.shape[0]
    y = np.asarray(y, dtype=np.float64)

    err = state.y_hat - y  # per-example dl/dlogit
    d_z = err[:, None] * p["wc"]
    d_s4 = d_z * (1.0 - state.Z**2)
    d_a2 = d_s4 @ p["W4"]
    d_s3 = d_a2 * (1.0 - state.A2**2)
    d_u = d_s3 @ p["W3"]
    cls_wrt_metrics = d_u[:, d:]

    d_mn = cls_wrt_metrics + model.reg_lambda * model.metric_weights * 2.0 * (
        state.MN - targets_norm
    )
    d_a1 = d_mn @ p["W2"]
    d_s1 = d_a1 * (1.0 - state.A1**2)

    grads = {
        "W1": d_s1.T @ state.H / batch,
        "b1": d_s1.mean(axis=0),
        "W2": d_mn.T @ state.A1 / batch,
        "b2": d_mn.mean(axis=0),
        "W3": d_s3.T @ state.U / batch,
        "b3": d_s3.mean(axis=0),
        "W4": d_s4.T @ state.A2 / batch,
        "b4": d_s4.mean(axis=0),
        "wc": state.Z.T @ err / batch,
        "bc": np.asarray(err.mean()),
    }
    return Gradients(params=grads, cls_wrt_metrics=cls_wrt_metrics)


def update_metric_weights(
    weights: np.ndarray, cls_grad_mean: np.ndarray, step: float, floor: float = WEIGHT_FLOOR
) -> np.ndarray:
    """One simplex-preserving step of the gradient-informed weight update."""
    candidate = np.maximum(weights - step * np.asarray(cls_grad_mean), floor)
    return candidate / candidate.sum()


# gateway-wired entry points -------------------------------------------------


def encode(gateway: Gateway, inp: EvaluatorInput) -> np.ndarray:
    text = prompts.evaluator_input_text(inp.prefix, inp.query_text, inp.prompt_text)
    return gateway.embed(text).values


def evaluate(model: EvaluatorModel, inp: EvaluatorInput, gateway: Gateway) -> Prediction:
    """Execution-free scoring: one embedding call, zero generations."""
    if prefix_hash(inp.prefix) != model.prefix_digest:
        raise PrefixMismatch("input prefix differs from the prefix the model was trained with")
    h = encode(gateway, inp)
    state = forward(model, h[None, :])
    return predict_from_state(model, state)
