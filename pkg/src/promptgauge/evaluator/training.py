"""Evaluator training: inner gradient descent on parameters, outer metric
weight updates from the validation batch's classification gradients."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import NonFiniteLoss
from .model import (
    EvaluatorModel,
    ModelDims,
    backward,
    forward,
    init_params,
    loss,
    update_metric_weights,
)


@dataclass
class TrainingConfig:
    epochs: int = 200
    learning_rate: float = 1e-2
    reg_lambda: float = 1.0
    weight_step: float = 0.1
    outer_every: int = 5  # inner epochs between metric-weight updates
    val_fraction: float = 0.2
    seed: int = 0
    dims: dict = field(default_factory=dict)  # overrides for hidden sizes


@dataclass
class TrainingHistory:
    rows: list[dict] = field(default_factory=list)
    best_epoch: int = -1
    best_val_accuracy: float = -1.0


def _accuracy(y_hat: np.ndarray, y: np.ndarray) -> float:
    return float(np.mean((y_hat >= 0.5) == (y >= 0.5)))


def train(
    H: np.ndarray,
    metric_targets: np.ndarray,
    labels: np.ndarray,
    metric_names: tuple[str, ...],
    config: TrainingConfig,
    prefix: str,
    encoder_backend_id: str,
) -> tuple[EvaluatorModel, TrainingHistory]:
    """Train on raw (unnormalized) metric targets; an 80/20 split, the
    normalization statistics and the initial simplex weights all come from
    the seeded rng, so training is bit-reproducible."""
    H = np.asarray(H, dtype=np.float64)
    metric_targets = np.asarray(metric_targets, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    n, d = H.shape
    m = metric_targets.shape[1]
    if m != len(metric_names):
        raise ValueError("metric_targets width must match metric_names")

    rng = np.random.default_rng(config.seed)
    order = rng.permutation(n)
    n_val = max(1, int(round(n * config.val_fraction)))
    val_idx, train_idx = order[:n_val], order[n_val:]

    means = metric_targets[train_idx].mean(axis=0)
    stds = metric_targets[train_idx].std(axis=0)
    stds = np.where(stds > 0, stds, 1.0)

    dims = ModelDims(encoder_dim=d, n_metrics=m, **config.dims)
    model = EvaluatorModel(
        dims=dims,
        params=init_params(dims, rng),
        metric_weights=np.full(m, 1.0 / m),
        metric_names=tuple(metric_names),
        norm_means=means,
        norm_stds=stds,
        reg_lambda=config.reg_lambda,
        weight_step=config.weight_step,
        prefix=prefix,
        encoder_backend_id=encoder_backend_id,
        training_manifest={
            "epochs": config.epochs,
            "learning_rate": config.learning_rate,
            "outer_every": config.outer_every,
            "val_fraction": config.val_fraction,
            "seed": config.seed,
            "n_examples": int(n),
        },
    )

    targets_norm = model.normalize_targets(metric_targets)
    H_tr, T_tr, y_tr = H[train_idx], targets_norm[train_idx], labels[train_idx]
    H_va, T_va, y_va = H[val_idx], targets_norm[val_idx], labels[val_idx]

    history = TrainingHistory()
    best_params: dict[str, np.ndarray] | None = None
    best_weights: np.ndarray | None = None
    best_val_cls = np.inf

    for epoch in range(config.epochs):
        state = forward(model, H_tr)
        breakdown = loss(model, state, y_tr, T_tr)
        if not np.isfinite(breakdown.total):
            raise NonFiniteLoss(
                f"non-finite loss at epoch {epoch}: cls={breakdown.classification!r}, "
                f"reg={breakdown.regression!r}"
            )
        grads = backward(model, state, y_tr, T_tr)
        for name in model.params:
            model.params[name] = model.params[name] - config.learning_rate * grads.params[name]

        val_state = forward(model, H_va)
        val_loss = loss(model, val_state, y_va, T_va)
        val_acc = _accuracy(val_state.y_hat, y_va)

        if (epoch + 1) % config.outer_every == 0:
            val_grads = backward(model, val_state, y_va, T_va)
            model.metric_weights = update_metric_weights(
                model.metric_weights, val_grads.cls_wrt_metrics_mean, config.weight_step
            )

        history.rows.append(
            {
                "epoch": epoch,
                "train_total": breakdown.total,
                "train_cls": breakdown.classification,
                "val_cls": val_loss.classification,
                "val_accuracy": val_acc,
                "metric_weights": model.metric_weights.tolist(),
            }
        )
        # accuracy decides the checkpoint; validation loss breaks ties so a
        # long accuracy plateau still tracks the better-calibrated epoch
        if val_acc > history.best_val_accuracy or (
            val_acc == history.best_val_accuracy and val_loss.classification < best_val_cls
        ):
            history.best_val_accuracy = val_acc
            history.best_epoch = epoch
            best_val_cls = val_loss.classification
            best_params = {k: v.copy() for k, v in model.params.items()}
            best_weights = model.metric_weights.copy()

    if best_params is not None:
        model.params = best_params
        model.metric_weights = best_weights
    model.training_manifest["best_epoch"] = history.best_epoch
    model.training_manifest["best_val_accuracy"] = history.best_val_accuracy
    return model, history
