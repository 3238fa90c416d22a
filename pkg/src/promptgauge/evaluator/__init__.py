from .model import (
    EvaluatorInput,
    EvaluatorModel,
    ForwardState,
    Gradients,
    LossBreakdown,
    ModelDims,
    Prediction,
    backward,
    encode,
    evaluate,
    forward,
    init_params,
    loss,
    predict_from_state,
    prefix_hash,
    sigmoid,
    update_metric_weights,
)
from .training import TrainingConfig, TrainingHistory, train

__all__ = [
    "EvaluatorInput",
    "EvaluatorModel",
    "ForwardState",
    "Gradients",
    "LossBreakdown",
    "ModelDims",
    "Prediction",
    "TrainingConfig",
    "TrainingHistory",
    "backward",
    "encode",
    "evaluate",
    "forward",
    "init_params",
    "loss",
    "predict_from_state",
    "prefix_hash",
    "sigmoid",
    "train",
    "update_metric_weights",
]
