"""The closed evaluate-attribute-diagnose-rewrite loop.

Everything inside the loop is execution-free: the evaluator's predictions
are the only quality signal, and the only model traffic is embeddings plus
the diagnoser/rewriter calls. The best (prompt, query) pair ever seen is
returned, so the result never scores below the input.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import PromptGaugeError
from ..evaluator import EvaluatorInput, EvaluatorModel, evaluate
from ..gateway import Gateway
from .attribution import Attribution, attribute
from .revision import Diagnosis, diagnose, rewrite

PASSED_THRESHOLD = "passed_threshold"
MAX_ITERATIONS = "max_iterations"
NO_IMPROVEMENT = "no_improvement"


@dataclass
class IterationRecord:
    prompt_text: str
    query_text: str
    y_hat_before: float
    m_hat: list[float]
    attribution: dict[str, float]
    diagnosed_metrics: list[str]
    diagnoses: list[dict]
    new_prompt: str
    new_query: str
    y_hat_after: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class OptimizationTrace:
    initial_y_hat: float
    iterations: list[IterationRecord] = field(default_factory=list)
    stop_reason: str = MAX_ITERATIONS
    best_y_hat: float = 0.0
    error: str | None = None

    def as_dict(self) -> dict:
        return {
            "initial_y_hat": self.initial_y_hat,
            "iterations": [r.as_dict() for r in self.iterations],
            "stop_reason": self.stop_reason,
            "best_y_hat": self.best_y_hat,
            "error": self.error,
        }


def optimize(
    model: EvaluatorModel,
    query_text: str,
    prompt_text: str,
    gateway: Gateway,
    max_iterations: int = 3,
    top_k_metrics: int = 2,
) -> tuple[str, str, OptimizationTrace]:
    prefix = model.prefix
    current_prompt, current_query = prompt_text, query_text
    pred = evaluate(model, EvaluatorInput(prefix, current_query, current_prompt), gateway)
    trace = OptimizationTrace(initial_y_hat=pred.y_hat, best_y_hat=pred.y_hat)
    best = (pred.y_hat, current_prompt, current_query)

    if pred.y_hat >= 0.5:
        trace.stop_reason = PASSED_THRESHOLD
        return current_prompt, current_query, trace

    for _ in range(max_iterations):
        try:
            attribution: Attribution = attribute(
                model, EvaluatorInput(prefix, current_query, current_prompt), gateway
            )
            targets = attribution.ranking[:top_k_metrics]
            diagnoses: list[Diagnosis] = [
                diagnose(metric, current_query, current_prompt, gateway) for metric in targets
            ]
            useful = [d for d in diagnoses if not d.is_empty]
            if not useful:
                trace.stop_reason = NO_IMPROVEMENT
                break
            new_prompt, new_query = rewrite(current_query, current_prompt, useful, gateway)
        except PromptGaugeError as exc:
            # any model-side failure aborts the iteration; best-so-far stands
            trace.stop_reason = NO_IMPROVEMENT
            trace.error = str(exc)
            break

        new_pred = evaluate(model, EvaluatorInput(prefix, new_query, new_prompt), gateway)
        trace.iterations.append(
            IterationRecord(
                prompt_text=current_prompt,
                query_text=current_query,
                y_hat_before=pred.y_hat,
                m_hat=pred.m_hat.tolist(),
                attribution=attribution.sensitivities,
                diagnosed_metrics=targets,
                diagnoses=[d.as_dict() for d in diagnoses],
                new_prompt=new_prompt,
                new_query=new_query,
                y_hat_after=new_pred.y_hat,
            )
        )
        current_prompt, current_query, pred = new_prompt, new_query, new_pred
        if new_pred.y_hat > best[0]:
            best = (new_pred.y_hat, new_prompt, new_query)
        if new_pred.y_hat >= 0.5:
            trace.stop_reason = PASSED_THRESHOLD
            break
    else:
        trace.stop_reason = MAX_ITERATIONS

    trace.best_y_hat = best[0]
    return best[1], best[2], trace
