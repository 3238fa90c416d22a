"""Static prompt template registry.

Ships the five widely used templates (zero-shot CoT, the APE variant,
least-to-most decomposition, tree-of-thought, multi-expert debate) and can
be extended with additional named templates from the run config.
"""

from __future__ import annotations

from ..errors import EmptyRegistry

DEFAULT_TEMPLATES: dict[str, str] = {
    "zero_shot_cot": "Let's think step by step:",
    "ape_step_by_step": (
        "Let's work this out in a step by step way to be sure we have the "
        "right answer:"
    ),
    "least_to_most": (
        "First, decompose the question into several sub-questions that need "
        "to be solved, and then solve each question step by step:"
    ),
    "tree_of_thought": (
        "Imagine three different experts are answering this question. All "
        "experts will write down 1 step of their thinking, and then share "
        "it with the group. Then all experts will go on to the next step, "
        "etc. If any expert realizes they're wrong at any point then they "
        "leave."
    ),
    "multi_expert_debate": (
        "3 experts are discussing the question, trying to solve it step by "
        "step, and make sure the result is correct:"
    ),
}


class TemplateRegistry:
    def __init__(self, extra: dict[str, str] | None = None, include_defaults: bool = True):
        self.templates: dict[str, str] = dict(DEFAULT_TEMPLATES) if include_defaults else {}
        if extra:
            self.templates.update(extra)

    def names(self) -> list[str]:
        return sorted(self.templates)

    def require_nonempty(self) -> None:
        if not self.templates:
            raise EmptyRegistry("no static templates registered")

    def __len__(self) -> int:
        return len(self.templates)

    def __getitem__(self, name: str) -> str:
        return self.templates[name]
