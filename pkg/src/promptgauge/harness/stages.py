"""Pipeline stages with manifest-chained artifacts.

Six stages (build-pool, measure, select-metrics, train-evaluator, optimize,
benchmark) plus the report collator. Every stage writes its artifacts and a
manifest recording the settings hash, the input artifact hashes it consumed
and the output hashes it produced. Reruns with unchanged inputs are skipped;
tampered upstream artifacts raise ManifestMismatch instead of being silently
trusted.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import prompts
from ..corpus import PromptCandidate, Query, TemplateRegistry, build_pool
from ..errors import EmptySplit, ManifestMismatch, MissingDependency, PromptGaugeError
from ..evaluator import EvaluatorInput, EvaluatorModel, encode, train
from ..gateway import Gateway, canonical_json
from ..metrics import (
    AnswerDistribution,
    MetricsManifest,
    PairMeasurement,
    MetricVector,
    QualityLabel,
    SchemaRegistry,
    canonicalize_answer,
    execution_request,
    measure_candidate,
    run_trace,
)
from ..optimizer import optimize
from ..selection import (
    aggregate_embedding_importance,
    assemble_feature_matrix,
    fit,
    gain_importance,
    importance_table,
    select_with_fallback,
)
from .config import RunConfig, build_gateway
from .ingest import ingest

STAGE_ORDER = (
    "build-pool",
    "measure",
    "select-metrics",
    "train-evaluator",
    "optimize",
    "benchmark",
)

DEPENDENCIES: dict[str, tuple[str, ...]] = {
    "build-pool": (),
    "measure": ("build-pool",),
    "select-metrics": ("measure",),
    "train-evaluator": ("build-pool", "measure", "select-metrics"),
    "optimize": ("build-pool", "train-evaluator"),
    "benchmark": ("build-pool", "optimize"),
    "report": STAGE_ORDER,
}

MANIFEST_NAME = "manifest.json"
TIMING_NAME = ".timing"


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_jsonable(obj), sort_keys=True, indent=1), encoding="utf-8")


def write_jsonl(path: Path, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(_jsonable(record), sort_keys=True) + "\n")


def read_jsonl(path: Path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def file_sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


@dataclass
class StageResult:
    stage: str
    skipped: bool
    directory: Path
    outputs: dict[str, str]


class PipelineRunner:
    def __init__(self, config: RunConfig):
        self.config = config
        self.root = Path(config.out_dir)
        self.root.mkdir(parents=True, exist_ok=True)
        self.settings_hash = hashlib.sha256(
            canonical_json(config.settings_dict()).encode("utf-8")
        ).hexdigest()
        self.schema_registry = SchemaRegistry({d.task: d.schema for d in config.datasets})
        self.registry = TemplateRegistry(extra=config.pool.extra_templates)
        self.prefix = config.evaluator_prefix or prompts.DEFAULT_EVALUATOR_PREFIX

    # manifest plumbing ------------------------------------------------------

    def stage_dir(self, stage: str) -> Path:
        return self.root / stage

    def _manifest_path(self, stage: str) -> Path:
        return self.stage_dir(stage) / MANIFEST_NAME

    def _load_manifest(self, stage: str) -> dict | None:
        path = self._manifest_path(stage)
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    def _verify_dependency(self, stage: str, dep: str) -> dict[str, str]:
        """Returns {relative path: sha} of the dependency's outputs."""
        manifest = self._load_manifest(dep)
        if manifest is None:
            raise MissingDependency(f"stage '{stage}' needs artifacts from '{dep}' which has not run")
        hashes = {}
        for name, recorded in manifest["outputs"].items():
            path = self.stage_dir(dep) / name
            if not path.exists():
                raise MissingDependency(f"artifact {dep}/{name} is missing")
            actual = file_sha256(path)
            if actual != recorded:
                raise ManifestMismatch(
                    f"artifact {dep}/{name} does not match its manifest "
                    f"(expected {recorded[:12]}, found {actual[:12]})"
                )
            hashes[f"{dep}/{name}"] = recorded
        if manifest["settings_hash"] != self.settings_hash:
            raise ManifestMismatch(
                f"stage '{dep}' was produced under different settings; rerun it"
            )
        return hashes

    def _can_skip(self, stage: str, inputs: dict[str, str]) -> bool:
        manifest = self._load_manifest(stage)
        if manifest is None:
            return False
        if manifest["settings_hash"] != self.settings_hash or manifest["inputs"] != inputs:
            return False
        for name, recorded in manifest["outputs"].items():
            path = self.stage_dir(stage) / name
            if not path.exists() or file_sha256(path) != recorded:
                return False
        return True

    def run_stage(self, stage: str) -> StageResult:
        if stage not in DEPENDENCIES:
            raise PromptGaugeError(f"unknown stage: {stage}")
        inputs: dict[str, str] = {}
        for dep in DEPENDENCIES[stage]:
            inputs.update(self._verify_dependency(stage, dep))
        out = self.stage_dir(stage)
        if self._can_skip(stage, inputs):
            manifest = self._load_manifest(stage)
            return StageResult(stage=stage, skipped=True, directory=out, outputs=manifest["outputs"])

        out.mkdir(parents=True, exist_ok=True)
        gateway = build_gateway(self.config)
        started = time.monotonic()
        impl = {
            "build-pool": self._stage_build_pool,
            "measure": self._stage_measure,
            "select-metrics": self._stage_select_metrics,
            "train-evaluator": self._stage_train_evaluator,
            "optimize": self._stage_optimize,
            "benchmark": self._stage_benchmark,
            "report": self._stage_report,
        }[stage]
        output_names = impl(gateway, out)
        elapsed = time.monotonic() - started
        (out / TIMING_NAME).write_text(json.dumps({"seconds": elapsed}), encoding="utf-8")

        outputs = {name: file_sha256(out / name) for name in output_names}
        manifest = {
            "stage": stage,
            "settings_hash": self.settings_hash,
            "inputs": inputs,
            "outputs": outputs,
            "counters": gateway.counters.snapshot(),
        }
        write_json(self._manifest_path(stage), manifest)
        return StageResult(stage=stage, skipped=False, directory=out, outputs=outputs)

    def run_all(self) -> list[StageResult]:
        results = [self.run_stage(stage) for stage in STAGE_ORDER]
        results.append(self.run_stage("report"))
        return results

    # shared loaders ---------------------------------------------------------

    def _load_queries(self, split: str | None = None) -> list[Query]:
        rows = read_jsonl(self.stage_dir("build-pool") / "queries.jsonl")
        queries = [Query(**row) for row in rows]
        if split:
            queries = [q for q in queries if q.split == split]
        return sorted(queries, key=lambda q: q.id)

    def _load_pool(self) -> list[PromptCandidate]:
        rows = read_jsonl(self.stage_dir("build-pool") / "pool.jsonl")
        return [PromptCandidate.from_record(r) for r in rows]

    def _load_measurements(self) -> list[PairMeasurement]:
        rows = read_jsonl(self.stage_dir("measure") / "measurements.jsonl")
        out = []
        for row in rows:
            metrics = MetricVector(**row["metrics"])
            quality = QualityLabel(mean_accuracy=row["mean_accuracy"], is_good=row["is_good"])
            out.append(
                PairMeasurement(
                    query_id=row["query_id"],
                    prompt_id=row["prompt_id"],
                    metrics=metrics,
                    quality=quality,
                )
            )
        return out

    # stage implementations ----------------------------------------------------

    def _stage_build_pool(self, gateway: Gateway, out: Path) -> list[str]:
        queries = ingest(self.config.datasets, self.config.split_policy, self.config.seed)
        write_jsonl(out / "queries.jsonl", [q.__dict__ for q in queries])
        train_queries = [q for q in queries if q.split == "train"]
        result = build_pool(
            train_queries, self.config.pool, gateway, self.config.seed, registry=self.registry
        )
        write_jsonl(out / "pool.jsonl", [c.to_record() for c in result.candidates])
        write_jsonl(out / "run_log.jsonl", result.run_log)
        write_json(out / "failures.json", result.failures)
        return ["queries.jsonl", "pool.jsonl", "run_log.jsonl", "failures.json"]

    def _stage_measure(self, gateway: Gateway, out: Path) -> list[str]:
        queries = self._load_queries(split="train")
        pool = self._load_pool()
        by_query: dict[str, list[PromptCandidate]] = {}
        for candidate in pool:
            by_query.setdefault(candidate.query_id, []).append(candidate)
        measurements = []
        traces = []
        for query in queries:
            schema = self.schema_registry.schema_for(query.task)
            prompt_free = run_trace(gateway, query, schema, self.config.estimator)
            traces.append(_trace_record(prompt_free))
            for candidate in sorted(by_query.get(query.id, []), key=lambda c: c.id):
                measurement, trace = measure_candidate(
                    gateway, query, candidate, schema, self.config.estimator, prompt_free
                )
                measurements.append(measurement.as_record())
                traces.append(_trace_record(trace))
        write_jsonl(out / "measurements.jsonl", measurements)
        write_jsonl(out / "traces.jsonl", traces)
        manifest = MetricsManifest(
            n_samples=self.config.estimator.n_samples,
            temperature=self.config.estimator.temperature,
            embedding_backend_id=gateway.embed_model_id,
        )
        write_json(out / "estimator.json", manifest.as_dict())
        return ["measurements.jsonl", "traces.jsonl", "estimator.json"]

    def _stage_select_metrics(self, gateway: Gateway, out: Path) -> list[str]:
        measurements = self._load_measurements()
        embeddings = None
        if self.config.selection.include_embeddings:
            pool = {c.id: c for c in self._load_pool()}
            embeddings = {
                m.prompt_id: gateway.embed(pool[m.prompt_id].text).values for m in measurements
            }
        matrix, imputed = assemble_feature_matrix(
            measurements, embeddings, include_embeddings=self.config.selection.include_embeddings
        )
        model = fit(matrix, self.config.selection.boost)
        importance = gain_importance(model)
        grouped = aggregate_embedding_importance(importance)
        selected, used_fallback = select_with_fallback(grouped, self.config.selection.threshold)
        model.save(out / "gbdt_model.json")
        write_json(
            out / "importance.json",
            {"per_feature": importance.shares, "grouped": grouped.shares, "total_gain": grouped.total_gain},
        )
        (out / "importance.txt").write_text(importance_table(grouped) + "\n", encoding="utf-8")
        write_json(
            out / "selection.json",
            {
                "selected": selected,
                "used_fallback": used_fallback,
                "threshold": self.config.selection.threshold,
                "imputed": imputed,
                "kernel": model.kernel,
            },
        )
        return ["gbdt_model.json", "importance.json", "importance.txt", "selection.json"]

    def _evaluator_metric_names(self, selection: dict) -> tuple[str, ...]:
        # the evaluator regresses exactly four metrics: the selected set,
        # padded/truncated by descending share when selection sized otherwise
        selected = list(selection["selected"])
        if len(selected) > 4:
            selected = selected[:4]
        if len(selected) < 4:
            for metric in prompts.CANDIDATE_METRICS:
                if metric not in selected:
                    selected.append(metric)
                if len(selected) == 4:
                    break
        return tuple(selected)

    def _stage_train_evaluator(self, gateway: Gateway, out: Path) -> list[str]:
        measurements = sorted(
            self._load_measurements(), key=lambda m: (m.query_id, m.prompt_id)
        )
        selection = json.loads(
            (self.stage_dir("select-metrics") / "selection.json").read_text(encoding="utf-8")
        )
        metric_names = self._evaluator_metric_names(selection)
        imputed = selection.get("imputed", {})
        queries = {q.id: q for q in self._load_queries()}
        pool = {c.id: c for c in self._load_pool()}

        H_rows, targets, labels = [], [], []
        for m in measurements:
            query = queries[m.query_id]
            candidate = pool[m.prompt_id]
            h = encode(gateway, EvaluatorInput(self.prefix, query.text, candidate.text))
            metric_dict = m.metrics.as_dict()
            row = []
            for name in metric_names:
                value = metric_dict.get(name)
                if value is None:
                    value = imputed.get(name, 5.5)
                row.append(float(value))
            H_rows.append(h)
            targets.append(row)
            labels.append(float(m.quality.is_good))

        model, history = train(
            np.vstack(H_rows),
            np.asarray(targets),
            np.asarray(labels),
            metric_names,
            self.config.evaluator,
            prefix=self.prefix,
            encoder_backend_id=gateway.backend_id,
        )
        model.save(out / "evaluator.json")
        write_jsonl(out / "history.jsonl", history.rows)
        return ["evaluator.json", "history.jsonl"]

    def _stage_optimize(self, gateway: Gateway, out: Path) -> list[str]:
        model = EvaluatorModel.load(self.stage_dir("train-evaluator") / "evaluator.json")
        queries = self._load_queries(split="test")
        initial_prompt = self.registry[self.config.optimize.initial_template]
        records = []
        traces = {}
        for query in queries:
            best_prompt, best_query, trace = optimize(
                model,
                query.text,
                initial_prompt,
                gateway,
                max_iterations=self.config.optimize.max_iterations,
                top_k_metrics=self.config.optimize.top_k_metrics,
            )
            records.append(
                {
                    "query_id": query.id,
                    "task": query.task,
                    "initial_prompt": initial_prompt,
                    "best_prompt": best_prompt,
                    "best_query": best_query,
                    "initial_y_hat": trace.initial_y_hat,
                    "best_y_hat": trace.best_y_hat,
                    "stop_reason": trace.stop_reason,
                    "n_iterations": len(trace.iterations),
                }
            )
            traces[query.id] = trace.as_dict()
        write_jsonl(out / "optimized.jsonl", records)
        write_json(out / "traces.json", traces)
        return ["optimized.jsonl", "traces.json"]

    def _execute_answer(self, gateway: Gateway, prompt: str | None, query_text: str, schema):
        req = execution_request(
            prompt,
            query_text,
            self.config.estimator,
            n_samples=self.config.benchmark.n_executions,
            temperature=self.config.benchmark.temperature,
        )
        result = gateway.generate(req)
        answers = [canonicalize_answer(s.text, schema) for s in result.samples]
        dist = AnswerDistribution.from_answers(answers)
        modal = max(zip(dist.probs, dist.support), key=lambda pair: (pair[0], pair[1]))[1]
        return modal

    def _stage_benchmark(self, gateway: Gateway, out: Path) -> list[str]:
        queries = self._load_queries(split="test")
        if not queries:
            raise EmptySplit("benchmark needs a non-empty test split")
        optimized = {r["query_id"]: r for r in read_jsonl(self.stage_dir("optimize") / "optimized.jsonl")}
        records = []
        for query in queries:
            schema = self.schema_registry.schema_for(query.task)
            gold = canonicalize_answer(query.gold_answer, schema)
            row = {"query_id": query.id, "task": query.task, "error": None}
            try:
                opt = optimized[query.id]
                baseline = self._execute_answer(gateway, None, query.text, schema)
                tuned = self._execute_answer(gateway, opt["best_prompt"], opt["best_query"], schema)
                row.update(
                    {
                        "baseline_answer": baseline,
                        "optimized_answer": tuned,
                        "gold": gold,
                        "baseline_correct": baseline == gold,
                        "optimized_correct": tuned == gold,
                    }
                )
            except PromptGaugeError as exc:
                row["error"] = str(exc)
            records.append(row)
        write_jsonl(out / "records.jsonl", records)

        summary: dict[str, dict] = {}
        for row in records:
            task = row["task"]
            bucket = summary.setdefault(
                task, {"n": 0, "failed": 0, "baseline_correct": 0, "optimized_correct": 0}
            )
            if row["error"]:
                bucket["failed"] += 1
                continue
            bucket["n"] += 1
            bucket["baseline_correct"] += int(row["baseline_correct"])
            bucket["optimized_correct"] += int(row["optimized_correct"])
        for task, bucket in summary.items():
            n = max(bucket["n"], 1)
            bucket["baseline_accuracy"] = bucket["baseline_correct"] / n
            bucket["optimized_accuracy"] = bucket["optimized_correct"] / n
        write_json(out / "benchmark.json", summary)
        return ["records.jsonl", "benchmark.json"]

    def _stage_report(self, gateway: Gateway, out: Path) -> list[str]:
        benchmark = json.loads(
            (self.stage_dir("benchmark") / "benchmark.json").read_text(encoding="utf-8")
        )
        selection = json.loads(
            (self.stage_dir("select-metrics") / "selection.json").read_text(encoding="utf-8")
        )
        importance = json.loads(
            (self.stage_dir("select-metrics") / "importance.json").read_text(encoding="utf-8")
        )
        model = EvaluatorModel.load(self.stage_dir("train-evaluator") / "evaluator.json")
        history = read_jsonl(self.stage_dir("train-evaluator") / "history.jsonl")
        weight_rows = [row["metric_weights"] for row in history]
        counters = {}
        timings = {}
        for stage in STAGE_ORDER:
            manifest = self._load_manifest(stage)
            if manifest:
                counters[stage] = manifest.get("counters", {})
            timing_path = self.stage_dir(stage) / TIMING_NAME
            if timing_path.exists():
                timings[stage] = json.loads(timing_path.read_text(encoding="utf-8"))["seconds"]

        report = {
            "tasks": benchmark,
            "selection": {
                "selected": selection["selected"],
                "used_fallback": selection["used_fallback"],
                "shares": importance["grouped"],
            },
            "evaluator": {
                "metric_names": list(model.metric_names),
                "metric_weights": model.metric_weights.tolist(),
                "validation_accuracy": model.training_manifest.get("best_val_accuracy"),
                "best_epoch": model.training_manifest.get("best_epoch"),
            },
            "weights_trajectory": {
                "initial": weight_rows[0] if weight_rows else None,
                "final": weight_rows[-1] if weight_rows else None,
                "n_epochs": len(weight_rows),
            },
            "stage_counters": counters,
            "settings_hash": self.settings_hash,
            "seed": self.config.seed,
        }
        write_json(out / "report.json", report)
        (out / "report.txt").write_text(_report_table(report), encoding="utf-8")
        # wall-clock timings are volatile; they live in a sidecar that is
        # deliberately excluded from the deterministic report artifact
        write_json(out / "timings.json", timings)
        return ["report.json", "report.txt"]


def _trace_record(trace) -> dict:
    return {
        "query_id": trace.query_id,
        "prompt_id": trace.prompt_id,
        "temperature": trace.temperature,
        "samples": [[s.raw_text, s.canonical_answer, s.is_correct] for s in trace.samples],
    }


def _report_table(report: dict) -> str:
    lines = [
        f"{'task':<24} {'n':>4} {'baseline':>9} {'optimized':>10}",
        "-" * 50,
    ]
    for task in sorted(report["tasks"]):
        row = report["tasks"][task]
        lines.append(
            f"{task:<24} {row['n']:>4} {row['baseline_accuracy']:>9.3f} "
            f"{row['optimized_accuracy']:>10.3f}"
        )
    lines.append("")
    lines.append(f"selected metrics: {', '.join(report['selection']['selected'])}")
    weights = ", ".join(
        f"{name}={w:.3f}"
        for name, w in zip(report["evaluator"]["metric_names"], report["evaluator"]["metric_weights"])
    )
    lines.append(f"evaluator weights: {weights}")
    lines.append(f"evaluator validation accuracy: {report['evaluator']['validation_accuracy']}")
    return "\n".join(lines) + "\n"
