import json
import random

import pytest

from promptgauge import prompts
from promptgauge.corpus import (
    DEFAULT_TEMPLATES,
    PoolConfig,
    PromptCandidate,
    Query,
    Recombination,
    STYLE_TAGS,
    StaticTemplate,
    TemplateRegistry,
    build_pool,
    decompose_request,
    generate_static,
    generate_styled,
    parse_segments,
    recombine,
    rephrase_request,
    styled_request,
)
from promptgauge.errors import DecompositionFailure, EmptyRegistry
from promptgauge.gateway import Gateway
from promptgauge.gateway.recording import ensure_meta, prime_generation

QUERY = Query(id="q1", text="Does Vina tell the truth?", gold_answer="yes", task="toy", split="train")


class FixedRng(random.Random):
    """random() always returns the configured value; sample stays seeded."""

    def __init__(self, value):
        super().__init__(0)
        self._value = value

    def random(self):
        return self._value


class TestStaticTemplates:
    def test_default_registry_yields_five_candidates(self):
        candidates = generate_static(QUERY, TemplateRegistry())
        assert len(candidates) == 5
        assert {c.source.name for c in candidates} == set(DEFAULT_TEMPLATES)

    def test_single_template_identity(self):
        registry = TemplateRegistry(extra={"only": "Answer with care."}, include_defaults=False)
        (candidate,) = generate_static(QUERY, registry)
        assert candidate.text == "Answer with care."
        assert candidate.source == StaticTemplate("only")

    def test_config_extension_adds_to_count(self):
        registry = TemplateRegistry(extra={"x1": "a", "x2": "b"})
        assert len(generate_static(QUERY, registry)) == 7

    def test_empty_registry_rejected(self):
        with pytest.raises(EmptyRegistry):
            generate_static(QUERY, TemplateRegistry(include_defaults=False))


class TestStyledGeneration:
    def test_replay_identity(self, tmp_path):
        store = ensure_meta(tmp_path, "b", "emb")
        request = styled_request(QUERY.text, "socratic")
        prime_generation(store, "b", request, ["Probe the assumptions first."])
        gateway = Gateway.replay(tmp_path)
        candidate = generate_styled(QUERY, "socratic", gateway)
        assert candidate.text == "Probe the assumptions first."
        assert candidate.source.style == "socratic"
        assert candidate.generation_temperature == 1.0

    def test_all_six_styles_distinct_tags(self, uncached_gateway):
        candidates = [generate_styled(QUERY, style, uncached_gateway) for style in STYLE_TAGS]
        assert len({c.source.style for c in candidates}) == 6

    def test_unknown_style_rejected(self, uncached_gateway):
        with pytest.raises(ValueError):
            generate_styled(QUERY, "florid", uncached_gateway)


class TestRecombination:
    def _parents(self):
        a = PromptCandidate(id="q1/static/a", query_id="q1", text="First reason. Then conclude.",
                            source=StaticTemplate("a"))
        b = PromptCandidate(id="q1/static/b", query_id="q1", text="Ask questions. Then verify.",
                            source=StaticTemplate("b"))
        return a, b

    def test_identical_parents_rejected(self, uncached_gateway):
        a, _ = self._parents()
        with pytest.raises(ValueError):
            recombine(a, a, uncached_gateway, random.Random(0))

    def test_scripted_fixture_head_of_a_tail_of_b(self, tmp_path):
        a, b = self._parents()
        store = ensure_meta(tmp_path, "b", "emb")
        prime_generation(
            store, "b", decompose_request(a.text),
            [f"{prompts.SEGMENT_1} A1 {prompts.SEGMENT_2} A2"],
        )
        prime_generation(
            store, "b", decompose_request(b.text),
            [f"{prompts.SEGMENT_1} B1 {prompts.SEGMENT_2} B2"],
        )
        prime_generation(store, "b", rephrase_request("A1 B2"), ["A1 B2"])
        gateway = Gateway.replay(tmp_path)
        log = []
        child = recombine(a, b, gateway, FixedRng(0.0), log=log)
        assert child.text == "A1 B2"
        assert child.source == Recombination(a.id, b.id)
        assert log[0]["segments_a"] == ["A1", "A2"]
        assert log[0]["pairing"] == "a1+b2"

    def test_decomposition_requires_both_markers(self):
        with pytest.raises(DecompositionFailure):
            parse_segments("no sentinels here")
        with pytest.raises(DecompositionFailure):
            parse_segments(f"{prompts.SEGMENT_1} only one part {prompts.SEGMENT_2} ")

    def test_scripted_backend_round_trip(self, uncached_gateway):
        a, b = self._parents()
        child = recombine(a, b, uncached_gateway, random.Random(3))
        assert child.text
        assert child.query_id == "q1"


class TestBuildPool:
    def _queries(self):
        return [
            Query(id="q1", text="Consider the word 'tree'. Is the number of letters in it even? Answer yes or no.",
                  gold_answer="yes", task="toy_parity"),
            Query(id="q2", text="Consider the word 'sun'. Is the number of letters in it even? Answer yes or no.",
                  gold_answer="no", task="toy_parity"),
        ]

    def test_pool_size_arithmetic(self, uncached_gateway):
        config = PoolConfig(styles=STYLE_TAGS, n_recombinations=4)
        result = build_pool(self._queries(), config, uncached_gateway, seed=5)
        # 2 queries x (5 static + 6 styled + 4 recombined)
        assert len(result.candidates) == 30
        assert not result.failures

    def test_fixed_seed_reproduces_pool_exactly(self, uncached_gateway):
        config = PoolConfig(styles=("socratic",), n_recombinations=2)
        first = build_pool(self._queries(), config, uncached_gateway, seed=9)
        second = build_pool(self._queries(), config, uncached_gateway, seed=9)
        assert [c.to_record() for c in first.candidates] == [c.to_record() for c in second.candidates]

    def test_recombination_lineage_is_depth_one(self, uncached_gateway):
        config = PoolConfig(styles=("verification",), n_recombinations=3)
        result = build_pool(self._queries(), config, uncached_gateway, seed=2)
        by_id = {c.id: c for c in result.candidates}
        for candidate in result.candidates:
            if isinstance(candidate.source, Recombination):
                for parent_id in (candidate.source.parent_a_id, candidate.source.parent_b_id):
                    parent = by_id[parent_id]
                    assert not isinstance(parent.source, Recombination)
                assert candidate.source.parent_a_id != candidate.source.parent_b_id

    def test_source_kinds_match_run_log(self, uncached_gateway):
        config = PoolConfig(styles=("socratic",), n_recombinations=1)
        result = build_pool(self._queries(), config, uncached_gateway, seed=2)
        logged = {entry["candidate_id"] for entry in result.run_log}
        recombined = {c.id for c in result.candidates if isinstance(c.source, Recombination)}
        assert logged == recombined

    def test_candidate_records_round_trip(self, uncached_gateway):
        config = PoolConfig(styles=("creative",), n_recombinations=1)
        result = build_pool(self._queries(), config, uncached_gateway, seed=4)
        for candidate in result.candidates:
            clone = PromptCandidate.from_record(json.loads(json.dumps(candidate.to_record())))
            assert clone == candidate
