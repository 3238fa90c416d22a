import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import reference
from promptgauge.corpus import PromptCandidate, Query, StaticTemplate
from promptgauge.errors import DegenerateTrace, InvalidDistribution, ZeroVector
from promptgauge.gateway import Gateway
from promptgauge.gateway.recording import ensure_meta, prime_generation
from promptgauge.metrics import (
    AnswerDistribution,
    EstimatorSettings,
    ExecutionTrace,
    MetricVector,
    QualityLabel,
    TaskSchema,
    TraceSample,
    answer_entropy,
    canonicalize_answer,
    judge_request,
    judge_scores,
    label,
    mutual_information,
    nll_from_logprobs,
    parse_judge_reply,
    run_trace,
    stability_from_embeddings,
    trace_entropy,
)
from promptgauge.errors import ParseFailure

MC = TaskSchema(task="t", kind="multiple_choice")
YN = TaskSchema(task="t", kind="yes_no")
NUM = TaskSchema(task="t", kind="numeric")
EXACT = TaskSchema(task="t", kind="exact_match")


def make_trace(answers, corrects=None, prompt_id="p"):
    corrects = corrects or [False] * len(answers)
    return ExecutionTrace(
        query_id="q",
        prompt_id=prompt_id,
        samples=[TraceSample(raw_text=a, canonical_answer=a, is_correct=c) for a, c in zip(answers, corrects)],
        temperature=0.7,
    )


class TestCanonicalization:
    def test_marker_extraction_multiple_choice(self):
        assert canonicalize_answer("The answer is (B).", MC) == "b"

    def test_plain_yes(self):
        assert canonicalize_answer("yes.", YN) == "yes"

    def test_marker_beats_earlier_numbers(self):
        assert canonicalize_answer("...so 3+4=7. Final answer: 7", NUM) == "7"

    def test_last_span_without_marker(self):
        assert canonicalize_answer("maybe no, but on reflection yes", YN) == "yes"

    def test_numeric_normalization(self):
        assert canonicalize_answer("Answer: 7.0", NUM) == "7"
        assert canonicalize_answer("Answer: -2.5", NUM) == "-2.5"

    def test_whole_text_fallback(self):
        assert canonicalize_answer("  Unclear Response!  ", EXACT) == "unclear response"

    def test_exact_match_uses_marker_snippet(self):
        assert canonicalize_answer("Final answer: Valid Contract.", EXACT) == "valid contract"

    def test_deterministic(self):
        text = "Some waffle. Answer: (c) because of reasons"
        assert canonicalize_answer(text, MC) == canonicalize_answer(text, MC) == "c"


class TestDistributions:
    def test_from_answers_counts(self):
        dist = AnswerDistribution.from_answers(["a", "b", "a", "a"])
        assert dist.support == ["a", "b"]
        assert np.allclose(dist.probs, [0.75, 0.25])

    def test_rejects_negative_probs(self):
        with pytest.raises(InvalidDistribution):
            AnswerDistribution(support=["a", "b"], probs=np.array([1.2, -0.2]))

    def test_rejects_unnormalized(self):
        with pytest.raises(InvalidDistribution):
            AnswerDistribution(support=["a", "b"], probs=np.array([0.6, 0.6]))

    def test_rejects_duplicate_support(self):
        with pytest.raises(InvalidDistribution):
            AnswerDistribution(support=["a", "a"], probs=np.array([0.5, 0.5]))


class TestEntropy:
    def test_point_mass_zero(self):
        assert answer_entropy(AnswerDistribution(["x"], np.array([1.0]))) == 0.0

    def test_uniform_four_is_ln4(self):
        dist = AnswerDistribution(list("abcd"), np.full(4, 0.25))
        assert answer_entropy(dist) == pytest.approx(math.log(4), abs=1e-12)

    def test_counts_seven_three(self):
        # frozen from the brute-force oracle
        dist = AnswerDistribution.from_answers(["a"] * 7 + ["b"] * 3)
        assert answer_entropy(dist) == pytest.approx(0.6108643020548935, abs=1e-12)

    def test_counts_six_three_one(self):
        dist = AnswerDistribution.from_answers(["a"] * 6 + ["b"] * 3 + ["c"])
        assert answer_entropy(dist) == pytest.approx(0.8979457248567797, abs=1e-12)

    def test_counts_eight_one_one(self):
        dist = AnswerDistribution.from_answers(["a"] * 8 + ["b"] + ["c"])
        assert answer_entropy(dist) == pytest.approx(0.639031859650177, abs=1e-12)

    @given(st.lists(st.integers(min_value=1, max_value=12), min_size=1, max_size=6))
    @settings(max_examples=200, deadline=None)
    def test_bounds_property(self, counts):
        n = sum(counts)
        dist = AnswerDistribution(
            [f"a{i}" for i in range(len(counts))], np.array([c / n for c in counts])
        )
        h = answer_entropy(dist)
        assert -1e-12 <= h <= math.log(len(counts)) + 1e-12


class TestMutualInformation:
    def test_identical_distributions_zero(self):
        dist = AnswerDistribution(["a", "b"], np.array([0.4, 0.6]))
        assert mutual_information(dist, dist) == 0.0

    def test_uniform_to_point_mass_is_ln4(self):
        before = AnswerDistribution(list("abcd"), np.full(4, 0.25))
        after = AnswerDistribution(["a"], np.array([1.0]))
        assert mutual_information(before, after) == pytest.approx(math.log(4), abs=1e-12)

    def test_half_half_to_nine_one(self):
        before = AnswerDistribution(["a", "b"], np.array([0.5, 0.5]))
        after = AnswerDistribution(["a", "b"], np.array([0.9, 0.1]))
        assert mutual_information(before, after) == pytest.approx(0.3680642071684971, abs=1e-12)

    def test_negative_mi_reported_as_is(self):
        before = AnswerDistribution(["a"], np.array([1.0]))
        after = AnswerDistribution(["a", "b"], np.array([0.5, 0.5]))
        assert mutual_information(before, after) == pytest.approx(-math.log(2), abs=1e-12)


class TestNll:
    def test_mean_of_negated_logprobs(self):
        assert nll_from_logprobs([("a", -0.1), ("b", -0.3), ("c", -0.2)]) == pytest.approx(0.2)

    def test_certain_model_zero(self):
        assert nll_from_logprobs([("a", 0.0), ("b", 0.0)]) == 0.0

    def test_uniform_vocabulary_ln_v(self):
        v = 50
        pairs = [(f"t{i}", -math.log(v)) for i in range(4)]
        assert nll_from_logprobs(pairs) == pytest.approx(math.log(v), abs=1e-12)

    @given(
        st.lists(st.floats(min_value=-5, max_value=-0.01), min_size=1, max_size=8),
        st.floats(min_value=0.0, max_value=1.0),
    )
    @settings(max_examples=100, deadline=None)
    def test_monotone_in_logprobs(self, lps, lift_fraction):
        pairs = [(f"t{i}", lp) for i, lp in enumerate(lps)]
        lifted = [(t, lp * (1.0 - lift_fraction)) for t, lp in pairs]  # raise every logprob
        assert nll_from_logprobs(lifted) <= nll_from_logprobs(pairs) + 1e-12


class TestStability:
    def test_identical_embeddings_one(self):
        v = np.tile([0.3, 0.4], (3, 1))
        assert stability_from_embeddings(v) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_pair_zero(self):
        assert stability_from_embeddings(np.eye(2)) == pytest.approx(0.0, abs=1e-12)

    def test_two_parallel_one_orthogonal(self):
        v = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]])
        assert stability_from_embeddings(v) == pytest.approx(1.0 / 3.0, abs=1e-12)

    def test_rejects_single_sample(self):
        with pytest.raises(DegenerateTrace):
            stability_from_embeddings(np.array([[1.0, 0.0]]))

    def test_rejects_zero_vector(self):
        with pytest.raises(ZeroVector):
            stability_from_embeddings(np.array([[1.0, 0.0], [0.0, 0.0]]))

    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=60, deadline=None)
    def test_permutation_invariance(self, seed):
        rng = np.random.default_rng(seed)
        v = rng.standard_normal((rng.integers(2, 6), 4))
        shuffled = v[rng.permutation(v.shape[0])]
        assert stability_from_embeddings(v) == pytest.approx(
            stability_from_embeddings(shuffled), abs=1e-12
        )


class TestOracleEquivalence:
    """Randomized agreement with the naive references (small instances)."""

    @given(st.integers(min_value=0, max_value=100_000))
    @settings(max_examples=150, deadline=None)
    def test_stability_matches_reference(self, seed):
        rng = np.random.default_rng(seed)
        v = rng.standard_normal((int(rng.integers(2, 7)), int(rng.integers(2, 9))))
        assert stability_from_embeddings(v) == pytest.approx(
            reference.stability_ref(v.tolist()), abs=1e-9
        )

    @given(st.integers(min_value=0, max_value=100_000))
    @settings(max_examples=150, deadline=None)
    def test_entropy_and_mi_match_reference(self, seed):
        rng = np.random.default_rng(seed)
        k1, k2 = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        c1 = rng.integers(1, 8, size=k1)
        c2 = rng.integers(1, 8, size=k2)
        d1 = AnswerDistribution([f"a{i}" for i in range(k1)], c1 / c1.sum())
        d2 = AnswerDistribution([f"b{i}" for i in range(k2)], c2 / c2.sum())
        assert answer_entropy(d1) == pytest.approx(
            reference.entropy_ref((c1 / c1.sum()).tolist()), abs=1e-9
        )
        assert mutual_information(d1, d2) == pytest.approx(
            reference.mi_ref((c1 / c1.sum()).tolist(), (c2 / c2.sum()).tolist()), abs=1e-9
        )


class TestLabels:
    def test_seven_of_ten(self):
        trace = make_trace(["x"] * 10, [True] * 7 + [False] * 3)
        assert label(trace) == QualityLabel(mean_accuracy=0.7, is_good=True)

    def test_exactly_half_is_not_good(self):
        trace = make_trace(["x"] * 10, [True] * 5 + [False] * 5)
        assert label(trace) == QualityLabel(mean_accuracy=0.5, is_good=False)

    def test_zero_correct(self):
        trace = make_trace(["x"] * 10)
        assert label(trace) == QualityLabel(mean_accuracy=0.0, is_good=False)

    @given(st.integers(min_value=0, max_value=100_000))
    @settings(max_examples=200, deadline=None)
    def test_majority_vote_recovers_gold(self, seed):
        # whenever mean accuracy exceeds one half, the modal canonical
        # answer must be the gold answer (no tie is possible)
        rng = np.random.default_rng(seed)
        n = 10
        n_correct = int(rng.integers(6, n + 1))
        wrong_pool = ["w1", "w2", "w3"]
        answers = ["gold"] * n_correct + [
            wrong_pool[int(rng.integers(0, 3))] for _ in range(n - n_correct)
        ]
        trace = make_trace(answers, [a == "gold" for a in answers])
        assert label(trace).is_good
        dist = AnswerDistribution.from_answers(trace.canonical_answers())
        modal = dist.support[int(np.argmax(dist.probs))]
        assert modal == "gold"


class TestTraceCollection:
    def test_query_entropy_zero_when_all_agree(self):
        trace = make_trace(["yes"] * 10, prompt_id="")
        assert trace_entropy(trace) == 0.0

    def test_query_entropy_half_split_ln2(self):
        trace = make_trace(["yes"] * 5 + ["no"] * 5, prompt_id="")
        assert trace_entropy(trace) == pytest.approx(math.log(2), abs=1e-12)

    def test_run_trace_marks_correctness(self, tmp_path):
        from promptgauge.metrics.collect import execution_request

        query = Query(id="q", text="Is it so? Answer yes or no.", gold_answer="yes", task="t")
        store = ensure_meta(tmp_path, "b", "emb")
        settings_ = EstimatorSettings(n_samples=3, temperature=0.7)
        request = execution_request(None, query.text, settings_)
        prime_generation(store, "b", request, ["Final answer: yes", "no", "Final answer: yes"])
        gateway = Gateway.replay(tmp_path)
        trace = run_trace(gateway, query, YN, settings_)
        assert [s.is_correct for s in trace.samples] == [True, False, True]
        assert trace.prompt_id == ""


class TestMetricVectorValidation:
    def test_rejects_negative_nll(self):
        with pytest.raises(ValueError):
            MetricVector(nll_score=-0.1, stability_score=0.0, mi_score=0.0, query_entropy=0.0)

    def test_rejects_out_of_range_stability(self):
        with pytest.raises(ValueError):
            MetricVector(nll_score=0.0, stability_score=1.5, mi_score=0.0, query_entropy=0.0)

    def test_rejects_out_of_range_judge(self):
        with pytest.raises(ValueError):
            MetricVector(nll_score=0.0, stability_score=0.0, mi_score=0.0, query_entropy=0.0, clarity=11)


class TestJudge:
    def test_parse_contract(self):
        assert parse_judge_reply("clarity: 8, coherence: 7, specificity: 5") == (8, 7, 5)

    def test_out_of_range_is_parse_failure(self):
        with pytest.raises(ParseFailure):
            parse_judge_reply("clarity: 11, coherence: 7, specificity: 5")

    def test_missing_field_is_parse_failure(self):
        with pytest.raises(ParseFailure):
            parse_judge_reply("clarity: 8, coherence: 7")

    def test_replay_parses_primed_scores(self, tmp_path):
        store = ensure_meta(tmp_path, "b", "emb")
        prime_generation(store, "b", judge_request("q", "p"), ["clarity: 8, coherence: 7, specificity: 5"])
        gateway = Gateway.replay(tmp_path)
        assert judge_scores("q", "p", gateway) == (8, 7, 5)

    def test_reprompt_once_then_missing(self, tmp_path):
        store = ensure_meta(tmp_path, "b", "emb")
        prime_generation(store, "b", judge_request("q", "p"), ["clarity: 11, coherence: 7, specificity: 5"])
        prime_generation(store, "b", judge_request("q", "p", reprompt=True), ["still not parseable"])
        gateway = Gateway.replay(tmp_path)
        assert judge_scores("q", "p", gateway) is None
        assert gateway.counters.generate_calls == 2

    def test_reprompt_can_recover(self, tmp_path):
        store = ensure_meta(tmp_path, "b", "emb")
        prime_generation(store, "b", judge_request("q", "p"), ["nope"])
        prime_generation(store, "b", judge_request("q", "p", reprompt=True), ["clarity: 3, coherence: 4, specificity: 5"])
        gateway = Gateway.replay(tmp_path)
        assert judge_scores("q", "p", gateway) == (3, 4, 5)
