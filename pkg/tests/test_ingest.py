import json
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polykit.errors import SchemaError, ValidationError
from polykit.ingest import (
    DatasetDescriptor,
    SamplingPolicy,
    read_samples,
    subsample,
    write_samples,
)
from polykit.tasks import TASK_KINDS, Sample

from conftest import qa_sample

QA_DESC = DatasetDescriptor(
    name="xquad", task="qa_extractive", role="expanding",
    split_paths={"train": "unused"},
)


def qa_record(sid, question="Who?", context="Ann did.", golds=("Ann",), lang="en"):
    return {
        "id": sid, "lang": lang, "dataset": "xquad", "task": "qa_extractive",
        "fields": {"question": question, "context": context}, "golds": list(golds),
    }


def write_lines(path, records):
    path.write_text("\n".join(json.dumps(r, ensure_ascii=False) for r in records) + "\n",
                    encoding="utf-8")


class TestTaskKinds:
    def test_metric_assignment(self):
        assert TASK_KINDS["qa_extractive"].metric == "f1_em"
        for kind in ("sentence_pair", "topic_cls", "sentiment_cls"):
            assert TASK_KINDS[kind].metric == "accuracy"
        assert TASK_KINDS["ner"].metric == "none"
        assert TASK_KINDS["summarization"].metric == "none"

    def test_required_fields(self):
        assert set(TASK_KINDS["qa_extractive"].required_fields) == {"question", "context", "answers"}
        assert set(TASK_KINDS["sentence_pair"].required_fields) == {"t1", "t2", "label"}
        assert set(TASK_KINDS["topic_cls"].required_fields) == {"t1", "label"}


class TestReadSamples:
    def test_well_formed_file_preserves_order(self, tmp_path):
        path = tmp_path / "qa.jsonl"
        write_lines(path, [qa_record("q1"), qa_record("q2"), qa_record("q3")])
        samples = read_samples(path, QA_DESC)
        assert [s.id for s in samples] == ["q1", "q2", "q3"]

    def test_missing_context_reports_line(self, tmp_path):
        path = tmp_path / "qa.jsonl"
        bad = qa_record("q2")
        del bad["fields"]["context"]
        write_lines(path, [qa_record("q1"), bad])
        with pytest.raises(SchemaError) as err:
            read_samples(path, QA_DESC)
        assert "context" in str(err.value) and "line 2" in str(err.value)

    def test_duplicate_id(self, tmp_path):
        path = tmp_path / "qa.jsonl"
        write_lines(path, [qa_record("q1"), qa_record("q1")])
        with pytest.raises(SchemaError, match="duplicate"):
            read_samples(path, QA_DESC)

    def test_unanswerable_qa_rejected(self, tmp_path):
        path = tmp_path / "qa.jsonl"
        write_lines(path, [qa_record("q1", golds=())])
        with pytest.raises(SchemaError):
            read_samples(path, QA_DESC)
        write_lines(path, [qa_record("q1", golds=("",))])
        with pytest.raises(SchemaError):
            read_samples(path, QA_DESC)

    def test_bom_rejected(self, tmp_path):
        path = tmp_path / "qa.jsonl"
        path.write_bytes(b"\xef\xbb\xbf" + json.dumps(qa_record("q1")).encode() + b"\n")
        with pytest.raises(SchemaError, match="byte order mark"):
            read_samples(path, QA_DESC)

    def test_crlf_rejected(self, tmp_path):
        path = tmp_path / "qa.jsonl"
        path.write_bytes(json.dumps(qa_record("q1")).encode() + b"\r\n")
        with pytest.raises(SchemaError, match="LF"):
            read_samples(path, QA_DESC)

    def test_parse_error_carries_line_number(self, tmp_path):
        path = tmp_path / "qa.jsonl"
        path.write_text(json.dumps(qa_record("q1")) + "\n{oops\n", encoding="utf-8")
        with pytest.raises(SchemaError, match="line 2"):
            read_samples(path, QA_DESC)

    def test_unknown_top_level_key(self, tmp_path):
        path = tmp_path / "qa.jsonl"
        rec = qa_record("q1")
        rec["surprise"] = 1
        write_lines(path, [rec])
        with pytest.raises(SchemaError, match="unknown keys"):
            read_samples(path, QA_DESC)

    def test_np_language_normalized(self, tmp_path):
        path = tmp_path / "qa.jsonl"
        write_lines(path, [qa_record("q1", lang="np")])
        assert read_samples(path, QA_DESC)[0].language == "ne"

    def test_dataset_mismatch(self, tmp_path):
        path = tmp_path / "qa.jsonl"
        rec = qa_record("q1")
        rec["dataset"] = "other"
        write_lines(path, [rec])
        with pytest.raises(SchemaError, match="does not match"):
            read_samples(path, QA_DESC)

    def test_summarization_golds_derived_from_summary(self, tmp_path):
        desc = DatasetDescriptor(name="sums", task="summarization", role="expanding",
                                 split_paths={"train": "unused"})
        path = tmp_path / "sums.jsonl"
        write_lines(path, [{
            "id": "s1", "lang": "en", "dataset": "sums", "task": "summarization",
            "fields": {"document": "A long report about tides.", "summary": "Tides."},
            "golds": [],
        }])
        assert read_samples(path, desc)[0].golds == ("Tides.",)


class TestRoundTrip:
    def test_write_read_write_is_byte_identical(self, tmp_path):
        path_a = tmp_path / "a.jsonl"
        path_b = tmp_path / "b.jsonl"
        samples = [qa_sample(sid=f"q{i}", question=f"Q {i}?", golds=("Ann", "ann"))
                   for i in range(5)]
        write_samples(samples, path_a)
        again = read_samples(path_a, QA_DESC)
        assert again == samples
        write_samples(again, path_b)
        assert path_a.read_bytes() == path_b.read_bytes()


def make_population(languages, per_language):
    samples = []
    for lang in languages:
        for i in range(per_language):
            samples.append(qa_sample(sid=f"{lang}-{i:05d}", lang=lang))
    return samples


class TestSubsample:
    def test_n_equals_population(self):
        samples = make_population(["en"], 10)
        picked = subsample(samples, SamplingPolicy(per_language_n=10, seed=1))
        assert sorted(s.id for s in picked) == sorted(s.id for s in samples)

    def test_same_seed_same_selection(self):
        samples = make_population(["en"], 10)
        policy = SamplingPolicy(per_language_n=3, seed=7)
        assert subsample(samples, policy) == subsample(samples, policy)

    def test_different_seed_differs(self):
        samples = make_population(["en"], 200)
        a = subsample(samples, SamplingPolicy(per_language_n=5, seed=1))
        b = subsample(samples, SamplingPolicy(per_language_n=5, seed=2))
        assert a != b

    def test_per_language_tally(self):
        # brute-force count over a 6-language population
        samples = make_population(["en", "de", "zh", "ar", "ru", "sw"], 5000)
        picked = subsample(samples, SamplingPolicy(per_language_n=3000, seed=11))
        counts = Counter(s.language for s in picked)
        assert len(picked) == 18000
        assert set(counts.values()) == {3000}

    def test_output_sorted_by_language_then_id(self):
        samples = make_population(["zh", "en"], 50)
        picked = subsample(samples, SamplingPolicy(per_language_n=10, seed=3))
        assert [(s.language, s.id) for s in picked] == sorted(
            (s.language, s.id) for s in picked
        )

    def test_idempotent(self):
        samples = make_population(["en", "zh"], 40)
        policy = SamplingPolicy(per_language_n=15, seed=5)
        once = subsample(samples, policy)
        assert subsample(once, policy) == once

    def test_policy_validation(self):
        with pytest.raises(ValidationError):
            SamplingPolicy(per_language_n=0, seed=1)

    @settings(max_examples=30, deadline=None)
    @given(
        sizes=st.dictionaries(
            st.sampled_from(["en", "de", "zh", "ja"]), st.integers(0, 25),
            min_size=1, max_size=4,
        ),
        n=st.integers(1, 12),
        seed=st.integers(0, 2**64 - 1),
    )
    def test_counts_never_exceed_limit(self, sizes, n, seed):
        samples = []
        for lang, count in sizes.items():
            samples.extend(make_population([lang], count))
        picked = subsample(samples, SamplingPolicy(per_language_n=n, seed=seed))
        counts = Counter(s.language for s in picked)
        for lang, count in sizes.items():
            assert counts.get(lang, 0) == min(n, count)
        assert subsample(picked, SamplingPolicy(per_language_n=n, seed=seed)) == picked


class TestDescriptor:
    def test_target_requires_all_splits(self):
        with pytest.raises(ValidationError, match="missing"):
            DatasetDescriptor(name="d", task="qa_extractive", role="target",
                              split_paths={"train": "x"})

    def test_expanding_may_omit_dev_test(self):
        DatasetDescriptor(name="d", task="qa_extractive", role="expanding",
                          split_paths={"train": "x"})

    def test_bad_role(self):
        with pytest.raises(ValidationError):
            DatasetDescriptor(name="d", task="qa_extractive", role="weird",
                              split_paths={"train": "x"})
