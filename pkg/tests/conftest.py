import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from polykit.ingest import DatasetDescriptor, read_samples
from polykit.tasks import Sample

FIXTURES = Path(__file__).parent.parent / "src" / "polykit" / "data" / "fixtures"

FIXTURE_DATASETS = [
    ("xquad", "qa_extractive"),
    ("tydiqa", "qa_extractive"),
    ("mlqa", "qa_extractive"),
    ("xnli", "sentence_pair"),
    ("pawsx", "sentence_pair"),
    ("marc", "sentiment_cls"),
    ("mldoc", "topic_cls"),
]


def fixture_descriptor(name: str, task: str) -> DatasetDescriptor:
    path = str(FIXTURES / f"{name}.jsonl")
    return DatasetDescriptor(
        name=name,
        task=task,
        role="target",
        languages=("en",),
        split_paths={"train": path, "dev": path, "test": path},
    )


@pytest.fixture(scope="session")
def fixture_samples() -> list[Sample]:
    samples = []
    for name, task in FIXTURE_DATASETS:
        samples.extend(read_samples(FIXTURES / f"{name}.jsonl", fixture_descriptor(name, task)))
    return samples


def qa_sample(sid="q1", lang="en", dataset="xquad", question="Who wrote it?",
              context="Ann wrote it.", golds=("Ann",)):
    return Sample(
        id=sid, language=lang, dataset=dataset, task="qa_extractive",
        fields={"question": question, "context": context}, golds=tuple(golds),
    )


def cls_sample(sid="c1", lang="en", dataset="marc", task="sentiment_cls",
               text="Great kettle.", label="positive", extra_fields=None):
    fields = {"t1": text}
    if extra_fields:
        fields.update(extra_fields)
    return Sample(id=sid, language=lang, dataset=dataset, task=task,
                  fields=fields, golds=(label,))


def pair_sample(sid="p1", lang="en", dataset="xnli", t1="A cat sat.",
                t2="A cat was sitting.", label="entailment"):
    return Sample(id=sid, language=lang, dataset=dataset, task="sentence_pair",
                  fields={"t1": t1, "t2": t2}, golds=(label,))


_ACCEPTANCE_RESULTS: dict[str, str] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and item.module.__name__ == "test_acceptance":
        _ACCEPTANCE_RESULTS[item.name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, verdict in sorted(_ACCEPTANCE_RESULTS.items()):
        terminalreporter.write_line(f"{verdict}  {name}")
