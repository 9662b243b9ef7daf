import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polykit.diagnosis import improvement_matrix, pairwise_delta
from polykit.errors import KeyMismatchError
from polykit.reports import fmt_delta


class TestPairwiseDelta:
    def test_pawsx_overall_delta(self):
        report = pairwise_delta({"pawsx": 85.09}, {"pawsx": 84.85})
        assert report.overall_delta == pytest.approx(0.24, abs=1e-9)
        assert fmt_delta(report.overall_delta) == "+0.24"

    def test_average_delta(self):
        report = pairwise_delta({"avg": 73.75}, {"avg": 73.00})
        assert report.overall_delta == 0.75
        assert fmt_delta(report.overall_delta) == "+0.75"

    def test_identical_maps_zero_everywhere(self):
        scores = {"en": 71.0, "de": 64.5, "zh": 58.25}
        report = pairwise_delta(scores, dict(scores))
        assert report.overall_delta == 0.0
        assert all(d == 0.0 for d in report.deltas.values())
        assert report.max_positive == 0.0
        assert report.max_negative == 0.0

    def test_extremes(self):
        report = pairwise_delta({"a": 5.0, "b": 1.0, "c": 3.0}, {"a": 1.0, "b": 4.0, "c": 3.0})
        assert report.max_positive == 4.0
        assert report.max_negative == -3.0
        assert all(d <= report.max_positive for d in report.deltas.values() if d > 0)

    def test_key_mismatch_lists_difference(self):
        with pytest.raises(KeyMismatchError) as err:
            pairwise_delta({"en": 1.0, "de": 2.0}, {"en": 1.0, "fr": 2.0})
        assert "de" in str(err.value) and "fr" in str(err.value)

    def test_family_aggregation(self):
        m1 = {"en": 72.0, "de": 70.0, "zh": 60.0, "overall": 70.0}
        m2 = {"en": 70.0, "de": 70.0, "zh": 50.0, "overall": 65.0}
        report = pairwise_delta(m1, m2)
        # en and de share IE: Germanic; "overall" is not a language key
        assert report.family_deltas["IE: Germanic"] == pytest.approx(1.0)
        assert report.family_deltas["Sino-Tibetan"] == pytest.approx(10.0)
        assert set(report.family_deltas) == {"IE: Germanic", "Sino-Tibetan"}

    @settings(max_examples=40)
    @given(
        st.dictionaries(
            st.sampled_from(["en", "de", "fr", "zh", "sw"]),
            st.floats(0, 100, allow_nan=False),
            min_size=1,
        )
    )
    def test_self_comparison_identically_zero(self, scores):
        report = pairwise_delta(scores, dict(scores))
        assert report.overall_delta == 0.0
        assert set(report.deltas.values()) <= {0.0}


class TestImprovementMatrix:
    def test_single_cell(self):
        matrix = improvement_matrix({("xnli", "en"): 60.0}, {("xnli", "en"): 62.0})
        assert matrix.datasets == ("xnli",)
        assert matrix.deltas == ((2.0,),)

    def test_zero_matrix(self):
        scores = {("xnli", "en"): 60.0, ("xquad", "zh"): 50.0}
        matrix = improvement_matrix(scores, dict(scores))
        assert all(all(d == 0.0 for d in row if d is not None) for d in matrix.deltas for row in [d])

    def test_two_by_three_elementwise(self):
        base = {}
        model = {}
        langs = ["en", "de", "zh"]
        for dataset in ("xnli", "pawsx"):
            for i, lang in enumerate(langs):
                base[(dataset, lang)] = 50.0 + i
                model[(dataset, lang)] = 55.0 + 2 * i
        matrix = improvement_matrix(base, model)
        expected = {
            (dataset, lang): model[(dataset, lang)] - base[(dataset, lang)]
            for dataset in ("xnli", "pawsx")
            for lang in langs
        }
        for (family, lang), row in zip(matrix.rows, matrix.deltas):
            for dataset, delta in zip(matrix.datasets, row):
                assert delta == pytest.approx(expected[(dataset, lang)], abs=1e-12)

    def test_rows_grouped_by_family(self):
        scores = {("d", lang): 1.0 for lang in ("zh", "en", "de", "ja")}
        matrix = improvement_matrix(scores, dict(scores))
        families = [family for family, _ in matrix.rows]
        assert families == sorted(families)
        assert ("IE: Germanic", "de") in matrix.rows
        assert matrix.rows.index(("IE: Germanic", "de")) < matrix.rows.index(
            ("IE: Germanic", "en")
        )

    def test_ragged_coverage_uses_none(self):
        base = {("a", "en"): 1.0, ("b", "zh"): 2.0}
        matrix = improvement_matrix(base, {("a", "en"): 2.0, ("b", "zh"): 2.5})
        flat = {
            (dataset, lang): delta
            for (family, lang), row in zip(matrix.rows, matrix.deltas)
            for dataset, delta in zip(matrix.datasets, row)
        }
        assert flat[("a", "en")] == 1.0
        assert flat[("b", "en")] is None
        assert flat[("b", "zh")] == 0.5

    def test_key_mismatch(self):
        with pytest.raises(KeyMismatchError):
            improvement_matrix({("a", "en"): 1.0}, {("a", "de"): 1.0})
