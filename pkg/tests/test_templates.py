import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polykit.errors import (
    DataError,
    MissingTemplateError,
    TemplateParseError,
    ValidationError,
)
from polykit.templates import (
    ANSWER_PLACEHOLDERS,
    ENCODER_PLACEHOLDERS,
    bundled_registry_path,
    load_registry,
    make_template,
    parse_segments,
    parse_uniformity,
    print_segments,
    select_templates,
)

XQUAD_1 = "Answer the question based on the paragraph. | Question: [Q] | Paragraph: [C]"


@pytest.fixture(scope="module")
def registry():
    return load_registry(bundled_registry_path())


class TestParse:
    def test_qa_template_segments(self):
        segments = parse_segments(XQUAD_1, ENCODER_PLACEHOLDERS)
        kinds = [(s.kind, s.value) for s in segments]
        assert kinds == [
            ("literal", "Answer the question based on the paragraph. | Question: "),
            ("placeholder", "Q"),
            ("literal", " | Paragraph: "),
            ("placeholder", "C"),
        ]

    def test_literal_only(self):
        segments = parse_segments("hello", ENCODER_PLACEHOLDERS)
        assert [(s.kind, s.value) for s in segments] == [("literal", "hello")]

    def test_xnli_diversified_placeholders(self):
        source = "Given that [T1] Therefore, it must be true that [T2]? Yes, no, or maybe?"
        names = [s.value for s in parse_segments(source, ENCODER_PLACEHOLDERS)
                 if s.kind == "placeholder"]
        assert names == ["T1", "T2"]

    def test_pipe_is_ordinary_text(self):
        segments = parse_segments("a | b ｜ c", ENCODER_PLACEHOLDERS)
        assert len(segments) == 1 and segments[0].value == "a | b ｜ c"

    def test_unknown_placeholder_reports_byte_offset(self):
        with pytest.raises(TemplateParseError) as err:
            parse_segments("abc [X] def", ENCODER_PLACEHOLDERS)
        assert err.value.byte_offset == 4

    def test_byte_offset_counts_utf8_bytes(self):
        with pytest.raises(TemplateParseError) as err:
            parse_segments("日本 [X]", ENCODER_PLACEHOLDERS)
        assert err.value.byte_offset == 7  # two 3-byte chars plus a space

    def test_unterminated_placeholder(self):
        with pytest.raises(TemplateParseError, match="unterminated"):
            parse_segments("tail [Q", ENCODER_PLACEHOLDERS)

    def test_bracket_not_opening_placeholder_is_literal(self):
        for source in ("a [ b", "[lower]", "[Q and more", "[", "x[]y"):
            printed = print_segments(parse_segments(source, ENCODER_PLACEHOLDERS))
            assert printed == source

    def test_answer_vocabulary(self):
        segments = parse_segments("[LABEL]", ANSWER_PLACEHOLDERS)
        assert segments[0].value == "LABEL"
        with pytest.raises(TemplateParseError):
            parse_segments("[Q]", ANSWER_PLACEHOLDERS)

    @settings(max_examples=80)
    @given(
        st.lists(
            st.one_of(
                st.sampled_from(["[Q]", "[C]", "[T1]", "[T2]"]),
                st.text(alphabet="ab |｜?.:", min_size=1, max_size=8),
            ),
            min_size=0,
            max_size=8,
        )
    )
    def test_round_trip_on_generated_sources(self, parts):
        source = "".join(parts)
        printed = print_segments(parse_segments(source, ENCODER_PLACEHOLDERS))
        assert printed == source


class TestRegistry:
    def test_bundled_registry_size(self, registry):
        assert len(registry) == 43

    def test_round_trip_every_bundled_template(self, registry):
        raw = {
            json.loads(line)["id"]: json.loads(line)
            for line in bundled_registry_path().read_text("utf-8").splitlines()
            if line.strip()
        }
        for template in registry:
            assert template.source == raw[template.id]["text"]
            assert template.answer_source == raw[template.id]["answer_text"]

    def test_unified_set_shares_co_occurring_words(self, registry):
        unified_en = [t for t in registry if t.uniformity == "unified" and t.template_lang == "en"]
        assert len(unified_en) == 7
        for template in unified_en:
            assert "Answer the question based on" in template.source

    def test_duplicate_id_rejected(self, tmp_path):
        line = json.dumps({
            "id": "t", "dataset": "d", "lang": "en", "uniformity": "unified",
            "group": 0, "text": "x", "answer_text": "[A]", "verbalizer": None,
        })
        path = tmp_path / "reg.jsonl"
        path.write_text(line + "\n" + line + "\n", encoding="utf-8")
        with pytest.raises(DataError, match="duplicate"):
            load_registry(path)

    def test_colliding_verbalizer_rejected(self):
        with pytest.raises(ValidationError, match="collide"):
            make_template(
                id="t", dataset="d", lang="en", text="[T1]", answer_text="[LABEL]",
                verbalizer=[["pos", "Yes!"], ["neg", "yes"]],
            )

    def test_label_requires_verbalizer(self):
        with pytest.raises(ValidationError):
            make_template(id="t", dataset="d", lang="en", text="[T1]",
                          answer_text="[LABEL]")

    def test_placeholder_legality(self, registry):
        xnli = next(t for t in registry if t.id == "xnli-en-unified")
        xnli.validate_for_task("sentence_pair")
        with pytest.raises(ValidationError):
            xnli.validate_for_task("qa_extractive")


class TestSelect:
    def test_cross_policy_is_english_regardless_of_eval_lang(self, registry):
        selection = select_templates(registry, "unified", "cross", "zh")
        assert all(t.template_lang == "en" for t in selection.values())
        assert set(selection) == {"marc", "mldoc", "mlqa", "pawsx", "tydiqa", "xnli", "xquad"}

    def test_in_policy_picks_evaluated_language(self, registry):
        selection = select_templates(registry, "unified", "in", "zh", datasets=["tydiqa"])
        template = selection["tydiqa"]
        assert template.template_lang == "zh"
        assert template.source.startswith("根据段落的内容回答问题。")

    def test_diversified_group_selection(self, registry):
        selection = select_templates(registry, "diversified-v4", "cross", "de",
                                     datasets=["xquad"])
        assert selection["xquad"].source.startswith("I have always wondered:")

    def test_missing_template_names_tuple(self, registry):
        with pytest.raises(MissingTemplateError) as err:
            select_templates(registry, "unified", "in", "sw", datasets=["xnli"])
        message = str(err.value)
        assert "xnli" in message and "sw" in message and "unified" in message

    def test_parse_uniformity(self):
        assert parse_uniformity("unified") == ("unified", 0)
        assert parse_uniformity("diversified-v3") == ("diversified", 3)
        with pytest.raises(ValidationError):
            parse_uniformity("diversified-vx")
        with pytest.raises(ValidationError):
            parse_uniformity("mixed")
