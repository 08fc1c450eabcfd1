import json
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qapkit import (
    AnswerAnnotation,
    AnswerType,
    Feature,
    QAPair,
    QuestionAnnotation,
    QuestionType,
    Utterance,
    ViolationKind,
    allowed_answer_types,
    feature_applicable,
    pair_annotations,
    validate_annotations,
    validate_corpus,
)


def q(turn=0, span=(0, 5), q_type=QuestionType.YN, feature=None, annotator="A1", dialogue="d"):
    return QuestionAnnotation(dialogue, turn, span, q_type, feature, annotator)


def a(turn=1, a_type=AnswerType.PA, ref="d:0:0-5", annotator="A1", dialogue="d"):
    return AnswerAnnotation(dialogue, turn, a_type, ref, annotator)


class TestTagsets:
    def test_closed_sets(self):
        assert {t.value for t in QuestionType} == {"YN", "WH", "CS", "DQ", "PQ"}
        assert {t.value for t in Feature} == {"TMP", "LOC", "AG", "CH", "OW", "RE", "TH"}
        assert {t.value for t in AnswerType} == {"PA", "NA", "FA", "PHA", "UA", "UT", "DA"}

    def test_str_is_bare_value(self):
        assert str(QuestionType.YN) == "YN"
        assert f"{Feature.LOC}" == "LOC"
        assert str(AnswerType.PHA) == "PHA"

    def test_enums_serialize_as_plain_strings(self):
        assert json.dumps({"q": QuestionType.WH, "a": AnswerType.FA}) == '{"q": "WH", "a": "FA"}'


class TestCompatibility:
    def test_polar_questions_take_polar_answers(self):
        for q_type in (QuestionType.YN, QuestionType.CS):
            assert AnswerType.PA in allowed_answer_types(q_type)
            assert AnswerType.NA in allowed_answer_types(q_type)
            assert AnswerType.FA not in allowed_answer_types(q_type)

    def test_constituent_questions_take_feature_answers(self):
        for q_type in (QuestionType.WH, QuestionType.DQ):
            assert AnswerType.FA in allowed_answer_types(q_type)
            assert AnswerType.PA not in allowed_answer_types(q_type)
            assert AnswerType.NA not in allowed_answer_types(q_type)

    def test_phatic_questions_take_only_universal_answers(self):
        assert allowed_answer_types(QuestionType.PQ) == frozenset(
            {AnswerType.PHA, AnswerType.UA, AnswerType.UT, AnswerType.DA}
        )

    def test_universal_answers_fit_everywhere(self):
        for q_type in QuestionType:
            for a_type in (AnswerType.PHA, AnswerType.UA, AnswerType.UT, AnswerType.DA):
                assert a_type in allowed_answer_types(q_type)

    def test_feature_applicability(self):
        assert feature_applicable(QuestionType.WH)
        assert feature_applicable(QuestionType.DQ)
        for q_type in (QuestionType.YN, QuestionType.CS, QuestionType.PQ):
            assert not feature_applicable(q_type)


class TestRecords:
    def test_utterance_rejects_blank_text(self):
        with pytest.raises(ValueError):
            Utterance("d", 0, "A", "   ")

    def test_utterance_rejects_negative_turn(self):
        with pytest.raises(ValueError):
            Utterance("d", -1, "A", "hi")

    def test_utterance_rejects_empty_dialogue_id(self):
        with pytest.raises(ValueError):
            Utterance("", 0, "A", "hi")

    def test_question_span_must_be_ordered(self):
        with pytest.raises(ValueError):
            q(span=(5, 2))
        with pytest.raises(ValueError):
            q(span=(-1, 2))

    def test_ref_format(self):
        ann = q(turn=747, span=(0, 6), dialogue="amy")
        assert ann.ref == "amy:747:0-6"


class TestValidateAnnotations:
    def test_legal_pair_is_clean(self):
        pair = QAPair(q(q_type=QuestionType.YN), a(a_type=AnswerType.PA))
        assert validate_annotations([pair]) == []

    def test_feature_answer_to_polar_question(self):
        pair = QAPair(q(q_type=QuestionType.YN), a(a_type=AnswerType.FA))
        (violation,) = validate_annotations([pair])
        assert violation.kind is ViolationKind.ILLEGAL_ANSWER_FOR_QUESTION
        assert violation.item == "d:0:0-5"

    def test_feature_on_non_bearing_type(self):
        pair = QAPair(q(q_type=QuestionType.PQ, feature=Feature.LOC))
        (violation,) = validate_annotations([pair])
        assert violation.kind is ViolationKind.FEATURE_NOT_APPLICABLE

    def test_feature_on_wh_is_fine(self):
        pair = QAPair(q(q_type=QuestionType.WH, feature=Feature.LOC))
        assert validate_annotations([pair]) == []

    def test_mismatched_pair_reference(self):
        pair = QAPair(q(), a(ref="d:9:0-5"))
        kinds = {v.kind for v in validate_annotations([pair])}
        assert ViolationKind.DANGLING_REFERENCE in kinds

    def test_unanswered_question_is_clean(self):
        assert validate_annotations([QAPair(q())]) == []

    @given(
        st.permutations(
            [
                QAPair(q(q_type=QuestionType.YN), a(a_type=AnswerType.FA)),
                QAPair(q(turn=2, span=(0, 3), q_type=QuestionType.PQ, feature=Feature.AG)),
                QAPair(q(turn=4, span=(1, 7), q_type=QuestionType.WH), a(ref="d:4:1-7", a_type=AnswerType.FA)),
                QAPair(q(turn=6, span=(0, 2), q_type=QuestionType.CS), a(ref="d:6:0-2", a_type=AnswerType.NA)),
            ]
        )
    )
    def test_violations_do_not_depend_on_order(self, pairs):
        found = Counter((v.kind, v.item) for v in validate_annotations(pairs))
        assert found == Counter(
            {
                (ViolationKind.ILLEGAL_ANSWER_FOR_QUESTION, "d:0:0-5"): 1,
                (ViolationKind.FEATURE_NOT_APPLICABLE, "d:2:0-3"): 1,
            }
        )


class TestPairing:
    def test_answers_attach_by_reference(self):
        question = q()
        answer = a(ref=question.ref)
        pairs, dangling = pair_annotations([question], [answer])
        assert pairs == [QAPair(question, answer)]
        assert dangling == []

    def test_unmatched_answer_dangles(self):
        pairs, dangling = pair_annotations([q()], [a(ref="d:99:0-5")])
        assert pairs == [QAPair(q())]
        assert len(dangling) == 1

    def test_pairing_is_scoped_per_annotator(self):
        question = q(annotator="A1")
        foreign = a(ref=question.ref, annotator="A2")
        pairs, dangling = pair_annotations([question], [foreign])
        assert pairs == [QAPair(question)]
        assert dangling == [foreign]

    def test_several_answers_one_question(self):
        question = q()
        first = a(turn=1, ref=question.ref)
        second = a(turn=2, ref=question.ref, a_type=AnswerType.UA)
        pairs, _ = pair_annotations([question], [first, second])
        assert [p.answer for p in pairs] == [first, second]

    def test_duplicate_question_records_collapse(self):
        question = q()
        pairs, _ = pair_annotations([question, question], [a(ref=question.ref)])
        assert len(pairs) == 1

    def test_validate_corpus_reports_dangling(self):
        violations = validate_corpus([q()], [a(ref="nowhere:0:0-1")])
        (violation,) = violations
        assert violation.kind is ViolationKind.DANGLING_REFERENCE
        assert "nowhere:0:0-1" in violation.message
