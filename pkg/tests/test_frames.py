from fractions import Fraction

import pytest

from kbqa.frames import (
    DictionaryParseError,
    FrameParseError,
    KnowledgeBase,
    SITUATION_CONDITION,
    SUBJECT_ATTRIBUTE,
    SUBJECT_EVENT,
    VerbDictionary,
)


class TestVerbDictionary:
    def test_lookup_both_forms_case_insensitive(self, verbs):
        assert verbs.lookup("shoot").past == "shot"
        assert verbs.lookup("Shot").lemma == "shoot"
        assert verbs.lookup("walked").lemma == "walk"
        assert verbs.lookup("qux") is None

    def test_state_producing_verbs(self, verbs):
        lemmas = {e.lemma for e in verbs.state_producing_verbs("dead")}
        assert lemmas == {"shoot", "kill", "strangle", "die"}

    def test_applies_to_direction(self, verbs):
        assert verbs.lookup("shoot").applies_to == "object"
        assert verbs.lookup("die").applies_to == "subject"
        assert verbs.lookup("buy").result_state is None

    def test_field_count_checked(self):
        with pytest.raises(DictionaryParseError):
            VerbDictionary.from_text("shoot|shot|dead\n")

    def test_result_state_and_applies_to_come_together(self):
        with pytest.raises(DictionaryParseError):
            VerbDictionary.from_text("shoot|shot|dead|\n")
        with pytest.raises(DictionaryParseError):
            VerbDictionary.from_text("shoot|shot||object\n")

    def test_applies_to_values_checked(self):
        with pytest.raises(DictionaryParseError):
            VerbDictionary.from_text("shoot|shot|dead|victim\n")


class TestFrameParsing:
    def test_action_frame_shape(self, kb):
        frame = kb.get_action_frame("shoot")
        assert frame.verb == "shoot"
        assert [m.cause for m in frame.motives] == ["robbing", "revenge"]
        assert frame.motives[0].condition.kind == SUBJECT_ATTRIBUTE
        assert frame.motives[0].condition.pattern == "subject is criminal"
        assert frame.motives[1].condition.kind == SUBJECT_EVENT
        assert [w.tool for w in frame.ways] == ["pistol", "gun"]
        assert frame.tool_keys() == {"pistol", "gun"}

    def test_action_frame_found_by_past_form(self, kb):
        assert kb.get_action_frame("shot") is kb.get_action_frame("shoot")

    def test_operation_frame_shape(self, kb):
        op = kb.get_operation_frame("rob office")
        assert op.planned_action == "rob"
        assert len(op.alternatives) == 1
        stages = op.alternatives[0].stages
        assert len(stages) == 5
        assert stages[0].action_text == "to go to office"
        assert stages[0].way is None and stages[0].condition is None
        assert stages[1].action_text == "to come in"
        assert stages[1].way == "through window"
        assert stages[1].condition.kind == SITUATION_CONDITION
        assert stages[1].condition.pattern == "signalling does not work"
        assert stages[2].way == "with tool"
        assert stages[4].way == "through window"

    def test_operation_lookup_ignores_articles(self, kb):
        assert kb.get_operation_frame("rob the office") is not None

    def test_script_frame_shape(self, kb):
        (script,) = kb.list_scripts()
        assert script.name == "distress"
        assert script.trigger == "ship has distress"
        assert [c.modality for c in script.consequences] == ["does", "can", "may"]
        assert script.consequences[2].phrase == "die from lack of water and food"

    def test_disease_frames(self, kb):
        names = [d.name for d in kb.list_diseases()]
        assert names == ["influenza", "cold"]
        assert kb.list_diseases()[0].symptoms == (
            "high temperature",
            "cough",
            "headache",
        )

    def test_body_line_before_header_fails(self, verbs):
        base = KnowledgeBase(verbs)
        with pytest.raises(FrameParseError) as err:
            base.load_frames("by pistol\nframe is shoot\n")
        assert err.value.line_no == 1

    def test_unclassifiable_body_fails(self, verbs):
        base = KnowledgeBase(verbs)
        with pytest.raises(FrameParseError):
            base.load_frames("frame is mystery\nsome free text line\n")

    def test_duplicate_frame_replaces_in_place(self, kb):
        order_before = [op.name for op in kb.list_operation_frames()]
        kb.load_frames(
            "frame is another job\nalternative 1; to wait\n"
            "frame is rob office\nalternative 1; to knock\n"
        )
        ops = kb.list_operation_frames()
        assert [op.name for op in ops] == order_before + ["another job"]
        assert ops[0].alternatives[0].stages[0].action_text == "to knock"

    def test_condition_classification_of_subject_event(self):
        from kbqa.frames import Condition

        assert Condition.classify("insult of subject").kind == SUBJECT_EVENT
        assert Condition.classify("subject has pistol").kind == SUBJECT_ATTRIBUTE
        assert Condition.classify("signalling does not work").kind == SITUATION_CONDITION


class TestSerialization:
    def test_serialize_is_a_fixed_point(self, kb, verbs):
        text = kb.serialize()
        again = KnowledgeBase(verbs)
        again.load_frames(text)
        assert again.serialize() == text

    def test_serialized_text_reloads_equivalently(self, kb, verbs):
        again = KnowledgeBase(verbs)
        again.load_frames(kb.serialize())
        assert again.get_operation_frame("rob office") == kb.get_operation_frame("rob office")
        assert again.get_action_frame("shoot") == kb.get_action_frame("shoot")
        assert again.list_scripts() == kb.list_scripts()
        assert again.list_diseases() == kb.list_diseases()


class TestDiseaseMatching:
    def test_fractions_are_exact(self, kb):
        scored = kb.match_diseases(["high temperature", "cough"])
        assert scored[0] == ("influenza", Fraction(2, 3))
        assert scored[1] == ("cold", Fraction(1, 3))

    def test_containment_matches_both_directions(self, kb):
        # Observation wordier than the symptom, and the other way round.
        scored = kb.match_diseases(["the high temperature", "slight cough"])
        assert scored[0] == ("influenza", Fraction(2, 3))

    def test_no_observation_raises(self, kb):
        with pytest.raises(ValueError):
            kb.match_diseases([])
        with pytest.raises(ValueError):
            kb.match_diseases(["  "])

    def test_unrelated_observations_score_nothing(self, kb):
        assert kb.match_diseases(["ship"]) == []

    def test_tie_breaks_by_name(self, verbs):
        base = KnowledgeBase(verbs)
        base.load_frames(
            "frame is beta\nthere is cough\n\nframe is alpha\nthere is cough\n"
        )
        scored = base.match_diseases(["cough"])
        assert [name for name, _ in scored] == ["alpha", "beta"]


class TestEntryResolution:
    @pytest.mark.parametrize(
        "ref",
        [
            "verb:shoot",
            "action:shoot",
            "action:shoot/motive:robbing",
            "action:shoot/way:pistol",
            "operation:rob office",
            "operation:rob office/alternative:1",
            "operation:rob office/alternative:1/stage:2",
            "script:distress",
            "disease:influenza",
        ],
    )
    def test_valid_references_resolve(self, kb, ref):
        assert kb.resolve_entry(ref)

    @pytest.mark.parametrize(
        "ref",
        [
            "verb:qux",
            "action:fly",
            "action:shoot/motive:greed",
            "action:shoot/way:rope",
            "operation:rob bank",
            "operation:rob office/alternative:2",
            "operation:rob office/alternative:1/stage:9",
            "script:party",
            "disease:gout",
            "nonsense",
            "action:",
        ],
    )
    def test_bad_references_do_not_resolve(self, kb, ref):
        assert not kb.resolve_entry(ref)
