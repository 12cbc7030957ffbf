"""Narrative generation, ordering, chunk assignment, summaries, title cards."""

import json

import pytest

from clipweaver.errors import AssignmentError, NarrativeError, ProviderError, SchemaError
from clipweaver.gateway.fake import FakeProvider
from clipweaver.intervals import Interval
from clipweaver.narrative import (
    Narrative,
    NarrativeChunk,
    assign_chunks,
    describe_segments,
    generate_narrative,
    generate_title_card,
    order_segments,
    parse_narrative,
    summarize_segments,
)
from clipweaver.segments import Segment
from clipweaver.text import word_count

from conftest import make_gateway, make_store
from violation_fixtures import ASSIGNMENT_VIOLATIONS, ORDER_VIOLATIONS

STORE = make_store([
    (0.0, "intro", "welcome"),
    (12.0, "battery shot", "battery talk one"),
    (15.0, "battery chart", "battery talk two"),
    (42.0, "camera shot", "camera talk"),
], duration=60.0)

SEG_A = Interval(10.0, 20.0)
SEG_B = Interval(40.0, 50.0)

TWO_CHUNKS = Narrative(
    overall="Alpha part. Beta part.",
    chunks=(NarrativeChunk(1, "Alpha part."), NarrativeChunk(2, "Beta part.")),
)


def segs() -> list[Segment]:
    return [
        Segment(SEG_A, True, title="Battery", summary="About the battery"),
        Segment(SEG_B, True, title="Camera", summary="About the camera"),
    ]


def valid_narrative_json() -> str:
    return json.dumps({
        "overall_narrative": "Alpha part. Beta part.",
        "chunks": [
            {"chunk_id": 1, "narrative": "Alpha part."},
            {"chunk_id": 2, "narrative": "Beta part."},
        ],
    })


class TestDescribeSegments:
    def test_layout_and_verbatim_bounds(self):
        text = describe_segments(segs(), STORE)
        lines = text.splitlines()
        assert lines[0].startswith("Segment 1 [start=10.0, end=20.0] | title: Battery")
        assert "frames: battery shot / battery chart" in lines[0]
        assert lines[1].startswith("Segment 2 [start=40.0, end=50.0]")


class TestParseNarrative:
    def test_valid_two_chunks(self):
        narrative = parse_narrative(valid_narrative_json())
        assert [c.chunk_id for c in narrative.chunks] == [1, 2]
        assert narrative.overall == "Alpha part. Beta part."

    def test_non_consecutive_ids_schema_error(self):
        raw = json.dumps({
            "overall_narrative": "A. B.",
            "chunks": [
                {"chunk_id": 1, "narrative": "A."},
                {"chunk_id": 3, "narrative": "B."},
            ],
        })
        with pytest.raises(SchemaError, match=r"\[1, 3\]"):
            parse_narrative(raw)

    def test_chunks_must_reassemble_overall(self):
        raw = json.dumps({
            "overall_narrative": "A. B. C.",
            "chunks": [{"chunk_id": 1, "narrative": "A. B."}],
        })
        with pytest.raises(NarrativeError, match="reassemble"):
            parse_narrative(raw)

    def test_word_limit(self):
        overall = " ".join(["word"] * 400)
        raw = json.dumps({
            "overall_narrative": overall,
            "chunks": [{"chunk_id": 1, "narrative": overall}],
        })
        with pytest.raises(NarrativeError, match="400 words"):
            parse_narrative(raw)

    def test_markdown_fence_tolerated(self):
        raw = "```json\n" + valid_narrative_json() + "\n```"
        assert parse_narrative(raw).overall == "Alpha part. Beta part."


class TestGenerateNarrative:
    def test_valid_after_one_reprompt(self):
        gateway = make_gateway(FakeProvider(script={
            "narrative": ["not json at all", valid_narrative_json()]
        }))
        narrative = generate_narrative(segs(), "battery", STORE, gateway)
        assert len(narrative.chunks) == 2

    def test_overlong_twice_is_narrative_error(self):
        overall = " ".join(["word"] * 400)
        raw = json.dumps({
            "overall_narrative": overall,
            "chunks": [{"chunk_id": 1, "narrative": overall}],
        })
        gateway = make_gateway(FakeProvider(script={"narrative": raw}))
        with pytest.raises(NarrativeError):
            generate_narrative(segs(), "battery", STORE, gateway)

    def test_requires_relevant_segments(self):
        gateway = make_gateway(FakeProvider(rules=True))
        with pytest.raises(ValueError):
            generate_narrative([], "battery", STORE, gateway)

    def test_rule_fake_produces_valid_narrative(self):
        gateway = make_gateway(FakeProvider(rules=True))
        narrative = generate_narrative(segs(), "battery", STORE, gateway)
        assert word_count(narrative.overall) <= 300
        assert [c.chunk_id for c in narrative.chunks] == list(
            range(1, len(narrative.chunks) + 1)
        )


class TestOrderSegments:
    def test_identity_order(self):
        gateway = make_gateway(FakeProvider(rules=True))
        order = order_segments(TWO_CHUNKS, segs(), STORE, gateway)
        assert order.intervals_in_order() == [SEG_A, SEG_B]

    def test_reversed_order_accepted(self):
        raw = json.dumps({"segments": [
            {"start": 10.0, "end": 20.0, "playback_order": 2},
            {"start": 40.0, "end": 50.0, "playback_order": 1},
        ]})
        gateway = make_gateway(FakeProvider(script={"playback_order": raw}))
        order = order_segments(TWO_CHUNKS, segs(), STORE, gateway)
        assert order.intervals_in_order() == [SEG_B, SEG_A]

    @pytest.mark.parametrize("name,raw", ORDER_VIOLATIONS)
    def test_violations_fall_back_to_chronological(self, name, raw, caplog):
        gateway = make_gateway(FakeProvider(script={"playback_order": raw}))
        with caplog.at_level("WARNING"):
            order = order_segments(TWO_CHUNKS, segs(), STORE, gateway)
        assert order.intervals_in_order() == [SEG_A, SEG_B], name
        assert "falling back to chronological order" in caplog.text


class TestAssignChunks:
    def test_rule_fake_assigns_each_segment_once(self):
        gateway = make_gateway(FakeProvider(rules=True))
        assignment = assign_chunks(TWO_CHUNKS, segs(), STORE, gateway)
        assert [c.chunk_id for c in assignment.chunks] == [1, 2]
        all_assigned = [iv for c in assignment.chunks for iv in c.segments]
        assert sorted(all_assigned) == [SEG_A, SEG_B]

    def test_empty_chunk_allowed(self, caplog):
        raw = json.dumps({"chunks": [
            {"chunk_id": 1, "segments": [
                {"start": 10.0, "end": 20.0}, {"start": 40.0, "end": 50.0},
            ]},
            {"chunk_id": 2, "segments": []},
        ]})
        gateway = make_gateway(FakeProvider(script={"chunk_assignment": raw}))
        assignment = assign_chunks(TWO_CHUNKS, segs(), STORE, gateway)
        assert assignment.chunks[1].segments == ()

    def test_unassigned_appended_to_nearest_chunk(self, caplog):
        raw = json.dumps({"chunks": [
            {"chunk_id": 1, "segments": [{"start": 10.0, "end": 20.0}]},
            {"chunk_id": 2, "segments": []},
        ]})
        gateway = make_gateway(FakeProvider(script={"chunk_assignment": raw}))
        with caplog.at_level("WARNING"):
            assignment = assign_chunks(TWO_CHUNKS, segs(), STORE, gateway)
        # B has no assigned neighbour except chunk 1's A, so it lands there
        assert assignment.chunks[0].segments == (SEG_A, SEG_B)
        assert "unassigned" in caplog.text

    def test_all_unassigned_goes_to_first_chunk(self):
        raw = json.dumps({"chunks": [
            {"chunk_id": 1, "segments": []}, {"chunk_id": 2, "segments": []},
        ]})
        gateway = make_gateway(FakeProvider(script={"chunk_assignment": raw}))
        assignment = assign_chunks(TWO_CHUNKS, segs(), STORE, gateway)
        assert assignment.chunks[0].segments == (SEG_A, SEG_B)

    @pytest.mark.parametrize("name,raw", ASSIGNMENT_VIOLATIONS)
    def test_violations_raise_after_reprompt(self, name, raw):
        gateway = make_gateway(FakeProvider(script={"chunk_assignment": raw}))
        with pytest.raises(AssignmentError):
            assign_chunks(TWO_CHUNKS, segs(), STORE, gateway)

    def test_reprompt_can_recover(self):
        bad = ASSIGNMENT_VIOLATIONS[0][1]
        good = json.dumps({"chunks": [
            {"chunk_id": 1, "segments": [{"start": 10.0, "end": 20.0}]},
            {"chunk_id": 2, "segments": [{"start": 40.0, "end": 50.0}]},
        ]})
        gateway = make_gateway(FakeProvider(script={"chunk_assignment": [bad, good]}))
        assignment = assign_chunks(TWO_CHUNKS, segs(), STORE, gateway)
        assert assignment.chunks[0].segments == (SEG_A,)


class TestSummaries:
    def test_all_segments_titled(self):
        tiles = [Segment(Interval(0, 10), False), Segment(Interval(10, 20), True)]
        gateway = make_gateway(FakeProvider(rules=True))
        failures = summarize_segments(tiles, STORE, gateway)
        assert failures == []
        assert all(t.title for t in tiles)
        assert all(word_count(t.summary) <= 40 for t in tiles)

    def test_overlong_summary_truncated(self):
        long_summary = json.dumps({"title": "T", "summary": " ".join(["w"] * 60)})
        gateway = make_gateway(FakeProvider(script={"segment_summary": long_summary}))
        tiles = [Segment(SEG_A, True)]
        summarize_segments(tiles, STORE, gateway)
        assert word_count(tiles[0].summary) == 40

    def test_empty_segment_list(self):
        gateway = make_gateway(FakeProvider(rules=True))
        assert summarize_segments([], STORE, gateway) == []

    def test_provider_failure_gets_fallback_title(self):
        gateway = make_gateway(
            FakeProvider(script={"segment_summary": ProviderError("down")}), max_attempts=1
        )
        tiles = [Segment(SEG_A, True)]
        failures = summarize_segments(tiles, STORE, gateway)
        assert len(failures) == 1
        assert tiles[0].title == "Segment 10-20s"


class TestTitleCards:
    def test_generated_text_used(self):
        gateway = make_gateway(FakeProvider(script={"title_card": "A bridge sentence."}))
        card = generate_title_card(segs()[0], segs()[1], gateway, 4.0, after_segment=0)
        assert card.text == "A bridge sentence."
        assert card.display_duration == 4.0

    def test_provider_failure_falls_back(self):
        gateway = make_gateway(
            FakeProvider(script={"title_card": ProviderError("down")}), max_attempts=1
        )
        card = generate_title_card(segs()[0], segs()[1], gateway, 4.0, after_segment=0)
        assert card.text == "Next: Camera"

    def test_opening_card_preview_only(self):
        gateway = make_gateway(FakeProvider(rules=True))
        card = generate_title_card(None, segs()[0], gateway, 4.0, after_segment=-1)
        assert card.text == "Up next: Battery."
        assert card.after_segment == -1
