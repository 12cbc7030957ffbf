"""Frame sampling, transcript windows, sentence index, ingest plumbing."""

import math
import random

import pytest
from hypothesis import given, strategies as st

from clipweaver.errors import IngestError, StoreLoadError
from clipweaver.ingest import (
    IngestedVideo,
    TimedWord,
    build_sentence_index,
    extract_frames,
    ingest_prepared,
    load_timed_words,
    sample_frame_timestamps,
    save_timed_words,
    transcript_window,
)

from conftest import write_synth_source

WRITE_FILE_CMD = (
    'python3 -c "import sys,pathlib; '
    "pathlib.Path(sys.argv[2]).write_bytes(('frame '+sys.argv[1]).encode())\" "
    "{timestamp} {output}"
)


class TestSampling:
    def test_ten_seconds(self):
        assert sample_frame_timestamps(10, 3) == [0, 3, 6, 9]

    def test_empty_video(self):
        assert sample_frame_timestamps(0, 3) == []

    def test_long_video(self):
        # 999 s at the 3 s grid: enumeration gives ceil(999/3) = 333 frames
        grid = sample_frame_timestamps(999, 3)
        assert len(grid) == 333
        assert grid[-1] == 996
        assert grid == [3 * k for k in range(333)]

    def test_non_positive_interval_rejected(self):
        with pytest.raises(ValueError):
            sample_frame_timestamps(10, 0)
        with pytest.raises(ValueError):
            sample_frame_timestamps(10, -1)

    @given(
        duration=st.integers(min_value=0, max_value=10_000),
        interval=st.sampled_from([0.5, 1, 2, 3, 5, 10]),
    )
    def test_count_and_range_invariant(self, duration, interval):
        grid = sample_frame_timestamps(duration, interval)
        assert len(grid) == (math.ceil(duration / interval) if duration > 0 else 0)
        assert all(0 <= t < duration for t in grid)
        assert grid == sorted(grid)


def words_covering(span_end: int) -> list[TimedWord]:
    return [TimedWord(f"w{i}", float(i), float(i + 1)) for i in range(span_end)]


class TestTranscriptWindow:
    def test_direct_rule(self):
        words = words_covering(20)
        # window [1, 11] catches words whose [start, end] touches it
        text = transcript_window(words, center=6, radius=5)
        assert text == " ".join(f"w{i}" for i in range(12))

    def test_clamps_at_zero(self):
        words = words_covering(20)
        text = transcript_window(words, center=2, radius=5)
        assert text == " ".join(f"w{i}" for i in range(8))

    def test_empty_words(self):
        assert transcript_window([], center=5, radius=5) == ""

    def test_zero_length_word_inside_window(self):
        words = [TimedWord("blip", 4.0, 4.0)]
        assert transcript_window(words, center=6, radius=5) == "blip"

    @given(st.permutations(list(range(12))))
    def test_function_of_the_set(self, order):
        words = words_covering(12)
        shuffled = [words[i] for i in order]
        assert transcript_window(shuffled, 6, 5) == transcript_window(words, 6, 5)


class TestSentenceIndex:
    def test_two_terminators(self):
        words = [
            TimedWord("Hello", 0, 0.5),
            TimedWord("there.", 0.5, 1.0),
            TimedWord("How", 1.2, 1.5),
            TimedWord("are", 1.5, 1.8),
            TimedWord("you?", 1.8, 2.2),
        ]
        index = build_sentence_index(words)
        assert [s.text for s in index.sentences] == ["Hello there.", "How are you?"]
        assert index.sentences[0].start == 0 and index.sentences[0].end == 1.0
        assert index.sentences[1].start == 1.2 and index.sentences[1].end == 2.2

    def test_no_punctuation_single_sentence(self):
        words = [TimedWord(t, i, i + 1) for i, t in enumerate("just some words".split())]
        index = build_sentence_index(words)
        assert len(index.sentences) == 1
        assert index.sentences[0].start == 0 and index.sentences[0].end == 3

    def test_empty(self):
        assert build_sentence_index([]).sentences == ()

    def test_trailing_fragment_closes_final_sentence(self):
        words = [TimedWord("Done.", 0, 1), TimedWord("and", 1, 2), TimedWord("more", 2, 3)]
        index = build_sentence_index(words)
        assert [s.text for s in index.sentences] == ["Done.", "and more"]

    @given(st.lists(st.sampled_from(["word", "stop.", "what?", "go!"]), max_size=30))
    def test_partition_property(self, tokens):
        words = [TimedWord(t, float(i), float(i + 1)) for i, t in enumerate(tokens)]
        sentences = build_sentence_index(words).sentences
        # sentences partition the words: spans are adjacent, ordered, and cover all
        rebuilt = " ".join(s.text for s in sentences)
        assert rebuilt == " ".join(tokens)
        if words:
            assert sentences[0].start == words[0].start
            assert sentences[-1].end == words[-1].end
        for a, b in zip(sentences, sentences[1:]):
            assert a.end <= b.start or a.end == b.start


class TestTimedWordPersistence:
    def test_round_trip(self, tmp_path):
        words = [TimedWord("a", 0.0, 0.4), TimedWord("b", 0.5, 1.1)]
        path = tmp_path / "words.jsonl"
        save_timed_words(words, path)
        assert load_timed_words(path) == words

    def test_corrupt_line_reports_number(self, tmp_path):
        path = tmp_path / "words.jsonl"
        path.write_text('{"text": "a", "start": 0.0, "end": 0.4}\nnot json\n')
        with pytest.raises(StoreLoadError) as err:
            load_timed_words(path)
        assert err.value.line_number == 2


class TestExtractFrames:
    def test_one_ref_per_timestamp(self, tmp_path):
        video = tmp_path / "input.mp4"
        video.write_bytes(b"fake video")
        refs = extract_frames(video, [0.0, 3.0, 6.0, 9.0], tmp_path / "frames", WRITE_FILE_CMD)
        assert [r.timestamp for r in refs] == [0.0, 3.0, 6.0, 9.0]
        for ref in refs:
            assert (tmp_path / ref.image_ref).read_bytes().startswith(b"frame ")

    def test_empty_timestamps(self, tmp_path):
        video = tmp_path / "input.mp4"
        video.write_bytes(b"x")
        assert extract_frames(video, [], tmp_path / "frames", WRITE_FILE_CMD) == []

    def test_unreadable_source(self, tmp_path):
        with pytest.raises(IngestError):
            extract_frames(tmp_path / "missing.mp4", [0.0], tmp_path / "frames", WRITE_FILE_CMD)

    def test_failing_tool_reports_diagnostics(self, tmp_path):
        video = tmp_path / "input.mp4"
        video.write_bytes(b"x")
        bad_cmd = 'python3 -c "import sys; sys.exit(\'boom\')" {timestamp} {output}'
        with pytest.raises(IngestError, match="boom"):
            extract_frames(video, [0.0], tmp_path / "frames", bad_cmd)


class TestPreparedIngest:
    def test_layout_and_reload(self, tmp_path):
        source = write_synth_source(tmp_path / "source")
        video = ingest_prepared(source, tmp_path / "videos")
        assert video.meta.video_id == "demo"
        assert video.meta.duration == 60.0
        assert len(video.frames) == 20
        assert all((video.video_dir / f.image_ref).exists() for f in video.frames)

        reloaded = IngestedVideo.load(video.video_dir)
        assert reloaded.meta == video.meta
        assert reloaded.frames == video.frames
        assert reloaded.words == video.words

    def test_missing_manifest(self, tmp_path):
        (tmp_path / "empty").mkdir()
        with pytest.raises(IngestError):
            ingest_prepared(tmp_path / "empty", tmp_path / "videos")


def test_sampling_is_deterministic_under_repeats():
    random.seed(7)
    grids = {tuple(sample_frame_timestamps(100, 3)) for _ in range(5)}
    assert len(grids) == 1
