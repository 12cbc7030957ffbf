"""Annotation: word limits, parallel determinism, failures, store round-trips."""

import json

import pytest

from clipweaver.annotation import (
    AnnotationStore,
    annotate_frame,
    annotate_video,
    load_store,
    save_store,
)
from clipweaver.errors import ProviderError, StoreLoadError
from clipweaver.gateway.fake import FakeProvider, request_fingerprint
from clipweaver.ingest import FrameRef, VideoMeta, ingest_prepared, sample_frame_timestamps
from clipweaver.text import word_count

from conftest import make_gateway, make_store, write_synth_source

META = VideoMeta("vid", "A Test Video", duration=12.0, frame_interval=3.0)


def frame(ts: float) -> FrameRef:
    return FrameRef(ts, f"frames/{ts:010.3f}.jpg")


class TestAnnotateFrame:
    def test_short_description_stored_verbatim(self):
        gateway = make_gateway(FakeProvider(script={
            "frame_annotation": "A speaker holds the phone up to the camera."
        }))
        result = annotate_frame(frame(3.0), "hello there", META, gateway)
        assert result.description == "A speaker holds the phone up to the camera."
        assert result.transcript_window == "hello there"

    def test_overlong_twice_truncated_and_logged(self, caplog):
        long_text = " ".join(f"w{i}" for i in range(80))
        gateway = make_gateway(FakeProvider(script={
            "frame_annotation": [long_text, long_text]
        }))
        with caplog.at_level("WARNING"):
            result = annotate_frame(frame(3.0), "", META, gateway)
        assert word_count(result.description) == 50
        assert "truncating" in caplog.text

    def test_overlong_once_retry_succeeds(self):
        long_text = " ".join(f"w{i}" for i in range(80))
        gateway = make_gateway(FakeProvider(script={
            "frame_annotation": [long_text, "short and sweet"]
        }))
        assert annotate_frame(frame(3.0), "", META, gateway).description == "short and sweet"

    def test_provider_failure_propagates(self):
        gateway = make_gateway(FakeProvider(script={
            "frame_annotation": ProviderError("down")
        }), max_attempts=1)
        with pytest.raises(ProviderError):
            annotate_frame(frame(3.0), "", META, gateway)


class TestAnnotateVideo:
    def _video(self, tmp_path):
        source = write_synth_source(tmp_path / "src")
        return ingest_prepared(source, tmp_path / "videos")

    def test_annotations_in_timestamp_order(self, tmp_path):
        video = self._video(tmp_path)
        report = annotate_video(video, make_gateway(FakeProvider(rules=True)), parallelism=4)
        assert report.failed == []
        assert [a.timestamp for a in report.store.annotations] == [3.0 * k for k in range(20)]

    def test_parallelism_does_not_change_store(self, tmp_path):
        video = self._video(tmp_path)
        gateway = make_gateway(FakeProvider(rules=True))
        serial = annotate_video(video, gateway, parallelism=1)
        parallel = annotate_video(video, make_gateway(FakeProvider(rules=True)), parallelism=4)
        assert serial.store == parallel.store

    def test_partial_failure_reported(self, tmp_path):
        video = self._video(tmp_path)
        # fail exactly the frame at t=6.0, every attempt
        window = "Welcome back to our full review of this phone. The design feels"
        fp = request_fingerprint("frame_annotation", {
            "video_title": "Phone Review",
            "timestamp": repr(6.0),
            "transcript_window": window,
        }, (str(video.video_dir / "frames" / f"{6.0:010.3f}.jpg"),))
        gateway = make_gateway(
            FakeProvider(script={fp: ProviderError("down")}, rules=True), max_attempts=1
        )
        report = annotate_video(video, gateway, parallelism=2)
        assert [ts for ts, _ in report.failed] == [6.0]
        assert len(report.store.annotations) == 19
        assert 6.0 not in report.store.timestamps

    def test_every_timestamp_on_the_sampling_grid(self, tmp_path):
        video = self._video(tmp_path)
        report = annotate_video(video, make_gateway(FakeProvider(rules=True)))
        grid = set(sample_frame_timestamps(video.meta.duration, video.meta.frame_interval))
        assert set(report.store.timestamps) <= grid
        assert all(
            word_count(a.description) <= 50 for a in report.store.annotations
        )


class TestStorePersistence:
    def test_round_trip_large_store(self, tmp_path):
        entries = [
            (float(3 * k), f"description {k}", f"voice {k}")
            for k in range(333)
        ]
        store = make_store(entries, duration=999.0)
        path = tmp_path / "store.jsonl"
        save_store(store, path)
        assert load_store(path) == store

    def test_round_trip_empty_store(self, tmp_path):
        store = AnnotationStore("vid", VideoMeta("vid", "t", 0.0, 3.0), ())
        path = tmp_path / "store.jsonl"
        save_store(store, path)
        assert load_store(path) == store

    def test_truncated_file_reports_line(self, tmp_path):
        store = make_store([(0.0, "d", "v"), (3.0, "d", "v")])
        path = tmp_path / "store.jsonl"
        save_store(store, path)
        lines = path.read_text().splitlines()
        lines[2] = lines[2][: len(lines[2]) // 2]  # chop the second frame record
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(StoreLoadError) as err:
            load_store(path)
        assert err.value.line_number == 3

    def test_missing_header_rejected(self, tmp_path):
        path = tmp_path / "store.jsonl"
        path.write_text(json.dumps({
            "record": "frame", "timestamp": 0.0,
            "description": "d", "transcript_window": "v",
        }) + "\n")
        with pytest.raises(StoreLoadError):
            load_store(path)

    def test_save_is_byte_deterministic(self, tmp_path):
        store = make_store([(0.0, "d", "v"), (3.0, "d2", "v2")])
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        save_store(store, a)
        save_store(store, b)
        assert a.read_bytes() == b.read_bytes()
