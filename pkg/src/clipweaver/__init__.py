"""clipweaver: query-driven video segment retrieval and narrative playback planning."""

__version__ = "0.1.0"

from .intervals import Interval, merge_overlaps, overlap_duration
from .segments import RelevanceBitmap, align_to_sentences, bitmap_to_segments, refine_bitmap

__all__ = [
    "Interval",
    "merge_overlaps",
    "overlap_duration",
    "RelevanceBitmap",
    "align_to_sentences",
    "bitmap_to_segments",
    "refine_bitmap",
    "__version__",
]
