"""Dataset storage: manifests, frame streams, splits"""
from .models import FrameFormat, RoundRecord, Split, StreamMeta
from .service import (
    DATASET_FILE,
    EVENTS_FILE,
    FRAMES_DIR,
    ROUNDS_FILE,
    TRUTH_FILE,
    PngDirectorySource,
    RawStreamSource,
    RenderedSource,
    RoundStore,
    assign_splits,
    split_rank_key,
    get_round_store,
    list_streams,
    open_stream,
    read_jsonl,
    write_json,
    write_jsonl,
    write_png_stream,
    write_raw_stream
)

__all__ = [
    "FrameFormat",
    "RoundRecord",
    "Split",
    "StreamMeta",
    "DATASET_FILE",
    "EVENTS_FILE",
    "FRAMES_DIR",
    "ROUNDS_FILE",
    "TRUTH_FILE",
    "PngDirectorySource",
    "RawStreamSource",
    "RenderedSource",
    "RoundStore",
    "assign_splits",
    "split_rank_key",
    "get_round_store",
    "list_streams",
    "open_stream",
    "read_jsonl",
    "write_json",
    "write_jsonl",
    "write_png_stream",
    "write_raw_stream"
]
