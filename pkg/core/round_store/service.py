"""
Dataset storage: JSONL manifests, frame streams and split assignment.

Layout of a dataset directory:
    dataset.json (optional; may point "frames_dir" at frames stored elsewhere),
    rounds.jsonl, events.jsonl, truth.jsonl,
    frames/{stream}/{frame:06}.png  or  frames/{stream}.rgb + frames/{stream}.json
"""
import hashlib
import json
import logging
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from PIL import Image

from core.errors import EmptySplitError, IndexOutOfRangeError, PipelineIOError
from .models import FrameFormat, RoundRecord, Split, StreamMeta

logger = logging.getLogger(__name__)

ROUNDS_FILE = "rounds.jsonl"
EVENTS_FILE = "events.jsonl"
TRUTH_FILE = "truth.jsonl"
DATASET_FILE = "dataset.json"
FRAMES_DIR = "frames"

# truth record -> (stream frame index -> uint8 [H, W, 3])
FrameRenderer = Callable[[dict], Callable[[int], np.ndarray]]


# ---------------------------------------------------------------- JSONL

def write_jsonl(path: Path, records: Iterable[dict]) -> int:
    count = 0
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            for record in records:
                f.write(json.dumps(record, sort_keys=True) + "\n")
                count += 1
    except OSError as e:
        raise PipelineIOError(f"cannot write {path}: {e}")
    return count


def read_jsonl(path: Path) -> List[dict]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return [json.loads(line) for line in f if line.strip()]
    except OSError as e:
        raise PipelineIOError(f"cannot read {path}: {e}")
    except json.JSONDecodeError as e:
        raise PipelineIOError(f"{path}: malformed JSON line: {e}")


def write_json(path: Path, payload: dict) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2, sort_keys=True)
            f.write("\n")
    except OSError as e:
        raise PipelineIOError(f"cannot write {path}: {e}")


# ---------------------------------------------------------------- splits

def split_rank_key(round_id: str, seed: int) -> str:
    return hashlib.sha256(f"{seed}:{round_id}".encode("utf-8")).hexdigest()


def assign_splits(
    round_ids: Sequence[str],
    seed: int,
    train_fraction: float = 0.8,
    val_fraction: float = 0.1
) -> Dict[str, Split]:
    """
    Rank rounds by a seeded hash and cut the ranking into train / val / test.

    Split sizes depend only on the number of rounds (100 rounds -> 80/10/10).
    """
    ranked = sorted(round_ids, key=lambda r: split_rank_key(r, seed))
    n = len(ranked)
    n_train = int(round(n * train_fraction))
    n_val = min(n - n_train, int(round(n * val_fraction)))
    splits = {}
    for i, round_id in enumerate(ranked):
        if i < n_train:
            splits[round_id] = Split.TRAIN
        elif i < n_train + n_val:
            splits[round_id] = Split.VAL
        else:
            splits[round_id] = Split.TEST
    return splits


# ---------------------------------------------------------------- frame streams

class PngDirectorySource:
    """Directory of numbered PNG frames"""

    def __init__(self, directory: Path, fps: int = 8):
        self.directory = Path(directory)
        self.fps = fps
        self._files = sorted(self.directory.glob("*.png"))

    @property
    def n_frames(self) -> int:
        return len(self._files)

    def frame(self, index: int) -> np.ndarray:
        if not 0 <= index < len(self._files):
            raise IndexOutOfRangeError(f"frame {index} outside {self.directory} ({len(self._files)} frames)")
        try:
            with Image.open(self._files[index]) as image:
                return np.asarray(image.convert("RGB"))
        except OSError as e:
            raise PipelineIOError(f"cannot decode {self._files[index]}: {e}")


class RawStreamSource:
    """Single raw RGB24 file with a JSON sidecar {width, height, fps}"""

    def __init__(self, path: Path):
        self.path = Path(path)
        sidecar = self.path.with_suffix(".json")
        try:
            with open(sidecar, "r", encoding="utf-8") as f:
                self.meta = StreamMeta(**json.load(f))
        except OSError as e:
            raise PipelineIOError(f"cannot read sidecar {sidecar}: {e}")
        frame_bytes = self.meta.width * self.meta.height * 3
        size = self.path.stat().st_size
        if size % frame_bytes:
            raise PipelineIOError(f"{self.path}: {size} bytes is not a whole number of {frame_bytes}-byte frames")
        self._frames = np.memmap(self.path, dtype=np.uint8, mode="r",
                                 shape=(size // frame_bytes, self.meta.height, self.meta.width, 3))

    @property
    def fps(self) -> int:
        return self.meta.fps

    @property
    def n_frames(self) -> int:
        return self._frames.shape[0]

    def frame(self, index: int) -> np.ndarray:
        if not 0 <= index < self.n_frames:
            raise IndexOutOfRangeError(f"frame {index} outside {self.path} ({self.n_frames} frames)")
        return np.array(self._frames[index])


class RenderedSource:
    """Frames re-rendered on demand from a truth record"""

    def __init__(self, truth: dict, renderer: FrameRenderer, n_frames: int, fps: int = 8):
        self.truth = truth
        self.fps = fps
        self._n_frames = n_frames
        self._render = renderer(truth)

    @property
    def n_frames(self) -> int:
        return self._n_frames

    def frame(self, index: int) -> np.ndarray:
        if not 0 <= index < self._n_frames:
            raise IndexOutOfRangeError(f"frame {index} outside a {self._n_frames}-frame rendered stream")
        return self._render(index)


def open_stream(path: Path, fps: int = 8):
    """PNG directory or raw .rgb stream"""
    path = Path(path)
    if path.is_dir():
        return PngDirectorySource(path, fps)
    if path.suffix == ".rgb" and path.exists():
        return RawStreamSource(path)
    raise PipelineIOError(f"{path} is neither a PNG frame directory nor a raw .rgb stream")


def list_streams(frames_dir: Path) -> List[Path]:
    """Stream paths under a frames directory, sorted by name"""
    if not frames_dir.is_dir():
        raise PipelineIOError(f"frames directory not found: {frames_dir}")
    streams = [p for p in frames_dir.iterdir() if p.is_dir() or p.suffix == ".rgb"]
    return sorted(streams, key=lambda p: p.stem)


def write_png_stream(directory: Path, frames: Iterable[np.ndarray]) -> int:
    directory.mkdir(parents=True, exist_ok=True)
    count = 0
    try:
        for i, pixels in enumerate(frames):
            Image.fromarray(pixels).save(directory / f"{i:06d}.png", optimize=False)
            count += 1
    except OSError as e:
        raise PipelineIOError(f"cannot write frames to {directory}: {e}")
    return count


def write_raw_stream(path: Path, frames: Iterable[np.ndarray], fps: int) -> int:
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    width = height = None
    try:
        with open(path, "wb") as f:
            for pixels in frames:
                height, width = pixels.shape[:2]
                f.write(np.ascontiguousarray(pixels, dtype=np.uint8).tobytes())
                count += 1
    except OSError as e:
        raise PipelineIOError(f"cannot write {path}: {e}")
    if count:
        write_json(path.with_suffix(".json"), StreamMeta(width=width, height=height, fps=fps).model_dump())
    return count


# ---------------------------------------------------------------- datasets

class RoundStore:
    """
    Read access to one dataset directory.

    Args:
        data_dir: Dataset root
        renderer: Re-renders frames from truth records when the dataset stores none
    """

    def __init__(self, data_dir: Path, renderer: Optional[FrameRenderer] = None):
        self.data_dir = Path(data_dir)
        self.renderer = renderer
        manifest = self.data_dir / ROUNDS_FILE
        if not manifest.exists():
            raise PipelineIOError(f"no {ROUNDS_FILE} in {self.data_dir}")
        self.manifest_stamp = manifest_stamp(manifest)
        self._rounds = [RoundRecord(**r) for r in read_jsonl(manifest)]
        self.info: dict = {}
        if (self.data_dir / DATASET_FILE).exists():
            with open(self.data_dir / DATASET_FILE, "r", encoding="utf-8") as f:
                self.info = json.load(f)
        self.frames_dir = self.data_dir / self.info.get("frames_dir", FRAMES_DIR)
        self._truth: Optional[Dict[str, dict]] = None
        self._streams: Dict[str, object] = {}
        logger.info(f"Opened dataset {self.data_dir}: {len(self._rounds)} rounds")

    @property
    def events_path(self) -> Path:
        return self.data_dir / EVENTS_FILE

    def rounds(self, split: Optional[Split] = None) -> List[RoundRecord]:
        if split is None:
            return list(self._rounds)
        return [r for r in self._rounds if r.split is Split(split)]

    def require_split(self, split: Split) -> List[RoundRecord]:
        rounds = self.rounds(split)
        if not rounds:
            raise EmptySplitError(f"split '{Split(split).value}' of {self.data_dir} is empty")
        return rounds

    def get(self, round_id: str) -> RoundRecord:
        for record in self._rounds:
            if record.round_id == round_id:
                return record
        raise KeyError(f"Unknown round: {round_id}")

    def truth(self) -> Dict[str, dict]:
        if self._truth is None:
            path = self.data_dir / TRUTH_FILE
            self._truth = {t["round_id"]: t for t in read_jsonl(path)} if path.exists() else {}
        return self._truth

    def frame_format(self) -> FrameFormat:
        frames = self.frames_dir
        if frames.is_dir() and any(frames.iterdir()):
            return FrameFormat.RGB if any(frames.glob("*.rgb")) else FrameFormat.PNG
        return FrameFormat.NONE

    def stream(self, name: str, fps: int = 8):
        if name not in self._streams:
            frames = self.frames_dir
            if (frames / name).is_dir():
                self._streams[name] = PngDirectorySource(frames / name, fps)
            elif (frames / f"{name}.rgb").exists():
                self._streams[name] = RawStreamSource(frames / f"{name}.rgb")
            else:
                truth = self.truth().get(name)
                if truth is None or self.renderer is None:
                    raise PipelineIOError(f"no frames or re-renderable truth for stream {name}")
                self._streams[name] = RenderedSource(truth, self.renderer, int(truth["stream_frames"]), fps)
        return self._streams[name]

    def frame_reader(self, record: RoundRecord) -> Callable[[int], np.ndarray]:
        """Round-relative frame access; indices past the round end read its last frame"""
        stream = self.stream(record.stream, record.fps)

        def read(index: int) -> np.ndarray:
            if index < 0:
                raise IndexOutOfRangeError(f"negative frame index {index}")
            return stream.frame(record.start_frame + min(index, record.n_frames - 1))

        return read


# Cached stores by directory
_stores: Dict[str, RoundStore] = {}


def manifest_stamp(path: Path) -> Tuple[int, int]:
    """(mtime in ns, size) of a manifest; changes whenever the file is rewritten"""
    try:
        stat = Path(path).stat()
    except OSError as e:
        raise PipelineIOError(f"cannot stat {path}: {e}")
    return stat.st_mtime_ns, stat.st_size


def get_round_store(data_dir: Path, renderer: Optional[FrameRenderer] = None) -> RoundStore:
    """
    Get or create the RoundStore for a dataset directory.

    A cached store is reopened when its rounds.jsonl has been rewritten since it was read.
    """
    key = str(Path(data_dir).resolve())
    cached = _stores.get(key)
    manifest = Path(data_dir) / ROUNDS_FILE
    if cached is not None and manifest.exists() and manifest_stamp(manifest) != cached.manifest_stamp:
        logger.info(f"{manifest} changed on disk, reopening dataset")
        renderer = renderer or cached.renderer
        cached = None
    if cached is None:
        _stores[key] = RoundStore(Path(data_dir), renderer)
    elif renderer is not None and cached.renderer is None:
        cached.renderer = renderer
    return _stores[key]
