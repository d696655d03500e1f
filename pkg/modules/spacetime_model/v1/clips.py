"""Clip assembly for a prediction at second t"""
from typing import Callable, Sequence

import numpy as np
from PIL import Image

from core.errors import IndexOutOfRangeError
from .config import ClipMode

FrameReader = Callable[[int], np.ndarray]


def assemble_clip_indices(t: int, fps: int, frames_per_clip: int, mode: ClipMode = ClipMode.UNIFORM_HISTORY) -> np.ndarray:
    """
    Round-relative frame indices for second t, all inside [0, fps * t - 1].

    uniform_history spreads T indices evenly over the whole history;
    recent_window takes the last T frames (repeating frame 0 when the history is shorter).
    """
    if t < 1:
        raise IndexOutOfRangeError(f"predictions start at second 1, got {t}")
    last = fps * t - 1
    if ClipMode(mode) is ClipMode.UNIFORM_HISTORY:
        return np.round(np.linspace(0, last, frames_per_clip)).astype(np.int64)
    return np.maximum(np.arange(last - frames_per_clip + 1, last + 1), 0).astype(np.int64)


def resize_frame(pixels: np.ndarray, image_size: int) -> np.ndarray:
    """uint8 [H, W, 3] -> float [S, S, 3] in [0, 1]"""
    if pixels.shape[0] != image_size or pixels.shape[1] != image_size:
        image = Image.fromarray(pixels).resize((image_size, image_size), Image.Resampling.BILINEAR)
        pixels = np.asarray(image)
    return pixels.astype(np.float64) / 255.0


def prepare_clip(read_frame: FrameReader, indices: Sequence[int], image_size: int) -> np.ndarray:
    """[T, S, S, 3] model input from round-relative frame indices"""
    return np.stack([resize_frame(read_frame(int(i)), image_size) for i in indices])
