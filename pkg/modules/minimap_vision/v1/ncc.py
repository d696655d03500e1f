"""
Normalized cross-correlation template matching.

score = sum((T - mean T)(I - mean I)) / sqrt(sum((T - mean T)^2) * sum((I - mean I)^2))
Windows (or templates) with zero variance score 0 and are flagged degenerate.
"""
from typing import Optional, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from pydantic import BaseModel

from core.errors import TemplateLargerThanRegionError

VARIANCE_EPS = 1e-9

Region = Tuple[int, int, int, int]


class NCCMatch(BaseModel):
    """Best match: top-left offset in image coordinates"""
    x: int
    y: int
    score: float
    degenerate: bool = False


def _centered_windows(image: np.ndarray, height: int, width: int) -> Tuple[np.ndarray, np.ndarray]:
    """[P, h*w] mean-free windows (row-major over offsets) and their L2 norms"""
    windows = sliding_window_view(image, (height, width))
    flat = windows.reshape(-1, height * width)
    centered = flat - flat.mean(axis=1, keepdims=True)
    return centered, np.sqrt((centered * centered).sum(axis=1))


def normalized_templates(templates: Sequence[np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    """[K, h*w] unit-norm mean-free templates and a flag for zero-variance ones"""
    flat = np.stack([np.asarray(t, dtype=np.float64).ravel() for t in templates])
    centered = flat - flat.mean(axis=1, keepdims=True)
    norms = np.sqrt((centered * centered).sum(axis=1))
    flat_template = norms <= VARIANCE_EPS
    return centered / np.where(flat_template, 1.0, norms)[:, None], flat_template


def ncc_scores(templates: Sequence[np.ndarray], image: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    NCC of every template at every offset.

    Args:
        templates: K grayscale templates of one shape (h, w)
        image: Grayscale image

    Returns:
        scores [K, H-h+1, W-w+1] and the degenerate-window mask [H-h+1, W-w+1]

    Raises:
        TemplateLargerThanRegionError: a template does not fit the image
    """
    image = np.asarray(image, dtype=np.float64)
    h, w = np.asarray(templates[0]).shape
    if h > image.shape[0] or w > image.shape[1]:
        raise TemplateLargerThanRegionError(f"template {h}x{w} larger than region {image.shape[0]}x{image.shape[1]}")
    out_shape = (image.shape[0] - h + 1, image.shape[1] - w + 1)
    unit, flat_template = normalized_templates(templates)
    centered, norms = _centered_windows(image, h, w)
    degenerate = norms <= VARIANCE_EPS
    scores = (centered @ unit.T) / np.where(degenerate, 1.0, norms)[:, None]
    scores[degenerate] = 0.0
    scores[:, flat_template] = 0.0
    scores = np.clip(scores, -1.0, 1.0)
    return scores.T.reshape((len(unit),) + out_shape), degenerate.reshape(out_shape)


def ncc_map(template: np.ndarray, image: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Single-template score map and degenerate mask"""
    scores, degenerate = ncc_scores([template], image)
    return scores[0], degenerate


def ncc_match(template: np.ndarray, image: np.ndarray, search_region: Optional[Region] = None) -> NCCMatch:
    """
    Best NCC offset of a template inside a search region.

    Args:
        template: Grayscale template
        image: Grayscale image
        search_region: (x0, y0, x1, y1) half-open window of the image the
            template must lie in; the whole image when None

    Returns:
        Top-left of the best match (first in row-major order on ties) and its score

    Raises:
        TemplateLargerThanRegionError: template does not fit the region
    """
    image = np.asarray(image, dtype=np.float64)
    x0, y0, x1, y1 = search_region or (0, 0, image.shape[1], image.shape[0])
    x0, y0 = max(0, x0), max(0, y0)
    x1, y1 = min(image.shape[1], x1), min(image.shape[0], y1)
    region = image[y0:y1, x0:x1]
    if region.size == 0:
        raise TemplateLargerThanRegionError(f"empty search region {search_region}")
    scores, degenerate = ncc_map(template, region)
    best = int(np.argmax(scores))
    by, bx = np.unravel_index(best, scores.shape)
    flat_template = bool(normalized_templates([template])[1][0])
    return NCCMatch(
        x=int(bx) + x0,
        y=int(by) + y0,
        score=float(scores[by, bx]),
        degenerate=bool(degenerate[by, bx]) or flat_template
    )


def ncc_at(templates: Sequence[np.ndarray], patch: np.ndarray) -> np.ndarray:
    """Scores of K templates against one same-sized patch (0 for degenerate pairs)"""
    scores, _ = ncc_scores(templates, patch)
    return scores[:, 0, 0]
