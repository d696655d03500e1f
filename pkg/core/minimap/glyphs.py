"""
Built-in bitmaps shared by the renderer and the template matcher.

Agent glyphs are 9-pixel marks on a 5x5 grid; any two of them share at most
5 pixels, which keeps the correlation between different agents' icons at or
below 0.5 when they are aligned.
"""
from typing import Dict, List, Tuple

import numpy as np

from .models import Outcome, Team

ICON_SIZE = 9
DIGIT_WIDTH = 5
DIGIT_HEIGHT = 9
BANNER_WIDTH = 48
BANNER_HEIGHT = 8

ATTACKER_AGENTS = ["ash", "bolt", "cinder", "dune", "ember"]
DEFENDER_AGENTS = ["frost", "gale", "haze", "iris", "jade"]

ROSTER: Dict[str, Team] = {
    **{name: Team.ATTACKER for name in ATTACKER_AGENTS},
    **{name: Team.DEFENDER for name in DEFENDER_AGENTS},
}
AGENT_NAMES: List[str] = ATTACKER_AGENTS + DEFENDER_AGENTS

# colours
HUD_BACKGROUND = (20, 20, 28)
HUD_INK = (235, 235, 220)
BOUNDARY = (40, 40, 40)
GLYPH_DARK = (15, 15, 15)
EFFECT_FILL = (25, 25, 25)
TEAM_COLOURS = {
    Team.ATTACKER: (220, 70, 60),
    Team.DEFENDER: (60, 200, 210),
}
SPIKE_COLOUR = (250, 220, 40)


def _grid(rows: List[str]) -> np.ndarray:
    return np.array([[ch == "#" for ch in row] for row in rows], dtype=bool)


_AGENT_MARKS = {
    "ash": ["..#..", "..#..", "#####", "..#..", "..#.."],
    "bolt": ["#...#", ".#.#.", "..#..", ".#.#.", "#...#"],
    "cinder": [".....", ".###.", ".###.", ".###.", "....."],
    "dune": ["#####", "#....", "#....", "#....", "#...."],
    "ember": ["....#", "....#", "....#", "....#", "#####"],
    "frost": ["#####", "....#", "....#", "....#", "....#"],
    "gale": ["#....", "#....", "#....", "#....", "#####"],
    "haze": ["#.#.#", ".....", "#.#.#", ".....", "#.#.#"],
    "iris": [".....", "#.#.#", "#.#.#", "#.#.#", "....."],
    "jade": [".###.", ".....", ".###.", ".....", ".###."],
}
AGENT_MARKS: Dict[str, np.ndarray] = {name: _grid(rows) for name, rows in _AGENT_MARKS.items()}

# seven-segment strokes on a 5 x 9 cell
_SEGMENTS: Dict[str, List[Tuple[int, int]]] = {
    "a": [(0, 1), (0, 2), (0, 3)],
    "b": [(1, 4), (2, 4), (3, 4)],
    "c": [(5, 4), (6, 4), (7, 4)],
    "d": [(8, 1), (8, 2), (8, 3)],
    "e": [(5, 0), (6, 0), (7, 0)],
    "f": [(1, 0), (2, 0), (3, 0)],
    "g": [(4, 1), (4, 2), (4, 3)],
}
_DIGIT_SEGMENTS = {
    "0": "abcdef", "1": "bc", "2": "abged", "3": "abgcd", "4": "fgbc",
    "5": "afgcd", "6": "afgedc", "7": "abc", "8": "abcdefg", "9": "abcdfg",
}


def _digit_mask(ch: str) -> np.ndarray:
    mask = np.zeros((DIGIT_HEIGHT, DIGIT_WIDTH), dtype=bool)
    if ch == ":":
        for r in (2, 3, 5, 6):
            mask[r, 2] = True
        return mask
    for segment in _DIGIT_SEGMENTS[ch]:
        for r, c in _SEGMENTS[segment]:
            mask[r, c] = True
    return mask


DIGIT_MASKS: Dict[str, np.ndarray] = {ch: _digit_mask(ch) for ch in "0123456789:"}


def _paint(mask: np.ndarray, ink, background) -> np.ndarray:
    out = np.empty(mask.shape + (3,), dtype=np.uint8)
    out[...] = background
    out[mask] = ink
    return out


def agent_icon(agent: str) -> np.ndarray:
    """9x9 RGB icon: team-coloured square with the agent's dark mark"""
    mask = np.zeros((ICON_SIZE, ICON_SIZE), dtype=bool)
    mask[2:7, 2:7] = AGENT_MARKS[agent]
    return _paint(mask, GLYPH_DARK, TEAM_COLOURS[ROSTER[agent]])


def effect_icon(agent: str) -> np.ndarray:
    """9x9 RGB skill-effect icon: the agent's mark lit on a dark square"""
    mask = np.zeros((ICON_SIZE, ICON_SIZE), dtype=bool)
    mask[2:7, 2:7] = AGENT_MARKS[agent]
    return _paint(mask, TEAM_COLOURS[ROSTER[agent]], EFFECT_FILL)


def spike_icon() -> np.ndarray:
    """9x9 RGB spike icon: lit diamond outline"""
    yy, xx = np.mgrid[0:ICON_SIZE, 0:ICON_SIZE]
    mask = (np.abs(yy - 4) + np.abs(xx - 4)) == 3
    return _paint(mask, SPIKE_COLOUR, EFFECT_FILL)


def digit_bitmap(ch: str) -> np.ndarray:
    """5x9 RGB timer glyph"""
    return _paint(DIGIT_MASKS[ch], HUD_INK, HUD_BACKGROUND)


def banner_bitmap(outcome: Outcome) -> np.ndarray:
    """48x8 RGB outcome banner: 8-px stripes, the defender banner is the attacker one inverted"""
    xx = np.arange(BANNER_WIDTH)
    stripes = np.broadcast_to(((xx // 8) % 2) == 0, (BANNER_HEIGHT, BANNER_WIDTH))
    if outcome is Outcome.ATTACKER_WIN:
        return _paint(stripes, TEAM_COLOURS[Team.ATTACKER], HUD_BACKGROUND)
    return _paint(~stripes, TEAM_COLOURS[Team.DEFENDER], HUD_BACKGROUND)


def format_timer(seconds: int) -> str:
    """100 -> '1:40'"""
    minutes, secs = divmod(int(seconds), 60)
    return f"{minutes}:{secs:02d}"
