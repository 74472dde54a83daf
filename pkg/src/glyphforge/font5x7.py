"""Built-in 5x7 bitmap font: lowercase a-z and digits, '#' = ink.

'i' and 'j' carry a detached dot (blank row between dot and stem) so the
dot-merging heuristic has realistic inputs.
"""
from __future__ import annotations

import numpy as np

FONT: dict[str, list[str]] = {
    "a": [".....", ".....", ".###.", "....#", ".####", "#...#", ".####"],
    "b": ["#....", "#....", "####.", "#...#", "#...#", "#...#", "####."],
    "c": [".....", ".....", ".####", "#....", "#....", "#....", ".####"],
    "d": ["....#", "....#", ".####", "#...#", "#...#", "#...#", ".####"],
    "e": [".....", ".....", ".###.", "#...#", "#####", "#....", ".####"],
    "f": ["..###", ".#...", "#####", ".#...", ".#...", ".#...", ".#..."],
    "g": [".....", ".####", "#...#", "#...#", ".####", "....#", ".###."],
    "h": ["#....", "#....", "####.", "#...#", "#...#", "#...#", "#...#"],
    "i": ["..#..", ".....", "..#..", "..#..", "..#..", "..#..", "..##."],
    "j": ["...#.", ".....", "...#.", "...#.", "...#.", "#..#.", ".##.."],
    "k": ["#....", "#....", "#..#.", "#.#..", "##...", "#.#..", "#..#."],
    "l": ["##...", ".#...", ".#...", ".#...", ".#...", ".#...", "#####"],
    "m": [".....", ".....", "##.#.", "#.#.#", "#.#.#", "#.#.#", "#.#.#"],
    "n": [".....", ".....", "####.", "#...#", "#...#", "#...#", "#...#"],
    "o": [".....", ".....", ".###.", "#...#", "#...#", "#...#", ".###."],
    "p": [".....", ".....", "####.", "#...#", "####.", "#....", "#...."],
    "q": [".....", ".....", ".####", "#...#", ".####", "....#", "....#"],
    "r": [".....", ".....", "#.##.", "##...", "#....", "#....", "#...."],
    "s": [".....", ".....", ".####", "#....", ".###.", "....#", "####."],
    "t": [".#...", ".#...", "#####", ".#...", ".#...", ".#...", "..###"],
    "u": [".....", ".....", "#...#", "#...#", "#...#", "#...#", ".####"],
    "v": [".....", ".....", "#...#", "#...#", "#...#", ".#.#.", "..#.."],
    "w": [".....", ".....", "#.#.#", "#.#.#", "#.#.#", "#.#.#", ".#.#."],
    "x": [".....", ".....", "#...#", ".#.#.", "..#..", ".#.#.", "#...#"],
    "y": [".....", ".....", "#...#", "#...#", ".####", "....#", ".###."],
    "z": [".....", ".....", "#####", "...#.", "..#..", ".#...", "#####"],
    "0": [".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###."],
    "1": ["..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."],
    "2": [".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"],
    "3": [".###.", "#...#", "....#", "..##.", "....#", "#...#", ".###."],
    "4": ["...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."],
    "5": ["#####", "#....", "####.", "....#", "....#", "#...#", ".###."],
    "6": ["..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###."],
    "7": ["#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."],
    "8": [".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."],
    "9": [".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##.."],
}

GLYPH_W, GLYPH_H = 5, 7

DOTTED = {"i", "j"}  # letters whose top dot is a separate component


def glyph_bits(ch: str, scale: int = 1) -> np.ndarray:
    """Boolean (7*scale, 5*scale) bitmap for one character."""
    rows = FONT[ch]
    a = np.array([[c == "#" for c in row] for row in rows], dtype=bool)
    if scale > 1:
        a = np.kron(a, np.ones((scale, scale), dtype=bool))
    return a


def dot_split(ch: str, scale: int = 1) -> tuple[np.ndarray, np.ndarray] | None:
    """For dotted letters, (dot bitmap rows, stem bitmap rows) at full glyph size."""
    if ch not in DOTTED:
        return None
    full = glyph_bits(ch, scale)
    dot = full.copy()
    stem = full.copy()
    cut = 1 * scale  # dot occupies the first font row only
    dot[cut:, :] = False
    stem[:cut, :] = False
    return dot, stem


def draw_text(canvas: np.ndarray, text: str, x: int, y: int, value) -> None:
    """Stamp `text` in the 5x7 font onto an array at (x, y); clips at edges."""
    h, w = canvas.shape[:2]
    cx = x
    for ch in text:
        bits = FONT.get(ch)
        if bits is None:
            cx += GLYPH_W + 1
            continue
        for r, row in enumerate(bits):
            for c, cell in enumerate(row):
                if cell == "#" and 0 <= y + r < h and 0 <= cx + c < w:
                    canvas[y + r, cx + c] = value
        cx += GLYPH_W + 1
