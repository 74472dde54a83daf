"""Synthetic handwriting pages with exact ground truth: the desk-scale
stand-in for the original (non-redistributable) dataset, and the oracle
source for segmentation/layout/OCR tests."""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import font5x7
from .raster import BinaryRaster, BoundingBox, save_png

LETTERS = "abcdefghijklmnopqrstuvwxyz"


@dataclass
class SyntheticSpec:
    lines: list[str] = field(default_factory=lambda: ["the quick brown", "fox jumps over", "lazy dogs"])
    scale: int = 4
    jitter: int = 1  # max |dx|,|dy| per glyph
    fuse_probability: float = 0.0  # chance an adjacent same-word pair touches
    dot_offset: int = 0  # max lateral shift of i/j dots
    letter_gap_factor: float = 0.2  # of nominal glyph width
    word_gap_factor: float = 2.0
    line_pitch_factor: float = 2.2  # of nominal glyph height
    margin: int = 16
    speck_count: int = 0  # 1-px noise specks
    dilate: bool = False  # thicken strokes (detector "irregular" class)


@dataclass
class GroundTruthGlyph:
    box: BoundingBox
    char: str


@dataclass
class PageRender:
    page: BinaryRaster
    glyphs: list[GroundTruthGlyph]
    text: str
    fused_pairs: list[tuple[int, int]]  # glyph indices placed touching
    dotted: list[int]  # glyph indices rendered with an offset dot


def _tight_cols(bits: np.ndarray) -> tuple[np.ndarray, int]:
    cols = np.nonzero(bits.any(axis=0))[0]
    return bits[:, cols.min() : cols.max() + 1], int(cols.min())


def _stamp(canvas: np.ndarray, bits: np.ndarray, x: int, y: int) -> BoundingBox | None:
    h, w = bits.shape
    H, W = canvas.shape
    x0, y0 = max(0, x), max(0, y)
    x1, y1 = min(W, x + w), min(H, y + h)
    if x0 >= x1 or y0 >= y1:
        return None
    sub = bits[y0 - y : y1 - y, x0 - x : x1 - x]
    canvas[y0:y1, x0:x1] |= sub
    ys, xs = np.nonzero(canvas[y0:y1, x0:x1] & sub)
    if len(ys) == 0:
        return None
    return BoundingBox(x0 + int(xs.min()), y0 + int(ys.min()), x0 + int(xs.max()), y0 + int(ys.max()))


def _bridge(canvas: np.ndarray, left_box: BoundingBox, right_box: BoundingBox) -> None:
    """Draw an L-shaped 1-px connector so two touching glyphs share a component."""
    xa, xb = left_box.x_max, right_box.x_min
    ym = (max(left_box.y_min, right_box.y_min) + min(left_box.y_max, right_box.y_max)) // 2

    def connect_col(x, lo, hi):
        rows = np.nonzero(canvas[lo : hi + 1, x])[0]
        if len(rows) == 0:
            canvas[ym, x] = True
            return
        r = rows[np.argmin(np.abs(rows + lo - ym))] + lo
        a, b = sorted((r, ym))
        canvas[a : b + 1, x] = True

    connect_col(xa, left_box.y_min, left_box.y_max)
    canvas[ym, min(xa, xb) : max(xa, xb) + 1] = True
    connect_col(xb, right_box.y_min, right_box.y_max)


def render_page(spec: SyntheticSpec, rng: np.random.Generator) -> PageRender:
    s = spec.scale
    w0, h0 = font5x7.GLYPH_W * s, font5x7.GLYPH_H * s
    letter_gap = max(1, round(spec.letter_gap_factor * w0))
    word_gap = max(letter_gap + 1, round(spec.word_gap_factor * w0))
    pitch = round(spec.line_pitch_factor * h0)

    max_chars = max((len(line) for line in spec.lines), default=1)
    W = spec.margin * 2 + max_chars * (w0 + word_gap)
    H = spec.margin * 2 + len(spec.lines) * pitch + h0
    canvas = np.zeros((H, W), dtype=bool)

    glyphs: list[GroundTruthGlyph] = []
    fused: list[tuple[int, int]] = []
    dotted: list[int] = []
    text_lines: list[str] = []

    for li, line in enumerate(spec.lines):
        y0 = spec.margin + li * pitch
        x_cursor = spec.margin
        prev_idx = None  # previous glyph index within the current word
        out_chars: list[str] = []
        for ch in line:
            if ch == " ":
                x_cursor += word_gap - letter_gap
                prev_idx = None
                if out_chars and out_chars[-1] != " ":
                    out_chars.append(" ")
                continue
            if ch not in font5x7.FONT:
                continue
            dx = int(rng.integers(-spec.jitter, spec.jitter + 1)) if spec.jitter else 0
            dy = int(rng.integers(-spec.jitter, spec.jitter + 1)) if spec.jitter else 0

            fuse_here = (
                prev_idx is not None
                and ch not in font5x7.DOTTED
                and glyphs[prev_idx].char not in font5x7.DOTTED
                and rng.random() < spec.fuse_probability
            )
            split = font5x7.dot_split(ch, s)
            offset = 0
            if split is not None and spec.dot_offset:
                offset = int(rng.integers(-spec.dot_offset, spec.dot_offset + 1))

            if split is not None and offset != 0:
                dot_bits, stem_bits = split
                x = x_cursor + dx
                y = y0 + dy
                stem_box = _stamp(canvas, stem_bits, x, y)
                dot_box = _stamp(canvas, dot_bits, x + offset, y)
                if stem_box is None:
                    box = dot_box
                else:
                    box = stem_box.union(dot_box) if dot_box else stem_box
                if box is not None:
                    dotted.append(len(glyphs))
            else:
                bits = font5x7.glyph_bits(ch, s)
                tight, xoff = _tight_cols(bits)
                if fuse_here:
                    x = glyphs[prev_idx].box.x_max + 1 - 0  # touch: gap 0
                    y = y0 + dy
                    box = _stamp(canvas, tight, x, y)
                    if box is not None:
                        _bridge(canvas, glyphs[prev_idx].box, box)
                        fused.append((prev_idx, len(glyphs)))
                else:
                    x = x_cursor + dx
                    y = y0 + dy
                    box = _stamp(canvas, tight, x, y)
            if box is None:
                continue
            glyphs.append(GroundTruthGlyph(box=box, char=ch))
            out_chars.append(ch)
            prev_idx = len(glyphs) - 1
            x_cursor = box.x_max + 1 + letter_gap
        text_lines.append("".join(out_chars).strip())

    if spec.dilate:
        canvas = ndimage.binary_dilation(canvas, structure=np.ones((2, 2), dtype=bool))
        glyphs = [GroundTruthGlyph(box=_dilated_box(g.box, canvas), char=g.char) for g in glyphs]
    for _ in range(spec.speck_count):
        sy = int(rng.integers(0, H))
        sx = int(rng.integers(0, W))
        canvas[sy, sx] = True

    return PageRender(page=BinaryRaster(canvas), glyphs=glyphs, text="\n".join(text_lines),
                      fused_pairs=fused, dotted=dotted)


def _dilated_box(b: BoundingBox, canvas: np.ndarray) -> BoundingBox:
    h, w = canvas.shape
    return BoundingBox(max(0, b.x_min - 1), max(0, b.y_min - 1), min(w - 1, b.x_max + 1), min(h - 1, b.y_max + 1))


def random_lines(rng: np.random.Generator, n_lines: int = 3, words_per_line: int = 3,
                 word_len: tuple[int, int] = (3, 6), alphabet: str = LETTERS) -> list[str]:
    lines = []
    for _ in range(n_lines):
        words = []
        for _ in range(words_per_line):
            k = int(rng.integers(word_len[0], word_len[1] + 1))
            words.append("".join(alphabet[i] for i in rng.integers(0, len(alphabet), size=k)))
        lines.append(" ".join(words))
    return lines


def ground_truth_json(render: PageRender) -> str:
    return json.dumps(
        {
            "text": render.text,
            "glyphs": [{"box": g.box.as_list(), "char": g.char} for g in render.glyphs],
            "fused_pairs": [list(p) for p in render.fused_pairs],
            "dotted": render.dotted,
        },
        indent=2,
    )


def gen_corpus(out_dir, pages: int, seed: int = 0, fuse_probability: float = 0.0,
               dot_offset: int = 0, jitter: int = 1, scale: int = 4) -> list[str]:
    """Write page PNGs plus per-page ground-truth JSON; returns page ids."""
    os.makedirs(out_dir, exist_ok=True)
    rng = np.random.default_rng(seed)
    ids = []
    for i in range(pages):
        spec = SyntheticSpec(
            lines=random_lines(rng),
            scale=scale,
            jitter=jitter,
            fuse_probability=fuse_probability,
            dot_offset=dot_offset,
        )
        render = render_page(spec, rng)
        pid = f"page{i:04d}"
        save_png(render.page, os.path.join(out_dir, f"{pid}.png"))
        with open(os.path.join(out_dir, f"{pid}.json"), "w") as f:
            f.write(ground_truth_json(render))
        ids.append(pid)
    return ids


def gen_detector_corpus(out_dir, per_class: int = 100, seed: int = 0, scale: int = 3) -> None:
    """Two-class page corpus: clean/regular strokes vs jittered/noisy/thick."""
    rng = np.random.default_rng(seed)
    classes = {
        "low potential dysgraphia": dict(jitter=0, speck_count=0, dilate=False),
        "potential dysgraphia": dict(jitter=4, speck_count=60, dilate=True),
    }
    for name, style in classes.items():
        cdir = os.path.join(out_dir, name)
        os.makedirs(cdir, exist_ok=True)
        for i in range(per_class):
            spec = SyntheticSpec(lines=random_lines(rng, n_lines=4, words_per_line=2),
                                 scale=scale, **style)
            render = render_page(spec, rng)
            save_png(render.page, os.path.join(cdir, f"sample{i:04d}.png"))


def glyph_training_samples(per_class: int = 40, seed: int = 0, scale: int = 4, letters: str = LETTERS):
    """One-page-per-letter renders yielding `per_class` jittered samples each,
    normalized through the segmenter; returns list of CharSample labeled by
    position in the full alphabet."""
    from .ocr import CharSample
    from .segmenter import SegmenterConfig, normalize_glyph, segment_page

    rng = np.random.default_rng(seed)
    cfg = SegmenterConfig()
    samples = []
    for ch in letters:
        label = LETTERS.index(ch)
        for _ in range(per_class):
            spec = SyntheticSpec(lines=[ch], scale=scale, jitter=2)
            render = render_page(spec, rng)
            pairs = segment_page(render.page, cfg)
            if len(pairs) != 1:
                # dotted letters may stay split on a lone-glyph page (no medians
                # to judge by); normalize the ground-truth box directly instead
                glyph = normalize_glyph(render.page, render.glyphs[0].box, cfg)
            else:
                glyph = pairs[0][1]
            samples.append(CharSample(glyph=glyph, label=label))
    return samples
