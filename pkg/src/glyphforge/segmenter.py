"""Character segmentation: component boxes, wide-box splitting, dot-stem merging,
and normalization to 40x40 white-on-black glyphs."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyInput, EmptyRegion
from .raster import BinaryRaster, BoundingBox, connected_components, crop, resize_binary, trim_in_page, trim_whitespace


@dataclass
class SegmenterConfig:
    split_factor: float = 1.5
    dot_height_factor: float = 0.5
    dot_width_factor: float = 0.5
    dot_search_slack: float = 0.5
    dot_vertical_range: float = 1.5  # stem search depth, x median height
    min_component_pixels: int = 3
    glyph_size: int = 40


@dataclass
class Glyph:
    image: BinaryRaster  # glyph_size x glyph_size, True = ink
    source_box: BoundingBox  # page coordinates
    page_id: str = ""


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def median_dims(boxes: list[BoundingBox]) -> tuple[int, int]:
    """Median width and height; even counts use the mean of the middle pair,
    rounded half up."""
    if not boxes:
        raise EmptyInput("median over no boxes")

    def med(vals):
        vals = sorted(vals)
        n = len(vals)
        if n % 2 == 1:
            return vals[n // 2]
        return _round_half_up((vals[n // 2 - 1] + vals[n // 2]) / 2)

    return med([b.width() for b in boxes]), med([b.height() for b in boxes])


def extract_boxes(page: BinaryRaster, cfg: SegmenterConfig | None = None) -> list[BoundingBox]:
    """Component boxes above the noise floor, plus sub-threshold dot candidates
    (kept so dot merging can claim them), in (y_min, x_min) order."""
    boxes, _, _ = extract_boxes_with_medians(page, cfg)
    return boxes


def extract_boxes_with_medians(
    page: BinaryRaster, cfg: SegmenterConfig | None = None
) -> tuple[list[BoundingBox], int, int]:
    """Like extract_boxes, plus the median width and height of the components at
    or above the noise floor. Sub-threshold candidates do not shift the medians."""
    cfg = cfg or SegmenterConfig()
    comps = connected_components(page)
    big = [(b, c) for b, c in comps if c >= cfg.min_component_pixels]
    if not big:
        return [], 0, 0
    mw, mh = median_dims([b for b, _ in big])
    out = [b for b, _ in big]
    for b, c in comps:
        if c < cfg.min_component_pixels and _is_dot_candidate(b, mw, mh, cfg):
            out.append(b)
    out.sort(key=lambda b: (b.y_min, b.x_min))
    return out, mw, mh


def _is_dot_candidate(b: BoundingBox, median_width: int, median_height: int, cfg: SegmenterConfig) -> bool:
    return b.height() < cfg.dot_height_factor * median_height and b.width() < cfg.dot_width_factor * median_width


def merge_dotted(
    page: BinaryRaster,
    boxes: list[BoundingBox],
    median_width: int,
    median_height: int,
    cfg: SegmenterConfig | None = None,
) -> list[BoundingBox]:
    """Attach each detached dot to the minimum-width stem box below it; dots
    with no stem in range are dropped as noise."""
    cfg = cfg or SegmenterConfig()
    boxes = sorted(boxes, key=lambda b: (b.y_min, b.x_min))
    dot_idx = [i for i, b in enumerate(boxes) if _is_dot_candidate(b, median_width, median_height, cfg)]
    keep: list[BoundingBox | None] = list(boxes)
    used_stems: set[int] = set()
    slack = cfg.dot_search_slack * median_width
    for di in dot_idx:
        dot = keep[di]
        if dot is None or dot != boxes[di]:  # consumed or already merged into
            continue
        cands = []
        for j, b in enumerate(keep):
            if b is None or j == di or j in used_stems:
                continue
            if b.y_min <= dot.y_max:
                continue
            if b.y_min - dot.y_max > cfg.dot_vertical_range * median_height:
                continue  # stems live just below their dot, not rows away
            if _is_dot_candidate(b, median_width, median_height, cfg):
                continue  # another dot is never a stem
            if b.x_max + slack < dot.x_min or b.x_min - slack > dot.x_max:
                continue
            direct = b.x_max >= dot.x_min and b.x_min <= dot.x_max
            cands.append((direct, j, b))
        if not cands:
            keep[di] = None  # stray dot, no stem: noise
            continue
        # the slack-widened search is a fallback; a directly overlapping stem
        # always beats a neighbor reached only through slack
        if any(d for d, _, _ in cands):
            cands = [(d, j, b) for d, j, b in cands if d]
        cands = [(j, b) for _, j, b in cands]
        dcx = (dot.x_min + dot.x_max) / 2

        def rank(jb):
            _, b = jb
            bcx = (b.x_min + b.x_max) / 2
            return (b.width(), abs(bcx - dcx), b.y_min)

        j, stem = min(cands, key=rank)
        union = dot.union(stem)
        trimmed = trim_in_page(page, union)
        keep[j] = trimmed if trimmed is not None else union
        keep[di] = None
        used_stems.add(j)
    out = [b for b in keep if b is not None]
    out.sort(key=lambda b: (b.y_min, b.x_min))
    return out


def split_wide_boxes(
    page: BinaryRaster,
    boxes: list[BoundingBox],
    median_width: int,
    cfg: SegmenterConfig | None = None,
) -> list[BoundingBox]:
    """Cut boxes wider than split_factor * median into round(width/median)
    equal slices (min 2), trimming each slice to its ink."""
    cfg = cfg or SegmenterConfig()
    out = []
    for b in boxes:
        w = b.width()
        if w <= cfg.split_factor * median_width:
            out.append(b)
            continue
        n = max(2, _round_half_up(w / median_width))
        start = 0
        for i in range(n):
            end = (w - 1) if i == n - 1 else math.floor((i + 1) * w / n)
            if end < start:
                continue
            piece = BoundingBox(b.x_min + start, b.y_min, b.x_min + end, b.y_max)
            trimmed = trim_in_page(page, piece)
            if trimmed is not None:
                out.append(trimmed)
            start = end + 1
    out.sort(key=lambda b: (b.y_min, b.x_min))
    return out


def normalize_glyph(page: BinaryRaster, box: BoundingBox, cfg: SegmenterConfig | None = None, page_id: str = "") -> Glyph:
    """Tight-trim, aspect-preserving scale to the glyph square, center."""
    cfg = cfg or SegmenterConfig()
    g = cfg.glyph_size
    tight, rel = trim_whitespace(crop(page, box))  # raises EmptyRegion if blank
    tw, th = tight.width, tight.height
    s = g / max(tw, th)
    sw = max(1, _round_half_up(tw * s))
    sh = max(1, _round_half_up(th * s))
    scaled = resize_binary(tight, sw, sh)
    canvas = np.zeros((g, g), dtype=bool)
    left = (g - sw) // 2
    top = (g - sh) // 2
    canvas[top : top + sh, left : left + sw] = scaled.bits
    src = BoundingBox(
        box.x_min + rel.x_min, box.y_min + rel.y_min, box.x_min + rel.x_max, box.y_min + rel.y_max
    )
    return Glyph(image=BinaryRaster(canvas), source_box=src, page_id=page_id)


def segment_page(page: BinaryRaster, cfg: SegmenterConfig | None = None, page_id: str = "") -> list[tuple[BoundingBox, Glyph]]:
    """Full pipeline: components -> medians -> dot merge -> wide split -> glyphs.

    Dot merging runs before splitting so a dot over a fused cluster joins its
    stem before the cluster is cut.
    """
    cfg = cfg or SegmenterConfig()
    boxes, mw, mh = extract_boxes_with_medians(page, cfg)
    if not boxes:
        return []
    boxes = merge_dotted(page, boxes, mw, mh, cfg)
    boxes = split_wide_boxes(page, boxes, mw, cfg)
    out = []
    for b in boxes:
        t = trim_in_page(page, b)
        if t is None:
            continue
        try:
            glyph = normalize_glyph(page, t, cfg, page_id)
        except EmptyRegion:
            continue
        out.append((t, glyph))
    out.sort(key=lambda bg: (bg[0].y_min, bg[0].x_min))
    return out
