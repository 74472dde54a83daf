"""Reading order: row grouping, left-to-right sorting, space inference."""
from __future__ import annotations

from dataclasses import dataclass

from .raster import BoundingBox

SPACE = " "
NEWLINE = "\n"


@dataclass(frozen=True)
class GlyphRef:
    index: int


Token = "GlyphRef | str"


@dataclass
class LayoutConfig:
    row_factor: float = 1.5
    gap_factor: float = 1.0


def group_rows(boxes: list[BoundingBox], median_height: int, cfg: LayoutConfig | None = None) -> list[list[int]]:
    """Walk boxes in y_min order; start a new row when the jump in y_min
    exceeds row_factor * median_height."""
    cfg = cfg or LayoutConfig()
    if not boxes:
        return []
    order = sorted(range(len(boxes)), key=lambda i: (boxes[i].y_min, boxes[i].x_min))
    thr = cfg.row_factor * median_height
    rows = [[order[0]]]
    for prev, cur in zip(order, order[1:]):
        if boxes[cur].y_min - boxes[prev].y_min > thr:
            rows.append([cur])
        else:
            rows[-1].append(cur)
    return rows


def sort_row(row: list[int], boxes: list[BoundingBox]) -> list[int]:
    return sorted(row, key=lambda i: (boxes[i].x_min, boxes[i].y_min))


def insert_spaces(row: list[int], boxes: list[BoundingBox], median_width: int, cfg: LayoutConfig | None = None):
    """Emit Space between consecutive boxes whose gap exceeds
    gap_factor * median_width; overlaps never produce a space."""
    cfg = cfg or LayoutConfig()
    tokens: list = []
    for k, i in enumerate(row):
        if k > 0:
            prev = boxes[row[k - 1]]
            gap = boxes[i].x_min - prev.x_max - 1
            if gap > cfg.gap_factor * median_width:
                tokens.append(SPACE)
        tokens.append(GlyphRef(i))
    return tokens


def linearize(boxes: list[BoundingBox], median_width: int, median_height: int, cfg: LayoutConfig | None = None):
    """Rows top-to-bottom, left-to-right within rows, Newline between rows."""
    cfg = cfg or LayoutConfig()
    stream: list = []
    for r, row in enumerate(group_rows(boxes, median_height, cfg)):
        if r > 0:
            stream.append(NEWLINE)
        stream.extend(insert_spaces(sort_row(row, boxes), boxes, median_width, cfg))
    return stream


def stream_text(stream, letters: dict[int, str]) -> str:
    """Render a token stream to text given per-glyph letters."""
    out = []
    for t in stream:
        out.append(letters[t.index] if isinstance(t, GlyphRef) else t)
    return "".join(out)
