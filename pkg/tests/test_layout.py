import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from glyphforge.layout import NEWLINE, SPACE, GlyphRef, LayoutConfig, group_rows, insert_spaces, linearize, sort_row
from glyphforge.raster import BoundingBox

from oracles import enumerate_row_partitions


def box(x0, y0, x1, y1):
    return BoundingBox(x0, y0, x1, y1)


class TestGroupRows:
    def test_hand_walk(self):
        boxes = [box(0, t, 5, t + 9) for t in (0, 2, 40, 41)]
        rows = group_rows(boxes, 10)
        assert rows == [[0, 1], [2, 3]]

    def test_single_box(self):
        assert group_rows([box(0, 5, 3, 9)], 10) == [[0]]

    def test_equal_tops_one_row(self):
        boxes = [box(i * 10, 7, i * 10 + 5, 16) for i in range(4)]
        assert group_rows(boxes, 10) == [[0, 1, 2, 3]]


class TestSortRow:
    def test_by_x(self):
        boxes = [box(30, 0, 35, 5), box(0, 0, 5, 5), box(10, 0, 15, 5)]
        assert sort_row([0, 1, 2], boxes) == [1, 2, 0]

    def test_idempotent(self):
        boxes = [box(0, 0, 5, 5), box(10, 0, 15, 5)]
        assert sort_row(sort_row([0, 1], boxes), boxes) == [0, 1]

    def test_tie_by_y(self):
        boxes = [box(5, 9, 8, 12), box(5, 3, 8, 6)]
        assert sort_row([0, 1], boxes) == [1, 0]


class TestInsertSpaces:
    def test_gap_arithmetic(self):
        boxes = [box(0, 0, 8, 9), box(10, 0, 18, 9), box(31, 0, 39, 9)]
        toks = insert_spaces([0, 1, 2], boxes, 9)
        assert toks == [GlyphRef(0), GlyphRef(1), SPACE, GlyphRef(2)]

    def test_overlap_no_space(self):
        boxes = [box(0, 0, 20, 9), box(5, 0, 25, 9)]
        assert SPACE not in insert_spaces([0, 1], boxes, 3)

    def test_single_box(self):
        assert insert_spaces([0], [box(0, 0, 5, 5)], 9) == [GlyphRef(0)]


class TestLinearize:
    def test_empty(self):
        assert linearize([], 10, 10) == []

    def test_single(self):
        assert linearize([box(0, 0, 5, 5)], 10, 10) == [GlyphRef(0)]

    def test_three_lines_with_words(self):
        boxes = []
        for line in range(3):
            y = line * 40
            for w in range(2):  # two words of two glyphs
                x0 = w * 60
                boxes.append(box(x0, y, x0 + 9, y + 9))
                boxes.append(box(x0 + 12, y, x0 + 21, y + 9))
        stream = linearize(boxes, 10, 10)
        assert stream.count(NEWLINE) == 2
        assert stream.count(SPACE) == 3

    def test_permutation_and_monotonicity(self, rng):
        boxes = [box(int(x), int(y), int(x) + 8, int(y) + 8)
                 for x, y in zip(rng.integers(0, 200, 20), rng.integers(0, 200, 20))]
        stream = linearize(boxes, 9, 9)
        refs = [t.index for t in stream if isinstance(t, GlyphRef)]
        assert sorted(refs) == list(range(20))
        rows = [[]]
        for t in stream:
            if t == NEWLINE:
                rows.append([])
            elif isinstance(t, GlyphRef):
                rows[-1].append(t.index)
        row_tops = [min(boxes[i].y_min for i in r) for r in rows]
        assert row_tops == sorted(row_tops) and len(set(row_tops)) == len(row_tops)
        for r in rows:
            xs = [boxes[i].x_min for i in r]
            assert xs == sorted(xs)

    def test_translation_invariance(self, rng):
        boxes = [box(int(x), int(y), int(x) + 8, int(y) + 8)
                 for x, y in zip(rng.integers(0, 150, 12), rng.integers(0, 150, 12))]
        shifted = [box(b.x_min + 37, b.y_min + 91, b.x_max + 37, b.y_max + 91) for b in boxes]
        assert linearize(boxes, 9, 9) == linearize(shifted, 9, 9)

    def test_stream_invariants(self, rng):
        boxes = [box(int(x), int(y), int(x) + 8, int(y) + 8)
                 for x, y in zip(rng.integers(0, 300, 15), rng.integers(0, 300, 15))]
        stream = linearize(boxes, 9, 9)
        for a, b in zip(stream, stream[1:]):
            assert not (a == SPACE and b == SPACE)
            assert not (a == SPACE and b == NEWLINE)
            assert not (a == NEWLINE and b == SPACE)
        assert not stream or (stream[0] != SPACE and stream[-1] != SPACE)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 120), st.integers(0, 120)), min_size=1, max_size=8),
       st.integers(5, 15))
def test_group_rows_matches_partition_oracle(coords, median_h):
    boxes = [BoundingBox(x, y, x + 5, y + 5) for x, y in coords]
    got = group_rows(boxes, median_h)
    valid = enumerate_row_partitions([b.y_min for b in boxes], 1.5 * median_h)
    assert len(valid) == 1
    got_sets = [sorted(r) for r in got]
    want_sets = [sorted(r) for r in valid[0]]
    assert got_sets == want_sets
