"""Independent brute-force oracles used by the tests. These deliberately share
no code with the library paths they check."""
from __future__ import annotations

import numpy as np


def flood_fill_components(bits: np.ndarray) -> list[tuple[tuple[int, int, int, int], int]]:
    """8-connected components by explicit BFS flood fill.
    Returns [((x_min, y_min, x_max, y_max), pixel_count)] sorted by (y_min, x_min)."""
    h, w = bits.shape
    seen = np.zeros_like(bits, dtype=bool)
    out = []
    for sy in range(h):
        for sx in range(w):
            if not bits[sy, sx] or seen[sy, sx]:
                continue
            stack = [(sy, sx)]
            seen[sy, sx] = True
            xs, ys = [], []
            count = 0
            while stack:
                y, x = stack.pop()
                count += 1
                xs.append(x)
                ys.append(y)
                for dy in (-1, 0, 1):
                    for dx in (-1, 0, 1):
                        ny, nx = y + dy, x + dx
                        if 0 <= ny < h and 0 <= nx < w and bits[ny, nx] and not seen[ny, nx]:
                            seen[ny, nx] = True
                            stack.append((ny, nx))
            out.append(((min(xs), min(ys), max(xs), max(ys)), count))
    out.sort(key=lambda bc: (bc[0][1], bc[0][0]))
    return out


def pairwise_auc(scores, labels) -> float:
    """All-pairs Mann-Whitney: fraction of (pos, neg) pairs ranked correctly,
    ties worth one half."""
    pos = [s for s, l in zip(scores, labels) if l == 1]
    neg = [s for s, l in zip(scores, labels) if l == 0]
    total = 0.0
    for p in pos:
        for n in neg:
            if p > n:
                total += 1.0
            elif p == n:
                total += 0.5
    return total / (len(pos) * len(neg))


def edit_distance_matrix(a: str, b: str) -> int:
    """Full-matrix Levenshtein DP, unit costs."""
    n, m = len(a), len(b)
    d = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        d[i][0] = i
    for j in range(m + 1):
        d[0][j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            d[i][j] = min(
                d[i - 1][j] + 1,
                d[i][j - 1] + 1,
                d[i - 1][j - 1] + (a[i - 1] != b[j - 1]),
            )
    return d[n][m]


def enumerate_row_partitions(y_mins: list[int], threshold: float) -> list[list[list[int]]]:
    """All contiguous partitions of the y-sorted indices that are consistent
    with the grouping rule: within-row consecutive jumps <= threshold, and
    jumps across a row boundary > threshold."""
    order = sorted(range(len(y_mins)), key=lambda i: y_mins[i])
    n = len(order)
    valid = []

    def rec(start, rows):
        if start == n:
            valid.append([list(r) for r in rows])
            return
        for end in range(start + 1, n + 1):
            row = order[start:end]
            if any(y_mins[row[k + 1]] - y_mins[row[k]] > threshold for k in range(len(row) - 1)):
                break
            if end < n and y_mins[order[end]] - y_mins[order[end - 1]] <= threshold:
                continue
            rec(end, rows + [row])

    rec(0, [])
    return valid


def brute_pool2x2(x: np.ndarray) -> np.ndarray:
    """Max over each non-overlapping 2x2 block by explicit loops; (H, W) in."""
    h, w = x.shape
    out = np.empty((h // 2, w // 2))
    for i in range(h // 2):
        for j in range(w // 2):
            out[i, j] = max(x[2 * i, 2 * j], x[2 * i, 2 * j + 1], x[2 * i + 1, 2 * j], x[2 * i + 1, 2 * j + 1])
    return out


def numeric_gradient(f, param: np.ndarray, eps: float = 1e-3) -> np.ndarray:
    """Central finite differences of scalar f() w.r.t. param, in place."""
    g = np.zeros_like(param)
    flat = param.reshape(-1)
    gflat = g.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        fp = f()
        flat[i] = orig - eps
        fm = f()
        flat[i] = orig
        gflat[i] = (fp - fm) / (2 * eps)
    return g
