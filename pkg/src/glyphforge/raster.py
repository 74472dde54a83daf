"""Pixel-level substrate: grayscale/binary rasters, boxes, components, resizing."""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy import ndimage

from .errors import DecodeError, EmptyRegion, IoError, OutOfBounds

# ITU-R 601 luma weights, fixed for determinism
_LUMA = np.array([0.299, 0.587, 0.114])

_EIGHT = np.ones((3, 3), dtype=int)


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box with inclusive pixel coordinates."""

    x_min: int
    y_min: int
    x_max: int
    y_max: int

    def __post_init__(self):
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ValueError(f"degenerate box {self}")

    def width(self) -> int:
        return self.x_max - self.x_min + 1

    def height(self) -> int:
        return self.y_max - self.y_min + 1

    def area(self) -> int:
        return self.width() * self.height()

    def union(self, other: "BoundingBox") -> "BoundingBox":
        return BoundingBox(
            min(self.x_min, other.x_min),
            min(self.y_min, other.y_min),
            max(self.x_max, other.x_max),
            max(self.y_max, other.y_max),
        )

    def iou(self, other: "BoundingBox") -> float:
        ix0 = max(self.x_min, other.x_min)
        iy0 = max(self.y_min, other.y_min)
        ix1 = min(self.x_max, other.x_max)
        iy1 = min(self.y_max, other.y_max)
        if ix0 > ix1 or iy0 > iy1:
            return 0.0
        inter = (ix1 - ix0 + 1) * (iy1 - iy0 + 1)
        return inter / (self.area() + other.area() - inter)

    def as_list(self) -> list[int]:
        return [self.x_min, self.y_min, self.x_max, self.y_max]

    @staticmethod
    def from_list(v) -> "BoundingBox":
        return BoundingBox(int(v[0]), int(v[1]), int(v[2]), int(v[3]))


class Raster:
    """Grayscale image; row-major uint8 luminance values."""

    __slots__ = ("a",)

    def __init__(self, a: np.ndarray):
        a = np.asarray(a, dtype=np.uint8)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError("Raster needs a 2-D array with positive dims")
        self.a = a

    @property
    def width(self) -> int:
        return self.a.shape[1]

    @property
    def height(self) -> int:
        return self.a.shape[0]

    def __eq__(self, other):
        return isinstance(other, Raster) and np.array_equal(self.a, other.a)


class BinaryRaster:
    """Binary image; True = foreground ink."""

    __slots__ = ("bits",)

    def __init__(self, bits: np.ndarray):
        bits = np.asarray(bits, dtype=bool)
        if bits.ndim != 2 or bits.shape[0] < 1 or bits.shape[1] < 1:
            raise ValueError("BinaryRaster needs a 2-D array with positive dims")
        self.bits = bits

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    def __eq__(self, other):
        return isinstance(other, BinaryRaster) and np.array_equal(self.bits, other.bits)


def load_image(path) -> Raster:
    """Decode a JPEG/PNG into a luminance raster (ITU-R 601 weights, rounded)."""
    if not os.path.exists(path):
        raise IoError(f"no such file: {path}")
    try:
        with Image.open(path) as im:
            if im.mode == "L":
                return Raster(np.asarray(im))
            rgb = np.asarray(im.convert("RGB"), dtype=np.float64)
    except UnidentifiedImageError as e:
        raise DecodeError(f"cannot decode {path}: {e}") from e
    except OSError as e:
        raise IoError(f"cannot read {path}: {e}") from e
    luma = np.rint(rgb @ _LUMA)
    return Raster(np.clip(luma, 0, 255).astype(np.uint8))


def save_png(img, path) -> None:
    if isinstance(img, BinaryRaster):
        arr = np.where(img.bits, 255, 0).astype(np.uint8)
    elif isinstance(img, Raster):
        arr = img.a
    else:
        arr = np.asarray(img, dtype=np.uint8)
    Image.fromarray(arr).save(path, format="PNG")


def binarize(img: Raster, threshold: int = 128, foreground_is_light: bool = True) -> BinaryRaster:
    """Threshold at `threshold`; pixels >= threshold are foreground when light ink."""
    if foreground_is_light:
        return BinaryRaster(img.a >= threshold)
    return BinaryRaster(img.a < threshold)


def invert(img: BinaryRaster) -> BinaryRaster:
    return BinaryRaster(~img.bits)


def connected_components(img: BinaryRaster) -> list[tuple[BoundingBox, int]]:
    """Tight boxes and pixel counts of maximal 8-connected foreground regions,
    sorted by (y_min, x_min)."""
    labels, n = ndimage.label(img.bits, structure=_EIGHT)
    if n == 0:
        return []
    counts = np.bincount(labels.ravel())
    out = []
    for i, sl in enumerate(ndimage.find_objects(labels), start=1):
        ys, xs = sl
        box = BoundingBox(xs.start, ys.start, xs.stop - 1, ys.stop - 1)
        out.append((box, int(counts[i])))
    out.sort(key=lambda bc: (bc[0].y_min, bc[0].x_min))
    return out


def crop(img: BinaryRaster, box: BoundingBox) -> BinaryRaster:
    if box.x_min < 0 or box.y_min < 0 or box.x_max >= img.width or box.y_max >= img.height:
        raise OutOfBounds(f"box {box} outside {img.width}x{img.height} raster")
    return BinaryRaster(img.bits[box.y_min : box.y_max + 1, box.x_min : box.x_max + 1])


def trim_whitespace(img: BinaryRaster) -> tuple[BinaryRaster, BoundingBox]:
    """Tight crop around all foreground ink plus the tight box in input coords."""
    ys, xs = np.nonzero(img.bits)
    if len(ys) == 0:
        raise EmptyRegion("no foreground pixels to trim to")
    box = BoundingBox(int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max()))
    return crop(img, box), box


def trim_in_page(page: BinaryRaster, box: BoundingBox) -> BoundingBox | None:
    """Tight box of the ink inside `box`, in page coordinates; None if empty."""
    sub = crop(page, box)
    ys, xs = np.nonzero(sub.bits)
    if len(ys) == 0:
        return None
    return BoundingBox(
        box.x_min + int(xs.min()),
        box.y_min + int(ys.min()),
        box.x_min + int(xs.max()),
        box.y_min + int(ys.max()),
    )


def _resize_array(a: np.ndarray, w: int, h: int) -> np.ndarray:
    """Bilinear resize with corner-aligned sampling; float in, float out."""
    sh, sw = a.shape
    if (sw, sh) == (w, h):
        return a.astype(np.float64, copy=True)
    xs = np.linspace(0.0, sw - 1, w) if w > 1 else np.zeros(1)
    ys = np.linspace(0.0, sh - 1, h) if h > 1 else np.zeros(1)
    x0 = np.floor(xs).astype(int)
    y0 = np.floor(ys).astype(int)
    x1 = np.minimum(x0 + 1, sw - 1)
    y1 = np.minimum(y0 + 1, sh - 1)
    fx = xs - x0
    fy = ys - y0
    a = a.astype(np.float64)
    top = a[y0[:, None], x0] * (1 - fx) + a[y0[:, None], x1] * fx
    bot = a[y1[:, None], x0] * (1 - fx) + a[y1[:, None], x1] * fx
    return top * (1 - fy)[:, None] + bot * fy[:, None]


def resize(img: Raster, w: int, h: int) -> Raster:
    """Bilinear, corner-aligned resize to w x h."""
    if w < 1 or h < 1:
        raise ValueError("target dims must be >= 1")
    out = np.rint(_resize_array(img.a, w, h))
    return Raster(np.clip(out, 0, 255).astype(np.uint8))


def resize_binary(img: BinaryRaster, w: int, h: int) -> BinaryRaster:
    """Bilinear scale of the 0/1 field, re-binarized at 0.5 occupancy."""
    out = _resize_array(img.bits.astype(np.float64), w, h) >= 0.5
    if not out.any():
        # degenerate downscale: keep the strongest sample so content survives
        f = _resize_array(img.bits.astype(np.float64), w, h)
        out[np.unravel_index(np.argmax(f), f.shape)] = True
    return BinaryRaster(out)
