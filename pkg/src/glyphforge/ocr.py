"""Character recognition: glyph dataset with augmentation, charnet training,
full-page OCR with annotation, and character-level accuracy."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import font5x7
from .errors import BoxOutsidePage, ClassTooSmall, EmptyReference, EmptyStore, UnknownLabel
from .layout import NEWLINE, SPACE, GlyphRef, LayoutConfig, linearize
from .neuralnet import Adam, Model, categorical_cross_entropy, check_finite
from .raster import BinaryRaster, BoundingBox, Raster, load_image
from .segmenter import Glyph, SegmenterConfig, median_dims, segment_page

LETTERS = "abcdefghijklmnopqrstuvwxyz"


@dataclass
class AugmentConfig:
    rotate_probability: float = 0.3
    rotate_range_degrees: float = 15.0
    blur_probability: float = 0.3
    seed: int = 0


@dataclass
class CharSample:
    glyph: Glyph
    label: int  # 0..25


@dataclass
class CharDataset:
    samples: list[CharSample]
    train_idx: list[int]
    test_idx: list[int]
    seed: int = 0


@dataclass
class Annotation:
    index: int  # 1-based reading order
    box: BoundingBox
    letter: str
    confidence: float


@dataclass
class OcrResult:
    text: str
    annotations: list[Annotation]

    def to_json(self) -> str:
        return json.dumps(
            {
                "text": self.text,
                "annotations": [
                    {"index": a.index, "box": a.box.as_list(), "letter": a.letter,
                     "confidence": round(a.confidence, 6)}
                    for a in self.annotations
                ],
            },
            indent=2,
        )


# ---------------------------------------------------------------------------
# augmentation

def _recenter(bits: np.ndarray) -> np.ndarray:
    """Tight-trim the content and re-center it on the same-size canvas."""
    ys, xs = np.nonzero(bits)
    if len(ys) == 0:
        return bits
    g = bits.shape[0]
    content = bits[ys.min() : ys.max() + 1, xs.min() : xs.max() + 1]
    h, w = content.shape
    out = np.zeros_like(bits)
    top, left = (g - h) // 2, (g - w) // 2
    out[top : top + h, left : left + w] = content
    return out


def rotate_bits(bits: np.ndarray, degrees: float) -> np.ndarray:
    """Bilinear rotation about the center, re-binarized at 0.5."""
    if degrees == 0:
        return bits.copy()
    f = ndimage.rotate(bits.astype(np.float64), degrees, reshape=False, order=1, cval=0.0)
    return f >= 0.5


def blur_bits(bits: np.ndarray) -> np.ndarray:
    """3x3 box blur, re-binarized at 0.5."""
    f = ndimage.uniform_filter(bits.astype(np.float64), size=3, mode="constant", cval=0.0)
    return f >= 0.5


def augment(glyph: Glyph, cfg: AugmentConfig, rng: np.random.Generator) -> Glyph:
    bits = glyph.image.bits
    if rng.random() < cfg.rotate_probability:
        angle = rng.uniform(-cfg.rotate_range_degrees, cfg.rotate_range_degrees)
        bits = _recenter(rotate_bits(bits, angle))
    if rng.random() < cfg.blur_probability:
        bits = blur_bits(bits)
    if not bits.any():
        return glyph
    return Glyph(image=BinaryRaster(_recenter(bits)), source_box=glyph.source_box, page_id=glyph.page_id)


# ---------------------------------------------------------------------------
# dataset

def _stratified_split(labels: list[int], test_frac: float, rng: np.random.Generator) -> tuple[list[int], list[int]]:
    train, test = [], []
    by_class: dict[int, list[int]] = {}
    for i, lab in enumerate(labels):
        by_class.setdefault(lab, []).append(i)
    for lab in sorted(by_class):
        idxs = by_class[lab]
        order = rng.permutation(len(idxs))
        n_test = int(len(idxs) * test_frac)
        test.extend(idxs[i] for i in order[:n_test])
        train.extend(idxs[i] for i in order[n_test:])
    return sorted(train), sorted(test)


def make_char_dataset(samples: list[CharSample], seed: int = 0, test_frac: float = 0.2) -> CharDataset:
    if not samples:
        raise EmptyStore("no labeled glyphs")
    for s in samples:
        if not 0 <= s.label < 26:
            raise UnknownLabel(f"label {s.label} out of a-z range")
    rng = np.random.default_rng(seed)
    train, test = _stratified_split([s.label for s in samples], test_frac, rng)
    return CharDataset(samples=samples, train_idx=train, test_idx=test, seed=seed)


def build_char_dataset(records, pages: dict[str, BinaryRaster], seg_cfg: SegmenterConfig | None = None,
                       seed: int = 0, test_frac: float = 0.2) -> CharDataset:
    """From active label records: re-derive each glyph from its page + box."""
    from .segmenter import normalize_glyph

    seg_cfg = seg_cfg or SegmenterConfig()
    samples = []
    for rec in records:
        letter = rec["letter"]
        if letter not in LETTERS:
            raise UnknownLabel(f"letter {letter!r} not in a-z")
        page = pages[rec["page"]]
        glyph = normalize_glyph(page, BoundingBox.from_list(rec["box"]), seg_cfg, page_id=rec["page"])
        samples.append(CharSample(glyph=glyph, label=LETTERS.index(letter)))
    return make_char_dataset(samples, seed=seed, test_frac=test_frac)


def load_export_dir(path, seg_cfg: SegmenterConfig | None = None) -> list[CharSample]:
    """Read a dataset-export directory (letter folders + manifest.json)."""
    seg_cfg = seg_cfg or SegmenterConfig()
    manifest_path = os.path.join(path, "manifest.json")
    if not os.path.exists(manifest_path):
        raise EmptyStore(f"no manifest.json under {path}")
    with open(manifest_path) as f:
        manifest = json.load(f)
    samples = []
    for row in manifest:
        letter = row["letter"]
        if letter not in LETTERS:
            raise UnknownLabel(f"letter {letter!r} not in a-z")
        img = load_image(os.path.join(path, row["file"]))
        bits = img.a >= 128
        glyph = Glyph(image=BinaryRaster(bits), source_box=BoundingBox.from_list(row["box"]),
                      page_id=row.get("page", ""))
        samples.append(CharSample(glyph=glyph, label=LETTERS.index(letter)))
    return samples


# ---------------------------------------------------------------------------
# training

@dataclass
class CharnetReport:
    test_accuracy: float
    test_loss: float
    confusion: np.ndarray  # (26, 26), rows = true


def _glyph_batch(samples: list[CharSample], idxs, aug: AugmentConfig | None, rng) -> np.ndarray:
    xs = []
    for i in idxs:
        g = samples[i].glyph
        if aug is not None:
            g = augment(g, aug, rng)
        xs.append(g.image.bits.astype(np.float64)[:, :, None])
    return np.stack(xs)


def train_charnet(dataset: CharDataset, model_cfg: dict, epochs: int = 4, seed: int = 0,
                  batch_size: int = 32, learning_rate: float = 1e-3,
                  aug_cfg: AugmentConfig | None = None, progress=None) -> tuple[Model, CharnetReport]:
    """Adam + categorical cross-entropy; augmentation hits training batches only."""
    labels = [dataset.samples[i].label for i in dataset.train_idx]
    if len(set(labels)) < 2:
        raise ClassTooSmall("charnet training needs >= 2 classes")
    model = Model(model_cfg, seed=seed)
    opt = Adam(learning_rate=learning_rate)
    rng = np.random.default_rng(seed)
    train_idx = np.array(dataset.train_idx)
    train_y = np.array(labels)
    for epoch in range(1, epochs + 1):
        order = rng.permutation(len(train_idx))
        total = 0.0
        for i in range(0, len(order), batch_size):
            sel = order[i : i + batch_size]
            xb = _glyph_batch(dataset.samples, train_idx[sel], aug_cfg, rng)
            yb = train_y[sel]
            out = model.forward(xb, training=True, rng=rng)
            loss_vec, grad = categorical_cross_entropy(out, yb)
            check_finite(float(np.mean(loss_vec)), "train loss")
            total += float(np.sum(loss_vec))
            model.backward(grad / len(sel))
            opt.step(model)
        if progress:
            progress(epoch, total / len(train_idx))
    report = evaluate_charnet(model, dataset, batch_size)
    return model, report


def evaluate_charnet(model: Model, dataset: CharDataset, batch_size: int = 32) -> CharnetReport:
    classes = model.config["classes"]
    confusion = np.zeros((classes, classes), dtype=int)
    losses = []
    correct = 0
    test = dataset.test_idx
    for i in range(0, len(test), batch_size):
        idxs = test[i : i + batch_size]
        xb = _glyph_batch(dataset.samples, idxs, None, None)
        yb = np.array([dataset.samples[j].label for j in idxs])
        out = model.forward(xb, training=False)
        loss_vec, _ = categorical_cross_entropy(out, yb)
        losses.extend(loss_vec.tolist())
        pred = np.argmax(out, axis=1)
        correct += int(np.sum(pred == yb))
        for t, p in zip(yb, pred):
            confusion[t, p] += 1
    n = max(1, len(test))
    return CharnetReport(test_accuracy=correct / n, test_loss=float(np.mean(losses)) if losses else 0.0,
                         confusion=confusion)


# ---------------------------------------------------------------------------
# page recognition

def recognize_page(page: BinaryRaster, model: Model, seg_cfg: SegmenterConfig | None = None,
                   layout_cfg: LayoutConfig | None = None) -> OcrResult:
    """Segment, order, classify; argmax ties resolve to the lowest letter."""
    seg_cfg = seg_cfg or SegmenterConfig()
    layout_cfg = layout_cfg or LayoutConfig()
    pairs = segment_page(page, seg_cfg)
    if not pairs:
        return OcrResult(text="", annotations=[])
    boxes = [b for b, _ in pairs]
    mw, mh = median_dims(boxes)
    stream = linearize(boxes, mw, mh, layout_cfg)
    xs = np.stack([g.image.bits.astype(np.float64)[:, :, None] for _, g in pairs])
    probs = []
    for i in range(0, len(xs), 32):
        probs.append(model.forward(xs[i : i + 32], training=False))
    probs = np.concatenate(probs)
    text_parts = []
    annotations = []
    next_index = 1
    for tok in stream:
        if isinstance(tok, GlyphRef):
            p = probs[tok.index]
            cls = int(np.argmax(p))  # first max = lowest letter index
            letter = LETTERS[cls]
            text_parts.append(letter)
            annotations.append(Annotation(index=next_index, box=boxes[tok.index],
                                          letter=letter, confidence=float(p[cls])))
            next_index += 1
        else:
            text_parts.append(tok)
    return OcrResult(text="".join(text_parts), annotations=annotations)


GREEN = np.array([0, 200, 0], dtype=np.uint8)
RED = np.array([220, 0, 0], dtype=np.uint8)


def annotate(page: BinaryRaster | Raster, result: OcrResult) -> np.ndarray:
    """RGB render with 1-px green box outlines and red letter+index labels."""
    if isinstance(page, BinaryRaster):
        gray = np.where(page.bits, 255, 0).astype(np.uint8)
    else:
        gray = page.a
    h, w = gray.shape
    rgb = np.stack([gray] * 3, axis=2)
    for a in result.annotations:
        b = a.box
        if b.x_min < 0 or b.y_min < 0 or b.x_max >= w or b.y_max >= h:
            raise BoxOutsidePage(f"annotation box {b} outside {w}x{h} page")
        rgb[b.y_min, b.x_min : b.x_max + 1] = GREEN
        rgb[b.y_max, b.x_min : b.x_max + 1] = GREEN
        rgb[b.y_min : b.y_max + 1, b.x_min] = GREEN
        rgb[b.y_min : b.y_max + 1, b.x_max] = GREEN
        label = f"{a.letter}{a.index}"
        ty = b.y_min - font5x7.GLYPH_H - 1
        if ty < 0:
            ty = b.y_max + 2
        for ch_i in range(3):
            font5x7.draw_text(rgb[:, :, ch_i], label, b.x_min, ty, RED[ch_i])
    return rgb


# ---------------------------------------------------------------------------
# evaluation

def levenshtein(a: str, b: str) -> int:
    """Unit-cost insert/delete/substitute edit distance."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[len(b)]


def char_accuracy(reference: str, hypothesis: str) -> float:
    """(N - edit_distance) / N over whitespace-stripped strings, clamped at 0."""
    ref = "".join(reference.split())
    hyp = "".join(hypothesis.split())
    if not ref:
        raise EmptyReference("reference empty after whitespace stripping")
    return max(0.0, (len(ref) - levenshtein(ref, hyp)) / len(ref))
