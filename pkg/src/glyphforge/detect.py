"""Dysgraphia screening: dataset scan, stratified split, training loop with
early stopping, and the evaluation metric suite."""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ClassTooSmall, EmptyClass, MissingClassDir, OneClassOnly
from .neuralnet import Adam, Model, binary_cross_entropy, check_finite
from .raster import load_image, resize

IMAGE_EXTS = (".jpg", ".jpeg", ".png")


@dataclass
class DatasetIndex:
    entries: list[tuple[str, int]]  # (path, label)
    class_names: list[str]  # index == label

    def labels(self) -> list[int]:
        return [lab for _, lab in self.entries]


@dataclass
class TrainConfig:
    image_size: int = 224
    rescale: float = 1.0 / 255.0
    val_split: float = 0.2
    batch_size: int = 32
    max_epochs: int = 10
    patience: int = 3
    shuffle_train: bool = True
    shuffle_val: bool = False
    seed: int = 0
    learning_rate: float = 1e-3


@dataclass
class MetricsReport:
    accuracy: float
    loss: float
    precision: float
    recall: float
    auc: float
    tp: int
    fp: int
    tn: int
    fn: int
    precision_defined: bool = True
    recall_defined: bool = True
    auc_defined: bool = True

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy, "loss": self.loss, "precision": self.precision,
            "recall": self.recall, "auc": self.auc,
            "tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn,
        }


def scan_dataset(root, class_names: list[str] | None = None) -> DatasetIndex:
    """Recursive JPG/PNG scan of two class folders; label 0 is the
    lexicographically first class name."""
    if class_names is None:
        class_names = sorted(
            d for d in os.listdir(root) if os.path.isdir(os.path.join(root, d))
        )
    class_names = sorted(class_names)
    if len(class_names) != 2:
        raise MissingClassDir(f"expected exactly 2 class folders, found {class_names}")
    entries = []
    for label, name in enumerate(class_names):
        cdir = os.path.join(root, name)
        if not os.path.isdir(cdir):
            raise MissingClassDir(f"missing class folder {cdir}")
        files = []
        for dirpath, _, filenames in os.walk(cdir):
            for fn in filenames:
                if fn.lower().endswith(IMAGE_EXTS):
                    files.append(os.path.join(dirpath, fn))
        if not files:
            raise EmptyClass(f"no images under {cdir}")
        entries.extend((p, label) for p in sorted(files))
    entries.sort(key=lambda e: e[0])
    return DatasetIndex(entries=entries, class_names=class_names)


def split_dataset(index: DatasetIndex, cfg: TrainConfig) -> tuple[list[tuple[str, int]], list[tuple[str, int]]]:
    """Per-class stratified split; val takes floor(count * val_split) of each
    class after a seeded shuffle."""
    rng = np.random.default_rng(cfg.seed)
    train, val = [], []
    for label in (0, 1):
        cls = [e for e in index.entries if e[1] == label]
        if len(cls) < 2:
            raise ClassTooSmall(f"class {label} has {len(cls)} entries, need >= 2")
        order = rng.permutation(len(cls))
        n_val = int(len(cls) * cfg.val_split)
        if n_val == 0:
            raise ClassTooSmall(
                f"class {label} has {len(cls)} entries; val_split {cfg.val_split} leaves no validation samples")
        val.extend(cls[i] for i in order[:n_val])
        train.extend(cls[i] for i in order[n_val:])
    train.sort(key=lambda e: e[0])
    val.sort(key=lambda e: e[0])
    return train, val


def preprocess_sample(path, image_size: int = 224, rescale: float = 1.0 / 255.0) -> np.ndarray:
    """Grayscale load, resize, scale to [0,1]; shape (H, W, 1)."""
    img = resize(load_image(path), image_size, image_size)
    return (img.a.astype(np.float64) * rescale)[:, :, None]


def auc(scores, labels) -> float:
    """Mann-Whitney statistic: P(score+ > score-), ties counted 0.5."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=int)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    if len(pos) == 0 or len(neg) == 0:
        raise OneClassOnly("AUC needs both classes present")
    wins = 0.0
    for p in pos:
        wins += np.sum(p > neg) + 0.5 * np.sum(p == neg)
    return float(wins / (len(pos) * len(neg)))


def metrics_from_scores(scores, labels, threshold: float = 0.5) -> MetricsReport:
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=int)
    pred = (scores >= threshold).astype(int)
    tp = int(np.sum((pred == 1) & (labels == 1)))
    fp = int(np.sum((pred == 1) & (labels == 0)))
    tn = int(np.sum((pred == 0) & (labels == 0)))
    fn = int(np.sum((pred == 0) & (labels == 1)))
    total = tp + fp + tn + fn
    acc = (tp + tn) / total if total else 0.0
    prec_def = (tp + fp) > 0
    rec_def = (tp + fn) > 0
    prec = tp / (tp + fp) if prec_def else 0.0
    rec = tp / (tp + fn) if rec_def else 0.0
    loss_vec, _ = binary_cross_entropy(scores, labels)
    try:
        a = auc(scores, labels)
        auc_def = True
    except OneClassOnly:
        a, auc_def = 0.0, False
    return MetricsReport(
        accuracy=acc, loss=float(np.mean(loss_vec)), precision=prec, recall=rec, auc=a,
        tp=tp, fp=fp, tn=tn, fn=fn,
        precision_defined=prec_def, recall_defined=rec_def, auc_defined=auc_def,
    )


def _predict(model: Model, xs: np.ndarray, batch_size: int = 32) -> np.ndarray:
    outs = []
    for i in range(0, len(xs), batch_size):
        outs.append(model.forward(xs[i : i + batch_size], training=False)[:, 0])
    return np.concatenate(outs) if outs else np.zeros(0)


def evaluate(model: Model, samples: list[tuple[str, int]] | None = None, xs: np.ndarray | None = None,
             ys: np.ndarray | None = None, cfg: TrainConfig | None = None) -> MetricsReport:
    """Threshold 0.5 on the sigmoid output; class 1 is the positive class."""
    cfg = cfg or TrainConfig()
    if xs is None:
        xs = np.stack([preprocess_sample(p, cfg.image_size, cfg.rescale) for p, _ in samples])
        ys = np.array([lab for _, lab in samples])
    scores = _predict(model, xs, cfg.batch_size)
    return metrics_from_scores(scores, ys)


HISTORY_FIELDS = [
    "epoch",
    "train_loss", "train_acc", "train_precision", "train_recall", "train_auc",
    "val_loss", "val_acc", "val_precision", "val_recall", "val_auc",
]


def history_row(epoch: int, train: MetricsReport, val: MetricsReport) -> dict:
    return {
        "epoch": epoch,
        "train_loss": train.loss, "train_acc": train.accuracy,
        "train_precision": train.precision, "train_recall": train.recall, "train_auc": train.auc,
        "val_loss": val.loss, "val_acc": val.accuracy,
        "val_precision": val.precision, "val_recall": val.recall, "val_auc": val.auc,
    }


def write_history_csv(path, rows: list[dict]) -> None:
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=HISTORY_FIELDS)
        w.writeheader()
        for r in rows:
            w.writerow({k: (f"{v:.6f}" if isinstance(v, float) else v) for k, v in r.items()})


def train_detector(index: DatasetIndex, model_cfg: dict, cfg: TrainConfig,
                   progress=None) -> tuple[Model, list[dict], int]:
    """Batched Adam training with early stopping on validation loss.

    Returns the model restored to its best-validation-loss weights, the
    per-epoch metric history, and the (1-based) best epoch.
    """
    train_set, val_set = split_dataset(index, cfg)
    train_x = np.stack([preprocess_sample(p, cfg.image_size, cfg.rescale) for p, _ in train_set])
    train_y = np.array([lab for _, lab in train_set], dtype=np.float64)
    val_x = np.stack([preprocess_sample(p, cfg.image_size, cfg.rescale) for p, _ in val_set])
    val_y = np.array([lab for _, lab in val_set], dtype=np.float64)

    model = Model(model_cfg, seed=cfg.seed)
    opt = Adam(learning_rate=cfg.learning_rate)
    rng = np.random.default_rng(cfg.seed)
    history: list[dict] = []
    best_loss = np.inf
    best_epoch = 0
    best_weights = model.snapshot()
    stale = 0

    for epoch in range(1, cfg.max_epochs + 1):
        order = rng.permutation(len(train_x)) if cfg.shuffle_train else np.arange(len(train_x))
        for i in range(0, len(order), cfg.batch_size):
            idx = order[i : i + cfg.batch_size]
            out = model.forward(train_x[idx], training=True, rng=rng)[:, 0]
            loss_vec, grad = binary_cross_entropy(out, train_y[idx])
            check_finite(float(np.mean(loss_vec)), "train loss")
            model.backward((grad / len(idx))[:, None])
            opt.step(model)
        train_m = metrics_from_scores(_predict(model, train_x, cfg.batch_size), train_y)
        val_m = metrics_from_scores(_predict(model, val_x, cfg.batch_size), val_y)
        check_finite(val_m.loss, "val loss")
        history.append(history_row(epoch, train_m, val_m))
        if progress:
            progress(epoch, train_m, val_m)
        if val_m.loss < best_loss:
            best_loss = val_m.loss
            best_epoch = epoch
            best_weights = model.snapshot()
            stale = 0
        else:
            stale += 1
            if stale >= cfg.patience:
                break
    model.set_params(best_weights)
    return model, history, best_epoch
