import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from PIL import Image

from glyphforge.detect import (
    HISTORY_FIELDS,
    TrainConfig,
    auc,
    evaluate,
    history_row,
    metrics_from_scores,
    preprocess_sample,
    scan_dataset,
    split_dataset,
    train_detector,
    write_history_csv,
)
from glyphforge.errors import ClassTooSmall, EmptyClass, MissingClassDir, OneClassOnly
from glyphforge.neuralnet import Model

from oracles import pairwise_auc


def make_dataset(root, counts=(4, 4), names=("classA", "classB"), size=8):
    rng = np.random.default_rng(0)
    for name, n in zip(names, counts):
        d = root / name
        d.mkdir(parents=True)
        for i in range(n):
            arr = rng.integers(0, 256, (size, size)).astype(np.uint8)
            Image.fromarray(arr).save(d / f"img{i:02d}.png")
    return root


class TestScanDataset:
    def test_labels_by_sorted_name(self, tmp_path):
        make_dataset(tmp_path, names=("zebra", "apple"))
        idx = scan_dataset(tmp_path)
        assert idx.class_names == ["apple", "zebra"]
        by_label = {lab for p, lab in idx.entries if "apple" in p}
        assert by_label == {0}

    def test_counts_and_recursion(self, tmp_path):
        make_dataset(tmp_path, counts=(3, 5))
        nested = tmp_path / "classA" / "sub"
        nested.mkdir()
        Image.fromarray(np.zeros((4, 4), np.uint8)).save(nested / "deep.jpg")
        idx = scan_dataset(tmp_path)
        assert len(idx.entries) == 9
        assert sum(1 for _, lab in idx.entries if lab == 0) == 4

    def test_missing_class(self, tmp_path):
        (tmp_path / "only").mkdir()
        with pytest.raises(MissingClassDir):
            scan_dataset(tmp_path)

    def test_empty_class(self, tmp_path):
        (tmp_path / "a").mkdir()
        (tmp_path / "b").mkdir()
        Image.fromarray(np.zeros((4, 4), np.uint8)).save(tmp_path / "a" / "x.png")
        with pytest.raises(EmptyClass):
            scan_dataset(tmp_path)

    def test_non_image_files_ignored(self, tmp_path):
        make_dataset(tmp_path)
        (tmp_path / "classA" / "notes.txt").write_text("skip me")
        assert len(scan_dataset(tmp_path).entries) == 8


class TestSplitDataset:
    def test_stratified_floor(self, tmp_path):
        make_dataset(tmp_path, counts=(10, 7))
        idx = scan_dataset(tmp_path)
        train, val = split_dataset(idx, TrainConfig(val_split=0.2, seed=3))
        # floor(10 * 0.2) = 2, floor(7 * 0.2) = 1
        assert len(val) == 3 and len(train) == 14
        assert sum(1 for _, lab in val if lab == 0) == 2

    def test_disjoint_and_complete(self, tmp_path):
        make_dataset(tmp_path, counts=(6, 6))
        idx = scan_dataset(tmp_path)
        train, val = split_dataset(idx, TrainConfig(seed=1))
        paths = {p for p, _ in train} | {p for p, _ in val}
        assert len(paths) == 12
        assert not ({p for p, _ in train} & {p for p, _ in val})

    def test_seed_determinism(self, tmp_path):
        make_dataset(tmp_path, counts=(8, 8))
        idx = scan_dataset(tmp_path)
        a = split_dataset(idx, TrainConfig(seed=7))
        b = split_dataset(idx, TrainConfig(seed=7))
        assert a == b

    def test_too_small(self, tmp_path):
        make_dataset(tmp_path, counts=(1, 4))
        idx = scan_dataset(tmp_path)
        with pytest.raises(ClassTooSmall):
            split_dataset(idx, TrainConfig())


class TestPreprocess:
    def test_shape_and_range(self, tmp_path):
        make_dataset(tmp_path, counts=(1, 1), size=12)
        p = next(iter((tmp_path / "classA").glob("*.png")))
        x = preprocess_sample(p, image_size=16)
        assert x.shape == (16, 16, 1)
        assert 0.0 <= x.min() and x.max() <= 1.0

    def test_constant_value(self, tmp_path):
        p = tmp_path / "c.png"
        Image.fromarray(np.full((6, 6), 51, np.uint8)).save(p)
        x = preprocess_sample(p, image_size=6)
        assert np.allclose(x, 0.2)


class TestAuc:
    def test_perfect_separation(self):
        assert auc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0

    def test_reversed(self):
        assert auc([0.9, 0.8, 0.1, 0.2], [0, 0, 1, 1]) == 0.0

    def test_all_tied_is_half(self):
        assert auc([0.5, 0.5, 0.5], [0, 1, 1]) == 0.5

    def test_hand_value(self):
        # pairs: (0.7>0.3)=1, (0.7>0.6)=1, (0.4>0.3)=1, (0.4>0.6)=0 -> 3/4
        assert auc([0.3, 0.6, 0.7, 0.4], [0, 0, 1, 1]) == 0.75

    def test_one_class_raises(self):
        with pytest.raises(OneClassOnly):
            auc([0.1, 0.9], [1, 1])

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.tuples(st.floats(0, 1, allow_nan=False), st.integers(0, 1)),
                    min_size=2, max_size=30))
    def test_matches_pairwise_oracle(self, pairs):
        scores = [s for s, _ in pairs]
        labels = [l for _, l in pairs]
        if len(set(labels)) < 2:
            return
        assert math.isclose(auc(scores, labels), pairwise_auc(scores, labels), rel_tol=1e-12)


class TestMetrics:
    def test_confusion_hand_case(self):
        m = metrics_from_scores([0.9, 0.8, 0.2, 0.6, 0.4], [1, 1, 0, 0, 1])
        assert (m.tp, m.fp, m.tn, m.fn) == (2, 1, 1, 1)
        assert m.accuracy == 0.6
        assert math.isclose(m.precision, 2 / 3)
        assert math.isclose(m.recall, 2 / 3)

    def test_threshold_boundary_positive(self):
        m = metrics_from_scores([0.5], [1])
        assert m.tp == 1 and m.fn == 0

    def test_undefined_precision_flag(self):
        m = metrics_from_scores([0.1, 0.2], [0, 1])
        assert not m.precision_defined and m.precision == 0.0

    def test_one_class_auc_flag(self):
        m = metrics_from_scores([0.9, 0.1], [1, 1])
        assert not m.auc_defined


class TestHistory:
    def test_csv_roundtrip(self, tmp_path):
        t = metrics_from_scores([0.9, 0.1], [1, 0])
        rows = [history_row(1, t, t), history_row(2, t, t)]
        path = tmp_path / "history.csv"
        write_history_csv(path, rows)
        with open(path) as f:
            got = list(csv.DictReader(f))
        assert [r["epoch"] for r in got] == ["1", "2"]
        assert got[0]["val_acc"] == "1.000000"
        assert list(got[0].keys()) == HISTORY_FIELDS


class TestTrainDetector:
    def small_cfg(self, seed=0):
        return TrainConfig(image_size=8, val_split=0.25, batch_size=4,
                           max_epochs=3, patience=2, seed=seed)

    def model_cfg(self):
        # logistic regression: the loop is what gets exercised, not the net
        return {"input_shape": [8, 8, 1], "layers": [
            {"kind": "flatten"},
            {"kind": "dense", "units": 1, "init": "glorot"}, {"kind": "sigmoid"},
        ], "classes": 2}

    def separable_dataset(self, root):
        # class A dark, class B bright: trivially separable
        for name, base in (("classA", 30), ("classB", 220)):
            d = root / name
            d.mkdir()
            for i in range(8):
                arr = np.full((8, 8), base + i, np.uint8)
                Image.fromarray(arr).save(d / f"s{i}.png")
        return root

    def test_history_and_restore(self, tmp_path):
        idx = scan_dataset(self.separable_dataset(tmp_path))
        model, history, best_epoch = train_detector(idx, self.model_cfg(), self.small_cfg())
        assert 1 <= best_epoch <= len(history) <= 3
        assert [r["epoch"] for r in history] == list(range(1, len(history) + 1))
        best_val = min(r["val_loss"] for r in history)
        assert history[best_epoch - 1]["val_loss"] == best_val
        # restored weights reproduce the best epoch's validation loss
        val = [e for e in split_dataset(idx, self.small_cfg())[1]]
        m = evaluate(model, samples=val, cfg=self.small_cfg())
        assert math.isclose(m.loss, best_val, rel_tol=1e-9)

    def test_deterministic_given_seed(self, tmp_path):
        idx = scan_dataset(self.separable_dataset(tmp_path))
        a = train_detector(idx, self.model_cfg(), self.small_cfg(seed=5))
        b = train_detector(idx, self.model_cfg(), self.small_cfg(seed=5))
        assert a[2] == b[2]
        assert a[1] == b[1]
        for k, v in a[0].get_params().items():
            assert np.array_equal(v, b[0].get_params()[k])

    def test_learns_separable_classes(self, tmp_path):
        idx = scan_dataset(self.separable_dataset(tmp_path))
        cfg = TrainConfig(image_size=8, val_split=0.25, batch_size=4,
                          max_epochs=40, patience=10, seed=1, learning_rate=0.05)
        model, history, _ = train_detector(idx, self.model_cfg(), cfg)
        m = evaluate(model, samples=idx.entries, cfg=cfg)
        assert m.accuracy == 1.0
        assert m.auc == 1.0
