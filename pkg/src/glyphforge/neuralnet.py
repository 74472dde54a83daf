"""Minimal CNN engine: conv/pool/dense layers, Adam, losses, gradient checking,
and a versioned checkpoint container. All math in float64 by default.

Data layout is (N, H, W, C), row-major. Convolutions are 3x3, stride 1, valid
padding; pooling is 2x2 stride 2 (odd trailing rows/cols dropped).
"""
from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NonFiniteLoss, ShapeMismatch, StaleCache


# ---------------------------------------------------------------------------
# layers

class Layer:
    """Base layer: forward caches what backward needs; params/grads by name."""

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}
        self._cache = None

    def forward(self, x: np.ndarray, training: bool, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def backward(self, dy: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def out_shape(self, in_shape: tuple) -> tuple:
        raise NotImplementedError

    def _need_cache(self):
        if self._cache is None:
            raise StaleCache(f"{type(self).__name__}.backward without a forward cache")


class Conv2D(Layer):
    K = 3  # kernel size

    def __init__(self, filters: int, in_shape: tuple, rng: np.random.Generator):
        super().__init__()
        h, w, c = in_shape
        self.filters = filters
        self.in_channels = c
        fan_in = self.K * self.K * c
        limit = math.sqrt(6.0 / fan_in)  # He-uniform for the ReLU trunk
        self.params["W"] = rng.uniform(-limit, limit, size=(self.K, self.K, c, filters))
        self.params["b"] = np.zeros(filters)

    def out_shape(self, in_shape):
        h, w, c = in_shape
        return (h - self.K + 1, w - self.K + 1, self.filters)

    def forward(self, x, training, rng):
        n, h, w, c = x.shape
        if c != self.in_channels:
            raise ShapeMismatch(f"conv expects {self.in_channels} channels, got {c}")
        oh, ow = h - self.K + 1, w - self.K + 1
        win = np.lib.stride_tricks.sliding_window_view(x, (self.K, self.K), axis=(1, 2))
        # win: (n, oh, ow, c, K, K) -> columns (n*oh*ow, K*K*c)
        cols = win.transpose(0, 1, 2, 4, 5, 3).reshape(n * oh * ow, self.K * self.K * c)
        wmat = self.params["W"].reshape(self.K * self.K * c, self.filters)
        out = cols @ wmat + self.params["b"]
        self._cache = (x.shape, cols)
        return out.reshape(n, oh, ow, self.filters)

    def backward(self, dy):
        self._need_cache()
        (n, h, w, c), cols = self._cache
        oh, ow = h - self.K + 1, w - self.K + 1
        dyf = dy.reshape(n * oh * ow, self.filters)
        self.grads["W"] = (cols.T @ dyf).reshape(self.params["W"].shape)
        self.grads["b"] = dyf.sum(axis=0)
        dx = np.zeros((n, h, w, c))
        dy4 = dy.reshape(n, oh, ow, self.filters)
        W = self.params["W"]
        for i in range(self.K):
            for j in range(self.K):
                dx[:, i : i + oh, j : j + ow, :] += dy4 @ W[i, j].T
        self._cache = None
        return dx


class MaxPool2(Layer):
    def out_shape(self, in_shape):
        h, w, c = in_shape
        return (h // 2, w // 2, c)

    def forward(self, x, training, rng):
        n, h, w, c = x.shape
        h2, w2 = h // 2, w // 2
        xc = x[:, : h2 * 2, : w2 * 2, :]
        blocks = xc.reshape(n, h2, 2, w2, 2, c).transpose(0, 1, 3, 2, 4, 5).reshape(n, h2, w2, 4, c)
        idx = np.argmax(blocks, axis=3)  # first max wins: deterministic
        out = np.take_along_axis(blocks, idx[:, :, :, None, :], axis=3)[:, :, :, 0, :]
        self._cache = (x.shape, idx)
        return out

    def backward(self, dy):
        self._need_cache()
        (n, h, w, c), idx = self._cache
        h2, w2 = h // 2, w // 2
        dblocks = np.zeros((n, h2, w2, 4, c))
        np.put_along_axis(dblocks, idx[:, :, :, None, :], dy[:, :, :, None, :], axis=3)
        dx = np.zeros((n, h, w, c))
        dx[:, : h2 * 2, : w2 * 2, :] = (
            dblocks.reshape(n, h2, w2, 2, 2, c).transpose(0, 1, 3, 2, 4, 5).reshape(n, h2 * 2, w2 * 2, c)
        )
        self._cache = None
        return dx


class ReLU(Layer):
    def out_shape(self, in_shape):
        return in_shape

    def forward(self, x, training, rng):
        self._cache = x > 0
        return np.where(self._cache, x, 0.0)

    def backward(self, dy):
        self._need_cache()
        dx = np.where(self._cache, dy, 0.0)
        self._cache = None
        return dx


class Flatten(Layer):
    def out_shape(self, in_shape):
        return (int(np.prod(in_shape)),)

    def forward(self, x, training, rng):
        self._cache = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dy):
        self._need_cache()
        dx = dy.reshape(self._cache)
        self._cache = None
        return dx


class Dense(Layer):
    def __init__(self, units: int, in_shape: tuple, rng: np.random.Generator, init: str = "he"):
        super().__init__()
        (fan_in,) = in_shape
        self.units = units
        if init == "he":
            limit = math.sqrt(6.0 / fan_in)
        else:  # glorot for sigmoid/softmax heads
            limit = math.sqrt(6.0 / (fan_in + units))
        self.params["W"] = rng.uniform(-limit, limit, size=(fan_in, units))
        self.params["b"] = np.zeros(units)

    def out_shape(self, in_shape):
        return (self.units,)

    def forward(self, x, training, rng):
        if x.shape[1] != self.params["W"].shape[0]:
            raise ShapeMismatch(f"dense expects {self.params['W'].shape[0]} inputs, got {x.shape[1]}")
        self._cache = x
        return x @ self.params["W"] + self.params["b"]

    def backward(self, dy):
        self._need_cache()
        x = self._cache
        self.grads["W"] = x.T @ dy
        self.grads["b"] = dy.sum(axis=0)
        dx = dy @ self.params["W"].T
        self._cache = None
        return dx


class Dropout(Layer):
    def __init__(self, rate: float):
        super().__init__()
        if not 0 <= rate < 1:
            raise ValueError("dropout rate must be in [0,1)")
        self.rate = rate

    def out_shape(self, in_shape):
        return in_shape

    def forward(self, x, training, rng):
        if not training or self.rate == 0:
            self._cache = None
            return x
        mask = rng.random(x.shape) >= self.rate
        scale = 1.0 / (1.0 - self.rate)
        self._cache = mask
        return np.where(mask, x * scale, 0.0)

    def backward(self, dy):
        if self._cache is None:
            return dy
        dx = np.where(self._cache, dy / (1.0 - self.rate), 0.0)
        self._cache = None
        return dx


class Sigmoid(Layer):
    def out_shape(self, in_shape):
        return in_shape

    def forward(self, x, training, rng):
        out = 1.0 / (1.0 + np.exp(-x))
        self._cache = out
        return out

    def backward(self, dy):
        self._need_cache()
        s = self._cache
        self._cache = None
        return dy * s * (1 - s)


class Softmax(Layer):
    def out_shape(self, in_shape):
        return in_shape

    def forward(self, x, training, rng):
        z = x - x.max(axis=1, keepdims=True)
        e = np.exp(z)
        p = e / e.sum(axis=1, keepdims=True)
        self._cache = p
        return p

    def backward(self, dy):
        self._need_cache()
        p = self._cache
        self._cache = None
        return p * (dy - (dy * p).sum(axis=1, keepdims=True))


# ---------------------------------------------------------------------------
# model

_DETECTOR_LAYERS = [
    {"kind": "conv", "filters": 32},
    {"kind": "maxpool"},
    {"kind": "conv", "filters": 64},
    {"kind": "maxpool"},
    {"kind": "conv", "filters": 128},
    {"kind": "maxpool"},
    {"kind": "flatten"},
    {"kind": "dense", "units": 128},
    {"kind": "relu"},
    {"kind": "dropout", "rate": 0.5},
    {"kind": "dense", "units": 1, "init": "glorot"},
    {"kind": "sigmoid"},
]


def detector_config(image_size: int = 224) -> dict:
    return {"input_shape": [image_size, image_size, 1], "layers": list(_DETECTOR_LAYERS), "classes": 2}


def charnet_toy_config(input_size: int = 8, classes: int = 4) -> dict:
    """Gradient-check-sized stack with every layer kind composed; the full
    3-conv trunk cannot fit an 8x8 input (8->6->3->1 leaves no room to pool)."""
    return {
        "input_shape": [input_size, input_size, 1],
        "layers": [
            {"kind": "conv", "filters": 4},
            {"kind": "maxpool"},
            {"kind": "conv", "filters": 8},
            {"kind": "flatten"},
            {"kind": "dense", "units": 16},
            {"kind": "relu"},
            {"kind": "dropout", "rate": 0.5},
            {"kind": "dense", "units": classes, "init": "glorot"},
            {"kind": "softmax"},
        ],
        "classes": classes,
    }


def charnet_config(glyph_size: int = 40, classes: int = 26) -> dict:
    layers = list(_DETECTOR_LAYERS[:-2]) + [
        {"kind": "dense", "units": classes, "init": "glorot"},
        {"kind": "softmax"},
    ]
    return {"input_shape": [glyph_size, glyph_size, 1], "layers": layers, "classes": classes}


class Model:
    """Ordered layer stack built from a JSON-able config."""

    def __init__(self, config: dict, seed: int = 0):
        self.config = config
        self.seed = seed
        rng = np.random.default_rng(seed)
        self.layers: list[Layer] = []
        shape = tuple(config["input_shape"])
        for spec in config["layers"]:
            kind = spec["kind"]
            if kind == "conv":
                layer = Conv2D(spec["filters"], shape, rng)
            elif kind == "maxpool":
                layer = MaxPool2()
            elif kind == "relu":
                layer = ReLU()
            elif kind == "flatten":
                layer = Flatten()
            elif kind == "dense":
                layer = Dense(spec["units"], shape, rng, init=spec.get("init", "he"))
            elif kind == "dropout":
                layer = Dropout(spec["rate"])
            elif kind == "sigmoid":
                layer = Sigmoid()
            elif kind == "softmax":
                layer = Softmax()
            else:
                raise ValueError(f"unknown layer kind {kind!r}")
            self.layers.append(layer)
            shape = layer.out_shape(shape)
        self.output_shape = shape

    def shape_chain(self) -> list[tuple]:
        shapes = [tuple(self.config["input_shape"])]
        for layer in self.layers:
            shapes.append(layer.out_shape(shapes[-1]))
        return shapes

    def forward(self, x: np.ndarray, training: bool = False, rng: np.random.Generator | None = None) -> np.ndarray:
        if tuple(x.shape[1:]) != tuple(self.config["input_shape"]):
            raise ShapeMismatch(f"input {x.shape[1:]} != model input {self.config['input_shape']}")
        rng = rng or np.random.default_rng(0)
        for layer in self.layers:
            x = layer.forward(x, training, rng)
        return x

    def backward(self, dy: np.ndarray) -> np.ndarray:
        for layer in reversed(self.layers):
            dy = layer.backward(dy)
        return dy

    def parameters(self):
        """Yield (key, layer, name) in a fixed order."""
        for i, layer in enumerate(self.layers):
            for name in sorted(layer.params):
                yield f"L{i}.{name}", layer, name

    def get_params(self) -> dict[str, np.ndarray]:
        return {k: layer.params[n] for k, layer, n in self.parameters()}

    def set_params(self, values: dict[str, np.ndarray]) -> None:
        for k, layer, n in self.parameters():
            layer.params[n] = values[k].copy()

    def snapshot(self) -> dict[str, np.ndarray]:
        return {k: layer.params[n].copy() for k, layer, n in self.parameters()}


# ---------------------------------------------------------------------------
# losses

_EPS = 1e-7


def binary_cross_entropy(pred: np.ndarray, label: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample loss and d(loss)/d(pred); pred clamped to [1e-7, 1-1e-7]."""
    p = np.clip(pred, _EPS, 1 - _EPS)
    y = np.asarray(label, dtype=np.float64)
    loss = -(y * np.log(p) + (1 - y) * np.log(1 - p))
    grad = np.where(np.asarray(pred) == p, (p - y) / (p * (1 - p)), 0.0)
    return loss, grad


def categorical_cross_entropy(pred: np.ndarray, label: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """pred: (N, C) probabilities; label: (N,) class indices."""
    p = np.clip(pred, _EPS, None)
    n = p.shape[0]
    idx = np.asarray(label, dtype=int)
    loss = -np.log(p[np.arange(n), idx])
    grad = np.zeros_like(p)
    unclamped = np.asarray(pred)[np.arange(n), idx] >= _EPS
    grad[np.arange(n), idx] = np.where(unclamped, -1.0 / p[np.arange(n), idx], 0.0)
    return loss, grad


# ---------------------------------------------------------------------------
# optimizer

class Adam:
    def __init__(self, learning_rate: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999, epsilon: float = 1e-8):
        self.lr = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = epsilon
        self.step_count = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}

    def step(self, model: Model) -> None:
        """Bias-corrected Adam update over every model parameter in place."""
        self.step_count += 1
        t = self.step_count
        for key, layer, name in model.parameters():
            g = layer.grads.get(name)
            if g is None:
                raise StaleCache(f"no gradient for {key}")
            if g.shape != layer.params[name].shape:
                raise ShapeMismatch(f"grad shape {g.shape} != param {layer.params[name].shape} at {key}")
            if key not in self.m:
                self.m[key] = np.zeros_like(g)
                self.v[key] = np.zeros_like(g)
            self.m[key] = self.beta1 * self.m[key] + (1 - self.beta1) * g
            self.v[key] = self.beta2 * self.v[key] + (1 - self.beta2) * g * g
            mhat = self.m[key] / (1 - self.beta1**t)
            vhat = self.v[key] / (1 - self.beta2**t)
            layer.params[name] -= self.lr * mhat / (np.sqrt(vhat) + self.eps)


# ---------------------------------------------------------------------------
# gradient checking

def grad_check(model: Model, x: np.ndarray, loss_fn, y, eps: float = 1e-3, rng_seed: int = 0) -> float:
    """Max relative error of analytic vs central-difference gradients.

    Dropout is bypassed (training=False keeps it out of the path) so the loss
    is a deterministic function of the parameters.
    """
    def total_loss():
        out = model.forward(x, training=False)
        loss, _ = loss_fn(out, y)
        return float(np.sum(loss))

    out = model.forward(x, training=False)
    _, grad = loss_fn(out, y)
    model.backward(grad)
    analytic = {k: layer.grads[n].copy() for k, layer, n in model.parameters()}

    worst = 0.0
    for key, layer, name in model.parameters():
        p = layer.params[name]
        flat = p.reshape(-1)
        aflat = analytic[key].reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            lp = total_loss()
            flat[i] = orig - eps
            lm = total_loss()
            flat[i] = orig
            num = (lp - lm) / (2 * eps)
            denom = max(1e-8, abs(num) + abs(aflat[i]))
            worst = max(worst, abs(num - aflat[i]) / denom)
    return worst


# ---------------------------------------------------------------------------
# checkpoints

CHECKPOINT_VERSION = 1


def save_checkpoint(path, model: Model, optimizer: Adam | None = None) -> None:
    """Versioned npz container: config JSON + float64 little-endian tensors."""
    arrays = {f"param/{k}": layer.params[n] for k, layer, n in model.parameters()}
    meta = {"version": CHECKPOINT_VERSION, "config": model.config, "seed": model.seed}
    if optimizer is not None:
        meta["optimizer"] = {
            "lr": optimizer.lr, "beta1": optimizer.beta1, "beta2": optimizer.beta2,
            "epsilon": optimizer.eps, "step": optimizer.step_count,
        }
        for k, v in optimizer.m.items():
            arrays[f"adam_m/{k}"] = v
        for k, v in optimizer.v.items():
            arrays[f"adam_v/{k}"] = v
    arrays["meta"] = np.frombuffer(json.dumps(meta, sort_keys=True).encode(), dtype=np.uint8)
    with open(path, "wb") as f:
        np.savez(f, **arrays)


def load_checkpoint(path) -> tuple[Model, Adam | None]:
    with np.load(path) as z:
        meta = json.loads(bytes(z["meta"]).decode())
        if meta["version"] != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {meta['version']}")
        model = Model(meta["config"], seed=meta["seed"])
        model.set_params({k[len("param/"):]: z[k] for k in z.files if k.startswith("param/")})
        opt = None
        if "optimizer" in meta:
            o = meta["optimizer"]
            opt = Adam(o["lr"], o["beta1"], o["beta2"], o["epsilon"])
            opt.step_count = o["step"]
            opt.m = {k[len("adam_m/"):]: z[k].copy() for k in z.files if k.startswith("adam_m/")}
            opt.v = {k[len("adam_v/"):]: z[k].copy() for k in z.files if k.startswith("adam_v/")}
    return model, opt


def check_finite(loss: float, context: str = "loss") -> float:
    if not np.isfinite(loss):
        raise NonFiniteLoss(f"non-finite {context}: {loss}")
    return loss
