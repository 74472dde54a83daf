"""Workbench configuration: one file aggregating all module configs.

The file format is a flat TOML-style text: `[section]` headers and
`key = value` lines (ints, floats, bools, quoted strings). The
GLYPHFORGE_CONFIG environment variable points at the file.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field, fields

from .detect import TrainConfig
from .layout import LayoutConfig
from .ocr import AugmentConfig
from .segmenter import SegmenterConfig

ENV_VAR = "GLYPHFORGE_CONFIG"


@dataclass
class WorkbenchConfig:
    segmenter: SegmenterConfig = field(default_factory=SegmenterConfig)
    layout: LayoutConfig = field(default_factory=LayoutConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    augment: AugmentConfig = field(default_factory=AugmentConfig)
    seed: int = 0
    dataset_root: str = ""
    output_dir: str = "out"


def _parse_value(raw: str):
    raw = raw.strip()
    if raw.startswith('"') and raw.endswith('"'):
        return raw[1:-1]
    if raw in ("true", "false"):
        return raw == "true"
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        return raw


def parse_config_text(text: str) -> dict[str, dict]:
    sections: dict[str, dict] = {"": {}}
    current = sections[""]
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            current = sections.setdefault(name, {})
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key = value, got {line!r}")
        key, raw = line.split("=", 1)
        current[key.strip()] = _parse_value(raw)
    return sections


def _apply(cfg_obj, values: dict) -> None:
    names = {f.name for f in fields(cfg_obj)}
    for k, v in values.items():
        if k not in names:
            raise ValueError(f"unknown config key {k!r} for {type(cfg_obj).__name__}")
        setattr(cfg_obj, k, v)


def load_config(path=None) -> WorkbenchConfig:
    """Read the workbench config file; falls back to GLYPHFORGE_CONFIG, then
    to all defaults."""
    cfg = WorkbenchConfig()
    if path is None:
        path = os.environ.get(ENV_VAR)
    if not path:
        return cfg
    with open(path) as f:
        sections = parse_config_text(f.read())
    mapping = {
        "segmenter": cfg.segmenter,
        "layout": cfg.layout,
        "train": cfg.train,
        "augment": cfg.augment,
    }
    for name, values in sections.items():
        if name == "":
            _apply(cfg, values)
        elif name in mapping:
            _apply(mapping[name], values)
        else:
            raise ValueError(f"unknown config section [{name}]")
    return cfg
