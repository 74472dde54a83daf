"""Export the active label records as a directory-per-letter glyph dataset."""
from __future__ import annotations

import json
import os

from .errors import EmptyStore, UnknownPage
from .labelstore import LabelStore, glyph_hash
from .raster import BinaryRaster, BoundingBox, save_png
from .segmenter import SegmenterConfig, normalize_glyph


def export_dataset(store: LabelStore, pages: dict[str, BinaryRaster], out_dir,
                   seg_cfg: SegmenterConfig | None = None) -> list[dict]:
    """One 40x40 glyph PNG per active record plus a manifest; returns the
    manifest rows."""
    seg_cfg = seg_cfg or SegmenterConfig()
    records = store.active_records()
    if not records:
        raise EmptyStore("label store has no records")
    os.makedirs(out_dir, exist_ok=True)
    manifest = []
    for i, rec in enumerate(records):
        page = pages.get(rec["page"])
        if page is None:
            raise UnknownPage(f"page {rec['page']!r} not available for export")
        box = BoundingBox.from_list(rec["box"])
        glyph = normalize_glyph(page, box, seg_cfg, page_id=rec["page"])
        letter = rec["letter"]
        ldir = os.path.join(out_dir, letter)
        os.makedirs(ldir, exist_ok=True)
        fname = os.path.join(letter, f"{rec['page']}_{i:05d}.png")
        save_png(glyph.image, os.path.join(out_dir, fname))
        manifest.append({
            "file": fname,
            "letter": letter,
            "page": rec["page"],
            "box": rec["box"],
            "hash": glyph_hash(glyph.image),
        })
    with open(os.path.join(out_dir, "manifest.json"), "w") as f:
        json.dump(manifest, f, indent=2)
    return manifest
