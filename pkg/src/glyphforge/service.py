"""HTTP labeling service: pages, segmentation proposals, box edits, labels,
and dataset export. All mutations are serialized through one lock and the
label store is durably appended before a label request is acknowledged."""
from __future__ import annotations

import base64
import io
import os
import threading

import numpy as np
from fastapi import FastAPI, HTTPException, Response
from PIL import Image
from pydantic import BaseModel, Field

from .errors import EmptyRegion, EmptyStore, InvalidLetter
from .export import export_dataset
from .labelstore import LabelStore, glyph_hash
from .raster import BinaryRaster, BoundingBox, binarize, load_image, trim_in_page
from .segmenter import SegmenterConfig, normalize_glyph, segment_page

PAGE_EXTS = (".png", ".jpg", ".jpeg")


class BoxOut(BaseModel):
    id: int
    box: list[int]  # [x_min, y_min, x_max, y_max]
    version: int
    letter: str | None = None


class AdjustBoxIn(BaseModel):
    box_id: int
    box: list[int] = Field(min_length=4, max_length=4)
    version: int


class MergeBoxesIn(BaseModel):
    box_ids: list[int] = Field(min_length=2)
    versions: list[int]


class SplitBoxIn(BaseModel):
    box_id: int
    version: int
    parts: int = 2


class LabelIn(BaseModel):
    page: str
    box_id: int | None = None
    box: list[int] | None = None
    letter: str
    who: str = "anon"


class LabelOut(BaseModel):
    record_id: int
    page: str
    box: list[int]
    letter: str


class _BoxState:
    def __init__(self, box_id: int, box: BoundingBox):
        self.id = box_id
        self.box = box
        self.version = 1


class _PageState:
    def __init__(self, page_id: str, raster: BinaryRaster, seg_cfg: SegmenterConfig):
        self.id = page_id
        self.raster = raster
        self.boxes: dict[int, _BoxState] = {}
        self.next_id = 1
        for b, _ in segment_page(raster, seg_cfg, page_id=page_id):
            self.boxes[self.next_id] = _BoxState(self.next_id, b)
            self.next_id += 1

    def add_box(self, box: BoundingBox) -> _BoxState:
        st = _BoxState(self.next_id, box)
        self.boxes[self.next_id] = st
        self.next_id += 1
        return st


def _err(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status_code=status, detail={"code": code, "message": message})


def create_app(pages_dir, store_path, seg_cfg: SegmenterConfig | None = None,
               export_dir=None, binarize_threshold: int = 128) -> FastAPI:
    seg_cfg = seg_cfg or SegmenterConfig()
    export_dir = export_dir or os.path.join(os.path.dirname(str(store_path)) or ".", "export")
    store = LabelStore(store_path)
    app = FastAPI(title="glyphforge labeler")
    pages: dict[str, _PageState] = {}
    lock = threading.Lock()

    def page_files() -> dict[str, str]:
        out = {}
        for fn in sorted(os.listdir(pages_dir)):
            stem, ext = os.path.splitext(fn)
            if ext.lower() in PAGE_EXTS:
                out[stem] = os.path.join(pages_dir, fn)
        return out

    def get_page(page_id: str) -> _PageState:
        if page_id in pages:
            return pages[page_id]
        files = page_files()
        if page_id not in files:
            raise _err(404, "unknown_page", f"no page {page_id!r}")
        raster = binarize(load_image(files[page_id]), binarize_threshold, foreground_is_light=True)
        pages[page_id] = _PageState(page_id, raster, seg_cfg)
        return pages[page_id]

    def letter_for(page_id: str, box: BoundingBox) -> str | None:
        rec = store._active.get((page_id, tuple(box.as_list())))
        return store.records[rec]["letter"] if rec is not None else None

    def box_out(ps: _PageState, st: _BoxState) -> BoxOut:
        return BoxOut(id=st.id, box=st.box.as_list(), version=st.version,
                      letter=letter_for(ps.id, st.box))

    def thumbnail_b64(ps: _PageState, box: BoundingBox) -> str | None:
        try:
            g = normalize_glyph(ps.raster, box, seg_cfg, page_id=ps.id)
        except EmptyRegion:
            return None
        arr = np.where(g.image.bits, 255, 0).astype(np.uint8)
        buf = io.BytesIO()
        Image.fromarray(arr).save(buf, format="PNG")
        return base64.b64encode(buf.getvalue()).decode()

    @app.get("/api/pages")
    def list_pages():
        return {"pages": sorted(page_files())}

    @app.get("/api/pages/{page_id}/image")
    def page_image(page_id: str):
        ps = get_page(page_id)
        arr = np.where(ps.raster.bits, 255, 0).astype(np.uint8)
        buf = io.BytesIO()
        Image.fromarray(arr).save(buf, format="PNG")
        return Response(content=buf.getvalue(), media_type="image/png")

    @app.get("/api/pages/{page_id}/boxes")
    def page_boxes(page_id: str):
        ps = get_page(page_id)
        return [box_out(ps, st) for st in sorted(ps.boxes.values(), key=lambda s: s.id)]

    @app.post("/api/pages/{page_id}/boxes")
    def adjust_box(page_id: str, body: AdjustBoxIn):
        with lock:
            ps = get_page(page_id)
            st = ps.boxes.get(body.box_id)
            if st is None:
                raise _err(404, "unknown_box", f"no box {body.box_id}")
            if st.version != body.version:
                raise _err(409, "stale_version", f"box {st.id} is at version {st.version}")
            try:
                box = BoundingBox.from_list(body.box)
            except ValueError as e:
                raise _err(400, "bad_box", str(e))
            if box.x_min < 0 or box.y_min < 0 or box.x_max >= ps.raster.width or box.y_max >= ps.raster.height:
                raise _err(400, "bad_box", "box outside page")
            st.box = box
            st.version += 1
            return {"box": box_out(ps, st).model_dump(), "thumbnail_png_b64": thumbnail_b64(ps, box)}

    @app.post("/api/pages/{page_id}/boxes/merge")
    def merge_boxes(page_id: str, body: MergeBoxesIn):
        with lock:
            ps = get_page(page_id)
            if len(body.versions) != len(body.box_ids):
                raise _err(400, "bad_request", "versions must match box_ids")
            states = []
            for bid, ver in zip(body.box_ids, body.versions):
                st = ps.boxes.get(bid)
                if st is None:
                    raise _err(404, "unknown_box", f"no box {bid}")
                if st.version != ver:
                    raise _err(409, "stale_version", f"box {bid} is at version {st.version}")
                states.append(st)
            union = states[0].box
            for st in states[1:]:
                union = union.union(st.box)
            trimmed = trim_in_page(ps.raster, union) or union
            for st in states:
                del ps.boxes[st.id]
            ps.add_box(trimmed)
            return [box_out(ps, st).model_dump() for st in sorted(ps.boxes.values(), key=lambda s: s.id)]

    @app.post("/api/pages/{page_id}/boxes/split")
    def split_box(page_id: str, body: SplitBoxIn):
        with lock:
            ps = get_page(page_id)
            st = ps.boxes.get(body.box_id)
            if st is None:
                raise _err(404, "unknown_box", f"no box {body.box_id}")
            if st.version != body.version:
                raise _err(409, "stale_version", f"box {st.id} is at version {st.version}")
            if body.parts < 2:
                raise _err(400, "bad_request", "parts must be >= 2")
            b = st.box
            w = b.width()
            if body.parts > w:
                raise _err(400, "bad_request", "more parts than columns")
            del ps.boxes[st.id]
            start = 0
            for i in range(body.parts):
                end = (w - 1) if i == body.parts - 1 else (i + 1) * w // body.parts
                piece = BoundingBox(b.x_min + start, b.y_min, b.x_min + end, b.y_max)
                trimmed = trim_in_page(ps.raster, piece)
                if trimmed is not None:
                    ps.add_box(trimmed)
                start = end + 1
            return [box_out(ps, s).model_dump() for s in sorted(ps.boxes.values(), key=lambda s: s.id)]

    @app.post("/api/labels")
    def post_label(body: LabelIn):
        with lock:
            ps = get_page(body.page)
            if body.box_id is not None:
                st = ps.boxes.get(body.box_id)
                if st is None:
                    raise _err(404, "unknown_box", f"no box {body.box_id}")
                box = st.box
            elif body.box is not None:
                try:
                    box = BoundingBox.from_list(body.box)
                except ValueError as e:
                    raise _err(400, "bad_box", str(e))
            else:
                raise _err(400, "bad_request", "need box_id or box")
            try:
                g = normalize_glyph(ps.raster, box, seg_cfg, page_id=ps.id)
                h = glyph_hash(g.image)
            except EmptyRegion:
                h = ""
            try:
                rid = store.append(ps.id, box, body.letter, content_hash=h, annotator=body.who)
            except InvalidLetter as e:
                raise _err(400, "invalid_letter", str(e))
            return LabelOut(record_id=rid, page=ps.id, box=box.as_list(), letter=body.letter)

    @app.get("/api/export")
    def export():
        with lock:
            needed = {rec["page"] for rec in store.active_records()} if len(store) else set()
            page_map = {pid: get_page(pid).raster for pid in sorted(needed)}
            try:
                manifest = export_dataset(store, page_map, export_dir, seg_cfg)
            except EmptyStore:
                raise _err(400, "empty_store", "no labels to export")
            return {"export_dir": str(export_dir), "manifest": manifest}

    app.state.store = store
    app.state.export_dir = export_dir
    return app
