"""Command-line entry points. Exit codes: 0 success, 1 usage error, 2 data error."""
from __future__ import annotations

import json
import os
import sys

import click
import numpy as np

from . import synth
from .config import load_config
from .detect import TrainConfig, evaluate, scan_dataset, split_dataset, train_detector, write_history_csv
from .errors import DataError, GlyphforgeError
from .layout import LayoutConfig
from .neuralnet import charnet_config, detector_config, load_checkpoint, save_checkpoint
from .ocr import AugmentConfig, annotate, load_export_dir, make_char_dataset, recognize_page, train_charnet
from .raster import binarize, load_image, save_png
from .segmenter import SegmenterConfig, segment_page


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="Workbench config file (defaults to $GLYPHFORGE_CONFIG).")
@click.pass_context
def cli(ctx, config_path):
    """Dysgraphia screening and handwriting OCR workbench."""
    ctx.obj = load_config(config_path)


def _load_page(path, threshold=128):
    return binarize(load_image(path), threshold, foreground_is_light=True)


@cli.command("gen-corpus")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--pages", default=3, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--fuse-prob", default=0.0, show_default=True)
@click.option("--dot-offset", default=0, show_default=True)
@click.option("--jitter", default=1, show_default=True)
@click.option("--kind", type=click.Choice(["pages", "detector"]), default="pages", show_default=True)
@click.option("--per-class", default=100, show_default=True, help="detector corpus images per class")
def gen_corpus_cmd(out_dir, pages, seed, fuse_prob, dot_offset, jitter, kind, per_class):
    """Generate a synthetic corpus with ground truth."""
    if kind == "detector":
        synth.gen_detector_corpus(out_dir, per_class=per_class, seed=seed)
        click.echo(f"wrote detector corpus ({2 * per_class} images) to {out_dir}")
    else:
        ids = synth.gen_corpus(out_dir, pages, seed=seed, fuse_probability=fuse_prob,
                               dot_offset=dot_offset, jitter=jitter)
        click.echo(f"wrote {len(ids)} pages to {out_dir}")


@cli.command("segment")
@click.argument("page", type=click.Path(exists=True))
@click.option("--out", "out_path", default=None, type=click.Path())
@click.pass_obj
def segment_cmd(cfg, page, out_path):
    """Segment a page into character boxes (JSON)."""
    raster = _load_page(page)
    pairs = segment_page(raster, cfg.segmenter)
    payload = json.dumps({"boxes": [b.as_list() for b, _ in pairs]}, indent=2)
    if out_path:
        with open(out_path, "w") as f:
            f.write(payload)
    else:
        click.echo(payload)


@cli.command("detect-train")
@click.option("--data", "data_dir", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--img-size", default=None, type=int)
@click.option("--epochs", default=None, type=int)
@click.option("--seed", default=None, type=int)
@click.pass_obj
def detect_train_cmd(cfg, data_dir, out_dir, img_size, epochs, seed):
    """Train the page classifier; writes checkpoint + history CSV."""
    tc: TrainConfig = cfg.train
    if img_size is not None:
        tc.image_size = img_size
    if epochs is not None:
        tc.max_epochs = epochs
    if seed is not None:
        tc.seed = seed
    index = scan_dataset(data_dir)
    os.makedirs(out_dir, exist_ok=True)

    def progress(epoch, train_m, val_m):
        click.echo(f"epoch {epoch}: train_loss={train_m.loss:.4f} val_loss={val_m.loss:.4f} "
                   f"val_acc={val_m.accuracy:.4f}")

    model, history, best = train_detector(index, detector_config(tc.image_size), tc, progress=progress)
    save_checkpoint(os.path.join(out_dir, "detector.npz"), model)
    write_history_csv(os.path.join(out_dir, "history.csv"), history)
    click.echo(f"best epoch: {best}; final val acc: {history[best - 1]['val_acc']:.4f}")


@cli.command("detect-eval")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--data", "data_dir", required=True, type=click.Path(exists=True))
@click.option("--split", type=click.Choice(["all", "val"]), default="all", show_default=True)
@click.pass_obj
def detect_eval_cmd(cfg, model_path, data_dir, split):
    """Evaluate a trained detector on a class-folder dataset."""
    model, _ = load_checkpoint(model_path)
    tc: TrainConfig = cfg.train
    tc.image_size = model.config["input_shape"][0]
    index = scan_dataset(data_dir)
    samples = index.entries
    if split == "val":
        _, samples = split_dataset(index, tc)
    report = evaluate(model, samples, cfg=tc)
    click.echo(json.dumps(report.as_dict(), indent=2))


@cli.command("ocr-train")
@click.option("--data", "data_dir", default=None, type=click.Path(exists=True),
              help="dataset-export directory (manifest.json + letter folders)")
@click.option("--synthetic", default=0, type=int, help="train on N generated samples per letter instead")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--epochs", default=4, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--no-augment", is_flag=True, default=False)
@click.pass_obj
def ocr_train_cmd(cfg, data_dir, synthetic, out_path, epochs, seed, no_augment):
    """Train the 26-class character recognizer."""
    if bool(data_dir) == bool(synthetic):
        raise click.UsageError("give exactly one of --data or --synthetic N")
    if synthetic:
        samples = synth.glyph_training_samples(per_class=synthetic, seed=seed)
    else:
        samples = load_export_dir(data_dir, cfg.segmenter)
    dataset = make_char_dataset(samples, seed=seed)
    aug = None if no_augment else cfg.augment
    model, report = train_charnet(dataset, charnet_config(cfg.segmenter.glyph_size), epochs=epochs,
                                  seed=seed, aug_cfg=aug,
                                  progress=lambda e, l: click.echo(f"epoch {e}: loss={l:.4f}"))
    save_checkpoint(out_path, model)
    click.echo(f"test top-1 accuracy: {report.test_accuracy:.4f}")


@cli.command("ocr-run")
@click.argument("page", type=click.Path(exists=True))
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--out-dir", required=True, type=click.Path())
@click.pass_obj
def ocr_run_cmd(cfg, page, model_path, out_dir):
    """Recognize a page: text + annotated PNG + JSON."""
    model, _ = load_checkpoint(model_path)
    raster = _load_page(page)
    result = recognize_page(raster, model, cfg.segmenter, cfg.layout)
    os.makedirs(out_dir, exist_ok=True)
    stem = os.path.splitext(os.path.basename(page))[0]
    with open(os.path.join(out_dir, f"{stem}.json"), "w") as f:
        f.write(result.to_json())
    save_png(annotate(raster, result), os.path.join(out_dir, f"{stem}_annotated.png"))
    click.echo(result.text)


@cli.command("dataset-export")
@click.option("--store", "store_path", required=True, type=click.Path(exists=True))
@click.option("--pages", "pages_dir", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.pass_obj
def dataset_export_cmd(cfg, store_path, pages_dir, out_dir):
    """Export active labels as a glyph training dataset."""
    from .export import export_dataset
    from .labelstore import LabelStore

    store = LabelStore(store_path)
    pages = {}
    for fn in sorted(os.listdir(pages_dir)):
        stem, ext = os.path.splitext(fn)
        if ext.lower() in (".png", ".jpg", ".jpeg"):
            pages[stem] = _load_page(os.path.join(pages_dir, fn))
    manifest = export_dataset(store, pages, out_dir, cfg.segmenter)
    click.echo(f"exported {len(manifest)} glyphs to {out_dir}")


@cli.command("label-serve")
@click.option("--pages", "pages_dir", required=True, type=click.Path(exists=True))
@click.option("--store", "store_path", required=True, type=click.Path())
@click.option("--export-dir", default=None, type=click.Path())
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8077, show_default=True)
@click.pass_obj
def label_serve_cmd(cfg, pages_dir, store_path, export_dir, host, port):
    """Start the HTTP labeling service."""
    import uvicorn

    from .service import create_app

    app = create_app(pages_dir, store_path, cfg.segmenter, export_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


def main(argv=None):
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Abort:
        return 1
    except click.UsageError as e:
        click.echo(f"usage error: {e.format_message()}", err=True)
        return 1
    except click.ClickException as e:
        e.show()
        return 1
    except DataError as e:
        click.echo(f"data error: {e}", err=True)
        return 2
    except GlyphforgeError as e:
        click.echo(f"error: {e}", err=True)
        return 2
    except FileNotFoundError as e:
        click.echo(f"data error: {e}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
