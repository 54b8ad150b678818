"""Command-line front end. Thin: parse flags, call the library, write files.

Paths may come from flags, from a YAML config (--config), or from
TYPOGEN_CORPUS / TYPOGEN_CODEBOOKS / TYPOGEN_CHECKPOINT / TYPOGEN_OUTPUT.
Flags win. Exit codes: 0 ok, 1 runtime failure, 2 usage.
"""
from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click
import numpy as np

from .attributes import ATTRIBUTES
from .config import AppConfig, ConfigError, load_config
from .corpus import GeneratorConfig, SplitSpec, bin_documents, generate_synthetic, split
from .docs import CorpusError, load_documents, parse_records, write_documents
from .metrics import MetricsError, mode_baseline, report_from_bins
from .model import (
    ModelConfig,
    ModelError,
    TrainParams,
    TypographyModel,
    train,
)
from .pipeline import evaluate_documents, sweep_metrics
from .quantize import CodebookSet, QuantizeError, fit_codebooks
from .raster import RasterError
from .render import RenderError, render_document
from .sampling import MODES, SamplingConfig, SamplingError, predict_top1, sample
from .service import MODE_ALIASES

_RUNTIME_ERRORS = (
    ConfigError,
    CorpusError,
    MetricsError,
    ModelError,
    QuantizeError,
    RasterError,
    RenderError,
    SamplingError,
    OSError,
    ValueError,
    KeyError,
)


def _wrap(fn):
    """Convert library failures into exit-1 messages."""
    import functools

    @functools.wraps(fn)
    def inner(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except click.ClickException:
            raise
        except _RUNTIME_ERRORS as exc:
            raise click.ClickException(str(exc)) from exc

    return inner


@click.group()
def main() -> None:
    """Typography suggestion toolkit."""


def _config(path: str | None) -> AppConfig:
    return load_config(path)


def _need(value: str | None, fallback: str | None, flag: str) -> str:
    got = value or fallback
    if not got:
        raise click.UsageError(f"missing {flag} (flag, config, or environment)")
    return got


def _load_cb(path: str) -> CodebookSet:
    return CodebookSet.load(path)


def _pick_doc(corpus: str, doc_id: str | None, codebooks: CodebookSet):
    docs = load_documents(corpus, codebooks)
    if doc_id is None:
        return docs[0]
    for d in docs:
        if d.id == doc_id:
            return d
    raise click.ClickException(f"no document {doc_id!r} in {corpus}")


def _parse_p(pairs: tuple[str, ...]) -> dict[str, float]:
    out: dict[str, float] = {}
    for pair in pairs:
        if "=" not in pair:
            raise click.UsageError(f"--p expects attr=value, got {pair!r}")
        name, _, value = pair.partition("=")
        if name not in ATTRIBUTES:
            raise click.UsageError(f"unknown attribute {name!r} in --p")
        try:
            out[name] = float(value)
        except ValueError:
            raise click.UsageError(f"--p {name}: {value!r} is not a number")
    return out


def _emit(text: str, out: str | None) -> None:
    if out in (None, "-"):
        click.echo(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)


@main.command("gen-synthetic")
@click.option("--n", "num", type=int, required=True, help="Number of documents.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--max-elements", type=int, default=8, show_default=True)
@click.option("--font-vocab", type=int, default=16, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), required=True, help="Corpus directory.")
@click.option("--split/--no-split", "do_split", default=True, show_default=True,
              help="Also write train/val/test JSONL files (8:1:1).")
@_wrap
def gen_synthetic(num, seed, max_elements, font_vocab, out_dir, do_split):
    """Generate a labeled synthetic corpus with designer-rule structure."""
    cfg = GeneratorConfig(
        num_documents=num, max_elements=max_elements, font_vocab_size=font_vocab, seed=seed
    )
    docs = generate_synthetic(cfg)
    out = Path(out_dir)
    write_documents(docs, out / "corpus.jsonl")
    if do_split and len(docs) >= 3:
        parts = split(docs, SplitSpec(seed=seed))
        for name, part in zip(("train", "val", "test"), parts):
            write_documents(part, out / f"{name}.jsonl", write_rasters=False)
        click.echo(
            f"wrote {len(docs)} documents to {out} "
            f"(splits {'/'.join(str(len(p)) for p in parts)})"
        )
    else:
        click.echo(f"wrote {len(docs)} documents to {out}")


@main.command("fit-codebooks")
@click.option("--corpus", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@_wrap
def fit_codebooks_cmd(corpus, out_path, seed):
    """Fit every quantization codebook from a raw labeled corpus."""
    records = parse_records(corpus)
    cb = fit_codebooks(records, seed=seed)
    Path(out_path).parent.mkdir(parents=True, exist_ok=True)
    cb.save(out_path)
    sizes = {name: len(cb[name].centroids) for name in
             ("font_size", "angle", "letter_spacing", "line_spacing")}
    click.echo(f"codebooks -> {out_path} (color {len(cb.color.centroids_lab)}, {sizes})")


@main.command("train")
@click.option("--corpus", type=click.Path(exists=True), required=True, help="Training JSONL.")
@click.option("--val", type=click.Path(exists=True), default=None, help="Validation JSONL.")
@click.option("--codebooks", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True, help="Checkpoint path.")
@click.option("--epochs", type=int, default=30, show_default=True)
@click.option("--lr", type=float, default=2e-4, show_default=True)
@click.option("--batch-size", type=int, default=16, show_default=True)
@click.option("--weight-decay", type=float, default=0.01, show_default=True)
@click.option("--max-steps", type=int, default=None)
@click.option("--embed-dim", type=int, default=32, show_default=True)
@click.option("--ff-dim", type=int, default=64, show_default=True)
@click.option("--heads", type=int, default=2, show_default=True)
@click.option("--encoder-blocks", type=int, default=2, show_default=True)
@click.option("--decoder-blocks", type=int, default=2, show_default=True)
@click.option("--paper-scale", is_flag=True, help="Use the full-scale architecture preset.")
@click.option("--seed", type=int, default=0, show_default=True)
@_wrap
def train_cmd(corpus, val, codebooks, out_path, epochs, lr, batch_size, weight_decay,
              max_steps, embed_dim, ff_dim, heads, encoder_blocks, decoder_blocks,
              paper_scale, seed):
    """Train the suggestion model and keep the best-validation checkpoint."""
    cb = _load_cb(codebooks)
    train_docs = load_documents(corpus, cb)
    val_docs = load_documents(val, cb) if val else []
    if paper_scale:
        import dataclasses

        mc = dataclasses.replace(ModelConfig.paper_scale(), seed=seed)
    else:
        mc = ModelConfig(
            embed_dim=embed_dim, ff_dim=ff_dim, heads=heads,
            encoder_blocks=encoder_blocks, decoder_blocks=decoder_blocks, seed=seed,
        )
    model = TypographyModel(mc)
    params = TrainParams(
        epochs=epochs, lr=lr, batch_size=batch_size, weight_decay=weight_decay,
        max_steps=max_steps, seed=seed,
    )
    result = train(model, train_docs, val_docs, params)
    Path(out_path).parent.mkdir(parents=True, exist_ok=True)
    model.save(out_path, cb)
    history_path = Path(f"{out_path}.history.json")
    history_path.write_text(json.dumps(result.history, indent=1))
    last = result.history[-1]
    click.echo(
        f"trained {result.steps} steps; train loss {last['train_loss']:.4f}"
        + (f", best val {result.best_val_loss:.4f} (epoch {result.best_epoch})" if val_docs else "")
        + f"; checkpoint -> {out_path}"
    )


@main.command("predict")
@click.option("--corpus", type=click.Path(exists=True), required=True)
@click.option("--id", "doc_id", default=None, help="Document id (default: first).")
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.option("--codebooks", type=click.Path(exists=True), required=True)
@click.option("--out", default=None, help="Output path ('-' = stdout).")
@_wrap
def predict_cmd(corpus, doc_id, model_path, codebooks, out):
    """Top-1 labels and structure clusters for one document."""
    cb = _load_cb(codebooks)
    model = TypographyModel.load(model_path, cb)
    doc = _pick_doc(corpus, doc_id, cb)
    labels, clusters = predict_top1(model, doc, cb)
    payload = {
        "doc_id": doc.id,
        "labels": labels.tolist(),
        "clusters": clusters.to_json_dict(),
    }
    _emit(json.dumps(payload, indent=1, sort_keys=True), out)


@main.command("sample")
@click.option("--corpus", type=click.Path(exists=True), required=True)
@click.option("--id", "doc_id", default=None)
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.option("--codebooks", type=click.Path(exists=True), required=True)
@click.option("--mode", type=str, default="structure_preserved", show_default=True,
              help="plain | structure (alias) | structure_preserved | top1.")
@click.option("--p", "p_pairs", multiple=True, help="Per-attribute p, e.g. --p font=0.9999.")
@click.option("--n", "n_samples", type=int, default=1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", default=None)
@_wrap
def sample_cmd(corpus, doc_id, model_path, codebooks, mode, p_pairs, n_samples, seed, out):
    """Draw label assignments for one document; emits SampleSet JSON."""
    mode = MODE_ALIASES.get(mode, mode)
    if mode not in MODES:
        raise click.UsageError(f"unknown mode {mode!r}")
    cb = _load_cb(codebooks)
    model = TypographyModel.load(model_path, cb)
    doc = _pick_doc(corpus, doc_id, cb)
    cfg = SamplingConfig(p_k=_parse_p(p_pairs), mode=mode, n_samples=n_samples, seed=seed)
    ss = sample(model, doc, cfg, cb)
    _emit(ss.to_json(), out)


@main.command("eval")
@click.option("--corpus", type=click.Path(exists=True), required=True)
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.option("--codebooks", type=click.Path(exists=True), required=True)
@click.option("--samples", "n_samples", type=int, default=0, show_default=True,
              help="Samples per document for the diversity column (0 = skip).")
@click.option("--mode", default="plain", show_default=True)
@click.option("--p", "p_pairs", multiple=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--limit", type=int, default=None, help="Evaluate only the first N documents.")
@click.option("--json-out", default=None, help="Also write the report as JSON.")
@_wrap
def eval_cmd(corpus, model_path, codebooks, n_samples, mode, p_pairs, seed, limit, json_out):
    """Evaluate top-1 predictions against a labeled corpus."""
    mode = MODE_ALIASES.get(mode, mode)
    cb = _load_cb(codebooks)
    model = TypographyModel.load(model_path, cb)
    docs = load_documents(corpus, cb)
    if limit is not None:
        docs = docs[:limit]
    report = evaluate_documents(
        model, docs, cb, n_samples=n_samples, mode=mode, seed=seed, p_k=_parse_p(p_pairs)
    )
    click.echo(report.format_table())
    if json_out:
        _emit(report.to_json(), json_out)


@main.command("baseline")
@click.option("--corpus", type=click.Path(exists=True), required=True, help="Training JSONL.")
@click.option("--test", type=click.Path(exists=True), required=True, help="Evaluation JSONL.")
@click.option("--codebooks", type=click.Path(exists=True), required=True)
@click.option("--json-out", default=None)
@_wrap
def baseline_cmd(corpus, test, codebooks, json_out):
    """Evaluate the modal-bin constant predictor."""
    cb = _load_cb(codebooks)
    train_docs = load_documents(corpus, cb)
    test_docs = load_documents(test, cb)
    predictor = mode_baseline(train_docs)
    preds = [predictor.predict(d) for d in test_docs]
    report = report_from_bins(preds, [d.label_array() for d in test_docs], cb)
    click.echo(report.format_table())
    if json_out:
        _emit(report.to_json(), json_out)


@main.command("sweep")
@click.option("--corpus", type=click.Path(exists=True), required=True)
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.option("--codebooks", type=click.Path(exists=True), required=True)
@click.option("--p", "p_list", default="0.1,0.5,0.9,0.9999", show_default=True,
              help="Comma-separated p values.")
@click.option("--modes", default="plain,structure_preserved", show_default=True)
@click.option("--n", "n_samples", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--limit", type=int, default=None)
@click.option("--out", "out_path", type=click.Path(), required=True, help="CSV path.")
@_wrap
def sweep_cmd(corpus, model_path, codebooks, p_list, modes, n_samples, seed, limit, out_path):
    """Quality/structure/diversity versus p, as CSV."""
    cb = _load_cb(codebooks)
    model = TypographyModel.load(model_path, cb)
    docs = load_documents(corpus, cb)
    if limit is not None:
        docs = docs[:limit]
    p_values = [float(v) for v in p_list.split(",") if v]
    mode_list = tuple(MODE_ALIASES.get(m, m) for m in modes.split(",") if m)
    rows = sweep_metrics(model, docs, cb, p_values, mode_list, n_samples, seed)
    Path(out_path).parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["p", "mode", "attribute", "quality_metric", "quality",
                            "structure", "diversity"]
        )
        writer.writeheader()
        writer.writerows(rows)
    click.echo(f"{len(rows)} rows -> {out_path}")


@main.command("render")
@click.option("--corpus", type=click.Path(exists=True), required=True)
@click.option("--id", "doc_id", default=None)
@click.option("--codebooks", type=click.Path(exists=True), required=True)
@click.option("--labels", "labels_path", type=click.Path(exists=True), default=None,
              help="SampleSet JSON; omit to render ground-truth labels.")
@click.option("--index", "sample_index", type=int, default=0, show_default=True)
@click.option("--embed-background/--link-background", default=True, show_default=True)
@click.option("--out", default=None)
@_wrap
def render_cmd(corpus, doc_id, codebooks, labels_path, sample_index, embed_background, out):
    """Render one label assignment to SVG."""
    cb = _load_cb(codebooks)
    doc = _pick_doc(corpus, doc_id, cb)
    if labels_path is not None:
        payload = json.loads(Path(labels_path).read_text())
        samples = payload.get("samples")
        if not samples or not (0 <= sample_index < len(samples)):
            raise click.ClickException(
                f"{labels_path} has {len(samples or [])} samples, index {sample_index} invalid"
            )
        labels = np.asarray(samples[sample_index], dtype=int)
    else:
        if doc.labels is None:
            raise click.ClickException(f"document {doc.id!r} carries no labels")
        labels = doc.label_array()
    svg = render_document(doc, labels, cb, embed_background=embed_background)
    _emit(svg, out)


@main.command("serve")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--model", "model_path", type=click.Path(exists=True), default=None)
@click.option("--codebooks", type=click.Path(exists=True), default=None)
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.option("--static", "static_dir", type=click.Path(), default=None,
              help="Directory with the UI build to serve at /.")
@_wrap
def serve_cmd(config_path, model_path, codebooks, host, port, static_dir):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    cfg = _config(config_path)
    checkpoint = _need(model_path, cfg.checkpoint, "--model")
    cb_path = _need(codebooks, cfg.codebooks, "--codebooks")
    app = create_app(checkpoint=checkpoint, codebooks=cb_path, static_dir=static_dir)
    uvicorn.run(app, host=host or cfg.host, port=port or cfg.port, log_level=cfg.log_level)


if __name__ == "__main__":
    main()
