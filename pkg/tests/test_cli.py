"""End-to-end CLI behavior through click's test runner.

One tiny corpus/codebooks/checkpoint workspace is built once and shared;
individual tests only read from it.
"""
import csv
import json
from types import SimpleNamespace

import pytest
from click.testing import CliRunner

from typogen.cli import main

TINY_TRAIN = [
    "--epochs", "1", "--max-steps", "2", "--batch-size", "4", "--lr", "1e-3",
    "--embed-dim", "16", "--ff-dim", "24", "--heads", "2",
    "--encoder-blocks", "1", "--decoder-blocks", "1", "--seed", "0",
]


def run(runner, args, code=0):
    result = runner.invoke(main, args)
    assert result.exit_code == code, f"{args}\n{result.output}"
    return result


@pytest.fixture(scope="module")
def ws(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    runner = CliRunner()
    corpus_dir = root / "corpus"
    gen = run(runner, ["gen-synthetic", "--n", "12", "--seed", "3", "--out", str(corpus_dir)])
    cb = root / "cb.json"
    fit = run(runner, ["fit-codebooks", "--corpus", str(corpus_dir / "corpus.jsonl"),
                       "--out", str(cb)])
    model = root / "model.tgn"
    trained = run(runner, [
        "train", "--corpus", str(corpus_dir / "train.jsonl"),
        "--val", str(corpus_dir / "val.jsonl"),
        "--codebooks", str(cb), "--out", str(model), *TINY_TRAIN,
    ])
    return SimpleNamespace(
        root=root, runner=runner, corpus=corpus_dir, cb=cb, model=model,
        gen_output=gen.output, fit_output=fit.output, train_output=trained.output,
        base=["--corpus", str(corpus_dir / "corpus.jsonl"),
              "--model", str(model), "--codebooks", str(cb)],
    )


# ---------------- pipeline commands ----------------


def test_gen_synthetic_writes_corpus_and_splits(ws):
    assert "wrote 12 documents" in ws.gen_output
    assert "splits 10/1/1" in ws.gen_output
    for name in ("corpus.jsonl", "train.jsonl", "val.jsonl", "test.jsonl"):
        assert (ws.corpus / name).exists()
    assert (ws.corpus / "backgrounds").is_dir()


def test_gen_synthetic_no_split(ws, tmp_path):
    out = tmp_path / "flat"
    run(ws.runner, ["gen-synthetic", "--n", "4", "--seed", "1", "--out", str(out), "--no-split"])
    assert (out / "corpus.jsonl").exists()
    assert not (out / "train.jsonl").exists()


def test_fit_codebooks_reports_sizes(ws):
    assert "codebooks ->" in ws.fit_output
    assert ws.cb.exists()


def test_train_writes_checkpoint_and_history(ws):
    assert "trained 2 steps" in ws.train_output
    assert "best val" in ws.train_output
    assert ws.model.exists()
    assert ws.model.with_suffix(".tgn.json").exists()
    history = json.loads((ws.root / "model.tgn.history.json").read_text())
    assert history and {"epoch", "train_loss", "steps", "val_loss"} <= set(history[0])


# ---------------- inference commands ----------------


def test_predict_stdout_payload(ws):
    result = run(ws.runner, ["predict", *ws.base])
    payload = json.loads(result.output)
    assert payload["doc_id"] == "doc00000"
    assert {"labels", "clusters"} <= set(payload)
    assert all(len(row) == 8 for row in payload["labels"])


def test_predict_by_id_to_file(ws, tmp_path):
    out = tmp_path / "pred.json"
    run(ws.runner, ["predict", *ws.base, "--id", "doc00003", "--out", str(out)])
    assert json.loads(out.read_text())["doc_id"] == "doc00003"


def test_predict_unknown_id_is_runtime_error(ws):
    result = run(ws.runner, ["predict", *ws.base, "--id", "ghost"], code=1)
    assert "no document 'ghost'" in result.output


def test_sample_emits_sample_set(ws):
    result = run(ws.runner, ["sample", *ws.base, "--n", "3", "--seed", "7"])
    payload = json.loads(result.output)
    assert payload["mode"] == "structure_preserved"
    assert payload["seed"] == 7
    assert len(payload["samples"]) == 3
    assert len(payload["p_k"]) == 8


def test_sample_runs_are_byte_identical(ws):
    args = ["sample", *ws.base, "--n", "2", "--seed", "11", "--p", "font=0.5"]
    first = run(ws.runner, args).output
    second = run(ws.runner, args).output
    assert first == second


def test_sample_mode_alias(ws):
    result = run(ws.runner, ["sample", *ws.base, "--mode", "structure"])
    assert json.loads(result.output)["mode"] == "structure_preserved"


def test_render_ground_truth(ws):
    result = run(ws.runner, ["render", "--corpus", str(ws.corpus / "corpus.jsonl"),
                             "--codebooks", str(ws.cb)])
    assert result.output.startswith("<svg")
    assert 'data-generator="typogen"' in result.output


def test_render_sampled_labels(ws, tmp_path):
    labels = tmp_path / "set.json"
    run(ws.runner, ["sample", *ws.base, "--n", "2", "--out", str(labels)])
    out = tmp_path / "doc.svg"
    run(ws.runner, ["render", "--corpus", str(ws.corpus / "corpus.jsonl"),
                    "--codebooks", str(ws.cb), "--labels", str(labels),
                    "--index", "1", "--link-background", "--out", str(out)])
    svg = out.read_text()
    assert svg.startswith("<svg") and "data:image/png" not in svg


def test_render_bad_sample_index(ws, tmp_path):
    labels = tmp_path / "set.json"
    run(ws.runner, ["sample", *ws.base, "--out", str(labels)])
    result = run(ws.runner, ["render", "--corpus", str(ws.corpus / "corpus.jsonl"),
                             "--codebooks", str(ws.cb), "--labels", str(labels),
                             "--index", "5"], code=1)
    assert "index 5 invalid" in result.output


# ---------------- reporting commands ----------------


def test_eval_table_and_json(ws, tmp_path):
    out = tmp_path / "report.json"
    result = run(ws.runner, ["eval", *ws.base, "--limit", "4", "--samples", "2",
                             "--json-out", str(out)])
    assert "documents: 4" in result.output
    assert "diversity" in result.output
    report = json.loads(out.read_text())
    assert report["documents"] == 4
    assert set(report["accuracy_percent"]) == {"font", "alignment", "capitalization"}
    assert report["diversity_samples"] == 2


def test_baseline_table(ws):
    result = run(ws.runner, ["baseline", "--corpus", str(ws.corpus / "train.jsonl"),
                             "--test", str(ws.corpus / "test.jsonl"),
                             "--codebooks", str(ws.cb)])
    assert "documents: 1" in result.output


def test_sweep_csv(ws, tmp_path):
    out = tmp_path / "sweep.csv"
    result = run(ws.runner, ["sweep", *ws.base, "--p", "0.5", "--modes", "plain",
                             "--n", "2", "--limit", "2", "--out", str(out)])
    assert "8 rows" in result.output
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 8
    assert set(rows[0]) == {"p", "mode", "attribute", "quality_metric",
                            "quality", "structure", "diversity"}
    assert {r["attribute"] for r in rows} == {
        "font", "color", "alignment", "capitalization",
        "font_size", "angle", "letter_spacing", "line_spacing"}


# ---------------- failure modes ----------------


@pytest.mark.parametrize(
    "extra",
    [
        ["--mode", "bogus"],
        ["--p", "font"],
        ["--p", "mystery=0.5"],
        ["--p", "font=abc"],
    ],
)
def test_sample_usage_errors(ws, extra):
    run(ws.runner, ["sample", *ws.base, *extra], code=2)


def test_missing_required_flag_is_usage_error(ws):
    run(ws.runner, ["gen-synthetic", "--out", "somewhere"], code=2)


def test_nonexistent_path_is_usage_error(ws):
    run(ws.runner, ["predict", "--corpus", "nope.jsonl", "--model", str(ws.model),
                    "--codebooks", str(ws.cb)], code=2)


def test_malformed_corpus_is_runtime_error(ws, tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"id": "x", "nope": 1}\n')
    run(ws.runner, ["fit-codebooks", "--corpus", str(bad), "--out", str(tmp_path / "cb.json")],
        code=1)


def test_serve_needs_model(ws):
    result = run(ws.runner, ["serve"], code=2)
    assert "missing --model" in result.output
