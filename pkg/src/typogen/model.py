"""Typography encoder-decoder.

The encoder consumes one token per context quantity: three for the canvas
(background, aspect, element count) and six per element (text, left, top,
line count, char count, local background), each projected or embedded into
embed_dim and tagged with modality and element-index embeddings. The
decoder queries are positional encodings plus the summed label embeddings
of the previous element (a learned start token for the first), run with
causal self-attention and cross-attention over the encoder memory. Head
input concatenates the decoder output with a skip MLP over the element's
raw projected embeddings and the canvas embeddings; one softmax head per
attribute with the fixed cardinalities from the attributes table.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .attributes import ATTRIBUTES, CARDINALITIES, CONTEXT_BINS
from .docs import DesignDocument
from .features import CANVAS_IMAGE_DIM, TEXT_DIM, DeterministicExtractor
from .nn import (
    AdamW,
    DecoderBlock,
    Embedding,
    EncoderBlock,
    LayerNorm,
    Linear,
    ParameterStore,
    Tensor,
    concat,
    gelu,
    log_softmax,
    no_grad,
)
from .nn.blocks import causal_mask, padding_mask
from .nn.checkpoint import load_params, save_params
from .quantize import CodebookSet

_MODALITIES = ("canvas_bg", "aspect", "numtext", "text", "left", "top", "line_count", "char_count", "elem_bg")


class ModelError(RuntimeError):
    pass


class TrainDivergence(ModelError):
    pass


@dataclass(frozen=True)
class ModelConfig:
    embed_dim: int = 32
    ff_dim: int = 64
    heads: int = 2
    encoder_blocks: int = 2
    decoder_blocks: int = 2
    dropout: float = 0.0
    seed: int = 0
    max_elements: int = 50

    def __post_init__(self) -> None:
        if self.embed_dim % self.heads:
            raise ModelError(f"embed_dim {self.embed_dim} not divisible by heads {self.heads}")

    @classmethod
    def paper_scale(cls) -> "ModelConfig":
        # the block count in the source setup is ambiguous between
        # encoder-only and total; 4+4 is the exposed preset
        return cls(embed_dim=256, ff_dim=512, heads=8, encoder_blocks=4, decoder_blocks=4)


@dataclass(frozen=True)
class TrainParams:
    epochs: int = 30
    lr: float = 2e-4
    batch_size: int = 16
    weight_decay: float = 0.01
    betas: tuple[float, float] = (0.9, 0.999)
    eps: float = 1e-8
    max_steps: int | None = None
    seed: int = 0


@dataclass
class TrainResult:
    history: list[dict]
    best_epoch: int
    best_val_loss: float
    steps: int


@dataclass(frozen=True)
class EncodedDoc:
    """Frozen per-document encoder state for autoregressive decoding."""

    doc: DesignDocument
    memory: np.ndarray  # (1, 3+6T, D)
    elem_raw: np.ndarray  # (1, T, 6D)
    canvas_raw: np.ndarray  # (1, 3D)

    @property
    def num_elements(self) -> int:
        return self.doc.num_elements


class TypographyModel:
    def __init__(self, config: ModelConfig, extractor=None):
        self.config = config
        self.extractor = extractor or DeterministicExtractor()
        store = ParameterStore(seed=config.seed)
        self.store = store
        D = config.embed_dim

        self.proj_canvas_bg = Linear(store, "enc.proj.canvas_bg", CANVAS_IMAGE_DIM, D)
        self.proj_elem_bg = Linear(store, "enc.proj.elem_bg", CANVAS_IMAGE_DIM, D)
        self.proj_text = Linear(store, "enc.proj.text", TEXT_DIM, D)
        self.emb_context = {
            name: Embedding(store, f"enc.emb.{name}", CONTEXT_BINS[name], D)
            for name in ("aspect", "numtext", "left", "top", "line_count", "char_count")
        }
        self.emb_modality = Embedding(store, "enc.emb.modality", len(_MODALITIES), D)
        self.emb_elem_index = Embedding(store, "enc.emb.elem_index", config.max_elements + 1, D)
        self.encoder = [
            EncoderBlock(store, f"enc.block{i}", D, config.heads, config.ff_dim)
            for i in range(config.encoder_blocks)
        ]
        self.enc_ln = LayerNorm(store, "enc.ln", D)

        self.emb_labels = {
            name: Embedding(store, f"dec.emb.{name}", CARDINALITIES[name], D) for name in ATTRIBUTES
        }
        self.start_token = store.create("dec.start", (D,))
        self.emb_pos = Embedding(store, "dec.emb.pos", config.max_elements, D)
        self.decoder = [
            DecoderBlock(store, f"dec.block{i}", D, config.heads, config.ff_dim)
            for i in range(config.decoder_blocks)
        ]
        self.dec_ln = LayerNorm(store, "dec.ln", D)

        self.skip_lin1 = Linear(store, "skip.lin1", 9 * D, D)
        self.skip_lin2 = Linear(store, "skip.lin2", D, D)
        self.heads = {
            name: Linear(store, f"head.{name}", 2 * D, CARDINALITIES[name]) for name in ATTRIBUTES
        }

        self._feature_cache: dict[str, dict] = {}
        self._train_rng = np.random.default_rng(np.random.SeedSequence([config.seed, 1]))

    # ---------------- features ----------------

    def _doc_features(self, doc: DesignDocument, cache: bool) -> dict:
        if cache and doc.id in self._feature_cache:
            return self._feature_cache[doc.id]
        if doc.canvas.aspect_bin is None:
            raise ModelError(f"document {doc.id!r} has no derived context bins")
        ex = self.extractor
        feats = {
            "canvas": ex.canvas_image(doc.canvas),
            "aspect": doc.canvas.aspect_bin,
            "numtext": doc.canvas.numtext_bin,
            "text": np.stack([ex.text(el) for el in doc.elements]),
            "elem_bg": np.stack([ex.element_image(doc.canvas, el) for el in doc.elements]),
            "left": np.array([el.left_bin for el in doc.elements], dtype=int),
            "top": np.array([el.top_bin for el in doc.elements], dtype=int),
            "line_count": np.array([el.line_count_bin for el in doc.elements], dtype=int),
            "char_count": np.array([el.char_count_bin for el in doc.elements], dtype=int),
        }
        if cache:
            self._feature_cache[doc.id] = feats
        return feats

    # ---------------- encoder ----------------

    def _encode_batch(self, docs: list[DesignDocument], cache: bool = False):
        B = len(docs)
        T = max(d.num_elements for d in docs)
        D = self.config.embed_dim
        if T > self.config.max_elements:
            raise ModelError(f"document with {T} elements exceeds max_elements {self.config.max_elements}")

        canvas_feat = np.zeros((B, CANVAS_IMAGE_DIM))
        aspect_ids = np.zeros(B, dtype=int)
        numtext_ids = np.zeros(B, dtype=int)
        text_feat = np.zeros((B, T, TEXT_DIM))
        elem_bg_feat = np.zeros((B, T, CANVAS_IMAGE_DIM))
        ctx_ids = {name: np.zeros((B, T), dtype=int) for name in ("left", "top", "line_count", "char_count")}
        elem_mask = np.zeros((B, T))
        for b, doc in enumerate(docs):
            f = self._doc_features(doc, cache)
            t = doc.num_elements
            canvas_feat[b] = f["canvas"]
            aspect_ids[b] = f["aspect"]
            numtext_ids[b] = f["numtext"]
            text_feat[b, :t] = f["text"]
            elem_bg_feat[b, :t] = f["elem_bg"]
            for name in ctx_ids:
                ctx_ids[name][b, :t] = f[name]
            elem_mask[b, :t] = 1.0

        def tag(x: Tensor, modality: int) -> Tensor:
            return x + self.emb_modality.table[modality]

        # canvas tokens (B, 3, D)
        c_bg = tag(self.proj_canvas_bg(Tensor(canvas_feat)), 0)
        c_aspect = tag(self.emb_context["aspect"](aspect_ids), 1)
        c_num = tag(self.emb_context["numtext"](numtext_ids), 2)
        canvas_tokens = concat(
            [t.reshape((B, 1, D)) for t in (c_bg, c_aspect, c_num)], axis=1
        ) + self.emb_elem_index.table[0]

        # element tokens, six per element
        parts_raw = [
            self.proj_text(Tensor(text_feat)),
            self.emb_context["left"](ctx_ids["left"]),
            self.emb_context["top"](ctx_ids["top"]),
            self.emb_context["line_count"](ctx_ids["line_count"]),
            self.emb_context["char_count"](ctx_ids["char_count"]),
            self.proj_elem_bg(Tensor(elem_bg_feat)),
        ]
        idx_emb = self.emb_elem_index(np.arange(1, T + 1))  # (T, D)
        parts = [tag(p, 3 + i) + idx_emb for i, p in enumerate(parts_raw)]
        elem_tokens = concat([p.reshape((B, T, 1, D)) for p in parts], axis=2).reshape((B, 6 * T, D))

        seq = concat([canvas_tokens, elem_tokens], axis=1)
        valid = np.concatenate([np.ones((B, 3)), np.repeat(elem_mask, 6, axis=1)], axis=1)
        mask = padding_mask(valid)
        h = seq
        for block in self.encoder:
            h = block(h, mask)
        memory = self.enc_ln(h)

        elem_raw = concat([p.reshape((B, T, 1, D)) for p in parts_raw], axis=2).reshape((B, T, 6 * D))
        canvas_raw = concat(
            [t.reshape((B, 1, D)) for t in (c_bg, c_aspect, c_num)], axis=1
        ).reshape((B, 3 * D))
        return memory, elem_raw, canvas_raw, valid, elem_mask

    # ---------------- decoder ----------------

    def _queries(self, prev_labels: np.ndarray, B: int, T: int) -> Tensor:
        """(B, T, D) decoder inputs from (B, T-1, 8) previous labels."""
        D = self.config.embed_dim
        start = self.start_token.reshape((1, 1, D)) + Tensor(np.zeros((B, 1, 1)))
        if T > 1:
            lab_sum = None
            for k, name in enumerate(ATTRIBUTES):
                e = self.emb_labels[name](prev_labels[:, :, k])
                lab_sum = e if lab_sum is None else lab_sum + e
            q = concat([start, lab_sum], axis=1)
        else:
            q = start
        return q + self.emb_pos(np.arange(T))

    def _decode(self, memory: Tensor, queries: Tensor, self_mask, memory_mask) -> Tensor:
        h = queries
        for block in self.decoder:
            h = block(h, memory, self_mask, memory_mask)
        return self.dec_ln(h)

    def _head_logits(self, h: Tensor, elem_raw: Tensor, canvas_raw: Tensor) -> dict[str, Tensor]:
        B, T, _ = h.shape
        canvas_tiled = canvas_raw.reshape((B, 1, 3 * self.config.embed_dim)) + Tensor(np.zeros((B, T, 1)))
        s = self.skip_lin2(gelu(self.skip_lin1(concat([elem_raw, canvas_tiled], axis=2))))
        head_in = concat([h, s], axis=2)
        return {name: head(head_in) for name, head in self.heads.items()}

    def forward_logits(self, docs: list[DesignDocument], cache: bool = False) -> tuple[dict[str, Tensor], np.ndarray, np.ndarray]:
        """Teacher-forced logits for every element of every document.

        Returns (per-attribute logits (B, T, K), labels (B, T, 8), mask (B, T)).
        """
        B = len(docs)
        T = max(d.num_elements for d in docs)
        labels = np.zeros((B, T, len(ATTRIBUTES)), dtype=int)
        for b, doc in enumerate(docs):
            if doc.labels is None:
                raise ModelError(f"document {doc.id!r} has no labels")
            labels[b, : doc.num_elements] = doc.label_array()
        memory, elem_raw, canvas_raw, valid, elem_mask = self._encode_batch(docs, cache)
        queries = self._queries(labels[:, :-1], B, T)
        self_mask = causal_mask(T) + padding_mask(elem_mask)
        memory_mask = padding_mask(valid)
        h = self._decode(memory, queries, self_mask, memory_mask)
        logits = self._head_logits(h, elem_raw, canvas_raw)
        return logits, labels, elem_mask

    def loss(self, docs: list[DesignDocument], cache: bool = False) -> Tensor:
        """Summed cross-entropy over elements and attributes, averaged over
        documents (teacher forcing)."""
        logits, labels, elem_mask = self.forward_logits(docs, cache)
        B, T = elem_mask.shape
        bidx, tidx = np.indices((B, T))
        mask = Tensor(elem_mask)
        total = None
        for k, name in enumerate(ATTRIBUTES):
            ls = log_softmax(logits[name], axis=-1)
            picked = ls[bidx, tidx, labels[:, :, k]]
            term = (picked * mask).sum()
            total = term if total is None else total + term
        return total * (-1.0 / B)

    # ---------------- inference ----------------

    def encode_context(self, doc: DesignDocument, cache: bool = False) -> EncodedDoc:
        with no_grad():
            memory, elem_raw, canvas_raw, _, _ = self._encode_batch([doc], cache)
        return EncodedDoc(doc=doc, memory=memory.data, elem_raw=elem_raw.data, canvas_raw=canvas_raw.data)

    def decode_logits(self, encoded: EncodedDoc, prev_labels: list, t: int) -> dict[str, np.ndarray]:
        """Per-attribute logits for element t (1-based) given labels of
        elements 1..t-1."""
        T = encoded.num_elements
        if not (1 <= t <= T):
            raise ModelError(f"element index {t} outside 1..{T}")
        if len(prev_labels) != t - 1:
            raise ModelError(f"need {t - 1} previous labels, got {len(prev_labels)}")
        with no_grad():
            prev = np.array([list(lab) for lab in prev_labels], dtype=int).reshape((1, t - 1, len(ATTRIBUTES)))
            queries = self._queries(prev, 1, t)
            h = self._decode(Tensor(encoded.memory), queries, causal_mask(t), None)
            h_t = h[:, t - 1 : t, :]
            elem_raw_t = Tensor(encoded.elem_raw[:, t - 1 : t, :])
            logits = self._head_logits(h_t, elem_raw_t, Tensor(encoded.canvas_raw))
        return {name: logits[name].data[0, 0] for name in ATTRIBUTES}

    # ---------------- persistence ----------------

    def save(self, path: str | Path, codebooks: CodebookSet) -> None:
        path = Path(path)
        save_params(self.store.state_arrays(), path)
        sidecar = {
            "config": dataclasses.asdict(self.config),
            "codebook_hash": codebooks.content_hash(),
        }
        Path(f"{path}.json").write_text(json.dumps(sidecar, indent=1, sort_keys=True))

    @classmethod
    def load(cls, path: str | Path, codebooks: CodebookSet, extractor=None) -> "TypographyModel":
        path = Path(path)
        sidecar_path = Path(f"{path}.json")
        if not sidecar_path.exists():
            raise ModelError(f"missing sidecar {sidecar_path}")
        sidecar = json.loads(sidecar_path.read_text())
        if sidecar["codebook_hash"] != codebooks.content_hash():
            raise ModelError("checkpoint was trained against different codebooks")
        config = ModelConfig(**sidecar["config"])
        model = cls(config, extractor=extractor)
        model.store.load_arrays(load_params(path))
        return model

    def params_hash(self) -> str:
        import hashlib

        h = hashlib.sha256()
        for name, p in self.store.items():
            h.update(name.encode())
            h.update(np.ascontiguousarray(p.data, dtype=np.float32).tobytes())
        return h.hexdigest()


def train(
    model: TypographyModel,
    train_docs: list[DesignDocument],
    val_docs: list[DesignDocument],
    params: TrainParams,
) -> TrainResult:
    """Mini-batch teacher-forced training; keeps the best-validation
    parameters. Deterministic given seeds."""
    if not train_docs:
        raise ModelError("empty training set")
    opt = AdamW(
        model.store,
        lr=params.lr,
        betas=params.betas,
        eps=params.eps,
        weight_decay=params.weight_decay,
    )
    history: list[dict] = []
    best = (np.inf, -1, None)
    steps = 0
    for epoch in range(params.epochs):
        rng = np.random.default_rng(np.random.SeedSequence([params.seed, epoch]))
        order = rng.permutation(len(train_docs))
        epoch_loss = 0.0
        n_batches = 0
        for lo in range(0, len(order), params.batch_size):
            batch = [train_docs[i] for i in order[lo : lo + params.batch_size]]
            opt.zero_grad()
            loss = model.loss(batch, cache=True)
            value = loss.item()
            if not np.isfinite(value):
                raise TrainDivergence(
                    f"non-finite loss {value} at epoch {epoch} step {steps}; "
                    f"lr={params.lr}, batch_size={params.batch_size}"
                )
            loss.backward()
            opt.step()
            epoch_loss += value
            n_batches += 1
            steps += 1
            if params.max_steps is not None and steps >= params.max_steps:
                break
        record = {"epoch": epoch, "train_loss": epoch_loss / max(n_batches, 1), "steps": steps}
        if val_docs:
            record["val_loss"] = evaluate_loss(model, val_docs, params.batch_size)
            if record["val_loss"] < best[0]:
                best = (record["val_loss"], epoch, model.store.state_arrays())
        history.append(record)
        if params.max_steps is not None and steps >= params.max_steps:
            break
    if best[2] is not None:
        model.store.load_arrays(best[2])
        best_epoch, best_val = best[1], best[0]
    else:
        best_epoch, best_val = len(history) - 1, float("nan")
    return TrainResult(history=history, best_epoch=best_epoch, best_val_loss=best_val, steps=steps)


def evaluate_loss(model: TypographyModel, docs: list[DesignDocument], batch_size: int = 32) -> float:
    total = 0.0
    with no_grad():
        for lo in range(0, len(docs), batch_size):
            batch = docs[lo : lo + batch_size]
            total += model.loss(batch, cache=True).item() * len(batch)
    return total / len(docs)
