"""Transformer building blocks (pre-norm) on top of the tensor module."""
from __future__ import annotations

import numpy as np

from . import tensor as T
from .tensor import ShapeError, Tensor


def truncated_normal(rng: np.random.Generator, shape, std: float = 0.02) -> np.ndarray:
    """Normal(0, std) with redraws outside two standard deviations."""
    out = rng.standard_normal(shape) * std
    bad = np.abs(out) > 2 * std
    while np.any(bad):
        out[bad] = rng.standard_normal(int(bad.sum())) * std
        bad = np.abs(out) > 2 * std
    return out


class ParameterStore:
    """Named parameter registry walked by the optimizer and checkpointer."""

    def __init__(self, seed: int = 0):
        self.params: dict[str, Tensor] = {}
        self.step = 0
        self.rng = np.random.default_rng(np.random.SeedSequence([seed]))

    def create(self, name: str, shape, init: str = "trunc_normal", std: float = 0.02) -> Tensor:
        if name in self.params:
            raise ValueError(f"duplicate parameter name {name!r}")
        if init == "zeros":
            data = np.zeros(shape)
        elif init == "ones":
            data = np.ones(shape)
        elif init == "trunc_normal":
            data = truncated_normal(self.rng, shape, std)
        else:
            raise ValueError(f"unknown init {init!r}")
        p = Tensor(data, requires_grad=True)
        self.params[name] = p
        return p

    def items(self):
        return sorted(self.params.items())

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.grad = None

    def total_parameters(self) -> int:
        return sum(p.size for p in self.params.values())

    def state_arrays(self) -> dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.items()}

    def load_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        missing = set(self.params) - set(arrays)
        if missing:
            raise KeyError(f"checkpoint misses parameters: {sorted(missing)[:3]}…")
        for name, p in self.params.items():
            a = np.asarray(arrays[name], dtype=float)
            if a.shape != p.data.shape:
                raise ShapeError(f"{name}: checkpoint shape {a.shape} != model shape {p.data.shape}")
            p.data = a


class Linear:
    def __init__(self, store: ParameterStore, name: str, in_dim: int, out_dim: int):
        self.w = store.create(f"{name}.w", (in_dim, out_dim))
        self.b = store.create(f"{name}.b", (out_dim,), init="zeros")

    def __call__(self, x: Tensor) -> Tensor:
        return x @ self.w + self.b


class Embedding:
    def __init__(self, store: ParameterStore, name: str, count: int, dim: int):
        self.table = store.create(f"{name}.table", (count, dim))

    def __call__(self, ids: np.ndarray) -> Tensor:
        return T.embedding(self.table, ids)


class LayerNorm:
    def __init__(self, store: ParameterStore, name: str, dim: int):
        self.gamma = store.create(f"{name}.gamma", (dim,), init="ones")
        self.beta = store.create(f"{name}.beta", (dim,), init="zeros")

    def __call__(self, x: Tensor) -> Tensor:
        return T.layer_norm(x) * self.gamma + self.beta


class MultiHeadAttention:
    """Scaled dot-product attention over (batch, length, dim) tensors.

    `mask` is additive, broadcast against (batch, heads, Lq, Lk); use large
    negative values to forbid positions.
    """

    def __init__(self, store: ParameterStore, name: str, dim: int, heads: int):
        if dim % heads:
            raise ShapeError(f"dim {dim} not divisible by heads {heads}")
        self.heads = heads
        self.head_dim = dim // heads
        self.wq = Linear(store, f"{name}.wq", dim, dim)
        self.wk = Linear(store, f"{name}.wk", dim, dim)
        self.wv = Linear(store, f"{name}.wv", dim, dim)
        self.wo = Linear(store, f"{name}.wo", dim, dim)

    def _split(self, x: Tensor, B: int, L: int) -> Tensor:
        return x.reshape((B, L, self.heads, self.head_dim)).transpose(0, 2, 1, 3)

    def __call__(self, q_in: Tensor, kv_in: Tensor, mask: np.ndarray | None = None) -> Tensor:
        B, Lq, D = q_in.shape
        Lk = kv_in.shape[1]
        q = self._split(self.wq(q_in), B, Lq)
        k = self._split(self.wk(kv_in), B, Lk)
        v = self._split(self.wv(kv_in), B, Lk)
        scores = (q @ k.transpose(0, 1, 3, 2)) * (1.0 / np.sqrt(self.head_dim))
        if mask is not None:
            scores = scores + Tensor(mask)
        attn = T.softmax(scores, axis=-1)
        out = (attn @ v).transpose(0, 2, 1, 3).reshape((B, Lq, D))
        return self.wo(out)


class FeedForward:
    def __init__(self, store: ParameterStore, name: str, dim: int, ff_dim: int):
        self.lin1 = Linear(store, f"{name}.lin1", dim, ff_dim)
        self.lin2 = Linear(store, f"{name}.lin2", ff_dim, dim)

    def __call__(self, x: Tensor) -> Tensor:
        return self.lin2(T.gelu(self.lin1(x)))


class EncoderBlock:
    def __init__(self, store: ParameterStore, name: str, dim: int, heads: int, ff_dim: int):
        self.ln1 = LayerNorm(store, f"{name}.ln1", dim)
        self.attn = MultiHeadAttention(store, f"{name}.attn", dim, heads)
        self.ln2 = LayerNorm(store, f"{name}.ln2", dim)
        self.ffn = FeedForward(store, f"{name}.ffn", dim, ff_dim)

    def __call__(self, x: Tensor, mask: np.ndarray | None = None) -> Tensor:
        h = self.ln1(x)
        x = x + self.attn(h, h, mask)
        return x + self.ffn(self.ln2(x))


class DecoderBlock:
    def __init__(self, store: ParameterStore, name: str, dim: int, heads: int, ff_dim: int):
        self.ln1 = LayerNorm(store, f"{name}.ln1", dim)
        self.self_attn = MultiHeadAttention(store, f"{name}.self", dim, heads)
        self.ln2 = LayerNorm(store, f"{name}.ln2", dim)
        self.cross_attn = MultiHeadAttention(store, f"{name}.cross", dim, heads)
        self.ln3 = LayerNorm(store, f"{name}.ln3", dim)
        self.ffn = FeedForward(store, f"{name}.ffn", dim, ff_dim)

    def __call__(
        self,
        x: Tensor,
        memory: Tensor,
        self_mask: np.ndarray | None = None,
        memory_mask: np.ndarray | None = None,
    ) -> Tensor:
        h = self.ln1(x)
        x = x + self.self_attn(h, h, self_mask)
        x = x + self.cross_attn(self.ln2(x), memory, memory_mask)
        return x + self.ffn(self.ln3(x))


def causal_mask(length: int) -> np.ndarray:
    """(1, 1, L, L) additive mask forbidding attention to future positions."""
    m = np.triu(np.ones((length, length)), k=1) * -1e9
    return m[None, None]


def padding_mask(valid: np.ndarray) -> np.ndarray:
    """(B, 1, 1, L) additive mask from a (B, L) 0/1 validity array."""
    return (1.0 - np.asarray(valid, dtype=float))[:, None, None, :] * -1e9
