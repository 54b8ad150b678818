"""AdamW with decoupled weight decay."""
from __future__ import annotations

import numpy as np

from .blocks import ParameterStore


class OptimError(RuntimeError):
    pass


class AdamW:
    def __init__(
        self,
        store: ParameterStore,
        lr: float = 2e-4,
        betas: tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
        weight_decay: float = 0.01,
    ):
        self.store = store
        self.lr = lr
        self.b1, self.b2 = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.m = {name: np.zeros_like(p.data) for name, p in store.items()}
        self.v = {name: np.zeros_like(p.data) for name, p in store.items()}

    def zero_grad(self) -> None:
        self.store.zero_grad()

    def step(self) -> None:
        self.store.step += 1
        t = self.store.step
        bc1 = 1.0 - self.b1**t
        bc2 = 1.0 - self.b2**t
        for name, p in self.store.items():
            if p.grad is None:
                raise OptimError(f"parameter {name!r} has no gradient")
            g = p.grad
            m = self.m[name]
            v = self.v[name]
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * g * g
            update = (m / bc1) / (np.sqrt(v / bc2) + self.eps)
            p.data -= self.lr * update
            # decay is decoupled from the gradient path
            p.data -= self.lr * self.weight_decay * p.data
