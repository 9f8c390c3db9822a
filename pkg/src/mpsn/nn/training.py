"""Mini-batch cross-entropy training."""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from ..numerics import autodiff as ad
from ..numerics.optim import SGD, Adam, StepSchedule

log = logging.getLogger(__name__)


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class TrainConfig:
    epochs: int = 100
    batch_size: int = 64
    lr: float = 1e-3
    lr_step: int = 20
    lr_factor: float = 0.5
    optimizer: str = "adam"

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class ArrayDataset:
    """Named input arrays sharing a leading sample axis, plus integer labels."""

    inputs: dict[str, np.ndarray]
    labels: np.ndarray

    def __len__(self) -> int:
        return len(self.labels)

    def batch(self, idx) -> dict[str, np.ndarray]:
        return {k: v[idx] for k, v in self.inputs.items()}


@dataclass
class TrainResult:
    params: list[np.ndarray]
    history: list[dict] = field(default_factory=list)

    @property
    def final(self) -> dict:
        return self.history[-1] if self.history else {}


def accuracy(forward: Callable, data: ArrayDataset, batch_size: int = 256) -> float:
    if len(data) == 0:
        return float("nan")
    correct = 0
    for start in range(0, len(data), batch_size):
        idx = np.arange(start, min(start + batch_size, len(data)))
        logits = forward(**data.batch(idx)).value
        correct += int((logits.argmax(axis=1) == data.labels[idx]).sum())
    return correct / len(data)


def train(model, forward: Callable, train_set: ArrayDataset, test_set: ArrayDataset | None,
          config: TrainConfig, seed: int, eval_every: int = 1) -> TrainResult:
    """Optimise ``model.params()`` on the softmax cross-entropy of ``forward(**batch)``.

    The batch order is drawn from ``seed``; everything else is deterministic.
    """
    rng = np.random.default_rng(seed)
    params = model.params()
    schedule = StepSchedule(config.lr, config.lr_factor, config.lr_step)
    if config.optimizer == "adam":
        opt = Adam(params, lr=schedule(0))
    elif config.optimizer == "sgd":
        opt = SGD(params, lr=schedule(0))
    else:
        raise ValueError(f"unknown optimizer {config.optimizer!r}")
    history = []
    for epoch in range(config.epochs):
        opt.lr = schedule(epoch)
        order = rng.permutation(len(train_set))
        losses = []
        for start in range(0, len(order), config.batch_size):
            idx = order[start:start + config.batch_size]
            opt.zero_grad()
            loss = ad.cross_entropy(forward(**train_set.batch(idx)), train_set.labels[idx])
            value = float(loss.value)
            if not np.isfinite(value):
                raise TrainingDiverged(
                    f"non-finite loss {value} at epoch {epoch}, batch starting {start}, lr {opt.lr:g}; "
                    f"max |param| = {max(np.abs(p.value).max() for p in params):.3g}")
            ad.backward(loss)
            opt.step()
            losses.append(value)
        row = {"epoch": epoch, "loss": float(np.mean(losses)), "lr": opt.lr}
        last = epoch == config.epochs - 1
        if last or (epoch + 1) % eval_every == 0:
            row["train_acc"] = accuracy(forward, train_set)
            row["test_acc"] = accuracy(forward, test_set) if test_set is not None else float("nan")
        history.append(row)
        log.debug("epoch %d %s", epoch, row)
    return TrainResult([p.value.copy() for p in params], history)
