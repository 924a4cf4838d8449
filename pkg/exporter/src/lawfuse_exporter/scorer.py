"""Trainable predicate scorer: (predicate, query) -> satisfaction in [0, 1].

Pairs are serialized as [CLS] + predicate + [SEP] + query + [SEP] over a
hashing vocabulary; the predicate is never truncated, an over-long query
loses tokens from its tail. Internally the two segments are pooled
separately and compared through elementwise cross features before a
sigmoid head, which lets the small model pick up predicate/query token
overlap from little data. Training minimizes binary cross-entropy over
the engine's pretraining files ({"query", "predicate_id", "predicate",
"label", "kind"} records).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import torch
from torch import nn

from .formats import FormatError, read_ndjson, tokenize

VOCAB = 16384
CLS, SEP = 0, 1
_OFFSET = 2


def _token_ids(text: str) -> list[int]:
    ids = []
    for token in tokenize(text):
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
        ids.append(_OFFSET + int.from_bytes(digest, "big") % VOCAB)
    return ids


def encode_pair(predicate: str, query: str, max_len: int = 256) -> list[int]:
    """The serialized [CLS] + predicate + [SEP] + query + [SEP] input."""
    pred_ids, query_ids = _encode_segments(predicate, query, max_len)
    return [CLS] + pred_ids + [SEP] + query_ids + [SEP]


def _encode_segments(predicate: str, query: str, max_len: int) -> tuple[list[int], list[int]]:
    pred_ids = _token_ids(predicate)
    budget = max(0, max_len - len(pred_ids) - 3)  # CLS and two SEPs
    return pred_ids, _token_ids(query)[:budget]


def _collate(sequences: list[list[int]]) -> tuple[torch.Tensor, torch.Tensor]:
    offsets = [0]
    flat: list[int] = []
    for seq in sequences:
        flat.extend(seq if seq else [SEP])  # keep bags non-empty
        offsets.append(len(flat))
    return torch.tensor(flat, dtype=torch.long), torch.tensor(offsets[:-1], dtype=torch.long)


class PredicateScorer(nn.Module):
    def __init__(self, hidden: int = 64, max_len: int = 256):
        super().__init__()
        self.hidden = hidden
        self.max_len = max_len
        self.embedding = nn.EmbeddingBag(VOCAB + _OFFSET, hidden, mode="mean")
        self.head = nn.Sequential(
            nn.Linear(4 * hidden, hidden), nn.ReLU(), nn.Linear(hidden, 1)
        )

    def forward(
        self,
        pred_flat: torch.Tensor,
        pred_offsets: torch.Tensor,
        query_flat: torch.Tensor,
        query_offsets: torch.Tensor,
    ) -> torch.Tensor:
        p = self.embedding(pred_flat, pred_offsets)
        q = self.embedding(query_flat, query_offsets)
        feats = torch.cat([p, q, p * q, (p - q).abs()], dim=1)
        return torch.sigmoid(self.head(feats)).squeeze(-1)

    def _batch(self, pairs: Sequence[tuple[str, str]]):
        segments = [_encode_segments(p, q, self.max_len) for p, q in pairs]
        pred = _collate([s[0] for s in segments])
        query = _collate([s[1] for s in segments])
        return pred[0], pred[1], query[0], query[1]

    def score_pairs(self, pairs: Sequence[tuple[str, str]], batch_size: int = 256) -> list[float]:
        """Probabilities for (predicate_text, query_text) pairs."""
        self.eval()
        out: list[float] = []
        with torch.no_grad():
            for start in range(0, len(pairs), batch_size):
                out.extend(float(v) for v in self(*self._batch(pairs[start : start + batch_size])))
        return out

    def score(self, predicate: str, query: str) -> float:
        return self.score_pairs([(predicate, query)])[0]


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 24
    lr: float = 2e-5
    epochs: int = 1
    hidden: int = 64
    max_len: int = 256
    val_fraction: float = 0.1
    seed: int = 0


@dataclass
class TrainReport:
    n_train: int
    n_val: int
    label_counts: dict[int, int]
    epoch_losses: list[float] = field(default_factory=list)
    first_epoch_batch_losses: list[float] = field(default_factory=list)
    val_bce: float | None = None
    val_accuracy: float | None = None

    def as_dict(self) -> dict:
        return {
            "n_train": self.n_train,
            "n_val": self.n_val,
            "label_counts": {str(k): v for k, v in self.label_counts.items()},
            "epoch_losses": self.epoch_losses,
            "val_bce": self.val_bce,
            "val_accuracy": self.val_accuracy,
        }


def load_pretraining_records(path: str | Path) -> list[dict]:
    records = []
    for rec in read_ndjson(path):
        for key in ("query", "predicate", "label"):
            if key not in rec:
                raise FormatError(f"{path}: pretraining record missing {key!r}")
        if rec["label"] not in (0, 1):
            raise FormatError(f"{path}: label must be 0 or 1, got {rec['label']!r}")
        records.append(rec)
    if not records:
        raise FormatError(f"{path}: empty pretraining file")
    return records


def train_predicate_scorer(
    records: list[dict], config: TrainConfig = TrainConfig()
) -> tuple[PredicateScorer, TrainReport]:
    torch.manual_seed(config.seed)
    generator = torch.Generator().manual_seed(config.seed)
    order = torch.randperm(len(records), generator=generator).tolist()
    shuffled = [records[i] for i in order]
    n_val = int(len(shuffled) * config.val_fraction)
    val, train = shuffled[:n_val], shuffled[n_val:]
    if not train:
        raise FormatError("no training records left after the validation split")

    model = PredicateScorer(hidden=config.hidden, max_len=config.max_len)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.lr)
    loss_fn = nn.BCELoss()
    report = TrainReport(
        n_train=len(train),
        n_val=len(val),
        label_counts={
            0: sum(1 for r in records if r["label"] == 0),
            1: sum(1 for r in records if r["label"] == 1),
        },
    )

    def batches(data):
        for start in range(0, len(data), config.batch_size):
            chunk = data[start : start + config.batch_size]
            inputs = model._batch([(r["predicate"], r["query"]) for r in chunk])
            labels = torch.tensor([float(r["label"]) for r in chunk])
            yield inputs, labels

    for epoch in range(config.epochs):
        model.train()
        epoch_losses = []
        for inputs, labels in batches(train):
            optimizer.zero_grad()
            loss = loss_fn(model(*inputs), labels)
            loss.backward()
            optimizer.step()
            epoch_losses.append(float(loss.detach()))
        report.epoch_losses.append(sum(epoch_losses) / len(epoch_losses))
        if epoch == 0:
            report.first_epoch_batch_losses = epoch_losses

    if val:
        model.eval()
        with torch.no_grad():
            losses = []
            correct = 0
            for inputs, labels in batches(val):
                probs = model(*inputs)
                losses.append(float(loss_fn(probs, labels)) * len(labels))
                correct += int(((probs >= 0.5).float() == labels).sum())
            report.val_bce = sum(losses) / len(val)
            report.val_accuracy = correct / len(val)
    return model, report


def save_scorer(model: PredicateScorer, path: str | Path) -> None:
    torch.save(
        {
            "state_dict": model.state_dict(),
            "hidden": model.hidden,
            "max_len": model.max_len,
        },
        path,
    )


def load_scorer(path: str | Path) -> PredicateScorer:
    bundle = torch.load(path, weights_only=True)
    model = PredicateScorer(hidden=bundle["hidden"], max_len=bundle["max_len"])
    model.load_state_dict(bundle["state_dict"])
    model.eval()
    return model
