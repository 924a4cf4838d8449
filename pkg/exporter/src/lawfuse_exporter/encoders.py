"""Sentence encoders behind one interface: encode(list[str]) -> [n, dim].

The built-in hash encoder is fully deterministic and needs no downloaded
weights: hashed token counts pass through a seeded random projection and
tanh, then L2 normalization. Pretrained sentence-transformers models are
accepted via "st:<model id>" when available locally.
"""

from __future__ import annotations

import hashlib
import math

import numpy as np
import torch


class EncoderLoadError(Exception):
    pass


class HashEncoder:
    name_prefix = "hash"

    def __init__(self, dim: int = 256, vocab: int = 4096, seed: int = 0):
        if dim < 1 or vocab < 1:
            raise EncoderLoadError(f"invalid hash encoder shape dim={dim} vocab={vocab}")
        self.dim = dim
        self.vocab = vocab
        self.seed = seed
        generator = torch.Generator().manual_seed(seed)
        self.projection = torch.randn(vocab, dim, generator=generator) / math.sqrt(vocab)

    @property
    def model_id(self) -> str:
        return f"hash-{self.dim}"

    def _bucket(self, token: str) -> int:
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "big") % self.vocab

    def encode(self, sentences: list[str]) -> np.ndarray:
        from .formats import tokenize

        counts = torch.zeros(len(sentences), self.vocab)
        for row, sentence in enumerate(sentences):
            for token in tokenize(sentence):
                counts[row, self._bucket(token)] += 1.0
        with torch.no_grad():
            dense = torch.tanh(counts @ self.projection)
            norms = dense.norm(dim=1, keepdim=True).clamp(min=1e-12)
            empty = counts.sum(dim=1, keepdim=True) == 0
            dense = torch.where(empty, torch.zeros_like(dense), dense / norms)
        return dense.numpy().astype(np.float64)


class SbertEncoder:
    def __init__(self, model_id: str):
        try:
            from sentence_transformers import SentenceTransformer

            self._model = SentenceTransformer(model_id)
        except Exception as exc:  # no cached weights, no network
            raise EncoderLoadError(f"cannot load sentence encoder {model_id!r}: {exc}") from exc
        self.model_id = model_id
        self.dim = int(self._model.get_sentence_embedding_dimension())

    def encode(self, sentences: list[str]) -> np.ndarray:
        return np.asarray(
            self._model.encode(sentences, normalize_embeddings=True), dtype=np.float64
        )


def load_encoder(encoder_id: str, seed: int = 0):
    """"hash-<dim>" for the built-in encoder, "st:<model>" for pretrained."""
    if encoder_id.startswith("hash-"):
        try:
            dim = int(encoder_id.split("-", 1)[1])
        except ValueError:
            raise EncoderLoadError(f"bad hash encoder id {encoder_id!r}") from None
        return HashEncoder(dim=dim, seed=seed)
    if encoder_id.startswith("st:"):
        return SbertEncoder(encoder_id[3:])
    raise EncoderLoadError(f"unknown encoder id {encoder_id!r}")
