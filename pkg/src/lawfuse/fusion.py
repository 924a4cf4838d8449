"""Weighted reciprocal rank fusion across the neural and symbolic modules.

Each module contributes w(rank) / (epsilon + rank). The neural module's
weight is constant 1; symbolic modules get sin(min(rank/gamma, 1) * pi/2),
which starts low for their top ranks (where the neural module is trusted)
and saturates at 1 from rank gamma on. gamma = 0 means equal weights, i.e.
plain reciprocal rank fusion. The clamp at pi/2 avoids the decreasing and
eventually negative weights the raw sine would produce for ranks > gamma;
``clamp=False`` reproduces the raw formula for study.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .errors import ConfigError, DataError

NEURAL = "neural"
LAW = "law"
CASE = "case"
SYMBOLIC_KINDS = (LAW, CASE)


@dataclass(frozen=True)
class FusionConfig:
    epsilon: float = 60.0
    gamma: float = 2.0
    clamp: bool = True

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ConfigError(f"epsilon must be > 0, got {self.epsilon}")
        if self.gamma < 0:
            raise ConfigError(f"gamma must be >= 0, got {self.gamma}")


@dataclass(frozen=True)
class ModuleRanking:
    kind: str
    order: tuple[str, ...]
    ranks: dict[str, int]  # candidate id -> 1-based rank


def rank_candidates(kind: str, scores: Mapping[str, float | None]) -> ModuleRanking:
    """Descending score, ties by ascending id; unscored (None) rank last."""
    if not scores:
        raise DataError("cannot rank an empty candidate set")
    scored = sorted(
        ((cid, s) for cid, s in scores.items() if s is not None),
        key=lambda t: (-t[1], t[0]),
    )
    unscored = sorted(cid for cid, s in scores.items() if s is None)
    order = tuple(cid for cid, _ in scored) + tuple(unscored)
    return ModuleRanking(kind, order, {cid: i for i, cid in enumerate(order, start=1)})


def wrrf_weight(rank: int, gamma: float, kind: str, clamp: bool = True) -> float:
    if rank < 1:
        raise ValueError(f"rank must be >= 1, got {rank}")
    if kind == NEURAL or gamma == 0:
        return 1.0
    ratio = rank / gamma
    if clamp:
        ratio = min(ratio, 1.0)
    return math.sin(ratio * math.pi / 2.0)


@dataclass(frozen=True)
class FusedRanking:
    order: tuple[str, ...]
    scores: dict[str, float]


def fuse(rankings: Sequence[ModuleRanking], config: FusionConfig = FusionConfig()) -> FusedRanking:
    if not rankings:
        raise DataError("no module rankings to fuse")
    candidates = set(rankings[0].ranks)
    for ranking in rankings[1:]:
        if set(ranking.ranks) != candidates:
            raise DataError(
                f"candidate set mismatch between modules "
                f"{rankings[0].kind!r} and {ranking.kind!r}"
            )
    scores: dict[str, float] = {}
    for cid in candidates:
        total = 0.0
        for ranking in rankings:
            rank = ranking.ranks[cid]
            weight = wrrf_weight(rank, config.gamma, ranking.kind, config.clamp)
            total += weight / (config.epsilon + rank)
        scores[cid] = total
    order = tuple(sorted(scores, key=lambda cid: (-scores[cid], cid)))
    return FusedRanking(order, scores)


# ---------------------------------------------------------------------------
# Run files (tab-separated: query_id, case_id, rank, score, tag)
# ---------------------------------------------------------------------------

def write_run_file(
    path: str | Path,
    runs: Mapping[str, FusedRanking],
    tag: str = "lawfuse",
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for query_id, fused in runs.items():
            for rank, cid in enumerate(fused.order, start=1):
                score = fused.scores[cid]
                fh.write(f"{query_id}\t{cid}\t{rank}\t{score:.12g}\t{tag}\n")


def read_run_file(path: str | Path) -> dict[str, list[str]]:
    """Ranked candidate ids per query, in rank order."""
    per_query: dict[str, list[tuple[int, str]]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 5:
                raise DataError(f"run file: line {lineno}: expected 5 tab-separated fields")
            qid, cid, rank_s, _score, _tag = parts
            try:
                rank = int(rank_s)
            except ValueError:
                raise DataError(f"run file: line {lineno}: rank must be an integer") from None
            per_query.setdefault(qid, []).append((rank, cid))
    out: dict[str, list[str]] = {}
    for qid, entries in per_query.items():
        entries.sort(key=lambda t: t[0])
        out[qid] = [cid for _, cid in entries]
    return out
