"""Topic-distribution comparison and seed-relative ranking.

Resources are described by their topic distributions p(z|r); dissimilarity is
the Jensen-Shannon divergence in natural log, so values live in [0, ln 2].
The log base only rescales divergences and never reorders a ranking.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np
from scipy.special import rel_entr

from .errors import DataError

LN2 = float(np.log(2.0))


@dataclass(frozen=True)
class TopicDistribution:
    """A probability vector over topics; validated on construction."""

    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, "probs", probs)
        if probs.ndim != 1 or probs.size == 0:
            raise ValueError("probs must be a non-empty 1-D vector")
        if (probs < 0).any():
            raise ValueError("probabilities must be non-negative")
        total = float(probs.sum())
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"probabilities sum to {total!r}, not 1")

    def __len__(self) -> int:
        return self.probs.size


def _vector(p) -> np.ndarray:
    return p.probs if isinstance(p, TopicDistribution) else np.asarray(p, dtype=float)


def js_divergence(p, q) -> float:
    """Jensen-Shannon divergence: 0.5*KL(p||m) + 0.5*KL(q||m), m = (p+q)/2.

    Natural log, 0*log(0) = 0.  Symmetric, bounded by ln 2; clamped at 0
    against rounding.
    """
    p = _vector(p)
    q = _vector(q)
    if p.shape != q.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {q.shape}")
    m = 0.5 * (p + q)
    value = 0.5 * float(rel_entr(p, m).sum() + rel_entr(q, m).sum())
    return max(value, 0.0)


@dataclass
class RankedList:
    """Resources ordered by ascending divergence from a seed resource."""

    seed: object
    entries: list[tuple[object, float]]

    def __post_init__(self):
        divergences = [d for _, d in self.entries]
        if any(b < a for a, b in zip(divergences, divergences[1:])):
            raise DataError("ranking divergences must be non-decreasing")
        keys = [rid for rid, _ in self.entries]
        if len(set(keys)) != len(keys):
            raise DataError("ranking contains duplicate resources")
        if self.seed in set(keys):
            raise DataError("seed resource may not appear in its own ranking")

    def top(self, k: int) -> list[tuple[object, float]]:
        return self.entries[: max(k, 0)]

    def __len__(self) -> int:
        return len(self.entries)


def rank_by_seed(dists: Mapping, seed) -> RankedList:
    """Rank every non-seed resource by ascending JS divergence to the seed.

    Ties are broken by ascending resource id, so the result is deterministic.
    """
    if seed not in dists:
        raise DataError(f"seed {seed!r} has no topic distribution")
    seed_dist = dists[seed]
    scored = [(js_divergence(dist, seed_dist), rid)
              for rid, dist in dists.items() if rid != seed]
    scored.sort(key=lambda pair: (pair[0], pair[1]))
    return RankedList(seed=seed, entries=[(rid, div) for div, rid in scored])


_RANKING_COLUMNS = "rank\tresource\tdivergence"


def write_ranking(ranked: RankedList, stream, *, limit: int | None = None,
                  name_of=None, meta: Mapping | None = None) -> None:
    """Write ``rank<TAB>resource<TAB>divergence`` rows with a metadata header."""
    resolve = name_of if name_of is not None else str
    pairs = " ".join(f"{key}={value}" for key, value in dict(meta or {}).items())
    stream.write(f"# {pairs}\n" if pairs else "#\n")
    stream.write(_RANKING_COLUMNS + "\n")
    entries = ranked.entries if limit is None else ranked.top(limit)
    for position, (rid, divergence) in enumerate(entries, start=1):
        stream.write(f"{position}\t{resolve(rid)}\t{divergence!r}\n")


def read_ranking(stream) -> tuple[dict, RankedList]:
    """Parse a ranking TSV back into its metadata and a name-keyed RankedList."""
    meta: dict[str, str] = {}
    saw_columns = False
    entries: list[tuple[str, float]] = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        if line.startswith("#"):
            if not saw_columns and not meta:
                for token in line[1:].split():
                    if "=" in token:
                        key, value = token.split("=", 1)
                        meta[key] = value
            continue
        if not saw_columns:
            if line != _RANKING_COLUMNS:
                raise DataError(f"line {lineno}: expected ranking column header")
            saw_columns = True
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise DataError(f"line {lineno}: expected 3 tab-separated fields")
        try:
            entries.append((fields[1], float(fields[2])))
        except ValueError:
            raise DataError(f"line {lineno}: bad divergence {fields[2]!r}") from None
    if not saw_columns:
        raise DataError("not a ranking file (missing column header)")
    return meta, RankedList(seed=meta.get("seed", ""), entries=entries)
