"""Three-way aspect model over full resource-user-tag triples.

One latent aspect z generates all three observed dimensions independently:

    p(r, u, t) = sum_z p(r|z) p(u|z) p(t|z) p(z)

EM maximizes L = sum_{r,u,t} n(r,u,t) log p(r,u,t).  The E-step posterior is
p(z|r,u,t) proportional to p(z) p(r|z) p(u|z) p(t|z); the M-step re-estimates
p(z) and the three conditionals from posterior-weighted counts.

The model does not store p(z|r); for ranking it is recovered by Bayes
inversion, p(z|r) = p(r|z) p(z) / sum_z' p(r|z') p(z').
"""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from . import _textio
from .corpus import Corpus
from .errors import DataError, DegeneracyError
from .similarity import TopicDistribution
from .training import (TrainConfig, TrainLog, em_fit, mapreduce_slices,
                       noisy_uniform_rows, normalize_rows)

logger = logging.getLogger(__name__)

_TRIPLE_CHUNK = 1 << 15


@dataclass
class MwaModel:
    """Aspect-model tables: p(z), p(r|z), p(u|z), p(t|z) (rows indexed by z)."""

    kind: ClassVar[str] = "mwa"

    topic_probs: np.ndarray
    resource_given_topic: np.ndarray
    user_given_topic: np.ndarray
    tag_given_topic: np.ndarray
    seed: int = 0

    @property
    def n_topics(self) -> int:
        return self.topic_probs.shape[0]

    @property
    def n_resources(self) -> int:
        return self.resource_given_topic.shape[1]

    @property
    def n_users(self) -> int:
        return self.user_given_topic.shape[1]

    @property
    def n_tags(self) -> int:
        return self.tag_given_topic.shape[1]

    def validate(self, atol: float = 1e-10) -> None:
        tables = (("p(r|z)", self.resource_given_topic),
                  ("p(u|z)", self.user_given_topic),
                  ("p(t|z)", self.tag_given_topic))
        for name, table in tables:
            if table.ndim != 2 or table.shape[0] != self.n_topics:
                raise DataError(f"{name} shape disagrees with p(z)")
            if (table < 0).any():
                raise DataError(f"{name} has negative entries")
            if not np.allclose(table.sum(axis=1), 1.0, rtol=0, atol=atol):
                raise DataError(f"{name} rows do not sum to 1")
        if (self.topic_probs < 0).any() or abs(self.topic_probs.sum() - 1.0) > atol:
            raise DataError("p(z) is not a distribution")

    def check_corpus(self, corpus: Corpus) -> None:
        shape = (self.n_resources, self.n_users, self.n_tags)
        expected = (len(corpus.resources), len(corpus.users), len(corpus.tags))
        if shape != expected:
            raise DataError(f"model dimensions {shape} do not match corpus {expected}")

    def posterior(self, resource: int, user: int, tag: int) -> np.ndarray:
        """E-step posterior p(z | r, u, t) for one observed triple."""
        weights = (self.topic_probs
                   * self.resource_given_topic[:, resource]
                   * self.user_given_topic[:, user]
                   * self.tag_given_topic[:, tag])
        total = weights.sum()
        if total <= 0.0:
            raise DegeneracyError(
                f"degenerate posterior for triple (r={resource}, u={user}, t={tag})")
        return weights / total

    def log_likelihood(self, corpus: Corpus) -> float:
        self.check_corpus(corpus)
        total = 0.0
        for lo in range(0, corpus.num_triples, _TRIPLE_CHUNK):
            hi = min(lo + _TRIPLE_CHUNK, corpus.num_triples)
            rr, uu, tt = corpus.r_ids[lo:hi], corpus.u_ids[lo:hi], corpus.t_ids[lo:hi]
            mix = (self.topic_probs
                   * self.resource_given_topic[:, rr].T
                   * self.user_given_topic[:, uu].T
                   * self.tag_given_topic[:, tt].T).sum(axis=1)
            with np.errstate(divide="ignore"):
                terms = np.log(mix)
            total += float((corpus.counts[lo:hi] * terms).sum())
        if not math.isfinite(total):
            logger.warning("observed triple has zero probability; log-likelihood is degenerate (-inf)")
        return total

    def topic_distribution(self, resource: int) -> TopicDistribution:
        """p(z|r) by Bayes inversion of p(r|z) against the aspect prior."""
        if not 0 <= resource < self.n_resources:
            raise DataError(f"unknown resource id {resource}")
        weights = self.topic_probs * self.resource_given_topic[:, resource]
        total = weights.sum()
        if total <= 0.0:
            raise DegeneracyError(f"resource {resource} has no support")
        return TopicDistribution(weights / total)

    def to_text(self, stream) -> None:
        """Header ``mwa K R U T seed``; then p(z), then the p(r|z), p(u|z)
        and p(t|z) tables, one row per topic."""
        stream.write("# tagtopics model format v1\n")
        stream.write(f"mwa {self.n_topics} {self.n_resources} {self.n_users} "
                     f"{self.n_tags} {self.seed}\n")
        stream.write(_textio.format_row(self.topic_probs) + "\n")
        for table in (self.resource_given_topic, self.user_given_topic, self.tag_given_topic):
            for row in table:
                stream.write(_textio.format_row(row) + "\n")

    @classmethod
    def _from_parts(cls, header: list[str], stream) -> "MwaModel":
        if header[0] != cls.kind or len(header) != 6:
            raise DataError(f"bad mwa header: {' '.join(header)!r}")
        n_topics, n_resources, n_users, n_tags, seed = _textio.parse_ints(header[1:], "mwa header")
        model = cls(
            topic_probs=_textio.parse_row(stream, n_topics, "p(z)"),
            resource_given_topic=_textio.parse_matrix(stream, n_topics, n_resources, "p(r|z)"),
            user_given_topic=_textio.parse_matrix(stream, n_topics, n_users, "p(u|z)"),
            tag_given_topic=_textio.parse_matrix(stream, n_topics, n_tags, "p(t|z)"),
            seed=seed,
        )
        model.validate()
        return model

    @classmethod
    def from_text(cls, stream) -> "MwaModel":
        return cls._from_parts(_textio.next_fields(stream, "model header"), stream)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as stream:
            self.to_text(stream)

    @classmethod
    def load(cls, path) -> "MwaModel":
        with open(path, encoding="utf-8") as stream:
            return cls.from_text(stream)


def train_mwa(corpus: Corpus, cfg: TrainConfig,
              iteration_hook=None) -> tuple[MwaModel, TrainLog]:
    """Fit the aspect model by EM; deterministic per (seed, workers)."""
    cfg.validate()
    n_resources = len(corpus.resources)
    n_users = len(corpus.users)
    n_tags = len(corpus.tags)
    if cfg.topics > n_tags:
        warnings.warn(f"topics={cfg.topics} exceeds the tag vocabulary size {n_tags}")

    rng = np.random.default_rng(cfg.seed)
    model = MwaModel(
        topic_probs=noisy_uniform_rows(rng, 1, cfg.topics)[0],
        resource_given_topic=noisy_uniform_rows(rng, cfg.topics, n_resources),
        user_given_topic=noisy_uniform_rows(rng, cfg.topics, n_users),
        tag_given_topic=noisy_uniform_rows(rng, cfg.topics, n_tags),
        seed=cfg.seed,
    )
    weights = corpus.counts.astype(float)
    executor = ThreadPoolExecutor(cfg.workers) if cfg.workers > 1 else None

    def accumulate(lo: int, hi: int):
        expected_z = np.zeros(cfg.topics)
        expected_rz = np.zeros((n_resources, cfg.topics))
        expected_uz = np.zeros((n_users, cfg.topics))
        expected_tz = np.zeros((n_tags, cfg.topics))
        for a in range(lo, hi, _TRIPLE_CHUNK):
            b = min(a + _TRIPLE_CHUNK, hi)
            rr, uu, tt = corpus.r_ids[a:b], corpus.u_ids[a:b], corpus.t_ids[a:b]
            post = (model.topic_probs
                    * model.resource_given_topic[:, rr].T
                    * model.user_given_topic[:, uu].T
                    * model.tag_given_topic[:, tt].T)
            totals = post.sum(axis=1)
            if (totals <= 0.0).any():
                bad = int(np.argmax(totals <= 0.0))
                raise DegeneracyError(
                    f"degenerate posterior for triple (r={rr[bad]}, u={uu[bad]}, t={tt[bad]})")
            post *= (weights[a:b] / totals)[:, None]
            expected_z += post.sum(axis=0)
            np.add.at(expected_rz, rr, post)
            np.add.at(expected_uz, uu, post)
            np.add.at(expected_tz, tt, post)
        return expected_z, expected_rz, expected_uz, expected_tz

    def step() -> None:
        expected_z, expected_rz, expected_uz, expected_tz = mapreduce_slices(
            accumulate, corpus.num_triples, cfg.workers, executor)
        model.topic_probs = expected_z / expected_z.sum()
        model.resource_given_topic = normalize_rows(np.ascontiguousarray(expected_rz.T))
        model.user_given_topic = normalize_rows(np.ascontiguousarray(expected_uz.T))
        model.tag_given_topic = normalize_rows(np.ascontiguousarray(expected_tz.T))

    hook = None
    if iteration_hook is not None:
        hook = lambda iteration, ll: iteration_hook(model, iteration, ll)
    try:
        log = em_fit(step, lambda: model.log_likelihood(corpus), cfg, hook=hook)
    finally:
        if executor is not None:
            executor.shutdown()
    return model, log
