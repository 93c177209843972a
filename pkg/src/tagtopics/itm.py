"""Interest-topic model: separate user-interest and resource-topic latents.

A single latent variable has to explain both user idiosyncrasy and resource
semantics in the plain aspect model; mixing the two can skew the per-resource
topic distributions used for ranking.  Here tags are generated jointly by a
user's interest i and a resource's topic z:

    p(r, u, t) = sum_{i,z} p(t|i,z) p(i|u) p(z|r) p(u) p(r)

p(u) and p(r) are fixed at their empirical values; EM estimates the three
conditionals by maximizing L = sum_{r,u,t} n(r,u,t) log p(r,u,t).

E-step (per observed triple):

    p(i,z | u,r,t) = p(t|i,z) p(i|u) p(z|r) / sum_{i',z'} p(t|i',z') p(i'|u) p(z'|r)

M-steps:

    p(t|i,z) = sum_{r,u} n(r,u,t) p(i,z|u,r,t) / sum_{r,u,t} n(r,u,t) p(i,z|u,r,t)
    p(i|u)   = sum_{r,t} n(r,u,t) sum_z p(i,z|u,r,t) / n(u)
    p(z|r)   = sum_{u,t} n(r,u,t) sum_i p(i,z|u,r,t) / n(r)

The trainer never materializes the posterior for all triples at once; M-step
sums are accumulated streaming, chunk by chunk.
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
from .errors import ConfigError, DataError, DegeneracyError
from .similarity import TopicDistribution
from .training import (TrainConfig, TrainLog, em_fit, mapreduce_slices,
                       noisy_uniform_rows, normalize_rows)

logger = logging.getLogger(__name__)

# Posterior scratch per chunk is bounded by roughly this many float64 values.
_SCRATCH_ELEMS = 1 << 18


@dataclass
class ItmModel:
    """Interest-topic tables.

    ``tag_given_interest_topic[i, z, t]`` holds p(t|i,z);
    ``interest_given_user[u, i]`` holds p(i|u);
    ``topic_given_resource[r, z]`` holds p(z|r);
    ``user_probs`` and ``resource_probs`` are the fixed empirical p(u), p(r).
    """

    kind: ClassVar[str] = "itm"

    tag_given_interest_topic: np.ndarray
    interest_given_user: np.ndarray
    topic_given_resource: np.ndarray
    user_probs: np.ndarray
    resource_probs: np.ndarray
    seed: int = 0

    @property
    def n_interests(self) -> int:
        return self.tag_given_interest_topic.shape[0]

    @property
    def n_topics(self) -> int:
        return self.tag_given_interest_topic.shape[1]

    @property
    def n_resources(self) -> int:
        return self.topic_given_resource.shape[0]

    @property
    def n_users(self) -> int:
        return self.interest_given_user.shape[0]

    @property
    def n_tags(self) -> int:
        return self.tag_given_interest_topic.shape[2]

    def validate(self, atol: float = 1e-10) -> None:
        if self.tag_given_interest_topic.ndim != 3:
            raise DataError("p(t|i,z) must be a 3-D table")
        if self.interest_given_user.shape[1] != self.n_interests:
            raise DataError("interest dimensions disagree between tables")
        if self.topic_given_resource.shape[1] != self.n_topics:
            raise DataError("topic dimensions disagree between tables")
        if self.user_probs.shape != (self.n_users,):
            raise DataError("p(u) length disagrees with p(i|u) table")
        if self.resource_probs.shape != (self.n_resources,):
            raise DataError("p(r) length disagrees with p(z|r) table")
        flat_tag = self.tag_given_interest_topic.reshape(-1, self.n_tags)
        for name, table in (("p(t|i,z)", flat_tag),
                            ("p(i|u)", self.interest_given_user),
                            ("p(z|r)", self.topic_given_resource)):
            if (table < 0).any():
                raise DataError(f"{name} has negative entries")
            if not np.allclose(table.sum(axis=1), 1.0, rtol=0, atol=atol):
                raise DataError(f"{name} rows do not sum to 1")
        for name, vec in (("p(u)", self.user_probs), ("p(r)", self.resource_probs)):
            if (vec < 0).any() or abs(vec.sum() - 1.0) > atol:
                raise DataError(f"{name} is not a distribution")

    def check_corpus(self, corpus: Corpus) -> None:
        shape = (self.n_resources, self.n_users, self.n_tags)
        expected = (len(corpus.resources), len(corpus.users), len(corpus.tags))
        if shape != expected:
            raise DataError(f"model dimensions {shape} do not match corpus {expected}")

    def posterior(self, resource: int, user: int, tag: int) -> np.ndarray:
        """Joint posterior p(i, z | u, r, t) for one triple, as an [I, K] table."""
        weights = (self.tag_given_interest_topic[:, :, tag]
                   * self.interest_given_user[user][:, None]
                   * self.topic_given_resource[resource][None, :])
        total = weights.sum()
        if total <= 0.0:
            raise DegeneracyError(
                f"degenerate posterior for triple (r={resource}, u={user}, t={tag})")
        return weights / total

    def log_likelihood(self, corpus: Corpus) -> float:
        self.check_corpus(corpus)
        chunk = max(1, _SCRATCH_ELEMS // (self.n_interests * self.n_topics))
        total = 0.0
        log_u = np.log(self.user_probs)
        log_r = np.log(self.resource_probs)
        for lo in range(0, corpus.num_triples, chunk):
            hi = min(lo + chunk, corpus.num_triples)
            rr, uu, tt = corpus.r_ids[lo:hi], corpus.u_ids[lo:hi], corpus.t_ids[lo:hi]
            mix = (np.moveaxis(self.tag_given_interest_topic[:, :, tt], 2, 0)
                   * self.interest_given_user[uu][:, :, None]
                   * self.topic_given_resource[rr][:, None, :]).sum(axis=(1, 2))
            with np.errstate(divide="ignore"):
                terms = np.log(mix) + log_u[uu] + log_r[rr]
            total += float((corpus.counts[lo:hi] * terms).sum())
        if not math.isfinite(total):
            logger.warning("observed triple has zero probability; log-likelihood is degenerate (-inf)")
        return total

    def topic_distribution(self, resource: int) -> TopicDistribution:
        if not 0 <= resource < self.n_resources:
            raise DataError(f"unknown resource id {resource}")
        return TopicDistribution(self.topic_given_resource[resource].copy())

    def to_text(self, stream) -> None:
        """Header ``itm I K R U T seed``; then p(u), p(r), the p(i|u) rows,
        the p(z|r) rows and the I*K p(t|i,z) rows in interest-major order."""
        stream.write("# tagtopics model format v1\n")
        stream.write(f"itm {self.n_interests} {self.n_topics} {self.n_resources} "
                     f"{self.n_users} {self.n_tags} {self.seed}\n")
        stream.write(_textio.format_row(self.user_probs) + "\n")
        stream.write(_textio.format_row(self.resource_probs) + "\n")
        for row in self.interest_given_user:
            stream.write(_textio.format_row(row) + "\n")
        for row in self.topic_given_resource:
            stream.write(_textio.format_row(row) + "\n")
        for row in self.tag_given_interest_topic.reshape(-1, self.n_tags):
            stream.write(_textio.format_row(row) + "\n")

    @classmethod
    def _from_parts(cls, header: list[str], stream) -> "ItmModel":
        if header[0] != cls.kind or len(header) != 7:
            raise DataError(f"bad itm header: {' '.join(header)!r}")
        n_int, n_top, n_res, n_usr, n_tag, seed = _textio.parse_ints(header[1:], "itm header")
        model = cls(
            user_probs=_textio.parse_row(stream, n_usr, "p(u)"),
            resource_probs=_textio.parse_row(stream, n_res, "p(r)"),
            interest_given_user=_textio.parse_matrix(stream, n_usr, n_int, "p(i|u)"),
            topic_given_resource=_textio.parse_matrix(stream, n_res, n_top, "p(z|r)"),
            tag_given_interest_topic=_textio.parse_matrix(
                stream, n_int * n_top, n_tag, "p(t|i,z)").reshape(n_int, n_top, n_tag),
            seed=seed,
        )
        model.validate()
        return model

    @classmethod
    def from_text(cls, stream) -> "ItmModel":
        return cls._from_parts(_textio.next_fields(stream, "model header"), stream)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as stream:
            self.to_text(stream)

    @classmethod
    def load(cls, path) -> "ItmModel":
        with open(path, encoding="utf-8") as stream:
            return cls.from_text(stream)


def m_step(corpus: Corpus, posteriors: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Re-estimate the three conditional tables from per-triple posteriors.

    ``posteriors`` is an ``[num_triples, I, K]`` array aligned with the
    corpus triple order (see :meth:`Corpus.iter_triples`).  Returns
    ``(tag_given_interest_topic, interest_given_user, topic_given_resource)``.
    Intended for small corpora and tests; the trainer streams these sums.
    """
    post = np.asarray(posteriors, dtype=float)
    if post.ndim != 3 or post.shape[0] != corpus.num_triples:
        raise DataError(f"posteriors must be [num_triples, I, K], got {post.shape}")
    n_interests, n_topics = post.shape[1], post.shape[2]
    weighted = post * corpus.counts[:, None, None]

    expected_t = np.zeros((n_interests, n_topics, len(corpus.tags)))
    np.add.at(expected_t.transpose(2, 0, 1), corpus.t_ids, weighted)
    tag_table = normalize_rows(expected_t.reshape(-1, len(corpus.tags)))
    tag_table = tag_table.reshape(n_interests, n_topics, len(corpus.tags))

    expected_ui = np.zeros((len(corpus.users), n_interests))
    np.add.at(expected_ui, corpus.u_ids, weighted.sum(axis=2))
    interest_table = expected_ui / corpus.n_u[:, None]

    expected_rz = np.zeros((len(corpus.resources), n_topics))
    np.add.at(expected_rz, corpus.r_ids, weighted.sum(axis=1))
    topic_table = expected_rz / corpus.n_r[:, None]
    return tag_table, interest_table, topic_table


def train_itm(corpus: Corpus, cfg: TrainConfig,
              iteration_hook=None) -> tuple[ItmModel, TrainLog]:
    """Fit the interest-topic model by EM; deterministic per (seed, workers).

    Raises :class:`ConfigError` before allocating anything if the dense
    p(t|i,z) table would exceed ``cfg.max_table_bytes``.
    """
    cfg.validate()
    if cfg.interests < 1:
        raise ConfigError("interests must be >= 1")
    n_resources = len(corpus.resources)
    n_users = len(corpus.users)
    n_tags = len(corpus.tags)
    table_bytes = 8 * cfg.interests * cfg.topics * n_tags
    if table_bytes > cfg.max_table_bytes:
        raise ConfigError(
            f"p(t|i,z) table needs {table_bytes} bytes, over the budget of "
            f"{cfg.max_table_bytes}; lower interests/topics or raise max_table_bytes")
    if cfg.topics > n_tags:
        warnings.warn(f"topics={cfg.topics} exceeds the tag vocabulary size {n_tags}")

    rng = np.random.default_rng(cfg.seed)
    # Draw order keeps the interests=1 case aligned with the pLSA trainer's
    # initialization for the same seed (the p(i|u) rows normalize to 1.0).
    model = ItmModel(
        tag_given_interest_topic=noisy_uniform_rows(
            rng, cfg.interests * cfg.topics, n_tags).reshape(cfg.interests, cfg.topics, n_tags),
        topic_given_resource=noisy_uniform_rows(rng, n_resources, cfg.topics),
        interest_given_user=noisy_uniform_rows(rng, n_users, cfg.interests),
        user_probs=corpus.n_u / corpus.total,
        resource_probs=corpus.n_r / corpus.total,
        seed=cfg.seed,
    )
    weights = corpus.counts.astype(float)
    chunk = max(1, _SCRATCH_ELEMS // (cfg.interests * cfg.topics))
    executor = ThreadPoolExecutor(cfg.workers) if cfg.workers > 1 else None

    def accumulate(lo: int, hi: int):
        expected_t = np.zeros((cfg.interests, cfg.topics, n_tags))
        expected_ui = np.zeros((n_users, cfg.interests))
        expected_rz = np.zeros((n_resources, cfg.topics))
        for a in range(lo, hi, chunk):
            b = min(a + chunk, hi)
            rr, uu, tt = corpus.r_ids[a:b], corpus.u_ids[a:b], corpus.t_ids[a:b]
            post = np.moveaxis(model.tag_given_interest_topic[:, :, tt], 2, 0).copy()
            post *= model.interest_given_user[uu][:, :, None]
            post *= model.topic_given_resource[rr][:, None, :]
            totals = post.sum(axis=(1, 2))
            if (totals <= 0.0).any():
                bad = int(np.argmax(totals <= 0.0))
                raise DegeneracyError(
                    f"degenerate posterior for triple (r={rr[bad]}, u={uu[bad]}, t={tt[bad]})")
            post *= (weights[a:b] / totals)[:, None, None]
            np.add.at(expected_t.transpose(2, 0, 1), tt, post)
            np.add.at(expected_ui, uu, post.sum(axis=2))
            np.add.at(expected_rz, rr, post.sum(axis=1))
        return expected_t, expected_ui, expected_rz

    def step() -> None:
        expected_t, expected_ui, expected_rz = mapreduce_slices(
            accumulate, corpus.num_triples, cfg.workers, executor)
        model.tag_given_interest_topic = normalize_rows(
            expected_t.reshape(-1, n_tags)).reshape(cfg.interests, cfg.topics, n_tags)
        model.interest_given_user = normalize_rows(expected_ui)
        model.topic_given_resource = normalize_rows(expected_rz)

    hook = None
    if iteration_hook is not None:
        hook = lambda iteration, ll: iteration_hook(model, iteration, ll)
    try:
        log = em_fit(step, lambda: model.log_likelihood(corpus), cfg, hook=hook)
    finally:
        if executor is not None:
            executor.shutdown()
    return model, log
