"""
Two-tower tactic and premise ranker.

A goal tower G and a premise tower P embed hashed token bags through one
shared token table. The tactic head S scores tactics from G(g); the
combiner C scores a premise from [G(g); P(t); T_j], where T_j is a learned
tactic embedding, or zeros in the unconditioned variant. A learned premise
embedding stands for the empty argument list.

Gradients are computed by hand; `loss_and_gradients` is the only training
entry point.
"""
import logging

from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np

from tacticforge.kernel.terms import TermExpr
from tacticforge.policy.encoder import bag_of_tokens, token_ids
from tacticforge.settings import Settings, get_settings


logger = logging.getLogger(__name__)


class PolicyVariant(str, Enum):
    tactic_dependent = "TACTIC_DEPENDENT"
    unconditioned = "UNCONDITIONED"


PARAM_NAMES = (
    "tokens",
    "goal_w",
    "goal_b",
    "premise_w",
    "premise_b",
    "head_w",
    "head_b",
    "tactic_table",
    "comb_w1",
    "comb_b1",
    "comb_w2",
    "comb_b2",
    "empty_premise",
)


Params = dict[str, np.ndarray]


def param_shapes(dim: int, buckets: int, width: int, n_tactics: int) -> dict[str, tuple[int, ...]]:
    return {
        "tokens": (buckets, dim),
        "goal_w": (dim, dim),
        "goal_b": (dim,),
        "premise_w": (dim, dim),
        "premise_b": (dim,),
        "head_w": (n_tactics, dim),
        "head_b": (n_tactics,),
        "tactic_table": (n_tactics, dim),
        "comb_w1": (width, 3 * dim),
        "comb_b1": (width,),
        "comb_w2": (width,),
        "comb_b2": (1,),
        "empty_premise": (dim,),
    }


def init_params(dim: int, buckets: int, width: int, n_tactics: int, seed: int = 0) -> Params:
    """Random towers and combiner, zero tactic head."""

    rng = np.random.default_rng(seed)
    shapes = param_shapes(dim, buckets, width, n_tactics)
    params = {name: np.zeros(shape) for name, shape in shapes.items()}
    params["tokens"] = rng.normal(0.0, 0.1, shapes["tokens"])
    params["goal_w"] = rng.normal(0.0, np.sqrt(2.0 / dim), shapes["goal_w"])
    params["premise_w"] = rng.normal(0.0, np.sqrt(2.0 / dim), shapes["premise_w"])
    params["tactic_table"] = rng.normal(0.0, 0.1, shapes["tactic_table"])
    params["comb_w1"] = rng.normal(0.0, np.sqrt(2.0 / (3 * dim)), shapes["comb_w1"])
    params["comb_w2"] = rng.normal(0.0, np.sqrt(1.0 / width), shapes["comb_w2"])
    params["empty_premise"] = rng.normal(0.0, 0.1, shapes["empty_premise"])
    return params


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    e = np.exp(shifted)
    return e / e.sum()


class PreparedExample(NamedTuple):
    """
    A training example reduced to token ids. `None` among the premises
    stands for the empty argument list.
    """

    goal_ids: np.ndarray
    tactic: int
    positives: list[np.ndarray | None]
    negatives: list[np.ndarray | None]


class _Tower(NamedTuple):
    ids: np.ndarray | None
    x: np.ndarray
    z: np.ndarray
    h: np.ndarray
    mask: np.ndarray | None


def _tower_forward(params: Params, prefix: str, ids: np.ndarray, dropout: float, rng) -> _Tower:
    x = bag_of_tokens(params["tokens"], ids)
    z = params[f"{prefix}_w"] @ x + params[f"{prefix}_b"]
    h = np.maximum(z, 0.0)
    mask = None
    if dropout > 0.0:
        mask = (rng.random(h.shape) >= dropout) / (1.0 - dropout)
        h = h * mask
    return _Tower(ids, x, z, h, mask)


def _tower_backward(params: Params, grads: Params, prefix: str, tower: _Tower, dh: np.ndarray) -> None:
    if tower.mask is not None:
        dh = dh * tower.mask
    dz = dh * (tower.z > 0.0)
    grads[f"{prefix}_w"] += np.outer(dz, tower.x)
    grads[f"{prefix}_b"] += dz
    if len(tower.ids):
        dx = params[f"{prefix}_w"].T @ dz
        np.add.at(grads["tokens"], tower.ids, dx / np.sqrt(len(tower.ids)))


def loss_and_gradients(
        params: Params,
        variant: PolicyVariant,
        batch: Sequence[PreparedExample],
        dropout: float = 0.0,
        rng: np.random.Generator | None = None,
) -> tuple[float, Params, list[float]]:
    """
    Mean over the batch of the tactic cross-entropy plus the mean pairwise
    logistic loss of every positive premise against every negative.

    Returns:
        the loss, its gradient for every parameter, and the per-example losses
    """

    if dropout > 0.0 and rng is None:
        rng = np.random.default_rng(0)
    grads = {name: np.zeros_like(value) for name, value in params.items()}
    w1 = params["comb_w1"]
    dim = params["goal_w"].shape[0]
    losses = []

    for example in batch:
        goal = _tower_forward(params, "goal", example.goal_ids, dropout, rng)
        g = goal.h

        logits = params["head_w"] @ g + params["head_b"]
        probs = _softmax(logits)
        loss = -np.log(max(probs[example.tactic], 1e-300))
        dlogits = probs.copy()
        dlogits[example.tactic] -= 1.0
        grads["head_w"] += np.outer(dlogits, g)
        grads["head_b"] += dlogits
        dg = params["head_w"].T @ dlogits

        if example.positives and example.negatives:
            if variant == PolicyVariant.tactic_dependent:
                t = params["tactic_table"][example.tactic]
            else:
                t = np.zeros(dim)

            premises = list(example.positives) + list(example.negatives)
            towers = []
            scores = []
            caches = []
            for ids in premises:
                if ids is None:
                    tower = None
                    p = params["empty_premise"]
                else:
                    tower = _tower_forward(params, "premise", ids, dropout, rng)
                    p = tower.h
                u = np.concatenate([g, p, t])
                z1 = w1 @ u + params["comb_b1"]
                h1 = np.maximum(z1, 0.0)
                scores.append(float(params["comb_w2"] @ h1 + params["comb_b2"][0]))
                towers.append(tower)
                caches.append((u, z1, h1))

            n_pos = len(example.positives)
            n_pairs = n_pos * len(example.negatives)
            dscores = np.zeros(len(premises))
            for i in range(n_pos):
                for k in range(n_pos, len(premises)):
                    margin = scores[k] - scores[i]
                    loss += np.logaddexp(0.0, margin) / n_pairs
                    slope = _sigmoid(margin) / n_pairs
                    dscores[k] += slope
                    dscores[i] -= slope

            for ds, tower, (u, z1, h1) in zip(dscores, towers, caches):
                if ds == 0.0:
                    continue
                grads["comb_w2"] += ds * h1
                grads["comb_b2"] += ds
                dz1 = ds * params["comb_w2"] * (z1 > 0.0)
                grads["comb_w1"] += np.outer(dz1, u)
                grads["comb_b1"] += dz1
                du = w1.T @ dz1
                dg += du[:dim]
                if tower is None:
                    grads["empty_premise"] += du[dim:2 * dim]
                else:
                    _tower_backward(params, grads, "premise", tower, du[dim:2 * dim])
                if variant == PolicyVariant.tactic_dependent:
                    grads["tactic_table"][example.tactic] += du[2 * dim:]

        _tower_backward(params, grads, "goal", goal, dg)
        losses.append(float(loss))

    n = max(len(batch), 1)
    for name in grads:
        grads[name] /= n
    return float(sum(losses) / n), grads, losses


class PolicyModel:
    """Inference over one set of parameters."""

    def __init__(
            self,
            params: Params,
            tactics: Sequence[str],
            variant: PolicyVariant = PolicyVariant.tactic_dependent,
            step: int = 0,
    ):
        self.params = params
        self.tactics = [str(t) for t in tactics]
        self.variant = PolicyVariant(variant)
        self.step = step
        self._premise_cache: dict[int, np.ndarray] = {}

    @classmethod
    def create(
            cls,
            tactics: Sequence[str],
            variant: PolicyVariant = PolicyVariant.tactic_dependent,
            settings: Settings | None = None,
            seed: int = 0,
    ) -> "PolicyModel":
        settings = settings or get_settings()
        params = init_params(
            settings.embedding_dim, settings.hash_buckets, settings.combiner_width, len(tactics), seed
        )
        return cls(params, tactics, variant)

    @property
    def dim(self) -> int:
        return self.params["goal_w"].shape[0]

    @property
    def buckets(self) -> int:
        return self.params["tokens"].shape[0]

    @property
    def width(self) -> int:
        return self.params["comb_w1"].shape[0]

    def tactic_index(self, tactic: str) -> int:
        return self.tactics.index(str(tactic))

    def invalidate(self) -> None:
        """Forget cached premise embeddings after the parameters changed."""

        self._premise_cache.clear()

    def _embed(self, prefix: str, tm: TermExpr) -> np.ndarray:
        x = bag_of_tokens(self.params["tokens"], token_ids(tm, self.buckets))
        return np.maximum(self.params[f"{prefix}_w"] @ x + self.params[f"{prefix}_b"], 0.0)

    def encode_goal(self, conclusion: TermExpr) -> np.ndarray:
        return self._embed("goal", conclusion)

    def encode_premise(self, conclusion: TermExpr, fp: int | None = None) -> np.ndarray:
        if fp is not None and fp in self._premise_cache:
            return self._premise_cache[fp]
        embedding = self._embed("premise", conclusion)
        if fp is not None:
            self._premise_cache[fp] = embedding
        return embedding

    def cached_premises(self) -> dict[int, np.ndarray]:
        return dict(self._premise_cache)

    def remember_premise(self, fp: int, embedding: np.ndarray) -> None:
        self._premise_cache[fp] = np.asarray(embedding, dtype=np.float64)

    def rank_tactics(self, goal_embedding: np.ndarray) -> np.ndarray:
        """Tactic logits, in the order of `self.tactics`."""

        return self.params["head_w"] @ goal_embedding + self.params["head_b"]

    def rank_arguments(
            self, goal_embedding: np.ndarray, tactic: str, premises: np.ndarray
    ) -> tuple[np.ndarray, float]:
        """
        Score premise embeddings (one per row) for a tactic.

        Returns:
            the candidate scores and the score of the empty argument list
        """

        dim = self.dim
        w1 = self.params["comb_w1"]
        if self.variant == PolicyVariant.tactic_dependent:
            t = self.params["tactic_table"][self.tactic_index(tactic)]
        else:
            t = np.zeros(dim)
        shared = w1[:, :dim] @ goal_embedding + w1[:, 2 * dim:] @ t + self.params["comb_b1"]
        rows = np.vstack([np.asarray(premises).reshape(-1, dim), self.params["empty_premise"][None, :]])
        hidden = np.maximum(rows @ w1[:, dim:2 * dim].T + shared, 0.0)
        scores = hidden @ self.params["comb_w2"] + self.params["comb_b2"][0]
        return scores[:-1], float(scores[-1])
