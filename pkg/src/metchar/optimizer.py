"""MetChar: clustering-driven weight learning for a fixed component set.

Each round clusters the training set under the current weights, scores
every sample pair against the labels, and moves each weight by the
difference between its weighted distance mass on false-positive pairs
(same cluster, different label) and on false-negative pairs (same label,
split apart), clamped at zero.
"""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .clustering import as_stacked, kmeans
from .metrics import ComponentId, WeightedMetric, build_tensor


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    tn: int
    fp: int
    fn: int
    fp_pairs: np.ndarray = field(repr=False)  # (fp, 2) index pairs, i < j
    fn_pairs: np.ndarray = field(repr=False)

    @property
    def total(self):
        return self.tp + self.tn + self.fp + self.fn

    @property
    def accuracy(self):
        return (self.tp + self.tn) / self.total

    def accuracy_fraction(self):
        return Fraction(self.tp + self.tn, self.total)

    def to_dict(self):
        return {"tp": self.tp, "tn": self.tn, "fp": self.fp, "fn": self.fn}


def score_pairs(labels, assignments):
    """Classify all n(n-1)/2 unordered pairs as TP/TN/FP/FN."""
    labels = list(labels)
    assignments = np.asarray(assignments)
    n = len(labels)
    if n != len(assignments):
        raise ValueError(f"{n} labels but {len(assignments)} assignments")
    if n < 2:
        raise ValueError("need at least 2 samples to form a pair")
    codes = {}
    y = np.array([codes.setdefault(lab, len(codes)) for lab in labels])
    iu, ju = np.triu_indices(n, 1)
    same_y = y[iu] == y[ju]
    same_c = assignments[iu] == assignments[ju]
    fp_mask = same_c & ~same_y
    fn_mask = same_y & ~same_c
    return ConfusionCounts(
        tp=int(np.count_nonzero(same_y & same_c)),
        tn=int(np.count_nonzero(~same_y & ~same_c)),
        fp=int(np.count_nonzero(fp_mask)),
        fn=int(np.count_nonzero(fn_mask)),
        fp_pairs=np.column_stack([iu[fp_mask], ju[fp_mask]]),
        fn_pairs=np.column_stack([iu[fn_mask], ju[fn_mask]]),
    )


def distance_mass(weights, tensor, confusion):
    """Per-component weighted distance summed over FP pairs and over FN pairs."""
    w = np.asarray(weights, dtype=np.float64)
    fp, fn = confusion.fp_pairs, confusion.fn_pairs
    alpha = w * tensor[:, fp[:, 0], fp[:, 1]].sum(axis=1)
    beta = w * tensor[:, fn[:, 0], fn[:, 1]].sum(axis=1)
    return alpha, beta


def weight_update(weights, tensor, confusion, epsilon):
    """``max(0, w_i + epsilon * (alpha_i - beta_i))`` for every component."""
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (tensor.shape[0],):
        raise ValueError("weights are not aligned with the distance tensor")
    alpha, beta = distance_mass(w, tensor, confusion)
    return np.maximum(0.0, w + epsilon * (alpha - beta))


@dataclass(frozen=True)
class MetCharConfig:
    epsilon: float = 1e-5
    iterations: int = 20
    seed: int = 0
    k: int = None
    max_iter: int = 100

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass(frozen=True)
class TrainedMetric:
    metric: WeightedMetric
    accuracy: float
    history: list  # [(weights tuple, accuracy)] per round
    best_round: int  # 1-based
    seed: int
    confusion: ConfusionCounts = field(default=None, repr=False)

    @property
    def weights(self):
        return self.metric.weights

    @property
    def components(self):
        return self.metric.components

    def to_dict(self):
        return {
            "components": [c.name for c in self.metric.components],
            "weights": list(self.metric.weights),
            "accuracy": self.accuracy,
            "best_round": self.best_round,
            "seed": self.seed,
            "history": [
                {"round": t, "weights": list(w), "accuracy": acc}
                for t, (w, acc) in enumerate(self.history, 1)
            ],
        }


def metchar(components, features, labels, cfg, tensor=None):
    """Learn non-negative weights for `components` on a labelled dataset.

    Parameters
    ----------
    components : sequence of ComponentId
    features : list of FeatureSet, or a ``stack_features`` dict
    labels : sequence of labels aligned with `features`
    cfg : MetCharConfig
    tensor : ndarray, optional
        Precomputed ``(q, n, n)`` distances for exactly `components`.

    Returns
    -------
    TrainedMetric
        The weights of the highest-accuracy round (earliest on ties).

    Notes
    -----
    A single component cannot be reweighted in any way that changes the
    partition, so it is evaluated once at weight 1.0.
    """
    components = tuple(c if isinstance(c, ComponentId) else ComponentId.parse(c) for c in components)
    if not components:
        raise ValueError("metchar needs at least one component")
    labels = list(labels)
    stacked = as_stacked(features)
    n = len(next(iter(stacked.values())))
    if n != len(labels):
        raise ValueError(f"{n} samples but {len(labels)} labels")
    k = cfg.k if cfg.k is not None else len(set(labels))
    q = len(components)

    if q == 1:
        weights = np.ones(1)
        rounds = 1
    else:
        weights = np.random.default_rng(cfg.seed).random(q)
        rounds = cfg.iterations
        if tensor is None:
            tensor = build_tensor(components, stacked)
        elif tensor.shape != (q, n, n):
            raise ValueError(f"tensor shape {tensor.shape} does not match ({q}, {n}, {n})")

    history = []
    best = None
    for t in range(1, rounds + 1):
        metric = WeightedMetric(components, tuple(weights))
        result = kmeans(stacked, k, metric, seed=cfg.seed, max_iter=cfg.max_iter)
        conf = score_pairs(labels, result.assignments)
        history.append((metric.weights, conf.accuracy))
        if best is None or conf.accuracy > best[1]:
            best = (metric, conf.accuracy, t, conf)
        if t < rounds:
            weights = weight_update(weights, tensor, conf, cfg.epsilon)
    metric, acc, t_best, conf = best
    return TrainedMetric(metric, acc, history, t_best, cfg.seed, conf)
