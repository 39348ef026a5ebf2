"""Base distance components and their weighted combination."""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .features import FEATURE_IDS, feature_vector, stack_features

OPS = {"md": "manhattan", "ed": "euclidean"}
_SCIPY_OPS = {"md": "cityblock", "ed": "euclidean"}


@dataclass(frozen=True, order=True)
class ComponentId:
    """A (feature, distance-op) pair, named like ``vlv_md`` or ``dfv_ed``."""

    feature: str
    op: str

    def __post_init__(self):
        if self.feature not in FEATURE_IDS:
            raise ValueError(f"unknown feature {self.feature!r}")
        if self.op not in OPS:
            raise ValueError(f"unknown distance op {self.op!r}; expected 'md' or 'ed'")

    @property
    def name(self):
        return f"{self.feature}_{self.op}"

    @classmethod
    def parse(cls, name):
        feature, sep, op = name.strip().partition("_")
        if not sep:
            raise ValueError(f"bad component name {name!r}")
        return cls(feature, op)

    def __str__(self):
        return self.name


DEFAULT_COMPONENTS = tuple(
    ComponentId.parse(n)
    for n in (
        "hbv_md", "hfv_md", "vfv_md", "vfv_ed", "dfv_md",
        "dfv_ed", "hlv_md", "vlv_md", "vlv_ed", "dlv_ed",
    )
)
ALL_COMPONENTS = tuple(ComponentId(f, op) for f in FEATURE_IDS for op in OPS)


class ComponentRegistry:
    """Ordered, duplicate-free component list; position is the canonical index."""

    def __init__(self, components=DEFAULT_COMPONENTS):
        comps = tuple(c if isinstance(c, ComponentId) else ComponentId.parse(c) for c in components)
        if len(set(comps)) != len(comps):
            raise ValueError("duplicate component in registry")
        if not comps:
            raise ValueError("registry needs at least one component")
        self.components = comps
        self._index = {c: i for i, c in enumerate(comps)}

    @classmethod
    def full(cls):
        return cls(ALL_COMPONENTS)

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def index(self, c):
        return self._index[c if isinstance(c, ComponentId) else ComponentId.parse(c)]

    def names(self):
        return [c.name for c in self.components]

    def subset(self, n):
        return ComponentRegistry(self.components[:n])

    def __repr__(self):
        return f"ComponentRegistry({self.names()})"


@dataclass(frozen=True)
class WeightedMetric:
    """D(x, x') = sum_i w_i d_i(x, x') with every w_i >= 0."""

    components: tuple
    weights: tuple

    def __post_init__(self):
        comps = tuple(c if isinstance(c, ComponentId) else ComponentId.parse(c) for c in self.components)
        weights = tuple(float(w) for w in self.weights)
        if len(comps) != len(weights):
            raise ValueError("components and weights differ in length")
        if any(not w >= 0 for w in weights):
            raise ValueError("weights must be non-negative")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "weights", weights)

    def scaled(self, c):
        return WeightedMetric(self.components, tuple(c * w for w in self.weights))


def _vector_distance(op, u, v):
    if u.shape != v.shape:
        raise ValueError(f"feature length mismatch {u.shape} vs {v.shape}; mixed normalization sizes?")
    diff = np.asarray(u, dtype=np.float64) - np.asarray(v, dtype=np.float64)
    if op == "md":
        return float(np.abs(diff).sum())
    return float(np.sqrt(np.dot(diff, diff)))


def component_distance(c, a, b):
    return _vector_distance(c.op, feature_vector(a, c.feature), feature_vector(b, c.feature))


def combined_distance(m, a, b):
    return float(sum(w * component_distance(c, a, b) for c, w in zip(m.components, m.weights)))


def build_tensor(components, feature_sets):
    """Pairwise component distances over a dataset.

    Returns a read-only ``(q, n, n)`` array; slice ``[i]`` is the symmetric,
    zero-diagonal matrix of component ``i``.
    """
    components = list(components)
    stacked = feature_sets if isinstance(feature_sets, dict) else stack_features(feature_sets)
    n = len(next(iter(stacked.values())))
    if n < 2:
        raise ValueError("need at least 2 samples")
    tensor = np.empty((len(components), n, n), dtype=np.float64)
    for i, c in enumerate(components):
        tensor[i] = squareform(pdist(stacked[c.feature], metric=_SCIPY_OPS[c.op]))
    tensor.setflags(write=False)
    return tensor
