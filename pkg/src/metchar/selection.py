"""Component subset search feeding MetChar.

* exhaustive: every non-empty subset, by size then lexicographically.
* greedy: rank singles by accuracy, then grow the top-j prefix.
* hybrid: drop singles scoring below ``theta``, then search every subset of
  the survivors.

Every trial is seeded from (global seed, subset bitmask), so a subset gets
the same result whichever strategy, order or worker count evaluates it.
The wall-clock budget is checked between trials only.
"""

import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
import multiprocessing as mp

import numpy as np

from .clustering import as_stacked
from .metrics import ComponentRegistry, build_tensor
from .optimizer import MetCharConfig, metchar

STRATEGIES = ("exhaustive", "greedy", "hybrid")


@dataclass(frozen=True)
class SelectionConfig:
    strategy: str = "hybrid"
    theta: float = 0.55
    budget: float = None  # seconds
    metchar: MetCharConfig = field(default_factory=MetCharConfig)
    min_combo_size: int = 2
    max_combo_size: int = None
    workers: int = 1

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError("theta must lie in [0, 1]")
        if self.budget is not None and not self.budget > 0:
            raise ValueError("budget must be > 0 seconds")
        if self.min_combo_size < 2:
            raise ValueError("min_combo_size must be >= 2")
        if self.max_combo_size is not None and self.max_combo_size < self.min_combo_size:
            raise ValueError("max_combo_size must be >= min_combo_size")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class Trial:
    components: tuple
    weights: tuple
    accuracy: float
    elapsed: float
    seed: int
    phase: int
    best_round: int
    history: list = field(repr=False)

    def names(self):
        return [c.name for c in self.components]

    def to_dict(self, timings=False):
        d = {
            "components": self.names(),
            "weights": list(self.weights),
            "accuracy": self.accuracy,
            "phase": self.phase,
            "seed": self.seed,
            "best_round": self.best_round,
        }
        if timings:
            d["elapsed_secs"] = self.elapsed
        d["history"] = [{"weights": list(w), "accuracy": a} for w, a in self.history]
        return d


@dataclass
class SelectionReport:
    strategy: str
    trials: list
    best: int  # index into trials, None when nothing ran
    pruned: list = field(default_factory=list)  # [(ComponentId, accuracy)]
    survivors: list = field(default_factory=list)
    budget_exhausted: bool = False
    all_pruned: bool = False

    @property
    def best_trial(self):
        return None if self.best is None else self.trials[self.best]

    @property
    def best_accuracy(self):
        return None if self.best is None else self.trials[self.best].accuracy

    def trial_sets(self):
        return [tuple(t.names()) for t in self.trials]


def trial_seed(seed, indices):
    mask = 0
    for i in indices:
        mask |= 1 << int(i)
    state = np.random.SeedSequence([int(seed), mask]).generate_state(1, dtype=np.uint64)
    return int(state[0])


class _Context:
    def __init__(self, registry, features, labels, tensor=None, with_tensor=True):
        self.registry = registry
        self.stacked = as_stacked(features)
        self.labels = list(labels)
        if tensor is None and with_tensor:
            tensor = build_tensor(registry, self.stacked)
        self.tensor = tensor


def _run_trial(ctx, indices, mcfg, phase):
    seed = trial_seed(mcfg.seed, indices)
    comps = [ctx.registry[i] for i in indices]
    start = time.perf_counter()
    tm = metchar(
        comps,
        ctx.stacked,
        ctx.labels,
        replace(mcfg, seed=seed),
        tensor=ctx.tensor[list(indices)] if len(indices) > 1 else None,
    )
    elapsed = time.perf_counter() - start
    return Trial(tm.components, tm.weights, tm.accuracy, elapsed, seed, phase, tm.best_round, tm.history)


_WORKER_CTX = None


def _init_worker(ctx):
    global _WORKER_CTX
    _WORKER_CTX = ctx


def _worker_trial(args):
    return _run_trial(_WORKER_CTX, *args)


class _Runner:
    """Runs trials in submission order; stops at the first boundary past the budget."""

    def __init__(self, ctx, cfg):
        self.ctx = ctx
        self.cfg = cfg
        self.start = time.monotonic()
        self.exhausted = False
        self.ran = 0
        self.pool = None
        if cfg.workers > 1:
            self.pool = ProcessPoolExecutor(
                cfg.workers, mp_context=mp.get_context("fork"),
                initializer=_init_worker, initargs=(ctx,),
            )

    def _over_budget(self):
        return self.cfg.budget is not None and time.monotonic() - self.start >= self.cfg.budget

    def run(self, subsets, phase):
        out = []
        it = iter(subsets)
        chunk_size = self.cfg.workers
        while not self.exhausted:
            chunk = list(itertools.islice(it, chunk_size))
            if not chunk:
                break
            # the first trial always runs, so a budgeted report is never empty
            if self.ran and self._over_budget():
                self.exhausted = True
                break
            args = [(tuple(s), self.cfg.metchar, phase) for s in chunk]
            if self.pool is None:
                out.extend(_run_trial(self.ctx, *a) for a in args)
            else:
                out.extend(self.pool.map(_worker_trial, args))
            self.ran += len(chunk)
        return out

    def close(self):
        if self.pool is not None:
            self.pool.shutdown()


def _best_index(trials):
    best = None
    for i, t in enumerate(trials):
        if best is None or t.accuracy > trials[best].accuracy:
            best = i
    return best


def _combos(pool, cfg):
    hi = len(pool) if cfg.max_combo_size is None else min(cfg.max_combo_size, len(pool))
    for size in range(cfg.min_combo_size, hi + 1):
        yield from itertools.combinations(pool, size)


def _prepare(registry, features, labels, tensor=None, with_tensor=True):
    registry = registry if isinstance(registry, ComponentRegistry) else ComponentRegistry(registry)
    return _Context(registry, features, labels, tensor, with_tensor)


def _search(strategy, registry, features, labels, cfg, tensor=None):
    ctx = _prepare(registry, features, labels, tensor)
    p = len(ctx.registry)
    runner = _Runner(ctx, cfg)
    try:
        singles = runner.run([(i,) for i in range(p)], phase=1)
        trials = list(singles)
        acc = [t.accuracy for t in singles]
        pruned, survivors, all_pruned = [], [], False
        if not runner.exhausted:
            if strategy == "greedy":
                rank = sorted(range(p), key=lambda i: (-acc[i], i))
                hi = p if cfg.max_combo_size is None else min(cfg.max_combo_size, p)
                plan = (tuple(sorted(rank[:j])) for j in range(cfg.min_combo_size, hi + 1))
                survivors = list(range(p))
            else:
                theta = cfg.theta if strategy == "hybrid" else 0.0
                survivors = [i for i in range(p) if acc[i] >= theta]
                pruned = [(ctx.registry[i], acc[i]) for i in range(p) if acc[i] < theta]
                all_pruned = not survivors
                plan = _combos(survivors, cfg)
            trials.extend(runner.run(plan, phase=2))
    finally:
        runner.close()
    return SelectionReport(
        strategy=strategy,
        trials=trials,
        best=_best_index(trials),
        pruned=pruned,
        survivors=[ctx.registry[i] for i in survivors],
        budget_exhausted=runner.exhausted,
        all_pruned=all_pruned,
    )


def single_component_accuracies(registry, features, labels, cfg):
    """Accuracy of each component alone, in registry order."""
    mcfg = cfg.metchar if isinstance(cfg, SelectionConfig) else cfg
    ctx = _prepare(registry, features, labels, with_tensor=False)
    return [
        (ctx.registry[i], _run_trial(ctx, (i,), mcfg, 1).accuracy) for i in range(len(ctx.registry))
    ]


def hybrid_selection(registry, features, labels, cfg, tensor=None):
    return _search("hybrid", registry, features, labels, cfg, tensor)


def exhaustive_selection(registry, features, labels, cfg, tensor=None):
    return _search("exhaustive", registry, features, labels, cfg, tensor)


def greedy_selection(registry, features, labels, cfg, tensor=None):
    return _search("greedy", registry, features, labels, cfg, tensor)


def run_selection(registry, features, labels, cfg, tensor=None):
    return _search(cfg.strategy, registry, features, labels, cfg, tensor)
