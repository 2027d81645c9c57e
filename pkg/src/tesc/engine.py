"""End-to-end structural-correlation test pipeline.

One test: form the combined event-node set, draw reference nodes with the
configured sampler, evaluate both events' densities at each reference node
(a single BFS per node serves both counts and, in importance mode, the
selection-probability overlap), then compute the concordance statistic, the
tie-adjusted null variance, z, p and the decision.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any

import numpy as np

from ._kernels import BACKEND, density_pass
from .errors import DegenerateTieError, TescError
from .graph import EventSet, Graph, union_nodes
from .sampling import (
    ReferenceSample,
    default_batch_k,
    sample_batch_bfs,
    sample_importance,
    sample_whole_graph,
)
from .stats import (
    DensityVector,
    TieProfile,
    kendall_t,
    null_variance,
    weighted_t,
    z_and_p,
)
from .vicinity import VicinityIndex

SAMPLERS = ("auto", "batch-bfs", "importance", "whole-graph")

#: below this sample size the normal approximation for t is unreliable
NORMALITY_THRESHOLD = 30


@dataclass
class TestConfig:
    h: int = 1
    n: int = 900
    alpha: float = 0.05
    tail: str = "one"  # "one" | "two"
    sampler: str = "auto"
    batch_k: int | None = None  # importance mode; per-h default when None
    seed: int | None = None  # None: drawn from entropy and recorded
    auto_batch_threshold: int = 10_000  # auto picks batch-bfs up to this |V_aub|
    whole_graph_warn_ratio: float = 0.2
    threads: int = 1

    def validate(self) -> None:
        if self.h < 1:
            raise ValueError("h must be >= 1")
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if not 0 < self.alpha < 0.5:
            raise ValueError("alpha must lie in (0, 0.5)")
        if self.tail not in ("one", "two"):
            raise ValueError("tail must be 'one' or 'two'")
        if self.sampler not in SAMPLERS:
            raise ValueError(f"unknown sampler {self.sampler!r}")


@dataclass
class TescResult:
    statistic: Fraction | float
    s: int | None  # concordance sum (uniform mode only)
    sigma: float
    sigma_c_sq: Fraction
    z: float
    p_one_tailed: float
    p_two_tailed: float
    n: int
    n_prime: int
    decision: str  # "positive" | "negative" | "independent"
    exact: bool
    weighted: bool
    ties: TieProfile
    alpha: float
    tail: str
    metadata: dict[str, Any] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    timing_ms: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        stat = self.statistic
        return {
            "statistic": {
                "value": float(stat),
                "fraction": f"{stat.numerator}/{stat.denominator}"
                if isinstance(stat, Fraction)
                else None,
            },
            "s": self.s,
            "sigma": self.sigma,
            "sigma_c_sq": f"{self.sigma_c_sq.numerator}/{self.sigma_c_sq.denominator}",
            "z": self.z,
            "p_one_tailed": self.p_one_tailed,
            "p_two_tailed": self.p_two_tailed,
            "n": self.n,
            "n_prime": self.n_prime,
            "decision": self.decision,
            "exact": self.exact,
            "weighted": self.weighted,
            "ties": {"a": list(self.ties.tie_sizes_a), "b": list(self.ties.tie_sizes_b)},
            "alpha": self.alpha,
            "tail": self.tail,
            "metadata": self.metadata,
            "warnings": self.warnings,
            "timing_ms": self.timing_ms,
        }


def _entropy_seed() -> int:
    return int(np.random.SeedSequence().entropy % (1 << 63))


def derive_seed(master: int, level: int) -> int:
    """Stable per-level seed derivation for multi-level sweeps."""
    return int(np.random.SeedSequence([master, level]).generate_state(1, np.uint64)[0])


def _resolve_sampler(cfg: TestConfig, union: np.ndarray, index: VicinityIndex | None) -> str:
    if cfg.sampler != "auto":
        return cfg.sampler
    if union.size <= cfg.auto_batch_threshold:
        return "batch-bfs"
    if index is None:
        raise TescError(
            "auto sampler selected importance sampling for "
            f"{union.size} event nodes but no vicinity index was provided"
        )
    return "importance"


def evaluate_densities(
    g: Graph,
    sample: ReferenceSample,
    a: EventSet,
    b: EventSet,
    union_mask: np.ndarray | None = None,
    threads: int = 1,
) -> tuple[DensityVector, DensityVector]:
    """Both events' exact densities at each sampled reference node.

    One bounded BFS per node counts the vicinity size and both events'
    occurrences; when ``union_mask`` is given (importance mode) the overlap
    with the combined event set is counted in the same traversal and stored
    on the sample for the selection probabilities.
    """
    nodes = np.ascontiguousarray(sample.nodes, dtype=np.int32)
    mask_a = a.member_mask(g.node_count)
    mask_b = b.member_mask(g.node_count)
    mask_u = union_mask if union_mask is not None else np.empty(0, dtype=np.uint8)
    out = np.empty((nodes.size, 4), dtype=np.int64)

    if threads > 1 and nodes.size >= 64:
        bounds = np.linspace(0, nodes.size, threads + 1, dtype=np.int64)

        def run(i0: int, i1: int) -> None:
            scratch = g.new_scratch()
            density_pass(
                g.indptr, g.indices, nodes[i0:i1], sample.h,
                mask_a, mask_b, mask_u, out[i0:i1],
                scratch.stamp, scratch.queue, scratch.take(i1 - i0),
            )

        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(run, int(bounds[i]), int(bounds[i + 1]))
                for i in range(threads)
                if bounds[i] < bounds[i + 1]
            ]
            for f in futures:
                f.result()
    else:
        scratch = g.scratch()
        density_pass(
            g.indptr, g.indices, nodes, sample.h,
            mask_a, mask_b, mask_u, out,
            scratch.stamp, scratch.queue, scratch.take(nodes.size),
        )

    sizes = out[:, 0]
    if union_mask is not None:
        sample.overlap_counts = out[:, 3].copy()
    return DensityVector(out[:, 1], sizes), DensityVector(out[:, 2], sizes)


def test_correlation(
    g: Graph,
    a: EventSet,
    b: EventSet,
    index: VicinityIndex | None = None,
    cfg: TestConfig | None = None,
) -> TescResult:
    """Run one structural-correlation test between two events at level cfg.h.

    Raises DegenerateTieError when either event's densities are one single
    tie (the test is undetermined); the exception carries partial results.
    """
    cfg = cfg or TestConfig()
    cfg.validate()
    if len(a) == 0 or len(b) == 0:
        raise TescError("event sets must be non-empty")
    a.validate_for(g)
    b.validate_for(g)

    union = union_nodes(a, b)
    sampler = _resolve_sampler(cfg, union, index)
    seed = cfg.seed if cfg.seed is not None else _entropy_seed()
    warnings: list[str] = []
    if cfg.n <= NORMALITY_THRESHOLD:
        warnings.append(
            f"n = {cfg.n} <= {NORMALITY_THRESHOLD}: normal approximation is unreliable"
        )

    t0 = time.perf_counter()
    batch_k = None
    if sampler == "batch-bfs":
        sample = sample_batch_bfs(g, union, cfg.h, cfg.n, seed)
    elif sampler == "importance":
        if index is None:
            raise TescError("importance sampling requires a vicinity index")
        if index.node_count != g.node_count:
            raise TescError("vicinity index does not match the graph")
        if cfg.h > index.h_max:
            raise TescError(f"vicinity index covers h <= {index.h_max}, requested {cfg.h}")
        batch_k = cfg.batch_k if cfg.batch_k is not None else default_batch_k(cfg.h)
        sample = sample_importance(g, union, index, cfg.h, cfg.n, batch_k, seed)
    elif sampler == "whole-graph":
        sample = sample_whole_graph(g, union, cfg.h, cfg.n, seed)
        ratio = (sample.population_estimate or 0) / g.node_count
        if ratio < cfg.whole_graph_warn_ratio:
            warnings.append(
                f"whole-graph sampling with estimated population ratio {ratio:.3f} "
                f"< {cfg.whole_graph_warn_ratio}: expect heavy discard costs"
            )
    else:  # pragma: no cover - guarded by validate()
        raise TescError(f"unknown sampler {sampler!r}")
    t1 = time.perf_counter()

    weighted = sample.mode == "importance"
    union_mask = None
    if weighted:
        union_mask = np.zeros(g.node_count, dtype=np.uint8)
        union_mask[union] = 1
    va, vb = evaluate_densities(g, sample, a, b, union_mask, threads=cfg.threads)
    t2 = time.perf_counter()

    n = sample.n
    ties = TieProfile.of(va, vb)
    metadata = {
        "sampler": sampler,
        "h": cfg.h,
        "seed": seed,
        "rng": sample.rng_name,
        "batch_k": batch_k,
        "n_requested": cfg.n,
        "population_size": sample.population_size,
        "population_estimate": sample.population_estimate,
        "n_sum": sample.n_sum,
        "bfs_calls": sample.bfs_calls,
        "discarded": sample.discarded,
        "kernel_backend": BACKEND,
    }

    s_value: int | None = None
    if weighted:
        statistic = weighted_t(sample.weights, sample.probabilities, va, vb)
    else:
        s_value, statistic = kendall_t(va, vb)

    try:
        sigma_c_sq, sigma_sq = null_variance(n, ties)
    except DegenerateTieError as err:
        err.details.update(
            {
                "h": cfg.h,
                "n": n,
                "statistic": float(statistic),
                "ties_a": list(ties.tie_sizes_a),
                "ties_b": list(ties.tie_sizes_b),
                "sampler": sampler,
                "seed": seed,
            }
        )
        raise

    sigma = float(sigma_sq.numerator) ** 0.5 / float(sigma_sq.denominator) ** 0.5
    z, p_one = z_and_p(float(statistic), sigma, "one")
    _, p_two = z_and_p(float(statistic), sigma, "two")
    p_used = p_one if cfg.tail == "one" else p_two
    if p_used < cfg.alpha:
        decision = "positive" if z > 0 else "negative"
    else:
        decision = "independent"
    t3 = time.perf_counter()

    warnings.extend(sample.warnings)
    return TescResult(
        statistic=statistic,
        s=s_value,
        sigma=sigma,
        sigma_c_sq=sigma_c_sq,
        z=z,
        p_one_tailed=p_one,
        p_two_tailed=p_two,
        n=n,
        n_prime=sample.n_prime,
        decision=decision,
        exact=sample.exhausted,
        weighted=weighted,
        ties=ties,
        alpha=cfg.alpha,
        tail=cfg.tail,
        metadata=metadata,
        warnings=warnings,
        timing_ms={
            "sampling": (t1 - t0) * 1e3,
            "density": (t2 - t1) * 1e3,
            "statistic": (t3 - t2) * 1e3,
        },
    )


@dataclass
class LevelOutcome:
    """Per-level record of a multi-level sweep."""

    h: int
    result: TescResult | None
    error: str | None = None
    error_details: dict[str, Any] | None = None

    @property
    def status(self) -> str:
        if self.result is not None:
            return "ok"
        return "undetermined" if self.error_details is not None else "error"


def sweep_levels(
    g: Graph,
    a: EventSet,
    b: EventSet,
    index: VicinityIndex | None,
    cfg: TestConfig,
    levels,
) -> list[LevelOutcome]:
    """One independent test per level, each with a seed derived from the
    master seed; a failing level does not abort the others."""
    master = cfg.seed if cfg.seed is not None else _entropy_seed()
    outcomes: list[LevelOutcome] = []
    for h in sorted(set(int(h) for h in levels)):
        level_cfg = replace(cfg, h=h, seed=derive_seed(master, h))
        try:
            result = test_correlation(g, a, b, index, level_cfg)
            result.metadata["master_seed"] = master
            outcomes.append(LevelOutcome(h=h, result=result))
        except DegenerateTieError as err:
            details = dict(err.details)
            details["master_seed"] = master
            outcomes.append(
                LevelOutcome(h=h, result=None, error=str(err), error_details=details)
            )
        except TescError as err:
            outcomes.append(LevelOutcome(h=h, result=None, error=str(err)))
    return outcomes
