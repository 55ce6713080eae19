"""Statistical verification harness: distances, tests, experiment drivers.

Every driver is reproducible bit-for-bit from (seed, n, replicates): each
replicate or fixed-size replicate block derives its own child stream from
the master seed, and aggregation is order-independent, so worker count
never changes a result.
"""

from __future__ import annotations

import csv
import json
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.stats

from . import greedy
from .trees import RandomSource, sample_uniform

DEFAULT_SEED = 0x5EED


@dataclass
class EmpiricalDistribution:
    """Integer-valued sample counts."""

    counts: Counter
    total: int

    @classmethod
    def from_samples(cls, samples: Iterable[int]) -> "EmpiricalDistribution":
        counts = Counter(int(s) for s in samples)
        return cls(counts=counts, total=sum(counts.values()))

    def prob(self, value: int) -> float:
        return self.counts.get(value, 0) / self.total

    def support(self) -> list[int]:
        return sorted(self.counts)

    def as_probs(self) -> dict[int, float]:
        return {k: v / self.total for k, v in self.counts.items()}

    def tv_to(self, law: Mapping[int, float | Fraction]) -> float:
        """Total variation distance to a reference law on the same lattice."""
        support = set(self.counts) | set(law)
        acc = 0.0
        for k in support:
            acc += abs(self.prob(k) - float(law.get(k, 0)))
        return acc / 2


def total_variation(
    p: Mapping[int, float | Fraction], q: Mapping[int, float | Fraction],
    tol: float = 1e-9,
) -> float:
    """(1/2) sum |p - q| over the union support; inputs must be normalized."""
    for name, dist in (("p", p), ("q", q)):
        s = float(sum(dist.values()))
        if abs(s - 1.0) > tol:
            raise ValueError(f"distribution {name} sums to {s}, not 1")
    support = set(p) | set(q)
    return sum(abs(float(p.get(k, 0)) - float(q.get(k, 0))) for k in support) / 2


def chi_square_uniform(counts: Sequence[int]) -> tuple[float, float]:
    """Chi-square statistic and p-value against the uniform law on k categories.

    Requires k >= 2 and expected count >= 5 per category; the p-value is the
    upper tail of the chi-square law with k - 1 degrees of freedom
    (a regularized incomplete gamma).
    """
    k = len(counts)
    if k < 2:
        raise ValueError("need at least two categories")
    n = int(sum(counts))
    expected = n / k
    if expected < 5:
        raise ValueError(f"expected count {expected:.2f} per category is below 5")
    stat = sum((c - expected) ** 2 for c in counts) / expected
    pvalue = float(scipy.stats.chi2.sf(stat, df=k - 1))
    return stat, pvalue


def ks_gaussian(
    samples: np.ndarray, mean: float = 0.0, variance: float = 1.0
) -> tuple[float, float]:
    """Kolmogorov-Smirnov statistic and p-value against N(mean, variance)."""
    res = scipy.stats.kstest(samples, "norm", args=(mean, math.sqrt(variance)))
    return float(res.statistic), float(res.pvalue)


@dataclass
class ExperimentReport:
    """One verified statistic; passes iff observed lies in [lower, upper].

    When only target/tolerance are given the band is target +/- tolerance.
    """

    n: int
    replicates: int
    seed: int
    statistic: str
    observed: float
    target: float
    tolerance: float
    lower: float = field(default=math.nan)
    upper: float = field(default=math.nan)
    passed: bool = field(default=False)

    def __post_init__(self) -> None:
        if math.isnan(self.lower):
            self.lower = self.target - self.tolerance
        if math.isnan(self.upper):
            self.upper = self.target + self.tolerance
        self.passed = self.lower <= self.observed <= self.upper

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "replicates": self.replicates,
                "seed": self.seed,
                "statistic": self.statistic,
                "observed": self.observed,
                "target": self.target,
                "tolerance": self.tolerance,
                "lower": self.lower,
                "upper": self.upper,
                "passed": self.passed,
            },
            sort_keys=True,
        )


REPORT_FIELDS = [
    "n", "replicates", "seed", "statistic", "observed", "target",
    "tolerance", "lower", "upper", "passed",
]


def write_reports_jsonl(reports: Iterable[ExperimentReport], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in reports:
            fh.write(r.to_json() + "\n")


def write_reports_csv(reports: Iterable[ExperimentReport], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=REPORT_FIELDS)
        writer.writeheader()
        for r in reports:
            writer.writerow({k: getattr(r, k) for k in REPORT_FIELDS})


# --------------------------------------------------------------------------
# Experiment drivers
# --------------------------------------------------------------------------

def clt_experiment(
    n: int, replicates: int, seed: int = DEFAULT_SEED
) -> list[ExperimentReport]:
    """Gaussian-limit checks on the fast status-chain path.

    Reports, in order: sample variance of sqrt(n) (G/n - 1/2) against 1/16;
    KS p-value of the same statistic against N(0, 1/16); sample variance of
    sqrt(n) (theta/n - ln 2) against 3/4; fraction of runs where the root
    was the last undetermined vertex against 1/4.
    """
    if n < 100 or replicates < 100:
        raise ValueError("need n >= 100 and replicates >= 100")
    rng = RandomSource(seed)
    sizes, steps, root_last = greedy.simulate_status_chain_many(n, replicates, rng)
    sqrt_n = math.sqrt(n)
    z_size = sqrt_n * (sizes / n - 0.5)
    z_steps = sqrt_n * (steps / n - math.log(2.0))
    _, ks_p = ks_gaussian(z_size, 0.0, 1.0 / 16.0)
    return [
        ExperimentReport(
            n=n, replicates=replicates, seed=seed, statistic="size_variance",
            observed=float(z_size.var(ddof=1)), target=1 / 16, tolerance=0.0075,
            lower=0.055, upper=0.070,
        ),
        ExperimentReport(
            n=n, replicates=replicates, seed=seed, statistic="size_ks_pvalue",
            observed=ks_p, target=1.0, tolerance=1.0, lower=1e-2, upper=1.0,
        ),
        ExperimentReport(
            n=n, replicates=replicates, seed=seed, statistic="steps_variance",
            observed=float(z_steps.var(ddof=1)), target=3 / 4, tolerance=0.075,
            lower=0.68, upper=0.83,
        ),
        ExperimentReport(
            n=n, replicates=replicates, seed=seed, statistic="root_last_fraction",
            observed=float(root_last.mean()), target=0.25, tolerance=0.02,
        ),
    ]


def _bootstrap_tv_threshold(
    counts_a: Counter, counts_b: Counter, rng: RandomSource,
    rounds: int, quantile: float,
) -> float:
    """99th-percentile TV between two resamples of the pooled empirical law."""
    support = sorted(set(counts_a) | set(counts_b))
    pooled = np.array([counts_a.get(k, 0) + counts_b.get(k, 0) for k in support],
                      dtype=np.float64)
    probs = pooled / pooled.sum()
    na = sum(counts_a.values())
    nb = sum(counts_b.values())
    gen = rng.generator
    tvs = np.empty(rounds)
    for i in range(rounds):
        xa = gen.multinomial(na, probs) / na
        xb = gen.multinomial(nb, probs) / nb
        tvs[i] = 0.5 * np.abs(xa - xb).sum()
    return float(np.quantile(tvs, quantile))


def symmetry_experiment_mc(
    n: int,
    replicates: int,
    seed: int = DEFAULT_SEED,
    bootstrap_rounds: int = 200,
    quantile: float = 0.99,
    control: bool = False,
) -> ExperimentReport:
    """Two-sample check that law(G) matches law((n - G) + E).

    Draws two independent replicate sets, compares the empirical law of the
    set size from one against the empirical law of complement-plus-indicator
    from the other, and calibrates the TV threshold by bootstrap resampling
    of the pooled sample.  With ``control=True`` both sides use the set
    size, which calibrates the null behaviour of the test itself.
    """
    rng = RandomSource(seed)
    sizes_a, _, _ = greedy.simulate_status_chain_many(n, replicates, rng.child(1))
    sizes_b, _, last_b = greedy.simulate_status_chain_many(n, replicates, rng.child(2))
    side_a = sizes_a
    side_b = sizes_b if control else (n - sizes_b) + last_b
    counts_a = Counter(side_a.tolist())
    counts_b = Counter(side_b.tolist())
    dist_a = EmpiricalDistribution(counts_a, replicates)
    tv = dist_a.tv_to(EmpiricalDistribution(counts_b, replicates).as_probs())
    threshold = _bootstrap_tv_threshold(
        counts_a, counts_b, rng.child(3), bootstrap_rounds, quantile
    )
    name = "symmetry_tv_control" if control else "symmetry_tv"
    return ExperimentReport(
        n=n, replicates=replicates, seed=seed, statistic=name,
        observed=tv, target=0.0, tolerance=threshold, lower=0.0, upper=threshold,
    )


def _ratio_values(kind: str, n: int, seed: int, start: int, stop: int) -> list[float]:
    """Per-replicate normalized statistics; replicate i uses child stream i."""
    master = RandomSource(seed)
    values = []
    for i in range(start, stop):
        child = master.child(i)
        tree = sample_uniform(n, child)
        if kind == "matching":
            order = child.generator.permutation(np.arange(1, n)).tolist()
            values.append(greedy.greedy_matching(tree, order) / n)
        elif kind == "max-is":
            values.append(greedy.max_independent_set(tree) / n)
        elif kind == "greedy-tree":
            values.append(greedy.greedy_peeling(tree).size / n)
        else:
            raise ValueError(f"unknown sweep kind {kind!r}")
    return values


def tree_sweep_experiment(
    kind: str,
    n: int,
    replicates: int,
    seed: int = DEFAULT_SEED,
    jobs: int = 1,
) -> ExperimentReport:
    """Mean of a per-tree statistic over uniformly sampled trees.

    ``kind`` is one of ``matching`` (greedy matching density, limit 3/8),
    ``max-is`` (maximum independent set density, limit ~0.5671 solving
    x e^x = 1) or ``greedy-tree`` (greedy set density, limit 1/2).
    """
    targets = {
        "matching": (0.375, 0.005),
        "max-is": (0.5671, 0.005),
        "greedy-tree": (0.5, 0.005),
    }
    if kind not in targets:
        raise ValueError(f"unknown sweep kind {kind!r}")
    if jobs <= 1:
        values = _ratio_values(kind, n, seed, 0, replicates)
    else:
        bounds = np.linspace(0, replicates, jobs + 1, dtype=int)
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = pool.map(
                _ratio_values,
                [kind] * jobs, [n] * jobs, [seed] * jobs,
                bounds[:-1].tolist(), bounds[1:].tolist(),
            )
        values = [v for chunk in chunks for v in chunk]
    target, tol = targets[kind]
    return ExperimentReport(
        n=n, replicates=replicates, seed=seed, statistic=f"{kind}_density",
        observed=float(np.mean(values)), target=target, tolerance=tol,
    )


def greedy_ratio_experiment(
    n: int, replicates: int, seed: int = DEFAULT_SEED
) -> ExperimentReport:
    """Mean greedy set density via the status chain (no trees built)."""
    rng = RandomSource(seed)
    sizes, _, _ = greedy.simulate_status_chain_many(n, replicates, rng)
    return ExperimentReport(
        n=n, replicates=replicates, seed=seed, statistic="greedy_density",
        observed=float(sizes.mean() / n), target=0.5, tolerance=0.005,
    )
