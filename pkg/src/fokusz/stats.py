"""Nonparametric statistics and chi-square power machinery.

Pearson chi-square on contingency tables, Cramer's V, Kruskal-Wallis with
tie correction, Wilcoxon signed-rank (exact by sign-pattern counting up to
m=25, normal approximation with tie correction and continuity correction
beyond), Bonferroni adjustment, a noncentral chi-square CDF built as a
Poisson mixture of central CDFs, and a minimal-N goodness-of-fit power
solver.

Tail probabilities come from the regularized incomplete gamma function
(scipy.special); everything above that layer is implemented here so the
test suite can cross-check each routine against independent oracles.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import special

from .errors import (
    AllDifferencesZero,
    DegenerateTable,
    EffectTooSmall,
    TooFewGroups,
)


class TestMethod(str, Enum):
    CHI_SQUARE = "chi_square"
    KRUSKAL_WALLIS = "kruskal_wallis"
    WILCOXON_EXACT = "wilcoxon_exact"
    WILCOXON_NORMAL = "wilcoxon_normal"


@dataclass(frozen=True)
class TestResult:
    statistic: float
    df: Optional[float]
    p_value: float
    method: TestMethod

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"p_value {self.p_value} outside [0, 1]")

    def to_json(self) -> dict:
        return {
            "method": self.method.value,
            "statistic": self.statistic,
            "df": self.df,
            "p": self.p_value,
        }


@dataclass(frozen=True)
class PowerResult:
    effect_w: float
    df: int
    alpha: float
    target_power: float
    required_n: int
    achieved_power: float

    def to_json(self) -> dict:
        return {
            "w": self.effect_w,
            "df": self.df,
            "alpha": self.alpha,
            "target_power": self.target_power,
            "required_n": self.required_n,
            "achieved_power": self.achieved_power,
        }


class ContingencyTable:
    """r x c table of non-negative integer cell counts, r, c >= 2."""

    def __init__(self, cells: Sequence[Sequence[int]]):
        arr = np.asarray(cells, dtype=float)
        if arr.ndim != 2 or arr.shape[0] < 2 or arr.shape[1] < 2:
            raise ValueError(f"need an r>=2 by c>=2 table, got shape {arr.shape}")
        if (arr < 0).any():
            raise ValueError("cells must be non-negative")
        self.cells = arr
        self.r, self.c = arr.shape
        self.n = float(arr.sum())

    @classmethod
    def from_csv(cls, path) -> "ContingencyTable":
        rows = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rows.append([float(cell) for cell in line.split(",")])
        return cls(rows)


def chi2_cdf(x: float, df: float) -> float:
    """Central chi-square CDF via the regularized lower incomplete gamma."""
    if x <= 0:
        return 0.0
    return float(special.gammainc(df / 2.0, x / 2.0))


def chi2_sf(x: float, df: float) -> float:
    """Central chi-square survival function (upper incomplete gamma)."""
    if x <= 0:
        return 1.0
    return float(special.gammaincc(df / 2.0, x / 2.0))


def chi2_critical(alpha: float, df: float) -> float:
    """x such that the chi-square survival function at x equals alpha."""
    return float(special.chdtri(df, alpha))


def chi_square(table: ContingencyTable) -> TestResult:
    """Pearson chi-square test of independence, df = (r-1)(c-1)."""
    row_sums = table.cells.sum(axis=1)
    col_sums = table.cells.sum(axis=0)
    if table.n <= 0 or (row_sums == 0).any() or (col_sums == 0).any():
        raise DegenerateTable("table has an all-zero row or column")
    expected = np.outer(row_sums, col_sums) / table.n
    statistic = float(((table.cells - expected) ** 2 / expected).sum())
    df = (table.r - 1) * (table.c - 1)
    return TestResult(statistic, float(df), chi2_sf(statistic, df), TestMethod.CHI_SQUARE)


def cramers_v(table: ContingencyTable) -> float:
    """V = sqrt(chi2 / (n * (k - 1))), k the smaller table dimension."""
    result = chi_square(table)
    k = min(table.r, table.c)
    v = math.sqrt(result.statistic / (table.n * (k - 1)))
    return min(1.0, v)


def _midranks(values: np.ndarray) -> np.ndarray:
    """Average ranks (1-based) with ties sharing their midrank."""
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(len(values), dtype=float)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _kw_statistic(ranks: np.ndarray, sizes: Sequence[int], tie_term: float) -> float:
    n = len(ranks)
    h = 0.0
    start = 0
    for size in sizes:
        r_sum = float(ranks[start : start + size].sum())
        h += r_sum * r_sum / size
        start += size
    h = 12.0 / (n * (n + 1)) * h - 3.0 * (n + 1)
    return h / tie_term


def _tie_correction(pooled: np.ndarray) -> float:
    """1 - sum(t^3 - t) / (N^3 - N); 0 when every value is tied."""
    n = len(pooled)
    _, counts = np.unique(pooled, return_counts=True)
    return 1.0 - float((counts**3 - counts).sum()) / (n**3 - n)


def kruskal_wallis(groups: Sequence[Sequence[float]]) -> TestResult:
    """Kruskal-Wallis H with tie correction; p from chi-square, df = g - 1.

    When all pooled values are tied H is undefined; the result reports
    statistic 0 with p = 1.
    """
    if len(groups) < 2:
        raise TooFewGroups(f"need at least 2 groups, got {len(groups)}")
    for i, group in enumerate(groups):
        if len(group) == 0:
            raise TooFewGroups(f"group {i} is empty")
    pooled = np.concatenate([np.asarray(g, dtype=float) for g in groups])
    if len(pooled) < 3:
        raise TooFewGroups("need at least 3 observations in total")
    df = len(groups) - 1
    tie_term = _tie_correction(pooled)
    if tie_term == 0.0:
        return TestResult(0.0, float(df), 1.0, TestMethod.KRUSKAL_WALLIS)
    ranks = _midranks(pooled)
    h = _kw_statistic(ranks, [len(g) for g in groups], tie_term)
    return TestResult(h, float(df), chi2_sf(h, df), TestMethod.KRUSKAL_WALLIS)


def kruskal_wallis_permutation(groups: Sequence[Sequence[float]]) -> TestResult:
    """Exact permutation p-value for H: enumerate all group assignments.

    Feasible only for small samples; serves as the oracle for the
    chi-square approximation.
    """
    base = kruskal_wallis(groups)
    if base.p_value == 1.0 and base.statistic == 0.0:
        return base
    sizes = [len(g) for g in groups]
    pooled = np.concatenate([np.asarray(g, dtype=float) for g in groups])
    ranks = _midranks(pooled)
    tie_term = _tie_correction(pooled)
    observed = base.statistic
    total = 0
    at_least = 0
    indices = list(range(len(pooled)))

    def assignments(remaining: list[int], size_idx: int, chosen: list[np.ndarray]):
        nonlocal total, at_least
        if size_idx == len(sizes) - 1:
            chosen_ranks = chosen + [ranks[remaining]]
            h = _kw_statistic(np.concatenate(chosen_ranks), sizes, tie_term)
            total += 1
            if h >= observed - 1e-12:
                at_least += 1
            return
        for combo in itertools.combinations(remaining, sizes[size_idx]):
            rest = [i for i in remaining if i not in set(combo)]
            assignments(rest, size_idx + 1, chosen + [ranks[list(combo)]])

    assignments(indices, 0, [])
    return TestResult(observed, float(len(sizes) - 1), at_least / total, TestMethod.KRUSKAL_WALLIS)


def _signed_rank_sums(x: Sequence[float], y: Sequence[float]):
    if len(x) != len(y) or len(x) == 0:
        raise ValueError("samples must be paired and non-empty")
    diffs = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    diffs = diffs[diffs != 0.0]  # zero differences dropped (Wilcoxon's procedure)
    if len(diffs) == 0:
        raise AllDifferencesZero("all paired differences are zero")
    ranks = _midranks(np.abs(diffs))
    w_plus = float(ranks[diffs > 0].sum())
    w_minus = float(ranks[diffs < 0].sum())
    return diffs, ranks, w_plus, w_minus


EXACT_WILCOXON_LIMIT = 25


def wilcoxon_signed_rank(x: Sequence[float], y: Sequence[float]) -> TestResult:
    """Two-sided Wilcoxon signed-rank test on paired samples.

    Exact null distribution (counting sign assignments over the midranks)
    for m <= 25 effective pairs; otherwise the normal approximation with
    tie-corrected variance and a 0.5 continuity correction. The statistic
    reported is min(W+, W-).
    """
    diffs, ranks, w_plus, w_minus = _signed_rank_sums(x, y)
    m = len(diffs)
    w = min(w_plus, w_minus)
    if m <= EXACT_WILCOXON_LIMIT:
        p = _exact_signed_rank_p(ranks, w)
        return TestResult(w, None, p, TestMethod.WILCOXON_EXACT)
    mu = m * (m + 1) / 4.0
    _, counts = np.unique(np.abs(diffs), return_counts=True)
    tie_sum = float((counts**3 - counts).sum())
    sigma2 = m * (m + 1) * (2 * m + 1) / 24.0 - tie_sum / 48.0
    sigma = math.sqrt(sigma2)
    z = (w - mu + 0.5) / sigma  # w <= mu, correct towards the mean
    p = min(1.0, 2.0 * _norm_cdf(z))
    return TestResult(w, None, p, TestMethod.WILCOXON_NORMAL)


def _exact_signed_rank_p(ranks: np.ndarray, w: float) -> float:
    """P(W+ <= w) doubled, by counting subsets of the rank multiset.

    Midranks are half-integers, so doubling them gives integers and the
    distribution of 2*W+ is a subset-sum count, computed by convolution.
    """
    scaled = np.rint(ranks * 2).astype(np.int64)
    total = int(scaled.sum())
    counts = np.zeros(total + 1, dtype=np.int64)
    counts[0] = 1
    for r in scaled:
        counts[r:] = counts[r:] + counts[:-r]
    threshold = int(round(w * 2))
    c_low = int(counts[: threshold + 1].sum())
    p = 2.0 * c_low / (2 ** len(ranks))
    return min(1.0, p)


def _norm_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def bonferroni(p_values: Sequence[float]) -> list[float]:
    """p_adj = min(1, p * m), order-preserving."""
    m = len(p_values)
    for p in p_values:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"p-value {p} outside [0, 1]")
    return [min(1.0, p * m) for p in p_values]


def noncentral_chi2_cdf(x: float, df: float, lam: float) -> float:
    """Noncentral chi-square CDF as a Poisson mixture of central CDFs.

    F(x; df, lam) = sum_j Poisson(j; lam/2) * F_central(x; df + 2j),
    truncated once the remaining Poisson tail is below 1e-12. lam = 0
    reduces exactly to the central CDF.
    """
    if x <= 0:
        return 0.0
    if lam < 0:
        raise ValueError("noncentrality must be non-negative")
    if lam == 0:
        return chi2_cdf(x, df)
    half = lam / 2.0
    # Terms beyond mode + 10 sqrt hold less than 1e-12 of Poisson mass.
    j_max = int(half + 10.0 * math.sqrt(half + 4.0) + 100.0)
    total = 0.0
    cum_pmf = 0.0
    log_half = math.log(half)
    for j in range(j_max + 1):
        log_pmf = -half + j * log_half - math.lgamma(j + 1)
        pmf = math.exp(log_pmf) if log_pmf > -745.0 else 0.0
        if pmf > 0.0:
            term_cdf = chi2_cdf(x, df + 2 * j)
            total += pmf * term_cdf
            cum_pmf += pmf
            if 1.0 - cum_pmf < 1e-12:
                break
            # The central CDF decreases in j, bounding the remaining sum.
            if (1.0 - cum_pmf) * term_cdf < 1e-15:
                break
    return min(1.0, total)


def chi2_power(effect_w: float, df: int, n: int, alpha: float) -> float:
    """Power of the chi-square test at sample size n: noncentrality n * w^2."""
    if n <= 0:
        return alpha if n == 0 else 0.0
    critical = chi2_critical(alpha, df)
    return 1.0 - noncentral_chi2_cdf(critical, df, n * effect_w * effect_w)


DEFAULT_N_CAP = 10**7


def required_n(
    effect_w: float,
    df: int,
    alpha: float,
    target_power: float,
    n_cap: int = DEFAULT_N_CAP,
) -> PowerResult:
    """Minimal integer N whose chi-square test power reaches target_power.

    Found by doubling until the target is bracketed, then bisection; the
    result satisfies power(N) >= target_power > power(N - 1).
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    if not alpha < target_power < 1.0:
        raise ValueError("target_power must be in (alpha, 1)")
    if effect_w <= 0:
        raise EffectTooSmall("effect size w must be positive")
    if df < 1:
        raise ValueError("df must be a positive integer")

    hi = 1
    while chi2_power(effect_w, df, hi, alpha) < target_power:
        hi *= 2
        if hi > n_cap:
            raise EffectTooSmall(
                f"required N exceeds cap {n_cap} for w={effect_w}, df={df}"
            )
    lo = hi // 2  # power(lo) < target (or lo == 0)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if chi2_power(effect_w, df, mid, alpha) >= target_power:
            hi = mid
        else:
            lo = mid
    return PowerResult(
        effect_w=effect_w,
        df=df,
        alpha=alpha,
        target_power=target_power,
        required_n=hi,
        achieved_power=chi2_power(effect_w, df, hi, alpha),
    )


def gof_chi_square(observed: Sequence[int], expected_probs: Sequence[float]) -> TestResult:
    """Goodness-of-fit chi-square of observed counts against a distribution.

    Cells with zero expected probability must hold zero observations; they
    are removed before computing the statistic, df = remaining cells - 1.
    """
    obs = np.asarray(observed, dtype=float)
    probs = np.asarray(expected_probs, dtype=float)
    if obs.shape != probs.shape:
        raise ValueError("observed and expected lengths differ")
    if (obs[probs == 0] > 0).any():
        raise ValueError("observed count in a zero-probability cell")
    keep = probs > 0
    obs, probs = obs[keep], probs[keep]
    if len(obs) < 2:
        raise DegenerateTable("need at least two cells with positive probability")
    n = obs.sum()
    expected = probs / probs.sum() * n
    statistic = float(((obs - expected) ** 2 / expected).sum())
    df = len(obs) - 1
    return TestResult(statistic, float(df), chi2_sf(statistic, df), TestMethod.CHI_SQUARE)
