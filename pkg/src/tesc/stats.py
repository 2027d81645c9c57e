"""Concordance statistics on exact density vectors.

Densities are carried as integer (count, vicinity-size) pairs and every
comparison is done with cross-multiplied integer arithmetic, so ties are
detected exactly; the concordance sum S, the statistic t and the null
variance are exact rationals.  Floating point enters only for z-scores,
p-values and the weighted estimator's general case.

Under the null hypothesis (any ordering of one density vector equally
likely given the other), S is asymptotically normal with mean 0.  With no
ties its variance over pairs is ``2(2n+5) / (9 n (n-1))`` after dividing by
the pair count squared; with ties the numerator variance gets the standard
tie correction driven by the sizes of the equal-value groups of each vector
(larger ties always shrink it).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from ._kernels import kendall_s as _kendall_s_kernel
from ._kernels import weighted_sums as _weighted_sums_kernel
from .errors import DegenerateTieError


class DensityVector:
    """Aligned exact densities (one per reference node) for a single event."""

    __slots__ = ("num", "den")

    def __init__(self, num, den):
        num = np.ascontiguousarray(num, dtype=np.int64)
        den = np.ascontiguousarray(den, dtype=np.int64)
        if num.shape != den.shape or num.ndim != 1:
            raise ValueError("numerators and denominators must be equal-length 1-D arrays")
        if den.size and den.min() <= 0:
            raise ValueError("denominators must be positive")
        if num.size and (num.min() < 0 or (num > den).any()):
            raise ValueError("densities must lie in [0, 1]")
        self.num = num
        self.den = den

    @classmethod
    def from_values(cls, values: Sequence) -> "DensityVector":
        """Build from Fractions / ints / floats (floats converted exactly)."""
        fracs = [Fraction(v) for v in values]
        return cls([f.numerator for f in fracs], [f.denominator for f in fracs])

    def __len__(self) -> int:
        return self.num.size

    def values(self) -> list[Fraction]:
        return [Fraction(int(p), int(q)) for p, q in zip(self.num, self.den)]


def _as_fraction(x) -> Fraction:
    if isinstance(x, tuple):
        return Fraction(x[0], x[1])
    return Fraction(x)


def concordance(sa_i, sa_j, sb_i, sb_j) -> int:
    """Sign of (sa_i - sa_j)(sb_i - sb_j): 1 concordant, -1 discordant, 0 tie."""
    da = _as_fraction(sa_i) - _as_fraction(sa_j)
    db = _as_fraction(sb_i) - _as_fraction(sb_j)
    prod = da * db
    if prod > 0:
        return 1
    if prod < 0:
        return -1
    return 0


def _pair_count(n: int) -> int:
    return n * (n - 1) // 2


def kendall_t(va: DensityVector, vb: DensityVector) -> tuple[int, Fraction]:
    """Concordance sum S over all pairs and the statistic t = S / C(n,2).

    The O(n^2) pair loop is deliberate: sample sizes are ~900 by design, and
    exact tie handling falls out of the integer comparisons for free.
    """
    n = len(va)
    if n != len(vb):
        raise ValueError(f"density vectors differ in length: {n} vs {len(vb)}")
    if n < 2:
        raise ValueError("need at least two reference nodes")
    s = int(_kendall_s_kernel(va.num, va.den, vb.num, vb.den))
    return s, Fraction(s, _pair_count(n))


def tie_profile(v: DensityVector) -> tuple[int, ...]:
    """Sizes of the maximal equal-value groups, largest first.

    Equality is exact rational equality (1/2 ties with 2/4); singleton
    groups are included — they contribute nothing to the tie correction.
    """
    if len(v) == 0:
        return ()
    g = np.gcd(v.num, v.den)
    num = v.num // g
    den = v.den // g
    order = np.lexsort((num, den))
    num, den = num[order], den[order]
    change = np.flatnonzero((num[1:] != num[:-1]) | (den[1:] != den[:-1]))
    bounds = np.concatenate(([0], change + 1, [num.size]))
    sizes = np.diff(bounds)
    return tuple(sorted((int(s) for s in sizes), reverse=True))


@dataclass(frozen=True)
class TieProfile:
    """Tie-group sizes of both density vectors (each partitions n)."""

    tie_sizes_a: tuple[int, ...]
    tie_sizes_b: tuple[int, ...]

    @classmethod
    def of(cls, va: DensityVector, vb: DensityVector) -> "TieProfile":
        return cls(tie_profile(va), tie_profile(vb))

    def validate(self, n: int) -> None:
        if sum(self.tie_sizes_a) != n or sum(self.tie_sizes_b) != n:
            raise ValueError("tie sizes must partition n on both sides")


def null_variance(n: int, ties: TieProfile) -> tuple[Fraction, Fraction]:
    """Exact null variance of S (``sigma_c_sq``) and of t (``sigma_sq``).

    With all tie sizes 1 this reduces to the no-tie form: sigma_sq equals
    2(2n+5)/(9n(n-1)) exactly.  A single tie spanning all of n on either
    side leaves S identically zero; that degenerate case is an error.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    ties.validate(n)
    u = ties.tie_sizes_a
    v = ties.tie_sizes_b
    if max(u) == n or max(v) == n:
        raise DegenerateTieError(
            "all densities of one event are identical: null variance is zero"
        )

    term1 = Fraction(
        n * (n - 1) * (2 * n + 5)
        - sum(x * (x - 1) * (2 * x + 5) for x in u)
        - sum(x * (x - 1) * (2 * x + 5) for x in v),
        18,
    )
    ua = sum(x * (x - 1) * (x - 2) for x in u)
    vb = sum(x * (x - 1) * (x - 2) for x in v)
    term2 = Fraction(ua * vb, 9 * n * (n - 1) * (n - 2)) if n > 2 else Fraction(0)
    ub = sum(x * (x - 1) for x in u)
    vv = sum(x * (x - 1) for x in v)
    term3 = Fraction(ub * vv, 2 * n * (n - 1))

    sigma_c_sq = term1 + term2 + term3
    sigma_sq = sigma_c_sq / _pair_count(n) ** 2
    return sigma_c_sq, sigma_sq


def normal_sf(z: float) -> float:
    """Standard normal survival function."""
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def z_and_p(t, sigma: float, tail: str = "one") -> tuple[float, float]:
    """z-score t/sigma and its normal-approximation p-value.

    One-tailed p is the tail away from zero in the direction of t (upper
    for positive, lower for negative); two-tailed doubles it.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if tail not in ("one", "two"):
        raise ValueError(f"tail must be 'one' or 'two', got {tail!r}")
    z = float(t) / float(sigma)
    p = normal_sf(abs(z))
    if tail == "two":
        p = min(1.0, 2.0 * p)
    return z, p


def weighted_t(weights, probabilities, va: DensityVector, vb: DensityVector):
    """Weight-corrected concordance ratio for non-uniformly sampled nodes.

    Each distinct node i carries its draw multiplicity w_i and selection
    probability p_i; pair (i, j) contributes concordance times
    (w_i w_j)/(p_i p_j), normalized by the same pair weights.  With unit
    weights and equal probabilities the pair weights cancel and the result
    is exactly kendall_t's statistic (returned as an exact Fraction);
    otherwise the ratio is accumulated in float64.
    """
    weights = np.ascontiguousarray(weights, dtype=np.int64)
    probabilities = np.asarray(probabilities, dtype=np.float64)
    n = len(va)
    if not (weights.size == probabilities.size == n == len(vb)):
        raise ValueError("weights, probabilities and density vectors must align")
    if n < 2:
        raise ValueError("need at least two reference nodes")
    if weights.min() < 1:
        raise ValueError("weights must be positive integers")
    if probabilities.min() <= 0 or probabilities.max() > 1:
        raise ValueError("probabilities must lie in (0, 1]")

    if weights.max() == weights.min() and probabilities.max() == probabilities.min():
        s = int(_kendall_s_kernel(va.num, va.den, vb.num, vb.den))
        return Fraction(s, _pair_count(n))

    u = weights / probabilities
    wnum, wden = _weighted_sums_kernel(va.num, va.den, vb.num, vb.den, u)
    return wnum / wden


class TauBResult(NamedTuple):
    """Transaction-correlation comparator output."""

    tau_b: float
    z: float
    p_one_tailed: float
    s: int
    sigma_c_sq: Fraction


def tau_b_transaction(a_indicator, b_indicator) -> TauBResult:
    """Kendall's tau-b of two binary indicators over all graph nodes.

    Treats nodes as isolated transactions (no structure): tau_b from the
    2x2 contingency closed form, significance from the tie-adjusted null
    variance of the concordance numerator applied to the two indicators'
    tie profiles.
    """
    a = np.asarray(a_indicator, dtype=np.int64)
    b = np.asarray(b_indicator, dtype=np.int64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("indicators must be equal-length 1-D arrays")
    n = a.size
    if n < 2:
        raise ValueError("need at least two nodes")
    if not (np.isin(a, (0, 1)).all() and np.isin(b, (0, 1)).all()):
        raise ValueError("indicators must be binary")

    counts = np.bincount(2 * a + b, minlength=4)
    n00, n01, n10, n11 = (int(c) for c in counts)
    a1, a0 = n11 + n10, n01 + n00
    b1, b0 = n11 + n01, n10 + n00
    if a1 == 0 or a0 == 0 or b1 == 0 or b0 == 0:
        raise DegenerateTieError("constant indicator: tau_b undefined")

    s = n11 * n00 - n10 * n01
    n0 = _pair_count(n)
    na = _pair_count(a1) + _pair_count(a0)
    nb = _pair_count(b1) + _pair_count(b0)
    tau_b = s / math.sqrt(float(n0 - na) * float(n0 - nb))

    ties = TieProfile((a1, a0), (b1, b0))
    sigma_c_sq, _ = null_variance(n, ties)
    z = float(Fraction(s) / _sqrt_fraction(sigma_c_sq))
    return TauBResult(tau_b, z, normal_sf(abs(z)), s, sigma_c_sq)


def _sqrt_fraction(f: Fraction) -> float:
    # two float square roots keep precision for very large numerators
    return math.sqrt(f.numerator) / math.sqrt(f.denominator)
