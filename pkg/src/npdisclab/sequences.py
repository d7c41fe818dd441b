"""Diagnostics for sequences in the unit disc.

Blaschke mass, pairwise separation, strong separation (the Blaschke-product
quantities delta_n), Carleson-box ratios and the per-point interpolation
budgets from Garnett's theorem, together with generators for the named
example sequences.  Points carry their boundary gaps 1 - |v| exactly (and
log-gaps when the gap itself underflows), because the interesting sequences
hug the boundary far beyond double-precision resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import pseudo_dist_scalar, radial_log_gap_dist

#: minimum pairwise distance for the separation verdict
SEPARATION_THRESHOLD = 1e-3

#: log delta below this value is flagged as underflowed
LOG_FLOOR = -700.0

NAMED_TAGS = ("vn_quadratic", "wn_gaussian", "dyadic_separated", "xn_alternating")


class DiscSequence:
    """Finite list of distinct points in the open disc.

    ``gaps`` holds 1 - |v_n| exactly where the generator knows it;
    ``log_gaps`` extends this below the underflow threshold.  ``angles``
    holds exact arguments for the membership tests of Carleson boxes.
    """

    def __init__(self, points, label: str = "custom", *,
                 gaps=None, log_gaps=None, angles=None):
        pts = np.atleast_1d(np.asarray(points, dtype=complex))
        if pts.size == 0:
            raise ValueError("sequence must contain at least one point")
        self.points = pts
        self.label = label
        if gaps is None:
            gaps = 1.0 - np.abs(pts)
        self.gaps = np.asarray(gaps, dtype=float)
        if np.any(self.gaps < 0.0) or (log_gaps is None and np.any(self.gaps == 0.0)):
            raise ValueError("all points must lie in the open disc")
        self.log_gaps = (
            np.asarray(log_gaps, dtype=float)
            if log_gaps is not None
            else np.log(self.gaps)
        )
        if angles is None:
            angles = np.mod(np.angle(pts), 2.0 * math.pi)
        self.angles = np.asarray(angles, dtype=float)

    @property
    def n(self) -> int:
        return self.points.size

    @property
    def is_radial_positive(self) -> bool:
        return bool(np.all(self.points.imag == 0.0) and np.all(self.points.real >= 0.0)
                    and np.all(self.angles == 0.0))

    def log_pair_dist(self, i: int, j: int) -> float:
        """log d(v_i, v_j), accurate arbitrarily close to the boundary."""
        if self.is_radial_positive:
            d = radial_log_gap_dist(self.log_gaps[i], self.log_gaps[j])
            return math.log(d) if d > 0.0 else -math.inf
        d = pseudo_dist_scalar(self.points[i], self.points[j])
        return math.log(d) if d > 0.0 else -math.inf

    def pair_dist(self, i: int, j: int) -> float:
        if self.is_radial_positive:
            return radial_log_gap_dist(self.log_gaps[i], self.log_gaps[j])
        return pseudo_dist_scalar(self.points[i], self.points[j])

    def __repr__(self) -> str:
        return f"DiscSequence({self.label!r}, n={self.n})"


def named_sequence(tag: str, n: int) -> DiscSequence:
    """Generators for the example sequences.

    vn_quadratic: v_n = 1 - 1/n^2 for n >= 2 (n points).
    wn_gaussian:  w_n = 1 - e^{-n^2} for n >= 1 (n points).
    dyadic_separated: generations 1..n, generation m holding
        floor(2^{m/2}) points (1 - 2^-m) e^{ik 2^-m}.
    xn_alternating: x_n = (-1)^n (1 - 1/n^2) for n >= 2.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if tag == "vn_quadratic":
        idx = np.arange(2, n + 2, dtype=float)
        gaps = 1.0 / idx**2
        return DiscSequence(1.0 - gaps, tag, gaps=gaps,
                            angles=np.zeros(n))
    if tag == "wn_gaussian":
        idx = np.arange(1, n + 1, dtype=float)
        log_gaps = -(idx**2)
        gaps = np.exp(log_gaps)  # underflows to 0 beyond n = 27; log kept
        return DiscSequence(1.0 - gaps, tag, gaps=gaps, log_gaps=log_gaps,
                            angles=np.zeros(n))
    if tag == "xn_alternating":
        idx = np.arange(2, n + 2, dtype=float)
        gaps = 1.0 / idx**2
        signs = np.where(np.arange(2, n + 2) % 2 == 0, 1.0, -1.0)
        pts = signs * (1.0 - gaps)
        angles = np.where(signs > 0, 0.0, math.pi)
        return DiscSequence(pts, tag, gaps=gaps, angles=angles)
    if tag == "dyadic_separated":
        pts, gaps, angles = [], [], []
        for m in range(1, n + 1):
            radius_gap = 2.0**-m
            count = int(math.floor(2.0 ** (m / 2.0)))
            for k in range(count):
                theta = k * radius_gap  # k 2^-m, exact in binary
                pts.append((1.0 - radius_gap) * np.exp(1j * theta))
                gaps.append(radius_gap)
                angles.append(theta)
        return DiscSequence(pts, tag, gaps=gaps, angles=angles)
    raise ValueError(f"unknown sequence tag {tag!r}; known: {NAMED_TAGS}")


@dataclass(frozen=True)
class BlaschkeSum:
    """Partial Blaschke mass with a tail-doubling convergence verdict."""

    total: float
    converged: bool


def blaschke_sum(s: DiscSequence) -> BlaschkeSum:
    """sum (1 - |v_n|) over the truncated list."""
    total = float(s.gaps.sum())
    half = float(s.gaps[: s.n // 2].sum())
    converged = (total - half) <= 0.01 * total if total > 0 else True
    return BlaschkeSum(total, bool(converged))


@dataclass(frozen=True)
class SeparationDelta:
    """Strong-separation product for one point, kept in log space."""

    value: float
    log_value: float
    underflowed: bool


def separation_delta(s: DiscSequence, n: int) -> SeparationDelta:
    """delta_n = prod_{i != n} |b_{v_i}(v_n)|, the Blaschke-factor product.

    Each factor is the pseudohyperbolic distance d(v_i, v_n); the product is
    accumulated in log space and floored (with a flag) at log = -700 where
    the plain value would underflow.  The truncated product over-estimates
    the full one; callers see the truncation level through ``s.n``.
    """
    if not 0 <= n < s.n:
        raise IndexError(f"index {n} outside sequence of length {s.n}")
    log_total = 0.0
    for i in range(s.n):
        if i == n:
            continue
        log_total += s.log_pair_dist(i, n)
    underflowed = log_total < LOG_FLOOR or math.isinf(log_total)
    value = math.exp(log_total) if log_total > LOG_FLOOR else 0.0
    return SeparationDelta(value, log_total, underflowed)


def pairwise_distances(s: DiscSequence) -> np.ndarray:
    """Full matrix of pseudohyperbolic distances (diagonal zero)."""
    if s.is_radial_positive:
        lg = s.log_gaps
        hi = np.maximum.outer(lg, lg)
        lo = np.minimum.outer(lg, lg)
        delta = lo - hi
        ratio = np.exp(delta)
        large = np.where(hi > LOG_FLOOR, np.exp(np.maximum(hi, LOG_FLOOR)), 0.0)
        return -np.expm1(delta) / (1.0 + ratio - large * ratio)
    z = s.points
    num = np.abs(np.subtract.outer(z, z))
    den = np.abs(1.0 - np.outer(z, np.conj(z)))
    with np.errstate(invalid="ignore"):
        d = np.where(num == 0.0, 0.0, num / den)
    return d


def is_separated(s: DiscSequence) -> tuple[bool, float]:
    """Minimum pairwise distance and its verdict against the threshold."""
    if s.n < 2:
        raise ValueError("separation needs at least two points")
    d = pairwise_distances(s)
    np.fill_diagonal(d, np.inf)
    inf_gap = float(d.min())
    return inf_gap > SEPARATION_THRESHOLD, inf_gap


def carleson_ratio(s: DiscSequence, p: int) -> float:
    """Box mass ratio 2^p sum_{v in S_p} (1 - |v|).

    S_p is the Carleson box over the arc [0, 2^-p): radius at least
    1 - 2^-p, argument in [0, 2^-p).  Membership is decided by exact
    comparisons on the stored gaps and angles; only this dyadic-aligned box
    family is implemented.
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    side = 2.0**-p
    mask = (s.gaps <= side) & (s.angles >= 0.0) & (s.angles < side)
    return float(2.0**p * s.gaps[mask].sum())


@dataclass(frozen=True)
class GarnettBudget:
    """Interpolation budget delta (1 + log(1/delta))^-2 for one point."""

    budget: float
    delta: SeparationDelta


def garnett_targets(s: DiscSequence) -> list[GarnettBudget]:
    """Per-point maximal target magnitudes guaranteed interpolable.

    Formed from the strong-separation products; points whose truncated
    delta underflowed are flagged through the attached delta record.
    """
    out = []
    for n in range(s.n):
        d = separation_delta(s, n)
        if d.log_value > LOG_FLOOR:
            budget = math.exp(d.log_value) * (1.0 - d.log_value) ** -2.0
        else:
            budget = 0.0
        out.append(GarnettBudget(budget, d))
    return out
