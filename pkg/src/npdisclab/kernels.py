"""Kernel families and isomorphism diagnostics for embedded-disc algebras.

A kernel handle pairs a weight sequence (a_n) with its embedding moduli
(c_n) so that K(z, w) = sum a_n (z conj(w))^n = 1/(1 - sum c_n (z conj(w))^n).
On top of the handle sit the classification quantities: the renewal mean
mu = sum n c_n, the tail limit of a_n (which equals 1/mu by the
Erdos-Feller-Pollard theorem), the quotient-boundedness witness
sup a_n/a_{n-1}, the strict-cyclicity supremum, the complete-Pick flag and
the compact-image flag.  All finite-truncation verdicts are heuristics and
are labelled as such.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, fields

import numpy as np
from scipy.signal import fftconvolve

from .series import (
    CoefficientSequence,
    DEFAULT_TERMS,
    InvalidSequenceError,
    KernelWeights,
    is_complete_np,
    moduli_from_weights,
    weights_from_moduli,
)

#: relative increase of a partial sum between N/2 and N below which the sum
#: is treated as converged (doubling test)
DOUBLING_TOL = 0.01

#: relative drift of the weight ratio over the last quarter below which two
#: sequences are reported comparable
COMPARABLE_DRIFT = 0.05


class KernelDomainError(ValueError):
    """Evaluation requested outside the kernel's admissible region."""


def _raw_weights(cv: np.ndarray) -> np.ndarray:
    # recursion without embedding validation; used for handles whose moduli
    # carry negative entries (non-complete-Pick families)
    n = cv.size
    a = np.empty(n + 1)
    a[0] = 1.0
    for m in range(1, n + 1):
        a[m] = np.dot(cv[:m], a[m - 1 :: -1])
    return a


class KernelHandle:
    """Consistent (weights, moduli) pair with a family tag.

    Construct via the family helpers :func:`hardy`, :func:`hs`,
    :func:`geometric`, :func:`from_moduli`, :func:`from_weights` or
    :func:`parse_family`.
    """

    def __init__(self, weights: KernelWeights, moduli: CoefficientSequence,
                 family_tag: str, *, s: float | None = None, q: float | None = None):
        self.weights = weights
        self.moduli = moduli
        self.family_tag = family_tag
        self._s = s
        self._q = q
        n = min(weights.n, moduli.n)
        check = _raw_weights(moduli.values[:n])
        err = np.abs(check - weights.values[: n + 1])
        tol = 1e-10 * np.maximum(np.abs(weights.values[: n + 1]), 1.0)
        if np.any(err > tol):
            raise InvalidSequenceError(
                f"weights and moduli are inconsistent (max defect {err.max():.3g})"
            )

    @property
    def n(self) -> int:
        return self.weights.n

    # -- regime ------------------------------------------------------------

    def is_compact_regime(self) -> bool:
        """Doubling test for convergence of sum a_n (finite iff sum c_n < 1)."""
        av = self.weights.values
        full = float(av.sum())
        half = float(av[: av.size // 2].sum())
        return (full - half) <= DOUBLING_TOL * full

    def moduli_mass(self) -> float:
        """Truncated sum of the moduli (r^2 in the compact regime)."""
        return float(self.moduli.values.sum())

    # -- pointwise evaluation ----------------------------------------------

    def generating_value(self, t: complex) -> complex:
        """g(t) = sum c_n t^n, by family closed form where one exists."""
        if self.family_tag == "hardy":
            return complex(t)
        if self._q is not None:
            return self._q * t / (1.0 - self._q * t)
        if self._s is not None:
            if t == 1.0 and self._s >= -1.0:
                return 1.0
            return 1.0 - 1.0 / _hs_generating(self._s, t)
        cv = self.moduli.values
        return complex(np.dot(cv, np.asarray(t, dtype=complex) ** np.arange(1, cv.size + 1)))

    def kernel_from_defect(self, omt: float) -> float | None:
        """K expressed through 1 - t for families with a closed form.

        Near the boundary 1 - t is the well-conditioned datum; returning
        None means the caller must fall back to the truncated series.
        """
        if self.family_tag == "hardy":
            return 1.0 / omt
        if self._q is not None:
            q = self._q
            return (1.0 - q + q * omt) / (1.0 - 2.0 * q + 2.0 * q * omt)
        return None

    def kernel_value(self, t: complex) -> complex:
        av = self.weights.values
        return complex(np.dot(av, np.asarray(t, dtype=complex) ** np.arange(av.size)))


def _hs_generating(s: float, t: complex) -> complex:
    """A_s(t) = sum (n+1)^s t^n by adaptive partial sums, |t| <= 1.

    For |t| = 1 the sum is only taken when s < -1 (absolutely summable);
    the truncation tail is below 1e-16 relative once terms fall under the
    stopping threshold.
    """
    t = complex(t)
    if abs(t) > 1.0 + 1e-12:
        raise KernelDomainError("generating function evaluated outside the closed disc")
    if abs(t) > 1.0 - 1e-12 and s >= -1.0 and t == 1.0:
        return math.inf
    total = 0.0 + 0.0j
    chunk = 65536
    n0 = 0
    while True:
        n = np.arange(n0, n0 + chunk)
        terms = (n + 1.0) ** s * t**n
        total += terms.sum()
        if abs(terms[-1]) * max(chunk, 1) < 1e-17 * max(abs(total), 1e-300):
            break
        n0 += chunk
        if n0 > 5e7:
            break
    return total


# -- family constructors ----------------------------------------------------


def hardy(n_terms: int = DEFAULT_TERMS) -> KernelHandle:
    """Szego kernel: c = (1, 0, 0, ...), a_n = 1."""
    c = np.zeros(n_terms)
    c[0] = 1.0
    return KernelHandle(
        KernelWeights(np.ones(n_terms + 1)),
        CoefficientSequence(c),
        "hardy",
    )


def hs(s: float, n_terms: int = DEFAULT_TERMS) -> KernelHandle:
    """Power-weight family a_n = (n+1)^s; moduli derived by inversion."""
    a = KernelWeights((np.arange(n_terms + 1) + 1.0) ** float(s))
    c = moduli_from_weights(a, n_terms)
    return KernelHandle(a, c, f"hs:{s:g}", s=float(s))


def geometric(q: float, n_terms: int = DEFAULT_TERMS) -> KernelHandle:
    """Geometric moduli c_n = q^n; requires 0 < q <= 1/2 so mass stays <= 1."""
    if not 0.0 < q <= 0.5:
        raise ValueError("geometric ratio must lie in (0, 1/2]")
    c = CoefficientSequence(q ** np.arange(1, n_terms + 1))
    a = weights_from_moduli(c, n_terms)
    return KernelHandle(a, c, f"geom:{q:g}", q=float(q))


def from_moduli(c: CoefficientSequence, n_terms: int | None = None,
                family_tag: str = "custom") -> KernelHandle:
    n = n_terms if n_terms is not None else max(c.n, DEFAULT_TERMS)
    cp = CoefficientSequence(c.padded(n), validate=False)
    return KernelHandle(weights_from_moduli(c, n), cp, family_tag)


def from_weights(a: KernelWeights, family_tag: str = "custom") -> KernelHandle:
    return KernelHandle(a, moduli_from_weights(a), family_tag)


def parse_family(tag: str, n_terms: int = DEFAULT_TERMS) -> KernelHandle:
    """Build a handle from a CLI-style tag.

    Accepted forms: ``hardy``, ``hs:<s>``, ``geom:<q>``,
    ``custom:<path-to-csv>`` where the CSV holds ``n,value`` rows (first
    index 0 means weights, first index 1 means moduli).
    """
    if tag == "hardy":
        return hardy(n_terms)
    if tag.startswith("hs:"):
        return hs(float(tag[3:]), n_terms)
    if tag.startswith("geom:"):
        return geometric(float(tag[5:]), n_terms)
    if tag.startswith("custom:"):
        return _load_custom(tag[7:], n_terms)
    raise ValueError(f"unknown kernel family tag {tag!r}")


def _load_custom(path: str, n_terms: int) -> KernelHandle:
    indices, values = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#") or row[0] == "n":
                continue
            indices.append(int(row[0]))
            values.append(float(row[1]))
    if not indices:
        raise ValueError(f"no sequence rows found in {path}")
    if indices[0] == 0:
        return from_weights(KernelWeights(values))
    return from_moduli(CoefficientSequence(values), n_terms)


# -- operations --------------------------------------------------------------


def kernel_eval(k: KernelHandle, z: complex, w: complex) -> complex:
    """Truncated K(z, w) = sum a_n (z conj(w))^n.

    Boundary arguments are admitted only in the compact regime, where the
    weights are summable and K extends continuously to the closed disc.
    """
    z, w = complex(z), complex(w)
    limit = 1.0 if k.is_compact_regime() else 0.999
    if abs(z) > limit + 1e-12 or abs(w) > limit + 1e-12:
        raise KernelDomainError(
            f"|z|, |w| must be <= {limit} for family {k.family_tag!r}"
        )
    return k.kernel_value(z * np.conj(w))


def monomial_multiplier_norm(k: KernelHandle, n: int) -> float:
    """Multiplier (= Hilbert-space) norm of z^n, which is 1/sqrt(a_n)."""
    if not 0 <= n <= k.n:
        raise ValueError(f"monomial order {n} outside truncation {k.n}")
    return 1.0 / math.sqrt(k.weights.values[n])


@dataclass(frozen=True)
class ComparabilityReport:
    """Observed ratio range of two weight sequences plus a trend verdict.

    Finite data cannot decide an asymptotic property; ``verdict`` is a
    heuristic reading of the tail drift and is labelled as such.
    """

    comparable: bool
    ratio_min: float
    ratio_max: float
    tail_drift: float
    verdict: str  # "comparable" | "diverging" | "inconclusive"


def are_comparable(a: KernelWeights, a2: KernelWeights,
                   n_terms: int | None = None) -> ComparabilityReport:
    n = min(a.n, a2.n) if n_terms is None else n_terms
    r = a.padded(n) / a2.padded(n)
    tail = r[-max(n // 4, 2):]
    drift = float((tail.max() - tail.min()) / tail.max())
    monotone_escape = bool(
        (np.all(np.diff(tail) >= 0) and tail[-1] > 2.0 * r[: n // 2].min())
        or (np.all(np.diff(tail) <= 0) and tail[-1] < 0.5 * r[: n // 2].max())
    )
    if drift < COMPARABLE_DRIFT:
        verdict = "comparable"
    elif monotone_escape or drift > 0.5:
        verdict = "diverging"
    else:
        verdict = "inconclusive"
    return ComparabilityReport(
        comparable=verdict == "comparable",
        ratio_min=float(r.min()),
        ratio_max=float(r.max()),
        tail_drift=drift,
        verdict=verdict,
    )


@dataclass(frozen=True)
class ClassificationReport:
    """Classification quantities for one kernel handle at truncation n."""

    family: str
    n: int
    mu: float                      # sum n c_n, inf when the doubling test fails
    efp_limit_estimate: float      # mean of the last n/8 weights
    efp_agreement: float           # |estimate - 1/mu|, nan when mu = inf
    iso_to_hinf: bool              # mu finite <=> weights bounded below
    ratio_sup: float               # sup a_n / a_{n-1}
    ratio_bounded: bool            # heuristic: tail sup not escaping
    strictly_cyclic_sup: float     # sup_n sum_k a_k a_{n-k} / a_n, inf if escaping
    cnp: bool                      # all inverted moduli >= -1e-10
    compact_regime: bool           # sum c_n < 1 (via convergence of sum a_n)
    moduli_mass: float             # truncated sum of c_n

    CSV_COLUMNS = (
        "family", "n", "mu", "efp_limit_estimate", "efp_agreement",
        "iso_to_hinf", "ratio_sup", "ratio_bounded", "strictly_cyclic_sup",
        "cnp", "compact_regime", "moduli_mass",
    )

    def as_row(self) -> list:
        return [getattr(self, f.name) for f in fields(self)]


def classify(k: KernelHandle, n_terms: int | None = None) -> ClassificationReport:
    n = k.n if n_terms is None else min(n_terms, k.n)
    av = k.weights.values[: n + 1]
    cv = k.moduli.values[:n]

    # mu = sum n c_n with the partial-sum doubling test for divergence
    weights_ncn = cv * np.arange(1, n + 1)
    mu_full = float(weights_ncn.sum())
    mu_half = float(weights_ncn[: n // 2].sum())
    mu_converged = (mu_full - mu_half) <= DOUBLING_TOL * max(mu_full, 1e-300)
    mu = mu_full if mu_converged else math.inf

    tail = av[-max(n // 8, 1):]
    efp = float(tail.mean())
    agreement = abs(efp - 1.0 / mu) if math.isfinite(mu) else math.nan

    ratios = av[1:] / av[:-1]
    ratio_sup = float(ratios.max())
    sup_head = float(ratios[: max(n // 2, 1)].max())
    sup_tail = float(ratios[n // 2:].max()) if n >= 2 else ratio_sup
    ratio_bounded = sup_tail <= sup_head * (1.0 + COMPARABLE_DRIFT) or sup_tail <= 1.0 + 1e-12

    # strict-cyclicity quotients via one self-convolution
    self_conv = fftconvolve(av, av)[: n + 1]
    quot = self_conv / av
    sc_full = float(quot.max())
    sc_half = float(quot[: n // 2 + 1].max())
    sc_converged = (sc_full - sc_half) <= DOUBLING_TOL * sc_full
    strictly_cyclic = sc_full if sc_converged else math.inf

    compact = k.is_compact_regime()
    return ClassificationReport(
        family=k.family_tag,
        n=n,
        mu=mu,
        efp_limit_estimate=efp,
        efp_agreement=agreement,
        iso_to_hinf=bool(math.isfinite(mu)),
        ratio_sup=ratio_sup,
        ratio_bounded=bool(ratio_bounded),
        strictly_cyclic_sup=strictly_cyclic,
        cnp=is_complete_np(k.weights),
        compact_regime=compact,
        moduli_mass=k.moduli_mass(),
    )


def continuity_bound(k: KernelHandle, h_norm: float) -> float:
    """Uniform coefficient-sum bound h_norm / sqrt(1 - r^2), compact regime only.

    Every function of the given norm on a compact-image disc has absolutely
    summable Taylor coefficients bounded by this value.
    """
    if not k.is_compact_regime():
        raise KernelDomainError(
            "coefficient-sum bound is +inf outside the compact regime"
        )
    r_sq = k.moduli_mass()
    return float(h_norm) / math.sqrt(1.0 - r_sq)
