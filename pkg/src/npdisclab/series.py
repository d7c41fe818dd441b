"""Truncated power-series arithmetic for embedding moduli and kernel weights.

A diagonal disc embedding is described by squared amplitudes c_n >= 0 with
c_1 > 0 and sum(c_n) <= 1.  Its kernel weights a_n are the Taylor
coefficients of 1/(1 - g) where g(z) = sum_{n>=1} c_n z^n, and satisfy the
renewal-type recursion

    a_0 = 1,    a_n = sum_{k=1}^{n} c_k a_{n-k}.

Both conversion directions are implemented.  ``weights_by_reciprocal`` is a
second, independent route (Newton iteration for the series reciprocal) kept
deliberately separate from the recursion so the two can cross-check each
other.
"""

from __future__ import annotations

import numpy as np
from scipy.signal import fftconvolve

#: relative tolerance for round-trip identities
REL_TOL = 1e-12
#: absolute floor below which entries are compared additively
ABS_FLOOR = 1e-14

#: default truncation length when the caller does not pass one
DEFAULT_TERMS = 256

# above this length the recursion accumulates in extended precision
_LONG_ACCUM_N = 1000
# above this length inversion switches to the FFT/Newton reciprocal
_FFT_N = 8192


class InvalidSequenceError(ValueError):
    """A moduli or weight sequence violates its constraints."""


class CoefficientSequence:
    """Embedding moduli c_1..c_N, stored 0-based (``values[k]`` is c_{k+1}).

    A valid embedding requires all entries nonnegative, c_1 > 0 and
    sum(c_n) <= 1.  Construction with ``validate=False`` admits arbitrary
    real entries; this is how inversion output carrying negative entries
    (the complete-Pick failure signal) is represented.
    """

    __slots__ = ("values",)

    def __init__(self, values, *, validate: bool = True):
        v = np.atleast_1d(np.asarray(values, dtype=float)).copy()
        if v.ndim != 1 or v.size == 0:
            raise InvalidSequenceError("moduli must form a nonempty 1-d sequence")
        if validate:
            if v[0] <= 0.0:
                raise InvalidSequenceError("c_1 must be strictly positive")
            if np.any(v < 0.0):
                raise InvalidSequenceError("moduli must be nonnegative")
            if float(v.sum()) > 1.0 + 1e-12:
                raise InvalidSequenceError(
                    f"moduli must sum to at most 1, got {v.sum():.17g}"
                )
        self.values = v

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def is_valid_embedding(self) -> bool:
        v = self.values
        return bool(v[0] > 0.0 and np.all(v >= 0.0) and v.sum() <= 1.0 + 1e-12)

    def padded(self, n_terms: int) -> np.ndarray:
        """c_1..c_{n_terms} as an array, zero-padded or truncated."""
        out = np.zeros(n_terms)
        m = min(self.n, n_terms)
        out[:m] = self.values[:m]
        return out

    def __repr__(self) -> str:
        return f"CoefficientSequence(n={self.n}, head={self.values[:3]})"


class KernelWeights:
    """Kernel Taylor weights a_0..a_N with a_0 = 1 and a_n > 0.

    ``values[k]`` is a_k.  Weights derived from a valid embedding also
    satisfy a_n <= 1 and supermultiplicativity a_k * a_n <= a_{n+k}; those
    are consequences, not construction requirements (families such as
    a_n = (n+1)^s with s > 0 are legitimate inputs to the inversion).
    """

    __slots__ = ("values",)

    def __init__(self, values):
        v = np.atleast_1d(np.asarray(values, dtype=float)).copy()
        if v.ndim != 1 or v.size < 2:
            raise InvalidSequenceError("weights must contain a_0 and at least a_1")
        if v[0] != 1.0:
            raise InvalidSequenceError(f"a_0 must equal 1, got {v[0]!r}")
        if np.any(v <= 0.0):
            raise InvalidSequenceError("all weights must be strictly positive")
        self.values = v

    @property
    def n(self) -> int:
        """Truncation order N (the last available index)."""
        return self.values.size - 1

    def padded(self, n_terms: int) -> np.ndarray:
        if self.n < n_terms:
            raise InvalidSequenceError(
                f"weights known to order {self.n}, need {n_terms}"
            )
        return self.values[: n_terms + 1]

    def __repr__(self) -> str:
        return f"KernelWeights(n={self.n}, head={self.values[:3]})"


def _resolve_terms(seq_len: int, n_terms: int | None, *, extendable: bool = True) -> int:
    """Pick the working truncation order.

    Moduli are implicitly zero beyond their stored length, so they may be
    extended up to the default order.  Weights carry no such convention and
    default to exactly what is stored.
    """
    if n_terms is None:
        return max(seq_len, DEFAULT_TERMS) if extendable else seq_len
    if n_terms < 1:
        raise ValueError("n_terms must be at least 1")
    return n_terms


def weights_from_moduli(
    c: CoefficientSequence, n_terms: int | None = None
) -> KernelWeights:
    """Run the convolution recursion a_n = sum_{k<=n} c_k a_{n-k}.

    Rejects moduli that are not a valid embedding.  Beyond
    ``_LONG_ACCUM_N`` terms the accumulation runs in extended precision to
    keep long convolutions from drifting.
    """
    if not isinstance(c, CoefficientSequence):
        c = CoefficientSequence(c)
    if not c.is_valid_embedding:
        raise InvalidSequenceError("moduli do not describe a valid embedding")
    n = _resolve_terms(c.n, n_terms)
    cv = c.padded(n)
    dtype = np.longdouble if n > _LONG_ACCUM_N else np.float64
    cw = cv.astype(dtype)
    a = np.empty(n + 1, dtype=dtype)
    a[0] = 1.0
    for m in range(1, n + 1):
        a[m] = np.dot(cw[:m], a[m - 1 :: -1])
    return KernelWeights(np.asarray(a, dtype=float))


def moduli_from_weights(
    a: KernelWeights, n_terms: int | None = None
) -> CoefficientSequence:
    """Invert the recursion: Taylor coefficients of 1 - 1/(sum a_n z^n).

    Negative output entries are returned, not rejected -- their sign is the
    content consumed by :func:`is_complete_np`.
    """
    if not isinstance(a, KernelWeights):
        a = KernelWeights(a)
    n = _resolve_terms(a.n, n_terms, extendable=False)
    av = a.padded(n)
    if n > _FFT_N:
        recip = series_reciprocal(av, n)
        return CoefficientSequence(-recip[1:], validate=False)
    dtype = np.longdouble if n > _LONG_ACCUM_N else np.float64
    aw = av.astype(dtype)
    cv = np.empty(n, dtype=dtype)
    for m in range(1, n + 1):
        cv[m - 1] = aw[m] - np.dot(cv[: m - 1], aw[m - 1 : 0 : -1])
    return CoefficientSequence(np.asarray(cv, dtype=float), validate=False)


def series_reciprocal(d: np.ndarray, n_terms: int) -> np.ndarray:
    """Coefficients of 1/D(z) through order ``n_terms``, D(0) != 0.

    Newton doubling r <- r(2 - D r): a computation path independent of the
    linear recursion, used as its cross-check.  Convolutions switch to FFT
    once they are long enough for it to pay off.
    """
    d = np.asarray(d, dtype=float)
    if d[0] == 0.0:
        raise InvalidSequenceError("series with zero constant term has no reciprocal")

    def conv(x, y, length):
        if length > 512:
            return fftconvolve(x, y)[:length]
        return np.convolve(x, y)[:length]

    r = np.array([1.0 / d[0]])
    size = n_terms + 1
    while r.size < size:
        m = min(2 * r.size, size)
        dr = conv(d[:m], r, m)
        grown = np.zeros(m)
        grown[: r.size] = 2.0 * r
        r = grown - conv(r, dr, m)
    # one refinement pass at full length tightens the last doubling step
    dr = conv(d[:size], r, size)
    r = 2.0 * r - conv(r, dr, size)
    return r


def weights_by_reciprocal(c: CoefficientSequence, n_terms: int | None = None) -> np.ndarray:
    """Weights via direct reciprocal expansion of 1 - g(z).

    Independent of :func:`weights_from_moduli`; the two must agree to
    ``REL_TOL`` on valid input.
    """
    if not isinstance(c, CoefficientSequence):
        c = CoefficientSequence(c)
    n = _resolve_terms(c.n, n_terms)
    d = np.concatenate(([1.0], -c.padded(n)))
    return series_reciprocal(d, n)


def is_complete_np(a: KernelWeights, tol: float = 1e-10) -> bool:
    """Whether every inverted modulus is >= -tol (complete-Pick test)."""
    c = moduli_from_weights(a)
    return bool(np.all(c.values >= -tol))


#: largest |z| accepted by the truncated generating-function evaluators
EVAL_RADIUS = 0.999


def evaluate_generating(seq, z: complex, n_terms: int | None = None) -> complex:
    """Evaluate the truncated generating function at z, |z| <= 0.999.

    For moduli the value is 1/(1 - sum c_n z^n); for weights it is
    sum a_n z^n.  On a consistent pair the two agree up to the truncation
    tail.
    """
    z = complex(z)
    if abs(z) > EVAL_RADIUS:
        raise ValueError(f"|z| = {abs(z):.6g} exceeds the evaluation radius 0.999")
    if isinstance(seq, CoefficientSequence):
        n = _resolve_terms(seq.n, n_terms)
        cv = seq.padded(n)
        g = np.dot(cv, z ** np.arange(1, n + 1))
        return 1.0 / (1.0 - g)
    if isinstance(seq, KernelWeights):
        n = _resolve_terms(seq.n, n_terms, extendable=False)
        av = seq.padded(n)
        return complex(np.dot(av, z ** np.arange(0, n + 1)))
    raise TypeError(f"expected CoefficientSequence or KernelWeights, got {type(seq)!r}")
