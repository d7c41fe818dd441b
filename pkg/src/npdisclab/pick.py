"""Pick matrices, solvability tests and interpolating-subsequence extraction.

For nodes z_i, targets w_i and a kernel K the Pick matrix is

    A[i, j] = (1 - w_i conj(w_j)) K(z_i, z_j),

positive semidefiniteness of which characterizes solvability of the
interpolation problem on a complete-Pick kernel.  The extractor walks a
boundary-bound point list and keeps a point once a single determinant term
(1 - r^2) delta K(z, z) provably dominates the remaining expansion terms,
the dominance being certified through Hadamard bounds; every acceptance is
re-verified by explicit positive-definiteness checks over a target sample.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

from .geometry import BallPoint, crossing_map, crossing_scalar, one_minus_inner
from .kernels import KernelHandle

#: relative eigenvalue tolerance separating the three verdict zones
PSD_TOL = 1e-10

#: largest matrix dispatched to a full eigendecomposition
_EIG_SIZE = 200

DRURY_ARVESON = "drury-arveson"


class PickProblemError(ValueError):
    """Ill-posed interpolation data."""


class ExtractionExhaustedError(RuntimeError):
    """The point list ended before the requested subsequence was complete."""


def _as_ball_point(node) -> BallPoint:
    if isinstance(node, BallPoint):
        return node
    return BallPoint([complex(node)])


class PickProblem:
    """Interpolation nodes, targets and a kernel handle.

    ``kernel`` is either the string ``"drury-arveson"`` (K = 1/(1 - <x, y>)
    on ball points) or a :class:`~npdisclab.kernels.KernelHandle` evaluated
    on scalar disc nodes.
    """

    def __init__(self, nodes, targets, kernel=DRURY_ARVESON):
        self.nodes = [_as_ball_point(z) for z in nodes]
        self.targets = np.atleast_1d(np.asarray(targets, dtype=complex))
        self.kernel = kernel
        if len(self.nodes) != self.targets.size:
            raise PickProblemError("node and target counts differ")
        if len(self.nodes) > 2000:
            raise PickProblemError("problem size capped at 2000 nodes")
        if np.any(np.abs(self.targets) >= 1.0):
            raise PickProblemError("all targets must lie in the open disc")
        for p in self.nodes:
            if not p.is_interior:
                raise PickProblemError("all nodes must be interior points")
        for i in range(len(self.nodes)):
            for j in range(i + 1, len(self.nodes)):
                if _coincident(self.nodes[i], self.nodes[j]):
                    raise PickProblemError(
                        f"nodes {i} and {j} coincide; interpolation is ill-posed"
                    )

    @property
    def size(self) -> int:
        return len(self.nodes)


def _coincident(p: BallPoint, q: BallPoint) -> bool:
    if p.coords.size != q.coords.size:
        return False
    if not np.array_equal(p.coords, q.coords):
        return False
    if p.gap is not None or q.gap is not None:
        return p.gap == q.gap
    return True


def _kernel_entry(kernel, p: BallPoint, q: BallPoint) -> complex:
    if kernel == DRURY_ARVESON:
        return 1.0 / one_minus_inner(p, q)
    if isinstance(kernel, KernelHandle):
        omt = complex(one_minus_inner(p, q))
        if omt.imag == 0.0:
            closed = kernel.kernel_from_defect(omt.real)
            if closed is not None:
                return closed
        return kernel.kernel_value(1.0 - omt)
    raise PickProblemError(f"unknown kernel specification {kernel!r}")


def kernel_gram(nodes, kernel=DRURY_ARVESON) -> np.ndarray:
    """Hermitian kernel matrix [K(z_i, z_j)], upper triangle mirrored."""
    pts = [_as_ball_point(z) for z in nodes]
    m = len(pts)
    g = np.empty((m, m), dtype=complex)
    for i in range(m):
        for j in range(i, m):
            g[i, j] = _kernel_entry(kernel, pts[i], pts[j])
            g[j, i] = np.conj(g[i, j])
    return g


def pick_matrix(p: PickProblem) -> np.ndarray:
    """The Pick matrix (1 - w_i conj(w_j)) K(z_i, z_j), Hermitian exactly."""
    gram = kernel_gram(p.nodes, p.kernel)
    w = p.targets
    return (1.0 - np.outer(w, np.conj(w))) * gram


@dataclass(frozen=True)
class PsdVerdict:
    """Spectral verdict for a Hermitian matrix.

    ``min_eigenvalue`` is exact for sizes up to 200 (full
    eigendecomposition) and the smallest pivoted-Cholesky residual above
    that, which bounds the true minimum from above.
    """

    min_eigenvalue: float
    matrix_scale: float
    verdict: str  # "positive-definite" | "positive-semidefinite" | "indefinite"


def psd_check(m: np.ndarray, tol: float = PSD_TOL) -> PsdVerdict:
    """Classify a Hermitian matrix via its spectrum.

    Positive-definite above +tol * scale, indefinite below -tol * scale,
    the boundary band in between; scale is the largest entry magnitude so
    kernel matrices with enormous boundary entries are judged relatively.
    """
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    scale = float(np.abs(m).max())
    asym = float(np.abs(m - m.conj().T).max())
    if asym > 1e-13 * max(scale, 1e-300):
        raise ValueError(f"matrix is not Hermitian (asymmetry {asym:.3g})")
    if m.shape[0] <= _EIG_SIZE:
        min_eig = float(np.linalg.eigvalsh(m).min())
    else:
        min_eig = _pivoted_cholesky_floor(m)
    if min_eig > tol * scale:
        verdict = "positive-definite"
    elif min_eig < -tol * scale:
        verdict = "indefinite"
    else:
        verdict = "positive-semidefinite"
    return PsdVerdict(min_eig, scale, verdict)


def _pivoted_cholesky_floor(m: np.ndarray) -> float:
    """Minimum-eigenvalue estimate from a pivoted Cholesky factorization.

    A completed factorization returns the squared smallest pivot (an upper
    bound on the true minimum, positive); an early stop returns the
    smallest updated Schur-complement diagonal, whose sign separates the
    indefinite case from the semidefinite boundary.
    """
    factor, _, rank, info = lapack.zpstrf(np.ascontiguousarray(m, dtype=complex), lower=1)
    if info < 0:
        raise np.linalg.LinAlgError(f"zpstrf failed with info={info}")
    diag = np.real(np.diag(factor))
    if rank == m.shape[0]:
        return float(diag.min()) ** 2
    resid = diag[rank:]
    return float(resid.min()) if resid.size else 0.0


def solvable(p: PickProblem) -> bool:
    """Whether the Pick matrix is not indefinite (problem admits a solution)."""
    return psd_check(pick_matrix(p)).verdict != "indefinite"


# -- interpolating-subsequence extraction ------------------------------------


@dataclass(frozen=True)
class ExtractionRow:
    """Audit record for one accepted point."""

    k: int                  # stage (1-based)
    index: int              # position in the input list
    point_norm: float
    min_eigenvalue: float   # worst normalized eigenvalue over the sample
    rule: str               # "initial" | "dominance"


@dataclass(frozen=True)
class ExtractionResult:
    indices: list[int]
    rows: list[ExtractionRow]


class _LogKernel:
    """Lazy log |K(z_i, z_j)| access for the extractor.

    Radial point lists work straight off their gap vector so no quadratic
    table is ever materialized; general lists fall back to pairwise inner
    products.
    """

    def __init__(self, points: list[BallPoint]):
        self.points = points
        self.radial_gaps = None
        if all(p.is_radial_real for p in points):
            self.radial_gaps = np.array([p.gap for p in points])

    def diag(self, idx: np.ndarray) -> np.ndarray:
        if self.radial_gaps is not None:
            g = self.radial_gaps[idx]
            return -np.log(g * (2.0 - g))
        return np.array(
            [-math.log(abs(one_minus_inner(self.points[i], self.points[i]))) for i in idx]
        )

    def col(self, idx: np.ndarray, j: int) -> np.ndarray:
        if self.radial_gaps is not None:
            g = self.radial_gaps[idx]
            gj = self.radial_gaps[j]
            return -np.log(g + gj - g * gj)
        return np.array(
            [-math.log(abs(one_minus_inner(self.points[i], self.points[j]))) for i in idx]
        )

    def entry(self, i: int, j: int) -> float:
        if self.radial_gaps is not None:
            gi, gj = self.radial_gaps[i], self.radial_gaps[j]
            if i == j:
                return -math.log(gi * (2.0 - gi))
            return -math.log(gi + gj - gi * gj)
        return -math.log(abs(one_minus_inner(self.points[i], self.points[j])))

    def block(self, idx: list[int]) -> np.ndarray:
        k = len(idx)
        out = np.empty((k, k))
        for a in range(k):
            for b in range(a, k):
                out[a, b] = out[b, a] = self.entry(idx[a], idx[b])
        return out


def _target_sample(k: int, r: float, rng, corner_cap: int = 512,
                   n_random: int = 256) -> list[np.ndarray]:
    """Corner sign patterns of the r-polydisc plus uniform complex draws."""
    sample = []
    if 2**k <= corner_cap:
        sample.extend(np.array(p) for p in itertools.product((r, -r), repeat=k))
    else:
        for _ in range(corner_cap):
            sample.append(r * rng.choice((-1.0, 1.0), size=k))
    for _ in range(n_random):
        mag = r * np.sqrt(rng.uniform(size=k))
        sample.append(mag * np.exp(2j * np.pi * rng.uniform(size=k)))
    return sample


def _normalized_pick(log_block: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Diagonally rescaled Pick block: unit diagonal, entries O(1).

    Congruence keeps definiteness while avoiding the e^{n^2} dynamic range
    of raw kernel entries near the boundary.
    """
    diag = np.diag(log_block)
    corr = np.exp(log_block - 0.5 * (diag[:, None] + diag[None, :]))
    wfac = (1.0 - np.outer(w, np.conj(w))) / np.sqrt(
        np.outer(1.0 - np.abs(w) ** 2, 1.0 - np.abs(w) ** 2)
    )
    b = corr * wfac
    np.fill_diagonal(b, 1.0)
    return b


def _logsumexp(values) -> float:
    arr = np.asarray(values, dtype=float)
    mx = arr.max()
    return float(mx + np.log(np.sum(np.exp(arr - mx))))


def extract_interpolating_subsequence(
    points,
    r: float,
    k_max: int,
    *,
    seed: int = 0,
    corner_cap: int = 512,
    n_random_targets: int = 256,
) -> ExtractionResult:
    """Greedy extraction of a subsequence whose Pick matrices stay definite.

    At stage k the candidate z is accepted once the dominant determinant
    term (1 - r^2) * delta * K(z, z) exceeds a Hadamard bound on all other
    last-row expansion terms, where delta estimates the infimum of
    det A_{k-1}(w) over the sampled targets (polydisc corners plus seeded
    random draws).  Acceptance is then re-verified by explicit Cholesky
    positive-definiteness of the normalized A_k(w) over the same sample.

    The sampled delta may over-estimate the true infimum, so acceptance can
    fire earlier than the proof's asymptotic rule would; the verification
    step and the per-row audit trail keep the output sound and traceable.
    """
    pts = [_as_ball_point(z) for z in points]
    if not 0.0 < r < 1.0:
        raise ValueError("target radius r must lie in (0, 1)")
    if not 1 <= k_max <= 50:
        raise ValueError("k_max must lie in 1..50")
    if pts[-1].norm <= 0.9:
        raise ValueError("point list must approach the boundary (final norm > 0.9)")

    rng = np.random.default_rng(np.random.Philox(seed))
    kern = _LogKernel(pts)
    log_one_minus_rsq = math.log1p(-r * r)
    log_one_plus_rsq = math.log1p(r * r)

    selected = [0]
    rows = [ExtractionRow(1, 0, pts[0].norm, 1.0, "initial")]

    for k in range(2, k_max + 1):
        sel_block = kern.block(selected)
        sample = _target_sample(k - 1, r, rng, corner_cap, n_random_targets)
        # delta estimate: smallest determinant of the previous stage over
        # the sample, assembled in log space from the normalized block
        log_delta = math.inf
        for w in sample:
            b = _normalized_pick(sel_block, w)
            eig = np.linalg.eigvalsh(b)
            if eig.min() <= 0.0:
                raise ExtractionExhaustedError(
                    f"stage {k - 1} block lost definiteness during sampling"
                )
            log_det = float(np.sum(np.log(eig)))
            log_det += float(np.sum(np.log1p(-np.abs(w) ** 2)))
            log_det += float(np.trace(sel_block))
            log_delta = min(log_delta, log_det)

        # vectorized dominance scan over all remaining candidates
        cands = np.arange(selected[-1] + 1, len(pts))
        if cands.size == 0:
            raise ExtractionExhaustedError(
                f"point list exhausted at stage {k}: no candidates remain"
            )
        log_kzz = kern.diag(cands)
        log_kc = np.column_stack([kern.col(cands, j) for j in selected])
        lhs = log_one_minus_rsq + log_delta + log_kzz
        # Hadamard bound on the remaining last-row expansion terms: for the
        # term dropping column `drop`, each minor row i mixes fixed selected
        # entries with the single candidate-dependent entry K(z_i, z)
        rhs_terms = np.empty((cands.size, k - 1))
        for drop in range(k - 1):
            log_minor = np.zeros(cands.size)
            for i in range(k - 1):
                fixed = [
                    2.0 * (log_one_plus_rsq + sel_block[i, l])
                    for l in range(k - 1)
                    if l != drop
                ]
                fixed_sum = _logsumexp(fixed) if fixed else -math.inf
                cand_ent = 2.0 * (log_one_plus_rsq + log_kc[:, i])
                log_minor += 0.5 * np.logaddexp(fixed_sum, cand_ent)
            rhs_terms[:, drop] = log_one_plus_rsq + log_kc[:, drop] + log_minor
        rhs_max = rhs_terms.max(axis=1)
        rhs = rhs_max + np.log(np.sum(np.exp(rhs_terms - rhs_max[:, None]), axis=1))

        accepted = None
        min_eig_seen = math.inf
        for pos in np.nonzero(lhs > rhs)[0]:
            cand = int(cands[pos])
            # dominance fired; certify definiteness over a fresh k-target sample
            trial = selected + [cand]
            trial_block = kern.block(trial)
            verify = _target_sample(k, r, rng, corner_cap, n_random_targets)
            ok = True
            min_eig_seen = math.inf
            for wk in verify:
                b = _normalized_pick(trial_block, wk)
                eig_min = float(np.linalg.eigvalsh(b).min())
                min_eig_seen = min(min_eig_seen, eig_min)
                if eig_min <= PSD_TOL:
                    ok = False
                    break
            if ok:
                accepted = cand
                break
        if accepted is None:
            raise ExtractionExhaustedError(
                f"point list exhausted at stage {k}: no candidate after index "
                f"{selected[-1]} passed dominance; the norms may approach the "
                f"boundary too slowly for this truncation"
            )
        selected.append(accepted)
        rows.append(
            ExtractionRow(k, accepted, pts[accepted].norm, min_eig_seen, "dominance")
        )
    return ExtractionResult(selected, rows)


# -- boundary-crossing obstruction -------------------------------------------


@dataclass(frozen=True)
class CrossingObstruction:
    """Determinant test at the pinch points of the crossing curve.

    ``det`` is the 2x2 Pick determinant for the candidate multiplier
    h = f^{-1}/C evaluated through h(f(z)) = z/C; ``lhs``/``rhs`` are the
    two sides of the cleared-denominator inequality that positivity would
    force, and ``kernel_ratio`` the normalized-kernel product that tends
    to 1 at the pinch.
    """

    det: float
    lhs: float
    rhs: float
    kernel_ratio: float
    scalar_s: float


def crossing_determinant(r: float, big_c: float, x: float) -> CrossingObstruction:
    """Pick obstruction for inverting the boundary-crossing curve.

    Nodes f(1-x) and f(-1+sx) on the two-ball kernel, targets (1-x)/C and
    (-1+sx)/C.  A valid norm-C inverse multiplier would force det >= 0 and
    lhs <= rhs; both fail for every C > 1 once x is small.
    """
    if not 0.0 < x < 0.1:
        raise ValueError("x must lie in (0, 0.1)")
    if big_c <= 1.0:
        raise ValueError("candidate multiplier norm must exceed 1")
    curve = crossing_map(r)
    s = crossing_scalar(curve)
    z1, z2 = 1.0 - x, -1.0 + s * x
    om1 = 1.0 - curve.inner(z1, z1).real
    om2 = 1.0 - curve.inner(z2, z2).real
    om12 = 1.0 - curve.inner(z1, z2).real  # real for real arguments
    t1, t2 = z1 / big_c, z2 / big_c
    k11, k22, k12 = 1.0 / om1, 1.0 / om2, 1.0 / om12
    det = (1.0 - t1 * t1) * (1.0 - t2 * t2) * k11 * k22 - (1.0 - t1 * t2) ** 2 * k12**2
    csq = big_c * big_c
    lhs = (csq + (1.0 - x) * (1.0 - s * x)) ** 2 * om1 * om2
    rhs = (csq - (1.0 - x) ** 2) * (csq - (1.0 - s * x) ** 2) * om12**2
    kernel_ratio = om1 * om2 / om12**2
    return CrossingObstruction(det, lhs, rhs, kernel_ratio, s)
