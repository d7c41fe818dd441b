import math

import numpy as np
import pytest

from npdisclab import kernels
from npdisclab.kernels import (
    KernelDomainError,
    are_comparable,
    classify,
    continuity_bound,
    kernel_eval,
    monomial_multiplier_norm,
)
from npdisclab.series import KernelWeights


class TestFamilies:
    def test_hardy_pair(self):
        k = kernels.hardy(32)
        assert np.all(k.weights.values == 1.0)
        assert k.moduli.values[0] == 1.0
        assert np.all(k.moduli.values[1:] == 0.0)

    def test_hs_moduli_by_inversion(self):
        k = kernels.hs(-1.0, 64)
        assert k.weights.values[3] == pytest.approx(0.25)
        assert k.moduli.values[0] == pytest.approx(0.5)
        assert k.moduli.values[1] == pytest.approx(1.0 / 12.0)

    def test_geometric_requires_admissible_ratio(self):
        with pytest.raises(ValueError):
            kernels.geometric(0.6)
        k = kernels.geometric(0.5, 64)
        assert np.all(k.weights.values[1:] == 0.5)

    def test_parse_family_tags(self):
        assert kernels.parse_family("hardy", 16).family_tag == "hardy"
        assert kernels.parse_family("hs:-0.5", 16)._s == -0.5
        assert kernels.parse_family("geom:0.25", 16)._q == 0.25
        with pytest.raises(ValueError):
            kernels.parse_family("nope", 16)


class TestKernelEval:
    def test_szego_at_half(self):
        k = kernels.hardy(128)
        assert kernel_eval(k, 0.5, 0.5) == pytest.approx(4.0 / 3.0, abs=1e-14)

    def test_unit_at_zero_argument(self):
        k = kernels.hardy(128)
        assert kernel_eval(k, 0.5, 0.0) == pytest.approx(1.0)

    def test_hs_minus_two_on_boundary(self):
        # sum (n+1)^-2 = pi^2/6, truncation tail below 1/N
        n = 4096
        k = kernels.hs(-2.0, n)
        val = kernel_eval(k, 1.0, 1.0)
        assert abs(val - math.pi**2 / 6.0) <= 1.0 / n

    def test_open_regime_refuses_boundary(self):
        k = kernels.hardy(128)
        with pytest.raises(KernelDomainError):
            kernel_eval(k, 1.0, 1.0)

    def test_agrees_with_moduli_form(self):
        k = kernels.geometric(0.5, 256)
        t = 0.4 * np.exp(1.2j)
        direct = k.kernel_value(t)
        via_g = 1.0 / (1.0 - k.generating_value(t))
        assert direct == pytest.approx(via_g, rel=1e-12)


class TestMonomialNorms:
    def test_hardy_norms_are_one(self):
        assert monomial_multiplier_norm(kernels.hardy(16), 7) == 1.0

    def test_dirichlet_norm(self):
        assert monomial_multiplier_norm(kernels.hs(-1.0, 16), 3) == pytest.approx(2.0)

    def test_geometric_norm(self):
        k = kernels.geometric(0.5, 16)
        for n in range(1, 8):
            assert monomial_multiplier_norm(k, n) == pytest.approx(math.sqrt(2.0))

    def test_norm_nondecreasing_when_supermultiplicative(self):
        k = kernels.hs(-0.5, 64)
        norms = [monomial_multiplier_norm(k, n) for n in range(65)]
        assert all(b >= a - 1e-12 for a, b in zip(norms, norms[1:]))


class TestComparability:
    def test_identical_sequences(self):
        a = kernels.hs(-0.5, 256).weights
        rep = are_comparable(a, a)
        assert rep.comparable
        assert rep.ratio_min == rep.ratio_max == 1.0

    def test_hardy_vs_hs_diverges(self):
        rep = are_comparable(kernels.hardy(512).weights, kernels.hs(-0.5, 512).weights)
        assert not rep.comparable
        assert rep.verdict == "diverging"

    def test_constant_rescaling_is_comparable(self):
        base = kernels.hs(-0.5, 256).weights
        scaled = base.values.copy()
        scaled[1:] *= 3.0
        rep = are_comparable(base, KernelWeights(scaled))
        assert rep.comparable
        assert rep.ratio_min == pytest.approx(1.0 / 3.0)
        assert rep.ratio_max == pytest.approx(1.0)


class TestClassify:
    def test_geometric_closed_forms(self):
        rep = classify(kernels.geometric(0.5, 256))
        assert rep.mu == pytest.approx(2.0, abs=1e-12)
        assert rep.efp_limit_estimate == pytest.approx(0.5, abs=1e-12)
        assert rep.iso_to_hinf
        assert not rep.compact_regime

    def test_hs_open_scale_not_iso(self):
        for s in (-0.25, -0.5, -1.0):
            rep = classify(kernels.hs(s, 1024))
            assert not rep.iso_to_hinf, f"s={s}"
            assert rep.cnp
            assert not rep.compact_regime

    def test_hs_compact_scale(self):
        rep = classify(kernels.hs(-2.0, 2048))
        assert rep.compact_regime
        assert math.isfinite(rep.strictly_cyclic_sup)
        assert rep.moduli_mass < 1.0

    def test_hardy_not_strictly_cyclic(self):
        rep = classify(kernels.hardy(512))
        assert math.isinf(rep.strictly_cyclic_sup)
        assert rep.ratio_bounded

    def test_efp_consistency_when_mu_converges(self):
        # two-point moduli: mu = c_1 + 2 c_2 = 1.3, a_n -> 1/1.3
        from npdisclab.series import CoefficientSequence

        k = kernels.from_moduli(CoefficientSequence([0.7, 0.3]), 4096)
        rep = classify(k)
        assert math.isfinite(rep.mu)
        assert rep.efp_agreement < 1e-3

    def test_gram_matrix_psd_on_random_nodes(self):
        rng = np.random.default_rng(np.random.Philox(21))
        for k in (kernels.hardy(512), kernels.hs(-0.5, 512), kernels.geometric(0.4, 512)):
            m = 12
            pts = 0.85 * rng.uniform(0.1, 1.0, m) * np.exp(2j * np.pi * rng.uniform(size=m))
            gram = np.empty((m, m), dtype=complex)
            for i in range(m):
                for j in range(i, m):
                    gram[i, j] = kernel_eval(k, pts[i], pts[j])
                    gram[j, i] = np.conj(gram[i, j])
            eig = np.linalg.eigvalsh(gram)
            assert eig.min() >= -1e-10 * np.trace(gram).real


class TestContinuityBound:
    def test_zero_mass(self):
        # a handle with tiny moduli mass: bound reduces to the norm itself
        k = kernels.hs(-3.0, 512)
        r_sq = k.moduli_mass()
        assert continuity_bound(k, 1.0) == pytest.approx(1.0 / math.sqrt(1 - r_sq))

    def test_closed_form_value(self):
        class Stub:
            def is_compact_regime(self):
                return True

            def moduli_mass(self):
                return 0.75

        assert continuity_bound(Stub(), 1.0) == pytest.approx(2.0)

    def test_rejects_open_regime(self):
        with pytest.raises(KernelDomainError):
            continuity_bound(kernels.hardy(128), 1.0)

    def test_hs_minus_two_matches_mass(self):
        k = kernels.hs(-2.0, 2048)
        expected = 1.0 / math.sqrt(1.0 - k.moduli.values.sum())
        assert continuity_bound(k, 1.0) == pytest.approx(expected)
