import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import qfridge.dissipator as dis
from qfridge.dissipator import (BathParams, CouplingParams, bath1_channels, bath2_channels,
                                bose_einstein, build_two_bath_dissipator,
                                eigenoperator_decomposition, exchange_operator,
                                flip_operator, four_body_rate, max_kappa1, max_kappa2,
                                ohmic_spectral_density, pair_creation_operator,
                                require_rwa, three_body_rate, two_body_rate, validate_rwa,
                                zero_gap_component)
from qfridge.errors import DomainError, NumericalError, PreconditionError
from qfridge.hamiltonian import SystemParams, build_system_hamiltonian, closed_form_eigensystem

from conftest import system_params

DEFAULT = SystemParams()
B1 = BathParams(1.0, 1e-4)
B2 = BathParams(5.0, 1e-5)


def adaptive_trapezoid(fn, a, b, tol=1e-12, depth=0):
    """Recursive trapezoid refinement, used only as an independent reference."""
    m = 0.5 * (a + b)
    fa, fm, fb = fn(a), fn(m), fn(b)
    coarse = 0.5 * (b - a) * (fa + fb)
    fine = 0.25 * (b - a) * (fa + 2 * fm + fb)
    if depth > 6 and abs(fine - coarse) < tol * 3:
        return fine + (fine - coarse) / 3.0
    if depth > 40:
        raise RuntimeError("reference quadrature did not converge")
    return (adaptive_trapezoid(fn, a, m, tol / 2, depth + 1)
            + adaptive_trapezoid(fn, m, b, tol / 2, depth + 1))


def reference_occupation_integral(delta, tau, omega, upper):
    def integrand(u):
        # w = u^2, dw = 2u du
        if u == 0:
            return 2.0 * tau * math.sqrt(delta)
        w = u * u
        return 2 * u * math.sqrt(delta * w * math.exp(-w / omega)) / math.expm1(w / tau)
    return adaptive_trapezoid(integrand, 0.0, math.sqrt(upper), tol=1e-13)


class TestSpectralFunctions:
    def test_ohmic_values(self):
        assert ohmic_spectral_density(0.0, B1) == 0.0
        assert ohmic_spectral_density(1.0, B1) == pytest.approx(1e-4 * math.exp(-1e-3), rel=1e-14)
        assert ohmic_spectral_density(1.0, B1) == pytest.approx(9.9900e-5, rel=1e-5)

    def test_ohmic_peak_at_cutoff(self):
        e = np.linspace(1, 5000, 49999)
        j = ohmic_spectral_density(e, B1)
        assert e[np.argmax(j)] == pytest.approx(1e3, abs=0.2)

    def test_ohmic_rejects_negative(self):
        with pytest.raises(DomainError):
            ohmic_spectral_density(-1.0, B1)

    def test_bose_values(self):
        assert bose_einstein(1.0, 1.0) == pytest.approx(1 / (math.e - 1), rel=1e-14)
        assert bose_einstein(1.0, 1.0) == pytest.approx(0.581977, abs=1e-6)
        assert bose_einstein(1e3, 1.0) == pytest.approx(0.0, abs=1e-300)

    @given(st.floats(1e-9, 1e-4), st.floats(0.1, 10))
    def test_bose_small_argument(self, x, tau):
        e = x * tau
        assert bose_einstein(e, tau) == pytest.approx(tau / e - 0.5, rel=1e-6)

    @pytest.mark.parametrize("e,tau", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0)])
    def test_bose_domain(self, e, tau):
        with pytest.raises(DomainError):
            bose_einstein(e, tau)


class TestBathParams:
    def test_default_upper_limit(self):
        assert BathParams(1.0, 1e-4).omega_max == 50.0
        assert BathParams(5.0, 1e-4).omega_max == 250.0

    @pytest.mark.parametrize("kw", [dict(tau=0, delta=1), dict(tau=1, delta=-1),
                                    dict(tau=1, delta=1, omega_cutoff=0),
                                    dict(tau=5, delta=1, omega_max=20)])
    def test_invalid(self, kw):
        with pytest.raises(DomainError):
            BathParams(**kw)

    def test_coupling_non_negative(self):
        with pytest.raises(DomainError, match="non-negative"):
            CouplingParams(kappa1=-1)


class TestRates:
    def test_two_body_reference(self):
        assert two_body_rate(1.0, B1) == pytest.approx(2 * math.pi * 9.9900e-5 * 1.581977, rel=1e-5)
        assert two_body_rate(1.0, B1) == pytest.approx(9.9299e-4, rel=1e-4)

    def test_two_body_zero_temperature(self):
        cold = BathParams(1e-3, 1e-4)
        assert two_body_rate(1.0, cold) == pytest.approx(2 * math.pi * ohmic_spectral_density(1.0, cold), rel=1e-12)
        assert two_body_rate(-1.0, cold) == pytest.approx(0.0, abs=1e-300)

    @given(st.floats(0.01, 20), st.floats(0.1, 10))
    def test_detailed_balance(self, e, tau):
        b = BathParams(tau, 1e-4)
        assert two_body_rate(e, b) / two_body_rate(-e, b) == pytest.approx(math.exp(e / tau), rel=1e-10)

    def test_zero_gap_rejected(self):
        for fn in (lambda: two_body_rate(0.0, B1), lambda: three_body_rate(0.0, B1, 1.0),
                   lambda: four_body_rate(0.0, B1, 1.0, 3.0)):
            with pytest.raises(DomainError):
                fn()

    def test_three_body_against_reference_quadrature(self):
        ref = reference_occupation_integral(1e-4, 1.0, 1e3, B1.omega_max)
        expected = 2 * math.pi * math.sqrt(ohmic_spectral_density(1.0, B1)) * bose_einstein(1.0, 1.0) * ref
        assert three_body_rate(1.0, B1, 1.0) == pytest.approx(expected, rel=1e-6)

    @pytest.mark.parametrize("tau", [0.5, 1.0, 5.0])
    def test_occupation_integral_reference(self, tau):
        b = BathParams(tau, 1e-4)
        ref = reference_occupation_integral(1e-4, tau, 1e3, b.omega_max)
        assert dis.occupation_integral(b) == pytest.approx(ref, rel=1e-8)

    @given(st.floats(0.05, 5), st.floats(0, 3))
    def test_three_body_symmetric(self, e, k):
        assert three_body_rate(e, B1, k) == three_body_rate(-e, B1, k)

    def test_three_body_zero_kappa(self):
        assert three_body_rate(1.0, B1, 0.0) == 0.0

    def test_quadrature_failure_reported(self, monkeypatch):
        monkeypatch.setattr(dis, "QUAD_MAX_PANELS", 1)
        dis._scaled_occupation_integral.cache_clear()
        try:
            with pytest.raises(NumericalError):
                three_body_rate(1.0, BathParams(0.7, 1e-4), 1.0)
        finally:
            dis._scaled_occupation_integral.cache_clear()

    def test_partner_limit(self):
        x = 1e-5
        n = bose_einstein(x, B1.tau)
        assert ohmic_spectral_density(x, B1) * (1 + n) == pytest.approx(B1.delta * B1.tau, rel=1e-4)
        assert ohmic_spectral_density(x, B1) * n == pytest.approx(B1.delta * B1.tau, rel=1e-4)

    def test_four_body_at_pair_energy(self):
        expected = (2 * math.pi * ohmic_spectral_density(3.0, B1) * (1 + bose_einstein(3.0, 1.0))
                    * 1e-4 * 1.0)
        assert four_body_rate(3.0, B1, 1.0, 3.0) == pytest.approx(expected, rel=1e-14)
        assert four_body_rate(-3.0, B1, 1.0, 3.0) == pytest.approx(
            expected * bose_einstein(3.0, 1.0) / (1 + bose_einstein(3.0, 1.0)), rel=1e-12)

    def test_four_body_generic_gap(self):
        e, e12 = 1.2, 3.0
        j = lambda x: ohmic_spectral_density(x, B1)  # noqa: E731
        f = lambda x: bose_einstein(x, 1.0)  # noqa: E731
        assert four_body_rate(e, B1, 2.0, e12) == pytest.approx(
            2 * math.pi * 4 * j(e) * j(e12 - e) * (1 + f(e)) * (1 + f(e12 - e)), rel=1e-13)
        assert four_body_rate(-e, B1, 2.0, e12) == pytest.approx(
            2 * math.pi * 4 * j(e) * j(e12 - e) * f(e) * f(e12 - e), rel=1e-13)

    def test_four_body_domain(self):
        assert four_body_rate(1.0, B1, 0.0, 3.0) == 0.0
        with pytest.raises(DomainError):
            four_body_rate(3.5, B1, 1.0, 3.0)


class TestKappaBounds:
    @given(st.floats(1e-5, 1e-1), st.floats(0.1, 4))
    def test_round_trip(self, gamma, e):
        k = max_kappa1(B1, gamma, e)
        assert three_body_rate(e, B1, k) == pytest.approx(gamma, rel=1e-8)

    def test_sqrt_scaling(self):
        assert max_kappa1(B1, 4e-3, 1.0) == pytest.approx(2 * max_kappa1(B1, 1e-3, 1.0), rel=1e-12)

    def test_weak_operating_point(self):
        # kappa1 of order one gives three-body rates of order 1e-3 at the weak operating point
        k = max_kappa1(B1, 1e-3, 1.0)
        assert 1.0 < k < 2.0
        assert 3e-4 < three_body_rate(1.0, B1, 1.0) < 3e-3

    def test_kappa2_round_trip(self):
        k = max_kappa2(B1, 1e-3, 3.0, 3.0)
        assert four_body_rate(3.0, B1, k, 3.0) == pytest.approx(1e-3, rel=1e-12)

    def test_bad_bound(self):
        with pytest.raises(DomainError):
            max_kappa1(B1, 0.0, 1.0)


def _proj(eig, a, b):
    return np.outer(eig.vectors[:, a], eig.vectors[:, b].conj())


class TestEigenoperators:
    def test_bath1_flip_matches_listing(self):
        p = SystemParams(g=0.5)
        eig = closed_form_eigensystem(p)
        ops = dict((round(e, 9), op) for op, e in
                   eigenoperator_decomposition(eig, flip_operator(1) + flip_operator(2)))
        expected = _proj(eig, 2, 0) + _proj(eig, 5, 3)
        assert np.abs(ops[1.0] - expected).max() < 1e-12

    def test_bath2_flip_matches_listing(self):
        eig = closed_form_eigensystem(DEFAULT)
        decomp = eigenoperator_decomposition(eig, flip_operator(3))
        assert len(decomp) == 3
        op = next(op for op, e in decomp if abs(e - DEFAULT.e3) < 1e-12)
        assert np.abs(op - (_proj(eig, 1, 0) + _proj(eig, 5, 4))).max() < 1e-12

    def test_identity_has_no_transitions(self):
        assert eigenoperator_decomposition(closed_form_eigensystem(DEFAULT), np.eye(8)) == []

    def test_non_hermitian_rejected(self):
        a = np.zeros((8, 8))
        a[0, 1] = 1
        with pytest.raises(DomainError):
            eigenoperator_decomposition(closed_form_eigensystem(DEFAULT), a)

    @given(system_params(), st.sampled_from(["flip12", "flip3", "exchange", "pair"]))
    def test_reconstruction_and_commutator(self, p, which):
        a_op = {"flip12": flip_operator(1) + flip_operator(2), "flip3": flip_operator(3),
                "exchange": exchange_operator(1, 2), "pair": pair_creation_operator(1, 2)}[which]
        eig = closed_form_eigensystem(p)
        h = build_system_hamiltonian(p)
        decomp = eigenoperator_decomposition(eig, a_op)
        total = zero_gap_component(eig, a_op)
        for op, e in decomp:
            assert e > 0
            assert np.abs(h @ op - op @ h + e * op).max() < 1e-10
            total = total + op + op.conj().T
        assert np.abs(total - a_op).max() < 1e-10
        energies = [e for _, e in decomp]
        assert energies == sorted(energies)

    def test_close_gaps_grouped(self):
        # at g = 0.5 the gap (E12-E3+Et)/2 coincides with (E12+E3-Et)/2
        eig = closed_form_eigensystem(SystemParams(g=0.5))
        decomp = eigenoperator_decomposition(eig, flip_operator(1) + flip_operator(2))
        gaps = [e for _, e in decomp]
        assert len(gaps) == 5 and np.all(np.diff(gaps) > 1e-9)


def _inventory(chans, bath, order):
    return sorted(ch.energy for ch in chans if ch.bath == bath and ch.order == order and ch.energy > 0)


class TestTwoBathDissipator:
    def test_channel_inventory_default(self):
        p = DEFAULT
        chans = build_two_bath_dissipator(p, B1, B2, CouplingParams(1.0, 1.0))
        et = p.e_tilde
        order2 = sorted([p.e1, p.e2, (p.e12 - p.e3 + et) / 2, (p.e12 - p.e3 - et) / 2,
                         (p.e12 + p.e3 + et) / 2, (p.e12 + p.e3 - et) / 2])
        assert np.allclose(_inventory(chans, 1, 2), order2, atol=1e-12)
        assert np.allclose(_inventory(chans, 1, 4), [p.e12], atol=1e-12)
        assert len(_inventory(chans, 1, 3)) == 2
        assert sum(ch.bath == 1 for ch in chans) == 18
        bath2 = sorted([p.e3, (p.e3 + p.delta_e + et) / 2, (p.e3 + p.delta_e - et) / 2])
        assert np.allclose(_inventory(chans, 2, 2), bath2, atol=1e-12)
        assert sum(ch.bath == 2 for ch in chans) == 6

    def test_no_few_body_channels_without_kappa(self):
        chans = build_two_bath_dissipator(DEFAULT, B1, B2)
        assert {ch.order for ch in chans} == {2}
        assert len(chans) == 18
        eig = closed_form_eigensystem(DEFAULT)
        separate = bath1_channels(DEFAULT, B1, CouplingParams(), eig) + bath2_channels(DEFAULT, B2, eig)
        for a, b in zip(chans, separate):
            assert np.array_equal(a.lindblad_op, b.lindblad_op) and a.rate == b.rate

    def test_rates_match_gap_spectrum(self):
        chans = build_two_bath_dissipator(DEFAULT, B1, B2)
        for ch in chans:
            b = B1 if ch.bath == 1 else B2
            assert ch.rate == pytest.approx(two_body_rate(ch.energy, b), rel=1e-14)

    @given(system_params(), st.floats(0, 3), st.floats(0, 50))
    def test_channel_invariants(self, p, k1, k2):
        chans = build_two_bath_dissipator(p, B1, B2, CouplingParams(k1, k2))
        h = build_system_hamiltonian(p)
        for ch in chans:
            assert ch.rate >= 0
            assert np.abs(h @ ch.lindblad_op - ch.lindblad_op @ h + ch.energy * ch.lindblad_op).max() < 1e-10
        for up, down in zip(chans[::2], chans[1::2]):
            assert up.energy == -down.energy and up.bath == down.bath and up.order == down.order
            assert np.array_equal(up.lindblad_op.conj().T, down.lindblad_op)
            tau = (B1 if up.bath == 1 else B2).tau
            if up.order == 2:
                assert up.rate / down.rate == pytest.approx(math.exp(up.energy / tau), rel=1e-10)
            if up.order == 3:
                assert up.rate == down.rate


class TestRWA:
    def test_s1_weak_passes(self):
        chans = build_two_bath_dissipator(DEFAULT, BathParams(1, 1e-8), BathParams(5, 1e-4))
        report = validate_rwa(chans, DEFAULT)
        assert report.verdict == "pass"
        assert report.max_rate == max(ch.rate for ch in chans)
        assert report.smallest_scale == DEFAULT.g

    def test_strong_dissipation_fails(self):
        chans = build_two_bath_dissipator(DEFAULT, BathParams(1, 1.0), B2)
        report = validate_rwa(chans, DEFAULT)
        assert report.verdict == "fail" and not report.ok
        assert report.channel.rate == report.max_rate
        with pytest.raises(PreconditionError):
            require_rwa(chans, DEFAULT)

    def test_warn_band(self):
        chans = build_two_bath_dissipator(DEFAULT, BathParams(1, 5e-4), B2)
        assert validate_rwa(chans, DEFAULT).verdict == "warn"

    def test_g_zero_uses_energies(self):
        p = SystemParams(g=0.0)
        chans = build_two_bath_dissipator(p, B1, B2)
        assert validate_rwa(chans, p).smallest_scale == 1.0
