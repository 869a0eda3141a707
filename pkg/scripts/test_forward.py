#!/usr/bin/env python3
"""Tests for the characteristic functions, the secular function and the spectrum."""
import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from app.errors import NearZeroLambda, TruncationTooSmall  # noqa: E402
from app.models import PerturbedOperator, Potential, SpectrumTag, mode_eigenvalue  # noqa: E402
from app.services.ctrig_service import ctrig_service  # noqa: E402
from app.services.forward_service import forward_service  # noqa: E402
from app.services.oracle_service import oracle_service  # noqa: E402

TWO_MODE = Potential.fourier({0: 1 / math.sqrt(2), 1: 1j / math.sqrt(2)})


def random_operator(seed: int, n: int = 12) -> PerturbedOperator:
    rng = np.random.default_rng(seed)
    modes = rng.choice(np.arange(-6, 7), size=int(rng.integers(1, 9)), replace=False)
    coeffs = {int(m): complex(rng.normal(), rng.normal()) for m in modes}
    alpha = float(rng.choice([-1, 1]) * rng.uniform(0.5, 20.0))
    return PerturbedOperator(alpha, Potential.fourier(coeffs), n)


def test_delta0_zeros_are_2npi():
    zeros = forward_service.delta0_zeros(10)
    for n, root in zip(range(-10, 11), zeros):
        assert abs(root - 2 * n * math.pi) <= 1e-10


def test_delta0_matches_cosine_form():
    for lam in (0.4, 2.3, -3.3 + 0.7j):
        c = ctrig_service.csd_eval(1j * lam).c
        cm = ctrig_service.csd_eval(-1j * lam).c
        assert forward_service.delta0(lam) == pytest.approx(3 * (c - cm), rel=1e-11)


def test_det_M0_matches_delta0():
    for lam in (0.7, 2.5, 4.0 + 0.5j, 6.0, -3.0 - 1.0j):
        assert forward_service.det_M0_check(lam) <= 1e-8


def test_det_M_alpha_matches_delta_alpha():
    op = PerturbedOperator(1.5, TWO_MODE, 8)
    for lam in (1.1, 2.7, 4.3, 2.0 + 0.3j):
        assert forward_service.det_Malpha_check(op, lam) <= 1e-8
    g_op = PerturbedOperator(-2.0, Potential.named("g"), 8)
    assert forward_service.det_Malpha_check(g_op, 1.9) <= 1e-8


def test_det_checks_reject_tiny_lambda():
    with pytest.raises(NearZeroLambda):
        forward_service.det_M0_check(1e-4)
    with pytest.raises(NearZeroLambda):
        forward_service.delta_alpha(PerturbedOperator(1.0, TWO_MODE, 8), 1e-5)


def test_spectral_identity():
    rng = np.random.default_rng(7)
    op = PerturbedOperator(1.5, TWO_MODE, 8)
    sec = forward_service.secular(op)
    checked = 0
    while checked < 20:
        lam = rng.uniform(0.5, 8.0)
        if abs(lam - 2 * math.pi) < 0.05:
            continue
        d0 = forward_service.delta0(lam)
        expected = d0 * complex(sec(lam**3))
        scale = max(1.0, abs(d0), abs(expected))
        assert abs(forward_service.delta_alpha(op, lam) - expected) <= 1e-8 * scale, lam
        checked += 1


def test_spectral_identity_for_unit_potential():
    # Delta(alpha) = Delta(0) (1 - alpha / lam^3) when v = 1
    op = PerturbedOperator(2.5, Potential.named("unit"), 8)
    for lam in (0.9, 3.4, 5.1):
        d0 = forward_service.delta0(lam)
        assert forward_service.delta_alpha(op, lam) == pytest.approx(d0 * (1 - 2.5 / lam**3), rel=1e-8)


def test_small_lambda_uses_the_series_head():
    cases = [(2.0, Potential.mode(1)), (1.5, TWO_MODE), (-3.0, Potential.named("g"))]
    for alpha, v in cases:
        op = PerturbedOperator(alpha, v, 16)
        sec = forward_service.secular(op)
        for lam in (1e-2, 1e-3, 2e-4):
            expected = forward_service.delta0(lam) * complex(sec(lam**3))
            assert abs(forward_service.delta_alpha(op, lam) - expected) <= 1e-9 * abs(expected), (alpha, lam)


def test_rotation_invariance():
    w = complex(-0.5, math.sqrt(3) / 2)
    assert forward_service.delta0(w * 5.0) == pytest.approx(forward_service.delta0(5.0), rel=1e-12)
    op = PerturbedOperator(1.5, TWO_MODE, 8)
    for lam in (1.3 + 0.4j, 2.9, 0.6 - 0.2j):
        base = forward_service.delta_alpha(op, lam)
        assert abs(forward_service.delta_alpha(op, w * lam) - base) <= 1e-9 * max(1.0, abs(base)), lam


def test_involution_flips_sign():
    # Delta*(alpha, lam) = conj(Delta(alpha, conj lam)) = -Delta(alpha, lam)
    op = PerturbedOperator(-2.0, Potential.fourier({0: 0.6, -1: 0.8j}), 8)
    for lam in (0.8 + 0.3j, 3.7, -1.9 + 1.1j):
        base = forward_service.delta_alpha(op, lam)
        flipped = forward_service.delta_alpha(op, complex(lam).conjugate()).conjugate()
        assert abs(flipped + base) <= 1e-9 * max(1.0, abs(base)), lam
        assert forward_service.delta0(complex(lam).conjugate()).conjugate() == pytest.approx(
            -forward_service.delta0(lam), rel=1e-12
        )


def test_series_constants():
    c0, c1 = forward_service.series_constants(PerturbedOperator(1.0, Potential.named("unit"), 8))
    assert c0 == pytest.approx(1j)
    assert c1 == pytest.approx(-1j)
    c0, c1 = forward_service.series_constants(PerturbedOperator(2.0, Potential.mode(1), 8))
    assert c0 == 0
    assert c1 == pytest.approx(-1j * (1 + 2.0 / mode_eigenvalue(1)))


def test_series_constant_is_the_lam3_coefficient():
    op = PerturbedOperator(2.0, Potential.mode(1), 8)
    _, c1 = forward_service.series_constants(op)
    lam = 0.1
    assert forward_service.delta_alpha(op, lam) / lam**3 == pytest.approx(c1, rel=1e-4)


def test_single_mode_closed_form():
    for alpha in (-5.0, -1.0, 1.0, 5.0):
        spectrum = forward_service.compute_spectrum(PerturbedOperator(alpha, Potential.mode(1), 16))
        assert len(spectrum.sigma2) == 1
        assert abs(spectrum.sigma2[0] - ((2 * math.pi) ** 3 + alpha)) <= 1e-10
        assert len(spectrum.sigma0) == 32
        assert mode_eigenvalue(1) not in spectrum.sigma0


def test_unperturbed_cases():
    expected = forward_service.unperturbed_spectrum(16).values
    for op in (PerturbedOperator(0.0, TWO_MODE, 16), PerturbedOperator(7.0, Potential.zero(), 16)):
        spectrum = forward_service.compute_spectrum(op)
        assert spectrum.values == expected
        assert all(e.tag is SpectrumTag.SIGMA0 for e in spectrum.entries)


def test_interlacing():
    for seed in range(10):
        op = random_operator(seed)
        sec = forward_service.secular(op)
        roots = forward_service.secular_roots(sec)
        assert len(roots) == len(sec.poles)
        chain = [x for pair in (zip(sec.poles, roots) if op.alpha > 0 else zip(roots, sec.poles)) for x in pair]
        assert all(a < b for a, b in zip(chain, chain[1:])), seed


def test_matches_dense_oracle():
    for seed in range(5):
        op = random_operator(100 + seed)
        spectrum = forward_service.compute_spectrum(op)
        oracle = oracle_service.eigensolve(oracle_service.build_model(op))
        assert oracle_service.window_mismatch(spectrum, oracle) <= 1e-8, seed


def test_double_eigenvalue():
    # modes 0 and 2 active; alpha puts a root of Q exactly on the unmoved z_1
    z1, z2 = mode_eigenvalue(1), mode_eigenvalue(2)
    alpha = 2.0 / (1.0 / z1 - 1.0 / (z2 - z1))
    v = Potential.fourier({0: 1 / math.sqrt(2), 2: 1 / math.sqrt(2)})
    op = PerturbedOperator(alpha, v, 8)
    spectrum = forward_service.compute_spectrum(op)
    entry = next(e for e in spectrum.entries if e.value == z1)
    assert entry.multiplicity == 2
    assert entry.tag is SpectrumTag.BOTH
    oracle = oracle_service.eigensolve(oracle_service.build_model(op))
    assert oracle_service.window_mismatch(spectrum, oracle) <= 1e-8


def test_window():
    op = PerturbedOperator(3.0, TWO_MODE, 8)
    lo, hi = mode_eigenvalue(-2), mode_eigenvalue(2)
    inside = forward_service.compute_spectrum(op, window=(lo, hi))
    assert all(lo <= z <= hi for z in inside.values)
    with pytest.raises(TruncationTooSmall):
        forward_service.compute_spectrum(op, window=(lo, mode_eigenvalue(9)))
    with pytest.raises(TruncationTooSmall):
        PerturbedOperator(1.0, Potential.mode(20), 16)
    with pytest.raises(TruncationTooSmall):
        PerturbedOperator(1.0, Potential.mode(1), 4)


def test_eigenfunctions_are_orthonormal():
    op = PerturbedOperator(1.5, TWO_MODE, 8)
    spectrum = forward_service.compute_spectrum(op)
    moved = [e for e in spectrum.entries if e.in_sigma2]
    vectors = [forward_service.eigenfunction_coefficients(op, e)[-1] for e in moved]
    for i, a in enumerate(vectors):
        assert sum(abs(c) ** 2 for c in a.values()) == pytest.approx(1.0, abs=1e-10)
        for b in vectors[i + 1:]:
            assert abs(sum(a[n] * b[n].conjugate() for n in a)) <= 1e-8
    fixed = next(e for e in spectrum.entries if e.value == mode_eigenvalue(2))
    assert forward_service.eigenfunction_coefficients(op, fixed) == [{2: 1.0}]
    x = np.linspace(0, 1, 5)
    (samples,) = forward_service.eigenfunction(op, fixed, x)
    assert np.allclose(samples, np.exp(4j * math.pi * x))


def test_eigenfunction_of_single_mode():
    op = PerturbedOperator(5.0, Potential.mode(1), 8)
    entry = next(e for e in forward_service.compute_spectrum(op).entries if e.in_sigma2)
    (coeffs,) = forward_service.eigenfunction_coefficients(op, entry)
    assert coeffs == {1: pytest.approx(-1.0)}


def test_hadamard_product():
    assert forward_service.hadamard_check(PerturbedOperator(0.0, Potential.zero(), 16), 3.0) <= 1e-6
    assert forward_service.hadamard_check(PerturbedOperator(1.0, Potential.named("unit"), 16), 2.5) <= 1e-6
    assert forward_service.hadamard_check(PerturbedOperator(5.0, Potential.mode(1), 16), 1.7) <= 1e-6


def test_secular_samples():
    sec = forward_service.secular(PerturbedOperator(1.5, TWO_MODE, 8))
    samples = forward_service.secular_samples(sec, per_interval=4)
    assert len(samples) == 3 * 4
    assert all(b[0] > a[0] for a, b in zip(samples, samples[1:]))


if __name__ == "__main__":
    from harness import run_tests

    sys.exit(run_tests(globals(), "forward"))
