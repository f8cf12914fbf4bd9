from __future__ import annotations

import math

import numpy as np
import pytest
from conftest import Z, rand_herm

from hamsim import matkernel as mk
from hamsim.blockenc import TRACKED, BlockEncoding, dilate
from hamsim.errors import ArgumentOutOfRange, NormTooLarge
from hamsim.jacobi_anger import (
    bessel_j,
    bessel_j_all,
    evolution_series,
    evolve_block,
    truncation_order,
)

# reference values computed with mpmath.besselj at 30 digits
FROZEN = [
    (0, 1.0, 0.76519768655796655),
    (1, 1.0, 0.44005058574493352),
    (5, 2.0, 0.0070396297558716855),
    (10, 10.0, 0.20748610663335886),
    (30, 10.0, 1.551096078257467e-12),
    (0, 50.0, 0.055812327669251815),
    (200, 50.0, 2.1383690042391174e-97),
]


def power_series_j(k: int, t: float) -> float:
    return sum((-1) ** m * (t / 2) ** (2 * m + k) / (math.factorial(m) * math.factorial(m + k)) for m in range(40))


def test_bessel_at_zero():
    assert bessel_j(0, 0.0) == 1.0
    assert all(bessel_j(k, 0.0) == 0.0 for k in range(1, 6))


def test_bessel_j0_one_power_series():
    assert bessel_j(0, 1.0) == pytest.approx(0.7651976865579666, abs=1e-12)
    assert bessel_j(0, 1.0) == pytest.approx(power_series_j(0, 1.0), abs=1e-14)


@pytest.mark.parametrize("k,t,ref", FROZEN)
def test_bessel_frozen_values(k, t, ref):
    assert bessel_j(k, t) == pytest.approx(ref, rel=1e-10, abs=1e-15)


def test_bessel_against_scipy():
    special = pytest.importorskip("scipy.special")
    for t in (0.3, 1.7, 4.0, 13.5, -2.5):
        np.testing.assert_allclose(bessel_j_all(60, t), special.jv(np.arange(61), t), atol=1e-13)


def test_bessel_recurrence_and_normalisation():
    j = bessel_j_all(21, 2.0)
    k = np.arange(1, 21)
    assert np.max(np.abs(j[k - 1] + j[k + 1] - (2 * k / 2.0) * j[k])) <= 1e-10
    for t in (0.5, 1, 2, 4, 20):
        j = bessel_j_all(120, t)
        assert abs(j[0] + 2 * np.sum(j[2::2]) - 1) <= 1e-10


def test_bessel_argument_limits():
    with pytest.raises(ArgumentOutOfRange):
        bessel_j(201, 1.0)
    with pytest.raises(ArgumentOutOfRange):
        bessel_j(0, 51.0)


def test_truncation_order_properties():
    assert truncation_order(1.0, 0.5) <= 3
    assert truncation_order(1.0, 1e-10) >= truncation_order(1.0, 1e-4)
    assert truncation_order(2.0, 1e-8) >= truncation_order(0.5, 1e-8)


def test_truncation_order_is_minimal():
    for t, eps in [(1.0, 1e-6), (3.0, 1e-10)]:
        kk = truncation_order(t, eps)
        j = np.abs(bessel_j_all(kk + 80, t))
        assert 2 * np.sum(j[kk + 1 :]) <= eps
        assert 2 * np.sum(j[kk:]) > eps


def test_series_degenerate_time():
    s = evolution_series(0.0, 1e-8)
    assert s.degree == 0 and s(0.0) == 1.0


def test_series_scalar_value():
    s = evolution_series(1.0, 1e-8)
    assert abs(s(0.3) - np.exp(-0.3j)) <= 1e-8


def test_series_parity():
    s = evolution_series(2.0, 1e-10)
    x = np.linspace(0, 1, 51)
    np.testing.assert_allclose(s(x).real, s(-x).real, atol=1e-14)
    np.testing.assert_allclose(s(x).imag, -s(-x).imag, atol=1e-14)


@pytest.mark.parametrize("t", [-1.5, 0.5, 3.0])
def test_series_uniform_error_within_certificate(t):
    s = evolution_series(t, 1e-9)
    x = np.cos(np.pi * np.arange(1001) / 1000)
    assert np.max(np.abs(s(x) - np.exp(-1j * t * x))) <= s.remainder_bound


def test_evolve_block_zero_time():
    out = evolve_block(dilate(0.3 * Z, alpha=1.0), 0.0, 1e-6)
    np.testing.assert_array_equal(out.block, np.eye(2))


@pytest.mark.parametrize("mode", ["explicit", TRACKED])
def test_evolve_block_diag(mode):
    out = evolve_block(dilate(0.3 * Z, alpha=1.0, mode=mode), 1.0, 1e-7)
    np.testing.assert_allclose(out.operator(), np.diag([np.exp(-0.3j), np.exp(0.3j)]), atol=1e-7)
    assert abs(np.linalg.norm(out.operator(), 2) - 1) <= out.epsilon + 1e-12
    assert out.cost["walk:ja"] == out.meta["degree"]


def test_evolve_block_uses_alpha_scaled_time():
    a = rand_herm(4, 5, 0.9)
    be = dilate(a, alpha=2.0)
    out = evolve_block(be, 1.3, 1e-9)
    assert out.meta["series_time"] == pytest.approx(2.6)
    assert np.linalg.norm(out.operator() - mk.expm_evolution(a, 1.3), 2) <= out.epsilon + 1e-12


def test_evolve_block_rejects_large_block():
    with pytest.raises(NormTooLarge):
        evolve_block(BlockEncoding(2 * np.eye(2), 1.0, 1), 1.0, 1e-6)
