from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest
from conftest import X, Z, opnorm, rand_herm, rand_unitary

from hamsim import matkernel as mk
from hamsim.blockenc import TRACKED, dilate, embed_unitary, lcu_sum, to_tracked
from hamsim.errors import BlockNotHermitian, EmptySeries, NormTooLarge, PolynomialTooLarge
from hamsim.jacobi_anger import evolution_series, truncation_order
from hamsim.qet import (
    ChebyshevSeries,
    apply_chebyshev_series,
    apply_poly_oracle,
    chebyshev_block,
    symmetrize,
    walk_operator,
)


def cheb_t(k, x):
    return np.cos(k * np.arccos(np.clip(x, -1, 1)))


def test_series_validation_and_norms():
    s = ChebyshevSeries([0.5, -0.25j, 0.1])
    assert s.degree == 2
    assert s.one_norm == pytest.approx(0.85)
    assert s.one_norm >= s.max_abs() - s.remainder_bound
    with pytest.raises(ValueError):
        ChebyshevSeries([1.0], remainder_bound=-1.0)
    with pytest.raises(ValueError):
        ChebyshevSeries([np.nan])


def test_walk_on_identity_encoding():
    w = walk_operator(embed_unitary(np.eye(2)))
    np.testing.assert_allclose(w[:2, :2], np.eye(2), atol=1e-14)


def test_walk_squared_gives_t2():
    be = dilate(0.3 * Z, alpha=1.0)
    w = walk_operator(be)
    np.testing.assert_allclose((w @ w)[:2, :2], np.diag([-0.82, -0.82]), atol=1e-12)


def test_walk_is_unitary():
    w = walk_operator(dilate(rand_herm(4, 4, 0.9), alpha=1.0))
    assert mk.unitarity_residual(w) <= 1e-10


def test_symmetrize_non_self_inverse_encoding():
    # sin-type LCU blocks are Hermitian but their dilation is not
    u = mk.expm_evolution(rand_herm(2, 3, 0.5), 1.0)
    be = lcu_sum([embed_unitary(u.conj().T), embed_unitary(u)], [1 / 2j, -1 / 2j])
    assert not be.meta.get("self_inverse")
    sym = symmetrize(be)
    assert sym.ancillas == be.ancillas + 1
    np.testing.assert_allclose(sym.unitary, sym.unitary.conj().T, atol=1e-14)
    assert mk.unitarity_residual(sym.unitary) <= 1e-12
    np.testing.assert_allclose(sym.block, be.block, atol=1e-14)
    for k in range(6):
        blk = chebyshev_block(be, k).block
        np.testing.assert_allclose(blk, mk.func_hermitian(be.block, lambda x: cheb_t(k, x)), atol=1e-12)


def test_symmetrize_rejects_non_hermitian_block():
    with pytest.raises(BlockNotHermitian):
        symmetrize(embed_unitary(rand_unitary(2, 1)))


def test_chebyshev_block_low_orders():
    a = rand_herm(4, 2, 0.7)
    be = dilate(a, alpha=1.0)
    np.testing.assert_allclose(chebyshev_block(be, 0).block, np.eye(4), atol=1e-14)
    np.testing.assert_allclose(chebyshev_block(be, 1).block, a, atol=1e-10)


@pytest.mark.parametrize("tracked", [False, True])
def test_chebyshev_block_t3(tracked):
    a = 0.4 * X
    be = dilate(a, alpha=1.0)
    if tracked:
        be = to_tracked(be)
    out = chebyshev_block(be, 3, label="w")
    np.testing.assert_allclose(out.block, mk.func_hermitian(a, lambda x: 4 * x**3 - 3 * x), atol=1e-9)
    assert out.cost["w"] == 3 and out.meta["walks"] == 3


def test_chebyshev_power_error_metadata():
    be = dilate(0.3 * Z, alpha=1.0)
    out = chebyshev_block(replace(be, epsilon=1e-8), 5)
    assert out.epsilon == pytest.approx(4 * 5 * np.sqrt(1e-8))


def test_series_identity_only():
    be = dilate(rand_herm(2, 1, 0.5), alpha=1.0)
    out = apply_chebyshev_series(be, ChebyshevSeries([1.0]))
    np.testing.assert_allclose(out.operator(), np.eye(2), atol=1e-12)
    assert out.meta["walks"] == 0


def test_series_x_squared():
    series = ChebyshevSeries([0.5, 0.0, 0.5])
    out = apply_chebyshev_series(dilate(0.6 * X, alpha=1.0), series)
    assert out.alpha == 1.0 and out.meta["beta_P"] == pytest.approx(1.0)
    np.testing.assert_allclose(out.block, 0.36 * np.eye(2), atol=1e-12)


def test_series_jacobi_anger_on_z():
    k = truncation_order(1.0, 1e-8)
    series = evolution_series(1.0, 1e-8)
    assert series.degree == k
    out = apply_chebyshev_series(dilate(0.3 * Z, alpha=1.0), series)
    np.testing.assert_allclose(out.operator(), np.diag([np.exp(-0.3j), np.exp(0.3j)]), atol=1e-7)


def test_series_pads_small_one_norm():
    series = ChebyshevSeries([0.1, 0.2])
    out = apply_chebyshev_series(dilate(0.5 * Z, alpha=1.0), series)
    assert out.alpha == 1.0 and out.meta["lcu_terms"] == 4
    np.testing.assert_allclose(out.block, 0.1 * np.eye(2) + 0.2 * 0.5 * Z, atol=1e-12)
    assert out.unitary is not None and mk.unitarity_residual(out.unitary) <= 1e-10


def test_series_guards():
    be = dilate(0.5 * Z, alpha=1.0)
    with pytest.raises(PolynomialTooLarge):
        apply_chebyshev_series(be, ChebyshevSeries([0.0, 2.0]))
    with pytest.raises(EmptySeries):
        apply_chebyshev_series(be, ChebyshevSeries([0.0, 0.0]))
    with pytest.raises(BlockNotHermitian):
        apply_chebyshev_series(embed_unitary(rand_unitary(2, 3)), ChebyshevSeries([0.5, 0.5]))


def test_half_bound_flag():
    be = dilate(0.5 * Z, alpha=1.0)
    assert not apply_chebyshev_series(be, ChebyshevSeries([0.0, 0.5])).meta["half_bound_violated"]
    assert apply_chebyshev_series(be, ChebyshevSeries([0.0, 0.9])).meta["half_bound_violated"]


def test_poly_oracle_basic():
    a = rand_herm(4, 1, 0.8)
    np.testing.assert_allclose(apply_poly_oracle(a, ChebyshevSeries([0.0, 1.0])), a, atol=1e-12)
    np.testing.assert_allclose(apply_poly_oracle(a, ChebyshevSeries([1.0, 0.0, 0.0])), np.eye(4), atol=1e-12)
    with pytest.raises(NormTooLarge):
        apply_poly_oracle(2 * a / opnorm(a), ChebyshevSeries([1.0]))


@pytest.mark.parametrize("mode_tracked", [False, True])
def test_series_cross_oracle(mode_tracked):
    a = rand_herm(4, 9, 0.9)
    series = ChebyshevSeries([0.1, -0.3j, 0.2, 0.05 + 0.05j, -0.1])
    be = dilate(a, alpha=1.0, mode=TRACKED if mode_tracked else "explicit")
    out = apply_chebyshev_series(be, series)
    assert opnorm(out.operator() - apply_poly_oracle(a, series)) <= out.epsilon + 1e-10
    assert out.meta["walks"] == 4
