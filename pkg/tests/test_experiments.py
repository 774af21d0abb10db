import math

import numpy as np
import pytest

from hermite_bmo.experiments import (
    KAPPA_HAT,
    block_decay_experiment,
    envelope_slope,
    fit_bmo_norm_exponent,
    fit_l1_norm_exponent,
    fit_sup_norm_exponent,
    l1_norm_hermite,
    linf_bmo_probe,
    sup_norm_hermite,
)
from hermite_bmo.hermite import eval_hermite_1d
from hermite_bmo.symbols import Symbol, builtin_symbol

SMALL_DEGREES = [2**j for j in range(6, 11)]


def dense_sup(k, points=400001):
    turn = math.sqrt(2 * k + 1)
    xs = np.linspace(0, turn + 3, points)
    return np.abs(eval_hermite_1d(k, xs)).max()


@pytest.mark.parametrize("k", [0, 1, 7, 64, 300])
def test_sup_norm_against_dense_scan(k):
    # the dense scan misses the peak by O(step^2), about 5e-9 relative at k = 300
    assert sup_norm_hermite(k) == pytest.approx(dense_sup(k), rel=1e-8)
    # refinement can only raise the coarse maximum, and the dense scan is a lower bound
    assert sup_norm_hermite(k) >= dense_sup(k) * (1 - 1e-15)


def test_sup_norm_of_ground_state():
    assert sup_norm_hermite(0) == pytest.approx(math.pi**-0.25, rel=1e-14)


@pytest.mark.parametrize("k", [64, 1024, 4096])
def test_sup_norm_resolution_independence(k):
    assert abs(sup_norm_hermite(k, 8.0) - sup_norm_hermite(k, 16.0)) < 1e-6


def test_l1_norm_against_oracle_and_convergence():
    # 50-digit quadrature between the zeros of phi_4096
    exact = 11.656174828814074931
    errors = [abs(l1_norm_hermite(4096, ppw) - exact) / exact for ppw in (16.0, 32.0, 64.0)]
    assert errors[1] < 1e-5 and errors[2] < 1e-6
    # Richardson leaves at least third-order convergence
    assert errors[0] / errors[1] > 8 and errors[1] / errors[2] > 8


def test_l1_of_ground_state():
    # int exp(-x^2/2) pi^{-1/4} = sqrt(2) pi^{1/4}
    assert l1_norm_hermite(0) == pytest.approx(math.sqrt(2) * math.pi**0.25, rel=1e-10)


@pytest.mark.parametrize("k", [16, 256, 2048])
def test_l1_norm_sanity_bounds(k):
    # 1 = ||phi||_2^2 <= ||phi||_1 ||phi||_inf, and Cauchy-Schwarz on the window
    # |x| <= sqrt(2k+1) + 6, outside which the tail is negligible
    l1 = l1_norm_hermite(k)
    assert l1 >= 1.0 / sup_norm_hermite(k)
    width = 2 * (math.sqrt(2 * k + 1) + 6)
    assert l1 <= math.sqrt(width)


def test_sup_fit_on_short_range():
    rep = fit_sup_norm_exponent(SMALL_DEGREES)
    assert rep.extra["decreasing"]
    assert -0.12 < rep.slope < -0.05
    assert rep.extra["reference_slope"] == KAPPA_HAT


def test_l1_fit_on_short_range():
    rep = fit_l1_norm_exponent(SMALL_DEGREES)
    assert rep.extra["increasing"]
    assert 0.2 < rep.slope < 0.3


def test_fit_report_recomputable():
    rep = fit_l1_norm_exponent(SMALL_DEGREES)
    slope, intercept = np.polyfit(rep.x, rep.y, 1)
    assert rep.slope == pytest.approx(slope, abs=1e-12)
    assert rep.intercept == pytest.approx(intercept, abs=1e-12)
    assert rep.y == pytest.approx(np.log2(rep.values).tolist(), abs=0)
    d = rep.to_dict()
    assert [p["x"] for p in d["points"]] == rep.x
    assert d["spec"]["degrees"] == SMALL_DEGREES


def test_fit_report_is_reproducible():
    a = fit_sup_norm_exponent(SMALL_DEGREES).to_dict()
    b = fit_sup_norm_exponent(SMALL_DEGREES).to_dict()
    assert a == b


def test_bmo_fit_reports_both_quantities():
    rep = fit_bmo_norm_exponent([16, 32, 64, 128])
    sups = [sup_norm_hermite(k) for k in (16, 32, 64, 128)]
    # the oscillation seminorm is at most twice the sup norm
    assert all(0 < v <= 2 * s for v, s in zip(rep.values, sups))
    assert np.isfinite(rep.slope)


def test_envelope_slope():
    assert envelope_slope(2.0) == pytest.approx(-(2.0 - 7 / 4 + 1 / 12))
    assert envelope_slope(5.0, n=2) == pytest.approx(-(5.0 - 7 / 2 + 1 / 12))


def test_block_decay_slope_invariant_under_scaling():
    m = builtin_symbol("oscillating-it")
    a = block_decay_experiment(m, K=5, probes=6)
    b = block_decay_experiment(m.scaled(10.0), K=5, probes=6)
    shift = np.array(b.y) - np.array(a.y)
    assert np.abs(shift - math.log2(10)).max() <= 1e-12
    assert b.slope == pytest.approx(a.slope, abs=1e-12)


def test_block_decay_degenerate_symbol_is_flagged():
    zero = Symbol.multiplier(lambda nu: np.zeros(len(nu)))
    rep = block_decay_experiment(zero, K=4, probes=4)
    assert rep.degenerate
    assert rep.extra["pass"] is None


def test_block_decay_slope_within_envelope():
    rep = block_decay_experiment(builtin_symbol("oscillating-it"), K=8, probes=64)
    assert rep.extra["slope_within_envelope"]
    assert rep.slope <= rep.extra["envelope_slope"] + 0.5


@pytest.mark.xfail(strict=True, reason="block norms of a unimodular symbol stay of order one, "
                   "so a decaying envelope anchored at k=2 cannot dominate them")
def test_block_decay_identity_below_envelope():
    rep = block_decay_experiment(builtin_symbol("const1"), K=8, probes=64)
    assert rep.extra["below_envelope"]


def test_linf_probe_of_zero_symbol():
    zero = Symbol.multiplier(lambda nu: np.zeros(len(nu)))
    rep = linf_bmo_probe(zero, probes=16)
    assert rep.ratio == 0.0 and rep.constant == 0.0


def test_linf_probe_band_projection_is_bounded():
    rep = linf_bmo_probe(builtin_symbol("const1"), probes=64)
    assert rep.bounded and 0 < rep.ratio < math.inf
    assert rep.ratio <= rep.constant * (rep.symbol_sup + rep.ci_norm) * (1 + 1e-12)
    assert rep.probes_used >= 64


def test_linf_probe_stable_under_doubling():
    m = builtin_symbol("oscillating-it")
    a = linf_bmo_probe(m, probes=64)
    b = linf_bmo_probe(m, probes=128)
    assert math.isfinite(b.ratio)
    assert abs(b.ratio - a.ratio) <= 0.1 * a.ratio


def test_linf_probe_report_is_reproducible():
    m = builtin_symbol("spatial-sin")
    assert linf_bmo_probe(m, probes=16, seed=7).to_dict() == linf_bmo_probe(m, probes=16, seed=7).to_dict()
