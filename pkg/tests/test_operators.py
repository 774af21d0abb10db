import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hermite_bmo.hermite import Grid, HermiteCoefficients, SampledFunction, count_multi_indices, eval_hermite_1d, synthesize
from hermite_bmo.operators import (
    BlockProber,
    PseudoMultiplier,
    apply,
    decompose,
    estimate_block_operator_norms,
    extract_symbol,
)
from hermite_bmo.symbols import BUILTIN_SYMBOLS, Symbol, builtin_symbol, make_window_family, tabulated_symbol

FAMILY = make_window_family()


def random_coeffs(n, N, seed, complex_=False):
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(count_multi_indices(n, N))
    if complex_:
        c = c + 1j * rng.standard_normal(c.size)
    return HermiteCoefficients(n, N, c)


# --------------------------------------------------------------------------
# application


def test_identity_symbol_reproduces_band_limited_input():
    g = Grid.default(40, 1)
    c = random_coeffs(1, 40, 0)
    f = synthesize(c, g)
    out = apply(PseudoMultiplier(builtin_symbol("const1"), 40, g), f)
    assert np.abs(out.values - f.values).max() <= 1e-12 * np.abs(f.values).max()


def test_rank_one_projection():
    g = Grid.default(20, 1)
    c = random_coeffs(1, 20, 1)
    out = apply(PseudoMultiplier(builtin_symbol("projector0"), 20, g), c)
    assert np.allclose(out.values, c.coeffs[0] * eval_hermite_1d(0, g.axis), atol=1e-15)


def test_spatial_symbol_on_single_mode():
    g = Grid.default(8, 1)
    out = apply(PseudoMultiplier(builtin_symbol("spatial-sin"), 8, g), HermiteCoefficients.unit(2, 8))
    expected = np.sin(g.axis) * eval_hermite_1d(2, g.axis) / 5
    assert np.abs(out.values - expected).max() <= 1e-10


def test_multiplier_path_matches_general_path():
    g = Grid.default(16, 2, M=41)
    m = builtin_symbol("oscillating-it", 2)
    as_general = Symbol.general(lambda x, nu: m.func(nu[0]) * np.ones(x.shape[0])[:, None])
    c = random_coeffs(2, 16, 5)
    a = apply(PseudoMultiplier(m, 16, g), c).values
    b = apply(PseudoMultiplier(as_general, 16, g), c).values
    assert np.abs(a - b).max() <= 1e-12


def test_degree_handling():
    g = Grid.default(8, 1)
    T = PseudoMultiplier(builtin_symbol("const1"), 8, g)
    with pytest.raises(ValueError):
        apply(T, random_coeffs(1, 12, 2))
    # a zero tail above the cap is dropped, lower caps are padded
    c = HermiteCoefficients.unit(3, 12)
    assert np.allclose(apply(T, c).values, eval_hermite_1d(3, g.axis), atol=1e-15)
    assert np.allclose(apply(T, HermiteCoefficients.unit(3)).values, eval_hermite_1d(3, g.axis), atol=1e-15)
    with pytest.raises(ValueError):
        apply(T, HermiteCoefficients.unit((1, 1)))
    with pytest.raises(TypeError):
        apply(T, np.zeros(9))


@given(st.integers(0, 2**32 - 1), st.floats(-10, 10), st.floats(-10, 10))
def test_linearity(seed, a, b):
    g = Grid.default(24, 1)
    T = PseudoMultiplier(builtin_symbol("spatial-sin"), 24, g)
    f, h = random_coeffs(1, 24, seed), random_coeffs(1, 24, seed + 1)
    lhs = apply(T, f.with_coeffs(a * f.coeffs + b * h.coeffs)).values
    rhs = a * apply(T, f).values + b * apply(T, h).values
    assert np.abs(lhs - rhs).max() <= 1e-12 * (1 + abs(a) + abs(b)) * max(1.0, np.abs(rhs).max())


@pytest.mark.parametrize("name", BUILTIN_SYMBOLS)
@pytest.mark.parametrize("nu", [(0, 0), (3, 1), (0, 7)])
def test_diagonal_action(name, nu):
    g = Grid.default(8, 2, M=33)
    m = builtin_symbol(name, 2)
    out = apply(PseudoMultiplier(m, 8, g), HermiteCoefficients.unit(nu, 8)).values.ravel()
    phi = synthesize(HermiteCoefficients.unit(nu, 8), g).values.ravel()
    pts = g.points()
    mv = m.evaluate(pts if m.depends_on_x else None, np.array([nu]))[:, 0]
    assert np.abs(out - mv * phi).max() <= 1e-14


# --------------------------------------------------------------------------
# block decomposition


@pytest.mark.parametrize("name", BUILTIN_SYMBOLS)
def test_reassembly(name):
    N = 64
    g = Grid.default(N, 1)
    T = PseudoMultiplier(builtin_symbol(name), N, g)
    D = decompose(T, FAMILY, K=7)
    c = random_coeffs(1, N, 9, complex_=True)
    assert np.abs(D.reassemble(c).values - apply(T, c).values).max() <= 1e-9


def test_block_parts_and_caps():
    T = PseudoMultiplier(builtin_symbol("const1"), 40, Grid.default(40, 1))
    D = decompose(T, FAMILY, K=6)
    assert [k for k, _ in D.parts()] == [0, 2, 3, 4, 5, 6]
    assert D.low.N == 4
    assert {k: b.N for k, b in D.blocks.items()} == {2: 8, 3: 16, 4: 32, 5: 40, 6: 40}
    # default K covers the cap
    assert 2 ** (decompose(T).K - 1) >= 40


@pytest.mark.parametrize("k", [2, 3, 4])
def test_block_support(k):
    N = 2 ** (k + 2)
    g = Grid.default(N, 1)
    m = builtin_symbol("oscillating-it")
    D = decompose(PseudoMultiplier(m, N, g), FAMILY, K=k + 1)
    block = D.blocks[k]
    edge = apply(block, HermiteCoefficients.unit(2 ** (k + 1)))
    assert np.abs(edge.values).max() == 0.0
    # the block only sees |nu| <= 2^{k+1}, so a higher mode is rejected outright
    with pytest.raises(ValueError):
        apply(block, HermiteCoefficients.unit(2 ** (k + 2)))
    centre = 2**k
    out = apply(block, HermiteCoefficients.unit(centre))
    expected = m.at(None, centre) * eval_hermite_1d(centre, g.axis)
    assert np.abs(out.values - expected).max() <= 1e-14


# --------------------------------------------------------------------------
# symbol extraction


def test_extract_identity():
    g = Grid.default(10, 1)
    tab = extract_symbol(lambda f: apply(PseudoMultiplier(builtin_symbol("const1"), 10, g), f), 6, g)
    assert np.allclose(tab.values[tab.defined], 1.0, atol=1e-12)
    assert np.isnan(tab.values[~tab.defined]).all()
    assert tab.eps == pytest.approx(1e-8 * np.abs(eval_hermite_1d(6, g.axis)).max())


def test_extract_spectral_inverse():
    g = Grid.default(16, 1)
    m = Symbol.multiplier(lambda nu: 1.0 / (2 * nu.sum(axis=-1) + 1))
    T = PseudoMultiplier(m, 16, g)
    for nu in (0, 5, 16):
        tab = extract_symbol(T, nu, g)
        assert np.abs(tab.values[tab.defined] - 1 / (2 * nu + 1)).max() <= 1e-10


def test_extract_multiplication_operator():
    g = Grid.default(6, 1)
    nu = 3
    phi = eval_hermite_1d(nu, g.axis)
    A = lambda f: SampledFunction(g, np.sin(g.axis) * f.values)
    tab = extract_symbol(A, nu, g, input="samples")
    assert np.abs(tab.values[tab.defined] - np.sin(g.axis)[tab.defined]).max() <= 1e-12
    # zeros of phi_3 on the grid are excluded
    assert not tab.defined[np.argmin(np.abs(phi))] or abs(phi).min() > tab.eps


def test_extract_errors():
    g = Grid(1, 1.0, 11)
    with pytest.raises(ValueError):
        extract_symbol(lambda f: f, (1, 1), g)
    with pytest.raises(ValueError):
        extract_symbol(lambda f: synthesize(f, g), 0, g, eps=10.0)
    with pytest.raises(ValueError):
        extract_symbol(lambda f: f, 0, g, input="other")


def test_extract_tabulated_general_round_trip():
    g = Grid(2, 3.0, 9)
    rng = np.random.default_rng(4)
    nus = np.array([[0, 0], [1, 0], [0, 1], [2, 1]])
    entries = [
        {"x": p.tolist(), "nu": nu.tolist(), "re": float(rng.standard_normal()), "im": float(rng.standard_normal())}
        for p in g.points()
        for nu in nus
    ]
    m = tabulated_symbol({"kind": "general", "entries": entries})
    T = PseudoMultiplier(m, 3, g)
    for nu in nus:
        tab = extract_symbol(T, tuple(nu), g)
        ref = m.evaluate(g.points(), nu[None])[:, 0].reshape(g.shape)
        assert np.abs(tab.values[tab.defined] - ref[tab.defined]).max() <= 1e-10
    assert tab.to_dict()["kind"] == "general"


# --------------------------------------------------------------------------
# block operator norms


def small_decomposition(m, K=4):
    N = 2 ** (K + 1)
    g = Grid.default(N, 1, points_per_unit=math.sqrt(2 * N + 1))
    return decompose(PseudoMultiplier(m, N, g), FAMILY, K)


def test_block_norms_of_zero_symbol():
    zero = Symbol.multiplier(lambda nu: np.zeros(len(nu)))
    rep = estimate_block_operator_norms(small_decomposition(zero), probes=6, seed=1)
    assert all(b["norm_lb"] == 0 for b in rep.blocks)
    assert rep.degenerate and math.isnan(rep.slope)


def test_block_norms_scale_linearly():
    m = builtin_symbol("oscillating-it")
    a = estimate_block_operator_norms(small_decomposition(m), probes=8, seed=3)
    b = estimate_block_operator_norms(small_decomposition(m.scaled(2.0)), probes=8, seed=3)
    assert [2 * v for v in a.values] == pytest.approx(b.values, rel=1e-12)
    assert b.slope == pytest.approx(a.slope, abs=1e-12)


def test_block_norm_report_layout():
    rep = estimate_block_operator_norms(small_decomposition(builtin_symbol("const1")), probes=5, seed=2)
    d = rep.to_dict()
    for key in ("blocks", "slope", "intercept", "residual", "seed"):
        assert key in d
    assert [b["k"] for b in d["blocks"]] == [2, 3, 4]
    assert all({"k", "norm_lb", "probes_used"} <= set(b) for b in d["blocks"])
    assert all(b["probes_used"] == 5 for b in d["blocks"])


def test_block_norms_reject_empty_probe_set():
    with pytest.raises(ValueError):
        estimate_block_operator_norms(small_decomposition(builtin_symbol("const1")), probes=0)


def test_probe_prefix_property():
    # probe i is drawn from its own stream, so more probes never lower the bound
    T = PseudoMultiplier(builtin_symbol("spatial-sin"), 16, Grid.default(16, 1, points_per_unit=6.0))
    few = BlockProber(T).run(6, seed=11, adversarial_rounds=0).best
    many = BlockProber(T).run(12, seed=11, adversarial_rounds=0).best
    assert many >= few
