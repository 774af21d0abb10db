import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hermite_bmo.hermite import Grid, HermiteCoefficients, SampledFunction, count_multi_indices
from hermite_bmo.reports import (
    FitReport,
    coefficients_from_dict,
    coefficients_to_dict,
    dumps,
    fit_line,
    sampled_from_csv,
    sampled_to_csv,
)


def test_dumps_handles_numpy_and_non_finite():
    text = dumps({"a": np.float64(1.5), "b": np.arange(3), "c": math.nan, "d": -math.inf, "e": np.bool_(True), 2: 1})
    data = json.loads(text)
    assert data == {"a": 1.5, "b": [0, 1, 2], "c": "nan", "d": "-inf", "e": True, "2": 1}
    # sorted keys make the output independent of insertion order
    assert dumps({"x": 1, "y": 2}) == dumps({"y": 2, "x": 1})


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_dumps_round_trips_floats(v):
    assert json.loads(dumps({"v": v}))["v"] == v


def test_fit_line_exact():
    slope, intercept, rms = fit_line([0, 1, 2, 3], [1, 3, 5, 7])
    assert (slope, intercept) == pytest.approx((2.0, 1.0), abs=1e-14)
    assert rms < 1e-14


def test_fit_report_degenerate_with_one_point():
    rep = FitReport.from_points([1.0], [2.0], {})
    assert rep.degenerate and math.isnan(rep.slope)
    assert rep.to_dict()["slope"] == "nan"


@pytest.mark.parametrize("n,M", [(1, 7), (2, 5), (3, 4)])
@pytest.mark.parametrize("complex_", [False, True])
def test_sampled_csv_round_trip(tmp_path, n, M, complex_):
    g = Grid(n, 2.5, M)
    rng = np.random.default_rng(n)
    vals = rng.standard_normal(g.shape)
    if complex_:
        vals = vals + 1j * rng.standard_normal(g.shape)
    path = tmp_path / "f.csv"
    sampled_to_csv(SampledFunction(g, vals), path)
    back = sampled_from_csv(path)
    assert back.grid.shape == g.shape and back.grid.L == g.L
    assert np.array_equal(back.values, vals)
    assert np.iscomplexobj(back.values) == complex_
    assert path.read_text().splitlines()[0] == ",".join([f"x{j + 1}" for j in range(n)] + ["re", "im"])


def test_sampled_csv_rejects_bad_input(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        sampled_from_csv(bad)
    ragged = tmp_path / "ragged.csv"
    ragged.write_text("x1,x2,re,im\n0,0,1,0\n0,1,1,0\n1,0,1,0\n")
    with pytest.raises(ValueError):
        sampled_from_csv(ragged)
    uneven = tmp_path / "uneven.csv"
    uneven.write_text("x1,re,im\n-1,0,0\n0.2,0,0\n1,0,0\n")
    with pytest.raises(ValueError):
        sampled_from_csv(uneven)


@pytest.mark.parametrize("n,N", [(1, 9), (2, 5), (3, 3)])
def test_coefficient_dict_round_trip(n, N):
    rng = np.random.default_rng(N)
    size = count_multi_indices(n, N)
    real = HermiteCoefficients(n, N, rng.standard_normal(size))
    cplx = real.with_coeffs(real.coeffs + 1j * rng.standard_normal(size))
    for c in (real, cplx):
        d = json.loads(dumps(coefficients_to_dict(c)))
        back = coefficients_from_dict(d)
        assert back.N == N and back.n == n
        assert np.array_equal(back.coeffs, c.coeffs)
        assert np.iscomplexobj(back.coeffs) == np.iscomplexobj(c.coeffs)
