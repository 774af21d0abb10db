"""Serialization helpers and the structured result types shared across modules."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .hermite import Grid, HermiteCoefficients, SampledFunction

DEFAULT_SEED = 0x5EED


def _clean(obj):
    # numpy scalars/arrays and non-finite floats into plain JSON values
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def dumps(obj) -> str:
    """Deterministic JSON text (sorted keys, shortest round-trip floats)."""
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def write_points_csv(path, xs, ys) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y"])
        for x, y in zip(xs, ys):
            w.writerow([repr(float(x)), repr(float(y))])


def sampled_to_csv(f: SampledFunction, path) -> None:
    """CSV with header ``x1,...,xn,re,im``, one row per grid point."""
    n = f.grid.n
    pts = f.grid.points()
    vals = np.asarray(f.values, dtype=complex).ravel()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{j + 1}" for j in range(n)] + ["re", "im"])
        for p, v in zip(pts, vals):
            w.writerow([repr(float(c)) for c in p] + [repr(float(v.real)), repr(float(v.imag))])


def sampled_from_csv(path) -> SampledFunction:
    """Inverse of :func:`sampled_to_csv`; the rows must cover a uniform tensor grid."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    n = len(header) - 2
    if n < 1 or header[-2:] != ["re", "im"] or header[:n] != [f"x{j + 1}" for j in range(n)]:
        raise ValueError(f"{path}: header must be x1,...,xn,re,im")
    data = np.array(body, dtype=float)
    M = round(len(body) ** (1.0 / n))
    if M**n != len(body):
        raise ValueError(f"{path}: {len(body)} rows do not form an M^{n} grid")
    L = float(data[:, :n].max())
    grid = Grid(n, L, M)
    order = np.lexsort(data[:, :n].T[::-1])
    if not np.allclose(data[order, :n], grid.points(), atol=1e-9 * max(1.0, L)):
        raise ValueError(f"{path}: points are not a uniform grid on [-L, L]^{n}")
    vals = data[order, n] + 1j * data[order, n + 1]
    if not vals.imag.any():
        vals = vals.real
    return SampledFunction(grid, vals)


def coefficients_to_dict(c: HermiteCoefficients) -> dict:
    vals = np.asarray(c.coeffs, dtype=complex)
    return {
        "n": c.n,
        "N": c.N,
        "coeffs": [{"nu": nu, "re": v.real, "im": v.imag} for nu, v in zip(c.indices.tolist(), vals)],
    }


def coefficients_from_dict(data: dict) -> HermiteCoefficients:
    n, N = int(data["n"]), int(data["N"])
    values = {tuple(e["nu"]): complex(e.get("re", 0.0), e.get("im", 0.0)) for e in data["coeffs"]}
    c = HermiteCoefficients.from_dict(n, N, values)
    if not np.iscomplexobj(c.coeffs) or c.coeffs.imag.any():
        return c
    return c.with_coeffs(c.coeffs.real)


def fit_line(x, y):
    """Unweighted least squares ``y ~ slope * x + intercept``; returns (slope, intercept, rms)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    A = np.stack([x, np.ones_like(x)], axis=1)
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    rms = float(np.sqrt(np.mean((A @ np.array([slope, intercept]) - y) ** 2)))
    return float(slope), float(intercept), rms


@dataclass
class FitReport:
    """Log-log fit of measured values.

    ``x`` and ``y`` hold the abscissae and ordinates actually fitted
    (already in log scale); ``values`` keeps the raw measurements.
    """

    x: list
    y: list
    slope: float
    intercept: float
    residual: float
    spec: dict
    seed: int | None = None
    values: list = field(default_factory=list)
    blocks: list | None = None
    degenerate: bool = False
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_points(cls, x, y, spec, seed=None, values=None, **kw) -> "FitReport":
        x = [float(v) for v in x]
        y = [float(v) for v in y]
        if len(x) >= 2:
            slope, intercept, rms = fit_line(x, y)
            degenerate = False
        else:
            slope = intercept = rms = math.nan
            degenerate = True
        return cls(x, y, slope, intercept, rms, spec, seed, list(values or []), degenerate=degenerate, **kw)

    def to_dict(self) -> dict:
        out = {
            "slope": self.slope,
            "intercept": self.intercept,
            "residual": self.residual,
            "seed": self.seed,
            "spec": self.spec,
            "points": [{"x": a, "y": b} for a, b in zip(self.x, self.y)],
            "values": self.values,
            "degenerate": self.degenerate,
        }
        if self.blocks is not None:
            out["blocks"] = self.blocks
        out.update(self.extra)
        return _clean(out)


@dataclass
class NormReport:
    """Empirical operator-norm probe: ``ratio = max_f ||T f||_* / ||f||_inf``."""

    ratio: float
    symbol_sup: float
    ci_norm: float
    constant: float
    probes_used: int
    seed: int
    spec: dict
    per_kind: dict = field(default_factory=dict)
    bounded: bool = True

    def to_dict(self) -> dict:
        return _clean({
            "ratio": self.ratio,
            "symbol_sup": self.symbol_sup,
            "ci_norm": self.ci_norm,
            "bound": self.symbol_sup + self.ci_norm,
            "constant": self.constant,
            "bounded": self.bounded,
            "probes_used": self.probes_used,
            "seed": self.seed,
            "spec": self.spec,
            "per_kind": self.per_kind,
        })
