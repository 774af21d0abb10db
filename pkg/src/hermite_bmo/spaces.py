"""Grid norms: L^p, the BMO seminorm, Riesz transforms, H^1 and the Poisson maximal function."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from . import _backend
from .hermite import Grid, SampledFunction


class BoundaryDecayWarning(UserWarning):
    """Input does not decay at the grid boundary; periodic FFT results are unreliable."""


def lp_norm(f: SampledFunction, p: float) -> float:
    """``(h^n sum |f|^p)^(1/p)``; ``p = inf`` gives ``max |f|``."""
    if p < 1:
        raise ValueError("p must be >= 1")
    a = np.abs(f.values)
    if math.isinf(p):
        return float(a.max())
    return float((np.sum(a**p) * f.grid.cell_volume) ** (1.0 / p))


def abs_integral_1d(values, h: float) -> float:
    """Trapezoid rule for ``int |f|`` with sign changes located by linear interpolation.

    Plain trapezoid sums of ``|f|`` lose second order accuracy at every zero
    crossing; splitting those cells at the interpolated zero restores it.
    """
    v = np.asarray(values, dtype=float)
    a, b = np.abs(v[:-1]), np.abs(v[1:])
    cells = 0.5 * h * (a + b)
    cross = (v[:-1] * v[1:]) < 0
    s = a[cross] + b[cross]
    cells[cross] = 0.5 * h * (a[cross] ** 2 + b[cross] ** 2) / s
    return float(cells.sum())


# --------------------------------------------------------------------------
# BMO


@dataclass(frozen=True)
class CubeFamily:
    """Grid-aligned cubes at dyadic levels with every anchor position.

    Level ``j`` has ``c_j = floor((M-1)/2^j)`` cells per side
    (``c_j + 1`` grid points), down to ``min_cells``.
    """

    grid: Grid
    min_cells: int = 4
    max_levels: int | None = None
    stride: int = 1

    def __post_init__(self):
        if self.min_cells < 1:
            raise ValueError("cubes need at least one cell")
        if self.stride < 1:
            raise ValueError("anchor stride must be positive")
        if self.grid.M - 1 < self.min_cells:
            raise ValueError(f"grid has {self.grid.M - 1} cells per axis, fewer than {self.min_cells}")

    @property
    def cells(self) -> list:
        out, j = [], 0
        while (c := (self.grid.M - 1) >> j) >= self.min_cells:
            out.append(c)
            j += 1
            if self.max_levels is not None and j >= self.max_levels:
                break
        return out

    @property
    def widths(self) -> list:
        """Points per side at each level."""
        return [c + 1 for c in self.cells]

    @property
    def sides(self) -> list:
        return [c * self.grid.h for c in self.cells]

    def anchors_per_axis(self, width: int) -> int:
        return (self.grid.M - width) // self.stride + 1

    @property
    def anchor_count(self) -> int:
        return int(sum(self.anchors_per_axis(w) ** self.grid.n for w in self.widths))

    def cube(self, level: int, anchor) -> dict:
        corner = [-self.grid.L + int(a) * self.grid.h for a in anchor]
        return {"corner": corner, "side": self.sides[level]}

    def spec(self) -> dict:
        return {"levels": self.sides, "widths": self.widths, "anchors": self.anchor_count, "stride": self.stride}


@dataclass(frozen=True)
class BmoEstimate:
    value: float
    level: int
    anchor: tuple
    width: int
    family: CubeFamily
    per_level: tuple = ()

    @property
    def cube(self) -> dict:
        return self.family.cube(self.level, self.anchor)

    def slices(self) -> tuple:
        return tuple(slice(a, a + self.width) for a in self.anchor)

    def to_dict(self) -> dict:
        return {
            "value": float(self.value),
            "cube": self.cube,
            "levels": self.family.sides,
            "anchors": self.family.anchor_count,
        }


def mean_oscillation(values, slices) -> float:
    """``mean |f - f_Q|`` over the grid points of one cube."""
    block = np.asarray(values)[tuple(slices)]
    return float(np.abs(block - block.mean()).mean())


def bmo_seminorm(f: SampledFunction, family: CubeFamily | None = None) -> BmoEstimate:
    """Largest discrete mean oscillation over the cube family."""
    family = family or CubeFamily(f.grid)
    if family.grid != f.grid:
        raise ValueError("cube family was built for a different grid")
    vals = np.asarray(f.values)
    if not np.iscomplexobj(vals):
        vals = vals.astype(float)
    # oscillation ignores constants; removing one sample makes constant input exactly 0
    vals = np.ascontiguousarray(vals - vals.flat[0])
    best = (-1.0, 0, (0,) * f.grid.n, family.widths[0])
    per_level = []
    for level, w in enumerate(family.widths):
        means = _backend.window_means(vals, w)
        if family.stride > 1:
            sl = tuple(slice(None, None, family.stride) for _ in range(vals.ndim))
            osc = _strided_scan(vals, means[sl], w, family.stride)
        else:
            osc = _backend.mean_oscillation_scan(vals, np.ascontiguousarray(means), w)
        i = int(np.argmax(osc))
        per_level.append(float(osc.flat[i]))
        # argmax lands on a NaN first; keep it so non-finite input is reported, not skipped
        if osc.flat[i] > best[0] or np.isnan(osc.flat[i]):
            anchor = tuple(int(a) * family.stride for a in np.unravel_index(i, osc.shape))
            best = (float(osc.flat[i]), level, anchor, w)
    return BmoEstimate(best[0], best[1], best[2], best[3], family, tuple(per_level))


def _strided_scan(vals, means, w, stride):
    out = np.empty(means.shape)
    for idx in np.ndindex(*means.shape):
        sl = tuple(slice(i * stride, i * stride + w) for i in idx)
        out[idx] = np.abs(vals[sl] - means[idx]).mean()
    return out


# --------------------------------------------------------------------------
# Riesz transforms and H^1


def boundary_ratio(f: SampledFunction) -> float:
    """``max |f| on the boundary / max |f|``."""
    a = np.abs(f.values)
    top = a.max()
    if top == 0:
        return 0.0
    edge = 0.0
    for ax in range(a.ndim):
        edge = max(edge, np.take(a, 0, axis=ax).max(), np.take(a, -1, axis=ax).max())
    return float(edge / top)


def _padded_riesz(f: SampledFunction, axes, pad):
    if pad < 1:
        raise ValueError("padding factor must be >= 1")
    if boundary_ratio(f) > 1e-6:
        warnings.warn("input does not decay at the grid boundary", BoundaryDecayWarning, stacklevel=3)
    g = f.grid
    P = pad * g.M
    fhat = np.fft.fftn(f.values, s=(P,) * g.n, axes=tuple(range(g.n)))
    freqs = np.meshgrid(*([np.fft.fftfreq(P, d=g.h)] * g.n), indexing="ij", sparse=True)
    r = np.sqrt(sum(q**2 for q in freqs))
    safe = np.where(r == 0, 1.0, r)
    nyq = np.zeros(P, dtype=bool)
    if P % 2 == 0:
        nyq[P // 2] = True
    out = []
    for j in axes:
        # zero at the origin and on the Nyquist plane of axis j keeps the kernel exactly odd
        shape = [1] * g.n
        shape[j] = P
        mult = np.where((r == 0) | nyq.reshape(shape), 0.0, 1j * freqs[j] / safe)
        full = np.fft.ifftn(mult * fhat, axes=tuple(range(g.n)))
        out.append(full.real if not np.iscomplexobj(f.values) else full)
    return out


def riesz_transform(f: SampledFunction, j: int, pad: int = 4) -> SampledFunction:
    """Riesz transform along axis ``j`` (Fourier multiplier ``i xi_j / |xi|``, 0 at the origin).

    The input is zero padded by ``pad`` per axis before the FFT.  Emits a
    :class:`BoundaryDecayWarning` when the boundary values exceed ``1e-6``
    of the maximum.
    """
    if not 0 <= j < f.grid.n:
        raise ValueError(f"axis {j} out of range for dimension {f.grid.n}")
    full = _padded_riesz(f, [j], pad)[0]
    crop = tuple(slice(0, f.grid.M) for _ in range(f.grid.n))
    return SampledFunction(f.grid, full[crop])


def h1_norm(f: SampledFunction, pad: int = 4) -> float:
    """``||f||_1 + sum_j ||R_j f||_1``.

    Riesz transforms are integrated over the whole padded box, since they
    decay only algebraically outside the support of ``f``.
    """
    total = lp_norm(f, 1)
    for rf in _padded_riesz(f, range(f.grid.n), pad):
        total += float(np.abs(rf).sum() * f.grid.cell_volume)
    return total


# --------------------------------------------------------------------------
# Poisson maximal function and duality


def default_t_grid(grid: Grid, count: int = 16) -> np.ndarray:
    return np.geomspace(grid.h, grid.L, count)


def poisson_kernel(grid: Grid, t: float) -> np.ndarray:
    """Discrete ``t / (t^2 + |x|^2)^((n+1)/2)`` on offsets ``-(M-1)..(M-1)``, unit sum."""
    off = np.arange(-(grid.M - 1), grid.M) * grid.h
    r2 = sum(np.meshgrid(*([off**2] * grid.n), indexing="ij", sparse=True))
    k = t / (t * t + r2) ** ((grid.n + 1) / 2.0)
    return k / k.sum()


def poisson_maximal(f: SampledFunction, ts=None) -> SampledFunction:
    """``max_t |P_t * f|`` over the t-grid (default: 16 log-spaced scales from h to L)."""
    ts = default_t_grid(f.grid) if ts is None else np.atleast_1d(np.asarray(ts, dtype=float))
    if ts.size == 0 or np.any(ts <= 0):
        raise ValueError("t-grid must be nonempty and positive")
    out = np.zeros(f.grid.shape)
    for t in ts:
        conv = fftconvolve(f.values, poisson_kernel(f.grid, float(t)), mode="same")
        np.maximum(out, np.abs(conv), out=out)
    return SampledFunction(f.grid, out)


def duality_pairing(f: SampledFunction, g: SampledFunction) -> complex | float:
    """Grid quadrature of ``int f g``."""
    if f.grid != g.grid:
        raise ValueError("functions live on different grids")
    val = np.sum(f.values * g.values) * f.grid.cell_volume
    return complex(val) if np.iscomplexobj(val) else float(val)


def _bump(r):
    out = np.zeros_like(r)
    inside = r < 1
    out[inside] = np.exp(-1.0 / (1.0 - r[inside] ** 2))
    return out


def atom(grid: Grid, center, radius: float, axis: int = 0) -> SampledFunction:
    """Mean-zero smooth bump pair normalized to ``||a||_inf = 1/|Q|``.

    The two bumps of radius ``radius`` sit at ``center -+ radius e_axis``,
    inside the cube of side ``4 radius`` centered at ``center``.
    """
    coords = grid.coordinates()
    center = np.broadcast_to(np.asarray(center, dtype=float), (grid.n,))
    shift = np.zeros(grid.n)
    shift[axis] = radius

    def bump_at(c):
        r = np.sqrt(sum((x - cj) ** 2 for x, cj in zip(coords, c))) / radius
        return _bump(r)

    vals = bump_at(center + shift) - bump_at(center - shift)
    support = vals != 0
    if not support.any():
        raise ValueError("atom radius is below grid resolution")
    vals[support] -= vals.sum() / support.sum()
    top = np.abs(vals).max()
    return SampledFunction(grid, vals / top / (4.0 * radius) ** grid.n)


def atom_test_set(grid: Grid, count: int, seed: int) -> list:
    """``count`` atoms with random centers and radii; prefixes agree across counts."""
    out = []
    lo = 4.0 * grid.h
    hi = grid.L / 8.0
    for i in range(count):
        rng = np.random.default_rng([seed, i])
        radius = float(np.exp(rng.uniform(math.log(lo), math.log(hi))))
        span = grid.L / 2.0
        center = rng.uniform(-span, span, grid.n)
        out.append(atom(grid, center, radius, axis=int(rng.integers(grid.n))))
    return out


def bmo_test_functions(grid: Grid) -> dict:
    """Reference BMO functions: ``sign(x_1)``, clipped ``ln|x|`` and a smooth bump."""
    coords = grid.coordinates()
    r = np.sqrt(sum(c**2 for c in coords))
    r = np.maximum(r, grid.h / 2.0)
    return {
        "sign": SampledFunction(grid, np.sign(coords[0])),
        "log": SampledFunction(grid, np.log(r)),
        "gauss": SampledFunction(grid, np.exp(-r**2)),
    }


def pairing_constant(fs, gs, family_for=None) -> dict:
    """``max |int f g| / (||f||_* ||g||_{H^1})`` over all test pairs."""
    best, arg = 0.0, None
    bmo = {name: bmo_seminorm(f).value for name, f in fs.items()}
    h1 = [h1_norm(g) for g in gs]
    for name, f in fs.items():
        for i, g in enumerate(gs):
            denom = bmo[name] * h1[i]
            if denom == 0:
                continue
            c = abs(duality_pairing(f, g)) / denom
            if c > best:
                best, arg = c, (name, i)
    return {"constant": best, "pair": arg, "bmo": bmo, "atoms": len(gs)}
