"""Hermite functions, Gauss-Hermite quadrature and the Fourier-Hermite transform.

Hermite functions are evaluated with the normalized three-term recurrence

    phi_{k+1}(x) = x sqrt(2/(k+1)) phi_k(x) - sqrt(k/(k+1)) phi_{k-1}(x),
    phi_0(x) = pi^{-1/4} exp(-x^2/2),

carried as ``p * 2**e`` per point so that neither the Gaussian factor nor the
growth in the classically forbidden region over- or underflows prematurely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence, Union

import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import _backend

MAX_DIM = 3
MAX_QUADRATURE_ORDER = 2**14


def _frozen(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


@lru_cache(maxsize=64)
def _multi_indices(n, N):
    out = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            out.append(prefix + (remaining,))
            return
        for first in range(remaining, -1, -1):
            rec(prefix + (first,), remaining - first, slots - 1)

    for d in range(N + 1):
        rec((), d, n)
    return _frozen(np.array(out, dtype=np.int64).reshape(-1, n))


def multi_indices(n: int, N: int) -> np.ndarray:
    """All multi-indices of dimension ``n`` with order at most ``N``.

    Ordered by order, then lexicographically descending within an order,
    e.g. ``(0,0), (1,0), (0,1), (2,0), ...`` for ``n = 2``.
    """
    if not 1 <= n <= MAX_DIM:
        raise ValueError(f"dimension must be in 1..{MAX_DIM}, got {n}")
    if N < 0:
        raise ValueError("degree cap must be nonnegative")
    return _multi_indices(int(n), int(N))


def count_multi_indices(n: int, N: int) -> int:
    return math.comb(N + n, n)


@dataclass(frozen=True)
class MultiIndex:
    entries: tuple

    def __post_init__(self):
        entries = tuple(int(e) for e in self.entries)
        if any(e < 0 for e in entries):
            raise ValueError(f"multi-index entries must be nonnegative: {entries}")
        object.__setattr__(self, "entries", entries)

    @property
    def order(self) -> int:
        return sum(self.entries)

    @property
    def dim(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)


def as_multi_index(nu) -> MultiIndex:
    if isinstance(nu, MultiIndex):
        return nu
    if np.isscalar(nu):
        return MultiIndex((int(nu),))
    return MultiIndex(tuple(nu))


@dataclass(frozen=True)
class Grid:
    """Uniform tensor grid with ``M`` points per axis on ``[-L, L]^n``."""

    n: int
    L: float
    M: int

    def __post_init__(self):
        if not 1 <= self.n <= MAX_DIM:
            raise ValueError(f"dimension must be in 1..{MAX_DIM}, got {self.n}")
        if not self.L > 0:
            raise ValueError("half-width L must be positive")
        if self.M < 2:
            raise ValueError("need at least 2 points per axis")

    @property
    def h(self) -> float:
        return 2.0 * self.L / (self.M - 1)

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(-self.L, self.L, self.M)

    @property
    def shape(self) -> tuple:
        return (self.M,) * self.n

    @property
    def size(self) -> int:
        return self.M**self.n

    @property
    def cell_volume(self) -> float:
        return self.h**self.n

    def coordinates(self) -> list:
        """Coordinate arrays (``indexing='ij'``), one per axis."""
        ax = self.axis
        return list(np.meshgrid(*([ax] * self.n), indexing="ij"))

    def points(self) -> np.ndarray:
        """All grid points as an array of shape (M**n, n)."""
        return np.stack([c.ravel() for c in self.coordinates()], axis=-1)

    @staticmethod
    def default_half_width(N: int, n: int) -> float:
        # turning point of the top mode plus its Airy layer plus slack
        lam = 2 * N + n
        return math.sqrt(lam) + 4.0 * lam ** (-1.0 / 6.0) + 2.0

    @classmethod
    def default(cls, N: int, n: int = 1, M: int | None = None, points_per_unit: float | None = None) -> "Grid":
        """Grid covering every ``phi_nu`` with ``|nu| <= N``.

        The default resolution is ``h ~ 0.5 / sqrt(2N+n)``, i.e. about a dozen
        points per local wavelength of the top mode.
        """
        L = cls.default_half_width(N, n)
        if M is None:
            if points_per_unit is None:
                points_per_unit = 2.0 * math.sqrt(2 * N + n)
            M = int(math.ceil(2 * L * points_per_unit)) + 1
        return cls(n, L, int(M))


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Hermite rule for ``int g(x) exp(-x^2) dx``.

    ``scaled_weights`` are ``weights * exp(nodes**2)``; they stay representable
    for every supported order and are what the transform uses, since
    ``int f phi_nu dx = sum_i scaled_weights[i] f(x_i) phi_nu(x_i)``.
    """

    nodes: np.ndarray
    weights: np.ndarray
    scaled_weights: np.ndarray
    order: int


@lru_cache(maxsize=32)
def gauss_hermite_rule(order: int) -> QuadratureRule:
    """Gauss-Hermite nodes and weights of the given order.

    Nodes come from the symmetric Jacobi matrix (Golub-Welsch), are polished
    by Newton steps on ``phi_order``, and the weights use the closed form
    ``w_i exp(x_i^2) = 1 / (order * phi_{order-1}(x_i)^2)``.
    """
    order = int(order)
    if order < 1:
        raise ValueError("quadrature order must be >= 1")
    if order > MAX_QUADRATURE_ORDER:
        raise ValueError(f"quadrature order {order} exceeds the stable limit {MAX_QUADRATURE_ORDER}")
    if order == 1:
        return QuadratureRule(_frozen([0.0]), _frozen([math.sqrt(math.pi)]), _frozen([math.sqrt(math.pi)]), 1)

    off = np.sqrt(np.arange(1, order) / 2.0)
    eig = eigh_tridiagonal(np.zeros(order), off, eigvals_only=True)
    half = order // 2
    # nonnegative half only; mirrored afterwards so the rule is exactly symmetric
    z = np.sort(eig)[order - half:]
    for _ in range(3):
        prev, cur = _backend.hermite_last_two(order, z)
        z = z - cur / (math.sqrt(2.0 * order) * prev)
    prev, _ = _backend.hermite_last_two(order, z)
    sw = 1.0 / (order * prev**2)
    if order % 2 == 1:
        p0, _ = _backend.hermite_last_two(order, np.zeros(1))
        sw0 = 1.0 / (order * p0[0] ** 2)
        nodes = np.concatenate([-z[::-1], [0.0], z])
        sw = np.concatenate([sw[::-1], [sw0], sw])
    else:
        nodes = np.concatenate([-z[::-1], z])
        sw = np.concatenate([sw[::-1], sw])
    weights = sw * np.exp(-nodes**2)
    return QuadratureRule(_frozen(nodes), _frozen(weights), _frozen(sw), order)


def eval_hermite_1d(k: int, xs) -> np.ndarray:
    """Normalized Hermite function ``phi_k`` at the points ``xs``."""
    if k < 0:
        raise ValueError("degree must be nonnegative")
    xs = np.asarray(xs, dtype=float)
    _, cur = _backend.hermite_last_two(int(k), xs.ravel())
    return cur.reshape(xs.shape)


def hermite_table(N: int, xs) -> np.ndarray:
    """``phi_k(x)`` for ``k = 0..N``; shape ``(N+1,) + xs.shape``."""
    xs = np.asarray(xs, dtype=float)
    return _backend.hermite_table(int(N), xs.ravel()).reshape((N + 1,) + xs.shape)


def eval_hermite_nd(nu, x) -> float:
    """Tensor-product Hermite function ``phi_nu(x) = prod_j phi_{nu_j}(x_j)``."""
    nu = as_multi_index(nu)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (nu.dim,):
        raise ValueError(f"point has dimension {x.size}, multi-index has dimension {nu.dim}")
    out = 1.0
    for k, xj in zip(nu, x):
        out *= float(eval_hermite_1d(k, xj))
    return out


@dataclass(frozen=True)
class SampledFunction:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.size != self.grid.size:
            raise ValueError(f"expected {self.grid.size} values, got {values.size}")
        object.__setattr__(self, "values", values.reshape(self.grid.shape))

    @classmethod
    def from_callable(cls, f: Callable, grid: Grid) -> "SampledFunction":
        return cls(grid, np.asarray(f(*grid.coordinates())))

    def __add__(self, other):
        return SampledFunction(self.grid, self.values + _values_of(other))

    def __sub__(self, other):
        return SampledFunction(self.grid, self.values - _values_of(other))

    def __mul__(self, c):
        return SampledFunction(self.grid, self.values * c)

    __rmul__ = __mul__


def _values_of(other):
    return other.values if isinstance(other, SampledFunction) else other


@dataclass(frozen=True)
class HermiteCoefficients:
    """Coefficients ``c_nu`` for all ``|nu| <= N`` in :func:`multi_indices` order."""

    n: int
    N: int
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs).ravel()
        expected = count_multi_indices(self.n, self.N)
        if coeffs.size != expected:
            raise ValueError(f"expected {expected} coefficients for n={self.n}, N={self.N}, got {coeffs.size}")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def indices(self) -> np.ndarray:
        return multi_indices(self.n, self.N)

    @classmethod
    def zeros(cls, n: int, N: int, dtype=float) -> "HermiteCoefficients":
        return cls(n, N, np.zeros(count_multi_indices(n, N), dtype=dtype))

    @classmethod
    def unit(cls, nu, N: int | None = None) -> "HermiteCoefficients":
        """Coefficients of the single mode ``phi_nu``."""
        nu = as_multi_index(nu)
        N = nu.order if N is None else N
        c = cls.zeros(nu.dim, N)
        idx = np.flatnonzero((c.indices == np.array(nu.entries)).all(axis=1))
        c.coeffs[idx] = 1.0
        return c

    @classmethod
    def from_dict(cls, n: int, N: int, values: dict) -> "HermiteCoefficients":
        c = cls.zeros(n, N, dtype=complex if any(np.iscomplexobj(v) for v in values.values()) else float)
        lookup = {tuple(nu): i for i, nu in enumerate(c.indices.tolist())}
        for nu, v in values.items():
            c.coeffs[lookup[tuple(as_multi_index(nu).entries)]] = v
        return c

    def __getitem__(self, nu):
        nu = as_multi_index(nu)
        hit = np.flatnonzero((self.indices == np.array(nu.entries)).all(axis=1))
        return self.coeffs[hit[0]] if hit.size else 0.0

    def dense(self) -> np.ndarray:
        """Coefficient tensor of shape ``(N+1,)*n`` with zeros where ``|nu| > N``."""
        out = np.zeros((self.N + 1,) * self.n, dtype=self.coeffs.dtype)
        out[tuple(self.indices.T)] = self.coeffs
        return out

    @classmethod
    def from_dense(cls, arr: np.ndarray, N: int) -> "HermiteCoefficients":
        n = arr.ndim
        return cls(n, N, arr[tuple(multi_indices(n, N).T)])

    def with_coeffs(self, coeffs) -> "HermiteCoefficients":
        return HermiteCoefficients(self.n, self.N, coeffs)


def _contract_axes(tensor: np.ndarray, mats: Sequence[np.ndarray]) -> np.ndarray:
    """Apply ``mats[j]`` (shape (out_j, in_j)) along axis j of ``tensor``."""
    out = tensor
    for ax, mat in enumerate(mats):
        out = np.moveaxis(np.tensordot(mat, out, axes=([1], [ax])), 0, ax)
    return out


FunctionLike = Union[SampledFunction, Callable]


def analyze(f: FunctionLike, N: int, rule: QuadratureRule | None = None, *, dim: int | None = None) -> HermiteCoefficients:
    """Fourier-Hermite coefficients ``int f phi_nu dx`` for all ``|nu| <= N``.

    Callables are integrated with the tensor Gauss-Hermite ``rule`` (default
    order ``N+1``, which is exact for Hermite sums of degree ``<= N``).  A
    :class:`SampledFunction` is integrated with its own grid, ``h^n sum``; the
    rule is not used in that case.

    Callables take one coordinate array per axis, e.g. ``f(x)`` or ``f(x, y)``.
    """
    if N < 0:
        raise ValueError("degree cap must be nonnegative")
    if isinstance(f, SampledFunction):
        grid = f.grid
        table = hermite_table(N, grid.axis) * grid.h
        dense = _contract_axes(f.values, [table] * grid.n)
        return HermiteCoefficients.from_dense(dense, N)

    n = 1 if dim is None else int(dim)
    if rule is None:
        rule = gauss_hermite_rule(N + 1)
    if rule.order < N + 1:
        raise ValueError(f"quadrature order {rule.order} is too small for degree cap {N} (need >= {N + 1})")
    x = rule.nodes
    coords = np.meshgrid(*([x] * n), indexing="ij")
    values = np.asarray(f(*coords))
    if values.shape != (x.size,) * n:
        values = np.broadcast_to(values, (x.size,) * n)
    table = hermite_table(N, x) * rule.scaled_weights
    dense = _contract_axes(values, [table] * n)
    return HermiteCoefficients.from_dense(dense, N)


def synthesize(c: HermiteCoefficients, grid: Grid) -> SampledFunction:
    """Evaluate ``sum_nu c_nu phi_nu`` on the grid."""
    if c.n != grid.n:
        raise ValueError(f"coefficients have dimension {c.n}, grid has dimension {grid.n}")
    table = hermite_table(c.N, grid.axis)
    values = _contract_axes(c.dense(), [table.T] * grid.n)
    return SampledFunction(grid, values)


def evaluate_series(c: HermiteCoefficients, points: np.ndarray) -> np.ndarray:
    """Evaluate ``sum_nu c_nu phi_nu`` at scattered points of shape (P, n)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    return hermite_basis(c.n, c.N, points).T @ c.coeffs


def hermite_basis(n: int, N: int, points: np.ndarray) -> np.ndarray:
    """Matrix ``B[i, p] = phi_{nu_i}(points[p])`` for ``|nu_i| <= N``."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != n:
        raise ValueError(f"points have dimension {points.shape[1]}, expected {n}")
    idx = multi_indices(n, N)
    out = np.ones((idx.shape[0], points.shape[0]))
    for j in range(n):
        t = hermite_table(N, points[:, j])
        out *= t[idx[:, j]]
    return out


def apply_hamiltonian(f: Callable, x, grid_spacing: float = 1e-3) -> float:
    """Finite-difference ``(-Laplace f + |x|^2 f)(x)``.

    Uses the 5-point central stencil on every axis with step
    ``max(1e-4, grid_spacing)``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = x.size
    step = max(1e-4, float(grid_spacing))
    f0 = float(np.real(f(*x)))
    lap = 0.0
    for j in range(n):
        vals = []
        for s in (-2, -1, 1, 2):
            y = x.copy()
            y[j] += s * step
            vals.append(float(np.real(f(*y))))
        fm2, fm1, fp1, fp2 = vals
        lap += (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * step * step)
    return -lap + float(x @ x) * f0


def hermite_function(nu) -> Callable:
    """``phi_nu`` as a callable taking one coordinate array per axis."""
    nu = as_multi_index(nu)

    def phi(*coords):
        out = 1.0
        for k, c in zip(nu, coords):
            out = out * eval_hermite_1d(k, c)
        return out

    return phi
