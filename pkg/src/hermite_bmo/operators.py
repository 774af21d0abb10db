"""Pseudo-multipliers, their dyadic block decomposition and symbol extraction."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .hermite import (
    Grid,
    HermiteCoefficients,
    SampledFunction,
    analyze,
    as_multi_index,
    count_multi_indices,
    hermite_table,
    multi_indices,
    synthesize,
)
from .reports import DEFAULT_SEED, FitReport
from .spaces import CubeFamily, bmo_seminorm
from .symbols import DyadicWindowFamily, Symbol, dyadic_piece, make_window_family

# bound on (modes x points) entries materialized at once
_CHUNK = 1 << 22


@dataclass(frozen=True)
class PseudoMultiplier:
    """``T f(x) = sum_{|nu| <= N} m(x, nu) f^(phi_nu) phi_nu(x)`` on a grid."""

    symbol: Symbol
    N: int
    grid: Grid

    @classmethod
    def build(cls, symbol: Symbol, N: int, n: int = 1, grid: Grid | None = None) -> "PseudoMultiplier":
        return cls(symbol, int(N), grid or Grid.default(N, n))

    @property
    def n(self) -> int:
        return self.grid.n

    def coefficients(self, f) -> HermiteCoefficients:
        """``f^(phi_nu)`` for ``|nu| <= N``."""
        if isinstance(f, HermiteCoefficients):
            if f.n != self.n:
                raise ValueError(f"coefficients have dimension {f.n}, operator acts in dimension {self.n}")
            if f.N > self.N:
                keep = count_multi_indices(self.n, self.N)
                if np.any(f.coeffs[keep:] != 0):
                    raise ValueError(f"input has degree above the operator cap N={self.N}")
                return HermiteCoefficients(self.n, self.N, f.coeffs[:keep])
            if f.N < self.N:
                c = HermiteCoefficients.zeros(self.n, self.N, f.coeffs.dtype)
                c.coeffs[: f.coeffs.size] = f.coeffs
                return c
            return f
        if isinstance(f, SampledFunction):
            if f.grid.n != self.n:
                raise ValueError(f"function has dimension {f.grid.n}, operator acts in dimension {self.n}")
            return analyze(f, self.N)
        raise TypeError("input must be SampledFunction or HermiteCoefficients")

    def mode_matrix(self) -> np.ndarray:
        """``G[q, p] = m(x_p, nu_q) phi_{nu_q}(x_p)`` on the grid (x-dependent symbols)."""
        pts = self.grid.points()
        idx = multi_indices(self.n, self.N)
        tables = [hermite_table(self.N, pts[:, j]) for j in range(self.n)]
        out = np.empty((idx.shape[0], pts.shape[0]), dtype=complex)
        step = max(1, _CHUNK // max(1, idx.shape[0]))
        for s in range(0, pts.shape[0], step):
            sl = slice(s, s + step)
            basis = np.ones((idx.shape[0], pts[sl].shape[0]))
            for j in range(self.n):
                basis *= tables[j][idx[:, j]][:, sl]
            out[:, sl] = self.symbol.evaluate(pts[sl], idx).T * basis
        return out

    def apply_coefficients(self, c: HermiteCoefficients) -> SampledFunction:
        idx = multi_indices(self.n, self.N)
        if self.symbol.kind == "multiplier":
            mult = self.symbol.evaluate(None, idx)[0]
            out = synthesize(c.with_coeffs(c.coeffs * mult), self.grid)
            return _maybe_real(out)
        pts = self.grid.points()
        tables = [hermite_table(self.N, pts[:, j]) for j in range(self.n)]
        vals = np.empty(pts.shape[0], dtype=complex)
        step = max(1, _CHUNK // max(1, idx.shape[0]))
        for s in range(0, pts.shape[0], step):
            sl = slice(s, s + step)
            basis = np.ones((idx.shape[0], pts[sl].shape[0]))
            for j in range(self.n):
                basis *= tables[j][idx[:, j]][:, sl]
            m = self.symbol.evaluate(pts[sl], idx)
            vals[sl] = np.einsum("pq,q,qp->p", m, c.coeffs, basis)
        return _maybe_real(SampledFunction(self.grid, vals))

    def __call__(self, f) -> SampledFunction:
        return apply(self, f)


def _maybe_real(f: SampledFunction) -> SampledFunction:
    v = f.values
    if np.iscomplexobj(v) and not v.imag.any():
        return SampledFunction(f.grid, v.real)
    return f


def apply(T: PseudoMultiplier, f) -> SampledFunction:
    """``sum_nu m(x, nu) f^(phi_nu) phi_nu(x)`` on the operator's grid.

    ``f`` is a :class:`SampledFunction` (analyzed with its own grid) or
    :class:`HermiteCoefficients` of degree at most ``T.N``.
    """
    return T.apply_coefficients(T.coefficients(f))


@dataclass(frozen=True)
class BlockDecomposition:
    """``T = T_0 + sum_{k=2}^K T_{m(k)}`` with ``m(k) = m psi_k(|nu|)``."""

    operator: PseudoMultiplier
    low: PseudoMultiplier
    blocks: dict
    family: DyadicWindowFamily
    K: int

    def parts(self) -> list:
        return [(0, self.low)] + sorted(self.blocks.items())

    def apply_parts(self, f) -> list:
        c = self.operator.coefficients(f)
        out = []
        for k, part in self.parts():
            sub = HermiteCoefficients(c.n, part.N, c.coeffs[: len(multi_indices(c.n, part.N))])
            out.append((k, apply(part, sub)))
        return out

    def reassemble(self, f) -> SampledFunction:
        parts = self.apply_parts(f)
        total = parts[0][1].values.astype(complex)
        for _, p in parts[1:]:
            total = total + p.values
        return _maybe_real(SampledFunction(self.operator.grid, total))


def decompose(T: PseudoMultiplier, family: DyadicWindowFamily | None = None, K: int | None = None) -> BlockDecomposition:
    """Split ``T`` along dyadic shells of ``|nu|``.

    Block ``k`` only sees ``|nu| <= 2^{k+1}``, so its degree cap is
    ``min(N, 2^{k+1})``; blocks beyond ``N`` are empty but kept.
    """
    family = family or make_window_family()
    if K is None:
        K = max(2, math.ceil(math.log2(max(T.N, 1))) + 1)
    low = PseudoMultiplier(dyadic_piece(T.symbol, family, 0), min(T.N, 4), T.grid)
    blocks = {
        k: PseudoMultiplier(dyadic_piece(T.symbol, family, k), min(T.N, 2 ** (k + 1)), T.grid)
        for k in range(2, K + 1)
    }
    return BlockDecomposition(T, low, blocks, family, K)


# --------------------------------------------------------------------------
# symbol extraction


@dataclass
class SymbolTable:
    """``m(x, nu)`` at grid points; ``nan`` where ``|phi_nu| <= eps``."""

    nu: tuple
    grid: Grid
    values: np.ndarray
    defined: np.ndarray
    eps: float

    def to_dict(self) -> dict:
        pts = self.grid.points()
        rows = [
            {"x": p.tolist(), "nu": list(self.nu), "re": v.real, "im": v.imag}
            for p, v, d in zip(pts, self.values.ravel(), self.defined.ravel())
            if d
        ]
        return {"kind": "general", "entries": rows}


def extract_symbol(A: Callable, nu, grid: Grid, eps: float | None = None, input: str = "coefficients") -> SymbolTable:
    """``m(x, nu) = (A phi_nu)(x) / phi_nu(x)`` where ``|phi_nu(x)| > eps``.

    ``A`` receives ``phi_nu`` as unit :class:`HermiteCoefficients`
    (``input="coefficients"``) or as grid samples (``input="samples"``) and
    must return a :class:`SampledFunction` on ``grid``.  The default ``eps``
    is ``1e-8 max |phi_nu|``.
    """
    nu = as_multi_index(nu)
    if nu.dim != grid.n:
        raise ValueError("multi-index and grid dimensions differ")
    unit = HermiteCoefficients.unit(nu)
    phi = synthesize(unit, grid).values
    if eps is None:
        eps = 1e-8 * float(np.abs(phi).max())
    if input == "coefficients":
        out = A(unit)
    elif input == "samples":
        out = A(SampledFunction(grid, phi))
    else:
        raise ValueError("input must be 'coefficients' or 'samples'")
    vals = out.values if isinstance(out, SampledFunction) else np.asarray(out).reshape(grid.shape)
    defined = np.abs(phi) > eps
    if not defined.any():
        raise ValueError(f"phi_{nu.entries} is below the threshold {eps:g} at every grid point")
    table = np.full(grid.shape, np.nan + 0j)
    table[defined] = vals[defined] / phi[defined]
    return SymbolTable(nu.entries, grid, table, defined, eps)


# --------------------------------------------------------------------------
# block operator norms


def probe_rng(seed: int, kind: int, i: int) -> np.random.Generator:
    # one stream per probe so probe i does not depend on the total count
    return np.random.default_rng([seed, kind, i])


def sign_probe(grid: Grid, rng) -> np.ndarray:
    return rng.choice([-1.0, 1.0], size=grid.shape)


def bandlimited_probe(grid: Grid, rng, N: int, clip: float = 0.5) -> np.ndarray:
    """Random Hermite sum of degree ``N``, scaled so that it saturates at ``+-1``."""
    c = HermiteCoefficients(grid.n, N, rng.standard_normal(len(multi_indices(grid.n, N))))
    v = synthesize(c, grid).values
    return np.clip(v / (clip * np.abs(v).max()), -1.0, 1.0)


@dataclass
class _ProbeState:
    best: float = 0.0
    est: object = None
    output: np.ndarray | None = None
    used: int = 0
    per_kind: dict = field(default_factory=dict)


def _kernel_rows(G: np.ndarray, basis: np.ndarray, flat_points) -> np.ndarray:
    # K(x, y) = sum_nu m(x, nu) phi_nu(x) phi_nu(y) for the given x-indices
    return G[:, flat_points].T @ basis


_BASIS: dict = {}


def _basis_cache(grid: Grid, N: int) -> np.ndarray:
    key = (grid, N)
    if key not in _BASIS:
        idx = multi_indices(grid.n, N)
        pts = grid.points()
        b = np.ones((idx.shape[0], pts.shape[0]))
        for j in range(grid.n):
            b *= hermite_table(N, pts[:, j])[idx[:, j]]
        _BASIS.clear()
        _BASIS[key] = b
    return _BASIS[key]


class BlockProber:
    """Empirical lower bounds for ``||T||_{L^inf -> BMO}`` of one operator.

    Probes: random signs, clipped band-limited functions and adversarial
    phases ``conj(K(x0, .) - mean_Q K(., .))`` built from the current
    maximizing cube.
    """

    def __init__(self, T: PseudoMultiplier, family: CubeFamily | None = None, bmo=None):
        self.T = T
        self.family = family or CubeFamily(T.grid)
        self.bmo = bmo or (lambda f: bmo_seminorm(f, self.family))
        self.G = T.mode_matrix() if T.symbol.kind != "multiplier" else None
        idx = multi_indices(T.n, T.N)
        self.mult = T.symbol.evaluate(None, idx)[0] if T.symbol.kind == "multiplier" else None
        self.basis = _basis_cache(T.grid, T.N)

    def apply(self, F: np.ndarray) -> np.ndarray:
        """Apply to a stack of probes (rows are flattened grid functions)."""
        coeffs = F @ self.basis.T * self.T.grid.cell_volume
        if self.mult is not None:
            return (coeffs * self.mult) @ self.basis
        return coeffs @ self.G

    def _measure(self, out_row):
        f = SampledFunction(self.T.grid, out_row)
        return self.bmo(f)

    def _record(self, state, kind, F):
        outs = self.apply(F.reshape(F.shape[0], -1))
        for row in outs:
            if not np.iscomplexobj(row) or not row.imag.any():
                row = row.real
            est = self._measure(row)
            state.used += 1
            state.per_kind[kind] = max(state.per_kind.get(kind, 0.0), est.value)
            if est.value > state.best:
                state.best, state.est, state.output = est.value, est, row

    def adversarial(self, state) -> np.ndarray | None:
        if state.est is None or state.best == 0.0:
            return None
        grid = self.T.grid
        sl = state.est.slices()
        cube_idx = np.ravel_multi_index(
            np.meshgrid(*[np.arange(s.start, s.stop) for s in sl], indexing="ij"), grid.shape
        ).ravel()
        out = state.output.ravel()
        dev = np.abs(out[cube_idx] - out[cube_idx].mean())
        x0 = int(cube_idx[int(np.argmax(dev))])
        G = self.G if self.G is not None else self.basis * self.mult[:, None]
        rows = _kernel_rows(G, self.basis, cube_idx)
        d = _kernel_rows(G, self.basis, [x0])[0] - rows.mean(axis=0)
        mag = np.abs(d)
        phase = np.where(mag > 0, np.conj(d) / np.where(mag > 0, mag, 1.0), 1.0)
        if not np.iscomplexobj(phase) or not np.asarray(phase).imag.any():
            phase = np.real(phase)
        return np.asarray(phase).reshape(1, -1)

    def run(self, probes: int, seed: int, adversarial_rounds: int = 3, band_degree: int | None = None) -> _ProbeState:
        if probes < 1:
            raise ValueError("probe set is empty")
        state = _ProbeState()
        grid = self.T.grid
        n_adv = min(adversarial_rounds, max(0, probes - 2))
        n_rand = probes - n_adv
        n_sign = (n_rand + 1) // 2
        n_band = n_rand - n_sign
        band_degree = self.T.N if band_degree is None else band_degree
        if n_sign:
            F = np.stack([sign_probe(grid, probe_rng(seed, 0, i)) for i in range(n_sign)])
            self._record(state, "sign", F)
        if n_band:
            F = np.stack([bandlimited_probe(grid, probe_rng(seed, 1, i), band_degree) for i in range(n_band)])
            self._record(state, "bandlimited", F)
        for _ in range(n_adv):
            F = self.adversarial(state)
            if F is None:
                break
            self._record(state, "adversarial", F)
        return state


def estimate_block_operator_norms(
    D: BlockDecomposition,
    probes: int = 64,
    seed: int = DEFAULT_SEED,
    ks: Iterable[int] | None = None,
    bmo=None,
    adversarial_rounds: int = 3,
) -> FitReport:
    """Per-block lower bounds ``max_f ||T_{m(k)} f||_*`` over probes with ``||f||_inf <= 1``.

    The report fits ``log2(norm_lb)`` against ``k``; it is flagged degenerate
    when fewer than two blocks have a nonzero bound.
    """
    if probes < 1:
        raise ValueError("probe set is empty")
    ks = sorted(D.blocks) if ks is None else list(ks)
    family = CubeFamily(D.operator.grid)
    blocks, xs, ys, vals = [], [], [], []
    for k in ks:
        T = D.blocks[k]
        prober = BlockProber(T, family, bmo)
        st = prober.run(probes, seed, adversarial_rounds)
        blocks.append({"k": k, "norm_lb": st.best, "probes_used": st.used, "per_kind": st.per_kind})
        vals.append(st.best)
        if st.best > 0:
            xs.append(k)
            ys.append(math.log2(st.best))
    spec = {
        "probes": probes,
        "adversarial_rounds": adversarial_rounds,
        "ks": ks,
        "grid": {"n": D.operator.grid.n, "L": D.operator.grid.L, "M": D.operator.grid.M},
        "cubes": family.spec(),
    }
    return FitReport.from_points(xs, ys, spec, seed, vals, blocks=blocks)
