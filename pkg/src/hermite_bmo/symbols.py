"""Symbols m(x, nu), discrete differences, dyadic windows and condition checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .hermite import Grid, HermiteCoefficients, as_multi_index, multi_indices, synthesize

KINDS = ("multiplier", "spectral", "general")


def default_order_cap(n: int) -> int:
    """Number of differences required by the Marcinkiewicz-type condition."""
    return math.floor(7 * n / 4 - 1 / 12) + 1


def critical_order(n: int, kappa: float = -1.0 / 12.0) -> float:
    """Sobolev threshold ``7n/4 + kappa`` above which the block series converges."""
    return 7 * n / 4 + kappa


def default_sobolev_order(n: int) -> float:
    """Midpoint of ``(7n/4 - 1/12, floor(7n/4 - 1/12) + 1)``.

    In that range the difference condition controls the Sobolev-type norm,
    so it is the natural order at which to measure the latter.
    """
    return 0.5 * (critical_order(n) + default_order_cap(n))


@dataclass(frozen=True)
class Symbol:
    """A symbol ``m(x, nu)`` with a declared kind.

    ``func`` is vectorized and called as ``func(x, nu)`` for kind
    ``general``, ``func(x, lam)`` with ``lam = 2|nu| + n`` for kind
    ``spectral`` and ``func(nu)`` for kind ``multiplier``.  ``x`` arrives
    with shape ``(P, 1, n)``, ``nu`` with shape ``(1, Q, n)`` (or ``(Q, n)``
    for multipliers) and ``lam`` with shape ``(1, Q)``.

    ``continuum`` optionally extends the symbol to real frequencies and is
    called as ``continuum(x, xi)`` (``x`` is ``None`` for multipliers) with
    ``xi`` of shape ``(..., n)``.  Its restriction to ``xi = nu`` must agree
    with ``func``.
    """

    kind: str
    func: Callable
    continuum: Callable | None = None
    name: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown symbol kind {self.kind!r}")

    @classmethod
    def multiplier(cls, func, continuum=None, name=""):
        return cls("multiplier", func, continuum, name)

    @classmethod
    def spectral(cls, func, continuum=None, name=""):
        return cls("spectral", func, continuum, name)

    @classmethod
    def general(cls, func, continuum=None, name=""):
        return cls("general", func, continuum, name)

    @property
    def depends_on_x(self) -> bool:
        return self.kind != "multiplier"

    def evaluate(self, x, nu) -> np.ndarray:
        """Values on all (point, multi-index) pairs, shape ``(P, Q)``.

        ``x`` has shape ``(P, n)`` or is ``None`` (then ``P = 1``; only
        allowed for multipliers).
        """
        nu = np.asarray(nu, dtype=np.int64)
        if nu.ndim == 1:
            nu = nu[:, None]
        n = nu.shape[1]
        if self.kind == "multiplier":
            vals = np.asarray(self.func(nu), dtype=complex).reshape(1, -1)
            if vals.shape[1] == 1 and nu.shape[0] != 1:
                vals = np.broadcast_to(vals, (1, nu.shape[0]))
            P = 1 if x is None else np.atleast_2d(x).shape[0]
            return np.broadcast_to(vals, (P, nu.shape[0]))
        if x is None:
            raise ValueError(f"a {self.kind} symbol needs spatial points")
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != n:
            raise ValueError(f"points have dimension {x.shape[1]}, multi-indices {n}")
        xb = x[:, None, :]
        if self.kind == "spectral":
            lam = (2 * nu.sum(axis=1) + n)[None, :]
            vals = self.func(xb, lam)
        else:
            vals = self.func(xb, nu[None, :, :])
        return np.broadcast_to(np.asarray(vals, dtype=complex), (x.shape[0], nu.shape[0]))

    def at(self, x, nu) -> complex:
        """Single value ``m(x, nu)``."""
        nu = as_multi_index(nu)
        pts = None if x is None else np.asarray(x, dtype=float).reshape(1, -1)
        if pts is None and self.depends_on_x:
            raise ValueError(f"a {self.kind} symbol needs a spatial point")
        return complex(self.evaluate(pts, np.array([nu.entries]))[0, 0])

    def evaluate_continuum(self, x, xi) -> np.ndarray:
        """Continuum extension at frequencies ``xi`` (shape ``(..., n)``)."""
        if self.continuum is None:
            raise ValueError(f"symbol {self.name or self.kind!r} declares no continuum extension")
        xi = np.asarray(xi, dtype=float)
        if self.kind == "multiplier":
            out = self.continuum(None, xi)
        else:
            if x is None:
                raise ValueError(f"a {self.kind} symbol needs a spatial point")
            out = self.continuum(np.asarray(x, dtype=float), xi)
        return np.broadcast_to(np.asarray(out, dtype=complex), xi.shape[:-1])

    def scaled(self, c) -> "Symbol":
        """The symbol ``c * m``."""
        f, g = self.func, self.continuum
        kind = self.kind
        if kind == "multiplier":
            func = lambda nu: c * np.asarray(f(nu))
        else:
            func = lambda x, v: c * np.asarray(f(x, v))
        cont = None if g is None else (lambda x, xi: c * np.asarray(g(x, xi)))
        return Symbol(kind, func, cont, f"{c}*{self.name}")


def _l1(nu):
    return np.asarray(nu).sum(axis=-1)


def _abs_l1(xi):
    return np.abs(xi).sum(axis=-1)


def _bump_continuum(x, xi):
    # 1 at the origin, 0 for |xi| >= 1; flat at the origin in every dimension
    r = np.sqrt((np.asarray(xi) ** 2).sum(axis=-1))
    return 1.0 - smooth_step(r)


def builtin_symbol(name: str, n: int = 1) -> Symbol:
    """Catalogue of reference symbols.

    ``const1``         m = 1
    ``projector0``     m = 1 at nu = 0, else 0
    ``oscillating-it`` m = (2|nu| + n)^i
    ``sqrt-growth``    m = |nu|^{1/2}  (violates the difference condition)
    ``spatial-sin``    m = sin(x_1) / (2|nu| + n)
    """
    if name == "const1":
        return Symbol.multiplier(lambda nu: np.ones(len(nu)), lambda x, xi: np.ones(xi.shape[:-1]), name)
    if name == "projector0":
        return Symbol.multiplier(lambda nu: (_l1(nu) == 0).astype(float), _bump_continuum, name)
    if name == "oscillating-it":
        return Symbol.multiplier(
            lambda nu: (2.0 * _l1(nu) + n) ** 1j,
            lambda x, xi: (2.0 * _abs_l1(xi) + n) ** 1j,
            name,
        )
    if name == "sqrt-growth":
        return Symbol.multiplier(
            lambda nu: np.sqrt(_l1(nu).astype(float)),
            lambda x, xi: np.sqrt(_abs_l1(xi)),
            name,
        )
    if name == "spatial-sin":
        return Symbol.spectral(
            lambda x, lam: np.sin(x[..., 0]) / lam,
            lambda x, xi: np.sin(np.atleast_1d(x)[0]) / (2.0 * _abs_l1(xi) + n),
            name,
        )
    raise KeyError(f"unknown builtin symbol {name!r}; choose from {', '.join(BUILTIN_SYMBOLS)}")


BUILTIN_SYMBOLS = ("const1", "projector0", "oscillating-it", "sqrt-growth", "spatial-sin")


def tabulated_symbol(data: dict) -> Symbol:
    """Symbol from the tabulated JSON layout.

    ``{"kind": ..., "entries": [{"x": [...], "nu": [...], "re": .., "im": ..}]}``.
    Multi-indices absent from the table map to 0.  For x-dependent kinds the
    value at a point is taken from the nearest tabulated point.
    """
    kind = data.get("kind")
    if kind not in KINDS:
        raise ValueError(f"tabulated symbol kind must be one of {KINDS}, got {kind!r}")
    entries = data.get("entries")
    if not entries:
        raise ValueError("tabulated symbol has no entries")
    if kind == "multiplier":
        table = {tuple(e["nu"]): complex(e.get("re", 0.0), e.get("im", 0.0)) for e in entries}

        def func(nu):
            return np.array([table.get(tuple(v), 0.0) for v in np.asarray(nu).tolist()], dtype=complex)

        return Symbol.multiplier(func, name="tabulated")

    xs = sorted({tuple(e["x"]) for e in entries})
    x_arr = np.array(xs, dtype=float)
    x_pos = {x: i for i, x in enumerate(xs)}
    tables = [dict() for _ in xs]
    for e in entries:
        nu = tuple(e["nu"])
        key = nu if kind == "general" else 2 * sum(nu) + len(nu)
        tables[x_pos[tuple(e["x"])]][key] = complex(e.get("re", 0.0), e.get("im", 0.0))

    def lookup(x, keys):
        x = np.asarray(x, dtype=float).reshape(-1, x_arr.shape[1])
        nearest = np.argmin(((x[:, None, :] - x_arr[None, :, :]) ** 2).sum(axis=-1), axis=1)
        out = np.empty((x.shape[0], len(keys)), dtype=complex)
        for p, t in enumerate(nearest):
            tab = tables[t]
            out[p] = [tab.get(k, 0.0) for k in keys]
        return out

    if kind == "general":
        return Symbol.general(lambda x, nu: lookup(x, [tuple(v) for v in nu.reshape(-1, nu.shape[-1]).tolist()]),
                              name="tabulated")
    return Symbol.spectral(lambda x, lam: lookup(x, [int(v) for v in np.ravel(lam)]), name="tabulated")


def symbol_to_table(m: Symbol, nus, xs=None) -> dict:
    """Inverse of :func:`tabulated_symbol` on the given probe sets."""
    nus = np.asarray(nus, dtype=np.int64)
    if m.kind == "multiplier":
        vals = m.evaluate(None, nus)[0]
        entries = [{"nu": nu.tolist(), "re": v.real, "im": v.imag} for nu, v in zip(nus, vals)]
    else:
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        vals = m.evaluate(xs, nus)
        entries = [
            {"x": x.tolist(), "nu": nu.tolist(), "re": vals[p, q].real, "im": vals[p, q].imag}
            for p, x in enumerate(xs)
            for q, nu in enumerate(nus)
        ]
    return {"kind": m.kind, "entries": entries}


# --------------------------------------------------------------------------
# discrete differences


def _box(n, extent):
    axes = [np.arange(e) for e in extent]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)


def _difference(values, alpha, first_axis):
    # forward differences in canonical axis order; composition order never varies
    out = values
    for j, a in enumerate(alpha):
        if a:
            out = np.diff(out, n=a, axis=first_axis + j)
    return out


def forward_difference(m: Symbol, alpha, x, nu) -> complex:
    """``Delta^alpha m(x, nu)`` with ``(Delta_j m)(nu) = m(nu + e_j) - m(nu)``."""
    alpha = as_multi_index(alpha)
    nu = as_multi_index(nu)
    if alpha.dim != nu.dim:
        raise ValueError("alpha and nu must have the same dimension")
    n = nu.dim
    extent = [a + 1 for a in alpha]
    shifts = _box(n, extent) + np.array(nu.entries)
    pts = None if x is None else np.asarray(x, dtype=float).reshape(1, n)
    vals = m.evaluate(pts, shifts)[0].reshape(extent)
    return complex(_difference(vals, alpha.entries, 0).reshape(-1)[0])


def apply_differences(m: Symbol, axes: Sequence[int], x, nu) -> complex:
    """Apply ``Delta_{axes[0]}``, ``Delta_{axes[1]}``, ... in turn.

    Differences along distinct axes commute, and the result only depends on
    how often each axis occurs.
    """
    nu = as_multi_index(nu)
    alpha = [0] * nu.dim
    for a in axes:
        alpha[a] += 1
    return forward_difference(m, alpha, x, nu)


def _alphas(n, cap):
    return [tuple(a) for a in multi_indices(n, cap).tolist()]


# --------------------------------------------------------------------------
# reports


@dataclass
class ConditionReport:
    condition: str
    per_scale: list
    sup: float
    threshold: float | None
    passed: bool
    limiting: object
    probe_spec: dict
    diverging: bool = False
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "per_scale": [{"scale": s, "value": float(v)} for s, v in self.per_scale],
            "sup": float(self.sup),
            "probe_spec": self.probe_spec,
            "pass": bool(self.passed),
            "threshold": self.threshold,
            "limiting": self.limiting,
            "diverging": bool(self.diverging),
            **self.extra,
        }


def _finalize(condition, per_scale, limits, threshold, probe_spec, diverging, extra=None):
    values = np.array([v for _, v in per_scale], dtype=float)
    i = int(np.argmax(values)) if values.size else 0
    sup = float(values[i]) if values.size else 0.0
    passed = bool(np.isfinite(sup) and not diverging and (threshold is None or sup <= threshold))
    limiting = limits[i] if values.size else None
    return ConditionReport(condition, per_scale, sup, threshold, passed, limiting, probe_spec, diverging, extra or {})


def probe_lattice(n: int, L: float, points: int = 17) -> np.ndarray:
    ax = np.linspace(-L, L, points)
    return np.stack(np.meshgrid(*([ax] * n), indexing="ij"), axis=-1).reshape(-1, n)


def default_nu_cap(n: int) -> int:
    return {1: 2**12, 2: 2**7, 3: 2**5}[n]


def _ratio(a, b):
    if b > 1e-300:
        return float(a / b)
    return 1.0 if a <= 1e-300 else math.inf


def check_marcinkiewicz(
    m: Symbol,
    n: int,
    order_cap: int | None = None,
    nu_cap: int | None = None,
    x_probes=None,
    threshold: float | None = None,
    growth_tol: float = 0.25,
) -> ConditionReport:
    """Difference condition: ``C_alpha = max (1+|nu|)^|alpha| |Delta^alpha m(x, nu)|``.

    Maxima run over ``|nu| <= nu_cap`` and the x-probes.  A constant flags the
    report as diverging when it grows by more than ``growth_tol`` (relative)
    between ``|nu| <= nu_cap/2`` and ``|nu| <= nu_cap`` and that growth has not
    slowed to below 3/4 of the growth over the previous doubling.  Convergent
    constants with ``O(1/|nu|)`` corrections halve their growth per doubling;
    power laws keep it.
    """
    cap = default_order_cap(n) if order_cap is None else int(order_cap)
    K = default_nu_cap(n) if nu_cap is None else int(nu_cap)
    if m.depends_on_x:
        if x_probes is None:
            x_probes = probe_lattice(n, Grid.default_half_width(min(K, 64), n))
        x_probes = np.atleast_2d(np.asarray(x_probes, dtype=float))
    else:
        x_probes = None
    if K < 0 or (x_probes is not None and x_probes.size == 0):
        raise ValueError("probe sets must be nonempty")

    alphas = _alphas(n, cap)
    ext = K + cap + 1
    # a spectral symbol depends on nu through |nu| only and every Delta_j raises
    # |nu| by one, so Delta^alpha reduces to the |alpha|-th difference in |nu|
    radial = m.kind == "spectral"
    if radial:
        box = np.zeros((ext, n), dtype=np.int64)
        box[:, 0] = np.arange(ext)
        ordk = np.arange(K + 1)
    else:
        box = _box(n, [ext] * n)
        ordk = box.sum(axis=1).reshape([ext] * n)[tuple(slice(0, K + 1) for _ in range(n))]
    full = np.full(len(alphas), -np.inf)
    half = np.full(len(alphas), -np.inf)
    quarter = np.full(len(alphas), -np.inf)
    where = [None] * len(alphas)
    chunks = [None] if x_probes is None else [x_probes[i:i + 16] for i in range(0, len(x_probes), 16)]
    for chunk in chunks:
        if radial:
            vals = m.evaluate(chunk, box)
            by_order = {a: np.abs(np.diff(vals, n=a, axis=1)[:, : K + 1]) * (1.0 + ordk) ** a for a in range(cap + 1)}
        else:
            vals = m.evaluate(chunk, box).reshape((-1,) + (ext,) * n)
        crop = (slice(None),) + tuple(slice(0, K + 1) for _ in range(n))
        for a_i, alpha in enumerate(alphas):
            if radial:
                weighted = by_order[sum(alpha)]
            else:
                weighted = np.abs(_difference(vals, alpha, 1)[crop]) * (1.0 + ordk) ** sum(alpha)
            w_full = np.where(ordk <= K, weighted, -np.inf)
            flat = int(np.argmax(w_full))
            if w_full.flat[flat] > full[a_i]:
                full[a_i] = w_full.flat[flat]
                p, *nu = np.unravel_index(flat, w_full.shape)
                if radial:
                    nu = [int(nu[0])] + [0] * (n - 1)
                where[a_i] = {
                    "alpha": list(alpha),
                    "nu": [int(v) for v in nu],
                    "x": None if chunk is None else chunk[p].tolist(),
                }
            half[a_i] = max(half[a_i], float(np.where(ordk <= K // 2, weighted, -np.inf).max()))
            quarter[a_i] = max(quarter[a_i], float(np.where(ordk <= K // 4, weighted, -np.inf).max()))

    per_alpha = [(list(a), float(v)) for a, v in zip(alphas, full)]
    growth = [_ratio(f, h) for f, h in zip(full, half)]
    previous = [_ratio(h, q) for h, q in zip(half, quarter)]
    diverging = any(g > 1.0 + growth_tol and g - 1.0 > 0.75 * (p - 1.0) for g, p in zip(growth, previous))
    spec = {"order_cap": cap, "nu_cap": K, "x_probes": 0 if x_probes is None else int(len(x_probes))}
    return _finalize("CII", per_alpha, where, threshold, spec, diverging, {"growth": growth})


def marcinkiewicz_implies_hormander_bound(m: Symbol, n: int, **probes) -> float:
    """Majorant ``max_alpha (1+|nu|)^|alpha| |Delta^alpha m|`` for the Sobolev-type norm.

    The implicit constant of the comparison is not known; this is the raw
    right-hand side over the probe set.
    """
    return check_marcinkiewicz(m, n, **probes).sup


# --------------------------------------------------------------------------
# dyadic windows


def _bump(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_step(t):
    """``S(t) = B(t) / (B(t) + B(1 - t))`` with ``B(t) = exp(-1/t)`` for ``t > 0``."""
    t = np.asarray(t, dtype=float)
    a = _bump(t)
    b = _bump(1.0 - t)
    return a / (a + b)


def _polynomial_step(t, k):
    # C^k smoothstep: regularized incomplete beta polynomial
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    out = np.zeros_like(t)
    for j in range(k + 1):
        out += math.comb(k + j, j) * math.comb(2 * k + 1, k - j) * (-t) ** j
    return t ** (k + 1) * out


@dataclass(frozen=True)
class DyadicWindowFamily:
    """``psi_0`` with ``psi_0 = 1`` on ``|l| <= 1`` and ``0`` on ``|l| >= 2``;
    ``psi_j(l) = psi_0(2^-j l) - psi_0(2^{-j+1} l)`` for ``j >= 1``."""

    recipe: str = "mollifier"
    smoothness: int = 3

    def step(self, t):
        if self.recipe == "mollifier":
            return smooth_step(t)
        if self.recipe == "polynomial":
            return _polynomial_step(t, self.smoothness)
        raise ValueError(f"unknown window recipe {self.recipe!r}")

    def psi0(self, lam):
        return 1.0 - self.step(np.abs(np.asarray(lam, dtype=float)) - 1.0)

    def psi(self, j: int, lam):
        lam = np.asarray(lam, dtype=float)
        if j == 0:
            return self.psi0(lam)
        if j < 0:
            raise ValueError("window index must be nonnegative")
        return self.psi0(lam / 2.0**j) - self.psi0(lam / 2.0 ** (j - 1))

    def psi_tilde(self, lam):
        """``psi_0(l) - psi_0(2 l)``, supported in ``1/2 <= |l| <= 2``."""
        lam = np.asarray(lam, dtype=float)
        return self.psi0(lam) - self.psi0(2.0 * lam)

    def partial_sum(self, J: int, lam):
        return sum(self.psi(j, lam) for j in range(J + 1))


def make_window_family(recipe: str = "mollifier", smoothness: int = 3) -> DyadicWindowFamily:
    fam = DyadicWindowFamily(recipe, smoothness)
    fam.step(0.5)  # validates the recipe
    return fam


def piece_weight(family: DyadicWindowFamily, k: int, order):
    """Weight applied to ``m`` by :func:`dyadic_piece` at ``|nu| = order``."""
    order = np.asarray(order, dtype=float)
    if k == 0:
        return family.psi(0, order) + family.psi(1, order)
    if k == 1:
        raise ValueError("scale 1 is folded into the low-frequency piece (k = 0)")
    return family.psi(k, order)


def dyadic_piece(m: Symbol, family: DyadicWindowFamily, k: int) -> Symbol:
    """``m(x, nu) psi_k(|nu|)`` for ``k >= 2``; ``k = 0`` gives ``m (psi_0 + psi_1)``."""
    piece_weight(family, k, 0.0)
    f, g = m.func, m.continuum
    if m.kind == "multiplier":
        func = lambda nu: np.asarray(f(nu)) * piece_weight(family, k, _l1(nu))
    elif m.kind == "spectral":
        def func(x, lam):
            n = x.shape[-1]
            return np.asarray(f(x, lam)) * piece_weight(family, k, (np.asarray(lam) - n) / 2.0)
    else:
        func = lambda x, nu: np.asarray(f(x, nu)) * piece_weight(family, k, _l1(nu))
    cont = None
    if g is not None:
        cont = lambda x, xi: np.asarray(g(x, xi)) * piece_weight(family, k, _abs_l1(xi))
    return Symbol(m.kind, func, cont, f"{m.name}[k={k}]")


# --------------------------------------------------------------------------
# Sobolev-type norms


def _weighted_fourier_norm(g, spacing, s, pad):
    n = g.ndim
    shape = tuple(pad * d for d in g.shape)
    ghat = np.fft.fftn(g, s=shape, axes=tuple(range(n))) * spacing**n
    freqs = [np.fft.fftfreq(d, d=spacing) for d in shape]
    r2 = sum(np.meshgrid(*[f**2 for f in freqs], indexing="ij", sparse=True))
    du = 1.0 / (shape[0] * spacing)
    return math.sqrt(float(np.sum((1.0 + r2) ** s * np.abs(ghat) ** 2)) * du**n)


def windowed_sobolev_norm(m: Symbol, s: float, family: DyadicWindowFamily, j: int, x=None,
                          samples: int | None = None, pad: int = 4, n: int = 1) -> float:
    """``|| m(x, 2^j .) psi~(|.|) ||_{H^s}`` on the periodic box ``[-2, 2]^n``.

    The Fourier transform uses ``exp(-2 pi i x xi)``; the window argument is
    the Euclidean length.
    """
    if samples is None:
        samples = {1: 512, 2: 128, 3: 48}[n]
    spacing = 4.0 / samples
    ax = -2.0 + spacing * np.arange(samples)
    eta = np.stack(np.meshgrid(*([ax] * n), indexing="ij"), axis=-1)
    r = np.sqrt((eta**2).sum(axis=-1))
    window = family.psi_tilde(r)
    g = m.evaluate_continuum(x, 2.0**j * eta) * window
    return _weighted_fourier_norm(g, spacing, s, pad)


def hormander_norm_fourier(
    m: Symbol,
    s: float,
    family: DyadicWindowFamily | None = None,
    scales: Iterable[int] = range(1, 11),
    x_probes=None,
    n: int = 1,
    threshold: float | None = None,
    samples: int | None = None,
    pad: int = 4,
    growth_factor: float = 1.1,
) -> ConditionReport:
    """Scale-wise Sobolev norms of the dyadically windowed continuum symbol.

    For every scale ``j`` and probe point ``x`` computes
    ``|| m(x, 2^j .) psi~(|.|) ||_{H^s}``, the dilation-invariant form of
    ``2^{j(s - n/2)} || m(x, .) psi~(2^-j |.|) ||``.  The report is flagged
    diverging when the last scale exceeds the one before by ``growth_factor``.
    """
    if m.continuum is None:
        raise ValueError(f"symbol {m.name or m.kind!r} declares no continuum extension")
    if s < 0:
        raise ValueError("Sobolev order must be nonnegative")
    if pad < 4:
        raise ValueError("zero padding factor must be at least 4")
    family = family or make_window_family()
    scales = list(scales)
    if m.depends_on_x:
        if x_probes is None:
            x_probes = probe_lattice(n, 4.0)
        x_probes = np.atleast_2d(np.asarray(x_probes, dtype=float))
        probes = list(x_probes)
    else:
        probes = [None]
    per_scale, limits = [], []
    for j in scales:
        vals = [windowed_sobolev_norm(m, s, family, j, x, samples, pad, n) for x in probes]
        i = int(np.argmax(vals))
        per_scale.append((j, vals[i]))
        limits.append({"scale": j, "x": None if probes[i] is None else np.asarray(probes[i]).tolist()})
    diverging = len(per_scale) >= 2 and per_scale[-1][1] > growth_factor * per_scale[-2][1]
    spec = {
        "s": s,
        "scales": scales,
        "x_probes": 0 if probes == [None] else len(probes),
        "samples": samples or {1: 512, 2: 128, 3: 48}[n],
        "pad": pad,
    }
    return _finalize("CI", per_scale, limits, threshold, spec, diverging)


def hormander_norm_hermite(
    m: Symbol,
    s: float,
    family: DyadicWindowFamily | None = None,
    scales: Iterable[int] = range(1, 6),
    y_probes=None,
    grid: Grid | None = None,
    n: int = 1,
    threshold: float | None = None,
    growth_factor: float = 1.1,
) -> ConditionReport:
    """``2^{k(s - n/2)} || <x>^s sum_nu m(y, nu) psi~(2^-k |nu|) phi_nu ||_{L^2}`` per scale."""
    if s < 0:
        raise ValueError("Sobolev order must be nonnegative")
    family = family or make_window_family()
    scales = list(scales)
    top = 2 ** (max(scales) + 1)
    if grid is None:
        grid = Grid.default(top, n, points_per_unit=max(8.0, 1.5 * math.sqrt(2 * top + n)))
    n = grid.n
    need = math.sqrt(2 * top + n)
    if grid.L < need:
        raise ValueError(f"grid half-width {grid.L:.3g} does not contain the turning point {need:.3g} of degree {top}")
    if m.depends_on_x:
        y_probes = probe_lattice(n, 4.0) if y_probes is None else np.atleast_2d(np.asarray(y_probes, dtype=float))
        probes = list(y_probes)
    else:
        probes = [None]
    weight = (1.0 + sum(c**2 for c in grid.coordinates())) ** (s / 2.0)
    per_scale, limits = [], []
    for k in scales:
        N = 2 ** (k + 1)
        idx = multi_indices(n, N)
        win = family.psi_tilde(idx.sum(axis=1) / 2.0**k)
        best, arg = -1.0, None
        for y in probes:
            pts = None if y is None else np.asarray(y).reshape(1, n)
            coeffs = m.evaluate(pts, idx)[0] * win
            f = synthesize(HermiteCoefficients(n, N, coeffs), grid)
            val = 2.0 ** (k * (s - n / 2.0)) * math.sqrt(float(np.sum(np.abs(weight * f.values) ** 2)) * grid.cell_volume)
            if val > best:
                best, arg = val, y
        per_scale.append((k, best))
        limits.append({"scale": k, "y": None if arg is None else np.asarray(arg).tolist()})
    diverging = len(per_scale) >= 2 and per_scale[-1][1] > growth_factor * per_scale[-2][1]
    spec = {"s": s, "scales": scales, "y_probes": 0 if probes == [None] else len(probes),
            "grid": {"n": grid.n, "L": grid.L, "M": grid.M}}
    return _finalize("CI-hermite", per_scale, limits, threshold, spec, diverging)
