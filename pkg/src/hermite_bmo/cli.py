"""Command-line front-end.

Usage::

    hermite-bmo transform --degree 32
    hermite-bmo check-cii --symbol const1 --out runs/cii
    hermite-bmo bmo --function sign --grid-L 1 --grid-M 513
    hermite-bmo asymptotics --out runs/asym
    hermite-bmo blocks --symbol oscillating-it --K 8

Settings come from an optional JSON ``--config`` file; flags override it.
Every run writes ``report.json``, ``points.csv`` and ``meta.json`` to
``--out``.  Exit status: 0 success, 2 invalid configuration, 3 numerical
failure flagged in the report.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import math
import platform
import re
import sys
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, _backend
from .hermite import Grid, HermiteCoefficients, SampledFunction, analyze, hermite_function, synthesize
from .reports import (
    DEFAULT_SEED,
    coefficients_to_dict,
    sampled_from_csv,
    sampled_to_csv,
    write_json,
    write_points_csv,
)

COMMANDS = ("transform", "apply", "check-ci", "check-cii", "bmo", "h1", "asymptotics", "blocks", "probe")
FUNCTIONS = ("sign", "log", "gauss", "atom", "random", "phi:<k,...>")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class ConfigError(Exception):
    """Invalid configuration; ``line`` points into the config file when known."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        super().__init__(message)

    def __str__(self):
        where = ""
        if self.source:
            where = f"{self.source}:{self.line}: " if self.line else f"{self.source}: "
        return where + self.args[0]


@dataclass
class RunConfig:
    command: str
    n: int = 1
    N: int = 32
    L: float | None = None
    M: int | None = None
    window: str = "mollifier"
    probes: int | None = None
    seed: int = DEFAULT_SEED
    symbol: str = "const1"
    out: str = "hermite_bmo_out"
    threads: int | None = None
    input: str | None = None
    function: str | None = None
    K: int = 8
    s: float | None = None
    threshold: float | None = None
    degrees: list | None = None
    _lines: dict = field(default_factory=dict, repr=False)
    _source: str | None = field(default=None, repr=False)

    def fail(self, key: str, message: str):
        raise ConfigError(message, self._lines.get(key), self._source)

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            self.fail("command", f"unknown subcommand {self.command!r}")
        if self.n not in (1, 2, 3):
            self.fail("n", f"dimension must be 1, 2 or 3, got {self.n}")
        if self.N < 0:
            self.fail("N", f"degree cap must be >= 0, got {self.N}")
        if self.M is not None and self.M < 2:
            self.fail("M", f"grid needs M >= 2 points per axis, got {self.M}")
        if self.L is not None and not self.L > 0:
            self.fail("L", f"grid half-width must be positive, got {self.L}")
        if self.probes is not None and self.probes < 1:
            self.fail("probes", "probe count must be positive")
        if self.K < 2:
            self.fail("K", "largest block scale K must be >= 2")
        if self.threads is not None and self.threads < 1:
            self.fail("threads", "thread count must be positive")
        if self.seed < 0 or self.seed >= 2**64:
            self.fail("seed", "seed must be an unsigned 64-bit integer")
        out = Path(self.out)
        paths = [out / "report.json", out / "points.csv", out / "meta.json"]
        if self.input:
            inp = Path(self.input)
            if not inp.is_file():
                self.fail("input", f"cannot read input file {self.input}")
            paths.append(inp)
        if self.symbol and self.symbol.endswith(".json"):
            if not Path(self.symbol).is_file():
                self.fail("symbol", f"cannot read symbol file {self.symbol}")
            paths.append(Path(self.symbol))
        resolved = [p.resolve() for p in paths]
        if len(set(resolved)) != len(resolved):
            self.fail("out", "input and output paths must be distinct")
        return self

    def grid(self, N: int | None = None) -> Grid:
        N = self.N if N is None else N
        if self.L is None:
            return Grid.default(N, self.n, M=self.M)
        if self.M is None:
            M = int(math.ceil(2 * self.L * 2.0 * math.sqrt(2 * N + self.n))) + 1
            return Grid(self.n, self.L, M)
        return Grid(self.n, self.L, self.M)


# config keys -> RunConfig attributes; nested objects are flattened below
_SIMPLE_KEYS = {
    "dim": "n", "n": "n", "degree": "N", "N": "N", "seed": "seed", "symbol": "symbol", "out": "out", "threads": "threads",
    "input": "input", "function": "function", "K": "K", "s": "s", "threshold": "threshold",
    "degrees": "degrees", "probes": "probes", "command": "command",
}


def _key_lines(text: str) -> dict:
    lines = {}
    for i, line in enumerate(text.splitlines(), 1):
        for key in re.findall(r'"([A-Za-z_][\w-]*)"\s*:', line):
            lines.setdefault(key, i)
    return lines


def load_config(path: str) -> tuple[dict, dict]:
    """Parse a JSON config; returns (flattened settings, key -> line number)."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", None, path) from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc.msg}", exc.lineno, path) from None
    lines = _key_lines(text)
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object", 1, path)
    flat = {}
    for key, value in data.items():
        if key == "grid":
            if not isinstance(value, dict):
                raise ConfigError("'grid' must be an object {\"L\": .., \"M\": ..}", lines.get(key), path)
            for sub, attr in (("L", "L"), ("M", "M")):
                if sub in value:
                    flat[attr] = value[sub]
                    lines[attr] = lines.get(sub, lines.get(key))
        elif key == "window":
            recipe = value.get("recipe") if isinstance(value, dict) else value
            flat["window"] = recipe
            lines["window"] = lines.get(key)
        elif key == "probes" and isinstance(value, dict):
            if "count" in value:
                flat["probes"] = value["count"]
            if "seed" in value:
                flat["seed"] = value["seed"]
                lines["seed"] = lines.get("seed", lines.get(key))
            lines["probes"] = lines.get(key)
        elif key in _SIMPLE_KEYS:
            flat[_SIMPLE_KEYS[key]] = value
            lines[_SIMPLE_KEYS[key]] = lines.get(key)
        else:
            raise ConfigError(f"unknown config key {key!r}", lines.get(key), path)
    return flat, lines


_TYPES = {"n": int, "N": int, "M": int, "K": int, "probes": int, "threads": int, "seed": int,
          "L": float, "s": float, "threshold": float}


def build_config(args: argparse.Namespace) -> RunConfig:
    settings, lines, source = {}, {}, None
    if args.config:
        settings, lines = load_config(args.config)
        source = args.config
    flag_map = {"dim": "n", "degree": "N", "grid_L": "L", "grid_M": "M", "seed": "seed", "symbol": "symbol",
                "out": "out", "threads": "threads", "input": "input", "function": "function", "K": "K",
                "s": "s", "threshold": "threshold", "probes": "probes", "window": "window"}
    for flag, attr in flag_map.items():
        value = getattr(args, flag, None)
        if value is not None:
            settings[attr] = value
            lines.pop(attr, None)
    settings.pop("command", None)
    for attr, typ in _TYPES.items():
        if attr in settings and settings[attr] is not None:
            try:
                v = settings[attr]
                if typ is int and isinstance(v, float) and not v.is_integer():
                    raise ValueError
                if isinstance(v, bool):
                    raise ValueError
                settings[attr] = typ(v)
            except (TypeError, ValueError):
                raise ConfigError(f"{attr!r} must be {typ.__name__}, got {settings[attr]!r}", lines.get(attr), source)
    cfg = RunConfig(args.command, **settings)
    cfg._lines = lines
    cfg._source = source
    return cfg.validate()


# --------------------------------------------------------------------------
# inputs


def resolve_symbol(cfg: RunConfig):
    from .symbols import BUILTIN_SYMBOLS, builtin_symbol, tabulated_symbol

    if cfg.symbol in BUILTIN_SYMBOLS:
        return builtin_symbol(cfg.symbol, cfg.n)
    path = Path(cfg.symbol)
    if path.suffix == ".json":
        try:
            return tabulated_symbol(json.loads(path.read_text()))
        except (json.JSONDecodeError, ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"bad tabulated symbol {path}: {exc}") from None
    cfg.fail("symbol", f"unknown symbol {cfg.symbol!r}; builtins: {', '.join(BUILTIN_SYMBOLS)} or a .json table")


def resolve_function(cfg: RunConfig, grid: Grid) -> SampledFunction:
    from .spaces import atom, bmo_test_functions

    if cfg.input:
        try:
            return sampled_from_csv(cfg.input)
        except (ValueError, IndexError) as exc:
            raise ConfigError(f"bad input CSV: {exc}", None, cfg.input) from None
    name = cfg.function or "gauss"
    tests = bmo_test_functions(grid)
    if name in tests:
        return tests[name]
    if name == "atom":
        return atom(grid, np.zeros(grid.n), grid.L / 8.0)
    if name == "random":
        rng = np.random.default_rng(cfg.seed)
        c = HermiteCoefficients(grid.n, cfg.N, rng.standard_normal(len(HermiteCoefficients.zeros(grid.n, cfg.N).coeffs)))
        return synthesize(c, grid)
    if name.startswith("phi:"):
        try:
            nu = [int(v) for v in name[4:].split(",")]
        except ValueError:
            nu = []
        if len(nu) != grid.n or min(nu) < 0:
            cfg.fail("function", f"phi:<k,...> needs {grid.n} nonnegative integers, got {name!r}")
        return SampledFunction.from_callable(hermite_function(nu), grid)
    cfg.fail("function", f"unknown function {name!r}; choose from {', '.join(FUNCTIONS)}")


# --------------------------------------------------------------------------
# subcommands; each returns (report dict, points rows, failed flag)


def _finite(*values) -> bool:
    return all(v is not None and np.isfinite(v) for v in values)


def cmd_transform(cfg):
    grid = cfg.grid()
    rng = np.random.default_rng(cfg.seed)
    c = HermiteCoefficients(cfg.n, cfg.N, rng.standard_normal(len(HermiteCoefficients.zeros(cfg.n, cfg.N).coeffs)))
    back = analyze(synthesize(c, grid), cfg.N)
    err = np.abs(back.coeffs - c.coeffs)
    print(f"round trip max abs error: {err.max():.3e}")
    report = {
        "max_abs_error": float(err.max()),
        "grid": {"n": grid.n, "L": grid.L, "M": grid.M},
        "coefficients": coefficients_to_dict(back),
    }
    return report, (range(err.size), err), not _finite(err.max())


def cmd_apply(cfg):
    from .operators import PseudoMultiplier, apply

    m = resolve_symbol(cfg)
    grid = cfg.grid()
    f = resolve_function(cfg, grid)
    T = PseudoMultiplier(m, cfg.N, f.grid)
    out = apply(T, f)
    report = {"symbol": cfg.symbol, "N": cfg.N, "grid": {"n": f.grid.n, "L": f.grid.L, "M": f.grid.M},
              "sup": float(np.abs(out.values).max())}
    return report, out, not np.all(np.isfinite(out.values))


def cmd_check_ci(cfg):
    from .symbols import default_sobolev_order, hormander_norm_fourier, make_window_family

    m = resolve_symbol(cfg)
    if m.continuum is None:
        cfg.fail("symbol", f"symbol {cfg.symbol!r} declares no continuum extension; CI needs one")
    s = default_sobolev_order(cfg.n) if cfg.s is None else cfg.s
    rep = hormander_norm_fourier(m, s, make_window_family(cfg.window), range(1, cfg.K + 1), n=cfg.n,
                                 threshold=cfg.threshold)
    vals = [v for _, v in rep.per_scale]
    return rep.to_dict(), ([j for j, _ in rep.per_scale], vals), not _finite(*vals)


def cmd_check_cii(cfg):
    from .symbols import check_marcinkiewicz

    m = resolve_symbol(cfg)
    rep = check_marcinkiewicz(m, cfg.n, threshold=cfg.threshold)
    vals = [v for _, v in rep.per_scale]
    return rep.to_dict(), (range(len(vals)), vals), not _finite(*vals)


def cmd_bmo(cfg):
    from .spaces import CubeFamily, bmo_seminorm

    f = resolve_function(cfg, cfg.grid())
    est = bmo_seminorm(f, CubeFamily(f.grid))
    print(f"BMO seminorm estimate: {est.value:.6g}")
    return est.to_dict(), (est.family.sides, est.per_level), not _finite(est.value)


def cmd_h1(cfg):
    import warnings

    from .spaces import BoundaryDecayWarning, boundary_ratio, h1_norm, lp_norm, riesz_transform

    f = resolve_function(cfg, cfg.grid())
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", BoundaryDecayWarning)
        value = h1_norm(f)
        riesz = [lp_norm(riesz_transform(f, j), 1) for j in range(f.grid.n)]
    flagged = any(issubclass(w.category, BoundaryDecayWarning) for w in caught)
    print(f"H1 norm estimate: {value:.6g}")
    report = {"h1_norm": value, "l1_norm": lp_norm(f, 1), "riesz_l1_on_grid": riesz,
              "boundary_ratio": boundary_ratio(f), "boundary_warning": flagged}
    return report, (range(len(riesz)), riesz), not _finite(value)


def cmd_asymptotics(cfg):
    from .experiments import DEFAULT_DEGREES, fit_l1_norm_exponent, fit_sup_norm_exponent

    degrees = cfg.degrees or list(DEFAULT_DEGREES)
    sup = fit_sup_norm_exponent(degrees)
    l1 = fit_l1_norm_exponent(degrees)
    print(f"sup-norm slope {sup.slope:.4f} (reference -1/12), L1 slope {l1.slope:.4f} (reference 1/4)")
    report = {"sup_norm": sup.to_dict(), "l1_norm": l1.to_dict()}
    extra = {"points_l1.csv": (l1.x, l1.y)}
    return report, (sup.x, sup.y), not _finite(sup.slope, l1.slope), extra


def cmd_blocks(cfg):
    from .experiments import block_decay_experiment

    m = resolve_symbol(cfg)
    rep = block_decay_experiment(m, cfg.s, cfg.K, cfg.probes or 64, cfg.seed, cfg.n)
    print(f"fitted slope {rep.slope:.4f}, envelope slope {rep.extra['envelope_slope']:.4f}, "
          f"verdict {rep.extra['pass']}")
    failed = not rep.degenerate and not _finite(rep.slope)
    return rep.to_dict(), (rep.x, rep.y), failed


def cmd_probe(cfg):
    from .experiments import linf_bmo_probe

    m = resolve_symbol(cfg)
    rep = linf_bmo_probe(m, cfg.probes or 128, cfg.seed, cfg.n, cfg.N, cfg.s)
    print(f"max ||T f||_* / ||f||_inf = {rep.ratio:.6g}, constant {rep.constant:.6g}")
    kinds = sorted(rep.per_kind)
    return rep.to_dict(), (kinds, [rep.per_kind[k] for k in kinds]), not rep.bounded


HANDLERS = {
    "transform": cmd_transform, "apply": cmd_apply, "check-ci": cmd_check_ci, "check-cii": cmd_check_cii,
    "bmo": cmd_bmo, "h1": cmd_h1, "asymptotics": cmd_asymptotics, "blocks": cmd_blocks, "probe": cmd_probe,
}


def run(cfg: RunConfig) -> int:
    """Execute one validated configuration and write its artifacts."""
    start = time.perf_counter()
    limiter = contextlib.nullcontext()
    if cfg.threads:
        from threadpoolctl import threadpool_limits

        limiter = threadpool_limits(limits=cfg.threads)
    with limiter:
        result = HANDLERS[cfg.command](cfg)
    report, points, failed = result[:3]
    extra = result[3] if len(result) > 3 else {}
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "report.json", {"command": cfg.command, "seed": cfg.seed, "result": report})
    if isinstance(points, SampledFunction):
        sampled_to_csv(points, out / "points.csv")
    else:
        _write_rows(out / "points.csv", *points)
    for name, rows in extra.items():
        _write_rows(out / name, *rows)
    config = {k: v for k, v in asdict(cfg).items() if not k.startswith("_")}
    meta = {
        "version": __version__,
        "backend": _backend.NAME,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "elapsed_seconds": time.perf_counter() - start,
        "argv": sys.argv[1:],
        "config": config,
    }
    write_json(out / "meta.json", meta)
    return EXIT_NUMERIC if failed else EXIT_OK


def _write_rows(path, xs, ys):
    xs, ys = list(xs), list(ys)
    if xs and isinstance(xs[0], str):
        with open(path, "w") as fh:
            fh.write("x,y\n")
            for x, y in zip(xs, ys):
                fh.write(f"{x},{float(y)!r}\n")
    else:
        write_points_csv(path, xs, ys)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its values")
    common.add_argument("--out", help="output directory (default: hermite_bmo_out)")
    common.add_argument("--seed", type=int, help=f"random seed (default: {DEFAULT_SEED:#x})")
    common.add_argument("--threads", type=int, help="cap on BLAS/worker threads")
    common.add_argument("--dim", type=int, help="space dimension n (1, 2 or 3)")
    common.add_argument("--degree", type=int, help="degree cap N")
    common.add_argument("--grid-L", dest="grid_L", type=float, help="grid half-width L")
    common.add_argument("--grid-M", dest="grid_M", type=int, help="grid points per axis M")
    common.add_argument("--symbol", help="builtin symbol id or tabulated .json file")
    common.add_argument("--window", help="window recipe: mollifier or polynomial")
    common.add_argument("--input", help="grid CSV (x1,...,xn,re,im) for apply/bmo/h1")
    common.add_argument("--function", help=f"builtin input function: {', '.join(FUNCTIONS)}")
    common.add_argument("--probes", type=int, help="probe count for blocks/probe")
    common.add_argument("--K", type=int, help="largest dyadic scale")
    common.add_argument("--s", type=float, help="Sobolev order (default: between the critical order and the CII cap)")
    common.add_argument("--threshold", type=float, help="pass/fail threshold for condition checks")

    parser = argparse.ArgumentParser(prog="hermite-bmo", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    helps = {
        "transform": "analyze/synthesize round trip on random coefficients",
        "apply": "apply a pseudo-multiplier to a grid function",
        "check-ci": "Sobolev-type condition on dyadic windows of the symbol",
        "check-cii": "difference (Marcinkiewicz-type) condition",
        "bmo": "BMO seminorm estimate of a grid function",
        "h1": "H1 norm via Riesz transforms",
        "asymptotics": "sup-norm and L1-norm exponents of Hermite functions",
        "blocks": "block-norm decay against the theoretical envelope",
        "probe": "L^inf -> BMO operator-norm probe",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = build_config(args)
        return run(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        # parameters that validate individually but not jointly (e.g. a grid too coarse for the cubes)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
