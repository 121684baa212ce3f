"""Benchmark initial data and the multi-resolution experiment runner.

Random interface coefficients come from a counter-based SplitMix64 stream,
so every language and every mesh resolution sees the same numbers::

    z = (seed + (k + 1) * 0x9E3779B97F4A7C15) mod 2**64
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2**64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB mod 2**64
    z =  z ^ (z >> 31)
    u_k = (z >> 11) * 2**-53                  # uniform on [0, 1)

Interface ``j`` (0-based) with ``m`` modes uses counters ``j*2m + n`` for the
amplitudes ``a^n`` (then normalized to sum 1) and ``j*2m + m + n`` for the
phases ``b^n = -pi + 2*pi*u``, ``n = 0..m-1``.
"""
from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import euler, io
from .analysis import ConvergenceTable, convergence_table, cesaro_average, first_variance
from .errors import ConfigError, KconvError, ParameterError
from .euler import ConservedField, GasModel, Grid2D
from .flm import FlmParams, run_flm
from .grp import DEFAULT_CFL as GRP_CFL, run_grp
from .stack import VARIABLES, SolutionStack
from .wasserstein import E4_COMPONENTS

log = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(seed: int, k: int) -> int:
    z = (seed + (k + 1) * GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def uniform(seed: int, k: int) -> float:
    return (splitmix64(seed, k) >> 11) * 2.0**-53


@dataclass(frozen=True)
class PerturbationSpec:
    modes: int = 10
    epsilon: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.modes < 1:
            raise ParameterError("at least one perturbation mode is required")
        if self.epsilon < 0.0:
            raise ParameterError("epsilon must be non-negative")
        if not 0 <= self.seed <= MASK64:
            raise ParameterError("seed must fit in 64 unsigned bits")

    def coefficients(self, interface: int = 0):
        """Normalized amplitudes and phases ``(a, b)`` of one interface."""
        m = self.modes
        base = interface * 2 * m
        a = np.array([uniform(self.seed, base + n) for n in range(m)])
        b = np.array([-math.pi + 2.0 * math.pi * uniform(self.seed, base + m + n) for n in range(m)])
        total = a.sum()
        a = np.full(m, 1.0 / m) if total == 0.0 else a / total
        return a, b


def kh_interface(x1, spec: PerturbationSpec, j: int):
    """``J_j + eps * sum_n a^n cos(b^n + 2 n pi x1)`` for ``j`` in ``{0, 1}``."""
    a, b = spec.coefficients(j)
    n = np.arange(1, spec.modes + 1)
    x1 = np.asarray(x1, dtype=np.float64)
    Y = np.sum(a * np.cos(b + 2.0 * math.pi * n * x1[..., None]), axis=-1)
    return (0.25, 0.75)[j] + spec.epsilon * Y


def kh_initial(grid: Grid2D, spec: PerturbationSpec, gas: GasModel) -> ConservedField:
    x1, x2 = grid.centers()
    inner = (kh_interface(x1, spec, 0) < x2) & (x2 < kh_interface(x1, spec, 1))
    one = np.ones_like(x1)
    prim = np.stack([
        np.where(inner, 2.0, 1.0),
        np.where(inner, -0.5, 0.5),
        0.0 * one,
        2.5 * one,
    ])
    return ConservedField(grid, euler.primitive_to_conserved(prim, gas))


def rm_interface(phi, spec: PerturbationSpec):
    a, b = spec.coefficients(0)
    Y = np.sum(a * np.cos(np.asarray(phi)[..., None] + b), axis=-1)
    return 0.25 + spec.epsilon * Y


def rm_initial(grid: Grid2D, spec: PerturbationSpec, gas: GasModel) -> ConservedField:
    x1, x2 = grid.centers()
    dx, dy = x1 - 0.5, x2 - 0.5
    r = np.hypot(dx, dy)
    phi = np.arctan2(dy, dx)
    # the pressure core lies well inside the density interface, so the
    # angle at r = 0 never matters
    dense = (r < rm_interface(phi, spec)) | (r < 0.1)
    prim = np.stack([
        np.where(dense, 2.0, 1.0),
        np.zeros_like(r),
        np.zeros_like(r),
        np.where(r < 0.1, 20.0, 1.0),
    ])
    return ConservedField(grid, euler.primitive_to_conserved(prim, gas))


def sod_initial(grid: Grid2D, gas: GasModel, x0: float = 0.5) -> ConservedField:
    """Sod tube along ``x1``, constant in ``x2``."""
    x1, _ = grid.centers()
    left = x1 < x0
    prim = np.stack([
        np.where(left, 1.0, 0.125),
        np.zeros_like(x1),
        np.zeros_like(x1),
        np.where(left, 1.0, 0.1),
    ])
    return ConservedField(grid, euler.primitive_to_conserved(prim, gas))


def smooth_wave_initial(grid: Grid2D, gas: GasModel, amplitude: float = 0.2) -> ConservedField:
    """``rho = 1 + amplitude sin(2 pi x1)`` advected with ``u = (1, 0)``, ``p = 1``."""
    x1, _ = grid.centers()
    one = np.ones_like(x1)
    prim = np.stack([1.0 + amplitude * np.sin(2.0 * math.pi * x1), one, 0.0 * one, one])
    return ConservedField(grid, euler.primitive_to_conserved(prim, gas))


def smooth_wave_exact(grid: Grid2D, t: float, amplitude: float = 0.2) -> np.ndarray:
    """Cell averages of the exact density at time ``t``."""
    h = grid.h
    x = grid.centers_1d()
    # average of sin over [x - h/2, x + h/2]
    avg = np.sin(2.0 * math.pi * (x - t)) * math.sin(math.pi * h) / (math.pi * h)
    return np.broadcast_to((1.0 + amplitude * avg)[:, None], grid.shape)


BENCHMARKS = ("kelvin_helmholtz", "richtmyer_meshkov", "sod_2d", "smooth_wave", "custom")
SCHEMES = ("flm", "plain_upwind", "grp")
DEFAULT_BOUNDARY = {"sod_2d": "transmissive"}


@dataclass
class ExperimentConfig:
    benchmark: str = "kelvin_helmholtz"
    scheme: str = "flm"
    levels: tuple = (16, 32, 64, 128, 256)
    t_end: float = 2.0
    gamma: float = 1.4
    alpha: float = 1.8
    beta: float = 0.8
    mu_scale: float = 1.0
    cfl: float | None = None
    seed: int = 0
    modes: int = 10
    epsilon: float = 0.01
    out_dir: str = "out"
    snapshot_times: tuple = ()
    boundary: str | None = None
    q: float = 1.0
    e4_components: str = "tuple"
    scaling: tuple | None = None
    initial: str | None = None
    threads: int = 1

    def __post_init__(self):
        self.levels = tuple(int(n) for n in self.levels)
        self.snapshot_times = tuple(float(t) for t in self.snapshot_times)
        self.validate()

    def validate(self):
        if self.benchmark not in BENCHMARKS:
            raise ConfigError(f"unknown benchmark {self.benchmark!r}; choose from {BENCHMARKS}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if not self.levels:
            raise ConfigError("levels must not be empty")
        for a, b in zip(self.levels, self.levels[1:]):
            if b <= a or b % a:
                raise ConfigError(f"levels {list(self.levels)} are not strictly increasing nested refinements")
        if self.levels[0] < 2:
            raise ConfigError("every level needs n >= 2")
        if not self.t_end > 0.0:
            raise ConfigError("t_end must be positive")
        if not self.gamma > 1.0:
            raise ConfigError("gamma must exceed 1")
        if self.cfl is not None and not self.cfl > 0.0:
            raise ConfigError("cfl must be positive")
        if self.boundary not in (None, "periodic", "transmissive"):
            raise ConfigError(f"unknown boundary {self.boundary!r}")
        if self.e4_components not in E4_COMPONENTS:
            raise ConfigError(f"unknown e4_components {self.e4_components!r}; choose from {tuple(E4_COMPONENTS)}")
        if self.benchmark == "custom" and not self.initial:
            raise ConfigError("benchmark=custom needs initial=<path with {n}>")
        if self.threads < 0:
            raise ConfigError("threads must be >= 0")
        try:
            self.flm_params()
            self.perturbation()
        except ParameterError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def grid_boundary(self) -> str:
        return self.boundary or DEFAULT_BOUNDARY.get(self.benchmark, "periodic")

    def perturbation(self) -> PerturbationSpec:
        return PerturbationSpec(self.modes, self.epsilon, self.seed)

    def flm_params(self) -> FlmParams:
        kw = {} if self.cfl is None else {"cfl": self.cfl}
        variant = "plain_upwind" if self.scheme == "plain_upwind" else "flm"
        return FlmParams(self.alpha, self.beta, self.mu_scale, variant=variant, **kw)

    def effective_cfl(self) -> float:
        if self.cfl is not None:
            return self.cfl
        return GRP_CFL if self.scheme == "grp" else FlmParams().cfl

    def lines(self) -> list:
        """``key=value`` lines that parse back to this configuration."""
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            if isinstance(v, tuple):
                v = ",".join(repr(x) if isinstance(x, float) else str(x) for x in v)
            elif isinstance(v, float):
                v = repr(v)
            out.append(f"{f.name}={v}")
        return out


_INT_KEYS = {"seed", "modes", "threads"}
_FLOAT_KEYS = {"t_end", "gamma", "alpha", "beta", "mu_scale", "cfl", "epsilon", "q"}
_LIST_KEYS = {"levels": int, "snapshot_times": float, "scaling": float}
CONFIG_KEYS = tuple(f.name for f in fields(ExperimentConfig))


def _convert(key, raw: str):
    raw = raw.strip()
    try:
        if key in _INT_KEYS:
            return int(raw, 0)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _LIST_KEYS:
            return tuple(_LIST_KEYS[key](x) for x in raw.replace(" ", "").split(",") if x)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return raw


def parse_config(text: str, source="<config>") -> dict:
    """``key=value`` lines; ``#`` starts a comment, blank lines are ignored."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        out[key] = _convert(key, value)
    return out


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    """Read a config file; ``overrides`` (raw strings) take precedence."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    values = parse_config(text, str(path))
    for key, raw in (overrides or {}).items():
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown override {key!r}")
        values[key] = _convert(key, raw)
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def initial_state(config: ExperimentConfig, n: int, gas: GasModel) -> ConservedField:
    grid = Grid2D(n, config.grid_boundary)
    b = config.benchmark
    if b == "kelvin_helmholtz":
        return kh_initial(grid, config.perturbation(), gas)
    if b == "richtmyer_meshkov":
        return rm_initial(grid, config.perturbation(), gas)
    if b == "sod_2d":
        return sod_initial(grid, gas)
    if b == "smooth_wave":
        return smooth_wave_initial(grid, gas)
    state, snap = io.read_state(config.initial.format(n=n), config.grid_boundary)
    if snap.n != n:
        raise ConfigError(f"{config.initial.format(n=n)} holds an {snap.n}-grid, expected {n}")
    return state


def level_dir(out_dir, n: int) -> Path:
    return Path(out_dir) / f"level_{n:04d}"


@dataclass
class LevelResult:
    n: int
    state: ConservedField | None
    trace: object = None
    error: str | None = None


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    gas: GasModel
    stack: SolutionStack | None
    levels: list
    tables: dict = field(default_factory=dict)

    @property
    def failed(self) -> list:
        return [lv for lv in self.levels if lv.error is not None]

    @property
    def table(self) -> ConvergenceTable | None:
        return self.tables.get("rho")


def run_level(config: ExperimentConfig, n: int, gas: GasModel, initial=None, write=True) -> LevelResult:
    initial = initial_state(config, n, gas) if initial is None else initial
    ldir = level_dir(config.out_dir, n)
    snapshots = []

    def keep(t, state):
        snapshots.append((t, state))
        if write:
            name = "final.eulf" if t == config.t_end else f"t_{t:.6f}.eulf"
            io.write_state(ldir / name, state, gas, t)

    if config.scheme == "grp":
        run = lambda: run_grp(initial, gas, config.t_end, config.effective_cfl(),
                              observers=[keep], snapshot_times=config.snapshot_times)
    else:
        run = lambda: run_flm(initial, config.flm_params(), gas, config.t_end,
                              observers=[keep], snapshot_times=config.snapshot_times)
    try:
        state, trace = run()
    except KconvError as exc:
        log.error("level %d failed: %s", n, exc)
        return LevelResult(n, None, None, f"{type(exc).__name__}: {exc}")
    if write:
        io.write_diagnostics_csv(ldir / "diagnostics.csv", trace)
        io.write_pgm(ldir / "rho.pgm", state.rho)
    return LevelResult(n, state, trace)


def resolve_threads(threads: int) -> int:
    if threads == 0:
        return os.cpu_count() or 1
    return threads


def run_experiment(config: ExperimentConfig, write=True) -> ExperimentResult:
    """Run every level, then tabulate E1-E4 against the finest completed
    level.

    The entropy floor is shared by all levels: the minimum initial specific
    entropy over the whole hierarchy, less ``1e-12``.
    """
    base = GasModel(config.gamma)
    initials = {n: initial_state(config, n, base) for n in config.levels}
    gas = base.with_floor_from(*initials.values())
    out = Path(config.out_dir)
    if write:
        out.mkdir(parents=True, exist_ok=True)
    workers = min(resolve_threads(config.threads), len(config.levels))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            levels = list(pool.map(lambda n: run_level(config, n, gas, initials[n], write), config.levels))
    else:
        levels = [run_level(config, n, gas, initials[n], write) for n in config.levels]

    done = [(lv.n, lv.state) for lv in levels if lv.error is None]
    stack = SolutionStack(done, gas, config.t_end) if done else None
    result = ExperimentResult(config, gas, stack, levels)
    if stack is not None:
        result.tables = tables_for(stack, config.q, config.e4_components, config.scaling)
        failed = [lv.n for lv in levels if lv.error is not None and lv.n < stack.finest]
        for t in result.tables.values():
            t.failed = failed
    if write:
        write_outputs(result)
    return result


def tables_for(stack: SolutionStack, q=1.0, components="tuple", scaling=None) -> dict:
    """One convergence table per variable; the E4 column is shared."""
    first = convergence_table(stack, "rho", q, components, scaling)
    tables = {"rho": first}
    for var in VARIABLES[1:]:
        t = convergence_table(stack, var, with_e4=False)
        t.errors["E4"] = first.errors["E4"]
        tables[var] = t
    return tables


def write_meta(path, config: ExperimentConfig, gas: GasModel, extra=()):
    lines = [f"s_floor={gas.s_floor!r}", f"a_coeff={gas.a_coeff!r}"]
    lines += config.lines() + list(extra)
    Path(path).write_text("\n".join(lines) + "\n")


def read_meta(path) -> dict:
    out = {}
    for line in Path(path).read_text().splitlines():
        if "=" in line:
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def write_outputs(result: ExperimentResult):
    config, out = result.config, Path(result.config.out_dir)
    extra = [f"failed_levels={','.join(str(lv.n) for lv in result.failed)}"]
    write_meta(out / "run_meta.cfg", config, result.gas, extra)
    for lv in result.failed:
        (level_dir(out, lv.n)).mkdir(parents=True, exist_ok=True)
        (level_dir(out, lv.n) / "FAILED").write_text(lv.error + "\n")
    if result.stack is None:
        return
    for var, table in result.tables.items():
        name = "table.csv" if var == "rho" else f"table_{var}.csv"
        (out / name).write_text(table.to_csv())
    stack = result.stack
    avg = cesaro_average(stack, None, "rho")
    var = first_variance(stack, None, "rho")
    io.write_eulf(out / "cesaro_rho.eulf", avg, result.gas.gamma, stack.time)
    io.write_eulf(out / "variance_rho.eulf", var, result.gas.gamma, stack.time)
    io.write_pgm(out / "cesaro_rho.pgm", avg)
    io.write_pgm(out / "variance_rho.pgm", var)


def load_stack(run_dir, reference: int | None = None, gas: GasModel | None = None):
    """Rebuild the final-time stack from ``level_XXXX/final.eulf`` files.

    The entropy floor comes from ``run_meta.cfg`` when present, otherwise
    from the stored states themselves.
    """
    from .errors import ConsistencyError

    run_dir = Path(run_dir)
    files = sorted(run_dir.glob("level_*/final.eulf"))
    if not files:
        raise ConfigError(f"{run_dir}: no level_*/final.eulf snapshots")
    meta_path = run_dir / "run_meta.cfg"
    meta = read_meta(meta_path) if meta_path.exists() else {}
    levels, snaps = [], []
    for f in files:
        state, snap = io.read_state(f)
        levels.append((snap.n, state))
        snaps.append((f, snap))
    f0, s0 = snaps[0]
    for f, s in snaps[1:]:
        if s.gamma != s0.gamma:
            raise ConsistencyError(f"gamma {s.gamma} in {f} differs from {s0.gamma} in {f0}")
        if s.time != s0.time:
            raise ConsistencyError(f"time {s.time} in {f} differs from {s0.time} in {f0}")
    if gas is None:
        gas = GasModel(s0.gamma)
        if "s_floor" in meta:
            gas = gas.with_floor(float(meta["s_floor"]))
        else:
            gas = gas.with_floor_from(*(st for _, st in levels))
    if reference is not None:
        ns = sorted(n for n, _ in levels)
        if reference not in ns:
            raise ParameterError(f"reference level {reference} not found in {run_dir} (have {ns})")
        if reference != ns[-1]:
            raise ParameterError(f"reference level {reference} is not the finest level {ns[-1]}")
    return SolutionStack(levels, gas, s0.time)

