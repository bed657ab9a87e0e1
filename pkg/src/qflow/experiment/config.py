"""Flat ``dotted.key = value`` configuration files for runs and sweeps."""

import math
from dataclasses import dataclass, field, replace

from ..errors import ConfigError, QFlowError
from ..fields import Grid
from ..manifold import MaterialParams
from ..solver import SCHEMES, SolverConfig, max_stable_dt

BUILDERS = ("circle_map", "perturbed_circle_map", "constant", "perturbed_constant")
RANDOM_BUILDERS = ("perturbed_circle_map", "perturbed_constant")


def parse_text(text, source="<config>"):
    """Ordered ``{key: (value, line)}``; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or any(not piece for piece in key.split(".")):
            raise ConfigError(f"{source}:{lineno}: malformed key {key!r}")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = (value, lineno)
    return out


class _Reader:
    def __init__(self, entries, source):
        self.entries = entries
        self.source = source
        self.used = set()

    def _where(self, key):
        line = self.entries[key][1] if key in self.entries else "?"
        return f"{self.source}:{line}: key {key!r}"

    def get(self, key, kind, default=None):
        if key not in self.entries:
            if default is None:
                raise ConfigError(f"{self.source}: missing required key {key!r}")
            return default
        self.used.add(key)
        raw = self.entries[key][0]
        try:
            if kind is bool:
                low = raw.lower()
                if low not in ("true", "false", "1", "0", "yes", "no"):
                    raise ValueError(raw)
                return low in ("true", "1", "yes")
            if kind is float:
                value = float(raw)
                if not math.isfinite(value):
                    raise ValueError(raw)
                return value
            if kind is int:
                return int(raw)
            if kind is list:
                return [float(v) for v in raw.replace(",", " ").split()]
            return raw
        except ValueError:
            raise ConfigError(f"{self._where(key)}: cannot read {raw!r} as {kind.__name__}") from None

    def check_unused(self, allowed_prefixes=()):
        for key in self.entries:
            if key not in self.used and not key.startswith(allowed_prefixes):
                raise ConfigError(f"{self._where(key)}: unknown key")


@dataclass(frozen=True)
class InitSpec:
    builder: str = "circle_map"
    m: int = 1
    axis: int = 0
    amplitude: float = 0.0
    seed: int | None = None


@dataclass(frozen=True)
class RunConfig:
    params: MaterialParams
    grid: Grid
    init: InitSpec
    solver: SolverConfig
    t0: float | None = None
    radii: tuple = ()
    output_dir: str = "out"
    auto_dt: bool = False
    text: str = field(default="", compare=False, repr=False)

    def with_eps(self, eps):
        """Same configuration at another ``eps``.

        An automatic step is recomputed; an explicit one is scaled by the
        ratio of ``eps`` values, since the bulk stiffness limit is linear in it.
        """
        params = self.params.replace(eps=eps)
        if self.auto_dt:
            dt = max_stable_dt(self.grid, params, self.solver.scheme)
        else:
            dt = self.solver.dt * eps / self.params.eps
        return replace(self, params=params, solver=replace(self.solver, dt=dt))


def _run_from_reader(r):
    try:
        params = MaterialParams(
            a=r.get("material.a", float, 1.0),
            b=r.get("material.b", float, 1.0),
            c=r.get("material.c", float, 1.0),
            L1=r.get("material.L1", float, 1.0),
            Gamma=r.get("material.Gamma", float, 1.0),
            eps=r.get("material.eps", float, 1e-2),
        )
        dim = r.get("grid.dim", int, 2)
        n = r.get("grid.n", int, 64)
        length = r.get("grid.length", float, 1.0)
        grid = Grid.uniform(dim, n, length)
        init = InitSpec(
            builder=r.get("init.builder", str, "circle_map"),
            m=r.get("init.m", int, 1),
            axis=r.get("init.axis", int, 0),
            amplitude=r.get("init.amplitude", float, 0.0),
            seed=r.get("init.seed", int, -1),
        )
        if init.seed == -1:
            init = replace(init, seed=None)
        scheme = r.get("solver.scheme", str, "rk2")
        auto_dt = r.get("solver.dt", str).lower() == "auto"
        dt = max_stable_dt(grid, params, scheme) if scheme in SCHEMES and auto_dt else r.get("solver.dt", float)
        solver = SolverConfig(
            dt=dt,
            scheme=scheme,
            T=r.get("solver.T", float, 0.1),
            snapshot_every=r.get("solver.snapshot_every", int, 1),
            drift_correction=r.get("solver.drift_correction", bool, False),
        )
    except ConfigError:
        raise
    except QFlowError as exc:
        raise ConfigError(f"{r.source}: {exc}") from exc
    if init.builder not in BUILDERS:
        raise ConfigError(f"{r._where('init.builder')}: unknown builder {init.builder!r}; choose from {BUILDERS}")
    if init.builder in RANDOM_BUILDERS and init.seed is None:
        raise ConfigError(f"{r.source}: builder {init.builder!r} is random and needs init.seed")
    if solver.scheme not in SCHEMES:
        raise ConfigError(f"{r._where('solver.scheme')}: unknown scheme")
    t0 = r.get("monotonicity.t0", float, -1.0)
    radii = tuple(r.get("monotonicity.radii", list, []))
    out_dir = r.get("output.dir", str, "out")
    return params, grid, init, solver, (None if t0 < 0 else t0), radii, out_dir, auto_dt


def load_run_config(text, source="<config>"):
    r = _Reader(parse_text(text, source), source)
    fields = _run_from_reader(r)
    r.check_unused()
    return RunConfig(*fields, text=text)


@dataclass(frozen=True)
class SweepSpec:
    base: RunConfig
    eps0: float
    ratio: float
    count: int
    compare_harmonic: bool = True

    def __post_init__(self):
        if self.count < 2:
            raise ConfigError(f"an epsilon sweep needs count >= 2, got {self.count}")
        if not 0.0 < self.ratio < 1.0:
            raise ConfigError(f"sweep.ratio must lie in (0, 1) for a decreasing ladder, got {self.ratio}")
        if not self.eps0 > 0.0:
            raise ConfigError("sweep.eps0 must be positive")

    @property
    def ladder(self):
        return [self.eps0 * self.ratio**k for k in range(self.count)]


def load_sweep_spec(text, source="<sweep>"):
    r = _Reader(parse_text(text, source), source)
    base = RunConfig(*_run_from_reader(r), text=text)
    spec = SweepSpec(
        base=base,
        eps0=r.get("sweep.eps0", float, base.params.eps),
        ratio=r.get("sweep.ratio", float, 0.5),
        count=r.get("sweep.count", int, 3),
        compare_harmonic=r.get("sweep.compare_harmonic", bool, True),
    )
    r.check_unused()
    return spec
