"""Experiment configuration read from TOML.

Every table is checked against a fixed schema: unknown keys, wrong types and
out-of-range values raise ConfigError naming the dotted field path.  Syntax
errors carry the line and column reported by the TOML parser.

    n = 3
    cutoff_tol = 1e-3
    output = "out/square_well"

    [potential]            # family + parameters, or table = "path"
    family = "square_well"
    depth = 4.0
    radius = 1.0

    [energy]   lambda_min, lambda_max, points
    [radial]   r_min, r_max, points
    [lattice]  sizes = [512, 1024], taper
    [sweep]    g_min, g_max, steps
    [synthetic] windings = [-2, -1, 0, 1, 2], X, width
"""

import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .potentials import FAMILIES, build_potential, load_tabulated_potential
from .scatter import EnergyGrid
from .spectrum import RadialGrid


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class LatticeOptions:
    sizes: tuple = (512, 1024)
    taper: float = 3.0


@dataclass(frozen=True)
class SweepOptions:
    g_min: float = 0.0
    g_max: float = 12.0
    steps: int = 60


@dataclass(frozen=True)
class SyntheticOptions:
    windings: tuple = (-2, -1, 0, 1, 2)
    X: float = 16.0
    width: float = 1.5


@dataclass
class ExperimentConfig:
    n: int
    potential: dict
    energy: EnergyGrid = field(default_factory=EnergyGrid)
    radial: RadialGrid = field(default_factory=RadialGrid)
    lattice: LatticeOptions = field(default_factory=LatticeOptions)
    sweep: SweepOptions = field(default_factory=SweepOptions)
    synthetic: SyntheticOptions = None
    cutoff_tol: float = 1e-3
    output: str = "out"
    base_dir: Path = Path(".")

    def build_potential(self):
        params = dict(self.potential)
        if "table" in params:
            path = Path(params["table"])
            if not path.is_absolute():
                path = self.base_dir / path
            return load_tabulated_potential(path)
        family = params.pop("family")
        return build_potential(family, params)


_NUM = (int, float)

_TABLES = {
    "energy": {"lambda_min": _NUM, "lambda_max": _NUM, "points": int},
    "radial": {"r_min": _NUM, "r_max": _NUM, "points": int},
    "lattice": {"sizes": list, "taper": _NUM},
    "sweep": {"g_min": _NUM, "g_max": _NUM, "steps": int},
    "synthetic": {"windings": list, "X": _NUM, "width": _NUM},
}
_TOP = {"n": int, "cutoff_tol": _NUM, "output": str, "potential": dict, **{k: dict for k in _TABLES}}


def _typed(path, value, kind):
    if isinstance(value, bool) or not isinstance(value, kind):
        names = kind.__name__ if isinstance(kind, type) else "number"
        raise ConfigError(f"{path}: expected {names}, got {type(value).__name__} {value!r}")
    return value


def _section(name, raw, schema):
    out = {}
    for key, value in raw.items():
        path = f"{name}.{key}"
        if key not in schema:
            raise ConfigError(f"{path}: unknown key (allowed: {', '.join(sorted(schema))})")
        out[key] = _typed(path, value, schema[key])
    return out


def _potential(raw):
    if "table" in raw:
        extra = set(raw) - {"table"}
        if extra:
            raise ConfigError(f"potential.{sorted(extra)[0]}: not allowed together with potential.table")
        return {"table": _typed("potential.table", raw["table"], str)}
    if "family" not in raw:
        raise ConfigError("potential.family: missing (or give potential.table)")
    family = _typed("potential.family", raw["family"], str)
    if family not in FAMILIES:
        raise ConfigError(f"potential.family: unknown family {family!r} (known: {', '.join(sorted(FAMILIES))})")
    allowed = FAMILIES[family][1]
    out = {"family": family}
    for key, value in raw.items():
        if key == "family":
            continue
        if key not in allowed:
            raise ConfigError(f"potential.{key}: not a parameter of {family} "
                              f"(allowed: {', '.join(sorted(allowed)) or 'none'})")
        out[key] = float(_typed(f"potential.{key}", value, _NUM))
    missing = {"depth", "radius", "power"} & allowed - set(out)
    if missing:
        raise ConfigError(f"potential.{sorted(missing)[0]}: missing")
    return out


def _build(cls, name, kw):
    try:
        return cls(**kw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{name}: {exc}") from None


def parse_config(data, base_dir=Path(".")):
    for key, value in data.items():
        if key not in _TOP:
            raise ConfigError(f"{key}: unknown key (allowed: {', '.join(sorted(_TOP))})")
        _typed(key, value, _TOP[key])
    if "n" not in data:
        raise ConfigError("n: missing")
    n = data["n"]
    if n < 2:
        raise ConfigError(f"n: dimension must be >= 2, got {n}")
    if "potential" not in data:
        raise ConfigError("potential: missing table")
    tol = float(data.get("cutoff_tol", 1e-3))
    if not tol > 0:
        raise ConfigError(f"cutoff_tol: must be positive, got {tol}")
    sec = {name: _section(name, data.get(name, {}), schema) for name, schema in _TABLES.items()}
    lat = sec["lattice"]
    if "sizes" in lat:
        sizes = tuple(_typed(f"lattice.sizes[{i}]", v, int) for i, v in enumerate(lat["sizes"]))
        if len(sizes) != 2 or sizes[1] != 2 * sizes[0] or sizes[0] < 256 or sizes[0] & (sizes[0] - 1):
            raise ConfigError(f"lattice.sizes: need [m, 2m] with m a power of two >= 256, got {list(sizes)}")
        lat["sizes"] = sizes
    syn = None
    if "synthetic" in data:
        s = sec["synthetic"]
        if "windings" in s:
            s["windings"] = tuple(_typed(f"synthetic.windings[{i}]", v, int)
                                  for i, v in enumerate(s["windings"]))
        syn = _build(SyntheticOptions, "synthetic", s)
    sweep = _build(SweepOptions, "sweep", sec["sweep"])
    if not sweep.g_max > sweep.g_min or sweep.steps < 1:
        raise ConfigError("sweep: need g_max > g_min and steps >= 1")
    return ExperimentConfig(
        n=n,
        potential=_potential(data["potential"]),
        energy=_build(EnergyGrid, "energy", sec["energy"]),
        radial=_build(RadialGrid, "radial", sec["radial"]),
        lattice=_build(LatticeOptions, "lattice", lat),
        sweep=sweep,
        synthetic=syn,
        cutoff_tol=tol,
        output=data.get("output", "out"),
        base_dir=Path(base_dir),
    )


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return parse_config(data, path.parent)
