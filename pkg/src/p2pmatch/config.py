"""Run configuration and the flat ``key=value`` config file format."""
import dataclasses
from dataclasses import dataclass, field, fields

from .errors import InvalidConfig


@dataclass
class RunConfig:
    excess_ratio: float = 0.20
    wait_ratio: float = 0.50
    capacity: int = 4
    batch_window_s: float = 900.0
    horizon_s: float = None  # departure spread; defaults to one batch window
    n_drivers: int = 100
    n_passengers: int = 200
    seed: int = 0
    prune: bool = True
    combo_mode: str = "exact"
    assign_mode: str = "exact"
    v_max_kmh: float = None
    max_combos_per_driver: int = None
    # demand sampler
    n_zones: int = 16
    zone_weights: list = field(default=None)
    od_concentration: float = None  # Dirichlet alpha for per-instance zone weights
    # synthetic network
    grid_rows: int = 32
    grid_cols: int = 32
    spacing_km: float = 0.5
    network_seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.excess_ratio < 0 or self.wait_ratio < 0:
            raise InvalidConfig("ratios must be >= 0")
        if self.n_drivers < 0 or self.n_passengers < 0:
            raise InvalidConfig("participant counts must be >= 0")
        if self.capacity < 1:
            raise InvalidConfig("capacity must be >= 1")
        if self.batch_window_s <= 0:
            raise InvalidConfig("batch_window_s must be > 0")
        if self.combo_mode not in ("exact", "greedy") or self.assign_mode not in ("exact", "greedy"):
            raise InvalidConfig("modes are 'exact' or 'greedy'")
        if self.od_concentration is not None and self.od_concentration <= 0:
            raise InvalidConfig("od_concentration must be > 0")
        if self.zone_weights is not None and (
                len(self.zone_weights) != self.n_zones or min(self.zone_weights) < 0
                or sum(self.zone_weights) <= 0):
            raise InvalidConfig("zone_weights needs n_zones non-negative entries with positive sum")

    @property
    def horizon(self):
        return self.batch_window_s if self.horizon_s is None else self.horizon_s

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


_BOOL = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}


def _coerce(name, raw):
    kinds = {f.name: f.type for f in fields(RunConfig)}
    if name not in kinds:
        raise InvalidConfig(f"unknown config key {name!r}")
    kind = kinds[name]
    raw = raw.strip()
    if raw.lower() in ("", "none"):
        return None
    try:
        if kind == "bool" or kind is bool:
            return _BOOL[raw.lower()]
        if kind == "int" or kind is int:
            return int(raw)
        if kind == "float" or kind is float:
            return float(raw)
        if kind == "list" or kind is list:
            return [float(x) for x in raw.split(",")]
    except (KeyError, ValueError) as e:
        raise InvalidConfig(f"bad value for {name}: {raw!r}") from e
    return raw


def parse_config(text, base=None):
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfig(f"line {lineno}: expected key=value")
        key, raw = line.split("=", 1)
        values[key.strip()] = _coerce(key.strip(), raw)
    return (base or RunConfig()).replace(**values)


def load_config(path, base=None):
    with open(path, encoding="utf-8") as f:
        return parse_config(f.read(), base)


def parse_grid(text):
    """Sweep grid: one ``key=v1,v2,...`` line per axis."""
    grid = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfig(f"bad grid line {line!r}")
        key, raw = line.split("=", 1)
        key = key.strip()
        if key == "supply_ratio":
            grid[key] = [float(v) for v in raw.split(",")]
        else:
            grid[key] = [_coerce(key, v) for v in raw.split(",")]
    if not grid:
        raise InvalidConfig("empty sweep grid")
    return grid
