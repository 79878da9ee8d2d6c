# config.py

from dataclasses import dataclass, field, asdict, replace
from pathlib import Path
from typing import Any, Dict, Optional, Union

import toml

from .errors import ConfigError, InputError

DEFAULT_CONFIG_FILE = "dilat3r.toml"
CONFIG_TABLE = "dilat3r"


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical thresholds shared by every comparison in the package"""
    eps_rank: float = 1e-8
    eps_rel: float = 1e-9

    def __post_init__(self):
        if self.eps_rank <= 0 or self.eps_rel <= 0:
            raise ConfigError(f"tolerances must be positive (eps_rank={self.eps_rank}, eps_rel={self.eps_rel})")
        if self.eps_rel > self.eps_rank:
            raise ConfigError(f"eps_rel ({self.eps_rel}) must not exceed eps_rank ({self.eps_rank})")


DEFAULT_TOLERANCE = ToleranceConfig()


@dataclass
class Dilat3rConfig:
    """Configuration for dilat3r runs"""
    tolerance: ToleranceConfig = field(default_factory=ToleranceConfig)

    # Fock truncation
    depth: int = 4
    path_cap: int = 10 ** 6

    # Poset enumeration
    max_blocks: int = 8

    # Tail depth used by the purity test
    purity_depth: int = 16

    def __post_init__(self):
        if self.depth < 1:
            raise ConfigError(f"depth must be >= 1, got {self.depth}")
        if self.path_cap < 1 or self.max_blocks < 1 or self.purity_depth < 1:
            raise ConfigError("path_cap, max_blocks and purity_depth must be positive")


def load_config(path: Union[str, Path, None] = None) -> Dilat3rConfig:
    """Load the [dilat3r] table of a TOML file; a missing file gives defaults"""
    config_path = Path(path or DEFAULT_CONFIG_FILE)
    if not config_path.exists():
        return Dilat3rConfig()

    try:
        with open(config_path, "r", encoding="utf-8") as f:
            raw = toml.load(f)
    except (OSError, toml.TomlDecodeError) as e:
        raise InputError(f"could not read {config_path}: {e}", path=str(config_path)) from e

    return config_from_dict(raw.get(CONFIG_TABLE, {}))


def config_from_dict(data: Dict[str, Any]) -> Dilat3rConfig:
    if not isinstance(data, dict) or not isinstance(data.get("tolerance", {}), dict):
        raise ConfigError("the [dilat3r] and [dilat3r.tolerance] entries must be tables")
    data = dict(data)
    tol_data = dict(data.pop("tolerance", {}))
    for key in ("eps_rank", "eps_rel"):
        if key in data:
            tol_data[key] = data.pop(key)

    known = {"depth", "path_cap", "max_blocks", "purity_depth"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(sorted(unknown))}")
    unknown_tol = set(tol_data) - {"eps_rank", "eps_rel"}
    if unknown_tol:
        raise ConfigError(f"unknown tolerance keys: {', '.join(sorted(unknown_tol))}")

    for key, value in data.items():
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key} must be an integer, got {value!r}")
    for key, value in tol_data.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key} must be a number, got {value!r}")

    return Dilat3rConfig(tolerance=ToleranceConfig(**tol_data), **data)


def save_config(config: Dilat3rConfig, path: Union[str, Path] = DEFAULT_CONFIG_FILE) -> Path:
    """Save configuration to dilat3r.toml"""
    config_content = {CONFIG_TABLE: asdict(config)}
    try:
        with open(path, "w", encoding="utf-8") as f:
            toml.dump(config_content, f)
    except OSError as e:
        raise InputError(f"could not write {path}: {e}", path=str(path)) from e
    return Path(path)


def with_overrides(config: Dilat3rConfig,
                   eps_rank: Optional[float] = None,
                   eps_rel: Optional[float] = None,
                   depth: Optional[int] = None) -> Dilat3rConfig:
    """Command line values win over file values"""
    tolerance = config.tolerance
    if eps_rank is not None or eps_rel is not None:
        tolerance = ToleranceConfig(
            eps_rank=eps_rank if eps_rank is not None else tolerance.eps_rank,
            eps_rel=eps_rel if eps_rel is not None else tolerance.eps_rel,
        )
    return replace(config, tolerance=tolerance, depth=depth if depth is not None else config.depth)
