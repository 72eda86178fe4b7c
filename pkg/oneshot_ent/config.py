import os
import re
from pathlib import Path
from typing import Optional, Union

from git import GitConfigParser

from oneshot_ent.models import NumericSettings, RunConfig

CONFIG_ENV = "ONESHOT_ENT_CONFIG"


class ConfigError(ValueError):
    pass


def resolve_config_path(path: Optional[Union[str, Path]] = None) -> Optional[Path]:
    if path:
        return Path(path)
    env_path = os.getenv(CONFIG_ENV)
    return Path(env_path) if env_path else None


def get_config_value(key: str, default: str = "", path: Optional[Path] = None) -> str:
    if path is None or not path.is_file():
        return default
    try:
        config = GitConfigParser(str(path), read_only=True)
        section, option = _parse_config_key(key)
        value = config.get_value(section, option, default=default)
    except Exception:
        return default

    # Support env(ENV_VAR) syntax
    if isinstance(value, str):
        env_match = re.match(r"^env\(([A-Z_][A-Z0-9_]*)\)$", value)
        if env_match:
            return os.getenv(env_match.group(1), default)
    return str(value)


def _parse_config_key(key: str) -> tuple[str, str]:
    parts = key.rsplit(".", 1)
    if len(parts) != 2:
        raise ValueError(f"Invalid config key: {key}")
    return parts[0], parts[1]


def _float(key: str, default: float, path: Optional[Path]) -> float:
    raw = get_config_value(key, str(default), path)
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key} must be a number, got {raw!r}") from None


def _int(key: str, default: int, path: Optional[Path]) -> int:
    raw = get_config_value(key, str(default), path)
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {raw!r}") from None


def _bool(key: str, default: bool, path: Optional[Path]) -> bool:
    raw = get_config_value(key, "true" if default else "false", path).strip().lower()
    if raw in ("true", "yes", "on", "1"):
        return True
    if raw in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"{key} must be a boolean, got {raw!r}")


def _list(key: str, default: tuple, path: Optional[Path]) -> tuple[str, ...]:
    raw = get_config_value(key, ",".join(str(item) for item in default), path)
    return tuple(item.strip() for item in raw.split(",") if item.strip())


def _floats(key: str, default: tuple[float, ...], path: Optional[Path]) -> tuple[float, ...]:
    try:
        return tuple(float(item) for item in _list(key, default, path))
    except ValueError:
        raise ConfigError(f"{key} must be a comma-separated list of numbers") from None


def load_run_config(
    path: Optional[Union[str, Path]] = None,
    seed: Optional[int] = None,
    out_dir: Optional[Union[str, Path]] = None,
    dump_dir: Optional[Union[str, Path]] = None,
) -> RunConfig:
    """Read a git-config style file; explicit arguments override it."""
    resolved = resolve_config_path(path)
    if resolved is not None and not resolved.is_file():
        raise ConfigError(f"Config file not found: {resolved}")
    defaults, numeric = RunConfig(), NumericSettings()

    numerics = NumericSettings(
        gap_tol=_float("solver.gap-tol", numeric.gap_tol, resolved),
        feas_tol=_float("solver.feas-tol", numeric.feas_tol, resolved),
        max_iterations=_int("solver.max-iterations", numeric.max_iterations, resolved),
        accept_reduced=_bool("solver.accept-reduced", numeric.accept_reduced, resolved),
        seesaw_restarts=_int("seesaw.restarts", numeric.seesaw_restarts, resolved),
        seed=seed if seed is not None else _int("seesaw.seed", numeric.seed, resolved),
        dump_dir=Path(dump_dir) if dump_dir else None,
    )
    config = RunConfig(
        numerics=numerics,
        out_dir=Path(out_dir or get_config_value("run.out-dir", str(defaults.out_dir), resolved)),
        workers=_int("run.workers", defaults.workers, resolved),
        dimension_budget=_int("run.dimension-budget", defaults.dimension_budget, resolved),
        cache=_bool("run.cache", defaults.cache, resolved),
        battery=_list("battery.states", defaults.battery, resolved),
        eps_grid=_floats("battery.eps", defaults.eps_grid, resolved),
        delta_grid=_floats("battery.delta", defaults.delta_grid, resolved),
        regularize_eps=_float("regularize.eps", defaults.regularize_eps, resolved),
        regularize_n_max=_int("regularize.n-max", defaults.regularize_n_max, resolved),
    )
    validate_run_config(config)
    return config


def validate_run_config(config: RunConfig) -> None:
    numerics = config.numerics
    if numerics.gap_tol <= 0 or numerics.feas_tol <= 0:
        raise ConfigError("Solver tolerances must be positive")
    if numerics.max_iterations < 1:
        raise ConfigError("solver.max-iterations must be at least 1")
    if numerics.seesaw_restarts < 1:
        raise ConfigError("seesaw.restarts must be at least 1")
    if config.workers < 1:
        raise ConfigError("run.workers must be at least 1")
    if not config.battery:
        raise ConfigError("battery.states is empty")
    if any(not 0.0 <= eps < 1.0 for eps in config.eps_grid + (config.regularize_eps,)):
        raise ConfigError("Smoothing parameters must lie in [0, 1)")
    if any(delta <= 0 for delta in config.delta_grid):
        raise ConfigError("battery.delta values must be positive")
