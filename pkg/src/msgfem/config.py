"""Run configuration: defaults, TOML file, command-line overrides."""

from __future__ import annotations

import dataclasses
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

EXPERIMENTS = ("solve", "decay_n", "decay_ell", "iteration_table", "spectrum", "timing_fillin")
COEFFICIENTS = ("constant", "skyscraper", "channel", "file")
SOLVERS = ("direct", "richardson", "gmres")


@dataclass
class RunConfig:
    """Every knob of the experiment harness.

    ``cells`` and ``subdomains`` are per axis. ``n`` is the basis count per
    subdomain for single runs; ``n_values`` and ``ell_values`` drive sweeps.
    """

    experiment: str = "solve"
    dim: int = 2
    cells: int = 64
    subdomains: int = 4
    overlap: int = 2
    ell: int = 2
    n: int = 8
    n_values: list[int] = field(default_factory=lambda: list(range(1, 17)))
    ell_values: list[int] = field(default_factory=lambda: [1, 2, 3, 4, 5, 6])
    variants: list[str] = field(default_factory=lambda: ["full", "ring"])
    coefficient: str = "skyscraper"
    contrast: float = 2e6
    block_size: int = 4
    fill_fraction: float = 0.3
    coefficient_file: str = ""
    contrast_exponents: list[float] = field(default_factory=lambda: [0.0, 3.0, 6.0])
    source: float = 1.0
    boundary_value: float = 0.0
    solver: str = "direct"
    tol: float = 1e-8
    maxit: int = 1000
    initial_guess: str = "zero"  # "zero" or "particular"
    eig_tol: float = 1e-10
    eig_block: int = 8
    spectrum_subdomains: list[int] = field(default_factory=lambda: [5, 6, 0])
    spectrum_count: int = 12
    timing_m: list[int] = field(default_factory=lambda: [9, 13, 17, 21, 25])
    timing_ell: list[int] = field(default_factory=lambda: [1, 2, 3])
    timing_eigenpairs: int = 5
    repeats: int = 10
    max_dofs: int = 200_000
    out: str = "out"
    seed: int = 1
    jobs: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        if self.coefficient not in COEFFICIENTS:
            raise ValueError(f"coefficient must be one of {COEFFICIENTS}, got {self.coefficient!r}")
        if self.solver not in SOLVERS:
            raise ValueError(f"solver must be one of {SOLVERS}, got {self.solver!r}")
        bad = [v for v in self.variants if v not in ("full", "ring")]
        if bad or not self.variants:
            raise ValueError(f"variants must be a non-empty subset of ['full', 'ring'], got {self.variants}")
        if self.initial_guess not in ("zero", "particular"):
            raise ValueError(f"initial_guess must be 'zero' or 'particular', got {self.initial_guess!r}")
        for name in ("cells", "subdomains", "overlap", "ell", "repeats", "jobs", "maxit"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


def _coerce(name: str, value: Any, template: Any) -> Any:
    """Convert a raw value to the type of the field default."""
    if isinstance(template, bool):
        if isinstance(value, str):
            return value.lower() in ("1", "true", "yes")
        return bool(value)
    if isinstance(template, list):
        items = value if isinstance(value, list) else [v for v in str(value).split(",") if v.strip()]
        inner = template[0] if template else ""
        return [_coerce(name, v, inner) for v in items]
    if isinstance(template, int):
        if isinstance(value, float) and not value.is_integer():
            raise ValueError(f"{name} must be an integer, got {value}")
        return int(value)
    if isinstance(template, float):
        return float(value)
    return str(value).strip()


def _defaults() -> dict[str, Any]:
    return RunConfig().to_dict()


def from_mapping(data: Mapping[str, Any], base: RunConfig | None = None) -> RunConfig:
    """Overlay ``data`` on ``base`` (or the defaults); unknown keys are errors."""
    current = (base or RunConfig()).to_dict()
    defaults = _defaults()
    unknown = sorted(set(data) - set(defaults))
    if unknown:
        raise ValueError(f"unknown configuration keys: {', '.join(unknown)}")
    for key, value in data.items():
        if value is None:
            continue
        current[key] = _coerce(key, value, defaults[key])
    return RunConfig(**current)


def load_config(path: str | Path, base: RunConfig | None = None) -> RunConfig:
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    # a [run] table is accepted as well as top-level keys
    if "run" in data and isinstance(data["run"], dict):
        data = {**{k: v for k, v in data.items() if k != "run"}, **data["run"]}
    return from_mapping(data, base)


def _toml_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, list):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    text = str(value).replace("\\", "\\\\").replace('"', '\\"')
    return f'"{text}"'


def dumps_config(config: RunConfig) -> str:
    lines = [f"{f.name} = {_toml_value(getattr(config, f.name))}" for f in fields(config)]
    return "\n".join(lines) + "\n"


def save_config(config: RunConfig, path: str | Path) -> None:
    Path(path).write_text(dumps_config(config))


__all__ = [
    "COEFFICIENTS",
    "EXPERIMENTS",
    "RunConfig",
    "SOLVERS",
    "dumps_config",
    "from_mapping",
    "load_config",
    "save_config",
]
