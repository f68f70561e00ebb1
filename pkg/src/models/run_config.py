"""Run configuration for the command-line experiments."""

import json
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

from .errors import ConfigError

RANGES = ("full", "third")
MEASURES = ("uniform", "nu", "product")
BACKENDS = ("exact", "float")
FORMATS = ("csv", "json")
KINDS = ("theta", "radius")

ENV_SEED = "GASKET_SEED"
ENV_THREADS = "GASKET_THREADS"

# Fields that never change results; excluded from output metadata.
_NON_RESULT_FIELDS = ("threads", "out", "timing")


@dataclass
class RunConfig:
    """All parameters of one run.

    Values are layered: defaults, then a JSON config file, then the
    GASKET_SEED / GASKET_THREADS environment variables, then explicit flags.
    """

    level: int = 2
    depth: int = 8
    bins: Optional[int] = None  # None: 6000 for the full circle, 2000 for a third
    range: str = "full"
    measure: str = "uniform"
    weights: Optional[Tuple[float, ...]] = None  # product measure only
    kind: str = "theta"
    seed: int = 0
    backend: str = "exact"
    out: Optional[str] = None
    format: Optional[str] = None  # None: the subcommand's default format
    threads: Optional[int] = None  # None: all logical CPUs
    samples: int = 500
    length: int = 50
    check: str = "all"
    word: Optional[str] = None
    f: Optional[Tuple[float, float, float]] = None
    exact_cap: int = 20
    certify_cap: int = 50
    max_leaves: int = 2_000_000
    allow_deep: bool = False
    timing: bool = False

    @classmethod
    def field_names(cls) -> Tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    @classmethod
    def resolve(
        cls,
        overrides: Mapping[str, Any],
        config_path: Optional[str] = None,
        environ: Optional[Mapping[str, str]] = None,
    ) -> "RunConfig":
        """Build a validated config from every layer.

        Args:
            overrides: Explicitly given flags; ``None`` values are ignored
            config_path: Optional JSON file with field names as keys
            environ: Environment mapping (defaults to ``os.environ``)

        Returns:
            The validated RunConfig

        Raises:
            ConfigError: if any layer holds an invalid value
        """
        config = cls()
        if config_path:
            config.update(cls.load_file(config_path))
        config.update(cls.from_environment(os.environ if environ is None else environ))
        config.update({k: v for k, v in overrides.items() if v is not None})
        config.validate()
        return config

    @classmethod
    def load_file(cls, path: str) -> Dict[str, Any]:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as e:
            raise ConfigError(f"cannot read config file {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {path} is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
        return {str(k).replace("-", "_"): v for k, v in data.items()}

    @staticmethod
    def from_environment(environ: Mapping[str, str]) -> Dict[str, Any]:
        values: Dict[str, Any] = {}
        for key, name in ((ENV_SEED, "seed"), (ENV_THREADS, "threads")):
            raw = environ.get(key)
            if raw is None or raw == "":
                continue
            try:
                values[name] = int(raw)
            except ValueError as e:
                raise ConfigError(f"{key} must be an integer, got {raw!r}") from e
        return values

    def update(self, values: Mapping[str, Any]) -> None:
        known = set(self.field_names())
        unknown = sorted(k for k in values if k not in known)
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
        for key, value in values.items():
            if key == "weights" and value is not None:
                value = parse_floats(value, "weights")
            elif key == "f" and value is not None:
                value = parse_floats(value, "f")
            setattr(self, key, value)

    def validate(self) -> None:
        """Check every field; raises ConfigError on the first problem."""
        for name in ("level", "depth", "seed", "samples", "length",
                     "exact_cap", "certify_cap", "max_leaves"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"{name} must be an integer, got {value!r}")
        if self.level < 2:
            raise ConfigError(f"level must be at least 2, got {self.level}")
        if self.depth < 0:
            raise ConfigError(f"depth must be non-negative, got {self.depth}")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")
        if self.samples < 1 or self.length < 1:
            raise ConfigError("samples and length must be positive")
        if self.bins is not None and (
            isinstance(self.bins, bool) or not isinstance(self.bins, int) or self.bins < 1
        ):
            raise ConfigError(f"bins must be a positive integer, got {self.bins!r}")
        if self.threads is not None and (
            isinstance(self.threads, bool) or not isinstance(self.threads, int)
            or self.threads < 1
        ):
            raise ConfigError(f"threads must be a positive integer, got {self.threads!r}")
        _check_choice("range", self.range, RANGES)
        _check_choice("measure", self.measure, MEASURES)
        _check_choice("backend", self.backend, BACKENDS)
        _check_choice("kind", self.kind, KINDS)
        if self.format is not None:
            _check_choice("format", self.format, FORMATS)
        if self.measure == "product":
            if not self.weights:
                raise ConfigError("measure 'product' requires weights")
            if any(w <= 0 for w in self.weights):
                raise ConfigError("product weights must be positive (full support)")
            if abs(sum(self.weights) - 1.0) > 1e-9:
                raise ConfigError(f"product weights must sum to 1, got {sum(self.weights)}")
            expected = self.level * (self.level + 1) // 2
            if len(self.weights) != expected:
                raise ConfigError(
                    f"level {self.level} has {expected} symbols, got {len(self.weights)} weights"
                )
        if self.f is not None and len(self.f) != 3:
            raise ConfigError("f must have three boundary values")
        if self.exact_cap > self.certify_cap:
            raise ConfigError("exact_cap cannot exceed certify_cap")
        if self.max_leaves < 1:
            raise ConfigError("max_leaves must be positive")

    def effective_bins(self) -> int:
        if self.bins is not None:
            return self.bins
        return 2000 if self.range == "third" else 6000

    def to_metadata(self) -> Dict[str, Any]:
        """Every field that influences results, in field order."""
        data = asdict(self)
        for name in _NON_RESULT_FIELDS:
            data.pop(name, None)
        for key in ("weights", "f"):
            if data[key] is not None:
                data[key] = list(data[key])
        return data


def parse_floats(value: Any, name: str) -> Tuple[float, ...]:
    """Accept "0.2,0.3,0.5" or a list of numbers."""
    try:
        if isinstance(value, str):
            return tuple(float(p) for p in value.split(",") if p.strip())
        return tuple(float(p) for p in value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{name} must be a list of numbers, got {value!r}") from e


def _check_choice(name: str, value: Any, choices: Tuple[str, ...]) -> None:
    if value not in choices:
        raise ConfigError(f"{name} must be one of {', '.join(choices)}, got {value!r}")
