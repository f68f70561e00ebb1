"""Output writers: metadata headers, CSV rows and JSON reports.

Output must be byte-identical across runs with the same configuration, so
floats are always rendered with 17 significant digits and dictionaries keep
insertion order.
"""

import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Sequence

from .. import __version__
from .rational_linalg import format_fraction

TOOL_NAME = "gasket-energy"
SCHEMA_VERSION = 1
RNG_ALGORITHM = "numpy PCG64, SeedSequence(seed, spawn_key=(stream, index))"


def format_float(x: float) -> str:
    return f"{float(x):.17g}"


def format_scalar(x: Any) -> Any:
    """Fractions become "num/den" strings, numpy scalars become Python floats."""
    if isinstance(x, Fraction):
        return format_fraction(x)
    if isinstance(x, bool) or isinstance(x, int) or isinstance(x, str) or x is None:
        return x
    return float(x)


def build_metadata(
    subcommand: str,
    config: Dict[str, Any],
    wall_time_s: Optional[float] = None,
    **extra: Any,
) -> Dict[str, Any]:
    """Metadata block shared by every output file.

    Args:
        subcommand: CLI subcommand that produced the file
        config: ``RunConfig.to_metadata()``
        wall_time_s: Elapsed time, only given when timing is enabled
        **extra: Additional result-relevant keys (e.g. the effective backend)

    Returns:
        Ordered metadata dictionary
    """
    metadata: Dict[str, Any] = {
        "tool": TOOL_NAME,
        "version": __version__,
        "schema_version": SCHEMA_VERSION,
        "subcommand": subcommand,
        "seed": config.get("seed"),
        "backend": config.get("backend"),
        "rng": RNG_ALGORITHM,
        "config": config,
    }
    metadata.update(extra)
    metadata["wall_time_s"] = wall_time_s
    return metadata


def _csv_value(value: Any) -> str:
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, Fraction):
        return format_fraction(value)
    return str(value)


def render_csv(
    metadata: Dict[str, Any],
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
) -> str:
    """CSV text with ``# key: value`` comment lines before the header."""
    buffer = io.StringIO()
    for key, value in metadata.items():
        if isinstance(value, dict):
            for sub_key, sub_value in value.items():
                buffer.write(f"# {key}.{sub_key}: {json.dumps(sub_value)}\n")
        else:
            buffer.write(f"# {key}: {json.dumps(value)}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_value(v) for v in row])
    return buffer.getvalue()


def _json_default(value: Any) -> Any:
    if isinstance(value, Fraction):
        return format_fraction(value)
    if hasattr(value, "tolist"):
        return value.tolist()
    raise TypeError(f"cannot serialize {type(value).__name__}")


def render_json(document: Dict[str, Any]) -> str:
    return json.dumps(document, indent=2, default=_json_default) + "\n"


def write_output(text: str, out: Optional[str]) -> None:
    """Write to ``out`` or stdout when no path is given."""
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
        sys.stdout.flush()
