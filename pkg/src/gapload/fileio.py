"""Line-oriented ``key = value`` files with ``[section]`` headers, and CSV output.

The parameter format is deliberately small::

    # comment
    [attenuation]
    kappa = 1
    a0 = 0
    a1 = 2.5e-9

    [path]
    g = 0.029
    d = 90

Sections may repeat (``[path]`` does), so :mod:`configparser` is not used.
"""

from __future__ import annotations

import csv
import math
import re
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ConfigError

_SUFFIXES = {
    "hz": 1.0,
    "khz": 1e3,
    "mhz": 1e6,
    "ghz": 1e9,
}
_QUANTITY = re.compile(r"^\s*([-+0-9.eE]+)\s*([a-zA-Z]*)\s*$")


def parse_sections(text: str, source: str = "<string>") -> list[tuple[str, dict[str, str]]]:
    """Split ``text`` into an ordered list of ``(section_name, {key: value})``.

    Keys are lower-cased. Lines before the first header raise, as do
    duplicate keys inside one section.
    """
    sections: list[tuple[str, dict[str, str]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            sections.append((line[1:-1].strip().lower(), {}))
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        if not sections:
            raise ConfigError(f"{source}:{lineno}: key outside of any [section]")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        body = sections[-1][1]
        if key in body:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        body[key] = value
    return sections


def read_sections(path: str | Path) -> list[tuple[str, dict[str, str]]]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_sections(text, source=str(path))


def parse_float(value: str, field: str) -> float:
    try:
        out = float(value)
    except ValueError:
        raise ConfigError(f"{field}: expected a number, got {value!r}") from None
    if not math.isfinite(out):
        raise ConfigError(f"{field}: value must be finite, got {value!r}")
    return out


def parse_int(value: str, field: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{field}: expected an integer, got {value!r}") from None


def parse_frequency(value: str, field: str) -> float:
    """Parse ``"500kHz"``, ``"19.043 kHz"``, ``"20MHz"`` or a bare number (Hz)."""
    m = _QUANTITY.match(value)
    if m is None:
        raise ConfigError(f"{field}: cannot parse frequency {value!r}")
    number, unit = m.groups()
    scale = _SUFFIXES.get(unit.lower() if unit else "hz")
    if scale is None:
        raise ConfigError(f"{field}: unknown frequency unit {unit!r}")
    return parse_float(number, field) * scale


def parse_bool(value: str, field: str) -> bool:
    v = value.strip().lower()
    if v in {"on", "true", "yes", "1"}:
        return True
    if v in {"off", "false", "no", "0"}:
        return False
    raise ConfigError(f"{field}: expected on/off, got {value!r}")


def parse_list(value: str) -> list[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def format_float(x: float) -> str:
    # 17 significant digits round-trips any IEEE-754 double
    return format(float(x), ".17g")


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[object]]) -> Path:
    """Write ``rows`` with a header line, LF endings, floats at 17 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_float(v) if isinstance(v, float) else v for v in row])
    return path
