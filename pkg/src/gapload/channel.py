"""Multipath power-line channel model and per-subcarrier power gains.

The frequency response of an ``N``-path link is

    H(f) = sum_i g_i * exp(-(a0 + a1 * f**kappa) * d_i) * exp(-2j*pi*f*tau_i)

with ``tau_i = d_i / v_p`` unless delays are given explicitly.  Two
parameter sets ship with the package: the 15-path 110 m reference link
(``multipath15.chan``) and the five attenuation length profiles
(``profiles.chan``).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .fileio import (
    format_float,
    parse_float,
    parse_sections,
    write_csv,
)

DEFAULT_PROPAGATION_SPEED = 1.5e8  # m/s, eps_r ~ 4


@dataclass(frozen=True)
class AttenuationParams:
    """Cable loss ``exp(-(a0 + a1 * f**kappa) * d)``."""

    kappa: float
    a0: float
    a1: float

    def __post_init__(self) -> None:
        if not 0.0 < self.kappa <= 2.0:
            raise ConfigError(f"kappa must lie in (0, 2], got {self.kappa}")
        if self.a0 < 0.0:
            raise ConfigError(f"a0 must be >= 0, got {self.a0}")
        if self.a1 < 0.0:
            raise ConfigError(f"a1 must be >= 0, got {self.a1}")

    def alpha(self, f):
        """Attenuation coefficient per metre at frequency ``f`` (Hz)."""
        return self.a0 + self.a1 * np.power(f, self.kappa)


@dataclass(frozen=True)
class PathParams:
    gain: float
    length: float
    delay: float | None = None

    def __post_init__(self) -> None:
        if not self.length > 0.0:
            raise ConfigError(f"path length must be > 0, got {self.length}")
        if self.delay is not None and self.delay < 0.0:
            raise ConfigError(f"path delay must be >= 0, got {self.delay}")


@dataclass(frozen=True)
class MultipathChannelModel:
    paths: tuple[PathParams, ...]
    atten: AttenuationParams
    propagation_speed: float = DEFAULT_PROPAGATION_SPEED

    def __post_init__(self) -> None:
        object.__setattr__(self, "paths", tuple(self.paths))
        if not self.paths:
            raise ConfigError("channel model needs at least one path")
        if not self.propagation_speed > 0.0:
            raise ConfigError(f"propagation_speed must be > 0, got {self.propagation_speed}")

    @property
    def gains(self) -> np.ndarray:
        return np.array([p.gain for p in self.paths], dtype=float)

    @property
    def lengths(self) -> np.ndarray:
        return np.array([p.length for p in self.paths], dtype=float)

    @property
    def delays(self) -> np.ndarray:
        return np.array(
            [p.length / self.propagation_speed if p.delay is None else p.delay for p in self.paths],
            dtype=float,
        )

    def amplitude_bound(self) -> float:
        """Triangle-inequality bound on ``|H(f)|``."""
        return float(np.abs(self.gains).sum())


@dataclass(frozen=True)
class FrequencyGrid:
    """Subcarrier ``n`` sits at ``f_start + n * spacing``."""

    n_subcarriers: int
    f_start: float
    spacing: float

    def __post_init__(self) -> None:
        if self.n_subcarriers < 1:
            raise ConfigError(f"n_subcarriers must be >= 1, got {self.n_subcarriers}")
        if not self.spacing > 0.0:
            raise ConfigError(f"spacing must be > 0, got {self.spacing}")
        if self.f_start < 0.0:
            raise ConfigError(f"f_start must be >= 0, got {self.f_start}")

    @property
    def frequencies(self) -> np.ndarray:
        return self.f_start + np.arange(self.n_subcarriers) * self.spacing


def frequency_response(model: MultipathChannelModel, f):
    """Complex channel response at frequency ``f`` (scalar or array, Hz)."""
    f_arr = np.asarray(f, dtype=float)
    if np.any(f_arr < 0.0):
        raise ValueError("frequency must be non-negative")
    fc = f_arr[..., np.newaxis]
    loss = np.exp(-model.atten.alpha(fc) * model.lengths)
    phase = np.exp(-2j * np.pi * fc * model.delays)
    h = np.sum(model.gains * loss * phase, axis=-1)
    return complex(h) if h.ndim == 0 else h


def subchannel_gains(model: MultipathChannelModel, grid: FrequencyGrid) -> np.ndarray:
    """Power gains ``|H(f_n)|**2`` on every subcarrier of ``grid``."""
    h = frequency_response(model, grid.frequencies)
    return np.abs(h) ** 2


# ---------------------------------------------------------------------------
# parameter files


def parse_channel(text: str, source: str = "<string>",
                  propagation_speed: float = DEFAULT_PROPAGATION_SPEED) -> MultipathChannelModel:
    """Build a model from ``[attenuation]`` plus repeated ``[path]`` sections.

    An optional ``[propagation]`` section may carry ``speed`` (m/s); an
    optional ``tau`` key on a path fixes its delay explicitly.
    """
    atten = None
    paths: list[PathParams] = []
    speed = propagation_speed
    for name, body in parse_sections(text, source):
        where = f"{source} [{name}]"
        if name == "attenuation":
            _check_keys(body, {"kappa", "a0", "a1"}, where, required={"kappa", "a0", "a1"})
            atten = AttenuationParams(
                kappa=parse_float(body["kappa"], f"{where} kappa"),
                a0=parse_float(body["a0"], f"{where} a0"),
                a1=parse_float(body["a1"], f"{where} a1"),
            )
        elif name == "path":
            _check_keys(body, {"g", "d", "tau"}, where, required={"g", "d"})
            tau = parse_float(body["tau"], f"{where} tau") if "tau" in body else None
            paths.append(PathParams(
                gain=parse_float(body["g"], f"{where} g"),
                length=parse_float(body["d"], f"{where} d"),
                delay=tau,
            ))
        elif name == "propagation":
            _check_keys(body, {"speed"}, where, required={"speed"})
            speed = parse_float(body["speed"], f"{where} speed")
        else:
            raise ConfigError(f"{source}: unknown section [{name}]")
    if atten is None:
        raise ConfigError(f"{source}: missing [attenuation] section")
    return MultipathChannelModel(paths=tuple(paths), atten=atten, propagation_speed=speed)


def load_channel(path: str | Path, propagation_speed: float = DEFAULT_PROPAGATION_SPEED) -> MultipathChannelModel:
    path = Path(path)
    if not path.exists():
        bundled = _bundled_text(path.name)
        if bundled is None:
            raise ConfigError(f"channel file not found: {path}")
        return parse_channel(bundled, source=path.name, propagation_speed=propagation_speed)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_channel(text, source=str(path), propagation_speed=propagation_speed)


def reference_channel(propagation_speed: float = DEFAULT_PROPAGATION_SPEED) -> MultipathChannelModel:
    """The bundled 15-path, 110 m reference link."""
    return parse_channel(_bundled_text("multipath15.chan"), "multipath15.chan", propagation_speed)


@lru_cache(maxsize=None)
def length_profiles() -> dict[str, tuple[float, AttenuationParams]]:
    """Map profile class name to ``(g1, attenuation)`` from ``profiles.chan``."""
    out: dict[str, tuple[float, AttenuationParams]] = {}
    for name, body in parse_sections(_bundled_text("profiles.chan"), "profiles.chan"):
        label = body["class"]
        out[label] = (
            parse_float(body["g"], f"{label} g"),
            AttenuationParams(
                kappa=parse_float(body["kappa"], f"{label} kappa"),
                a0=parse_float(body["a0"], f"{label} a0"),
                a1=parse_float(body["a1"], f"{label} a1"),
            ),
        )
    return out


def length_profile_channel(class_name: str, distance: float,
                           propagation_speed: float = DEFAULT_PROPAGATION_SPEED) -> MultipathChannelModel:
    """Single-path, attenuation-only link of ``distance`` metres for a cable class."""
    profiles = length_profiles()
    if class_name not in profiles:
        raise ConfigError(
            f"unknown length profile {class_name!r}; expected one of {', '.join(profiles)}"
        )
    g1, atten = profiles[class_name]
    return MultipathChannelModel(
        paths=(PathParams(gain=g1, length=float(distance)),),
        atten=atten,
        propagation_speed=propagation_speed,
    )


def write_gains_csv(path: str | Path, grid: FrequencyGrid, gains: np.ndarray) -> Path:
    with np.errstate(divide="ignore"):
        gains_db = 10.0 * np.log10(gains)
    rows = ((n, float(f), float(g)) for n, (f, g) in enumerate(zip(grid.frequencies, gains_db)))
    return write_csv(path, ("subcarrier_index", "freq_hz", "gain_db"), rows)


def format_channel(model: MultipathChannelModel) -> str:
    """Serialise ``model`` back to the parameter-file format."""
    a = model.atten
    lines = [
        "[attenuation]",
        f"kappa = {format_float(a.kappa)}",
        f"a0 = {format_float(a.a0)}",
        f"a1 = {format_float(a.a1)}",
        "",
        "[propagation]",
        f"speed = {format_float(model.propagation_speed)}",
    ]
    for p in model.paths:
        lines += ["", "[path]", f"g = {format_float(p.gain)}", f"d = {format_float(p.length)}"]
        if p.delay is not None:
            lines.append(f"tau = {format_float(p.delay)}")
    return "\n".join(lines) + "\n"


def _check_keys(body: dict[str, str], allowed: set[str], where: str,
                required: set[str] = frozenset()) -> None:
    unknown = set(body) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(sorted(unknown))}")
    missing = set(required) - set(body)
    if missing:
        raise ConfigError(f"{where}: missing key(s) {', '.join(sorted(missing))}")


def _bundled_text(name: str) -> str | None:
    res = resources.files("gapload") / "data" / name
    if not res.is_file():
        return None
    return res.read_text(encoding="utf-8")


def bundled_path(name: str) -> Path | None:
    res = resources.files("gapload") / "data" / name
    return Path(str(res)) if res.is_file() else None

