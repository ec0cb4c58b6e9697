"""Scenario configuration files and ``--set`` overrides.

Sections and keys::

    [system]   n, lc, band_start, band_stop, spacing, psd_signal, psd_noise,
               coding (on/off), grouping (adjacent/sorted)
    [coding]   rs_n, rs_k, rs_symbol_bits, c_factor, trellis_gain_db,
               trellis_redundancy, margin_db, target_ber, max_constellation_points
    [channel]  model (parameter file) | profile + distance, propagation_speed
    [sweep]    profiles (comma list), distances (comma list, metres)

Frequencies accept ``Hz``/``kHz``/``MHz`` suffixes.  Overrides are
``key=value`` or ``section.key=value``; key names are unique across
sections so the short form is unambiguous.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .channel import (
    DEFAULT_PROPAGATION_SPEED,
    MultipathChannelModel,
    bundled_path,
    length_profile_channel,
    load_channel,
)
from .coding import CodingConfig, RsCodeParams, TrellisCodeParams
from .errors import ConfigError
from .fileio import (
    parse_bool,
    parse_float,
    parse_frequency,
    parse_int,
    parse_list,
    read_sections,
)
from .scenario import SystemConfig

SCHEMA: dict[str, tuple[str, ...]] = {
    "system": ("n", "lc", "band_start", "band_stop", "spacing", "psd_signal", "psd_noise",
               "coding", "grouping"),
    "coding": ("rs_n", "rs_k", "rs_symbol_bits", "c_factor", "trellis_gain_db",
               "trellis_redundancy", "margin_db", "target_ber", "max_constellation_points"),
    "channel": ("model", "profile", "distance", "propagation_speed"),
    "sweep": ("profiles", "distances"),
}
_KEY_SECTION = {key: section for section, keys in SCHEMA.items() for key in keys}

DEFAULT_CONFIG = "reference.cfg"


@dataclass(frozen=True)
class ChannelSpec:
    model_path: Path | None = None
    profile: str | None = None
    distance: float | None = None
    propagation_speed: float = DEFAULT_PROPAGATION_SPEED

    def build(self) -> MultipathChannelModel:
        if self.model_path is not None:
            return load_channel(self.model_path, self.propagation_speed)
        if self.profile is not None:
            if self.distance is None:
                raise ConfigError("channel.distance: required with channel.profile")
            return length_profile_channel(self.profile, self.distance, self.propagation_speed)
        raise ConfigError("channel: set either 'model' or 'profile'")


@dataclass(frozen=True)
class SweepSpec:
    profiles: tuple[str, ...] = ()
    distances: tuple[float, ...] = ()


@dataclass(frozen=True)
class RunConfig:
    system: SystemConfig
    channel: ChannelSpec
    sweep: SweepSpec
    source: str = "<defaults>"


def resolve_config_path(path: str | Path) -> Path:
    p = Path(path)
    if p.exists():
        return p
    bundled = bundled_path(p.name)
    if bundled is None:
        raise ConfigError(f"config file not found: {path}")
    return bundled


def parse_override(text: str) -> tuple[str, str, str]:
    """``"lc=1"`` or ``"system.lc=1"`` -> ``("system", "lc", "1")``."""
    if "=" not in text:
        raise ConfigError(f"--set expects KEY=VALUE, got {text!r}")
    key, value = (s.strip() for s in text.split("=", 1))
    key = key.lower()
    if "." in key:
        section, key = key.split(".", 1)
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError(f"unknown config key {section}.{key}")
        return section, key, value
    if key not in _KEY_SECTION:
        raise ConfigError(f"unknown config key {key!r}")
    return _KEY_SECTION[key], key, value


def load_config(path: str | Path | None = DEFAULT_CONFIG,
                overrides: Sequence[str] = ()) -> RunConfig:
    """Read a scenario file (bundled names allowed) and apply overrides."""
    raw: dict[str, dict[str, str]] = {s: {} for s in SCHEMA}
    base_dir = Path.cwd()
    source = "<defaults>"
    if path is not None:
        resolved = resolve_config_path(path)
        base_dir = resolved.parent
        source = str(resolved)
        for section, body in read_sections(resolved):
            if section not in SCHEMA:
                raise ConfigError(f"{resolved}: unknown section [{section}]")
            for key, value in body.items():
                if key not in SCHEMA[section]:
                    raise ConfigError(f"{resolved}: unknown key {section}.{key}")
                raw[section][key] = value
    for item in overrides:
        section, key, value = parse_override(item)
        raw[section][key] = value
        if section == "channel" and key == "model":
            raw["channel"].pop("profile", None)
        elif section == "channel" and key == "profile":
            raw["channel"].pop("model", None)
    return RunConfig(
        system=_build_system(raw["system"], raw["coding"]),
        channel=_build_channel(raw["channel"], base_dir),
        sweep=_build_sweep(raw["sweep"]),
        source=source,
    )


def _build_system(sys_raw: dict[str, str], cod_raw: dict[str, str]) -> SystemConfig:
    d_rs, d_tc, d_cc = RsCodeParams(), TrellisCodeParams(), CodingConfig()

    def f(raw, key, default, parse=parse_float, section="coding"):
        return parse(raw[key], f"{section}.{key}") if key in raw else default

    rs = RsCodeParams(
        n=f(cod_raw, "rs_n", d_rs.n, parse_int),
        k=f(cod_raw, "rs_k", d_rs.k, parse_int),
        symbol_bits=f(cod_raw, "rs_symbol_bits", d_rs.symbol_bits, parse_int),
    )
    trellis = TrellisCodeParams(
        fundamental_gain_db=f(cod_raw, "trellis_gain_db", d_tc.fundamental_gain_db),
        redundancy_bits_per_2d=f(cod_raw, "trellis_redundancy", d_tc.redundancy_bits_per_2d),
        max_constellation_points=f(cod_raw, "max_constellation_points", d_tc.max_constellation_points, parse_int),
    )
    coding = CodingConfig(
        rs=rs,
        trellis=trellis,
        c_factor=f(cod_raw, "c_factor", d_cc.c_factor),
        margin_db=f(cod_raw, "margin_db", d_cc.margin_db),
        target_ber=f(cod_raw, "target_ber", d_cc.target_ber),
    )
    d = SystemConfig()

    def s(key, default, parse=parse_float):
        return f(sys_raw, key, default, parse, "system")

    return SystemConfig(
        n_subcarriers=s("n", d.n_subcarriers, parse_int),
        lc=s("lc", d.lc, parse_int),
        band_start=s("band_start", d.band_start, parse_frequency),
        band_stop=s("band_stop", d.band_stop, parse_frequency),
        spacing=s("spacing", d.spacing, parse_frequency),
        psd_signal_dbm=s("psd_signal", d.psd_signal_dbm),
        psd_noise_dbm=s("psd_noise", d.psd_noise_dbm),
        coded=s("coding", d.coded, parse_bool),
        grouping=sys_raw.get("grouping", d.grouping).strip().lower(),
        coding=coding,
    )


def _build_channel(raw: dict[str, str], base_dir: Path) -> ChannelSpec:
    speed = (parse_float(raw["propagation_speed"], "channel.propagation_speed")
             if "propagation_speed" in raw else DEFAULT_PROPAGATION_SPEED)
    model = None
    if "model" in raw:
        model = Path(raw["model"])
        if not model.is_absolute() and (base_dir / model).exists():
            model = base_dir / model
    distance = parse_float(raw["distance"], "channel.distance") if "distance" in raw else None
    return ChannelSpec(model_path=model, profile=raw.get("profile"), distance=distance,
                       propagation_speed=speed)


def _build_sweep(raw: dict[str, str]) -> SweepSpec:
    profiles = tuple(parse_list(raw.get("profiles", "")))
    distances = tuple(parse_float(v, "sweep.distances") for v in parse_list(raw.get("distances", "")))
    return SweepSpec(profiles=profiles, distances=distances)
