"""Experiment runners: one scenario, the four-way comparison, length sweeps.

The four system variants are coded/uncoded crossed with DMT (``lc = 1``) and
LP-DMT (``lc`` from the config).  Useful throughput removes the trellis
redundancy of every loaded sequence and then scales by the RS code rate.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .channel import (
    FrequencyGrid,
    MultipathChannelModel,
    length_profile_channel,
    subchannel_gains,
)
from .coding import CodingConfig, GapTable, build_gap_table, db
from .errors import ConfigError
from .fileio import write_csv
from .loading import (
    ADJACENT,
    GROUPINGS,
    LoadingInputs,
    SystemAllocation,
    allocate_system,
)

CODED_LPDMT = "coded_lpdmt"
CODED_DMT = "coded_dmt"
UNCODED_LPDMT = "uncoded_lpdmt"
UNCODED_DMT = "uncoded_dmt"
VARIANTS = (CODED_LPDMT, CODED_DMT, UNCODED_LPDMT, UNCODED_DMT)


@dataclass(frozen=True)
class SystemConfig:
    n_subcarriers: int = 1024
    lc: int = 16
    band_start: float = 500e3
    band_stop: float = 20e6
    spacing: float = 19.043e3
    psd_signal_dbm: float = -40.0
    psd_noise_dbm: float = -110.0
    coded: bool = True
    grouping: str = ADJACENT
    coding: CodingConfig = field(default_factory=CodingConfig)

    def __post_init__(self) -> None:
        if self.n_subcarriers < 1:
            raise ConfigError(f"system.n: must be >= 1, got {self.n_subcarriers}")
        if not 1 <= self.lc <= self.n_subcarriers:
            raise ConfigError(f"system.lc: must lie in 1..n ({self.n_subcarriers}), got {self.lc}")
        if not self.spacing > 0:
            raise ConfigError(f"system.spacing: must be > 0, got {self.spacing}")
        if not 0 <= self.band_start < self.band_stop:
            raise ConfigError(
                f"system.band_start/band_stop: need 0 <= start < stop, got {self.band_start}, {self.band_stop}"
            )
        last = self.band_start + (self.n_subcarriers - 1) * self.spacing
        if last > self.band_stop * (1 + 1e-12):
            raise ConfigError(
                f"system.n/spacing: last carrier at {last:.6g} Hz lies above band_stop {self.band_stop:.6g} Hz"
            )
        if not self.psd_signal_dbm > self.psd_noise_dbm:
            raise ConfigError(
                f"system.psd_signal: must exceed psd_noise ({self.psd_signal_dbm} <= {self.psd_noise_dbm})"
            )
        if self.grouping not in GROUPINGS:
            raise ConfigError(f"system.grouping: must be one of {GROUPINGS}, got {self.grouping!r}")

    @property
    def grid(self) -> FrequencyGrid:
        return FrequencyGrid(self.n_subcarriers, self.band_start, self.spacing)

    @property
    def es_n0(self) -> float:
        """Per-carrier signal-to-noise energy ratio from the two flat PSDs."""
        return 10.0 ** ((self.psd_signal_dbm - self.psd_noise_dbm) / 10.0)

    @property
    def target_ber(self) -> float:
        return self.coding.target_ber

    @property
    def b_max(self) -> int:
        return self.coding.trellis.max_order

    def gap_table(self) -> GapTable:
        return build_gap_table(self.coding, self.coded, self.b_max)

    def loading_inputs(self) -> LoadingInputs:
        return LoadingInputs(gap_table=self.gap_table(), lc=self.lc, es=self.es_n0, n0=1.0, b_max=self.b_max)

    def for_variant(self, variant: str) -> SystemConfig:
        if variant not in VARIANTS:
            raise ConfigError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
        coded = variant.startswith("coded")
        lc = self.lc if variant.endswith("lpdmt") else 1
        return replace(self, coded=coded, lc=lc)

    def as_dict(self) -> dict:
        return asdict(self)


def dmt_preset(cfg: SystemConfig) -> SystemConfig:
    """Classical DMT: the same system with one carrier per subset."""
    return replace(cfg, lc=1)


def variant_name(cfg: SystemConfig) -> str:
    return ("coded" if cfg.coded else "uncoded") + ("_dmt" if cfg.lc == 1 else "_lpdmt")


@dataclass(frozen=True)
class ScenarioResult:
    variant: str
    config: SystemConfig
    raw_bits: int
    useful_bits: float
    allocation: SystemAllocation
    gains: np.ndarray = field(repr=False)

    @property
    def energy_profile(self) -> np.ndarray:
        return self.allocation.energy_profile()

    @property
    def utilization(self) -> np.ndarray:
        return self.allocation.utilization()

    @property
    def mean_utilization(self) -> float:
        return self.allocation.energy_utilization_fraction()

    def summary(self) -> dict[str, float]:
        return self.allocation.summary(self.useful_bits)

    def summary_line(self) -> str:
        return f"{self.variant} raw={self.raw_bits} useful={self.useful_bits:.1f}"


def useful_bits(allocation: SystemAllocation, cfg: SystemConfig) -> float:
    """Information bits per multicarrier symbol once code redundancy is removed."""
    raw = allocation.total_bits
    if not cfg.coded:
        return float(raw)
    r2d = cfg.coding.trellis.redundancy_bits_per_2d
    rs = cfg.coding.rs
    return (raw - r2d * allocation.n_active) * rs.k / rs.n


def run_scenario(cfg: SystemConfig, channel: MultipathChannelModel | None = None,
                 gains: np.ndarray | None = None, workers: int | None = None) -> ScenarioResult:
    """Load one system variant on a channel (or on precomputed carrier gains)."""
    if gains is None:
        if channel is None:
            raise ConfigError("run_scenario needs a channel model or carrier gains")
        gains = subchannel_gains(channel, cfg.grid)
    gains = np.asarray(gains, dtype=float)
    if gains.shape != (cfg.n_subcarriers,):
        raise ConfigError(f"gains: expected {cfg.n_subcarriers} carriers, got shape {gains.shape}")
    alloc = allocate_system(gains, cfg.loading_inputs(), cfg.grouping, workers=workers)
    return ScenarioResult(
        variant=variant_name(cfg),
        config=cfg,
        raw_bits=alloc.total_bits,
        useful_bits=useful_bits(alloc, cfg),
        allocation=alloc,
        gains=gains,
    )


def run_variants(cfg: SystemConfig, channel: MultipathChannelModel,
                 variants: Sequence[str] = VARIANTS, workers: int | None = None) -> dict[str, ScenarioResult]:
    """Run several variants on one evaluation of the channel gains."""
    gains = subchannel_gains(channel, cfg.grid)
    return {v: run_scenario(cfg.for_variant(v), gains=gains, workers=workers) for v in variants}


# ---------------------------------------------------------------------------
# length sweep


@dataclass(frozen=True)
class SweepRow:
    profile: str
    distance: float
    variant: str
    raw_bits: int
    useful_bits: float


def length_sweep(cfg: SystemConfig, profiles: Sequence[str], distances: Sequence[float],
                 propagation_speed: float | None = None,
                 workers: int | None = None) -> list[SweepRow]:
    """Throughput of all four variants for each length profile and distance."""
    if not distances:
        raise ConfigError("sweep.distances: need at least one distance")
    if not profiles:
        raise ConfigError("sweep.profiles: need at least one profile")
    jobs = [(p, float(d)) for p in profiles for d in distances]
    # build the models up front so a bad profile name fails before any work
    kwargs = {} if propagation_speed is None else {"propagation_speed": propagation_speed}
    models = [length_profile_channel(p, d, **kwargs) for p, d in jobs]

    def one(job):
        (profile, distance), model = job
        results = run_variants(cfg, model)
        return [SweepRow(profile, distance, v, r.raw_bits, r.useful_bits) for v, r in results.items()]

    if workers is not None and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(one, zip(jobs, models)))
    else:
        chunks = [one(job) for job in zip(jobs, models)]
    return [row for chunk in chunks for row in chunk]


def write_throughput_csv(path: str | Path, rows: Iterable[SweepRow]) -> Path:
    return write_csv(
        path,
        ("profile", "distance_m", "variant", "raw_bits", "useful_bits"),
        ((r.profile, float(r.distance), r.variant, r.raw_bits, float(r.useful_bits)) for r in rows),
    )


# ---------------------------------------------------------------------------
# energy distributions


@dataclass(frozen=True)
class EnergyComparison:
    frequencies: np.ndarray
    dmt: ScenarioResult
    lpdmt: ScenarioResult

    @property
    def dmt_utilization(self) -> float:
        return self.dmt.mean_utilization

    @property
    def lpdmt_utilization(self) -> float:
        return self.lpdmt.mean_utilization


def energy_comparison(cfg: SystemConfig, channel: MultipathChannelModel,
                      workers: int | None = None) -> EnergyComparison:
    """Per-carrier energy of coded DMT against coded LP-DMT on one channel."""
    results = run_variants(cfg, channel, (CODED_DMT, CODED_LPDMT), workers=workers)
    return EnergyComparison(cfg.grid.frequencies, results[CODED_DMT], results[CODED_LPDMT])


def _relative_db(energy: np.ndarray, es: float) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(energy / es)


def write_energy_csv(path: str | Path, cmp: EnergyComparison) -> Path:
    """Energies in dB relative to the per-carrier PSD limit (``-inf`` when idle)."""
    es = cmp.dmt.config.es_n0
    dmt_db = _relative_db(cmp.dmt.energy_profile, es)
    lp_db = _relative_db(cmp.lpdmt.energy_profile, es)
    rows = ((n, float(f), float(a), float(b))
            for n, (f, a, b) in enumerate(zip(cmp.frequencies, dmt_db, lp_db)))
    return write_csv(path, ("subcarrier_index", "freq_hz", "energy_db_dmt", "energy_db_lpdmt"), rows)


def write_allocation_csv(path: str | Path, result: ScenarioResult) -> Path:
    """One row per precoding sequence; energies in N0 units and dB re the PSD limit."""
    es = result.config.es_n0
    table = result.config.gap_table()
    rows = []
    for subset, alloc in zip(result.allocation.subsets, result.allocation.allocations):
        for i, (b, e) in enumerate(zip(alloc.bits, alloc.energies)):
            b = int(b)
            e_db = db(e / es) if e > 0 else -math.inf
            gap_db = table.gap_db(b) if b > 0 else ""
            rows.append((subset.index, i, b, float(e), float(e_db), gap_db))
    return write_csv(
        path,
        ("subset_index", "sequence_index", "bits", "energy_linear", "energy_db", "gap_db_used"),
        rows,
    )


def write_summary_csv(path: str | Path, results: Iterable[ScenarioResult]) -> Path:
    return write_csv(
        path,
        ("variant", "total_raw_bits", "total_useful_bits", "n_active_sequences",
         "energy_utilization_fraction"),
        ((r.variant, r.raw_bits, float(r.useful_bits), r.allocation.n_active,
          float(r.mean_utilization)) for r in results),
    )
