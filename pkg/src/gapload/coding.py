"""SNR-gap tables for uncoded QAM and for the RS + 4D trellis concatenation.

All error rates are referred to the 2D symbol error rate: a BER is half a
2D SER, and an RS symbol error rate is ``c`` times a 2D SER, where ``c`` is
the average number of precoding sequences feeding one RS symbol.

The coded gap for order ``b`` (bits per 2D symbol) is, in dB::

    gap_b = gap_0 + margin - (trellis_gain + rs_gain - rate_loss(b))

with ``gap_0 = (1/3) * Qinv(P_bit / 2)**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

import numpy as np
from scipy.special import erfc, erfcinv, gammaln

from . import loading
from .errors import ConfigError, ConvergenceError, DomainError

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)

UNCODED = "uncoded"
CODED = "coded"


def db(x: float) -> float:
    return 10.0 * math.log10(x)


def undb(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


# ---------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class RsCodeParams:
    """Reed-Solomon ``RS(n, k)`` over ``symbol_bits``-bit symbols."""

    n: int = 240
    k: int = 224
    symbol_bits: int = 8

    def __post_init__(self) -> None:
        if not 0 < self.k <= self.n:
            raise ConfigError(f"rs: need 0 < k <= n, got n={self.n}, k={self.k}")
        if (self.n - self.k) % 2:
            raise ConfigError(f"rs: n - k must be even, got {self.n - self.k}")
        if self.n > 2 ** self.symbol_bits - 1:
            raise ConfigError(
                f"rs: n={self.n} exceeds 2**symbol_bits - 1 = {2 ** self.symbol_bits - 1}"
            )

    @property
    def t(self) -> int:
        return (self.n - self.k) // 2

    @property
    def rate(self) -> float:
        return self.k / self.n


@dataclass(frozen=True)
class TrellisCodeParams:
    """Inner trellis code seen as a fixed dB gain, optionally per order."""

    fundamental_gain_db: float = 4.5
    redundancy_bits_per_2d: float = 0.5
    max_constellation_points: int = 1024
    per_order_gain_db: Mapping[int, float] | None = None

    def __post_init__(self) -> None:
        if self.fundamental_gain_db < 0:
            raise ConfigError(f"trellis: fundamental_gain_db must be >= 0, got {self.fundamental_gain_db}")
        if self.redundancy_bits_per_2d < 0:
            raise ConfigError(f"trellis: redundancy must be >= 0, got {self.redundancy_bits_per_2d}")
        if self.max_constellation_points < 2:
            raise ConfigError(f"trellis: max_constellation_points must be >= 2, got {self.max_constellation_points}")
        if self.per_order_gain_db is not None:
            object.__setattr__(self, "per_order_gain_db",
                               MappingProxyType(dict(self.per_order_gain_db)))

    @property
    def max_order(self) -> int:
        """Largest integer bit load fitting the constellation, ``floor(log2(points))``."""
        return int(math.floor(math.log2(self.max_constellation_points) + 1e-12))


@dataclass(frozen=True)
class CodingConfig:
    rs: RsCodeParams = field(default_factory=RsCodeParams)
    trellis: TrellisCodeParams = field(default_factory=TrellisCodeParams)
    c_factor: float = 2.0
    margin_db: float = 0.0
    target_ber: float = 1e-7

    def __post_init__(self) -> None:
        if not 0.0 < self.target_ber < 0.5:
            raise ConfigError(f"target_ber must lie in (0, 0.5), got {self.target_ber}")
        if not self.c_factor > 0:
            raise ConfigError(f"c_factor must be > 0, got {self.c_factor}")


@dataclass(frozen=True)
class GapTable:
    """Linear SNR gap per modulation order ``1..b_max``.

    ``values[b]`` is the gap for ``b`` bits; ``values[0]`` is a placeholder
    (a sequence carrying no bits needs no energy whatever its gap).
    """

    gaps: tuple[float, ...]
    kind: str = UNCODED

    def __post_init__(self) -> None:
        object.__setattr__(self, "gaps", tuple(float(g) for g in self.gaps))
        if not self.gaps:
            raise ConfigError("gap table must cover at least order 1")
        if not all(g > 0 and math.isfinite(g) for g in self.gaps):
            raise ConfigError("gap table entries must be positive and finite")

    @classmethod
    def constant(cls, gap: float, b_max: int, kind: str = UNCODED) -> GapTable:
        return cls(gaps=(gap,) * b_max, kind=kind)

    @property
    def b_max(self) -> int:
        return len(self.gaps)

    @property
    def values(self) -> np.ndarray:
        return np.concatenate(([1.0], self.gaps))

    def gap(self, b: int) -> float:
        if not 1 <= b <= self.b_max:
            raise DomainError(f"order {b} outside gap table range 1..{self.b_max}")
        return self.gaps[b - 1]

    def gap_db(self, b: int) -> float:
        return db(self.gap(b))

    def is_uniform(self) -> bool:
        return all(g == self.gaps[0] for g in self.gaps)


# ---------------------------------------------------------------------------
# Q-function


def q_function(x):
    """Standard normal upper tail probability ``Q(x)``."""
    out = 0.5 * erfc(np.asarray(x, dtype=float) / _SQRT2)
    return float(out) if out.ndim == 0 else out


def q_inverse(p: float) -> float:
    """Inverse of :func:`q_function` on ``0 < p < 0.5``."""
    if not 0.0 < p < 0.5:
        raise DomainError(f"q_inverse needs 0 < p < 0.5, got {p}")
    x = _SQRT2 * float(erfcinv(2.0 * p))
    # one Newton polish against the forward function
    pdf = math.exp(-0.5 * x * x) / _SQRT2PI
    return x + (q_function(x) - p) / pdf


def uncoded_gap(p_bit: float) -> float:
    """Linear SNR gap of uncoded QAM at bit error rate ``p_bit``."""
    if not 0.0 < p_bit < 1.0:
        raise DomainError(f"bit error rate must lie in (0, 1), got {p_bit}")
    return q_inverse(p_bit / 2.0) ** 2 / 3.0


# ---------------------------------------------------------------------------
# Reed-Solomon


def rs_output_ser(p_s: float, rs: RsCodeParams) -> float:
    """Decoded RS symbol error rate for input symbol error rate ``p_s``.

    Bounded-distance decoding that leaves a word untouched when more than
    ``t`` symbols are wrong.
    """
    if not 0.0 <= p_s <= 1.0:
        raise DomainError(f"symbol error rate must lie in [0, 1], got {p_s}")
    if p_s == 0.0:
        return 0.0
    if p_s == 1.0:
        return 1.0
    n, t = rs.n, rs.t
    i = np.arange(t + 1, n + 1, dtype=float)
    log_binom = gammaln(n) - gammaln(i) - gammaln(n - i + 1)
    terms = log_binom + i * math.log(p_s) + (n - i) * math.log1p(-p_s)
    peak = terms.max()
    return float(min(1.0, math.exp(peak) * np.exp(terms - peak).sum()))


def solve_input_ser(p_rs_target: float, rs: RsCodeParams, rtol: float = 1e-6,
                    max_iter: int = 200) -> float:
    """Input symbol error rate that the decoder turns into ``p_rs_target``.

    Bisection on ``log(p_s)``; the output error rate is strictly increasing in
    ``p_s`` so the root is unique.
    """
    if not 0.0 < p_rs_target < 1.0:
        raise DomainError(f"target RS symbol error rate must lie in (0, 1), got {p_rs_target}")
    lo, hi = math.log(1e-300), 0.0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if rs_output_ser(math.exp(mid), rs) < p_rs_target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-14:
            break
    p_s = math.exp(0.5 * (lo + hi))
    achieved = rs_output_ser(p_s, rs)
    if abs(achieved - p_rs_target) > rtol * p_rs_target:
        raise ConvergenceError(
            f"solve_input_ser: no convergence after {max_iter} iterations "
            f"(target {p_rs_target:.3e}, reached {achieved:.3e})"
        )
    return p_s


def rs_operating_point(cfg: CodingConfig) -> tuple[float, float]:
    """Return ``(p_s, p_b)``: RS input SER and demodulator BER for ``cfg``."""
    c = cfg.c_factor
    p_rs = 2.0 * c * cfg.target_ber
    if not p_rs < 1.0:
        raise DomainError(f"2 * c_factor * target_ber = {p_rs} must be < 1")
    p_s = solve_input_ser(p_rs, cfg.rs)
    return p_s, p_s / (2.0 * c)


def rs_gain_db(cfg: CodingConfig) -> float:
    """Gap reduction bought by the outer RS code, in dB."""
    _, p_b = rs_operating_point(cfg)
    return db(uncoded_gap(cfg.target_ber)) - db(uncoded_gap(p_b))


# ---------------------------------------------------------------------------
# trellis and rate loss


def trellis_gain_db(trellis: TrellisCodeParams, p_b: float | None = None,
                    order: int | None = None) -> float:
    """Gap reduction of the inner trellis code at the demodulator operating point.

    Modelled as the code's fundamental gain unless ``per_order_gain_db``
    supplies a value for ``order``.  ``p_b`` is accepted for symmetry with
    measured gain curves and does not affect the constant model.
    """
    if trellis.per_order_gain_db is not None and order is not None and order in trellis.per_order_gain_db:
        return float(trellis.per_order_gain_db[order])
    return trellis.fundamental_gain_db


def rate_loss_db(b: float, rs: RsCodeParams, gains=None, b_cap: float | None = None) -> float:
    """Extra power, in dB, needed to carry ``n/k`` times the rate ``b``.

    ``gains`` are the subcarrier power gains the rate is spread over (a single
    unit-gain carrier by default, which gives the closed form
    ``(2**(b*n/k) - 1) / (2**b - 1)``).  ``b`` is the rate per carrier.
    """
    if not b > 0:
        raise DomainError(f"rate_loss_db needs b > 0, got {b}")
    g = np.ones(1) if gains is None else np.asarray(gains, dtype=float)
    rate = b * g.size
    base = loading.min_energy_continuous(g, rate, b_cap=b_cap)
    inflated = loading.min_energy_continuous(g, rate * rs.n / rs.k, b_cap=b_cap)
    return db(inflated) - db(base)


# ---------------------------------------------------------------------------
# tables


def coding_gain_db(cfg: CodingConfig, order: int, loss_gains=None, rs_gain: float | None = None) -> float:
    """Net coding gain ``trellis + rs - rate_loss`` for one order, in dB."""
    if rs_gain is None:
        rs_gain = rs_gain_db(cfg)
    _, p_b = rs_operating_point(cfg)
    return (trellis_gain_db(cfg.trellis, p_b, order) + rs_gain
            - rate_loss_db(order, cfg.rs, gains=loss_gains))


def build_gap_table(cfg: CodingConfig, coded: bool, b_max: int | None = None,
                    loss_gains=None) -> GapTable:
    """Per-order gap table at ``cfg.target_ber``.

    ``loss_gains`` switches the rate-loss term from the flat reference
    carrier to the given subcarrier gains.
    """
    if b_max is None:
        b_max = cfg.trellis.max_order
    if b_max < 1:
        raise ConfigError(f"b_max must be >= 1, got {b_max}")
    base_db = db(uncoded_gap(cfg.target_ber)) + cfg.margin_db
    if not coded:
        return GapTable.constant(undb(base_db), b_max, kind=UNCODED)
    rs_gain = rs_gain_db(cfg)
    gaps = [undb(base_db - coding_gain_db(cfg, b, loss_gains, rs_gain)) for b in range(1, b_max + 1)]
    return GapTable(gaps=tuple(gaps), kind=CODED)
