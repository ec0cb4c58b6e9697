"""Bit and energy loading for linear-precoded DMT under a per-carrier PSD limit.

Subcarriers are grouped into subsets of ``lc`` carriers.  Each subset carries
``lc`` orthogonal precoding sequences and every sequence of a subset sees
the same effective gain ``lc**2 / sum(1 / |h_n|**2)``, so a sequence loaded
with ``b`` bits needs

    e(b) = (2**b - 1) * gap_b / lc**2 * N0 * sum(1 / |h_n|**2)

and a subset is feasible when ``sum_i e_i <= Es``.  With unit-modulus
spreading chips every member carrier radiates ``sum_i e_i``, so the subset
constraint is exactly the per-carrier PSD limit.  ``lc = 1`` is plain DMT.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import ConfigError, ConstellationCapError, InfeasibleRateError

if TYPE_CHECKING:
    from .coding import GapTable

BUDGET_RTOL = 1e-12

ADJACENT = "adjacent"
SORTED = "sorted"
GROUPINGS = (ADJACENT, SORTED)


@dataclass(frozen=True)
class Subset:
    index: int
    indices: tuple[int, ...]
    harmonic_gain_sum: float

    @classmethod
    def from_gains(cls, index: int, indices: Sequence[int], gains) -> Subset:
        idx = tuple(int(i) for i in indices)
        with np.errstate(divide="ignore", over="ignore"):
            hs = float(np.sum(1.0 / np.asarray(gains, dtype=float)[list(idx)]))
        # an infinite sum marks a dead carrier; the subset then carries nothing
        if not hs > 0.0:
            raise ConfigError(f"subset {index}: harmonic gain sum must be positive, got {hs}")
        return cls(index=index, indices=idx, harmonic_gain_sum=hs)

    @property
    def size(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class SubsetAllocation:
    """Bits and energies of one subset's sequences, sorted by decreasing load."""

    bits: np.ndarray
    energies: np.ndarray

    @property
    def active_count(self) -> int:
        return int(np.count_nonzero(self.bits))

    @property
    def total_bits(self) -> int:
        return int(self.bits.sum())

    @property
    def total_energy(self) -> float:
        return float(self.energies.sum())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SubsetAllocation):
            return NotImplemented
        return (np.array_equal(self.bits, other.bits)
                and np.array_equal(self.energies, other.energies))

    __hash__ = None


@dataclass(frozen=True)
class LoadingInputs:
    gap_table: GapTable
    lc: int
    es: float
    n0: float = 1.0
    b_max: int | None = None

    def __post_init__(self) -> None:
        if self.b_max is None:
            object.__setattr__(self, "b_max", self.gap_table.b_max)
        if self.lc < 1:
            raise ConfigError(f"lc must be >= 1, got {self.lc}")
        if self.es < 0.0:
            raise ConfigError(f"es must be >= 0, got {self.es}")
        if not self.n0 > 0.0:
            raise ConfigError(f"n0 must be > 0, got {self.n0}")
        if not 1 <= self.b_max <= self.gap_table.b_max:
            raise ConfigError(
                f"b_max={self.b_max} must lie in 1..{self.gap_table.b_max} (gap table range)"
            )

    def within_budget(self, energy: float) -> bool:
        return energy <= self.es * (1.0 + BUDGET_RTOL)


# ---------------------------------------------------------------------------
# closed-form pieces


def continuous_rate(subset: Subset, inp: LoadingInputs, gap: float) -> float:
    """Rate of a subset with infinite granularity, in bits."""
    lc = subset.size
    snr = (lc / subset.harmonic_gain_sum) * (inp.es / inp.n0) / gap
    return lc * math.log2(1.0 + snr)


def discrete_bit_split(rate: float, lc: int) -> tuple[np.ndarray, int]:
    """Split a real rate over ``lc`` sequences into integer loads.

    The first ``n_c`` sequences get ``floor(rate/lc) + 1`` bits, the rest
    ``floor(rate/lc)``.
    """
    if rate < 0:
        raise ValueError(f"rate must be >= 0, got {rate}")
    per = rate / lc
    base = math.floor(per)
    n_c = math.floor(lc * (2.0 ** (per - base) - 1.0))
    bits = np.full(lc, base, dtype=np.int64)
    bits[:n_c] += 1
    return bits, n_c


def practical_rate(bits) -> int:
    return int(np.sum(bits))


def practical_rate_closed_form(rate: float, lc: int) -> int:
    """Finite-granularity rate of a subset written directly in terms of ``rate``."""
    per = rate / lc
    base = math.floor(per)
    n_c = math.floor(lc * (2.0 ** (per - base) - 1.0))
    return n_c * (base + 1) + (lc - n_c) * base


def _order_costs(subset: Subset, inp: LoadingInputs) -> list[float]:
    """Energy of one sequence for each order ``0..b_max``."""
    unit = inp.n0 * subset.harmonic_gain_sum / subset.size ** 2
    gaps = inp.gap_table.values
    with np.errstate(over="ignore"):  # near-dead subsets price every order at inf
        return [0.0] + [float((2.0 ** b - 1.0) * gaps[b] * unit) for b in range(1, inp.b_max + 1)]


def energy_for_bits(bits, subset: Subset, inp: LoadingInputs) -> np.ndarray:
    """Energy each sequence needs for its load, using the per-order gap."""
    b = np.asarray(bits, dtype=np.int64)
    if b.size and (b.max() > inp.b_max or b.min() < 0):
        raise ConstellationCapError(
            f"bit loads must lie in 0..{inp.b_max}, got {b.min()}..{b.max()}"
        )
    costs = np.asarray(_order_costs(subset, inp))
    return costs[b]


# ---------------------------------------------------------------------------
# per-subset allocation


def allocate_subset(subset: Subset, inp: LoadingInputs, initial_gap: float | None = None) -> SubsetAllocation:
    """Maximise the bits of one subset under ``sum(e) <= Es``.

    Seeds a bit vector from the continuous rate at ``initial_gap``, then
    adds bits one sequence at a time (cyclically from ``n_c``) while the
    budget holds and removes them in reverse order until it holds again.
    A last pass tops up any sequence that can still take a bit, which only
    fires for gap tables whose cost per order is not convex.
    """
    lc = subset.size
    b_max = inp.b_max
    if inp.es <= 0.0 or math.isinf(subset.harmonic_gain_sum):
        return _finish(np.zeros(lc, dtype=np.int64), subset, inp)
    costs = _order_costs(subset, inp)

    if initial_gap is None:
        initial_gap = _local_seed_gap(subset, inp)
    rate = continuous_rate(subset, inp, initial_gap)
    bits_arr, n_c = discrete_bit_split(rate, lc)
    bits = [min(int(b), b_max) for b in bits_arr]

    def total() -> float:
        return sum(costs[b] for b in bits)

    # add one bit at a time, position n_c + count (1-based), cyclic
    count = 1
    while inp.within_budget(total()):
        for _ in range(lc):
            if bits[(n_c + count - 1) % lc] < b_max:
                break
            count += 1
        else:
            break  # every sequence at the cap
        bits[(n_c + count - 1) % lc] += 1
        count += 1

    # remove in reverse until the budget holds
    while not inp.within_budget(total()):
        count -= 1
        pos = (n_c + count - 1) % lc
        if bits[pos] > 0:
            bits[pos] -= 1

    # top-up: cheapest feasible single-bit increment
    while True:
        spent = total()
        best = None
        for i, b in enumerate(bits):
            if b >= b_max:
                continue
            step = costs[b + 1] - costs[b]
            if inp.within_budget(spent + step) and (best is None or step < best[0]):
                best = (step, i)
        if best is None:
            break
        bits[best[1]] += 1

    return _finish(np.array(bits, dtype=np.int64), subset, inp, costs)


def _local_seed_gap(subset: Subset, inp: LoadingInputs) -> float:
    """Gap-table entry at the order a unit-gap rate estimate points to."""
    rate = continuous_rate(subset, inp, 1.0)
    order = min(max(math.floor(rate / subset.size), 1), inp.b_max)
    return inp.gap_table.gap(order)


def _finish(bits: np.ndarray, subset: Subset, inp: LoadingInputs,
            costs: list[float] | None = None) -> SubsetAllocation:
    if costs is None:
        costs = _order_costs(subset, inp)
    bits = np.sort(bits)[::-1].copy()
    energies = np.asarray(costs)[bits]
    return SubsetAllocation(bits=bits, energies=energies)


def min_energy_for_rate(subset: Subset, inp: LoadingInputs, target_bits: int) -> tuple[SubsetAllocation, float]:
    """Cheapest integer loading of exactly ``target_bits`` on one subset (no PSD cap)."""
    lc = subset.size
    if target_bits < 0:
        raise ValueError(f"target_bits must be >= 0, got {target_bits}")
    if target_bits > lc * inp.b_max:
        raise InfeasibleRateError(
            f"{target_bits} bits exceed subset capacity {lc} x {inp.b_max}"
        )
    costs = _order_costs(subset, inp)
    inf = math.inf
    # best[j]: min energy for j bits over the sequences seen so far
    best = [0.0] + [inf] * target_bits
    choice: list[list[int]] = []
    for _ in range(lc):
        nxt = [inf] * (target_bits + 1)
        pick = [0] * (target_bits + 1)
        for j in range(target_bits + 1):
            for b in range(min(j, inp.b_max) + 1):
                cand = best[j - b] + costs[b]
                if cand < nxt[j]:
                    nxt[j], pick[j] = cand, b
        best = nxt
        choice.append(pick)
    if math.isinf(best[target_bits]):
        raise InfeasibleRateError(f"{target_bits} bits need infinite energy on a dead subset")
    bits = []
    j = target_bits
    for pick in reversed(choice):
        bits.append(pick[j])
        j -= pick[j]
    alloc = _finish(np.array(bits, dtype=np.int64), subset, inp, costs)
    return alloc, alloc.total_energy


def min_energy_continuous(gains, rate: float, gap: float = 1.0, n0: float = 1.0,
                          b_cap: float | None = None) -> float:
    """Minimum total energy carrying ``rate`` bits over carriers with ``gains``.

    Real-valued loads (water-filling dual); each carrier carries at most
    ``b_cap`` bits when given.
    """
    g = np.asarray(gains, dtype=float) / (gap * n0)
    if np.any(g <= 0):
        raise ValueError("gains must be positive")
    cap = math.inf if b_cap is None else float(b_cap)
    if rate > cap * g.size * (1.0 + 1e-12):
        raise InfeasibleRateError(f"rate {rate} exceeds {g.size} carriers x {cap} bits")
    if rate <= 0.0:
        return 0.0
    lg = np.log2(g)

    def rate_at(x: float) -> float:
        return float(np.clip(x + lg, 0.0, cap).sum())

    # rate_at is piecewise linear and non-decreasing in the water level x
    points = np.concatenate((-lg, cap - lg)) if math.isfinite(cap) else -lg
    points = np.unique(points)
    prev = points[0]
    x = None
    for p in points[1:]:
        if rate_at(p) >= rate:
            slope = np.count_nonzero((0.5 * (prev + p) + lg > 0) & (0.5 * (prev + p) + lg < cap))
            x = prev + (rate - rate_at(prev)) / slope
            break
        prev = p
    if x is None:
        x = prev + (rate - rate_at(prev)) / g.size
    loads = np.clip(x + lg, 0.0, cap)
    return float(np.sum((2.0 ** loads - 1.0) / g))


# ---------------------------------------------------------------------------
# whole system


@dataclass(frozen=True)
class SystemAllocation:
    subsets: tuple[Subset, ...]
    allocations: tuple[SubsetAllocation, ...]
    leftover: tuple[int, ...]
    n_subcarriers: int
    es: float

    @property
    def total_bits(self) -> int:
        return sum(a.total_bits for a in self.allocations)

    @property
    def n_active(self) -> int:
        return sum(a.active_count for a in self.allocations)

    def energy_profile(self) -> np.ndarray:
        """Energy radiated on every subcarrier (zero on leftover carriers)."""
        out = np.zeros(self.n_subcarriers)
        for s, a in zip(self.subsets, self.allocations):
            out[list(s.indices)] = a.total_energy
        return out

    def utilization(self) -> np.ndarray:
        """Per-subcarrier energy as a fraction of the PSD limit."""
        if self.es <= 0:
            return np.zeros(self.n_subcarriers)
        return self.energy_profile() / self.es

    def energy_utilization_fraction(self) -> float:
        return float(self.utilization().mean())

    def summary(self, useful_bits: float | None = None) -> dict[str, float]:
        return {
            "total_raw_bits": self.total_bits,
            "total_useful_bits": float(self.total_bits if useful_bits is None else useful_bits),
            "n_active_sequences": self.n_active,
            "energy_utilization_fraction": self.energy_utilization_fraction(),
        }


def make_subsets(gains, lc: int, grouping: str = ADJACENT) -> tuple[list[Subset], tuple[int, ...]]:
    """Partition carriers into ``len(gains) // lc`` subsets.

    ``adjacent`` takes consecutive carriers; ``sorted`` ranks carriers by
    gain so each subset holds carriers of similar strength.  The carriers
    that do not fill a whole subset are returned unallocated.
    """
    g = np.asarray(gains, dtype=float)
    n = g.size
    if lc < 1 or n < lc:
        raise ConfigError(f"need 1 <= lc <= N, got lc={lc}, N={n}")
    if grouping == ADJACENT:
        order = np.arange(n)
    elif grouping == SORTED:
        order = np.argsort(-g, kind="stable")
    else:
        raise ConfigError(f"grouping must be one of {GROUPINGS}, got {grouping!r}")
    n_k = n // lc
    subsets = [Subset.from_gains(k, order[k * lc:(k + 1) * lc], g) for k in range(n_k)]
    leftover = tuple(sorted(int(i) for i in order[n_k * lc:]))
    return subsets, leftover


def allocate_system(gains, inp: LoadingInputs, grouping: str = ADJACENT,
                    workers: int | None = None) -> SystemAllocation:
    """Group the carriers and load every subset independently.

    ``workers`` > 1 spreads subsets over a thread pool; results come back in
    subset order and match the sequential run exactly.
    """
    g = np.asarray(gains, dtype=float)
    subsets, leftover = make_subsets(g, inp.lc, grouping)
    if workers is not None and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            allocations = list(pool.map(lambda s: allocate_subset(s, inp), subsets))
    else:
        allocations = [allocate_subset(s, inp) for s in subsets]
    return SystemAllocation(
        subsets=tuple(subsets),
        allocations=tuple(allocations),
        leftover=leftover,
        n_subcarriers=g.size,
        es=inp.es,
    )


def default_workers() -> int:
    """Thread count from ``GAPLOAD_THREADS`` (0 or unset means one per CPU)."""
    raw = os.environ.get("GAPLOAD_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"GAPLOAD_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ConfigError(f"GAPLOAD_THREADS must be >= 0, got {n}")
    return n or (os.cpu_count() or 1)
