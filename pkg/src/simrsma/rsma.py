"""Hierarchical rate-splitting rate math: SINRs, stream rates, per-user rates.

Stream-to-antenna mapping: column 0 of the end-to-end channel carries the
common stream, columns 1..N the group streams, columns 1+N..N+K the private
streams.  Decoding is successive: common first (everything else is
interference), then the own-group stream (common already removed), then the
private stream (only other private streams remain).

All functions are pure; every scheme in the package evaluates rates through
this one implementation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

BUDGET_SLACK = 1e-9


@dataclass(frozen=True)
class PowerAllocation:
    """Per-stream transmit powers in watts: one common, N group, K private."""

    common: float
    group: tuple[float, ...]
    private: tuple[float, ...]

    def __post_init__(self):
        if self.common < 0 or any(p < 0 for p in self.group) or any(p < 0 for p in self.private):
            raise ValueError("PowerAllocation: stream powers must be non-negative")

    @property
    def total(self) -> float:
        return self.common + sum(self.group) + sum(self.private)

    def check_budget(self, transmit_budget: float) -> None:
        if self.total > transmit_budget + BUDGET_SLACK:
            raise ValueError(
                f"PowerAllocation: total {self.total} exceeds budget {transmit_budget}"
            )

    def as_vector(self) -> np.ndarray:
        return np.concatenate(([self.common], self.group, self.private))

    @classmethod
    def from_vector(cls, vec: np.ndarray, num_groups: int, num_users: int) -> "PowerAllocation":
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (1 + num_groups + num_users,):
            raise ValueError(
                f"PowerAllocation: expected {1 + num_groups + num_users} entries, got {vec.shape}"
            )
        return cls(
            common=float(vec[0]),
            group=tuple(vec[1 : 1 + num_groups]),
            private=tuple(vec[1 + num_groups :]),
        )


@dataclass(frozen=True)
class Grouping:
    """Partition of users into groups; ``group_of[k]`` is user k's group index."""

    group_of: tuple[int, ...]
    num_groups: int

    def __post_init__(self):
        if self.num_groups < 1:
            raise ValueError("Grouping: num_groups must be >= 1 (use None for no groups)")
        if any(not (0 <= g < self.num_groups) for g in self.group_of):
            raise ValueError(f"Grouping: group indices must lie in [0, {self.num_groups})")

    @property
    def num_users(self) -> int:
        return len(self.group_of)

    def sizes(self) -> np.ndarray:
        return np.bincount(np.asarray(self.group_of), minlength=self.num_groups)

    def members(self, group: int) -> tuple[int, ...]:
        return tuple(k for k, g in enumerate(self.group_of) if g == group)

    def move(self, user: int, group: int) -> "Grouping":
        assign = list(self.group_of)
        assign[user] = group
        return Grouping(tuple(assign), self.num_groups)

    def to_string(self) -> str:
        """Comma-separated 1-based group indices, aligned to user order."""
        return ",".join(str(g + 1) for g in self.group_of)

    @classmethod
    def from_string(cls, text: str, num_groups: int) -> "Grouping":
        return cls(tuple(int(tok) - 1 for tok in text.split(",")), num_groups)


@dataclass(frozen=True)
class RateReport:
    """SINRs and rates (bits/s/Hz) for one (channel, power, grouping) triple."""

    sinr_common: np.ndarray  # (K,)
    sinr_group: np.ndarray  # (K,) own-group SINR per user; NaN when ungrouped
    sinr_private: np.ndarray  # (K,)
    rate_common: float
    rate_group: np.ndarray  # (N,) zero for empty groups
    rate_private: np.ndarray  # (K,)
    rate_users: np.ndarray  # (K,)
    min_rate: float
    empty_groups: tuple[int, ...] = ()

    def csv_header(self) -> str:
        k = len(self.rate_users)
        n = len(self.rate_group)
        cols = (
            [f"sinr_common_{i}" for i in range(k)]
            + [f"sinr_group_{i}" for i in range(k)]
            + [f"sinr_private_{i}" for i in range(k)]
            + ["rate_common_bpshz"]
            + [f"rate_group_{j}_bpshz" for j in range(n)]
            + [f"rate_private_{i}_bpshz" for i in range(k)]
            + [f"rate_user_{i}_bpshz" for i in range(k)]
            + ["min_rate_bpshz"]
        )
        return ",".join(cols)

    def to_csv_row(self) -> str:
        vals = (
            list(self.sinr_common)
            + list(self.sinr_group)
            + list(self.sinr_private)
            + [self.rate_common]
            + list(self.rate_group)
            + list(self.rate_private)
            + list(self.rate_users)
            + [self.min_rate]
        )
        return ",".join(repr(float(v)) for v in vals)


def _power_vector(power) -> np.ndarray:
    return power.as_vector() if isinstance(power, PowerAllocation) else np.asarray(power, dtype=float)


def _as_gains(channel) -> np.ndarray:
    """Accept a complex end-to-end channel or precomputed |channel|^2 gains."""
    m = np.asarray(channel)
    return np.abs(m) ** 2 if np.iscomplexobj(m) else m.astype(float, copy=False)


def _group_array(grouping) -> tuple[np.ndarray | None, int]:
    if grouping is None:
        return None, 0
    return np.asarray(grouping.group_of, dtype=int), grouping.num_groups


def _sinr_parts(gains, p_vec, num_groups, noise_power):
    """Shared interference sums: per-user total group and private received power."""
    k = gains.shape[0]
    expected = 1 + num_groups + k
    if gains.shape[1] != expected:
        raise ValueError(f"rate math: gains have {gains.shape[1]} streams, expected {expected}")
    if p_vec.shape != (expected,):
        raise ValueError(f"rate math: power vector length {p_vec.shape} != {expected}")
    p_group = p_vec[1 : 1 + num_groups]
    p_private = p_vec[1 + num_groups :]
    group_power = gains[:, 1 : 1 + num_groups] @ p_group if num_groups else np.zeros(k)
    private_power = gains[:, 1 + num_groups :] @ p_private
    return p_group, p_private, group_power, private_power


def sinr_common(channel, power, noise_power: float) -> np.ndarray:
    """Common-stream SINR per user; all group and private streams interfere."""
    gains = _as_gains(channel)
    p_vec = _power_vector(power)
    num_groups = p_vec.size - 1 - gains.shape[0]
    _, _, group_power, private_power = _sinr_parts(gains, p_vec, num_groups, noise_power)
    return p_vec[0] * gains[:, 0] / (group_power + private_power + noise_power)


def sinr_group(channel, power, grouping: Grouping, noise_power: float) -> np.ndarray:
    """Own-group-stream SINR per user (common already cancelled)."""
    gains = _as_gains(channel)
    p_vec = _power_vector(power)
    group_of, num_groups = _group_array(grouping)
    if group_of is None or len(group_of) != gains.shape[0]:
        raise ValueError("sinr_group: grouping must assign every user")
    p_group, _, group_power, private_power = _sinr_parts(gains, p_vec, num_groups, noise_power)
    users = np.arange(gains.shape[0])
    own = p_group[group_of] * gains[users, 1 + group_of]
    return own / (group_power - own + private_power + noise_power)


def sinr_private(channel, power, noise_power: float) -> np.ndarray:
    """Private-stream SINR per user; only other users' private streams interfere."""
    gains = _as_gains(channel)
    p_vec = _power_vector(power)
    k = gains.shape[0]
    num_groups = p_vec.size - 1 - k
    _, p_private, _, private_power = _sinr_parts(gains, p_vec, num_groups, noise_power)
    users = np.arange(k)
    own = p_private * gains[users, 1 + num_groups + users]
    return own / (private_power - own + noise_power)


def stream_rates(
    gamma_common: np.ndarray,
    gamma_group: np.ndarray | None,
    gamma_private: np.ndarray,
    grouping: Grouping | None,
) -> tuple[float, np.ndarray, np.ndarray, tuple[int, ...]]:
    """Per-stream rates: common (worst user), group (worst member), private.

    Empty groups contribute a zero rate and are reported back to the caller.
    """
    rate_common = float(np.min(np.log2(1.0 + gamma_common)))
    rate_private = np.log2(1.0 + gamma_private)
    group_of, num_groups = _group_array(grouping)
    empty: tuple[int, ...] = ()
    if group_of is None:
        rate_group = np.zeros(0)
    else:
        member_rates = np.log2(1.0 + gamma_group)
        rate_group = np.full(num_groups, np.inf)
        np.minimum.at(rate_group, group_of, member_rates)
        missing = np.isinf(rate_group)
        if np.any(missing):
            empty = tuple(int(i) for i in np.nonzero(missing)[0])
            rate_group[missing] = 0.0
    return rate_common, rate_group, rate_private, empty


def user_rates(
    rate_common: float,
    rate_group: np.ndarray,
    rate_private: np.ndarray,
    grouping: Grouping | None,
    num_users: int,
) -> tuple[np.ndarray, float]:
    """Total per-user rates: equal common share, equal own-group share, private."""
    rates = rate_common / num_users + rate_private
    group_of, _ = _group_array(grouping)
    if group_of is not None:
        sizes = np.bincount(group_of, minlength=len(rate_group))
        rates = rates + rate_group[group_of] / sizes[group_of]
    return rates, float(np.min(rates))


def user_rate_vector(
    gains: np.ndarray,
    p_vec: np.ndarray,
    group_of: np.ndarray | None,
    num_groups: int,
    noise_power: float,
) -> np.ndarray:
    """Lean per-user rate evaluation used inside optimizer loops.

    Same math as the staged functions, flattened to one pass over precomputed
    |channel|^2 stream gains.
    """
    k = gains.shape[0]
    p_group, p_private, group_power, private_power = _sinr_parts(gains, p_vec, num_groups, noise_power)
    users = np.arange(k)
    base_interference = group_power + private_power + noise_power
    gamma_c = p_vec[0] * gains[:, 0] / base_interference
    own_p = p_private * gains[users, 1 + num_groups + users]
    gamma_p = own_p / (private_power - own_p + noise_power)
    rates = np.log2(1.0 + gamma_p) + np.min(np.log2(1.0 + gamma_c)) / k
    if group_of is not None and num_groups:
        own_g = p_group[group_of] * gains[users, 1 + group_of]
        gamma_g = own_g / (base_interference - own_g)
        member_rates = np.log2(1.0 + gamma_g)
        rate_group = np.full(num_groups, np.inf)
        np.minimum.at(rate_group, group_of, member_rates)
        sizes = np.bincount(group_of, minlength=num_groups)
        rate_group[sizes == 0] = 0.0
        rates = rates + rate_group[group_of] / sizes[group_of]
    return rates


def rate_report(channel, power, grouping: Grouping | None, noise_power: float) -> RateReport:
    """Full rate evaluation for one configuration."""
    gains = _as_gains(channel)
    p_vec = _power_vector(power)
    k = gains.shape[0]
    gamma_c = sinr_common(gains, p_vec, noise_power)
    gamma_p = sinr_private(gains, p_vec, noise_power)
    if grouping is not None:
        gamma_g = sinr_group(gains, p_vec, grouping, noise_power)
    else:
        gamma_g = np.full(k, np.nan)
    rate_c, rate_g, rate_p, empty = stream_rates(
        gamma_c, gamma_g if grouping is not None else None, gamma_p, grouping
    )
    rates, min_rate = user_rates(rate_c, rate_g, rate_p, grouping, k)
    return RateReport(
        sinr_common=gamma_c,
        sinr_group=gamma_g,
        sinr_private=gamma_p,
        rate_common=rate_c,
        rate_group=rate_g,
        rate_private=rate_p,
        rate_users=rates,
        min_rate=min_rate,
        empty_groups=empty,
    )
