"""Simulation configuration: miners, protocol parameters, end conditions."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

POWER_SUM_TOL = 1e-9


class ConfigError(ValueError):
    """Raised for invalid or inconsistent configuration input."""


class MinerKind(str, Enum):
    HONEST = "honest"
    SELFISH = "selfish"


class ProtocolName(str, Enum):
    NAKAMOTO = "nakamoto"
    STRONGCHAIN = "strongchain"
    FRUITCHAIN = "fruitchain"


@dataclass(frozen=True)
class MinerSpec:
    """One participant: contiguous id, relative power, behaviour kind."""

    id: int
    power: float
    kind: MinerKind


@dataclass(frozen=True)
class EndCondition:
    """Stop rule for a run.

    ``round_budget`` counts mined artifacts (every round produces exactly
    one).  ``target_height`` stops once any participant's chain reaches the
    given block height; only the fruit/block protocol supports it.
    """

    round_budget: Optional[int] = None
    target_height: Optional[int] = None

    def __post_init__(self):
        if (self.round_budget is None) == (self.target_height is None):
            raise ConfigError("end condition needs exactly one of round_budget, target_height")
        limit = self.round_budget if self.round_budget is not None else self.target_height
        if limit <= 0:
            raise ConfigError("end condition limit must be positive")


@dataclass(frozen=True)
class StrongchainParams:
    """Weak/strong header protocol knobs.

    ``ratio`` is the expected number of weak headers per strong block; a
    strong block pays 1 and an embedded weak header pays 1/ratio.
    """

    ratio: int = 10

    def __post_init__(self):
        if self.ratio < 1:
            raise ConfigError("strongchain ratio must be >= 1")


@dataclass(frozen=True)
class FruitchainParams:
    """Fruit/block protocol knobs.

    ``fruit_ratio`` is the expected number of fruits per block,
    ``freshness_window`` the maximum height distance (inclusive) at which a
    fruit may still be embedded.  ``block_reward`` and ``fruit_reward`` set
    the payout split; the defaults give blocks half the steady-state reward.
    """

    fruit_ratio: int = 10
    freshness_window: int = 10
    block_reward: float = 1.0
    fruit_reward: float = 0.1

    def __post_init__(self):
        if self.fruit_ratio < 1:
            raise ConfigError("fruit_ratio must be >= 1")
        if self.freshness_window < 1:
            raise ConfigError("freshness_window must be >= 1")
        if self.block_reward < 0 or self.fruit_reward < 0:
            raise ConfigError("rewards must be non-negative")


def balanced_fruit_params(fruit_ratio: int = 10, freshness_window: int = 10) -> FruitchainParams:
    """Preset where a block interval pays half to the block, half to fruits."""
    return FruitchainParams(fruit_ratio, freshness_window, 1.0, 1.0 / fruit_ratio)


def fruit_heavy_params(fruit_ratio: int = 10, freshness_window: int = 10) -> FruitchainParams:
    """Preset where fruits dominate: the block gets 1/(fruit_ratio+1) of an interval."""
    return FruitchainParams(fruit_ratio, freshness_window, 1.0, 1.0)


@dataclass(frozen=True)
class SimulationConfig:
    protocol: ProtocolName
    miners: tuple[MinerSpec, ...]
    gamma: float = 0.5
    master_seed: int = 0
    end_condition: EndCondition = field(default_factory=lambda: EndCondition(round_budget=100_000))
    protocol_params: object = None

    def __post_init__(self):
        miners = tuple(self.miners)
        object.__setattr__(self, "miners", miners)
        if not miners:
            raise ConfigError("at least one miner is required")
        for i, m in enumerate(miners):
            if m.id != i:
                raise ConfigError(f"miner ids must be contiguous from 0, got {m.id} at position {i}")
            if not (0.0 < m.power <= 1.0):
                raise ConfigError(f"miner {m.id} power {m.power} outside (0, 1]")
        total = sum(m.power for m in miners)
        if abs(total - 1.0) > POWER_SUM_TOL:
            raise ConfigError(f"miner powers sum to {total!r}, expected 1.0")
        if not (0.0 <= self.gamma <= 1.0):
            raise ConfigError(f"gamma {self.gamma} outside [0, 1]")
        proto = ProtocolName(self.protocol)
        object.__setattr__(self, "protocol", proto)
        params = self.protocol_params
        if proto is ProtocolName.STRONGCHAIN:
            params = params if params is not None else StrongchainParams()
            if not isinstance(params, StrongchainParams):
                raise ConfigError("strongchain runs need StrongchainParams")
        elif proto is ProtocolName.FRUITCHAIN:
            params = params if params is not None else balanced_fruit_params()
            if not isinstance(params, FruitchainParams):
                raise ConfigError("fruitchain runs need FruitchainParams")
        else:
            if params is not None:
                raise ConfigError("nakamoto runs take no protocol parameters")
        object.__setattr__(self, "protocol_params", params)
        if self.end_condition.target_height is not None and proto is not ProtocolName.FRUITCHAIN:
            raise ConfigError("target_height end condition is only supported for fruitchain")

    @property
    def selfish_ids(self) -> tuple[int, ...]:
        return tuple(m.id for m in self.miners if m.kind is MinerKind.SELFISH)

    @property
    def honest_ids(self) -> tuple[int, ...]:
        return tuple(m.id for m in self.miners if m.kind is MinerKind.HONEST)


def default_gamma(protocol: ProtocolName, n_selfish: int) -> float:
    """Tie propagation default: 0.5 generally, 0 for single-attacker strongchain."""
    if protocol is ProtocolName.STRONGCHAIN and n_selfish <= 1:
        return 0.0
    return 0.5


def _canonical_payload(config: SimulationConfig) -> dict:
    payload = {
        "protocol": config.protocol.value,
        "miners": [[m.id, repr(float(m.power)), m.kind.value] for m in config.miners],
        "gamma": repr(float(config.gamma)),
        "end": [config.end_condition.round_budget, config.end_condition.target_height],
    }
    params = config.protocol_params
    if isinstance(params, StrongchainParams):
        payload["params"] = {"ratio": params.ratio}
    elif isinstance(params, FruitchainParams):
        payload["params"] = {
            "fruit_ratio": params.fruit_ratio,
            "freshness_window": params.freshness_window,
            "block_reward": repr(float(params.block_reward)),
            "fruit_reward": repr(float(params.fruit_reward)),
        }
    return payload


def config_digest(config: SimulationConfig) -> int:
    """Stable 64-bit digest of everything that defines a run except the seed.

    Floats are canonicalised through ``repr`` (shortest round-trip form), the
    payload through sorted-key JSON, and the first eight bytes of the SHA-256
    of that text give the digest.  Two configs that simulate identically
    digest identically regardless of construction order.
    """
    text = json.dumps(_canonical_payload(config), sort_keys=True, separators=(",", ":"))
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")


def symmetric_attacker_config(
    protocol: ProtocolName,
    n_attackers: int,
    alpha: float,
    gamma: Optional[float] = None,
    rounds: int = 100_000,
    master_seed: int = 0,
    protocol_params: object = None,
) -> SimulationConfig:
    """k selfish miners at power ``alpha`` each plus one aggregate honest miner."""
    if n_attackers < 1:
        raise ConfigError("need at least one attacker")
    if n_attackers * alpha >= 1.0:
        raise ConfigError("attacker powers must leave honest power positive")
    miners = [MinerSpec(i, alpha, MinerKind.SELFISH) for i in range(n_attackers)]
    miners.append(MinerSpec(n_attackers, 1.0 - n_attackers * alpha, MinerKind.HONEST))
    if gamma is None:
        gamma = default_gamma(ProtocolName(protocol), n_attackers)
    return SimulationConfig(
        protocol=ProtocolName(protocol),
        miners=tuple(miners),
        gamma=gamma,
        master_seed=master_seed,
        end_condition=EndCondition(round_budget=rounds),
        protocol_params=protocol_params,
    )


def rival_attacker_config(
    protocol: ProtocolName,
    alpha_1: float,
    rival_powers: tuple[float, ...],
    gamma: Optional[float] = None,
    rounds: int = 100_000,
    master_seed: int = 0,
    protocol_params: object = None,
) -> SimulationConfig:
    """Attacker of interest at ``alpha_1`` with fixed-power selfish rivals."""
    powers = [alpha_1, *rival_powers]
    honest = 1.0 - sum(powers)
    if honest <= 0.0:
        raise ConfigError("attacker powers must leave honest power positive")
    miners = [MinerSpec(i, p, MinerKind.SELFISH) for i, p in enumerate(powers)]
    miners.append(MinerSpec(len(powers), honest, MinerKind.HONEST))
    if gamma is None:
        gamma = default_gamma(ProtocolName(protocol), len(powers))
    return SimulationConfig(
        protocol=ProtocolName(protocol),
        miners=tuple(miners),
        gamma=gamma,
        master_seed=master_seed,
        end_condition=EndCondition(round_budget=rounds),
        protocol_params=protocol_params,
    )
