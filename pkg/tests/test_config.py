"""Config validation, scenario builders, digest stability."""

import dataclasses

import pytest

from selfishsim.config import (
    ConfigError,
    EndCondition,
    FruitchainParams,
    MinerKind,
    MinerSpec,
    ProtocolName,
    SimulationConfig,
    StrongchainParams,
    config_digest,
    default_gamma,
    rival_attacker_config,
    symmetric_attacker_config,
)


def _miners(*powers, selfish=()):
    return tuple(
        MinerSpec(i, p, MinerKind.SELFISH if i in selfish else MinerKind.HONEST)
        for i, p in enumerate(powers)
    )


def test_out_of_range_power_rejected():
    miners = (MinerSpec(0, 0.0, MinerKind.HONEST), MinerSpec(1, 1.0, MinerKind.HONEST))
    with pytest.raises(ConfigError):
        SimulationConfig(protocol=ProtocolName.NAKAMOTO, miners=miners)


def test_powers_must_sum_to_one():
    with pytest.raises(ConfigError):
        SimulationConfig(protocol=ProtocolName.NAKAMOTO, miners=_miners(0.5, 0.4))


def test_ids_must_be_contiguous():
    miners = (MinerSpec(0, 0.5, MinerKind.HONEST), MinerSpec(2, 0.5, MinerKind.HONEST))
    with pytest.raises(ConfigError):
        SimulationConfig(protocol=ProtocolName.NAKAMOTO, miners=miners)


def test_gamma_bounds():
    with pytest.raises(ConfigError):
        SimulationConfig(
            protocol=ProtocolName.NAKAMOTO, miners=_miners(0.5, 0.5), gamma=1.5
        )


def test_nakamoto_takes_no_params():
    with pytest.raises(ConfigError):
        SimulationConfig(
            protocol=ProtocolName.NAKAMOTO,
            miners=_miners(0.5, 0.5),
            protocol_params=StrongchainParams(),
        )


def test_params_default_when_omitted():
    sc = SimulationConfig(protocol=ProtocolName.STRONGCHAIN, miners=_miners(0.5, 0.5))
    assert isinstance(sc.protocol_params, StrongchainParams)
    assert sc.protocol_params.ratio == 10
    fc = SimulationConfig(protocol=ProtocolName.FRUITCHAIN, miners=_miners(0.5, 0.5))
    assert isinstance(fc.protocol_params, FruitchainParams)
    assert fc.protocol_params.fruit_ratio == 10
    assert fc.protocol_params.freshness_window == 10


def test_params_type_mismatch_rejected():
    with pytest.raises(ConfigError):
        SimulationConfig(
            protocol=ProtocolName.STRONGCHAIN,
            miners=_miners(0.5, 0.5),
            protocol_params=FruitchainParams(),
        )


def test_end_condition_exactly_one():
    with pytest.raises(ConfigError):
        EndCondition()
    with pytest.raises(ConfigError):
        EndCondition(round_budget=10, target_height=10)
    with pytest.raises(ConfigError):
        EndCondition(round_budget=0)


def test_target_height_only_for_fruitchain():
    with pytest.raises(ConfigError, match="fruitchain"):
        SimulationConfig(
            protocol=ProtocolName.STRONGCHAIN,
            miners=_miners(0.5, 0.5),
            end_condition=EndCondition(target_height=100),
        )
    cfg = SimulationConfig(
        protocol=ProtocolName.FRUITCHAIN,
        miners=_miners(0.5, 0.5),
        end_condition=EndCondition(target_height=100),
    )
    assert cfg.end_condition.target_height == 100


def test_default_gamma_rule():
    assert default_gamma(ProtocolName.STRONGCHAIN, 1) == 0.0
    assert default_gamma(ProtocolName.STRONGCHAIN, 2) == 0.5
    assert default_gamma(ProtocolName.NAKAMOTO, 1) == 0.5
    assert default_gamma(ProtocolName.FRUITCHAIN, 1) == 0.5


def test_selfish_and_honest_id_properties():
    cfg = SimulationConfig(
        protocol=ProtocolName.NAKAMOTO,
        miners=_miners(0.2, 0.3, 0.5, selfish=(0, 1)),
    )
    assert cfg.selfish_ids == (0, 1)
    assert cfg.honest_ids == (2,)


def test_digest_ignores_seed_but_not_substance():
    base = symmetric_attacker_config(ProtocolName.NAKAMOTO, 1, 0.3, master_seed=1)
    reseeded = dataclasses.replace(base, master_seed=999)
    assert config_digest(base) == config_digest(reseeded)
    other_gamma = dataclasses.replace(base, gamma=0.25)
    assert config_digest(base) != config_digest(other_gamma)


def test_symmetric_builder_shape():
    cfg = symmetric_attacker_config(ProtocolName.NAKAMOTO, 3, 0.1, master_seed=4)
    assert [m.power for m in cfg.miners] == pytest.approx([0.1, 0.1, 0.1, 0.7])
    assert cfg.selfish_ids == (0, 1, 2)
    assert cfg.gamma == 0.5
    assert cfg.end_condition.round_budget == 100_000


def test_rival_builder_shape():
    cfg = rival_attacker_config(ProtocolName.NAKAMOTO, 0.1, (0.4,), master_seed=4)
    assert [m.power for m in cfg.miners] == pytest.approx([0.1, 0.4, 0.5])
    assert cfg.selfish_ids == (0, 1)


def test_symmetric_builder_rejects_overfull_network():
    with pytest.raises(ConfigError):
        symmetric_attacker_config(ProtocolName.NAKAMOTO, 3, 0.34)
