"""Per-protocol rules: artifact sampling, strength, reward arithmetic."""

import pytest

from selfishsim import fruitchain, nakamoto, strongchain
from selfishsim.config import (
    FruitchainParams,
    StrongchainParams,
    balanced_fruit_params,
    fruit_heavy_params,
)
from selfishsim.engine import Block
from selfishsim.rng import stream_uniforms


def test_nakamoto_one_reward_per_block():
    blocks = [Block(1, 0, 1), Block(2, 1, 2), Block(3, 0, 3)]
    assert nakamoto.tally_rewards(blocks, 2) == [2.0, 1.0]
    assert nakamoto.QUANTUM_UNITS == 1


def test_strong_draw_boundary():
    p = 1.0 / 11.0
    assert strongchain.is_strong(p - 1e-12, 10)
    assert not strongchain.is_strong(p, 10)


def test_block_draw_boundary():
    p = 1.0 / 11.0
    assert fruitchain.is_block(p - 1e-12, 10)
    assert not fruitchain.is_block(p, 10)


@pytest.mark.parametrize("pred", [
    lambda u: strongchain.is_strong(u, 10),
    lambda u: fruitchain.is_block(u, 10),
], ids=["strongchain", "fruitchain"])
def test_heavy_artifact_frequency(pred):
    u = stream_uniforms(3, 50_000)
    freq = sum(1 for x in u.tolist() if pred(x)) / 50_000
    assert freq == pytest.approx(1.0 / 11.0, abs=0.004)


def test_strongchain_strength_units():
    assert strongchain.strength(25, 10) == 2.5
    assert strongchain.strength(0, 10) == 0.0


def test_strongchain_reward_arithmetic():
    # two strong blocks; weak headers pay 1/ratio whether embedded or
    # still pending at the tip
    params = StrongchainParams(ratio=10)
    blocks = [Block(1, 0, 10, emb=[1, 1]), Block(2, 1, 22, emb=[0])]
    rewards = strongchain.tally_rewards(blocks, [0, 1], params, 2)
    assert rewards == pytest.approx([1.2, 1.3])
    assert sum(rewards) == pytest.approx(2 + 5 * 0.1)


def test_fruit_freshness_boundary():
    assert fruitchain.is_fresh(11, 1, 10)
    assert not fruitchain.is_fresh(12, 1, 10)


def test_fruitchain_reward_arithmetic():
    params = balanced_fruit_params()
    blocks = [
        Block(1, 0, 10, emb=None),
        Block(2, 1, 21, emb=[(0, 1, 1)]),
    ]
    rewards = fruitchain.tally_rewards(blocks, params, 3)
    assert rewards == pytest.approx([1.1, 1.0, 0.0])


def test_orphaned_fruit_pays_nothing():
    # a fruit that never makes it into a canonical block simply does not
    # appear in any emb list, so its miner gets nothing for it
    params = balanced_fruit_params()
    blocks = [Block(1, 0, 10, emb=[])]
    assert fruitchain.tally_rewards(blocks, params, 2) == [1.0, 0.0]


def test_fruit_quantum_covers_block_plus_flush():
    assert fruitchain.quantum_units(FruitchainParams(fruit_ratio=10)) == 20
    assert fruitchain.quantum_units(FruitchainParams(fruit_ratio=4)) == 8


def test_reward_split_presets():
    assert fruitchain.block_reward_share(balanced_fruit_params()) == pytest.approx(0.5)
    assert fruitchain.block_reward_share(fruit_heavy_params()) == pytest.approx(1 / 11)
