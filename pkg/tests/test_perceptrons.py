import random

import numpy as np
import pytest

from bullseye.perceptrons import (GlobalBank, GlobalPerceptronConfig, LocalBank,
                                  LocalPerceptronConfig, PerceptronOutput, weights_csv,
                                  xorshift_scramble)
from oracles import global_sum, local_sum, scramble_u32


def random_local(rng, slots=4):
    bank = LocalBank(slots)
    bank.weights = [rng.randint(-512, 511) for _ in range(bank.pool)]
    bank.bias = [[rng.randint(-2048, 2047) for _ in range(2)] for _ in range(slots)]
    return bank


def random_global(rng, slots=4):
    bank = GlobalBank(slots)
    bank.weights = np.array([[rng.randint(-2048, 2047) for _ in range(128)] for _ in range(slots)],
                            dtype=np.int32)
    bank.bias = [[rng.randint(-512, 511) for _ in range(16)] for _ in range(slots)]
    return bank


def test_scramble_fixed_point():
    assert xorshift_scramble(0, 0, 0) == scramble_u32(0, 0, 0)
    # hand-evaluated: x starts at 0, so idx1 = 0; idx2 re-mixes 0x5BD1E995
    assert xorshift_scramble(0, 0, 0)[0] == 0


def test_scramble_matches_uint32_oracle():
    rng = random.Random(1)
    for _ in range(5000):
        pc, win, salt = rng.getrandbits(64), rng.getrandbits(64), rng.randrange(5)
        assert xorshift_scramble(pc, win, salt) == scramble_u32(pc, win, salt)
        assert xorshift_scramble(pc, win, salt) == xorshift_scramble(pc, win, salt)


def test_scramble_pair_collisions_rare():
    rng = random.Random(2)
    seen = {}
    collisions = pairs = 0
    inputs = set()
    while len(inputs) < 100_000:
        inputs.add((rng.getrandbits(32), rng.getrandbits(16), rng.randrange(5)))
    for key in inputs:
        pair = xorshift_scramble(*key)
        collisions += seen.get(pair, 0)
        seen[pair] = seen.get(pair, 0) + 1
    n = len(inputs)
    pairs = n * (n - 1) // 2
    assert collisions / pairs < 1e-4


def test_local_zero_state_ties_taken():
    out = LocalBank().predict(0, 0x400, 0)
    assert out.sum == 0 and out.pred is True and not out.above_theta


def test_local_single_window_example():
    cfg = LocalPerceptronConfig(windows=[4])
    bank = LocalBank(1, cfg)
    lh = 0b0001                                         # parity 1, newest bit 1
    i1, i2 = xorshift_scramble(0x40, lh, 0)
    bank.weights[i1], bank.weights[i2] = 3, -1
    bank.bias[0][1] = 2
    out = bank.predict(0, 0x40, lh)
    assert out.sum == 4 and out.pred


@pytest.mark.parametrize("seed", range(3))
def test_local_oracle(seed):
    rng = random.Random(seed)
    bank = random_local(rng)
    for _ in range(200):
        slot, pc, lh = rng.randrange(4), rng.getrandbits(48), rng.getrandbits(124)
        assert bank.predict(slot, pc, lh).sum == local_sum(bank.weights, bank.bias[slot], pc, lh)


def test_global_zero_weights():
    bank = GlobalBank(1)
    out = bank.predict(0, 0b1011)
    assert out.sum == 0 and out.pred
    bank.bias[0][0b1011] = -3                          # f4 of 0b1011 is itself
    assert bank.predict(0, 0b1011).sum == -3


def test_global_single_weight():
    bank = GlobalBank(1)
    bank.weights[0][0] = 1
    assert bank.predict(0, 0b1).sum == 1
    assert bank.predict(0, 0b10).sum == -1


@pytest.mark.parametrize("seed", range(3))
def test_global_oracle(seed):
    rng = random.Random(100 + seed)
    bank = random_global(rng)
    for _ in range(200):
        slot, gh = rng.randrange(4), rng.getrandbits(128)
        assert bank.predict(slot, gh).sum == global_sum(bank.weights[slot], bank.bias[slot], gh)


def test_global_oracle_shorter_fold():
    rng = random.Random(7)
    cfg = GlobalPerceptronConfig(hist_len=100, fold_width=36, bias_log=3)
    bank = GlobalBank(2, cfg)
    bank.weights = np.array([[rng.randint(-50, 50) for _ in range(36)] for _ in range(2)], dtype=np.int32)
    bank.bias = [[rng.randint(-9, 9) for _ in range(8)] for _ in range(2)]
    for _ in range(100):
        gh = rng.getrandbits(128)
        assert bank.predict(1, gh).sum == global_sum(bank.weights[1], bank.bias[1], gh, 100, 36, 3)


def test_predict_read_only():
    rng = random.Random(3)
    lb, gb = random_local(rng), random_global(rng)
    lw, gw = list(lb.weights), gb.weights.copy()
    for _ in range(50):
        lb.predict(1, 0x40, rng.getrandbits(124))
        gb.predict(1, rng.getrandbits(128))
    assert lb.weights == lw and np.array_equal(gb.weights, gw)


def test_no_training_when_confident_and_correct():
    bank = LocalBank(1)
    out = PerceptronOutput(100, True, True, ((1, 2, 1),), 0)
    assert not bank.train(0, out, True)
    assert bank.weights[1] == 0 and bank.tc[0] == 0


def test_weight_saturation():
    bank = LocalBank(1)
    lh = 0b1
    out = bank.predict(0, 0x80, lh)
    i1, i2, s = out.features[0]
    bank.weights[i1] = 511 * s                         # taken update pushes it toward s
    bank.train(0, out, True)
    assert bank.weights[i1] == 511 * s
    g = GlobalBank(1)
    g.weights[0][:] = 2047
    out = g.predict(0, 2**128 - 1)                     # all +1 features
    g.train(0, PerceptronOutput(0, True, False, out.features, out.bias_index), True)
    assert g.weights[0].max() == 2047


def test_training_sign_monotone():
    rng = random.Random(4)
    for _ in range(100):
        lb = random_local(rng, 1)
        pc, lh = rng.getrandbits(32), rng.getrandbits(124)
        lb.theta[0] = 10**6                            # always trains
        before = lb.predict(0, pc, lh)
        taken = rng.random() < 0.5
        lb.train(0, before, taken)
        after = lb.predict(0, pc, lh).sum
        assert after >= before.sum if taken else after <= before.sum
        gb = random_global(rng, 1)
        gh = rng.getrandbits(128)
        gb.theta[0] = 10**6
        before = gb.predict(0, gh)
        gb.train(0, before, taken)
        after = gb.predict(0, gh).sum
        assert after >= before.sum if taken else after <= before.sum


@pytest.mark.parametrize("m", [0, 63, 64, 200, 640])
def test_theta_always_wrong(m):
    bank = LocalBank(1)
    out_t = PerceptronOutput(0, True, False, (), 0)     # predicted taken
    for _ in range(m):
        bank.train(0, out_t, False)
    assert bank.theta[0] == 16 + m // 64


def test_theta_floor():
    bank = GlobalBank(1, GlobalPerceptronConfig(theta_init=1))
    out = bank.predict(0, 0)
    for _ in range(500):
        bank.train(0, PerceptronOutput(0, True, False, out.features, 0), True)   # correct, low margin
    assert bank.theta[0] == 1


def test_constant_branch_learns():
    bank = LocalBank(1)
    lh = 0
    updates = mis = 0
    for i in range(400):
        out = bank.predict(0, 0x44, lh)
        mis += out.pred is not False and i > 50
        updates += bank.train(0, out, False)
        lh = (lh << 1) & (2**124 - 1)
    assert mis == 0
    assert updates < 400


def test_reset_slot():
    rng = random.Random(5)
    gb = random_global(rng, 2)
    gb.theta[1] = 99
    gb.reset_slot(1)
    assert not gb.weights[1].any() and gb.theta[1] == 32 and gb.bias[1] == [0] * 16
    assert gb.weights[0].any()
    lb = random_local(rng, 2)
    pool = list(lb.weights)
    lb.reset_slot(0)
    assert lb.weights == pool and lb.bias[0] == [0, 0]


def test_weights_csv():
    text = weights_csv(LocalBank(2), GlobalBank(1))
    assert text.splitlines()[0] == "engine,slot,theta,tc,bias,weights"
    assert len(text.splitlines()) == 1 + 1 + 2 + 1
