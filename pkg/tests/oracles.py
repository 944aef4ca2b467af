"""Naive reference models used by several test modules.

Deliberately written differently from the package code: bit-by-bit loops,
numpy uint32 arithmetic for the scrambler, plain lists for dot products.
"""
import numpy as np

from bullseye.hit import HitConfig


def scramble_u32(pc, window_bits, salt, pool=64 * 256):
    with np.errstate(over="ignore"):
        x = (np.uint32(pc & 0xFFFFFFFF)
             ^ (np.uint32(window_bits & 0xFFFFFFFF) * np.uint32(0x9E3779B9))
             ^ (np.uint32(salt) * np.uint32(0x85EBCA6B)))

        def mix(v):
            v = v ^ (v << np.uint32(13))
            v = v ^ (v >> np.uint32(17))
            return v ^ (v << np.uint32(5))

        x = mix(x)
        y = mix(x ^ np.uint32(0x5BD1E995))
    return int(x) % pool, int(y) % pool


def local_sum(weights, bias_row, pc, lh_bits, widths=(4, 8, 16, 32, 64), pool=64 * 256):
    total = bias_row[lh_bits & 1]
    pos = 0
    for salt, width in enumerate(widths):
        bits = [(lh_bits >> (pos + i)) & 1 for i in range(width)]
        pos += width
        win = sum(b << i for i, b in enumerate(bits))
        parity = 0
        for b in bits:
            parity ^= b
        i1, i2 = scramble_u32(pc, win, salt, pool)
        total += (1 if parity else -1) * (weights[i1] + weights[i2])
    return total


def global_sum(weights_row, bias_row, gh_bits, hist_len=128, width=128, bias_log=4):
    folded = [0] * width
    for i in range(hist_len):
        folded[i % width] ^= (gh_bits >> i) & 1
    total = sum(int(w) * (1 if b else -1) for w, b in zip(weights_row, folded))
    f4 = [0] * bias_log
    for i, b in enumerate(folded):
        f4[i % bias_log] ^= b
    return total + bias_row[sum(b << i for i, b in enumerate(f4))]


def eq1_qualifies(correct, incorrect, n, cfg=HitConfig()):
    """Qualification test with f(N) evaluated in exact decimal hundredths."""
    execs = correct + incorrect
    if n < 32:
        ceil_num, ceil_den = 3200 - n, 3200          # 1 - 0.01 n / 32
    elif n <= 71:
        ceil_num, ceil_den = 95 - (n - 32), 100      # 0.95 - 0.01 (n - 32)
    else:
        ceil_num, ceil_den = 60, 100
    return (execs >= cfg.exec_base + cfg.exec_step * n
            and incorrect >= cfg.mispred_min
            and correct * ceil_den < ceil_num * execs)
