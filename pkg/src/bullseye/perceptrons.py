"""The two neural engines used for H2P branches.

Local engine: each local-history window contributes its parity (as +1/-1)
times two weights picked from a shared pool by a 32-bit xorshift hash of
(pc, window contents, window index).  Global engine: one weight per bit of
the folded global history, kept per slot.  Both train with the O-GEHL
dynamic threshold.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .histories import DEFAULT_WINDOWS, fold_bits, window_schedule

_M32 = 0xFFFFFFFF


@dataclass
class LocalPerceptronConfig:
    windows: list[int] = field(default_factory=lambda: list(DEFAULT_WINDOWS))
    num_tables: int = 64
    table_log: int = 8
    weight_bits: int = 10
    bias_bits: int = 12
    bias_log: int = 1
    theta_init: int = 16
    theta_bits: int = 10
    tc_bits: int = 7
    history_bits: int = 124

    def validate(self) -> None:
        if not self.windows or min(self.windows) < 1:
            raise ValueError("local window widths must be >= 1")
        if sum(self.windows) > self.history_bits:
            raise ValueError("window schedule exceeds the local history length")
        if min(self.num_tables, self.weight_bits, self.bias_bits, self.theta_init,
               self.theta_bits, self.tc_bits) < 1 or self.table_log < 0:
            raise ValueError("local perceptron widths must be >= 1")


@dataclass
class GlobalPerceptronConfig:
    hist_len: int = 128
    fold_width: int = 128
    weight_bits: int = 12
    bias_bits: int = 10
    bias_log: int = 4
    theta_init: int = 32
    theta_bits: int = 14
    tc_bits: int = 7
    history_bits: int = 128

    def validate(self) -> None:
        if not 1 <= self.hist_len <= self.history_bits:
            raise ValueError("global hist_len must lie in 1..history_bits")
        if min(self.fold_width, self.weight_bits, self.bias_bits, self.theta_init,
               self.theta_bits, self.tc_bits) < 1 or self.bias_log < 0:
            raise ValueError("global perceptron widths must be >= 1")


class PerceptronOutput(NamedTuple):
    sum: int
    pred: bool
    above_theta: bool
    features: tuple = ()     # engine-specific training context
    bias_index: int = 0


def xorshift_scramble(pc: int, window_bits: int, salt: int, pool: int = 64 * 256) -> tuple[int, int]:
    """Two weight indices for one local-history window.

    x = pc ^ window*0x9E3779B9 ^ salt*0x85EBCA6B (mod 2^32), scrambled by
    shifts <<13, >>17, <<5; the second index re-scrambles x ^ 0x5BD1E995.
    """
    x = (pc & _M32) ^ ((window_bits * 0x9E3779B9) & _M32) ^ ((salt * 0x85EBCA6B) & _M32)
    x ^= (x << 13) & _M32
    x ^= x >> 17
    x ^= (x << 5) & _M32
    y = x ^ 0x5BD1E995
    y ^= (y << 13) & _M32
    y ^= y >> 17
    y ^= (y << 5) & _M32
    return x % pool, y % pool


# byte value -> its 8 bits as +1/-1, least significant bit first
_PM1_LUT = np.unpackbits(np.arange(256, dtype=np.uint8)[:, None], axis=1,
                         bitorder="little").astype(np.int32) * 2 - 1


class _ThresholdMixin:
    """O-GEHL threshold tuning shared by both banks.

    A misprediction bumps the tuning counter up, a correct but low-margin
    prediction bumps it down; 64 net steps either way move theta by one.
    """

    def _tune(self, slot: int, mispredicted: bool, low_margin: bool) -> None:
        if mispredicted:
            tc = self.tc[slot] + 1
            if tc > self._tc_max:
                self.theta[slot] = min(self.theta[slot] + 1, self._theta_max)
                tc = 0
            self.tc[slot] = tc
        elif low_margin:
            tc = self.tc[slot] - 1
            if tc <= self._tc_min:
                self.theta[slot] = max(1, self.theta[slot] - 1)
                tc = 0
            self.tc[slot] = tc


class LocalBank(_ThresholdMixin):
    def __init__(self, slots: int = 32, cfg: LocalPerceptronConfig | None = None):
        cfg = cfg or LocalPerceptronConfig()
        cfg.validate()
        self.cfg = cfg
        self.slots = slots
        self.pool = cfg.num_tables << cfg.table_log
        self.windows = window_schedule(cfg.windows)
        self._wins = [((i * 0x85EBCA6B) & _M32, w.offset, (1 << w.width) - 1)
                      for i, w in enumerate(self.windows)]
        self._wmax = (1 << (cfg.weight_bits - 1)) - 1
        self._wmin = -(1 << (cfg.weight_bits - 1))
        self._bmax = (1 << (cfg.bias_bits - 1)) - 1
        self._bmin = -(1 << (cfg.bias_bits - 1))
        self._theta_max = (1 << cfg.theta_bits) - 1
        self._tc_max = (1 << (cfg.tc_bits - 1)) - 1
        self._tc_min = -(1 << (cfg.tc_bits - 1))
        self._bias_mask = (1 << cfg.bias_log) - 1
        self.weights = [0] * self.pool
        self.bias = [[0] * (1 << cfg.bias_log) for _ in range(slots)]
        self.theta = [cfg.theta_init] * slots
        self.tc = [0] * slots

    def reset_slot(self, slot: int) -> None:
        """Recycle a slot cold.  The shared weight pool is not per-slot state."""
        self.bias[slot] = [0] * len(self.bias[slot])
        self.theta[slot] = self.cfg.theta_init
        self.tc[slot] = 0

    def predict(self, slot: int, pc: int, lh_bits: int) -> PerceptronOutput:
        w = self.weights
        pool = self.pool
        pcl = pc & _M32
        total = 0
        feats = []
        for salt_term, off, mask in self._wins:
            win = (lh_bits >> off) & mask
            x = pcl ^ ((win * 0x9E3779B9) & _M32) ^ salt_term
            x ^= (x << 13) & _M32
            x ^= x >> 17
            x ^= (x << 5) & _M32
            y = x ^ 0x5BD1E995
            y ^= (y << 13) & _M32
            y ^= y >> 17
            y ^= (y << 5) & _M32
            i1, i2 = x % pool, y % pool
            s = 1 if win.bit_count() & 1 else -1
            total += s * (w[i1] + w[i2])
            feats.append((i1, i2, s))
        b = lh_bits & self._bias_mask
        total += self.bias[slot][b]
        return PerceptronOutput(total, total >= 0, abs(total) > self.theta[slot], tuple(feats), b)

    def train(self, slot: int, out: PerceptronOutput, taken: bool) -> bool:
        """Apply the update rule; returns True when weights were trained."""
        mispredicted = out.pred != taken
        low_margin = abs(out.sum) <= self.theta[slot]
        if not (mispredicted or low_margin):
            return False
        w = self.weights
        hi, lo = self._wmax, self._wmin
        d = 1 if taken else -1
        for i1, i2, s in out.features:
            step = d * s
            v = w[i1] + step
            w[i1] = hi if v > hi else lo if v < lo else v
            v = w[i2] + step
            w[i2] = hi if v > hi else lo if v < lo else v
        bias = self.bias[slot]
        v = bias[out.bias_index] + d
        bias[out.bias_index] = self._bmax if v > self._bmax else self._bmin if v < self._bmin else v
        self._tune(slot, mispredicted, low_margin)
        return True


class GlobalBank(_ThresholdMixin):
    def __init__(self, slots: int = 16, cfg: GlobalPerceptronConfig | None = None):
        cfg = cfg or GlobalPerceptronConfig()
        cfg.validate()
        self.cfg = cfg
        self.slots = slots
        self._wmax = (1 << (cfg.weight_bits - 1)) - 1
        self._wmin = -(1 << (cfg.weight_bits - 1))
        self._bmax = (1 << (cfg.bias_bits - 1)) - 1
        self._bmin = -(1 << (cfg.bias_bits - 1))
        self._theta_max = (1 << cfg.theta_bits) - 1
        self._tc_max = (1 << (cfg.tc_bits - 1)) - 1
        self._tc_min = -(1 << (cfg.tc_bits - 1))
        self._nbytes = (cfg.fold_width + 7) // 8
        chunks, rem = divmod(cfg.fold_width, max(cfg.bias_log, 1))
        self._trim = cfg.fold_width % 8 != 0
        self._pow2_fold = rem == 0 and chunks & (chunks - 1) == 0
        self.weights = np.zeros((slots, cfg.fold_width), dtype=np.int32)
        self.bias = [[0] * (1 << cfg.bias_log) for _ in range(slots)]
        self.theta = [cfg.theta_init] * slots
        self.tc = [0] * slots

    def reset_slot(self, slot: int) -> None:
        self.weights[slot] = 0
        self.bias[slot] = [0] * len(self.bias[slot])
        self.theta[slot] = self.cfg.theta_init
        self.tc[slot] = 0

    def _fold_bias(self, folded: int) -> int:
        w = self.cfg.bias_log
        if self._pow2_fold:
            # log-step XOR reduction; same as the chunked fold when the chunk count is 2^k
            span = self.cfg.fold_width
            while span > w:
                span >>= 1
                folded ^= folded >> span
            return folded & ((1 << w) - 1)
        return fold_bits(folded, self.cfg.fold_width, w)

    def features(self, gh_bits: int) -> tuple[int, np.ndarray, int]:
        """Folded history vector, its +1/-1 encoding, and the bias index."""
        cfg = self.cfg
        folded = fold_bits(gh_bits, cfg.hist_len, cfg.fold_width)
        raw = np.frombuffer(folded.to_bytes(self._nbytes, "little"), dtype=np.uint8)
        x = _PM1_LUT[raw].reshape(-1)
        if self._trim:
            x = x[:cfg.fold_width]
        f4 = self._fold_bias(folded) if cfg.bias_log else 0
        return folded, x, f4

    def predict(self, slot: int, gh_bits: int) -> PerceptronOutput:
        _, x, f4 = self.features(gh_bits)
        total = int(self.weights[slot] @ x) + self.bias[slot][f4]
        return PerceptronOutput(total, total >= 0, abs(total) > self.theta[slot], x, f4)

    def train(self, slot: int, out: PerceptronOutput, taken: bool) -> bool:
        mispredicted = out.pred != taken
        low_margin = abs(out.sum) <= self.theta[slot]
        if not (mispredicted or low_margin):
            return False
        w = self.weights[slot]
        if taken:
            w += out.features
        else:
            w -= out.features
        np.minimum(w, self._wmax, out=w)
        np.maximum(w, self._wmin, out=w)
        bias = self.bias[slot]
        v = bias[out.bias_index] + (1 if taken else -1)
        bias[out.bias_index] = self._bmax if v > self._bmax else self._bmin if v < self._bmin else v
        self._tune(slot, mispredicted, low_margin)
        return True


def weights_csv(local: LocalBank | None = None, glob: GlobalBank | None = None) -> str:
    """Debug dump: one row per slot (bias, theta, tc, weights)."""
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(["engine", "slot", "theta", "tc", "bias", "weights"])
    if local is not None:
        out.writerow(["local_pool", "", "", "", "", " ".join(map(str, local.weights))])
        for s in range(local.slots):
            out.writerow(["local", s, local.theta[s], local.tc[s],
                          " ".join(map(str, local.bias[s])), ""])
    if glob is not None:
        for s in range(glob.slots):
            out.writerow(["global", s, glob.theta[s], glob.tc[s],
                          " ".join(map(str, glob.bias[s])),
                          " ".join(map(str, glob.weights[s].tolist()))])
    return buf.getvalue()
