"""H2P Identification Table (HIT).

A 64-set, 8-way table of per-branch correct/incorrect counters.  A branch
qualifies as hard to predict once

    Exec >= 2048 + 16*N,   Mispred >= 256,   Acc < ceiling(N)

where N is the number of branches currently resident in the perceptron
layer.  All thresholds come from :class:`HitConfig`.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction


@dataclass
class HitConfig:
    sets_log: int = 6
    ways: int = 8
    hash_bits: int = 16
    tag_bits: int = 10
    correct_bits: int = 16
    incorrect_bits: int = 12
    exec_base: int = 2048
    exec_step: int = 16
    mispred_min: int = 256
    continuous_ceiling: bool = False

    def validate(self) -> None:
        if min(self.ways, self.hash_bits, self.tag_bits, self.correct_bits,
               self.incorrect_bits, self.exec_base, self.mispred_min) < 1 or self.sets_log < 0:
            raise ValueError("HIT geometry and thresholds must be >= 1")
        if self.sets_log + self.tag_bits > self.hash_bits:
            raise ValueError("set index and stored tag must fit in the PC hash")


def accuracy_ceiling(n: int, continuous: bool = False) -> Fraction:
    """Accuracy ceiling f(N), exact.

    The default follows the published piecewise form including its jumps
    at N=32 (0.99 -> 0.95) and N=72 (0.56 -> 0.60).  ``continuous=True``
    selects a variant whose pieces meet: 1 -> 0.95 over [0, 32], then
    linear down to 0.60 at N=72.
    """
    if n < 0:
        raise ValueError("N must be >= 0")
    if continuous:
        if n < 32:
            return 1 - Fraction(5, 100) * Fraction(n, 32)
        if n <= 72:
            return Fraction(95, 100) - Fraction(35, 100) * Fraction(n - 32, 40)
        return Fraction(60, 100)
    if n < 32:
        return 1 - Fraction(1, 100) * Fraction(n, 32)
    if n <= 71:
        return Fraction(95, 100) - Fraction(1, 100) * (n - 32)
    return Fraction(60, 100)


def qualifies(correct: int, incorrect: int, n: int, cfg: HitConfig | None = None) -> bool:
    cfg = cfg or HitConfig()
    execs = correct + incorrect
    if execs < cfg.exec_base + cfg.exec_step * n or incorrect < cfg.mispred_min:
        return False
    ceiling = accuracy_ceiling(n, cfg.continuous_ceiling)
    # correct/execs < p/q  <=>  correct*q < p*execs
    return correct * ceiling.denominator < ceiling.numerator * execs


def pc_hash16(pc: int) -> int:
    """XOR of the four 16-bit chunks of a 64-bit address."""
    return (pc ^ (pc >> 16) ^ (pc >> 32) ^ (pc >> 48)) & 0xFFFF


class HIT:
    def __init__(self, cfg: HitConfig | None = None):
        cfg = cfg or HitConfig()
        cfg.validate()
        self.cfg = cfg
        self.sets = 1 << cfg.sets_log
        self._set_mask = self.sets - 1
        self._tag_mask = (1 << cfg.tag_bits) - 1
        self._cmax = (1 << cfg.correct_bits) - 1
        self._imax = (1 << cfg.incorrect_bits) - 1
        size = self.sets * cfg.ways
        self.valid = [False] * size
        self.tag = [0] * size
        self.correct = [0] * size
        self.incorrect = [0] * size

    def locate(self, pc: int) -> tuple[int, int]:
        h = pc_hash16(pc)
        return h & self._set_mask, (h >> self.cfg.sets_log) & self._tag_mask

    def find(self, pc: int) -> int | None:
        """Flat slot index holding `pc`, or None."""
        s, tg = self.locate(pc)
        base = s * self.cfg.ways
        for k in range(base, base + self.cfg.ways):
            if self.valid[k] and self.tag[k] == tg:
                return k
        return None

    def replace(self, set_index: int) -> int:
        """Way to (re)use in a set: the first invalid way, else the way with the
        fewest mispredictions (ties: fewest executions, then lowest way)."""
        ways = self.cfg.ways
        base = set_index * ways
        for w in range(ways):
            if not self.valid[base + w]:
                return w
        return min(range(ways), key=lambda w: (self.incorrect[base + w],
                                               self.incorrect[base + w] + self.correct[base + w],
                                               w))

    def observe(self, pc: int, tage_correct: bool, n: int) -> bool:
        s, tg = self.locate(pc)
        ways = self.cfg.ways
        base = s * ways
        valid, tag = self.valid, self.tag
        k = -1
        for j in range(base, base + ways):
            if valid[j] and tag[j] == tg:
                k = j
                break
        if k < 0:
            k = base + self.replace(s)
            valid[k] = True
            tag[k] = tg
            self.correct[k] = 0
            self.incorrect[k] = 0
        c, i = self.correct[k], self.incorrect[k]
        if tage_correct:
            if c == self._cmax:
                c, i = c >> 1, i >> 1
            c += 1
        else:
            if i == self._imax:
                c, i = c >> 1, i >> 1
            i += 1
        self.correct[k], self.incorrect[k] = c, i
        cfg = self.cfg
        if c + i < cfg.exec_base + cfg.exec_step * n or i < cfg.mispred_min:
            return False
        return qualifies(c, i, n, cfg)

    def counters(self, pc: int) -> tuple[int, int] | None:
        k = self.find(pc)
        return None if k is None else (self.correct[k], self.incorrect[k])

    def dump_csv(self, n: int = 0) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["pc_hash", "set", "way", "correct", "incorrect", "qualified"])
        ways = self.cfg.ways
        for k, ok in enumerate(self.valid):
            if not ok:
                continue
            s, way = divmod(k, ways)
            h = (self.tag[k] << self.cfg.sets_log) | s
            q = qualifies(self.correct[k], self.incorrect[k], n, self.cfg)
            w.writerow([f"{h:#06x}", s, way, self.correct[k], self.incorrect[k], int(q)])
        return buf.getvalue()
