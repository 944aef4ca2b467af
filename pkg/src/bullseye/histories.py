"""Outcome history registers.

Every register is stored as a Python int with the newest outcome in bit 0
(1 = taken).  Shifting left and masking to the capacity discards the oldest
outcome.
"""
from __future__ import annotations

from dataclasses import dataclass, field

GLOBAL_CAPACITY = 128
LOCAL_CAPACITY = 124
DEFAULT_WINDOWS = (4, 8, 16, 32, 64)


class GlobalHistory:
    """Global branch outcome shift register."""

    __slots__ = ("bits", "capacity", "_mask")

    def __init__(self, capacity: int = GLOBAL_CAPACITY, bits: int = 0):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._mask = (1 << capacity) - 1
        self.bits = bits & self._mask

    def push(self, taken: bool) -> None:
        self.bits = ((self.bits << 1) | (1 if taken else 0)) & self._mask

    def bit(self, pos: int) -> int:
        return (self.bits >> pos) & 1

    def newest(self, n: int) -> int:
        return self.bits & ((1 << n) - 1)

    def copy(self) -> GlobalHistory:
        return GlobalHistory(self.capacity, self.bits)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GlobalHistory):
            return NotImplemented
        return self.capacity == other.capacity and self.bits == other.bits

    def __repr__(self) -> str:
        return f"GlobalHistory(capacity={self.capacity}, bits={self.bits:#x})"


class LocalHistory(GlobalHistory):
    """Per-branch outcome register (124 bits by default)."""

    __slots__ = ()

    def __init__(self, capacity: int = LOCAL_CAPACITY, bits: int = 0):
        super().__init__(capacity, bits)

    def copy(self) -> LocalHistory:
        return LocalHistory(self.capacity, self.bits)


def update_global(gh: GlobalHistory, taken: bool) -> GlobalHistory:
    """Return a new register with `taken` shifted in; `gh` is untouched."""
    out = gh.copy()
    out.push(taken)
    return out


def update_local(lh: LocalHistory, taken: bool) -> LocalHistory:
    out = lh.copy()
    out.push(taken)
    return out


def fold_bits(bits: int, hist_len: int, width: int) -> int:
    """XOR the newest `hist_len` bits of `bits` together in `width`-bit chunks.

    Chunk 0 holds positions 0..width-1; a short final chunk is zero-padded.
    """
    if width < 1:
        raise ValueError("width must be >= 1")
    bits &= (1 << hist_len) - 1
    if hist_len <= width:
        return bits
    mask = (1 << width) - 1
    out = 0
    while bits:
        out ^= bits & mask
        bits >>= width
    return out


def fold_global(gh: GlobalHistory, hist_len: int, width: int) -> int:
    if hist_len > gh.capacity:
        raise ValueError(f"hist_len {hist_len} exceeds capacity {gh.capacity}")
    return fold_bits(gh.bits, hist_len, width)


@dataclass(frozen=True)
class WindowSpec:
    offset: int
    width: int

    def extract(self, bits: int) -> int:
        return (bits >> self.offset) & ((1 << self.width) - 1)


def window_parity(lh: LocalHistory | int, w: WindowSpec) -> int:
    bits = lh if isinstance(lh, int) else lh.bits
    if isinstance(lh, LocalHistory) and w.offset + w.width > lh.capacity:
        raise ValueError("window extends past the local history capacity")
    return w.extract(bits).bit_count() & 1


def window_schedule(widths=DEFAULT_WINDOWS) -> list[WindowSpec]:
    """Lay windows end to end starting at the newest outcome."""
    out, offset = [], 0
    for w in widths:
        if w < 1:
            raise ValueError("window widths must be >= 1")
        out.append(WindowSpec(offset, w))
        offset += w
    return out


@dataclass
class FoldedHistory:
    """Incrementally maintained XOR-fold of the newest `length` global bits.

    Equivalent to ``fold_bits(history, length, width)`` after every push, at
    constant cost per update.
    """

    length: int
    width: int
    comp: int = 0
    _outpoint: int = field(init=False)
    _mask: int = field(init=False)

    def __post_init__(self) -> None:
        self._outpoint = self.length % self.width
        self._mask = (1 << self.width) - 1

    def push(self, new_bit: int, evicted_bit: int) -> None:
        """`evicted_bit` is the outcome that falls out of the window (position
        ``length`` once `new_bit` has been shifted in)."""
        c = (self.comp << 1) | new_bit
        c ^= evicted_bit << self._outpoint
        c ^= c >> self.width
        self.comp = c & self._mask
