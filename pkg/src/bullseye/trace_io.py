"""Branch traces: text/binary formats and the synthetic workload generator.

Text format, one record per line::

    0x400a10 1 3        # pc, outcome (0/1), non-branch instructions before it

Lines starting with ``#`` are comments; the third field defaults to 0.
Binary format: ``b"BLSY"``, u32 version (1), then ``<QBI`` records.
"""
from __future__ import annotations

import bisect
import struct
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

MAGIC = b"BLSY"
VERSION = 1
_HEADER = struct.Struct("<4sI")
_RECORD = struct.Struct("<QBI")
_U64 = (1 << 64) - 1
_U32 = (1 << 32) - 1


class BranchRecord(NamedTuple):
    pc: int
    taken: bool
    insts_before: int = 0


class TraceError(ValueError):
    """Malformed trace input."""


class TruncatedTraceError(TraceError):
    pass


class SpecError(ValueError):
    """Invalid synthetic workload description."""


def total_instructions(records: Iterable[BranchRecord]) -> int:
    return sum(r.insts_before + 1 for r in records)


# --------------------------------------------------------------------------
# text / binary codecs

def _parse_text(text: str) -> list[BranchRecord]:
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise TraceError(f"line {lineno}: expected 2 or 3 fields, got {len(parts)}")
        try:
            pc = int(parts[0], 16)
        except ValueError:
            raise TraceError(f"line {lineno}: bad pc {parts[0]!r}") from None
        if parts[1] not in ("0", "1"):
            raise TraceError(f"line {lineno}: outcome must be 0 or 1, got {parts[1]!r}")
        insts = 0
        if len(parts) == 3:
            if not parts[2].isdigit():
                raise TraceError(f"line {lineno}: bad instruction count {parts[2]!r}")
            insts = int(parts[2])
        if not 0 <= pc <= _U64 or insts > _U32:
            raise TraceError(f"line {lineno}: field out of range")
        out.append(BranchRecord(pc, parts[1] == "1", insts))
    return out


def _parse_binary(data: bytes) -> list[BranchRecord]:
    if len(data) < _HEADER.size:
        raise TruncatedTraceError(f"offset 0: header needs {_HEADER.size} bytes, got {len(data)}")
    _, version = _HEADER.unpack_from(data, 0)
    if version != VERSION:
        raise TraceError(f"offset 4: unsupported version {version}")
    body = len(data) - _HEADER.size
    if body % _RECORD.size:
        whole = body // _RECORD.size
        raise TruncatedTraceError(
            f"offset {_HEADER.size + whole * _RECORD.size}: truncated record "
            f"({body % _RECORD.size} of {_RECORD.size} bytes)")
    out = []
    for i, (pc, taken, insts) in enumerate(_RECORD.iter_unpack(memoryview(data)[_HEADER.size:])):
        if taken > 1:
            raise TraceError(f"offset {_HEADER.size + i * _RECORD.size + 8}: outcome byte {taken}")
        out.append(BranchRecord(pc, bool(taken), insts))
    return out


def parse_trace(stream: bytes | str) -> list[BranchRecord]:
    """Decode a text or binary trace (binary is detected by its magic)."""
    if isinstance(stream, str):
        return _parse_text(stream)
    if stream[:4] == MAGIC:
        return _parse_binary(stream)
    try:
        text = stream.decode("ascii")
    except UnicodeDecodeError as exc:
        raise TraceError(f"offset {exc.start}: non-ASCII byte in text trace") from None
    return _parse_text(text)


def write_trace(records: Iterable[BranchRecord]) -> bytes:
    return "".join(
        f"{r.pc:#x} {1 if r.taken else 0} {r.insts_before}\n" for r in records
    ).encode("ascii")


def write_trace_binary(records: Iterable[BranchRecord]) -> bytes:
    parts = [_HEADER.pack(MAGIC, VERSION)]
    pack = _RECORD.pack
    parts.extend(pack(r.pc, 1 if r.taken else 0, r.insts_before) for r in records)
    return b"".join(parts)


def read_trace_file(path) -> list[BranchRecord]:
    with open(path, "rb") as f:
        return parse_trace(f.read())


def write_trace_file(path, records: Sequence[BranchRecord], binary: bool = False) -> None:
    data = write_trace_binary(records) if binary else write_trace(records)
    with open(path, "wb") as f:
        f.write(data)


# --------------------------------------------------------------------------
# synthetic generator

class XorShiftStar:
    """xorshift64* (Vigna): shifts 12/25/27, multiplier 0x2545F4914F6CDD1D."""

    MULT = 0x2545F4914F6CDD1D

    def __init__(self, seed: int):
        self.state = (seed & _U64) or 0x9E3779B97F4A7C15

    def next(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & _U64
        x ^= x >> 27
        self.state = x
        return (x * self.MULT) & _U64

    def below(self, p: float) -> bool:
        """Bernoulli draw: True with probability p (53-bit resolution)."""
        return (self.next() >> 11) < p * (1 << 53)


class Lfsr32:
    """Galois LFSR, taps 0x80200003 (x^32 + x^22 + x^2 + x + 1)."""

    TAPS = 0x80200003

    def __init__(self, seed: int):
        self.state = (seed & _U32) or 1

    def step(self) -> int:
        bit = self.state & 1
        self.state >>= 1
        if bit:
            self.state ^= self.TAPS
        return bit


KINDS = ("loop", "biased", "local_pattern", "global_correlated", "random")


@dataclass
class Component:
    """One generator kind; ``count`` distinct static branches share the weight."""

    kind: str
    weight: float
    count: int = 1
    trip: int = 0                 # loop
    bias: float = 0.5             # biased
    pattern: str = ""             # local_pattern, e.g. "1101001"
    k: int = 0                    # global_correlated
    insts: int = 4
    pc_base: int | None = None

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise SpecError(f"unknown component kind {self.kind!r}")
        if self.weight < 0:
            raise SpecError("component weight must be >= 0")
        if self.count < 1 or self.insts < 0:
            raise SpecError("count must be >= 1 and insts >= 0")
        if self.kind == "loop" and self.trip < 1:
            raise SpecError("loop needs trip >= 1")
        if self.kind == "biased" and not 0.0 <= self.bias <= 1.0:
            raise SpecError("bias must lie in [0, 1]")
        if self.kind == "local_pattern" and (not self.pattern or set(self.pattern) - {"0", "1"}):
            raise SpecError("local_pattern needs a non-empty 0/1 pattern")
        if self.kind == "global_correlated" and not 1 <= self.k <= 64:
            raise SpecError("global_correlated needs 1 <= k <= 64")


@dataclass
class SyntheticSpec:
    seed: int
    length: int
    components: list[Component] = field(default_factory=list)

    def validate(self) -> None:
        if self.length < 1:
            raise SpecError("length must be >= 1")
        if not self.components:
            raise SpecError("at least one component is required")
        for c in self.components:
            c.validate()
        total = sum(c.weight for c in self.components)
        if abs(total - 1.0) > 1e-9:
            raise SpecError(f"component weights sum to {total!r}, expected 1")

    @classmethod
    def from_dict(cls, d: dict) -> SyntheticSpec:
        comps = []
        for c in d.get("components", []):
            c = dict(c)
            if isinstance(c.get("pc_base"), str):
                c["pc_base"] = int(c["pc_base"], 0)
            try:
                comps.append(Component(**c))
            except TypeError as exc:
                raise SpecError(str(exc)) from None
        return cls(seed=int(d.get("seed", 0)), length=int(d.get("length", 0)), components=comps)

    def to_dict(self) -> dict:
        comps = []
        for c in self.components:
            cd = {k: v for k, v in c.__dict__.items() if v is not None}
            comps.append(cd)
        return {"seed": self.seed, "length": self.length, "components": comps}


def component_pcs(spec: SyntheticSpec) -> list[list[int]]:
    """Static branch addresses per component (stable for a given spec)."""
    out = []
    for ci, c in enumerate(spec.components):
        base = c.pc_base if c.pc_base is not None else 0x400000 + ci * 0x10000
        out.append([base + 4 * j for j in range(c.count)])
    return out


def gen_synthetic(spec: SyntheticSpec) -> list[BranchRecord]:
    """Synthesize a trace; a pure function of `spec`.

    Each step draws one static branch: a component by weight, then one of
    its ``count`` branches uniformly.  Branch behaviour:

    * loop: taken ``trip-1`` times, then not taken, per its own occurrences
    * biased: taken with probability ``bias``
    * local_pattern: ``pattern[occurrence % len(pattern)]``
    * global_correlated: XOR of the ``k`` immediately preceding outcomes
    * random: output bit of a per-branch 32-bit LFSR
    """
    spec.validate()
    rng = XorShiftStar(spec.seed)
    pcs = component_pcs(spec)

    scale = 1 << 32
    cum, acc = [], 0.0
    for c in spec.components:
        acc += c.weight
        cum.append(min(scale, round(acc * scale)))
    cum[-1] = scale

    occ = [[0] * c.count for c in spec.components]
    lfsrs = [[Lfsr32(rng.next() >> 32) for _ in range(c.count)] if c.kind == "random" else None
             for c in spec.components]
    patterns = [[ch == "1" for ch in c.pattern] for c in spec.components]

    ghist = 0
    out = []
    append = out.append
    for _ in range(spec.length):
        ci = bisect.bisect_right(cum, rng.next() >> 32)
        c = spec.components[ci]
        j = (rng.next() >> 32) % c.count if c.count > 1 else 0
        kind = c.kind
        n = occ[ci][j]
        if kind == "loop":
            taken = (n % c.trip) != c.trip - 1
        elif kind == "biased":
            taken = rng.below(c.bias)
        elif kind == "local_pattern":
            pat = patterns[ci]
            taken = pat[n % len(pat)]
        elif kind == "global_correlated":
            taken = bool((ghist & ((1 << c.k) - 1)).bit_count() & 1)
        else:
            taken = bool(lfsrs[ci][j].step())
        occ[ci][j] = n + 1
        ghist = ((ghist << 1) | taken) & ((1 << 64) - 1)
        append(BranchRecord(pcs[ci][j], taken, c.insts))
    return out
