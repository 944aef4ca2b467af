import random

import pytest
from hypothesis import given, settings, strategies as st

from bullseye.trace_io import (BranchRecord, Component, SpecError, SyntheticSpec, TraceError,
                               TruncatedTraceError, XorShiftStar, component_pcs, gen_synthetic,
                               parse_trace, read_trace_file, total_instructions, write_trace,
                               write_trace_binary, write_trace_file)

records = st.lists(st.builds(BranchRecord, st.integers(0, 2**64 - 1), st.booleans(),
                             st.integers(0, 2**32 - 1)), max_size=50)


def test_parse_text_line():
    assert parse_trace("0x400a10 1 3\n") == [BranchRecord(0x400A10, True, 3)]


def test_parse_empty():
    assert parse_trace("") == []
    assert parse_trace(b"") == []


def test_parse_rejects_bad_outcome():
    with pytest.raises(TraceError, match="line 1"):
        parse_trace("0x400a10 2 0\n")


@pytest.mark.parametrize("line", ["0x10", "zz 1 0", "0x10 1 -1", "0x10 1 0 9"])
def test_parse_rejects_malformed(line):
    with pytest.raises(TraceError):
        parse_trace(line + "\n")


def test_parse_two_fields_defaults_insts():
    assert parse_trace("0x10 1\n# comment\n") == [BranchRecord(0x10, True, 0)]


def test_write_format():
    assert write_trace([BranchRecord(0x10, False, 0)]) == b"0x10 0 0\n"
    assert write_trace([]) == b""


@settings(max_examples=60, deadline=None)
@given(records)
def test_text_round_trip(recs):
    assert parse_trace(write_trace(recs)) == recs


@settings(max_examples=60, deadline=None)
@given(records)
def test_binary_round_trip(recs):
    assert parse_trace(write_trace_binary(recs)) == recs


def test_round_trip_1000_random():
    rng = random.Random(5)
    recs = [BranchRecord(rng.getrandbits(48), rng.random() < 0.5, rng.randrange(30)) for _ in range(1000)]
    assert parse_trace(write_trace(recs)) == recs
    assert parse_trace(write_trace_binary(recs)) == recs


def test_binary_truncated():
    data = write_trace_binary([BranchRecord(1, True, 0), BranchRecord(2, False, 1)])
    with pytest.raises(TruncatedTraceError):
        parse_trace(data[:-3])


def test_file_round_trip(tmp_path):
    recs = [BranchRecord(0x40 + 4 * i, i % 3 == 0, i) for i in range(20)]
    for binary in (False, True):
        p = tmp_path / f"t{binary}"
        write_trace_file(p, recs, binary=binary)
        assert read_trace_file(p) == recs


def test_total_instructions():
    assert total_instructions([BranchRecord(1, True, 3), BranchRecord(2, False, 0)]) == 5


def test_loop_trip4():
    spec = SyntheticSpec(0, 8, [Component("loop", 1.0, trip=4)])
    assert [r.taken for r in gen_synthetic(spec)] == [True, True, True, False] * 2


def test_bias_one_all_taken():
    spec = SyntheticSpec(3, 1000, [Component("biased", 1.0, bias=1.0)])
    assert all(r.taken for r in gen_synthetic(spec))


def test_bias_fraction():
    spec = SyntheticSpec(9, 100_000, [Component("biased", 1.0, bias=0.3)])
    frac = sum(r.taken for r in gen_synthetic(spec)) / 100_000
    assert abs(frac - 0.3) < 0.01


def test_global_correlated_parity_oracle():
    k = 8
    spec = SyntheticSpec(21, 100_000, [Component("global_correlated", 0.5, k=k),
                                       Component("biased", 0.5, bias=0.6, count=3)])
    trace = gen_synthetic(spec)
    corr_pc = component_pcs(spec)[0][0]
    outcomes = []
    for r in trace:
        if r.pc == corr_pc:
            # independent oracle: parity of the k outcomes emitted just before
            assert r.taken == (sum(outcomes[-k:]) % 2 == 1)
        outcomes.append(int(r.taken))


def test_local_pattern_per_branch():
    spec = SyntheticSpec(2, 5000, [Component("local_pattern", 0.5, pattern="110"),
                                   Component("random", 0.5)])
    pc = component_pcs(spec)[0][0]
    seq = [r.taken for r in gen_synthetic(spec) if r.pc == pc]
    assert seq == [[True, True, False][i % 3] for i in range(len(seq))]


def test_deterministic():
    spec = SyntheticSpec(7, 3000, [Component("random", 0.5, count=3), Component("loop", 0.5, trip=5)])
    assert write_trace(gen_synthetic(spec)) == write_trace(gen_synthetic(spec))
    other = SyntheticSpec(8, 3000, spec.components)
    assert write_trace(gen_synthetic(other)) != write_trace(gen_synthetic(spec))


def test_pcs_stable_per_branch():
    spec = SyntheticSpec(1, 2000, [Component("random", 0.7, count=3), Component("loop", 0.3, trip=3)])
    allowed = {pc for pcs in component_pcs(spec) for pc in pcs}
    assert {r.pc for r in gen_synthetic(spec)} <= allowed


@pytest.mark.parametrize("spec", [
    SyntheticSpec(0, 10, [Component("loop", 0.5, trip=3)]),
    SyntheticSpec(0, 10, [Component("nope", 1.0)]),
    SyntheticSpec(0, 10, [Component("loop", 1.0, trip=0)]),
    SyntheticSpec(0, 10, [Component("global_correlated", 1.0, k=65)]),
    SyntheticSpec(0, 10, [Component("local_pattern", 1.0, pattern="10x")]),
    SyntheticSpec(0, 0, [Component("loop", 1.0, trip=2)]),
])
def test_spec_validation(spec):
    with pytest.raises(SpecError):
        gen_synthetic(spec)


def test_spec_dict_round_trip():
    d = {"seed": 4, "length": 10, "components": [
        {"kind": "loop", "weight": 1.0, "trip": 3, "pc_base": "0x1000"}]}
    spec = SyntheticSpec.from_dict(d)
    assert spec.components[0].pc_base == 0x1000
    assert SyntheticSpec.from_dict(spec.to_dict()) == spec


def test_xorshift_star_reference():
    # xorshift64* step written out independently
    s = 12345
    ref = []
    for _ in range(5):
        s ^= s >> 12
        s ^= (s << 25) & (2**64 - 1)
        s ^= s >> 27
        ref.append((s * 0x2545F4914F6CDD1D) & (2**64 - 1))
    rng = XorShiftStar(12345)
    assert [rng.next() for _ in range(5)] == ref
