from collections import deque

import pytest

from bullseye.h2p_cache import H2PCache, H2PConfig, H2PEntry, should_evict


def fill(cache, n, now=0, base=0x1000):
    for k in range(n):
        cache.admit(base + 4 * k, now)


def test_admit_empty_system():
    c = H2PCache()
    assert c.admit(0x40, 0) == "resident"
    e = c.lookup(0x40)
    assert e.local_slot is not None and e.global_slot is not None
    assert (e.occurrences, e.rel_perf, e.confidence, e.trial_count, e.filtered) == (0, 0, 0, 0, False)


def test_full_residency_waits():
    c = H2PCache()
    fill(c, 32)
    assert c.admit(0x9000, 5) == "queued"
    assert c.is_queued(0x9000) and c.lookup(0x9000) is None


def test_global_slots_run_out():
    c = H2PCache()
    fill(c, 20)
    with_global = [e for e in c.entries.values() if e.global_slot is not None]
    assert len(with_global) == 16 and len(c.entries) == 20


def test_fifo_shadow_model():
    c = H2PCache()
    fill(c, 32)
    shadow = deque(maxlen=64)
    for k in range(65):
        pc = 0x80000 + 4 * k
        c.admit(pc, 10)
        shadow.append(pc)
    assert list(c.fifo) == list(shadow)
    assert c.drops == 1 and not c.is_queued(0x80000)


def test_admit_twice_is_idempotent():
    c = H2PCache()
    fill(c, 32)
    c.admit(0x9000, 1)
    c.admit(0x9000, 2)
    assert list(c.fifo) == [0x9000]


def test_lookup_after_evict():
    c = H2PCache()
    c.admit(0x40, 0)
    c.evict(0x40, 1)
    assert c.lookup(0x40) is None


def test_freed_global_slot_goes_to_local_only_resident():
    c = H2PCache()
    fill(c, 20)
    first_local_only = next(e for e in c.entries.values() if e.global_slot is None)
    holder = next(e for e in c.entries.values() if e.global_slot is not None)
    g = holder.global_slot
    c.evict(holder.pc, 5)
    assert first_local_only.global_slot == g


def test_install_callbacks_reset_slots():
    c = H2PCache()
    seen = []
    c.on_local_install = lambda s: seen.append(("l", s))
    c.on_global_install = lambda s: seen.append(("g", s))
    c.admit(0x40, 0)
    assert seen == [("l", 0), ("g", 0)]


def entry(**kw):
    e = H2PEntry(0x40, 0, 0, 0, 0)
    for k, v in kw.items():
        setattr(e, k, v)
    return e


@pytest.mark.parametrize("c0,rp,perc,tage,c1,rp1", [
    (255, 5, True, False, 255, 6),       # confirming at cap
    (7, 5, False, True, 3, 4),           # opposing: floor(C/2)
    (10, 31, True, False, 11, 31),       # rel_perf saturates
    (10, -32, False, True, 11, -32),
    (10, 3, True, True, 10, 3),          # tie: both right
    (10, 3, False, False, 10, 3),        # tie: both wrong
    (10, 0, True, False, 10, 1),         # zero trend leaves C
])
def test_record_trial_examples(c0, rp, perc, tage, c1, rp1):
    cache = H2PCache()
    e = entry(confidence=c0, rel_perf=rp)
    cache.record_trial(e, perc, tage, 9)
    assert (e.confidence, e.rel_perf, e.occurrences, e.last_seen) == (c1, rp1, 1, 9)


def test_600_perceptron_wins_shadow():
    cache = H2PCache()
    e = entry()
    rp = conf = 0
    for _ in range(600):
        trend = rp
        rp = min(rp + 1, 31)
        if trend > 0:
            conf = min(conf + 1, 255)
        cache.record_trial(e, True, False, 0)
    assert (e.rel_perf, e.confidence, e.trial_count) == (31, 255, 512) == (rp, conf, 512)
    assert e.occurrences == 600


def test_should_evict_examples():
    cfg = H2PConfig()
    assert not should_evict(entry(trial_count=100, confidence=255, rel_perf=-10), 10**6, True, cfg)
    assert should_evict(entry(trial_count=512, confidence=255, rel_perf=-10), 0, True, cfg)
    assert not should_evict(entry(trial_count=512, confidence=254, rel_perf=-10), 0, True, cfg)
    assert not should_evict(entry(trial_count=512, confidence=255, rel_perf=3), 0, True, cfg)
    stale = entry(trial_count=512, last_seen=100)
    assert should_evict(stale, 100 + 2**16, True, cfg)
    assert not should_evict(stale, 99 + 2**16, True, cfg)
    assert not should_evict(stale, 10**7, False, cfg)


def test_service_evicts_for_waiting_pc():
    c = H2PCache(log_events=True)
    fill(c, 32)
    victim = c.lookup(0x1000)
    victim.trial_count, victim.confidence, victim.rel_perf = 512, 255, -4
    assert c.admit(0x9000, 50) == "resident"
    assert c.lookup(0x1000) is None and c.evictions["confidence"] == 1
    assert "evict" in c.events_csv()
