"""H2P residency cache: admission FIFO, trial bookkeeping and eviction."""
from __future__ import annotations

import csv
import io
from collections import deque
from dataclasses import dataclass, field

from .histories import LocalHistory


@dataclass
class H2PConfig:
    local_slots: int = 32
    global_slots: int = 16
    fifo_depth: int = 64
    trial_len: int = 512
    stale_timeout: int = 1 << 16
    conf_bits: int = 8
    rel_perf_bits: int = 6
    trial_bits: int = 9
    timestamp_bits: int = 16
    pc_bits: int = 62
    filter_streak: int = 128
    winrate_threshold: int = 4      # rel_perf proxy for a >= 55% win rate
    filtering: bool = True

    def validate(self) -> None:
        if min(self.local_slots, self.fifo_depth, self.trial_len, self.stale_timeout,
               self.conf_bits, self.rel_perf_bits, self.filter_streak) < 1:
            raise ValueError("H2P cache sizes and thresholds must be >= 1")
        if self.global_slots < 0 or self.global_slots > self.local_slots:
            raise ValueError("global_slots must lie in 0..local_slots")


@dataclass(eq=False)
class H2PEntry:
    pc: int
    local_slot: int
    global_slot: int | None
    admitted_at: int
    last_seen: int
    lhist: LocalHistory = field(default_factory=LocalHistory)
    occurrences: int = 0
    rel_perf: int = 0
    confidence: int = 0
    trial_count: int = 0
    filter_streak: int = 0
    filtered: bool = False


@dataclass
class ResidencyEvent:
    time: int
    event: str          # admit | evict | drop | enqueue | global_grant
    pc: int
    reason: str = ""
    local_slot: int | None = None
    global_slot: int | None = None


class H2PCache:
    def __init__(self, cfg: H2PConfig | None = None, log_events: bool = False):
        cfg = cfg or H2PConfig()
        cfg.validate()
        self.cfg = cfg
        self.entries: dict[int, H2PEntry] = {}
        self.fifo: deque[int] = deque()
        self._queued: set[int] = set()
        self._free_local = list(range(cfg.local_slots - 1, -1, -1))
        self._free_global = list(range(cfg.global_slots - 1, -1, -1))
        self._conf_max = (1 << cfg.conf_bits) - 1
        self._rp_max = (1 << (cfg.rel_perf_bits - 1)) - 1
        self._rp_min = -(1 << (cfg.rel_perf_bits - 1))
        self.log_events = log_events
        self.events: list[ResidencyEvent] = []
        self.admissions = 0
        self.evictions = {"confidence": 0, "stale": 0}
        self.drops = 0
        self.max_resident = 0
        # callbacks fired when slots are (re)assigned, so banks can reset them
        self.on_local_install = None
        self.on_global_install = None

    # --------------------------------------------------------------- queries

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def num_resident(self) -> int:
        return len(self.entries)

    def lookup(self, pc: int) -> H2PEntry | None:
        return self.entries.get(pc)

    def is_queued(self, pc: int) -> bool:
        return pc in self._queued

    @property
    def waiting(self) -> bool:
        return bool(self.fifo)

    def _event(self, *args, **kw) -> None:
        if self.log_events:
            self.events.append(ResidencyEvent(*args, **kw))

    # ------------------------------------------------------------- admission

    def admit(self, pc: int, now: int) -> str:
        """Queue a newly qualified PC and try to seat the FIFO head.

        Returns "resident" if `pc` got a slot, "queued" otherwise.
        """
        if pc in self.entries:
            return "resident"
        if pc not in self._queued:
            if len(self.fifo) >= self.cfg.fifo_depth:
                old = self.fifo.popleft()
                self._queued.discard(old)
                self.drops += 1
                self._event(now, "drop", old, "fifo_full")
            self.fifo.append(pc)
            self._queued.add(pc)
            self._event(now, "enqueue", pc)
        self.service(now)
        return "resident" if pc in self.entries else "queued"

    def service(self, now: int) -> None:
        """Seat queued PCs while slots are free or an eviction is permitted."""
        while self.fifo:
            if not self._free_local:
                victim = self._pick_victim(now)
                if victim is None:
                    return
                self.evict(victim.pc, now, victim_reason(victim, now, self.cfg, self._conf_max))
            self._install(self.fifo.popleft(), now)

    def _pick_victim(self, now: int) -> H2PEntry | None:
        for e in self.entries.values():
            if self.should_evict(e, now, True):
                return e
        return None

    def _install(self, pc: int, now: int) -> H2PEntry:
        self._queued.discard(pc)
        slot = self._free_local.pop()
        gslot = self._free_global.pop() if self._free_global else None
        e = H2PEntry(pc, slot, gslot, admitted_at=now, last_seen=now,
                     lhist=LocalHistory())
        self.entries[pc] = e
        if self.on_local_install:
            self.on_local_install(slot)
        if gslot is not None and self.on_global_install:
            self.on_global_install(gslot)
        self.admissions += 1
        self.max_resident = max(self.max_resident, len(self.entries))
        self._event(now, "admit", pc, local_slot=slot, global_slot=gslot)
        return e

    def evict(self, pc: int, now: int, reason: str = "manual") -> H2PEntry:
        e = self.entries.pop(pc)
        self._free_local.append(e.local_slot)
        if reason in self.evictions:
            self.evictions[reason] += 1
        self._event(now, "evict", pc, reason, e.local_slot, e.global_slot)
        if e.global_slot is not None:
            # hand the freed global slot to the oldest local-only resident
            heir = next((r for r in self.entries.values() if r.global_slot is None), None)
            if heir is None:
                self._free_global.append(e.global_slot)
            else:
                heir.global_slot = e.global_slot
                if self.on_global_install:
                    self.on_global_install(e.global_slot)
                self._event(now, "global_grant", heir.pc, global_slot=e.global_slot)
        return e

    # ----------------------------------------------------------------- trial

    def record_trial(self, e: H2PEntry, perc_correct: bool, tage_correct: bool, now: int) -> None:
        """Advance the head-to-head trial for one dynamic occurrence."""
        e.occurrences += 1
        e.last_seen = now
        if e.trial_count < self.cfg.trial_len:
            e.trial_count += 1
        rp = e.rel_perf
        if perc_correct == tage_correct:
            return
        perc_won = perc_correct
        if rp:
            if (rp > 0) == perc_won:
                if e.confidence < self._conf_max:
                    e.confidence += 1
            else:
                e.confidence >>= 1
        if perc_won:
            if rp < self._rp_max:
                e.rel_perf = rp + 1
        elif rp > self._rp_min:
            e.rel_perf = rp - 1

    def should_evict(self, e: H2PEntry, now: int, waiting: bool) -> bool:
        return should_evict(e, now, waiting, self.cfg, self._conf_max)

    # ------------------------------------------------------------- reporting

    def events_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["time", "event", "pc", "reason", "local_slot", "global_slot"])
        for ev in self.events:
            w.writerow([ev.time, ev.event, f"{ev.pc:#x}", ev.reason,
                        "" if ev.local_slot is None else ev.local_slot,
                        "" if ev.global_slot is None else ev.global_slot])
        return buf.getvalue()


def should_evict(e: H2PEntry, now: int, waiting: bool, cfg: H2PConfig | None = None,
                 conf_max: int | None = None) -> bool:
    """Evictable only after warm-up, and only while a qualifier is waiting."""
    cfg = cfg or H2PConfig()
    conf_max = (1 << cfg.conf_bits) - 1 if conf_max is None else conf_max
    if not waiting or e.trial_count < cfg.trial_len:
        return False
    return (e.confidence == conf_max and e.rel_perf < 0) or now - e.last_seen >= cfg.stale_timeout


def victim_reason(e: H2PEntry, now: int, cfg: H2PConfig, conf_max: int) -> str:
    return "confidence" if e.confidence == conf_max and e.rel_perf < 0 else "stale"
