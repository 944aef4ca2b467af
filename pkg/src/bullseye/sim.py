"""Trace-driven simulation of TAGE-SC-L with the Bullseye H2P subsystem.

Per branch record, in order:

1. predict: TAGE-SC-L lookup; if the PC is resident in the H2P cache, both
   perceptrons evaluate too; the arbiter picks the final prediction.
2. score the final prediction.
3. update: HIT observation (non-resident PCs) and admission, or trial
   bookkeeping + perceptron training + filter update (resident PCs); then
   TAGE-SC-L training, suppressed for filtered PCs; then histories.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from typing import Iterable

from . import __version__
from .arbiter import Source, filter_update, perceptron_candidate, perceptron_strong, tage_strong
from .budget import budget_report
from .config import SimConfig
from .h2p_cache import H2PCache
from .hit import HIT
from .perceptrons import GlobalBank, LocalBank
from .tage_scl import TageSCL
from .trace_io import BranchRecord

SOURCES = (Source.TAGE.value, Source.LOCAL.value, Source.GLOBAL.value)


@dataclass
class MetricsReport:
    instructions: int
    branches: int
    mispredictions: int
    mispredictions_by_source: dict[str, int]
    predictions_by_source: dict[str, int]
    brmispki: float
    cycwppki_approx: float
    penalty_cycles: int
    bullseye_enabled: bool
    rule: str
    top_pcs: list[dict] = field(default_factory=list)
    residency: dict = field(default_factory=dict)
    sizes: dict = field(default_factory=dict)
    version: str = __version__

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["section", "key", "value"])
        for k in ("instructions", "branches", "mispredictions", "brmispki",
                  "cycwppki_approx", "penalty_cycles", "bullseye_enabled", "rule"):
            w.writerow(["summary", k, getattr(self, k)])
        for k, v in self.mispredictions_by_source.items():
            w.writerow(["mispredictions_by_source", k, v])
        for k, v in self.predictions_by_source.items():
            w.writerow(["predictions_by_source", k, v])
        for k, v in self.residency.items():
            w.writerow(["residency", k, json.dumps(v) if isinstance(v, dict) else v])
        for k, v in self.sizes.items():
            w.writerow(["sizes", k, v])
        for row in self.top_pcs:
            w.writerow(["top_pc", row["pc"], f"{row['mispredictions']}/{row['executions']}"])
        return buf.getvalue()


class Simulator:
    """One predictor instance driven in trace order."""

    def __init__(self, cfg: SimConfig | None = None, record_predictions: bool = False,
                 log_decisions: bool = False, log_residency: bool = False):
        cfg = cfg or SimConfig()
        cfg.validate()
        self.cfg = cfg
        self.tage = TageSCL(cfg.tage)
        self.enabled = cfg.bullseye_enabled
        self.hit = HIT(cfg.hit)
        self.cache = H2PCache(cfg.h2p, log_events=log_residency)
        self.local = LocalBank(cfg.h2p.local_slots, cfg.local)
        self.glob = GlobalBank(cfg.h2p.global_slots, cfg.global_) if cfg.h2p.global_slots else None
        self.cache.on_local_install = self.local.reset_slot
        if self.glob is not None:
            self.cache.on_global_install = self.glob.reset_slot

        self.now = 0
        self.instructions = 0
        self.mispredictions = 0
        self.by_source = dict.fromkeys(SOURCES, 0)
        self.mis_by_source = dict.fromkeys(SOURCES, 0)
        self.pc_exec: dict[int, int] = {}
        self.pc_mis: dict[int, int] = {}
        self.overrides = 0
        self.filtered_updates = 0
        self.record_predictions = record_predictions
        self.predictions = bytearray()
        self.log_decisions = log_decisions
        self.decisions: list[tuple] = []

    def step(self, pc: int, taken: bool, insts_before: int = 0) -> tuple[bool, str]:
        cfg = self.cfg
        tage = self.tage
        t = tage.predict(pc)
        entry = self.cache.entries.get(pc) if self.enabled else None

        lo = go = None
        if entry is None:
            pred, source = t.pred, "tage"
        else:
            lo = self.local.predict(entry.local_slot, pc, entry.lhist.bits)
            if entry.global_slot is not None:
                go = self.glob.predict(entry.global_slot, tage.ghist.bits)
            h2p = cfg.h2p
            if cfg.arbiter.rule == "iii" and tage_strong(t, cfg.arbiter.usefulness_strong):
                pred, source = t.pred, "tage"
            elif perceptron_strong(entry, lo, h2p):
                pred, source = lo.pred, "local"
            elif perceptron_strong(entry, go, h2p):
                pred, source = go.pred, "global"
            else:
                pred, source = t.pred, "tage"
            if source != "tage":
                self.overrides += 1

        # score
        self.instructions += insts_before + 1
        self.by_source[source] += 1
        self.pc_exec[pc] = self.pc_exec.get(pc, 0) + 1
        if pred != taken:
            self.mispredictions += 1
            self.mis_by_source[source] += 1
            self.pc_mis[pc] = self.pc_mis.get(pc, 0) + 1
        if self.record_predictions:
            self.predictions.append(pred)
        if self.log_decisions:
            self.decisions.append((pc, t.pred, None if lo is None else lo.pred,
                                   None if go is None else go.pred, source, pred == taken))

        # update
        tage_correct = t.pred == taken
        suppressed = False
        if self.enabled:
            cache = self.cache
            if entry is None:
                if self.hit.observe(pc, tage_correct, len(cache.entries)) and not cache.is_queued(pc):
                    cache.admit(pc, self.now)
            else:
                cand = perceptron_candidate(lo, go)
                perc_correct = cand.pred == taken
                cache.record_trial(entry, perc_correct, tage_correct, self.now)
                self.local.train(entry.local_slot, lo, taken)
                if go is not None:
                    self.glob.train(entry.global_slot, go, taken)
                if cfg.h2p.filtering:
                    strong = perceptron_strong(entry, cand, cfg.h2p)
                    suppressed = filter_update(entry, perc_correct, tage_correct, strong,
                                               cfg.h2p.filter_streak)
                    if suppressed:
                        self.filtered_updates += 1
                entry.lhist.push(taken)
            if cache.fifo:
                cache.service(self.now)
        tage.update(pc, taken, suppressed)
        self.now += 1
        return pred, source

    def run(self, trace: Iterable[BranchRecord]) -> MetricsReport:
        step = self.step
        for pc, taken, insts in trace:
            step(pc, taken, insts)
        return self.report()

    def report(self) -> MetricsReport:
        cfg = self.cfg
        mpki = 1000.0 * self.mispredictions / self.instructions if self.instructions else 0.0
        top = sorted(self.pc_mis.items(), key=lambda kv: (-kv[1], kv[0]))[:cfg.top_k]
        total_mis = self.mispredictions or 1
        top_pcs = [{"pc": f"{pc:#x}", "executions": self.pc_exec[pc], "mispredictions": m,
                    "share": m / total_mis} for pc, m in top]
        c = self.cache
        residency = {
            "max_concurrent": c.max_resident,
            "admissions": c.admissions,
            "evictions": dict(c.evictions),
            "fifo_drops": c.drops,
            "resident_at_end": len(c.entries),
            "queued_at_end": len(c.fifo),
            "overrides": self.overrides,
            "filtered_updates": self.filtered_updates,
        }
        budget = budget_report(cfg)
        sizes = {f"{k}_bits": v["bits"] for k, v in budget["components"].items()}
        sizes["total_bits"] = budget["total_bits"]
        return MetricsReport(
            instructions=self.instructions,
            branches=self.now,
            mispredictions=self.mispredictions,
            mispredictions_by_source=dict(self.mis_by_source),
            predictions_by_source=dict(self.by_source),
            brmispki=mpki,
            cycwppki_approx=cfg.penalty_cycles * mpki,
            penalty_cycles=cfg.penalty_cycles,
            bullseye_enabled=cfg.bullseye_enabled,
            rule=cfg.arbiter.rule,
            top_pcs=top_pcs,
            residency=residency,
            sizes=sizes,
        )

    def decisions_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["pc", "tage_pred", "local_pred", "global_pred", "source", "correct"])
        fmt = lambda v: "" if v is None else int(v)
        for pc, tp, lp, gp, src, ok in self.decisions:
            w.writerow([f"{pc:#x}", int(tp), fmt(lp), fmt(gp), src, int(ok)])
        return buf.getvalue()


def run_simulation(trace: Iterable[BranchRecord], cfg: SimConfig | None = None) -> MetricsReport:
    return Simulator(cfg).run(trace)


def baseline_predictions(trace: Iterable[BranchRecord], cfg: SimConfig | None = None) -> bytearray:
    """Prediction stream of a standalone TAGE-SC-L (no Bullseye objects at all)."""
    cfg = cfg or SimConfig()
    tage = TageSCL(cfg.tage)
    out = bytearray()
    for pc, taken, _ in trace:
        out.append(tage.predict(pc).pred)
        tage.update(pc, taken)
    return out
