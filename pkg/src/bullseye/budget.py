"""Bit-exact storage audit of the predictor configuration.

kB figures use 1 kB = 1024 bytes = 8192 bits.
"""
from __future__ import annotations

from dataclasses import dataclass

from .config import SimConfig
from .tage_scl import tage_size_breakdown

BITS_PER_KB = 8192


@dataclass
class BudgetLine:
    component: str
    item: str
    bits: int
    detail: str = ""


def _mgmt_bits(cfg: SimConfig) -> int:
    h = cfg.h2p
    return h.rel_perf_bits + h.conf_bits + h.trial_bits + h.timestamp_bits


def budget_lines(cfg: SimConfig) -> list[BudgetLine]:
    h, hit, lp, gp = cfg.h2p, cfg.hit, cfg.local, cfg.global_
    ways = (1 << hit.sets_log) * hit.ways
    out = [BudgetLine("TAGE-SC-L", name, bits) for name, bits in tage_size_breakdown(cfg.tage).items()]

    geo = f"2^{hit.sets_log} sets * {hit.ways} ways"
    out += [
        BudgetLine("HIT", "PC Tag", hit.tag_bits * ways, f"{hit.tag_bits} bits * {geo}"),
        BudgetLine("HIT", "Correct Prediction Counters", hit.correct_bits * ways,
                   f"{hit.correct_bits} bits * {geo}"),
        BudgetLine("HIT", "Incorrect Prediction Counters", hit.incorrect_bits * ways,
                   f"{hit.incorrect_bits} bits * {geo}"),
    ]

    g = h.global_slots
    mg = _mgmt_bits(cfg)
    out += [
        BudgetLine("Global", "H2P PC Tag", h.pc_bits * g, f"{h.pc_bits} bit PC * {g} entries"),
        BudgetLine("Global", "PC Queue", h.pc_bits * h.fifo_depth,
                   f"{h.pc_bits} PC bits * {h.fifo_depth} queue entries"),
        BudgetLine("Global", "Global History", gp.history_bits, f"{gp.history_bits} bits"),
        BudgetLine("Global", "Weights", gp.weight_bits * gp.fold_width * g,
                   f"{gp.weight_bits} bit * {gp.fold_width} weights * {g} entries"),
        BudgetLine("Global", "Perceptron Bias", gp.bias_bits * (1 << gp.bias_log) * g,
                   f"{gp.bias_bits} bit * 2^{gp.bias_log} entries * {g} entries"),
        BudgetLine("Global", "Update Thresh. Counters", (gp.theta_bits + gp.tc_bits) * g,
                   f"({gp.theta_bits}+{gp.tc_bits}) * {g} entries"),
        BudgetLine("Global", "Branch Management Counters", mg * g, f"{mg} bits * {g} entries"),
    ]

    n = h.local_slots
    out += [
        BudgetLine("Local", "H2P PC Tag", h.pc_bits * n, f"{h.pc_bits} bit PC * {n} entries"),
        BudgetLine("Local", "PC Queue", h.pc_bits * h.fifo_depth,
                   f"{h.pc_bits} PC bits * {h.fifo_depth} queue entries"),
        BudgetLine("Local", "Weights", lp.weight_bits * lp.num_tables * (1 << lp.table_log),
                   f"{lp.weight_bits} bit * {lp.num_tables} tables * 2^{lp.table_log}"),
        BudgetLine("Local", "Local History", lp.history_bits * n,
                   f"{lp.history_bits} bit history * {n} entries"),
        BudgetLine("Local", "Perceptron Bias", lp.bias_bits * (1 << lp.bias_log) * n,
                   f"{lp.bias_bits} bit * 2^{lp.bias_log} entries * {n} entries"),
        BudgetLine("Local", "Update Thresh. Counters", (lp.theta_bits + lp.tc_bits) * n,
                   f"({lp.theta_bits}+{lp.tc_bits}) * {n} entries"),
        BudgetLine("Local", "Branch Management Counters", mg * n, f"{mg} bits * {n} entries"),
    ]
    return out


COMPONENTS = ("TAGE-SC-L", "HIT", "Global", "Local")


def budget_report(cfg: SimConfig) -> dict:
    lines = budget_lines(cfg)
    totals = {c: sum(l.bits for l in lines if l.component == c) for c in COMPONENTS}
    bullseye = totals["HIT"] + totals["Global"] + totals["Local"]
    return {
        "lines": [l.__dict__ for l in lines],
        "components": {c: {"bits": b, "kB": round(b / BITS_PER_KB, 3)} for c, b in totals.items()},
        "bullseye_bits": bullseye,
        "bullseye_kB": round(bullseye / BITS_PER_KB, 3),
        "total_bits": sum(totals.values()),
        "total_kB": round(sum(totals.values()) / BITS_PER_KB, 3),
    }


def format_budget(report: dict) -> str:
    rows = []
    for line in report["lines"]:
        rows.append(f"  {line['component']:<10} {line['item']:<30} {line['bits']:>9}  {line['detail']}")
    rows.append("")
    for comp, v in report["components"].items():
        rows.append(f"{comp:<12} {v['bits']:>9} bits  {v['kB']:>9.3f} kB")
    rows.append(f"{'Bullseye':<12} {report['bullseye_bits']:>9} bits  {report['bullseye_kB']:>9.3f} kB")
    rows.append(f"{'TOTAL':<12} {report['total_bits']:>9} bits  {report['total_kB']:>9.3f} kB")
    return "\n".join(rows) + "\n"
