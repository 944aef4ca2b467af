"""Final-prediction arbitration and selective TAGE update filtering."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

from .h2p_cache import H2PConfig, H2PEntry
from .perceptrons import PerceptronOutput
from .tage_scl import TageOutcome


class Source(str, Enum):
    TAGE = "tage"
    LOCAL = "local"
    GLOBAL = "global"


RULES = ("iii", "iv")


@dataclass
class ArbiterConfig:
    rule: str = "iii"           # "iii": perceptron only if TAGE is weak; "iv": any strong perceptron
    usefulness_strong: int = 3

    def validate(self) -> None:
        if self.rule not in RULES:
            raise ValueError(f"rule must be one of {RULES}, got {self.rule!r}")


class PredictionBundle(NamedTuple):
    tage: TageOutcome
    local: PerceptronOutput | None = None
    global_: PerceptronOutput | None = None
    entry: H2PEntry | None = None


def perceptron_strong(entry: H2PEntry, out: PerceptronOutput | None,
                      cfg: H2PConfig | None = None) -> bool:
    cfg = cfg or H2PConfig()
    return (out is not None
            and entry.trial_count >= cfg.trial_len
            and entry.rel_perf >= cfg.winrate_threshold
            and out.above_theta)


def tage_strong(t: TageOutcome, usefulness_strong: int = 3) -> bool:
    return t.provider_usefulness == usefulness_strong or (t.sc_override and t.sc_magnitude > 0)


def arbitrate(bundle: PredictionBundle, rule: str = "iii", h2p: H2PConfig | None = None,
              usefulness_strong: int = 3) -> tuple[bool, Source]:
    """Pick the final prediction.  Pure: no state is touched."""
    t = bundle.tage
    e = bundle.entry
    if e is None:
        return t.pred, Source.TAGE
    if rule == "iii" and tage_strong(t, usefulness_strong):
        return t.pred, Source.TAGE
    if perceptron_strong(e, bundle.local, h2p):
        return bundle.local.pred, Source.LOCAL
    if perceptron_strong(e, bundle.global_, h2p):
        return bundle.global_.pred, Source.GLOBAL
    return t.pred, Source.TAGE


def perceptron_candidate(local: PerceptronOutput | None,
                         glob: PerceptronOutput | None) -> PerceptronOutput | None:
    """The perceptron side of the head-to-head trial: local unless only the
    global engine clears its threshold."""
    if glob is None or local is None:
        return local if local is not None else glob
    if local.above_theta or not glob.above_theta:
        return local
    return glob


def filter_update(entry: H2PEntry, perc_correct: bool, tage_correct: bool,
                  strong: bool, streak_len: int = 128) -> bool:
    """Track the perceptron-correct streak and set/revoke filtering.

    A TAGE win (TAGE right, perceptron wrong) or any perceptron miss resets
    the streak.  Filtering engages at `streak_len` and is revoked whenever
    the perceptron is not strong for the current instance.
    """
    if perc_correct:
        entry.filter_streak += 1
    else:
        entry.filter_streak = 0
    if not strong:
        entry.filtered = False
    elif entry.filter_streak >= streak_len:
        entry.filtered = True
    return entry.filtered
