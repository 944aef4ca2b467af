"""Baseline TAGE-SC-L: bimodal base, tagged geometric tables, a GEHL-style
statistical corrector and a loop predictor.

The predictor owns the global history register.  ``predict(pc)`` is
read-only; ``update(pc, taken, suppressed)`` trains the tables (unless
suppressed) and then always advances the histories.
"""
from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np
from numba import njit

from .histories import GLOBAL_CAPACITY, GlobalHistory

BIMODAL = -1


def geometric_lengths(n: int, lo: int, hi: int) -> list[int]:
    if n == 1:
        return [lo]
    return [round(lo * (hi / lo) ** (i / (n - 1))) for i in range(n)]


@dataclass
class TageConfig:
    hist_lengths: list[int] = field(default_factory=lambda: [4, 7, 11, 18, 29, 48, 79, 130])
    log_entries: list[int] = field(default_factory=lambda: [10] * 8)
    tag_widths: list[int] = field(default_factory=lambda: [8, 8, 9, 9, 10, 10, 11, 11])
    ctr_bits: int = 3
    u_bits: int = 2
    bimodal_log: int = 12          # 0 disables the bimodal table (sizing only)
    bimodal_bits: int = 2
    use_alt_bits: int = 4
    u_reset_log: int = 18          # halve all usefulness counters every 2^k updates
    max_alloc: int = 2
    # statistical corrector; empty length lists and sc_bias_log=0 disable parts
    sc_bits: int = 6
    sc_bias_log: int = 9
    sc_global_lengths: list[int] = field(default_factory=lambda: [8, 16, 32])
    sc_global_log: int = 9
    sc_local_lengths: list[int] = field(default_factory=lambda: [6, 11])
    sc_local_log: int = 9
    sc_lhist_log: int = 8
    sc_threshold_init: int = 24
    sc_threshold_bits: int = 12
    sc_tc_bits: int = 6
    # loop predictor; loop_log=0 disables it
    loop_log: int = 6
    loop_tag_bits: int = 10
    loop_iter_bits: int = 10
    loop_conf_bits: int = 3
    loop_age_bits: int = 3

    def validate(self) -> None:
        n = len(self.hist_lengths)
        if len(self.log_entries) != n or len(self.tag_widths) != n:
            raise ValueError("hist_lengths, log_entries and tag_widths must have equal length")
        if any(b <= a for a, b in zip(self.hist_lengths, self.hist_lengths[1:])):
            raise ValueError("tagged history lengths must be strictly increasing")
        widths = [*self.hist_lengths, *self.log_entries, self.ctr_bits, self.u_bits,
                  self.bimodal_bits, self.use_alt_bits, self.sc_bits]
        if any(w < 1 for w in widths) or any(w < 2 for w in self.tag_widths):
            raise ValueError("all widths and lengths must be >= 1 (tags >= 2)")
        if self.sc_global_lengths and any(L < 1 for L in self.sc_global_lengths):
            raise ValueError("SC history lengths must be >= 1")
        if any(L < 1 or L > 32 for L in self.sc_local_lengths):
            raise ValueError("SC local history lengths must lie in 1..32")
        if self.loop_log and min(self.loop_iter_bits, self.loop_conf_bits, self.loop_tag_bits) < 1:
            raise ValueError("loop predictor widths must be >= 1")

    @property
    def num_tagged_tables(self) -> int:
        return len(self.hist_lengths)

    @property
    def sc_enabled(self) -> bool:
        return bool(self.sc_bias_log or self.sc_global_lengths or self.sc_local_lengths)

    def to_dict(self) -> dict:
        return asdict(self)


def tage_size_breakdown(cfg: TageConfig) -> dict[str, int]:
    """Storage in bits per component; every table is entries x entry width."""
    rows: dict[str, int] = {}
    if cfg.bimodal_log:
        rows["bimodal"] = (1 << cfg.bimodal_log) * cfg.bimodal_bits
    tagged = sum((1 << lg) * (cfg.ctr_bits + cfg.u_bits + tw)
                 for lg, tw in zip(cfg.log_entries, cfg.tag_widths))
    if cfg.hist_lengths:
        rows["tagged"] = tagged
        rows["use_alt"] = cfg.use_alt_bits
    sc = 0
    if cfg.sc_bias_log:
        sc += (1 << cfg.sc_bias_log) * cfg.sc_bits
    sc += len(cfg.sc_global_lengths) * (1 << cfg.sc_global_log) * cfg.sc_bits
    sc += len(cfg.sc_local_lengths) * (1 << cfg.sc_local_log) * cfg.sc_bits
    if cfg.sc_enabled:
        rows["sc"] = sc + cfg.sc_threshold_bits + cfg.sc_tc_bits
    if cfg.loop_log:
        entry = (cfg.loop_tag_bits + 2 * cfg.loop_iter_bits + cfg.loop_conf_bits
                 + cfg.loop_age_bits + 1)
        rows["loop"] = (1 << cfg.loop_log) * entry
    ghist = max([*cfg.hist_lengths, *cfg.sc_global_lengths], default=0)
    lhist = (1 << cfg.sc_lhist_log) * max(cfg.sc_local_lengths) if cfg.sc_local_lengths else 0
    if ghist or lhist:
        rows["history"] = ghist + lhist
    return rows


def tage_size_bits(cfg: TageConfig) -> int:
    return sum(tage_size_breakdown(cfg).values())


class TageOutcome(NamedTuple):
    pred: bool
    provider_table: int            # BIMODAL (-1) or tagged table index
    provider_usefulness: int
    provider_counter: int          # signed; tagged ctr, or bimodal ctr - midpoint
    sc_override: bool
    sc_magnitude: int
    loop_hit: bool
    tage_pred: bool                # TAGE alone, before SC and loop


def pc_hash(pc: int) -> int:
    """32-bit multiplicative mix of the branch address."""
    return ((pc * 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF) >> 32


# ----------------------------------------------------------------- compiled core
#
# All trainable state lives in one flat int64 array ``mem``.  ``P`` holds the
# masks, limits and section offsets, ``T`` one row per tagged table, ``F`` one
# row per folded history, ``LL`` the SC local lengths.  ``S`` carries the
# lookup results from predict to update: table indices, tags, SC indices,
# then the scalars at P[P_SB].

M_USE_ALT, M_TICK, M_SEED, M_THR, M_TC, M_HEAD = range(6)
_HEADER = 8

(P_N, P_BMASK, P_BMAX, P_BMID, P_CMAX, P_CMIN, P_UMAX, P_UAMAX, P_UAMIN, P_UPMASK,
 P_MAXALLOC, P_SC_ON, P_SC_BIAS, P_SC_BMASK, P_NG, P_SC_GMASK, P_NL, P_SC_LMASK,
 P_SC_LLOG, P_LH_MASK, P_LH_WMASK, P_SCMAX, P_SCMIN, P_THRMAX, P_TCMAX, P_TCMIN,
 P_LMASK, P_LTMASK, P_LITERMAX, P_LCONFMAX, P_LAGEMAX, P_LOOPLOG, P_NLOOP,
 P_NF, P_RMASK, P_O_BIM, P_O_SCB, P_O_SCG, P_O_SCL, P_O_LH, P_O_LOOP, P_O_FOLD,
 P_O_RING, P_SB, _P_LEN) = range(45)

T_SHIFT, T_IMASK, T_TMASK, T_CTR, T_TAG, T_U, T_SIZE = range(7)
F_EVICT, F_OUT, F_WIDTH, F_MASK = range(4)
(S_P, S_PROV, S_ALT, S_BI, S_PPRED, S_APRED, S_TPRED, S_WEAK, S_PU, S_BIDX, S_SUM,
 S_LI, S_LPRED, S_PRED, _S_LEN) = range(15)

# loop entry fields, each a section of P[P_NLOOP] entries
L_VALID, L_TAG, L_TRIP, L_CUR, L_CONF, L_AGE, L_DIR = range(7)


@njit(cache=True)
def _fold(v, length, width):
    v &= (1 << length) - 1
    if length <= width:
        return v
    mask = (1 << width) - 1
    out = 0
    while v:
        out ^= v & mask
        v >>= width
    return out


@njit(cache=True)
def _predict(mem, P, T, F, LL, S, p):
    n = P[P_N]
    of = P[P_O_FOLD]
    provider = -1
    alt = -1
    for t in range(n):
        fi = mem[of + t]
        S[t] = (p ^ (p >> T[t, T_SHIFT]) ^ fi) & T[t, T_IMASK]
        S[n + t] = (p ^ mem[of + n + t] ^ (fi << 1)) & T[t, T_TMASK]
    for t in range(n - 1, -1, -1):
        if mem[T[t, T_TAG] + S[t]] == S[n + t]:
            if provider < 0:
                provider = t
            else:
                alt = t
                break

    bi = p & P[P_BMASK]
    b = mem[P[P_O_BIM] + bi]
    bim_pred = b >= P[P_BMID]
    alt_pred = mem[T[alt, T_CTR] + S[alt]] >= 0 if alt >= 0 else bim_pred
    weak = False
    if provider >= 0:
        c = mem[T[provider, T_CTR] + S[provider]]
        pu = mem[T[provider, T_U] + S[provider]]
        prov_pred = c >= 0
        weak = c == 0 or c == -1
        tage_pred = alt_pred if (weak and pu == 0 and mem[M_USE_ALT] >= 0) else prov_pred
        high_conf = c == P[P_CMAX] or c == P[P_CMIN]
    else:
        c = b - P[P_BMID]
        pu = 0
        prov_pred = bim_pred
        tage_pred = bim_pred
        high_conf = b == 0 or b == P[P_BMAX]

    pred = tage_pred
    sc_override = False
    sc_mag = 0
    sc_sum = 0
    bidx = 0
    if P[P_SC_ON]:
        tp = 1 if tage_pred else 0
        bidx = ((p << 2) | (tp << 1) | (0 if high_conf else 1)) & P[P_SC_BMASK]
        if P[P_SC_BIAS]:
            sc_sum += 2 * mem[P[P_O_SCB] + bidx] + 1
        ng = P[P_NG]
        gmask = P[P_SC_GMASK]
        for j in range(ng):
            k = (p ^ mem[of + 2 * n + j] ^ (tp << 3)) & gmask
            S[2 * n + j] = k
            sc_sum += 2 * mem[P[P_O_SCG] + j * (gmask + 1) + k] + 1
        nl = P[P_NL]
        if nl:
            lh = mem[P[P_O_LH] + (p & P[P_LH_MASK])]
            lmask = P[P_SC_LMASK]
            for j in range(nl):
                k = (p ^ _fold(lh, LL[j], P[P_SC_LLOG]) ^ (tp << 2)) & lmask
                S[2 * n + ng + j] = k
                sc_sum += 2 * mem[P[P_O_SCL] + j * (lmask + 1) + k] + 1
        sc_pred = sc_sum >= 0
        mag = abs(sc_sum)
        thr = mem[M_THR]
        if sc_pred != tage_pred and not high_conf and mag >= thr:
            pred = sc_pred
            sc_override = True
            sc_mag = mag - thr

    loop_hit = False
    loop_pred = False
    li = -1
    if P[P_LMASK] >= 0:
        nlp = P[P_NLOOP]
        o = P[P_O_LOOP]
        li = p & P[P_LMASK]
        lt = (p >> P[P_LOOPLOG]) & P[P_LTMASK]
        if mem[o + li] != 0 and mem[o + L_TAG * nlp + li] == lt:
            trip = mem[o + L_TRIP * nlp + li]
            d = mem[o + L_DIR * nlp + li] != 0
            if trip != 0 and mem[o + L_CUR * nlp + li] + 1 == trip:
                loop_pred = not d
            else:
                loop_pred = d
            loop_hit = trip > 0 and mem[o + L_CONF * nlp + li] == P[P_LCONFMAX]
        else:
            li = -1 - li   # miss marker, keeps the slot recoverable
    if loop_hit:
        pred = loop_pred

    sb = P[P_SB]
    S[sb + S_P] = p
    S[sb + S_PROV] = provider
    S[sb + S_ALT] = alt
    S[sb + S_BI] = bi
    S[sb + S_PPRED] = prov_pred
    S[sb + S_APRED] = alt_pred
    S[sb + S_TPRED] = tage_pred
    S[sb + S_WEAK] = weak
    S[sb + S_PU] = pu
    S[sb + S_BIDX] = bidx
    S[sb + S_SUM] = sc_sum
    S[sb + S_LI] = li
    S[sb + S_LPRED] = loop_pred
    S[sb + S_PRED] = pred
    return pred, provider, pu, c, sc_override, sc_mag, loop_hit, tage_pred


@njit(cache=True)
def _bump(mem, i, taken, lo, hi):
    v = mem[i]
    if taken:
        mem[i] = v + 1 if v < hi else hi
    else:
        mem[i] = v - 1 if v > lo else lo


@njit(cache=True)
def _train_loop(mem, P, p, li, taken, final_pred, loop_pred):
    if P[P_LMASK] < 0:
        return
    nlp = P[P_NLOOP]
    o = P[P_O_LOOP]
    if li >= 0:
        trip = mem[o + L_TRIP * nlp + li]
        if mem[o + L_CONF * nlp + li] == P[P_LCONFMAX] and trip != 0:
            if loop_pred == taken and mem[o + L_AGE * nlp + li] < P[P_LAGEMAX]:
                mem[o + L_AGE * nlp + li] += 1
        if taken == (mem[o + L_DIR * nlp + li] != 0):
            cur = mem[o + L_CUR * nlp + li] + 1
            if cur > P[P_LITERMAX] or (trip != 0 and cur >= trip):
                # overran the learned trip count: free the entry
                mem[o + L_VALID * nlp + li] = 0
                mem[o + L_AGE * nlp + li] = 0
                cur = 0
            mem[o + L_CUR * nlp + li] = cur
        else:
            seen = mem[o + L_CUR * nlp + li] + 1
            if trip == seen:
                if mem[o + L_CONF * nlp + li] < P[P_LCONFMAX]:
                    mem[o + L_CONF * nlp + li] += 1
            else:
                mem[o + L_TRIP * nlp + li] = seen
                mem[o + L_CONF * nlp + li] = 0
            mem[o + L_CUR * nlp + li] = 0
    elif final_pred != taken:
        slot = -1 - li
        if mem[o + L_VALID * nlp + slot] == 0 or mem[o + L_AGE * nlp + slot] == 0:
            mem[o + L_VALID * nlp + slot] = 1
            mem[o + L_TAG * nlp + slot] = (p >> P[P_LOOPLOG]) & P[P_LTMASK]
            mem[o + L_DIR * nlp + slot] = 0 if taken else 1
            mem[o + L_TRIP * nlp + slot] = 0
            mem[o + L_CUR * nlp + slot] = 0
            mem[o + L_CONF * nlp + slot] = 0
            mem[o + L_AGE * nlp + slot] = P[P_LAGEMAX]
        else:
            mem[o + L_AGE * nlp + slot] -= 1


@njit(cache=True)
def _train_sc(mem, P, S, sc_sum, tage_pred, taken):
    sc_pred = sc_sum >= 0
    mag = abs(sc_sum)
    if sc_pred != tage_pred:
        if sc_pred != taken:
            mem[M_TC] += 1
            if mem[M_TC] > P[P_TCMAX]:
                mem[M_THR] = min(mem[M_THR] + 1, P[P_THRMAX])
                mem[M_TC] = 0
        elif mag < mem[M_THR]:
            mem[M_TC] -= 1
            if mem[M_TC] < P[P_TCMIN]:
                mem[M_THR] = max(mem[M_THR] - 1, 1)
                mem[M_TC] = 0
    if sc_pred != taken or mag < mem[M_THR]:
        lo = P[P_SCMIN]
        hi = P[P_SCMAX]
        n = P[P_N]
        if P[P_SC_BIAS]:
            _bump(mem, P[P_O_SCB] + S[P[P_SB] + S_BIDX], taken, lo, hi)
        gsize = P[P_SC_GMASK] + 1
        for j in range(P[P_NG]):
            _bump(mem, P[P_O_SCG] + j * gsize + S[2 * n + j], taken, lo, hi)
        lsize = P[P_SC_LMASK] + 1
        for j in range(P[P_NL]):
            _bump(mem, P[P_O_SCL] + j * lsize + S[2 * n + P[P_NG] + j], taken, lo, hi)


@njit(cache=True)
def _allocate(mem, P, T, S, provider, taken):
    n = P[P_N]
    s = mem[M_SEED]
    s ^= (s << 13) & 0xFFFFFFFF
    s ^= s >> 17
    s ^= (s << 5) & 0xFFFFFFFF
    mem[M_SEED] = s
    start = provider + 1 + ((s & 1) if provider + 2 < n else 0)
    done = 0
    for t in range(start, n):
        i = S[t]
        if mem[T[t, T_U] + i] == 0:
            mem[T[t, T_TAG] + i] = S[n + t]
            mem[T[t, T_CTR] + i] = 0 if taken else -1
            done += 1
            if done >= P[P_MAXALLOC]:
                break
    if done == 0:
        for t in range(start, n):
            ui = T[t, T_U] + S[t]
            if mem[ui] != 0:
                mem[ui] -= 1


@njit(cache=True)
def _train(mem, P, T, S, taken):
    n = P[P_N]
    sb = P[P_SB]
    provider = S[sb + S_PROV]
    alt = S[sb + S_ALT]
    prov_pred = S[sb + S_PPRED] != 0
    alt_pred = S[sb + S_APRED] != 0
    tage_pred = S[sb + S_TPRED] != 0
    pu = S[sb + S_PU]
    cmin = P[P_CMIN]
    cmax = P[P_CMAX]
    bim = P[P_O_BIM] + S[sb + S_BI]

    _train_loop(mem, P, S[sb + S_P], S[sb + S_LI], taken, S[sb + S_PRED] != 0,
                S[sb + S_LPRED] != 0)
    if P[P_SC_ON]:
        _train_sc(mem, P, S, S[sb + S_SUM], tage_pred, taken)

    # allocation on a TAGE misprediction
    if tage_pred != taken and provider < n - 1:
        _allocate(mem, P, T, S, provider, taken)

    if provider >= 0:
        i = S[provider]
        if S[sb + S_WEAK] != 0 and pu == 0 and prov_pred != alt_pred:
            if alt_pred == taken:
                mem[M_USE_ALT] = min(mem[M_USE_ALT] + 1, P[P_UAMAX])
            else:
                mem[M_USE_ALT] = max(mem[M_USE_ALT] - 1, P[P_UAMIN])
        _bump(mem, T[provider, T_CTR] + i, taken, cmin, cmax)
        if pu == 0:
            if alt >= 0:
                _bump(mem, T[alt, T_CTR] + S[alt], taken, cmin, cmax)
            else:
                _bump(mem, bim, taken, 0, P[P_BMAX])
        if prov_pred != alt_pred:
            ui = T[provider, T_U] + i
            if prov_pred == taken:
                mem[ui] = min(mem[ui] + 1, P[P_UMAX])
            elif mem[ui] != 0:
                mem[ui] -= 1
    else:
        _bump(mem, bim, taken, 0, P[P_BMAX])

    mem[M_TICK] += 1
    if mem[M_TICK] & P[P_UPMASK] == 0:
        for t in range(n):
            base = T[t, T_U]
            for k in range(T[t, T_SIZE]):
                mem[base + k] >>= 1


@njit(cache=True)
def _update(mem, P, T, F, S, taken, suppressed):
    if not suppressed:
        _train(mem, P, T, S, taken)
    t = 1 if taken else 0
    of = P[P_O_FOLD]
    ro = P[P_O_RING]
    rm = P[P_RMASK]
    head = mem[M_HEAD]
    for f in range(P[P_NF]):
        old = mem[ro + ((head - F[f, F_EVICT]) & rm)]
        x = ((mem[of + f] << 1) | t) ^ (old << F[f, F_OUT])
        mem[of + f] = (x ^ (x >> F[f, F_WIDTH])) & F[f, F_MASK]
    head = (head + 1) & rm
    mem[ro + head] = t
    mem[M_HEAD] = head
    if P[P_NL]:
        j = P[P_O_LH] + (S[P[P_SB] + S_P] & P[P_LH_MASK])
        mem[j] = ((mem[j] << 1) | t) & P[P_LH_WMASK]


class TageSCL:
    """TAGE-SC-L over the compiled kernels above.

    ``ghist`` mirrors the global outcome register as a Python int for the
    global perceptron; the kernels keep their own ring buffer of the same bits.
    """

    def __init__(self, cfg: TageConfig | None = None):
        cfg = cfg or TageConfig()
        cfg.validate()
        if not cfg.bimodal_log:
            raise ValueError("a runnable predictor needs a bimodal table")
        self.cfg = cfg
        n = self.n = cfg.num_tagged_tables
        cap = max([GLOBAL_CAPACITY, *cfg.hist_lengths, *cfg.sc_global_lengths])
        self.ghist = GlobalHistory(cap)

        P = np.zeros(_P_LEN, dtype=np.int64)
        sizes = [1 << lg for lg in cfg.log_entries]
        nl_loop = (1 << cfg.loop_log) if cfg.loop_log else 0
        ng, nl = len(cfg.sc_global_lengths), len(cfg.sc_local_lengths)
        ring = 1 << cap.bit_length()          # power of two above the capacity

        # section layout of the flat state array
        off = _HEADER
        sections: dict[str, tuple[int, int]] = {}

        def section(name: str, size: int) -> int:
            nonlocal off
            sections[name] = (off, size)
            off += size
            return sections[name][0]

        P[P_O_BIM] = section("bimodal", 1 << cfg.bimodal_log)
        T = np.zeros((n, 7), dtype=np.int64)
        for t, (lg, tw) in enumerate(zip(cfg.log_entries, cfg.tag_widths)):
            T[t] = (abs(lg - t) + 1, sizes[t] - 1, (1 << tw) - 1,
                    section(f"tagged{t}.ctr", sizes[t]), section(f"tagged{t}.tag", sizes[t]),
                    section(f"tagged{t}.u", sizes[t]), sizes[t])
        P[P_O_SCB] = section("sc.bias", (1 << cfg.sc_bias_log) if cfg.sc_bias_log else 0)
        P[P_O_SCG] = off
        for j in range(ng):
            section(f"sc.global{j}", 1 << cfg.sc_global_log)
        P[P_O_SCL] = off
        for j in range(nl):
            section(f"sc.local{j}", 1 << cfg.sc_local_log)
        P[P_O_LH] = section("sc.lhist", 1 << cfg.sc_lhist_log)
        P[P_O_LOOP] = section("loop", 7 * nl_loop)

        # folded histories: index folds, then tag folds, then SC global folds
        specs = [(L, lg) for L, lg in zip(cfg.hist_lengths, cfg.log_entries)]
        specs += [(L, tw) for L, tw in zip(cfg.hist_lengths, cfg.tag_widths)]
        specs += [(L, cfg.sc_global_log) for L in cfg.sc_global_lengths]
        F = np.array([(L - 1, L % w, w, (1 << w) - 1) for L, w in specs],
                     dtype=np.int64).reshape(-1, 4)
        P[P_O_FOLD] = section("folds", len(specs))
        P[P_O_RING] = section("ring", ring)
        self._sections = sections
        self.mem = np.zeros(off, dtype=np.int64)

        lh_width = max(cfg.sc_local_lengths, default=1)
        P[P_N] = n
        P[P_BMASK] = (1 << cfg.bimodal_log) - 1
        P[P_BMAX] = (1 << cfg.bimodal_bits) - 1
        P[P_BMID] = 1 << (cfg.bimodal_bits - 1)
        P[P_CMAX] = (1 << (cfg.ctr_bits - 1)) - 1
        P[P_CMIN] = -(1 << (cfg.ctr_bits - 1))
        P[P_UMAX] = (1 << cfg.u_bits) - 1
        P[P_UAMAX] = (1 << (cfg.use_alt_bits - 1)) - 1
        P[P_UAMIN] = -(1 << (cfg.use_alt_bits - 1))
        P[P_UPMASK] = (1 << cfg.u_reset_log) - 1
        P[P_MAXALLOC] = cfg.max_alloc
        P[P_SC_ON] = cfg.sc_enabled
        P[P_SC_BIAS] = cfg.sc_bias_log > 0
        P[P_SC_BMASK] = (1 << cfg.sc_bias_log) - 1
        P[P_NG] = ng
        P[P_SC_GMASK] = (1 << cfg.sc_global_log) - 1
        P[P_NL] = nl
        P[P_SC_LMASK] = (1 << cfg.sc_local_log) - 1
        P[P_SC_LLOG] = cfg.sc_local_log
        P[P_LH_MASK] = (1 << cfg.sc_lhist_log) - 1
        P[P_LH_WMASK] = (1 << lh_width) - 1
        P[P_SCMAX] = (1 << (cfg.sc_bits - 1)) - 1
        P[P_SCMIN] = -(1 << (cfg.sc_bits - 1))
        P[P_THRMAX] = (1 << cfg.sc_threshold_bits) - 1
        P[P_TCMAX] = (1 << (cfg.sc_tc_bits - 1)) - 1
        P[P_TCMIN] = -(1 << (cfg.sc_tc_bits - 1))
        P[P_LMASK] = nl_loop - 1
        P[P_LTMASK] = (1 << cfg.loop_tag_bits) - 1
        P[P_LITERMAX] = (1 << cfg.loop_iter_bits) - 1
        P[P_LCONFMAX] = (1 << cfg.loop_conf_bits) - 1
        P[P_LAGEMAX] = (1 << cfg.loop_age_bits) - 1
        P[P_LOOPLOG] = cfg.loop_log
        P[P_NLOOP] = nl_loop
        P[P_NF] = len(specs)
        P[P_RMASK] = ring - 1
        P[P_SB] = 2 * n + ng + nl
        self._P, self._T, self._F = P, T, F
        self._LL = np.array(cfg.sc_local_lengths or [1], dtype=np.int64)
        self._S = np.zeros(P[P_SB] + _S_LEN, dtype=np.int64)

        o = P[P_O_BIM]
        self.mem[o:o + (1 << cfg.bimodal_log)] = P[P_BMID] - 1
        o = P[P_O_LOOP] + L_DIR * nl_loop
        self.mem[o:o + nl_loop] = 1
        self.mem[M_SEED] = 0x2F6B3A1D
        self.mem[M_THR] = cfg.sc_threshold_init
        self._args = (self.mem, P, T, F, self._LL, self._S)
        self._last_pc: int | None = None

    # ------------------------------------------------------------- predict/update

    def predict(self, pc: int) -> TageOutcome:
        p = ((pc * 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF) >> 32
        out = _predict(*self._args, p)
        self._last_pc = pc
        return TageOutcome._make(out)

    def update(self, pc: int, taken: bool, suppressed: bool = False) -> None:
        if self._last_pc != pc:
            self.predict(pc)
        _update(self.mem, self._P, self._T, self._F, self._S, bool(taken), bool(suppressed))
        self.ghist.push(taken)
        self._last_pc = None

    # ------------------------------------------------------------------ inspection

    def _view(self, name: str) -> np.ndarray:
        o, size = self._sections[name]
        return self.mem[o:o + size]

    @property
    def bim(self) -> np.ndarray:
        return self._view("bimodal")

    @property
    def use_alt(self) -> int:
        return int(self.mem[M_USE_ALT])

    @property
    def sc_threshold(self) -> int:
        return int(self.mem[M_THR])

    @property
    def last_bimodal_index(self) -> int:
        """Bimodal slot touched by the most recent predict()."""
        return int(self._S[self._P[P_SB] + S_BI])

    def tables(self) -> dict[str, list[int]]:
        """Every trainable table as a plain list, keyed by name."""
        out = {"bimodal": self.bim.tolist()}
        for t in range(self.n):
            for part in ("ctr", "tag", "u"):
                out[f"tagged{t}.{part}"] = self._view(f"tagged{t}.{part}").tolist()
        out["misc"] = self.mem[[M_USE_ALT, M_TICK, M_SEED, M_THR, M_TC]].tolist()
        for name in self._sections:
            if name.startswith("sc.") or name == "loop":
                out[name] = self._view(name).tolist()
        return out

    def table_checksums(self) -> dict[str, int]:
        """64-bit digest of every trainable table (histories excluded)."""
        out = {}
        for name, values in self.tables().items():
            if name == "sc.lhist":
                continue
            h = hashlib.blake2b(np.asarray(values, dtype=np.int64).tobytes(), digest_size=8)
            out[name] = int.from_bytes(h.digest(), "little")
        return out

    def check_bounds(self) -> None:
        """Assert every counter sits inside its configured saturation range."""
        P = self._P

        def within(a, lo, hi):
            return a.size == 0 or (int(a.min()) >= lo and int(a.max()) <= hi)

        assert within(self.bim, 0, P[P_BMAX])
        for t in range(self.n):
            assert within(self._view(f"tagged{t}.ctr"), P[P_CMIN], P[P_CMAX])
            assert within(self._view(f"tagged{t}.u"), 0, P[P_UMAX])
        for name in self._sections:
            if name == "sc.bias" or name.startswith(("sc.global", "sc.local")):
                assert within(self._view(name), P[P_SCMIN], P[P_SCMAX])
        assert P[P_UAMIN] <= self.use_alt <= P[P_UAMAX]
        loop = self._view("loop").reshape(7, -1)
        assert within(loop[L_CONF], 0, P[P_LCONFMAX])
        assert within(loop[L_TRIP], 0, P[P_LITERMAX])
