"""Vectorized sampled verification of generated tables.

Recomputes, for sampled index slots, the full legal move list with child
values (own table for quiet moves, dependency tables for captures and
promotions) on compressed arrays. This is a separate code path from the
generator's broadcast sweeps, so propagation bugs cannot hide behind
their own arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry as G
from .encode import encoding
from .generate import _dep_map
from .geometry import BROKEN, FLIP_CODE, LOSS, WIN
from .probe import TablebaseSet
from .sig import MaterialSig


@dataclass
class SweepResult:
    idx: np.ndarray        # sampled slots (legal ones only)
    parent: np.ndarray     # stored value codes
    best: np.ndarray       # max over moves of flipped child code (0 = no moves)
    n: np.ndarray          # legal move count
    b: np.ndarray          # blunder count

    @property
    def nonterminal(self) -> np.ndarray:
        return self.n > 0

    def consistency_violations(self) -> int:
        nt = self.nonterminal
        return int(np.count_nonzero(self.best[nt] != self.parent[nt]))

    def blunder_bound_violations(self) -> int:
        nt = self.nonterminal
        return int(np.count_nonzero(self.b[nt] > self.n[nt] - 1))


def sample_legal_indices(tbs: TablebaseSet, sig: MaterialSig, count: int, rng) -> np.ndarray:
    """Uniform sample (with replacement) of legal slots of the signature."""
    tb = tbs.get(sig)
    values = tb.values()
    legal = np.nonzero(values != BROKEN)[0]
    if legal.size == 0:
        return np.empty(0, dtype=np.int64)
    return legal[rng.integers(0, legal.size, size=count)].astype(np.int64)


def sweep(tbs: TablebaseSet, sig: MaterialSig, idx: np.ndarray) -> SweepResult:
    """Recompute move values for the sampled slots."""
    enc = encoding(sig)
    own = tbs.get(sig).values()
    idx = idx.astype(np.int64)
    parent = own[idx]
    keep = parent != BROKEN
    idx, parent = idx[keep], parent[keep]
    best = np.zeros(idx.shape, dtype=np.uint8)
    n = np.zeros(idx.shape, dtype=np.int32)
    b = np.zeros(idx.shape, dtype=np.int32)

    stm = (idx >> enc.stm_shift).astype(np.int8)
    sqs = [(idx >> shift) & 63 for shift in enc.shifts]
    occ = np.zeros(idx.shape, dtype=np.uint64)
    for sq in sqs:
        occ |= G.SHIFT1[sq]

    for s in (0, 1):
        group = np.nonzero(stm == s)[0]
        if group.size == 0:
            continue
        mover_white = s == 0
        gsqs = [sq[group] for sq in sqs]
        gocc = occ[group]
        gidx = idx[group]
        gparent = parent[group]
        gbest = best[group]
        gn = n[group]
        gb = b[group]

        def fold(ok, child_codes):
            nonlocal gbest, gn, gb
            v = FLIP_CODE[child_codes]
            v = np.where(ok, v, 0).astype(np.uint8)
            gbest = np.maximum(gbest, v)
            gn += ok
            gb += ok & (v > 0) & (v < gparent)

        for j, ps in enumerate(enc.pieces):
            if ps.white != mover_white:
                continue
            f = gsqs[j]
            victims = [
                u for u, us in enumerate(enc.pieces) if us.white != ps.white and us.kind != "K"
            ]

            def geo(slot):
                to = slot.to[f].astype(np.int64)
                ok = to >= 0
                toz = np.where(ok, to, 0)
                ok &= (slot.path[f] & gocc) == 0
                return to, toz, ok

            def quiet(slot, double=False):
                to, toz, ok = geo(slot)
                ok &= ((gocc >> toz.astype(np.uint64)) & np.uint64(1)) == 0
                child = gidx + ((to - f) << enc.shifts[j]) + np.int64(1 - 2 * s) * enc.half
                child = np.where(ok, child, 0)
                codes = own[child].copy()
                if double:
                    # a double push may hand the opponent an en-passant
                    # capture: the edge value is the best of staying in the
                    # stored child and taking en passant
                    passed = np.where(ok, toz + (-8 if ps.white else 8), 0)
                    for u, us in enumerate(enc.pieces):
                        if us.kind != "P" or us.white == ps.white:
                            continue
                        adj = (np.abs((toz & 7) - (gsqs[u] & 7)) == 1) & (
                            (toz >> 3) == (gsqs[u] >> 3)
                        )
                        take = ok & adj
                        if not take.any():
                            continue
                        dm = _dep_map(sig, u, j, None)
                        dep_tb = tbs.get(dm.dep_name)
                        ep_child = dm.child_index(gsqs, passed, 1 - s)
                        ep_codes = dep_tb.values_at(np.where(take, ep_child, 0))
                        ep_opp = FLIP_CODE[ep_codes]
                        lift = (
                            take
                            & (codes != BROKEN)
                            & (ep_codes != BROKEN)
                            & (ep_opp > codes)
                        )
                        codes[lift] = ep_opp[lift]
                fold(ok & (codes != BROKEN), codes)

            def dep(slot, victim, promo):
                to, toz, ok = geo(slot)
                if victim is None:
                    ok &= ((gocc >> toz.astype(np.uint64)) & np.uint64(1)) == 0
                else:
                    ok &= to == gsqs[victim]
                if not ok.any():
                    return
                dm = _dep_map(sig, j, victim, promo)
                dep_tb = tbs.get(dm.dep_name)
                child = dm.child_index(gsqs, toz, s)
                codes = dep_tb.values_at(np.where(ok, child, 0))
                fold(ok & (codes != BROKEN), codes)

            if ps.kind == "P":
                groups = G.WHITE_PAWN_SLOTS if ps.white else G.BLACK_PAWN_SLOTS
                for slot in groups["quiet"]:
                    quiet(slot)
                for slot in groups["double"]:
                    quiet(slot, double=True)
                for slot in groups["promo"]:
                    for kind in "QRBN":
                        dep(slot, None, kind)
                for slot in groups["cap"]:
                    for v in victims:
                        dep(slot, v, None)
                for slot in groups["promo_cap"]:
                    for v in victims:
                        for kind in "QRBN":
                            dep(slot, v, kind)
            else:
                for slot in G.PIECE_SLOTS[ps.kind]:
                    quiet(slot)
                    for v in victims:
                        dep(slot, v, None)

        best[group] = gbest
        n[group] = gn
        b[group] = gb

    return SweepResult(idx=idx, parent=parent, best=best, n=n, b=b)


def check_signature(
    tbs: TablebaseSet, sig: MaterialSig, samples: int, rng
) -> SweepResult:
    idx = sample_legal_indices(tbs, sig, samples, rng)
    return sweep(tbs, sig, idx)
