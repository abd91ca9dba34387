"""Retrograde tablebase generation, vectorized with numpy.

The state space of a signature is swept with broadcast tables (one slot =
one geometric move pattern), so no Python loop ever runs over the 2*64^m
square assignments. The induction is the standard one:

  * checkmates start as Loss with dtm 0; stalemates and insufficient
    material as Draw,
  * a position becomes Win(d+1) once a move reaches an opponent Loss(d),
  * a position becomes Loss(d+1) once all its moves are known to reach
    opponent Wins, the slowest of which has dtm d,
  * everything still unresolved at the fixpoint is a Draw.

Captures and promotions leave the signature and are folded in from
dependency tables, scheduled at their dtm so parent distances stay exact.
Double pushes that allow en passant get a per-edge value floor: the stored
child value ignores the en-passant right, so the edge value is
max(child value, best en-passant outcome for the opponent).
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from . import geometry as G
from .encode import Encoding, encoding
from .geometry import BROKEN, DRAW, FLIP_CODE, LOSS, UNKNOWN, WIN, Slot
from .sig import MaterialSig, dependencies
from .store import Tablebase, pack_values

INF_DUE = np.int16(32000)


class GenerationError(ValueError):
    pass


class MissingDependencyError(GenerationError):
    def __init__(self, name: str):
        super().__init__(f"missing dependency tablebase: {name}")
        self.name = name


@lru_cache(maxsize=4)
def _local_index(size: int, use64: bool) -> np.ndarray:
    return np.arange(size, dtype=np.int64 if use64 else np.int32)


@dataclass
class _DepMap:
    """How one (mover, victim?, promotion?) move maps into a dependency."""

    dep_name: str
    flipped: bool
    stm_shift: int
    terms: tuple[tuple[int, int], ...]  # (parent piece index, dep shift); mover excluded
    mover_shift: int                    # dep shift of the moved piece

    def child_index(self, squares: list, to_sq, parent_stm: int) -> np.ndarray:
        flip = 56 if self.flipped else 0
        child_bit = parent_stm if self.flipped else 1 - parent_stm
        idx = np.int64(child_bit) << self.stm_shift
        idx = idx + ((np.asarray(to_sq, dtype=np.int64) ^ flip) << self.mover_shift)
        for piece_l, shift in self.terms:
            idx = idx + ((np.asarray(squares[piece_l], dtype=np.int64) ^ flip) << shift)
        return idx


@lru_cache(maxsize=None)
def _dep_map(sig: MaterialSig, mover: int, victim: Optional[int], promo: Optional[str]) -> _DepMap:
    enc = encoding(sig)
    white_kinds, black_kinds = [], []
    entries = []  # (parent piece, color, kind) in dep-assignment order
    for j, slot in enumerate(enc.pieces):
        if j == victim:
            continue
        kind = promo if (j == mover and promo) else slot.kind
        entries.append((j, slot.white, kind))
        (white_kinds if slot.white else black_kinds).append(kind)
    dep_sig, flipped = MaterialSig.normalize(
        [k for k in white_kinds if k != "K"], [k for k in black_kinds if k != "K"]
    )
    dep_enc = encoding(dep_sig)
    remaining = list(range(dep_enc.m))
    terms = []
    mover_shift = None
    for j, white, kind in entries:
        dep_color = (not white) if flipped else white
        for slot_i in remaining:
            ds = dep_enc.pieces[slot_i]
            if ds.white == dep_color and ds.kind == kind:
                remaining.remove(slot_i)
                if j == mover:
                    mover_shift = dep_enc.shifts[slot_i]
                else:
                    terms.append((j, dep_enc.shifts[slot_i]))
                break
        else:
            raise GenerationError(f"cannot map child into {dep_sig.name}")
    return _DepMap(dep_sig.name, flipped, dep_enc.stm_shift, tuple(terms), mover_shift)


class _Space:
    """One (side-to-move, optionally fixed white-king square) slab."""

    def __init__(self, enc: Encoding, stm: int, wk: Optional[int] = None):
        self.enc = enc
        self.stm = stm
        self.fixed = {} if wk is None else {0: wk}
        self.axes = [j for j in range(enc.m) if j not in self.fixed]
        self.shape = tuple(64 for _ in self.axes)
        self.size = 64 ** len(self.axes)
        self.base = stm * enc.half + (0 if wk is None else wk << enc.shifts[0])
        self.use64 = enc.size > (1 << 31)

    def local(self) -> np.ndarray:
        return _local_index(self.size, self.use64).reshape(self.shape)

    def axpos(self, piece: int) -> int:
        return self.axes.index(piece)

    def t1(self, vec: np.ndarray, piece: int):
        if piece in self.fixed:
            return vec[self.fixed[piece]]
        shape = [1] * len(self.axes)
        shape[self.axpos(piece)] = 64
        return vec.reshape(shape)

    def t2(self, tab: np.ndarray, a: int, b: int):
        if a in self.fixed and b in self.fixed:
            return tab[self.fixed[a], self.fixed[b]]
        if a in self.fixed:
            return self.t1(tab[self.fixed[a], :], b)
        if b in self.fixed:
            return self.t1(tab[:, self.fixed[b]], a)
        pa, pb = self.axpos(a), self.axpos(b)
        t = tab.T if pa > pb else tab
        shape = [1] * len(self.axes)
        shape[min(pa, pb)] = 64
        shape[max(pa, pb)] = 64
        return t.reshape(shape)

    def t3(self, tab: np.ndarray, a: int, b: int, c: int):
        pieces = [a, b, c]
        fixed = [p for p in pieces if p in self.fixed]
        if fixed:
            i = pieces.index(fixed[0])
            sub = tab[(slice(None),) * i + (self.fixed[fixed[0]],)]
            rest = [p for p in pieces if p not in self.fixed]
            return self.t2(sub, rest[0], rest[1])
        pos = [self.axpos(p) for p in pieces]
        order = tuple(np.argsort(pos))
        t = np.transpose(tab, order)
        shape = [1] * len(self.axes)
        for p in pos:
            shape[p] = 64
        return t.reshape(shape)

    def flat(self) -> slice:
        return slice(self.base, self.base + self.size)


@dataclass
class _EpEdge:
    parent: int
    due: int  # round at which the edge's win is scheduled (from the ep capture)
    fired: bool = False


class _Generator:
    def __init__(self, sig: MaterialSig, deps: dict[str, Tablebase], with_dtm: bool = True):
        self.sig = sig
        self.enc = encoding(sig)
        self.with_dtm = with_dtm
        need = {d.name for d in dependencies(sig)}
        for name in sorted(need):
            if name not in deps:
                raise MissingDependencyError(name)
        self.deps = deps
        self._dep_values: dict[str, np.ndarray] = {}
        self._dep_dtm: dict[str, np.ndarray] = {}
        enc = self.enc
        self.val = np.full(enc.size, BROKEN, dtype=np.uint8)
        self.dtm = np.full(enc.size, -1, dtype=np.int16)
        self.cnt = np.zeros(enc.size, dtype=np.int16)
        self.win_due = np.full(enc.size, INF_DUE, dtype=np.int16)
        self.in_check = np.zeros(enc.size, dtype=bool)
        self.init_due: dict[int, list[np.ndarray]] = {}
        self.dep_buckets: dict[int, list[np.ndarray]] = {}
        # en-passant floored edges, keyed by the pusher pawn's piece index
        self.ep_block: dict[int, np.ndarray] = {}   # q with floor >= Draw (sorted)
        self.ep_win: dict[int, np.ndarray] = {}     # q with floor == Win (sorted)
        self.ep_edges: dict[tuple[int, int], _EpEdge] = {}
        self.ep_buckets: dict[int, list[tuple[int, int]]] = {}
        self.stats: dict = {}

    def _dep_arrays(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        if name not in self._dep_values:
            tb = self.deps[name]
            self._dep_values[name] = tb.values()
            if tb.dtm is None:
                raise GenerationError(f"dependency {name} lacks a dtm sidecar")
            self._dep_dtm[name] = tb.dtm
        return self._dep_values[name], self._dep_dtm[name]

    def _spaces(self, stm: int) -> list[_Space]:
        if self.enc.m <= 4:
            return [_Space(self.enc, stm)]
        return [_Space(self.enc, stm, wk) for wk in range(64)]

    # -- legality ---------------------------------------------------------

    def _attacks_on(self, sp: _Space, king_axis: int, by_white: bool) -> np.ndarray:
        enc = self.enc
        atk = np.zeros(sp.shape, dtype=bool)
        for j, ps in enumerate(enc.pieces):
            if ps.white != by_white or j == king_axis or ps.kind == "K":
                continue
            if ps.kind == "P":
                atk |= sp.t2(G.PAWN_PSEUDO[ps.white], j, king_axis)
                continue
            pseudo = sp.t2(G.PSEUDO[ps.kind], j, king_axis)
            if ps.kind in "RBQ":
                blocked = np.zeros(sp.shape, dtype=bool)
                for l in range(enc.m):
                    if l != j and l != king_axis:
                        blocked |= sp.t3(G.BETWEEN3, j, king_axis, l)
                atk |= pseudo & ~blocked
            else:
                atk |= pseudo
        return atk

    def _legality(self) -> None:
        enc = self.enc
        neq = ~np.eye(64, dtype=bool)
        for stm in (0, 1):
            for sp in self._spaces(stm):
                ok = np.ones(sp.shape, dtype=bool)
                for a in range(enc.m):
                    for b in range(a + 1, enc.m):
                        ok &= sp.t2(neq, a, b)
                for j, ps in enumerate(enc.pieces):
                    if ps.kind == "P":
                        ok &= sp.t1(G.PAWN_RANK_OK, j)
                ok &= ~sp.t2(G.ADJ_KINGS, 0, 1)
                atk_wk = self._attacks_on(sp, 0, by_white=False)
                atk_bk = self._attacks_on(sp, 1, by_white=True)
                legal = ok & ~(atk_bk if stm == 0 else atk_wk)
                self.val[sp.flat()] = np.where(legal.reshape(-1), UNKNOWN, BROKEN)
                mover_checked = (atk_wk if stm == 0 else atk_bk) & legal
                self.in_check[sp.flat()] = mover_checked.reshape(-1)

    # -- forward init sweep --------------------------------------------------

    def _init_counts(self) -> None:
        enc = self.enc
        for stm in (0, 1):
            mover_white = stm == 0
            for sp in self._spaces(stm):
                legal = (self.val[sp.flat()] != BROKEN).reshape(sp.shape)
                cnt_slab = np.zeros(sp.shape, dtype=np.int16)
                for j, ps in enumerate(enc.pieces):
                    if ps.white != mover_white:
                        continue
                    victims = [
                        v
                        for v, vs in enumerate(enc.pieces)
                        if vs.white != ps.white and vs.kind != "K"
                    ]
                    if ps.kind == "P":
                        groups = G.WHITE_PAWN_SLOTS if ps.white else G.BLACK_PAWN_SLOTS
                        for slot in groups["quiet"] + groups["double"]:
                            self._quiet_slot(sp, j, slot, legal, cnt_slab)
                        for slot in groups["promo"]:
                            self._promo_push(sp, j, slot, legal, cnt_slab)
                    else:
                        for slot in G.PIECE_SLOTS[ps.kind]:
                            self._quiet_slot(sp, j, slot, legal, cnt_slab)
                    for v in victims:
                        self._capture_pair(sp, j, v, legal, cnt_slab)
                self.cnt[sp.flat()] = cnt_slab.reshape(-1)

    def _quiet_slot(self, sp: _Space, j: int, slot: Slot, legal, cnt_slab) -> None:
        """Non-capturing move within the signature."""
        enc = self.enc
        if j in sp.fixed:
            if slot.to[sp.fixed[j]] < 0:
                return
            ok = legal.copy()
        else:
            ok = sp.t1(slot.valid, j) & legal
        for l in range(enc.m):
            if l != j:
                ok &= ~sp.t2(slot.obst, j, l)  # destination empty, path clear
        # child slot in the opposite half; int32 math while sizes allow
        dt = np.int64 if sp.use64 else np.int32
        child_stm_base = dt((1 - sp.stm) * enc.half + (sp.base - sp.stm * enc.half))
        if j in sp.fixed:
            f = sp.fixed[j]
            move = dt((int(slot.to[f]) - f) << enc.shifts[j])
            child = sp.local() + (child_stm_base + move)
        else:
            delta = sp.t1((slot.delta << enc.shifts[j]).astype(dt), j)
            child = sp.local() + delta
            child += child_stm_base
        ok &= self.val[child] != BROKEN
        cnt_slab += ok

    def _promo_push(self, sp: _Space, j: int, slot: Slot, legal, cnt_slab) -> None:
        """Non-capturing promotion: four dependency edges per geometric move."""
        enc = self.enc
        ok = sp.t1(slot.valid, j) & legal
        for l in range(enc.m):
            if l != j:
                ok &= ~sp.t2(slot.eq, j, l)
        hits = np.nonzero(ok)
        if hits[0].size == 0:
            return
        to_sq = slot.to[hits[sp.axpos(j)]].astype(np.int64)
        self._fold_dep_edges(sp, j, None, hits, to_sq, promos="QRBN", cnt_slab=cnt_slab)

    def _capture_pair(self, sp: _Space, j: int, v: int, legal, cnt_slab) -> None:
        """All captures of victim ``v`` by piece ``j`` in one pass: the
        destination square is the victim's own square."""
        enc = self.enc
        ps = enc.pieces[j]
        if ps.kind == "P":
            pseudo = G.PAWN_PSEUDO[ps.white]
        else:
            pseudo = G.PSEUDO[ps.kind]
        ok = sp.t2(pseudo, j, v) & legal
        if ps.kind in "RBQ":
            for l in range(enc.m):
                if l != j and l != v:
                    ok &= ~sp.t3(G.BETWEEN3, j, v, l)
        hits = np.nonzero(ok)
        if hits[0].size == 0:
            return
        to_sq = (
            np.full(hits[0].shape, sp.fixed[v], dtype=np.int64)
            if v in sp.fixed
            else hits[sp.axpos(v)].astype(np.int64)
        )
        if ps.kind == "P":
            promo_hit = G.LAST_RANK[ps.white][to_sq]
            plain = tuple(h[~promo_hit] for h in hits)
            promo = tuple(h[promo_hit] for h in hits)
            if plain[0].size:
                self._fold_dep_edges(sp, j, v, plain, to_sq[~promo_hit], None, cnt_slab)
            if promo[0].size:
                self._fold_dep_edges(sp, j, v, promo, to_sq[promo_hit], "QRBN", cnt_slab)
        else:
            self._fold_dep_edges(sp, j, v, hits, to_sq, None, cnt_slab)

    def _fold_dep_edges(self, sp: _Space, j, victim, hits, to_sq, promos, cnt_slab) -> None:
        enc = self.enc
        squares: list = [
            sp.fixed[p] if p in sp.fixed else hits[sp.axpos(p)].astype(np.int64)
            for p in range(enc.m)
        ]
        parent_all = sp.base + np.ravel_multi_index(hits, sp.shape).astype(np.int64)
        for promo in promos or (None,):
            dm = _dep_map(self.sig, j, victim, promo)
            dep_val, dep_dtm = self._dep_arrays(dm.dep_name)
            child = dm.child_index(squares, to_sq, sp.stm)
            cvals = dep_val[child]
            ok_child = cvals != BROKEN
            if not ok_child.any():
                continue
            np.add.at(cnt_slab, tuple(h[ok_child] for h in hits), 1)
            parent = parent_all[ok_child]
            cv = cvals[ok_child]
            ch = child[ok_child]
            is_loss = cv == LOSS
            if is_loss.any():
                due = dep_dtm[ch[is_loss]] + np.int16(1)
                p = parent[is_loss]
                np.minimum.at(self.win_due, p, due)
                for d in np.unique(due):
                    self.init_due.setdefault(int(d), []).append(p[due == d])
            is_win = cv == WIN
            if is_win.any():
                d = dep_dtm[ch[is_win]]
                p = parent[is_win]
                for round_ in np.unique(d):
                    self.dep_buckets.setdefault(int(round_), []).append(p[d == round_])

    # -- en passant floors ------------------------------------------------------

    def _ep_floors(self) -> None:
        enc = self.enc
        pushers_by_color = {
            True: [j for j, ps in enumerate(enc.pieces) if ps.kind == "P" and ps.white],
            False: [j for j, ps in enumerate(enc.pieces) if ps.kind == "P" and not ps.white],
        }
        if not (pushers_by_color[True] and pushers_by_color[False]):
            return
        # floor[(q, jp)] accumulated over capturers
        floors: dict[tuple[int, int], list] = {}
        for pusher_white in (True, False):
            rank = 3 if pusher_white else 4
            stm_q = 1 if pusher_white else 0
            back = -8 if pusher_white else 8
            adj = np.zeros((64, 64), dtype=bool)
            for a in range(rank * 8, rank * 8 + 8):
                for db in (-1, 1):
                    bf = (a & 7) + db
                    if 0 <= bf < 8:
                        adj[a, rank * 8 + bf] = True
            for jp in pushers_by_color[pusher_white]:
                for jc in pushers_by_color[not pusher_white]:
                    for sp in self._spaces(stm_q):
                        legal = (self.val[sp.flat()] != BROKEN).reshape(sp.shape)
                        mask = sp.t2(adj, jp, jc) & legal
                        hits = np.nonzero(mask)
                        if hits[0].size == 0:
                            continue
                        squares: list = [
                            sp.fixed[p] if p in sp.fixed else hits[sp.axpos(p)].astype(np.int64)
                            for p in range(enc.m)
                        ]
                        t = np.asarray(squares[jp])
                        f_sq = t + 2 * back
                        pass_sq = t + back
                        occ = np.zeros(t.shape, dtype=np.uint64)
                        for p in range(enc.m):
                            occ |= G.SHIFT1[np.asarray(squares[p])]
                        reach = (((occ >> f_sq.astype(np.uint64)) & np.uint64(1)) == 0) & (
                            ((occ >> pass_sq.astype(np.uint64)) & np.uint64(1)) == 0
                        )
                        if not reach.any():
                            continue
                        dm = _dep_map(self.sig, jc, jp, None)
                        dep_val, dep_dtm = self._dep_arrays(dm.dep_name)
                        child = dm.child_index(squares, pass_sq, sp.stm)
                        cvals = dep_val[child]
                        ok = reach & (cvals != BROKEN)
                        if not ok.any():
                            continue
                        q_idx = sp.base + np.ravel_multi_index(hits, sp.shape).astype(np.int64)
                        p_idx = (
                            q_idx
                            + ((f_sq - t) << enc.shifts[jp])
                            + np.int64(1 - 2 * sp.stm) * enc.half
                        )
                        flips = FLIP_CODE[cvals]
                        dues = np.where(cvals == LOSS, dep_dtm[child] + 1, 0)
                        for i in np.nonzero(ok)[0]:
                            key = (int(q_idx[i]), jp)
                            v = int(flips[i])
                            entry = floors.get(key)
                            if entry is None:
                                floors[key] = [v, int(p_idx[i]), int(dues[i])]
                            else:
                                if v > entry[0]:
                                    entry[0] = v
                                    entry[2] = int(dues[i])
                                elif v == entry[0] == WIN:
                                    entry[2] = min(entry[2], int(dues[i]))
        if not floors:
            return
        by_jp_block: dict[int, list[int]] = {}
        by_jp_win: dict[int, list[int]] = {}
        for (q, jp), (v, parent, due) in floors.items():
            if v >= DRAW:
                by_jp_block.setdefault(jp, []).append(q)
            if v == WIN:
                by_jp_win.setdefault(jp, []).append(q)
                if self.val[parent] != BROKEN:
                    self.ep_edges[(q, jp)] = _EpEdge(parent=parent, due=due)
                    self.ep_buckets.setdefault(due, []).append((q, jp))
        self.ep_block = {jp: np.array(sorted(qs), dtype=np.int64) for jp, qs in by_jp_block.items()}
        self.ep_win = {jp: np.array(sorted(qs), dtype=np.int64) for jp, qs in by_jp_win.items()}

    @staticmethod
    def _in_sorted(values: np.ndarray, sorted_arr: Optional[np.ndarray]) -> np.ndarray:
        if sorted_arr is None or sorted_arr.size == 0 or values.size == 0:
            return np.zeros(values.shape, dtype=bool)
        pos = np.searchsorted(sorted_arr, values)
        pos = np.minimum(pos, sorted_arr.size - 1)
        return sorted_arr[pos] == values

    # -- terminals -------------------------------------------------------------

    def _terminals(self) -> np.ndarray:
        legal = self.val != BROKEN
        no_moves = legal & (self.cnt == 0)
        mates = no_moves & self.in_check
        stales = no_moves & ~self.in_check
        self.val[mates] = LOSS
        self.dtm[mates] = 0
        self.val[stales] = DRAW
        return np.nonzero(mates)[0].astype(np.int64)

    # -- reverse sweeps -----------------------------------------------------------

    def _reverse(self, wave: np.ndarray, phase: str, round_: int) -> list[np.ndarray]:
        """Predecessor updates for freshly resolved ``wave`` positions.

        phase "loss": parents gained a winning move -> schedule win_due.
        phase "win": parents lost a potentially-non-losing move -> the
        caller decrements cnt with the returned parent arrays.
        """
        enc = self.enc
        out: list[np.ndarray] = []
        idx_t = np.int64 if enc.size > (1 << 31) else np.int32
        stm_bits = (wave >> enc.stm_shift).astype(np.int8)
        for s in (0, 1):
            qs = wave[stm_bits == s].astype(idx_t)
            if qs.size == 0:
                continue
            mover_white = s == 1  # side that just moved into q
            occ = np.zeros(qs.shape, dtype=np.uint64)
            sqs = []
            for shift in enc.shifts:
                sq = (qs >> shift) & 63
                sqs.append(sq)
                occ |= G.SHIFT1[sq]
            stm_flip = idx_t((1 - 2 * s) * enc.half)
            for j, ps in enumerate(enc.pieces):
                if ps.white != mover_white:
                    continue
                t = sqs[j]
                if ps.kind == "P":
                    slots = [
                        (G.pawn_rev_quiet(ps.white), False),
                        (G.pawn_rev_double(ps.white), True),
                    ]
                else:
                    slots = [(sl, False) for sl in G.PIECE_SLOTS[ps.kind]]
                for slot, is_double in slots:
                    f = slot.to[t].astype(idx_t)
                    ok = f >= 0
                    fz = np.where(ok, f, 0).astype(np.uint64)
                    ok &= ((occ >> fz) & np.uint64(1)) == 0
                    if slot.has_path:
                        ok &= (slot.path[t] & occ) == 0
                    if is_double:
                        blockers = self.ep_block.get(j) if phase == "loss" else self.ep_win.get(j)
                        if blockers is not None:
                            ok &= ~self._in_sorted(qs, blockers)
                    if not ok.any():
                        continue
                    # updates on slots of broken parents are harmless: they
                    # never enter the resolution candidate filters
                    p = qs[ok] + ((f[ok] - t[ok]) << enc.shifts[j]) + stm_flip
                    out.append(p)
        if phase == "loss":
            due = np.int16(round_ + 1)
            for p in out:
                self.win_due[p] = np.minimum(self.win_due[p], due)
        return out

    # -- main loop ----------------------------------------------------------------

    def _apply_decrements(self, touched: list[np.ndarray], w: int) -> list[np.ndarray]:
        """Subtract per-parent edge counts; resolve and propagate new losses."""
        if not touched:
            return []
        enc = self.enc
        allp = np.concatenate(touched)
        if enc.size <= (1 << 28):
            counts = np.bincount(allp, minlength=enc.size)
            uniq = np.nonzero(counts)[0]
            self.cnt[uniq] -= counts[uniq].astype(np.int16)
        else:
            uniq, c = np.unique(allp, return_counts=True)
            self.cnt[uniq] -= c.astype(np.int16)
        new_loss = uniq[(self.val[uniq] == UNKNOWN) & (self.cnt[uniq] <= 0)]
        if new_loss.size == 0:
            return []
        new_loss = new_loss.astype(np.int64)
        self.val[new_loss] = LOSS
        self.dtm[new_loss] = w + 1
        return self._reverse(new_loss, "loss", w + 1)

    def run(self) -> Tablebase:
        t0 = time.time()
        self._legality()
        if self.sig.is_insufficient:
            self.val[self.val != BROKEN] = DRAW
            return self._finish(t0)

        self._init_counts()
        self._ep_floors()
        mates = self._terminals()

        win_cands: list[np.ndarray] = []
        if mates.size:
            win_cands = self._reverse(mates, "loss", 0)
        w = 1
        while True:
            has_pending = (
                bool(win_cands)
                or any(r >= w for r in self.init_due)
                or any(r >= w for r in self.dep_buckets)
                or any(r >= w for r in self.ep_buckets)
            )
            if not has_pending:
                break
            cands = win_cands + self.init_due.pop(w, [])
            win_cands = []
            new_wins = np.empty(0, dtype=np.int64)
            if cands:
                c = np.concatenate(cands)
                # filter before dedup: most candidate edges fail, and
                # sorting the survivors is far cheaper
                c = c[(self.val[c] == UNKNOWN) & (self.win_due[c] == w)]
                if c.size:
                    new_wins = np.unique(c)
            if new_wins.size:
                self.val[new_wins] = WIN
                self.dtm[new_wins] = w

            touched: list[np.ndarray] = []
            if new_wins.size:
                touched += self._reverse(new_wins, "win", w)
                # floored edges whose stored child just became a win fire now
                if self.ep_edges:
                    for jp, arr in self.ep_win.items():
                        hit = self._in_sorted(new_wins, arr)
                        for q in new_wins[hit]:
                            edge = self.ep_edges.get((int(q), jp))
                            if edge is not None and not edge.fired:
                                edge.fired = True
                                touched.append(np.array([edge.parent], dtype=np.int64))
            for p in self.dep_buckets.pop(w, []):
                touched.append(p)
            for key in self.ep_buckets.pop(w, []):
                edge = self.ep_edges[key]
                if not edge.fired:
                    edge.fired = True
                    touched.append(np.array([edge.parent], dtype=np.int64))
            win_cands = self._apply_decrements(touched, w)
            w += 2

        self.val[self.val == UNKNOWN] = DRAW
        return self._finish(t0)

    def _finish(self, t0: float) -> Tablebase:
        tb = Tablebase(
            sig=self.sig,
            packed=pack_values(self.val),
            count=self.enc.size,
            dtm=self.dtm if self.with_dtm else None,
        )
        tb._values = self.val
        self.stats.update(
            {
                "seconds": round(time.time() - t0, 3),
                "max_dtm": int(self.dtm.max(initial=-1)),
            }
        )
        tb.stats.update(self.stats)
        return tb


def generate(sig: MaterialSig, deps: dict[str, Tablebase], with_dtm: bool = True) -> Tablebase:
    """Build the tablebase for ``sig`` from its dependency tables."""
    return _Generator(sig, deps, with_dtm=with_dtm).run()
