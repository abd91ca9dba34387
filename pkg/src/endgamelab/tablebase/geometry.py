"""Static numpy move-geometry tables for the vectorized tablebase engine.

A "slot" is one geometric move pattern: for every from-square it gives at
most one target square (-1 when off-board) plus the bitmask of squares
strictly between, which must be empty for sliders. Slider slots are
enumerated per (direction, distance) pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_KING_OFFS = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)]
_KNIGHT_OFFS = [(1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2)]
_ROOK_DIRS = [(1, 0), (-1, 0), (0, 1), (0, -1)]
_BISHOP_DIRS = [(1, 1), (1, -1), (-1, 1), (-1, -1)]


@dataclass(frozen=True)
class Slot:
    to: np.ndarray        # int16[64], target square or -1
    path: np.ndarray      # uint64[64], squares strictly between
    # static [64, 64] helper tables derived from ``to``:
    eq: np.ndarray        # bool[f, s]: to[f] == s
    pathblk: np.ndarray   # bool[f, s]: s lies strictly between f and to[f]
    obst: np.ndarray      # eq | pathblk: s obstructs a quiet move from f
    delta: np.ndarray     # int64[64]: to[f] - f (0 when invalid)
    has_path: bool        # any nonzero between-mask
    valid: np.ndarray     # bool[64]: to[f] >= 0


def _make_slot(pairs: dict[int, tuple[int, int]]) -> Slot:
    """pairs: from_sq -> (to_sq, path_mask)."""
    to = np.full(64, -1, dtype=np.int16)
    path = np.zeros(64, dtype=np.uint64)
    for f, (t, mask) in pairs.items():
        to[f] = t
        path[f] = mask
    sq = np.arange(64)
    eq = to[:, None] == sq[None, :]
    pathblk = ((path[:, None] >> sq[None, :].astype(np.uint64)) & np.uint64(1)).astype(bool)
    delta = np.where(to >= 0, to.astype(np.int64) - sq, 0)
    return Slot(
        to=to,
        path=path,
        eq=eq,
        pathblk=pathblk,
        obst=eq | pathblk,
        delta=delta,
        has_path=bool(path.any()),
        valid=to >= 0,
    )


def _step_slots(offsets) -> list[Slot]:
    slots = []
    for df, dr in offsets:
        pairs = {}
        for f in range(64):
            nf, nr = (f & 7) + df, (f >> 3) + dr
            if 0 <= nf < 8 and 0 <= nr < 8:
                pairs[f] = (nr * 8 + nf, 0)
        slots.append(_make_slot(pairs))
    return slots


def _slide_slots(dirs) -> list[Slot]:
    slots = []
    for df, dr in dirs:
        for dist in range(1, 8):
            pairs = {}
            for f in range(64):
                nf, nr = (f & 7) + df * dist, (f >> 3) + dr * dist
                if not (0 <= nf < 8 and 0 <= nr < 8):
                    continue
                mask = 0
                for d in range(1, dist):
                    mask |= 1 << ((f >> 3) + dr * d) * 8 + ((f & 7) + df * d)
                pairs[f] = (nr * 8 + nf, mask)
            if pairs:
                slots.append(_make_slot(pairs))
    return slots


def _pawn_slot(white: bool, df: int, dist: int, ranks: range) -> Slot:
    """Pawn slot: forward direction ``dist`` ranks, file offset ``df``."""
    dr = dist if white else -dist
    pairs = {}
    for f in range(64):
        if (f >> 3) not in ranks:
            continue
        nf, nr = (f & 7) + df, (f >> 3) + dr
        if not (0 <= nf < 8 and 0 <= nr < 8):
            continue
        mask = 0
        if dist == 2:
            mask = 1 << (f + (8 if white else -8))
        pairs[f] = (nr * 8 + nf, mask)
    return _make_slot(pairs)


KING_SLOTS = _step_slots(_KING_OFFS)
KNIGHT_SLOTS = _step_slots(_KNIGHT_OFFS)
ROOK_SLOTS = _slide_slots(_ROOK_DIRS)
BISHOP_SLOTS = _slide_slots(_BISHOP_DIRS)
QUEEN_SLOTS = _slide_slots(_ROOK_DIRS + _BISHOP_DIRS)

PIECE_SLOTS = {"K": KING_SLOTS, "N": KNIGHT_SLOTS, "R": ROOK_SLOTS, "B": BISHOP_SLOTS, "Q": QUEEN_SLOTS}


def pawn_slots(white: bool) -> dict[str, list[Slot]]:
    """Pawn slot groups keyed by move flavor.

    quiet: single pushes that stay in-signature; double: the two-square
    push; promo: pushes onto the last rank; cap/promo_cap: diagonal
    captures, split the same way. White moves up; ranks are 0-based.
    """
    mid = range(1, 6) if white else range(2, 7)
    start = range(1, 2) if white else range(6, 7)
    last = range(6, 7) if white else range(1, 2)
    return {
        "quiet": [_pawn_slot(white, 0, 1, mid)],
        "double": [_pawn_slot(white, 0, 2, start)],
        "promo": [_pawn_slot(white, 0, 1, last)],
        "cap": [_pawn_slot(white, -1, 1, mid), _pawn_slot(white, 1, 1, mid)],
        "promo_cap": [_pawn_slot(white, -1, 1, last), _pawn_slot(white, 1, 1, last)],
    }


WHITE_PAWN_SLOTS = pawn_slots(True)
BLACK_PAWN_SLOTS = pawn_slots(False)

# reverse (un-move) pawn slots: where could the pawn have come from
_PAWN_REV_QUIET = {
    True: _pawn_slot(False, 0, 1, range(2, 7)),   # white pawn on rank 3..7 came from one below
    False: _pawn_slot(True, 0, 1, range(1, 6)),
}
_PAWN_REV_DOUBLE = {
    True: _pawn_slot(False, 0, 2, range(3, 4)),   # white pawn on rank 4 via double push
    False: _pawn_slot(True, 0, 2, range(4, 5)),
}


def pawn_rev_quiet(white: bool) -> Slot:
    return _PAWN_REV_QUIET[white]


def pawn_rev_double(white: bool) -> Slot:
    return _PAWN_REV_DOUBLE[white]


def _pseudo(kind: str) -> np.ndarray:
    att = np.zeros((64, 64), dtype=bool)
    for slot in PIECE_SLOTS[kind]:
        f = np.nonzero(slot.to >= 0)[0]
        att[f, slot.to[f]] = True
    return att


PSEUDO = {k: _pseudo(k) for k in "KNRBQ"}

_PAWN_ATT = {}
for _white in (True, False):
    att = np.zeros((64, 64), dtype=bool)
    dr = 1 if _white else -1
    for f in range(64):
        for df in (-1, 1):
            nf, nr = (f & 7) + df, (f >> 3) + dr
            if 0 <= nf < 8 and 0 <= nr < 8:
                att[f, nr * 8 + nf] = True
    _PAWN_ATT[_white] = att
PAWN_PSEUDO = _PAWN_ATT

# BETWEEN3[a, b, s]: s strictly between a and b along a rook/bishop line
BETWEEN3 = np.zeros((64, 64, 64), dtype=bool)
for _a in range(64):
    for _df, _dr in _ROOK_DIRS + _BISHOP_DIRS:
        _path = []
        _nf, _nr = (_a & 7) + _df, (_a >> 3) + _dr
        while 0 <= _nf < 8 and 0 <= _nr < 8:
            _b = _nr * 8 + _nf
            for _s in _path:
                BETWEEN3[_a, _b, _s] = True
            _path.append(_b)
            _nf += _df
            _nr += _dr

BETWEEN_MASK = np.zeros((64, 64), dtype=np.uint64)
for _a in range(64):
    for _b in range(64):
        _bits = np.nonzero(BETWEEN3[_a, _b])[0]
        _m = 0
        for _s in _bits:
            _m |= 1 << int(_s)
        BETWEEN_MASK[_a, _b] = _m

# kings adjacent (or overlapping)
ADJ_KINGS = np.zeros((64, 64), dtype=bool)
for _a in range(64):
    for _b in range(64):
        ADJ_KINGS[_a, _b] = max(abs((_a & 7) - (_b & 7)), abs((_a >> 3) - (_b >> 3))) <= 1

SHIFT1 = (np.uint64(1) << np.arange(64, dtype=np.uint64))

PAWN_RANK_OK = np.zeros(64, dtype=bool)
PAWN_RANK_OK[8:56] = True

LAST_RANK = {True: np.arange(64) >= 56, False: np.arange(64) < 8}

# value codes shared across the tablebase modules
BROKEN, LOSS, DRAW, WIN, UNKNOWN = 0, 1, 2, 3, 4
FLIP_CODE = np.array([0, 3, 2, 1, 4], dtype=np.uint8)  # swaps win/loss
