"""Dense position indexing per material signature.

The index space enumerates raw square assignments: one base-64 digit per
piece (fixed piece order: white king, black king, white non-kings, black
non-kings) plus a leading side-to-move bit. Assignments that are not legal
chess positions occupy Broken slots. Both members of each left-right
mirror pair are stored; color orientation is normalized by the signature.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..board import Position, Transform, apply_transform, canonicalize, parse_fen, to_fen
from .sig import MaterialSig, signature_orientation

_FLIP_SQ = 56  # xor to mirror ranks


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class PieceSlot:
    white: bool
    kind: str  # KQRBNP


@lru_cache(maxsize=None)
def encoding(sig: MaterialSig) -> "Encoding":
    return Encoding(sig)


class Encoding:
    def __init__(self, sig: MaterialSig):
        self.sig = sig
        pieces = [PieceSlot(True, "K"), PieceSlot(False, "K")]
        pieces += [PieceSlot(True, k) for k in sig.white]
        pieces += [PieceSlot(False, k) for k in sig.black]
        self.pieces: tuple[PieceSlot, ...] = tuple(pieces)
        self.m = len(pieces)
        self.shifts = tuple(6 * (self.m - 1 - j) for j in range(self.m))
        self.stm_shift = 6 * self.m
        self.half = 1 << self.stm_shift
        self.size = 2 * self.half

    # -- scalar paths --------------------------------------------------------

    def squares_of(self, p: Position) -> list[int]:
        """Square per piece slot, for a position already in the signature's
        orientation. Identical piece kinds are assigned in square order."""
        buckets: dict[tuple[bool, str], list[int]] = {}
        for sq, b in enumerate(p.board):
            if b:
                ch = chr(b)
                buckets.setdefault((ch.isupper(), ch.upper()), []).append(sq)
        out = []
        for slot in self.pieces:
            bucket = buckets.get((slot.white, slot.kind))
            if not bucket:
                raise EncodingError(f"position does not match signature {self.sig.name}")
            out.append(bucket.pop(0))
        if any(buckets.values()):
            raise EncodingError(f"position does not match signature {self.sig.name}")
        return out

    def encode_oriented(self, p: Position) -> int:
        idx = 0 if p.white_to_move else self.half
        for sq, shift in zip(self.squares_of(p), self.shifts):
            idx |= sq << shift
        return idx

    def orient(self, p: Position) -> Position:
        """Color-flip ``p`` when its colors are swapped vs. the signature."""
        osig, flipped = signature_orientation(p)
        if osig != self.sig:
            raise EncodingError(
                f"position has signature {osig.name}, expected {self.sig.name}"
            )
        return apply_transform(p, Transform(False, True)) if flipped else p

    def encode_position(self, p: Position) -> int:
        if p.castling:
            raise EncodingError("tablebase domain excludes castling rights")
        return self.encode_oriented(self.orient(p))

    def decode(self, idx: int) -> Position:
        """Rebuild the raw assignment; raises EncodingError on Broken slots
        that cannot even form a board (overlaps, pawns on back ranks)."""
        if not 0 <= idx < self.size:
            raise EncodingError(f"index {idx} out of range for {self.sig.name}")
        board = bytearray(64)
        for slot, shift in zip(self.pieces, self.shifts):
            sq = (idx >> shift) & 63
            if board[sq]:
                raise EncodingError("overlapping pieces")
            if slot.kind == "P" and not 8 <= sq < 56:
                raise EncodingError("pawn on back rank")
            board[sq] = ord(slot.kind if slot.white else slot.kind.lower())
        white_to_move = idx < self.half
        return Position(bytes(board), white_to_move, 0, None, 0, 1)

    def decode_validated(self, idx: int) -> Position:
        """Decode and fully re-validate through FEN parsing."""
        return parse_fen(to_fen(self.decode(idx)))

    # -- vector paths ---------------------------------------------------------

    def decode_squares(self, idx: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
        sqs = [((idx >> shift) & 63).astype(np.int64) for shift in self.shifts]
        stm_black = (idx >> self.stm_shift).astype(np.int8)  # 1 = black to move
        return sqs, stm_black


def index(p: Position) -> int:
    """Dense index of ``p``'s canonical representative."""
    canon, _ = canonicalize(p)
    sig, _ = signature_orientation(canon)
    return encoding(sig).encode_position(canon)


def deindex(idx: int, sig: MaterialSig) -> Position:
    """Canonical position stored at slot ``idx`` of ``sig``'s table."""
    return canonicalize(encoding(sig).decode(idx))[0]
