"""Probing generated tablebases and labeling moves as blunders."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from ..board import Move, Position, _apply_unchecked, legal_moves, to_fen
from .encode import encoding
from .geometry import BROKEN, DRAW, LOSS, WIN
from .sig import MaterialSig, signature_orientation
from .store import Tablebase, load, table_path


class ProbeError(ValueError):
    pass


class MissingTablebaseError(ProbeError):
    def __init__(self, name: str):
        super().__init__(f"no tablebase loaded for signature {name}")
        self.name = name


class Wdl(enum.IntEnum):
    """Minimax value from the side to move's perspective."""

    LOSS = -1
    DRAW = 0
    WIN = 1

    def flip(self) -> "Wdl":
        return Wdl(-self.value)


_CODE_TO_WDL = {LOSS: Wdl.LOSS, DRAW: Wdl.DRAW, WIN: Wdl.WIN}


@dataclass(frozen=True)
class MoveLabel:
    move: Move
    child_value_for_mover: Wdl
    is_blunder: bool


@dataclass
class LabeledPosition:
    parent: Wdl
    labels: list[MoveLabel]
    n: int
    b: int


class TablebaseSet:
    """Read-only collection of tablebases keyed by signature name."""

    def __init__(self, tables: Optional[Iterable[Tablebase]] = None):
        self.tables: dict[str, Tablebase] = {}
        for tb in tables or ():
            self.add(tb)

    def add(self, tb: Tablebase) -> None:
        self.tables[tb.sig.name] = tb

    def __contains__(self, sig) -> bool:
        name = sig.name if isinstance(sig, MaterialSig) else sig
        return name in self.tables

    def get(self, sig) -> Tablebase:
        name = sig.name if isinstance(sig, MaterialSig) else sig
        tb = self.tables.get(name)
        if tb is None:
            raise MissingTablebaseError(name)
        return tb

    @property
    def max_pieces(self) -> int:
        return max((tb.sig.piece_count for tb in self.tables.values()), default=0)

    @staticmethod
    def load_dir(directory, signatures: Optional[Iterable[MaterialSig]] = None) -> "TablebaseSet":
        directory = Path(directory)
        out = TablebaseSet()
        if signatures is None:
            paths = sorted(directory.glob("*.wdl"))
        else:
            paths = [table_path(directory, s) for s in signatures]
        for p in paths:
            out.add(load(p))
        return out

    # -- probing -----------------------------------------------------------

    def probe_wdl(self, p: Position) -> Wdl:
        """Minimax value for the side to move.

        Positions carrying a usable en-passant right are resolved by a
        one-ply expansion, since tables store only ep-free positions.
        """
        if p.castling:
            raise ProbeError("tablebase domain excludes castling rights")
        if p.ep_square is not None:
            if self._ep_capture_exists(p):
                best = Wdl.LOSS
                moves = legal_moves(p)
                if not moves:
                    raise ProbeError(f"terminal position probed with ep rights: {to_fen(p)}")
                for m in moves:
                    v = self._child_value(p, m)
                    if v > best:
                        best = v
                        if best == Wdl.WIN:
                            break
                return best
            p = Position(p.board, p.white_to_move, 0, None, 0, 1)
        sig, _ = signature_orientation(p)
        tb = self.get(sig)
        code = tb.value_at(encoding(sig).encode_position(p))
        if code == BROKEN:
            raise ProbeError(f"position indexes a broken slot: {to_fen(p)}")
        return _CODE_TO_WDL[code]

    def _ep_capture_exists(self, p: Position) -> bool:
        ep = p.ep_square
        pawn = ord("P") if p.white_to_move else ord("p")
        behind = -8 if p.white_to_move else 8
        for df in (-1, 1):
            file = (ep & 7) + df
            if 0 <= file < 8 and p.board[ep + behind + df] == pawn:
                return True
        return False

    def _child_value(self, p: Position, m: Move) -> Wdl:
        # terminal children are stored too, so one probe covers everything
        return self.probe_wdl(_apply_unchecked(p, m)).flip()

    def label_moves(self, p: Position) -> LabeledPosition:
        """Label every legal move; blunders strictly worsen the parent value."""
        moves = legal_moves(p)
        if not moves:
            raise ProbeError(f"label_moves on terminal position {to_fen(p)}")
        parent = self.probe_wdl(p)
        labels = []
        b = 0
        for m in moves:
            v = self._child_value(p, m)
            blunder = v < parent
            b += blunder
            labels.append(MoveLabel(move=m, child_value_for_mover=v, is_blunder=blunder))
        return LabeledPosition(parent=parent, labels=labels, n=len(moves), b=b)


def probe_wdl(tbs: TablebaseSet, p: Position) -> Wdl:
    return tbs.probe_wdl(p)


def label_moves(tbs: TablebaseSet, p: Position) -> LabeledPosition:
    return tbs.label_moves(p)
