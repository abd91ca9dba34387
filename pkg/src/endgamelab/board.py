"""Chess board core: FEN, legal move generation, terminal states, symmetry.

Squares are 0..63 with a1 = 0, h1 = 7, a8 = 56 (rank-major). Pieces are the
usual FEN letters; uppercase is White. Positions are immutable; every
operation returns a new value.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Optional

WHITE = True
BLACK = False

WHITE_PIECES = "PNBRQK"
BLACK_PIECES = "pnbrqk"
PIECE_KINDS = "KQRBNP"

FILES = "abcdefgh"
RANKS = "12345678"

# castling-rights bits
CR_WK, CR_WQ, CR_BK, CR_BQ = 1, 2, 4, 8
_CASTLE_CHARS = [("K", CR_WK), ("Q", CR_WQ), ("k", CR_BK), ("q", CR_BQ)]


def square(file: int, rank: int) -> int:
    return rank * 8 + file


def square_name(sq: int) -> str:
    return FILES[sq & 7] + RANKS[sq >> 3]


def parse_square(name: str) -> int:
    if len(name) != 2 or name[0] not in FILES or name[1] not in RANKS:
        raise ValueError(f"bad square {name!r}")
    return square(FILES.index(name[0]), RANKS.index(name[1]))


class Color(enum.Enum):
    WHITE = "white"
    BLACK = "black"


class TerminalState(enum.Enum):
    CHECKMATE = "checkmate"
    STALEMATE = "stalemate"
    INSUFFICIENT_MATERIAL = "insufficient_material"
    NONTERMINAL = "nonterminal"


class FenError(ValueError):
    """FEN rejected; ``code`` identifies which rule failed."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class IllegalMoveError(ValueError):
    pass


class CanonicalizeError(ValueError):
    pass


@dataclass(frozen=True)
class Move:
    from_sq: int
    to_sq: int
    promotion: Optional[str] = None  # one of "QRBN" when set

    def __post_init__(self):
        if self.from_sq == self.to_sq:
            raise ValueError("null move")
        if self.promotion is not None and self.promotion not in "QRBN":
            raise ValueError(f"bad promotion {self.promotion!r}")

    def uci(self) -> str:
        s = square_name(self.from_sq) + square_name(self.to_sq)
        if self.promotion:
            s += self.promotion.lower()
        return s

    @staticmethod
    def from_uci(text: str) -> "Move":
        if len(text) not in (4, 5):
            raise ValueError(f"bad uci {text!r}")
        promo = text[4].upper() if len(text) == 5 else None
        return Move(parse_square(text[:2]), parse_square(text[2:4]), promo)

    def __str__(self) -> str:
        return self.uci()


@dataclass(frozen=True)
class Transform:
    """Member of the 4-element board symmetry group.

    ``mirror_lr`` reflects files a<->h. ``color_flip`` reflects ranks 1<->8,
    swaps piece colors and the side to move. The two commute.
    """

    mirror_lr: bool = False
    color_flip: bool = False

    def map_square(self, sq: int) -> int:
        if self.mirror_lr:
            sq ^= 7
        if self.color_flip:
            sq ^= 56
        return sq

    def compose(self, other: "Transform") -> "Transform":
        return Transform(self.mirror_lr ^ other.mirror_lr, self.color_flip ^ other.color_flip)


IDENTITY = Transform(False, False)


# ---------------------------------------------------------------------------
# move geometry tables
# ---------------------------------------------------------------------------

def _build_step_table(offsets: list[tuple[int, int]]) -> list[tuple[int, ...]]:
    table = []
    for sq in range(64):
        f, r = sq & 7, sq >> 3
        targets = []
        for df, dr in offsets:
            nf, nr = f + df, r + dr
            if 0 <= nf < 8 and 0 <= nr < 8:
                targets.append(square(nf, nr))
        table.append(tuple(targets))
    return table


def _build_ray_table(dirs: list[tuple[int, int]]) -> list[tuple[tuple[int, ...], ...]]:
    table = []
    for sq in range(64):
        f, r = sq & 7, sq >> 3
        rays = []
        for df, dr in dirs:
            ray = []
            nf, nr = f + df, r + dr
            while 0 <= nf < 8 and 0 <= nr < 8:
                ray.append(square(nf, nr))
                nf += df
                nr += dr
            if ray:
                rays.append(tuple(ray))
        table.append(tuple(rays))
    return table


_KNIGHT = _build_step_table([(1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2)])
_KING = _build_step_table([(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)])
_ROOK_DIRS = [(1, 0), (-1, 0), (0, 1), (0, -1)]
_BISHOP_DIRS = [(1, 1), (1, -1), (-1, 1), (-1, -1)]
_ROOK_RAYS = _build_ray_table(_ROOK_DIRS)
_BISHOP_RAYS = _build_ray_table(_BISHOP_DIRS)
_QUEEN_RAYS = _build_ray_table(_ROOK_DIRS + _BISHOP_DIRS)
# squares from which a pawn of the given color attacks sq
_WP_ATTACKERS = _build_step_table([(-1, -1), (1, -1)])  # white pawn sits one rank below
_BP_ATTACKERS = _build_step_table([(-1, 1), (1, 1)])


@dataclass(frozen=True)
class Position:
    """Immutable full chess state.

    ``board`` is a 64-byte string, 0 for empty squares, otherwise the FEN
    piece letter's codepoint.
    """

    board: bytes
    white_to_move: bool = True
    castling: int = 0
    ep_square: Optional[int] = None
    halfmove_clock: int = 0
    fullmove_number: int = 1

    # -- accessors ---------------------------------------------------------

    @property
    def side_to_move(self) -> Color:
        return Color.WHITE if self.white_to_move else Color.BLACK

    @property
    def placement(self) -> dict[int, tuple[Color, str]]:
        """Map square -> (color, piece kind letter in 'KQRBNP')."""
        out = {}
        for sq, b in enumerate(self.board):
            if b:
                ch = chr(b)
                out[sq] = (Color.WHITE if ch.isupper() else Color.BLACK, ch.upper())
        return out

    def piece_at(self, sq: int) -> Optional[str]:
        b = self.board[sq]
        return chr(b) if b else None

    def piece_count(self) -> int:
        return sum(1 for b in self.board if b)

    def king_square(self, white: bool) -> int:
        target = ord("K") if white else ord("k")
        return self.board.index(target)

    def castling_rights(self) -> tuple[bool, bool, bool, bool]:
        c = self.castling
        return bool(c & CR_WK), bool(c & CR_WQ), bool(c & CR_BK), bool(c & CR_BQ)

    def key(self) -> tuple:
        """Equality key; halfmove/fullmove counters intentionally excluded."""
        return (self.board, self.white_to_move, self.castling, self.ep_square)

    def __str__(self) -> str:
        return to_fen(self)


# ---------------------------------------------------------------------------
# attack queries
# ---------------------------------------------------------------------------

def _attacked_by(board: bytes, sq: int, by_white: bool) -> bool:
    """Whether ``sq`` is attacked by any piece of the given color."""
    if by_white:
        kn, ki, pa, rook, queen, bishop = ord("N"), ord("K"), _WP_ATTACKERS, ord("R"), ord("Q"), ord("B")
    else:
        kn, ki, pa, rook, queen, bishop = ord("n"), ord("k"), _BP_ATTACKERS, ord("r"), ord("q"), ord("b")
    for s in _KNIGHT[sq]:
        if board[s] == kn:
            return True
    for s in _KING[sq]:
        if board[s] == ki:
            return True
    for s in pa[sq]:
        if board[s] == pa_piece(by_white):
            return True
    for ray in _ROOK_RAYS[sq]:
        for s in ray:
            b = board[s]
            if b:
                if b == rook or b == queen:
                    return True
                break
    for ray in _BISHOP_RAYS[sq]:
        for s in ray:
            b = board[s]
            if b:
                if b == bishop or b == queen:
                    return True
                break
    return False


def pa_piece(white: bool) -> int:
    return ord("P") if white else ord("p")


def in_check(p: Position) -> bool:
    return _attacked_by(p.board, p.king_square(p.white_to_move), not p.white_to_move)


# ---------------------------------------------------------------------------
# FEN
# ---------------------------------------------------------------------------

def parse_fen(text: str) -> Position:
    """Parse a FEN string (fields 5-6 optional) into a validated Position."""
    fields = text.split()
    if len(fields) < 4:
        raise FenError("missing_fields", f"expected at least 4 FEN fields, got {len(fields)}")
    if len(fields) > 6:
        raise FenError("extra_fields", f"expected at most 6 FEN fields, got {len(fields)}")

    ranks = fields[0].split("/")
    if len(ranks) != 8:
        raise FenError("bad_rank_count", f"expected 8 ranks, got {len(ranks)}")
    board = bytearray(64)
    for i, rank_text in enumerate(ranks):
        rank = 7 - i
        file = 0
        for ch in rank_text:
            if ch.isdigit():
                step = int(ch)
                if step == 0:
                    raise FenError("bad_rank", f"zero run in rank {rank + 1}")
                file += step
            elif ch in WHITE_PIECES or ch in BLACK_PIECES:
                if file > 7:
                    raise FenError("bad_rank", f"rank {rank + 1} overflows")
                board[square(file, rank)] = ord(ch)
                file += 1
            else:
                raise FenError("bad_piece", f"illegal piece letter {ch!r}")
        if file != 8:
            raise FenError("bad_rank", f"rank {rank + 1} has {file} files")

    if fields[1] == "w":
        white_to_move = True
    elif fields[1] == "b":
        white_to_move = False
    else:
        raise FenError("bad_side", f"bad side-to-move field {fields[1]!r}")

    castling = 0
    if fields[2] != "-":
        seen = set()
        for ch in fields[2]:
            for letter, bit in _CASTLE_CHARS:
                if ch == letter:
                    if ch in seen:
                        raise FenError("bad_castling", f"duplicate castling letter {ch!r}")
                    seen.add(ch)
                    castling |= bit
                    break
            else:
                raise FenError("bad_castling", f"bad castling letter {ch!r}")
    # drop rights whose king/rook are not at home, as replayers expect
    if castling:
        castling = _clean_castling(bytes(board), castling)

    ep_square = None
    if fields[3] != "-":
        try:
            ep_square = parse_square(fields[3])
        except ValueError:
            raise FenError("bad_ep", f"bad en-passant square {fields[3]!r}") from None

    halfmove, fullmove = 0, 1
    if len(fields) >= 5:
        try:
            halfmove = int(fields[4])
        except ValueError:
            raise FenError("bad_counter", f"bad halfmove clock {fields[4]!r}") from None
        if halfmove < 0:
            raise FenError("bad_counter", "negative halfmove clock")
    if len(fields) >= 6:
        try:
            fullmove = int(fields[5])
        except ValueError:
            raise FenError("bad_counter", f"bad fullmove number {fields[5]!r}") from None
        if fullmove < 1:
            raise FenError("bad_counter", "fullmove number below 1")

    pos = Position(bytes(board), white_to_move, castling, ep_square, halfmove, fullmove)
    _validate(pos)
    return pos


def _clean_castling(board: bytes, castling: int) -> int:
    if board[4] != ord("K"):
        castling &= ~(CR_WK | CR_WQ)
    if board[60] != ord("k"):
        castling &= ~(CR_BK | CR_BQ)
    if board[7] != ord("R"):
        castling &= ~CR_WK
    if board[0] != ord("R"):
        castling &= ~CR_WQ
    if board[63] != ord("r"):
        castling &= ~CR_BK
    if board[56] != ord("r"):
        castling &= ~CR_BQ
    return castling


def _validate(p: Position) -> None:
    wk = p.board.count(ord("K"))
    bk = p.board.count(ord("k"))
    if wk != 1 or bk != 1:
        raise FenError("kings", f"need exactly one king per side, got {wk} white / {bk} black")
    wksq, bksq = p.king_square(True), p.king_square(False)
    if bksq in _KING[wksq]:
        raise FenError("kings_adjacent", "kings on adjacent squares")
    for sq, b in enumerate(p.board):
        if b in (ord("P"), ord("p")) and (sq < 8 or sq >= 56):
            raise FenError("pawn_rank", f"pawn on back rank at {square_name(sq)}")
    if p.ep_square is not None:
        _validate_ep(p)
    # side not to move may never be left in check
    ntm_king = p.king_square(not p.white_to_move)
    if _attacked_by(p.board, ntm_king, p.white_to_move):
        raise FenError("side_not_to_move_in_check", "side not to move is in check")


def _validate_ep(p: Position) -> None:
    ep = p.ep_square
    rank = ep >> 3
    if p.white_to_move:
        # black just double-pushed: ep on rank 6, black pawn one rank below
        if rank != 5:
            raise FenError("bad_ep", "en-passant square for white must be on rank 6")
        pawn_sq, origin = ep - 8, ep + 8
        pawn = ord("p")
    else:
        if rank != 2:
            raise FenError("bad_ep", "en-passant square for black must be on rank 3")
        pawn_sq, origin = ep + 8, ep - 8
        pawn = ord("P")
    if p.board[pawn_sq] != pawn or p.board[ep] or p.board[origin]:
        raise FenError("bad_ep", "en-passant square without a matching double push")


def to_fen(p: Position) -> str:
    rows = []
    for rank in range(7, -1, -1):
        row = ""
        run = 0
        for file in range(8):
            b = p.board[square(file, rank)]
            if b:
                if run:
                    row += str(run)
                    run = 0
                row += chr(b)
            else:
                run += 1
        if run:
            row += str(run)
        rows.append(row)
    castle = "".join(letter for letter, bit in _CASTLE_CHARS if p.castling & bit) or "-"
    ep = square_name(p.ep_square) if p.ep_square is not None else "-"
    return " ".join([
        "/".join(rows),
        "w" if p.white_to_move else "b",
        castle,
        ep,
        str(p.halfmove_clock),
        str(p.fullmove_number),
    ])


# ---------------------------------------------------------------------------
# move generation
# ---------------------------------------------------------------------------

def _pseudo_moves(p: Position) -> Iterator[Move]:
    board = p.board
    white = p.white_to_move
    own_lower = not white
    for sq, b in enumerate(board):
        if not b:
            continue
        ch = chr(b)
        if ch.islower() == white:
            continue
        kind = ch.upper()
        if kind == "P":
            yield from _pawn_moves(p, sq, white)
        elif kind == "N":
            for t in _KNIGHT[sq]:
                tb = board[t]
                if not tb or (chr(tb).isupper() != white):
                    yield Move(sq, t)
        elif kind == "K":
            for t in _KING[sq]:
                tb = board[t]
                if not tb or (chr(tb).isupper() != white):
                    yield Move(sq, t)
        else:
            rays = {"R": _ROOK_RAYS, "B": _BISHOP_RAYS, "Q": _QUEEN_RAYS}[kind]
            for ray in rays[sq]:
                for t in ray:
                    tb = board[t]
                    if not tb:
                        yield Move(sq, t)
                        continue
                    if chr(tb).isupper() != white:
                        yield Move(sq, t)
                    break
    yield from _castling_moves(p)


def _pawn_moves(p: Position, sq: int, white: bool) -> Iterator[Move]:
    board = p.board
    rank = sq >> 3
    fwd = 8 if white else -8
    start_rank = 1 if white else 6
    promo_rank = 6 if white else 1
    one = sq + fwd
    if not board[one]:
        if rank == promo_rank:
            for k in "QRBN":
                yield Move(sq, one, k)
        else:
            yield Move(sq, one)
            if rank == start_rank and not board[sq + 2 * fwd]:
                yield Move(sq, sq + 2 * fwd)
    for df in (-1, 1):
        file = (sq & 7) + df
        if not 0 <= file < 8:
            continue
        t = one + df
        tb = board[t]
        if tb and chr(tb).isupper() != white:
            if rank == promo_rank:
                for k in "QRBN":
                    yield Move(sq, t, k)
            else:
                yield Move(sq, t)
        elif p.ep_square == t:
            yield Move(sq, t)


def _castling_moves(p: Position) -> Iterator[Move]:
    if not p.castling:
        return
    board = p.board
    if p.white_to_move:
        ksq, kside, qside = 4, p.castling & CR_WK, p.castling & CR_WQ
        enemy = False
    else:
        ksq, kside, qside = 60, p.castling & CR_BK, p.castling & CR_BQ
        enemy = True
    if _attacked_by(board, ksq, enemy):
        return
    if kside and not board[ksq + 1] and not board[ksq + 2]:
        if not _attacked_by(board, ksq + 1, enemy) and not _attacked_by(board, ksq + 2, enemy):
            yield Move(ksq, ksq + 2)
    if qside and not board[ksq - 1] and not board[ksq - 2] and not board[ksq - 3]:
        if not _attacked_by(board, ksq - 1, enemy) and not _attacked_by(board, ksq - 2, enemy):
            yield Move(ksq, ksq - 2)


def _apply_unchecked(p: Position, m: Move) -> Position:
    board = bytearray(p.board)
    piece = board[m.from_sq]
    kind = chr(piece).upper()
    capture = board[m.to_sq] != 0
    ep_capture = kind == "P" and m.to_sq == p.ep_square and not capture
    board[m.from_sq] = 0
    board[m.to_sq] = piece
    if ep_capture:
        board[m.to_sq - 8 if p.white_to_move else m.to_sq + 8] = 0
        capture = True
    if m.promotion:
        board[m.to_sq] = ord(m.promotion if p.white_to_move else m.promotion.lower())
    if kind == "K" and abs(m.to_sq - m.from_sq) == 2:  # castling rook hop
        if m.to_sq > m.from_sq:
            rook_from, rook_to = m.from_sq + 3, m.from_sq + 1
        else:
            rook_from, rook_to = m.from_sq - 4, m.from_sq - 1
        board[rook_to] = board[rook_from]
        board[rook_from] = 0

    castling = p.castling
    if castling:
        for sq in (m.from_sq, m.to_sq):
            if sq == 4:
                castling &= ~(CR_WK | CR_WQ)
            elif sq == 60:
                castling &= ~(CR_BK | CR_BQ)
            elif sq == 0:
                castling &= ~CR_WQ
            elif sq == 7:
                castling &= ~CR_WK
            elif sq == 56:
                castling &= ~CR_BQ
            elif sq == 63:
                castling &= ~CR_BK

    ep_square = None
    if kind == "P" and abs(m.to_sq - m.from_sq) == 16:
        ep_square = (m.from_sq + m.to_sq) // 2

    halfmove = 0 if (kind == "P" or capture) else p.halfmove_clock + 1
    fullmove = p.fullmove_number + (0 if p.white_to_move else 1)
    return Position(bytes(board), not p.white_to_move, castling, ep_square, halfmove, fullmove)


def legal_moves(p: Position) -> list[Move]:
    """All moves legal under FIDE rules; length is the paper's move count."""
    out = []
    for m in _pseudo_moves(p):
        child = _apply_unchecked(p, m)
        if not _attacked_by(child.board, child.king_square(p.white_to_move), child.white_to_move):
            out.append(m)
    return out


def is_legal(p: Position, m: Move) -> bool:
    return m in legal_moves(p)


def apply_move(p: Position, m: Move) -> Position:
    if not is_legal(p, m):
        raise IllegalMoveError(f"illegal move {m.uci()} in {to_fen(p)}")
    return _apply_unchecked(p, m)


def terminal_state(p: Position) -> TerminalState:
    if not legal_moves(p):
        return TerminalState.CHECKMATE if in_check(p) else TerminalState.STALEMATE
    pieces = sorted(chr(b).upper() for b in p.board if b)
    if pieces in (["K", "K"], ["B", "K", "K"], ["K", "K", "N"]):
        return TerminalState.INSUFFICIENT_MATERIAL
    return TerminalState.NONTERMINAL


# ---------------------------------------------------------------------------
# symmetry canonicalization
# ---------------------------------------------------------------------------

def apply_transform(p: Position, t: Transform) -> Position:
    if p.castling:
        raise CanonicalizeError("symmetry transforms require no castling rights")
    board = bytearray(64)
    for sq, b in enumerate(p.board):
        if not b:
            continue
        ch = chr(b)
        if t.color_flip:
            ch = ch.swapcase()
        board[t.map_square(sq)] = ord(ch)
    ep = t.map_square(p.ep_square) if p.ep_square is not None else None
    white_to_move = p.white_to_move ^ t.color_flip
    return Position(bytes(board), white_to_move, 0, ep, p.halfmove_clock, p.fullmove_number)


_TRANSFORMS = [
    Transform(False, False),
    Transform(True, False),
    Transform(False, True),
    Transform(True, True),
]


def canonicalize(p: Position) -> tuple[Position, Transform]:
    """Pick the lexicographically least FEN among the 4 symmetry images.

    Counters are normalized to 0/1 so canonical keys are stable across
    instances of the same placement. Requires no castling rights.
    """
    if p.castling:
        raise CanonicalizeError("cannot canonicalize a position with castling rights")
    base = Position(p.board, p.white_to_move, 0, p.ep_square, 0, 1)
    best = None
    best_key = None
    best_t = None
    for t in _TRANSFORMS:
        cand = apply_transform(base, t)
        key = to_fen(cand)
        if best_key is None or key < best_key:
            best, best_key, best_t = cand, key, t
    return best, best_t


def canonical_fen(p: Position) -> str:
    return to_fen(canonicalize(p)[0])


# ---------------------------------------------------------------------------
# misc helpers
# ---------------------------------------------------------------------------

STARTING_FEN = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1"


def starting_position() -> Position:
    return parse_fen(STARTING_FEN)


def perft(p: Position, depth: int) -> int:
    if depth == 0:
        return 1
    total = 0
    for m in legal_moves(p):
        total += perft(_apply_unchecked(p, m), depth - 1)
    return total
