import pytest
from hypothesis import given, settings, strategies as st

from endgamelab.board import (
    CanonicalizeError,
    FenError,
    IllegalMoveError,
    Move,
    Position,
    TerminalState,
    Transform,
    apply_move,
    apply_transform,
    canonicalize,
    in_check,
    legal_moves,
    parse_fen,
    parse_square,
    perft,
    square_name,
    starting_position,
    terminal_state,
    to_fen,
)


def moves_uci(p):
    return sorted(m.uci() for m in legal_moves(p))


class TestFen:
    def test_three_piece_parse(self):
        p = parse_fen("k7/8/8/8/8/8/8/K5Q1 w - - 0 1")
        assert p.piece_count() == 3
        assert p.white_to_move
        assert p.piece_at(parse_square("g1")) == "Q"
        assert p.piece_at(parse_square("a8")) == "k"

    def test_queen_checking_idle_side_rejected(self):
        # Qh1 eyes a8 along the long diagonal, so with White to move the
        # side not to move would be in check
        with pytest.raises(FenError) as e:
            parse_fen("k7/8/8/8/8/8/8/K6Q w - - 0 1")
        assert e.value.code == "side_not_to_move_in_check"

    def test_checkmated_side_to_move_is_legal(self):
        p = parse_fen("k7/1Q6/1K6/8/8/8/8/8 b - - 0 1")
        assert not p.white_to_move
        assert in_check(p)

    def test_missing_fields_rejected(self):
        with pytest.raises(FenError) as e:
            parse_fen("k7/8/8/8/8/8/8/K7 w")
        assert e.value.code == "missing_fields"

    def test_bad_rank_count(self):
        with pytest.raises(FenError) as e:
            parse_fen("k7/8/8/8/8/8/K7 w - -")
        assert e.value.code == "bad_rank_count"

    def test_illegal_piece_letter(self):
        with pytest.raises(FenError) as e:
            parse_fen("k7/8/8/8/8/8/8/K6X w - -")
        assert e.value.code == "bad_piece"

    def test_two_kings_one_color(self):
        with pytest.raises(FenError) as e:
            parse_fen("kk6/8/8/8/8/8/8/K7 w - -")
        assert e.value.code == "kings"

    def test_side_not_to_move_in_check(self):
        # white queen gives check but black is the side not to move
        with pytest.raises(FenError) as e:
            parse_fen("k7/1Q6/1K6/8/8/8/8/8 w - - 0 1")
        assert e.value.code == "side_not_to_move_in_check"

    def test_adjacent_kings_rejected(self):
        with pytest.raises(FenError):
            parse_fen("kK6/8/8/8/8/8/8/7Q w - -")

    def test_pawn_on_back_rank_rejected(self):
        with pytest.raises(FenError):
            parse_fen("k6P/8/8/8/8/8/8/K7 w - -")

    def test_round_trip(self):
        for fen in [
            "k7/8/8/8/8/8/8/K5Q1 w - - 0 1",
            "k7/1Q6/1K6/8/8/8/8/8 b - - 3 42",
            "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1",
            "rnbqkbnr/pp1ppppp/8/8/2pP4/8/PP2PPPP/RNBQKBNR b KQkq d3 0 2",
        ]:
            assert to_fen(parse_fen(fen)) == fen

    def test_optional_counters_normalized(self):
        p = parse_fen("k7/8/8/8/8/8/8/K5Q1 w - -")
        assert p.halfmove_clock == 0 and p.fullmove_number == 1
        assert to_fen(p).endswith(" 0 1")

    def test_ep_field_round_trips(self):
        fen = "rnbqkbnr/ppp1pppp/8/3pP3/8/8/PPPP1PPP/RNBQKBNR w KQkq d6 0 3"
        p = parse_fen(fen)
        assert square_name(p.ep_square) == "d6"
        assert "d6" in to_fen(p)


class TestLegalMoves:
    def test_stalemate_empty_no_check(self):
        p = parse_fen("k7/2Q5/1K6/8/8/8/8/8 b - - 0 1")
        assert legal_moves(p) == []
        assert not in_check(p)

    def test_checkmate_empty_in_check(self):
        p = parse_fen("k7/1Q6/1K6/8/8/8/8/8 b - - 0 1")
        assert legal_moves(p) == []
        assert in_check(p)

    def test_lone_kings_three_moves(self):
        p = parse_fen("k7/8/8/8/8/8/8/K7 w - - 0 1")
        assert moves_uci(p) == ["a1a2", "a1b1", "a1b2"]

    def test_startpos_20_moves(self):
        assert len(legal_moves(starting_position())) == 20

    def test_pins_respected(self):
        # knight on e4 is pinned against the white king by the rook on e8
        p = parse_fen("4r2k/8/8/8/4N3/8/8/4K3 w - - 0 1")
        assert not any(m.from_sq == parse_square("e4") for m in legal_moves(p))

    def test_en_passant_available(self):
        p = parse_fen("k7/8/8/3pP3/8/8/8/K7 w - d6 0 2")
        assert "e5d6" in moves_uci(p)

    def test_castle_through_check_forbidden(self):
        p = parse_fen("4k3/8/8/8/8/5r2/8/4K2R w K - 0 1")
        assert "e1g1" not in moves_uci(p)

    def test_castle_available(self):
        p = parse_fen("4k3/8/8/8/8/8/8/4K2R w K - 0 1")
        assert "e1g1" in moves_uci(p)


class TestApplyMove:
    def test_queen_mate(self):
        p = parse_fen("k7/8/1K6/8/8/8/2Q5/8 w - - 0 1")
        child = apply_move(p, Move.from_uci("c2c8"))
        assert terminal_state(child) == TerminalState.CHECKMATE

    def test_queen_stalemate(self):
        p = parse_fen("k7/8/1K6/8/8/8/2Q5/8 w - - 0 1")
        child = apply_move(p, Move.from_uci("c2c7"))
        assert terminal_state(child) == TerminalState.STALEMATE
        assert to_fen(child).startswith("k7/2Q5/1K6/8/8/8/8/8 b")

    def test_double_push_sets_ep(self):
        p = starting_position()
        child = apply_move(p, Move.from_uci("e2e4"))
        assert square_name(child.ep_square) == "e3"

    def test_illegal_move_rejected(self):
        p = starting_position()
        with pytest.raises(IllegalMoveError):
            apply_move(p, Move.from_uci("e2e5"))

    def test_ep_capture_removes_pawn(self):
        p = parse_fen("k7/8/8/3pP3/8/8/8/K7 w - d6 0 2")
        child = apply_move(p, Move.from_uci("e5d6"))
        assert child.piece_at(parse_square("d5")) is None
        assert child.piece_at(parse_square("d6")) == "P"

    def test_promotion(self):
        p = parse_fen("k7/6P1/8/8/8/8/8/K7 w - - 0 1")
        child = apply_move(p, Move.from_uci("g7g8q"))
        assert child.piece_at(parse_square("g8")) == "Q"

    def test_castling_moves_rook(self):
        p = parse_fen("4k3/8/8/8/8/8/8/4K2R w K - 0 1")
        child = apply_move(p, Move.from_uci("e1g1"))
        assert child.piece_at(parse_square("f1")) == "R"
        assert child.piece_at(parse_square("h1")) is None


class TestTerminal:
    def test_checkmate(self):
        assert terminal_state(parse_fen("k7/1Q6/1K6/8/8/8/8/8 b - -")) == TerminalState.CHECKMATE

    def test_stalemate(self):
        assert terminal_state(parse_fen("k7/2Q5/1K6/8/8/8/8/8 b - -")) == TerminalState.STALEMATE

    def test_insufficient_kbk(self):
        assert (
            terminal_state(parse_fen("k7/8/8/8/8/8/8/KB6 w - -"))
            == TerminalState.INSUFFICIENT_MATERIAL
        )
        assert (
            terminal_state(parse_fen("k7/8/8/8/3n4/8/8/K7 w - -"))
            == TerminalState.INSUFFICIENT_MATERIAL
        )

    def test_nonterminal(self):
        assert terminal_state(starting_position()) == TerminalState.NONTERMINAL


# -- independent naive movegen oracle for perft ------------------------------

_OFFS = {
    "N": [(1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2)],
    "K": [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)],
}
_SLIDES = {
    "R": [(1, 0), (-1, 0), (0, 1), (0, -1)],
    "B": [(1, 1), (1, -1), (-1, 1), (-1, -1)],
}
_SLIDES["Q"] = _SLIDES["R"] + _SLIDES["B"]


def _naive_square_attacked(grid, sq, by_white):
    # scan the whole board; for each attacker piece check geometric reach
    tf, tr = sq % 8, sq // 8
    for s, ch in enumerate(grid):
        if ch is None or ch.isupper() != by_white:
            continue
        f, r = s % 8, s // 8
        kind = ch.upper()
        if kind in _OFFS:
            if (tf - f, tr - r) in _OFFS[kind]:
                return True
        elif kind == "P":
            dr = 1 if by_white else -1
            if tr - r == dr and abs(tf - f) == 1:
                return True
        else:
            for df, dr in _SLIDES[kind]:
                nf, nr = f + df, r + dr
                while 0 <= nf < 8 and 0 <= nr < 8:
                    if nf == tf and nr == tr:
                        return True
                    if grid[nr * 8 + nf] is not None:
                        break
                    nf += df
                    nr += dr
    return False


def _naive_moves(p):
    """Brute-force legal moves: enumerate pseudo moves by board scan, then
    reject any that leave the mover's king attacked. Entirely separate
    from the board module's generator."""
    grid = [p.piece_at(s) for s in range(64)]
    white = p.white_to_move
    out = []

    def emit(frm, to, promo=None, ep=False, castle_rook=None):
        g2 = list(grid)
        g2[to] = g2[frm] if promo is None else (promo if white else promo.lower())
        g2[frm] = None
        if ep:
            g2[to - 8 if white else to + 8] = None
        if castle_rook:
            rf, rt = castle_rook
            g2[rt] = g2[rf]
            g2[rf] = None
        ksq = g2.index("K" if white else "k")
        if not _naive_square_attacked(g2, ksq, not white):
            out.append(Move(frm, to, promo))

    for s, ch in enumerate(grid):
        if ch is None or ch.isupper() != white:
            continue
        f, r = s % 8, s // 8
        kind = ch.upper()
        if kind in _OFFS:
            for df, dr in _OFFS[kind]:
                nf, nr = f + df, r + dr
                if 0 <= nf < 8 and 0 <= nr < 8:
                    t = nr * 8 + nf
                    if grid[t] is None or grid[t].isupper() != white:
                        emit(s, t)
        elif kind == "P":
            dr = 1 if white else -1
            promo = (r + dr) in (0, 7)
            kinds = ["Q", "R", "B", "N"] if promo else [None]
            if grid[(r + dr) * 8 + f] is None:
                for k in kinds:
                    emit(s, (r + dr) * 8 + f, k)
                if (r == 1 if white else r == 6) and grid[(r + 2 * dr) * 8 + f] is None:
                    emit(s, (r + 2 * dr) * 8 + f)
            for df in (-1, 1):
                nf = f + df
                if not 0 <= nf < 8:
                    continue
                t = (r + dr) * 8 + nf
                if grid[t] is not None and grid[t].isupper() != white:
                    for k in kinds:
                        emit(s, t, k)
                elif p.ep_square == t:
                    emit(s, t, ep=True)
        else:
            for df, dr in _SLIDES[kind]:
                nf, nr = f + df, r + dr
                while 0 <= nf < 8 and 0 <= nr < 8:
                    t = nr * 8 + nf
                    if grid[t] is None:
                        emit(s, t)
                    else:
                        if grid[t].isupper() != white:
                            emit(s, t)
                        break
                    nf += df
                    nr += dr
    # castling
    rights = p.castling_rights()
    home = 4 if white else 60
    king_home = grid[home] == ("K" if white else "k")
    if king_home and not _naive_square_attacked(grid, home, not white):
        k_right, q_right = (rights[0], rights[1]) if white else (rights[2], rights[3])
        if (
            k_right
            and grid[home + 1] is None
            and grid[home + 2] is None
            and not _naive_square_attacked(grid, home + 1, not white)
            and not _naive_square_attacked(grid, home + 2, not white)
        ):
            emit(home, home + 2, castle_rook=(home + 3, home + 1))
        if (
            q_right
            and grid[home - 1] is None
            and grid[home - 2] is None
            and grid[home - 3] is None
            and not _naive_square_attacked(grid, home - 1, not white)
            and not _naive_square_attacked(grid, home - 2, not white)
        ):
            emit(home, home - 2, castle_rook=(home - 4, home - 1))
    return out


def _naive_perft(p, depth):
    if depth == 0:
        return 1
    total = 0
    for m in _naive_moves(p):
        total += _naive_perft(apply_move(p, m), depth - 1)
    return total


PERFT_POSITIONS = [
    ("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1", [20, 400, 8902]),
    ("r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1", [48, 2039, 97862]),
    ("8/2p5/3p4/KP5r/1R3p1k/8/4P1P1/8 w - - 0 1", [14, 191, 2812]),
]


class TestPerft:
    @pytest.mark.parametrize("fen,expected", PERFT_POSITIONS)
    def test_known_counts(self, fen, expected):
        p = parse_fen(fen)
        for depth, want in enumerate(expected, start=1):
            assert perft(p, depth) == want

    @pytest.mark.parametrize(
        "fen",
        [
            "k7/8/8/8/8/8/8/K7 w - - 0 1",
            "k7/8/1K6/8/8/8/2Q5/8 w - - 0 1",
            "k7/8/8/3pP3/8/8/8/K7 w - d6 0 2",
            "8/2p5/3p4/KP5r/1R3p1k/8/4P1P1/8 w - - 0 1",
        ],
    )
    def test_matches_naive_oracle_depth3(self, fen):
        p = parse_fen(fen)
        def naive_vs_fast(pos, depth):
            fast = sorted(m.uci() for m in legal_moves(pos))
            slow = sorted(m.uci() for m in _naive_moves(pos))
            assert fast == slow, to_fen(pos)
            if depth > 1:
                for m in legal_moves(pos):
                    naive_vs_fast(apply_move(pos, m), depth - 1)
        naive_vs_fast(p, 3)


# -- symmetry group -----------------------------------------------------------

@st.composite
def sampled_positions(draw):
    """Random sparse legal positions with 2-5 pieces (assume-filtered)."""
    from hypothesis import assume

    squares = draw(st.lists(st.integers(0, 63), min_size=2, max_size=5, unique=True))
    pieces = ["K", "k"] + [draw(st.sampled_from("QRBNPqrbnp")) for _ in squares[2:]]
    board = bytearray(64)
    for sq, ch in zip(squares, pieces):
        assume(ch not in "Pp" or 8 <= sq < 56)
        board[sq] = ord(ch)
    white = draw(st.booleans())
    try:
        return parse_fen(to_fen(Position(bytes(board), white, 0, None, 0, 1)))
    except FenError:
        assume(False)


class TestCanonicalize:
    @given(sampled_positions())
    @settings(max_examples=150, deadline=None)
    def test_orbit_constant_and_idempotent(self, p):
        canon, t = canonicalize(p)
        # idempotence with identity transform
        canon2, t2 = canonicalize(canon)
        assert canon2.key() == canon.key()
        assert t2 == Transform(False, False)
        # constant on the whole 4-element orbit
        for tr in [Transform(True, False), Transform(False, True), Transform(True, True)]:
            image = apply_transform(p, tr)
            assert canonicalize(image)[0].key() == canon.key()

    @given(sampled_positions())
    @settings(max_examples=150, deadline=None)
    def test_fen_round_trip(self, p):
        assert parse_fen(to_fen(p)).key() == p.key()

    def test_mirror_pair_same_canonical(self):
        a = parse_fen("k7/8/8/8/8/8/8/K5Q1 w - - 0 1")
        b = apply_transform(a, Transform(True, False))
        assert canonicalize(a)[0].key() == canonicalize(b)[0].key()

    def test_black_to_move_may_flip(self):
        p = parse_fen("8/8/8/8/8/6k1/8/q5K1 w - - 0 1")
        flipped = apply_transform(p, Transform(False, True))
        assert flipped.white_to_move != p.white_to_move
        assert canonicalize(p)[0].key() == canonicalize(flipped)[0].key()

    def test_castling_rights_rejected(self):
        p = parse_fen("4k3/8/8/8/8/8/8/4K2R w K - 0 1")
        with pytest.raises(CanonicalizeError):
            canonicalize(p)

    @given(sampled_positions())
    @settings(max_examples=100, deadline=None)
    def test_moves_from_sampled_positions_stay_valid(self, p):
        for m in legal_moves(p):
            child = apply_move(p, m)
            # own king never left in check: re-parsing validates this
            assert parse_fen(to_fen(child)).key() == child.key()
