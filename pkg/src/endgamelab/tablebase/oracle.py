"""Independent forward minimax search for spot-checking table values.

Depth-limited negamax over the real board rules (including en passant),
entirely separate from the index-space generator. Within the depth bound
the result is exact; a position where no mate is forced within the bound
comes back as a draw, so decisive table entries are checked at their
stored dtm and draws at a fixed bound.
"""

from __future__ import annotations

from ..board import Position, _apply_unchecked, in_check, legal_moves


class ForwardOracle:
    """Memoizing bounded negamax; memo persists across queries."""

    def __init__(self) -> None:
        # key -> (value, depth); decisive values are valid for queries with
        # depth >= stored, draws for depth <= stored
        self.memo: dict = {}
        self.nodes = 0

    def value(self, p: Position, depth: int) -> int:
        """-1 loss, 0 no mate within depth, +1 win for the side to move."""
        return self._search(p, depth)

    def _search(self, p: Position, depth: int) -> int:
        self.nodes += 1
        moves = legal_moves(p)
        if not moves:
            return -1 if in_check(p) else 0
        material = sorted(chr(b).upper() for b in p.board if b)
        if material in (["K", "K"], ["B", "K", "K"], ["K", "K", "N"]):
            return 0
        if depth <= 0:
            return 0
        key = p.key()
        hit = self.memo.get(key)
        if hit is not None:
            value, d = hit
            if value != 0 and depth >= d:
                return value
            if value == 0 and depth <= d:
                return 0
        # captures and promotions first: shortest mates usually run
        # through forcing moves
        moves.sort(key=lambda m: (p.board[m.to_sq] == 0, m.promotion is None))
        best = -1
        for m in moves:
            v = -self._search(_apply_unchecked(p, m), depth - 1)
            if v > best:
                best = v
                if best == 1:
                    break
        old = self.memo.get(key)
        if best != 0:
            if old is None or old[0] == 0 or old[1] > depth:
                self.memo[key] = (best, depth)
        else:
            if old is None or (old[0] == 0 and old[1] < depth):
                self.memo[key] = (0, depth)
        return best
