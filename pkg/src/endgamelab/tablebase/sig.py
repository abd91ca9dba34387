"""Material signatures and the capture/promotion dependency DAG."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations_with_replacement

from ..board import Position

KIND_ORDER = "QRBNP"
_KIND_RANK = {k: i for i, k in enumerate(KIND_ORDER)}


def _sort_kinds(kinds) -> tuple[str, ...]:
    return tuple(sorted(kinds, key=_KIND_RANK.__getitem__))


def _name(white: tuple[str, ...], black: tuple[str, ...]) -> str:
    return "K" + "".join(white) + "vK" + "".join(black)


@dataclass(frozen=True)
class MaterialSig:
    """Normalized material signature: non-king piece kinds per side.

    Normalization picks whichever color assignment yields the
    lexicographically smaller name, so e.g. KvKQ and KQvK both normalize
    to KQvK.
    """

    white: tuple[str, ...]
    black: tuple[str, ...]

    @property
    def name(self) -> str:
        return _name(self.white, self.black)

    @property
    def piece_count(self) -> int:
        return 2 + len(self.white) + len(self.black)

    @property
    def pawn_count(self) -> int:
        return self.white.count("P") + self.black.count("P")

    @property
    def is_insufficient(self) -> bool:
        sides = {self.white, self.black}
        return sides in ({()}, {(), ("B",)}, {(), ("N",)})

    def __str__(self) -> str:
        return self.name

    @staticmethod
    def normalize(white, black) -> tuple["MaterialSig", bool]:
        """Return (signature, flipped). ``flipped`` means the input white
        pieces ended up as the signature's black side.

        The stronger side plays White: more pieces first, then the
        lexicographically earlier kind tuple in Q > R > B > N > P order.
        """
        w, b = _sort_kinds(white), _sort_kinds(black)

        def key(side):
            return (-len(side), tuple(_KIND_RANK[k] for k in side))

        if key(b) < key(w):
            return MaterialSig(b, w), True
        return MaterialSig(w, b), False

    @staticmethod
    def from_name(name: str) -> "MaterialSig":
        parts = name.split("v")
        if len(parts) != 2 or not parts[0].startswith("K") or not parts[1].startswith("K"):
            raise ValueError(f"bad signature name {name!r}")
        white = tuple(parts[0][1:])
        black = tuple(parts[1][1:])
        for k in white + black:
            if k not in KIND_ORDER:
                raise ValueError(f"bad piece kind {k!r} in {name!r}")
        sig, flipped = MaterialSig.normalize(white, black)
        if flipped or sig.name != name:
            raise ValueError(f"signature {name!r} is not in normalized form")
        return sig


def material_signature(p: Position) -> MaterialSig:
    """Normalized signature of a position's piece multiset."""
    return signature_orientation(p)[0]


def signature_orientation(p: Position) -> tuple[MaterialSig, bool]:
    """Signature plus whether the position's colors are flipped vs. it."""
    white, black = [], []
    for b in p.board:
        if not b:
            continue
        ch = chr(b)
        kind = ch.upper()
        if kind == "K":
            continue
        (white if ch.isupper() else black).append(kind)
    return MaterialSig.normalize(white, black)


def dependencies(sig: MaterialSig) -> set[MaterialSig]:
    """Signatures reachable from ``sig`` by one capture or one promotion."""
    deps: set[MaterialSig] = set()
    sides = (sig.white, sig.black)
    for mover_i in (0, 1):
        mover, opp = sides[mover_i], sides[1 - mover_i]

        def norm(m, o):
            pair = (m, o) if mover_i == 0 else (o, m)
            return MaterialSig.normalize(*pair)[0]

        for victim in set(opp):
            rest = list(opp)
            rest.remove(victim)
            deps.add(norm(mover, tuple(rest)))
            if "P" in mover:
                promoted = list(mover)
                promoted.remove("P")
                for k in "QRBN":
                    deps.add(norm(tuple(promoted + [k]), tuple(rest)))
        if "P" in mover:
            promoted = list(mover)
            promoted.remove("P")
            for k in "QRBN":
                deps.add(norm(tuple(promoted + [k]), opp))
    deps.discard(sig)
    return deps


@lru_cache(maxsize=None)
def all_signatures(max_pieces: int) -> tuple[MaterialSig, ...]:
    """All normalized signatures with at most ``max_pieces`` total pieces."""
    out = set()
    budget = max_pieces - 2
    if budget < 0:
        raise ValueError("need at least the two kings")
    for nw in range(budget + 1):
        for nb in range(budget - nw + 1):
            for white in combinations_with_replacement(KIND_ORDER, nw):
                for black in combinations_with_replacement(KIND_ORDER, nb):
                    out.add(MaterialSig.normalize(white, black)[0])
    return tuple(sorted(out, key=lambda s: (s.piece_count, s.pawn_count, s.name)))


def generation_order(max_pieces: int) -> list[MaterialSig]:
    """Topological order over the dependency DAG (KvK first).

    Captures reduce the piece count and promotions reduce the pawn count,
    so ordering by (pieces, pawns, name) places every dependency before
    its dependents.
    """
    return list(all_signatures(max_pieces))
