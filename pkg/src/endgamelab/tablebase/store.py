"""Bit-packed tablebase files.

Layout (little-endian):
  magic "EBLB" | version u16 | name length u8 | name ASCII | k u8 |
  entry count u64 | packed entries (2 bits each, 4 per byte, low bits
  first) | optional dtm block (u16 per decisive entry, in index order) |
  checksum u64 (blake2b-64 of all preceding bytes)

The dtm block's presence is inferred from the file length.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .geometry import BROKEN, DRAW, LOSS, WIN
from .sig import MaterialSig

MAGIC = b"EBLB"
VERSION = 1


class StoreError(ValueError):
    pass


class MagicError(StoreError):
    pass


class VersionError(StoreError):
    pass


class TruncationError(StoreError):
    pass


class ChecksumError(StoreError):
    pass


def _checksum(data: bytes) -> int:
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "little")


def pack_values(values: np.ndarray) -> np.ndarray:
    """Pack uint8 codes (0..3) into 2-bit entries, 4 per byte."""
    v = values.astype(np.uint8)
    pad = (-len(v)) % 4
    if pad:
        v = np.concatenate([v, np.zeros(pad, dtype=np.uint8)])
    v = v.reshape(-1, 4)
    return v[:, 0] | (v[:, 1] << 2) | (v[:, 2] << 4) | (v[:, 3] << 6)


def unpack_values(packed: np.ndarray, count: int) -> np.ndarray:
    out = np.empty((len(packed), 4), dtype=np.uint8)
    out[:, 0] = packed & 3
    out[:, 1] = (packed >> 2) & 3
    out[:, 2] = (packed >> 4) & 3
    out[:, 3] = (packed >> 6) & 3
    return out.reshape(-1)[:count]


@dataclass
class Tablebase:
    """WDL values for one signature plus an optional DTM sidecar."""

    sig: MaterialSig
    packed: np.ndarray            # uint8, 4 entries per byte
    count: int                    # number of 2-bit entries
    dtm: Optional[np.ndarray] = None   # int16 per entry, -1 where absent
    stats: dict = field(default_factory=dict)
    _values: Optional[np.ndarray] = field(default=None, repr=False)

    def value_at(self, idx: int) -> int:
        return int(self.packed[idx >> 2] >> ((idx & 3) * 2)) & 3

    def values_at(self, idx: np.ndarray) -> np.ndarray:
        return (self.packed[idx >> 2] >> ((idx & 3).astype(np.uint8) * 2)) & 3

    def values(self) -> np.ndarray:
        """Unpacked uint8 array, cached until release()."""
        if self._values is None:
            self._values = unpack_values(self.packed, self.count)
        return self._values

    def release(self) -> None:
        self._values = None

    def counts(self) -> dict[str, int]:
        v = self.values()
        return {
            "broken": int(np.count_nonzero(v == BROKEN)),
            "loss": int(np.count_nonzero(v == LOSS)),
            "draw": int(np.count_nonzero(v == DRAW)),
            "win": int(np.count_nonzero(v == WIN)),
        }

    @property
    def max_dtm(self) -> int:
        if self.dtm is None:
            return -1
        return int(self.dtm.max(initial=-1))


def save(tb: Tablebase, path) -> None:
    path = Path(path)
    name = tb.sig.name.encode("ascii")
    header = MAGIC + struct.pack("<HB", VERSION, len(name)) + name
    header += struct.pack("<BQ", tb.sig.piece_count, tb.count)
    body = tb.packed.tobytes()
    blob = header + body
    if tb.dtm is not None:
        v = unpack_values(tb.packed, tb.count)
        decisive = (v == LOSS) | (v == WIN)
        blob += tb.dtm[decisive].astype("<u2").tobytes()
    blob += struct.pack("<Q", _checksum(blob))
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(blob)
    tmp.replace(path)


def load(path, with_dtm: bool = True) -> Tablebase:
    blob = Path(path).read_bytes()
    if len(blob) < 4 or blob[:4] != MAGIC:
        raise MagicError(f"{path}: bad magic")
    if len(blob) < 15:
        raise TruncationError(f"{path}: truncated header")
    version, name_len = struct.unpack_from("<HB", blob, 4)
    if version != VERSION:
        raise VersionError(f"{path}: version {version}, expected {VERSION}")
    off = 7
    if len(blob) < off + name_len + 9:
        raise TruncationError(f"{path}: truncated header")
    name = blob[off : off + name_len].decode("ascii")
    off += name_len
    k, count = struct.unpack_from("<BQ", blob, off)
    off += 9
    packed_len = (count + 3) // 4
    if len(blob) < off + packed_len + 8:
        raise TruncationError(f"{path}: truncated entries")
    stored_sum = struct.unpack_from("<Q", blob, len(blob) - 8)[0]
    if _checksum(blob[:-8]) != stored_sum:
        raise ChecksumError(f"{path}: checksum mismatch")
    packed = np.frombuffer(blob, dtype=np.uint8, count=packed_len, offset=off).copy()
    off += packed_len
    sig = MaterialSig.from_name(name)
    if sig.piece_count != k:
        raise StoreError(f"{path}: piece count {k} does not match {name}")
    tb = Tablebase(sig=sig, packed=packed, count=count)

    dtm_bytes = len(blob) - 8 - off
    if dtm_bytes and with_dtm:
        values = unpack_values(packed, count)
        decisive = (values == LOSS) | (values == WIN)
        n_dec = int(np.count_nonzero(decisive))
        if dtm_bytes != 2 * n_dec:
            raise TruncationError(
                f"{path}: dtm block is {dtm_bytes} bytes, expected {2 * n_dec}"
            )
        dtm = np.full(count, -1, dtype=np.int16)
        dtm[decisive] = np.frombuffer(blob, dtype="<u2", count=n_dec, offset=off).astype(
            np.int16
        )
        tb.dtm = dtm
    return tb


def table_path(directory, sig: MaterialSig) -> Path:
    return Path(directory) / f"{sig.name}.wdl"
