"""Gray-mapped symbol alphabets normalized to unit average energy."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Constellation", "make_constellation"]


def _gray(k: int) -> int:
    return k ^ (k >> 1)


def _pam_levels(bits: int) -> np.ndarray:
    """Gray-labelled amplitude levels: label g placed so adjacent levels
    differ in one bit.  Levels are {-(M-1), ..., -1, 1, ..., M-1}."""
    m = 1 << bits
    levels = np.zeros(m)
    for k in range(m):
        levels[_gray(k)] = 2 * k - (m - 1)
    return levels


@dataclass(frozen=True)
class Constellation:
    """Symbol set with its bit labelling; points carry unit mean energy."""

    name: str
    points: np.ndarray
    bits_per_symbol: int
    _bit_table: np.ndarray = field(init=False)  # (M, bits) 0/1 rows

    def __post_init__(self):
        m = len(self.points)
        if m != 1 << self.bits_per_symbol:
            raise ValueError("point count must be 2**bits_per_symbol")
        table = np.array(
            [[(idx >> (self.bits_per_symbol - 1 - b)) & 1 for b in range(self.bits_per_symbol)]
             for idx in range(m)],
            dtype=np.uint8,
        )
        object.__setattr__(self, "_bit_table", table)
        self.points.setflags(write=False)

    @property
    def size(self) -> int:
        return len(self.points)

    def map_bits(self, bits: np.ndarray) -> np.ndarray:
        """Pack consecutive bit groups (MSB first) into symbol indices."""
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.size % self.bits_per_symbol:
            raise ValueError("bit count not divisible by bits_per_symbol")
        groups = bits.reshape(-1, self.bits_per_symbol)
        weights = 1 << np.arange(self.bits_per_symbol - 1, -1, -1)
        idx = groups @ weights
        return self.points[idx]

    def nearest_index(self, symbols: np.ndarray) -> np.ndarray:
        return np.argmin(
            np.abs(np.asarray(symbols)[:, None] - self.points[None, :]), axis=1
        )

    def demap_hard(self, symbols: np.ndarray) -> np.ndarray:
        """Nearest-point decision, then unpack the point's bit label."""
        return self._bit_table[self.nearest_index(symbols)].reshape(-1)


def make_constellation(name: str) -> Constellation:
    """bpsk, qpsk, or 16qam (square, Gray on each axis)."""
    key = name.lower()
    if key == "bpsk":
        return Constellation(key, np.array([-1.0 + 0j, 1.0 + 0j]), 1)
    if key == "qpsk":
        axis = _pam_levels(1)  # (-1, +1)
        pts = np.array([(i + 1j * q) / np.sqrt(2.0) for i in axis for q in axis])
        return Constellation(key, pts, 2)
    if key == "16qam":
        axis = _pam_levels(2)
        pts = np.array([(i + 1j * q) / np.sqrt(10.0) for i in axis for q in axis])
        return Constellation(key, pts, 4)
    raise ValueError(f"unknown constellation {name!r}")
