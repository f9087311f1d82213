"""The four multicarrier schemes as unitary transform pairs.

Every scheme maps N constellation symbols to an N-sample time block and
back (energy preserving both ways), knows its guard-prefix rule, and can
present the channel it sees in its own symbol domain, either as an exact
diagonal (plain-FFT scheme over a static channel) or as the operator
composition demodulate(H(modulate(.))).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import MimoChannel, TimeChannel
from .numerics import PermutationMap, derive_seed, random_permutation, unitary_fft

__all__ = [
    "Waveform",
    "PlainFft",
    "DelayDopplerGrid",
    "ChirpSpread",
    "InterleavedFourier",
    "make_scheme",
    "default_chirp_rates",
    "EffectiveChannel",
    "effective_channel",
]


class Waveform:
    """Transform pair shared by all schemes; subclasses fill in the maps."""

    kind = "base"
    cp_kind = "cp"
    cpp_c1 = 0.0

    def __init__(self, block_len: int):
        if block_len < 1:
            raise ValueError("block length must be >= 1")
        self.block_len = block_len

    def _check(self, v: np.ndarray):
        if v.shape[0] != self.block_len:
            raise ValueError(
                f"expected length {self.block_len}, got {v.shape[0]}"
            )

    def modulate(self, s: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def demodulate(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def add_prefix(self, x: np.ndarray, guard_len: int) -> np.ndarray:
        """Prepend the cyclic guard (tail copy) of ``guard_len`` samples."""
        self._check(x)
        if guard_len == 0:
            return x.copy()
        return np.concatenate([x[-guard_len:], x], axis=0)

    def remove_prefix(self, r: np.ndarray, guard_len: int) -> np.ndarray:
        if r.shape[0] != self.block_len + guard_len:
            raise ValueError("prefixed block has wrong length")
        return r[guard_len:]

    def dense_matrix(self) -> np.ndarray:
        """Materialized modulation matrix (test sizes only)."""
        return self.modulate(np.eye(self.block_len, dtype=complex))


class PlainFft(Waveform):
    """Frequency-domain multiplexing: IFFT to transmit, FFT to receive."""

    kind = "ofdm"

    def modulate(self, s):
        self._check(s)
        return unitary_fft(s, inverse=True)

    def demodulate(self, y):
        self._check(y)
        return unitary_fft(y, inverse=False)


class DelayDopplerGrid(Waveform):
    """Two-dimensional grid multiplexing over a K x L delay-Doppler grid.

    Symbols fill the grid column-major; the transmit map reduces to an
    inverse FFT across the L axis applied row-wise (the K-point spreading
    of the 2D pre-transform cancels against its inverse).
    """

    kind = "otfs"

    def __init__(self, k: int, l_grid: int):
        if k < 1 or l_grid < 1:
            raise ValueError("grid dimensions must be >= 1")
        super().__init__(k * l_grid)
        self.k = k
        self.l_grid = l_grid

    def modulate(self, s):
        self._check(s)
        grid = s.reshape(self.k, self.l_grid, *s.shape[1:], order="F")
        x = np.fft.ifft(grid, axis=1, norm="ortho")
        return x.reshape(self.block_len, *s.shape[1:], order="F")

    def demodulate(self, y):
        self._check(y)
        grid = y.reshape(self.k, self.l_grid, *y.shape[1:], order="F")
        s = np.fft.fft(grid, axis=1, norm="ortho")
        return s.reshape(self.block_len, *y.shape[1:], order="F")


def default_chirp_rates(block_len: int, alpha_max: float = 0.0) -> tuple[float, float]:
    """Chirp rates covering the normalized Doppler spread alpha_max."""
    c1 = (2 * math.ceil(alpha_max) + 1) / (2.0 * block_len)
    c2 = 1.0 / (2.0 * block_len**2)
    return c1, c2


class ChirpSpread(Waveform):
    """Chirp-domain multiplexing via the discrete affine Fourier pair.

    Transmit applies conj(Lambda_c2), unitary IFFT, conj(Lambda_c1) with
    Lambda_c = diag(exp(-j*2*pi*c*n^2)); receive is the exact adjoint.
    Uses the chirp-periodic guard prefix so the wrapped channel stays
    consistent with the chirp structure.
    """

    kind = "afdm"
    cp_kind = "cpp"

    def __init__(self, block_len: int, c1: float | None = None, c2: float | None = None):
        super().__init__(block_len)
        d1, d2 = default_chirp_rates(block_len)
        self.c1 = d1 if c1 is None else c1
        self.c2 = d2 if c2 is None else c2
        n = np.arange(block_len)
        self._chirp1 = np.exp(-2j * np.pi * self.c1 * n**2)
        self._chirp2 = np.exp(-2j * np.pi * self.c2 * n**2)
        self.cpp_c1 = self.c1

    def _mul(self, diag, v):
        return diag[:, None] * v if v.ndim > 1 else diag * v

    def modulate(self, s):
        self._check(s)
        x = self._mul(np.conj(self._chirp2), s)
        x = unitary_fft(x, inverse=True)
        return self._mul(np.conj(self._chirp1), x)

    def demodulate(self, y):
        self._check(y)
        s = self._mul(self._chirp1, y)
        s = unitary_fft(s, inverse=False)
        return self._mul(self._chirp2, s)

    def add_prefix(self, x: np.ndarray, guard_len: int) -> np.ndarray:
        """Chirp-periodic prefix: tail copy with the c1 wrap phase."""
        self._check(x)
        if guard_len == 0:
            return x.copy()
        n = self.block_len
        d = np.arange(-guard_len, 0, dtype=float)
        phase = np.exp(-2j * np.pi * self.c1 * (n**2 + 2.0 * n * d))
        head = x[-guard_len:] * (phase[:, None] if x.ndim > 1 else phase)
        return np.concatenate([head, x], axis=0)


class InterleavedFourier(Waveform):
    """Interleave-frequency multiplexing: IFFT followed by a seeded
    random permutation shared by transmitter and receiver."""

    kind = "ifdm"

    def __init__(self, block_len: int, perm_seed: int = 0, perm: PermutationMap | None = None):
        super().__init__(block_len)
        self.perm = perm if perm is not None else random_permutation(block_len, perm_seed)
        self.perm_seed = self.perm.seed

    def modulate(self, s):
        self._check(s)
        return unitary_fft(s, inverse=True)[self.perm.forward]

    def demodulate(self, y):
        self._check(y)
        return unitary_fft(y[self.perm.inverse], inverse=False)


def make_scheme(kind: str, block_len: int, **params) -> Waveform:
    """Factory keyed by scheme name; unknown parameters are rejected."""
    kind = kind.lower()
    if kind == "ofdm":
        _reject_extra(params, set())
        return PlainFft(block_len)
    if kind == "otfs":
        _reject_extra(params, {"k", "l"})
        k = params.get("k")
        l_grid = params.get("l")
        if k is None and l_grid is None:
            k = _default_otfs_k(block_len)
            l_grid = block_len // k
        elif k is None:
            k = block_len // int(l_grid)
        elif l_grid is None:
            l_grid = block_len // int(k)
        k, l_grid = int(k), int(l_grid)
        if k * l_grid != block_len:
            raise ValueError(f"OTFS grid {k}x{l_grid} does not match N={block_len}")
        return DelayDopplerGrid(k, l_grid)
    if kind == "afdm":
        _reject_extra(params, {"c1", "c2", "alpha_max"})
        if "c1" in params or "c2" in params:
            return ChirpSpread(block_len, params.get("c1"), params.get("c2"))
        c1, c2 = default_chirp_rates(block_len, params.get("alpha_max", 0.0))
        return ChirpSpread(block_len, c1, c2)
    if kind == "ifdm":
        _reject_extra(params, {"perm_seed"})
        return InterleavedFourier(block_len, perm_seed=int(params.get("perm_seed", 0)))
    raise ValueError(f"unknown scheme kind {kind!r}")


def _reject_extra(params: dict, allowed: set):
    extra = set(params) - allowed
    if extra:
        raise ValueError(f"unknown scheme parameters: {sorted(extra)}")


def _default_otfs_k(n: int) -> int:
    # squarest factorization, biased to K >= L like the reference grids
    k = int(math.isqrt(n))
    while k > 1 and n % k:
        k -= 1
    return n // k


class _SegmentedScheme:
    """Per-antenna application of a base scheme to stacked segments.

    A MIMO frame is ``n_seg`` independent N-sample segments; segment j
    uses its own transform (independent interleaver seeds for the
    interleaved scheme, identical transforms otherwise).
    """

    def __init__(self, base: Waveform, n_seg: int):
        self.block_len = base.block_len * n_seg
        self.segment_len = base.block_len
        self.n_seg = n_seg
        self.kind = base.kind
        self.cp_kind = base.cp_kind
        self.cpp_c1 = base.cpp_c1
        if isinstance(base, InterleavedFourier) and n_seg > 1:
            self.segments = [
                InterleavedFourier(base.block_len, perm_seed=derive_seed(base.perm_seed, j))
                for j in range(n_seg)
            ]
        else:
            self.segments = [base] * n_seg

    def _per_segment(self, v, op):
        n = self.segment_len
        return np.concatenate(
            [op(self.segments[j], v[j * n : (j + 1) * n]) for j in range(self.n_seg)], axis=0
        )

    def modulate(self, s):
        return self._per_segment(s, lambda seg, v: seg.modulate(v))

    def demodulate(self, y):
        return self._per_segment(y, lambda seg, v: seg.demodulate(v))


def segmented(base: Waveform, n_seg: int):
    """Stacked view of a scheme for multi-antenna frames (n_seg = 1 passes
    the base through unchanged)."""
    return base if n_seg == 1 else _SegmentedScheme(base, n_seg)


@dataclass
class EffectiveChannel:
    """Channel as seen between symbol domains: demodulate o H o modulate."""

    scheme: object
    time_channel: object
    diagonal: np.ndarray | None = None  # set for the exact diagonal case

    @property
    def representation(self) -> str:
        return "diagonal" if self.diagonal is not None else "operator"

    @property
    def dim(self) -> int:
        return self.scheme.block_len

    def apply(self, s: np.ndarray) -> np.ndarray:
        if self.diagonal is not None:
            return self.diagonal * s if s.ndim == 1 else self.diagonal[:, None] * s
        return self.scheme.demodulate(self.time_channel.matvec(self.scheme.modulate(s)))

    def dense(self) -> np.ndarray:
        if self.diagonal is not None:
            return np.diag(self.diagonal)
        return self.apply(np.eye(self.dim, dtype=complex))


def effective_channel(scheme, h) -> EffectiveChannel:
    """Exact diagonal for the plain-FFT scheme over a static wrapped
    operator (eigenvalues are the FFT of the circulant's first column);
    operator composition otherwise."""
    is_siso = isinstance(h, TimeChannel)
    if (
        is_siso
        and getattr(scheme, "kind", "") == "ofdm"
        and h.static
        and h.cp_mode == "cp"
    ):
        first_col = np.zeros(h.block_len, dtype=complex)
        first_col[: h.num_taps] = h.taps[0, :]
        return EffectiveChannel(scheme, h, diagonal=np.fft.fft(first_col))
    if not is_siso and not isinstance(h, MimoChannel):
        raise TypeError("expected a TimeChannel or MimoChannel")
    return EffectiveChannel(scheme, h)
