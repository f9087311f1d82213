"""Static multipath and mobile time-varying channels with pulse shaping.

The physical model: per-path complex gains, Doppler shifts and delays
combine with the overall raised-cosine transceiver filter into a sampled
impulse response g[n, p] (tap p, time slot n).  A guard prefix of at
least the channel memory turns the linear convolution into an N x N
wrapped operator, stored here in banded form so mat-vec costs O(P*N).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s

__all__ = [
    "PulseShape",
    "raised_cosine",
    "PathSet",
    "generate_paths",
    "max_doppler_hz",
    "impulse_response",
    "TimeChannel",
    "build_time_channel",
    "MimoChannel",
    "build_mimo_channel",
]


@dataclass(frozen=True)
class PulseShape:
    """Overall (TX cascaded with RX) raised-cosine Nyquist pulse."""

    rolloff: float = 0.4
    span: int = 4  # truncation in symbol intervals, +-span

    def __post_init__(self):
        if not 0.0 <= self.rolloff <= 1.0:
            raise ValueError("rolloff must be in [0, 1]")
        if self.span < 1:
            raise ValueError("span must be >= 1")


def raised_cosine(t: float | np.ndarray, shape: PulseShape, ts: float) -> np.ndarray:
    """Raised-cosine pulse value at time t (seconds), symbol interval ts.

    The rolloff singularity at |t| = ts/(2*beta) is evaluated by its
    analytic limit (pi/4)*sinc(1/(2*beta)).  Truncated to |t| <= span*ts.
    """
    t = np.asarray(t, dtype=float)
    beta = shape.rolloff
    x = t / ts
    out = np.sinc(x)
    if beta > 0.0:
        sing = np.isclose(np.abs(t), ts / (2.0 * beta), rtol=0.0, atol=1e-12 * ts)
        denom = 1.0 - (2.0 * beta * x) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            out = out * np.cos(np.pi * beta * x) / denom
        out = np.where(sing, (np.pi / 4.0) * np.sinc(1.0 / (2.0 * beta)), out)
    out = np.where(np.abs(x) > shape.span, 0.0, out)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class PathSet:
    """Per-path {complex gain, Doppler shift (Hz), delay (s)} triples."""

    gains: np.ndarray
    dopplers_hz: np.ndarray
    delays_s: np.ndarray
    sample_interval_s: float

    def __post_init__(self):
        if len(self.gains) < 1:
            raise ValueError("need at least one path")
        if np.any(self.delays_s < 0):
            raise ValueError("delays must be nonnegative")

    @property
    def num_paths(self) -> int:
        return len(self.gains)

    @property
    def tau_max_s(self) -> float:
        return float(self.delays_s.max())

    @property
    def nu_max_hz(self) -> float:
        return float(np.abs(self.dopplers_hz).max())


def max_doppler_hz(velocity_kmh: float, carrier_hz: float) -> float:
    """nu_max = v * f_c / c with velocity given in km/h."""
    return (velocity_kmh / 3.6) * carrier_hz / SPEED_OF_LIGHT


def generate_paths(
    num_paths: int,
    tau_max_s: float,
    velocity_kmh: float,
    carrier_hz: float,
    sample_interval_s: float,
    rng: np.random.Generator,
    profile: str = "uniform",
    fractional_delays: bool = False,
) -> PathSet:
    """Draw a random path set: Jakes Dopplers, Gaussian gains, grid delays.

    Doppler per path is nu_max*cos(2*pi*u) with u uniform; gains are
    circular complex Gaussian with total mean power 1 split across paths
    by the power-delay profile ("uniform" or "exp"); delays default to
    uniform draws on the sample grid {0, Ts, ..., tau_max}.
    """
    if num_paths < 1:
        raise ValueError("need num_paths >= 1")
    nu_max = max_doppler_hz(velocity_kmh, carrier_hz)

    if profile == "uniform":
        powers = np.full(num_paths, 1.0 / num_paths)
    elif profile == "exp":
        w = np.exp(-np.arange(num_paths, dtype=float))
        powers = w / w.sum()
    else:
        raise ValueError(f"unknown power-delay profile {profile!r}")

    gains = np.sqrt(powers / 2.0) * (
        rng.standard_normal(num_paths) + 1j * rng.standard_normal(num_paths)
    )
    dopplers = nu_max * np.cos(2.0 * np.pi * rng.random(num_paths))
    if nu_max == 0.0:
        dopplers = np.zeros(num_paths)

    if fractional_delays:
        delays = rng.random(num_paths) * tau_max_s
    else:
        grid_max = int(round(tau_max_s / sample_interval_s))
        delays = rng.integers(0, grid_max + 1, num_paths) * sample_interval_s
    return PathSet(
        gains=gains,
        dopplers_hz=dopplers,
        delays_s=np.asarray(delays, dtype=float),
        sample_interval_s=sample_interval_s,
    )


def num_taps(paths: PathSet, shape: PulseShape) -> int:
    """Channel tap count: delay spread plus the truncated filter tail."""
    ts = paths.sample_interval_s
    return int(math.floor(paths.tau_max_s / ts + shape.span)) + 1


def impulse_response(
    paths: PathSet, shape: PulseShape, n: int | np.ndarray, p: int | np.ndarray
) -> np.ndarray:
    """g[n, p]: sum over paths of gain * Doppler phase * pulse sample.

    The Doppler phase rotates with the propagation time (n - p)*Ts and the
    pulse is sampled at p*Ts - tau_i.  Broadcasts over n and p.
    """
    ts = paths.sample_interval_s
    n = np.asarray(n)
    p = np.asarray(p)
    t_phase = (n[..., None] - p[..., None]) * ts
    t_pulse = p[..., None] * ts - paths.delays_s
    vals = (
        paths.gains
        * np.exp(2j * np.pi * paths.dopplers_hz * t_phase)
        * raised_cosine(t_pulse, shape, ts)
    )
    return vals.sum(axis=-1)


def _cpp_phase(c1: float, n_block: int, wrap_offsets: np.ndarray) -> np.ndarray:
    # chirp-periodic prefix: sample x[d] for d<0 is x[N+d]*exp(-j2*pi*c1*(N^2+2Nd))
    return np.exp(-2j * np.pi * c1 * (n_block**2 + 2.0 * n_block * wrap_offsets))


@dataclass(frozen=True)
class TimeChannel:
    """Banded wrapped time-domain channel operator.

    ``taps[n, p]`` is the weight the received slot n puts on transmitted
    slot (n - p) mod N; entries that wrap past the block start already
    include the prefix phase convention (plain copy for a cyclic prefix,
    chirp-phased copy for the chirp-periodic prefix).
    """

    taps: np.ndarray  # (N, P) complex, prefix convention folded in
    cp_mode: str  # "cp" or "cpp"
    cpp_c1: float = 0.0
    static: bool = False
    raw_taps: np.ndarray | None = None  # g[n, p] without wrap phases

    @property
    def block_len(self) -> int:
        return self.taps.shape[0]

    @property
    def num_taps(self) -> int:
        return self.taps.shape[1]

    # operator view used by spectral utilities
    @property
    def in_dim(self) -> int:
        return self.block_len

    @property
    def out_dim(self) -> int:
        return self.block_len

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """y[n] = sum_p taps[n, p] * x[(n - p) mod N], O(P*N)."""
        if x.shape[0] != self.block_len:
            raise ValueError("dimension mismatch")
        y = np.zeros_like(x, dtype=complex)
        for p in range(self.num_taps):
            col = self.taps[:, p]
            y += (col if x.ndim == 1 else col[:, None]) * np.roll(x, p, axis=0)
        return y

    def adjoint_matvec(self, r: np.ndarray) -> np.ndarray:
        """(H^H r)[m] accumulated tap-by-tap, O(P*N)."""
        if r.shape[0] != self.block_len:
            raise ValueError("dimension mismatch")
        out = np.zeros_like(r, dtype=complex)
        for p in range(self.num_taps):
            col = np.conj(self.taps[:, p])
            out += np.roll((col if r.ndim == 1 else col[:, None]) * r, -p, axis=0)
        return out

    def dense(self) -> np.ndarray:
        n = self.block_len
        h = np.zeros((n, n), dtype=complex)
        rows = np.arange(n)
        for p in range(self.num_taps):
            h[rows, (rows - p) % n] += self.taps[:, p]
        return h

    def exact_gram_eigenvalues(self) -> np.ndarray | None:
        """|FFT of first column|^2 when the operator is exactly circulant."""
        if not self.static or self.cp_mode != "cp":
            return None
        first_col = np.zeros(self.block_len, dtype=complex)
        first_col[: self.num_taps] = self.taps[0, :]
        lam = np.fft.fft(first_col)
        return np.abs(lam) ** 2

    def dump(self) -> str:
        """Golden-test JSON form: {N, P, cp_mode, taps as [n, p, re, im]}."""
        entries = [
            [int(n), int(p), float(self.taps[n, p].real), float(self.taps[n, p].imag)]
            for n in range(self.block_len)
            for p in range(self.num_taps)
            if self.taps[n, p] != 0
        ]
        return json.dumps(
            {
                "N": self.block_len,
                "P": self.num_taps,
                "cp_mode": self.cp_mode,
                "taps": entries,
            }
        )


def build_time_channel(
    paths: PathSet,
    shape: PulseShape,
    block_len: int,
    cp_mode: str = "cp",
    cpp_c1: float = 0.0,
) -> TimeChannel:
    """Sample g[n, p] over the block and fold in the prefix wrap phases."""
    p_count = num_taps(paths, shape)
    if p_count > block_len:
        raise ValueError(f"channel memory P={p_count} exceeds block length {block_len}")
    if cp_mode not in ("cp", "cpp"):
        raise ValueError(f"unknown cp_mode {cp_mode!r}")

    n_idx = np.arange(block_len)
    p_idx = np.arange(p_count)
    g = impulse_response(paths, shape, n_idx[:, None], p_idx[None, :])

    # drop trailing all-zero taps (integer-grid delays land exactly on
    # pulse zero crossings)
    nz = np.where(np.abs(g).max(axis=0) > 1e-15)[0]
    p_count = int(nz[-1]) + 1 if nz.size else 1
    g = g[:, :p_count]

    taps = g.copy()
    if cp_mode == "cpp":
        for p in range(1, p_count):
            wrap = n_idx < p  # rows where slot n-p falls before the block
            offs = (n_idx[wrap] - p).astype(float)
            taps[wrap, p] = g[wrap, p] * _cpp_phase(cpp_c1, block_len, offs)

    static = paths.nu_max_hz == 0.0
    return TimeChannel(
        taps=taps, cp_mode=cp_mode, cpp_c1=cpp_c1, static=static, raw_taps=g
    )


@dataclass(frozen=True)
class MimoChannel:
    """Grid of per-antenna-pair wrapped operators acting blockwise."""

    blocks: tuple  # tuple of tuples, blocks[m][j] is a TimeChannel
    n_rx: int = field(init=False, default=0)
    n_tx: int = field(init=False, default=0)

    def __post_init__(self):
        object.__setattr__(self, "n_rx", len(self.blocks))
        object.__setattr__(self, "n_tx", len(self.blocks[0]))
        n = self.blocks[0][0].block_len
        for row in self.blocks:
            if len(row) != self.n_tx or any(b.block_len != n for b in row):
                raise ValueError("inconsistent MIMO block grid")

    @property
    def block_len(self) -> int:
        return self.blocks[0][0].block_len

    @property
    def in_dim(self) -> int:
        return self.n_tx * self.block_len

    @property
    def out_dim(self) -> int:
        return self.n_rx * self.block_len

    @property
    def num_taps(self) -> int:
        return max(b.num_taps for row in self.blocks for b in row)

    @property
    def static(self) -> bool:
        return all(b.static for row in self.blocks for b in row)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        n = self.block_len
        if x.shape[0] != self.in_dim:
            raise ValueError("dimension mismatch")
        shape = (self.out_dim,) + x.shape[1:]
        y = np.zeros(shape, dtype=complex)
        for m in range(self.n_rx):
            for j in range(self.n_tx):
                y[m * n : (m + 1) * n] += self.blocks[m][j].matvec(x[j * n : (j + 1) * n])
        return y

    def adjoint_matvec(self, r: np.ndarray) -> np.ndarray:
        n = self.block_len
        if r.shape[0] != self.out_dim:
            raise ValueError("dimension mismatch")
        shape = (self.in_dim,) + r.shape[1:]
        out = np.zeros(shape, dtype=complex)
        for m in range(self.n_rx):
            for j in range(self.n_tx):
                out[j * n : (j + 1) * n] += self.blocks[m][j].adjoint_matvec(
                    r[m * n : (m + 1) * n]
                )
        return out

    def dense(self) -> np.ndarray:
        n = self.block_len
        h = np.zeros((self.out_dim, self.in_dim), dtype=complex)
        for m in range(self.n_rx):
            for j in range(self.n_tx):
                h[m * n : (m + 1) * n, j * n : (j + 1) * n] = self.blocks[m][j].dense()
        return h

    def exact_gram_eigenvalues(self):
        return None


def build_mimo_channel(
    path_grid, shape: PulseShape, block_len: int, cp_mode: str = "cp", cpp_c1: float = 0.0
) -> MimoChannel:
    """Assemble the block channel from an N_rx x N_tx grid of path sets."""
    blocks = tuple(
        tuple(
            build_time_channel(paths, shape, block_len, cp_mode=cp_mode, cpp_c1=cpp_c1)
            for paths in row
        )
        for row in path_grid
    )
    return MimoChannel(blocks=blocks)
