"""Unitary transform primitives, deterministic permutations, and spectral utilities.

All transforms use the symmetric 1/sqrt(N) normalization so that every
forward/inverse pair is exactly unitary.  Permutations come from a
documented, platform-independent PRNG (SplitMix64 + Fisher-Yates with
rejection sampling) so that the same (n, seed) pair yields the same
permutation on every machine and under any thread count.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "splitmix64",
    "derive_seed",
    "PermutationMap",
    "random_permutation",
    "unitary_fft",
    "if_transform",
    "SpectralBounds",
    "spectral_bounds",
]

_MASK64 = (1 << 64) - 1


def splitmix64(seed: int):
    """Yield the SplitMix64 stream for ``seed``.

    Reference algorithm (Steele, Lea, Flood 2014): state advances by the
    golden-gamma constant, output is finalized with two xor-shift-multiply
    rounds.  Pure integer arithmetic, identical on every platform.
    """
    state = seed & _MASK64
    while True:
        state = (state + 0x9E3779B97F4A7C15) & _MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        yield (z ^ (z >> 31)) & _MASK64


def derive_seed(*parts: int) -> int:
    """Mix integer parts into one 64-bit seed via chained SplitMix64 hops.

    Used to give every (base_seed, snr, trial) cell of an experiment its
    own independent, replayable random stream.
    """
    acc = 0x243F6A8885A308D3  # pi fractional bits, fixed starting key
    for p in parts:
        gen = splitmix64((acc ^ (p & _MASK64)) & _MASK64)
        acc = next(gen)
    return acc


def _bounded(gen, k: int) -> int:
    # Unbiased draw from [0, k) by rejecting the wrap-around remainder.
    threshold = ((1 << 64) // k) * k
    while True:
        u = next(gen)
        if u < threshold:
            return u % k


@dataclass(frozen=True)
class PermutationMap:
    """Bijection on {0..n-1} with its inverse and originating seed.

    ``forward[i]`` is the source index feeding output slot ``i``; as a
    matrix, Pi[i, forward[i]] = 1.
    """

    forward: np.ndarray
    seed: int
    inverse: np.ndarray = field(init=False)

    def __post_init__(self):
        inv = np.empty_like(self.forward)
        inv[self.forward] = np.arange(self.forward.size)
        object.__setattr__(self, "inverse", inv)
        self.forward.setflags(write=False)
        inv.setflags(write=False)

    @property
    def size(self) -> int:
        return int(self.forward.size)

    def apply(self, v: np.ndarray) -> np.ndarray:
        return v[self.forward]

    def apply_inverse(self, v: np.ndarray) -> np.ndarray:
        return v[self.inverse]

    def matrix(self) -> np.ndarray:
        """Dense 0/1 matrix Pi such that Pi @ v == apply(v) (test helper)."""
        n = self.size
        m = np.zeros((n, n))
        m[np.arange(n), self.forward] = 1.0
        return m


def random_permutation(n: int, seed: int) -> PermutationMap:
    """Uniform random permutation of size ``n`` from the documented PRNG.

    Fisher-Yates, iterating i = n-1 .. 1 and swapping with j drawn
    unbiased from [0, i]; the index stream is SplitMix64(seed).
    """
    if n < 1:
        raise ValueError("permutation size must be >= 1")
    gen = splitmix64(seed)
    perm = list(range(n))
    for i in range(n - 1, 0, -1):
        j = _bounded(gen, i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    return PermutationMap(forward=np.asarray(perm, dtype=np.int64), seed=seed)


def unitary_fft(v: np.ndarray, inverse: bool = False, axis: int = 0) -> np.ndarray:
    """Normalized DFT/IDFT (1/sqrt(N) both directions, hence unitary)."""
    if inverse:
        return np.fft.ifft(v, axis=axis, norm="ortho")
    return np.fft.fft(v, axis=axis, norm="ortho")


def if_transform(s: np.ndarray, perm: PermutationMap, inverse: bool = False) -> np.ndarray:
    """Interleaved inverse-Fourier map: forward is permute(IFFT(s)).

    The inverse applies the inverse permutation followed by the FFT, so
    that the pair is an exact unitary round trip.  Accepts (N,) vectors
    or (N, B) batches along axis 0.
    """
    if s.shape[0] != perm.size:
        raise ValueError(f"length {s.shape[0]} does not match permutation size {perm.size}")
    if inverse:
        return unitary_fft(s[perm.inverse], inverse=False)
    return unitary_fft(s, inverse=True)[perm.forward]


@dataclass(frozen=True)
class SpectralBounds:
    """Eigenvalue bounds of H H^H used to shape the memory filter."""

    lambda_min: float
    lambda_max: float

    def __post_init__(self):
        if not (0.0 <= self.lambda_min <= self.lambda_max):
            raise ValueError("need 0 <= lambda_min <= lambda_max")

    @property
    def center(self) -> float:
        return 0.5 * (self.lambda_min + self.lambda_max)

    @property
    def radius(self) -> float:
        return 0.5 * (self.lambda_max - self.lambda_min)


def spectral_bounds(op, iters: int = 200, rtol: float = 1e-6, seed: int = 0x5EED) -> SpectralBounds:
    """Largest eigenvalue of H H^H by power iteration on matvec/adjoint pairs.

    ``op`` must expose ``matvec``, ``adjoint_matvec`` and ``in_dim``.
    Returns lambda_min = 0 (a safe lower bound) unless the operator
    reports an exact spectrum via ``exact_gram_eigenvalues()``.
    """
    exact = getattr(op, "exact_gram_eigenvalues", None)
    if exact is not None:
        eig = exact()
        if eig is not None:
            eig = np.asarray(eig, dtype=float)
            return SpectralBounds(float(eig.min()), float(eig.max()))

    rng = np.random.Generator(np.random.Philox(key=seed))
    n = op.in_dim
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    nrm = np.linalg.norm(v)
    if nrm == 0:
        return SpectralBounds(0.0, 0.0)
    v /= nrm
    lam = 0.0
    for _ in range(iters):
        w = op.adjoint_matvec(op.matvec(v))
        nrm = np.linalg.norm(w)
        if nrm <= 1e-300:
            return SpectralBounds(0.0, 0.0)
        lam_new = float(np.real(np.vdot(v, w)))
        v = w / nrm
        if lam > 0 and abs(lam_new - lam) <= rtol * lam:
            lam = lam_new
            break
        lam = lam_new
    # mild inflation keeps the estimate an upper envelope despite the
    # from-below convergence of power iteration
    return SpectralBounds(0.0, lam * (1.0 + 10.0 * rtol))
