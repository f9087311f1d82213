"""One-shot LMMSE detection against the symbol-domain channel."""

from __future__ import annotations

import numpy as np

from ..waveforms import EffectiveChannel
from .common import DetectorError

__all__ = ["lmmse_detect"]


def lmmse_detect(h_eff: EffectiveChannel, y_hat: np.ndarray, sigma2: float) -> np.ndarray:
    """s_hat = H^H (H H^H + sigma2 I)^-1 y_hat under a unit-power prior.

    Scalar Wiener filter per entry when the channel is diagonal, dense
    O(N^3) solve otherwise.  A singular system (possible only at
    sigma2 = 0 with a rank-deficient channel) raises DetectorError.
    """
    if sigma2 < 0:
        raise ValueError("sigma2 must be nonnegative")
    if h_eff.diagonal is not None:
        lam = h_eff.diagonal
        return np.conj(lam) * y_hat / (np.abs(lam) ** 2 + sigma2)
    h = h_eff.dense()
    gram = h @ h.conj().T
    gram[np.diag_indices_from(gram)] += sigma2
    try:
        z = np.linalg.solve(gram, y_hat)
    except np.linalg.LinAlgError as exc:
        raise DetectorError(f"singular LMMSE system: {exc}") from exc
    return h.conj().T @ z
