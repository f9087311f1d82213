"""Shared detector plumbing: posterior-mean denoiser and iteration traces."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .constellation import Constellation

__all__ = ["DetectorError", "mmse_denoise", "DetectorTrace"]

V_FLOOR = 1e-12  # variance underflow clamp, documented behavior


class DetectorError(RuntimeError):
    """Raised when a detector cannot produce an estimate (singular system)."""


def mmse_denoise(
    r: np.ndarray, v: float, c: Constellation
) -> tuple[np.ndarray, float]:
    """Entry-wise posterior mean of s under r = s + CN(0, v), s uniform on c.

    Returns the posterior means and the scalar posterior variance (average
    per-entry conditional variance).  ``v`` is clamped at 1e-12 below; at
    the clamp the result is the hard decision with essentially zero
    variance.
    """
    v = max(float(v), V_FLOOR)
    r = np.asarray(r)
    # log-weights, stabilized per entry
    d2 = np.abs(r[:, None] - c.points[None, :]) ** 2
    logw = -d2 / v
    logw -= logw.max(axis=1, keepdims=True)
    w = np.exp(logw)
    w /= w.sum(axis=1, keepdims=True)
    means = w @ c.points
    second = w @ (np.abs(c.points) ** 2)
    per_entry_var = np.maximum(second - np.abs(means) ** 2, 0.0)
    return means, float(per_entry_var.mean())


@dataclass
class DetectorTrace:
    """Per-iteration diagnostics of an iterative detector."""

    v_gamma: list = field(default_factory=list)
    v_phi: list = field(default_factory=list)
    zeta: list = field(default_factory=list)
    micros: list = field(default_factory=list)
    ks_stat: list = field(default_factory=list)
    converged: bool = False
    aborted: str | None = None
    best_iteration: int = 0
    # optional signal captures (enabled on demand, used by statistical probes)
    captured_r: list = field(default_factory=list)
    captured_r_tilde: list = field(default_factory=list)
    captured_inputs: list = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.v_gamma)

    def to_jsonl(self) -> str:
        """One JSON object per iteration: {t, v_gamma, v_phi, zeta, ks_stat?, micros}."""
        lines = []
        for i in range(self.iterations):
            rec = {
                "t": i + 1,
                "v_gamma": self.v_gamma[i],
                "v_phi": self.v_phi[i],
                "zeta": list(self.zeta[i]),
                "micros": self.micros[i],
            }
            if i < len(self.ks_stat) and self.ks_stat[i] is not None:
                rec["ks_stat"] = self.ks_stat[i]
            lines.append(json.dumps(rec))
        return "\n".join(lines)
