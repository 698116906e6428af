"""Fixed C-infinity profiles used for cutoffs and partitions of unity."""
from __future__ import annotations

import numpy as np


def _flat(u: np.ndarray) -> np.ndarray:
    # exp(-1/u) for u > 0, else 0
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = np.exp(-1.0 / u[pos])
    return out


def smooth_step(u) -> np.ndarray:
    """Equal to 1 for ``u <= 0``, 0 for ``u >= 1``, smooth and monotone between."""
    u = np.asarray(u, dtype=float)
    a = _flat(1.0 - u)
    b = _flat(u)
    return a / (a + b)


def bump(v) -> np.ndarray:
    """1 on ``[-1, 1]``, 0 outside ``[-2, 2]``."""
    return smooth_step(np.abs(np.asarray(v, dtype=float)) - 1.0)


def chi(lam) -> np.ndarray:
    """Cutoff near the origin: 1 for ``lam <= 1/2``, 0 for ``lam >= 1``."""
    return smooth_step(2.0 * np.asarray(lam, dtype=float) - 1.0)


def chi_alternate(lam) -> np.ndarray:
    """Second cutoff: 1 for ``lam <= 1/2``, 0 for ``lam >= 2``."""
    return smooth_step((np.asarray(lam, dtype=float) - 0.5) / 1.5)
