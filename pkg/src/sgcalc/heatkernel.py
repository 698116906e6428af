"""Heat kernels from eigen-decompositions and the sub-Gaussian inequalities.

Kernels are taken relative to the measure: for M-orthonormal eigenvectors
``phi_k`` the kernel of ``exp(-tL)`` is ``sum_k exp(-t lam_k) phi_k(x) phi_k(y)``
and ``(exp(-tL) f)(x) = sum_y p_t(x, y) f(y) mu(y)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .eigensolver import EigenDecomposition
from .errors import DomainError
from .gasket import WALK_DIMENSION, ball_masses

B_PROBE = 0.05


@dataclass(frozen=True)
class HeatKernelField:
    time: complex
    values: np.ndarray

    def diagonal(self) -> np.ndarray:
        return np.diag(self.values)


@dataclass(frozen=True)
class GaussianFit:
    C: float
    b: float
    m: float
    decay_exponent: float
    window: tuple[float, float]
    times: tuple[float, ...]
    samples: int
    C_by_b: dict

    def bound(self, rho: np.ndarray, ball: np.ndarray, t: float) -> np.ndarray:
        """Right-hand side of the Gaussian bound for distances ``rho``."""
        return self.C / ball * np.exp(-self.b * rho ** (self.m / (self.m - 1)) / t ** (1 / (self.m - 1)))


def resolved_window(level: int) -> tuple[float, float]:
    """Times a level-``level`` graph resolves: below ``5**-level`` the
    discreteness shows, above ``5**-2`` the spectral gap dominates."""
    return 5.0 ** (-level), 5.0 ** (-2)


def heat_kernel(dec: EigenDecomposition, t: complex) -> HeatKernelField:
    if not np.real(t) > 0:
        raise DomainError(f"heat kernel needs Re t > 0, got {t!r}")
    w = np.exp(-t * dec.values)
    if np.isrealobj(w):
        w = w.real
    V = dec.vectors
    P = (V * w[None, :]) @ V.T
    return HeatKernelField(time=t, values=P)


def gaussian_fit(fields, rho: np.ndarray, mass: np.ndarray, m: float = WALK_DIMENSION,
                 window: tuple[float, float] | None = None, b_probe: float = B_PROBE,
                 growth: float = 10.0, b_steps: int = 12) -> GaussianFit:
    """Fit constants in ``|p_t(x,y)| <= C mu(B(y,t^(1/m)))^-1 exp(-b rho^(m/(m-1)) / t^(1/(m-1)))``.

    For each ``b`` in ``b_probe * 2**k`` the smallest admissible ``C(b)`` is
    the sample maximum. The fit keeps the largest ``b`` whose ``C(b)`` stays
    within ``growth`` times ``C(b_probe)``. Also returns the on-diagonal
    decay exponent: minus the slope of ``mean_x log p_t(x,x)`` against
    ``log t``.
    """
    fields = list(fields)
    if window is not None:
        lo, hi = window
        fields = [f for f in fields if lo * (1 - 1e-12) <= np.real(f.time) <= hi * (1 + 1e-12)]
    if not fields:
        raise DomainError("no sampled time lies in the resolved window")
    q = m / (m - 1.0)
    logs = []       # log(|p| * ball) and exponent term per field
    diag = []
    times = []
    for f in fields:
        t = float(np.real(f.time))
        ball = ball_masses(rho, mass, t ** (1.0 / m))[0]
        with np.errstate(divide="ignore"):
            logs.append((np.log(np.abs(f.values) * ball[None, :]), rho**q / t ** (1.0 / (m - 1.0))))
        diag.append(np.mean(np.log(np.abs(np.diag(f.values)))))
        times.append(t)

    def log_C(b: float) -> float:
        return max(float(np.max(a + b * e)) for a, e in logs)

    bs = b_probe * 2.0 ** np.arange(b_steps)
    table = {float(b): math.exp(min(log_C(b), 700.0)) for b in bs}
    base = table[float(bs[0])]
    best = float(bs[0])
    for b in bs:
        if table[float(b)] <= growth * base:
            best = float(b)
    if len(times) > 1:
        slope = -np.polyfit(np.log(times), diag, 1)[0]
    else:
        slope = math.nan
    return GaussianFit(C=table[best], b=best, m=m, decay_exponent=float(slope),
                       window=window or (min(times), max(times)), times=tuple(times),
                       samples=len(times) * rho.size, C_by_b=table)


def diagonal_decay_exponent(dec: EigenDecomposition, times) -> float:
    """Minus the log-log slope of the geometric-mean diagonal ``p_t(x,x)``."""
    times = np.asarray(times, dtype=float)
    V2 = dec.vectors**2
    logs = [np.mean(np.log(V2 @ np.exp(-t * dec.values))) for t in times]
    return float(-np.polyfit(np.log(times), logs, 1)[0])


def tail_mass(field: HeatKernelField, rho: np.ndarray, mass: np.ndarray, y: int, r: float) -> float:
    """``sum over rho(x,y) >= r of |p_t(x,y)|**2 mu(x)``."""
    if r < 0:
        raise DomainError("r must be non-negative")
    col = field.values[:, y]
    tail = rho[:, y] >= r
    return float(np.sum(np.abs(col[tail]) ** 2 * mass[tail]))


def tail_mass_ratio(field: HeatKernelField, rho, mass, y: int, r: float,
                    C: float, b: float, m: float = WALK_DIMENSION) -> float:
    """Tail mass over ``C mu(B(y,t^(1/m)))^-1 exp(-b r^(m/(m-1)) / t^(1/(m-1)))``."""
    t = float(np.real(field.time))
    ball = ball_masses(rho[y], mass, t ** (1.0 / m))[0] if rho.ndim == 1 else \
        float(mass[rho[y] < t ** (1.0 / m)].sum())
    bound = C / ball * math.exp(-b * r ** (m / (m - 1.0)) / t ** (1.0 / (m - 1.0)))
    return tail_mass(field, rho, mass, y, r) / bound


def complex_moment(dec: EigenDecomposition, rho: np.ndarray, mass: np.ndarray, y: int,
                   R: float, tau: float, s: float, m: float = WALK_DIMENSION) -> float:
    """``sum_x |p_{(1+i tau) R^-m}(x,y)|**2 rho(x,y)**s mu(x)``."""
    if not R > 0:
        raise DomainError("R must be positive")
    if s < 0:
        raise DomainError("s must be non-negative")
    t = (1.0 + 1j * tau) * R ** (-m)
    w = np.exp(-t * dec.values) if tau else np.exp(-t.real * dec.values)
    col = dec.vectors @ (w * dec.vectors[y])
    weight = rho[:, y] ** s if s else 1.0
    return float(np.sum(np.abs(col) ** 2 * weight * mass))


def complex_moment_ratio(dec, rho, mass, y: int, R: float, tau: float, s: float,
                         m: float = WALK_DIMENSION) -> float:
    """Moment over ``mu(B(y,1/R))^-1 R^-s (1+|tau|)^s``."""
    ball = float(mass[rho[y] < 1.0 / R].sum())
    scale = R ** (-s) * (1.0 + abs(tau)) ** s / ball
    return complex_moment(dec, rho, mass, y, R, tau, s, m) / scale
