"""Numerical multiplier conditions: dyadic partitions of unity, the
dilation-sup ``W^infinity_s`` norm and the integer-derivative condition.

``W^infinity_s`` norms are estimated on grids with the FFT and carry the
discrepancy between two resolutions as an error bar; they are estimates,
not certified bounds.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import comb

from .calculus import MultiplierSymbol
from .errors import DomainError, SingularSymbolError, UnderResolvedError
from .gasket import WALK_DIMENSION
from .smooth import chi, chi_alternate, smooth_step

#: zero-padding per axis; 2 per axis quadruples the sample count
PAD_FACTOR = 2
RESOLUTION_RTOL = 1e-2
DEFAULT_H = 1.0 / 64
#: finest spacing the adaptive refinement will try (about 2700^2 samples)
DEFAULT_H_MIN = 1.0 / 2048
#: width of the smooth extension of eta~ across the axes
QUADRANT_MARGIN = 0.1


@dataclass(frozen=True)
class EtaProfile:
    """``eta(lam) = chi(lam) - chi(2**m lam)``, supported in ``[lower, upper]``."""

    m: float
    cutoff: Callable[[np.ndarray], np.ndarray] = field(default=chi, repr=False)
    cutoff_upper: float = 1.0
    name: str = "standard"

    def __call__(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=float)
        return self.cutoff(lam) - self.cutoff(2.0**self.m * lam)

    @property
    def lower(self) -> float:
        return 0.5 * 2.0 ** (-self.m)

    @property
    def upper(self) -> float:
        return self.cutoff_upper

    def partial_sum(self, lam, N: int) -> np.ndarray:
        """``sum_{n=-N}^{N} eta(2**(n m) lam)``."""
        lam = np.asarray(lam, dtype=float)
        return sum(self(2.0 ** (n * self.m) * lam) for n in range(-N, N + 1))

    def tilde(self, x, y) -> np.ndarray:
        """``eta(x + y)``, localised to a neighbourhood of the closed quadrant.

        Only the quadrant matters for positive operators; the extra factors
        equal 1 there and make the product compactly supported.
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return (self(x + y) * smooth_step(-x / QUADRANT_MARGIN)
                * smooth_step(-y / QUADRANT_MARGIN))

    def box(self, margin: float = 0.05) -> tuple[float, float, float, float]:
        """Box strictly containing the support of :meth:`tilde`."""
        lo = -QUADRANT_MARGIN - margin
        hi = self.upper + QUADRANT_MARGIN + margin
        return lo, hi, lo, hi


def make_eta(m: float = WALK_DIMENSION, profile: str = "standard") -> EtaProfile:
    if not m > 1:
        raise DomainError("m must exceed 1")
    if profile == "standard":
        return EtaProfile(m=m)
    if profile == "alternate":
        return EtaProfile(m=m, cutoff=chi_alternate, cutoff_upper=2.0, name="alternate")
    raise DomainError(f"unknown eta profile {profile!r}")


@dataclass(frozen=True)
class GridFunction2D:
    """Samples of a function on a uniform grid over ``box = (x0, x1, y0, y1)``.

    ``source`` (when present) lets the grid be resampled at finer spacing.
    """

    box: tuple[float, float, float, float]
    h: float
    values: np.ndarray
    source: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = field(default=None, repr=False)

    @classmethod
    def sample(cls, func, box, h: float) -> "GridFunction2D":
        x0, x1, y0, y1 = box
        nx = int(round((x1 - x0) / h)) + 1
        ny = int(round((y1 - y0) / h)) + 1
        X, Y = np.meshgrid(x0 + h * np.arange(nx), y0 + h * np.arange(ny), indexing="ij")
        with np.errstate(all="ignore"):
            vals = np.asarray(func(X, Y), dtype=float)
        return cls(tuple(box), h, np.broadcast_to(vals, X.shape).copy(), func)

    def refined(self) -> "GridFunction2D":
        if self.source is None:
            raise DomainError("grid has no source function to resample")
        return GridFunction2D.sample(self.source, self.box, self.h / 2)

    def boundary_max(self) -> float:
        v = np.abs(self.values)
        return float(max(v[0].max(), v[-1].max(), v[:, 0].max(), v[:, -1].max()))


@dataclass(frozen=True)
class SobolevNormReport:
    s: float
    value: float
    resolutions: tuple[float, float]
    relative_difference: float
    coarse_value: float


def _bessel_potential_sup(values: np.ndarray, h: float, s: float) -> float:
    nx, ny = values.shape
    Nx, Ny = PAD_FACTOR * nx, PAD_FACTOR * ny
    padded = np.zeros((Nx, Ny))
    padded[:nx, :ny] = values
    if s == 0:
        return float(np.max(np.abs(values)))
    kx = 2 * np.pi * np.fft.fftfreq(Nx, d=h)
    ky = 2 * np.pi * np.fft.rfftfreq(Ny, d=h)
    symbol = (1.0 + kx[:, None] ** 2 + ky[None, :] ** 2) ** (s / 2.0)
    out = np.fft.irfft2(np.fft.rfft2(padded) * symbol, s=(Nx, Ny))
    return float(np.max(np.abs(out)))


def sobolev_inf_norm(G: GridFunction2D, s: float, rtol: float = RESOLUTION_RTOL,
                     support_tol: float = 1e-12) -> SobolevNormReport:
    """Estimate ``||(I - Laplacian)^(s/2) G||_inf`` at spacings ``h`` and ``h/2``.

    The grid is zero-padded to four times its sample count, multiplied by
    ``(1 + |xi|^2)^(s/2)`` in Fourier space and transformed back.
    """
    if s < 0:
        raise DomainError("s must be non-negative")
    if not np.all(np.isfinite(G.values)):
        raise SingularSymbolError("grid function has non-finite samples")
    scale = max(float(np.max(np.abs(G.values))), 1e-300)
    if G.boundary_max() > support_tol * scale:
        raise DomainError("grid function does not vanish on the box boundary")
    fine = G.refined() if G.source is not None else None
    coarse_val = _bessel_potential_sup(G.values, G.h, s)
    return _compare(G, fine, coarse_val, s, rtol)


def _compare(G, fine, coarse_val, s, rtol) -> SobolevNormReport:
    if fine is None:
        return SobolevNormReport(s, coarse_val, (G.h, G.h), 0.0, coarse_val)
    if not np.all(np.isfinite(fine.values)):
        raise SingularSymbolError("grid function has non-finite samples")
    fine_val = _bessel_potential_sup(fine.values, fine.h, s)
    rel = abs(fine_val - coarse_val) / max(abs(fine_val), 1e-300)
    if rel > rtol:
        raise UnderResolvedError(
            f"resolutions {G.h:g} and {fine.h:g} disagree by {rel:.2e} (bound {rtol:g})")
    return SobolevNormReport(s, fine_val, (G.h, fine.h), rel, coarse_val)


def adaptive_sobolev_inf_norm(func, box, s: float, h: float = DEFAULT_H,
                              h_min: float = DEFAULT_H_MIN,
                              rtol: float = RESOLUTION_RTOL) -> SobolevNormReport:
    """Halve ``h`` until two consecutive resolutions agree within ``rtol``.

    Raises :class:`UnderResolvedError` once the fine spacing would drop below
    ``h_min``; the message carries the last discrepancy.
    """
    G = GridFunction2D.sample(func, box, h)
    if not np.all(np.isfinite(G.values)):
        raise SingularSymbolError("grid function has non-finite samples")
    scale = max(float(np.max(np.abs(G.values))), 1e-300)
    if G.boundary_max() > 1e-12 * scale:
        raise DomainError("grid function does not vanish on the box boundary")
    coarse_val = _bessel_potential_sup(G.values, G.h, s)
    while True:
        fine = G.refined()
        if not np.all(np.isfinite(fine.values)):
            raise SingularSymbolError("grid function has non-finite samples")
        fine_val = _bessel_potential_sup(fine.values, fine.h, s)
        rel = abs(fine_val - coarse_val) / max(abs(fine_val), 1e-300)
        if rel <= rtol:
            return SobolevNormReport(s, fine_val, (G.h, fine.h), rel, coarse_val)
        if fine.h / 2 < h_min * (1 - 1e-9):
            raise UnderResolvedError(
                f"resolutions {G.h:g} and {fine.h:g} disagree by {rel:.2e} "
                f"(bound {rtol:g}); finest spacing allowed {h_min:g}")
        G, coarse_val = fine, fine_val


@dataclass(frozen=True)
class HormanderReport:
    symbol: str
    s: float
    value: float
    per_t: dict
    error_bar: float
    homogeneous_shortcut: bool


def default_t_grid(m: float = WALK_DIMENSION, k: int = 8) -> list[float]:
    return [2.0 ** (-m * j) for j in range(-k, k + 1)]


def _check_singular_support(F: MultiplierSymbol, eta: EtaProfile) -> None:
    # A declared singular line l1 = r l2 with r > 0 crosses every dilate of
    # the quadrant part of supp eta~.
    if F.singular_ratio is not None and F.singular_ratio > 0:
        raise SingularSymbolError(
            f"symbol {F.name} is singular on {F.singular_locus}, which meets supp eta~")


def localized(F: MultiplierSymbol, eta: EtaProfile, t: float) -> Callable:
    """``(x, y) -> eta~(x, y) F(t x, t y)``, evaluating F only on the support."""
    ev = F.evaluator

    def g(x, y):
        w = eta.tilde(x, y)
        out = np.zeros(np.shape(w))
        live = w != 0
        if np.any(live):
            out[live] = w[live] * ev(t * x[live], t * y[live])
        return out

    return g


def hormander_sup(F: MultiplierSymbol, eta: EtaProfile, s: float, t_grid=None,
                  h: float = DEFAULT_H, rtol: float = RESOLUTION_RTOL,
                  h_min: float | None = DEFAULT_H_MIN,
                  use_homogeneity: bool = True) -> HormanderReport:
    """``max over t of ||eta~ delta_t F||_{W^inf_s}`` on a dyadic t grid.

    Degree-0 homogeneous symbols (declared and verified) are evaluated once
    unless ``use_homogeneity`` is off. With ``h_min=None`` only the spacings
    ``h`` and ``h/2`` are tried.
    """
    if not s > 0:
        raise DomainError("s must be positive")
    _check_singular_support(F, eta)
    t_grid = list(default_t_grid(eta.m) if t_grid is None else t_grid)
    shortcut = (use_homogeneity and F.homogeneity_degree == 0
                and F.check_homogeneity())
    box = eta.box()
    floor_h = h / 2 if h_min is None else min(h_min, h / 2)

    def norm(t):
        try:
            return adaptive_sobolev_inf_norm(localized(F, eta, float(t)), box, s,
                                             h, floor_h, rtol)
        except SingularSymbolError:
            raise SingularSymbolError(
                f"symbol {F.name} is not finite on supp eta~ at t={t:g}") from None

    if shortcut:
        rep = norm(1.0)
        per_t = {float(t): rep for t in t_grid}
    else:
        per_t = {float(t): norm(t) for t in t_grid}
    value = max(r.value for r in per_t.values())
    err = max(r.relative_difference for r in per_t.values())
    return HormanderReport(symbol=F.name, s=s, value=value,
                           per_t={t: r.value for t, r in per_t.items()},
                           error_bar=err, homogeneous_shortcut=shortcut)


def dilation_spread(F: MultiplierSymbol, eta: EtaProfile, s: float, t_grid,
                    h: float = DEFAULT_H) -> tuple[dict, float]:
    """Single-grid estimates of ``||eta~ delta_t F||_{W^inf_s}`` for each t, and their
    relative spread ``(max - min) / max``.

    The grid is fixed, so the spread isolates the dependence on t from the
    discretisation error; for degree-0 symbols it should vanish.
    """
    _check_singular_support(F, eta)
    box = eta.box()
    vals = {}
    for t in t_grid:
        G = GridFunction2D.sample(localized(F, eta, float(t)), box, h)
        if not np.all(np.isfinite(G.values)):
            raise SingularSymbolError(f"symbol {F.name} is not finite on supp eta~ at t={t:g}")
        vals[float(t)] = _bessel_potential_sup(G.values, h, s)
    top = max(vals.values())
    spread = (top - min(vals.values())) / top if top > 0 else 0.0
    return vals, spread


@dataclass(frozen=True)
class DerivativeReport:
    order: int
    sups: dict        # (i, j) -> sup |lam|^(i+j) |d^(i,j) F|
    k_range: tuple[int, int]

    @property
    def finite(self) -> bool:
        return all(math.isfinite(v) for v in self.sups.values())


def required_order(d1: float, d2: float) -> int:
    return int(math.floor((d1 + d2) / 2.0)) + 1


def _difference(F: MultiplierSymbol, x: np.ndarray, y: np.ndarray, i: int, j: int,
                hx: np.ndarray) -> np.ndarray:
    """Central difference approximation to ``d^i_x d^j_y F``."""
    total = np.zeros_like(x)
    for a in range(i + 1):
        for b in range(j + 1):
            coef = (-1) ** (a + b) * comb(i, a) * comb(j, b)
            total += coef * F(x + (i / 2 - a) * hx, y + (j / 2 - b) * hx)
    return total / hx ** (i + j)


def derivative_condition(F: MultiplierSymbol, d1: float, d2: float,
                         k_range: tuple[int, int] = (-20, 20), radial: int = 4,
                         angles: int = 33, angle_margin: float = 0.05,
                         rel_step: float = 1e-4) -> DerivativeReport:
    """Estimate ``sup |lam|^|I| |d^I F(lam)|`` over dyadic annuli in the open quadrant.

    Every multi-index with ``|I| <= floor((d1+d2)/2) + 1`` is covered; the
    step on the annulus ``|lam| ~ 2^k`` is ``2^k * rel_step``. Angles stay
    ``angle_margin`` radians away from the axes.
    """
    order = required_order(d1, d2)
    th = np.linspace(angle_margin, np.pi / 2 - angle_margin, angles)
    ks = np.arange(k_range[0], k_range[1] + 1)
    fr = np.linspace(0.0, 1.0, radial, endpoint=False)
    radius = (2.0 ** ks[:, None] * 2.0 ** fr[None, :]).ravel()
    Rr, Tt = np.meshgrid(radius, th, indexing="ij")
    x, y = Rr * np.cos(Tt), Rr * np.sin(Tt)
    step = np.exp2(np.floor(np.log2(Rr))) * rel_step
    sups = {}
    with np.errstate(all="ignore"):
        for total in range(order + 1):
            for i in range(total + 1):
                j = total - i
                D = F(x, y) if total == 0 else _difference(F, x, y, i, j, step)
                val = Rr**total * np.abs(D)
                if not np.all(np.isfinite(val)):
                    raise SingularSymbolError(f"non-finite differences of {F.name} for I=({i},{j})")
                sups[(i, j)] = float(val.max())
    return DerivativeReport(order=order, sups=sups, k_range=tuple(k_range))
