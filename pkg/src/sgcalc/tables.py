"""Sampled constants for the kernel inequalities, one row per parameter set.

Every table reports the smallest constant that makes the inequality hold
on the sample. Rows whose ball radius falls below the graph's smallest
positive distance are flagged ``resolved=False``: such a ball holds one
vertex and the constant there measures the discretisation, not the space.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import calculus, heatkernel
from .gasket import WALK_DIMENSION, GasketSpace, ball_masses, weighted_tail_integral

TAUS = (0.0, 1.0, 2.0, 4.0, 8.0)
MOMENT_ORDERS = (0.0, 2.0)
TIMES = (5.0**-2, 5.0**-1, 1.0)
RADII = (2.0, 4.0, 8.0)
TAIL_DISTANCES = (0.0, 0.1, 0.2, 0.4, 0.6)
TAIL_RATE = 0.4
WAGA_ORDER = 3.0


@dataclass(frozen=True)
class LemmaRow:
    lemma: str
    level: int
    params: dict
    constant: float
    resolved: bool

    def flat(self) -> dict:
        out = asdict(self)
        out.update(out.pop("params"))
        return out


def _balls(sp: GasketSpace, r: float) -> np.ndarray:
    return ball_masses(sp.rho, sp.mass, r)[0]


def ltu_table(sp: GasketSpace, times=TIMES, distances=TAIL_DISTANCES,
              b: float = TAIL_RATE, m: float = WALK_DIMENSION) -> list[LemmaRow]:
    """``sup_y mu(B(y,t^(1/m))) e^(b r^(m/(m-1)) / t^(1/(m-1))) int_{rho >= r} |p_t(., y)|^2``.

    The ``r = 0`` row is the squared-norm bound ``||p_t(., y)||^2 <= C / mu(B)``.
    """
    dec = sp.decomposition
    rmin = float(sp.rho[sp.rho > 0].min())
    rows = []
    for t in times:
        P2 = heatkernel.heat_kernel(dec, t).values ** 2 * sp.mass[:, None]
        radius = t ** (1.0 / m)
        ball = _balls(sp, radius)
        for r in distances:
            tail = np.where(sp.rho >= r, P2, 0.0).sum(axis=0)
            decay = math.exp(b * r ** (m / (m - 1.0)) / t ** (1.0 / (m - 1.0)))
            rows.append(LemmaRow("ltu", sp.level, {"t": t, "r": r, "b": b},
                                 float(np.max(tail * ball * decay)), radius >= rmin))
    return rows


def jeden_table(sp: GasketSpace, times=TIMES, taus=TAUS, orders=MOMENT_ORDERS,
                m: float = WALK_DIMENSION) -> list[LemmaRow]:
    """``sup_y`` of the weighted complex-time moment over ``mu(B(y,1/R))^-1 R^-s (1+|tau|)^s``,
    with ``R = t^(-1/m)``."""
    dec = sp.decomposition
    rmin = float(sp.rho[sp.rho > 0].min())
    rows = []
    for t in times:
        R = t ** (-1.0 / m)
        ball = _balls(sp, 1.0 / R)
        for tau in taus:
            w = np.exp(-(1.0 + 1j * tau) * t * dec.values)
            K = np.abs((dec.vectors * w) @ dec.vectors.T) ** 2 * sp.mass[:, None]
            for s in orders:
                mom = (K * sp.rho**s).sum(axis=0) if s else K.sum(axis=0)
                ratio = mom * ball / (R ** (-s) * (1.0 + abs(tau)) ** s)
                rows.append(LemmaRow("jeden", sp.level, {"t": t, "R": R, "tau": tau, "s": s},
                                     float(np.max(ratio)), 1.0 / R >= rmin))
    return rows


def waga2_table(sp: GasketSpace, radii=RADII, s: float = WAGA_ORDER) -> list[LemmaRow]:
    """``sup_y mu(B(y,1/R))^-1 sum_x (1 + R rho(x,y))^-s mu(x)``."""
    rmin = float(sp.rho[sp.rho > 0].min())
    rows = []
    for R in radii:
        ball = _balls(sp, 1.0 / R)
        vals = [weighted_tail_integral(sp.rho, sp.mass, y, R, s, 0.0) / ball[y]
                for y in range(sp.size)]
        rows.append(LemmaRow("waga2", sp.level, {"R": R, "s": s}, float(max(vals)),
                             1.0 / R >= rmin))
    return rows


def lemma_p_table(sp: GasketSpace, radii=RADII, m: float = WALK_DIMENSION) -> list[LemmaRow]:
    """Lemma P constants for ``e^(-(l1+l2)/R^m)`` cut to ``[0, R^m]^2``."""
    rmin = float(sp.rho[sp.rho > 0].min())
    base = calculus.ProductOperator(sp.decomposition, sp.decomposition, calculus.constant_symbol())
    rows = []
    for R in radii:
        F = calculus.support_cutoff_symbol(calculus.heat_symbol(R**-m, R**-m), R, m)
        rep = calculus.lemma_p_check(base.with_symbol(F), R, sp.rho, sp.rho, m)
        rows.append(LemmaRow("P", sp.level, {"R": R}, rep.C, 1.0 / R >= rmin))
    return rows


def all_tables(sp: GasketSpace) -> list[LemmaRow]:
    return ltu_table(sp) + jeden_table(sp) + waga2_table(sp) + lemma_p_table(sp)


def stability(rows_a: list[LemmaRow], rows_b: list[LemmaRow], factor: float = 2.0) -> dict:
    """Per-lemma sup over rows resolved at both levels, and whether they agree within ``factor``."""
    out = {}
    for name in sorted({r.lemma for r in rows_a}):
        pairs = [(a, b) for a, b in zip(rows_a, rows_b)
                 if a.lemma == name and a.resolved and b.resolved]
        sa = max(a.constant for a, _ in pairs)
        sb = max(b.constant for _, b in pairs)
        finite = all(math.isfinite(a.constant) and math.isfinite(b.constant)
                     for a, b in zip(rows_a, rows_b) if a.lemma == name)
        ok = finite and sa > 0 and sb > 0 and max(sa / sb, sb / sa) <= factor
        out[name] = {"first": sa, "second": sb, "rows": len(pairs), "finite": finite, "stable": ok}
    return out
