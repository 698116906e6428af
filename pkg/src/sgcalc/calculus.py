"""Bivariate functional calculus ``F(L1, L2)`` on a product of two gaskets.

With M-orthonormal eigenbases ``V1, V2`` the operator acts on an
``(n1, n2)`` array ``f`` by

    g = V1 (F(lam_i, mu_j) * (V1^T M1 f M2 V2)) V2^T,

so the ``n1*n2`` square matrix is never formed.  Kernels are relative to
the product measure ``mu_P = mu1 x mu2``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from .eigensolver import EigenDecomposition
from .errors import BudgetExceeded, DomainError, SingularSymbolError
from .gasket import WALK_DIMENSION, GasketSpace
from .smooth import bump, chi

PRODUCT_BUDGET = 20_000
#: relative size of ``c l1 - d l2`` treated as hitting the singular line
SINGULAR_RTOL = 1e-12


class CutoffWarning(UserWarning):
    """The cutoff support meets attained spectral pairs."""


@dataclass(frozen=True)
class JointSpectrum:
    first: np.ndarray
    second: np.ndarray

    @property
    def pairs(self) -> np.ndarray:
        """Array of shape (n1*n2, 2); row ``i*n2 + j`` is ``(first[i], second[j])``."""
        a, b = np.meshgrid(self.first, self.second, indexing="ij")
        return np.column_stack([a.ravel(), b.ravel()])

    def __len__(self) -> int:
        return self.first.size * self.second.size

    def ratios(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return (self.first[:, None] / self.second[None, :]).ravel()


@dataclass(frozen=True)
class MultiplierSymbol:
    """A function ``F(l1, l2)`` evaluated elementwise on arrays.

    ``singular_ratio`` is the slope ``l1/l2`` of a line on which F blows
    up, if any; ``sup_norm`` is the supremum of ``|F|`` on the closed
    positive quadrant when known.
    """

    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray]
    name: str = "F"
    homogeneity_degree: int | None = None
    singular_ratio: float | None = None
    sup_norm: float | None = None

    def __call__(self, l1, l2) -> np.ndarray:
        l1 = np.asarray(l1, dtype=float)
        l2 = np.asarray(l2, dtype=float)
        return np.asarray(self.evaluator(*np.broadcast_arrays(l1, l2)))

    @property
    def singular_locus(self) -> str | None:
        if self.singular_ratio is None:
            return None
        return f"l1 = {self.singular_ratio:.12g} * l2"

    def dilate(self, t: float) -> "MultiplierSymbol":
        """``delta_t F (l) = F(t l)``."""
        ev = self.evaluator
        ratio = self.singular_ratio
        return MultiplierSymbol(lambda a, b: ev(t * a, t * b), name=f"{self.name}(t={t:g})",
                                homogeneity_degree=self.homogeneity_degree,
                                singular_ratio=ratio, sup_norm=self.sup_norm)

    def __mul__(self, other: "MultiplierSymbol") -> "MultiplierSymbol":
        f, g = self.evaluator, other.evaluator
        deg = None
        if self.homogeneity_degree is not None and other.homogeneity_degree is not None:
            deg = self.homogeneity_degree + other.homogeneity_degree
        sing = self.singular_ratio if self.singular_ratio is not None else other.singular_ratio
        sup = None
        if self.sup_norm is not None and other.sup_norm is not None:
            sup = self.sup_norm * other.sup_norm
        return MultiplierSymbol(lambda a, b: f(a, b) * g(a, b), name=f"{self.name}*{other.name}",
                                homogeneity_degree=deg, singular_ratio=sing, sup_norm=sup)

    def scaled(self, c: float) -> "MultiplierSymbol":
        f = self.evaluator
        sup = None if self.sup_norm is None else abs(c) * self.sup_norm
        return MultiplierSymbol(lambda a, b: c * f(a, b), name=f"{c:g}*{self.name}",
                                homogeneity_degree=self.homogeneity_degree,
                                singular_ratio=self.singular_ratio, sup_norm=sup)

    def check_homogeneity(self, samples: int = 100, seed: int = 0, tol: float = 1e-12,
                          factor: float = 2.0) -> bool:
        """Test ``F(c l) = c**h F(l)`` at random points of the open quadrant."""
        if self.homogeneity_degree is None:
            return False
        rng = np.random.default_rng(seed)
        a, b = rng.uniform(0.05, 10.0, (2, samples))
        base = self(a, b)
        ok = np.isfinite(base)
        scaled = self(factor * a[ok], factor * b[ok])
        expected = factor**self.homogeneity_degree * base[ok]
        return bool(np.all(np.abs(scaled - expected) <= tol * np.maximum(1.0, np.abs(expected))))


def constant_symbol(c: float = 1.0) -> MultiplierSymbol:
    return MultiplierSymbol(lambda a, b: np.full(np.shape(a), float(c)), name=f"const({c:g})",
                            homogeneity_degree=0, sup_norm=abs(c))


def heat_symbol(s: float, t: float) -> MultiplierSymbol:
    """``exp(-s l1 - t l2)``."""
    return MultiplierSymbol(lambda a, b: np.exp(-s * a - t * b), name=f"heat({s:g},{t:g})",
                            sup_norm=1.0)


def coordinate_symbol(j: int) -> MultiplierSymbol:
    """``l1`` (j=0) or ``l2`` (j=1)."""
    return MultiplierSymbol((lambda a, b: a * 1.0) if j == 0 else (lambda a, b: b * 1.0),
                            name=f"l{j + 1}", homogeneity_degree=1)


def _quasielliptic_denominator(c: float, d: float, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    den = c * a - d * b
    scale = np.abs(c * a) + np.abs(d * b)
    return np.where(np.abs(den) <= SINGULAR_RTOL * scale, np.nan, den)


def riesz_symbols(a: float, b: float, c: float, d: float) -> tuple[MultiplierSymbol, MultiplierSymbol]:
    """``(a l1 + b l2)/(c l1 - d l2)`` and ``l1 l2 / (c l1 - d l2)**2``.

    Both are homogeneous of degree 0 and singular on ``c l1 = d l2``; the
    evaluators return ``nan`` on (and numerically at) that line.
    """
    if not (c > 0 and d > 0):
        raise DomainError("c and d must be positive")

    def first(x, y):
        with np.errstate(divide="ignore", invalid="ignore"):
            return (a * x + b * y) / _quasielliptic_denominator(c, d, x, y)

    def second(x, y):
        with np.errstate(divide="ignore", invalid="ignore"):
            return x * y / _quasielliptic_denominator(c, d, x, y) ** 2

    ratio = d / c
    return (MultiplierSymbol(first, name=f"riesz1({a:g},{b:g},{c:g},{d:g})",
                             homogeneity_degree=0, singular_ratio=ratio),
            MultiplierSymbol(second, name=f"riesz2({c:g},{d:g})",
                             homogeneity_degree=0, singular_ratio=ratio))


@dataclass(frozen=True)
class CutoffOmega:
    """``omega(l1, l2) = bump((l1/l2 - gamma)/sigma)``; zero where ``l2 = 0``."""

    gamma: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError("sigma must be positive")

    def __call__(self, l1, l2) -> np.ndarray:
        l1, l2 = np.broadcast_arrays(np.asarray(l1, dtype=float), np.asarray(l2, dtype=float))
        out = np.zeros(l1.shape)
        ok = l2 != 0
        out[ok] = bump((l1[ok] / l2[ok] - self.gamma) / self.sigma)
        return out

    def covers(self, ratio: float) -> bool:
        """Whether omega equals 1 on a neighbourhood of the line ``l1 = ratio l2``."""
        return abs(ratio - self.gamma) < self.sigma


def zero_cutoff() -> CutoffOmega:
    """An omega that vanishes identically on the quadrant."""
    return CutoffOmega(gamma=-10.0, sigma=1.0)


def cutoff_multiply(F: MultiplierSymbol, omega: CutoffOmega,
                    spectra: tuple[np.ndarray, np.ndarray] | None = None) -> MultiplierSymbol:
    """``(1 - omega) F``; F is never evaluated where omega = 1.

    If ``spectra`` is given and an attained ratio lies within ``2 sigma``
    of ``gamma``, a :class:`CutoffWarning` is issued: there the operators of
    ``F`` and ``(1 - omega) F`` differ.
    """
    if spectra is not None:
        s1, s2 = (np.asarray(s, dtype=float) for s in spectra)
        pos = s2[None, :] > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(pos, s1[:, None] / np.where(pos, s2[None, :], 1.0), np.inf)
        if np.any(np.abs(r - omega.gamma) < 2 * omega.sigma):
            warnings.warn("cutoff support meets attained spectral pairs; "
                          "(1-omega)F(L1,L2) differs from F(L1,L2)", CutoffWarning, stacklevel=2)
    f = F.evaluator

    def ev(a, b):
        w = omega(a, b)
        out = np.zeros(np.shape(a))
        live = w < 1.0
        if np.any(live):
            out[live] = (1.0 - w[live]) * f(a[live], b[live])
        return out

    sing = F.singular_ratio
    if sing is not None and omega.covers(sing):
        sing = None
    deg = 0 if F.homogeneity_degree == 0 else None
    return MultiplierSymbol(ev, name=f"(1-w){F.name}", homogeneity_degree=deg,
                            singular_ratio=sing, sup_norm=None)


@dataclass(frozen=True)
class ProductOperator:
    """Lazy ``F(L1, L2)``; the multiplier table is checked once for finiteness."""

    dec1: EigenDecomposition
    dec2: EigenDecomposition
    symbol: MultiplierSymbol
    multipliers: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        lam1 = self.dec1.values[:, None]
        lam2 = self.dec2.values[None, :]
        with np.errstate(all="ignore"):
            table = np.asarray(self.symbol(lam1, lam2))
        table = np.broadcast_to(table, (lam1.size, lam2.size)).copy()
        bad = ~np.isfinite(table)
        if np.any(bad):
            i, j = np.argwhere(bad)[0]
            raise SingularSymbolError(
                f"symbol {self.symbol.name} is not finite at the attained pair "
                f"({self.dec1.values[i]:.6g}, {self.dec2.values[j]:.6g}); "
                f"{int(bad.sum())} singular pairs in total")
        object.__setattr__(self, "multipliers", table)

    @classmethod
    def on(cls, space1: GasketSpace, symbol: MultiplierSymbol,
           space2: GasketSpace | None = None) -> "ProductOperator":
        space2 = space1 if space2 is None else space2
        return cls(space1.decomposition, space2.decomposition, symbol)

    @property
    def shape(self) -> tuple[int, int]:
        return self.dec1.size, self.dec2.size

    @property
    def size(self) -> int:
        return self.dec1.size * self.dec2.size

    @property
    def mass(self) -> np.ndarray:
        """Product measure as an ``(n1, n2)`` array."""
        return np.outer(self.dec1.weight, self.dec2.weight)

    def with_symbol(self, symbol: MultiplierSymbol) -> "ProductOperator":
        return ProductOperator(self.dec1, self.dec2, symbol)

    def transform(self, f: np.ndarray) -> np.ndarray:
        """Coefficients in the tensor eigenbasis."""
        V1, V2 = self.dec1.vectors, self.dec2.vectors
        return V1.T @ (self.dec1.weight[:, None] * f * self.dec2.weight[None, :]) @ V2

    def synthesize(self, coef: np.ndarray) -> np.ndarray:
        return self.dec1.vectors @ coef @ self.dec2.vectors.T

    def apply(self, f: np.ndarray) -> np.ndarray:
        f = np.asarray(f)
        if f.shape != self.shape:
            raise DomainError(f"expected data of shape {self.shape}, got {f.shape}")
        return self.synthesize(self.multipliers * self.transform(f))

    def adjoint_apply(self, f: np.ndarray) -> np.ndarray:
        f = np.asarray(f)
        if f.shape != self.shape:
            raise DomainError(f"expected data of shape {self.shape}, got {f.shape}")
        return self.synthesize(np.conj(self.multipliers) * self.transform(f))

    def _split(self, y) -> tuple[int, int]:
        n1, n2 = self.shape
        if np.isscalar(y):
            y = int(y)
            if not 0 <= y < n1 * n2:
                raise DomainError(f"product vertex index {y} out of range")
            return divmod(y, n2)
        y1, y2 = (int(v) for v in y)
        if not (0 <= y1 < n1 and 0 <= y2 < n2):
            raise DomainError(f"product vertex {y} out of range")
        return y1, y2

    def kernel_column(self, y) -> np.ndarray:
        """``K(., y)`` as an ``(n1, n2)`` array; ``y`` is a pair or a flat index."""
        y1, y2 = self._split(y)
        V1, V2 = self.dec1.vectors, self.dec2.vectors
        return V1 @ (self.multipliers * np.outer(V1[y1], V2[y2])) @ V2.T

    def kernel_block(self, y1: int) -> np.ndarray:
        """``K[a, b, d] = K((a, b), (y1, d))`` for every second coordinate d."""
        V1, V2 = self.dec1.vectors, self.dec2.vectors
        n1, n2 = self.shape
        W = V1 @ (self.multipliers * V1[y1][:, None])          # (n1, n2)
        return ((W[:, None, :] * V2[None, :, :]).reshape(n1 * n2, n2) @ V2.T).reshape(n1, n2, n2)

    def kernel_matrix(self) -> np.ndarray:
        """Full kernel ``K[x, y]`` on flattened product vertices (small sizes only)."""
        self._check_budget(None)
        V = np.kron(self.dec1.vectors, self.dec2.vectors)
        return (V * self.multipliers.ravel()[None, :]) @ V.T

    def dense_matrix(self) -> np.ndarray:
        """Matrix of the operator acting on flattened data: ``K diag(mu_P)``."""
        return self.kernel_matrix() * self.mass.ravel()[None, :]

    def _check_budget(self, samples: int | None) -> None:
        if self.size > PRODUCT_BUDGET and samples is None:
            raise BudgetExceeded(
                f"product size {self.size} exceeds {PRODUCT_BUDGET}; pass samples= for a sampled sup")

    def column_blocks(self, samples: int | None = None, seed: int = 0) -> Iterator[tuple[int, np.ndarray]]:
        """Yield ``(y1, kernel_block(y1))``; all ``y1`` unless the budget forces sampling."""
        n1 = self.shape[0]
        if self.size <= PRODUCT_BUDGET:
            rows = range(n1)
        else:
            self._check_budget(samples)
            rng = np.random.default_rng(seed)
            rows = np.sort(rng.choice(n1, size=min(samples, n1), replace=False))
        for y1 in rows:
            yield int(y1), self.kernel_block(int(y1))

    def is_sampled(self) -> bool:
        return self.size > PRODUCT_BUDGET


def joint_spectrum(dec1: EigenDecomposition, dec2: EigenDecomposition) -> JointSpectrum:
    return JointSpectrum(dec1.values.copy(), dec2.values.copy())


def product_metric(rho1: np.ndarray, rho2: np.ndarray) -> np.ndarray:
    """``rho_P[(a,b),(c,d)] = max(rho1[a,c], rho2[b,d])`` as a 4-d array."""
    return np.maximum(rho1[:, None, :, None], rho2[None, :, None, :])


def l2_norm(op: ProductOperator) -> float:
    """Exact operator norm on ``L^2(mu_P)``: the largest attained ``|F|``."""
    return float(np.max(np.abs(op.multipliers)))


def l1_norm(op: ProductOperator, samples: int | None = None, seed: int = 0) -> float:
    """``sup_y sum_x |K(x, y)| mu_P(x)``, the norm on ``L^1(mu_P)``."""
    mass = op.mass
    best = 0.0
    for _, block in op.column_blocks(samples, seed):
        col_norms = np.einsum("abd,ab->d", np.abs(block), mass)
        best = max(best, float(col_norms.max()))
    return best


def weak11_quantity(op: ProductOperator, samples: int | None = None, seed: int = 0) -> float:
    """``sup_y sup_lam lam * mu_P{x : |K(x, y)| > lam}`` over normalised atoms.

    For thresholds just below each attained value ``v`` the product tends
    to ``v * mu_P{|K| >= v}``, which is what is scanned.
    """
    mass = op.mass.ravel()
    best = 0.0
    for _, block in op.column_blocks(samples, seed):
        n1, n2, _ = block.shape
        cols = np.abs(block.reshape(n1 * n2, n2)).T      # one row per column y
        order = np.argsort(-cols, axis=1, kind="stable")
        vals = np.take_along_axis(cols, order, axis=1)
        cum = np.cumsum(mass[order], axis=1)
        best = max(best, float(np.max(vals * cum)))
    return best


def _lp_norm(f: np.ndarray, mass: np.ndarray, p: float) -> float:
    return float(np.sum(np.abs(f) ** p * mass) ** (1.0 / p))


def _dual(g: np.ndarray, p: float) -> np.ndarray:
    """The norming function of ``g`` in ``L^p``: ``|g|^(p-1) sgn g`` (unnormalised)."""
    a = np.abs(g)
    scale = a.max()
    if scale == 0:
        return np.zeros_like(g)
    return (a / scale) ** (p - 1.0) * np.sign(g)


def lp_lower_bound(op: ProductOperator, p: float, starts: int = 8, seed: int = 0,
                   iterations: int = 300, rtol: float = 1e-14) -> float:
    """Lower bound on ``||F(L1,L2)||_{p -> p}`` by a duality ascent.

    From each seeded start, alternate ``g = T f``, ``h = T* J_p(g)``,
    ``f = J_q(h)`` with ``J_p`` the norming map; the ratio
    ``||T f||_p / ||f||_p`` does not decrease along the iteration.
    """
    if not p > 1:
        raise DomainError("p must exceed 1")
    q = p / (p - 1.0)
    mass = op.mass
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(starts):
        f = rng.standard_normal(op.shape)
        ratio_prev = 0.0
        for _ in range(iterations):
            nf = _lp_norm(f, mass, p)
            if nf == 0:
                break
            f = f / nf
            g = op.apply(f)
            ratio = _lp_norm(g, mass, p)
            best = max(best, ratio)
            if ratio - ratio_prev <= rtol * max(ratio, 1e-300):
                break
            ratio_prev = ratio
            h = op.adjoint_apply(_dual(g, p))
            f = _dual(h, q)
    return best


def riesz_thorin_bound(l1: float, l2: float, p: float) -> float:
    """Interpolation bound ``||T||_p <= ||T||_1^theta ||T||_2^(1-theta)``, self-adjoint T.

    ``theta = |2/p - 1|``; for ``p > 2`` duality turns the ``L^1`` norm
    into the ``L^infinity`` one, which is equal for self-adjoint T.
    """
    theta = abs(2.0 / p - 1.0)
    return l1**theta * l2 ** (1.0 - theta)


def ratio_gaps(spectrum, window: tuple[float, float], spectrum2=None,
               rtol: float = 1e-12) -> list[tuple[float, float]]:
    """Maximal open subintervals of ``window`` free of ratios ``l_i / l_j``.

    Ratios are taken within one spectrum, or between ``spectrum`` (numerator)
    and ``spectrum2`` (denominator) when given.
    """
    s1 = np.asarray(spectrum, dtype=float)
    s2 = s1 if spectrum2 is None else np.asarray(spectrum2, dtype=float)
    if s1.size == 0 or s2.size == 0:
        raise DomainError("spectrum must be non-empty")
    if np.any(s1 <= 0) or np.any(s2 <= 0):
        raise DomainError("spectrum must be positive")
    lo, hi = window
    r = (s1[:, None] / s2[None, :]).ravel()
    r = np.unique(r[(r > lo) & (r < hi)])
    if r.size:
        keep = np.concatenate([[True], np.diff(r) > rtol * r[1:]])
        r = r[keep]
    edges = np.concatenate([[lo], r, [hi]])
    return [(float(a), float(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


@dataclass(frozen=True)
class QuasiellipticReport:
    ratio: float
    min_gap: float
    in_gap: bool
    gap: tuple[float, float] | None


def quasielliptic_check(c: float, d: float, spectra, window: tuple[float, float] | None = None,
                        rtol: float = 1e-12) -> QuasiellipticReport:
    """Relative distance of ``c L1 - d L2`` from singularity on the joint spectrum.

    ``spectra`` is one spectrum (used for both factors) or a pair.
    ``in_gap`` is true when ``d/c`` is not an attained ratio; ``gap`` is
    the ratio gap containing it inside ``window`` (default ``(d/c)/2,
    2 d/c``).
    """
    if not (c > 0 and d > 0):
        raise DomainError("c and d must be positive")
    if isinstance(spectra, (tuple, list)) and len(spectra) == 2 and np.ndim(spectra[0]) == 1:
        s1, s2 = (np.asarray(s, dtype=float) for s in spectra)
    else:
        s1 = s2 = np.asarray(spectra, dtype=float)
    num = np.abs(c * s1[:, None] - d * s2[None, :])
    den = c * s1[:, None] + d * s2[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    min_gap = float(rel.min())
    ratio = d / c
    in_gap = min_gap > rtol
    gap = None
    if in_gap:
        window = window or (ratio / 2.0, 2.0 * ratio)
        pos1, pos2 = s1[s1 > 0], s2[s2 > 0]
        for a, b in ratio_gaps(pos1, window, pos2):
            if a < ratio < b:
                gap = (a, b)
                break
    return QuasiellipticReport(ratio=ratio, min_gap=min_gap, in_gap=in_gap, gap=gap)


def truncation_symbol(F: MultiplierSymbol, r: float, m: float = WALK_DIMENSION) -> MultiplierSymbol:
    """``F (1 - Phi_r)`` with ``Phi_r = exp(-r**m (l1 + l2))``."""
    f = F.evaluator
    rm = r**m
    return MultiplierSymbol(lambda a, b: f(a, b) * -np.expm1(-rm * (a + b)),
                            name=f"{F.name}(1-Phi_{r:g})", singular_ratio=F.singular_ratio)


def cz_truncation_integral(op: ProductOperator, r: float, rho1: np.ndarray, rho2: np.ndarray,
                           m: float = WALK_DIMENSION, samples: int | None = None,
                           seed: int = 0) -> float:
    """``sup_y sum over rho_P(x,y) >= r of |K_{F(1-Phi_r)}(x, y)| mu_P(x)``."""
    if not r > 0:
        raise DomainError("r must be positive")
    trunc = op.with_symbol(truncation_symbol(op.symbol, r, m))
    mass = op.mass
    near1 = rho1 < r
    near2 = rho2 < r
    best = 0.0
    for y1, block in trunc.column_blocks(samples, seed):
        weighted = np.abs(block) * mass[:, :, None]                 # (a, b, d)
        total = weighted.sum(axis=(0, 1))
        inner = np.einsum("abd,a,bd->d", weighted, near1[:, y1].astype(float), near2.astype(float))
        best = max(best, float(np.max(total - inner)))
    return best


def support_cutoff_symbol(F: MultiplierSymbol, R: float, m: float = WALK_DIMENSION) -> MultiplierSymbol:
    """``F(l) chi(l1/R^m) chi(l2/R^m)``: supported in ``[0, R^m]^2``."""
    f = F.evaluator
    Rm = R**m
    return MultiplierSymbol(lambda a, b: f(a, b) * chi(a / Rm) * chi(b / Rm),
                            name=f"{F.name}|[0,{Rm:.4g}]^2", sup_norm=F.sup_norm)


@dataclass(frozen=True)
class LemmaPReport:
    R: float
    C: float
    sup_norm: float
    worst_point: tuple[int, int]


def lemma_p_check(op: ProductOperator, R: float, rho1: np.ndarray, rho2: np.ndarray,
                  m: float = WALK_DIMENSION, sup_norm: float | None = None,
                  points=None) -> LemmaPReport:
    """Smallest C with ``||K_F(x, .)||^2 <= C ||F||_inf^2 prod_j mu_j(B(x_j, 1/R))^-1``.

    Uses ``||K_F(x, .)||^2 = sum_ij F_ij^2 phi_i(x1)^2 psi_j(x2)^2``. The
    symbol must vanish on attained pairs outside ``[0, R^m]^2``.
    """
    Rm = R**m
    lam1 = op.dec1.values[:, None]
    lam2 = op.dec2.values[None, :]
    outside = (lam1 > Rm) | (lam2 > Rm)
    if np.any(np.abs(op.multipliers[outside]) > 0):
        raise DomainError("symbol is not supported in [0, R^m]^2 on the attained spectrum")
    if sup_norm is None:
        sup_norm = op.symbol.sup_norm
    if sup_norm is None:
        sup_norm = float(np.max(np.abs(op.multipliers)))
    norms = (op.dec1.vectors**2) @ (np.abs(op.multipliers) ** 2) @ (op.dec2.vectors**2).T
    ball1 = (rho1 < 1.0 / R) @ op.dec1.weight
    ball2 = (rho2 < 1.0 / R) @ op.dec2.weight
    ratio = norms * ball1[:, None] * ball2[None, :]
    if points is not None:
        mask = np.zeros_like(ratio, dtype=bool)
        for a, b in points:
            mask[a, b] = True
        ratio = np.where(mask, ratio, -np.inf)
    if sup_norm == 0:
        return LemmaPReport(R=R, C=0.0, sup_norm=0.0, worst_point=(0, 0))
    idx = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
    return LemmaPReport(R=R, C=float(ratio[idx]) / sup_norm**2, sup_norm=float(sup_norm),
                        worst_point=(int(idx[0]), int(idx[1])))
