"""Spectral decimation for the Sierpinski gasket.

Eigenvalues of successive Dirichlet graph approximations are linked by the
forward map ``R(x) = x(5 - x)``; its two inverse branches are

    psi_minus(x) = (5 - sqrt(25 - 4x)) / 2
    psi_plus(x)  = (5 + sqrt(25 - 4x)) / 2

Renormalised limits ``Psi(x) = lim 5**n * psi_minus^n(x)`` give the
continuum eigenvalue attached to a graph eigenvalue, and the ratio-gap
constants are ``alpha = Psi(5)/Psi(3)`` and ``beta = 5 Psi(3)/Psi(5)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError

#: Discriminant root of the quadratic: psi is defined for x <= 25/4.
PSI_DOMAIN_MAX = 25.0 / 4.0

#: Graph eigenvalues whose forward image leaves the coarser spectrum.
EXCEPTIONAL_VALUES = (2.0, 5.0, 6.0)
EXCEPTIONAL_TOL = 1e-8

MAX_ITERATIONS = 200

#: Commonly quoted four-digit values of the gap endpoints.
REFERENCE_ALPHA = 2.0611
REFERENCE_BETA = 2.4288


class DecimationBranch(enum.Enum):
    MINUS = "minus"
    PLUS = "plus"


@dataclass(frozen=True)
class RenormalizedLimit:
    seed: float
    value: float
    iterations: int
    residual: float


@dataclass(frozen=True)
class GapConstants:
    alpha: float
    beta: float
    tolerance: float
    psi3: float
    psi5: float
    reference_alpha: float = REFERENCE_ALPHA
    reference_beta: float = REFERENCE_BETA

    @property
    def beta_discrepancy(self) -> float:
        """Distance between the computed beta and the quoted 2.4288."""
        return abs(self.beta - self.reference_beta)

    def as_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "alpha_times_beta": self.alpha * self.beta,
            "tolerance": self.tolerance,
            "Psi(3)": self.psi3,
            "Psi(5)": self.psi5,
            "reference_alpha": self.reference_alpha,
            "reference_beta": self.reference_beta,
            "beta_discrepancy": self.beta_discrepancy,
        }


def psi(x: float, branch: DecimationBranch | str = DecimationBranch.MINUS) -> float:
    """Inverse branch of ``x -> x(5 - x)``.

    The minus branch is evaluated as ``2x / (5 + sqrt(25 - 4x))`` so that it
    keeps full relative precision as ``x -> 0``.
    """
    branch = DecimationBranch(branch)
    disc = 25.0 - 4.0 * x
    if disc < 0.0:
        raise DomainError(f"psi is defined only for x <= 25/4, got {x!r}")
    root = math.sqrt(disc)
    if branch is DecimationBranch.MINUS:
        return 2.0 * x / (5.0 + root)
    return (5.0 + root) / 2.0


def forward_map(lam: float) -> float:
    """``lam(5 - lam)``, the level-to-level eigenvalue map."""
    return lam * (5.0 - lam)


def renormalized_limit(seed: float, tol: float = 1e-12,
                       max_iterations: int = MAX_ITERATIONS,
                       min_iterations: int = 0) -> RenormalizedLimit:
    """Compute ``Psi(seed) = lim 5**n psi_minus^n(seed)``.

    The residual is the last increment of the renormalised sequence. The
    increments shrink roughly by a factor 5 per step, so about
    ``log(seed/tol)/log 5`` iterations are needed.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    if not 0.0 <= seed <= PSI_DOMAIN_MAX:
        raise DomainError(f"seed must lie in [0, 25/4], got {seed!r}")
    if seed == 0.0:
        return RenormalizedLimit(seed=0.0, value=0.0, iterations=0, residual=0.0)

    x = seed
    value = seed
    scale = 1.0
    for n in range(1, max_iterations + 1):
        x = psi(x)
        scale *= 5.0
        new = scale * x
        residual = abs(new - value)
        value = new
        if residual <= tol and n >= min_iterations:
            return RenormalizedLimit(seed=seed, value=value, iterations=n, residual=residual)
    raise ConvergenceError(
        f"renormalized limit of {seed!r} did not converge to {tol!r} "
        f"in {max_iterations} iterations (last increment {residual:.3e})"
    )


def renormalized_iterates(seed: float, count: int) -> np.ndarray:
    """Return ``[5**n psi^n(seed) for n in 0..count]``."""
    out = np.empty(count + 1)
    x = seed
    out[0] = seed
    for n in range(1, count + 1):
        x = psi(x)
        out[n] = 5.0**n * x
    return out


def gap_constants(tol: float = 1e-12) -> GapConstants:
    """Ratio-gap endpoints from the renormalised limits of 3 and 5.

    Both limits are recomputed with twice the iteration count; the
    constants must agree with the first pass to ``tol``.
    """
    p3 = renormalized_limit(3.0, tol)
    p5 = renormalized_limit(5.0, tol)
    alpha = p5.value / p3.value
    beta = 5.0 * p3.value / p5.value

    p3b = renormalized_limit(3.0, tol, min_iterations=2 * p3.iterations)
    p5b = renormalized_limit(5.0, tol, min_iterations=2 * p5.iterations)
    alpha_b = p5b.value / p3b.value
    beta_b = 5.0 * p3b.value / p5b.value
    if abs(alpha - alpha_b) > tol or abs(beta - beta_b) > tol:
        raise ConvergenceError("gap constants are not stable under doubling the iteration count")
    return GapConstants(alpha=alpha, beta=beta, tolerance=tol, psi3=p3.value, psi5=p5.value)


def is_exceptional(lam: float, tol: float = EXCEPTIONAL_TOL) -> bool:
    return any(abs(lam - e) <= tol for e in EXCEPTIONAL_VALUES)


def dirichlet_graph_spectrum(level: int, method: str = "auto") -> np.ndarray:
    """Eigenvalues of the unrenormalised Dirichlet graph Laplacian at ``level``."""
    from . import eigensolver, gasket

    g = gasket.build(level)
    lap = gasket.laplacian(g, "dirichlet")
    return eigensolver.eigh(lap.matrix / lap.renormalization, method=method).values


def generate_sg_eigenvalues(max_level: int, tol: float = 1e-10,
                            method: str = "auto") -> np.ndarray:
    """Decimation candidates ``5**m Psi(lam)`` from levels ``1..max_level``.

    Exceptional graph eigenvalues (2, 5, 6) are skipped; the values they
    generate reappear from the next level through the minus branch.
    Repeated graph eigenvalues are merged within ``EXCEPTIONAL_TOL`` first.
    The same candidate reached from two levels differs by round-off that
    grows with its size, so the final merge uses ``tol * max(1, value)``.
    """
    if max_level < 1:
        raise DomainError("max_level must be at least 1")
    candidates = []
    for level in range(1, max_level + 1):
        spectrum = dirichlet_graph_spectrum(level, method=method)
        for lam in _dedupe(np.sort(spectrum), EXCEPTIONAL_TOL):
            if is_exceptional(lam):
                continue
            # clip round-off just outside the admissible range
            lam = float(min(max(lam, 0.0), PSI_DOMAIN_MAX))
            candidates.append(5.0**level * renormalized_limit(lam, 1e-13).value)
    return _dedupe(np.sort(np.asarray(candidates)), tol, relative=True)


def _dedupe(sorted_values: np.ndarray, tol: float, relative: bool = False) -> np.ndarray:
    keep = [sorted_values[0]]
    for v in sorted_values[1:]:
        scale = max(1.0, abs(v)) if relative else 1.0
        if v - keep[-1] > tol * scale:
            keep.append(v)
    return np.asarray(keep)


def forward_consistency(fine: np.ndarray, coarse: np.ndarray,
                        tol: float = EXCEPTIONAL_TOL) -> float:
    """Largest distance from ``R(fine)`` to the coarse spectrum.

    Exceptional fine eigenvalues are excluded.
    """
    coarse = np.sort(np.asarray(coarse))
    worst = 0.0
    for lam in fine:
        if is_exceptional(lam, tol):
            continue
        image = forward_map(lam)
        worst = max(worst, float(np.min(np.abs(coarse - image))))
    return worst
