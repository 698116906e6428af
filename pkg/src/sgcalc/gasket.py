"""Level-m graph approximations of the Sierpinski gasket.

Vertices carry exact coordinates: a point ``(x, y)`` is stored as the pair
of fractions ``(x, y / (sqrt(3)/2))``, so vertex identification is exact
rational comparison and never depends on floating-point rounding.
"""
from __future__ import annotations

import csv
import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import eigensolver
from .errors import BudgetExceeded, DomainError, SGCalcError

MAX_LEVEL = 8
#: Largest vertex count for which dense matrices are formed.
DENSE_MAX_VERTICES = 4000

HALF_SQRT3 = math.sqrt(3.0) / 2.0
#: Walk dimension and Hausdorff dimension in the resistance metric.
WALK_DIMENSION = math.log(5.0) / (math.log(5.0) - math.log(3.0))
HAUSDORFF_DIMENSION = math.log(3.0) / (math.log(5.0) - math.log(3.0))

DIRICHLET = "dirichlet"
NEUMANN = "neumann"


@dataclass(frozen=True, order=True)
class VertexAddress:
    """Exact planar point; ``h`` counts multiples of ``sqrt(3)/2``."""

    x: Fraction
    h: Fraction

    def to_float(self) -> tuple[float, float]:
        return float(self.x), float(self.h) * HALF_SQRT3


@dataclass(frozen=True)
class GasketGraph:
    level: int
    vertices: tuple[VertexAddress, ...]
    edges: np.ndarray      # (E, 2) int, i < j
    boundary: tuple[int, int, int]
    cells: np.ndarray      # (3**level, 3) int

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n_vertices)

    def coordinates(self) -> np.ndarray:
        return np.array([v.to_float() for v in self.vertices])

    def interior(self) -> np.ndarray:
        mask = np.ones(self.n_vertices, dtype=bool)
        mask[list(self.boundary)] = False
        return np.flatnonzero(mask)

    def graph_laplacian(self) -> np.ndarray:
        """Unrenormalised ``D - A`` on all vertices."""
        n = self.n_vertices
        if n > DENSE_MAX_VERTICES:
            raise BudgetExceeded(f"dense Laplacian with {n} vertices exceeds the budget")
        L = np.zeros((n, n))
        i, j = self.edges[:, 0], self.edges[:, 1]
        np.add.at(L, (i, i), 1.0)
        np.add.at(L, (j, j), 1.0)
        L[i, j] -= 1.0
        L[j, i] -= 1.0
        return L


@dataclass(frozen=True)
class MeasureVector:
    mass: np.ndarray

    @property
    def total(self) -> float:
        return float(self.mass.sum())

    def restrict(self, nodes: np.ndarray) -> "MeasureVector":
        return MeasureVector(self.mass[nodes])


@dataclass(frozen=True)
class LaplacianRep:
    """``5**m (D - A)``, with boundary rows and columns removed for Dirichlet.

    ``nodes`` lists the gasket vertices that index the rows.
    """

    matrix: np.ndarray
    renormalization: float
    boundary_condition: str
    nodes: np.ndarray
    level: int

    @property
    def energy(self) -> np.ndarray:
        """Quadratic form of the measure-weighted Laplacian.

        ``generalized_eigh(energy, mu)`` has eigenvalues ``5**m`` times the
        graph eigenvalues on the Dirichlet problem, because every interior
        vertex carries mass ``(2/3) 3**-m``.
        """
        return self.matrix * (2.0 / 3.0) * 3.0 ** (-self.level)


@dataclass(frozen=True)
class MetricMatrix:
    distances: np.ndarray
    kind: str

    @property
    def diameter(self) -> float:
        return float(self.distances.max())

    def min_positive(self) -> float:
        d = self.distances
        return float(d[d > 0].min())

    def restrict(self, nodes: np.ndarray) -> "MetricMatrix":
        return MetricMatrix(self.distances[np.ix_(nodes, nodes)], self.kind)


def _check_level(m: int) -> None:
    if not isinstance(m, (int, np.integer)) or m < 0:
        raise DomainError(f"level must be a non-negative integer, got {m!r}")
    if m > MAX_LEVEL:
        raise BudgetExceeded(f"level {m} exceeds the memory budget (max {MAX_LEVEL})")


@functools.lru_cache(maxsize=None)
def build(m: int) -> GasketGraph:
    """Level-m gasket graph.

    Vertices are numbered so that ``build(k)`` for ``k < m`` occupies the
    first indices with the same coordinates; the corners are 0, 1, 2.
    """
    _check_level(m)
    scale = 2 ** (m + 1)       # x numerators; h numerators use 2**m
    corners = [(0, 0), (scale, 0), (scale // 2, scale // 2)]
    index: dict[tuple[int, int], int] = {p: i for i, p in enumerate(corners)}
    order = list(corners)
    cells = [tuple(corners)]
    for _ in range(m):
        refined = []
        for a, b, c in cells:
            ab = ((a[0] + b[0]) // 2, (a[1] + b[1]) // 2)
            bc = ((b[0] + c[0]) // 2, (b[1] + c[1]) // 2)
            ca = ((c[0] + a[0]) // 2, (c[1] + a[1]) // 2)
            for p in (ab, bc, ca):
                if p not in index:
                    index[p] = len(order)
                    order.append(p)
            refined += [(a, ab, ca), (ab, b, bc), (ca, bc, c)]
        cells = refined

    cell_idx = np.array([[index[p] for p in cell] for cell in cells], dtype=np.intp)
    pairs = np.concatenate([cell_idx[:, [0, 1]], cell_idx[:, [1, 2]], cell_idx[:, [0, 2]]])
    edges = np.unique(np.sort(pairs, axis=1), axis=0)
    hscale = 2 ** m
    vertices = tuple(VertexAddress(Fraction(px, scale), Fraction(ph, hscale)) for px, ph in order)
    return GasketGraph(level=m, vertices=vertices, edges=edges, boundary=(0, 1, 2), cells=cell_idx)


def measure(g: GasketGraph) -> MeasureVector:
    """Each cell has mass ``3**-m``, split equally among its three corners."""
    mass = np.zeros(g.n_vertices)
    np.add.at(mass, g.cells.ravel(), 3.0 ** (-g.level) / 3.0)
    return MeasureVector(mass)


def _nodes(g: GasketGraph, bc: str) -> np.ndarray:
    if bc == DIRICHLET:
        return g.interior()
    if bc == NEUMANN:
        return np.arange(g.n_vertices)
    raise DomainError(f"unknown boundary condition {bc!r}")


def laplacian(g: GasketGraph, bc: str = DIRICHLET) -> LaplacianRep:
    nodes = _nodes(g, bc)
    L = g.graph_laplacian()[np.ix_(nodes, nodes)]
    r = 5.0 ** g.level
    return LaplacianRep(matrix=r * L, renormalization=r, boundary_condition=bc,
                        nodes=nodes, level=g.level)


def resistance_metric(g: GasketGraph) -> MetricMatrix:
    """Effective resistance of the Neumann energy ``(5/3)**m (D - A)``."""
    n = g.n_vertices
    E = (5.0 / 3.0) ** g.level * g.graph_laplacian()
    J = np.full((n, n), 1.0 / n)
    try:
        # (E + J)^-1 - J is the pseudoinverse on the mean-zero subspace
        G = np.linalg.inv(E + J) - J
    except np.linalg.LinAlgError as exc:
        raise SGCalcError("energy matrix is singular beyond its constant kernel") from exc
    d = np.diag(G)
    R = d[:, None] + d[None, :] - 2.0 * G
    R = 0.5 * (R + R.T)
    np.fill_diagonal(R, 0.0)
    np.maximum(R, 0.0, out=R)
    return MetricMatrix(R, "resistance")


def euclidean_metric(g: GasketGraph) -> MetricMatrix:
    xy = g.coordinates()
    D = np.sqrt(((xy[:, None, :] - xy[None, :, :]) ** 2).sum(-1))
    return MetricMatrix(D, "euclidean")


def ball_mass(distances: np.ndarray, mass: np.ndarray, x: int, r: float) -> float:
    """``mu(B(x, r))`` with the open ball ``rho < r``."""
    return float(mass[distances[x] < r].sum())


def ball_masses(distances: np.ndarray, mass: np.ndarray, radii) -> np.ndarray:
    """``mu(B(x, r))`` for every vertex x and every radius; shape (len(radii), n)."""
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    return np.stack([(distances < r) @ mass for r in radii])


@dataclass(frozen=True)
class DoublingFit:
    d_fit: float
    C_fit: float
    doubling_constant: float
    resolved: bool
    r_range: tuple[float, float]
    samples: int


def doubling_check(g: GasketGraph, metric: MetricMatrix, mu: MeasureVector,
                   samples: int = 400, seed: int = 0,
                   t_range: tuple[float, float] = (0.125, 8.0),
                   saturation: float = 4.0) -> DoublingFit:
    """Fit ``mu(B(x, r)) ~ r**d`` and the constant in ``mu(B(x,tr)) <= C (1+t)**d mu(B(x,r))``.

    Radii are drawn log-uniformly from ``[min positive distance,
    diameter / saturation]``; larger balls hold a fixed fraction of the
    total mass and flatten the slope. With fewer than three distinct
    distance scales the fit is reported as not resolved (``d_fit = nan``).
    """
    if samples <= 0:
        raise DomainError("samples must be positive")
    D, mass = metric.distances, mu.mass
    rmin, rmax = metric.min_positive(), metric.diameter / saturation
    scales = np.unique(np.round(D[D > 0], 12))
    if g.level == 0 or scales.size < 3 or rmax / rmin < 2:
        return DoublingFit(math.nan, math.nan, math.nan, False, (rmin, rmax), 0)

    rng = np.random.default_rng(seed)
    xs = rng.integers(0, g.n_vertices, samples)
    rs = np.exp(rng.uniform(np.log(rmin), np.log(rmax), samples))
    ts = np.exp(rng.uniform(np.log(t_range[0]), np.log(t_range[1]), samples))

    vol = np.array([ball_mass(D, mass, x, r) for x, r in zip(xs, rs)])
    slope, _ = np.polyfit(np.log(rs), np.log(vol), 1)

    vol_t = np.array([ball_mass(D, mass, x, t * r) for x, r, t in zip(xs, rs, ts)])
    C_fit = float(np.max(vol_t / ((1.0 + ts) ** slope * vol)))
    vol_2 = np.array([ball_mass(D, mass, x, 2 * r) for x, r in zip(xs, rs)])
    doubling = float(np.max(vol_2 / vol))
    return DoublingFit(float(slope), C_fit, doubling, True, (rmin, rmax), samples)


def weighted_tail_integral(metric: MetricMatrix | np.ndarray, mu: MeasureVector | np.ndarray,
                           y: int, R: float, s: float, r: float) -> float:
    """``sum over rho(x,y) >= r of (1 + R rho(x,y))**-s mu(x)``."""
    if not R > 0:
        raise DomainError("R must be positive")
    D = _distances(metric)
    mass = _mass(mu)
    row = D[y]
    tail = row >= r
    return float(np.sum((1.0 + R * row[tail]) ** (-s) * mass[tail]))


def weighted_tail_ratio(metric, mu, y: int, R: float, s: float, r: float) -> float:
    """Tail integral divided by ``mu(B(y, 1/R))``."""
    D = _distances(metric)
    mass = _mass(mu)
    return weighted_tail_integral(D, mass, y, R, s, r) / ball_mass(D, mass, y, 1.0 / R)


def _distances(metric) -> np.ndarray:
    return metric.distances if isinstance(metric, MetricMatrix) else np.asarray(metric)


def _mass(mu) -> np.ndarray:
    return mu.mass if isinstance(mu, MeasureVector) else np.asarray(mu)


@dataclass(frozen=True)
class GasketSpace:
    """A gasket level with one boundary condition, ready for analysis.

    ``mass`` and ``rho`` are restricted to ``nodes`` (the interior vertices
    for Dirichlet, all vertices for Neumann).
    """

    graph: GasketGraph
    boundary_condition: str
    nodes: np.ndarray
    mass: np.ndarray
    rho: np.ndarray
    metric_kind: str
    method: str = "auto"
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def level(self) -> int:
        return self.graph.level

    @property
    def size(self) -> int:
        return self.nodes.size

    @property
    def laplacian(self) -> LaplacianRep:
        if "lap" not in self._cache:
            self._cache["lap"] = laplacian(self.graph, self.boundary_condition)
        return self._cache["lap"]

    @property
    def decomposition(self) -> eigensolver.EigenDecomposition:
        if "dec" not in self._cache:
            self._cache["dec"] = eigensolver.generalized_eigh(
                self.laplacian.energy, self.mass, method=self.method)
        return self._cache["dec"]

    def ball(self, y: int, r: float) -> float:
        return ball_mass(self.rho, self.mass, y, r)


@functools.lru_cache(maxsize=32)
def space(level: int, bc: str = DIRICHLET, metric: str = "resistance",
          method: str = "auto") -> GasketSpace:
    """Cached :class:`GasketSpace` for ``(level, bc, metric)``."""
    g = build(level)
    if metric == "resistance":
        M = resistance_metric(g)
    elif metric == "euclidean":
        M = euclidean_metric(g)
    else:
        raise DomainError(f"unknown metric {metric!r}")
    nodes = _nodes(g, bc)
    return GasketSpace(graph=g, boundary_condition=bc, nodes=nodes,
                       mass=measure(g).mass[nodes], rho=M.distances[np.ix_(nodes, nodes)],
                       metric_kind=metric, method=method)


def write_adjacency_csv(g: GasketGraph, path: str | Path) -> None:
    """One row per vertex: index, x, y, exact x, exact h, neighbours."""
    nbrs: list[list[int]] = [[] for _ in range(g.n_vertices)]
    for i, j in g.edges:
        nbrs[i].append(int(j))
        nbrs[j].append(int(i))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "x", "y", "x_exact", "h_exact", "neighbors"])
        for k, v in enumerate(g.vertices):
            x, y = v.to_float()
            w.writerow([k, repr(x), repr(y), str(v.x), str(v.h), " ".join(map(str, sorted(nbrs[k])))])
