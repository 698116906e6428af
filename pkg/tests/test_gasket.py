import csv
import itertools
import math

import numpy as np
import pytest

from sgcalc import gasket as G
from sgcalc.errors import BudgetExceeded, DomainError


@pytest.mark.parametrize("m", range(7))
def test_counts(m):
    g = G.build(m)
    assert g.n_vertices == (3 ** (m + 1) + 3) // 2
    assert len(g.edges) == 3 ** (m + 1)
    deg = g.degrees()
    assert sorted(deg[list(g.boundary)]) == [2, 2, 2]
    assert np.all(np.delete(deg, list(g.boundary)) == 4)
    assert g.cells.shape == (3**m, 3)


@pytest.mark.parametrize("m", range(6))
def test_nested_embedding(m):
    coarse, fine = G.build(m), G.build(m + 1)
    assert fine.vertices[:coarse.n_vertices] == coarse.vertices


def test_corner_coordinates_exact():
    g = G.build(3)
    pts = [g.vertices[i].to_float() for i in g.boundary]
    assert pts == [(0.0, 0.0), (1.0, 0.0), (0.5, math.sqrt(3) / 2)]
    assert len(set(g.vertices)) == g.n_vertices


def test_level_limits():
    with pytest.raises(DomainError):
        G.build(-1)
    with pytest.raises(BudgetExceeded):
        G.build(G.MAX_LEVEL + 1)


@pytest.mark.parametrize("m", [0, 2, 4])
def test_measure_total_and_boundary(m):
    g = G.build(m)
    mu = G.measure(g)
    assert mu.total == pytest.approx(1.0, abs=1e-14)
    assert np.allclose(mu.mass[list(g.boundary)], 3.0 ** (-m) / 3)
    assert np.allclose(np.delete(mu.mass, list(g.boundary)), 2 * 3.0 ** (-m) / 3)


@pytest.mark.parametrize("m", [1, 3])
def test_neumann_kernel_is_constants(m):
    lap = G.laplacian(G.build(m), G.NEUMANN)
    w = np.linalg.eigvalsh(lap.matrix)
    assert np.sum(np.abs(w) <= 1e-10 * np.abs(w).max()) == 1
    assert np.allclose(lap.matrix @ np.ones(lap.matrix.shape[0]), 0.0, atol=1e-10)


def test_dirichlet_shape_and_renormalization():
    g = G.build(2)
    lap = G.laplacian(g, G.DIRICHLET)
    assert lap.matrix.shape == (g.n_vertices - 3,) * 2
    assert lap.renormalization == 25.0
    with pytest.raises(DomainError):
        G.laplacian(g, "robin")


def pinv_resistance(g):
    """Independent oracle: Moore-Penrose pseudoinverse of the weighted Laplacian."""
    Lp = np.linalg.pinv((5 / 3) ** g.level * g.graph_laplacian())
    d = np.diag(Lp)
    return d[:, None] + d[None, :] - 2 * Lp


@pytest.mark.parametrize("m", [0, 1, 3])
def test_resistance_against_pseudoinverse(m):
    g = G.build(m)
    R = G.resistance_metric(g).distances
    assert np.allclose(R, pinv_resistance(g), atol=1e-10)


@pytest.mark.parametrize("m", range(6))
def test_corner_resistance_is_two_thirds(m):
    M = G.resistance_metric(G.build(m))
    assert M.distances[0, 1] == pytest.approx(2 / 3, abs=1e-12)
    assert M.diameter == pytest.approx(2 / 3, abs=1e-12)


def test_triangle_inequality_sampled():
    R = G.resistance_metric(G.build(4)).distances
    rng = np.random.default_rng(0)
    idx = rng.integers(0, R.shape[0], (5000, 3))
    x, y, z = idx.T
    assert np.all(R[x, z] <= R[x, y] + R[y, z] + 1e-10)
    n = 30
    for a, b, c in itertools.product(range(n), repeat=3):
        assert R[a, c] <= R[a, b] + R[b, c] + 1e-10


def test_ball_is_open():
    D = np.array([[0.0, 1.0], [1.0, 0.0]])
    mass = np.array([0.5, 0.5])
    assert G.ball_mass(D, mass, 0, 1.0) == 0.5
    assert G.ball_mass(D, mass, 0, 1.0 + 1e-12) == 1.0
    assert np.allclose(G.ball_masses(D, mass, [1.0, 2.0]), [[0.5, 0.5], [1.0, 1.0]])


def test_doubling_level_five():
    g = G.build(5)
    fit = G.doubling_check(g, G.resistance_metric(g), G.measure(g))
    assert fit.resolved
    assert 1.9 <= fit.d_fit <= 2.4
    assert math.isfinite(fit.C_fit)
    assert fit.doubling_constant < 20


def test_doubling_level_zero_unresolved():
    g = G.build(0)
    fit = G.doubling_check(g, G.resistance_metric(g), G.measure(g))
    assert not fit.resolved and math.isnan(fit.d_fit)
    with pytest.raises(DomainError):
        G.doubling_check(g, G.resistance_metric(g), G.measure(g), samples=0)


def test_doubling_is_seeded():
    g = G.build(4)
    M, mu = G.resistance_metric(g), G.measure(g)
    assert G.doubling_check(g, M, mu, seed=3) == G.doubling_check(g, M, mu, seed=3)


def test_weighted_tail_examples():
    g = G.build(4)
    M, mu = G.resistance_metric(g), G.measure(g)
    assert G.weighted_tail_integral(M, mu, 5, 2.0, 3.0, M.diameter + 1) == 0.0
    assert G.weighted_tail_integral(M, mu, 5, 2.0, 0.0, 0.0) == pytest.approx(1.0, abs=1e-14)
    ratios = [max(G.weighted_tail_ratio(M, mu, y, R, 3.0, 0.0) for y in range(g.n_vertices))
              for R in (2.0, 4.0, 8.0)]
    assert all(math.isfinite(r) for r in ratios)
    assert max(ratios) / min(ratios) < 4
    with pytest.raises(DomainError):
        G.weighted_tail_integral(M, mu, 0, 0.0, 1.0, 0.0)


def test_weighted_tail_brute_force():
    g = G.build(2)
    M, mu = G.resistance_metric(g), G.measure(g)
    y, R, s, r = 4, 3.0, 2.5, 0.2
    expect = sum((1 + R * M.distances[y, x]) ** -s * mu.mass[x]
                 for x in range(g.n_vertices) if M.distances[y, x] >= r)
    assert G.weighted_tail_integral(M, mu, y, R, s, r) == pytest.approx(expect, rel=1e-14)


def test_space_restricts_to_interior():
    sp = G.space(3, G.DIRICHLET)
    assert sp.size == G.build(3).n_vertices - 3
    assert sp.rho.shape == (sp.size, sp.size)
    assert np.allclose(sp.decomposition.values[:1], 5**3 * 0.0893, rtol=0.01)
    with pytest.raises(DomainError):
        G.space(2, G.DIRICHLET, metric="taxicab")


def test_weighted_dirichlet_values_are_renormalized_graph_values():
    sp = G.space(3, G.DIRICHLET)
    graph = np.linalg.eigvalsh(G.laplacian(G.build(3)).matrix / 125.0)
    assert np.allclose(sp.decomposition.values, 125.0 * graph, rtol=1e-10)


def test_euclidean_metric():
    M = G.euclidean_metric(G.build(2))
    assert M.diameter == pytest.approx(1.0)
    assert M.min_positive() == pytest.approx(0.25)


def test_adjacency_csv(tmp_path):
    g = G.build(1)
    path = tmp_path / "adj.csv"
    G.write_adjacency_csv(g, path)
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == g.n_vertices
    assert rows[0]["neighbors"] == "3 5"
    assert sum(len(r["neighbors"].split()) for r in rows) == 2 * len(g.edges)
