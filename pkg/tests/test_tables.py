import math

import numpy as np
import pytest

from sgcalc import gasket as G
from sgcalc import heatkernel as H
from sgcalc import tables as T


@pytest.fixture(scope="module")
def rows2():
    return T.all_tables(G.space(2, G.DIRICHLET))


@pytest.fixture(scope="module")
def rows3():
    return T.all_tables(G.space(3, G.DIRICHLET))


def test_row_counts(rows2):
    count = {name: sum(r.lemma == name for r in rows2) for name in ("ltu", "jeden", "waga2", "P")}
    assert count == {"ltu": 15, "jeden": 30, "waga2": 3, "P": 3}
    assert all(math.isfinite(r.constant) and r.constant >= 0 for r in rows2)


def test_unresolved_rows_flagged(rows2):
    # the smallest positive resistance at level 2 is above 1/8
    waga = [r for r in rows2 if r.lemma == "waga2"]
    assert [r.resolved for r in waga] == [True, True, False]


def test_stable_between_levels(rows2, rows3):
    st = T.stability(rows2, rows3)
    assert set(st) == {"ltu", "jeden", "waga2", "P"}
    for name, entry in st.items():
        assert entry["finite"] and entry["rows"] > 0, name
        assert entry["stable"], (name, entry)


def test_flat_row():
    row = T.LemmaRow("P", 2, {"R": 4.0}, 1.5, True).flat()
    assert row == {"lemma": "P", "level": 2, "R": 4.0, "constant": 1.5, "resolved": True}


def test_ltu_zero_distance_is_diagonal_bound():
    sp = G.space(2, G.DIRICHLET)
    t = 0.04
    row = T.ltu_table(sp, times=(t,), distances=(0.0,))[0]
    P2t = H.heat_kernel(sp.decomposition, 2 * t).diagonal()
    ball = G.ball_masses(sp.rho, sp.mass, t ** (1 / G.WALK_DIMENSION))[0]
    assert row.constant == pytest.approx(float(np.max(P2t * ball)), rel=1e-10)


def test_waga2_brute_force():
    sp = G.space(2, G.DIRICHLET)
    R, s = 2.0, 3.0
    vals = []
    for y in range(sp.size):
        tail = sum((1 + R * sp.rho[x, y]) ** -s * sp.mass[x] for x in range(sp.size))
        vals.append(tail / sp.mass[sp.rho[y] < 1 / R].sum())
    assert T.waga2_table(sp, radii=(R,))[0].constant == pytest.approx(max(vals), rel=1e-12)


def test_stability_detects_drift():
    a = [T.LemmaRow("x", 2, {}, 1.0, True)]
    b = [T.LemmaRow("x", 3, {}, 3.0, True)]
    assert not T.stability(a, b)["x"]["stable"]
    assert T.stability(a, b, factor=4)["x"]["stable"]
