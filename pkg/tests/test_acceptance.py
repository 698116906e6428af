"""Acceptance gate: thirteen criteria, each at its stated tolerance and time budget.

Every criterion returns a list of ``(label, measured, bound, ok)`` checks.
The test prints one PASS/FAIL line per criterion; a session-level summary
repeats them (see ``conftest.py``). Run standalone with
``python3 tests/test_acceptance.py``.
"""
from __future__ import annotations

import math
import time
import warnings

import numpy as np
import pytest
from scipy.linalg import expm

from sgcalc import calculus as C
from sgcalc import decimation as D
from sgcalc import eigensolver as E
from sgcalc import gasket as G
from sgcalc import heatkernel as H
from sgcalc import hormander as HM
from sgcalc import tables as T
from sgcalc.errors import SingularSymbolError

SQRT5 = math.sqrt(5.0)
RESULTS: dict[int, str] = {}


def check(label, measured, bound, ok=None):
    if ok is None:
        ok = measured <= bound
    return label, measured, bound, bool(ok)


def generator(sp):
    return sp.laplacian.energy / sp.mass[:, None]


def rel_max(a, b):
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


def sg_cutoff_pair(sigma=0.03):
    om = C.CutoffOmega(SQRT5, sigma)
    return [C.cutoff_multiply(F, om) for F in C.riesz_symbols(1, 1, 1, SQRT5)]


def reference_cutoff_pair():
    om = C.CutoffOmega(1.0, 0.45)
    return [C.cutoff_multiply(F, om) for F in C.riesz_symbols(1, 1, 1, 1)]


# ------------------------------------------------------------------ criteria

def c01_alpha():
    gc = D.gap_constants(1e-12)
    return [check("|alpha - 2.0611|", abs(gc.alpha - 2.0611), 5e-4)]


def c02_beta():
    gc = D.gap_constants(1e-12)
    return [check("|alpha*beta - 5|", abs(gc.alpha * gc.beta - 5.0), 1e-12),
            check("|beta - 2.4288|", gc.beta_discrepancy, 5e-3)]


def c03_cross_oracle():
    out = []
    spectra = {lv: D.dirichlet_graph_spectrum(lv) for lv in range(1, 5)}
    for lv in (1, 2, 3):
        worst = D.forward_consistency(spectra[lv + 1], spectra[lv])
        out.append(check(f"levels {lv}->{lv + 1} dist", worst, 1e-8))
    return out


def c04_ratio_gap():
    gc = D.gap_constants(1e-12)
    cand = D.generate_sg_eigenvalues(6)
    r = (cand[:, None] / cand[None, :]).ravel()
    inside = int(np.sum((r > gc.alpha + 1e-9) & (r < gc.beta - 1e-9)))
    return [check("distinct candidates", len(cand), 50, len(cand) >= 50),
            check("ratios in (alpha, beta)", inside, 0)]


def c05_calculus_level3():
    sp = G.space(3, G.DIRICHLET)
    n = sp.size
    base = C.ProductOperator.on(sp, C.constant_symbol())
    f = np.random.default_rng(0).standard_normal(base.shape)
    out = [check("F=1 identity", rel_max(base.apply(f), f), 1e-10)]

    s, t = 0.01, 0.03
    heat = base.with_symbol(C.heat_symbol(s, t))
    Ps = expm(-s * generator(sp)) / sp.mass[None, :]
    Pt = expm(-t * generator(sp)) / sp.mass[None, :]
    worst = 0.0
    for y1, y2 in [(0, 0), (5, 17), (n - 1, 3), (20, n - 1)]:
        worst = max(worst, rel_max(heat.kernel_column((y1, y2)), np.outer(Ps[:, y1], Pt[:, y2])))
    out.append(check("heat product kernel", worst, 1e-10))

    F, Gs = C.heat_symbol(0.002, 0.0), C.riesz_symbols(1, 1, 1, SQRT5)[0]
    lhs = base.with_symbol(F * Gs).apply(f)
    rhs = base.with_symbol(F).apply(base.with_symbol(Gs).apply(f))
    out.append(check("multiplicativity F*G", rel_max(lhs, rhs), 1e-8))

    op = base.with_symbol(Gs)
    lam = sp.decomposition.values
    brute = max(abs(float(Gs(a, b))) for a in lam for b in lam)
    out.append(check("l2_norm vs pair max", abs(C.l2_norm(op) - brute) / brute, 1e-12))
    return out


def c06_quasielliptic():
    out = []
    F1, F2 = C.riesz_symbols(1, 1, 1, SQRT5)
    R1, R2 = C.riesz_symbols(1, 1, 1, 1)
    for lv in range(1, 5):
        sp = G.space(lv, G.DIRICHLET)
        norms = [C.l2_norm(C.ProductOperator.on(sp, F)) for F in (F1, F2)]
        out.append(check(f"level {lv} l2 finite", max(norms), math.inf,
                         all(math.isfinite(v) for v in norms)))
        q = C.quasielliptic_check(1.0, SQRT5, sp.decomposition.values)
        out.append(check(f"level {lv} min_gap > 0", q.min_gap, 0.0, q.min_gap > 0))
        raised = 0
        for F in (R1, R2):
            try:
                C.ProductOperator.on(sp, F)
            except SingularSymbolError:
                raised += 1
        out.append(check(f"level {lv} d/c=1 rejected", raised, 2, raised == 2))
    return out


def c07_tensor_dense():
    out = []
    for lv in (1, 2):
        sp = G.space(lv, G.DIRICHLET)
        symbols = [("identity", C.constant_symbol()), ("heat", C.heat_symbol(0.01, 0.02)),
                   ("cutoff riesz", sg_cutoff_pair()[0])]
        rng = np.random.default_rng(lv)
        for name, F in symbols:
            op = C.ProductOperator.on(sp, F)
            f = rng.standard_normal(op.shape)
            err = rel_max(op.dense_matrix() @ f.ravel(), op.apply(f).ravel())
            out.append(check(f"level {lv} {name}", err, 1e-10))
    return out


def c08_heat():
    sp = G.space(5, G.NEUMANN)
    dec = sp.decomposition
    times = np.geomspace(*H.resolved_window(5), 7)
    d = H.diagonal_decay_exponent(dec, times)
    P1 = H.heat_kernel(dec, 0.01).values
    P2 = H.heat_kernel(dec, 0.02).values
    cons = float(np.max(np.abs(P1 @ sp.mass - 1.0)))
    semi = rel_max((P1 * sp.mass[None, :]) @ P1, P2)
    return [check("decay exponent in [0.63, 0.73]", d, (0.63, 0.73), 0.63 <= d <= 0.73),
            check("conservation", cons, 1e-10),
            check("semigroup", semi, 1e-8)]


def c09_doubling():
    g = G.build(5)
    fit = G.doubling_check(g, G.resistance_metric(g), G.measure(g))
    return [check("d_fit in [1.9, 2.4]", fit.d_fit, (1.9, 2.4), 1.9 <= fit.d_fit <= 2.4),
            check("doubling constant finite", fit.doubling_constant, math.inf,
                  math.isfinite(fit.doubling_constant))]


def c10_lemma_tables():
    a = T.all_tables(G.space(2, G.DIRICHLET))
    b = T.all_tables(G.space(3, G.DIRICHLET))
    out = []
    for name, st in T.stability(a, b).items():
        ratio = max(st["first"] / st["second"], st["second"] / st["first"])
        out.append(check(f"{name} finite, level ratio", ratio, 2.0, st["finite"] and st["stable"]))
    taus = {r.params["tau"] for r in a if r.lemma == "jeden"}
    orders = {r.params["s"] for r in a if r.lemma == "jeden"}
    out.append(check("jeden tau and s grid", len(taus) * len(orders), 10,
                     taus == {0.0, 1.0, 2.0, 4.0, 8.0} and orders == {0.0, 2.0}))
    return out


def c11_hormander():
    eta = HM.make_eta()
    out = []
    F = sg_cutoff_pair()[0]
    sampled = HM.GridFunction2D.sample(HM.localized(F, eta, 1.0), eta.box(), 1 / 64)
    fixed = HM.GridFunction2D(sampled.box, sampled.h, sampled.values)     # no resampling
    sup = float(np.max(np.abs(fixed.values)))
    s0 = HM.sobolev_inf_norm(fixed, 0.0).value
    out.append(check("s=0 vs sup", abs(s0 - sup) / sup, 1e-6))
    for k, Fc in enumerate(reference_cutoff_pair(), 1):
        rep = HM.hormander_sup(Fc, eta, 2.2)
        out.append(check(f"reference F{k} two-resolution", rep.error_bar, 1e-2))
    grid = HM.default_t_grid(eta.m, k=4)
    for fam, pair in (("sg-gap", sg_cutoff_pair()), ("reference", reference_cutoff_pair())):
        for k, Fc in enumerate(pair, 1):
            _, spread = HM.dilation_spread(Fc, eta, 2.2, grid)
            out.append(check(f"{fam} F{k} t-spread", spread, 1e-6))
    raised = 0
    for Fr in C.riesz_symbols(1, 1, 1, SQRT5):
        try:
            HM.hormander_sup(Fr, eta, 2.2)
        except SingularSymbolError:
            raised += 1
    out.append(check("raw Riesz rejected", raised, 2, raised == 2))
    return out


def c12_cz():
    out = []
    radii = [2.0**k for k in range(-5, 4)]
    for lv in (2, 3):
        sp = G.space(lv, G.DIRICHLET)
        op = C.ProductOperator.on(sp, sg_cutoff_pair()[0])
        vals = {r: C.cz_truncation_integral(op, r, sp.rho, sp.rho) for r in radii}
        diam = float(sp.rho.max())
        finite = all(math.isfinite(v) for v in vals.values())
        beyond = max(v for r, v in vals.items() if r > diam)
        out.append(check(f"level {lv} finite, sup", max(vals.values()), math.inf, finite))
        out.append(check(f"level {lv} value beyond diameter", beyond, 0.0))
    return out


def c13_eigensolver():
    rng = np.random.default_rng(2024)
    X = rng.standard_normal((200, 200))
    A = (X + X.T) / 2
    dec = E.eigh(A, method="jacobi")
    normA = np.linalg.norm(A, 2)
    return [check("residual / ||A||", dec.residual(A) / normA, 1e-10),
            check("orthonormality", dec.orthonormality_error(), 1e-10)]


CRITERIA = [
    (1, "gap constant alpha", c01_alpha, 1.0),
    (2, "gap constant beta", c02_beta, 1.0),
    (3, "decimation-eigensolver cross-oracle", c03_cross_oracle, 30.0),
    (4, "ratio-gap property", c04_ratio_gap, 10.0),
    (5, "functional calculus at level 3", c05_calculus_level3, 120.0),
    (6, "quasielliptic finiteness", c06_quasielliptic, 60.0),
    (7, "tensor vs dense", c07_tensor_dense, 60.0),
    (8, "heat-kernel physics", c08_heat, 180.0),
    (9, "doubling", c09_doubling, 120.0),
    (10, "lemma tables", c10_lemma_tables, 300.0),
    (11, "Hormander engine", c11_hormander, 120.0),
    (12, "CZ truncation", c12_cz, 300.0),
    (13, "eigensolver contract", c13_eigensolver, 30.0),
]


def _fmt(v):
    if isinstance(v, tuple):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)


def evaluate(number, title, fn, budget):
    G.space.cache_clear()
    G.build.cache_clear()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", C.CutoffWarning)
        t0 = time.perf_counter()
        checks = fn()
        elapsed = time.perf_counter() - t0
    checks.append(check("runtime s", elapsed, budget))
    ok = all(c[3] for c in checks)
    detail = "; ".join(f"{lab} {_fmt(m)} (bound {_fmt(b)}){'' if good else ' FAILED'}"
                       for lab, m, b, good in checks)
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:2d} {title}: {detail}"
    return ok, line


@pytest.mark.parametrize("number,title,fn,budget", CRITERIA, ids=[f"c{n:02d}" for n, *_ in CRITERIA])
def test_criterion(number, title, fn, budget):
    ok, line = evaluate(number, title, fn, budget)
    RESULTS[number] = line
    print(line)
    assert ok, line


if __name__ == "__main__":
    lines = [evaluate(*c)[1] for c in CRITERIA]
    print("\n".join(lines))
    raise SystemExit(0 if all(ln.startswith("PASS") for ln in lines) else 1)
