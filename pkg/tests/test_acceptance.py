"""Acceptance gate: one PASS/FAIL line per criterion, at the stated tolerances."""

import filecmp
import math
import time

import numpy as np
import pytest

from hypdet import bm, cover
from hypdet.constants import G, G_bound, PrecisionPolicy, constant_E, glaisher_limit, log_glaisher
from hypdet.determinant import BUDGET_KEYS, DetParams, log_det
from hypdet.experiment import ExperimentConfig, load_records, manifest, run_experiment
from hypdet.field import QSqrt2
from hypdet.fuchsian import catalog, enumerate_primitives
from hypdet.group import Word
from hypdet.heat import heat_structure
from hypdet.spectrum import buser_bound, count_with_iterates, dumps_spectrum, systole

V = 4 * math.pi
L7 = 2 * math.acosh(3.5)


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail, elapsed, limit):
        ok = ok and elapsed < limit
        with capsys.disabled():
            print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'}: {detail}; {elapsed:.2f}s (limit {limit:g}s)")
        return ok

    return emit


def test_criterion_01_constant_E(report):
    t0 = time.perf_counter()
    E = constant_E(PrecisionPolicy(1e-4))
    cross = abs(glaisher_limit(2000) - math.exp(log_glaisher()))
    elapsed = time.perf_counter() - t0
    ok = round(E, 4) == 0.0538 and cross < 1e-3
    assert report(1, ok, f"E={E:.6f}, |A_2000 - A|={cross:.2e}", elapsed, 1.0)


def test_criterion_02_G_inequalities(report):
    t0 = time.perf_counter()
    us = np.linspace(0.1, 20.0, 50)
    g = [G(float(u)) for u in us]
    bounded = all(0 < x <= G_bound(float(u)) for x, u in zip(g, us))
    decreasing = all(b < a for a, b in zip(g, g[1:]))
    elapsed = time.perf_counter() - t0
    assert report(2, bounded and decreasing, f"bounded={bounded}, strictly decreasing={decreasing} on 50 points", elapsed, 1.0)


def test_criterion_03_bolza_enumeration(report):
    t0 = time.perf_counter()
    base = catalog("bolza")
    a = enumerate_primitives(base, 8.0)
    b = enumerate_primitives(base, 8.0)
    sys_ok = abs(systole(a) - 2 * math.acosh(1 + math.sqrt(2))) < 1e-9 and a.classes[0].trace == QSqrt2(2, 2)
    same = dumps_spectrum(a) == dumps_spectrum(b)
    grid = [0.1 * k for k in range(81)]
    counting = all(count_with_iterates(a, T) <= buser_bound(2, T, a) for T in grid)
    elapsed = time.perf_counter() - t0
    ok = sys_ok and same and counting
    detail = f"systole={systole(a):.10f} trace={a.classes[0].trace}, identical runs={same}, counting bound on 81 T={counting}, classes={len(a)}"
    assert report(3, ok, detail, elapsed, 120.0)


def test_criterion_04_venkov_zograf(report, bolza8):
    t0 = time.perf_counter()
    worst, failures = 0.0, 0
    for i in range(100):
        n = 1 + i % 5
        h = cover.sample_hom(2, n, 1000 + i)
        assert h.sampler_tag == "exhaustive"
        lhs, rhs = cover.vz_check(bolza8, h, 7.0)
        worst = max(worst, abs(lhs - rhs))
        failures += abs(lhs - rhs) > 1e-9
    elapsed = time.perf_counter() - t0
    assert report(4, failures == 0, f"100 covers n<=5, max |lhs-rhs|={worst:.2e}", elapsed, 300.0)


def test_criterion_05_fixed_points(report):
    t0 = time.perf_counter()
    base = catalog("bolza")
    w = Word.parse("a1")
    parts, ok = [], True
    for q in (1, 2):
        exact = float(cover.exact_fix_mean(base, w, q, 5))
        mean, err = cover.fix_statistics(base, w, q, 5, 20_000, 77 + q)
        within = abs(mean - exact) <= 3 * err
        ok &= within
        parts.append(f"q={q}: MC {mean:.4f}+-{err:.4f} vs exact {exact:.4f} (d(q)={cover.divisor_count(q)} reference)")
    elapsed = time.perf_counter() - t0
    assert report(5, ok, "; ".join(parts), elapsed, 600.0)


def test_criterion_06_heat_structure(report, bolza8):
    t0 = time.perf_counter()
    ts = np.linspace(0.5, 10.0, 39)
    r = heat_structure(bolza8, V, 2, ts, 8.0)
    elapsed = time.perf_counter() - t0
    ok = r.positive and r.decreasing and r.log_convex
    detail = (f"positive={r.positive}, decreasing={r.decreasing}, log-convex={r.log_convex} "
              f"on {len(ts)} points; budget dominates the value at {r.vacuous_points} of them")
    assert report(6, ok, detail, elapsed, 60.0)


def test_criterion_07_determinant_consistency(report, bolza):
    t0 = time.perf_counter()
    s10 = enumerate_primitives(bolza, 10.0)
    a = log_det(s10.truncate(8.0), V, DetParams(L=8.0, R=40.0, eta=1.0))
    b = log_det(s10, V, DetParams(L=10.0, R=60.0, eta=1.0))
    elapsed = time.perf_counter() - t0
    (a0, a1), (b0, b1) = a.interval, b.interval
    intersect = max(a0, b0) <= min(a1, b1)
    small = a.error < 0.5 and b.error < 0.5
    decrease = all(b.budget[k] < a.budget[k] for k in BUDGET_KEYS)
    ok = intersect and small and decrease
    detail = (f"(8,40): {a.value:.5f}+-{a.error:.5f}, (10,60): {b.value:.5f}+-{b.error:.5f}, "
              f"intersect={intersect}, budget decreases={decrease}")
    assert report(7, ok, detail, elapsed, 120.0)


def test_criterion_08_bm_census(report):
    t0 = time.perf_counter()
    states_ok = all(bm.leftright_cycles(bm.sample_graph(500, s)).total_states() == 6000 for s in range(100))
    stats = bm.poisson_stats(500, L7, 300, 2024)
    devs = {s.word: bm.poisson_deviation(s) for s in stats}
    poisson_ok = all(d <= 0.35 for d in devs.values())
    elapsed = time.perf_counter() - t0
    worst = max(devs, key=devs.get)
    detail = f"12n states on 100 graphs={states_ok}, {len(devs)} words, worst deviation {devs[worst]:.3f} ({worst})"
    assert report(8, states_ok and poisson_ok, detail, elapsed, 600.0)


@pytest.fixture(scope="module")
def concentration_run(tmp_path_factory):
    config = ExperimentConfig()
    assert (config.n_grid, config.num_samples, config.L, config.R, config.eta, config.epsilon) == ((1, 3, 5), 30, 8.0, 40.0, 0.2, 0.05)
    out = tmp_path_factory.mktemp("concentration")
    t0 = time.perf_counter()
    rows = run_experiment(config, out)
    return config, out, rows, time.perf_counter() - t0


def test_criterion_09_concentration(report, concentration_run):
    config, out, rows, elapsed = concentration_run
    E = constant_E()
    dist = [abs(r["median_normalized"] - E) for r in rows]
    monotone = all(b < a for a, b in zip(dist, dist[1:]))
    threshold = manifest(config)["in_band_threshold"]
    frac5 = rows[-1]["in_band_fraction"]
    enough = all(r["determinants"] == 30 for r in rows)
    ok = monotone and frac5 >= threshold and enough
    detail = ("medians " + ", ".join(f"n={r['n']}: {r['median_normalized']:.5f}" for r in rows)
              + f" (E={E:.5f}); in-band at n=5 {frac5:.2f} >= {threshold}")
    assert report(9, ok, detail, elapsed, 1800.0)


def test_criterion_10_reproducibility(report, concentration_run, tmp_path):
    config, out, _, first = concentration_run
    t0 = time.perf_counter()
    run_experiment(config, tmp_path / "serial")
    run_experiment(config, tmp_path / "parallel", workers=4)
    elapsed = time.perf_counter() - t0
    same = all(filecmp.cmp(out / "records.jsonl", tmp_path / d / "records.jsonl", shallow=False) for d in ("serial", "parallel"))
    n = len(load_records(out))
    assert report(10, same, f"{n} records byte-identical across a serial and a 4-worker rerun", elapsed, 2 * first + 60)
