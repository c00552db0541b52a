"""End-to-end acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line (printed with ``-s`` and summarized at the
end of the run) and then asserts, so a failing criterion also fails pytest.
"""

import math
import time

import numpy as np
import pytest

from conftest import random_potential, record
from dirac_lab.cli import main
from dirac_lab.estimates import (
    carleson_sweep,
    counting_asymptotics,
    counting_bound_report,
    envelope_report,
    fitted_slope,
    jensen_check,
    sum_bound_report,
    y_p,
)
from dirac_lab.jost import jost_a_series, transfer
from dirac_lab.potential import builtin
from dirac_lab.rootfinder import Rectangle, RootConfig, find_resonances, wind

N_RANDOM = 50
GRID = (np.linspace(-20, 20, 21)[:, None] + 1j * np.linspace(-5, 5, 11)[None, :]).ravel()
SEARCH = Rectangle(-210, 210, -20, 0)
DEEP = Rectangle(-210, 210, -210, -20)


@pytest.fixture(scope="module")
def random_pots():
    return [random_potential(seed) for seed in range(N_RANDOM)]


def _counting_data(gamma: float):
    p = builtin("square", {"A": 1, "gamma": gamma})
    roots = find_resonances(p, SEARCH)
    # nothing below the searched strip inside the half-disk of radius 210
    deep = wind(p, DEEP, RootConfig(allow_deep=True)).count
    return p, roots, deep


@pytest.fixture(scope="module")
def square_1():
    return _counting_data(1.0)


@pytest.fixture(scope="module")
def square_2():
    return _counting_data(2.0)


def test_criterion_01_oracle_equivalence(random_pots):
    t0 = time.perf_counter()
    worst = 0.0
    fails = 0
    for p in random_pots:
        fast = transfer(p, GRID).true_a()
        for lam, a in zip(GRID, fast):
            s = jost_a_series(p, complex(lam), tol=1e-12)
            allowed = s.remainder_bound + 1e-11 * abs(a)
            worst = max(worst, abs(a - s.a) / allowed)
            fails += abs(a - s.a) > allowed
    elapsed = time.perf_counter() - t0
    ok = fails == 0 and elapsed < 60
    record(1, ok, f"{N_RANDOM}x{GRID.size} points, worst diff/allowed={worst:.2e}, {elapsed:.1f}s")
    assert ok


def test_criterion_02_real_line_identities(random_pots):
    lam = np.linspace(-50, 50, 1000)
    worst_id = 0.0
    min_a = math.inf
    for p in random_pots:
        r = transfer(p, lam)
        a = r.true_a()
        b = r.b * np.exp(r.log_scale)
        worst_id = max(worst_id, float(np.max(np.abs(np.abs(a) ** 2 - np.abs(b) ** 2 - 1))))
        min_a = min(min_a, float(np.min(np.abs(a))))
    ok = worst_id <= 1e-10 and min_a >= 1 - 1e-10
    record(2, ok, f"max||a|^2-|b|^2-1|={worst_id:.1e}, min|a|={min_a:.6f}")
    assert ok


def test_criterion_03_envelope(random_pots):
    grid = np.concatenate((GRID, np.linspace(-20, 20, 201).astype(complex)))
    reports = [envelope_report(p, grid) for p in random_pots]
    worst = max(r.lhs - r.rhs for r in reports)
    eq = max(
        abs(abs(transfer(builtin("square", {"A": A, "gamma": g}), 0.0).true_a()[0]) - math.cosh(A * g))
        for A in (0.5, 1.0, 2.0)
        for g in (0.5, 1.0, 2.0)
    )
    ok = all(r.passed for r in reports) and eq <= 1e-10
    record(3, ok, f"worst envelope excess={worst:.2e}, |a(0)|-cosh(A gamma) err={eq:.1e}")
    assert ok


def test_criterion_04_jensen():
    p = builtin("square", {"A": 1, "gamma": 1})
    roots = find_resonances(p, Rectangle(-25, 25, -25, 0), RootConfig(allow_deep=True))
    reps = [jensen_check(p, r, roots) for r in (5, 10, 20)]
    resid = [rep.params["relative_residual"] for rep in reps]
    ok = all(rep.passed for rep in reps)
    record(4, ok, "relative residuals " + ", ".join(f"{v:.1e}" for v in resid))
    assert ok


def test_criterion_05_counting_law(square_1, square_2):
    t0 = time.perf_counter()
    p1, r1, deep1 = square_1
    p2, r2, deep2 = square_2
    radii = np.linspace(20, 200, 19)
    s1 = dict(counting_asymptotics(p1, r1, radii))[200.0]
    s2 = dict(counting_asymptotics(p2, r2, radii))[200.0]
    fit1 = fitted_slope(counting_asymptotics(p1, r1, radii))
    target = 2 / math.pi
    ok = deep1 == 0 and deep2 == 0 and abs(s1 - target) <= 0.1 * target and abs(s2 / s1 - 2) <= 0.2
    elapsed = time.perf_counter() - t0
    record(
        5,
        ok,
        f"N(200)/200={s1:.4f} vs {target:.4f}, tail mean {fit1:.4f}, gamma=2 ratio {s2 / s1:.3f}, deep zeros {deep1}/{deep2}",
    )
    assert ok and elapsed < 600


def test_criterion_06_counting_bound(square_1, square_2, random_pots):
    cases = [(p, roots, 200.0) for p, roots, _ in (square_1, square_2)]
    for spec in ("two_bump:A=1.5,w=0.4,gap=0.7", "complex_step:A=2,gamma=1"):
        from dirac_lab.potential import parse_builtin_spec

        p = parse_builtin_spec(spec)
        cases.append((p, find_resonances(p, Rectangle(-40, 40, -40, 0), RootConfig(allow_deep=True)), 40.0))
    for p in random_pots[:5]:
        cases.append((p, find_resonances(p, Rectangle(-30, 30, -30, 0), RootConfig(allow_deep=True)), 30.0))
    fails = 0
    probes = 0
    for p, roots, rmax in cases:
        for r in np.linspace(0.5, rmax, int(2 * rmax)):
            probes += 1
            fails += not counting_bound_report(p, roots, float(r)).passed
    ok = fails == 0
    record(6, ok, f"{len(cases)} potentials, {probes} radii, {fails} failures")
    assert ok


def test_criterion_07_carleson(square_1, square_2):
    fails = 0
    n = 0
    worst = 0.0
    for p, roots, _ in (square_1, square_2):
        probes, rep = carleson_sweep(p, roots, np.arange(-100, 101, 5), [0.5, 0.9, 1, 2, 5, 10, 20])
        n += len(probes)
        worst = max(worst, rep.params["empirical_constant"] / rep.rhs)
        fails += not rep.passed
    ok = fails == 0
    record(7, ok, f"{n} probes, worst mass/(r*C) = {worst:.3f}")
    assert ok


def test_criterion_08_sum_bound(square_1, square_2):
    reps = [sum_bound_report(pv, p, roots) for p, roots, _ in (square_1, square_2) for pv in (1.1, 1.5, 2, 3)]
    margins = ", ".join(f"p={r.params['p']}:{r.margin:.1f}" for r in reps[:4])
    y2 = abs(y_p(2) - math.pi)
    large = abs(y_p(400) / math.sqrt(2 * math.pi / 400) - 1)
    near_one = abs((1.01 - 1) * y_p(1.01) / 2 - 1)
    ok = all(r.passed for r in reps) and y2 <= 1e-12 and large <= 0.01 and near_one <= 0.05
    record(8, ok, f"margins {margins}; Y_400 rel {large:.1e}, Y_1.01 rel {near_one:.1e}")
    assert ok


def test_criterion_09_derivative():
    rng = np.random.default_rng(2026)
    worst = 0.0
    # with delta=1e-5 the quotient loses eps*|a|/(delta*|a'|) to cancellation,
    # about 1e-6 where |a'|/|a| ~ 1e-4 in the upper half-plane
    delta = 1e-4
    for k in range(100):
        p = random_potential(1000 + k)
        lam = complex(rng.uniform(-20, 20), rng.uniform(-5, 5))
        r = transfer(p, np.array([lam, lam + delta, lam - delta]), derivative=True)
        a = r.true_a()
        da = r.a_prime[0] * math.exp(r.log_scale[0])
        fd = (a[1] - a[2]) / (2 * delta)
        worst = max(worst, abs(da - fd) / abs(da))
    ok = worst <= 1e-6
    record(9, ok, f"100 pairs, worst relative error {worst:.1e}")
    assert ok


def test_criterion_10_determinism(tmp_path, capsys):
    blobs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        code = main(["verify", "--builtin", "square:A=1,gamma=1", "--out", str(out)])
        assert code == 0
        blobs.append({f.name: f.read_bytes() for f in sorted(out.iterdir()) if f.suffix == ".json"})
    capsys.readouterr()
    ok = blobs[0] == blobs[1] and len(blobs[0]) == 2
    record(10, ok, "verify twice: " + ("byte-identical JSON" if ok else "outputs differ"))
    assert ok


def test_criterion_11_fault_injection():
    p = builtin("square", {"A": 1, "gamma": 1})
    roots = find_resonances(p, Rectangle(-25, 25, -25, 0), RootConfig(allow_deep=True))
    fired = []
    for r in (5, 10, 20):
        inside = [k for k, z in enumerate(roots) if abs(z.location) < r]
        for k in (inside[0], inside[-1]):
            damaged = roots[:k] + roots[k + 1 :]
            fired.append(not jensen_check(p, r, damaged).passed)
    ok = all(fired)
    record(11, ok, f"missing zero detected in {sum(fired)}/{len(fired)} cases")
    assert ok
