"""Quantitative checks on computed resonances.

Every check returns a :class:`BoundReport`. Bounds use the tight support
diameter ``gamma`` of the potential and ``A = ||q||_1`` as the growth
constant of a, so that

    |a(lam)| <= exp(A + gamma (|Im lam| - Im lam)),   |a| >= 1 on the real line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
from scipy import integrate

from dirac_lab.errors import DivergentIntegralError
from dirac_lab.jost.transfer import transfer
from dirac_lab.potential import Potential, l1_norm
from dirac_lab.rootfinder import Rectangle, Resonance, RootConfig, counting_function, find_resonances

CARLESON_C = 32.0
LOG2 = math.log(2.0)


@dataclass
class BoundReport:
    name: str
    lhs: float
    rhs: float
    params: dict = field(default_factory=dict)
    slack: float = 0.0
    passed: bool | None = None

    def __post_init__(self):
        if self.passed is None:
            self.passed = bool(self.lhs <= self.rhs + self.slack)

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "pass": self.passed,
            "params": self.params,
        }


@dataclass(frozen=True)
class CarlesonProbe:
    t: float
    r: float
    mass: int


def y_p(p: float) -> float:
    """Integral of (1 + x**2)**(-p/2) over the real line, p > 1."""
    p = float(p)
    if not p > 1:
        raise DivergentIntegralError(f"Y_p diverges for p <= 1 (got p={p})")
    if p == 2.0:
        return math.pi
    return math.sqrt(math.pi) * math.exp(math.lgamma((p - 1) / 2) - math.lgamma(p / 2))


def _constants(pot: Potential) -> tuple[float, float]:
    return pot.tight_gamma, l1_norm(pot)


def counting_rhs(pot: Potential, r: float) -> float:
    gamma, A = _constants(pot)
    return (4 * r * gamma / math.pi + A) / LOG2


def sum_bound_report(
    p_value: float, pot: Potential, resonances: Sequence[Resonance], C: float = CARLESON_C
) -> BoundReport:
    gamma, A = _constants(pot)
    yp = y_p(p_value)
    terms = sorted(r.multiplicity / abs(r.location - 1j) ** p_value for r in resonances)
    lhs = math.fsum(terms)
    rhs = C * yp / LOG2 * (4 * gamma / math.pi + A)
    return BoundReport(
        "sum_bound",
        lhs,
        rhs,
        {"p": p_value, "C": C, "A": A, "gamma": gamma, "Y_p": yp, "n_resonances": len(resonances)},
    )


def counting_bound_report(pot: Potential, resonances: Sequence[Resonance], r: float) -> BoundReport:
    gamma, A = _constants(pot)
    return BoundReport(
        "counting_bound",
        float(counting_function(resonances, r)),
        counting_rhs(pot, r),
        {"r": r, "A": A, "gamma": gamma},
    )


def counting_asymptotics(
    pot: Potential, resonances: Sequence[Resonance], r_grid: Iterable[float]
) -> list[tuple[float, float]]:
    """(r, N(r)/r) for every r; compare the tail with 2 gamma / pi."""
    mods = np.sort([abs(r.location) for r in resonances for _ in range(r.multiplicity)])
    out = []
    for r in r_grid:
        n = int(np.searchsorted(mods, r, side="right"))
        out.append((float(r), n / r))
    return out


def fitted_slope(table: Sequence[tuple[float, float]]) -> float:
    """Mean of N(r)/r over the top decade of the table."""
    rmax = max(r for r, _ in table)
    tail = [v for r, v in table if r >= rmax / 10]
    return float(np.mean(tail))


def jensen_region(pot: Potential, r: float) -> Rectangle:
    pad = 1e-3 * max(r, 1.0)
    return Rectangle(-r - pad, r + pad, -r - pad, 0.0)


def _log_abs_f(pot: Potential, gamma: float, r: float, phi) -> np.ndarray:
    z = r * np.exp(1j * np.asarray(phi, dtype=float))
    # log|exp(-i gamma z) a(z)| = log|a| + gamma Im z
    return transfer(pot, z).log_abs_a() + gamma * z.imag


def jensen_check(
    pot: Potential,
    r: float,
    resonances: Sequence[Resonance] | None = None,
    cfg: RootConfig | None = None,
    rel_tol: float = 1e-6,
) -> BoundReport:
    """Jensen's identity for F = exp(-i gamma lam) a on the circle |lam| = r.

    lhs = log|a(0)| + sum over zeros with |lam_n| <= r of mult * log(r / |lam_n|)
    rhs = (1/2pi) * integral of log|F(r e^{i phi})| over phi

    ``resonances`` must contain every zero in the disk; when omitted they are
    computed. A missing zero shows up as a nonzero residual.
    """
    base_r = float(r)
    gamma, A = _constants(pot)
    if resonances is None:
        # the disk reaches depth r, below the default guard for wide supports
        cfg = replace(cfg or RootConfig(), allow_deep=True)
        resonances = find_resonances(pot, jensen_region(pot, base_r * 1.01), cfg)
    locs = np.array([res.location for res in resonances], dtype=complex)
    mults = np.array([res.multiplicity for res in resonances])
    r = base_r
    status = "inconclusive"
    for k in range(9):
        if locs.size == 0 or np.min(np.abs(np.abs(locs) - r)) >= 1e-6:
            status = "ok"
            break
        r = base_r + 1e-3 * (k + 1) * max(base_r, 1.0)
    if status != "ok":
        return BoundReport("jensen", math.nan, math.nan, {"r": base_r, "status": status}, passed=False)

    a0 = transfer(pot, 0.0)
    log_a0 = float(a0.log_abs_a()[0])
    inside = np.abs(locs) <= r
    lhs = log_a0 + math.fsum(mults[inside] * np.log(r / np.abs(locs[inside])))

    # break the circle at angles of zeros lying close to it
    near = locs[np.abs(np.abs(locs) - r) < max(1.0, 0.05 * r)]
    breaks = sorted({float(np.angle(z) % (2 * math.pi)) for z in near})
    func = lambda phi: float(_log_abs_f(pot, gamma, r, phi)[0])  # noqa: E731
    edges = [0.0] + [b for b in breaks if 0.0 < b < 2 * math.pi] + [2 * math.pi]
    total = 0.0
    err = 0.0
    for lo, hi in zip(edges, edges[1:]):
        if hi - lo <= 0:
            continue
        val, e = integrate.quad(func, lo, hi, limit=2000, epsabs=1e-11, epsrel=1e-12)
        total += val
        err += e
    rhs = total / (2 * math.pi)
    resid = abs(lhs - rhs) / max(1.0, abs(rhs))
    majorant = 2 * gamma * r / math.pi + A
    return BoundReport(
        "jensen",
        lhs,
        rhs,
        {
            "r": r,
            "r_requested": base_r,
            "status": status,
            "relative_residual": resid,
            "tolerance": rel_tol,
            "quad_error": err / (2 * math.pi),
            "log_abs_a0": log_a0,
            "majorant": majorant,
            "majorant_holds": bool(rhs <= majorant),
            "n_zeros_inside": int(mults[inside].sum()),
            "A": A,
            "gamma": gamma,
        },
        passed=bool(resid <= rel_tol),
    )


def carleson_sweep(
    pot: Potential,
    resonances: Sequence[Resonance],
    t_grid: Iterable[float],
    r_grid: Iterable[float],
) -> tuple[list[CarlesonProbe], BoundReport]:
    """Mass of the shifted zeros lam_n - i in half-disks D_-(t, r)."""
    gamma, A = _constants(pot)
    shifted = np.array([res.location - 1j for res in resonances], dtype=complex)
    mults = np.array([res.multiplicity for res in resonances], dtype=int)
    const = (4 * gamma / math.pi + A) / LOG2
    probes: list[CarlesonProbe] = []
    failures = 0
    small_failures = 0
    worst = 0.0
    r_list = [float(r) for r in r_grid]
    for t in t_grid:
        for r in r_list:
            inside = (np.abs(shifted - t) < r) & (shifted.imag < 0)
            mass = int(mults[inside].sum())
            probes.append(CarlesonProbe(float(t), r, mass))
            worst = max(worst, mass / r)
            if mass > r * const:
                failures += 1
            if r <= 1 and mass != 0:
                small_failures += 1
    report = BoundReport(
        "carleson",
        worst,
        const,
        {
            "A": A,
            "gamma": gamma,
            "n_probes": len(probes),
            "failures": failures,
            "small_disk_failures": small_failures,
            "empirical_constant": worst,
        },
        passed=failures == 0 and small_failures == 0,
    )
    return probes, report


def envelope_report(pot: Potential, lam_grid) -> BoundReport:
    """max |a| exp(-gamma(|eps|-eps)) <= cosh A, and |a| >= 1 on the real points."""
    gamma, A = _constants(pot)
    lam = np.atleast_1d(np.asarray(lam_grid, dtype=complex)).ravel()
    res = transfer(pot, lam)
    eps = lam.imag
    growth = gamma * (np.abs(eps) - eps)
    log_abs = res.log_abs_a()
    ratio = float(np.max(np.exp(log_abs - growth)))
    # |a - 1| check only where the values are representable
    true_a = res.a * np.exp(np.minimum(res.log_scale, 700.0))
    a1_ratio = float(np.max(np.abs(true_a - 1) * np.exp(-growth)))
    real = eps == 0
    min_real = float(np.min(np.abs(true_a[real]))) if real.any() else math.inf
    rhs = math.cosh(A)
    lower_ok = min_real >= 1 - 1e-10
    return BoundReport(
        "envelope",
        ratio,
        rhs,
        {
            "A": A,
            "gamma": gamma,
            "n_points": int(lam.size),
            "min_abs_a_real": min_real,
            "lower_bound_holds": bool(lower_ok),
            "shifted_ratio": a1_ratio,
            "shifted_rhs": rhs - 1.0,
        },
        slack=1e-9,
        passed=bool(ratio <= rhs + 1e-9 and lower_ok and a1_ratio <= rhs - 1.0 + 1e-9),
    )


def exclusion_depth(pot: Potential) -> float:
    """Depth below the real axis free of zeros because |a - 1| < 1 there."""
    gamma, A = _constants(pot)
    c = math.cosh(A) - 1.0
    if c <= 0 or gamma == 0:
        return math.inf
    if c >= 1:
        return 0.0
    return -math.log(c) / (2 * gamma)
