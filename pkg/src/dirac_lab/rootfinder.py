"""Zeros of a(lambda) in rectangles of the lower half-plane.

Counting is done by continuing arg a(lambda) along the rectangle boundary.
Boundary points are refined until every step changes the phase by less than
pi/4 and the local logarithmic derivative |a'/a| times the step stays below
1/2, so a zero cannot slip between two samples. Rectangles are subdivided
until each piece holds one zero (polished by Newton) or is smaller than the
cluster radius (reported as one multiple zero).
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from dirac_lab.errors import BoundaryZeroError, EvaluationRangeError
from dirac_lab.jost.transfer import transfer
from dirac_lab.potential import Potential

log = logging.getLogger(__name__)

# Rectangles touching the real axis are pulled down by this much.
REAL_AXIS_SHIFT = 1e-12
# Validated depth of scaled arithmetic, in units of 1/gamma.
DEPTH_GUARD = 40.0
_MAX_PHASE_STEP = math.pi / 4
_MAX_LOGDERIV_STEP = 0.5
_MAX_ROUNDS = 60
# Split fractions tried in turn when a cut passes too close to a zero.
_SPLIT_OFFSETS = (0.0, 0.0123, -0.0371, 0.0617, -0.0853, 0.1049, -0.1297, 0.1511, -0.1733)


@dataclass(frozen=True)
class Rectangle:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        vals = (self.re_min, self.re_max, self.im_min, self.im_max)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("rectangle bounds must be finite")
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError(f"degenerate rectangle {vals}")

    @classmethod
    def parse(cls, text: str) -> "Rectangle":
        parts = [float(v) for v in text.split(",")]
        if len(parts) != 4:
            raise ValueError("region must be re_min,re_max,im_min,im_max")
        return cls(*parts)

    @property
    def width(self) -> float:
        return self.re_max - self.re_min

    @property
    def height(self) -> float:
        return self.im_max - self.im_min

    @property
    def diameter(self) -> float:
        return math.hypot(self.width, self.height)

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))

    def contains(self, z: complex, slack: float = 0.0) -> bool:
        return (
            self.re_min - slack <= z.real <= self.re_max + slack
            and self.im_min - slack <= z.imag <= self.im_max + slack
        )

    def expanded(self, delta: float) -> "Rectangle":
        return Rectangle(self.re_min - delta, self.re_max + delta, self.im_min - delta, self.im_max + delta)

    def corners(self) -> np.ndarray:
        """Counterclockwise, closed."""
        return np.array(
            [
                complex(self.re_min, self.im_min),
                complex(self.re_max, self.im_min),
                complex(self.re_max, self.im_max),
                complex(self.re_min, self.im_max),
                complex(self.re_min, self.im_min),
            ]
        )

    def as_list(self) -> list[float]:
        return [self.re_min, self.re_max, self.im_min, self.im_max]


@dataclass(frozen=True)
class RootConfig:
    newton_tol: float = 1e-12
    residual_tol: float = 1e-9
    cluster_factor: float = 1e-8
    max_depth: int = 40
    jitter_tries: int = 8
    max_newton: int = 50
    allow_deep: bool = False
    threads: int = field(default_factory=lambda: int(os.environ.get("DIRAC_LAB_THREADS", "1") or 1))

    def cluster_radius(self, z: complex) -> float:
        return self.cluster_factor * max(1.0, abs(z))


@dataclass(frozen=True)
class WindingCount:
    rectangle: Rectangle
    count: int
    boundary_min_modulus: float


@dataclass(frozen=True)
class Resonance:
    location: complex
    multiplicity: int
    residual: float
    refinement_radius: float

    def to_dict(self) -> dict:
        return {
            "re": self.location.real,
            "im": self.location.imag,
            "multiplicity": self.multiplicity,
            "residual": self.residual,
        }


class _NearZero(Exception):
    def __init__(self, location: complex):
        super().__init__(location)
        self.location = location


def _prepare(p: Potential, rect: Rectangle, cfg: RootConfig) -> Rectangle:
    if rect.im_max == 0.0:
        rect = replace(rect, im_max=-REAL_AXIS_SHIFT)
    gamma = p.tight_gamma
    if gamma > 0 and not cfg.allow_deep and rect.im_min < -DEPTH_GUARD / gamma:
        raise EvaluationRangeError(
            f"region reaches Im lambda = {rect.im_min:g}, deeper than the validated "
            f"{-DEPTH_GUARD / gamma:g}; pass allow_deep to override",
            achievable_depth=DEPTH_GUARD / gamma,
        )
    return rect


def _boundary_phase(p: Potential, rect: Rectangle) -> tuple[float, float]:
    """Total change of arg a along the boundary, and the minimum of |a| seen."""
    corners = rect.corners()
    gamma = max(p.gamma, 1e-300)
    # initial sampling: phase of exp(2i lam gamma) turns at rate 2 gamma
    rate = 2.0 * gamma + 1.0
    params = []
    for k in range(4):
        length = abs(corners[k + 1] - corners[k])
        n = int(math.ceil(length * rate / 0.5)) + 4
        params.append(k + np.arange(n) / n)
    t = np.concatenate(params + [np.array([4.0])])

    def points(tt: np.ndarray) -> np.ndarray:
        k = np.minimum(np.floor(tt).astype(int), 3)
        frac = tt - k
        return corners[k] + frac * (corners[k + 1] - corners[k])

    def evaluate(tt: np.ndarray):
        r = transfer(p, points(tt), derivative=True)
        return r.a, r.a_prime, r.log_scale

    a, da, ls = evaluate(t)
    min_len = 1e-13 * max(rect.diameter, 1.0)
    for _ in range(_MAX_ROUNDS):
        if np.any(a == 0):
            raise _NearZero(complex(points(t[np.argmax(a == 0)])[()]))
        z = points(t)
        step = np.abs(np.diff(z))
        dphase = np.angle(a[1:] / a[:-1])
        logd = np.abs(da / a)
        bad = (np.abs(dphase) >= _MAX_PHASE_STEP) | (step * np.maximum(logd[1:], logd[:-1]) >= _MAX_LOGDERIV_STEP)
        if not bad.any():
            total = float(np.sum(dphase))
            with np.errstate(divide="ignore"):
                min_log = float(np.min(np.log(np.abs(a)) + ls))
            return total, math.exp(min_log) if min_log < 700 else math.inf
        idx = np.nonzero(bad)[0]
        if np.any(step[idx] < min_len):
            j = idx[np.argmin(step[idx])]
            raise _NearZero(complex(z[j]))
        mids = 0.5 * (t[idx] + t[idx + 1])
        am, dam, lsm = evaluate(mids)
        t = np.concatenate((t, mids))
        a = np.concatenate((a, am))
        da = np.concatenate((da, dam))
        ls = np.concatenate((ls, lsm))
        order = np.argsort(t, kind="stable")
        t, a, da, ls = t[order], a[order], da[order], ls[order]
    raise _NearZero(complex(points(t[0:1])[0]))


def _count(p: Potential, rect: Rectangle) -> tuple[int, float]:
    if rect.im_min > 0 or p.is_zero:
        return 0, 1.0
    total, min_mod = _boundary_phase(p, rect)
    w = total / (2 * math.pi)
    n = round(w)
    if abs(w - n) > 0.25 or n < 0:
        raise _NearZero(rect.center)
    return int(n), min_mod


def wind(p: Potential, rect: Rectangle, cfg: RootConfig | None = None) -> WindingCount:
    """Number of zeros of a inside ``rect``, counted with multiplicity."""
    cfg = cfg or RootConfig()
    if rect.im_min > 0:
        return WindingCount(rect, 0, math.inf)
    rect = _prepare(p, rect, cfg)
    base = rect
    for k in range(cfg.jitter_tries + 1):
        try:
            n, m = _count(p, rect)
            return WindingCount(rect, n, m)
        except _NearZero as exc:
            loc = exc.location
            rect = base.expanded(1e-6 * base.diameter * (k + 1))
    raise BoundaryZeroError(f"a(lambda) vanishes on the boundary of {base.as_list()} near {loc}", location=loc)


def _split(rect: Rectangle, offset: float) -> list[Rectangle]:
    """Cut into halves along the long side, or quarters if roughly square."""
    fx = 0.5 + offset
    fy = 0.5 - 0.7 * offset
    xm = rect.re_min + fx * rect.width
    ym = rect.im_min + fy * rect.height
    if rect.width > 2 * rect.height:
        return [replace(rect, re_max=xm), replace(rect, re_min=xm)]
    if rect.height > 2 * rect.width:
        return [replace(rect, im_max=ym), replace(rect, im_min=ym)]
    return [
        Rectangle(rect.re_min, xm, rect.im_min, ym),
        Rectangle(xm, rect.re_max, rect.im_min, ym),
        Rectangle(rect.re_min, xm, ym, rect.im_max),
        Rectangle(xm, rect.re_max, ym, rect.im_max),
    ]


def _children(p: Potential, rect: Rectangle, count: int) -> list[tuple[Rectangle, int]]:
    for offset in _SPLIT_OFFSETS:
        kids = _split(rect, offset)
        try:
            counts = [_count(p, k)[0] for k in kids]
        except _NearZero:
            continue
        if sum(counts) == count:
            return [(k, c) for k, c in zip(kids, counts) if c > 0]
    raise BoundaryZeroError(f"could not subdivide {rect.as_list()} away from zeros", location=rect.center)


def _a_scalar(p: Potential, z: complex) -> tuple[complex, complex, float]:
    r = transfer(p, z, derivative=True)
    return complex(r.a[0]), complex(r.a_prime[0]), float(r.log_scale[0])


def _residual(p: Potential, z: complex) -> float:
    r = transfer(p, z)
    lg = float(r.log_abs_a()[0])
    return math.exp(lg) if lg < 700 else math.inf


def _newton(p: Potential, rect: Rectangle, cfg: RootConfig) -> Resonance | None:
    z = rect.center
    step = math.inf
    for _ in range(cfg.max_newton):
        a, da, _ = _a_scalar(p, z)
        if a == 0:
            step = 0.0
            break
        if da == 0:
            return None
        dz = a / da
        z = z - dz
        step = abs(dz)
        if not rect.contains(z, slack=0.05 * rect.diameter):
            return None
        if step < cfg.newton_tol * max(1.0, abs(z)):
            break
    else:
        return None
    if not rect.contains(z) or z.imag >= 0:
        return None
    return Resonance(z, 1, _residual(p, z), step)


def _solve_leaf(p: Potential, rect: Rectangle, count: int, depth: int, cfg: RootConfig) -> list[Resonance]:
    out: list[Resonance] = []
    stack = [(rect, count, depth)]
    while stack:
        r, n, d = stack.pop()
        if n == 1:
            root = _newton(p, r, cfg)
            if root is not None:
                out.append(root)
                continue
        small = r.diameter < cfg.cluster_radius(r.center)
        if small or d >= cfg.max_depth:
            z = r.center
            out.append(Resonance(z, n, _residual(p, z), 0.5 * r.diameter))
            continue
        for kid, c in reversed(_children(p, r, n)):
            stack.append((kid, c, d + 1))
    return out


def _tiles(rect: Rectangle, total: int, p: Potential) -> list[tuple[Rectangle, int]]:
    """Roughly square tiles whose counts add up to ``total``."""
    nx = max(1, round(rect.width / rect.height))
    ny = max(1, round(rect.height / rect.width))
    if nx == 1 and ny == 1:
        return [(rect, total)]
    for offset in _SPLIT_OFFSETS:
        xs = np.linspace(rect.re_min, rect.re_max, nx + 1)
        ys = np.linspace(rect.im_min, rect.im_max, ny + 1)
        xs[1:-1] += offset * rect.width / nx
        ys[1:-1] += offset * rect.height / ny
        tiles = [Rectangle(xs[i], xs[i + 1], ys[j], ys[j + 1]) for j in range(ny) for i in range(nx)]
        try:
            counts = [_count(p, t)[0] for t in tiles]
        except _NearZero:
            continue
        if sum(counts) == total:
            return [(t, c) for t, c in zip(tiles, counts) if c > 0]
    raise BoundaryZeroError(f"could not tile {rect.as_list()} away from zeros", location=rect.center)


def sort_key(r: Resonance) -> tuple[float, float, float]:
    return (abs(r.location), r.location.real, r.location.imag)


def find_resonances(p: Potential, rect: Rectangle, cfg: RootConfig | None = None) -> list[Resonance]:
    """All zeros of a in ``rect`` (clipped to Im <= 0), sorted by modulus then Re, Im."""
    cfg = cfg or RootConfig()
    if p.is_zero or rect.im_min >= 0:
        return []
    if rect.im_max > 0:
        rect = replace(rect, im_max=0.0)
    top = wind(p, rect, cfg)
    if top.count == 0:
        return []
    tiles = _tiles(top.rectangle, top.count, p)
    work = lambda tc: _solve_leaf(p, tc[0], tc[1], 0, cfg)  # noqa: E731
    if cfg.threads > 1 and len(tiles) > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            parts = list(pool.map(work, tiles))
    else:
        parts = [work(tc) for tc in tiles]
    roots = [r for part in parts for r in part]
    roots.sort(key=sort_key)
    bad = [r for r in roots if r.residual > cfg.residual_tol]
    if bad:
        log.warning("%d resonance(s) above residual_tol=%g, worst %g", len(bad), cfg.residual_tol, max(r.residual for r in bad))
    return roots


def counting_function(resonances: Iterable[Resonance], r: float) -> int:
    return sum(res.multiplicity for res in resonances if abs(res.location) <= r)


def moduli(resonances: Sequence[Resonance]) -> np.ndarray:
    return np.array([abs(r.location) for r in resonances])
