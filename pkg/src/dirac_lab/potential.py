"""Piecewise-constant complex potentials supported on [0, gamma].

A potential is an ordered tuple of cells laid end to end starting at x = 0.
Everything downstream (propagators, the iteration series, the bound checks)
reads the potential only through this module.
"""

from __future__ import annotations

import cmath
import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from dirac_lab.errors import InvalidPotentialError

BUILTIN_NAMES = ("square", "complex_step", "two_bump", "random_cells")


@dataclass(frozen=True)
class Cell:
    h: float
    q: complex

    def __post_init__(self):
        h = float(self.h)
        q = complex(self.q)
        if not (math.isfinite(h) and h > 0):
            raise InvalidPotentialError(f"cell width must be finite and > 0, got {self.h!r}")
        if not cmath.isfinite(q):
            raise InvalidPotentialError(f"cell value must be finite, got {self.q!r}")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "q", q)


@dataclass(frozen=True)
class Potential:
    cells: tuple[Cell, ...] = ()

    @property
    def gamma(self) -> float:
        """Total length of the cell list (0 for the empty potential)."""
        return math.fsum(c.h for c in self.cells)

    @property
    def edges(self) -> np.ndarray:
        return np.concatenate(([0.0], np.cumsum([c.h for c in self.cells])))

    @property
    def is_zero(self) -> bool:
        return all(c.q == 0 for c in self.cells)

    def trimmed(self) -> "Potential":
        """Drop leading and trailing zero-valued cells."""
        cells = list(self.cells)
        while cells and cells[0].q == 0:
            cells.pop(0)
        while cells and cells[-1].q == 0:
            cells.pop()
        return Potential(tuple(cells))

    @property
    def tight_gamma(self) -> float:
        """Diameter of the smallest interval containing every nonzero cell.

        This is the support length used in every bound formula; the Jost
        function is translation invariant, so only the diameter matters.
        """
        return self.trimmed().gamma

    def widths(self) -> np.ndarray:
        return np.array([c.h for c in self.cells], dtype=float)

    def values(self) -> np.ndarray:
        return np.array([c.q for c in self.cells], dtype=complex)

    def conj(self) -> "Potential":
        return Potential(tuple(Cell(c.h, c.q.conjugate()) for c in self.cells))

    def to_dict(self) -> dict:
        return {"cells": [{"h": c.h, "re": c.q.real, "im": c.q.imag} for c in self.cells]}


def from_cells(cells: Iterable[Cell | tuple[float, complex]]) -> Potential:
    out = []
    for c in cells:
        if not isinstance(c, Cell):
            h, q = c
            c = Cell(h, q)
        out.append(c)
    return Potential(tuple(out))


def from_samples(samples: Sequence[tuple[float, complex]], gamma: float) -> Potential:
    """Hold each sample value on the cell bounded by midpoints to its neighbours."""
    if not samples:
        raise InvalidPotentialError("at least one sample is required")
    gamma = float(gamma)
    if not gamma > 0:
        raise InvalidPotentialError("gamma must be > 0")
    xs = [float(x) for x, _ in samples]
    if any(x < 0 or x > gamma for x in xs):
        raise InvalidPotentialError("sample abscissae must lie in [0, gamma]")
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise InvalidPotentialError("sample abscissae must be strictly increasing")
    bounds = [0.0] + [0.5 * (a + b) for a, b in zip(xs, xs[1:])] + [gamma]
    return Potential(tuple(Cell(hi - lo, q) for (lo, hi), (_, q) in zip(zip(bounds, bounds[1:]), samples)))


def l1_norm(p: Potential) -> float:
    return math.fsum(abs(c.q) * c.h for c in p.cells)


def _param(params: Mapping[str, float], key: str, default: float | None = None) -> float:
    if key in params:
        return float(params[key])
    if default is None:
        raise InvalidPotentialError(f"missing parameter {key!r}")
    return default


def builtin(name: str, params: Mapping[str, float] | None = None) -> Potential:
    """Construct one of the named test potentials.

    square        A, gamma             one cell of height A
    complex_step  A, gamma, phi=pi/2   two halves, values A and A*exp(i*phi)
    two_bump      A, w, gap            bumps of height A and width w around a zero gap
    random_cells  n, seed, maxA, maxh  seeded widths in [0.05, maxh], |q| <= maxA
    """
    params = dict(params or {})
    if name == "square":
        A, gamma = _param(params, "A"), _param(params, "gamma")
        return from_cells([Cell(gamma, A)])
    if name == "complex_step":
        A, gamma = _param(params, "A"), _param(params, "gamma")
        phi = _param(params, "phi", math.pi / 2)
        return from_cells([Cell(gamma / 2, A), Cell(gamma / 2, A * cmath.exp(1j * phi))])
    if name == "two_bump":
        A, w, gap = _param(params, "A"), _param(params, "w"), _param(params, "gap")
        return from_cells([Cell(w, A), Cell(gap, 0.0), Cell(w, A)])
    if name == "random_cells":
        n = int(_param(params, "n"))
        seed = int(_param(params, "seed"))
        max_a = _param(params, "maxA")
        max_h = _param(params, "maxh", 0.25)
        if n < 1:
            raise InvalidPotentialError("random_cells needs n >= 1")
        rng = np.random.default_rng(seed)
        widths = rng.uniform(0.05, max(max_h, 0.05 + 1e-9), size=n)
        moduli = max_a * rng.uniform(0.0, 1.0, size=n)
        phases = rng.uniform(0.0, 2 * math.pi, size=n)
        return from_cells(Cell(h, m * cmath.exp(1j * ph)) for h, m, ph in zip(widths, moduli, phases))
    raise InvalidPotentialError(f"unknown builtin potential {name!r}; choose from {', '.join(BUILTIN_NAMES)}")


def parse_builtin_spec(spec: str) -> Potential:
    """Parse ``name:key=val,key=val`` into a builtin potential."""
    name, _, rest = spec.partition(":")
    params: dict[str, float] = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise InvalidPotentialError(f"malformed builtin parameter {item!r}")
        try:
            params[key.strip()] = float(val)
        except ValueError:
            raise InvalidPotentialError(f"non-numeric value for {key!r}: {val!r}") from None
    return builtin(name.strip(), params)


def loads_json(text: str) -> Potential:
    try:
        data = json.loads(text)
        rows = data["cells"]
        return from_cells(Cell(float(r["h"]), complex(float(r["re"]), float(r.get("im", 0.0)))) for r in rows)
    except InvalidPotentialError:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise InvalidPotentialError(f"malformed potential JSON: {exc}") from exc


def loads_csv(text: str) -> Potential:
    cells = []
    for row in csv.reader(io.StringIO(text)):
        if not row or row[0].strip().startswith("#"):
            continue
        if row[0].strip() == "h":
            continue
        try:
            h, re_, im = (float(v) for v in (row + ["0"])[:3])
        except ValueError as exc:
            raise InvalidPotentialError(f"malformed potential CSV row {row!r}") from exc
        cells.append(Cell(h, complex(re_, im)))
    return from_cells(cells)


def load(path: str | Path) -> Potential:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InvalidPotentialError(f"cannot read potential file {path}: {exc}") from exc
    if path.suffix.lower() == ".csv":
        return loads_csv(text)
    return loads_json(text)
