import cmath
import math

import numpy as np
import pytest

from dirac_lab.potential import Cell, Potential, builtin, from_cells

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(criterion: int, ok: bool, detail: str = "") -> None:
    ACCEPTANCE[criterion] = (ok, detail)
    print(f"[acceptance {criterion:2d}] {'PASS' if ok else 'FAIL'} {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


def random_potential(seed: int, max_cells: int = 8, max_norm: float = 2.0, max_gamma: float = 2.0) -> Potential:
    """Seeded potential with <= max_cells cells, ||q||_1 <= max_norm, gamma <= max_gamma."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, max_cells + 1))
    gamma = rng.uniform(0.2, max_gamma)
    w = rng.uniform(0.2, 1.0, size=n)
    widths = gamma * w / w.sum()
    vals = rng.normal(size=n) + 1j * rng.normal(size=n)
    norm = float(np.sum(np.abs(vals) * widths))
    target = rng.uniform(0.1, max_norm)
    vals = vals * (target / norm)
    return from_cells(Cell(h, q) for h, q in zip(widths, vals))


def single_cell_a(A: complex, gamma: float, lam: complex) -> complex:
    """Closed form exp(i lam g)(cos(w g) - i lam sin(w g)/w), w**2 = lam**2 - |A|**2."""
    w = cmath.sqrt(lam * lam - abs(A) ** 2)
    sinc = gamma if abs(w) < 1e-300 else cmath.sin(w * gamma) / w
    return cmath.exp(1j * lam * gamma) * (cmath.cos(w * gamma) - 1j * lam * sinc)


@pytest.fixture
def square():
    return builtin("square", {"A": 1, "gamma": 1})


@pytest.fixture
def zero_pot():
    return Potential(())
