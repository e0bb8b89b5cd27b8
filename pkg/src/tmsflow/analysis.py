"""Sweep engine and feature extraction over (squeezing, noise) grids.

Produces grids of correlation reports, monotone cubic Hermite
interpolants of the resulting curves, and the two noise thresholds of
interest: the entanglement sudden-death point ``n_sd`` (root of the
entanglement-of-formation curve) and the discord/EoF crossover point
``n_c`` per discord flavor.

Flavors: "A" and "B" locate the root of the corresponding
information-flow difference ``delta_A`` / ``delta_B`` on the unit noise
interval.  "AB" is the arithmetic mean of the A and B crossover points,
which is the quantity whose minimum over the squeezing level sits near
(5.7 dB, 0.23); the root of ``delta_AB`` itself lies lower and elsewhere.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from .correlations import (
    REPORT_CSV_HEADER,
    CorrelationReport,
    correlation_report,
    report_to_csv_row,
)
from .errors import BadKnotsError, DomainError, NoSignChangeError, TmsflowError
from .states import StateModel

# Log-spaced default scan grid: resolves both the crossover region
# (n ~ 0.2) and the sudden-death point (n = 1).
FEATURE_GRID = np.logspace(-3.0, np.log10(4.0), 41)


@dataclass(frozen=True)
class SweepCell:
    s_db: float
    n: float
    report: CorrelationReport | None
    error: str | None = None


@dataclass(frozen=True)
class SweepGrid:
    """Correlation reports on the outer product of two strictly
    increasing axes; failed cells carry the failure reason instead."""

    s_values: tuple[float, ...]
    n_values: tuple[float, ...]
    cells: tuple[SweepCell, ...]  # row-major: s outer, n inner

    def cell(self, i_s: int, i_n: int) -> SweepCell:
        return self.cells[i_s * len(self.n_values) + i_n]


def _check_axis(values, name: str) -> tuple[float, ...]:
    vals = tuple(float(v) for v in values)
    if not vals:
        raise DomainError(f"{name} axis is empty")
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise DomainError(f"{name} axis must be strictly increasing")
    return vals


def sweep(model: StateModel, s_values, n_values, threads: int | None = None) -> SweepGrid:
    """Evaluate correlation reports on an (S, n) grid.

    Cells are independent; with ``threads`` > 1 they are computed by a
    thread pool, and results are assembled in axis order either way, so
    the output is deterministic regardless of parallelism.
    """
    s_vals = _check_axis(s_values, "squeezing")
    n_vals = _check_axis(n_values, "noise")
    points = [(s, n) for s in s_vals for n in n_vals]

    def evaluate(point: tuple[float, float]) -> SweepCell:
        s_db, n = point
        try:
            return SweepCell(s_db=s_db, n=n, report=correlation_report(model.state(s_db, n)))
        except TmsflowError as exc:
            return SweepCell(s_db=s_db, n=n, report=None, error=str(exc))

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cells = tuple(pool.map(evaluate, points))
    else:
        cells = tuple(map(evaluate, points))
    return SweepGrid(s_values=s_vals, n_values=n_vals, cells=cells)


class Interpolant:
    """Monotonicity-preserving C1 cubic Hermite interpolant.

    Slopes follow the Fritsch-Carlson limiter (PCHIP), so on any interval
    where the data are monotone the curve is monotone and never
    overshoots the neighboring knot values; knot values are reproduced
    exactly.
    """

    def __init__(self, xs, ys):
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if xs.ndim != 1 or xs.size < 2 or xs.shape != ys.shape:
            raise BadKnotsError("need two or more knots with matching values")
        if not np.all(np.isfinite(xs)) or not np.all(np.isfinite(ys)):
            raise BadKnotsError("knots and values must be finite")
        if np.any(np.diff(xs) <= 0):
            raise BadKnotsError("knots must be strictly increasing")
        self.xs = xs
        self.ys = ys
        self._pchip = PchipInterpolator(xs, ys, extrapolate=False)

    def __call__(self, x):
        return self._pchip(x)

    def roots(self) -> np.ndarray:
        """All roots inside the knot span, in increasing order."""
        return np.sort(self._pchip.roots(extrapolate=False))


def hermite_interpolate(xs, ys) -> Interpolant:
    return Interpolant(xs, ys)


@dataclass(frozen=True)
class CrossoverResult:
    flavor: str
    s_db: float
    n_c: float
    bracket: tuple[float, float]


def _bisect_root(f, lo: float, hi: float, f_lo: float) -> float:
    """Plain bisection down to relative width 1e-12; sign taken from f_lo."""
    for _ in range(100):
        if hi - lo <= 1e-12 * max(1.0, hi):
            break
        mid = 0.5 * (lo + hi)
        if (f(mid) > 0.0) == (f_lo > 0.0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _curve_root(curve, grid: np.ndarray, lo_bound: float, hi_bound: float) -> tuple[float, tuple[float, float]]:
    """Root of ``curve`` located from a grid scan plus exact-model bisection.

    The grid values seed a monotone Hermite interpolant whose root picks
    the bracket; one bisection pass on the exact curve then polishes the
    root.  Only sign changes whose root lies in (lo_bound, hi_bound) are
    accepted.
    """
    values = np.array([curve(n) for n in grid])
    for i in range(len(grid) - 1):
        a, b = values[i], values[i + 1]
        if a == 0.0 and grid[i] > lo_bound:
            return float(grid[i]), (float(grid[i]), float(grid[i]))
        if a * b < 0.0:
            root_hint = None
            interp = Interpolant(grid[max(0, i - 1) : i + 3], values[max(0, i - 1) : i + 3])
            hints = [r for r in interp.roots() if grid[i] <= r <= grid[i + 1]]
            if hints:
                root_hint = float(hints[0])
            if not (lo_bound < (root_hint if root_hint is not None else grid[i]) < hi_bound):
                continue
            root = _bisect_root(curve, float(grid[i]), float(grid[i + 1]), float(a))
            return root, (float(grid[i]), float(grid[i + 1]))
    raise NoSignChangeError(
        f"no sign change found on [{grid[0]:.4g}, {grid[-1]:.4g}]"
    )


def sudden_death_point(model: StateModel, s_db: float) -> float:
    """Noise photon number where the EoF bound crosses zero.

    Scans the default feature grid, interpolates, and polishes the root
    against the exact model; exactly 1 for the ideal channel at every
    squeezing level.
    """
    def e_f(n: float) -> float:
        return correlation_report(model.state(s_db, n)).e_f

    root, _ = _curve_root(e_f, FEATURE_GRID, lo_bound=0.0, hi_bound=FEATURE_GRID[-1])
    return root


def crossover_point(model: StateModel, s_db: float, flavor: str) -> CrossoverResult:
    """Crossover noise photon number n_c for one discord flavor.

    For flavors A and B, n_c is the root of the corresponding
    information-flow difference on the open unit interval (the curves are
    negative below the crossover and positive above).  Flavor AB returns
    the arithmetic mean of the A and B crossover points, bracketed by the
    hull of the two component brackets.
    """
    if flavor == "AB":
        res_a = crossover_point(model, s_db, "A")
        res_b = crossover_point(model, s_db, "B")
        bracket = (
            min(res_a.bracket[0], res_b.bracket[0]),
            max(res_a.bracket[1], res_b.bracket[1]),
        )
        return CrossoverResult(
            flavor="AB",
            s_db=s_db,
            n_c=0.5 * (res_a.n_c + res_b.n_c),
            bracket=bracket,
        )
    if flavor not in ("A", "B"):
        raise DomainError(f"flavor must be 'A', 'B' or 'AB', got {flavor!r}")

    def delta(n: float) -> float:
        rep = correlation_report(model.state(s_db, n))
        return rep.delta_a if flavor == "A" else rep.delta_b

    grid = FEATURE_GRID[FEATURE_GRID < 1.0]
    root, bracket = _curve_root(delta, grid, lo_bound=0.0, hi_bound=1.0)
    return CrossoverResult(flavor=flavor, s_db=s_db, n_c=root, bracket=bracket)


def asymptote_estimate(model: StateModel, flavor: str, s_db_large: float = 30.0) -> CrossoverResult:
    """Crossover point in the strong-squeezing regime (S >= 20 dB), where
    both flavors approach the same constant."""
    if s_db_large < 20.0:
        raise DomainError(f"asymptote estimate needs S >= 20 dB, got {s_db_large}")
    return crossover_point(model, s_db_large, flavor)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

SWEEP_CSV_HEADER = REPORT_CSV_HEADER + ",status"


def sweep_to_csv(grid: SweepGrid) -> str:
    lines = [SWEEP_CSV_HEADER]
    for cell in grid.cells:
        if cell.report is not None:
            lines.append(report_to_csv_row(cell.report, cell.s_db, cell.n) + ",ok")
        else:
            nans = ",".join(["nan"] * 7)
            reason = (cell.error or "failed").replace(",", ";").replace("\n", " ")
            lines.append(f"{cell.s_db!r},{cell.n!r},{nans},{reason}")
    return "\n".join(lines) + "\n"


def sweep_to_json(grid: SweepGrid) -> str:
    cells = []
    for cell in grid.cells:
        doc: dict = {"s_db": cell.s_db, "n": cell.n}
        if cell.report is not None:
            r = cell.report
            doc.update(
                d_a=r.d_a,
                d_b=r.d_b,
                e_f=r.e_f,
                i_ab=r.i_ab,
                delta_a=r.delta_a,
                delta_b=r.delta_b,
                delta_ab=r.delta_ab,
                gamma=r.gamma,
            )
        else:
            doc["error"] = cell.error
        cells.append(doc)
    return json.dumps(
        {
            "s_values": list(grid.s_values),
            "n_values": list(grid.n_values),
            "reports": cells,
        }
    )
