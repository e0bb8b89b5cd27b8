"""State reconstruction and Gaussianity checks from quadrature samples.

Ingests four-column sample streams (I1, Q1, I2, Q2), estimates the
two-mode covariance matrix with the unbiased sample covariance, and
tests Gaussianity through third- and fourth-order joint cumulants: for a
Gaussian state every cumulant beyond second order vanishes, so the state
passes when each estimated cumulant is statistically compatible with
zero.

Cumulants are estimated with k-statistics (the unique symmetric unbiased
estimators).  Their standard errors are taken empirically by splitting
the sample into batches, which stays honest for correlated columns where
plug-in Gaussian-null formulas would need the full cross-covariance
structure.  Samples are assumed pre-calibrated to photon units with
I mapping to q and Q mapping to p.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import NonFiniteError, TooFewSamplesError
from .symplectic import CovarianceMatrix, TwoModeCovariance

COLUMN_NAMES = ("I1", "Q1", "I2", "Q2")

# Orders (m, n) of the joint cumulants tested for Gaussianity.
_HIGHER_ORDERS = [
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
    (4, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 4),
]

DEFAULT_THRESHOLD = 5.0  # standard errors
_BATCHES = 25


@dataclass(frozen=True)
class QuadratureSamples:
    """Equal-length sample columns in the order (I1, Q1, I2, Q2)."""

    data: np.ndarray  # shape (N, 4)

    def __post_init__(self) -> None:
        arr = np.asarray(self.data, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 4:
            raise TooFewSamplesError(
                f"samples must form an (N, 4) array, got shape {arr.shape}"
            )
        if arr.shape[0] < 2:
            raise TooFewSamplesError("need at least two samples")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteError("samples contain NaN or infinite entries")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def n_samples(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class CumulantEntry:
    """One estimated joint cumulant kappa_mn of a column pair."""

    pair: tuple[int, int]  # column indices (i, j)
    order: tuple[int, int]  # powers (m, n) on columns (i, j)
    value: float
    standard_error: float
    normalized: float  # value / sigma_i^m / sigma_j^n


@dataclass(frozen=True)
class CumulantReport:
    second_order: dict[str, float]
    entries: tuple[CumulantEntry, ...]
    gaussian: bool
    threshold: float


def covariance_from_samples(samples: QuadratureSamples) -> TwoModeCovariance:
    """Unbiased sample covariance mapped to (q1, p1, q2, p2) ordering."""
    cov = np.cov(samples.data, rowvar=False, ddof=1)
    return CovarianceMatrix(0.5 * (cov + cov.T))


def project_to_physical(V: CovarianceMatrix) -> CovarianceMatrix:
    """Clamp the symplectic spectrum up to the Heisenberg bound.

    Finite-sample covariance estimates of nearly pure states routinely dip
    a few standard errors below nu = 1/4, which blocks the correlation
    formulas.  This projects onto the physical set by raising every
    symplectic eigenvalue to at least 1/4 in the Williamson basis, the
    usual post-processing step between reconstruction and analysis; the
    perturbation is of the order of the statistical noise itself.
    """
    from .symplectic import VACUUM_VARIANCE, _williamson

    sym = 0.5 * (V.entries + V.entries.T)
    nus, s_mat = _williamson(sym)
    if nus.min() >= VACUUM_VARIANCE:
        return CovarianceMatrix(sym)
    clamped = np.repeat(np.maximum(nus, VACUUM_VARIANCE), 2)
    out = (s_mat * clamped) @ s_mat.T
    return CovarianceMatrix(0.5 * (out + out.T))


def _bivariate_k_statistics(x: np.ndarray, y: np.ndarray) -> dict[tuple[int, int], float]:
    """Unbiased joint cumulant estimators k_mn up to total order four.

    Central-moment formulas (Kendall & Stuart): third order scales m_mn by
    n^2/((n-1)(n-2)); fourth order combines (n+1) m_4-type terms with
    products of second-order moments.
    """
    n = float(x.size)
    dx = x - x.mean()
    dy = y - y.mean()

    def m(p: int, q: int) -> float:
        if p == 0:
            return float(np.mean(dy**q))
        if q == 0:
            return float(np.mean(dx**p))
        return float(np.mean(dx**p * dy**q))

    c3 = n * n / ((n - 1.0) * (n - 2.0))
    c4 = n * n / ((n - 1.0) * (n - 2.0) * (n - 3.0))
    m20, m02, m11 = m(2, 0), m(0, 2), m(1, 1)
    out = {
        (1, 0): float(x.mean()),
        (0, 1): float(y.mean()),
        (2, 0): n / (n - 1.0) * m20,
        (1, 1): n / (n - 1.0) * m11,
        (0, 2): n / (n - 1.0) * m02,
        (3, 0): c3 * m(3, 0),
        (2, 1): c3 * m(2, 1),
        (1, 2): c3 * m(1, 2),
        (0, 3): c3 * m(0, 3),
        (4, 0): c4 * ((n + 1.0) * m(4, 0) - 3.0 * (n - 1.0) * m20 * m20),
        (3, 1): c4 * ((n + 1.0) * m(3, 1) - 3.0 * (n - 1.0) * m20 * m11),
        (2, 2): c4 * ((n + 1.0) * m(2, 2) - (n - 1.0) * (m20 * m02 + 2.0 * m11 * m11)),
        (1, 3): c4 * ((n + 1.0) * m(1, 3) - 3.0 * (n - 1.0) * m02 * m11),
        (0, 4): c4 * ((n + 1.0) * m(0, 4) - 3.0 * (n - 1.0) * m02 * m02),
    }
    return out


def cumulants(
    samples: QuadratureSamples,
    max_order: int = 4,
    threshold: float = DEFAULT_THRESHOLD,
) -> CumulantReport:
    """Joint cumulants of all column pairs with a Gaussianity verdict.

    The verdict is true iff every third- and fourth-order k-statistic
    stays below ``threshold`` batch-estimated standard errors in
    magnitude.
    """
    if max_order != 4:
        raise ValueError("only max_order=4 is implemented")
    if samples.n_samples < 10 * max_order:
        raise TooFewSamplesError(
            f"need at least {10 * max_order} samples, got {samples.n_samples}"
        )
    data = samples.data
    n = samples.n_samples

    sigmas = np.std(data, axis=0, ddof=1)
    second: dict[str, float] = {}
    cov = np.cov(data, rowvar=False, ddof=1)
    for i, j in combinations(range(4), 2):
        second[f"{COLUMN_NAMES[i]}{COLUMN_NAMES[j]}"] = float(cov[i, j])
    for i in range(4):
        second[f"{COLUMN_NAMES[i]}{COLUMN_NAMES[i]}"] = float(cov[i, i])

    n_batches = max(2, min(_BATCHES, n // (10 * max_order)))
    bounds = np.linspace(0, n, n_batches + 1, dtype=int)

    entries: list[CumulantEntry] = []
    gaussian = True
    seen_univariate: set[tuple[int, tuple[int, int]]] = set()
    for i, j in combinations(range(4), 2):
        full = _bivariate_k_statistics(data[:, i], data[:, j])
        batch_vals = [
            _bivariate_k_statistics(data[a:b, i], data[a:b, j])
            for a, b in zip(bounds[:-1], bounds[1:])
        ]
        for order in _HIGHER_ORDERS:
            m_i, m_j = order
            # Univariate cumulants appear once per column, not per pair.
            if m_j == 0:
                key = (i, order)
                if key in seen_univariate:
                    continue
                seen_univariate.add(key)
            elif m_i == 0:
                key = (j, order)
                if key in seen_univariate:
                    continue
                seen_univariate.add(key)
            spread = np.std([bv[order] for bv in batch_vals], ddof=1)
            se = float(spread / np.sqrt(n_batches))
            value = full[order]
            norm = value / (sigmas[i] ** m_i * sigmas[j] ** m_j)
            entries.append(
                CumulantEntry(
                    pair=(i, j),
                    order=order,
                    value=value,
                    standard_error=se,
                    normalized=float(norm),
                )
            )
            if se == 0.0:
                if value != 0.0:
                    gaussian = False
            elif abs(value) >= threshold * se:
                gaussian = False
    return CumulantReport(
        second_order=second,
        entries=tuple(entries),
        gaussian=gaussian,
        threshold=threshold,
    )


def samples_from_csv(text: str) -> QuadratureSamples:
    """Parse an I1,Q1,I2,Q2 table; raises ValueError naming the bad line."""
    rows = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        toks = line.split(",")
        if line_no == 1 and any(t.strip().upper() in COLUMN_NAMES for t in toks):
            continue  # header
        if len(toks) != 4:
            raise ValueError(f"line {line_no}: expected 4 columns, got {len(toks)}")
        try:
            rows.append([float(t) for t in toks])
        except ValueError:
            raise ValueError(f"line {line_no}: non-numeric entry") from None
    if not rows:
        raise ValueError("no data rows found")
    return QuadratureSamples(np.array(rows))


def samples_to_csv(samples: QuadratureSamples) -> str:
    lines = [",".join(COLUMN_NAMES)]
    for row in samples.data:
        lines.append(",".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def cumulant_report_to_json(report: CumulantReport) -> str:
    return json.dumps(
        {
            "gaussian": report.gaussian,
            "threshold": report.threshold,
            "second_order": report.second_order,
            "cumulants": [
                {
                    "pair": [COLUMN_NAMES[e.pair[0]], COLUMN_NAMES[e.pair[1]]],
                    "order": list(e.order),
                    "value": e.value,
                    "standard_error": e.standard_error,
                    "normalized": e.normalized,
                }
                for e in report.entries
            ],
        }
    )
