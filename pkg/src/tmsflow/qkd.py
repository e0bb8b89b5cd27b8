"""Entangling-cloner CV-QKD key rates under reverse reconciliation.

The eavesdropper holds a TMS ancilla pair (diagonal variance factor W)
and couples one ancilla mode into channel B through a weak beam splitter
of power coupling beta.  Matching the noisy channel fixes ``beta W = 2n``
with ``n`` the injected photon number; the receiver homodynes the q
quadrature of B, so the effective noise in the detected quadrature is
``n_q = n/2``.  The secret key is ``K = I_s - chi_E`` with the Shannon
mutual information of the homodyne channel and the eavesdropper's Holevo
quantity.  This module alone works in bits: the entropy kernel is
evaluated in nats and divided by ln 2 so that K is unit-consistent.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import BadCouplingError, DomainError, NoSignChangeError, NumericalError
from .symplectic import (
    CovarianceMatrix,
    beam_splitter,
    homodyne_condition,
    partial_trace,
    tensor,
    von_neumann_entropy,
)
from .states import eve_tms, ideal_tms

_LN2 = math.log(2.0)

DEFAULT_CLONER_COUPLING = 1e-4


@dataclass(frozen=True)
class QkdScenario:
    """Protocol parameters: resource squeezing r, detected-quadrature noise
    n_q, cloner coupling beta, and codebook variance sigma2.

    ``sigma2`` defaults to ``sinh(2r)/2``, the variance of the modulated
    quadrature of the resource state.  The cloner variance factor is
    ``W = max(1, 2n/beta)`` with ``n = 2 n_q``; the clamp at 1 keeps the
    ancilla physical when the noise is weaker than the coupling.
    """

    r: float
    n_q: float
    beta: float = DEFAULT_CLONER_COUPLING
    sigma2: float | None = None

    def __post_init__(self) -> None:
        if self.r < 0:
            raise DomainError(f"squeezing factor must be >= 0, got {self.r}")
        if self.n_q < 0:
            raise DomainError(f"quadrature noise must be >= 0, got {self.n_q}")
        if not 0.0 < self.beta < 1.0:
            raise BadCouplingError(f"cloner coupling must lie in (0, 1), got {self.beta}")
        if self.sigma2 is None:
            object.__setattr__(self, "sigma2", 0.5 * math.sinh(2.0 * self.r))
        elif self.sigma2 < 0.0:
            raise DomainError(f"codebook variance must be >= 0, got {self.sigma2}")

    @property
    def n(self) -> float:
        return 2.0 * self.n_q

    @property
    def w(self) -> float:
        return max(1.0, 2.0 * self.n / self.beta)


@dataclass(frozen=True)
class KeyResult:
    """Secret key budget in bits: K = shannon_mi - holevo."""

    shannon_mi: float
    holevo: float
    key: float


def cloner_state(scenario: QkdScenario) -> CovarianceMatrix:
    """Joint 4-mode covariance (A, B, E1, E2) after the cloner coupling.

    Built compositionally: the resource TMS state stacked with the
    eavesdropper pair, then the beam splitter on (B, E1).  The result is
    pure since the inputs are pure and the coupling is symplectic.
    """
    joint = tensor(ideal_tms(scenario.r), eve_tms(scenario.w))
    return apply_cloner_coupling(joint, scenario.beta)


def apply_cloner_coupling(joint: CovarianceMatrix, beta: float) -> CovarianceMatrix:
    if joint.n_modes != 4:
        raise DomainError("cloner coupling expects the 4-mode (A, B, E1, E2) state")
    return CovarianceMatrix(
        beam_splitter(beta, 1, 2, 4).matrix @ joint.entries @ beam_splitter(beta, 1, 2, 4).matrix.T
    )


def holevo_quantity(scenario: QkdScenario) -> float:
    """Eavesdropper's Holevo bound in bits for reverse reconciliation.

    chi_E = S(E) - S(E|B) with B homodyned in q; both entropies are taken
    over the (E1, E2) pair of the cloner state.
    """
    full = cloner_state(scenario)
    eve = partial_trace(full, (2, 3))
    s_e = von_neumann_entropy(eve) / _LN2
    conditioned = homodyne_condition(full, measured_mode=1, quadrature="q")
    eve_cond = partial_trace(conditioned, (1, 2))  # (A, E1, E2) -> (E1, E2)
    s_e_cond = von_neumann_entropy(eve_cond) / _LN2
    chi = s_e - s_e_cond
    return max(chi, 0.0)


def shannon_mi(scenario: QkdScenario) -> float:
    """Shannon mutual information of the homodyne channel in bits.

    I_s = log2(1 + SNR) / 2 with
    SNR = 4 (1 - beta) sigma2 / ((1 - beta) exp(-2r) + 4 n_q).
    """
    beta = scenario.beta
    snr = (
        4.0
        * (1.0 - beta)
        * scenario.sigma2
        / ((1.0 - beta) * math.exp(-2.0 * scenario.r) + 4.0 * scenario.n_q)
    )
    return 0.5 * math.log2(1.0 + snr)


def secret_key(scenario: QkdScenario) -> KeyResult:
    mi = shannon_mi(scenario)
    chi = holevo_quantity(scenario)
    return KeyResult(shannon_mi=mi, holevo=chi, key=mi - chi)


def key_threshold(
    s_db: float,
    tolerance: float = 1e-6,
    beta: float = DEFAULT_CLONER_COUPLING,
    bracket: tuple[float, float] = (1e-4, 2.0),
) -> float:
    """Noise photon number n_q at which the secret key changes sign.

    Bisection on the bracket; the key must be positive at the lower end
    and negative at the upper end (it decreases with noise), otherwise
    :class:`NoSignChangeError` is raised.  The bracket is bisected down to
    relative width 1e-12 and the midpoint is verified to satisfy
    |K| < tolerance.  The evaluation noise of K (entropy differences of
    nearly pure states) is around 1e-7 at weak squeezing, so tolerances
    much below 1e-6 are only attainable at strong squeezing.
    """
    if s_db <= 0:
        raise DomainError(f"squeezing level must be > 0 dB, got {s_db}")
    from .states import squeezing_db_to_r

    r = squeezing_db_to_r(s_db)

    def key_at(n_q: float) -> float:
        return secret_key(QkdScenario(r=r, n_q=n_q, beta=beta)).key

    lo, hi = bracket
    k_lo, k_hi = key_at(lo), key_at(hi)
    if not (k_lo > 0.0 > k_hi):
        raise NoSignChangeError(
            f"no key sign change on [{lo}, {hi}] at {s_db} dB "
            f"(K({lo}) = {k_lo:.3e}, K({hi}) = {k_hi:.3e})"
        )
    while hi - lo > 1e-12 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if key_at(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    mid = 0.5 * (lo + hi)
    if not abs(key_at(mid)) < tolerance:
        raise NumericalError(
            f"key at the bisection point exceeds the requested tolerance: "
            f"|{key_at(mid):.3e}| >= {tolerance}"
        )
    return mid


def key_result_to_json(scenario: QkdScenario, result: KeyResult) -> str:
    return json.dumps(
        {
            "r": scenario.r,
            "n_q": scenario.n_q,
            "beta": scenario.beta,
            "sigma2": scenario.sigma2,
            "shannon_mi_bits": result.shannon_mi,
            "holevo_bits": result.holevo,
            "key_bits": result.key,
        }
    )


QKD_CSV_HEADER = "S_db,n_q,I_s_bits,holevo_bits,K_bits"


def key_result_to_csv_row(s_db: float, n_q: float, result: KeyResult) -> str:
    fields = [s_db, n_q, result.shannon_mi, result.holevo, result.key]
    return ",".join(repr(float(x)) for x in fields)
