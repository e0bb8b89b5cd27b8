"""Covariance-matrix value types and symplectic linear algebra.

Conventions used throughout the package:

* Quadrature ordering is ``(q1, p1, q2, p2, ...)``.
* Variances are dimensionless with the vacuum at 1/4 per quadrature, so a
  single-mode thermal state with ``n`` photons has variance ``(1 + 2n)/4``
  and the Heisenberg bound reads ``nu >= 1/4`` for every symplectic
  eigenvalue ``nu``.
* Entropies are returned in nats (natural logarithm).

All types are immutable values and all operations are pure functions, so
everything here is safe to call concurrently.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadIndexError,
    DimensionMismatchError,
    DomainError,
    NonFiniteError,
    NumericalError,
    SingularMeasurementError,
    UnphysicalStateError,
)

VACUUM_VARIANCE = 0.25

# Absolute slack on the Heisenberg bound nu >= 1/4 accepted by validate().
PHYSICALITY_TOL = 1e-9

# Relative tolerance for the symmetry check.
SYMMETRY_TOL = 1e-12


def symplectic_form(n_modes: int) -> np.ndarray:
    """Symplectic form Omega for `n_modes` modes in (q1, p1, ...) ordering."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True)
class CovarianceMatrix:
    """Real 2n x 2n covariance matrix of an n-mode Gaussian state.

    The constructor only enforces the shape; use :func:`validate` to check
    symmetry, positive definiteness and the Heisenberg bound.  The stored
    array is copied and frozen, so instances are immutable values.
    """

    entries: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.entries, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] % 2 != 0:
            raise DimensionMismatchError(
                f"covariance matrix must be square with even size, got {arr.shape}"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "entries", arr)

    @property
    def n_modes(self) -> int:
        return self.entries.shape[0] // 2

    def block(self, row_mode: int, col_mode: int) -> np.ndarray:
        """2x2 block coupling the quadratures of two modes."""
        r, c = 2 * row_mode, 2 * col_mode
        return np.array(self.entries[r : r + 2, c : c + 2])

    def variance(self, mode: int, quadrature: str) -> float:
        """Diagonal variance of one quadrature ('q' or 'p') of one mode."""
        i = 2 * mode + _quadrature_offset(quadrature)
        return float(self.entries[i, i])


#: Type alias used in signatures where exactly two modes are required.
TwoModeCovariance = CovarianceMatrix


@dataclass(frozen=True)
class SymplecticSummary:
    """Symplectic invariants and eigenvalues of a two-mode state.

    ``i1``/``i2``/``i3`` are the determinants of the A-block, B-block and
    cross block, ``i4`` the determinant of the full matrix and
    ``delta = i1 + i2 + 2*i3``.  ``nu_pt_min`` is the smaller symplectic
    eigenvalue after partially transposing the second mode; values below
    1/4 certify entanglement.
    """

    i1: float
    i2: float
    i3: float
    i4: float
    delta: float
    nu_plus: float
    nu_minus: float
    nu_pt_min: float


@dataclass(frozen=True)
class ValidationVerdict:
    """Outcome of :func:`validate`: clean, or the list of violations."""

    ok: bool
    violations: tuple[str, ...] = ()
    min_symplectic_eigenvalue: float | None = None


@dataclass(frozen=True)
class SymplecticOperation:
    """A symplectic matrix S (satisfying S Omega S^T = Omega) with a kind tag."""

    matrix: np.ndarray
    kind: str = "composite"

    def __post_init__(self) -> None:
        arr = np.array(self.matrix, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] % 2 != 0:
            raise DimensionMismatchError(
                f"symplectic matrix must be square with even size, got {arr.shape}"
            )
        omega = symplectic_form(arr.shape[0] // 2)
        defect = np.abs(arr @ omega @ arr.T - omega).max()
        if not np.isfinite(defect) or defect > 1e-12:
            raise ValueError(
                f"matrix does not preserve the symplectic form (defect {defect:.3e})"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "matrix", arr)

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0] // 2

    def then(self, other: "SymplecticOperation") -> "SymplecticOperation":
        """Composition: apply ``self`` first, then ``other``."""
        if other.n_modes != self.n_modes:
            raise DimensionMismatchError("cannot compose operations on different mode counts")
        return SymplecticOperation(other.matrix @ self.matrix, kind="composite")


def identity_op(n_modes: int) -> SymplecticOperation:
    return SymplecticOperation(np.eye(2 * n_modes), kind="identity")


def beam_splitter(coupling: float, mode_a: int, mode_b: int, n_modes: int) -> SymplecticOperation:
    """Beam splitter with power coupling ``coupling`` between two modes.

    Acts as  a' = sqrt(1-coupling) a + sqrt(coupling) b,
             b' = -sqrt(coupling) a + sqrt(1-coupling) b
    on the quadratures of the two modes; coupling = 1/2 is the symmetric
    (50:50) splitter.
    """
    if not 0.0 <= coupling <= 1.0:
        raise DomainError(f"beam-splitter coupling must lie in [0, 1], got {coupling}")
    t = math.sqrt(1.0 - coupling)
    s = math.sqrt(coupling)
    m = np.eye(2 * n_modes)
    for i in range(2):
        ia, ib = 2 * mode_a + i, 2 * mode_b + i
        m[ia, ia] = t
        m[ia, ib] = s
        m[ib, ia] = -s
        m[ib, ib] = t
    return SymplecticOperation(m, kind="beam-splitter")


def single_mode_squeezer(r: float, mode: int, n_modes: int) -> SymplecticOperation:
    """Squeezer scaling q by exp(-r) and p by exp(r) on one mode."""
    m = np.eye(2 * n_modes)
    m[2 * mode, 2 * mode] = math.exp(-r)
    m[2 * mode + 1, 2 * mode + 1] = math.exp(r)
    return SymplecticOperation(m, kind="single-mode-squeezer")


def _quadrature_offset(quadrature: str) -> int:
    if quadrature == "q":
        return 0
    if quadrature == "p":
        return 1
    raise DomainError(f"quadrature must be 'q' or 'p', got {quadrature!r}")


def validate(V: CovarianceMatrix) -> ValidationVerdict:
    """Check a covariance matrix against the physicality invariants.

    Reported violations: asymmetry beyond tolerance, failure of positive
    definiteness, and symplectic eigenvalues below the Heisenberg bound
    1/4 (within ``PHYSICALITY_TOL``).  Raises :class:`NonFiniteError` if
    any entry is NaN or infinite.
    """
    m = V.entries
    if not np.all(np.isfinite(m)):
        raise NonFiniteError("covariance matrix has NaN or infinite entries")
    if V.n_modes == 0:
        return ValidationVerdict(ok=True)

    violations: list[str] = []
    scale = max(1.0, float(np.abs(m).max()))
    if np.abs(m - m.T).max() > SYMMETRY_TOL * scale:
        violations.append("asymmetric beyond 1e-12 relative tolerance")

    sym = 0.5 * (m + m.T)
    eigs = np.linalg.eigvalsh(sym)
    min_nu: float | None = None
    if eigs.min() <= 0.0:
        violations.append("not positive definite")
    else:
        if V.n_modes == 2:
            min_nu = min(_two_mode_nu(sym, partial_transpose=False))
        else:
            min_nu = float(_symplectic_eigenvalues_psd(sym).min())
        # Strongly squeezed states cannot even be assembled in double
        # precision with their spectrum resolved better than about
        # eps * norm * sqrt(cond) (times pipeline length), so the
        # Heisenberg slack grows with the conditioning; for ordinary
        # states the 1e-9 floor applies.
        noise = 1000.0 * np.finfo(float).eps * eigs.max() * math.sqrt(
            eigs.max() / eigs.min()
        )
        if min_nu < VACUUM_VARIANCE - max(PHYSICALITY_TOL, noise):
            violations.append(
                f"symplectic eigenvalue {min_nu:.6g} below the Heisenberg bound 1/4"
            )
    return ValidationVerdict(
        ok=not violations,
        violations=tuple(violations),
        min_symplectic_eigenvalue=min_nu,
    )


def require_valid(V: CovarianceMatrix) -> None:
    verdict = validate(V)
    if not verdict.ok:
        raise UnphysicalStateError(
            "unphysical covariance matrix: " + "; ".join(verdict.violations),
            violations=verdict.violations,
        )


def _symplectic_eigenvalues_psd(sym: np.ndarray) -> np.ndarray:
    """Symplectic eigenvalues of a symmetric positive-definite matrix.

    Uses the singular values of ``L^T Omega L`` for the Cholesky factor
    ``V = L L^T``: that matrix is antisymmetric (hence normal) and shares
    the spectrum of ``i Omega V``, so degenerate pairs and strongly
    squeezed states keep full accuracy where a direct non-symmetric
    eigensolve of ``i Omega V`` loses half the digits.
    """
    n = sym.shape[0] // 2
    try:
        chol = np.linalg.cholesky(sym)
    except np.linalg.LinAlgError:
        # Barely-PD fallback: the eigh route is less accurate for strongly
        # squeezed states but tolerates semi-definite roundoff.
        w, u = np.linalg.eigh(sym)
        if w.min() <= 0:
            raise NumericalError("symplectic spectrum requested for a non-PD matrix")
        chol = u * np.sqrt(w)
    m = chol.T @ symplectic_form(n) @ chol
    s = np.linalg.svd(m, compute_uv=False)  # each eigenvalue appears twice
    return s[::2]


def _williamson(sym: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Williamson normal form of a symmetric PD matrix: V = S D S^T.

    Returns (nus, S) with D = diag(nu_1, nu_1, ..., nu_n, nu_n) and S
    exactly symplectic up to roundoff.  Built from the real Schur form of
    the antisymmetric matrix V^(1/2) Omega V^(1/2).
    """
    import scipy.linalg

    n = sym.shape[0] // 2
    w, u = np.linalg.eigh(sym)
    if w.min() <= 0:
        raise NumericalError("Williamson form requested for a non-PD matrix")
    root = (u * np.sqrt(w)) @ u.T
    inv_root = (u / np.sqrt(w)) @ u.T
    m = root @ symplectic_form(n) @ root
    m = 0.5 * (m - m.T)
    t, q = scipy.linalg.schur(m, output="real")
    nus = np.empty(n)
    for k in range(n):
        b = t[2 * k, 2 * k + 1]
        nus[k] = abs(b)
        if b < 0:  # flip the block to the +nu J orientation
            q[:, [2 * k, 2 * k + 1]] = q[:, [2 * k + 1, 2 * k]]
    scale = np.repeat(1.0 / np.sqrt(nus), 2)
    s_mat = root @ q * scale
    return nus, s_mat


def symplectic_eigenvalues(V: CovarianceMatrix) -> np.ndarray:
    """All symplectic eigenvalues of a validated covariance matrix.

    Two-mode states use the invariant closed form; other sizes fall back
    to the spectral route.
    """
    require_valid(V)
    if V.n_modes == 1:
        det = float(np.linalg.det(V.entries))
        return np.array([math.sqrt(max(det, 0.0))])
    if V.n_modes == 2:
        nu_plus, nu_minus = _two_mode_nu(V.entries, partial_transpose=False)
        return np.array([nu_plus, nu_minus])
    return _symplectic_eigenvalues_psd(0.5 * (V.entries + V.entries.T))


def _det2(b: np.ndarray) -> float:
    return float(b[0, 0] * b[1, 1] - b[0, 1] * b[1, 0])


def _two_mode_invariants(m: np.ndarray) -> tuple[float, float, float, float]:
    i1 = _det2(m[0:2, 0:2])
    i2 = _det2(m[2:4, 2:4])
    i3 = _det2(m[0:2, 2:4])
    i4 = float(np.linalg.det(m))
    return i1, i2, i3, i4


def _det_small_ld(m: np.ndarray):
    """Determinant via LU with partial pivoting, carried in the input
    dtype (numpy.linalg would silently cast longdouble to float64, and a
    cofactor expansion is catastrophically cancellative for the strongly
    correlated matrices seen here)."""
    a = m.copy()
    n = a.shape[0]
    if n == 1:
        return a[0, 0]
    if n == 2:
        return a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    det = a.dtype.type(1.0)
    for k in range(n - 1):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if a[p, k] == 0.0:
            return a.dtype.type(0.0)
        if p != k:
            a[[k, p], :] = a[[p, k], :]
            det = -det
        det = det * a[k, k]
        a[k + 1 :, k:] -= np.outer(a[k + 1 :, k] / a[k, k], a[k, k:])
    return det * a[n - 1, n - 1]


def _two_mode_nu(m: np.ndarray, partial_transpose: bool) -> tuple[float, float]:
    """Two-mode symplectic eigenvalues from the invariant closed form.

    Evaluated in extended precision: the invariants of strongly squeezed
    or high-photon-number states reach ~1e6 while the small eigenvalue
    sits near 1/4, and the entropy kernel's log-divergent slope at the
    Heisenberg bound amplifies any eigenvalue noise, so plain double
    arithmetic here would cap the accuracy of entropy differences near
    1e-8.  The discriminant is clamped to zero inside a tiny relative
    window (degenerate pairs of pure states) and the smaller root uses
    the cancellation-free quotient form.
    """
    ml = m.astype(np.longdouble)
    i1 = _det_small_ld(ml[0:2, 0:2])
    i2 = _det_small_ld(ml[2:4, 2:4])
    i3 = _det_small_ld(ml[0:2, 2:4])
    i4 = _det_small_ld(ml)
    if partial_transpose:
        i3 = -i3
    delta = i1 + i2 + 2.0 * i3
    disc = delta * delta - 4.0 * i4
    tol = 1e-15 * max(1.0, float(delta * delta), float(abs(4.0 * i4)))
    if abs(float(disc)) <= tol:
        disc = np.longdouble(0.0)
    elif disc < 0.0:
        raise NumericalError(
            f"negative symplectic discriminant {float(disc):.3e} beyond tolerance"
        )
    root = np.sqrt(disc)
    nu_plus_sq = 0.5 * (delta + root)
    if nu_plus_sq <= 0.0:
        raise NumericalError("non-positive squared symplectic eigenvalue")
    nu_minus_sq = 2.0 * i4 / (delta + root)
    if nu_minus_sq < 0.0:
        raise NumericalError("negative squared symplectic eigenvalue")
    return float(np.sqrt(nu_plus_sq)), float(np.sqrt(nu_minus_sq))


def symplectic_summary(V: TwoModeCovariance) -> SymplecticSummary:
    """Invariants, symplectic eigenvalues and the partial-transpose minimum
    eigenvalue of a two-mode state."""
    if V.n_modes != 2:
        raise DimensionMismatchError("symplectic_summary requires a two-mode state")
    require_valid(V)
    m = 0.5 * (V.entries + V.entries.T)
    i1, i2, i3, i4 = _two_mode_invariants(m)
    delta = i1 + i2 + 2.0 * i3
    nu_plus, nu_minus = _two_mode_nu(m, partial_transpose=False)
    _, nu_pt_min = _two_mode_nu(m, partial_transpose=True)
    return SymplecticSummary(
        i1=i1,
        i2=i2,
        i3=i3,
        i4=i4,
        delta=delta,
        nu_plus=nu_plus,
        nu_minus=nu_minus,
        nu_pt_min=nu_pt_min,
    )


def entropy_f(x: float) -> float:
    """Entropy kernel f(x) = (2x + 1/2) ln(2x + 1/2) - (2x - 1/2) ln(2x - 1/2).

    Defined for x >= 1/4 with f(1/4) = 0 (the second limb evaluates to its
    0 * ln 0 = 0 limit); strictly increasing above the vacuum point.
    """
    if not math.isfinite(x):
        raise DomainError(f"entropy argument must be finite, got {x}")
    if x < VACUUM_VARIANCE - 1e-12:
        raise DomainError(f"entropy argument {x} below the vacuum variance 1/4")
    plus = 2.0 * x + 0.5
    minus = 2.0 * x - 0.5
    if minus <= 0.0:
        return 0.0
    return plus * math.log(plus) - minus * math.log(minus)


def von_neumann_entropy(V: CovarianceMatrix) -> float:
    """Von Neumann entropy in nats: sum of f over the symplectic spectrum.

    Eigenvalues within the double-precision storage noise of the
    Heisenberg bound are treated as exactly pure: the entropy kernel has
    a log-divergent slope at 1/4, so structure below that noise scale
    would otherwise surface as jitter much larger than its actual
    (negligible) entropy contribution.
    """
    nus = symplectic_eigenvalues(V)
    sym = 0.5 * (V.entries + V.entries.T)
    eigs = np.linalg.eigvalsh(sym)
    slack = 0.0
    if eigs.min() > 0.0:
        slack = 1000.0 * np.finfo(float).eps * eigs.max() * math.sqrt(
            eigs.max() / eigs.min()
        )
    total = 0.0
    for nu in nus:
        if nu > VACUUM_VARIANCE + slack:
            total += entropy_f(nu)
    return total


def apply_symplectic(V: CovarianceMatrix, S: SymplecticOperation) -> CovarianceMatrix:
    """Conjugate a covariance matrix by a symplectic operation: S V S^T."""
    if S.n_modes != V.n_modes:
        raise DimensionMismatchError(
            f"operation acts on {S.n_modes} modes but state has {V.n_modes}"
        )
    return CovarianceMatrix(S.matrix @ V.entries @ S.matrix.T)


def tensor(V1: CovarianceMatrix, V2: CovarianceMatrix) -> CovarianceMatrix:
    """Block-diagonal composition; the first argument's modes come first."""
    n1, n2 = 2 * V1.n_modes, 2 * V2.n_modes
    out = np.zeros((n1 + n2, n1 + n2))
    out[:n1, :n1] = V1.entries
    out[n1:, n1:] = V2.entries
    return CovarianceMatrix(out)


def partial_trace(V: CovarianceMatrix, keep) -> CovarianceMatrix:
    """Reduce to the principal submatrix on the kept modes (0-based indices)."""
    modes = sorted(set(int(k) for k in keep))
    if not modes:
        raise BadIndexError("partial_trace needs a non-empty set of modes to keep")
    if modes[0] < 0 or modes[-1] >= V.n_modes:
        raise BadIndexError(f"mode indices {modes} out of range for {V.n_modes} modes")
    idx = np.array([2 * m + o for m in modes for o in (0, 1)])
    return CovarianceMatrix(V.entries[np.ix_(idx, idx)])


def homodyne_condition(
    V: CovarianceMatrix, measured_mode: int, quadrature: str = "q"
) -> CovarianceMatrix:
    """Covariance of the remaining modes after a homodyne detection.

    Implements the general Schur-complement rule
    ``A' = A - C (Pi B Pi)^+ C^T`` with the Moore-Penrose pseudoinverse of
    the projected 2x2 block of the measured mode, so no isotropy of that
    block is assumed.
    """
    n = V.n_modes
    if not 0 <= measured_mode < n:
        raise BadIndexError(f"measured mode {measured_mode} out of range for {n} modes")
    if n < 2:
        raise BadIndexError("conditioning needs at least one unmeasured mode")
    off = _quadrature_offset(quadrature)
    if V.entries[2 * measured_mode + off, 2 * measured_mode + off] <= 0.0:
        raise SingularMeasurementError(
            f"measured {quadrature} variance is not positive"
        )
    require_valid(V)

    m = V.entries
    meas = [2 * measured_mode, 2 * measured_mode + 1]
    rest = [i for i in range(2 * n) if i not in meas]
    a = m[np.ix_(rest, rest)]
    c = m[np.ix_(rest, meas)]
    b = m[np.ix_(meas, meas)]
    pi = np.zeros((2, 2))
    pi[off, off] = 1.0
    return CovarianceMatrix(a - c @ np.linalg.pinv(pi @ b @ pi) @ c.T)


# ---------------------------------------------------------------------------
# Serialization.  JSON round-trips are exact (repr-based floats); CSV holds
# one matrix row per line.
# ---------------------------------------------------------------------------


def covariance_to_json(V: CovarianceMatrix) -> str:
    return json.dumps(
        {"n_modes": V.n_modes, "entries": [float(x) for x in V.entries.ravel()]}
    )


def covariance_from_json(text: str) -> CovarianceMatrix:
    data = json.loads(text)
    n = int(data["n_modes"])
    flat = np.array(data["entries"], dtype=float)
    if flat.size != (2 * n) ** 2:
        raise DimensionMismatchError(
            f"expected {(2 * n) ** 2} entries for {n} modes, got {flat.size}"
        )
    return CovarianceMatrix(flat.reshape(2 * n, 2 * n))


def covariance_to_csv(V: CovarianceMatrix) -> str:
    return "\n".join(",".join(repr(float(x)) for x in row) for row in V.entries) + "\n"


def covariance_from_csv(text: str) -> CovarianceMatrix:
    rows = [
        [float(tok) for tok in line.split(",")]
        for line in text.strip().splitlines()
        if line.strip()
    ]
    return CovarianceMatrix(np.array(rows, dtype=float))
