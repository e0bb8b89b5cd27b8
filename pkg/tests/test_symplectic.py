import math

import numpy as np
import pytest

from tmsflow.errors import (
    BadIndexError,
    DimensionMismatchError,
    DomainError,
    NonFiniteError,
    SingularMeasurementError,
    UnphysicalStateError,
)
from tmsflow.states import ideal_tms, inject_noise_ideal, thermal, vacuum
from tmsflow.symplectic import (
    CovarianceMatrix,
    SymplecticOperation,
    apply_symplectic,
    beam_splitter,
    covariance_from_csv,
    covariance_from_json,
    covariance_to_csv,
    covariance_to_json,
    entropy_f,
    homodyne_condition,
    identity_op,
    partial_trace,
    single_mode_squeezer,
    symplectic_form,
    symplectic_summary,
    tensor,
    validate,
    von_neumann_entropy,
)

from conftest import nu_oracle, nu_pt_min_oracle, random_physical_state

F_COSH2_QUARTER = 1.6198220928977022644  # f(cosh(2)/4), 40-digit evaluation
NU_PT_TMS_R1 = 0.033833820809153172973  # exp(-2)/4


class TestValidate:
    def test_vacuum_clean(self):
        verdict = validate(vacuum(2))
        assert verdict.ok and not verdict.violations

    def test_scaled_below_vacuum_unphysical(self):
        verdict = validate(CovarianceMatrix(np.eye(4) / 8.0))
        assert not verdict.ok
        assert any("Heisenberg" in v for v in verdict.violations)
        assert verdict.min_symplectic_eigenvalue == pytest.approx(0.125, abs=1e-12)

    def test_pure_tms_clean_with_quarter_spectrum(self):
        V = ideal_tms(1.0)
        assert validate(V).ok
        assert np.allclose(nu_oracle(V.entries), 0.25, atol=1e-9)

    def test_asymmetric_flagged(self):
        m = 0.25 * np.eye(4)
        m[0, 1] = 1e-6
        verdict = validate(CovarianceMatrix(m))
        assert any("asymmetric" in v for v in verdict.violations)

    def test_zero_matrix_not_positive_definite(self):
        verdict = validate(CovarianceMatrix(np.zeros((4, 4))))
        assert not verdict.ok
        assert any("positive definite" in v for v in verdict.violations)

    def test_nan_raises(self):
        m = 0.25 * np.eye(4)
        m[2, 2] = np.nan
        with pytest.raises(NonFiniteError):
            validate(CovarianceMatrix(m))


class TestSymplecticSummary:
    def test_vacuum(self):
        s = symplectic_summary(vacuum(2))
        assert s.nu_plus == pytest.approx(0.25, abs=1e-14)
        assert s.nu_minus == pytest.approx(0.25, abs=1e-14)
        assert s.nu_pt_min == pytest.approx(0.25, abs=1e-14)

    def test_tms_partial_transpose(self):
        s = symplectic_summary(ideal_tms(1.0))
        assert s.nu_pt_min == pytest.approx(NU_PT_TMS_R1, abs=1e-14)
        assert s.nu_pt_min == pytest.approx(nu_pt_min_oracle(ideal_tms(1.0).entries), abs=1e-10)

    @pytest.mark.parametrize("r", [0.3, 0.7, 1.0, 1.6])
    def test_noise_one_hits_the_boundary(self, r):
        V = inject_noise_ideal(ideal_tms(r), 1.0)
        s = symplectic_summary(V)
        assert s.nu_pt_min == pytest.approx(0.25, abs=1e-12)

    def test_product_identity_random_states(self, rng):
        for _ in range(200):
            V = random_physical_state(rng)
            s = symplectic_summary(V)
            assert s.nu_plus >= s.nu_minus > 0
            root_i4 = math.sqrt(s.i4)
            assert s.nu_plus * s.nu_minus == pytest.approx(root_i4, rel=1e-9)
            assert s.nu_plus**2 * s.nu_minus**2 == pytest.approx(s.i4, rel=1e-9)
            assert s.delta == pytest.approx(s.i1 + s.i2 + 2 * s.i3, rel=1e-12)

    def test_matches_eigensolve_oracle(self, rng):
        for _ in range(50):
            V = random_physical_state(rng)
            s = symplectic_summary(V)
            nus = nu_oracle(V.entries)
            assert s.nu_minus == pytest.approx(nus.min(), rel=1e-8)
            assert s.nu_plus == pytest.approx(nus.max(), rel=1e-8)

    def test_unphysical_rejected(self):
        with pytest.raises(UnphysicalStateError):
            symplectic_summary(CovarianceMatrix(np.eye(4) / 8.0))


class TestEntropyKernel:
    def test_vacuum_point_is_exactly_zero(self):
        assert entropy_f(0.25) == 0.0

    def test_one_photon_thermal(self):
        assert entropy_f(0.75) == pytest.approx(2.0 * math.log(2.0), abs=1e-14)

    def test_tms_marginal_value(self):
        assert entropy_f(math.cosh(2.0) / 4.0) == pytest.approx(F_COSH2_QUARTER, abs=1e-13)

    def test_monotone_on_grid(self):
        xs = np.linspace(0.25, 10.0, 400)
        vals = [entropy_f(x) for x in xs]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_domain_error(self):
        with pytest.raises(DomainError):
            entropy_f(0.25 - 1e-9)
        with pytest.raises(DomainError):
            entropy_f(float("nan"))


class TestVonNeumannEntropy:
    @pytest.mark.parametrize("n_modes", [1, 2, 3])
    def test_vacuum_zero(self, n_modes):
        assert von_neumann_entropy(vacuum(n_modes)) == pytest.approx(0.0, abs=1e-12)

    def test_thermal_one_photon(self):
        assert von_neumann_entropy(thermal(1.0)) == pytest.approx(
            2.0 * math.log(2.0), abs=1e-12
        )

    def test_pure_tms_zero(self):
        assert von_neumann_entropy(ideal_tms(1.0)) == pytest.approx(0.0, abs=1e-10)


class TestSymplecticOperations:
    def test_identity_fixes_state(self, rng):
        V = random_physical_state(rng)
        out = apply_symplectic(V, identity_op(2))
        assert np.allclose(out.entries, V.entries, atol=0.0)

    def test_balanced_splitter_fixes_identical_thermals(self):
        V = tensor(thermal(0.7), thermal(0.7))
        out = apply_symplectic(V, beam_splitter(0.5, 0, 1, 2))
        assert np.allclose(out.entries, V.entries, atol=1e-14)

    def test_orthogonal_squeezers_plus_splitter_make_tms(self):
        r = 1.0
        steps = (
            single_mode_squeezer(r, 0, 2),
            single_mode_squeezer(-r, 1, 2),
            beam_splitter(0.5, 0, 1, 2),
        )
        V = vacuum(2)
        for s in steps:
            V = apply_symplectic(V, s)
        # matrix-algebra oracle, assembled independently
        sz = np.diag([1.0, -1.0])
        expected = np.zeros((4, 4))
        expected[0:2, 0:2] = math.cosh(2 * r) / 4.0 * np.eye(2)
        expected[2:4, 2:4] = math.cosh(2 * r) / 4.0 * np.eye(2)
        expected[0:2, 2:4] = math.sinh(2 * r) / 4.0 * sz
        expected[2:4, 0:2] = math.sinh(2 * r) / 4.0 * sz
        assert np.abs(V.entries - expected).max() < 1e-14
        assert np.abs(V.entries - ideal_tms(r).entries).max() < 1e-14

    def test_determinant_preserved(self, rng):
        for _ in range(30):
            V = random_physical_state(rng)
            op = beam_splitter(rng.uniform(0.05, 0.95), 0, 1, 2)
            out = apply_symplectic(V, op)
            assert np.linalg.det(out.entries) == pytest.approx(
                np.linalg.det(V.entries), rel=1e-10
            )

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            apply_symplectic(vacuum(3), identity_op(2))

    def test_non_symplectic_matrix_rejected(self):
        with pytest.raises(ValueError):
            SymplecticOperation(np.diag([2.0, 2.0, 1.0, 1.0]))

    def test_symplectic_form_preserved_by_factories(self):
        for op in (
            identity_op(3),
            beam_splitter(0.3, 0, 2, 3),
            single_mode_squeezer(0.9, 1, 3),
        ):
            omega = symplectic_form(3)
            assert np.abs(op.matrix @ omega @ op.matrix.T - omega).max() < 1e-12


class TestTensorAndPartialTrace:
    def test_vacuum_composition(self):
        assert np.allclose(tensor(vacuum(2), vacuum(2)).entries, vacuum(4).entries)

    def test_tms_pair_composition_is_block_diagonal(self):
        V = tensor(ideal_tms(0.8), ideal_tms(0.3))
        assert V.n_modes == 4
        assert np.allclose(V.entries[0:4, 0:4], ideal_tms(0.8).entries)
        assert np.allclose(V.entries[4:8, 4:8], ideal_tms(0.3).entries)
        assert np.all(V.entries[0:4, 4:8] == 0.0)

    def test_empty_is_identity_of_composition(self):
        V = ideal_tms(0.5)
        empty = CovarianceMatrix(np.zeros((0, 0)))
        assert np.allclose(tensor(V, empty).entries, V.entries)

    def test_tms_marginal_is_thermal(self):
        r = 0.9
        reduced = partial_trace(ideal_tms(r), keep=[0])
        assert np.allclose(reduced.entries, math.cosh(2 * r) / 4.0 * np.eye(2), atol=1e-14)

    def test_product_state_reduces_to_factor(self):
        V = tensor(thermal(0.4), ideal_tms(0.6))
        assert np.allclose(partial_trace(V, [0]).entries, thermal(0.4).entries)
        assert np.allclose(partial_trace(V, [1, 2]).entries, ideal_tms(0.6).entries)

    def test_vacuum_keep_middle_modes(self):
        assert np.allclose(partial_trace(vacuum(4), [2, 3]).entries, vacuum(2).entries)

    def test_bad_indices(self):
        with pytest.raises(BadIndexError):
            partial_trace(vacuum(2), [])
        with pytest.raises(BadIndexError):
            partial_trace(vacuum(2), [2])


class TestHomodyneConditioning:
    def test_uncorrelated_modes_unchanged(self):
        V = tensor(thermal(0.5), thermal(1.5))
        out = homodyne_condition(V, measured_mode=1, quadrature="q")
        assert np.allclose(out.entries, thermal(0.5).entries, atol=1e-14)

    def test_tms_conditional_variances(self):
        V = ideal_tms(1.0)
        out = homodyne_condition(V, measured_mode=1, quadrature="q")
        # Schur complement by hand: a_q - c^2 / b_q = 1 / (4 cosh 2r)
        assert out.entries[0, 0] == pytest.approx(0.06645055720851992, abs=1e-14)
        assert out.entries[1, 1] == pytest.approx(math.cosh(2.0) / 4.0, abs=1e-14)

    def test_matches_dense_pseudoinverse_oracle(self, rng):
        for _ in range(25):
            V = random_physical_state(rng, n_modes=3)
            for quad, off in (("q", 0), ("p", 1)):
                out = homodyne_condition(V, measured_mode=1, quadrature=quad)
                m = V.entries
                keep = [0, 1, 4, 5]
                meas = [2, 3]
                a = m[np.ix_(keep, keep)]
                c = m[np.ix_(keep, meas)]
                b = m[np.ix_(meas, meas)]
                pi = np.zeros((2, 2))
                pi[off, off] = 1.0
                expected = a - c @ np.linalg.pinv(pi @ b @ pi) @ c.T
                assert np.abs(out.entries - expected).max() < 1e-10

    def test_isotropic_block_closed_form(self, rng):
        # When the measured block is w * I, the general rule reduces to the
        # scalar prefactor 1 / (4 sqrt(det B / 16)) ... i.e. C C^T / B_qq.
        V = inject_noise_ideal(ideal_tms(0.8), 0.6)
        out = homodyne_condition(V, 1, "q")
        m = V.entries
        b = m[2:4, 2:4]
        assert abs(b[0, 0] - b[1, 1]) < 1e-14  # isotropic measured block
        c = m[np.ix_([0, 1], [2, 3])]
        pi_q = np.diag([1.0, 0.0])
        scalar = m[0:2, 0:2] - (c @ pi_q @ c.T) / math.sqrt(np.linalg.det(b))
        assert np.abs(out.entries - scalar).max() < 1e-10

    def test_conditioning_never_increases_variance(self, rng):
        for _ in range(25):
            V = random_physical_state(rng, n_modes=2)
            reduced = partial_trace(V, [0])
            out = homodyne_condition(V, 1, "q")
            assert out.entries[0, 0] <= reduced.entries[0, 0] + 1e-12
            assert out.entries[1, 1] <= reduced.entries[1, 1] + 1e-12

    def test_singular_measurement(self):
        m = np.zeros((4, 4))
        with pytest.raises(SingularMeasurementError):
            homodyne_condition(CovarianceMatrix(m), 1, "q")

    def test_bad_mode(self):
        with pytest.raises(BadIndexError):
            homodyne_condition(vacuum(2), 5, "q")


class TestSerialization:
    def test_json_roundtrip_exact(self, rng):
        V = random_physical_state(rng)
        back = covariance_from_json(covariance_to_json(V))
        assert back.n_modes == V.n_modes
        assert np.all(back.entries == V.entries)

    def test_csv_roundtrip_exact(self, rng):
        V = random_physical_state(rng, n_modes=3)
        back = covariance_from_csv(covariance_to_csv(V))
        assert np.all(back.entries == V.entries)

    def test_json_shape_check(self):
        with pytest.raises(DimensionMismatchError):
            covariance_from_json('{"n_modes": 2, "entries": [1, 2, 3]}')
