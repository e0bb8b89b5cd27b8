import json
import math

import numpy as np
import pytest
from scipy.optimize import minimize

from tmsflow.correlations import (
    correlation_report,
    discord,
    eof_from_gamma,
    eof_gamma,
    eof_lower_bound,
    gamma_ideal,
    mutual_information,
    report_to_csv_row,
    report_to_json,
)
from tmsflow.errors import DomainError
from tmsflow.states import StateModel, ideal_tms, inject_noise_ideal, thermal, vacuum
from tmsflow.symplectic import apply_symplectic, tensor

from conftest import random_local_op, random_physical_state

F_COSH2_QUARTER = 1.6198220928977022644
GAMMA_R1_N05 = 0.25953945472881448322  # log((e^2 + 1/2)/(1 + e^2/2)) / 2
EOF_R1_N05 = 0.25549921660354127964


def noisy_tms(r, n):
    return inject_noise_ideal(ideal_tms(r), n)


def discord_measurement_oracle(V, measured):
    """Gaussian discord by explicit minimization over pure single-mode
    measurement covariances M = R(t) diag(l, 1/l) R(t)^T / 4."""
    m = V.entries
    if measured == "B":
        a_blk, b_blk = m[0:2, 0:2], m[2:4, 2:4]
        c_blk = m[0:2, 2:4]
        lead_det = np.linalg.det(b_blk)
    else:
        a_blk, b_blk = m[2:4, 2:4], m[0:2, 0:2]
        c_blk = m[2:4, 0:2]
        lead_det = np.linalg.det(b_blk)

    def f(x):
        x = max(x, 0.25)
        return (2 * x + 0.5) * math.log(2 * x + 0.5) - (2 * x - 0.5) * math.log(
            max(2 * x - 0.5, 1e-300)
        )

    def cond_det(params):
        theta, log_l = params
        c, s = math.cos(theta), math.sin(theta)
        rot = np.array([[c, s], [-s, c]])
        meas = rot @ np.diag([math.exp(log_l), math.exp(-log_l)]) @ rot.T / 4.0
        cond = a_blk - c_blk @ np.linalg.inv(b_blk + meas) @ c_blk.T
        return float(np.linalg.det(cond))

    best = math.inf
    for theta0 in (0.0, 0.6, 1.2):
        for log_l0 in (-6.0, -2.0, 0.0, 2.0, 6.0):
            res = minimize(cond_det, x0=[theta0, log_l0], method="Nelder-Mead",
                           options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 2000})
            best = min(best, float(res.fun))
    # symplectic eigenvalues via the invariant closed form
    i1 = np.linalg.det(m[0:2, 0:2])
    i2 = np.linalg.det(m[2:4, 2:4])
    i3 = np.linalg.det(m[0:2, 2:4])
    i4 = np.linalg.det(m)
    delta = i1 + i2 + 2 * i3
    root = math.sqrt(max(delta * delta - 4 * i4, 0.0))
    nu_p = math.sqrt((delta + root) / 2)
    nu_m = math.sqrt(max((delta - root) / 2, 0.0))
    return f(math.sqrt(lead_det)) - f(nu_p) - f(nu_m) + f(math.sqrt(best))


class TestMutualInformation:
    def test_product_states_carry_none(self):
        assert mutual_information(vacuum(2)) == 0.0
        assert mutual_information(tensor(thermal(0.8), thermal(0.3))) == pytest.approx(
            0.0, abs=1e-12
        )

    def test_pure_tms_is_twice_marginal_entropy(self):
        assert mutual_information(ideal_tms(1.0)) == pytest.approx(
            2 * F_COSH2_QUARTER, abs=1e-7
        )


class TestGamma:
    def test_pure_tms(self):
        assert eof_gamma(ideal_tms(1.0)) == pytest.approx(1.0, abs=1e-12)

    def test_vacuum_sits_on_the_boundary(self):
        assert eof_gamma(vacuum(2)) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("r", [0.3, 0.9, 1.6])
    def test_one_noise_photon_disentangles(self, r):
        assert abs(eof_gamma(noisy_tms(r, 1.0))) < 1e-9

    def test_analytic_family_values(self):
        assert gamma_ideal(1.0, 0.0) == pytest.approx(1.0, abs=1e-15)
        assert gamma_ideal(0.63, 1.0) == 0.0
        assert gamma_ideal(1.0, 0.5) == pytest.approx(GAMMA_R1_N05, abs=1e-15)

    def test_equivalence_with_analytic_family(self):
        sup = 0.0
        for r in np.linspace(0.1, 2.0, 20):
            for n in np.linspace(0.0, 5.0, 20):
                sup = max(sup, abs(eof_gamma(noisy_tms(r, n)) - gamma_ideal(r, n)))
        assert sup < 1e-9

    def test_sign_negative_beyond_one_photon(self):
        assert gamma_ideal(0.8, 2.5) < 0.0
        assert eof_gamma(noisy_tms(0.8, 2.5)) == pytest.approx(
            gamma_ideal(0.8, 2.5), abs=1e-10
        )

    def test_local_symplectic_invariance(self, rng):
        for _ in range(50):
            V = noisy_tms(rng.uniform(0.2, 1.5), rng.uniform(0.0, 2.0))
            moved = apply_symplectic(V, random_local_op(rng))
            assert eof_gamma(moved) == pytest.approx(eof_gamma(V), abs=1e-9)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            gamma_ideal(-0.1, 0.0)
        with pytest.raises(DomainError):
            gamma_ideal(1.0, -0.1)


class TestEofLowerBound:
    def test_pure_tms_value(self):
        assert eof_lower_bound(ideal_tms(1.0)) == pytest.approx(F_COSH2_QUARTER, abs=1e-10)

    @pytest.mark.parametrize("r", [0.4, 0.9, 1.3])
    def test_zero_at_one_noise_photon(self, r):
        assert abs(eof_lower_bound(noisy_tms(r, 1.0))) < 1e-7

    def test_partially_decohered_value(self):
        assert eof_lower_bound(noisy_tms(1.0, 0.5)) == pytest.approx(EOF_R1_N05, abs=1e-10)

    @pytest.mark.parametrize("r", [0.35, 0.8, 1.2])
    def test_sign_change_exactly_at_one(self, r):
        lo, hi = 0.5, 1.5
        f = lambda n: eof_lower_bound(noisy_tms(r, n))
        assert f(lo) > 0 > f(hi)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if f(mid) > 0:
                lo = mid
            else:
                hi = mid
        assert 0.5 * (lo + hi) == pytest.approx(1.0, abs=1e-6)

    def test_signed_continuation(self):
        assert eof_lower_bound(noisy_tms(1.0, 3.0)) < 0.0
        assert eof_from_gamma(-0.3) == -eof_from_gamma(0.3)
        assert eof_from_gamma(0.0) == 0.0


class TestDiscord:
    def test_product_state_has_no_discord(self):
        assert discord(tensor(thermal(0.6), thermal(1.1)), "A") == 0.0
        assert discord(tensor(thermal(0.6), thermal(1.1)), "B") == 0.0

    @pytest.mark.parametrize("r", [0.25, 0.5, 1.0, 1.5])
    def test_pure_state_coincidence(self, r):
        V = ideal_tms(r)
        e_f = eof_lower_bound(V)
        assert abs(discord(V, "A") - e_f) < 1e-8
        assert abs(discord(V, "B") - e_f) < 1e-8

    def test_r1_spot_value(self):
        assert discord(ideal_tms(1.0), "B") == pytest.approx(F_COSH2_QUARTER, abs=1e-8)

    def test_heavy_noise_keeps_positive_discord(self):
        V = noisy_tms(1.0, 100.0)
        d_b = discord(V, "A")
        assert 0.0 < d_b < 0.05
        assert d_b == pytest.approx(discord_measurement_oracle(V, "A"), abs=1e-6)

    def test_closed_form_matches_measurement_oracle(self, rng):
        for _ in range(12):
            V = noisy_tms(rng.uniform(0.2, 1.2), rng.uniform(0.0, 3.0))
            for side in ("A", "B"):
                closed = discord(V, side)
                orac = discord_measurement_oracle(V, side)
                assert closed == pytest.approx(orac, abs=5e-7)

    def test_oracle_on_random_states(self, rng):
        for _ in range(8):
            V = random_physical_state(rng)
            for side in ("A", "B"):
                assert discord(V, side) == pytest.approx(
                    discord_measurement_oracle(V, side), abs=5e-7
                )

    def test_monotone_decay_and_robustness(self):
        r = 0.6908  # ~6 dB
        for side in ("A", "B"):
            values = [discord(noisy_tms(r, n), side) for n in np.logspace(-3, 3, 40)]
            assert all(v > 0.0 for v in values)
            assert all(a > b for a, b in zip(values, values[1:]))

    def test_heavy_noise_state_stays_sane(self):
        V = noisy_tms(1.0, 1000.0)
        assert eof_lower_bound(V) < 0.0
        i_ab = mutual_information(V)
        assert 0.0 < i_ab < 10.0

    def test_bounded_by_mutual_information(self, rng):
        for _ in range(1000):
            V = random_physical_state(rng)
            i_ab = mutual_information(V)
            assert -1e-12 <= discord(V, "A") <= i_ab + 1e-9
            assert -1e-12 <= discord(V, "B") <= i_ab + 1e-9

    def test_local_symplectic_invariance(self, rng):
        for _ in range(50):
            V = noisy_tms(rng.uniform(0.3, 1.4), rng.uniform(0.0, 2.0))
            moved = apply_symplectic(V, random_local_op(rng))
            assert discord(moved, "A") == pytest.approx(discord(V, "A"), abs=1e-9)
            assert discord(moved, "B") == pytest.approx(discord(V, "B"), abs=1e-9)

    def test_measured_argument_validated(self):
        with pytest.raises(DomainError):
            discord(vacuum(2), "C")


class TestCorrelationReport:
    def test_delta_identities(self, rng):
        for _ in range(20):
            V = random_physical_state(rng)
            rep = correlation_report(V)
            assert rep.delta_a == pytest.approx(rep.d_a - rep.e_f, abs=1e-12)
            assert rep.delta_b == pytest.approx(rep.d_b - rep.e_f, abs=1e-12)
            assert rep.delta_ab == pytest.approx(
                0.5 * (rep.d_a + rep.d_b) - rep.e_f, abs=1e-12
            )
            assert rep.i_ab >= rep.d_a - 1e-9
            assert rep.i_ab >= rep.d_b - 1e-9

    def test_pure_state_deltas_vanish(self):
        rep = correlation_report(ideal_tms(0.9))
        assert abs(rep.delta_a) < 1e-8
        assert abs(rep.delta_b) < 1e-8
        assert abs(rep.delta_ab) < 1e-8

    def test_at_sudden_death_delta_b_equals_discord(self):
        rep = correlation_report(noisy_tms(0.75, 1.0))
        assert rep.delta_b == pytest.approx(rep.d_b, abs=1e-7)

    def test_crossover_sign_structure(self):
        model = StateModel.ideal()
        rep_small = correlation_report(model.state(6.5, 0.05))
        rep_large = correlation_report(model.state(6.5, 0.3))
        assert rep_small.delta_b < 0.0 < rep_large.delta_b

    def test_csv_row_format(self):
        rep = correlation_report(ideal_tms(0.5))
        row = report_to_csv_row(rep, 4.34, 0.0)
        fields = row.split(",")
        assert len(fields) == 9
        assert float(fields[0]) == 4.34
        assert float(fields[2]) == pytest.approx(rep.d_a)

    def test_json_fields(self):
        rep = correlation_report(ideal_tms(0.5))
        doc = json.loads(report_to_json(rep, s_db=4.34, n=0.1))
        for key in ("d_a", "d_b", "e_f", "i_ab", "delta_a", "delta_b", "delta_ab", "gamma"):
            assert key in doc
        assert doc["s_db"] == 4.34
        assert doc["n"] == 0.1
