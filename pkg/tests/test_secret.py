import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import permutation_kitten, post_selected_werner_weight
from spincats.secret import (
    AttackParams,
    NoisyKitten,
    critical_ratio_scan,
    eavesdrop_state,
    p_crit_ghz,
    p_crit_kitten,
    parity_expectation,
    parity_expectation_brute_force,
    parity_expectation_collective,
    qubit_kitten,
    qubit_kitten_y,
    qubit_sign,
    reduced_two_party_weight,
    simulate_reconstruction,
    spec_from_qubit_sign,
    violates_local_realism,
    xi_states,
)
from spincats.spin import KittenSpec, Parity, Spin, kitten_state


def cases(max_s):
    for S in range(1, max_s + 1):
        yield S, 0, 1
        for m in range(1, S + 1):
            yield S, m, 1
            yield S, m, -1


class TestQubitForm:
    @pytest.mark.parametrize("S,m,sign", list(cases(4)))
    def test_matches_explicit_kron(self, S, m, sign):
        ours = qubit_kitten(spec_from_qubit_sign(S, m, sign))
        assert abs(np.vdot(permutation_kitten(S, m, sign), ours)) == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("S,m,sign", list(cases(6)))
    def test_symmetric_subspace_matches_collective(self, S, m, sign):
        # map the collective y-basis state into qubits by the symmetric embedding
        spec = spec_from_qubit_sign(S, m, sign)
        collective = kitten_state(spec).amplitudes
        psi_y = qubit_kitten_y(spec)
        n = 2 * S
        ones = np.array([bin(i).count("1") for i in range(2**n)])
        embedded = np.zeros(2**n, dtype=complex)
        for k in range(n + 1):
            # |S, k-S>_y is i^(S-(k-S)) times the normalized sum of strings with k ones
            embedded[ones == k] = collective[k] * 1j ** (2 * S - k) / math.sqrt(math.comb(n, k))
        assert abs(np.vdot(embedded, psi_y)) == pytest.approx(1.0, abs=1e-10)

    def test_sign_mapping(self):
        spec = KittenSpec(Spin.of(3), 2, Parity.PLUS)
        assert qubit_sign(spec) == -1
        assert spec_from_qubit_sign(3, 2, -1) == spec

    def test_m0_minus_rejected(self):
        with pytest.raises(ValueError):
            spec_from_qubit_sign(2, 0, -1)

    def test_cap(self):
        with pytest.raises(ValueError):
            qubit_kitten(KittenSpec(Spin.of(13), 3))


class TestParity:
    @pytest.mark.parametrize("S,m,sign", list(cases(5)))
    def test_z_parity_is_sign(self, S, m, sign):
        assert parity_expectation_brute_force(spec_from_qubit_sign(S, m, sign), "z") == pytest.approx(sign, abs=1e-12)

    @pytest.mark.parametrize("S,m,sign", list(cases(5)))
    def test_x_parity(self, S, m, sign):
        assert parity_expectation_brute_force(spec_from_qubit_sign(S, m, sign), "x") == pytest.approx(
            sign * (-1) ** m, abs=1e-12
        )

    def test_documented_example(self):
        assert parity_expectation(spec_from_qubit_sign(2, 1, 1), "x") == pytest.approx(-1.0)

    @pytest.mark.parametrize("S,m,sign", list(cases(5)))
    @pytest.mark.parametrize("axis", ["z", "x"])
    def test_two_evaluations_agree(self, S, m, sign, axis):
        spec = spec_from_qubit_sign(S, m, sign)
        assert parity_expectation_collective(spec, axis) == pytest.approx(
            parity_expectation_brute_force(spec, axis), abs=1e-10
        )

    @pytest.mark.parametrize("S", [20, 50])
    def test_collective_beyond_cap(self, S):
        spec = spec_from_qubit_sign(S, 7, -1)
        assert parity_expectation(spec, "z") == pytest.approx(-1.0, abs=1e-9)
        assert parity_expectation(spec, "x") == pytest.approx(1.0, abs=1e-9)

    def test_y_axis_rejected(self):
        with pytest.raises(ValueError):
            parity_expectation(spec_from_qubit_sign(2, 1, 1), "y")


class TestReconstruction:
    @pytest.mark.parametrize("S,m,sign", list(cases(3)))
    @pytest.mark.parametrize("axis", ["z", "x"])
    def test_round_trip(self, S, m, sign, axis):
        result = simulate_reconstruction(spec_from_qubit_sign(S, m, sign), axis, 100, rng=S * 100 + m)
        assert result.all_succeeded
        assert set(np.unique(result.records)) <= {-1, 1}

    def test_wrong_parity_always_fails(self):
        result = simulate_reconstruction(spec_from_qubit_sign(2, 1, 1), "z", 50, rng=0, parity=-1)
        assert result.successes == 0

    def test_alice_alone_is_unbiased(self):
        result = simulate_reconstruction(spec_from_qubit_sign(3, 1, 1), "z", 4000, rng=1)
        assert abs(result.records[:, 0].mean()) < 4 / math.sqrt(4000)

    def test_deterministic(self):
        spec = spec_from_qubit_sign(2, 2, -1)
        a = simulate_reconstruction(spec, "x", 20, rng=5)
        b = simulate_reconstruction(spec, "x", 20, rng=5)
        np.testing.assert_array_equal(a.records, b.records)


class TestEavesdrop:
    @pytest.mark.parametrize("S,m,sign", list(cases(4)))
    def test_xi_from_projection(self, S, m, sign):
        spec = spec_from_qubit_sign(S, m, sign)
        xi, xi_bar = xi_states(spec)
        rows = qubit_kitten_y(spec).reshape(2, -1)
        np.testing.assert_allclose(xi, math.sqrt(2) * rows[0], atol=1e-14)
        np.testing.assert_allclose(xi_bar, math.sqrt(2) * rows[1], atol=1e-14)
        assert np.linalg.norm(xi) == pytest.approx(1.0)
        assert np.linalg.norm(xi_bar) == pytest.approx(1.0)
        assert abs(np.dot(xi, xi_bar)) < 1e-14

    @pytest.mark.parametrize("phi", np.linspace(0, math.pi / 2, 100, endpoint=False))
    def test_unit_norm(self, phi):
        assert eavesdrop_state(spec_from_qubit_sign(3, 1, -1), AttackParams(phi)).norm == pytest.approx(1.0, abs=1e-12)

    def test_identity_attack(self):
        spec = spec_from_qubit_sign(2, 1, 1)
        state = eavesdrop_state(spec, AttackParams(0.0))
        np.testing.assert_allclose(state.amplitudes[:, :, 1], 0)
        np.testing.assert_allclose(state.amplitudes[:, :, 0].ravel(), qubit_kitten_y(spec), atol=1e-15)

    @settings(max_examples=40)
    @given(phi=st.floats(0, math.pi / 2, exclude_max=True))
    def test_branch_weights(self, phi):
        w = eavesdrop_state(spec_from_qubit_sign(3, 2, 1), AttackParams(phi)).branch_weights()
        assert w["alice0_xi_evan0"] == pytest.approx(0.5)
        assert w["alice1_xibar_evan0"] == pytest.approx(math.cos(phi) ** 2 / 2)
        assert w["alice1_xi_evan1"] == pytest.approx(math.sin(phi) ** 2 / 2)
        assert sum(w.values()) == pytest.approx(1.0)

    def test_strong_attack_limit(self):
        w = eavesdrop_state(spec_from_qubit_sign(2, 1, 1), AttackParams(math.pi / 2 - 1e-9)).branch_weights()
        assert w["alice1_xi_evan1"] == pytest.approx(0.5, abs=1e-12)

    def test_security_boundary(self):
        spec = spec_from_qubit_sign(2, 1, 1)
        assert eavesdrop_state(spec, AttackParams(math.pi / 4 - 1e-6)).secure
        assert not eavesdrop_state(spec, AttackParams(math.pi / 4 + 1e-6)).secure

    @pytest.mark.parametrize("phi", [-0.1, math.pi / 2, 2.0])
    def test_attack_range(self, phi):
        with pytest.raises(ValueError):
            AttackParams(phi)


class TestThresholds:
    def test_bell_coincidence(self):
        assert p_crit_kitten(1, 1) == p_crit_ghz(1) == 2**-0.5

    def test_ghz_values(self):
        assert p_crit_ghz(10) == pytest.approx(2**-9.5, rel=1e-15)
        assert p_crit_ghz(0.5) == 1.0
        assert p_crit_ghz(500) < 1e-150

    @pytest.mark.parametrize("S", [2, 5, 10, 40, 200])
    def test_more_robust_at_larger_m(self, S):
        values = [p_crit_kitten(S, m) for m in range(S + 1)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_binomial_spread(self):
        assert math.comb(20, 10) == pytest.approx(1.8e5, rel=0.03)

    @pytest.mark.parametrize("S,m", [(1, 1), (3, 1), (10, 0), (10, 10), (40, 17), (300, 100)])
    def test_threshold_gives_local_realism_edge(self, S, m):
        noisy = NoisyKitten(KittenSpec(Spin.of(S), m), p_crit_kitten(S, m))
        assert reduced_two_party_weight(noisy) == pytest.approx(1 / math.sqrt(2), abs=1e-12)

    @settings(max_examples=60)
    @given(S=st.integers(1, 60), data=st.data())
    def test_violation_iff_above_threshold(self, S, data):
        m = data.draw(st.integers(0, S))
        p = data.draw(st.floats(0, 1))
        pc = p_crit_kitten(S, m)
        if abs(p - pc) > 1e-9:
            assert violates_local_realism(NoisyKitten(KittenSpec(Spin.of(S), m), p)) == (p > pc)

    @pytest.mark.parametrize("p,expected", [(0.0, 0.0), (1.0, 1.0)])
    def test_weight_endpoints(self, p, expected):
        assert reduced_two_party_weight(NoisyKitten(KittenSpec(Spin.of(4), 2), p)) == expected

    @pytest.mark.parametrize("S,m", [(2, 1), (3, 1), (3, 2), (4, 3)])
    @pytest.mark.parametrize("sign", [1, -1])
    @pytest.mark.parametrize("p", [0.1, 0.5, 0.9])
    def test_weight_matches_post_selection(self, S, m, sign, p):
        w, residual = post_selected_werner_weight(S, m, sign, p)
        assert residual < 1e-12
        spec = spec_from_qubit_sign(S, m, sign)
        assert reduced_two_party_weight(NoisyKitten(spec, p)) == pytest.approx(w, abs=1e-12)

    def test_noisy_range(self):
        with pytest.raises(ValueError):
            NoisyKitten(KittenSpec(Spin.of(2), 1), 1.5)


class TestCriticalRatio:
    def test_scan_converges(self):
        rows = critical_ratio_scan(range(1, 41))
        assert 0.20 <= rows[-1].ratio <= 0.24
        assert all(0.20 <= r.ratio_continuous <= 0.24 for r in rows[19:])
        assert rows[-1].ratio_per_qubit == pytest.approx(rows[-1].ratio / 2)

    def test_crossing_is_a_clean_split(self):
        for row in critical_ratio_scan(range(3, 41)):
            ghz = p_crit_ghz(row.S)
            assert p_crit_kitten(row.S, row.m) < ghz
            assert row.m == 0 or p_crit_kitten(row.S, row.m - 1) >= ghz

    def test_small_spins(self):
        rows = {r.S: r for r in critical_ratio_scan([1, 2])}
        assert rows[1].m is None and rows[2].m is None
        assert rows[1].ratio_continuous == pytest.approx(0.0, abs=1e-9)

    def test_large_spin_limit(self):
        (row,) = critical_ratio_scan([5000])
        assert row.ratio == pytest.approx(0.22, abs=0.005)
        assert row.ratio_continuous == pytest.approx(row.ratio, abs=1e-3)
