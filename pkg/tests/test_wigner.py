import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spincats.spin import Axis, KittenSpec, Spin, StateVector, dicke_state, kitten_state
from spincats.wigner import fringe_count, great_circle_values, multipoles, wigner_at, wigner_function

S10 = Spin.of(10)


def random_state(two_s, seed):
    rng = np.random.default_rng(seed)
    spin = Spin(two_s)
    return StateVector(spin, Axis.Z, rng.normal(size=spin.dim) + 1j * rng.normal(size=spin.dim)).normalized()


class TestMultipoles:
    @pytest.mark.parametrize("two_s", [1, 2, 5, 8])
    def test_parseval(self, two_s):
        # orthonormal T_kq give sum |rho_kq|^2 = Tr(rho^2) = 1
        rho_kq = multipoles(random_state(two_s, two_s))
        assert sum(abs(v) ** 2 for v in rho_kq.values()) == pytest.approx(1.0, abs=1e-12)

    def test_monopole(self):
        rho_kq = multipoles(random_state(6, 0))
        assert rho_kq[(0, 0)] == pytest.approx(1 / math.sqrt(7))

    def test_dipole_is_spin_vector(self):
        # rho_{1,0} = sqrt(3/((2S+1) S (S+1))) <S_z>
        state = dicke_state(Spin.of(3), 2, Axis.Z)
        assert multipoles(state)[(1, 0)].real == pytest.approx(math.sqrt(3 / (7 * 12)) * 2)


class TestGrid:
    @settings(max_examples=10, deadline=None)
    @given(two_s=st.integers(1, 12), seed=st.integers(0, 10_000))
    def test_normalization(self, two_s, seed):
        grid = wigner_function(random_state(two_s, seed))
        assert grid.normalization() == pytest.approx(1.0, abs=1e-6)

    def test_resolution_floor(self):
        with pytest.raises(ValueError):
            wigner_function(dicke_state(S10, 0, Axis.X), 16, 64)

    @pytest.mark.parametrize(
        "axis,theta,phi",
        [(Axis.Z, 0.0, None), (Axis.X, math.pi / 2, 0.0), (Axis.Y, math.pi / 2, math.pi / 2)],
    )
    def test_coherent_lobe(self, axis, theta, phi):
        state = dicke_state(S10, 10, axis)
        grid = wigner_function(state, 64, 128)
        t, p = grid.argmax()
        assert t == pytest.approx(theta, abs=0.05)
        if phi is not None:
            assert p == pytest.approx(phi, abs=0.05)
        assert wigner_at(state, theta, phi or 0.0) > 0

    def test_coherent_state_is_positive_near_lobe(self):
        state = dicke_state(S10, -10, Axis.Z)
        assert wigner_at(state, math.pi, 0.0) > 10
        assert abs(wigner_at(state, 0.0, 0.0)) < 1e-5 * wigner_at(state, math.pi, 0.0)

    def test_rows_cover_grid(self):
        grid = wigner_function(dicke_state(Spin.of(1), 0, Axis.Z))
        rows = list(grid.rows())
        assert len(rows) == grid.values.size
        assert rows[1][2] == grid.values[0, 1]


class TestKittenStructure:
    @pytest.mark.parametrize("m", [2, 9])
    @pytest.mark.parametrize("parity", ["plus", "minus"])
    def test_fringe_count(self, m, parity):
        assert fringe_count(kitten_state(KittenSpec(S10, m, parity))) == 2 * m

    @pytest.mark.parametrize("m", [1, 4, 7, 10])
    def test_fringe_count_other_m(self, m):
        assert fringe_count(kitten_state(KittenSpec(S10, m))) == 2 * m

    @pytest.mark.parametrize("m", [2, 9])
    def test_mirror_symmetry(self, m):
        state = kitten_state(KittenSpec(S10, m))
        theta = np.linspace(0.05, 3.1, 17)[:, None]
        phi = np.linspace(0, 2 * math.pi, 33)[None, :]
        np.testing.assert_allclose(wigner_at(state, theta, phi), wigner_at(state, theta, -phi), atol=1e-9)

    @pytest.mark.parametrize("sign", [1, -1])
    def test_lobes_ring_the_y_axis(self, sign):
        # each Dicke component is a ring around +-y, inside the semiclassical cone cos(alpha) = m / sqrt(S(S+1))
        state = kitten_state(KittenSpec(S10, 9))
        alpha = np.linspace(0, math.radians(60), 601)
        theta = math.pi / 2 - alpha
        w = wigner_at(state, theta, sign * math.pi / 2)
        assert w[0] < 0
        assert 0.25 < alpha[np.argmax(w)] < math.acos(9 / math.sqrt(110))

    def test_parities_differ_by_fringe_shift(self):
        plus = great_circle_values(kitten_state(KittenSpec(S10, 3, "plus")))
        minus = great_circle_values(kitten_state(KittenSpec(S10, 3, "minus")))
        assert np.corrcoef(plus, minus)[0, 1] < -0.9

    def test_dicke_state_has_no_fringes(self):
        assert fringe_count(dicke_state(S10, 4, Axis.Y)) == 0
