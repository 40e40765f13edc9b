import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from spinclock import latticemc as mc
from spinclock.thermo import heat_capacity

J_K = -0.0504  # -0.035 cm^-1


def pair(J=J_K, m=1.5):
    return mc.IsingLattice((2, 1, 1), ((1, 0, 0),), J, m)


class TestLattice:
    def test_presets(self):
        for name in ("fcc12", "bipartite12"):
            assert len(mc.PRESETS[name]) == 12
        # every bipartite offset joins opposite parity classes
        assert all(sum(o) % 2 == 1 for o in mc.PRESETS["bipartite12"])
        assert all(sum(o) % 2 == 0 for o in mc.PRESETS["fcc12"])

    def test_rejects_open_offsets(self):
        with pytest.raises(ValueError, match="negation"):
            mc.IsingLattice((4, 4, 4), ((1, 0, 0),), 1.0)

    @pytest.mark.parametrize("off", [(0, 0, 0), (4, 0, 0)])
    def test_rejects_self_offsets(self, off):
        neg = tuple(-x for x in off)
        with pytest.raises(ValueError, match="onto itself"):
            mc.IsingLattice((4, 4, 4), (off, neg), 1.0)

    def test_neighbor_table_symmetric(self):
        lat = mc.IsingLattice.preset("bipartite12", 6, 1.0)
        nbr = lat.neighbor_table()
        for i in range(lat.n_sites):
            for j in nbr[i]:
                assert i in nbr[j]


class TestEnergy:
    @given(st.floats(-1, 1), st.integers(2, 5))
    def test_uniform_configuration(self, J, L):
        lat = mc.IsingLattice.preset("fcc12", L if L % 2 == 0 else L + 1, J, 1.5)
        assert mc.mc_energy(lat) == pytest.approx(-(J * 2.25 / 2) * 12 * lat.n_sites, rel=1e-12, abs=1e-12)

    def test_zero_coupling(self):
        lat = mc.IsingLattice.preset("bipartite12", 4, 0.0).randomize(3)
        assert mc.mc_energy(lat) == 0.0

    def test_two_site_values(self):
        lat = pair()
        assert mc.mc_energy(lat) == pytest.approx(0.1134, abs=1e-12)
        lat.spins[1] = -1
        assert mc.mc_energy(lat) == pytest.approx(-0.1134, abs=1e-12)


class TestMetropolis:
    def test_zero_coupling_no_heat_capacity(self):
        lat = mc.IsingLattice.preset("cubic6", 4, 0.0)
        r = mc.metropolis_run(lat, [0.1, 0.5], 600, 100, seed=1)
        np.testing.assert_array_equal(r.c, 0.0)

    def test_two_spin_enumeration(self):
        lat = pair()
        K = lat.coupling
        T = np.array([0.06, 0.11, 0.2, 0.4])
        r = mc.metropolis_run(lat, T, 40000, 2000, seed=5)
        exact = heat_capacity(np.array([-K, -K, K, K]) * -1, T) / 2  # levels -K s1 s2
        for c, e, err in zip(r.c, exact, r.err_c):
            assert abs(c - e) <= 3 * err + 1e-3

    def test_detailed_balance(self):
        lat = pair(J=-1.0, m=1.0)
        T = 1.3
        codes = mc.single_flip_trace(lat, T, 100_000, seed=11)[::10]
        counts = np.bincount(codes, minlength=4)
        # code bits: spin0 -> 1, spin1 -> 2; aligned states 0 and 3 cost +|J|
        E = np.array([1.0, -1.0, -1.0, 1.0])
        p = np.exp(-E / T)
        p /= p.sum()
        _, pval = stats.chisquare(counts, p * counts.sum())
        assert pval > 0.01

    def test_energy_bookkeeping(self):
        lat = mc.IsingLattice.preset("fcc12", 6, J_K)
        r = mc.metropolis_run(lat, [0.15, 0.3], 3000, 500, seed=2, check_every=1000)
        assert r.energy_drift < 1e-9

    def test_seeded_determinism(self):
        T = [0.2, 0.5]
        a = mc.metropolis_run(mc.IsingLattice.preset("cubic6", 4, J_K), T, 800, 200, seed=9)
        b = mc.metropolis_run(mc.IsingLattice.preset("cubic6", 4, J_K), T, 800, 200, seed=9)
        for k, v in a.columns().items():
            np.testing.assert_array_equal(v, b.columns()[k])
        c = mc.metropolis_run(mc.IsingLattice.preset("cubic6", 4, J_K), T, 800, 200, seed=10)
        assert not np.array_equal(a.E, c.E)

    def test_antiferromagnetic_ground_state(self):
        lat = mc.IsingLattice.preset("bipartite12", 6, J_K)
        r = mc.metropolis_run(lat, np.linspace(0.05, 2.0, 12), 1500, 500, seed=4)
        assert r.m_stag[0] >= 0.98

    def test_sublattice_gauge(self):
        # on a bipartite lattice J -> -J with s -> parity * s maps every move onto itself
        af = mc.IsingLattice.preset("cubic6", 6, -1.0, 1.0).randomize(8)
        fm = mc.IsingLattice.preset("cubic6", 6, 1.0, 1.0)
        fm.spins = af.spins * af.parity()
        T = np.linspace(3.5, 5.5, 9)
        ra = mc.metropolis_run(af, T, 1500, 300, seed=21, init="given")
        rf = mc.metropolis_run(fm, T, 1500, 300, seed=21, init="given")
        np.testing.assert_allclose(ra.E, rf.E, rtol=0, atol=1e-9)
        np.testing.assert_allclose(ra.m_stag, rf.m_uniform, atol=1e-12)
        assert mc.estimate_tn(ra).tn_peak == pytest.approx(mc.estimate_tn(rf).tn_peak, abs=1e-9)

    def test_validation(self):
        with pytest.raises(ValueError):
            mc.metropolis_run(pair(), [0.1], 100, 100)
        with pytest.raises(ValueError):
            mc.metropolis_run(pair(), [0.0], 200, 100)


class TestEstimateTn:
    def test_lorentzian(self):
        T = np.linspace(0.1, 0.4, 31)
        c = 1 / (1 + ((T - 0.22) / 0.03) ** 2)
        est = mc.estimate_tn((T, c))
        assert est.tn_peak == pytest.approx(0.22, abs=0.01)
        assert not est.inconclusive

    def test_edge_peak_inconclusive(self):
        T = np.linspace(0.1, 0.4, 31)
        assert mc.estimate_tn((T, np.exp(-T))).inconclusive

    def test_binder_crossing(self):
        T = np.linspace(1.0, 2.0, 11)
        mk = lambda L, b: mc.McResult(T, T, T, T, T, T, b, 10, 1, 0, (L, L, L))
        small = mk(4, 0.66 - 0.2 * (T - 1.5))
        large = mk(8, 0.66 - 0.4 * (T - 1.5))
        est = mc.estimate_tn([small, large])
        assert est.tn_binder == pytest.approx(1.5, abs=1e-9)
