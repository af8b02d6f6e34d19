import math

import numpy as np
import pytest

from rissim import units
from rissim.channels import (
    Box,
    ChannelModel,
    LinkParams,
    draw_clusters,
    free_space_beta,
    los_matrix,
    lowrank_from_clusters,
    nearfield_from_clusters,
    nearfield_los,
    pathloss,
    sample_iid_rayleigh,
    sample_lowrank_geometric,
    sample_nearfield_geometric,
    sample_rician,
)
from rissim.geometry import Angle, ArrayGeometry, fraunhofer_distance, steering_vector

LAM = 0.06


class TestPathloss:
    def test_reference_distance(self):
        p = LinkParams(beta=1e-4, d0=1.0, eta=2.0)
        assert pathloss(p, 1.0) == pytest.approx(1e-4)

    def test_minus_46_db_at_10m(self):
        # -46 dB - 20*log10(10) = -66 dB
        p = LinkParams(beta=units.db_to_linear(-46.0), d0=1.0, eta=2.0)
        assert units.linear_to_db(pathloss(p, 10.0)) == pytest.approx(-66.0, abs=1e-9)

    def test_free_space_beta_at_5ghz(self):
        lam = units.SPEED_OF_LIGHT / 5e9
        assert units.linear_to_db(free_space_beta(lam)) == pytest.approx(-46.4, abs=0.05)

    def test_blockage_and_shadow_offsets(self):
        p = LinkParams(beta=1.0, blockage_db=-40.0, shadow_db=-3.0)
        assert units.linear_to_db(pathloss(p, 1.0)) == pytest.approx(-43.0)

    def test_nonpositive_distance_rejected(self):
        p = LinkParams(beta=1.0)
        with pytest.raises(ValueError):
            pathloss(p, 0.0)
        with pytest.raises(ValueError):
            pathloss(p, -3.0)

    def test_param_validation(self):
        with pytest.raises(ValueError):
            LinkParams(beta=0.0)
        with pytest.raises(ValueError):
            LinkParams(beta=1.0, k_factor=-1.0)


class TestIidRayleigh:
    def test_zero_power(self):
        rng = np.random.default_rng(0)
        np.testing.assert_array_equal(sample_iid_rayleigh(rng, 3, 4, 0.0).h, 0.0)

    def test_entry_power(self):
        rng = np.random.default_rng(1)
        h = sample_iid_rayleigh(rng, 320, 320, 2.0).h  # > 1e5 iid entries
        assert np.mean(np.abs(h) ** 2) == pytest.approx(2.0, rel=0.02)

    def test_entries_uncorrelated(self):
        rng = np.random.default_rng(2)
        n = 10**5
        samples = np.array([sample_iid_rayleigh(rng, 2, 1, 1.0).h.ravel() for _ in range(n)])
        cross = np.mean(samples[:, 0] * np.conj(samples[:, 1]))
        assert abs(cross) < 3.0 / math.sqrt(n)

    def test_reproducible(self):
        a = sample_iid_rayleigh(np.random.default_rng(42), 4, 4, 1.0).h
        b = sample_iid_rayleigh(np.random.default_rng(42), 4, 4, 1.0).h
        np.testing.assert_array_equal(a, b)


class TestLosMatrix:
    def test_scalar_case(self):
        tx = ArrayGeometry.single((0, 0, 0))
        rx = ArrayGeometry.single((10, 0, 0))
        h = los_matrix(tx, rx, Angle(0, 0), Angle(0, 0), 0.25, LAM)
        assert h.shape == (1, 1)
        assert h[0, 0] == pytest.approx(0.5)

    def test_rank_one(self):
        tx = ArrayGeometry.upa(4, 4, LAM / 2)
        rx = ArrayGeometry.upa(2, 3, LAM / 2)
        h = los_matrix(tx, rx, Angle(0.3, -0.5), Angle(-0.2, 0.9), 1.0, LAM)
        s = np.linalg.svd(h, compute_uv=False)
        assert s[1] < 1e-10

    def test_frobenius_norm(self):
        tx = ArrayGeometry.upa(4, 2, LAM / 2)
        rx = ArrayGeometry.upa(3, 3, LAM / 2)
        h_p = 0.3
        h = los_matrix(tx, rx, Angle(0.1, 0.2), Angle(0.3, 0.4), h_p, LAM)
        assert np.linalg.norm(h) ** 2 == pytest.approx(h_p * 9 * 8, rel=1e-12)


class TestRician:
    def setup_method(self):
        self.tx = ArrayGeometry.upa(2, 2, LAM / 2)
        self.rx = ArrayGeometry.upa(2, 1, LAM / 2)
        self.los = los_matrix(self.tx, self.rx, Angle(0.1, 0.2), Angle(0.0, -0.3), 1.0, LAM)
        self.nlos = lambda rng: sample_iid_rayleigh(rng, 2, 4, 1.0).h

    def test_k_zero_is_pure_nlos(self):
        h = sample_rician(np.random.default_rng(5), self.los, self.nlos, 0.0).h
        expected = self.nlos(np.random.default_rng(5))
        np.testing.assert_allclose(h, expected, atol=1e-15)

    def test_k_infinite_is_los(self):
        h = sample_rician(np.random.default_rng(6), self.los, self.nlos, 1e12).h
        assert np.abs(h - self.los).max() / np.abs(self.los).max() < 1e-5

    def test_k10_power_split(self):
        k = 10.0
        rng = np.random.default_rng(7)
        draws = 10**4
        total = 0.0
        for _ in range(draws):
            total += np.linalg.norm(sample_rician(rng, self.los, self.nlos, k).h) ** 2
        expected = (k / (1 + k)) * np.linalg.norm(self.los) ** 2 + (1 / (1 + k)) * 8.0
        assert total / draws == pytest.approx(expected, rel=0.03)

    def test_recovers_nlos_exactly(self):
        # sqrt(1+K)*H - sqrt(K)*los equals the nLOS draw it was built from
        k = 3.7
        h = sample_rician(np.random.default_rng(8), self.los, self.nlos, k).h
        nlos = self.nlos(np.random.default_rng(8))
        np.testing.assert_allclose(
            math.sqrt(1 + k) * h - math.sqrt(k) * self.los, nlos, atol=1e-12
        )

    def test_negative_k_rejected(self):
        with pytest.raises(ValueError):
            sample_rician(np.random.default_rng(9), self.los, self.nlos, -0.1)


VOLUME = Box(lo=(5.0, -10.0, -5.0), hi=(25.0, 10.0, 5.0))


def far_apart_geoms():
    tx = ArrayGeometry.upa_centered(2, 2, LAM / 2, (0.0, 0.0, 0.0))
    rx = ArrayGeometry.upa_centered(2, 1, LAM / 2, (30.0, 0.0, 0.0))
    return tx, rx


class TestClusters:
    def test_empty_volume_rejected(self):
        with pytest.raises(ValueError):
            Box(lo=(0, 0, 0), hi=(1, 0, 1))

    def test_draw_invariants(self):
        rng = np.random.default_rng(10)
        cs = draw_clusters(rng, VOLUME, 5, 20, h_p=2.0)
        assert cs.n_clusters == 5 and cs.n_subpaths == 20
        for c in cs.clusters:
            assert VOLUME.contains(c.centroid)
            assert np.all(np.abs(c.subpath_positions - c.centroid) <= 1.0 + 1e-12)
            assert np.all((c.subpath_phases >= 0) & (c.subpath_phases < 2 * math.pi))

    def test_gain_moments(self):
        rng = np.random.default_rng(11)
        gains = np.concatenate(
            [draw_clusters(rng, VOLUME, 50, 1, h_p=3.0).gains() for _ in range(200)]
        )
        assert gains.mean() == pytest.approx(0.0, abs=3 * math.sqrt(3.0 / gains.size))
        assert np.mean(gains**2) == pytest.approx(3.0, rel=0.05)

    def test_rademacher_gains(self):
        rng = np.random.default_rng(12)
        cs = draw_clusters(rng, VOLUME, 10, 1, h_p=4.0, gain_distribution="rademacher")
        np.testing.assert_allclose(np.abs(cs.gains()), 2.0)

    def test_unknown_gain_distribution(self):
        with pytest.raises(ValueError):
            draw_clusters(np.random.default_rng(0), VOLUME, 1, 1, 1.0, "cauchy")


class TestLowRankGeometric:
    def test_single_path_rank_one(self):
        tx, rx = far_apart_geoms()
        h = sample_lowrank_geometric(
            np.random.default_rng(13), tx, rx, VOLUME, 1.0, LAM, 1, 1
        ).h
        s = np.linalg.svd(h, compute_uv=False)
        assert s[0] > 0 and (s[1:] < 1e-12 * s[0]).all()

    def test_rank_bound(self):
        tx = ArrayGeometry.upa_centered(4, 4, LAM / 2, (0.0, 0.0, 0.0))
        rx = ArrayGeometry.upa_centered(4, 4, LAM / 2, (30.0, 0.0, 0.0))
        h = sample_lowrank_geometric(
            np.random.default_rng(14), tx, rx, VOLUME, 1.0, LAM, 2, 3
        ).h
        s = np.linalg.svd(h, compute_uv=False)
        assert (s[6:] < 1e-10 * s[0]).all()

    def test_default_scale_spectrum_cluster_dominated(self):
        # 5 clusters x 20 sub-paths: sub-paths of one cluster are nearly
        # collinear in angle, so the top 5 singular values carry the energy
        tx = ArrayGeometry.upa_centered(4, 4, LAM / 2, (30.0, 0.0, 10.0))
        rx = ArrayGeometry.upa_centered(8, 8, LAM / 2, (0.0, 50.0, 5.0))
        vol = Box(lo=(0.0, 0.0, 0.0), hi=(40.0, 50.0, 10.0))
        h = sample_lowrank_geometric(
            np.random.default_rng(21), tx, rx, vol, 1.0, LAM, 5, 20
        ).h
        s = np.linalg.svd(h, compute_uv=False)
        assert s.size == 16  # rank bounded by min(L*R, N_rx, N_tx)
        assert (s[:5] ** 2).sum() / (s**2).sum() > 0.95

    def test_power_normalization(self):
        tx, rx = far_apart_geoms()
        rng = np.random.default_rng(15)
        h_p = 0.5
        total = 0.0
        draws = 10**4
        for _ in range(draws):
            total += (
                np.linalg.norm(
                    sample_lowrank_geometric(rng, tx, rx, VOLUME, h_p, LAM, 5, 20).h
                )
                ** 2
            )
        assert total / draws == pytest.approx(h_p * tx.size * rx.size, rel=0.05)

    def test_model_tag(self):
        tx, rx = far_apart_geoms()
        cm = sample_lowrank_geometric(np.random.default_rng(16), tx, rx, VOLUME, 1.0, LAM, 1, 1)
        assert cm.model is ChannelModel.LOWRANK_GEOMETRIC


class TestNearFieldGeometric:
    def test_single_everything_magnitude(self):
        tx = ArrayGeometry.single((0.0, 0.0, 0.0))
        rx = ArrayGeometry.single((30.0, 0.0, 0.0))
        h = sample_nearfield_geometric(
            np.random.default_rng(17), tx, rx, VOLUME, 0.81, LAM, 1, 1
        ).h
        assert abs(h[0, 0]) == pytest.approx(0.9, rel=1e-12)

    def test_far_field_limit_matches_planar_model(self):
        # scatterers and both ends beyond 1e4 x the Fraunhofer distance
        tx = ArrayGeometry.upa_centered(2, 2, LAM / 2, (0.0, 0.0, 0.0))
        rx = ArrayGeometry.upa_centered(2, 2, LAM / 2, (600.0, 50.0, 0.0))
        assert 600.0 > 1e4 * fraunhofer_distance(tx.aperture, LAM)
        far_volume = Box(lo=(500.0, -400.0, -100.0), hi=(900.0, 400.0, 100.0))
        cs = draw_clusters(np.random.default_rng(18), far_volume, 3, 5, h_p=1.0)
        for c in cs.clusters:
            c.gain = 1.0  # align amplitudes: the spherical model uses sqrt(h_p)
        h_far = lowrank_from_clusters(cs, tx, rx, LAM)
        h_near = nearfield_from_clusters(cs, tx, rx, LAM)
        assert np.abs(np.angle(h_near / h_far)).max() < 1e-2

    def test_near_field_deviation_from_planar(self):
        # 32x32 half-wavelength surface at 5 GHz observed from 10 m
        lam = units.SPEED_OF_LIGHT / 5e9
        ris = ArrayGeometry.upa_centered(32, 32, lam / 2, (0.0, 0.0, 0.0))
        source = np.array([10.0, 0.0, 0.0])
        assert fraunhofer_distance(ris.aperture, lam) > 10.0
        exact = nearfield_los(ArrayGeometry.single(source), ris, 1.0, lam)[:, 0]
        planar = steering_vector(ris, ris.arrival_angle(source), lam)
        dev = np.angle(exact / planar)
        dev = np.angle(np.exp(1j * (dev - dev[0])))  # common phase is irrelevant
        assert np.abs(dev).max() > math.pi / 8

    def test_power_normalization(self):
        tx, rx = far_apart_geoms()
        rng = np.random.default_rng(19)
        h_p = 2.0
        draws = 4000
        total = 0.0
        for _ in range(draws):
            total += (
                np.linalg.norm(
                    sample_nearfield_geometric(rng, tx, rx, VOLUME, h_p, LAM, 5, 20).h
                )
                ** 2
            )
        assert total / draws == pytest.approx(h_p * tx.size * rx.size, rel=0.05)

    def test_nearfield_los_frobenius(self):
        tx = ArrayGeometry.upa_centered(2, 2, LAM / 2, (0.0, 0.0, 0.0))
        rx = ArrayGeometry.upa_centered(3, 1, LAM / 2, (5.0, 1.0, 0.0))
        h = nearfield_los(tx, rx, 0.7, LAM)
        assert np.linalg.norm(h) ** 2 == pytest.approx(0.7 * 12, rel=1e-12)

    def test_reproducible(self):
        tx, rx = far_apart_geoms()
        a = sample_nearfield_geometric(np.random.default_rng(20), tx, rx, VOLUME, 1.0, LAM, 2, 3).h
        b = sample_nearfield_geometric(np.random.default_rng(20), tx, rx, VOLUME, 1.0, LAM, 2, 3).h
        np.testing.assert_array_equal(a, b)
