"""Geometry placement, pathloss, path derivation, channel realizations."""

import dataclasses
import math

import numpy as np
import pytest

from oobeam.channel import (
    channel_matrix,
    derive_path_set,
    pathloss_db,
    place_scenario,
    realize_channel,
    realize_multiband,
)
from oobeam.config import BandParams, PathlossParams, ScenarioConfig

# the classic 28 GHz urban fit: LOS well above NLOS at equal path length
CLASSIC_LOS = PathlossParams(61.4, 20.0, 5.8)
CLASSIC_NLOS = PathlossParams(72.0, 29.2, 8.7)


def make_config(**overrides):
    return dataclasses.replace(ScenarioConfig(), **overrides)


class TestPathloss:
    def test_unit_distance_returns_intercept(self):
        assert pathloss_db(1.0, PathlossParams(61.4, 20.0, 0.0)) == pytest.approx(61.4)

    def test_one_decade_adds_slope(self):
        assert pathloss_db(10.0, PathlossParams(61.4, 20.0, 0.0)) == pytest.approx(81.4)

    def test_two_decades(self):
        assert pathloss_db(100.0, PathlossParams(72.0, 29.2, 0.0)) == pytest.approx(130.4)

    def test_shadow_term_adds(self):
        base = pathloss_db(37.0, CLASSIC_LOS)
        assert pathloss_db(37.0, CLASSIC_LOS, shadow_db=3.5) == pytest.approx(base + 3.5)

    def test_nonpositive_distance_rejected(self):
        with pytest.raises(ValueError):
            pathloss_db(0.0, CLASSIC_LOS)


class TestPlaceScenario:
    def test_degenerate_single_ue_no_scatterers(self):
        cfg = make_config(num_ues=1, num_clusters=1, p_los=1.0)
        geo = place_scenario(cfg, np.random.default_rng(0))
        assert geo.scatterer_positions.shape == (0, 2)
        assert geo.ue_has_los.all()
        ps = derive_path_set(geo, "mmwave", cfg)
        assert ps.active.shape == (1, 1)
        assert ps.active.all()

    def test_two_ue_three_cluster_shapes(self):
        cfg = make_config(num_ues=2, num_clusters=3, disk_radius_m=11.0)
        geo = place_scenario(cfg, np.random.default_rng(1))
        assert geo.ue_positions.shape == (2, 2)
        assert geo.scatterer_positions.shape == (2, 2)
        assert len(geo.scatterer_visibility) == 2
        assert geo.angle_jitter.shape == (2, 3, cfg.paths_per_cluster, 2)

    def test_ues_inside_disk(self):
        cfg = make_config(num_ues=50, disk_radius_m=7.0)
        for seed in range(5):
            geo = place_scenario(cfg, np.random.default_rng(seed))
            center = np.array([0.0, cfg.bs_disk_distance_m])
            dist = np.linalg.norm(geo.ue_positions - center, axis=1)
            assert (dist <= cfg.disk_radius_m + 1e-9).all()

    def test_scatterers_inside_annulus(self):
        cfg = make_config(num_clusters=20)
        geo = place_scenario(cfg, np.random.default_rng(3))
        center = np.array([0.0, cfg.bs_disk_distance_m])
        dist = np.linalg.norm(geo.scatterer_positions - center, axis=1)
        assert (dist >= cfg.disk_radius_m - 1e-9).all()
        assert (dist <= 3.0 * cfg.disk_radius_m + 1e-9).all()

    def test_zero_mismatch_probability(self):
        cfg = make_config(p_mis=0.0)
        geo = place_scenario(cfg, np.random.default_rng(4))
        assert all(v == "both" for v in geo.scatterer_visibility)

    def test_mismatch_fraction_close_to_probability(self):
        cfg = make_config(p_mis=0.1, num_clusters=11)
        count = total = 0
        for seed in range(400):
            geo = place_scenario(cfg, np.random.default_rng(seed))
            count += sum(1 for v in geo.scatterer_visibility if v != "both")
            total += len(geo.scatterer_visibility)
        assert count / total == pytest.approx(0.1, abs=0.02)

    def test_determinism(self):
        cfg = make_config()
        a = place_scenario(cfg, np.random.default_rng(99))
        b = place_scenario(cfg, np.random.default_rng(99))
        np.testing.assert_array_equal(a.ue_positions, b.ue_positions)
        np.testing.assert_array_equal(a.scatterer_positions, b.scatterer_positions)
        np.testing.assert_array_equal(a.angle_jitter, b.angle_jitter)
        np.testing.assert_array_equal(a.shadow_units, b.shadow_units)
        assert a.scatterer_visibility == b.scatterer_visibility


class TestDerivePathSet:
    def test_broadside_los_geometry(self):
        # single UE straight ahead of the BS: arrival and departure both sit
        # on the segment, and zero angular spread collapses all paths
        band = BandParams(28.0, 0.0, CLASSIC_LOS, CLASSIC_NLOS)
        cfg = make_config(num_ues=1, num_clusters=1, mmwave=band, p_los=1.0,
                          disk_radius_m=0.001)
        geo = place_scenario(cfg, np.random.default_rng(0))
        ps = derive_path_set(geo, "mmwave", cfg)
        assert np.allclose(ps.aoa[0, 0], math.pi / 2, atol=1e-3)
        assert np.allclose(ps.aod[0, 0], math.pi / 2, atol=1e-3)
        assert np.ptp(ps.aoa[0, 0]) == 0.0

    def test_shared_scatterer_gives_equal_bs_arrival(self):
        band = BandParams(28.0, 0.0, CLASSIC_LOS, CLASSIC_NLOS)
        cfg = make_config(num_ues=4, num_clusters=3, mmwave=band)
        geo = place_scenario(cfg, np.random.default_rng(7))
        ps = derive_path_set(geo, "mmwave", cfg)
        for c in (1, 2):
            assert np.ptp(ps.aoa[:, c, :]) == pytest.approx(0.0, abs=1e-12)
            assert np.ptp(ps.aod[:, c, :]) > 0.0

    def test_los_power_dominates_nlos_at_equal_length(self):
        # place a scatterer exactly on the BS-UE segment so both paths have
        # the same total length, then compare the two parameter families
        band = BandParams(28.0, 0.0, CLASSIC_LOS, CLASSIC_NLOS)
        cfg = make_config(num_ues=1, num_clusters=2, mmwave=band, p_los=1.0)
        geo = place_scenario(cfg, np.random.default_rng(11))
        ue = geo.ue_positions[0]
        object.__setattr__(geo, "scatterer_positions", np.array([0.5 * ue]))
        object.__setattr__(geo, "shadow_units", np.zeros_like(geo.shadow_units))
        ps = derive_path_set(geo, "mmwave", cfg)
        assert ps.path_power[0, 0] > 100.0 * ps.path_power[0, 1]

    def test_band_visibility_excludes_clusters(self):
        cfg = make_config(num_ues=1, num_clusters=3)
        geo = place_scenario(cfg, np.random.default_rng(2))
        object.__setattr__(geo, "scatterer_visibility", ("mmwave", "sub6"))
        mm = derive_path_set(geo, "mmwave", cfg)
        s6 = derive_path_set(geo, "sub6", cfg)
        assert mm.active[0, 1] and not mm.active[0, 2]
        assert not s6.active[0, 1] and s6.active[0, 2]
        assert mm.path_power[0, 2] == 0.0

    def test_unknown_band_rejected(self):
        cfg = make_config()
        geo = place_scenario(cfg, np.random.default_rng(0))
        with pytest.raises(ValueError):
            derive_path_set(geo, "thz", cfg)


class TestChannelMatrix:
    def test_single_unit_path_outer_product(self):
        aoa, aod = np.array([1.1]), np.array([2.0])
        h = channel_matrix(aoa, aod, np.array([1.0]), 8, 4)
        assert h.shape == (8, 4)
        assert np.linalg.matrix_rank(h) == 1
        assert np.linalg.norm(h) ** 2 == pytest.approx(8 * 4, rel=1e-12)

    def test_empty_paths_give_zero(self):
        h = channel_matrix(np.array([]), np.array([]), np.array([]), 8, 4)
        assert not h.any()

    def test_second_moment_matches_path_powers(self):
        # law of large numbers over fresh gains: E||H||_F^2 equals
        # N_bs * N_ue * total path power
        cfg = make_config(num_ues=1, num_clusters=3, p_mis=0.0, p_los=1.0)
        geo = place_scenario(cfg, np.random.default_rng(21))
        ps = derive_path_set(geo, "mmwave", cfg)
        total_power = cfg.paths_per_cluster * ps.path_power[0].sum()
        rng = np.random.default_rng(42)
        acc = 0.0
        draws = 10_000
        for _ in range(draws):
            chan = realize_channel(ps, 8, 4, rng)
            acc += np.linalg.norm(chan.matrices[0]) ** 2
        empirical = acc / draws
        assert empirical == pytest.approx(8 * 4 * total_power, rel=0.03)

    def test_no_visible_clusters_zero_matrix(self):
        cfg = make_config(num_ues=1, num_clusters=2, p_los=1.0)
        geo = place_scenario(cfg, np.random.default_rng(5))
        object.__setattr__(geo, "ue_has_los", np.array([False]))
        object.__setattr__(geo, "scatterer_visibility", ("sub6",))
        ps = derive_path_set(geo, "mmwave", cfg)
        chan = realize_channel(ps, 8, 4, np.random.default_rng(0))
        assert not chan.matrices.any()


class TestMultiband:
    def test_full_congruence_with_matched_spread(self):
        # equal per-band angular spread and no band-exclusive clusters:
        # both bands see identical path angles
        mm = BandParams(28.0, 1.0, CLASSIC_LOS, CLASSIC_NLOS)
        s6 = BandParams(3.0, 1.0, PathlossParams(38.0, 20.0, 4.0),
                        PathlossParams(44.0, 22.0, 7.0))
        cfg = make_config(p_mis=0.0, mmwave=mm, sub6=s6)
        geo = place_scenario(cfg, np.random.default_rng(8))
        sub6, mmwave = realize_multiband(geo, cfg, np.random.default_rng(1))
        np.testing.assert_array_equal(sub6.path_set.aoa, mmwave.path_set.aoa)
        np.testing.assert_array_equal(sub6.path_set.aod, mmwave.path_set.aod)

    def test_band_shapes_and_carriers(self):
        cfg = make_config()
        geo = place_scenario(cfg, np.random.default_rng(9))
        sub6, mmwave = realize_multiband(geo, cfg, np.random.default_rng(2))
        assert sub6.matrices.shape == (cfg.num_ues, cfg.sub6_n_bs, cfg.sub6_n_ue)
        assert mmwave.matrices.shape == (cfg.num_ues, cfg.n_bs, cfg.n_ue)
        assert sub6.carrier_ghz == 3.0 and mmwave.carrier_ghz == 28.0

    def test_cluster_centers_shared_where_visible_to_both(self):
        cfg = make_config(p_mis=0.3)
        geo = place_scenario(cfg, np.random.default_rng(10))
        mm = derive_path_set(geo, "mmwave", cfg)
        s6 = derive_path_set(geo, "sub6", cfg)
        for c, vis in enumerate(geo.scatterer_visibility, start=1):
            if vis == "both":
                assert mm.active[:, c].all() and s6.active[:, c].all()


def test_shared_cluster_trend_with_radius():
    """Closer UEs share more effectively-strong clusters.

    A cluster counts as shared by a UE pair when its per-path power is within
    a fixed fraction of each UE's strongest reflector.  The expected count
    rises monotonically as the disk shrinks.
    """
    def mean_shared(radius, draws=300):
        cfg = make_config(num_ues=2, disk_radius_m=radius, p_los=1.0)
        total = 0.0
        for seed in range(draws):
            geo = place_scenario(cfg, np.random.default_rng((radius, seed)))
            ps = derive_path_set(geo, "mmwave", cfg)
            scat = ps.path_power[:, 1:]
            strong = scat >= 0.05 * scat.max(axis=1, keepdims=True)
            total += np.sum(strong[0] & strong[1])
        return total / draws

    counts = [mean_shared(r) for r in (5.0, 15.0, 30.0, 60.0)]
    assert counts[0] > counts[1] > counts[2] > counts[3]
