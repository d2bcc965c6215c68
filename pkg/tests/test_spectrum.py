"""Low-band spatial spectra: analytic closed form vs fading averages."""

import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oobeam.arrays import build_codebook
from oobeam.channel import BandChannel, PathSet, channel_matrix, realize_channel
from oobeam.spectrum import analytic_spectrum, empirical_spectrum, spectrum_csv_lines

N_BS, N_UE = 8, 4


def single_path_set(bs_idx, ue_idx, power=1.0, num_beams_bs=8, num_beams_ue=4):
    bs_grid = build_codebook(N_BS, num_beams_bs).grid
    ue_grid = build_codebook(N_UE, num_beams_ue).grid
    aoa = np.array([[[bs_grid.angles[bs_idx]]]])
    aod = np.array([[[ue_grid.angles[ue_idx]]]])
    return PathSet(
        band="sub6",
        carrier_ghz=3.0,
        aoa=aoa,
        aod=aod,
        path_power=np.array([[power]]),
        active=np.ones((1, 1), bool),
    )


def channel_from_paths(path_set, gains):
    mats = np.stack([
        channel_matrix(path_set.aoa[u].ravel(), path_set.aod[u].ravel(),
                       gains[u], N_BS, N_UE)
        for u in range(path_set.num_ues)
    ])
    return BandChannel(band="sub6", carrier_ghz=3.0, matrices=mats, path_set=path_set)


class TestEmpiricalSpectrum:
    def test_aligned_unit_path_peak(self):
        # square codebooks on the same array: the aligned pair captures the
        # full N_bs * N_ue gain, any other double-offset pair gets the
        # constant-crosstalk product 1/(N_bs * N_ue)
        ps = single_path_set(3, 2)
        chan = channel_from_paths(ps, np.array([[1.0 + 0j]]))
        bs_cb, ue_cb = build_codebook(N_BS, N_BS), build_codebook(N_UE, N_UE)
        spec = empirical_spectrum([chan], bs_cb, ue_cb)
        mat = spec.for_ue(0)
        assert mat[3, 2] == pytest.approx(N_BS * N_UE, rel=1e-12)
        assert mat[4, 1] == pytest.approx(1.0 / (N_BS * N_UE), rel=1e-9)

    def test_zero_channel_all_zero(self):
        ps = single_path_set(3, 2, power=0.0)
        chan = channel_from_paths(ps, np.array([[0.0 + 0j]]))
        spec = empirical_spectrum([chan], build_codebook(N_BS, N_BS), build_codebook(N_UE, N_UE))
        assert not spec.for_ue(0).any()

    def test_requires_realizations(self):
        with pytest.raises(ValueError):
            empirical_spectrum([], build_codebook(N_BS, N_BS), build_codebook(N_UE, N_UE))

    def test_dimension_mismatch_rejected(self):
        ps = single_path_set(0, 0)
        chan = channel_from_paths(ps, np.array([[1.0 + 0j]]))
        with pytest.raises(ValueError):
            empirical_spectrum([chan], build_codebook(16, 16), build_codebook(N_UE, N_UE))


class TestAnalyticSpectrum:
    def test_single_aligned_path_matches_empirical_limit(self):
        ps = single_path_set(5, 1)
        bs_cb, ue_cb = build_codebook(N_BS, N_BS), build_codebook(N_UE, N_UE)
        spec = analytic_spectrum(ps, bs_cb, ue_cb)
        assert spec.for_ue(0)[5, 1] == pytest.approx(N_BS * N_UE, rel=1e-12)

    def test_monte_carlo_convergence_to_analytic(self):
        # the fidelity oracle: a multi-cluster path set averaged over many
        # fresh fades approaches the closed form entrywise
        rng = np.random.default_rng(0)
        angles_bs = rng.uniform(0.2, 2.9, size=(1, 3, 2))
        angles_ue = rng.uniform(0.2, 2.9, size=(1, 3, 2))
        powers = np.array([[1.0, 0.5, 0.25]])
        ps = PathSet("sub6", 3.0, angles_bs, angles_ue, powers, np.ones((1, 3), bool))
        bs_cb, ue_cb = build_codebook(N_BS, 16), build_codebook(N_UE, 8)
        analytic = analytic_spectrum(ps, bs_cb, ue_cb).for_ue(0)

        fade_rng = np.random.default_rng(7)
        errors = []
        for count in (100, 1_000, 10_000):
            chans = [realize_channel(ps, N_BS, N_UE, fade_rng) for _ in range(count)]
            emp = empirical_spectrum(chans, bs_cb, ue_cb).for_ue(0)
            mask = analytic > 0.01 * analytic.max()
            errors.append(np.max(np.abs(emp[mask] - analytic[mask]) / analytic[mask]))
        assert errors[-1] < 0.03
        assert errors[0] > errors[1] > errors[2]

    def test_linear_in_cluster_power(self):
        ps1 = single_path_set(2, 3, power=1.0)
        ps2 = single_path_set(2, 3, power=2.0)
        bs_cb, ue_cb = build_codebook(N_BS, N_BS), build_codebook(N_UE, N_UE)
        a = analytic_spectrum(ps1, bs_cb, ue_cb).for_ue(0)
        b = analytic_spectrum(ps2, bs_cb, ue_cb).for_ue(0)
        np.testing.assert_allclose(b, 2.0 * a, rtol=1e-12)

    def test_invariant_under_path_relabeling(self):
        rng = np.random.default_rng(1)
        aoa = rng.uniform(0.3, 2.8, size=(1, 2, 3))
        aod = rng.uniform(0.3, 2.8, size=(1, 2, 3))
        powers = np.array([[1.0, 0.4]])
        ps = PathSet("sub6", 3.0, aoa, aod, powers, np.ones((1, 2), bool))
        shuffled = PathSet("sub6", 3.0, aoa[:, :, ::-1], aod[:, :, ::-1], powers,
                           np.ones((1, 2), bool))
        bs_cb, ue_cb = build_codebook(N_BS, N_BS), build_codebook(N_UE, N_UE)
        np.testing.assert_allclose(
            analytic_spectrum(ps, bs_cb, ue_cb).for_ue(0),
            analytic_spectrum(shuffled, bs_cb, ue_cb).for_ue(0),
            rtol=1e-12,
        )

    def test_inactive_ue_gets_zero_spectrum(self):
        ps = single_path_set(1, 1)
        ps = dataclasses.replace(ps, active=np.zeros((1, 1), bool))
        spec = analytic_spectrum(ps, build_codebook(N_BS, N_BS), build_codebook(N_UE, N_UE))
        assert not spec.for_ue(0).any()


@settings(max_examples=20)
@given(scale=st.floats(min_value=1e-6, max_value=1e6))
def test_argmax_invariant_under_scaling(scale):
    rng = np.random.default_rng(3)
    mat = rng.random((8, 4))
    assert np.argmax(mat) == np.argmax(scale * mat)


def test_csv_heatmap_layout():
    ps = single_path_set(3, 2)
    spec = analytic_spectrum(ps, build_codebook(N_BS, N_BS), build_codebook(N_UE, N_UE))
    lines = spectrum_csv_lines(spec, 0)
    assert lines[1].startswith("bs_beam,")
    assert len(lines) == 2 + N_BS
    assert len(lines[2].split(",")) == 1 + N_UE
