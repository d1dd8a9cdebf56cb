import numpy as np
import pytest

from src.compensation.models import SrccMatrix
from src.compensation.srcc import srcc
from src.core.constants import SPEED_OF_LIGHT
from src.core.exceptions import (
    AxisMismatchError,
    CropRangeError,
    DimensionMismatchError,
    EmptyInputError,
    EmptySearchRegionError,
    IllConditionedCovarianceError,
    NearZeroStaticMeanError,
)
from src.extraction.beamforming import (
    beamform,
    build_observation,
    delay_response,
    dynamic_component,
    mvdr_weight_matrix,
    mvdr_weights,
    smoothed_covariance,
    static_mean,
    steering_matrix,
    steering_vectors,
)
from src.extraction.extractor import (
    compress_delay,
    doppler_spectrum,
    estimate_peak,
    extract_frame,
    extract_tensor,
    fft2_frame,
    split_cpis,
)
from src.extraction.models import (
    DelayDopplerFrame,
    DelayGrid,
    DynamicMatrix,
    ExtractorConfig,
    SmoothedCovariance,
)
from src.harness.metrics import mirror_ratio
from src.simulation.models import CsiFrame, SubcarrierGrid
from src.simulation.simulator import canonical_scene, generate_csi, noise_power_for_snr, random_impairment

from conftest import LOS_DELAY

BIN_HZ = 1000.0 / 128
DELAY_QUANTUM = 1.0 / (128 * 625e3)


def srcc_of(scene, config, seed=0):
    return srcc(generate_csi(scene, seed), config.window)


def mover(range_m, doppler, amplitude=0.3, phase=0.7):
    return (amplitude * np.exp(1j * phase), LOS_DELAY + range_m / SPEED_OF_LIGHT, doppler)


def noisy(scene, snr_db=20.0, reference=None):
    """Scene with noise set for ``snr_db`` against ``reference`` (default: the scene itself)"""
    power = noise_power_for_snr(scene if reference is None else reference, snr_db)
    return scene.with_impairment(scene.impairment.with_noise(power))


def quantised(grid, seed):
    return random_impairment(grid.num_symbols, 8 * DELAY_QUANTUM, seed, to_quantum=DELAY_QUANTUM)


def cell(frame, range_m, doppler):
    return int(np.argmin(np.abs(frame.grid.as_range - range_m))), int(np.argmin(np.abs(frame.doppler_axis - doppler)))


def local_peak_near(magnitudes, row, col):
    """A cell within one delay and one Doppler bin of (row, col) that is a 3×3 local maximum"""
    padded = np.pad(magnitudes, 1, constant_values=-np.inf)
    rows, cols = magnitudes.shape
    for r in range(max(row - 1, 0), min(row + 2, rows)):
        for c in range(max(col - 1, 0), min(col + 2, cols)):
            if magnitudes[r, c] >= padded[r:r + 3, c:c + 3].max():
                return r, c
    return None


class TestDynamicComponent:
    def test_constant_matrix_has_no_dynamics(self, grid):
        matrix = SrccMatrix(values=np.full((30, 128), 2.0 + 1.0j), grid=grid)
        np.testing.assert_allclose(static_mean(matrix), 2.0 + 1.0j)
        dynamic = dynamic_component(matrix)
        np.testing.assert_allclose(dynamic.values, 0.0, atol=1e-15)

    def test_normalised_by_static_mean(self, grid):
        t = np.arange(128)
        values = np.tile(2.0 + 0.5 * np.exp(2j * np.pi * 4 * t / 128), (30, 1))
        dynamic = dynamic_component(SrccMatrix(values=values, grid=grid))
        np.testing.assert_allclose(dynamic.values, 0.25 * np.exp(2j * np.pi * 4 * t / 128)[None, :], atol=1e-12)

    def test_whole_cycles_average_out(self, grid):
        t = np.arange(128)
        values = np.tile(0.8 * np.exp(2j * np.pi * 4 * t / 128), (30, 1))
        np.testing.assert_allclose(static_mean(SrccMatrix(values=values, grid=grid)), 0.0, atol=1e-14)

    def test_norm_grows_with_dynamic_amplitude(self, grid, scene_factory, extractor_config):
        norms = []
        for amplitude in (0.02, 0.05, 0.1, 0.2, 0.3):
            scene = scene_factory(grid, dynamic=(mover(8.0, 40.0, amplitude),))
            norms.append(np.linalg.norm(dynamic_component(srcc_of(scene, extractor_config)).values))
        assert np.all(np.diff(norms) > 0)

    def test_vanishing_static_mean(self, grid):
        values = np.ones((30, 128), dtype=complex)
        values[4] = np.exp(2j * np.pi * np.arange(128) / 128)
        with pytest.raises(NearZeroStaticMeanError):
            dynamic_component(SrccMatrix(values=values, grid=grid))

    def test_static_mean_length_checked(self):
        with pytest.raises(DimensionMismatchError):
            DynamicMatrix(values=np.zeros((30, 4)), static_mean=np.ones(29))


class TestObservation:
    def test_conjugate_augmentation(self, target_scene, extractor_config):
        dynamic = dynamic_component(srcc_of(target_scene, extractor_config))
        obs = build_observation(dynamic)
        assert obs.values.shape == (30, 256)
        assert obs.num_symbols == 128
        np.testing.assert_array_equal(obs.original, dynamic.values)
        np.testing.assert_array_equal(obs.conjugate, np.conj(dynamic.values))


class TestSteering:
    def test_default_grid(self, grid, extractor_config):
        delays = extractor_config.delay_grid()
        assert len(delays) == 32
        assert delays.as_range[-1] == pytest.approx(31.0)
        steering = steering_matrix(delays, grid.frequencies)
        assert steering.values.shape == (30, 32)
        np.testing.assert_allclose(steering.values[:, 0], 1.0)
        np.testing.assert_allclose(np.abs(steering.values), 1.0)

    def test_negative_delay_is_conjugate(self, grid):
        a = steering_vectors(grid.frequencies, [25e-9, -25e-9])
        np.testing.assert_allclose(a[:, 1], np.conj(a[:, 0]))

    @pytest.mark.parametrize("delays", [[], [1e-9, 1e-9], [-1e-9, 0.0], [2e-9, 1e-9]])
    def test_invalid_grid(self, delays):
        with pytest.raises(ValueError):
            DelayGrid(delays=delays)

    def test_invalid_range(self):
        with pytest.raises(ValueError):
            DelayGrid.from_range(32.0, 0.0)


class TestCovariance:
    def test_default_loading(self, target_scene, extractor_config):
        obs = build_observation(dynamic_component(srcc_of(target_scene, extractor_config)))
        cov = smoothed_covariance(obs)
        trace = np.real(np.trace(obs.values @ obs.values.conj().T))
        assert cov.epsilon == pytest.approx(1e-3 * trace / 30)
        np.testing.assert_array_equal(cov.values, cov.values.conj().T)
        assert np.min(np.linalg.eigvalsh(cov.values)) > 0

    def test_zero_observation_uses_floor(self, grid):
        obs = build_observation(DynamicMatrix(values=np.zeros((30, 128)), static_mean=np.ones(30)))
        cov = smoothed_covariance(obs)
        assert cov.epsilon == 1e-12
        np.testing.assert_allclose(cov.values, 1e-12 * np.eye(30))

    def test_forward_backward_symmetry(self, target_scene, extractor_config):
        obs = build_observation(dynamic_component(srcc_of(target_scene, extractor_config)))
        cov = smoothed_covariance(obs, epsilon=1.0).values
        np.testing.assert_allclose(cov[::-1, ::-1], cov, atol=1e-9 * np.max(np.abs(cov)))

    def test_rank_of_single_moving_path(self, grid, target_scene):
        # static plus one moving term, W is rank one
        matrix = SrccMatrix(values=generate_csi(target_scene, 0).samples, grid=grid)
        obs = build_observation(dynamic_component(matrix))
        gram = np.linalg.eigvalsh(obs.values @ obs.values.conj().T)
        smoothed = np.linalg.eigvalsh(smoothed_covariance(obs, epsilon=1e-300).values)
        assert np.sum(gram > 1e-9 * gram.max()) <= 2
        assert np.sum(smoothed > 1e-9 * smoothed.max()) <= 4

    def test_explicit_epsilon_must_be_positive(self, grid):
        obs = build_observation(DynamicMatrix(values=np.ones((30, 4)), static_mean=np.ones(30)))
        with pytest.raises(ValueError):
            smoothed_covariance(obs, epsilon=0.0)


class TestMvdr:
    def test_identity_covariance_gives_matched_filter(self, grid):
        cov = SmoothedCovariance(values=np.eye(30, dtype=complex), epsilon=1.0)
        a = steering_vectors(grid.frequencies, [30e-9])[:, 0]
        np.testing.assert_allclose(mvdr_weights(cov, a), a / 30, atol=1e-12)

    def test_distortionless_for_random_covariances(self, grid, extractor_config):
        rng = np.random.default_rng(11)
        steering = steering_matrix(extractor_config.delay_grid(), grid.frequencies)
        for _ in range(50):
            b = rng.standard_normal((30, 20)) + 1j * rng.standard_normal((30, 20))
            cov = SmoothedCovariance(values=b @ b.conj().T + np.eye(30), epsilon=1.0)
            weights = mvdr_weight_matrix(cov, steering)
            gains = np.sum(np.conj(weights) * steering.values, axis=0)
            np.testing.assert_allclose(gains, 1.0, atol=1e-9)

    def test_other_path_suppressed(self, grid, scene_factory, extractor_config):
        both = scene_factory(grid, dynamic=(mover(8.0, 40.0), mover(20.0, -60.0, phase=-1.1)))
        other = scene_factory(grid, dynamic=(mover(20.0, -60.0, phase=-1.1),))
        a = steering_matrix(extractor_config.delay_grid(), grid.frequencies).values[:, 8]
        obs = build_observation(dynamic_component(srcc_of(both, extractor_config)))
        w = mvdr_weights(smoothed_covariance(obs), a)

        leak = build_observation(dynamic_component(srcc_of(other, extractor_config)))
        mvdr_power = np.sum(np.abs(beamform(leak, w)) ** 2)
        matched_power = np.sum(np.abs(beamform(leak, a / a.size)) ** 2)
        assert 10 * np.log10(matched_power / mvdr_power) >= 10.0

    def test_ill_conditioned(self, grid):
        diagonal = np.ones(30)
        diagonal[-1] = 1e-14
        cov = SmoothedCovariance(values=np.diag(diagonal).astype(complex), epsilon=1e-14)
        with pytest.raises(IllConditionedCovarianceError):
            mvdr_weights(cov, np.ones(30))

    def test_steering_length_checked(self):
        cov = SmoothedCovariance(values=np.eye(30, dtype=complex), epsilon=1.0)
        with pytest.raises(DimensionMismatchError):
            mvdr_weights(cov, np.ones(29))


class TestBeamform:
    def test_unit_weight_picks_real_part(self):
        rng = np.random.default_rng(3)
        w = rng.standard_normal((30, 16)) + 1j * rng.standard_normal((30, 16))
        obs = build_observation(DynamicMatrix(values=w, static_mean=np.ones(30)))
        e1 = np.zeros(30)
        e1[0] = 1.0
        np.testing.assert_allclose(beamform(obs, e1), 2.0 * np.real(w[0]))

    def test_weight_length_checked(self):
        obs = build_observation(DynamicMatrix(values=np.ones((30, 4)), static_mean=np.ones(30)))
        with pytest.raises(DimensionMismatchError):
            beamform(obs, np.ones(12))


class TestDopplerSpectrum:
    def test_default_crop(self):
        t = np.arange(128) / 1000.0
        spectrum, axis = doppler_spectrum(np.exp(-2j * np.pi * 40.0 * t), 1000.0, (-150.0, 150.0))
        assert axis.size == 39
        assert spectrum.shape == (39,)
        assert axis[np.argmax(spectrum)] == pytest.approx(39.0625)

    def test_on_bin_tone_has_unit_magnitude(self):
        t = np.arange(128) / 1000.0
        spectrum, axis = doppler_spectrum(np.exp(-2j * np.pi * 5 * BIN_HZ * t), 1000.0, (-500.0, 500.0))
        assert spectrum[np.isclose(axis, 5 * BIN_HZ)][0] == pytest.approx(1.0)
        assert spectrum.sum() == pytest.approx(1.0)

    def test_works_along_last_axis(self):
        x = np.ones((3, 64))
        spectrum, axis = doppler_spectrum(x, 1000.0, (-100.0, 100.0))
        assert spectrum.shape == (3, axis.size)

    @pytest.mark.parametrize("crop", [(-600.0, 100.0), (100.0, -100.0), (0.0, 501.0)])
    def test_crop_outside_nyquist(self, crop):
        with pytest.raises(CropRangeError):
            doppler_spectrum(np.ones(128), 1000.0, crop)

    def test_single_symbol(self):
        with pytest.raises(DimensionMismatchError):
            doppler_spectrum(np.ones(1), 1000.0, (-100.0, 100.0))


class TestExtractFrame:
    def test_single_target(self, target_scene, extractor_config):
        frame = extract_frame(srcc_of(target_scene, extractor_config), extractor_config.delay_grid(), extractor_config)
        assert frame.magnitudes.shape == (32, 39)
        range_m, doppler = estimate_peak(frame, 2)
        assert range_m == pytest.approx(8.0)
        assert doppler == pytest.approx(39.0625)

    def test_mirror_suppressed(self, target_scene, extractor_config):
        frame = extract_frame(srcc_of(target_scene, extractor_config), extractor_config.delay_grid(), extractor_config)
        row = frame.magnitudes[8]
        axis = frame.doppler_axis
        positive = row[np.argmin(np.abs(axis - 39.0625))]
        negative = row[np.argmin(np.abs(axis + 39.0625))]
        assert 20 * np.log10(positive / negative) >= 10.0

    def test_two_targets(self, grid, scene_factory, extractor_config):
        scene = scene_factory(grid, dynamic=(mover(8.0, 5 * BIN_HZ), mover(20.0, -8 * BIN_HZ)))
        frame = extract_frame(srcc_of(scene, extractor_config), extractor_config.delay_grid(), extractor_config)
        ranges = frame.grid.as_range
        first = np.argmin(np.abs(frame.doppler_axis - 5 * BIN_HZ))
        second = np.argmin(np.abs(frame.doppler_axis + 8 * BIN_HZ))
        assert abs(ranges[np.argmax(frame.magnitudes[:, first])] - 8.0) <= 1.0
        assert abs(ranges[np.argmax(frame.magnitudes[:, second])] - 20.0) <= 1.0

    @pytest.mark.parametrize("range_m", [8.0, 12.0, 16.0, 24.0])
    @pytest.mark.parametrize("doppler_bins", [-12, -5, 4, 10])
    def test_recovery_sweep(self, grid, scene_factory, extractor_config, range_m, doppler_bins):
        scene = scene_factory(grid, dynamic=(mover(range_m, doppler_bins * BIN_HZ),))
        frame = extract_frame(srcc_of(scene, extractor_config), extractor_config.delay_grid(), extractor_config)
        est_range, est_doppler = estimate_peak(frame, 2)
        assert abs(est_range - range_m) <= 1.0
        assert abs(est_doppler - doppler_bins * BIN_HZ) <= BIN_HZ + 1e-9

    def test_noisy_impaired_capture(self, extractor_config):
        scene = canonical_scene(snr_db=20.0, rng_seed=5)
        frame = extract_frame(srcc_of(scene, extractor_config, seed=6), extractor_config.delay_grid(), extractor_config)
        est_range, est_doppler = estimate_peak(frame, 2)
        assert abs(est_range - 8.0) <= 1.0
        assert abs(est_doppler - 40.0) <= 16.0

    @pytest.mark.parametrize("seed", range(5))
    def test_mirror_suppressed_at_snr_20(self, extractor_config, seed):
        scene = canonical_scene(snr_db=20.0, rng_seed=seed)
        frame = extract_frame(srcc_of(scene, extractor_config, seed=100 + seed), extractor_config.delay_grid(), extractor_config)
        row, _ = cell(frame, 8.0, 40.0)
        assert mirror_ratio(frame.magnitudes[row], frame.doppler_axis, 40.0) >= 10.0

    def test_byproduct_scale_path_leaves_peak(self, grid, scene_factory, extractor_config):
        impairment = quantised(grid, 4)
        base = scene_factory(grid, dynamic=(mover(8.0, 40.0),), impairment=impairment)
        # |ρ^X|² of the main reflector
        weak = mover(20.0, -70.0, amplitude=0.09, phase=-0.4)
        extra = scene_factory(grid, dynamic=(mover(8.0, 40.0), weak), impairment=impairment)
        delays = extractor_config.delay_grid()
        peaks = [
            estimate_peak(extract_frame(srcc_of(noisy(s, reference=base), extractor_config, seed=9), delays, extractor_config), 2)
            for s in (base, extra)
        ]
        assert peaks[0] == peaks[1]
        assert abs(peaks[0][0] - 8.0) <= 1.0

    def test_random_single_targets(self, extractor_config):
        rng = np.random.default_rng(2024)
        delays = extractor_config.delay_grid()
        hits = 0
        for trial in range(200):
            range_m = rng.uniform(2.0, 30.0)
            doppler = rng.choice([-1.0, 1.0]) * rng.uniform(16.0, 150.0)
            scene = canonical_scene(excess_range_m=range_m, doppler_hz=doppler, snr_db=20.0, rng_seed=trial)
            frame = extract_frame(srcc_of(scene, extractor_config, seed=1000 + trial), delays, extractor_config)
            est_range, est_doppler = estimate_peak(frame, extractor_config.dc_exclusion_bins)
            delay_hit = abs(est_range - round(range_m)) <= 1.0 + 1e-9
            doppler_hit = abs(round(est_doppler / BIN_HZ) - round(doppler / BIN_HZ)) <= 1
            hits += delay_hit and doppler_hit
        assert hits >= 190

    def test_two_targets_separable(self, grid, scene_factory, extractor_config):
        targets = ((5.0, 30.0), (12.0, -60.0))
        delays = extractor_config.delay_grid()
        separated = 0
        for seed in range(100):
            scene = scene_factory(
                grid,
                dynamic=(mover(5.0, 30.0), mover(12.0, -60.0, phase=-1.1)),
                impairment=quantised(grid, seed),
            )
            frame = extract_frame(srcc_of(noisy(scene), extractor_config, seed=500 + seed), delays, extractor_config)
            ok = True
            for range_m, doppler in targets:
                peak = local_peak_near(frame.magnitudes, *cell(frame, range_m, doppler))
                if peak is None:
                    ok = False
                    break
                row, col = peak
                mirror = frame.magnitudes[row, frame.doppler_axis.size - 1 - col]
                ok = ok and 20 * np.log10(frame.magnitudes[row, col] / mirror) >= 6.0
            separated += ok
        assert separated >= 90

    def test_plain_fft_frame_has_same_axes(self, target_scene, extractor_config):
        matrix = srcc_of(target_scene, extractor_config)
        grid = extractor_config.delay_grid()
        plain = fft2_frame(matrix, grid, extractor_config)
        mvdr = extract_frame(matrix, grid, extractor_config)
        assert plain.magnitudes.shape == mvdr.magnitudes.shape
        np.testing.assert_array_equal(plain.doppler_axis, mvdr.doppler_axis)


class TestDelayResponse:
    def test_bartlett_response_is_even(self, target_scene, extractor_config):
        obs = build_observation(dynamic_component(srcc_of(target_scene, extractor_config)))
        delays = np.linspace(0, 40.0, 41) / SPEED_OF_LIGHT
        frequencies = target_scene.grid.frequencies
        forward = delay_response(obs, frequencies, delays)
        backward = delay_response(obs, frequencies, -delays)
        np.testing.assert_allclose(backward, forward, rtol=1e-9)


class TestTensor:
    def test_split_cpis(self):
        grid = SubcarrierGrid.uniform(num_symbols=512)
        frame = CsiFrame(samples=np.ones((30, 512)), grid=grid)
        cpis = split_cpis(frame, 128, 32)
        assert len(cpis) == 13
        assert all(c.num_symbols == 128 for c in cpis)
        assert cpis[0].grid.num_symbols == 128

    def test_split_errors(self, static_scene):
        frame = generate_csi(static_scene, 0)
        with pytest.raises(DimensionMismatchError):
            split_cpis(frame, 256, 32)
        with pytest.raises(ValueError):
            split_cpis(frame, 128, 0)

    def test_empty_input(self, extractor_config):
        with pytest.raises(EmptyInputError):
            extract_tensor([], extractor_config)

    def test_axes_must_match(self, extractor_config):
        a = generate_csi(canonical_scene(snr_db=None, num_symbols=128), 0)
        b = generate_csi(canonical_scene(snr_db=None, num_symbols=64), 0)
        with pytest.raises(AxisMismatchError):
            extract_tensor([a, b], extractor_config.model_copy(update={'cpi_length': 64}))

    def test_order_and_stationarity(self, extractor_config):
        scene = canonical_scene(snr_db=None, num_symbols=512)
        cpis = split_cpis(generate_csi(scene, 0), 128, 32)
        serial = extract_tensor(cpis, extractor_config, max_workers=1)
        parallel = extract_tensor(cpis, extractor_config, max_workers=4)
        assert serial.frames.shape == (32, 39, 13)
        assert serial.cpi_stride == 32
        np.testing.assert_allclose(parallel.frames, serial.frames, rtol=1e-12, atol=1e-12 * serial.frames.max())
        for k in range(serial.num_cpis):
            single = extract_frame(srcc(cpis[k], extractor_config.window), serial.grid, extractor_config)
            np.testing.assert_allclose(serial.frames[:, :, k], single.magnitudes, rtol=1e-12, atol=1e-12 * serial.frames.max())
        # a constant-velocity reflector looks the same in every CPI
        peaks = {estimate_peak(serial.frame(k), 2) for k in range(serial.num_cpis)}
        assert len(peaks) == 1

    def test_compress_keeps_mass(self, extractor_config):
        cpis = split_cpis(generate_csi(canonical_scene(snr_db=None, num_symbols=256), 0), 128, 64)
        tensor = extract_tensor(cpis, extractor_config)
        doppler_map = compress_delay(tensor)
        assert doppler_map.magnitudes.shape == (39, tensor.num_cpis)
        assert doppler_map.magnitudes.sum() == pytest.approx(tensor.frames.sum())
        assert doppler_map.cpi_stride == tensor.cpi_stride


class TestEstimatePeak:
    def make_frame(self, magnitudes):
        grid = DelayGrid.from_range(4.0, 1.0)
        axis = np.arange(-3, 4) * BIN_HZ
        return DelayDopplerFrame(magnitudes=np.asarray(magnitudes, dtype=float), doppler_axis=axis, grid=grid)

    def test_dc_band_is_skipped(self):
        magnitudes = np.zeros((4, 7))
        magnitudes[0, 3] = 10.0
        magnitudes[2, 5] = 1.0
        assert estimate_peak(self.make_frame(magnitudes), 1) == (pytest.approx(2.0), pytest.approx(2 * BIN_HZ))
        assert estimate_peak(self.make_frame(magnitudes), 0) == (pytest.approx(0.0), pytest.approx(0.0))

    def test_ties(self):
        magnitudes = np.zeros((4, 7))
        magnitudes[3, 0] = 1.0
        magnitudes[1, 6] = 1.0
        magnitudes[1, 0] = 1.0
        magnitudes[1, 2] = 1.0
        range_m, doppler = estimate_peak(self.make_frame(magnitudes), 0)
        assert range_m == pytest.approx(1.0)
        assert doppler == pytest.approx(-BIN_HZ)

    def test_nothing_left_to_search(self):
        magnitudes = np.zeros((4, 7))
        magnitudes[:, 3] = 5.0
        with pytest.raises(EmptySearchRegionError):
            estimate_peak(self.make_frame(magnitudes), 1)
        with pytest.raises(EmptySearchRegionError):
            estimate_peak(self.make_frame(magnitudes), 3)


class TestConfig:
    def test_overrides_skip_none(self):
        config = ExtractorConfig.from_settings(cpi_length=64, delay_max_m=None)
        assert config.cpi_length == 64
        assert config.delay_max_m == 32.0

    def test_with_window_validates(self):
        config = ExtractorConfig()
        assert config.with_window(sigma=8.0).window.sigma == 8.0
        with pytest.raises(ValueError):
            config.with_window(sigma=-1.0)
