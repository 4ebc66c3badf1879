"""Simulator: pulse model, phantom sampling, FSA kernel, synthesis, decimation."""

import numpy as np
import pytest

from rfpipe.configs import Cyst, Phantom, PointTarget, ProbeGeometry, zero_aberration
from rfpipe.errors import AliasingError, DimensionMismatchError, EmptySpanError
from rfpipe.frame import FrameKind, RFFrame
from rfpipe.sim import (
    PlaneWaveTx,
    PulseModel,
    ScattererCloud,
    default_time_span,
    downsample,
    gen_aberration,
    plane_wave_tx,
    pulse_eval,
    sample_phantom,
    simulate_fsa,
    synth_planewave,
)

PULSE = PulseModel(f0=5.208e6, frac_bw=0.6)
FS = 20.832e6
C = 1540.0


def small_probe(n=16, pitch=0.3e-3):
    return ProbeGeometry(n_elements=n, pitch_m=pitch)


def single_scatterer(x=0.0, z=0.020, amp=1.0):
    return ScattererCloud(positions=[[x, z]], amplitudes=[amp])


class TestPulse:
    def test_peak_at_zero(self):
        assert pulse_eval(PULSE, 0.0) == 1.0

    def test_negative_half_cycle(self):
        v = pulse_eval(PULSE, 1.0 / (2.0 * PULSE.f0))
        assert v < 0.0

    def test_even_function(self):
        t = np.linspace(-3e-7, 3e-7, 101)
        assert np.allclose(pulse_eval(PULSE, t), pulse_eval(PULSE, -t), rtol=0, atol=0)

    def test_minus6db_bandwidth(self):
        # Oracle: FFT of a densely sampled pulse; -6 dB full width = frac_bw * f0.
        fs_dense = 40 * PULSE.f0
        n = 2**16
        t = (np.arange(n) - n // 2) / fs_dense
        spec = np.abs(np.fft.rfft(pulse_eval(PULSE, t)))
        freqs = np.fft.rfftfreq(n, 1.0 / fs_dense)
        above = freqs[spec >= spec.max() / 2.0]
        width = above.max() - above.min()
        assert abs(width - PULSE.frac_bw * PULSE.f0) <= 0.02 * PULSE.frac_bw * PULSE.f0


class TestSamplePhantom:
    def test_density_zero_no_target_is_empty(self):
        cloud = sample_phantom(Phantom(scatterer_density=0.0, seed=1))
        assert cloud.n == 0

    def test_same_seed_bitwise_identical(self):
        p = Phantom(scatterer_density=2.0, seed=42)
        a, b = sample_phantom(p), sample_phantom(p)
        assert np.array_equal(a.positions, b.positions)
        assert np.array_equal(a.amplitudes, b.amplitudes)

    def test_cyst_removal_count_matches_binomial(self):
        # Oracle: 18000 draws, removal prob = cyst area fraction 2*pi*9/1800;
        # kept count must land within 4 binomial sigmas of the expectation.
        p = Phantom(
            scatterer_density=10.0,
            cysts=(Cyst(-0.008, 0.020, 0.003), Cyst(0.008, 0.020, 0.003)),
            seed=7,
        )
        cloud = sample_phantom(p)
        p_in = 2.0 * np.pi * 9.0 / 1800.0
        expect = 18000 * (1.0 - p_in)
        sigma = np.sqrt(18000 * p_in * (1.0 - p_in))
        assert abs(cloud.n - expect) <= 4.0 * sigma

    def test_no_scatterer_inside_cysts(self):
        p = Phantom(scatterer_density=10.0, cysts=(Cyst(0.0, 0.020, 0.004),), seed=3)
        cloud = sample_phantom(p)
        d2 = (cloud.positions[:, 0] - 0.0) ** 2 + (cloud.positions[:, 1] - 0.020) ** 2
        assert np.all(d2 >= 0.004**2)

    def test_point_target_amplitude_rule(self):
        p = Phantom(
            scatterer_density=5.0, point_target=PointTarget(0.0, 0.027, gain_db=40.0), seed=9
        )
        cloud = sample_phantom(p)
        diffuse = cloud.amplitudes[:-1]
        rms = np.sqrt(np.mean(diffuse**2))
        assert cloud.amplitudes[-1] == pytest.approx(100.0 * rms, rel=1e-12)
        assert tuple(cloud.positions[-1]) == (0.0, 0.027)

    def test_target_appended_to_identical_diffuse_realization(self):
        base = Phantom(scatterer_density=3.0, seed=11)
        with_target = Phantom(
            scatterer_density=3.0, point_target=PointTarget(0.0, 0.027), seed=11
        )
        a, b = sample_phantom(base), sample_phantom(with_target)
        assert b.n == a.n + 1
        assert np.array_equal(b.positions[:-1], a.positions)
        assert np.array_equal(b.amplitudes[:-1], a.amplitudes)


class TestSimulateFsa:
    def test_empty_cloud_all_zero(self):
        cloud = ScattererCloud(positions=np.empty((0, 2)), amplitudes=np.empty(0))
        frame = simulate_fsa(cloud, small_probe(4), PULSE, FS, (0.0, 1e-5), c=C)
        assert frame.kind is FrameKind.FSA_TENSOR
        assert np.all(frame.samples == 0.0)

    def test_aliasing_guard(self):
        with pytest.raises(AliasingError):
            simulate_fsa(single_scatterer(), small_probe(4), PULSE, 2 * PULSE.f0, (0.0, 1e-5))

    def test_empty_span_guard(self):
        with pytest.raises(EmptySpanError):
            simulate_fsa(single_scatterer(), small_probe(4), PULSE, FS, (1e-5, 1e-5))

    def test_single_scatterer_peak_time(self):
        # Oracle: closed-form two-way delay (d(i,s)+d(s,j))/c per element pair.
        probe = small_probe(8)
        cloud = single_scatterer(0.0, 0.020)
        frame = simulate_fsa(cloud, probe, PULSE, FS, (0.0, 4e-5), c=C)
        x = probe.element_x()
        d = np.hypot(x - 0.0, 0.020)
        for i in range(probe.n_elements):
            for j in range(probe.n_elements):
                trace = frame.samples[:, j, i]
                env = np.abs(trace)
                peak_idx = int(np.argmax(env))
                expected = (d[i] + d[j]) / C * FS
                assert abs(peak_idx - expected) <= 1.0

    def test_linearity_in_amplitudes(self):
        probe = small_probe(6)
        rng = np.random.default_rng(12)
        cloud = ScattererCloud(
            positions=np.column_stack(
                [rng.uniform(-0.005, 0.005, 50), rng.uniform(0.005, 0.03, 50)]
            ),
            amplitudes=rng.normal(size=50),
        )
        base = simulate_fsa(cloud, probe, PULSE, FS, (0.0, 5e-5), c=C)
        scaled = simulate_fsa(cloud.scaled(3.0), probe, PULSE, FS, (0.0, 5e-5), c=C)
        assert np.allclose(scaled.samples, 3.0 * base.samples, rtol=1e-12, atol=1e-12 * np.abs(base.samples).max())

    def test_reciprocity(self):
        probe = small_probe(5)
        rng = np.random.default_rng(13)
        cloud = ScattererCloud(
            positions=np.column_stack(
                [rng.uniform(-0.004, 0.004, 30), rng.uniform(0.004, 0.02, 30)]
            ),
            amplitudes=rng.normal(size=30),
        )
        frame = simulate_fsa(cloud, probe, PULSE, FS, (0.0, 4e-5), c=C)
        tensor = frame.samples
        for i in range(5):
            for j in range(5):
                assert np.array_equal(tensor[:, j, i], tensor[:, i, j])

    def test_superposition(self):
        probe = small_probe(4)
        rng = np.random.default_rng(14)

        def cloud(seed, n):
            r = np.random.default_rng(seed)
            return ScattererCloud(
                positions=np.column_stack(
                    [r.uniform(-0.004, 0.004, n), r.uniform(0.004, 0.02, n)]
                ),
                amplitudes=r.normal(size=n),
            )

        a, b = cloud(1, 20), cloud(2, 25)
        union = ScattererCloud(
            positions=np.vstack([a.positions, b.positions]),
            amplitudes=np.concatenate([a.amplitudes, b.amplitudes]),
        )
        span = (0.0, 4e-5)
        fa = simulate_fsa(a, probe, PULSE, FS, span, c=C).samples
        fb = simulate_fsa(b, probe, PULSE, FS, span, c=C).samples
        fu = simulate_fsa(union, probe, PULSE, FS, span, c=C).samples
        scale = np.abs(fu).max()
        assert np.allclose(fu, fa + fb, rtol=1e-12, atol=1e-12 * scale)

    def test_thread_count_independence(self):
        probe = small_probe(6)
        rng = np.random.default_rng(15)
        cloud = ScattererCloud(
            positions=np.column_stack(
                [rng.uniform(-0.005, 0.005, 100), rng.uniform(0.004, 0.03, 100)]
            ),
            amplitudes=rng.normal(size=100),
        )
        one = simulate_fsa(cloud, probe, PULSE, FS, (0.0, 5e-5), c=C, threads=1)
        eight = simulate_fsa(cloud, probe, PULSE, FS, (0.0, 5e-5), c=C, threads=8)
        assert np.array_equal(one.samples, eight.samples)


class TestGenAberration:
    def test_zero_rms_is_all_zero(self):
        ab = gen_aberration(32, 0.0, 6.0, seed=1)
        assert np.all(ab.delays_s == 0.0)

    def test_rms_exact(self):
        ab = gen_aberration(64, 50.0, 6.0, seed=2)
        rms = np.sqrt(np.mean(ab.delays_s**2))
        assert abs(rms - 50e-9) <= 1e-3 * 50e-9

    def test_zero_mean(self):
        ab = gen_aberration(64, 50.0, 6.0, seed=3)
        assert abs(np.mean(ab.delays_s)) <= 1e-12 * 50e-9

    def test_deterministic_per_seed(self):
        a = gen_aberration(48, 50.0, 6.0, seed=4)
        b = gen_aberration(48, 50.0, 6.0, seed=4)
        assert np.array_equal(a.delays_s, b.delays_s)

    def test_distinct_seeds_weakly_correlated(self):
        # Oracle run over these 100 pinned seed pairs gives mean |rho| of
        # 0.4026; individual smooth screens can correlate strongly by chance
        # (few degrees of freedom at corr_len 6), so the aggregate is the
        # stable statement. Distinct seeds must also never collide bitwise.
        n = 64
        rhos = []
        for base in range(100):
            a = gen_aberration(n, 50.0, 6.0, seed=2 * base)
            b = gen_aberration(n, 50.0, 6.0, seed=2 * base + 1)
            assert not np.array_equal(a.delays_s, b.delays_s)
            rhos.append(abs(np.corrcoef(a.delays_s, b.delays_s)[0, 1]))
        assert np.mean(rhos) < 0.5


class TestSynthPlanewave:
    def make_fsa(self, probe, cloud=None, span=(0.0, 4e-5)):
        cloud = cloud or single_scatterer(0.0, 0.015)
        return simulate_fsa(cloud, probe, PULSE, FS, span, c=C)

    def test_zero_delays_equal_transmit_sum(self):
        probe = small_probe(5)
        fsa = self.make_fsa(probe)
        pw = synth_planewave(fsa, plane_wave_tx(probe, 0.0, C), zero_aberration(5))
        expected = np.zeros((fsa.n0, 5))
        for i in range(5):
            expected += fsa.samples[:, :, i]
        assert np.array_equal(pw.samples[:, :, 0], expected)
        assert pw.kind is FrameKind.CHANNEL_DATA

    def test_constant_screen_shifts_by_two_tau(self):
        # Oracle: shift theorem on a single-scatterer tensor. A constant
        # screen tau on transmit and receive must move every trace 2*tau
        # later; the reference is the unaberrated output resampled at the
        # oversampled grid shifted by exactly 2*tau.
        from rfpipe.configs import AberrationProfile

        probe = small_probe(4)
        fsa = self.make_fsa(probe)
        tau = 7.5 / FS  # deliberately fractional in samples
        screen = AberrationProfile(
            np.full(4, tau), rms_ns=tau * 1e9, corr_len_elements=1.0
        )
        tx = plane_wave_tx(probe, 0.0, C)
        plain = synth_planewave(fsa, tx, zero_aberration(4))
        moved = synth_planewave(fsa, tx, screen)

        n0 = plain.n0
        times = np.arange(n0) / FS
        for j in range(4):
            ref = np.interp(
                times - 2.0 * tau, times, plain.samples[:, j, 0], left=0.0, right=0.0
            )
            got = moved.samples[:, j, 0]
            tol = 0.05 * np.abs(plain.samples[:, j, 0]).max()
            assert np.abs(got - ref).max() <= tol

    def test_aberration_changes_output(self):
        probe = small_probe(8)
        rng = np.random.default_rng(16)
        cloud = ScattererCloud(
            positions=np.column_stack(
                [rng.uniform(-0.005, 0.005, 200), rng.uniform(0.005, 0.03, 200)]
            ),
            amplitudes=rng.normal(size=200),
        )
        fsa = self.make_fsa(probe, cloud=cloud, span=(0.0, 5e-5))
        tx = plane_wave_tx(probe, 0.0, C)
        plain = synth_planewave(fsa, tx, zero_aberration(8)).samples
        ab = gen_aberration(8, 50.0, 6.0, seed=5)
        aberrated = synth_planewave(fsa, tx, ab).samples
        rel_rmse = np.sqrt(np.mean((plain - aberrated) ** 2)) / np.sqrt(np.mean(plain**2))
        assert rel_rmse > 0.01

    def test_tx_rx_flags(self):
        probe = small_probe(4)
        fsa = self.make_fsa(probe)
        tx = plane_wave_tx(probe, 0.0, C)
        ab = gen_aberration(4, 40.0, 2.0, seed=6)
        both = synth_planewave(fsa, tx, ab).samples
        neither = synth_planewave(fsa, tx, ab, apply_tx=False, apply_rx=False).samples
        plain = synth_planewave(fsa, tx, zero_aberration(4)).samples
        assert np.array_equal(neither, plain)
        assert not np.array_equal(both, plain)

    def test_dimension_mismatch(self):
        probe = small_probe(4)
        fsa = self.make_fsa(probe)
        with pytest.raises(DimensionMismatchError):
            synth_planewave(fsa, plane_wave_tx(probe, 0.0, C), zero_aberration(5))
        pw = synth_planewave(fsa, plane_wave_tx(probe, 0.0, C), zero_aberration(4))
        with pytest.raises(DimensionMismatchError):
            synth_planewave(pw, plane_wave_tx(probe, 0.0, C), zero_aberration(4))


class TestPlaneWaveTx:
    def test_zero_angle_zero_delays(self):
        tx = plane_wave_tx(small_probe(8), 0.0, C)
        assert np.all(tx.delays_s == 0.0)

    def test_tilted_delays_nonnegative_increasing(self):
        tx = plane_wave_tx(small_probe(8), 0.1, C)
        assert tx.delays_s.min() == 0.0
        assert np.all(np.diff(tx.delays_s) > 0)


class TestDownsample:
    def tone_frame(self, fs=104.16e6, f=5.208e6, n=4096):
        t = np.arange(n) / fs
        return RFFrame(
            kind=FrameKind.CHANNEL_DATA,
            samples=np.cos(2 * np.pi * f * t),
            fs=fs,
            f0=f,
            c=C,
        )

    def test_factor_one_identity(self):
        frame = self.tone_frame()
        assert downsample(frame, 1) is frame

    def test_paper_rate_headers(self):
        frame = self.tone_frame()
        out = downsample(frame, 5)
        assert out.fs == 20.832e6
        assert out.t0 == frame.t0
        assert out.n0 == int(np.ceil(frame.n0 / 5))

    def test_tone_amplitude_preserved(self):
        # Oracle: the decimated tone must match the analytic cosine within
        # 1% of unit amplitude in the interior (10% guard at each edge).
        frame = self.tone_frame()
        out = downsample(frame, 5)
        t = out.t0 + np.arange(out.n0) / out.fs
        expected = np.cos(2 * np.pi * 5.208e6 * t)
        lo, hi = int(0.1 * out.n0), int(0.9 * out.n0)
        assert np.abs(out.samples.ravel()[lo:hi] - expected[lo:hi]).max() <= 0.01

    def test_aliasing_guard(self):
        frame = self.tone_frame()
        with pytest.raises(AliasingError):
            downsample(frame, 7)


def test_default_time_span_covers_far_corner():
    phantom = Phantom(scatterer_density=1.0, seed=0)
    probe = ProbeGeometry(n_elements=64, pitch_m=0.3e-3)
    t0, t1 = default_time_span(phantom, probe, PULSE, C)
    far = np.hypot(0.045 / 2 + probe.aperture_m / 2, 0.040)
    assert t0 == 0.0
    assert t1 > 2 * far / C
