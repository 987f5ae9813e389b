import math

import numpy as np
import pytest

from polarscl.channel import (
    ChannelFrame,
    awgn_add,
    bpsk_modulate,
    channel_llr,
    frame_rng,
    generate_frames,
    noise_sigma,
)
from polarscl.core import PolarCode, polar_transform
from polarscl.crc import crc_check


def test_bpsk_mapping():
    assert bpsk_modulate([0, 1, 1, 0]).tolist() == [1.0, -1.0, -1.0, 1.0]


def test_noise_sigma_examples():
    # rate 1/2 at 0 dB: sigma^2 = 1
    assert noise_sigma(0.0, 0.5) == pytest.approx(1.0)
    assert noise_sigma(10 * math.log10(2), 0.5) == pytest.approx(math.sqrt(0.5))
    assert noise_sigma(math.inf, 0.5) == 0.0
    with pytest.raises(ValueError):
        noise_sigma(1.0, 0.0)


def test_noise_variance():
    frame = awgn_add(np.zeros(10 ** 6), 3.0, 427 / 512, seed=7)
    target = 1 / (2 * (427 / 512) * 10 ** 0.3)
    assert abs(frame.symbols.var() / target - 1) < 0.01
    assert abs(frame.symbols.mean()) < 4 * math.sqrt(target / 10 ** 6)


def test_awgn_deterministic():
    a = awgn_add(np.ones(100), 2.0, 0.5, seed=3).symbols
    b = awgn_add(np.ones(100), 2.0, 0.5, seed=np.random.default_rng(3)).symbols
    assert np.array_equal(a, b)


def test_noiseless():
    frame = awgn_add(bpsk_modulate([0, 1]), math.inf, 0.5)
    assert frame.noise_sigma == 0.0
    assert channel_llr(frame).tolist() == [2.0, -2.0]


def test_llr_example():
    frame = ChannelFrame(np.array([0.5, -1.0]), 0.0, math.sqrt(0.5))
    np.testing.assert_allclose(channel_llr(frame), [2.0, -4.0])


def test_frame_rng_is_per_frame():
    a = frame_rng(5, 10).standard_normal(4)
    assert np.array_equal(a, frame_rng(5, 10).standard_normal(4))
    assert not np.array_equal(a, frame_rng(5, 11).standard_normal(4))
    assert not np.array_equal(a, frame_rng(6, 10).standard_normal(4))


def test_generate_frames_slices_agree():
    code = PolarCode.construct(64, 40, crc_len=8)
    whole = generate_frames(code, 2.0, seed=9, start=0, count=20)
    tail = generate_frames(code, 2.0, seed=9, start=12, count=8)
    assert np.array_equal(whole.llrs[12:], tail.llrs)
    assert np.array_equal(whole.payload[12:], tail.payload)
    assert whole.payload.shape == (20, 32)


def test_generate_frames_codewords_valid():
    code = PolarCode.construct(64, 40, crc_len=8)
    batch = generate_frames(code, 2.0, seed=1, start=0, count=50)
    info = batch.codewords[:, code.info_positions]
    assert np.array_equal(info[:, :32], batch.payload)
    assert crc_check(info, 8).all()
    assert not polar_transform(batch.codewords)[:, code.frozen_mask].any()
