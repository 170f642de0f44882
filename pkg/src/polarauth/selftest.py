"""Fast built-in invariant checks, runnable as ``polarauth selftest``.

These duplicate the most load-bearing assertions from the test suite in a
dependency-free form so a deployed copy can verify itself.
"""

from __future__ import annotations

import numpy as np

from . import adversary, bounds, channel, keyed, polar, protocol


def _check_encode_linearity(rng):
    spec = polar.construct_ga(64, 32, 1.0)
    u = rng.integers(0, 2, size=(32, 64), dtype=np.uint8)
    v = rng.integers(0, 2, size=(32, 64), dtype=np.uint8)
    lhs = polar.polar_transform(u ^ v)
    rhs = polar.polar_transform(u) ^ polar.polar_transform(v)
    assert np.array_equal(lhs, rhs), "encode is not GF(2)-linear"


def _check_roundtrip(rng):
    for n in (2, 16, 128):
        spec = polar.construct_ga(n, max(1, n // 2), 1.0)
        u = rng.integers(0, 2, size=(16, n), dtype=np.uint8)
        llr = polar.LLR_CAP * (1.0 - 2.0 * polar.polar_transform(u))
        u_hat, _ = polar.decode_sc_batch(spec, llr, u[:, spec.frozen_set])
        assert np.array_equal(u_hat, u), f"noiseless SC round trip failed at n={n}"


def _check_sc_scl_degeneration(rng):
    spec = polar.construct_ga(64, 28, 1.0)
    u = rng.integers(0, 2, size=(64, 64), dtype=np.uint8)
    y = 1.0 - 2.0 * polar.polar_transform(u) + rng.normal(0, 1.0, size=(64, 64))
    llr = np.clip(2.0 * y, -polar.LLR_CAP, polar.LLR_CAP)
    fv = u[:, spec.frozen_set]
    u_sc, _ = polar.decode_sc_batch(spec, llr, fv)
    u_l1, _, _ = polar.decode_scl_batch(spec, llr, fv, 1)
    assert np.array_equal(u_sc, u_l1), "SCL at L=1 deviates from SC"


def _check_pseudo_inverse(rng):
    for n, k in ((8, 4), (32, 8), (64, 32)):
        gen = polar.GeneratorView(polar.construct_ga(n, k, 1.0))
        m_r = polar.frozen_pseudo_inverse(gen)
        g_f = gen.g_rows("frozen").astype(float)
        residual = np.abs(g_f @ m_r - np.eye(n - k)).max()
        assert residual < 1e-9, f"pseudo-inverse residual {residual}"


def _check_prf(rng):
    key = keyed.SecretKey.from_int(0xDEADBEEF)
    msg = rng.integers(0, 2, size=256, dtype=np.uint8)
    a = keyed.gen_pos(msg, key, 32)
    b = keyed.gen_pos(msg, key, 32)
    assert np.array_equal(a.indices, b.indices), "gen_pos not deterministic"
    t1 = keyed.gen_tag(msg, key, 64)
    t2 = keyed.gen_tag(msg, key, 64)
    assert np.array_equal(t1, t2), "gen_tag not deterministic"
    full = keyed.gen_pos(msg, key, 256)
    assert np.array_equal(full.indices, np.arange(256)), "full draw must be [0, n)"


def _check_channel_power(rng):
    cfg = channel.ChannelConfig(snr_db=0.0, sinr_db=0.0, k_users=8)
    x = channel.modulate_bpsk(rng.integers(0, 2, size=(400, 256)))
    draw = channel.apply_channel(cfg, x, rng)
    p_sig = np.mean(x**2)
    p_int = np.mean(draw.interference**2)
    assert abs(p_int / p_sig - 1.0) < 0.05, "interference power off at SINR 0 dB"
    assert abs(np.var(draw.noise) - 1.0) < 0.05, "noise variance off at SNR 0 dB"


def _check_qfunc(rng):
    assert abs(bounds.qfunc(0.0) - 0.5) < 1e-12
    x = rng.normal(0, 2, size=50)
    assert np.allclose(bounds.qfunc(-x) + bounds.qfunc(x), 1.0, atol=1e-12)
    xs = np.sort(np.abs(x))
    assert np.all(np.diff(bounds.qfunc(xs)) <= 1e-15), "Q not decreasing"


def _check_z_recursion(rng):
    for z in rng.uniform(0, 1, size=20):
        z_minus = 2 * z - z * z
        z_plus = z * z
        assert 0.0 <= z_plus <= z <= z_minus <= 1.0, "Z ordering violated"


def _check_protocol_noiseless(rng):
    key = keyed.SecretKey.from_int(7)
    params = protocol.make_params(256, 128, 16, 4, key)
    msg = rng.integers(0, 2, size=128, dtype=np.uint8)
    frame = protocol.tx_build_frame(params, msg)
    frame.validate(params)
    dec = protocol.rx_authenticate(params, channel.modulate_bpsk(frame.tagged), 1e-6)
    assert dec.accept and dec.delta == params.k_e, "noiseless frame rejected"


def _check_spoof_stats(rng):
    overlap, p_sd = adversary.symmetric_difference_stats(256, 128, 2000, rng)
    assert abs(p_sd - 0.5) < 0.03, f"P_SD {p_sd} far from 0.5"


CHECKS = [
    _check_encode_linearity,
    _check_roundtrip,
    _check_sc_scl_degeneration,
    _check_pseudo_inverse,
    _check_prf,
    _check_channel_power,
    _check_qfunc,
    _check_z_recursion,
    _check_protocol_noiseless,
    _check_spoof_stats,
]


def run_all(verbose: bool = False) -> int:
    rng = np.random.default_rng(0xC0FFEE)
    failures = 0
    for check in CHECKS:
        name = check.__name__.lstrip("_")
        try:
            check(rng)
        except AssertionError as err:
            failures += 1
            print(f"FAIL {name}: {err}")
        else:
            if verbose:
                print(f"ok   {name}")
    if failures:
        print(f"{failures} selftest check(s) failed")
    elif verbose:
        print(f"all {len(CHECKS)} selftest checks passed")
    return failures
