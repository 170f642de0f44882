"""Transmit/receive pipeline tests, including the uncoded baseline."""

import numpy as np
import pytest

from polarauth import channel, keyed, polar, protocol
from polarauth.keyed import SecretKey
from polarauth.protocol import (
    ProtocolError,
    ProtocolParams,
    baseline_rx_batch,
    baseline_threshold,
    baseline_tx_build,
    extract,
    llr_effective,
    make_params,
    rx_authenticate,
    rx_authenticate_batch,
    splice,
    tx_build_frame,
    tx_build_frames,
)

KEY = SecretKey.from_int(0x5EC2E7)


def small_params(n=256, k_o=128, n_e=16, k_e=4, **kw):
    return make_params(n, k_o, n_e, k_e, KEY, **kw)


def test_param_validation():
    with pytest.raises(ProtocolError):
        make_params(256, 128, 16, 16, KEY)  # no frozen bits left
    with pytest.raises(ProtocolError):
        make_params(128, 64, 256, 16, KEY)  # tag longer than message
    with pytest.raises(ProtocolError):
        make_params(256, 512, 16, 4, KEY)  # k_o too large
    inner = polar.construct_ga(16, 4, 1.0)
    outer = polar.construct_bhattacharyya(256, 128, 0.5)
    with pytest.raises(ProtocolError):
        ProtocolParams(256, 128, 32, 4, KEY, inner, outer)  # inner mismatch


def test_splice_and_extract_micro_example():
    """Worked insertion example: positions {0,2,3,5,8,9,10,11} of a 12-bit
    frame carry the code bits, the rest stay message bits."""
    pos = np.array([0, 2, 3, 5, 8, 9, 10, 11])
    s_o = np.arange(100, 112, dtype=np.int64)  # distinguishable sentinels
    t_e = np.arange(200, 208, dtype=np.int64)
    tagged = splice(s_o, pos, t_e)
    assert list(tagged) == [200, 101, 201, 202, 104, 203, 106, 107, 204, 205, 206, 207]
    anchor = s_o[pos[:4]]
    assert list(anchor) == [100, 102, 103, 105]
    assert np.array_equal(extract(tagged, pos), t_e)
    comp = np.setdiff1d(np.arange(12), pos)
    assert np.array_equal(tagged[comp], s_o[comp])


def test_frame_invariants_hold():
    params = small_params()
    rng = np.random.default_rng(0)
    for _ in range(5):
        frame = tx_build_frame(params, rng.integers(0, 2, 128, dtype=np.uint8))
        frame.validate(params)
        assert len(frame.idx) == params.n_e
        assert len(frame.raw_tag) == params.tag_len


def test_frame_debug_record():
    params = small_params()
    frame = tx_build_frame(params, np.zeros(128, dtype=np.uint8))
    rec = frame.debug_record()
    assert rec["positions"] == [int(i) for i in frame.idx.indices]
    assert len(bytes.fromhex(rec["tagged"])) == params.n // 8
    assert len(bytes.fromhex(rec["tag_codeword"])) == params.n_e // 8
    unpacked = np.unpackbits(
        np.frombuffer(bytes.fromhex(rec["tagged"]), np.uint8), bitorder="little"
    )[: params.n]
    assert np.array_equal(unpacked, frame.tagged)


def test_batch_tx_matches_single():
    params = small_params()
    rng = np.random.default_rng(1)
    msgs = rng.integers(0, 2, size=(8, 128), dtype=np.uint8)
    batch = tx_build_frames(params, msgs)
    for i in range(8):
        frame = tx_build_frame(params, msgs[i])
        assert np.array_equal(batch["tagged"][i], frame.tagged)
        assert np.array_equal(batch["pos"][i], frame.idx.indices)


def test_noiseless_frame_accepts():
    params = small_params()
    rng = np.random.default_rng(2)
    frame = tx_build_frame(params, rng.integers(0, 2, 128, dtype=np.uint8))
    dec = rx_authenticate(params, channel.modulate_bpsk(frame.tagged), 1e-6)
    assert dec.accept
    assert dec.delta == params.k_e
    assert np.array_equal(dec.s_hat, frame.anchor)
    assert np.array_equal(dec.s_re, frame.anchor)


def test_end_to_end_consistency_random_keys():
    """Zero noise, zero interference: accept and recover the message
    codeword bit-exactly, across random message/key pairs (tag short
    relative to the message so the outer decoder absorbs it)."""
    rng = np.random.default_rng(3)
    accepted = 0
    total = 0
    for trial in range(4):
        key = SecretKey(rng.bytes(16))
        params = make_params(512, 256, 16, 4, key)
        msgs = rng.integers(0, 2, size=(250, 256), dtype=np.uint8)
        tx = tx_build_frames(params, msgs)
        x = channel.modulate_bpsk(tx["tagged"])
        s_o_hat = protocol.recover_message_codeword(params, x, 1e-6)
        assert np.array_equal(s_o_hat, tx["s_o"])
        _, acc = rx_authenticate_batch(params, x, 1e-6)
        accepted += int(acc.sum())
        total += 250
    assert accepted == total == 1000


def test_delta_is_anchor_agreement_count():
    params = small_params()
    rng = np.random.default_rng(4)
    msgs = rng.integers(0, 2, size=(50, 128), dtype=np.uint8)
    tx = tx_build_frames(params, msgs)
    cfg = channel.ChannelConfig(snr_db=-2.0)
    draw = channel.apply_channel(cfg, channel.modulate_bpsk(tx["tagged"]), rng)
    for i in range(50):
        dec = rx_authenticate(params, draw.received[i], cfg.noise_var)
        assert dec.delta == params.k_e - int(np.sum(dec.s_re != dec.s_hat))
        assert dec.accept == (dec.delta == params.k_e)


def test_key_bit_flip_changes_positions():
    rng = np.random.default_rng(5)
    params = small_params(n_e=64, k_e=16)
    msgs = rng.integers(0, 2, size=(25, 128), dtype=np.uint8)
    s_o = protocol.outer_encode(params, msgs)
    base = keyed.gen_pos_batch(s_o, KEY, 64)
    changed = 0
    trials = 0
    for bit in range(0, 128, 17):
        flipped = bytearray(KEY.value)
        flipped[bit // 8] ^= 1 << (bit % 8)
        alt = keyed.gen_pos_batch(s_o, SecretKey(bytes(flipped)), 64)
        changed += int((alt != base).any(axis=1).sum())
        trials += len(msgs)
    assert changed / trials >= 0.99


def test_wrong_key_acceptance_is_chance_level():
    """A receiver holding the wrong key accepts legitimate frames at roughly
    the 2^-k_e anchor-collision rate."""
    params = make_params(256, 128, 128, 4, KEY, list_len_outer=1)
    wrong = ProtocolParams(
        256, 128, 128, 4, SecretKey.from_int(0xBAD), params.inner_spec,
        params.outer_spec, params.list_len_inner, 1,
    )
    rng = np.random.default_rng(6)
    cfg = channel.ChannelConfig(snr_db=10.0)
    accepted = 0
    trials = 30_000
    done = 0
    while done < trials:
        bsz = min(3000, trials - done)
        msgs = rng.integers(0, 2, size=(bsz, 128), dtype=np.uint8)
        tx = tx_build_frames(params, msgs)
        draw = channel.apply_channel(cfg, channel.modulate_bpsk(tx["tagged"]), rng)
        _, acc = rx_authenticate_batch(wrong, draw.received, cfg.noise_var)
        accepted += int(acc.sum())
        done += bsz
    rate = accepted / trials
    assert abs(rate - 2.0**-4) < 0.008


def test_untagged_frame_rejected():
    """Plain message codewords at high SNR are rejected at least at the
    1 - 2^-k_e chance level."""
    params = small_params(n_e=128, k_e=4)
    rng = np.random.default_rng(7)
    cfg = channel.ChannelConfig(snr_db=10.0)
    accepted = 0
    trials = 5000
    done = 0
    while done < trials:
        bsz = min(1000, trials - done)
        msgs = rng.integers(0, 2, size=(bsz, 128), dtype=np.uint8)
        s_o = protocol.outer_encode(params, msgs)
        draw = channel.apply_channel(cfg, channel.modulate_bpsk(s_o), rng)
        _, acc = rx_authenticate_batch(params, draw.received, cfg.noise_var)
        accepted += int(acc.sum())
        done += bsz
    assert accepted / trials <= 2.0**-4 + 0.02


def test_llr_effective_values():
    assert llr_effective(0.0, 1.0, 0.0) == 0.0
    assert llr_effective(1.0, 0.5, 0.0) == 4.0
    assert llr_effective(1.0, 1.0, 1.0) == 1.0
    with pytest.raises(ProtocolError):
        llr_effective(1.0, 0.0)


def test_threshold_override_for_roc():
    params = small_params()
    rng = np.random.default_rng(8)
    frame = tx_build_frame(params, rng.integers(0, 2, 128, dtype=np.uint8))
    x = channel.modulate_bpsk(frame.tagged)
    dec = rx_authenticate(params, x, 1e-6, threshold=2)
    assert dec.accept and dec.delta == params.k_e


# ---------------------------------------------------------------------------
# uncoded baseline
# ---------------------------------------------------------------------------

def test_baseline_noiseless_full_correlation():
    params = small_params(n_e=32, k_e=8)
    rng = np.random.default_rng(9)
    msgs = rng.integers(0, 2, size=(10, 128), dtype=np.uint8)
    tx = baseline_tx_build(params, msgs)
    x = channel.modulate_bpsk(tx["tagged"])
    delta, acc = baseline_rx_batch(params, x, threshold=10.0, oracle_codeword=tx["s_o"])
    assert np.all(delta == params.n_e)
    assert np.all(acc)


def test_baseline_h0_correlation_is_centered():
    """Against untagged frames the expected correlation is zero."""
    params = small_params(n_e=64, k_e=16)
    rng = np.random.default_rng(10)
    msgs = rng.integers(0, 2, size=(4000, 128), dtype=np.uint8)
    s_o = protocol.outer_encode(params, msgs)
    x = channel.modulate_bpsk(s_o)
    delta, _ = baseline_rx_batch(params, x, threshold=0.0, oracle_codeword=s_o)
    assert abs(delta.mean()) < 3.0 * np.sqrt(64 / 4000) * 2


def test_baseline_power_parity():
    """Both schemes overwrite exactly n_e positions of the message."""
    params = small_params(n_e=32, k_e=8)
    rng = np.random.default_rng(11)
    msgs = rng.integers(0, 2, size=(20, 128), dtype=np.uint8)
    prop = tx_build_frames(params, msgs)
    base = baseline_tx_build(params, msgs)
    for tx in (prop, base):
        overwritten = (tx["tagged"] != tx["s_o"]).sum(axis=1)
        touched = extract(
            np.ones_like(tx["tagged"]) * 0 + (tx["tagged"] != tx["s_o"]), tx["pos"]
        )
        assert np.all(overwritten == touched.sum(axis=1))
        assert np.array_equal(prop["pos"], base["pos"])
        assert tx["pos"].shape[1] == params.n_e


def test_baseline_threshold_modes():
    params = small_params(n_e=128, k_e=32)
    am = baseline_threshold(params, "anchor-matched")
    assert 60.0 < am < 80.0  # Qinv(2^-32) * sqrt(128)
    onepc = baseline_threshold(params, "pfa", pfa=0.01)
    assert 20.0 < onepc < 35.0
    with pytest.raises(ProtocolError):
        baseline_threshold(params, "pfa")
    with pytest.raises(ProtocolError):
        baseline_threshold(params, "quantile")
