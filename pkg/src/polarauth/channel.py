"""BPSK modulation, block fading, multiuser interference, and receiver noise.

Real-baseband convention: symbols are +/-1, noise is real Gaussian with
variance sigma^2 per dimension, and SNR = 1/sigma^2 (linear).  Residual
interference from K unintended users is a sum of K independent BPSK streams
with a common weight chosen so that total interference power over signal
power equals 10^(-SINR/10).

Randomness is counter based: every consumer derives an independent Philox
stream from (master seed, labels...), so results do not depend on worker
count or evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .keyed import _U64, _mix


def stream(master_seed: int, *labels) -> np.random.Generator:
    """Independent counter-based generator for (master_seed, labels...).

    Labels may be strings or integers; they are hashed into the Philox key,
    so streams for distinct label tuples never collide in practice.
    """
    words = [np.uint64(master_seed & 0xFFFFFFFFFFFFFFFF)]
    for lab in labels:
        if isinstance(lab, str):
            data = lab.encode()
            for off in range(0, len(data), 8):
                words.append(np.uint64(int.from_bytes(data[off : off + 8], "little")))
        else:
            words.append(np.uint64(int(lab) & 0xFFFFFFFFFFFFFFFF))
    state = np.uint64(0x243F6A8885A308D3)
    with np.errstate(over="ignore"):
        for i, w in enumerate(words):
            state = _mix(state ^ w ^ (_U64(i + 1) * _U64(0x9E3779B97F4A7C15)))
        key = np.array([state, _mix(state)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass
class ChannelConfig:
    """Link operating point.

    snr_db: 10 log10(1/sigma^2) at the intended receiver.
    sinr_db: signal power over total residual interference power; None means
        no interference.
    k_users: number of unintended interfering users K.
    fading: "none" (unit gain) or "rayleigh-block" (one complex CN(0,1)
        coefficient per frame, perfectly pre-equalized at the transmitter).
    eve_snr_db: eavesdropper SNR; defaults to snr_db.
    """

    snr_db: float
    sinr_db: float | None = None
    k_users: int = 0
    fading: str = "none"
    eve_snr_db: float | None = None

    def __post_init__(self):
        if self.k_users < 0:
            raise ValueError("k_users must be >= 0")
        if self.sinr_db is not None and self.k_users < 1:
            raise ValueError("interference configured (sinr_db set) but k_users < 1")
        if self.fading not in ("none", "rayleigh-block"):
            raise ValueError(f"unknown fading model {self.fading!r}")

    @property
    def noise_var(self) -> float:
        return 10.0 ** (-self.snr_db / 10.0)

    @property
    def eve_noise_var(self) -> float:
        snr = self.snr_db if self.eve_snr_db is None else self.eve_snr_db
        return 10.0 ** (-snr / 10.0)

    @property
    def interference_power(self) -> float:
        if self.sinr_db is None:
            return 0.0
        return 10.0 ** (-self.sinr_db / 10.0)


@dataclass
class ChannelDraw:
    """One realization of fading, interference, and noise."""

    h: np.ndarray
    interference: np.ndarray
    noise: np.ndarray
    received: np.ndarray


def modulate_bpsk(bits: np.ndarray) -> np.ndarray:
    """Map bits to unit-energy antipodal symbols: 0 -> +1, 1 -> -1."""
    return 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)


def demodulate_hard(symbols: np.ndarray) -> np.ndarray:
    """Hard decision back to bits; exactly inverts modulate_bpsk at zero noise."""
    return (np.asarray(symbols) < 0).astype(np.uint8)


def apply_channel(cfg: ChannelConfig, x_mod: np.ndarray, rng: np.random.Generator) -> ChannelDraw:
    """Propagate modulated frames to the intended receiver.

    With perfect pre-equalization the effective signal term is x_mod itself;
    the fading draw h is recorded but cancelled.  Interference adds K scaled
    BPSK streams; noise is white Gaussian with variance cfg.noise_var.
    """
    x = np.atleast_2d(np.asarray(x_mod, dtype=np.float64))
    b, n = x.shape
    if cfg.fading == "rayleigh-block":
        h = (rng.standard_normal(b) + 1j * rng.standard_normal(b)) / np.sqrt(2.0)
    else:
        h = np.ones(b, dtype=complex)
    p_i = cfg.interference_power
    if p_i > 0.0:
        alpha = np.sqrt(p_i / cfg.k_users)
        symbols = 1.0 - 2.0 * rng.integers(0, 2, size=(b, cfg.k_users, n))
        interference = alpha * symbols.sum(axis=1)
    else:
        interference = np.zeros((b, n))
    noise = rng.normal(0.0, np.sqrt(cfg.noise_var), size=(b, n))
    received = x + interference + noise
    if np.ndim(x_mod) == 1:
        return ChannelDraw(h[0], interference[0], noise[0], received[0])
    return ChannelDraw(h, interference, noise, received)


def eve_observe(cfg: ChannelConfig, x_mod: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Eavesdropper observation: signal plus white noise of variance
    cfg.eve_noise_var, interference perfectly removed (worst case)."""
    x = np.asarray(x_mod, dtype=np.float64)
    return x + rng.normal(0.0, np.sqrt(cfg.eve_noise_var), size=x.shape)
