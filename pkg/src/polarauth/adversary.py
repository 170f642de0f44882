"""Eavesdropper and spoofer procedures with their closed-form error models.

The eavesdropper faces two obstacles, measured here both analytically and by
Monte Carlo: locating which positions carry the tag (per-position polarity
comparison, whose error floor is set by tag bits that agree with the message
they replaced), and recovering the tag bits through the right inverse of the
generator's frozen rows, which accumulates noise with covariance
(sigma_E^2 / 4) (G_F G_F^T)^{-1}.

The spoofer, lacking the key, draws its own positions and tag; the overlap
of its position set with the legitimate one has mean n_e^2 / n, so the
normalized symmetric difference concentrates at 1 - n_e / n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import keyed, polar, protocol
from .bounds import qfunc
from .keyed import SecretKey


@dataclass
class PositionClassification:
    """Eve's per-position tag/message verdicts for a batch of frames."""

    decided_tag: np.ndarray  # bool (B, n): True where Eve declares "tag"

    def score(self, tag_mask: np.ndarray) -> "PositionScore":
        """Score against the ground-truth tag mask (harness only)."""
        tag_mask = np.broadcast_to(np.asarray(tag_mask, dtype=bool), self.decided_tag.shape)
        false_alarms = self.decided_tag & ~tag_mask
        missed = ~self.decided_tag & tag_mask
        errors = false_alarms | missed
        return PositionScore(
            errors=errors,
            n_false_alarm=int(false_alarms.sum()),
            n_missed=int(missed.sum()),
            n_positions=int(errors.size),
            p_err=float(errors.mean()),
            p_all_correct=float((~errors).all(axis=-1).mean()),
        )


@dataclass
class PositionScore:
    errors: np.ndarray
    n_false_alarm: int
    n_missed: int
    n_positions: int
    p_err: float
    p_all_correct: float


def eve_classify_positions(y_eve: np.ndarray, s_o_known: np.ndarray) -> PositionClassification:
    """Declare position i a tag position iff the received polarity disagrees
    with the known message codeword's polarity there."""
    y = np.atleast_2d(np.asarray(y_eve, dtype=np.float64))
    polarity = 1.0 - 2.0 * np.atleast_2d(np.asarray(s_o_known, dtype=np.float64))
    return PositionClassification(decided_tag=(y * polarity) < 0)


def analytic_position_errors(sigma_e: float, n: int, n_e: int, p_neq: float = 0.5):
    """Closed-form per-position classification errors for Eve.

    Returns (p_fa, p_md1, p_md2, p_err, p_err_asy, p_pcc):
      p_fa   : message position flipped by noise, Q(1/sigma_e);
      p_md1  : tag differs from message but noise flips it back, Q(1/sigma_e);
      p_md2  : tag equals the message bit and noise leaves it, Q(-1/sigma_e);
      p_err  : position-averaged error with P(tag position) = n_e / n;
      p_err_asy : high-SNR floor p_neq * n_e / n;
      p_pcc  : probability all n positions classify correctly, (1-p_err)^n.
    """
    if sigma_e <= 0:
        raise ValueError("sigma_e must be positive")
    if not 0.0 <= p_neq <= 1.0:
        raise ValueError("p_neq must lie in [0, 1]")
    p_fa = qfunc(1.0 / sigma_e)
    p_md1 = p_fa
    p_md2 = qfunc(-1.0 / sigma_e)
    ratio = n_e / n
    p_err = (1.0 - ratio) * p_fa + ratio * (p_neq * p_md1 + (1.0 - p_neq) * p_md2)
    p_err_asy = p_neq * ratio
    p_pcc = (1.0 - p_err) ** n
    return p_fa, p_md1, p_md2, p_err, p_err_asy, p_pcc


@dataclass
class TagEstimate:
    """Eve's linear estimate of the tag bits and its noise model."""

    t_hat_soft: np.ndarray
    accumulated_noise_cov: np.ndarray
    noise_powers: np.ndarray

    def hard_bits(self) -> np.ndarray:
        return (np.round(self.t_hat_soft).astype(np.int64) % 2).astype(np.uint8)


def tag_noise_covariance(gen: polar.GeneratorView, sigma_e: float) -> np.ndarray:
    """Covariance (sigma_E^2 / 4) (G_F G_F^T)^{-1} of Eve's estimation noise."""
    g_f = gen.g_rows("frozen").astype(np.float64)
    gram = g_f @ g_f.T
    return (sigma_e**2 / 4.0) * np.linalg.inv(gram)


def eve_estimate_raw_tag(
    y_eve_at_pos: np.ndarray,
    gen: polar.GeneratorView,
    anchor_known: np.ndarray,
    sigma_e: float,
) -> TagEstimate:
    """Linear tag estimation given ground-truth positions and anchor.

    Maps the received reals to the coding domain, (1 - y) / 2, subtracts the
    known information contribution over the reals, and applies the frozen-row
    right inverse.  The clean part reduces to the tag modulo 2, so at zero
    noise ``hard_bits()`` recovers it exactly; noise enters as w_tilde = -w/2
    pushed through M_R.
    """
    y = np.atleast_2d(np.asarray(y_eve_at_pos, dtype=np.float64))
    anchor = np.atleast_2d(np.asarray(anchor_known, dtype=np.float64))
    m_r = polar.frozen_pseudo_inverse(gen)
    coding_domain = (1.0 - y) / 2.0
    residual = coding_domain - anchor @ gen.g_rows("info").astype(np.float64)
    t_soft = residual @ m_r
    cov = tag_noise_covariance(gen, sigma_e)
    return TagEstimate(
        t_hat_soft=t_soft if np.ndim(y_eve_at_pos) > 1 else t_soft[0],
        accumulated_noise_cov=cov,
        noise_powers=np.diag(cov).copy(),
    )


def noise_power_report(gen: polar.GeneratorView, sigma_e: float):
    """(max, avg, raw) noise powers of the tag-estimation attack.

    max/avg are over the diagonal of the accumulated-noise covariance; raw is
    the per-dimension receiver noise power sigma_E^2 / 4 before accumulation.
    """
    powers = np.diag(tag_noise_covariance(gen, sigma_e))
    return float(powers.max()), float(powers.mean()), sigma_e**2 / 4.0


def spoof_frames(params: protocol.ProtocolParams, eve_key: SecretKey, msgs: np.ndarray) -> dict:
    """Eve's forged frames: the full transmit pipeline under her own key."""
    eve_params = protocol.ProtocolParams(
        params.n, params.k_o, params.n_e, params.k_e, eve_key,
        params.inner_spec, params.outer_spec,
        params.list_len_inner, params.list_len_outer,
    )
    return protocol.tx_build_frames(eve_params, msgs)


def spoof_frame(params: protocol.ProtocolParams, eve_key: SecretKey, msg: np.ndarray) -> np.ndarray:
    """Single forged frame (tagged bits) for feeding to the receiver."""
    return spoof_frames(params, eve_key, np.asarray(msg, dtype=np.uint8)[None, :])["tagged"][0]


def symmetric_difference_stats(n: int, n_e: int, trials: int, rng: np.random.Generator,
                               key_draws: int = 32):
    """Monte Carlo overlap of position sets drawn under independent keys.

    Each trial draws a random message; trials are spread over ``key_draws``
    independent key pairs.  Measures |A_B intersect A_E| per trial and
    returns (mean_overlap, p_sd) where p_sd is the mean normalized symmetric
    difference |A_B delta A_E| / (2 n_e).
    """
    overlaps = []
    chunk = max(1, trials // key_draws)
    done = 0
    while done < trials:
        size = min(chunk, trials - done)
        msgs = rng.integers(0, 2, size=(size, n), dtype=np.uint8)
        key_b = SecretKey(rng.bytes(keyed.KEY_BYTES))
        key_e = SecretKey(rng.bytes(keyed.KEY_BYTES))
        pos_b = keyed.gen_pos_batch(msgs, key_b, n_e)
        pos_e = keyed.gen_pos_batch(msgs, key_e, n_e)
        member_b = np.zeros((size, n), dtype=bool)
        np.put_along_axis(member_b, pos_b, True, axis=1)
        overlaps.append(np.take_along_axis(member_b, pos_e, axis=1).sum(axis=1))
        done += size
    overlap = np.concatenate(overlaps)
    mean_overlap = float(overlap.mean())
    p_sd = float(1.0 - mean_overlap / n_e)
    return mean_overlap, p_sd
