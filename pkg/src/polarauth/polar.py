"""Polar code construction, encoding, and SC/SCL decoding.

All conventions are pinned so that golden vectors stay stable across
implementations and runs:

* generator ``G = F^{(x) n}`` with Arikan kernel ``F = [[1, 0], [1, 1]]`` in
  natural order (no bit-reversal permutation);
* index sets are 0-based and sorted ascending;
* LLR sign: positive favors bit 0; magnitudes saturate at ``LLR_CAP``;
* a leaf LLR of exactly 0 decides bit 0;
* on a final path-metric tie the lowest path index wins.

Frozen bits carry caller-supplied values (they are generally nonzero here),
so every decode entry point takes an explicit ``frozen_vals`` vector.
"""

from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass, field

import numpy as np

# Saturation magnitude for channel LLRs entering the decoder.  The internal
# f/g updates are written in overflow-stable forms, so no further clamping is
# applied inside the recursion and path metrics stay exact.
LLR_CAP = 40.0

# Gauss-Hermite order for the Gaussian-approximation phi function.  phi is
# evaluated exactly under the N(m, 2m) LLR model (no curve fit): the popular
# two-piece exponential/asymptotic fit overstates reliabilities at small mean
# LLRs, which breaks bound-versus-simulation dominance at low SNR.
_PHI_QUAD_ORDER = 96


class ConstructionError(ValueError):
    """Invalid polar code geometry or construction parameter."""


@dataclass
class PolarSpec:
    """A constructed polar code.

    Attributes
    ----------
    n : int
        Code length in symbols, a power of two.
    k : int
        Information length in symbols.
    info_set : ndarray
        Sorted 0-based indices of the information positions (length k).
    frozen_set : ndarray
        Sorted 0-based indices of the frozen positions (length n - k).
    reliabilities : ndarray
        Per-index score used for construction: GA mean LLRs (bigger is
        better) or Bhattacharyya parameters (smaller is better).
    method : str
        ``"ga"`` or ``"bhattacharyya"``.
    design_param : float
        Design noise variance (GA) or initial Z value (Bhattacharyya).
    """

    n: int
    k: int
    info_set: np.ndarray
    frozen_set: np.ndarray
    reliabilities: np.ndarray
    method: str
    design_param: float

    def __post_init__(self):
        _require_power_of_two(self.n)
        if not 1 <= self.k <= self.n:
            raise ConstructionError(f"k must be in [1, {self.n}], got {self.k}")
        for arr_name in ("info_set", "frozen_set", "reliabilities"):
            arr = np.asarray(getattr(self, arr_name))
            arr.setflags(write=False)
            object.__setattr__(self, arr_name, arr)
        union = np.union1d(self.info_set, self.frozen_set)
        if len(self.info_set) != self.k or len(union) != self.n:
            raise ConstructionError("info_set and frozen_set must partition [0, n)")

    @property
    def frozen_mask(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        mask[self.frozen_set] = True
        return mask


@dataclass
class SoftObservation:
    """Per-position channel LLRs, positive favoring bit 0.

    Entries are clamped to ``+/- LLR_CAP`` on construction so the decoder
    arithmetic never sees non-finite values.
    """

    llrs: np.ndarray

    def __post_init__(self):
        llrs = np.asarray(self.llrs, dtype=np.float64)
        if not np.all(np.isfinite(llrs)):
            llrs = np.nan_to_num(llrs, nan=0.0, posinf=LLR_CAP, neginf=-LLR_CAP)
        object.__setattr__(self, "llrs", np.clip(llrs, -LLR_CAP, LLR_CAP))

    @classmethod
    def from_channel(cls, received, noise_var, interference_power=0.0):
        """Build LLRs 2r / (sigma^2 + P_I) from channel reals."""
        scale = 2.0 / (noise_var + interference_power)
        return cls(np.asarray(received, dtype=np.float64) * scale)


def _require_power_of_two(n: int) -> None:
    if n < 1 or (n & (n - 1)) != 0:
        raise ConstructionError(f"code length must be a power of two, got {n}")


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------

_PHI_NODES, _PHI_WEIGHTS = np.polynomial.hermite.hermgauss(_PHI_QUAD_ORDER)
_PHI_LOG_WEIGHTS = np.log(_PHI_WEIGHTS) - 0.5 * np.log(np.pi)


def _log_phi(m: float) -> float:
    """log phi(m) with phi(m) = E[1 - tanh(L/2)] for L ~ N(m, 2m).

    1 - tanh(L/2) = 2 / (1 + e^L), summed in log space so the result stays
    exact down to phi values far below double-precision underflow of the
    direct expectation.
    """
    if m <= 0.0:
        return 0.0
    llr = m + 2.0 * np.sqrt(m) * _PHI_NODES
    # log(2 / (1 + e^L)) = log 2 - log(1 + e^L), stable on both tails
    log_terms = np.log(2.0) - np.logaddexp(0.0, llr)
    total = _PHI_LOG_WEIGHTS + log_terms
    peak = total.max()
    return float(peak + np.log(np.exp(total - peak).sum()))


def _log_phi_inverse(log_z: float) -> float:
    """Inverse of _log_phi by bisection on log m (phi is strictly
    decreasing)."""
    if log_z >= 0.0:
        return 0.0
    lo, hi = -60.0, np.log(max(8.0 * (-log_z) + 50.0, 20.0))
    for _ in range(120):
        mid = 0.5 * (lo + hi)
        if _log_phi(np.exp(mid)) > log_z:
            lo = mid
        else:
            hi = mid
    return float(np.exp(0.5 * (lo + hi)))


def _ga_minus(m: float) -> float:
    """Mean-LLR update of the degraded (f) branch."""
    if m <= 0.0:
        return 0.0
    log_z = _log_phi(m)
    # 1 - (1 - z)^2 = z * (2 - z), evaluated in log space for tiny z
    log_w = log_z + np.log(2.0 - np.exp(log_z))
    if log_w >= 0.0:
        return 0.0
    return _log_phi_inverse(log_w)


@functools.lru_cache(maxsize=256)
def construct_ga(n: int, k: int, design_sigma2: float) -> PolarSpec:
    """Construct a polar code by iterative Gaussian approximation.

    Tracks the mean LLR of every synthetic channel, seeded with
    ``2 / design_sigma2``, and selects the k indices with the largest mean
    (ties broken toward the lower index).  Results are cached; the returned
    spec is immutable and safe to share.
    """
    _require_power_of_two(n)
    if not 1 <= k <= n:
        raise ConstructionError(f"k must be in [1, {n}], got {k}")
    if design_sigma2 <= 0:
        raise ConstructionError("design_sigma2 must be positive")
    means = np.array([2.0 / design_sigma2])
    while len(means) < n:
        nxt = np.empty(2 * len(means))
        nxt[0::2] = [_ga_minus(m) for m in means]
        nxt[1::2] = 2.0 * means
        means = nxt
    order = np.argsort(-means, kind="stable")
    info = np.sort(order[:k])
    frozen = np.sort(order[k:])
    return PolarSpec(n, k, info, frozen, means, "ga", float(design_sigma2))


def z_polarize(z_init: float, n: int) -> np.ndarray:
    """Per-index Bhattacharyya parameters after log2(n) polarization steps.

    Uses the upper-bound recursion Z- = 2Z - Z^2, Z+ = Z^2.
    """
    _require_power_of_two(n)
    if not 0.0 <= z_init <= 1.0:
        raise ConstructionError(f"z_init must lie in [0, 1], got {z_init}")
    z = np.array([float(z_init)])
    while len(z) < n:
        nxt = np.empty(2 * len(z))
        nxt[0::2] = 2.0 * z - z * z
        nxt[1::2] = z * z
        z = nxt
    return z


@functools.lru_cache(maxsize=256)
def construct_bhattacharyya(n: int, k: int, z_init: float) -> PolarSpec:
    """Construct a polar code from iterated Bhattacharyya parameters.

    Selects the k indices with the smallest Z (ties toward the lower index).
    Results are cached; the returned spec is immutable and safe to share.
    """
    if not 1 <= k <= n:
        raise ConstructionError(f"k must be in [1, {n}], got {k}")
    z = z_polarize(z_init, n)
    order = np.argsort(z, kind="stable")
    info = np.sort(order[:k])
    frozen = np.sort(order[k:])
    return PolarSpec(n, k, info, frozen, z, "bhattacharyya", float(z_init))


# ---------------------------------------------------------------------------
# Encoding
# ---------------------------------------------------------------------------

def polar_transform(u: np.ndarray) -> np.ndarray:
    """Apply u G over GF(2), G = F^{(x) n} in natural order.

    Accepts a single vector (n,) or a batch (B, n) of uint8 bits.
    """
    x = np.atleast_2d(np.asarray(u, dtype=np.uint8)).copy()
    b, n = x.shape
    _require_power_of_two(n)
    size = n
    while size > 1:
        view = x.reshape(b, -1, size)
        view[:, :, : size // 2] ^= view[:, :, size // 2 :]
        size //= 2
    x = x.reshape(b, n)
    return x[0] if np.ndim(u) == 1 else x


def encode(spec: PolarSpec, u: np.ndarray) -> np.ndarray:
    """Encode a full-length input vector (information and frozen values
    already placed) into a codeword."""
    u = np.asarray(u, dtype=np.uint8)
    if u.shape[-1] != spec.n:
        raise ValueError(f"input length {u.shape[-1]} != code length {spec.n}")
    return polar_transform(u)


def assemble_input(spec: PolarSpec, info_bits: np.ndarray, frozen_vals: np.ndarray) -> np.ndarray:
    """Scatter information bits and frozen values into a full-length input."""
    info_bits = np.atleast_2d(np.asarray(info_bits, dtype=np.uint8))
    frozen_vals = np.atleast_2d(np.asarray(frozen_vals, dtype=np.uint8))
    if info_bits.shape[-1] != spec.k:
        raise ValueError(f"expected {spec.k} information bits, got {info_bits.shape[-1]}")
    if frozen_vals.shape[-1] != spec.n - spec.k:
        raise ValueError(
            f"expected {spec.n - spec.k} frozen values, got {frozen_vals.shape[-1]}"
        )
    b = max(info_bits.shape[0], frozen_vals.shape[0])
    u = np.zeros((b, spec.n), dtype=np.uint8)
    u[:, spec.info_set] = info_bits
    u[:, spec.frozen_set] = frozen_vals
    return u


def generator_matrix(n: int) -> np.ndarray:
    """Full generator matrix, row d = encoding of the unit vector e_d."""
    return polar_transform(np.eye(n, dtype=np.uint8))


@dataclass
class GeneratorView:
    """Row-submatrix view of the generator for a given PolarSpec.

    ``g_rows("info")`` / ``g_rows("frozen")`` return the rows of G indexed
    by the information / frozen sets.  The frozen submatrix is full row
    rank over the rationals (a structural property of G, asserted here).
    """

    spec: PolarSpec
    matrix: np.ndarray = field(init=False)

    def __post_init__(self):
        g = generator_matrix(self.spec.n)
        g.setflags(write=False)
        self.matrix = g
        g_f = self.g_rows("frozen").astype(np.float64)
        if g_f.size and np.linalg.matrix_rank(g_f) != g_f.shape[0]:
            raise np.linalg.LinAlgError(
                "frozen-row submatrix lost full row rank; the polar generator "
                "should make this impossible"
            )

    def g_rows(self, which: str) -> np.ndarray:
        if which == "info":
            return self.matrix[self.spec.info_set]
        if which == "frozen":
            return self.matrix[self.spec.frozen_set]
        raise ValueError(f"unknown row set {which!r}")


def frozen_pseudo_inverse(gen: GeneratorView) -> np.ndarray:
    """Right inverse M_R of the frozen-row submatrix over the reals.

    Solves the normal equations G_F G_F^T M_R^T = G_F in double precision,
    warns above condition number 1e12, and verifies
    ``G_F M_R = I`` to 1e-9 before returning M_R of shape (n, n - k).
    """
    g_f = gen.g_rows("frozen").astype(np.float64)
    gram = g_f @ g_f.T
    cond = np.linalg.cond(gram)
    if cond > 1e12:
        warnings.warn(
            f"frozen-row Gram matrix is ill conditioned (cond={cond:.3e})",
            RuntimeWarning,
        )
    try:
        m_r = np.linalg.solve(gram, g_f).T
    except np.linalg.LinAlgError as err:
        raise np.linalg.LinAlgError(
            f"frozen-row Gram matrix is singular ({err}); generator structure violated"
        ) from err
    residual = np.abs(g_f @ m_r - np.eye(g_f.shape[0])).max()
    if residual >= 1e-9:
        raise np.linalg.LinAlgError(
            f"pseudo-inverse residual {residual:.3e} exceeds 1e-9"
        )
    return m_r


# ---------------------------------------------------------------------------
# Decoding
# ---------------------------------------------------------------------------

def _f_exact(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact check-node update 2 atanh(tanh(a/2) tanh(b/2)).

    Evaluated in the numerically stable form
    sign(a) sign(b) min(|a|,|b|) + log1p(e^{-(|a|+|b|)}) - log1p(e^{-||a|-|b||}).
    """
    aa = np.abs(a)
    ab = np.abs(b)
    mag = np.minimum(aa, ab)
    mag += np.log1p(np.exp(-(aa + ab)))
    mag -= np.log1p(np.exp(-np.abs(aa - ab)))
    return np.sign(a) * np.sign(b) * mag


def _f_minsum(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))


def _g(a: np.ndarray, b: np.ndarray, u_left: np.ndarray) -> np.ndarray:
    return b + (1.0 - 2.0 * u_left) * a


def _softplus(x: np.ndarray) -> np.ndarray:
    """log(1 + e^x), stable for any sign of x."""
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


def _full_frozen_vals(spec: PolarSpec, frozen_vals: np.ndarray, batch: int) -> np.ndarray:
    frozen_vals = np.asarray(frozen_vals, dtype=np.uint8)
    n_frozen = spec.n - spec.k
    if frozen_vals.ndim == 1:
        frozen_vals = np.broadcast_to(frozen_vals, (batch, n_frozen))
    if frozen_vals.shape != (batch, n_frozen):
        raise ValueError(
            f"frozen_vals must have {n_frozen} entries per frame, got {frozen_vals.shape}"
        )
    full = np.zeros((batch, spec.n), dtype=np.uint8)
    full[:, spec.frozen_set] = frozen_vals
    return full


def _as_llr_batch(spec: PolarSpec, obs) -> np.ndarray:
    llrs = obs.llrs if isinstance(obs, SoftObservation) else np.asarray(obs, dtype=np.float64)
    llrs = np.atleast_2d(llrs)
    if llrs.shape[-1] != spec.n:
        raise ValueError(f"observation length {llrs.shape[-1]} != code length {spec.n}")
    return np.clip(llrs, -LLR_CAP, LLR_CAP)


def decode_sc_batch(spec, llrs, frozen_vals):
    """Successive-cancellation decoding of a batch of frames.

    Parameters
    ----------
    llrs : (B, n) array of channel LLRs (or anything SoftObservation-like).
    frozen_vals : (n-k,) or (B, n-k) frozen-bit values in frozen_set order.

    Returns
    -------
    (u_hat, info_bits) : arrays of shape (B, n) and (B, k).
    """
    llrs = _as_llr_batch(spec, llrs)
    b = llrs.shape[0]
    fv = _full_frozen_vals(spec, frozen_vals, b)
    mask = spec.frozen_mask
    u_hat = np.zeros((b, spec.n), dtype=np.uint8)

    def recurse(seg: np.ndarray, offset: int) -> np.ndarray:
        width = seg.shape[1]
        if width == 1:
            if mask[offset]:
                bits = fv[:, offset]
            else:
                bits = (seg[:, 0] < 0).astype(np.uint8)
            u_hat[:, offset] = bits
            return bits[:, None]
        half = width // 2
        a, bb = seg[:, :half], seg[:, half:]
        left = recurse(_f_exact(a, bb), offset)
        right = recurse(_g(a, bb, left), offset + half)
        return np.concatenate([left ^ right, right], axis=1)

    recurse(llrs.copy(), 0)
    return u_hat, u_hat[:, spec.info_set]


def decode_sc(spec: PolarSpec, obs, frozen_vals):
    """Single-frame successive-cancellation decode.

    Frozen indices take the supplied values; information indices take the
    sign decision (LLR >= 0 decides 0).  Returns (u_hat, info_bits).
    """
    u, info = decode_sc_batch(spec, obs, frozen_vals)
    return u[0], info[0]


def sc_bit_channel_decisions(spec, llrs, u_true):
    """First-decision probe: the SC sign decision at every position given a
    correct decoding past.

    Runs the SC recursion with the path forced to the true input bits and
    records the sign decision each leaf would have made.  Comparing the
    returned decisions with ``u_true`` on the information set measures the
    per-bit-channel error rates that Bhattacharyya parameters and
    Gaussian-approximation reliabilities bound, free of error propagation.
    """
    llrs = _as_llr_batch(spec, llrs)
    b = llrs.shape[0]
    u_true = np.atleast_2d(np.asarray(u_true, dtype=np.uint8))
    if u_true.shape != (b, spec.n):
        raise ValueError("u_true must match the observation batch shape")
    decisions = np.zeros((b, spec.n), dtype=np.uint8)

    def recurse(seg: np.ndarray, offset: int) -> np.ndarray:
        width = seg.shape[1]
        if width == 1:
            decisions[:, offset] = seg[:, 0] < 0
            return u_true[:, offset : offset + 1]
        half = width // 2
        a, bb = seg[:, :half], seg[:, half:]
        left = recurse(_f_exact(a, bb), offset)
        right = recurse(_g(a, bb, left), offset + half)
        return np.concatenate([left ^ right, right], axis=1)

    recurse(llrs.copy(), 0)
    return decisions


def decode_scl_batch(spec, llrs, frozen_vals, list_len: int, min_sum: bool = False):
    """Successive-cancellation list decoding of a batch of frames.

    Path metrics use the exact increment log(1 + exp(-(1-2u) L)), so with a
    list large enough to avoid pruning the winning path coincides with the
    maximum-likelihood codeword.  Frozen bits are forced to ``frozen_vals``
    on every path.  The winner is the path with the smallest final metric;
    ties pick the lowest path index.

    Path forks reorder only the live tree segments (the registry below), not
    a full per-level tensor, which keeps large-batch decoding memory bound
    by ~2n floats per path.

    Returns (u_hat, info_bits, path_metric) with shapes (B, n), (B, k), (B,).
    """
    if list_len < 1:
        raise ValueError(f"list length must be >= 1, got {list_len}")
    llr_ch = _as_llr_batch(spec, llrs)
    b, n = llr_ch.shape
    fv = _full_frozen_vals(spec, frozen_vals, b)
    mask = spec.frozen_mask
    el = list_len
    f_update = _f_minsum if min_sum else _f_exact

    u_out = np.zeros((b, el, n), dtype=np.uint8)
    pm = np.full((b, el), np.inf)
    pm[:, 0] = 0.0
    bidx = np.arange(b)[:, None]
    live: list[np.ndarray] = [u_out]

    def fork(dm: np.ndarray) -> np.ndarray:
        nonlocal pm
        if el == 1:
            pm = pm + _softplus(-np.abs(dm))
            return (dm < 0).astype(np.uint8)
        cand = np.concatenate([pm + _softplus(-dm), pm + _softplus(dm)], axis=1)
        order = np.argsort(cand, axis=1, kind="stable")[:, :el]
        parent = order % el
        pm = np.take_along_axis(cand, order, axis=1)
        for arr in live:
            arr[...] = arr[bidx, parent]
        return (order >= el).astype(np.uint8)

    def rec(seg: np.ndarray, offset: int) -> np.ndarray:
        width = seg.shape[2]
        if width == 1:
            dm = seg[:, :, 0]
            if mask[offset]:
                u = fv[:, offset]
                pm_add = _softplus(-(1.0 - 2.0 * u[:, None]) * dm)
                nonlocal pm
                pm = pm + pm_add
                bits = np.broadcast_to(u[:, None], (b, el)).copy()
            else:
                bits = fork(dm)
            u_out[:, :, offset] = bits
            return bits[:, :, None]
        half = width // 2
        a, bb = seg[..., :half], seg[..., half:]
        lch = f_update(a, bb)
        live.append(lch)
        left = rec(lch, offset)
        live.pop()
        live.append(left)
        rch = _g(a, bb, left)
        live.append(rch)
        right = rec(rch, offset + half)
        live.pop()
        live.pop()
        return np.concatenate([left ^ right, right], axis=2)

    root = np.broadcast_to(llr_ch[:, None, :], (b, el, n)).copy()
    live.append(root)
    rec(root, 0)

    winner = np.argmin(pm, axis=1)
    u_hat = u_out[np.arange(b), winner, :]
    return u_hat, u_hat[:, spec.info_set], pm[np.arange(b), winner]


def decode_scl(spec: PolarSpec, obs, frozen_vals, list_len: int):
    """Single-frame list decode; degenerates to decode_sc at list_len=1.

    Returns (u_hat, info_bits).
    """
    u, info, _ = decode_scl_batch(spec, obs, frozen_vals, list_len)
    return u[0], info[0]
