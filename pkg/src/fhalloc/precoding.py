r"""Linear downlink precoders and their fronthaul quantization moments.

All precoders take the downlink channel estimate H_d (K x M, one row per
user) and produce an M x K matrix normalized to ||P||_F^2 = P_t:

    MRT:  P = zeta * H_d^H
    ZF:   P = zeta * H_d^H (H_d H_d^H)^(-1)
    WF:   P = zeta * H_d^H (H_d H_d^H + (K sigma^2 / P_t) I)^(-1)

In every case zeta = sqrt(P_t) / ||unnormalized||_F, which coincides with
the trace expressions tr(G), tr(G^(-1)), tr(A^(-1) G A^(-1)) for the
respective kinds (G = H_d H_d^H).

When the precoder itself crosses the fronthaul it is quantized entrywise.
The AQNM noise variance needs the per-entry second moments of P over the
channel distribution; those population moments are what PrecoderMoments
carries.  For MRT they are available in closed form, for ZF and WF they
are estimated by simulation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import estimate_channel, gamma_coefficient
from .quantization import AqnmQuantizer, aqnm_quantize, quantized_csi_covariance
from .sysmodel import DOMAIN_MOMENTS, RngStream, SystemConfig

PRECODER_KINDS = ("mrt", "zf", "wf")

# Relative eigenvalue floor below which the Gram matrix counts as rank
# deficient and the realization should be redrawn.
_RANK_RTOL = 1e-12


class RankDeficientError(np.linalg.LinAlgError):
    """The estimated channel Gram matrix is numerically singular."""


def _gram(H_d: np.ndarray) -> np.ndarray:
    return H_d @ H_d.conj().swapaxes(-2, -1)


def _frob_sq(X: np.ndarray) -> np.ndarray:
    """Squared Frobenius norm over the trailing two axes.

    Reduces each matrix along one flattened axis so the summation order,
    and hence the rounding, is identical whether matrices arrive alone or
    stacked in batches of any size.
    """
    flat = np.ascontiguousarray(X).reshape(*X.shape[:-2], -1)
    return np.sum(np.abs(flat) ** 2, axis=-1)


def rank_deficient_mask(H_d: np.ndarray) -> np.ndarray:
    """Boolean mask (over leading batch dims) of numerically singular Grams."""
    ev = np.linalg.eigvalsh(_gram(H_d))
    return ev[..., 0] <= ev[..., -1] * _RANK_RTOL


@dataclass(frozen=True)
class PrecodingMatrix:
    """A normalized precoder with the scale factor that was applied.

    P has shape (..., M, K) and satisfies ||P||_F^2 = P_t per batch entry;
    zeta is the positive normalization factor (scalar, or an array over
    the batch dimensions).
    """

    P: np.ndarray
    kind: str
    zeta: np.ndarray | float


@dataclass(frozen=True)
class TransmitPrecoder:
    """A quantized precoder with its power-restoring rescale factor.

    alpha satisfies alpha^2 ||P_Q||_F^2 = P_t per realization; the matrix
    actually transmitted is alpha * P_Q.
    """

    P_Q: np.ndarray
    alpha: np.ndarray | float


def build_precoder(H_d: np.ndarray, kind: str, cfg: SystemConfig) -> PrecodingMatrix:
    """Build a power-normalized precoder from the downlink channel estimate.

    H_d has shape (..., K, M); leading dimensions are batched.  The result
    matrix has shape (..., M, K) with ||P||_F^2 = total_power per batch
    entry.  Raises RankDeficientError if any ZF/WF Gram matrix is
    numerically singular (callers running Monte Carlo redraw such
    realizations).
    """
    if kind not in PRECODER_KINDS:
        raise ValueError(f"unknown precoder kind {kind!r}, expected one of {PRECODER_KINDS}")
    *batch, K, M = H_d.shape
    if (K, M) != (cfg.K, cfg.M):
        raise ValueError(f"H_d has shape {H_d.shape}, config expects (..., {cfg.K}, {cfg.M})")

    if kind == "mrt":
        U = H_d.conj().swapaxes(-2, -1)
    else:
        G = _gram(H_d)
        ev = np.linalg.eigvalsh(G)
        if np.any(ev[..., 0] <= ev[..., -1] * _RANK_RTOL):
            raise RankDeficientError("estimated channel Gram matrix is numerically singular")
        A = G
        if kind == "wf":
            load = cfg.K * cfg.noise_var / cfg.total_power
            A = G + load * np.eye(K)
        # H_d^H A^(-1) = (A^(-1) H_d)^H since A is Hermitian
        U = np.linalg.solve(A, H_d).conj().swapaxes(-2, -1)

    norm_sq = _frob_sq(U)
    if np.any(norm_sq == 0.0):
        raise RankDeficientError("precoder has zero norm")
    zeta = np.sqrt(cfg.total_power / norm_sq)
    P = U * zeta[..., None, None]
    return PrecodingMatrix(P=P, kind=kind, zeta=float(zeta) if zeta.ndim == 0 else zeta)


def transmit_rescale(P_q: np.ndarray, total_power: float) -> TransmitPrecoder:
    """Pair P_q with the scale alpha restoring ||alpha P_q||_F^2 = P_t.

    Applied after precoder quantization, which perturbs the Frobenius norm.
    alpha carries the leading batch shape of P_q (scalar for a single
    matrix).  Raises on zero input norm.
    """
    norm_sq = _frob_sq(P_q)
    if np.any(norm_sq == 0.0):
        raise ValueError("cannot rescale a zero precoding matrix")
    alpha = np.sqrt(total_power / norm_sq)
    return TransmitPrecoder(P_Q=P_q, alpha=float(alpha) if alpha.ndim == 0 else alpha)


@dataclass(frozen=True)
class PrecoderMoments:
    """Population second moments of a precoder family over the channel law.

    D[i, m] = E|P[m, i]|^2, one row per user (shape (K, M)); the grand
    total equals P_t because every realization is power normalized.
    alpha_bar is the deterministic proxy for the post-quantization rescale,
    1 / sqrt(1 - eta_p).  zeta_bar is the deterministic normalization proxy
    used by closed-form analysis; it is only available analytically (MRT).
    """

    kind: str
    D: np.ndarray
    alpha_bar: float
    zeta_bar: float | None = None

    @property
    def per_user_trace(self) -> np.ndarray:
        """tr(D_i) per user: total transmit-side second moment of column i."""
        return np.sum(self.D, axis=1)

    @property
    def entry_var(self) -> np.ndarray:
        """D transposed to the (M, K) layout of a precoding matrix."""
        return self.D.T


def mrt_moments(cfg: SystemConfig, eta_h: float, eta_p: float) -> PrecoderMoments:
    """Closed-form per-entry second moments of the quantized-CSI MRT precoder.

    The matched filter columns inherit the quantized estimate statistics,
    so E|P[m, i]|^2 = zeta_bar^2 (1 - eta_h) gamma_i with
    zeta_bar^2 = P_t / (M sum_i (1 - eta_h) gamma_i).  Their total is P_t
    exactly.
    """
    gamma = gamma_coefficient(cfg.pilot_power, cfg.tau_p, cfg.beta)
    gtil = quantized_csi_covariance(gamma, eta_h)
    zeta_bar_sq = cfg.total_power / (cfg.M * np.sum(gtil))
    D = np.broadcast_to(zeta_bar_sq * gtil[:, None], (cfg.K, cfg.M)).copy()
    alpha_bar = 1.0 / np.sqrt(1.0 - eta_p)
    return PrecoderMoments(
        kind="mrt",
        D=D,
        alpha_bar=alpha_bar,
        zeta_bar=float(np.sqrt(zeta_bar_sq)),
    )


def estimate_moments_mc(
    cfg: SystemConfig,
    kind: str,
    eta_h: float,
    eta_p: float,
    trials: int,
    seed: int,
) -> PrecoderMoments:
    """Monte Carlo estimate of PrecoderMoments for any precoder kind.

    First pass averages |P[m, i]|^2 over `trials` fresh channel draws
    (pilot estimation and CSI quantization included).  A second pass of the
    same size then applies precoder quantization with the estimated moments
    and sets alpha_bar = sqrt(P_t / mean ||P_q||_F^2).  At least 100 trials
    are required; fewer would make the downstream noise scales themselves
    noisy.
    """
    if trials < 100:
        raise ValueError("trials must be >= 100")
    if kind not in PRECODER_KINDS:
        raise ValueError(f"unknown precoder kind {kind!r}")
    gamma = gamma_coefficient(cfg.pilot_power, cfg.tau_p, cfg.beta)
    csi_q = AqnmQuantizer.from_eta(eta_h)

    def draw_precoder(stream: RngStream) -> np.ndarray:
        cs = estimate_channel(cfg, stream.child(0), stream.child(1))
        Hhat_q = aqnm_quantize(cs.H_hat, csi_q, cs.gamma, stream.child(2)).value
        return build_precoder(Hhat_q.T, kind, cfg).P

    base = RngStream(seed, (DOMAIN_MOMENTS,))
    acc = np.zeros((cfg.M, cfg.K))
    for t in range(trials):
        P = draw_precoder(base.child(0, t))
        acc += np.abs(P) ** 2
    D = (acc / trials).T

    prec_q = AqnmQuantizer.from_eta(eta_p)
    norm_acc = 0.0
    for t in range(trials):
        stream = base.child(1, t)
        P = draw_precoder(stream)
        P_q = aqnm_quantize(P, prec_q, D.T, stream.child(3)).value
        norm_acc += np.sum(np.abs(P_q) ** 2)
    alpha_bar = float(np.sqrt(cfg.total_power / (norm_acc / trials)))

    return PrecoderMoments(kind=kind, D=D, alpha_bar=alpha_bar)
