"""System-level configuration and reproducible random number streams.

Everything downstream (channel draws, quantization noise, precoder noise)
pulls its randomness through :class:`RngStream` so that a trial's draws are
a pure function of ``(master_seed, stream_id)``.  That is what makes Monte
Carlo runs bit-identical no matter how trials are distributed over worker
processes, and it is what lets a bit-split sweep reuse the same channel
realizations in every grid cell (common random numbers).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ConfigError(ValueError):
    """Raised when a SystemConfig fails validation."""


# Leading spawn-key values partitioning the stream space under one master
# seed: per-trial pipeline draws vs precoder moment estimation passes.
DOMAIN_TRIAL = 0
DOMAIN_MOMENTS = 1


def _as_user_vector(value, K: int, name: str, allow_zero: bool = False) -> np.ndarray:
    """Broadcast a scalar to length K, or validate a length-K vector."""
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(K, float(arr))
    if arr.shape != (K,):
        raise ConfigError(f"{name} must be a scalar or length-{K} vector, got shape {arr.shape}")
    floor_ok = np.all(arr >= 0) if allow_zero else np.all(arr > 0)
    if not np.all(np.isfinite(arr)) or not floor_ok:
        kind = "nonnegative" if allow_zero else "positive"
        raise ConfigError(f"{name} entries must be finite and {kind}")
    return arr


@dataclass(frozen=True, eq=False)
class SystemConfig:
    """Static parameters of one downlink scenario.

    M               base-station antennas
    K               single-antenna users, K < M (massive MIMO regime)
    tau_c           coherence block length in symbols
    tau_p           pilot symbols per block, K <= tau_p <= tau_c
    total_power     downlink transmit power P_t (linear)
    noise_var       receiver noise variance sigma^2 (linear)
    beta            large-scale fading coefficient per user, shape (K,)
    pilot_power     uplink pilot power per user q_k >= 0, shape (K,)

    The arrays are treated as immutable; do not write into them.
    """

    M: int
    K: int
    tau_c: int
    tau_p: int
    total_power: float
    noise_var: float = 1.0
    beta: np.ndarray = field(default=None)  # type: ignore[assignment]
    pilot_power: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if not (isinstance(self.M, (int, np.integer)) and self.M >= 1):
            raise ConfigError("M must be a positive integer")
        if not (isinstance(self.K, (int, np.integer)) and 1 <= self.K < self.M):
            raise ConfigError("K must satisfy 1 <= K < M")
        if not (self.K <= self.tau_p <= self.tau_c):
            raise ConfigError("need K <= tau_p <= tau_c")
        if not (np.isfinite(self.total_power) and self.total_power > 0):
            raise ConfigError("total_power must be finite and positive")
        if not (np.isfinite(self.noise_var) and self.noise_var > 0):
            raise ConfigError("noise_var must be finite and positive")
        beta = _as_user_vector(1.0 if self.beta is None else self.beta, self.K, "beta")
        # default pilot power: match the downlink SNR, q_k = P_t / sigma^2
        q = self.total_power / self.noise_var if self.pilot_power is None else self.pilot_power
        q = _as_user_vector(q, self.K, "pilot_power", allow_zero=True)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "pilot_power", q)

    @classmethod
    def from_snr(
        cls,
        M: int,
        K: int,
        tau_c: int,
        tau_p: int,
        snr_db: float,
        *,
        noise_var: float = 1.0,
        beta=None,
        pilot_power=None,
    ) -> "SystemConfig":
        """Build a config with P_t set from a downlink SNR in dB.

        SNR is defined as P_t / sigma^2, so P_t = sigma^2 * 10^(snr_db/10).
        """
        p_t = noise_var * 10.0 ** (snr_db / 10.0)
        return cls(
            M=M,
            K=K,
            tau_c=tau_c,
            tau_p=tau_p,
            total_power=p_t,
            noise_var=noise_var,
            beta=beta,
            pilot_power=pilot_power,
        )

    @property
    def snr_db(self) -> float:
        return 10.0 * np.log10(self.total_power / self.noise_var)

    @property
    def pilot_overhead(self) -> float:
        """Fraction of the coherence block spent on pilots, tau_p / tau_c."""
        return self.tau_p / self.tau_c


@dataclass(frozen=True)
class RngStream:
    """A named, replayable random stream.

    The generator produced for a given (master_seed, stream_id) pair is
    always the same object state, independent of how many other streams
    exist or which process asks for it.  stream_id may be an int or a
    tuple of ints; tuples let callers carve out sub-streams (for example
    one per trial, or one per redraw attempt) without collisions.
    """

    master_seed: int
    stream_id: tuple = ()

    def generator(self) -> np.random.Generator:
        key = self.stream_id if isinstance(self.stream_id, tuple) else (self.stream_id,)
        ss = np.random.SeedSequence(entropy=self.master_seed, spawn_key=tuple(int(s) for s in key))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, *suffix) -> "RngStream":
        key = self.stream_id if isinstance(self.stream_id, tuple) else (self.stream_id,)
        return RngStream(self.master_seed, key + tuple(int(s) for s in suffix))


def draw_complex_gaussian(rng, rows: int, cols: int, variance=1.0) -> np.ndarray:
    """Draw a rows x cols matrix of circularly symmetric complex Gaussians.

    Each entry is CN(0, variance): real and imaginary parts are independent
    N(0, variance/2).  `variance` may be a scalar, a length-cols vector
    (per-column variance), or a full rows x cols array.  `rng` is either an
    RngStream or a numpy Generator.
    """
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    z = gen.standard_normal((rows, cols)) + 1j * gen.standard_normal((rows, cols))
    v = np.asarray(variance, dtype=float)
    if np.any(v < 0):
        raise ValueError("variance must be nonnegative")
    return z * np.sqrt(v / 2.0)
