"""Received-signal synthesis: superposition of the users' codewords through
per-user flat channels plus circularly-symmetric AWGN.

Noise convention: a codeword carries unit energy, so the energy per bit is
1/log2(M); ``n0`` is the total complex noise variance per resource (n0/2 per
real dimension).

Randomness is derived from a master seed in fixed-size frame blocks so that
results are reproducible regardless of how blocks are scheduled across
workers: block b of stream s uses ``SeedSequence((master_seed, s, b))``.
Within a block the draw order is symbols, then fading gains, then noise.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CodebookSet, SystemConfig

FRAME_BLOCK = 4096

CHANNELS = ("awgn", "rayleigh")


def ebn0_to_n0(ebn0_db: float, cfg: SystemConfig) -> float:
    """Noise variance for a given Eb/N0 in dB under the unit-codeword-energy
    convention (E_b = 1/log2 M)."""
    eb = 1.0 / cfg.bits_per_symbol
    return eb / 10.0 ** (ebn0_db / 10.0)


def block_rng(seed: int, stream: int, block: int) -> np.random.Generator:
    """Generator for one frame block; the (seed, stream, block) triple fully
    determines every draw."""
    return np.random.default_rng(np.random.SeedSequence((seed, stream, block)))


@dataclass(frozen=True)
class ChannelRealization:
    """One channel draw: per-(resource, user) complex gains and the noise
    variance in force.  AWGN mode uses all-ones gains."""

    h: np.ndarray  # (K, J) complex
    n0: float


def awgn_realization(cfg: SystemConfig, n0: float) -> ChannelRealization:
    return ChannelRealization(h=np.ones((cfg.K, cfg.J), dtype=np.complex128), n0=n0)


def rayleigh_realization(
    cfg: SystemConfig, n0: float, rng: np.random.Generator
) -> ChannelRealization:
    """I.i.d. unit-variance circularly-symmetric gains per (resource, user)."""
    h = (rng.standard_normal((cfg.K, cfg.J)) + 1j * rng.standard_normal((cfg.K, cfg.J)))
    return ChannelRealization(h=h / np.sqrt(2.0), n0=n0)


def transmit(
    cbs: CodebookSet,
    symbols: np.ndarray,
    ch: ChannelRealization,
    rng: np.random.Generator,
) -> np.ndarray:
    """Superimpose the selected codewords through the channel gains and add a
    fresh noise draw of total variance n0 per resource."""
    symbols = np.asarray(symbols, dtype=np.int64)
    cfg = cbs.config
    if symbols.shape != (cfg.J,):
        raise ValueError(f"expected {cfg.J} symbol indices")
    if (symbols < 0).any() or (symbols >= cfg.M).any():
        raise ValueError(f"symbol indices must lie in [0, {cfg.M})")
    x = cbs.books[np.arange(cfg.J), symbols, :]  # (J, K)
    y = np.einsum("kj,jk->k", ch.h, x)
    noise = rng.standard_normal(cfg.K) + 1j * rng.standard_normal(cfg.K)
    return y + np.sqrt(ch.n0 / 2.0) * noise


def draw_frame_block(
    cbs: CodebookSet,
    channel: str,
    n0: float,
    frames: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray | None, np.ndarray]:
    """Synthesize a block of independent frames.

    Returns (symbols (F, J), gains (F, K, J) or None for AWGN, received
    (F, K)).  The unit-variance noise is drawn before scaling by sqrt(n0), so
    two calls with the same rng state but different n0 see paired noise.
    """
    if channel not in CHANNELS:
        raise ValueError(f"unknown channel {channel!r}; expected one of {CHANNELS}")
    cfg = cbs.config
    symbols = rng.integers(0, cfg.M, size=(frames, cfg.J))
    x = cbs.books[np.arange(cfg.J)[None, :], symbols, :]  # (F, J, K)
    if channel == "rayleigh":
        h = rng.standard_normal((frames, cfg.K, cfg.J)) + 1j * rng.standard_normal(
            (frames, cfg.K, cfg.J)
        )
        h /= np.sqrt(2.0)
        signal = np.einsum("fkj,fjk->fk", h, x)
    else:
        h = None
        signal = x.sum(axis=1)
    noise = rng.standard_normal((frames, cfg.K)) + 1j * rng.standard_normal(
        (frames, cfg.K)
    )
    y = signal + np.sqrt(n0 / 2.0) * noise
    return symbols, h, y
