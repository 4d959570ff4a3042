"""Multi-user detection on the factor graph.

``mpa_detect`` runs sum-product message passing between resource nodes and
user nodes, exchanging length-M probability vectors.  Per resource the update
enumerates the M^{d_f} combinations of the colliding users' symbols, so the
cost is O(K * M^{d_f}) per iteration; the squared-distance table for that
enumeration is built once per call and reused across iterations.  The
exponent is shifted by its per-(frame, resource) maximum before
exponentiation, which cancels in the message normalization and keeps the
linear domain alive at very small noise levels.

``map_detect`` is the brute-force joint maximum-likelihood oracle used to
verify the message-passing detector on small systems.
"""
from __future__ import annotations

import string
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .core import CodebookSet

MAP_ENUMERATION_LIMIT = 2 ** 24

_AXIS_LETTERS = string.ascii_lowercase.replace("f", "")


@dataclass(frozen=True)
class MpaConfig:
    """Message-passing settings: sweep count, arithmetic domain ("linear" or
    "log"), damping factor on the user-to-resource messages, and an optional
    max-log approximation (log domain only)."""

    iterations: int = 10
    domain: str = "linear"
    damping: float = 0.0
    max_log: bool = False

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.domain not in ("linear", "log"):
            raise ValueError(f"domain must be 'linear' or 'log', got {self.domain!r}")
        if not 0.0 <= self.damping < 1.0:
            raise ValueError("damping must lie in [0, 1)")
        if self.max_log and self.domain != "log":
            raise ValueError("max_log requires the log domain")


def _normalize_rows(msg: np.ndarray) -> np.ndarray:
    """Scale each length-M vector to sum 1; all-zero vectors fall back to
    uniform."""
    total = msg.sum(axis=-1, keepdims=True)
    bad = total <= 0.0
    if bad.any():
        msg = np.where(bad, 1.0, msg)
        total = msg.sum(axis=-1, keepdims=True)
    return msg / total


def _log_weights(
    y_col: np.ndarray,
    contribs: list[np.ndarray],
    n0: float,
    frames: int,
    M: int,
) -> np.ndarray:
    """(frames, M, ..., M) array of -|y - sum|^2 / n0, max-shifted per frame.

    Each entry of ``contribs`` is either (M,) for frame-constant gains or
    (frames, M); axis p of the result indexes the p-th colliding user's
    symbol.
    """
    d = len(contribs)
    S = np.zeros((1,) * (1 + d), dtype=np.complex128)
    for p, c in enumerate(contribs):
        shape = [1] * (1 + d)
        shape[1 + p] = M
        if c.ndim == 2:
            shape[0] = frames
        S = S + c.reshape(shape)
    diff = y_col.reshape((frames,) + (1,) * d) - S
    A = -(diff.real ** 2 + diff.imag ** 2) / n0
    A -= A.max(axis=tuple(range(1, 1 + d)), keepdims=True)
    return A


class _Graph:
    """Adjacency and einsum bookkeeping derived from the factor matrix."""

    def __init__(self, F: np.ndarray, M: int):
        self.K, self.J = F.shape
        self.res_users = [np.flatnonzero(F[k]) for k in range(self.K)]
        self.user_res = [np.flatnonzero(F[:, j]) for j in range(self.J)]
        if any(len(u) == 0 for u in self.res_users) or any(
            len(r) == 0 for r in self.user_res
        ):
            raise ValueError("factor matrix has an isolated row or column")
        # local position of user j within resource k's neighbor list
        self.pos = {
            (k, j): p for k in range(self.K) for p, j in enumerate(self.res_users[k])
        }
        # einsum subscript and precomputed contraction path per (resource,
        # local slot): marginalize the weight tensor against every other
        # neighbor's incoming message
        self.subs = []
        self.paths = []
        for k in range(self.K):
            d = len(self.res_users[k])
            letters = _AXIS_LETTERS[:d]
            per_slot = []
            per_slot_path = []
            for p in range(d):
                ops = ["f" + letters]
                ops += ["f" + letters[q] for q in range(d) if q != p]
                sub = ",".join(ops) + "->f" + letters[p]
                per_slot.append(sub)
                shapes = [np.empty((2,) + (M,) * d)]
                shapes += [np.empty((2, M))] * (d - 1)
                per_slot_path.append(
                    np.einsum_path(sub, *shapes, optimize="optimal")[0]
                )
            self.subs.append(per_slot)
            self.paths.append(per_slot_path)


_GRAPH_CACHE: dict[bytes, _Graph] = {}


def _graph_for(F: np.ndarray, M: int) -> _Graph:
    key = F.tobytes() + repr((F.shape, M)).encode()
    graph = _GRAPH_CACHE.get(key)
    if graph is None:
        graph = _Graph(F, M)
        _GRAPH_CACHE[key] = graph
    return graph


def _check_inputs(y: np.ndarray, h: np.ndarray | None, n0: float) -> None:
    if n0 <= 0.0:
        raise ValueError(f"n0 must be positive, got {n0}")
    if not np.isfinite(y).all():
        raise ValueError("received signal contains non-finite values")
    if h is not None and not np.isfinite(h).all():
        raise ValueError("channel gains contain non-finite values")


def mpa_detect_batch(
    y: np.ndarray,
    cbs: CodebookSet,
    h: np.ndarray | None,
    n0: float,
    cfg: MpaConfig = MpaConfig(),
) -> np.ndarray:
    """Sum-product detection of a batch of frames.

    y is (frames, K); h is (frames, K, J) complex gains or None for all-ones
    (AWGN) gains.  Returns beliefs of shape (frames, J, M): per frame and user
    a probability vector over the M codewords.
    """
    y = np.asarray(y, dtype=np.complex128)
    if y.ndim != 2:
        raise ValueError("y must be (frames, K)")
    _check_inputs(y, h, n0)
    books = cbs.books
    M = cbs.config.M
    frames = y.shape[0]
    F = cbs.factor_matrix if cbs.factor_matrix is not None else cbs.supports()
    g = _graph_for(np.asarray(F), M)

    # weight tables, one per resource, fixed across iterations
    logW = []
    for k in range(g.K):
        contribs = []
        for j in g.res_users[k]:
            col = books[j, :, k]  # (M,)
            if h is None:
                contribs.append(col)
            else:
                contribs.append(h[:, k, j][:, None] * col[None, :])
        logW.append(_log_weights(y[:, k], contribs, n0, frames, M))

    linear = cfg.domain == "linear"
    W = [np.exp(lw) for lw in logW] if linear else None

    # user -> resource messages indexed [resource][local slot], uniform
    # priors to start; slot-major layout keeps each message contiguous
    Q = [np.full((len(g.res_users[k]), frames, M), 1.0 / M) for k in range(g.K)]
    R = [np.empty_like(Q[k]) for k in range(g.K)]

    for _ in range(cfg.iterations):
        for k in range(g.K):
            d = len(g.res_users[k])
            if linear:
                for p in range(d):
                    ops = [Q[k][q] for q in range(d) if q != p]
                    R[k][p] = np.einsum(
                        g.subs[k][p], W[k], *ops, optimize=g.paths[k][p]
                    )
                R[k][:] = _normalize_rows(R[k])
            else:
                with np.errstate(divide="ignore"):
                    logQ = np.log(Q[k])
                for p in range(d):
                    B = logW[k]
                    for q in range(d):
                        if q == p:
                            continue
                        shape = [frames] + [1] * d
                        shape[1 + q] = M
                        B = B + logQ[q].reshape(shape)
                    axes = tuple(ax for ax in range(1, 1 + d) if ax != 1 + p)
                    if cfg.max_log:
                        lr = B.max(axis=axes) if axes else B
                    else:
                        lr = logsumexp(B, axis=axes) if axes else B
                    lr = lr - logsumexp(lr, axis=1, keepdims=True)
                    R[k][p] = np.exp(lr)
        for j in range(g.J):
            incoming = [R[k][g.pos[(k, j)]] for k in g.user_res[j]]
            for t, k in enumerate(g.user_res[j]):
                out = np.ones((frames, M))
                for u, msg in enumerate(incoming):
                    if u != t:
                        out = out * msg
                out = _normalize_rows(out)
                if cfg.damping > 0.0:
                    out = (1.0 - cfg.damping) * out + cfg.damping * Q[k][g.pos[(k, j)]]
                Q[k][g.pos[(k, j)]] = out

    beliefs = np.empty((frames, g.J, M))
    for j in range(g.J):
        b = np.ones((frames, M))
        for k in g.user_res[j]:
            b = b * R[k][g.pos[(k, j)]]
        beliefs[:, j, :] = _normalize_rows(b)
    return beliefs


def mpa_detect(
    y: np.ndarray,
    cbs: CodebookSet,
    h: np.ndarray | None,
    n0: float,
    cfg: MpaConfig = MpaConfig(),
) -> np.ndarray:
    """Single-frame sum-product detection; returns (J, M) beliefs.

    h is the (K, J) gain matrix or None for AWGN.
    """
    y = np.asarray(y, dtype=np.complex128)
    hb = None if h is None else np.asarray(h, dtype=np.complex128)[None, :, :]
    return mpa_detect_batch(y[None, :], cbs, hb, n0, cfg)[0]


def hard_decision(belief: np.ndarray) -> np.ndarray:
    """Per-user argmax over the last axis; ties resolve to the smaller
    index."""
    return np.argmax(np.asarray(belief), axis=-1)


def _candidate_sums(scaled_books: np.ndarray) -> np.ndarray:
    """(M^J, K) superpositions of one codeword per user, in lexicographic
    symbol order with user 0 as the most significant digit."""
    J, M, K = scaled_books.shape
    S = np.zeros((1, K), dtype=np.complex128)
    for j in range(J):
        S = (S[:, None, :] + scaled_books[j][None, :, :]).reshape(-1, K)
    return S


def _decode_indices(flat: np.ndarray, J: int, M: int) -> np.ndarray:
    out = np.empty(flat.shape + (J,), dtype=np.int64)
    rem = flat.copy()
    for j in range(J - 1, -1, -1):
        out[..., j] = rem % M
        rem //= M
    return out


def map_detect_batch(
    y: np.ndarray,
    cbs: CodebookSet,
    h: np.ndarray | None,
    n0: float,
) -> np.ndarray:
    """Joint maximum-likelihood decisions by enumerating all M^J hypotheses;
    returns (frames, J) symbol indices.  Ties break toward the
    lexicographically smallest symbol tuple."""
    y = np.asarray(y, dtype=np.complex128)
    if y.ndim != 2:
        raise ValueError("y must be (frames, K)")
    _check_inputs(y, h, n0)
    cfg = cbs.config
    n_hyp = cfg.M ** cfg.J
    if n_hyp > MAP_ENUMERATION_LIMIT:
        raise ValueError(
            f"M^J = {n_hyp} hypotheses exceed the enumeration limit "
            f"({MAP_ENUMERATION_LIMIT}); use mpa_detect instead"
        )
    frames = y.shape[0]
    if h is None:
        cand = _candidate_sums(np.asarray(cbs.books))
        cnorm2 = (np.abs(cand) ** 2).sum(axis=1)
        best = np.empty(frames, dtype=np.int64)
        chunk = max(1, 2 ** 22 // max(n_hyp, 1))
        for lo in range(0, frames, chunk):
            hi = min(lo + chunk, frames)
            metric = cnorm2[None, :] - 2.0 * (y[lo:hi] @ cand.conj().T).real
            best[lo:hi] = np.argmin(metric, axis=1)
        return _decode_indices(best, cfg.J, cfg.M)
    best = np.empty(frames, dtype=np.int64)
    for f in range(frames):
        scaled = cbs.books * h[f].T[:, None, :]  # (J, M, K)
        cand = _candidate_sums(scaled)
        metric = (np.abs(y[f][None, :] - cand) ** 2).sum(axis=1)
        best[f] = int(np.argmin(metric))
    return _decode_indices(best, cfg.J, cfg.M)


def map_detect(
    y: np.ndarray,
    cbs: CodebookSet,
    h: np.ndarray | None,
    n0: float,
) -> np.ndarray:
    """Single-frame joint ML oracle; returns (J,) symbol indices."""
    y = np.asarray(y, dtype=np.complex128)
    hb = None if h is None else np.asarray(h, dtype=np.complex128)[None, :, :]
    return map_detect_batch(y[None, :], cbs, hb, n0)[0]
