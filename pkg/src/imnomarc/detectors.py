"""ML and SIC detection plus the closed-form FLOP complexity counters.

Detectors are pure functions of (received signal, channel, config/alphabet)
and are deterministic: argmin ties always break toward the lowest hypothesis
index. Block variants operate on whole subcarrier vectors at once and are the
fast path used by the Monte Carlo harness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .superposition import SuperAlphabet, SystemConfig


@dataclass
class DetectionResult:
    """Outcome of one per-subcarrier detection for a given user.

    ``symbol_indices`` holds the constellation point index decided at each SIC
    stage l = 1..n (the ML detector fills all N). ``theta_indices`` holds the
    rotation-angle decision per near-user stage, ``phi_hat`` the recovered
    pattern index when the full near-user pattern is available.
    """

    user: int
    symbol_indices: tuple[int, ...]
    symbols: tuple[complex, ...]
    theta_indices: tuple[int, ...] | None
    phi_hat: int | None
    metric: float


def ml_block(y: np.ndarray, h: np.ndarray, alphabet: SuperAlphabet) -> tuple[np.ndarray, np.ndarray]:
    """Exhaustive search per subcarrier; returns (entry indices, metrics)."""
    y = np.asarray(y, dtype=complex)
    h = np.asarray(h, dtype=complex)
    d = np.abs(y[:, None] - h[:, None] * alphabet.x[None, :]) ** 2
    idx = np.argmin(d, axis=1)
    return idx, d[np.arange(len(y)), idx]


def detect_ml(y: complex, h: complex, alphabet: SuperAlphabet) -> DetectionResult:
    """Minimum-distance decision over every (symbol vector, pattern) realization."""
    idx, metric = ml_block(np.array([y]), np.array([h]), alphabet)
    i = int(idx[0])
    sym_idx = tuple(int(k) for k in alphabet.symbol_indices[i])
    points = alphabet.cfg.constellation.points
    return DetectionResult(
        user=0,
        symbol_indices=sym_idx,
        symbols=tuple(complex(points[k]) for k in sym_idx),
        theta_indices=None,
        phi_hat=int(alphabet.phis[i]),
        metric=float(metric[0]),
    )


def _suffix_patterns(n_near: int, n_patterns: int) -> np.ndarray:
    """Valid rotation flag patterns: row phi has the last phi near users rotated."""
    pats = np.zeros((n_patterns, n_near), dtype=int)
    for phi in range(1, n_patterns):
        pats[phi, n_near - phi:] = 1
    return pats


def angles_to_phi(theta_flags, cfg: SystemConfig) -> int:
    """Project per-user rotation decisions onto the nearest valid pattern index.

    ``theta_flags`` holds one entry per near user ordered from user B+1 to N;
    any nonzero value (an angle in radians or a 0/1 flag) marks that user as
    rotated. Non-suffix patterns are mapped to the valid pattern at minimum
    Hamming distance, ties toward the smaller index.
    """
    flags = (np.asarray(theta_flags, dtype=float).reshape(1, -1) != 0).astype(int)
    return int(angles_to_phi_block(flags, cfg)[0])


def angles_to_phi_block(theta_flags: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    flags = np.asarray(theta_flags, dtype=int)
    n_near = cfg.n_users - cfg.n_far
    if flags.shape[1] != n_near:
        raise ValueError(f"expected {n_near} rotation flags, got {flags.shape[1]}")
    pats = _suffix_patterns(n_near, cfg.n_patterns)
    dist = np.count_nonzero(flags[:, None, :] != pats[None, :, :], axis=2)
    return np.argmin(dist, axis=1)


def sic_block(y: np.ndarray, h: np.ndarray, cfg: SystemConfig, user: int):
    """Successive cancellation over subcarrier vectors for the given user.

    Far stages decide over the base constellation and cancel; near stages
    jointly decide symbol and rotation angle. Detection stops at the user's
    own stage; the virtual user N+1 runs every stage and recovers the pattern.

    Returns (symbol indices (L, n_stages), theta indices (L, n_near_stages),
    phi estimates (L,) or None, final-stage metrics (L,)).
    """
    if not 1 <= user <= cfg.n_users + 1:
        raise ValueError(f"user {user} out of range")
    if user == cfg.n_users + 1 and cfg.index_user_mode != "virtual":
        raise ValueError("virtual user requires index_user_mode='virtual'")
    y = np.asarray(y, dtype=complex)
    h = np.asarray(h, dtype=complex)
    L = len(y)
    points = cfg.constellation.points
    angles = np.asarray(cfg.rotation.angles)
    rot = np.exp(1j * angles)
    n_angles = len(rot)
    n_stages = min(user, cfg.n_users)

    residual = y.copy()
    sym_idx = np.empty((L, n_stages), dtype=int)
    theta_idx = np.empty((L, max(n_stages - cfg.n_far, 0)), dtype=int)
    metric = np.zeros(L)
    for l in range(1, n_stages + 1):
        amp = cfg.amplitudes[l - 1]
        if l <= cfg.n_far:
            cand = amp * h[:, None] * points[None, :]
            d = np.abs(residual[:, None] - cand) ** 2
            k = np.argmin(d, axis=1)
            sym_idx[:, l - 1] = k
            chosen = amp * h * points[k]
        else:
            # hypothesis index = symbol index * n_angles + angle index
            hyp = (points[:, None] * rot[None, :]).reshape(-1)
            cand = amp * h[:, None] * hyp[None, :]
            d = np.abs(residual[:, None] - cand) ** 2
            k = np.argmin(d, axis=1)
            sym_idx[:, l - 1] = k // n_angles
            theta_idx[:, l - 1 - cfg.n_far] = k % n_angles
            chosen = amp * h * hyp[k]
        metric = d[np.arange(L), k]
        residual = residual - chosen

    phi_hat = None
    if n_stages == cfg.n_users and user > cfg.n_far and cfg.n_index_bits > 0:
        flags = (theta_idx != 0).astype(int)
        phi_hat = angles_to_phi_block(flags, cfg)
    return sym_idx, theta_idx, phi_hat, metric


def detect_sic(y: complex, h: complex, cfg: SystemConfig, user: int) -> DetectionResult:
    """Per-subcarrier SIC detection for a far, near, or virtual user."""
    sym_idx, theta_idx, phi_hat, metric = sic_block(
        np.array([y]), np.array([h]), cfg, user)
    points = cfg.constellation.points
    syms = tuple(complex(points[k]) for k in sym_idx[0])
    return DetectionResult(
        user=user,
        symbol_indices=tuple(int(k) for k in sym_idx[0]),
        symbols=syms,
        theta_indices=tuple(int(t) for t in theta_idx[0]) if theta_idx.size else None,
        phi_hat=int(phi_hat[0]) if phi_hat is not None else None,
        metric=float(metric[0]),
    )


def extract_user_bits(result: DetectionResult, cfg: SystemConfig, user: int) -> np.ndarray:
    """Bits owned by ``user`` in the detected hypothesis.

    Far and near users get their log2(M) symbol bits; in "near" mode a near
    user additionally appends the index bits. The virtual user N+1 gets the
    index bits only.
    """
    const = cfg.constellation
    if user == cfg.n_users + 1:
        if cfg.index_user_mode != "virtual":
            raise ValueError("virtual user requires index_user_mode='virtual'")
        if result.phi_hat is None:
            raise ValueError("result does not resolve the rotation pattern")
        return _phi_bits(result.phi_hat, cfg.n_index_bits)
    if not 1 <= user <= cfg.n_users:
        raise ValueError(f"user {user} out of range")
    if user > len(result.symbol_indices):
        raise ValueError(f"result has no stage for user {user}")
    bits = list(const.bits_for_index(result.symbol_indices[user - 1]))
    if user > cfg.n_far and cfg.index_user_mode == "near" and cfg.n_index_bits > 0:
        if result.phi_hat is None:
            raise ValueError("result does not resolve the rotation pattern")
        bits.extend(_phi_bits(result.phi_hat, cfg.n_index_bits))
    return np.array(bits, dtype=int)


def _phi_bits(phi: int, width: int) -> np.ndarray:
    return np.array([(phi >> k) & 1 for k in range(width - 1, -1, -1)], dtype=int)


def flops_ml(cfg: SystemConfig) -> int:
    """FLOPs per subcarrier for the exhaustive-search detector."""
    return 3 * cfg.mod_order ** cfg.n_users * cfg.n_patterns


def flops_sic(cfg: SystemConfig, user: int) -> int:
    """FLOPs per subcarrier for SIC detection at the given user."""
    M = cfg.mod_order
    if 1 <= user <= cfg.n_far:
        return 3 * M * user + user - 1
    if cfg.n_far < user <= cfg.n_users:
        return 3 * M * cfg.n_far + 4 * M * cfg.n_patterns * (user - cfg.n_far) + user - 1
    raise ValueError(f"user {user} outside the SIC complexity formulas")
