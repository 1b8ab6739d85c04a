"""Analytical error rates: pairwise error probabilities over Rayleigh fading
and the bit-weighted union bound on BER for an enumerated superimposed alphabet."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import erfc

from .superposition import SuperAlphabet, user_bit_positions


@dataclass
class PairwiseTerm:
    """One pairwise error event between alphabet entries i and j."""

    i: int
    j: int
    delta: complex
    bit_errors: int
    pep: float


def q_function(t: float) -> float:
    """Gaussian tail probability Q(t) = 0.5 * erfc(t / sqrt(2))."""
    return 0.5 * erfc(t / np.sqrt(2))


def pep_rayleigh(delta: complex, sigma2: float, rel_tol: float = 1e-10) -> float:
    """Average pairwise error probability over unit-mean Rayleigh fading power.

    Integrates Q(sqrt(|delta|^2 * u / (2 sigma^2))) against the exponential
    density of the channel power u = |h|^2 by adaptive quadrature.
    """
    if sigma2 <= 0:
        raise ValueError("noise variance must be positive")
    d2 = abs(delta) ** 2
    if d2 == 0:
        return 0.5
    scale = d2 / (2 * sigma2)

    def integrand(u):
        return q_function(np.sqrt(scale * u)) * np.exp(-u)

    value, _ = quad(integrand, 0.0, np.inf, epsabs=0.0, epsrel=rel_tol, limit=200)
    return value


def pep_rayleigh_closed_form(delta: complex, sigma2: float) -> float:
    """Closed form of the same average: 0.5 * (1 - sqrt(c / (1 + c))) with
    c = |delta|^2 / (4 sigma^2). Used as the independent oracle for the
    quadrature path."""
    c = abs(delta) ** 2 / (4 * sigma2)
    return 0.5 * (1.0 - np.sqrt(c / (1.0 + c)))


def pairwise_terms(alphabet: SuperAlphabet, sigma2: float) -> list[PairwiseTerm]:
    """All ordered pairwise error events with their averaged probabilities."""
    terms = []
    cache: dict[float, float] = {}
    bits = alphabet.bits.astype(int)
    for i in range(len(alphabet)):
        for j in range(len(alphabet)):
            if i == j:
                continue
            delta = complex(alphabet.x[j] - alphabet.x[i])
            key = round(abs(delta) ** 2, 12)
            if key not in cache:
                cache[key] = pep_rayleigh(delta, sigma2)
            terms.append(PairwiseTerm(
                i=i, j=j, delta=delta,
                bit_errors=int(np.count_nonzero(bits[i] != bits[j])),
                pep=cache[key],
            ))
    return terms


def union_bound_ber(alphabet: SuperAlphabet, sigma2: float, user=None) -> float:
    """Bit-weighted union bound on BER for the ML detector.

    With ``user`` None the Hamming weight runs over the full per-subcarrier
    bit-string and the bound is normalized by p * 2^p. Restricting to one
    user's bit positions (1-based index or "index") gives that user's bound,
    normalized by its own bit count.
    """
    if sigma2 <= 0:
        raise ValueError("noise variance must be positive")
    bits = alphabet.bits.astype(int)
    size, p = bits.shape
    if size != 2 ** p:
        raise ValueError("alphabet size inconsistent with bit length")
    if user is None:
        positions = np.arange(p)
    else:
        positions = np.fromiter(user_bit_positions(alphabet.cfg, user), dtype=int)
        if positions.size == 0:
            raise ValueError(f"user {user!r} carries no bits in this configuration")
    sub = bits[:, positions]

    d2 = np.abs(alphabet.x[None, :] - alphabet.x[:, None]) ** 2
    errs = np.count_nonzero(sub[:, None, :] != sub[None, :, :], axis=2)
    cache: dict[float, float] = {}
    total = 0.0
    for i in range(size):
        for j in range(size):
            if i == j or errs[i, j] == 0:
                continue
            key = round(float(d2[i, j]), 12)
            if key not in cache:
                cache[key] = pep_rayleigh(np.sqrt(d2[i, j]), sigma2)
            total += cache[key] * errs[i, j]
    return total / (positions.size * size)
