"""Truncated Fock-space numerics, used as an independent check on the closed forms.

Kets are dense vectors over ``{0..cutoff-1}`` per mode, mode 0 (A) slowest.
Nothing in here calls the overlap formulas of :mod:`ecs_metrology.coherent_algebra`;
a coherent superposition is expanded term by term into number-basis kets.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np
from scipy.special import gammainc

from .coherent_algebra import CoherentSuperposition, DimensionError

MIN_CUTOFF = 8
MAX_MODES = 2
EIG_CLIP = 1e-10
ENTROPY_EIG_FLOOR = 1e-12


class NotAStateError(ValueError):
    """Matrix has a significantly negative eigenvalue."""


@dataclass(frozen=True, eq=False)
class FockKet:
    cutoff: int
    mode_count: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.cutoff < 1 or not 1 <= self.mode_count <= MAX_MODES:
            raise DimensionError(f"unsupported cutoff/modes {self.cutoff}/{self.mode_count}")
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != self.cutoff ** self.mode_count:
            raise DimensionError(
                f"expected {self.cutoff ** self.mode_count} amplitudes, got {amps.size}"
            )
        norm = np.linalg.norm(amps)
        if not 0.0 < norm <= 1.0 + 1e-9:
            raise ValueError(f"ket norm {norm!r} outside (0, 1]")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per mode."""
        return self.amplitudes.reshape((self.cutoff,) * self.mode_count)


@dataclass(frozen=True, eq=False)
class FockDensity:
    cutoff: int
    mode_count: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        dim = self.cutoff ** self.mode_count
        if m.shape != (dim, dim):
            raise DimensionError(f"density matrix must be {dim}x{dim}, got {m.shape}")
        if not np.allclose(m, m.conj().T, rtol=0.0, atol=1e-10):
            raise NotAStateError("density matrix is not Hermitian")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def eigenvalues(self) -> np.ndarray:
        """Ascending eigenvalues with ``[-1e-10, 0)`` clipped to zero."""
        w = np.linalg.eigvalsh(self.matrix)
        return np.where((w < 0.0) & (w >= -EIG_CLIP), 0.0, w)

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


def poisson_tail(amplitude: float, cutoff: int) -> float:
    """Probability mass of photon numbers ``>= cutoff`` in ``|amplitude>``."""
    mean = float(amplitude) ** 2
    if cutoff <= 0:
        return 1.0
    if mean == 0.0:
        return 0.0
    # P(N >= n) for N ~ Poisson(mu) is the regularized lower gamma P(n, mu)
    return float(gammainc(cutoff, mean))


def choose_truncation(max_amplitude: float, tail_tolerance: float = 1e-14) -> int:
    """Smallest cutoff (at least 8) whose Poisson tail is below ``tail_tolerance``."""
    if not 0.0 < tail_tolerance < 1.0:
        raise ValueError("tail_tolerance must lie in (0, 1)")
    cutoff = MIN_CUTOFF
    while poisson_tail(abs(max_amplitude), cutoff) > tail_tolerance:
        cutoff += 1
    return cutoff


def coherent_vector(alpha: complex, cutoff: int) -> np.ndarray:
    """Number-basis coefficients ``exp(-|a|^2/2) a^n / sqrt(n!)`` for n < cutoff."""
    if cutoff < 1:
        raise ValueError("cutoff must be positive")
    alpha = complex(alpha)
    c = np.empty(cutoff, dtype=complex)
    c[0] = np.exp(-0.5 * abs(alpha) ** 2)
    for n in range(1, cutoff):
        c[n] = c[n - 1] * alpha / np.sqrt(n)
    return c


def coherent_ket(alpha: complex, cutoff: int) -> FockKet:
    return FockKet(cutoff, 1, coherent_vector(alpha, cutoff))


def noon_ket(n: int, cutoff: int) -> FockKet:
    """``(|N>|0> + |0>|N>)/sqrt(2)``."""
    if n < 1:
        raise ValueError("NOON photon number must be positive")
    if cutoff <= n:
        raise DimensionError(f"cutoff {cutoff} cannot hold {n} photons")
    psi = np.zeros((cutoff, cutoff), dtype=complex)
    psi[n, 0] = psi[0, n] = 1.0 / np.sqrt(2.0)
    return FockKet(cutoff, 2, psi.reshape(-1))


def to_fock_ket(s: CoherentSuperposition, cutoff: int) -> FockKet:
    """Expand every coherent product term in the number basis and sum."""
    if s.mode_count > MAX_MODES:
        raise DimensionError(f"at most {MAX_MODES} modes supported")
    total = np.zeros(cutoff ** s.mode_count, dtype=complex)
    for coeff, amps in zip(s.coefficients, s.amplitudes):
        total += coeff * reduce(np.kron, [coherent_vector(a, cutoff) for a in amps])
    return FockKet(cutoff, s.mode_count, total)


def inner_product(k1: FockKet, k2: FockKet) -> complex:
    if (k1.cutoff, k1.mode_count) != (k2.cutoff, k2.mode_count):
        raise DimensionError("kets live in different truncated spaces")
    return complex(np.vdot(k1.amplitudes, k2.amplitudes))


def partial_trace_b(k: FockKet) -> FockDensity:
    """Reduced state of mode A, ``rho_A[m, n] = sum_j psi[m, j] conj(psi[n, j])``."""
    if k.mode_count != 2:
        raise DimensionError("partial trace needs a two-mode ket")
    psi = k.tensor()
    rho = psi @ psi.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return FockDensity(k.cutoff, 1, rho)


def density(k: FockKet) -> FockDensity:
    return FockDensity(k.cutoff, k.mode_count, np.outer(k.amplitudes, k.amplitudes.conj()))


def von_neumann_entropy(rho: FockDensity) -> float:
    """Entropy in bits; eigenvalues below 1e-12 contribute nothing."""
    w = np.linalg.eigvalsh(rho.matrix)
    if w.min() < -1e-8:
        raise NotAStateError(f"eigenvalue {w.min()!r} is negative")
    w = w[w > ENTROPY_EIG_FLOOR]
    return float(-np.sum(w * np.log2(w))) + 0.0


def number_distribution(k: FockKet, mode: int) -> np.ndarray:
    """Normalized photon-number distribution of ``mode``."""
    if not 0 <= mode < k.mode_count:
        raise DimensionError(f"mode {mode} out of range")
    probs = np.abs(k.tensor()) ** 2
    other = tuple(ax for ax in range(k.mode_count) if ax != mode)
    marginal = probs.sum(axis=other) if other else probs
    total = marginal.sum()
    if abs(total - 1.0) > 1e-6:
        raise ValueError(f"ket norm^2 {total!r} too far from 1")
    return marginal / total


def number_mean(k: FockKet, mode: int) -> float:
    p = number_distribution(k, mode)
    return float(np.arange(k.cutoff) @ p)


def number_variance(k: FockKet, mode: int) -> float:
    p = number_distribution(k, mode)
    n = np.arange(k.cutoff, dtype=float)
    mean = n @ p
    return float(((n - mean) ** 2) @ p)
