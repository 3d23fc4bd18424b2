"""Exact algebra on finite superpositions of multimode coherent product states.

A state is a list of terms ``c_j |a_j1> |a_j2> ... |a_jM>``.  Everything here is
closed form: overlaps use ``<u|v> = exp(-|u|^2/2 - |v|^2/2 + conj(u) v)`` and
number-operator moments use the corresponding normal-ordered identities, so no
Fock-space truncation is involved.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

NORMALIZED_TOL = 1e-9
KAPPA_REAL_TOL = 1e-12


class DimensionError(ValueError):
    """Operands disagree on mode count, or a mode index is out of range."""


class DegenerateStateError(ValueError):
    """The superposition has zero norm and cannot be normalized."""


class NotNormalizedError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CoherentSuperposition:
    """Weighted sum of coherent product states.

    ``coefficients`` has shape ``(terms,)`` and ``amplitudes`` has shape
    ``(terms, modes)``.  Both arrays are read-only; every operation returns a
    new instance.  Terms are never merged, so ``|a> - |a>`` is kept as two
    terms and only rejected when it is normalized.
    """

    coefficients: np.ndarray
    amplitudes: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coefficients, dtype=complex).reshape(-1)
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.ndim == 1:
            amps = amps.reshape(-1, 1)
        if amps.ndim != 2 or amps.shape[1] == 0:
            raise DimensionError("amplitudes must be a (terms, modes) array")
        if coeffs.size == 0:
            raise ValueError("a superposition needs at least one term")
        if amps.shape[0] != coeffs.size:
            raise DimensionError(
                f"{coeffs.size} coefficients but {amps.shape[0]} amplitude rows"
            )
        coeffs.setflags(write=False)
        amps.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[complex, Sequence[complex]]]):
        """Build from ``[(coefficient, [amp_mode0, amp_mode1, ...]), ...]``."""
        terms = list(terms)
        if not terms:
            raise ValueError("a superposition needs at least one term")
        widths = {len(amps) for _, amps in terms}
        if len(widths) != 1:
            raise DimensionError("all terms must have the same number of modes")
        return cls([c for c, _ in terms], [list(a) for _, a in terms])

    @property
    def mode_count(self) -> int:
        return self.amplitudes.shape[1]

    @property
    def terms(self) -> list[tuple[complex, tuple[complex, ...]]]:
        return [(complex(c), tuple(complex(a) for a in row))
                for c, row in zip(self.coefficients, self.amplitudes)]

    def max_amplitude(self) -> float:
        return float(np.max(np.abs(self.amplitudes)))

    def __add__(self, other: "CoherentSuperposition") -> "CoherentSuperposition":
        if not isinstance(other, CoherentSuperposition):
            return NotImplemented
        _check_modes(self, other)
        return CoherentSuperposition(
            np.concatenate([self.coefficients, other.coefficients]),
            np.vstack([self.amplitudes, other.amplitudes]),
        )

    def __sub__(self, other: "CoherentSuperposition") -> "CoherentSuperposition":
        if not isinstance(other, CoherentSuperposition):
            return NotImplemented
        return self + (-1.0) * other

    def __mul__(self, scalar: complex) -> "CoherentSuperposition":
        return CoherentSuperposition(self.coefficients * complex(scalar), self.amplitudes)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __repr__(self):
        body = " + ".join(
            f"({c:.6g})|" + ", ".join(f"{a:.6g}" for a in amps) + ">"
            for c, amps in self.terms
        )
        return f"CoherentSuperposition({body})"


def coherent(*amplitudes: complex) -> CoherentSuperposition:
    """Single product state ``|a0>|a1>...`` with unit coefficient."""
    if not amplitudes:
        raise DimensionError("need at least one mode amplitude")
    return CoherentSuperposition([1.0], [list(amplitudes)])


def _check_modes(s1: CoherentSuperposition, s2: CoherentSuperposition):
    if s1.mode_count != s2.mode_count:
        raise DimensionError(
            f"mode count mismatch: {s1.mode_count} vs {s2.mode_count}"
        )


def _check_mode_index(s: CoherentSuperposition, mode: int):
    if not 0 <= mode < s.mode_count:
        raise DimensionError(f"mode {mode} out of range for {s.mode_count} modes")


def coherent_overlap(u, v):
    """``<u|v>`` for single-mode coherent states (broadcasts)."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    return np.exp(-0.5 * np.abs(u) ** 2 - 0.5 * np.abs(v) ** 2 + np.conj(u) * v)


def _term_overlaps(s1: CoherentSuperposition, s2: CoherentSuperposition) -> np.ndarray:
    # (terms1, terms2, modes) of single-mode overlaps
    u = s1.amplitudes[:, None, :]
    v = s2.amplitudes[None, :, :]
    return coherent_overlap(u, v)


def overlap(s1: CoherentSuperposition, s2: CoherentSuperposition) -> complex:
    """Inner product ``<s1|s2>``, conjugate-linear in ``s1``."""
    _check_modes(s1, s2)
    gram = np.prod(_term_overlaps(s1, s2), axis=2)
    return complex(np.conj(s1.coefficients) @ gram @ s2.coefficients)


def self_overlap(s: CoherentSuperposition) -> float:
    return overlap(s, s).real


def normalize(s: CoherentSuperposition) -> CoherentSuperposition:
    norm_sq = self_overlap(s)
    scale = np.max(np.abs(s.coefficients)) ** 2
    # relative guard: exact cancellations such as |a> - |a> leave rounding noise
    if not norm_sq > 1e-14 * max(scale, 1e-300):
        raise DegenerateStateError(f"superposition has zero norm ({norm_sq:.3g}): {s!r}")
    return CoherentSuperposition(s.coefficients / np.sqrt(norm_sq), s.amplitudes)


def is_normalized(s: CoherentSuperposition, tol: float = NORMALIZED_TOL) -> bool:
    return abs(self_overlap(s) - 1.0) <= tol


def apply_phase_shift(s: CoherentSuperposition, theta: float, mode: int) -> CoherentSuperposition:
    """Act with ``exp(-i theta n)`` on ``mode``: ``|a> -> |a exp(-i theta)>``.

    The generator is taken as the unitary with the imaginary unit; the real
    exponential ``exp(-theta n)`` is not norm preserving.
    """
    _check_mode_index(s, mode)
    amps = s.amplitudes.copy()
    amps[:, mode] = amps[:, mode] * np.exp(-1j * theta)
    return CoherentSuperposition(s.coefficients, amps)


def apply_displacement(
    s: CoherentSuperposition,
    delta: complex,
    mode: int,
    branches: Sequence[bool] | np.ndarray | None = None,
) -> CoherentSuperposition:
    """Displace ``mode`` by ``delta`` using ``D(d)|b> = exp((d b* - d* b)/2) |b + d>``.

    ``branches`` optionally restricts the action to a subset of terms (a
    boolean mask over terms); unselected terms are left untouched.
    """
    _check_mode_index(s, mode)
    delta = complex(delta)
    mask = np.ones(len(s.coefficients), dtype=bool) if branches is None else np.asarray(branches, dtype=bool)
    if mask.shape != s.coefficients.shape:
        raise DimensionError("branch mask must have one entry per term")
    beta = s.amplitudes[:, mode]
    weyl = np.exp((delta * np.conj(beta) - np.conj(delta) * beta) / 2)
    coeffs = np.where(mask, s.coefficients * weyl, s.coefficients)
    amps = s.amplitudes.copy()
    amps[:, mode] = np.where(mask, beta + delta, beta)
    return CoherentSuperposition(coeffs, amps)


def number_moment(s: CoherentSuperposition, mode: int, order: int) -> float:
    """``<s| n_mode^order |s>`` for ``order`` 1 or 2, exactly."""
    _check_mode_index(s, mode)
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    norm_sq = self_overlap(s)
    if abs(norm_sq - 1.0) > NORMALIZED_TOL:
        raise NotNormalizedError(f"state norm^2 is {norm_sq!r}, expected 1")
    pair = _term_overlaps(s, s)
    gram = np.prod(pair, axis=2)
    w = np.conj(s.amplitudes[:, None, mode]) * s.amplitudes[None, :, mode]
    weight = w if order == 1 else w * (w + 1)
    value = np.conj(s.coefficients) @ (gram * weight) @ s.coefficients
    if abs(value.imag) > 1e-10 * max(1.0, abs(value.real)):
        raise ArithmeticError(f"number moment has imaginary residue {value.imag!r}")
    return float(value.real)


# Named states.

def kappa(alpha: complex) -> float:
    """``<alpha|-alpha> = exp(-2|alpha|^2)``, always real."""
    return float(np.exp(-2.0 * abs(alpha) ** 2))


_QUASI_BELL_PATTERN = {
    # label: (sign between branches, mode-B sign relative to mode A)
    1: (+1, +1),
    2: (-1, +1),
    3: (+1, -1),
    4: (-1, -1),
}


def _check_label(label: int):
    if label not in _QUASI_BELL_PATTERN:
        raise ValueError(f"quasi-Bell label must be 1..4, got {label!r}")


def quasi_bell_norm(label: int, alpha: complex) -> float:
    """Normalizer ``h1 = h3 = 1/sqrt(2(1+k^2))``, ``h2 = h4 = 1/sqrt(2(1-k^2))``."""
    _check_label(label)
    x = 4.0 * abs(alpha) ** 2  # k^2 = exp(-x)
    if label in (1, 3):
        return float(1.0 / np.sqrt(2.0 * (1.0 + np.exp(-x))))
    denom = -2.0 * np.expm1(-x)
    if denom <= 0.0:
        raise DegenerateStateError(f"quasi-Bell state {label} vanishes at alpha=0")
    return float(1.0 / np.sqrt(denom))


def quasi_bell(label: int, alpha: complex) -> CoherentSuperposition:
    """Two-mode quasi-Bell state ``h(|a>|+-a> +- |-a>|-+a>)``."""
    h = quasi_bell_norm(label, alpha)
    sign, b_sign = _QUASI_BELL_PATTERN[label]
    alpha = complex(alpha)
    return CoherentSuperposition(
        [h, sign * h],
        [[alpha, b_sign * alpha], [-alpha, -b_sign * alpha]],
    )


def joo_norm(alpha: complex) -> float:
    return float(1.0 / np.sqrt(2.0 * (1.0 + np.exp(-abs(alpha) ** 2))))


def joo_state(alpha: complex) -> CoherentSuperposition:
    """``h_J (|a>|0> + |0>|a>)``."""
    h = joo_norm(alpha)
    alpha = complex(alpha)
    return CoherentSuperposition([h, h], [[alpha, 0.0], [0.0, alpha]])


def gram_matrix_quasi_bell(alpha: complex) -> np.ndarray:
    """4x4 matrix of overlaps between the quasi-Bell states, indices 1..4 -> 0..3.

    For ``alpha = 0`` the states 2 and 4 do not exist, so this raises.
    """
    k = overlap(coherent(alpha), coherent(-alpha))
    if abs(k.imag) > KAPPA_REAL_TOL:
        raise ValueError(
            "<alpha|-alpha> is not real; use overlap() on the individual states"
        )
    states = [quasi_bell(label, alpha) for label in (1, 2, 3, 4)]
    return np.array([[overlap(a, b) for b in states] for a in states])


def gram_off_diagonal(alpha: complex) -> float:
    """Closed-form ``D = 2k/(1+k^2)`` for the (1,3) Gram entry."""
    k = kappa(alpha)
    return 2.0 * k / (1.0 + k * k)


def binary_entropy(p: float) -> float:
    """Shannon entropy of ``(p, 1-p)`` in bits."""
    return float(sum(-q * np.log2(q) for q in (p, 1.0 - p) if q > 0.0))


def entanglement_of_formation(label: int, alpha: complex) -> float:
    """Entanglement of a quasi-Bell state in bits.

    States 1 and 3 give ``H((1 + C13)/2)`` with ``C13 = |<Psi1|Psi3>|``;
    states 2 and 4 are maximally entangled (one ebit) for every ``alpha != 0``.
    """
    _check_label(label)
    if label in (2, 4):
        quasi_bell_norm(label, alpha)  # raises at alpha = 0
        return 1.0
    c13 = abs(overlap(quasi_bell(1, alpha), quasi_bell(3, alpha)))
    return min(1.0, max(0.0, binary_entropy((1.0 + c13) / 2.0)))
