"""Phase-estimation bounds from the quantum Fisher information.

For a pure state and a phase imprinted by ``exp(-i theta n_A)`` the Fisher
information is ``4 Var(n_A)`` and the Cramer-Rao bound is ``1/sqrt(F)``.  The
printed closed forms for the quasi-Bell and Joo states are evaluated as
written and reported next to the number-basis value, never reconciled.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, asdict

import numpy as np
from scipy.optimize import bisect

from . import coherent_algebra as ca
from . import fock

ALPHA_BRACKET = (1e-6, 50.0)
ENERGY_TOL = 1e-10
ORACLE_TAIL = 1e-14


class Family(str, enum.Enum):
    QUASI_BELL_1 = "quasiBell1"
    QUASI_BELL_2 = "quasiBell2"
    QUASI_BELL_3 = "quasiBell3"
    QUASI_BELL_4 = "quasiBell4"
    JOO = "joo"
    NOON = "noon"
    COHERENT = "coherent"

    @property
    def quasi_bell_label(self) -> int | None:
        if self.value.startswith("quasiBell"):
            return int(self.value[-1])
        return None


class EnergyRangeError(ValueError):
    """No amplitude in the search bracket reaches the requested energy."""


def state_for(family: Family | str, alpha: complex) -> ca.CoherentSuperposition:
    family = Family(family)
    label = family.quasi_bell_label
    if label is not None:
        return ca.quasi_bell(label, alpha)
    if family is Family.JOO:
        return ca.joo_state(alpha)
    if family is Family.COHERENT:
        return ca.coherent(alpha)
    raise ValueError(f"{family.value} is not a coherent superposition")


def qfi_symbolic(s: ca.CoherentSuperposition, mode: int = 0) -> float:
    """``4(<n^2> - <n>^2)`` from the exact moments; tiny negatives clipped."""
    var = ca.number_moment(s, mode, 2) - ca.number_moment(s, mode, 1) ** 2
    if var < -1e-9 / 4:
        raise ArithmeticError(f"negative number variance {var!r}")
    return max(0.0, 4.0 * var)


def qfi_oracle(k: fock.FockKet, mode: int = 0) -> float:
    return 4.0 * fock.number_variance(k, mode)


def quasi_bell_k_factor(label: int, alpha: float) -> float:
    """``K+- = (1 +- exp(-2|a|^2)) / (1 +- exp(-4|a|^2))``; + for labels 1, 3."""
    x = abs(alpha) ** 2
    if label in (1, 3):
        return (1.0 + math.exp(-2 * x)) / (1.0 + math.exp(-4 * x))
    if label in (2, 4):
        if x == 0.0:
            raise ca.DegenerateStateError(f"quasi-Bell state {label} vanishes at alpha=0")
        return math.expm1(-2 * x) / math.expm1(-4 * x)
    raise ValueError(f"quasi-Bell label must be 1..4, got {label!r}")


def delta_theta_quasi_bell_paper(label: int, alpha: float) -> float:
    """Printed closed form ``1 / (2 sqrt(|a|^4 K(1-K) + K|a|^2))``.

    Evaluated verbatim.  It is not the same number as ``1/sqrt(4 Var(n_A))``
    computed on the state; see :func:`compare_phase_bounds`.
    """
    k = quasi_bell_k_factor(label, alpha)
    x = abs(alpha) ** 2
    radicand = x * x * k * (1.0 - k) + k * x
    if radicand <= 0.0:
        raise ca.DegenerateStateError("bound diverges at alpha=0")
    return 1.0 / (2.0 * math.sqrt(radicand))


def delta_theta_joo_paper(alpha: float) -> float:
    """``1 / (2|a| h sqrt((|a|^2 + 1) - h^2 |a|^2))`` with ``h = h_J``."""
    a = abs(alpha)
    if a == 0.0:
        raise ca.DegenerateStateError("bound diverges at alpha=0")
    h = ca.joo_norm(a)
    return 1.0 / (2.0 * a * h * math.sqrt((a * a + 1.0) - h * h * a * a))


def reference_limits(mean_photons: float) -> tuple[float, float]:
    """(shot-noise ``1/sqrt(N)``, Heisenberg ``1/N``)."""
    if not mean_photons > 0:
        raise ValueError("mean photon number must be positive")
    return 1.0 / math.sqrt(mean_photons), 1.0 / mean_photons


def mean_photons_total(s: ca.CoherentSuperposition) -> float:
    return sum(ca.number_moment(s, m, 1) for m in range(s.mode_count))


def solve_alpha_for_energy(family: Family | str, target_energy: float) -> float:
    """Real amplitude giving ``target_energy`` mean photons summed over modes.

    Bisection over ``(1e-6, 50]``.  Odd-parity states (quasi-Bell 2 and 4) carry
    more than one photon for every amplitude, so targets at or below one are
    out of range for them.
    """
    family = Family(family)
    if not target_energy > 0:
        raise ValueError("target energy must be positive")
    if family is Family.NOON:
        raise ValueError("NOON states are labelled by photon number, not amplitude")

    def residual(a):
        return mean_photons_total(state_for(family, a)) - target_energy

    lo, hi = ALPHA_BRACKET
    while True:
        # odd-parity norms cancel as 1 - exp(-4a^2); step up until resolvable
        try:
            r_lo = residual(lo)
            break
        except (ca.NotNormalizedError, ca.DegenerateStateError):
            lo *= 10.0
            if lo >= hi:
                raise
    r_hi = residual(hi)
    if r_lo > 0 or r_hi < 0:
        raise EnergyRangeError(
            f"{family.value}: energy {target_energy} outside "
            f"[{r_lo + target_energy:.12g}, {r_hi + target_energy:.12g}] on the amplitude bracket"
        )
    alpha = bisect(residual, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=400)
    if abs(residual(alpha)) > ENERGY_TOL:
        raise EnergyRangeError(f"bisection residual {residual(alpha)!r} above tolerance")
    return float(alpha)


@dataclass
class PhaseBoundReport:
    family: str
    alpha: float | None
    noon_n: int | None
    mean_photons_total: float
    qfi_symbolic: float | None
    qfi_oracle: float
    delta_theta_paper_formula: float | None
    delta_theta_from_oracle: float
    paper_vs_oracle_deviation: float | None
    sql_reference: float
    heisenberg_reference: float
    cutoff: int

    def as_row(self) -> dict:
        return asdict(self)


def _closed_form(family: Family, alpha: float) -> float | None:
    label = family.quasi_bell_label
    if label is not None:
        return delta_theta_quasi_bell_paper(label, alpha)
    if family is Family.JOO:
        return delta_theta_joo_paper(alpha)
    return None


def phase_bound(family: Family | str, alpha: float | None = None, noon_n: int | None = None,
                tail_tolerance: float = ORACLE_TAIL) -> PhaseBoundReport:
    """Fisher-information report for one state, phase on mode A."""
    family = Family(family)
    if family is Family.NOON:
        if noon_n is None:
            raise ValueError("noon family needs a photon number")
        cutoff = max(fock.MIN_CUTOFF, noon_n + 1)
        k = fock.noon_ket(noon_n, cutoff)
        qfi_o = qfi_oracle(k, 0)
        energy = fock.number_mean(k, 0) + fock.number_mean(k, 1)
        qfi_s, closed, a = None, None, None
    else:
        if alpha is None:
            raise ValueError(f"{family.value} needs an amplitude")
        a = float(alpha)
        s = state_for(family, a)
        cutoff = fock.choose_truncation(abs(a), tail_tolerance)
        qfi_s = qfi_symbolic(s, 0)
        qfi_o = qfi_oracle(fock.to_fock_ket(s, cutoff), 0)
        energy = mean_photons_total(s)
        closed = _closed_form(family, a)
    dtheta = 1.0 / math.sqrt(qfi_o) if qfi_o > 0 else math.inf
    sql, heis = reference_limits(energy)
    deviation = abs(closed - dtheta) / closed if closed is not None else None
    return PhaseBoundReport(
        family=family.value, alpha=a, noon_n=noon_n, mean_photons_total=energy,
        qfi_symbolic=qfi_s, qfi_oracle=qfi_o, delta_theta_paper_formula=closed,
        delta_theta_from_oracle=dtheta, paper_vs_oracle_deviation=deviation,
        sql_reference=sql, heisenberg_reference=heis, cutoff=cutoff,
    )


def _noon_photons(total_energy: float) -> int:
    n = round(total_energy)
    if n < 1 or abs(n - total_energy) > 1e-12:
        raise EnergyRangeError(f"NOON states only carry integer energy, not {total_energy}")
    return int(n)


def compare_phase_bounds(families, total_energy: float) -> list[PhaseBoundReport]:
    """One report per family, every state carrying ``total_energy`` photons."""
    if not total_energy > 0:
        raise ValueError("total energy must be positive")
    reports = []
    for family in map(Family, families):
        if family is Family.NOON:
            reports.append(phase_bound(family, noon_n=_noon_photons(total_energy)))
        else:
            reports.append(phase_bound(family, alpha=solve_alpha_for_energy(family, total_energy)))
    return reports
