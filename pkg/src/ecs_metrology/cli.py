"""Command-line sweeps producing CSV or JSON tables.

Exit codes: 0 success, 1 computation error (every row failed), 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import coherent_algebra as ca
from . import detection as det
from . import estimation as est
from . import fock

FAMILIES = [f.value for f in est.Family]
COMPUTE_ERRORS = (ValueError, ArithmeticError)


class UsageError(Exception):
    pass


# -- argument parsing ------------------------------------------------------

def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def parse_range(text: str) -> list[float]:
    """``start:stop:count[:log]`` (or ``:lin``) to a list of grid points."""
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise argparse.ArgumentTypeError(f"range must be start:stop:count[:log], got {text!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}")
    scale = parts[3] if len(parts) == 4 else "lin"
    if count < 1 or start > stop:
        raise argparse.ArgumentTypeError("range needs count >= 1 and start <= stop")
    if scale == "log":
        if start <= 0:
            raise argparse.ArgumentTypeError("log range needs a positive start")
        grid = np.geomspace(start, stop, count)
    elif scale in ("lin", "linear"):
        grid = np.linspace(start, stop, count)
    else:
        raise argparse.ArgumentTypeError(f"unknown range scale {scale!r}")
    return [float(x) for x in grid]


def _priors(text: str) -> tuple[float, float]:
    vals = _float_list(text)
    if len(vals) != 2 or any(not 0 <= v <= 1 for v in vals) or abs(sum(vals) - 1) > 1e-12:
        raise argparse.ArgumentTypeError("priors must be two numbers in [0,1] summing to 1")
    return vals[0], vals[1]


def _families(text: str) -> list[str]:
    out = [t.strip() for t in text.split(",") if t.strip()]
    bad = [f for f in out if f not in FAMILIES]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown family {bad[0]!r}; choose from {', '.join(FAMILIES)}")
    return out


def _clicks(text: str) -> list[bool]:
    vals = [t.strip().lower() for t in text.split(",") if t.strip()]
    table = {"0": False, "1": True, "false": False, "true": True}
    if not vals or any(v not in table for v in vals):
        raise argparse.ArgumentTypeError("clicks must be a comma-separated list of 0/1")
    return [table[v] for v in vals]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--output", metavar="PATH", help="write here instead of stdout")
    common.add_argument("--jobs", type=int, default=1, help="concurrent sweep points")

    alpha = argparse.ArgumentParser(add_help=False)
    alpha.add_argument("--alpha", type=_float_list, action="append", default=[],
                       help="amplitude(s), comma separated; repeatable")
    alpha.add_argument("--alpha-range", type=parse_range, action="append", default=[],
                       metavar="START:STOP:COUNT[:log]")

    parser = argparse.ArgumentParser(prog="ecs-metrology", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phase-bound", parents=[common, alpha],
                       help="Fisher information and phase bounds per state")
    p.add_argument("--family", type=_families, action="append", default=[])
    p.add_argument("--n", type=_int_list, action="append", default=[],
                   help="NOON photon number(s)")

    p = sub.add_parser("compare-energy", parents=[common],
                       help="phase bounds at equal total photon number")
    p.add_argument("--family", type=_families, action="append", default=[])
    p.add_argument("--energy", type=_float_list, action="append", default=[])
    p.add_argument("--energy-range", type=parse_range, action="append", default=[],
                   metavar="START:STOP:COUNT[:log]")

    sub.add_parser("entanglement", parents=[common, alpha],
                   help="Gram entry and entanglement of the quasi-Bell states")

    p = sub.add_parser("force-detect", parents=[common, alpha],
                       help="force-probe versus coherent-state detection error")
    p.add_argument("--epsilon", type=_float_list, action="append", default=[])
    p.add_argument("--epsilon-range", type=parse_range, action="append", default=[],
                   metavar="START:STOP:COUNT[:log]")
    p.add_argument("--priors", type=_priors, default=(0.5, 0.5), metavar="P0,P1")
    p.add_argument("--trials", type=int, default=0, help="Monte Carlo shots (0 disables)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--force-displaces-vacuum", action="store_true",
                   help="extension: the force also displaces the vacuum branch")

    p = sub.add_parser("bank-design", parents=[common], help="matched parallel probe bank")
    p.add_argument("--epsilon", type=_float_list, action="append", default=[])
    p.add_argument("--epsilon-range", type=parse_range, action="append", default=[],
                   metavar="START:STOP:COUNT[:log]")
    p.add_argument("--demo-clicks", type=_clicks, metavar="0,1,0")
    return parser


def _collect(lists, ranges) -> list[float]:
    return [x for chunk in itertools.chain(lists, ranges) for x in chunk]


# -- row producers ---------------------------------------------------------

PHASE_FIELDS = [
    "family", "alpha", "noon_n", "mean_photons_total", "qfi_symbolic", "qfi_oracle",
    "delta_theta_paper_formula", "delta_theta_from_oracle", "paper_vs_oracle_deviation",
    "sql_reference", "heisenberg_reference", "cutoff",
]


def _error_row(fields, error, **known):
    row = {f: None for f in fields}
    row.update(known)
    row["error"] = error
    return row


def _phase_row(point):
    family, alpha, n = point
    try:
        row = est.phase_bound(family, alpha=alpha, noon_n=n).as_row()
        row["error"] = None
        return row
    except COMPUTE_ERRORS as exc:
        return _error_row(PHASE_FIELDS, f"{type(exc).__name__}: {exc}",
                          family=family, alpha=alpha, noon_n=n)


def _compare_row(point):
    energy, family = point
    try:
        if family == est.Family.NOON.value:
            report = est.phase_bound(family, noon_n=est._noon_photons(energy))
        else:
            report = est.phase_bound(family, alpha=est.solve_alpha_for_energy(family, energy))
        return {"energy": energy, **report.as_row(), "error": None}
    except COMPUTE_ERRORS as exc:
        return {"energy": energy,
                **_error_row(PHASE_FIELDS, f"{type(exc).__name__}: {exc}", family=family)}


ENTANGLEMENT_FIELDS = [
    "alpha", "kappa", "gram_d_closed_form", "gram_d_computed", "e_psi1", "e_psi3", "e_psi2",
    "e_psi4", "oracle_entropy_psi1", "abs_diff_psi1", "oracle_entropy_psi2", "cutoff", "error",
]


def _entanglement_row(alpha):
    row = {f: None for f in ENTANGLEMENT_FIELDS}
    row["alpha"] = alpha
    try:
        cutoff = fock.choose_truncation(abs(alpha), 1e-14)
        row["cutoff"] = cutoff
        row["kappa"] = ca.kappa(alpha)
        row["gram_d_closed_form"] = ca.gram_off_diagonal(alpha)
        row["e_psi1"] = ca.entanglement_of_formation(1, alpha)
        row["e_psi3"] = ca.entanglement_of_formation(3, alpha)
        rho = fock.partial_trace_b(fock.to_fock_ket(ca.quasi_bell(1, alpha), cutoff))
        row["oracle_entropy_psi1"] = fock.von_neumann_entropy(rho)
        row["abs_diff_psi1"] = abs(row["e_psi1"] - row["oracle_entropy_psi1"])
        try:
            gram = ca.gram_matrix_quasi_bell(alpha)
            row["gram_d_computed"] = float(gram[0, 2].real)
            row["e_psi2"] = ca.entanglement_of_formation(2, alpha)
            row["e_psi4"] = ca.entanglement_of_formation(4, alpha)
            rho2 = fock.partial_trace_b(fock.to_fock_ket(ca.quasi_bell(2, alpha), cutoff))
            row["oracle_entropy_psi2"] = fock.von_neumann_entropy(rho2)
        except ca.DegenerateStateError:
            row["error"] = "psi2/psi4 degenerate at alpha=0"
    except COMPUTE_ERRORS as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


FORCE_FIELDS = [
    "alpha", "epsilon", "beta", "prior0", "prior1", "force_displaces_vacuum",
    "force_overlap", "force_overlap_abs", "force_overlap_oracle_abs", "pe_ecs",
    "paper_claim_pe_ecs", "coherent_overlap_abs", "pe_coherent", "trials", "seed",
    "mc_pe_ecs", "mc_pe_coherent", "error",
]


def _force_row(point, priors, trials, seed, displaces_vacuum):
    alpha, eps = point
    row = {f: None for f in FORCE_FIELDS}
    row.update(alpha=alpha, epsilon=eps, prior0=priors[0], prior1=priors[1],
               force_displaces_vacuum=displaces_vacuum, trials=trials, seed=seed,
               paper_claim_pe_ecs=det.PAPER_CLAIM_PE_ECS)
    try:
        beta = math.sqrt(eps)
        row["beta"] = beta
        cmp = det.error_comparison(alpha, beta, priors[0], displaces_vacuum)
        pair = det.build_force_probe_pair(alpha, eps, displaces_vacuum)
        cutoff = fock.choose_truncation(max(abs(alpha), beta), 1e-14)
        oracle = fock.inner_product(fock.to_fock_ket(pair.after, cutoff),
                                    fock.to_fock_ket(pair.before, cutoff))
        problem0, c_overlap = det.coherent_baseline(beta, eps, priors[0])
        row.update(force_overlap=cmp.force_overlap, force_overlap_abs=abs(cmp.force_overlap),
                   force_overlap_oracle_abs=abs(oracle), pe_ecs=cmp.pe_ecs,
                   coherent_overlap_abs=abs(c_overlap), pe_coherent=cmp.pe_coherent)
        if trials > 0:
            ecs_problem = det.DetectionProblem(pair.before, pair.after, priors[0], priors[1])
            row["mc_pe_ecs"] = det.monte_carlo_discrimination(ecs_problem, trials, seed)
            row["mc_pe_coherent"] = det.monte_carlo_discrimination(problem0, trials, seed)
    except COMPUTE_ERRORS as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


BANK_FIELDS = ["index", "epsilon", "beta", "beta_squared", "click", "bank_decision"]


# -- output ----------------------------------------------------------------

def _fmt_float(x: float) -> str:
    return format(x, ".17g")


def _fmt_complex(z: complex) -> str:
    sign = "-" if math.copysign(1.0, z.imag) < 0 else "+"
    return f"{_fmt_float(z.real)}{sign}{_fmt_float(abs(z.imag))}i"


def _plain(value):
    """Convert a cell to a JSON-native value (complex -> ``re+imi`` string)."""
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return _fmt_complex(complex(value))
    return float(value)


def _csv_cell(value) -> str:
    value = _plain(value)
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return _fmt_float(value)
    return str(value)


def render(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([{k: _plain(v) for k, v in r.items()} for r in rows], indent=1) + "\n"
    buf = io.StringIO()
    fields = list(rows[0].keys()) if rows else []
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for r in rows:
        writer.writerow([_csv_cell(r.get(f)) for f in fields])
    return buf.getvalue()


def _map(fn, points, jobs):
    if jobs > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, points))
    return [fn(p) for p in points]


# -- commands --------------------------------------------------------------

def cmd_phase_bound(args) -> list[dict]:
    families = [f for chunk in args.family for f in chunk]
    if not families:
        raise UsageError("phase-bound needs --family")
    alphas = _collect(args.alpha, args.alpha_range)
    ns = [n for chunk in args.n for n in chunk]
    points = []
    for family in families:
        if family == est.Family.NOON.value:
            if not ns:
                raise UsageError("family noon needs --n")
            points += [(family, None, n) for n in ns]
        else:
            if not alphas:
                raise UsageError(f"family {family} needs --alpha or --alpha-range")
            points += [(family, a, None) for a in alphas]
    return _map(_phase_row, points, args.jobs)


def cmd_compare_energy(args) -> list[dict]:
    families = [f for chunk in args.family for f in chunk] or [
        "joo", "quasiBell1", "quasiBell2", "quasiBell3", "quasiBell4"]
    energies = _collect(args.energy, args.energy_range)
    if not energies:
        raise UsageError("compare-energy needs --energy or --energy-range")
    points = [(e, f) for e in energies for f in families]
    return _map(_compare_row, points, args.jobs)


def cmd_entanglement(args) -> list[dict]:
    alphas = _collect(args.alpha, args.alpha_range)
    if not alphas:
        raise UsageError("entanglement needs --alpha or --alpha-range")
    return _map(_entanglement_row, alphas, args.jobs)


def cmd_force_detect(args) -> list[dict]:
    alphas = _collect(args.alpha, args.alpha_range)
    epsilons = _collect(args.epsilon, args.epsilon_range)
    if not alphas or not epsilons:
        raise UsageError("force-detect needs amplitudes and energy shifts")
    if args.trials < 0 or args.seed < 0:
        raise UsageError("trials and seed must be non-negative")
    points = list(itertools.product(alphas, epsilons))
    return _map(lambda p: _force_row(p, args.priors, args.trials, args.seed,
                                     args.force_displaces_vacuum), points, args.jobs)


def cmd_bank_design(args) -> list[dict]:
    epsilons = _collect(args.epsilon, args.epsilon_range)
    if not epsilons:
        raise UsageError("bank-design needs --epsilon or --epsilon-range")
    try:
        bank = det.design_parallel_bank(epsilons)
    except ValueError as exc:
        raise UsageError(str(exc))
    clicks = args.demo_clicks
    if clicks is not None and len(clicks) != len(bank):
        raise UsageError(f"--demo-clicks has {len(clicks)} entries for {len(bank)} subsystems")
    decision = det.bank_decision(clicks) if clicks is not None else None
    return [
        {"index": i, "epsilon": eps, "beta": beta, "beta_squared": beta * beta,
         "click": clicks[i] if clicks is not None else None, "bank_decision": decision}
        for i, (beta, eps) in enumerate(bank.entries)
    ]


COMMANDS = {
    "phase-bound": cmd_phase_bound,
    "compare-energy": cmd_compare_energy,
    "entanglement": cmd_entanglement,
    "force-detect": cmd_force_detect,
    "bank-design": cmd_bank_design,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.jobs < 1:
        parser.error("--jobs must be at least 1")
    try:
        rows = COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))
    text = render(rows, args.format)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if rows and all(r.get("error") for r in rows):
        print(f"error: every row failed; first: {rows[0]['error']}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
