"""Command-line front-end.

    qergodic analyze problem.json [--format text|json]
    qergodic evolve problem.json --observable NAME --t-max X --points K
    qergodic dos --n N --bins B --samples S --seed Z
    qergodic twolevel --e0 A --e1 B (--energy E | --beta BETA)

Data goes to stdout, diagnostics to stderr. Exit codes: 0 complete output,
1 malformed input, 2 numerical precondition failed, 3 infeasible or boundary
state.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, TextIO

import numpy as np

from . import dos as dos_mod
from .config import Tolerances
from .dynamics import DensityMatrix, PureState, average_trace, dephase, dynamic_average, populations
from .errors import (
    BoundaryState,
    ErgodicError,
    OutOfRangeDimension,
    ParseError,
    UnknownObservable,
)
from .spectral import HermitianOperator, bohr_spectrum, detect_resonances, eigendecompose
from .thermo import (
    conjugate_variables,
    default_commuting_set,
    entropy,
    equilibrium_probabilities,
    two_level_beta,
    two_level_energy,
    two_level_probabilities,
)

MAX_DOS_N = 6
MAX_DOS_BINS_TOTAL = 10**7


def fmt(x: float) -> str:
    return repr(float(x)) if not math.isfinite(x) else format(float(x), ".17g")


# problem files


@dataclass
class ProblemFile:
    hamiltonian: np.ndarray
    initial_state: np.ndarray
    custom_observables: Dict[str, np.ndarray] = field(default_factory=dict)
    tolerances: Dict[str, float] = field(default_factory=dict)


def _complex(value, where: str) -> complex:
    if (
        not isinstance(value, list)
        or len(value) != 2
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)
    ):
        raise ParseError(f"{where}: expected a [real, imaginary] pair, got {json.dumps(value)}")
    z = complex(value[0], value[1])
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ParseError(f"{where}: non-finite number")
    return z


def _vector(value, where: str) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise ParseError(f"{where}: expected a non-empty list of [real, imaginary] pairs")
    return np.array([_complex(v, f"{where}[{i}]") for i, v in enumerate(value)])


def _matrix(value, where: str) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise ParseError(f"{where}: expected a list of rows")
    rows = [_vector(r, f"{where}[{i}]") for i, r in enumerate(value)]
    if any(len(r) != len(rows) for r in rows):
        raise ParseError(f"{where}: matrix must be square ({len(rows)} rows)")
    return np.array(rows)


def parse_problem(text: str, source: str = "<input>") -> ProblemFile:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{source}: top level must be an object")
    for key in ("hamiltonian", "initial_state"):
        if key not in doc:
            raise ParseError(f"{source}: missing field '{key}'")
    H = _matrix(doc["hamiltonian"], "hamiltonian")
    psi = _vector(doc["initial_state"], "initial_state")
    if len(psi) != len(H):
        raise ParseError(f"initial_state: length {len(psi)} does not match hamiltonian dimension {len(H)}")
    if np.linalg.norm(psi) == 0:
        raise ParseError("initial_state: zero vector")
    observables = {}
    raw_obs = doc.get("custom_observables", {})
    if not isinstance(raw_obs, dict):
        raise ParseError("custom_observables: expected an object mapping names to matrices")
    for name, m in raw_obs.items():
        mat = _matrix(m, f"custom_observables.{name}")
        if mat.shape != H.shape:
            raise ParseError(f"custom_observables.{name}: shape {mat.shape} does not match hamiltonian {H.shape}")
        observables[name] = mat
    tols = doc.get("tolerances", {})
    if not isinstance(tols, dict):
        raise ParseError("tolerances: expected an object")
    for k, v in tols.items():
        if v is not None and (not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v)):
            raise ParseError(f"tolerances.{k}: expected a finite number")
    return ProblemFile(H, psi, observables, dict(tols))


def load_problem(path: str) -> ProblemFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from exc
    return parse_problem(text, path)


def _tolerances(problem: ProblemFile) -> Tolerances:
    try:
        return Tolerances.from_env().updated(problem.tolerances)
    except KeyError as exc:
        raise ParseError(f"tolerances: {exc.args[0]}") from exc


def _setup(problem: ProblemFile):
    tols = _tolerances(problem)
    H = HermitianOperator.from_matrix(problem.hamiltonian, tols.hermiticity_tol)
    spec = eigendecompose(H, tols.hermiticity_tol, tols.degeneracy_tol)
    psi0 = PureState.from_vector(problem.initial_state)
    observables = {
        name: HermitianOperator.from_matrix(m, tols.hermiticity_tol) for name, m in problem.custom_observables.items()
    }
    return tols, spec, psi0, observables


# analyze


def analyze(problem: ProblemFile) -> tuple[dict, Optional[ErgodicError]]:
    """Full report for a problem; the second item is a boundary/infeasibility notice."""
    tols, spec, psi0, observables = _setup(problem)
    P = populations(spec, psi0)
    rho_dephased = dephase(spec, DensityMatrix.from_pure(psi0))
    report = {
        "tolerances": tols.as_dict(),
        "dimension": spec.dim,
        "eigenvalues": spec.eigenvalues.tolist(),
        "levels": spec.levels.tolist(),
        "clusters": [list(c) for c in spec.clusters],
        "m": spec.m,
        "bohr_frequencies": [[i, j, w] for i, j, w in bohr_spectrum(spec)],
        "resonances": [[list(a), list(b)] for a, b in detect_resonances(spec, tols.resonance_tol)],
        "populations": P.tolist(),
        "dephased_state": _complex_matrix(rho_dephased.entries),
        "dynamic_averages": {name: dynamic_average(spec, psi0, O) for name, O in observables.items()},
    }
    notice = None
    try:
        cset = default_commuting_set(spec)
        sol = conjugate_variables(cset, equilibrium_probabilities(spec, psi0))
    except BoundaryState as exc:
        notice = exc
        probs = equilibrium_probabilities(spec, psi0)
        report["entropy"] = entropy(probs)
        report["equilibrium_state"] = _complex_matrix(
            sum(q * Pk for q, Pk in zip(P / spec.ranks, spec.projectors))
        )
    else:
        report.update(
            {
                "equilibrium_probabilities": sol.probabilities.tolist(),
                "entropy": sol.entropy,
                "beta": sol.beta,
                "chemical_potentials": sol.chemical_potentials.tolist(),
                "gamma": sol.gamma.tolist(),
                "log_partition": sol.log_partition,
                "equilibrium_state": _complex_matrix(sol.equilibrium.entries),
                "grand_canonical_state": _complex_matrix(sol.grand_canonical.entries),
                "dual_representation_residual": sol.residual,
            }
        )
    return report, notice


def _complex_matrix(m) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def _format_matrix(m: list, indent: str = "  ") -> List[str]:
    lines = []
    for row in m:
        cells = []
        for re, im in row:
            cells.append(f"{re:+.6f}" if im == 0 else f"{re:+.6f}{im:+.6f}j")
        lines.append(indent + "  ".join(cells))
    return lines


def render_text(report: dict) -> str:
    out = ["# tolerances"]
    out += [f"{k} = {v}" for k, v in report["tolerances"].items()]
    out.append("# spectrum")
    out.append(f"dimension = {report['dimension']}")
    out.append("eigenvalues = " + ", ".join(fmt(e) for e in report["eigenvalues"]))
    out.append("levels = " + ", ".join(fmt(e) for e in report["levels"]))
    out.append("clusters = " + "; ".join(" ".join(map(str, c)) for c in report["clusters"]))
    out.append(f"m = {report['m']}")
    for i, j, w in report["bohr_frequencies"]:
        out.append(f"omega[{i},{j}] = {fmt(w)}")
    out.append(f"resonances = {len(report['resonances'])}")
    for a, b in report["resonances"]:
        out.append(f"  omega{tuple(a)} ~ omega{tuple(b)}")
    out.append("# equilibrium")
    out.append("populations = " + ", ".join(fmt(p) for p in report["populations"]))
    out.append(f"entropy = {fmt(report['entropy'])}")
    if "beta" in report:
        out.append(f"beta = {fmt(report['beta'])}")
        mus = report["chemical_potentials"]
        out.append("chemical_potentials = " + (", ".join(fmt(x) for x in mus) if mus else "none"))
        out.append(f"log_partition = {fmt(report['log_partition'])}")
        out.append(f"dual_representation_residual = {fmt(report['dual_representation_residual'])}")
    else:
        out.append("beta = undefined (boundary state)")
    out.append("dephased_state =")
    out += _format_matrix(report["dephased_state"])
    out.append("equilibrium_state =")
    out += _format_matrix(report["equilibrium_state"])
    if "grand_canonical_state" in report:
        out.append("grand_canonical_state =")
        out += _format_matrix(report["grand_canonical_state"])
    if report["dynamic_averages"]:
        out.append("# dynamic averages")
        for name, v in report["dynamic_averages"].items():
            out.append(f"{name} = {fmt(v)}")
    return "\n".join(out) + "\n"


# evolve


def evolve_trace(problem: ProblemFile, observable: str, t_max: float, points: int, t_min: Optional[float] = None,
                 log: bool = False):
    tols, spec, psi0, observables = _setup(problem)
    builtin = {"identity": np.eye(spec.dim), "hamiltonian": spec.hamiltonian.entries}
    if observable in observables:
        O = observables[observable]
    elif observable in builtin:
        O = builtin[observable]
    else:
        known = sorted(set(observables) | set(builtin))
        raise UnknownObservable(f"observable '{observable}' not found; known: {', '.join(known)}")
    if points < 1:
        raise ParseError("--points must be at least 1")
    t_min = t_max / points if t_min is None else t_min
    grid = np.geomspace(t_min, t_max, points) if log else np.linspace(t_min, t_max, points)
    return average_trace(spec, psi0, O, grid)


def write_csv(rows, header, stream: TextIO) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) if isinstance(x, float) else x for x in row])


# dos


def dos_rows(n: int, bins: int, samples: int, seed: int, workers: int = 1):
    if not 1 <= n <= MAX_DOS_N:
        raise OutOfRangeDimension(f"--n must lie in [1, {MAX_DOS_N}], got {n}")
    if bins**n > MAX_DOS_BINS_TOTAL:
        raise OutOfRangeDimension(f"{bins}^{n} bins exceeds the limit of {MAX_DOS_BINS_TOTAL}")
    hist = dos_mod.estimate_dos(n, bins, samples, seed, workers=workers)
    centers = hist.centers().reshape(-1, n)
    est = hist.estimates.ravel()
    err = hist.standard_errors.ravel()
    header = [f"p{i}" for i in range(n)] + ["estimate", "stderr"]
    rows = [[*map(float, c), float(e), float(s)] for c, e, s in zip(centers, est, err)]
    footer = ["total_mass", float(hist.total_mass()), float(dos_mod.manifold_volume(n))]
    return header, rows, footer


# twolevel


def twolevel_report(e0: float, e1: float, energy: Optional[float], beta: Optional[float]) -> dict:
    if not e0 < e1:
        raise ParseError("--e0 must be smaller than --e1")
    if energy is None:
        energy = two_level_energy(beta, e0, e1)
    else:
        beta = two_level_beta(energy, e0, e1)
    p = two_level_probabilities(energy, e0, e1)
    x = np.array([-beta * e0, -beta * e1])
    log_z = float(np.logaddexp(x[0], x[1]))
    return {"E0": e0, "E1": e1, "energy": energy, "beta": beta, "p0": float(p[0]), "p1": float(p[1]),
            "entropy": entropy(p), "log_partition": log_z}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qergodic", description="Equilibrium states of closed quantum systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="spectrum, equilibrium state and conjugate variables")
    a.add_argument("file")
    a.add_argument("--format", choices=("text", "json"), default="text")

    e = sub.add_parser("evolve", help="CSV trace of finite-time averages")
    e.add_argument("file")
    e.add_argument("--observable", required=True)
    e.add_argument("--t-max", type=float, required=True)
    e.add_argument("--points", type=int, required=True)
    e.add_argument("--t-min", type=float, default=None)
    e.add_argument("--log", action="store_true", help="geometric horizon grid")

    d = sub.add_parser("dos", help="Monte Carlo density-of-states histogram as CSV")
    d.add_argument("--n", type=int, required=True)
    d.add_argument("--bins", type=int, required=True)
    d.add_argument("--samples", type=int, required=True)
    d.add_argument("--seed", type=int, required=True)
    d.add_argument("--workers", type=int, default=1)

    t = sub.add_parser("twolevel", help="closed-form two-level thermodynamics")
    t.add_argument("--e0", type=float, required=True)
    t.add_argument("--e1", type=float, required=True)
    g = t.add_mutually_exclusive_group(required=True)
    g.add_argument("--energy", type=float)
    g.add_argument("--beta", type=float)
    return parser


def run(argv: Optional[List[str]] = None, stdout: TextIO = None, stderr: TextIO = None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1

    try:
        if args.command == "analyze":
            report, notice = analyze(load_problem(args.file))
            if args.format == "json":
                json.dump(report, stdout, indent=2)
                stdout.write("\n")
            else:
                stdout.write(render_text(report))
            if notice is not None:
                print(f"notice: {type(notice).__name__}: {notice}", file=stderr)
                return notice.exit_code
        elif args.command == "evolve":
            rows = evolve_trace(load_problem(args.file), args.observable, args.t_max, args.points, args.t_min, args.log)
            write_csv(rows, ["T", "finite_time_average", "dynamic_average", "gap"], stdout)
        elif args.command == "dos":
            header, rows, footer = dos_rows(args.n, args.bins, args.samples, args.seed, args.workers)
            write_csv(rows + [footer], header, stdout)
        elif args.command == "twolevel":
            rep = twolevel_report(args.e0, args.e1, args.energy, args.beta)
            write_csv(list(rep.items()), ["quantity", "value"], stdout)
    except ErgodicError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=stderr)
        return exc.exit_code
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
