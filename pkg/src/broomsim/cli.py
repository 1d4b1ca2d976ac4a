"""Command line entry point: ``broomsim <command> ...``.

Exit status is 0 on success, 1 for bad input or arguments and 2 for
unexpected internal failures.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .analysis import (
    SweepPoint,
    apply_exclusion_rules,
    fit_inverse_square,
    fit_report_csv,
    sweep_csv,
)
from .broombridge import (
    generate_synthetic_problem,
    parse_document,
    serialize_document,
    validate_text,
)
from .errors import ArgumentError, BroomsimError
from .exactdiag import lanczos_extremal, sector_basis
from .hamiltonian import build_fermion_hamiltonian, jordan_wigner, l1_norm, truncate_terms
from .resources import (
    bundled_cost_table,
    estimate_total,
    estimates_to_csv,
    load_step_cost,
    parse_cost_table,
)
from .rpe import RpeConfig, estimates_to_csv as rpe_csv, repeat_and_summarize

log = logging.getLogger("broomsim")

THREADS_ENV = "BROOMSIM_THREADS"


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors are user errors
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _digest(path: str | None) -> str | None:
    if not path:
        return None
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _emit(text: str, out: str | None, argv: list[str], args, extra: dict | None = None) -> None:
    """Write ``text`` to ``out`` (plus a manifest sidecar) or to stdout."""
    if out is None:
        sys.stdout.write(text)
        return
    Path(out).write_text(text, encoding="utf-8")
    manifest = {
        "command_line": ["broomsim", *argv],
        "seed": getattr(args, "seed", None),
        "tool_version": __version__,
        "input_digest": _digest(getattr(args, "file", None)),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    if extra:
        manifest.update(extra)
    Path(out + ".manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def _load(path: str):
    return parse_document(Path(path).read_text(encoding="utf-8"))


def _problem(args):
    doc = _load(args.file)
    if not 0 <= args.problem < len(doc.problems):
        raise ArgumentError(f"problem index {args.problem} outside [0, {len(doc.problems)})")
    return doc.problems[args.problem]


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args, argv) -> int:
    errors = validate_text(Path(args.file).read_text(encoding="utf-8"))
    for err in errors:
        print(f"error: {err}", file=sys.stderr)
    if errors:
        return 1
    print(f"{args.file}: valid Broombridge 0.1")
    return 0


def cmd_info(args, argv) -> int:
    doc = _load(args.file)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["problem", "n_orbitals", "n_electrons", "n_qubits", "fermion_terms",
                "pauli_terms", "l1_norm", "identity"])
    for i, p in enumerate(doc.problems):
        fham = build_fermion_hamiltonian(p)
        pauli = jordan_wigner(fham, max_qubits=None)
        if args.cutoff is not None:
            pauli = truncate_terms(pauli, args.cutoff)
        w.writerow([i, p.n_orbitals, p.n_electrons, pauli.n_qubits, len(fham.terms),
                    len(pauli.terms), repr(l1_norm(pauli)), repr(pauli.identity_coefficient)])
    _emit(buf.getvalue(), args.out, argv, args)
    return 0


def cmd_fci(args, argv) -> int:
    p = _problem(args)
    fham = build_fermion_hamiltonian(p)
    basis = sector_basis(p.n_spin_orbitals, p.n_electrons)
    if args.states > len(basis):
        raise ArgumentError(f"{args.states} states requested but the sector has dimension {len(basis)}")
    result = lanczos_extremal(fham, basis, k=args.states, tol=args.tol, seed=args.seed)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "energy", "residual"])
    for i, (e, r) in enumerate(zip(result.eigenvalues, result.residual_norms)):
        w.writerow([i, repr(float(e)), repr(float(r))])
    _emit(buf.getvalue(), args.out, argv, args, {"sector_dimension": len(basis)})
    return 0


def _rpe_config(args, step_size: float) -> RpeConfig:
    return RpeConfig(
        bits=args.bits,
        step_size=step_size,
        shots_per_round=args.shots,
        mode=args.mode,
        seed=args.seed,
    )


def cmd_rpe(args, argv) -> int:
    p = _problem(args)
    config = _rpe_config(args, args.t)
    summary = repeat_and_summarize(p, args.state, config, args.reps, threads=args.threads)
    _emit(rpe_csv(summary.estimates), args.out, argv, args, {
        "error_target": config.error_target,
        "mode": config.mode,
        "state": args.state,
    })
    return 0


def _parse_r_list(text: str) -> list[int]:
    try:
        values = [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise ArgumentError(f"--r-list must be comma separated integers, got {text!r}") from None
    if not values or any(v < 1 for v in values):
        raise ArgumentError("--r-list needs positive Trotter numbers")
    return values


def cmd_trotter_sweep(args, argv) -> int:
    p = _problem(args)
    r_list = _parse_r_list(args.r_list)
    points = []
    for r in r_list:
        config = _rpe_config(args, 1.0 / r)
        summary = repeat_and_summarize(p, args.state, config, args.reps, threads=args.threads)
        # follow the lowest-energy branch; clusters are ordered by energy
        members = [e for e in summary.estimates if e.cluster_id == 0]
        sigma = max(e.std_error for e in members) / len(members) ** 0.5
        points.append(SweepPoint(r, sum(e.energy for e in members) / len(members), sigma))
    points = apply_exclusion_rules(points, args.ground_hint, args.trotter_cap)
    fit = fit_inverse_square(points)
    sweep = sweep_csv(points)
    report = fit_report_csv(fit)
    if args.out is None:
        sys.stdout.write(sweep)
        sys.stdout.write("\n")
        sys.stdout.write(report)
    else:
        _emit(sweep, args.out, argv, args, {"bits": args.bits, "r_list": r_list})
        fit_path = args.fit_out or (args.out.rsplit(".", 1)[0] + ".fit.csv")
        _emit(report, fit_path, argv, args, {"bits": args.bits, "r_list": r_list})
    return 0


def cmd_resources(args, argv) -> int:
    rows = parse_cost_table(Path(args.cost_file).read_text(encoding="utf-8")) if args.cost_file else bundled_cost_table()
    lam = args.lam
    pauli = None
    if args.file:
        pauli = jordan_wigner(build_fermion_hamiltonian(_problem(args)), max_qubits=None)
        pauli = truncate_terms(pauli, args.cutoff)
        if lam is None:
            lam = l1_norm(pauli)
    if args.model:
        if pauli is None:
            raise ArgumentError("--model needs a Broombridge file")
        step = load_step_cost({"model": args.model, "hamiltonian": pauli})
        name = args.model
    elif args.cost_table:
        step = load_step_cost({"table": args.cost_table, "rows": rows})
        name = args.cost_table
        if lam is None:
            lam = rows[args.cost_table].l1_norm
    else:
        raise ArgumentError("give --cost-table or --model")
    if lam is None:
        raise ArgumentError("no L1 norm available: pass --lambda or a Broombridge file")
    est = estimate_total(step, lam, args.delta, args.factor)
    _emit(estimates_to_csv([(name, est)]), args.out, argv, args)
    return 0


def cmd_synth(args, argv) -> int:
    doc = generate_synthetic_problem(args.seed, args.orbitals, args.electrons, args.density)
    _emit(serialize_document(doc), args.out, argv, args)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="broomsim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"broomsim {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def with_file(p, problem=True):
        p.add_argument("file", help="Broombridge YAML file")
        if problem:
            p.add_argument("--problem", type=int, default=0, help="index into integral_sets")

    def with_out(p):
        p.add_argument("--out", help="output CSV path (a .manifest.json sidecar is written next to it)")

    p = sub.add_parser("validate", help="check a Broombridge file")
    with_file(p, problem=False)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("info", help="orbital, term and qubit counts")
    with_file(p, problem=False)
    p.add_argument("--cutoff", type=float, default=None, help="drop Pauli terms below this magnitude")
    with_out(p)
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("fci", help="lowest eigenvalues in the electron-number sector")
    with_file(p)
    p.add_argument("--states", type=int, default=1)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--seed", type=int, default=0)
    with_out(p)
    p.set_defaults(func=cmd_fci)

    def rpe_args(p):
        p.add_argument("--bits", type=int, default=10)
        p.add_argument("--state", default="|G>", help="initial_state_suggestions label")
        p.add_argument("--reps", type=int, default=1)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--mode", choices=["circuit", "projective"], default="circuit")
        p.add_argument("--shots", type=int, default=RpeConfig.shots_per_round)
        p.add_argument("--threads", type=int, default=_default_threads())

    p = sub.add_parser("rpe", help="robust phase estimation")
    with_file(p)
    p.add_argument("--t", type=float, default=0.5, help="Trotter step size")
    rpe_args(p)
    with_out(p)
    p.set_defaults(func=cmd_rpe)

    p = sub.add_parser("trotter-sweep", help="phase estimation over Trotter numbers plus E0 + m/r^2 fit")
    with_file(p)
    p.add_argument("--r-list", default="2,4,8,16")
    p.add_argument("--ground-hint", type=float, default=None)
    p.add_argument("--trotter-cap", type=float, default=None)
    p.add_argument("--fit-out", default=None)
    rpe_args(p)
    with_out(p)
    p.set_defaults(func=cmd_trotter_sweep)

    p = sub.add_parser("resources", help="qubitization T-count estimate")
    p.add_argument("file", nargs="?", help="optional Broombridge file supplying the L1 norm")
    p.add_argument("--problem", type=int, default=0)
    p.add_argument("--cost-table", help="row name in the cost table")
    p.add_argument("--cost-file", help="CSV cost table (default: bundled)")
    p.add_argument("--model", help="registered heuristic cost model")
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--cutoff", type=float, default=1e-10)
    p.add_argument("--delta", type=float, default=1e-3)
    p.add_argument("--factor", type=int, choices=[1, 2], default=1)
    with_out(p)
    p.set_defaults(func=cmd_resources)

    p = sub.add_parser("synth", help="write a random valid Broombridge problem")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--orbitals", type=int, required=True)
    p.add_argument("--electrons", type=int, required=True)
    p.add_argument("--density", type=float, default=1.0)
    with_out(p)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, argv)
    except (BroomsimError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 1
    except Exception as exc:  # noqa: BLE001 - last-resort guard, never a traceback to the shell
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
