"""``twoq`` command line: circuits, no-cloning experiments, BB84."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .bb84 import Bb84Config, enumerate_intercept_resend, make_eavesdropper, run_bb84
from .circuit import CircuitError, execute, parse
from .noclone import (
    BasisCloningError,
    NoCloningViolation,
    cnot_cloner,
    identity_instance,
    postselected_basis_cloner,
    verify_basis_cloner_contradiction,
)
from .optimize import cloner_layout, default_workers, optimize_cloner, parameterize_unitary
from .postselect import PostselectionAnnihilated
from .statevec import state_fidelity

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_ANNIHILATED = 4
EXIT_ASSERTION = 5
EXIT_IO = 6

WITNESS_BOUND = 0.5 + 1e-9


class CommandFailed(Exception):
    def __init__(self, code: int, message: str, payload: dict | None = None):
        super().__init__(message)
        self.code = code
        self.payload = payload


def _complex_pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _read_program(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CommandFailed(EXIT_IO, f"error: cannot read {path}: {exc.strerror or exc}") from None
    try:
        return parse(text)
    except CircuitError as exc:
        raise CommandFailed(EXIT_PARSE, f"{path}: {exc}") from None


def cmd_run(args) -> dict:
    program = _read_program(args.circuit)
    try:
        res = execute(program, shots=args.shots, seed=args.seed)
    except PostselectionAnnihilated as exc:
        raise CommandFailed(
            EXIT_ANNIHILATED,
            f"{args.circuit}: postselection annihilated at instruction {exc.instruction_index}: {exc}",
        ) from None
    n = program.num_qubits
    amps = res.final_state.amplitudes
    payload = {
        "circuit": args.circuit,
        "num_qubits": n,
        "shots": args.shots,
        "success_probability": res.success_probability,
        "amplitudes": [
            {"basis": format(i, f"0{n}b"), "re": float(a.real), "im": float(a.imag), "probability": float(abs(a) ** 2)}
            for i, a in enumerate(amps)
        ],
        "postselect_log": [
            {"instruction": r.instruction_index, "kind": r.kind, "amplitude": r.amplitude, "discarded_weight": r.discarded_weight}
            for r in res.postselect_log
        ],
        "sampled_qubits": list(res.sampled_qubits),
        "histogram": [{"outcome": k, "count": v} for k, v in res.histogram().items()],
    }
    if args.reference:
        ref = execute(_read_program(args.reference)).final_state
        if ref.num_qubits != n:
            raise CommandFailed(EXIT_USAGE, f"reference has {ref.num_qubits} qubits, circuit has {n}")
        payload["reference"] = args.reference
        payload["fidelity"] = state_fidelity(ref, res.final_state)
    return payload


def _random_amplitudes(rng: np.random.Generator, count: int) -> list[complex]:
    mags = 1.0 - rng.uniform(0.0, 1.0, count)  # (0, 1]
    phases = rng.uniform(0.0, 2 * math.pi, count)
    return [complex(m * np.exp(1j * p)) for m, p in zip(mags, phases)]


def cmd_noclone_verify(args) -> dict:
    rng = np.random.default_rng(args.seed)
    candidates = [("cnot", None, cnot_cloner())]
    for i in range(args.samples):
        c = _random_amplitudes(rng, 2)
        candidates.append((f"postselected-{i}", c, postselected_basis_cloner(c)))
    if args.inject_broken:
        candidates.append(("identity", None, identity_instance()))

    rows, failures = [], []
    for name, c, inst in candidates:
        row = {"instance": name, "postselected": inst.postselected}
        if c is not None:
            row["c0"] = _complex_pair(c[0])
            row["c1"] = _complex_pair(c[1])
            # joint fidelity of the |+> witness for a basis-exact postselected cloner
            row["closed_form_joint_fidelity"] = abs(c[0] + c[1]) ** 2 / (4 * (abs(c[0]) ** 2 + abs(c[1]) ** 2))
        try:
            rep = verify_basis_cloner_contradiction(inst)
        except BasisCloningError as exc:
            row["error"] = str(exc)
            row["failed_basis_state"] = exc.label
            failures.append(row["error"])
            rows.append(row)
            continue
        except NoCloningViolation as exc:
            row["error"] = str(exc)
            failures.append(row["error"])
            rows.append(row)
            continue
        w = rep.witness_report
        row.update(
            max_basis_residual=max(rep.basis_residuals),
            witness_fidelity=w.fidelity,
            witness_joint_fidelity=w.joint_fidelity,
            witness_residual=w.residual,
            witness_success_probability=abs(w.c) ** 2,
        )
        if w.fidelity > WITNESS_BOUND or w.joint_fidelity > WITNESS_BOUND:
            failures.append(f"{name}: witness fidelity above 1/2")
        rows.append(row)

    payload = {
        "samples": args.samples,
        "witness": "uniform superposition |+>",
        "bound": WITNESS_BOUND,
        "all_within_bound": not failures,
        "instances": rows,
        "failures": failures,
    }
    if failures:
        raise CommandFailed(EXIT_ASSERTION, "no-cloning verification failed: " + "; ".join(failures), payload)
    return payload


def cmd_noclone_optimize(args) -> dict:
    layout = cloner_layout(args.mode)
    pu = parameterize_unitary(layout.num_qubits, args.depth)
    res = optimize_cloner(
        layout,
        pu,
        objective_samples=args.objective_samples,
        budget=args.budget,
        seed=args.seed,
        restarts=args.restarts,
        final_samples=args.final_samples,
        workers=args.threads,
    )
    return {
        "mode": args.mode,
        "layout": {"a": list(layout.a), "b": list(layout.b), "machine": list(layout.m), "postselected": list(layout.c)},
        "depth": args.depth,
        "num_params": pu.num_params,
        "budget": args.budget,
        "restarts": args.restarts,
        "objective_samples": args.objective_samples,
        "final_samples": args.final_samples,
        "best_mean_fidelity": res.best_mean_fidelity,
        "best_objective": res.best_objective,
        "mean_success_probability": res.mean_success_probability,
        "universal_cloner_reference": 5 / 6,
        "restart_best": res.restart_values,
        "best_params": [float(x) for x in res.best_params],
        "trace": [{"evaluation": i + 1, "best_so_far": v} for i, v in enumerate(res.trace)],
    }


def cmd_bb84(args) -> dict:
    eve = make_eavesdropper(args.eve)
    res = run_bb84(Bb84Config(args.pulses, args.sample_fraction, args.seed, eve))
    payload = {
        "pulses": args.pulses,
        "eve": args.eve,
        "sample_fraction": args.sample_fraction,
        "sifted_length": res.sifted_length,
        "checked_bits": res.checked_bits,
        "errors": res.errors,
        "qber": res.qber,
        "qber_by_basis": [
            {"basis": b, "qber": res.qber_by_basis[b], "checked": res.checked_by_basis[b]} for b in res.qber_by_basis
        ],
        "eve_information": res.eve_information,
        "discarded_by_eve": res.discarded_by_eve,
    }
    if res.max_clone_fidelity_x is not None:
        payload["max_clone_fidelity_x"] = res.max_clone_fidelity_x
    if args.eve == "intercept-resend":
        exact = enumerate_intercept_resend()
        payload["exact_qber"] = str(exact)
        payload["qber_sigma"] = res.qber_sigma(float(exact))
    return payload


# ---------------------------------------------------------------- reports

def build_report(payload: dict, seed: int, argv: list[str]) -> dict:
    return {
        "metadata": {
            "artifact": "twoq",
            "version": __version__,
            "seed": seed,
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "command": ["twoq", *argv],
        },
        "payload": payload,
    }


def payload_tables(payload: dict) -> list[dict]:
    """Flatten every list-of-records in ``payload`` into rows tagged by table name."""
    rows = []
    scalars = {k: v for k, v in payload.items() if not isinstance(v, (list, dict))}
    rows.append({"table": "summary", **scalars})
    for key, value in payload.items():
        if isinstance(value, list) and value and all(isinstance(r, dict) for r in value):
            for r in value:
                rows.append({"table": key, **{k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in r.items()}})
    return rows


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    buf = io.StringIO()
    for k, v in report["metadata"].items():
        buf.write(f"# {k}: {v if not isinstance(v, list) else ' '.join(v)}\n")
    rows = payload_tables(report["payload"])
    fields: list[str] = []
    for r in rows:
        fields.extend(k for k in r if k not in fields)
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _fraction(text: str) -> float:
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError("must lie in (0, 1)")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--threads", type=_positive_int, default=default_workers(),
                        help="worker cap (default: $TWOQ_THREADS or 1)")

    parser = argparse.ArgumentParser(prog="twoq", description=__doc__)
    parser.add_argument("--version", action="version", version=f"twoq {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="execute a .2wqc circuit file")
    run.add_argument("circuit")
    run.add_argument("--shots", type=_nonneg_int, default=1000)
    run.add_argument("--reference", help="circuit whose final state is compared against the output")
    run.set_defaults(handler=cmd_run)

    nc = sub.add_parser("noclone", help="no-cloning experiments")
    ncsub = nc.add_subparsers(dest="noclone_command", required=True)
    ver = ncsub.add_parser("verify", parents=[common], help="basis-cloner contradiction sweep")
    ver.add_argument("--samples", type=_nonneg_int, default=100, help="number of random postselected cloners")
    ver.add_argument("--inject-broken", action="store_true", help="add an identity 'cloner' that fails on |1>")
    ver.set_defaults(handler=cmd_noclone_verify)

    opt = ncsub.add_parser("optimize", parents=[common], help="search for the best universal cloner")
    opt.add_argument("--mode", choices=("1wqc", "2wqc"), required=True)
    opt.add_argument("--budget", type=_positive_int, default=50_000)
    opt.add_argument("--restarts", type=_positive_int, default=8)
    opt.add_argument("--depth", type=_nonneg_int, default=3)
    opt.add_argument("--objective-samples", type=_positive_int, default=256)
    opt.add_argument("--final-samples", type=_positive_int, default=100_000)
    opt.set_defaults(handler=cmd_noclone_optimize)

    bb = sub.add_parser("bb84", parents=[common], help="BB84 with an eavesdropper")
    bb.add_argument("--pulses", type=_positive_int, required=True)
    bb.add_argument("--eve", choices=("none", "intercept-resend", "postselect-clone"), required=True)
    bb.add_argument("--sample-fraction", type=_fraction, default=0.5)
    bb.set_defaults(handler=cmd_bb84)
    return parser


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        payload = args.handler(args)
        code = EXIT_OK
    except CommandFailed as exc:
        print(exc, file=sys.stderr)
        if exc.payload is None:
            return exc.code
        payload, code = exc.payload, exc.code
    try:
        _emit(render(build_report(payload, args.seed, argv), args.format), args.out)
    except OSError as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return EXIT_IO
    return code


if __name__ == "__main__":
    sys.exit(main())
