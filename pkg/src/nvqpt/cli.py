"""Command-line front end.

Subcommands: simulate, reconstruct, project, metrics, lindblad,
ellipsoid.  Exit codes: 0 success, 2 usage error, 3 data error,
4 numerical failure.  Matrices are serialized as separate real and
imaginary parts so the JSON files stay portable.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import cpfit, lindblad, nvsim, qpt, qstate, tolerances
from .numkit import PrincipalLogUndefined, eig_hermitian

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4

RECORD_SCHEMA = "qpt-record/1"
PROCESS_SCHEMA = "qpt-process/1"
LINDBLAD_SCHEMA = "qpt-lindblad/1"


class DataError(Exception):
    exit_code = EXIT_DATA


class NumericalError(Exception):
    exit_code = EXIT_NUMERICAL


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _dump_json(obj: dict, path: str) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _load_json(path: str, schema: str) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if doc.get("schema") != schema:
        raise DataError(f"{path}: expected schema {schema!r}, got {doc.get('schema')!r}")
    return doc


def _matrix_pair(m: np.ndarray) -> tuple[list, list]:
    m = np.asarray(m, dtype=complex)
    return m.real.tolist(), m.imag.tolist()


def _chi_from_doc(doc: dict, path: str) -> np.ndarray:
    chi = np.array(doc["chi_re"]) + 1j * np.array(doc["chi_im"])
    if chi.shape != (4, 4):
        raise DataError(f"{path}: chi must be 4x4")
    if np.linalg.norm(chi - chi.conj().T) > 1e-6:
        raise DataError(f"{path}: chi is not Hermitian")
    return chi


def _process_doc(chi: np.ndarray, diagnostics: dict) -> dict:
    affine = qpt.chi_to_affine(chi)
    re, im = _matrix_pair(chi)
    return {
        "schema": PROCESS_SCHEMA,
        "basis": "normal",
        "chi_re": re,
        "chi_im": im,
        "affine": affine.matrix.tolist(),
        "diagnostics": diagnostics,
    }


def _record_times(doc: dict) -> list[float]:
    return [float(t) for t in doc["times_ns"]]


def _expectations_at(doc: dict, time: float, path: str):
    """MaxEnt-reconstructed output states at one record time, in canonical
    input order; also returns which components were unmeasured."""
    times = _record_times(doc)
    key = None
    for t in times:
        if abs(t - time) <= 1e-9 * max(1.0, abs(time)):
            key = repr(float(t))
    if key is None:
        raise DataError(f"{path}: time {time} not in record times {times}")
    if list(doc["inputs"]) != list(nvsim.INPUT_LABELS):
        raise DataError(f"{path}: inputs must be {list(nvsim.INPUT_LABELS)}")
    outputs = []
    missing = {}
    for label in nvsim.INPUT_LABELS:
        entry = doc["expectations"][label][key]
        e = qstate.PauliExpectations(sx=entry["sx"], sy=entry["sy"], sz=entry["sz"])
        gaps = [ax for ax, v in zip(("sx", "sy", "sz"), e.as_tuple()) if v is None]
        if gaps:
            missing[label] = gaps
        outputs.append(qstate.maxent_reconstruct(e))
    return outputs, missing


def cmd_simulate(args) -> int:
    try:
        cfg = nvsim.SimConfig(
            t1_ns=args.t1,
            t2_ns=args.t2,
            detuning=args.detuning,
            polarization=args.alpha,
            shots=args.shots,
            seed=args.seed,
        )
    except nvsim.SimulationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    schedule = lindblad.TimeSchedule(t1=args.t1ns, count=args.timepoints)
    record = nvsim.run_experiment(cfg, schedule)
    _dump_json(record.to_record_dict(), args.out)
    return 0


def cmd_reconstruct(args) -> int:
    doc = _load_json(args.record, RECORD_SCHEMA)
    outputs, missing = _expectations_at(doc, args.time, args.record)
    chi = qpt.chi_from_outputs(outputs)
    chi = (chi + chi.conj().T) / 2
    diagnostics = {
        "time_ns": args.time,
        "min_eigenvalue": float(eig_hermitian(chi).eigenvalues[0]),
        "tp_defect": qpt.tp_defect(chi),
        "unmeasured": missing,
    }
    _dump_json(_process_doc(chi, diagnostics), args.out)
    print(
        f"reconstructed process at {_fmt(args.time)} ns: "
        f"min eigenvalue {_fmt(diagnostics['min_eigenvalue'])}, "
        f"tp defect {_fmt(diagnostics['tp_defect'])}"
    )
    return 0


def cmd_project(args) -> int:
    doc = _load_json(args.process, PROCESS_SCHEMA)
    chi = _chi_from_doc(doc, args.process)
    opts = cpfit.ProjectionOptions(lagrange=args.lagrange)
    result = cpfit.project_to_cp(chi, opts)
    norms = qpt.unphysicality_norms(chi, result.chi_tilde)
    diagnostics = {
        "min_eigenvalue": result.min_eigenvalue,
        "tp_defect": result.tp_defect,
        "deviation": result.deviation,
        "evaluations": result.evaluations,
        "distance_to_input": norms,
        "lagrange": args.lagrange,
        "success": result.success,
    }
    _dump_json(_process_doc(result.chi_tilde, diagnostics), args.out)
    print("physicality report:")
    print(f"  min eigenvalue  {_fmt(result.min_eigenvalue)}")
    print(f"  tp defect       {_fmt(result.tp_defect)}")
    for name in ("p1", "p2", "fro", "d_pro"):
        print(f"  {name:<15} {_fmt(norms[name])}")
    if not result.success:
        raise NumericalError(
            f"projection missed physicality thresholds "
            f"(min eig {result.min_eigenvalue:.3g}, tp defect {result.tp_defect:.3g})"
        )
    return 0


def _is_cptp(chi: np.ndarray) -> bool:
    return (
        eig_hermitian(chi).eigenvalues[0] >= -1e-9
        and qpt.tp_defect(chi) <= tolerances.get("tp_defect_max")
    )


def cmd_metrics(args) -> int:
    doc_a = _load_json(args.process_a, PROCESS_SCHEMA)
    doc_b = _load_json(args.process_b, PROCESS_SCHEMA)
    if doc_a["basis"] != doc_b["basis"]:
        raise DataError(
            f"basis mismatch: {doc_a['basis']!r} vs {doc_b['basis']!r}"
        )
    chi_a = _chi_from_doc(doc_a, args.process_a)
    chi_b = _chi_from_doc(doc_b, args.process_b)
    norms = qpt.unphysicality_norms(chi_a, chi_b)
    table: dict[str, float | None] = dict(norms)
    warning = None
    if _is_cptp(chi_a) and _is_cptp(chi_b):
        rho_a = qpt.jamiolkowski_state(chi_a)
        rho_b = qpt.jamiolkowski_state(chi_b)
        table["jamiolkowski_trace_distance"] = qstate.trace_distance(rho_a, rho_b)
        table["fidelity"] = qstate.fidelity(rho_a, rho_b)
        table["bures"] = qstate.bures(rho_a, rho_b)
        table["c"] = qstate.c_metric(rho_a, rho_b)
    else:
        warning = (
            "fidelity-based metrics suppressed: at least one process is not "
            "CPTP and they could be nonsensical"
        )
    if args.json:
        out = {k: v for k, v in table.items()}
        if warning:
            out["warning"] = warning
        print(json.dumps(out, indent=2, sort_keys=True))
    else:
        for name, value in table.items():
            print(f"{name:<28} {_fmt(value)}")
        if warning:
            print(warning)
    return 0


def cmd_lindblad(args) -> int:
    doc = _load_json(args.record, RECORD_SCHEMA)
    times = _record_times(doc)
    if len(times) < 3:
        raise DataError("need at least three timepoints on a doubling schedule")
    try:
        schedule = lindblad.TimeSchedule.from_times(times[:3])
    except lindblad.LindbladError as exc:
        raise DataError(str(exc)) from exc

    props = []
    measured = {}
    for t in schedule.times():
        outputs, _ = _expectations_at(doc, t, args.record)
        props.append(lindblad.propagator_from_outputs(outputs))
        for label, rho in zip(nvsim.INPUT_LABELS, outputs):
            r = qstate.density_to_bloch(rho)
            measured.setdefault(label, {})[repr(float(t))] = {
                "sx": float(r[0]), "sy": float(r[1]), "sz": float(r[2]),
            }

    h_super = lindblad.hamiltonian_superop(
        lindblad.detuning_hamiltonian(args.hamiltonian)
    )
    try:
        r_log = lindblad.generator_log_estimate(props[0], h_super, schedule.t1)
    except PrincipalLogUndefined as exc:
        raise NumericalError(f"{exc}; reduce t1") from exc
    r_re = lindblad.generator_bch_estimate(props, h_super, schedule)
    x0 = lindblad.gks_start_from_generator(r_re)
    a_start = lindblad.gks_matrix(x0)
    fit = lindblad.fit_generator(props, h_super, schedule, x0)
    lset = lindblad.lindblads_from_gks(fit.gks)

    predicted = {}
    for label, rho0 in zip(nvsim.INPUT_LABELS, qpt.input_states()):
        per_time = lindblad.predict_expectations(
            fit.relaxation, h_super, rho0, schedule.times()
        )
        predicted[label] = {
            repr(float(t)): {"sx": e.sx, "sy": e.sy, "sz": e.sz}
            for t, e in zip(schedule.times(), per_time)
        }

    a_start_re, a_start_im = _matrix_pair(a_start)
    a_fit_re, a_fit_im = _matrix_pair(fit.gks)
    log_re, log_im = _matrix_pair(r_log)
    report = {
        "schema": LINDBLAD_SCHEMA,
        "times_ns": schedule.times(),
        "detuning": args.hamiltonian,
        "a_start_re": a_start_re,
        "a_start_im": a_start_im,
        "a_fit_re": a_fit_re,
        "a_fit_im": a_fit_im,
        "log_estimate_re": log_re,
        "log_estimate_im": log_im,
        "lindblads": [
            {"re": op.real.tolist(), "im": op.imag.tolist()}
            for op in lset.operators
        ],
        "contributions": lset.contributions,
        "residual": fit.residual,
        "predicted_expectations": predicted,
        "measured_expectations": measured,
    }
    _dump_json(report, args.out)
    print("lindblad fit: residual", _fmt(fit.residual))
    for i, c in enumerate(lset.contributions, start=1):
        print(f"  L{i} relative contribution {_fmt(100 * c)}%")
    return 0


def cmd_ellipsoid(args) -> int:
    doc = _load_json(args.process, PROCESS_SCHEMA)
    affine = qpt.AffineMap(np.array(doc["affine"]))
    pts, outs, violation = qpt.ellipsoid_samples(affine, args.points)
    lines = ["in_x,in_y,in_z,out_x,out_y,out_z,violation"]
    for p, o, v in zip(pts, outs, violation):
        lines.append(
            ",".join([repr(float(x)) for x in (*p, *o)] + [str(int(v))])
        )
    text = "\n".join(lines) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    print(f"{args.points} points, {int(violation.sum())} Bloch-ball violations",
          file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nvqpt",
        description="Single-qubit process tomography and Markovian "
        "generator estimation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic experiment record")
    p.add_argument("--t1", type=float, default=1e6, help="T1 in ns")
    p.add_argument("--t2", type=float, default=2000.0, help="T2 in ns")
    p.add_argument("--detuning", type=float, default=0.0, help="rad/ns")
    p.add_argument("--alpha", type=float, default=0.4, help="pseudopure polarization")
    p.add_argument("--shots", type=int, default=10000, help="0 = noise-free")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--t1ns", type=float, default=20.0, help="first schedule time (ns)")
    p.add_argument("--timepoints", type=int, default=3)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", help="raw chi + affine from a record")
    p.add_argument("record")
    p.add_argument("--time", type=float, required=True, help="record time (ns)")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("project", help="repair a process to the nearest CPTP map")
    p.add_argument("process")
    p.add_argument("--lagrange", type=float,
                   default=tolerances.get("lagrange_default"))
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("metrics", help="distance table between two processes")
    p.add_argument("process_a")
    p.add_argument("process_b")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("lindblad", help="fit a Markovian generator to a record")
    p.add_argument("record")
    p.add_argument("--hamiltonian", type=float, default=0.0,
                   help="rotating-frame detuning (rad/ns)")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_lindblad)

    p = sub.add_parser("ellipsoid", help="Bloch-sphere point cloud as CSV")
    p.add_argument("process")
    p.add_argument("--points", type=int, default=1000)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_ellipsoid)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "points", 1) < 1:
        parser.error("--points must be at least 1")
    try:
        return args.func(args)
    except (DataError, NumericalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (qpt.ProcessError, lindblad.LindbladError, qstate.StateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
