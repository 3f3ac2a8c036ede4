"""Command-line entry point: ``gme``, ``bounds``, ``robustness`` and ``face``.

Exit codes: 0 success, 1 usage or input error, 2 inconclusive certificate,
3 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .bell import stabilizer_image, toric_classical_formula
from .bounds import (
    CLASSICAL_PARTY_CAP,
    I5_QUANTUM,
    NonConvergenceError,
    classical_bound,
    ideal_observables,
    quantum_value_ideal,
)
from .codes import CodeSpec, SpecError, load_code
from .geometry import (
    FULL_PARTY_CAP,
    behaviour_of,
    face_dimension,
    loop_expectations,
    subfamily_point,
    toric_subfamily,
)
from .pauli import anticommute_on
from .robustness import (
    DENSE_PARTY_CAP,
    GridSpec,
    b_of_a,
    find_certificate,
    product_overlap_floor,
    sweep_curve,
)
from .stabilizer import (
    GmeCertificate,
    StabilizerError,
    bipartition_masks,
    code_basis,
    code_projector,
    gme_certificate_exhaustive,
    verify_certificate,
)
from .toric import toric_gme_witness

EXIT_OK, EXIT_INPUT, EXIT_INCONCLUSIVE, EXIT_NONCONVERGENCE = 0, 1, 2, 3
BIPARTITION_QUBIT_CAP = 24
EXHAUSTIVE_QUBIT_CAP = 20


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for inconclusive results
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def fmt(x: float) -> str:
    return f"{x:.12g}"


def _round(obj):
    """Floats to 12 significant digits, recursively."""
    if isinstance(obj, float):
        return obj if not math.isfinite(obj) else float(fmt(obj))
    if isinstance(obj, (np.floating,)):
        return _round(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def _table(rows: list[tuple[str, object]]) -> str:
    width = max(len(k) for k, _ in rows)
    out = []
    for k, v in rows:
        if isinstance(v, float):
            v = fmt(v)
        out.append(f"{k:<{width}}  {v}")
    return "\n".join(out) + "\n"


@dataclass
class RunManifest:
    command: str
    parameters: dict
    seed: int
    version: str
    wall_time: float = 0.0
    outputs: dict = field(default_factory=dict)

    def record(self, name: str, data: bytes):
        self.outputs[name] = hashlib.sha256(data).hexdigest()


# -- subcommands ----------------------------------------------------------------

def cmd_gme(spec: CodeSpec, args) -> tuple[dict, int]:
    n = spec.n
    if n > BIPARTITION_QUBIT_CAP:
        raise UsageError(f"{n} qubits: 2^{n - 1} bipartitions is beyond the cap of {BIPARTITION_QUBIT_CAP} qubits")
    group = spec.group
    report: dict = {"code": spec.name, "n_qubits": n}
    if spec.kind == "toric":
        gens = group.generators
        full = (1 << n) - 1
        witnesses = {}
        for g in bipartition_masks(n).tolist():
            v, p = toric_gme_witness(spec.L, g)
            ok = anticommute_on(gens[v], gens[p], g) and anticommute_on(gens[v], gens[p], full & ~g)
            witnesses[g] = (v, p) if ok else None
        cert = GmeCertificate(n, witnesses)
        report["method"] = "constructive"
        if n <= EXHAUSTIVE_QUBIT_CAP:
            ex = gme_certificate_exhaustive(group)
            report["exhaustive_witnessed"] = ex.n_witnessed
            report["methods_agree"] = ex.n_witnessed == cert.n_witnessed and verify_certificate(group, ex)
    else:
        cert = gme_certificate_exhaustive(group)
        report["method"] = "exhaustive"
        report["verified"] = verify_certificate(group, cert)
    report.update({
        "n_bipartitions": cert.n_bipartitions,
        "n_witnessed": cert.n_witnessed,
        "verdict": cert.verdict,
    })
    if cert.n_bipartitions <= 1024:
        report["witnesses"] = {format(g, f"0{n}b")[::-1]: (list(w) if w else None) for g, w in cert.witnesses.items()}
    missing = cert.inconclusive()
    if missing:
        report["inconclusive_sides"] = [format(g, f"0{n}b")[::-1] for g in missing[:20]]
    return report, EXIT_OK if cert.genuinely_entangled else EXIT_INCONCLUSIVE


def cmd_bounds(spec: CodeSpec, args) -> tuple[dict, int]:
    expr = spec.expression(args.special_party)
    report: dict = {"code": spec.name, "expression": expr.name, "n_parties": expr.n_parties, "n_terms": len(expr)}
    if not args.quantum_only:
        if expr.n_parties <= CLASSICAL_PARTY_CAP:
            report["classical"] = classical_bound(expr).to_dict()
        else:
            report["classical"] = None
            report["classical_note"] = f"enumeration capped at {CLASSICAL_PARTY_CAP} parties"
    report["quantum"] = quantum_value_ideal(expr, tol=args.tol, seed=args.seed).to_dict()
    if spec.kind == "five_qubit":
        report["formulas"] = {"classical": 5.0, "quantum": I5_QUANTUM}
    elif spec.kind == "toric":
        report["formulas"] = {"classical": toric_classical_formula(expr.n_parties), "quantum": float(expr.n_parties)}
    return report, EXIT_OK


def cmd_robustness(spec: CodeSpec, args) -> tuple[dict, int]:
    n = spec.n
    if n > DENSE_PARTY_CAP:
        raise UsageError(f"robustness needs dense {n}-qubit operators; capped at {DENSE_PARTY_CAP}")
    if spec.kind != "five_qubit":
        print("warning: robustness beyond the five-qubit code is experimental", file=sys.stderr)
    expr = spec.expression(args.special_party)
    P = np.real(code_projector(spec.group))
    beta_c = classical_bound(expr).value
    beta_q = quantum_value_ideal(expr, tol=args.tol, seed=args.seed).value
    grid = GridSpec(coarse_points=args.coarse_points, min_step=math.pi / args.min_step_div)
    if args.a is not None:
        cert = b_of_a(args.a, expr, P, grid, beta_q, seed=args.seed)
    else:
        try:
            cert = find_certificate(expr, P, beta_q, grid, a_max=args.a_max, pace=args.pace, seed=args.seed)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return {"code": spec.name, "certificate": None}, EXIT_INCONCLUSIVE
    floor = product_overlap_floor(P, n, restarts=args.restarts, seed=args.seed)
    rows = sweep_curve(cert, beta_c, beta_q, floor, n_points=args.points)
    report = {
        "code": spec.name,
        "beta_c": beta_c,
        "beta_q": beta_q,
        "certificate": cert.to_dict(),
        "tightness": cert.tightness,
        "trivial_floor": floor,
        "curve": [asdict(r) for r in rows],
    }
    return report, EXIT_OK


def cmd_face(spec: CodeSpec, args) -> tuple[dict, int]:
    expr = spec.expression(args.special_party)
    basis = code_basis(spec.group, spec.labelers)
    n = spec.n
    if n <= FULL_PARTY_CAP:
        obs = ideal_observables(n, args.special_party)
        points = [behaviour_of(basis[i], obs) for i in range(len(basis))]
    else:
        keys = toric_subfamily(expr, spec.L) if spec.kind == "toric" else expr.supports()
        points = [subfamily_point(basis[i], keys, args.special_party) for i in range(len(basis))]
    face = face_dimension(points)
    report = {"code": spec.name, "n_points": len(points), "labels": [list(l) for l in basis.labels]}
    report.update(face.to_dict())
    report["expression_values"] = [p.evaluate(expr) for p in points]
    if spec.kind == "toric":
        report["loop_expectations"] = [loop_expectations(p, spec.L, args.special_party) for p in points]
    elif spec.labelers:
        imgs = [stabilizer_image(lab, args.special_party) for lab in spec.labelers]
        report["labeler_values"] = [[p.evaluate(e) for e in imgs] for p in points]
    report["_points"] = points
    return report, EXIT_OK


# -- rendering ------------------------------------------------------------------

def _render_text(command: str, report: dict) -> str:
    rows: list[tuple[str, object]] = [("code", report.get("code"))]
    if command == "gme":
        rows += [("method", report["method"]), ("witnessed", f"{report['n_witnessed']}/{report['n_bipartitions']}"),
                 ("verdict", report["verdict"])]
        if "methods_agree" in report:
            rows.append(("exhaustive agrees", report["methods_agree"]))
    elif command == "bounds":
        rows.append(("expression", f"{report['expression']} ({report['n_terms']} terms)"))
        cl = report.get("classical")
        if cl:
            rows.append(("classical", f"{fmt(cl['value'])}  [{cl['method']}]"))
        elif "classical_note" in report:
            rows.append(("classical", report["classical_note"]))
        q = report["quantum"]
        rows.append(("quantum", f"{fmt(q['value'])}  [{q['method']}, residual {q['residual']:.3g}]"))
        for k, v in report.get("formulas", {}).items():
            rows.append((f"{k} formula", float(v)))
    elif command == "robustness":
        c = report["certificate"]
        if c is None:
            rows.append(("certificate", "none"))
        else:
            rows += [("beta_c", report["beta_c"]), ("beta_q", report["beta_q"]), ("a", c["a"]), ("b", c["b"]),
                     ("a*beta_q + b", report["tightness"]), ("trivial floor", report["trivial_floor"]),
                     ("argmin angles", " ".join(fmt(x) for x in c["argmin_angles"]))]
            lines = _table(rows)
            lines += "\nrelative_violation  lower_bound\n"
            for r in report["curve"]:
                lines += f"{fmt(r['relative_violation']):<18}  {fmt(r['lower_bound'])}\n"
            return lines
    elif command == "face":
        rows += [("points", report["n_points"]), ("dimension", report["dimension"]),
                 ("smallest s.v.", " ".join(fmt(s) for s in report["smallest_singular_values"])),
                 ("lower bound only", report["lower_bound_only"]),
                 ("expression values", " ".join(fmt(v) for v in report["expression_values"]))]
        for k, vals in enumerate(report.get("labeler_values", [])):
            rows.append((f"labelers on point {k}", " ".join(fmt(v) for v in vals)))
        for k, loops in enumerate(report.get("loop_expectations", [])):
            rows.append((f"loops on point {k}", " ".join(f"{n}={fmt(v)}" for n, v in loops.items())))
    return _table(rows)


def _csv_text(command: str, report: dict) -> str | None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if command == "robustness" and report.get("curve"):
        w.writerow(["relative_violation", "absolute_violation", "lower_bound", "trivial_floor"])
        for r in report["curve"]:
            w.writerow([fmt(r["relative_violation"]), fmt(r["absolute_violation"]), fmt(r["lower_bound"]), fmt(r["trivial_floor"])])
        return buf.getvalue()
    if command == "face":
        points = report["_points"]
        w.writerow(["parties", "inputs"] + [f"point_{k}" for k in range(len(points))])
        for i, sup in enumerate(points[0].keys):
            w.writerow([" ".join(str(p) for p, _ in sup), " ".join(str(x) for _, x in sup)]
                       + [fmt(float(p.values[i])) for p in points])
        return buf.getvalue()
    return None


# -- parser ----------------------------------------------------------------------

COMMANDS = {"gme": cmd_gme, "bounds": cmd_bounds, "robustness": cmd_robustness, "face": cmd_face}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--special-party", type=int, default=0, metavar="j", help="party with the rotated substitution (0-based)")
    common.add_argument("--seed", type=int, default=0, help="seed for every random choice")
    common.add_argument("--threads", type=int, default=None, metavar="k", help="worker cap (recorded; results do not depend on it)")
    common.add_argument("--json", action="store_true", help="print JSON instead of a table")
    common.add_argument("--csv", metavar="out.csv", help="write the CSV table here")
    common.add_argument("--tol", type=float, default=1e-8, help="eigensolver residual tolerance")
    common.add_argument("--manifest", metavar="out.json", help="write a run manifest with output hashes")

    p = _Parser(prog="subspace-selftest", description="Device-independent checks for stabilizer code subspaces.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gme", parents=[common], help="bipartite anticommutation certificate")
    g.add_argument("code", help="five_qubit | toric:L | path.json")

    b = sub.add_parser("bounds", parents=[common], help="classical and quantum values of the Bell expression")
    b.add_argument("code")
    b.add_argument("--quantum-only", action="store_true", help="skip strategy enumeration")

    r = sub.add_parser("robustness", parents=[common], help="linear extractability bound and curve")
    r.add_argument("code", nargs="?", default="five_qubit")
    r.add_argument("--a", type=float, default=None, help="fix the slope instead of searching")
    r.add_argument("--a-max", type=float, default=2.0)
    r.add_argument("--pace", type=float, default=0.001)
    r.add_argument("--coarse-points", type=int, default=9)
    r.add_argument("--min-step-div", type=float, default=800.0, help="refinement stops at pi / this")
    r.add_argument("--points", type=int, default=51, help="curve rows between beta_c and beta_q")
    r.add_argument("--restarts", type=int, default=100, help="restarts for the product-state floor")

    f = sub.add_parser("face", parents=[common], help="affine dimension of the maximally violating face")
    f.add_argument("code")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads is None:
        args.threads = os.cpu_count() or 1
    if args.threads < 1:
        parser.error("--threads must be positive")
    params = {k: v for k, v in vars(args).items() if k not in ("manifest",)}
    manifest = RunManifest(args.command, params, args.seed, __version__)
    t0 = time.perf_counter()
    try:
        spec = load_code(args.code)
        report, code = COMMANDS[args.command](spec, args)
    except (SpecError, StabilizerError, UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NonConvergenceError as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE

    csv_text = _csv_text(args.command, report) if args.csv else None
    report.pop("_points", None)
    if args.json:
        text = json.dumps(_round(report), indent=1, sort_keys=True) + "\n"
    else:
        text = _render_text(args.command, report)
    sys.stdout.write(text)
    manifest.record("stdout", text.encode())
    if args.csv:
        if csv_text is None:
            print(f"note: {args.command} has no CSV output", file=sys.stderr)
        else:
            with open(args.csv, "w", newline="") as fh:
                fh.write(csv_text)
            manifest.record(os.path.basename(args.csv), csv_text.encode())
    manifest.wall_time = time.perf_counter() - t0
    if args.manifest:
        with open(args.manifest, "w") as fh:
            json.dump(asdict(manifest), fh, indent=1, sort_keys=True)
    return code


if __name__ == "__main__":
    sys.exit(main())
