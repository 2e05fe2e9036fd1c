"""Command-line front end.

``qbirkhoff solve|connection|confluence|qpvi-verify FILE.json [flags]``

Exit codes: 0 success, 2 malformed input, 3 hypothesis violation,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from importlib import resources
from typing import Any

import jsonschema
import numpy as np

from .birkhoff import admissible_probes, connection_matrix, ellipticity_residual, pole_scan
from .confluence import (
    DEFAULT_EPS_GRID,
    ConfluenceFamily,
    epsilon_sweep,
    global_monodromy_residual,
    monodromy_det_residual,
    ode_connection,
    sector_midpoints,
    sector_monodromy_check,
    sector_partition,
)
from .errors import HypothesisViolation, NumericalFailure, UnsupportedSpiralGeometry
from .isomonodromy import DeformationFamily, pseudo_constancy_test
from .linalg import RationalFunction, RationalMatrix
from .qpvi import (
    CORRUPTIONS,
    JimboSakaiFamily,
    build_jimbo_sakai,
    criterion_check,
    fhat_ratio_residual,
    q_from_p_residual,
)
from .qsystem import analyze_sigma_p, analyze_system, functional_residual, local_series
from .theta import QContext

EXIT_OK, EXIT_INPUT, EXIT_HYPOTHESIS, EXIT_NUMERICAL = 0, 2, 3, 4
CSV_COLUMNS = ("eps", "probe_re", "probe_im", "sector", "residual_kind", "residual_value")


class InputError(Exception):
    pass


# -- (de)serialization --------------------------------------------------------


def _schema(name: str) -> dict:
    text = resources.files("qbirkhoff").joinpath("schemas", name).read_text()
    return json.loads(text)


def validate_system(doc: Any) -> None:
    try:
        jsonschema.validate(doc, _schema("system.schema.json"))
    except jsonschema.ValidationError as e:
        raise InputError(f"schema error at {'/'.join(map(str, e.absolute_path)) or '<root>'}: {e.message}")


def validate_report(doc: Any) -> None:
    jsonschema.validate(doc, _schema("report.schema.json"))


def _c(v) -> complex:
    return complex(v[0], v[1])


def _cm(rows) -> np.ndarray:
    return np.array([[_c(x) for x in r] for r in rows], dtype=complex)


def _rf(d) -> RationalFunction:
    den = d.get("den", [[1.0, 0.0]])
    return RationalFunction([_c(x) for x in d["num"]], [_c(x) for x in den])


def _rm(rows) -> RationalMatrix:
    return RationalMatrix(tuple(tuple(_rf(e) for e in r) for r in rows))


def jc(z) -> list:
    z = complex(z)
    return [_jf(z.real), _jf(z.imag)]


def _jf(x) -> float | None:
    x = float(x)
    return x if math.isfinite(x) else None


def jm(M) -> list:
    return [[jc(x) for x in row] for row in np.atleast_2d(np.asarray(M, dtype=complex))]


def _residual(invariant: str, value: float, tol: float | None = None) -> dict:
    out = {"invariant": invariant, "value": _jf(value)}
    if tol is not None:
        out["tolerance"] = tol
        out["pass"] = bool(math.isfinite(value) and value <= tol)
    return out


def load_document(path: str) -> tuple[dict, str]:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}")
    try:
        doc = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise InputError(f"malformed JSON: {e}")
    validate_system(doc)
    _check_shapes(doc)
    return doc, hashlib.sha256(raw).hexdigest()


def _check_shapes(doc: dict) -> None:
    nu = doc.get("nu")
    if "A" in doc:
        A = doc["A"]
        if any(len(r) != len(A) for r in A):
            raise InputError("A must be square")
        if nu is not None and len(A) != nu:
            raise InputError(f"A has size {len(A)} but nu = {nu}")


# -- builders -----------------------------------------------------------------


def _ctx(doc: dict) -> QContext:
    q0 = _c(doc["q0"])
    if abs(q0) <= 1:
        raise InputError("|q0| must exceed 1")
    return QContext(q0, float(doc["epsilon"]))


def build_system(doc: dict):
    if "A" not in doc:
        raise InputError("this command needs 'A' (and optionally 'R')")
    ctx = _ctx(doc)
    R = _rf(doc["R"]) if "R" in doc else 1.0
    A = _rm(doc["A"])
    name = doc.get("name", "")
    if doc.get("form", "sigma_q") == "sigma_p":
        return analyze_sigma_p(ctx, R, A, name=name)
    return analyze_system(ctx, R, A, name=name)


def _js_residues(d: dict) -> tuple:
    return _cm(d["A0"]), _cm(d["A1"]), _cm(d["At"])


def build_jimbo_sakai_doc(doc: dict):
    fam = doc["family"]
    ctx = _ctx(doc)
    t = _c(fam["t"])
    res_t = _js_residues(fam["residues"])
    res_qt = _js_residues(fam["residues_qt"]) if "residues_qt" in fam else res_t
    A2 = _cm(fam["A2"]) if "A2" in fam else None
    sys_t = build_jimbo_sakai(*res_t, t, ctx, A2=A2)

    def residues(s):
        return res_t if abs(s - t) <= 1e-12 * abs(t) else res_qt

    family = JimboSakaiFamily(residues, ctx)
    family._cache[complex(t)] = sys_t
    return sys_t, family


def build_confluence_doc(doc: dict) -> ConfluenceFamily:
    fam = doc["family"]
    return ConfluenceFamily(
        _cm(fam["calA0"]),
        tuple(_c(a) for a in fam["poles"]),
        tuple(_cm(r) for r in fam["residues"]),
        _c(doc["q0"]),
        fam.get("scheme", "sigma_p"),
    )


def build_deformation_doc(doc: dict) -> DeformationFamily:
    ctx = _ctx(doc)
    members = {}
    for m in doc["family"]["members"]:
        R = _rf(m["R"]) if "R" in m else 1.0
        members[_c(m["t"])] = (R, _rm(m["A"]))
    form = doc.get("form", "sigma_q")
    q = ctx.q

    def builder(t):
        for s, (R, A) in members.items():
            if abs(s - t) <= 1e-9 * max(1.0, abs(t)):
                if form == "sigma_p":
                    return analyze_sigma_p(ctx, R, A, name=f"t={t}")
                return analyze_system(ctx, R, A, name=f"t={t}")
        raise InputError(f"family member at t = {t} is missing")

    samples = [t for t in members if any(abs(s - q * t) <= 1e-9 * max(1.0, abs(t)) for s in members)]
    if not samples:
        raise InputError("deformation family needs members at some t and at q*t")
    return DeformationFamily(builder, samples)


def _probes(doc: dict, override: str | None) -> list[complex] | None:
    if override:
        return [complex(s.replace(" ", "")) for s in override.split(",")]
    if "probes" in doc:
        return [_c(p) for p in doc["probes"]]
    return None


def _tol(doc: dict, key: str, default: float) -> float:
    return float(doc.get("tolerances", {}).get(key, default))


def _describe(sys) -> dict:
    d = sys.describe()
    return {
        "form": d["form"],
        "nu": d["nu"],
        "mu0": d["mu0"],
        "muInf": d["muInf"],
        "r0": jc(d["r0"]),
        "rInf": jc(d["rInf"]),
        "A0": jm(d["A0"]),
        "AInf": jm(d["AInf"]),
        "S0": [jc(z) for z in d["S0"]],
        "SInf": [jc(z) for z in d["SInf"]],
    }


# -- commands -----------------------------------------------------------------


def cmd_solve(doc: dict, args) -> tuple[dict, list, list]:
    sys_ = build_system(doc)
    zs = _probes(doc, args.z) or [complex(0.7, 0.3), complex(-0.4, 1.1), complex(2.3, -0.8)]
    sides = ("origin", "infinity") if args.side == "both" else (args.side,)
    tol = _tol(doc, "functional", 1e-10)
    results: dict = {"system": _describe(sys_), "solutions": {}}
    residuals = []
    for side in sides:
        sol = local_series(sys_, side)
        vals, worst = [], 0.0
        for z in zs:
            vals.append({"z": jc(z), "Y": jm(sol(z))})
            worst = max(worst, functional_residual(sol, z))
        results["solutions"][side] = {
            "order": sol.order,
            "radius": sol.radius,
            "theta_power": sol.theta_power,
            "character_eigenvalues": [jc(x) for x in sol.character.eigenvalues],
            "values": vals,
        }
        residuals.append(_residual(f"functional_equation_{side}", worst, tol))
    return results, residuals, []


def cmd_connection(doc: dict, args) -> tuple[dict, list, list]:
    seed = args.seed
    samples = args.samples or int(doc.get("samples", 200))
    fam = doc.get("family", {})
    if fam.get("kind") == "deformation":
        return _deformation_report(doc, args)
    if fam.get("kind") == "jimbo-sakai":
        js, _ = build_jimbo_sakai_doc(doc)
        targets = [("P", js.P), ("Q", js.Q)]
    else:
        targets = [("P", connection_matrix(build_system(doc)))]
    tol = _tol(doc, "ellipticity", 1e-8)
    results: dict = {}
    residuals = []
    for label, P in targets:
        rng = np.random.default_rng(seed)
        zs = _probes(doc, args.probes) or list(admissible_probes(P, 5, rng))
        entry = {
            "system": _describe(P.system),
            "registry": [jc(b) for b in P.registry.base_points],
            "values": [{"z": jc(z), "P": jm(P(z))} for z in zs],
        }
        ell = ellipticity_residual(P, samples=samples, seed=seed)
        residuals.append(_residual(f"ellipticity_{label}", ell, tol))
        if args.pole_scan:
            ann = tuple(float(x) for x in args.annulus.split(",")) if args.annulus else None
            scan = pole_scan(P, annulus=ann, grid=args.grid)
            entry["pole_scan"] = {
                "detected": [jc(b) for b in scan.detected.base_points],
                "unmatched": [jc(b) for b in scan.unmatched],
            }
            residuals.append(_residual(f"pole_scan_unmatched_{label}", float(len(scan.unmatched)), 0.0))
        results[label] = entry
    return results, residuals, []


def _deformation_report(doc: dict, args) -> tuple[dict, list, list]:
    fam = build_deformation_doc(doc)
    tol = _tol(doc, "pseudo_constancy", 1e-8)
    rng = np.random.default_rng(args.seed)
    results: dict = {"members": {}}
    residuals = []
    for t in fam.t_samples:
        P = fam.connection(t)
        zs = _probes(doc, args.probes) or list(
            admissible_probes(P, 8, rng, extra_bases=fam.connection(fam.q(t) * t).registry.base_points)
        )
        pc = pseudo_constancy_test(fam, t, zs, tol)
        results["members"][repr(complex(t))] = {
            "t": jc(t),
            "pseudo_constant": pc.pseudoConstant,
            "proportional_poles": [jc(a) for a in fam.proportional_poles(t)],
        }
        residuals.append(_residual("pseudo_constancy", pc.maxResidual, tol))
    return results, residuals, []


def cmd_confluence(doc: dict, args) -> tuple[dict, list, list]:
    if doc.get("family", {}).get("kind") != "confluence":
        raise InputError("confluence needs a family of kind 'confluence'")
    fam = build_confluence_doc(doc)
    grid = (
        tuple(float(x) for x in args.eps_grid.split(","))
        if args.eps_grid
        else tuple(doc.get("epsGrid", DEFAULT_EPS_GRID))
    )
    try:
        part = sector_partition(fam)
    except UnsupportedSpiralGeometry:
        part = None
    zs = _probes(doc, args.probes)
    if zs is None:
        if part is None:
            raise InputError("probes are required when q0 is not real")
        zs = []
        for z in sector_midpoints(part):
            zs += [z, z * 1.3 * complex(math.cos(0.1), math.sin(0.1))]
    rep = epsilon_sweep(fam, zs, grid)
    tol1 = _tol(doc, "sector_monodromy", 1e-3)
    residuals, rows, errors = [], [], []
    probes_out = []
    for p in rep.probes:
        ode = None
        if p.sector is not None:
            try:
                ode = ode_connection(fam, p.z)
            except NumericalFailure as e:
                errors.append(f"ode_connection at {p.z}: {e}")
        probes_out.append(
            {
                "z": jc(p.z),
                "sector": p.sector,
                "increments": [_jf(x) for x in p.increments],
                "decreasing_after_first": p.decreasing_from(1),
                "limit": jm(p.limit) if p.limit is not None else None,
                "error_bar": _jf(p.error_bar),
                "ode_connection": jm(ode) if ode is not None else None,
                "errors": [e for e in p.errors],
            }
        )
        inc = p.increments
        for k, eps in enumerate(grid):
            base = [eps, p.z.real, p.z.imag, "" if p.sector is None else p.sector]
            if p.errors[k] is not None:
                rows.append(base + ["failure", math.nan])
                errors.append(f"eps={eps:g} z={p.z}: {p.errors[k]}")
                continue
            if k > 0:
                rows.append(base + ["increment", inc[k - 1]])
            if ode is not None:
                rows.append(
                    base + ["ode_distance", float(np.linalg.norm(p.values[k] - ode) / np.linalg.norm(ode))]
                )
    for s, v in sorted(rep.sector_consistency().items()):
        residuals.append(_residual(f"sector_consistency_{s}", v, 1.0))
    results: dict = {
        "epsGrid": list(grid),
        "probes": probes_out,
        "tildeP": {str(s): {"P": jm(m), "error_bar": _jf(b)} for s, (m, b) in sorted(rep.tildePj.items())},
    }
    if part is not None:
        results["sectors"] = {"phi": list(part.phi), "ray_angles": list(part.ray_angles)}
        thm = {}
        for j in range(1, part.m + 1):
            res, bar = sector_monodromy_check(rep, fam, j)
            M = rep.odeMonodromy[j]
            det = monodromy_det_residual(fam, part.phi[j] - 1, M)
            thm[str(j)] = {
                "singularity": jc(fam.poles[part.phi[j] - 1]),
                "monodromy": jm(M),
                "residual": _jf(res),
                "error_bar": _jf(bar),
            }
            tol = max(tol1, 3 * bar) if math.isfinite(bar) else tol1
            residuals.append(_residual(f"sector_monodromy_j{j}", res, tol))
            residuals.append(_residual(f"monodromy_det_j{j}", det, 1e-8))
        results["sector_monodromy"] = thm
        residuals.append(_residual("global_monodromy", global_monodromy_residual(rep, fam)))
    return results, residuals, (rows, errors)


def cmd_qpvi_verify(doc: dict, args) -> tuple[dict, list, list]:
    if doc.get("family", {}).get("kind") != "jimbo-sakai":
        raise InputError("qpvi-verify needs a family of kind 'jimbo-sakai'")
    js, family = build_jimbo_sakai_doc(doc)
    rng = np.random.default_rng(args.seed)
    n = int(doc.get("samples", 20))
    zs = _probes(doc, args.probes) or list(
        admissible_probes(js.P, n, rng, extra_bases=js.registry_bases())
    )
    tol = _tol(doc, "q_from_p", 1e-8)
    residuals = [
        _residual("expansion", js.expansion_residual(zs), 1e-12),
        _residual("determinant_factorization", js.det_residual(zs), 1e-10),
        _residual("q_from_p", q_from_p_residual(js, zs, "derived"), tol),
        _residual("q_from_p_printed_constant", q_from_p_residual(js, zs, "printed")),
        _residual("fhat_ratio", fhat_ratio_residual(js, zs), tol),
        _residual("fhat_ratio_literal_exponent", fhat_ratio_residual(js, zs, literal_exponent=True)),
    ]
    crit = criterion_check(family, js.t, zs[: min(len(zs), 8)])
    wrong = criterion_check(family, js.t, zs[: min(len(zs), 8)], sign=1)
    results: dict = {
        "t": jc(js.t),
        "B0": jm(js.B0eps),
        "A1": jm(js.A1),
        "A2": jm(js.A2),
        "det_roots": [jc(r) for r in sorted(js.detRoots, key=lambda r: (round(r.real, 12), round(r.imag, 12)))],
        "criterion": {
            "Q_pseudo_constant": crit.Qpseudo,
            "P_criterion": crit.Pcriterion,
            "agree": crit.agree,
            "wrong_sign_P_criterion": wrong.Pcriterion,
        },
        "probes": [jc(z) for z in zs],
    }
    residuals.append(_residual("criterion_Q", crit.Qresidual))
    residuals.append(_residual("criterion_P", crit.Presidual))
    if args.negative_control:
        results["negative_control"] = {
            c: _jf(q_from_p_residual(js, zs, "derived", c)) for c in CORRUPTIONS
        }
        for c in CORRUPTIONS:
            residuals.append(_residual(f"q_from_p_corrupted_{c}", results["negative_control"][c]))
    return results, residuals, []


COMMANDS = {
    "solve": cmd_solve,
    "connection": cmd_connection,
    "confluence": cmd_confluence,
    "qpvi-verify": cmd_qpvi_verify,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qbirkhoff", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("input", help="system description (JSON)")
        p.add_argument("-o", "--out", help="write the JSON report here instead of stdout")
        p.add_argument("--seed", type=int, default=None, help="seed for random probes")
        p.add_argument("--epsilon", type=float, default=None, help="override the document's epsilon")

    p = sub.add_parser("solve", help="local solutions at 0 and infinity")
    common(p)
    p.add_argument("--side", choices=("origin", "infinity", "both"), default="both")
    p.add_argument("--z", help="comma-separated evaluation points, e.g. '0.5+0.1j,2-1j'")

    p = sub.add_parser("connection", help="connection matrix, ellipticity, pole scan")
    common(p)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--probes", help="comma-separated probe points")
    p.add_argument("--pole-scan", action="store_true")
    p.add_argument("--grid", type=int, default=24)
    p.add_argument("--annulus", help="pole-scan annulus 'rmin,rmax' (default: 1,|q|)")

    p = sub.add_parser("confluence", help="eps sweep, sectors and monodromy")
    common(p)
    p.add_argument("--eps-grid", help="comma-separated decreasing eps values")
    p.add_argument("--probes", help="comma-separated probe points")
    p.add_argument("--csv", help="CSV output path (default: <out>.csv when --out is given)")

    p = sub.add_parser("qpvi-verify", help="identities of the Jimbo-Sakai system")
    common(p)
    p.add_argument("--probes", help="comma-separated probe points")
    p.add_argument("--negative-control", action="store_true", help="also evaluate corrupted identities")
    return ap


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        doc, digest = load_document(args.input)
        if args.epsilon is not None:
            doc["epsilon"] = args.epsilon
        if args.seed is None:
            args.seed = int(doc.get("seed", 0))
        results, residuals, extra = COMMANDS[args.command](doc, args)
    except InputError as e:
        print(f"input error: {e}", file=stderr)
        return EXIT_INPUT
    except HypothesisViolation as e:
        print(f"hypothesis violated [{e.hypothesis}]: {e}", file=stderr)
        return EXIT_HYPOTHESIS
    except NumericalFailure as e:
        print(f"numerical failure ({type(e).__name__}): {e}", file=stderr)
        return EXIT_NUMERICAL
    except ValueError as e:
        print(f"input error: {e}", file=stderr)
        return EXIT_INPUT
    report = {
        "version": 1,
        "command": args.command,
        "name": doc.get("name", ""),
        "seed": args.seed,
        "input_sha256": digest,
        "results": results,
        "residuals": residuals,
    }
    if extra:
        rows, errors = extra
        report["errors"] = errors
    validate_report(report)
    text = json.dumps(report, sort_keys=True, indent=1, allow_nan=False) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    if extra:
        path = getattr(args, "csv", None) or (args.out + ".csv" if args.out else None)
        if path:
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(CSV_COLUMNS)
            for r in rows:
                w.writerow([repr(x) if isinstance(x, float) else x for x in r])
            with open(path, "w") as fh:
                fh.write(buf.getvalue())
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
