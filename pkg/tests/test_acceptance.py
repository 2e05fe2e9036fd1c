"""Acceptance criteria, one PASS/FAIL line each (collected in the terminal summary)."""

from __future__ import annotations

import cmath
import io
import json
import math
import time

import numpy as np
import pytest

from qbirkhoff.birkhoff import connection_matrix, ellipticity_residual
from qbirkhoff.cli import build_confluence_doc, build_jimbo_sakai_doc, run
from qbirkhoff.confluence import (
    epsilon_sweep,
    monodromy_det_residual,
    sector_midpoints,
    sector_monodromy_check,
    sector_partition,
)
from qbirkhoff.linalg import RationalFunction
from qbirkhoff.qpvi import CORRUPTIONS, criterion_check, q_from_p_residual, scalar_solutions
from qbirkhoff.qsystem import analyze_sigma_p
from qbirkhoff.theta import (
    CharacterPart,
    QContext,
    lambda_char_eval,
    lq_eval,
    near_spiral,
    theta_eval,
    theta_series,
)

from conftest import CLI_EXAMPLES, SYSTEMS, acceptance_line


def _doc(name: str) -> dict:
    return json.loads((SYSTEMS / f"{name}.json").read_text())


def _random_z(rng, n, ctx, avoid=(), lo=-3.0, hi=3.0):
    out = []
    while len(out) < n:
        z = cmath.exp(rng.uniform(lo, hi) + 1j * rng.uniform(-math.pi, math.pi))
        if any(near_spiral(ctx, z, a, 1e-3) or near_spiral(ctx, ctx.q * z, a, 1e-3) for a in avoid):
            continue
        out.append(z)
    return out


def _probes(js, n, seed):
    from qbirkhoff.birkhoff import admissible_probes

    return admissible_probes(js.P, n, np.random.default_rng(seed), extra_bases=js.registry_bases())


def test_criterion_1_triple_product():
    rng = np.random.default_rng(11)
    samples = []
    for _ in range(1000):
        eps = 2.0 ** rng.uniform(-3, 1)
        q0 = 2.0 * cmath.exp(1j * rng.uniform(-0.8, 0.8))
        z = cmath.exp(rng.uniform(-3, 3) + 1j * rng.uniform(-math.pi, math.pi))
        samples.append((QContext(q0, eps), z))
    refs = [theta_series(ctx, z) for ctx, z in samples]
    t0 = time.perf_counter()
    vals = [theta_eval(ctx, z) for ctx, z in samples]
    dt = time.perf_counter() - t0
    err = max(abs(v - r) / abs(r) for v, r in zip(vals, refs))
    ok = err <= 1e-12 and dt < 2.0
    acceptance_line("1", ok, f"triple product vs series, 1000 (q,z), max rel err {err:.2e} (<=1e-12), product time {dt:.2f}s (<2s)")
    assert ok


def test_criterion_2_functional_equations():
    t0 = time.perf_counter()
    ctx = QContext(2.0, 0.5)
    rng = np.random.default_rng(12)
    a = 0.7 + 1.3j
    B = np.array([[1.3, 0.4], [0.2, 0.7 + 0.1j]])
    ch = CharacterPart(B, ctx)
    avoid = [-1.0, -a] + [-lam for lam in np.linalg.eigvals(B)]
    zs = _random_z(rng, 100, ctx, avoid)
    q = ctx.q
    e_theta = max(abs(theta_eval(ctx, q * z) - z * theta_eval(ctx, z)) / abs(z * theta_eval(ctx, z)) for z in zs)
    e_lam = max(
        abs(lambda_char_eval(ctx, a, q * z) - a * lambda_char_eval(ctx, a, z)) / abs(a * lambda_char_eval(ctx, a, z))
        for z in zs
    )
    e_lq = max(abs(lq_eval(ctx, q * z) - lq_eval(ctx, z) - 1) / max(1.0, abs(lq_eval(ctx, z))) for z in zs)
    e_mat = 0.0
    for z in zs:
        L, Lq = ch(z), ch(q * z)
        n = np.linalg.norm(Lq)
        e_mat = max(e_mat, np.linalg.norm(Lq - B @ L) / n, np.linalg.norm(Lq - L @ B) / n)
    dt = time.perf_counter() - t0
    worst = max(e_theta, e_lam, e_lq, e_mat)
    ok = worst <= 1e-10 and dt < 1.0
    acceptance_line(
        "2", ok,
        f"functional equations on 100 probes: theta {e_theta:.1e}, scalar char {e_lam:.1e}, "
        f"q-log {e_lq:.1e}, matrix char {e_mat:.1e} (<=1e-10), {dt:.2f}s (<1s)",
    )
    assert ok


def test_criterion_3_rank_one_end_to_end():
    t0 = time.perf_counter()
    ctx = QContext(2.0, 1.0)
    rng = np.random.default_rng(13)
    worst = 0.0
    for alpha in (1 + 0.5j, -0.3 + 2j, 0.7, 3j, -2.5 - 1j):
        sys = analyze_sigma_p(ctx, RationalFunction([-alpha, 1.0], [1.0]), np.eye(1))
        P = connection_matrix(sys)
        ref = scalar_solutions(ctx, alpha)
        avoid = [-1.0, alpha, -alpha, -1 / alpha, alpha / ctx.q]
        for z in _random_z(rng, 100, ctx, avoid, -2.0, 2.0):
            for got, want in ((P.sol0(z), ref.y0(z)), (P.solInf(z), ref.yInf(z)), (P(z), ref.ratio(z))):
                worst = max(worst, abs(got[0, 0] - want) / abs(want))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-9 and dt < 5.0
    acceptance_line("3", ok, f"rank-1 y0, y_inf, P vs closed forms, 5 alphas x 100 probes, max rel err {worst:.2e} (<=1e-9), {dt:.2f}s (<5s)")
    assert ok


def test_criterion_4_ellipticity():
    t0 = time.perf_counter()
    js, _ = build_jimbo_sakai_doc(_doc("qpvi_generic"))
    eP = ellipticity_residual(js.P, samples=200, seed=14)
    eQ = ellipticity_residual(js.Q, samples=200, seed=14)
    dt = time.perf_counter() - t0
    ok = max(eP, eQ) <= 1e-8 and dt < 30
    acceptance_line("4", ok, f"sigma_q P = P on 200 annulus probes: P {eP:.2e}, Q {eQ:.2e} (<=1e-8), {dt:.2f}s (<30s)")
    assert ok


def _criterion5(variant: str):
    t0 = time.perf_counter()
    out = {}
    for name in ("qpvi_generic", "qpvi_degenerate"):
        js, _ = build_jimbo_sakai_doc(_doc(name))
        zs = _probes(js, 100, 15)
        out[name] = q_from_p_residual(js, zs, variant)
        if name == "qpvi_generic":
            out["corruptions"] = min(q_from_p_residual(js, zs[:20], variant, c) for c in CORRUPTIONS)
    return out, time.perf_counter() - t0


def test_criterion_5_q_from_p_identity_derived_constant():
    r, dt = _criterion5("derived")
    ok = max(r["qpvi_generic"], r["qpvi_degenerate"]) <= 1e-8 and r["corruptions"] > 1e-2 and dt < 60
    acceptance_line(
        "5 (derived constant q^1)", ok,
        f"residual generic {r['qpvi_generic']:.2e}, degenerate {r['qpvi_degenerate']:.2e} (<=1e-8); "
        f"smallest single-factor corruption {r['corruptions']:.2e} (>1e-2), {dt:.2f}s (<60s)",
    )
    assert ok


@pytest.mark.xfail(strict=True, reason="the printed constant q^-3 does not reproduce Q; see decisions ledger")
def test_criterion_5_q_from_p_identity_printed_constant():
    r, dt = _criterion5("printed")
    ok = max(r["qpvi_generic"], r["qpvi_degenerate"]) <= 1e-8 and r["corruptions"] > 1e-2 and dt < 60
    acceptance_line(
        "5 (printed constant q^-3)", ok,
        f"residual generic {r['qpvi_generic']:.2e}, degenerate {r['qpvi_degenerate']:.2e} (<=1e-8)",
    )
    assert ok


def test_criterion_6_criterion_equivalence():
    t0 = time.perf_counter()
    parts = []
    ok = True
    for name in ("qpvi_generic", "qpvi_degenerate", "qpvi_scalar"):
        js, fam = build_jimbo_sakai_doc(_doc(name))
        zs = _probes(js, 8, 16)
        r = criterion_check(fam, js.t, zs)
        wrong = criterion_check(fam, js.t, zs, sign=+1)
        ok &= r.agree
        parts.append(f"{name} Q={r.Qpseudo} P={r.Pcriterion} (wrong-sign agree={wrong.agree})")
    dt = time.perf_counter() - t0
    ok = ok and dt < 60
    acceptance_line("6", ok, "; ".join(parts) + f", {dt:.2f}s (<60s)")
    assert ok


@pytest.fixture(scope="module")
def confluence_run():
    doc = _doc("confluence_eq")
    fam = build_confluence_doc(doc)
    part = sector_partition(fam)
    zs = []
    for z in sector_midpoints(part):
        zs += [z, z * 1.3 * cmath.exp(0.1j)]
    t0 = time.perf_counter()
    rep = epsilon_sweep(fam, zs, tuple(2.0**-k for k in range(1, 8)))
    return fam, part, rep, time.perf_counter() - t0


def test_criterion_7_confluence(confluence_run):
    fam, part, rep, dt = confluence_run
    dec = all(p.decreasing_from(1) for p in rep.probes)
    cons = rep.sector_consistency()
    worst = max(cons.values())
    ok = dec and worst <= 1.0 and dt < 300
    acceptance_line(
        "7", ok,
        f"increments decreasing for k>=2 at all {len(rep.probes)} probes: {dec}; "
        f"sector agreement / combined error bar max {worst:.2e} (<=1), {dt:.2f}s (<300s)",
    )
    assert ok


def test_criterion_8_sector_monodromy(confluence_run):
    fam, part, rep, dt0 = confluence_run
    t0 = time.perf_counter()
    ok = part.m == 2
    parts = []
    for j in range(1, part.m + 1):
        res, bar = sector_monodromy_check(rep, fam, j)
        tol = max(1e-3, 3 * bar)
        det = monodromy_det_residual(fam, part.phi[j] - 1, rep.odeMonodromy[j])
        ok &= res <= tol and det <= 1e-8
        parts.append(f"j={j} residual {res:.2e} vs max(1e-3, 3x bar {bar:.2e}) = {tol:.2e}, det check {det:.1e}")
    dt = time.perf_counter() - t0 + dt0
    ok = ok and dt < 300
    acceptance_line("8", ok, "; ".join(parts) + f", {dt:.2f}s (<300s)")
    assert ok


def test_criterion_9_hypothesis_guards():
    t0 = time.perf_counter()
    parts, ok = [], True
    for name, cmd in (("guard_resonant", "solve"), ("guard_pole_at_zero", "solve"), ("guard_r0_ratio", "connection")):
        err = io.StringIO()
        rc = run([cmd, str(SYSTEMS / f"{name}.json")], stdout=io.StringIO(), stderr=err)
        msg = err.getvalue()
        hyp = msg[msg.find("[") + 1 : msg.find("]")] if "[" in msg else ""
        ok &= rc == 3 and bool(hyp)
        parts.append(f"{name} exit {rc} [{hyp}]")
    dt = time.perf_counter() - t0
    ok = ok and dt < 1.0
    acceptance_line("9", ok, "; ".join(parts) + f", {dt:.2f}s (<1s)")
    assert ok


def test_criterion_10_determinism(tmp_path):
    t0 = time.perf_counter()
    bad = []
    for i, (name, cmd, extra, code) in enumerate(CLI_EXAMPLES):
        outs = []
        for k in range(2):
            path = tmp_path / f"{i}_{k}.json"
            rc = run([cmd, str(SYSTEMS / f"{name}.json"), "-o", str(path), *extra],
                     stdout=io.StringIO(), stderr=io.StringIO())
            if rc != code:
                bad.append(f"{name}/{cmd} exit {rc}")
            blobs = [path.read_bytes()] if path.exists() else [b""]
            csv = tmp_path / f"{i}_{k}.json.csv"
            if csv.exists():
                blobs.append(csv.read_bytes())
            outs.append(blobs)
        if outs[0] != outs[1]:
            bad.append(f"{name}/{cmd} differs")
    dt = time.perf_counter() - t0
    ok = not bad and dt < 60
    acceptance_line("10", ok, f"{len(CLI_EXAMPLES)} CLI examples run twice, byte-identical JSON/CSV: {not bad} {bad}, {dt:.2f}s (<60s)")
    assert ok
