#!/usr/bin/env python3
"""Regenerate the example descriptions in ``systems/``."""

from __future__ import annotations

import argparse
import cmath
import json
from pathlib import Path

import numpy as np


def c(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def cm(M) -> list:
    return [[c(x) for x in row] for row in np.asarray(M, dtype=complex)]


def rf(num, den=(1.0,)) -> dict:
    return {"num": [c(x) for x in num], "den": [c(x) for x in den]}


def const_matrix(M) -> list:
    return [[rf([x]) for x in row] for row in np.asarray(M, dtype=complex)]


def random_residues(seed: int, scale: float = 0.3):
    rng = np.random.default_rng(seed)

    def rm():
        return (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))) * scale

    A0, A1 = rm(), rm()
    A2 = np.diag([0.3 + 0.1j, -0.2 + 0.05j])
    return A0, A1, A2 - A0 - A1, A2


def js_residues(A0, A1, At) -> dict:
    return {"A0": cm(A0), "A1": cm(A1), "At": cm(At)}


def systems() -> dict:
    out = {}
    out["theta"] = {
        "version": 1,
        "name": "theta: Y(qz) = z Y",
        "nu": 1,
        "q0": c(2.0),
        "epsilon": 1.0,
        "R": rf([0.0, 1.0]),
        "A": const_matrix([[1.0]]),
    }
    alpha = 1 + 0.5j
    out["rank1"] = {
        "version": 1,
        "name": "rank one: y(z/q) = (z - alpha) y",
        "nu": 1,
        "q0": c(2.0),
        "epsilon": 1.0,
        "form": "sigma_p",
        "R": rf([-alpha, 1.0]),
        "A": const_matrix([[1.0]]),
    }
    A0, A1, At, A2 = random_residues(1)
    out["qpvi_generic"] = {
        "version": 1,
        "name": "Jimbo-Sakai, generic residues (not isomonodromic)",
        "q0": c(2.0),
        "epsilon": 0.5,
        "family": {"kind": "jimbo-sakai", "residues": js_residues(A0, A1, At), "t": c(0.4 + 0.9j), "A2": cm(A2)},
        "samples": 100,
        "seed": 7,
    }
    Z = np.zeros((2, 2))
    out["qpvi_degenerate"] = {
        "version": 1,
        "name": "Jimbo-Sakai with vanishing residues at t = i",
        "q0": c(2.0),
        "epsilon": 0.5,
        "family": {"kind": "jimbo-sakai", "residues": js_residues(Z, Z, Z), "t": c(1j)},
        "samples": 100,
        "seed": 7,
    }
    kappa, eps = 0.3, 0.5
    p = 2.0 ** -eps
    t = cmath.sqrt(-1 / (1 + (p - 1) * kappa))
    out["qpvi_scalar"] = {
        "version": 1,
        "name": "Jimbo-Sakai with scalar residue at 0 (connection-preserving)",
        "q0": c(2.0),
        "epsilon": eps,
        "family": {"kind": "jimbo-sakai", "residues": js_residues(kappa * np.eye(2), Z, Z), "t": c(t)},
        "samples": 100,
        "seed": 7,
    }
    rng = np.random.default_rng(3)

    def rm():
        return (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))) * 0.2

    C0, C1, Ct = rm(), rm(), rm()
    out["confluence_eq"] = {
        "version": 1,
        "name": "confluence of the factored Jimbo-Sakai shape, poles 1 and 2i",
        "q0": c(2.0),
        "epsilon": 0.5,
        "family": {
            "kind": "confluence",
            "calA0": cm(C0),
            "poles": [c(1.0), c(2j)],
            "residues": [cm(C1), cm(Ct)],
            "scheme": "sigma_p",
        },
        "epsGrid": [2.0 ** -k for k in range(1, 8)],
    }
    out["confluence_trivial"] = {
        "version": 1,
        "name": "confluence of the trivial system",
        "q0": c(2.0),
        "epsilon": 0.5,
        "family": {"kind": "confluence", "calA0": cm(Z), "poles": [], "residues": []},
        "probes": [c(0.5 + 0.5j), c(-1.5j), c(2.0)],
        "epsGrid": [2.0 ** -k for k in range(1, 5)],
    }
    u, t0, eps = 0.7 + 0.2j, 0.5 + 0.3j, 1.0
    q = 2.0 ** eps

    def member(t):
        num = np.polynomial.polynomial.polyfromroots([u * t, t / u])
        den = np.polynomial.polynomial.polyfromroots([t, t])
        return {"t": c(t), "R": rf(num, den), "A": const_matrix([[1.0]])}

    out["deformation_positive"] = {
        "version": 1,
        "name": "rank-one connection-preserving family R = (z-ut)(z-t/u)/(z-t)^2",
        "q0": c(2.0),
        "epsilon": eps,
        "family": {"kind": "deformation", "members": [member(t0), member(q * t0)]},
        "seed": 3,
    }
    # hypothesis guards
    out["guard_resonant"] = {
        "version": 1,
        "name": "resonant leading matrix at 0",
        "q0": c(2.0),
        "epsilon": 1.0,
        "A": const_matrix(np.diag([1.0, 2.0])),
    }
    out["guard_pole_at_zero"] = {
        "version": 1,
        "name": "coefficient with a pole at 0",
        "q0": c(2.0),
        "epsilon": 1.0,
        "A": [[rf([1.0, 1.0], [0.0, 1.0]), rf([0.0])], [rf([0.0]), rf([1.0])]],
    }

    def shifted(t):
        return {"t": c(t), "R": rf([-(t + 1), 1.0]), "A": const_matrix([[1.0]])}

    out["guard_r0_ratio"] = {
        "version": 1,
        "name": "family with r0(qt)/r0(t) outside q^Z",
        "q0": c(2.0),
        "epsilon": 1.0,
        "form": "sigma_p",
        "family": {"kind": "deformation", "members": [shifted(0.5), shifted(1.0)]},
    }
    return out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dir", default=str(Path(__file__).resolve().parents[1] / "systems"))
    args = ap.parse_args()
    d = Path(args.dir)
    d.mkdir(parents=True, exist_ok=True)
    for name, doc in systems().items():
        (d / f"{name}.json").write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
        print(d / f"{name}.json")


if __name__ == "__main__":
    main()
