#!/usr/bin/env python3
"""Smoke test for the ckfusion_py extension module.

Builds nothing itself: point it at a compiled cdylib via CKFUSION_LIB, or
let it search target/{release,debug}/libckfusion_py.so relative to the
repository root. Build the module first with

    cargo build -p ckfusion-python --release
"""

import importlib.util
import json
import math
import os
import sys
from pathlib import Path


def load_module():
    candidates = []
    if "CKFUSION_LIB" in os.environ:
        candidates.append(Path(os.environ["CKFUSION_LIB"]))
    root = Path(__file__).resolve().parent.parent
    for profile in ("release", "debug"):
        candidates.append(root / "target" / profile / "libckfusion_py.so")
        candidates.append(root / "target" / profile / "ckfusion_py.so")
    for path in candidates:
        if path.exists():
            spec = importlib.util.spec_from_file_location("ckfusion_py", path)
            module = importlib.util.module_from_spec(spec)
            spec.loader.exec_module(module)
            print(f"loaded {path}")
            return module
    sys.exit("no compiled module found; run: cargo build -p ckfusion-python --release")


def check(name, ok):
    print(f"{name}: {'pass' if ok else 'FAIL'}")
    if not ok:
        sys.exit(1)


def main():
    ck = load_module()

    # alternating-coordinate example: fails the plain frame inequality,
    # satisfies the K-adapted one with bounds (2, 1)
    ex = ck.example32(size=16)
    bounds = ex.bounds()
    check("example32 lower bound = 2", abs(bounds["a_scalar"] - 2.0) < 1e-10)
    check("example32 upper bound = 1", abs(bounds["b_scalar"] - 1.0) < 1e-10)
    plain = ex.membership("controlled_fusion")
    check("example32 plain membership fails", not plain["conclusion_verified"])
    adapted = ex.membership("controlled_k_fusion", a=2.0, b=1.0)
    check("example32 K-adapted membership passes", adapted["conclusion_verified"])

    # random frame: reconstruction and JSON round trip
    f = ck.generate(d=2, n=5, m=4, seed=11)
    check("generated system repr", "FrameSystem" in repr(f))
    check("positive cross operators", f.positive_cross)
    vec = [[[1.0, 0.0], [0.5, -0.25]] for _ in range(f.n)]
    fhat, residual = f.reconstruct(vec)
    check("reconstruction residual < 1e-8", residual < 1e-8)
    g = ck.FrameSystem.from_json(f.to_json())
    gb, fb = g.bounds(), f.bounds()
    check(
        "round trip preserves bounds",
        abs(gb["a_scalar"] - fb["a_scalar"]) < 1e-9
        and abs(gb["b_scalar"] - fb["b_scalar"]) < 1e-9,
    )

    # analysis energy equals the quadratic form of the frame operator
    seq = f.analysis(vec)
    energy = sum(
        sum(z[0] ** 2 + z[1] ** 2 for row in item for z in row) for item in seq
    )
    s = f.frame_operator()
    quad = 0.0
    for t in range(f.d):
        col = [complex(*vec[i][t]) for i in range(f.n)]
        sx = [
            sum(complex(*s[t][i][j]) * col[j] for j in range(f.n))
            for i in range(f.n)
        ]
        quad += sum((x.conjugate() * y).real for x, y in zip(col, sx))
    check("analysis energy matches frame operator", math.isclose(energy, quad, rel_tol=1e-9))

    # pseudoinverse of a diagonal operator
    op = [[[[2.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]]
    pinv = ck.moore_penrose(op)
    check("pseudoinverse of diag(2, 0)", abs(pinv[0][0][0][0] - 0.5) < 1e-12)

    # range inclusion: T' = 2T gives factor 4
    t = [[[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]]
    t2 = [[[[2.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]]
    report = ck.douglas_check(t2, t)
    check("scaled range inclusion factor", abs(report["lambda"] - 4.0) < 1e-9)

    # erasure of the removable tail of the erasure preset
    e = ck.generate(preset="erasure", n=4, m=2, d=1, seed=6)
    cert = e.erase_check([4, 5])
    check("erasure certificate verified", cert["conclusion_verified"])

    # small perturbation keeps the frame property
    cert = f.perturb_check(1e-4, seed=3)
    check("perturbation certificate verified", cert["conclusion_verified"])

    print(json.dumps({"smoke_test": "ok"}))


if __name__ == "__main__":
    main()
