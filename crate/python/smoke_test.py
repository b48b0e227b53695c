#!/usr/bin/env python3
"""Smoke test for the gnatlab_py extension module.

Build the module first:

    cargo build -p gnatlab-py            # or --release

then run this script from the repository root:

    python3 python/smoke_test.py
"""

import importlib.util
import json
import math
import pathlib
import sys


def load_module():
    root = pathlib.Path(__file__).resolve().parent.parent
    candidates = [
        root / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libgnatlab_py.so", "gnatlab_py.so", "libgnatlab_py.dylib")
    ]
    for path in candidates:
        if path.exists():
            spec = importlib.util.spec_from_file_location("gnatlab_py", path)
            module = importlib.util.module_from_spec(spec)
            spec.loader.exec_module(module)
            return module
    sys.exit(
        "gnatlab_py extension not found; run `cargo build -p gnatlab-py` first"
    )


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol


def main():
    lab = load_module()

    # Generator scalars: the round-sphere set is the identity block at t=0.
    s = lab.derived_scalars("sasaki", 0.0)
    assert close(s["a1"], 1.0) and close(s["adet"], 1.0), s

    # Classification: both presets stay Riemannian on [0, 10].
    for preset in ("sasaki", "cheeger-gromoll"):
        verdict = lab.classify(preset)
        assert verdict["riemannian"], (preset, verdict)
        assert verdict["witnesses"] == [], (preset, verdict)

    # A custom set passed as JSON, with a degenerate horizontal block.
    degenerate = json.dumps(
        {
            "name": "collapsed",
            "a1": {"kind": "rational", "num": [1.0], "den": [1.0]},
            "a2": {"kind": "rational", "num": [0.0], "den": [1.0]},
            "a3": {"kind": "rational", "num": [-1.0], "den": [1.0]},
            "b1": {"kind": "rational", "num": [0.0], "den": [1.0]},
            "b2": {"kind": "rational", "num": [0.0], "den": [1.0]},
            "b3": {"kind": "rational", "num": [0.0], "den": [1.0]},
        }
    )
    verdict = lab.classify(degenerate)
    assert not verdict["nondegenerate"], verdict
    assert verdict["witnesses"], verdict

    # Gram matrix at a zero-section point of the unit sphere: block
    # diagonal, horizontal block = g, vertical block = g.
    gram = lab.gram_matrix("sphere:1", "sasaki", [1.0, 0.5], [0.0, 0.0])
    g11 = 1.0
    g22 = math.sin(1.0) ** 2
    expected = [
        [g11, 0.0, 0.0, 0.0],
        [0.0, g22, 0.0, 0.0],
        [0.0, 0.0, g11, 0.0],
        [0.0, 0.0, 0.0, g22],
    ]
    for row, erow in zip(gram, expected):
        for v, e in zip(row, erow):
            assert close(v, e, 1e-12), (gram, expected)

    # Unit sphere zero-section spectrum along a horizontal direction:
    # {0, 0, 0, 1} with the curvature-ratio eigenvalue equal to 1.
    z = lab.zero_section_spectrum("sphere:1", "sasaki", [1.0, 0.5], [1.0, 0.0])
    assert close(z["curvature_ratio"], 1.0), z
    for got, want in zip(z["eigenvalues"], [0.0, 0.0, 0.0, 1.0]):
        assert close(got, want, 1e-9), z
    assert z["ratio_distance"] < 1e-9 and z["zero_distance"] < 1e-9, z

    # General Jacobi spectrum off the zero section is self-adjoint and the
    # closed-form expression reproduces it.
    j = lab.jacobi_spectrum(
        "sphere:1", "sasaki", [1.0, 0.5], [0.4, 0.8], [0.4, 0.8], [0.0, 0.0]
    )
    assert j["self_adjoint_residual"] < 1e-10, j
    c = lab.closed_form_spectrum("sphere:1", "sasaki", [1.0, 0.5], [0.4, 0.8])
    assert c["max_deviation"] < 1e-9, c
    r1, r2 = lab.entry_identities("sphere:1", "sasaki", [1.0, 0.5], [0.4, 0.8])
    assert abs(r1) < 1e-9 and abs(r2) < 1e-9, (r1, r2)

    # Flat base: every Jacobi spectrum vanishes, so the scan reports
    # direction-independence globally; the round sphere fails pointwise.
    flat_points = [([0.0, 0.0], [1.0, 0.0]), ([2.0, -1.0], [0.5, 0.5])]
    scan = lab.osserman_scan("flat", "sasaki", flat_points, directions=12)
    assert scan["global"]["is_osserman"], scan["global"]
    assert scan["global"]["spectrum_spread"] < 1e-10, scan["global"]

    sphere_points = [([1.0, 0.5], [0.4, 0.8])]
    scan = lab.osserman_scan("sphere:1", "sasaki", sphere_points, directions=12)
    assert not scan["pointwise"][0]["is_osserman"], scan["pointwise"]

    print("smoke test: all checks passed")


if __name__ == "__main__":
    main()
