#!/usr/bin/env python3
"""Imports the compiled bindings and runs a quick end-to-end pass.

Build first:  cargo build -p wander-lab-py
Then run:     python3 python/smoke_test.py
"""

import math
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parents[1]


def locate_library() -> pathlib.Path:
    candidates = [
        ROOT / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libwander_lab_py.so", "wander_lab_py.dll", "libwander_lab_py.dylib")
    ]
    for path in candidates:
        if path.exists():
            return path
    sys.exit("bindings not built; run: cargo build -p wander-lab-py")


def main() -> None:
    staging = tempfile.mkdtemp(prefix="wander-lab-")
    suffix = ".pyd" if sys.platform == "win32" else ".so"
    shutil.copy(locate_library(), pathlib.Path(staging) / f"wander_lab_py{suffix}")
    sys.path.insert(0, staging)

    import wander_lab_py as wl

    # Maps and classification.
    half = wl.Map([0j, -0.5 + 0j])
    assert abs(half.multiplier() - 0.5) < 1e-15
    seq = wl.Sequence.constant(half)
    assert seq.classify().verdict == "Contracting"
    assert wl.Sequence.power_deficit(1.0, 2.0).classify().verdict == "SemiContracting"

    # Linearization.
    assert abs(wl.univalence_radius(0.8) - 0.25) < 1e-12
    grid = [0.05 + 0j, 0.02 + 0.03j, -0.04 + 0.01j]
    lin = wl.koenigs_limit(seq, 0, grid, tol=1e-10, max_m=512)
    assert lin.status == "converged" and lin.residual_sup < 1e-8

    # Hyperbolic geometry.
    assert abs(wl.hyp_dist(0j, 0.5 + 0j) - math.log(3.0)) < 1e-12
    assert abs(wl.Annulus(0.5).core_length() - 2.0 * math.pi) < 1e-12

    # Power towers.
    tower = wl.Tower.annulus(0.3, 2)
    assert tower.total_degree(10) == 1024
    assert tower.push_modulus(10) == 0.3 * 1024
    core = complex(tower.level_core_radius(0), 0.0)
    assert tower.witness(core, 5) == 2.0 * math.pi / 32.0
    assert tower.detect(core, [2, 4]).verdict == "indiscrete"

    # Grand orbits.
    orbit = wl.grand_orbit(seq, 0.2 + 0j, 4)
    assert len(orbit) == 16 and not orbit.truncated

    # Dimension classifier.
    total, breakdown = wl.total_dimension(
        [
            wl.Component.annulus(0.7, "indiscrete"),
            wl.Component.punctured_disc("indiscrete"),
            wl.Component.punctured_disc("indiscrete"),
        ]
    )
    assert total == "1" and breakdown == ["1", "0", "0"]

    print("smoke test passed")


if __name__ == "__main__":
    main()
