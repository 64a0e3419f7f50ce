#!/usr/bin/env python3
"""
Acceptance Runner
Runs the closed-form checks of every named example and prints a summary.
"""
import math
import sys
import os

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from tfmonad.config import settings
from tfmonad.errors import TanMonadError
from tfmonad.main import configure_logging
from tfmonad.services.affine_hopf_service import affine_hopf_service
from tfmonad.services.algebra_service import algebra_service
from tfmonad.services.example_service import example_service, flat_nilpotent_field, nijenhuis_counterexample
from tfmonad.services.flow_service import flow_service
from tfmonad.services.foliation_service import foliation_service
from tfmonad.services.kahler_service import kahler_service
from tfmonad.services.monad_service import monad_service, mu


def rotation_quarter_turn():
    X, _ = example_service.rotation_data()
    point = flow_service.flow(X, (1.0, 0.0), math.pi / 2).point
    return max(abs(point[0]), abs(point[1] - 1.0)) <= 1e-8


def cylinder_holonomy():
    bundle = example_service.bundle("cylinder")
    return foliation_service.holonomy_linear_map(bundle.algebra, bundle.base_point, bundle.loop).has_eigenvalue_one


def rotation_holonomy():
    bundle = example_service.bundle("rotation")
    result = foliation_service.holonomy_linear_map(bundle.algebra, bundle.base_point, bundle.loop, steps=8)
    return result.has_eigenvalue_one


def semi_affine_pair():
    passing = algebra_service.check_axioms(example_service.build("semi-affine")).passed
    broken = algebra_service.check_axioms(example_service.build("semi-affine-broken")).passed
    return passing and not broken


def nijenhuis_pair():
    return (not algebra_service.check_nijenhuis(nijenhuis_counterexample()).passed
            and algebra_service.check_nijenhuis(flat_nilpotent_field()).passed)


def build_checks(quick: bool):
    checks = [
        ("monad laws, dims 1-3", lambda: all(monad_service.verify_monad_laws(d).passed for d in (1, 2, 3))),
        ("mu is the unique natural T^2 -> T", lambda: monad_service.fit_T2_to_T(mu).residual == 0),
        ("delta_b is not natural", lambda: monad_service.comonad_naturality_witness().gap == 2),
        ("semi-affine passes, broken variant fails", semi_affine_pair),
    ]
    for name in ("trivial", "free", "affine", "product", "cylinder", "torus", "radial"):
        checks.append((f"{name} algebra axioms", lambda name=name: algebra_service.check_axioms(
            example_service.build(name)).passed))
    checks += [
        ("Nijenhuis counterexample and flat field", nijenhuis_pair),
        ("rotation flow at pi/2", rotation_quarter_turn),
        ("rotation time function", lambda: flow_service.check_time_axioms(
            *example_service.rotation_data(), (-1, -1), (1, 1)).passed),
        ("cylinder holonomy has eigenvalue 1", cylinder_holonomy),
        ("affine bimonad a=1 b=2", lambda: affine_hopf_service.verify_affine_laws(1, 2).passed),
        ("antipode a=1 b=2", lambda: affine_hopf_service.verify_antipode(1, 2).passed),
        ("Hopf lattice a=0 b=1", lambda: affine_hopf_service.lattice_scan(0, 1).passed),
        ("Hopf lattice a=1 b=-1", lambda: affine_hopf_service.lattice_scan(1, -1).passed),
        ("Kahler comonad n=1,2", lambda: all(kahler_service.verify_comonad(n, samples=10).passed for n in (1, 2))),
    ]
    if not quick:
        checks.append(("rotation holonomy has eigenvalue 1", rotation_holonomy))
    return checks


def run_acceptance(quick: bool = False) -> int:
    print("=" * 50)
    print("tfmonad Acceptance Suite")
    print("=" * 50)

    checks = build_checks(quick)
    failures = 0
    for i, (name, fn) in enumerate(checks, start=1):
        try:
            ok = bool(fn())
            status = "ok" if ok else "FAILED"
        except TanMonadError as exc:
            ok = False
            status = f"ERROR {type(exc).__name__}: {exc}"
        failures += not ok
        print(f"[{i}/{len(checks)}] {name}: {status}")

    print("\n" + "=" * 50)
    print(f"{len(checks) - failures}/{len(checks)} checks passed")
    print("=" * 50)
    return 0 if failures == 0 else 1


if __name__ == "__main__":
    import argparse

    parser = argparse.ArgumentParser(description="Run the closed-form acceptance checks")
    parser.add_argument("--samples", type=int, default=None, help="Samples per sampled check")
    parser.add_argument(
        "--quick",
        action="store_true",
        help="Skip the full-circle rotation holonomy (slow)"
    )
    parser.add_argument("--log-level", default="WARNING")
    args = parser.parse_args()

    if args.samples:
        settings.samples = args.samples
    configure_logging(args.log_level)
    sys.exit(run_acceptance(args.quick))
