#!/usr/bin/env python3
"""
Hopf Module Lattice Scan
Brute-forces the K^2 Hopf modules over a grid of (a, b) and reports any
solution that none of the classified families contains.
"""
import sys
from pathlib import Path

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from tfmonad.main import configure_logging
from tfmonad.services.affine_hopf_service import affine_hopf_service
from tfmonad.services.export_service import export_service
from tfmonad.services.matrices import format_rational, to_rational

DEFAULT_PAIRS = ["0,0", "0,1", "0,-2", "1,-1", "2,-1/2", "1,1", "-1,2", "1/2,3"]


def scan(pairs, output=None) -> int:
    print("=" * 50)
    print("Hopf module lattice scan")
    print("=" * 50)

    reports = []
    for i, pair in enumerate(pairs, start=1):
        a, b = (to_rational(p) for p in pair.split(","))
        families = affine_hopf_service.classify_hopf_modules_2d(a, b)
        report = affine_hopf_service.lattice_scan(a, b)
        reports.append(report)
        status = "ok" if report.passed else f"{len(report.outside)} OUTSIDE"
        print(f"[{i}/{len(pairs)}] a={format_rational(a)} b={format_rational(b)}: "
              f"{report.solutions} solutions, families {[f.name for f in families]} -> {status}")
        for item in report.outside[:5]:
            print(f"      A={item['A']} B={item['B']} X0={item['X0']}")

    if output:
        export_service.write_json(reports, output)
        print(f"\nReport written to {output}")

    failed = sum(not r.passed for r in reports)
    print("\n" + "=" * 50)
    print("Scan complete!" if not failed else f"{failed} parameter pairs have unclassified solutions")
    print("=" * 50)
    return 0 if not failed else 1


if __name__ == "__main__":
    import argparse

    parser = argparse.ArgumentParser(description="Lattice scan of K^2 Hopf modules")
    parser.add_argument(
        "pairs",
        nargs="*",
        default=DEFAULT_PAIRS,
        help="a,b pairs such as 1,-1 or 1/2,3"
    )
    parser.add_argument("--output", "-o", help="Write the scan reports as JSON")
    parser.add_argument("--log-level", default="WARNING")
    args = parser.parse_args()

    configure_logging(args.log_level)
    sys.exit(scan(args.pairs, args.output))
