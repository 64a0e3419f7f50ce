"""
tfmonad - Tangent Functor Monad Toolkit
Command-line entry point: loads specs, runs the verifiers and writes JSON reports.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on malformed input.
"""
import argparse
import logging
import sys
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from tfmonad.config import settings
from tfmonad.errors import (
    FloatRejectedError,
    NoAntipodeError,
    ParseError,
    ShapeMismatchError,
    TanMonadError,
)
from tfmonad.helpers.numeric import format_scalar, format_vector
from tfmonad.helpers.serialize import to_jsonable
from tfmonad.schemas.reports import CheckSchema, RunReport
from tfmonad.schemas.specs import Rank1Spec, RunConfig
from tfmonad.services.affine_hopf_service import affine_hopf_service, scan_values
from tfmonad.services.algebra_service import algebra_service
from tfmonad.services.example_service import example_service
from tfmonad.services.export_service import export_service
from tfmonad.services.flow_service import OneForm, flow_service
from tfmonad.services.foliation_service import foliation_service
from tfmonad.services.kahler_service import kahler_service
from tfmonad.services.matrices import to_rational
from tfmonad.services.monad_service import FitResult, LawReport, monad_service, mu
from tfmonad.services.spec_service import spec_service

logger = logging.getLogger(__name__)

Outcome = Tuple[List[CheckSchema], Dict]


def configure_logging(level: Optional[str] = None):
    """Configure application logging; reports go to stdout, logs to stderr."""
    log_level = getattr(logging, (level or settings.log_level).upper(), logging.INFO)
    logging.basicConfig(
        level=log_level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )


def check(name: str, residual, tolerance, passed: Optional[bool] = None,
          witness: Optional[List[str]] = None, detail: Optional[str] = None) -> CheckSchema:
    if passed is None:
        passed = residual <= tolerance
    return CheckSchema(
        name=name,
        residual=format_scalar(residual),
        tolerance=format_scalar(tolerance),
        passed=bool(passed),
        witness=witness,
        detail=detail,
    )


def law_checks(report: LawReport, prefix: str = "") -> List[CheckSchema]:
    return [
        check(f"{prefix}{law.name}", law.max_residual, law.tolerance, law.passed, law.witness, law.error)
        for law in report.laws
    ]


# Commands


def cmd_verify_monad(args) -> Outcome:
    checks, results = [], {}
    for dim in args.dims:
        report = monad_service.verify_monad_laws(
            dim, args.samples, args.seed, backend=args.backend, tolerance=args.tol,
        )
        checks += law_checks(report, f"dim {dim}: ")
        results[f"dim {dim}"] = report
    fit = monad_service.fit_T2_to_T(mu, seed=args.seed)
    unique = isinstance(fit, FitResult) and fit.a == 1 and fit.b == 1
    checks.append(check("mu = 1 tau_T + 1 T tau", fit.residual, 0, unique))
    witness = monad_service.comonad_naturality_witness()
    checks.append(check(
        "delta_b not natural under x + x^2 (gap 2)", abs(witness.gap - 2), 0,
        detail=witness.description,
    ))
    results["fit"] = fit
    results["comonad_witness"] = witness
    return checks, results


def _load_algebra_spec(args):
    if getattr(args, "example", None):
        spec = example_service.spec(args.example)
    elif args.spec:
        spec = spec_service.load_spec(args.spec)
    else:
        raise ParseError("pass a spec file or --example NAME")
    return spec, spec_service.build(spec)


def cmd_check_algebra(args) -> Outcome:
    spec, h = _load_algebra_spec(args)
    checks, results = [], {"algebra": h.name}
    axioms = algebra_service.check_axioms(h, args.samples, args.seed, args.backend, args.tol)
    results["axioms"] = axioms
    checks.append(check("axiom 1: h(x, 0) = x", axioms.axiom1, axioms.tolerance,
                        axioms.error is None and axioms.axiom1 <= axioms.tolerance, detail=axioms.error))
    checks.append(check("axiom 2: h o Th = h o mu", axioms.axiom2, axioms.tolerance,
                        axioms.error is None and axioms.axiom2 <= axioms.tolerance, axioms.witness))
    if axioms.passed and not args.no_identities:
        ident = algebra_service.check_identities(h, args.samples, args.seed, args.backend)
        results["identities"] = ident
        checks += [
            check("D-invariance", ident.d_invariance, ident.tolerance, detail=ident.error),
            check("A_x^2 = 0", ident.nilpotency, ident.nilpotency_tolerance),
            check("im h_x'(v) in D", ident.image_inclusion, ident.inclusion_tolerance),
            check("rank <= n/2", ident.max_rank, ident.rank_bound),
        ]
        if ident.rank0_projection is not None:
            checks.append(check("rank 0: h = tau", ident.rank0_projection, ident.tolerance))
    if args.nijenhuis:
        nij = algebra_service.check_nijenhuis(h, args.samples, args.seed)
        results["nijenhuis"] = nij
        checks.append(check("Nijenhuis tensor", nij.max_norm, nij.tolerance))
    if isinstance(spec, Rank1Spec):
        X, alpha = spec_service.vector_field(spec), spec_service.alpha(spec)
        timing = flow_service.check_time_axioms(X, alpha, h.sample_lower, h.sample_upper,
                                                args.samples, args.seed, args.tol)
        results["time_axioms"] = timing
        checks += [
            check("alpha(x, 0) = 0", timing.zero_section, timing.tolerance, detail=timing.error),
            check("alpha semibasic", timing.semibasic, timing.tolerance, timing.semibasic_passed, timing.witness),
            check("alpha cocycle", timing.cocycle, timing.tolerance),
        ]
        if isinstance(alpha, OneForm):
            basic = flow_service.check_basic_form(X, alpha, h.sample_lower, h.sample_upper,
                                                  args.samples, args.seed, args.tol)
            results["basic_form"] = basic
            checks += [
                check("i_X alpha = 0", basic.contraction, basic.tolerance,
                      basic.error is None and basic.contraction <= basic.tolerance, detail=basic.error),
                check("L_X alpha = 0", basic.lie_derivative, basic.tolerance),
            ]
            if basic.pullback is not None:
                checks.append(check("phi_t* alpha = alpha", basic.pullback, basic.tolerance))
    return checks, results


def _parse_point(args, spec):
    values = args.point.split(",") if args.point else None
    return spec_service.base_point(spec, values)


def cmd_trace_leaf(args) -> Outcome:
    spec, h = _load_algebra_spec(args)
    x = _parse_point(args, spec)
    cloud = foliation_service.sample_leaf(h, x, count=args.count, radius=args.radius, seed=args.seed)
    results = {"algebra": h.name, "base": format_vector(cloud.base), "dimension": cloud.dimension,
               "rank_profile": cloud.rank_profile, "rejected": cloud.rejected}
    if args.csv:
        results["csv"] = str(export_service.write_leaf_csv(cloud, args.csv))
    if args.svg:
        results["svg"] = str(export_service.write_leaf_svg(cloud, args.svg, title=h.name))
    checks = [check("leaf dimension = rank at every sample", len(set(cloud.rank_profile) - {cloud.dimension}), 0,
                    cloud.tame, detail=f"ranks {cloud.rank_profile}")]
    if args.partition:
        partition = foliation_service.check_partition(h, x, trials=args.partition, seed=args.seed, tolerance=args.tol)
        results["partition"] = partition
        checks.append(check(
            "transitivity witnesses (>= 99%)", partition.max_endpoint_error, partition.tolerance,
            partition.passed, detail=f"{partition.successes}/{partition.trials}",
        ))
    return checks, results


def cmd_lift_path(args) -> Outcome:
    spec, h = _load_algebra_spec(args)
    x = _parse_point(args, spec)
    gamma = spec_service.loop(spec, args.path)
    tolerance = settings.flow_tolerance if args.tol is None else args.tol
    distances = foliation_service.validate_leaf_path(h, x, gamma, tolerance=tolerance)
    lifted = foliation_service.lift_path(h, x, gamma, steps=args.steps, path_tolerance=tolerance)
    end = h.evaluate(tuple(float(c) for c in x), lifted.endpoint)
    error = float(max(abs(float(c)) for c in h.difference(end, gamma(1.0))))
    results = {"algebra": h.name, "path_distance": max(distances), "lift": lifted}
    return [check("h(x, lift(1)) = gamma(1)", error, tolerance)], results


def cmd_holonomy(args) -> Outcome:
    spec, h = _load_algebra_spec(args)
    x = _parse_point(args, spec)
    loop = spec_service.loop(spec, args.path)
    tolerance = 1e-6 if args.tol is None else args.tol
    result = foliation_service.holonomy_linear_map(h, x, loop, steps=args.steps, tolerance=tolerance)
    gap = min((abs(complex(e) - 1) for e in result.eigenvalues), default=0.0)
    return [check("return map has eigenvalue 1", gap, tolerance, result.has_eigenvalue_one)], \
        {"algebra": h.name, "holonomy": result}


def cmd_hopf(args) -> Outcome:
    if args.hopf_command == "check":
        a, b, A, B, x0 = spec_service.hopf_inputs(spec_service.load_hopf(args.spec))
        residuals = affine_hopf_service.hopf_module_residuals(a, b, A, B, x0)
        family = affine_hopf_service.identify_family(a, b, A, B, x0) if residuals.passed else None
        checks = [check(f"Hopf module: {name}", getattr(residuals, name), 0)
                  for name in ("algebra", "coalgebra", "eigenvector", "compatibility")]
        return checks, {"residuals": residuals, "family": family.name if family else None}

    a, b = to_rational(args.a), to_rational(args.b)
    if args.hopf_command == "classify":
        families = affine_hopf_service.classify_hopf_modules_2d(a, b)
        checks = []
        for family in families:
            values = scan_values(args.scan, nonzero=family.nonzero_parameter) if family.parameter_slot else [None]
            worst = Fraction(0)
            for t in values:
                module = family.instantiate(t)
                for x0 in module.x0_samples():
                    residuals = affine_hopf_service.hopf_module_residuals(a, b, module.A, module.B, x0)
                    worst = max(worst, residuals.algebra, residuals.coalgebra,
                                residuals.eigenvector, residuals.compatibility)
            checks.append(check(f"family {family.name}", worst, 0, detail=f"{len(values)} parameter values"))
        return checks, {"families": families}

    if args.hopf_command == "laws":
        laws = affine_hopf_service.verify_affine_laws(a, b, samples=args.samples, seed=args.seed)
        checks = law_checks(laws)
        results = {"laws": laws}
        try:
            antipode = affine_hopf_service.verify_antipode(a, b, samples=args.samples, seed=args.seed)
            checks += law_checks(antipode)
            results["antipode"] = antipode
        except NoAntipodeError as exc:
            results["antipode"] = str(exc)
        return checks, results

    scan = affine_hopf_service.lattice_scan(a, b)
    return [check("lattice solutions outside the families", len(scan.outside), 0,
                  detail=f"{scan.solutions} solutions")], {"scan": scan}


def cmd_kahler(args) -> Outcome:
    if args.kahler_command == "verify":
        checks, results = [], {}
        for n in args.vars:
            report = kahler_service.verify_comonad(n, samples=args.samples or 20, seed=args.seed)
            checks += law_checks(report, f"n={n}: ")
            results[f"n={n}"] = report
        return checks, results
    images, b = spec_service.coalgebra_inputs(spec_service.load_coalgebra(args.spec))
    report = kahler_service.coalgebra_check(images, b)
    checks = [check("counit zeta o h = id", report.counit, 0)]
    if report.b is not None:
        checks.append(check(f"X'(X) = {format_scalar(report.b)} X", report.b_condition, 0))
    else:
        checks.append(check("Th o h = mu o h", report.strict, 0))
    return checks, {"coalgebra": report}


COMMANDS: Dict[str, Callable] = {
    "verify-monad": cmd_verify_monad,
    "check-algebra": cmd_check_algebra,
    "trace-leaf": cmd_trace_leaf,
    "lift-path": cmd_lift_path,
    "holonomy": cmd_holonomy,
    "hopf": cmd_hopf,
    "kahler": cmd_kahler,
}


# Parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=settings.seed, help="Base seed (default %(default)s)")
    common.add_argument("--samples", type=int, default=None, help="Samples per check")
    common.add_argument("--tol", type=float, default=None, help="Residual tolerance override")
    common.add_argument("--backend", choices=("auto", "rational", "float"), default="auto")
    common.add_argument("--output", "-o", default=None, help="Write the JSON report here")
    common.add_argument("--log-level", default=None)

    parser = argparse.ArgumentParser(prog="tfmonad", description="Tangent functor monad verifiers")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-monad", parents=[common], help="Monad laws, uniqueness and no-comonad witness")
    p.add_argument("--dims", type=int, nargs="+", default=[1, 2, 3])

    def algebra_input(p):
        p.add_argument("spec", nargs="?", help="Algebra or rank-1 spec JSON")
        p.add_argument("--example", help="Use a named example instead of a spec file")

    p = sub.add_parser("check-algebra", parents=[common], help="Algebra axioms and derived identities")
    algebra_input(p)
    p.add_argument("--no-identities", action="store_true")
    p.add_argument("--nijenhuis", action="store_true", help="Also sample the Nijenhuis tensor")

    p = sub.add_parser("trace-leaf", parents=[common], help="Sample the leaf through a point")
    algebra_input(p)
    p.add_argument("--point", help="Comma-separated base point, e.g. 1,0")
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--radius", type=float, default=None)
    p.add_argument("--csv", help="Write the cloud as CSV")
    p.add_argument("--svg", help="Write an SVG scatter (2-dimensional charts)")
    p.add_argument("--partition", type=int, default=0, metavar="TRIALS", help="Run transitivity trials")

    for name, text in (("lift-path", "Lift a leaf path to T_x M"), ("holonomy", "Linear holonomy of a leaf loop")):
        p = sub.add_parser(name, parents=[common], help=text)
        algebra_input(p)
        p.add_argument("--point", help="Comma-separated base point")
        p.add_argument("--path", nargs="+", help="One expression in t per coordinate; defaults to the spec loop")
        p.add_argument("--steps", type=int, default=None)

    p = sub.add_parser("hopf", help="Affine bimonad and Hopf modules on K^2")
    hopf = p.add_subparsers(dest="hopf_command", required=True)
    for name, text in (("classify", "Families of Hopf modules"), ("laws", "Bimonad and antipode laws"),
                       ("scan", "Brute-force lattice scan")):
        q = hopf.add_parser(name, parents=[common], help=text)
        q.add_argument("--a", required=True)
        q.add_argument("--b", required=True)
        if name == "classify":
            q.add_argument("--scan", type=int, default=25, help="Parameter values checked per family")
    q = hopf.add_parser("check", parents=[common], help="Check a JSON {a, b, A, B, X0}")
    q.add_argument("spec")

    p = sub.add_parser("kahler", help="Comonad structure on polynomial algebras")
    kahler = p.add_subparsers(dest="kahler_command", required=True)
    q = kahler.add_parser("verify", parents=[common])
    q.add_argument("--vars", type=int, nargs="+", default=[1, 2, 3])
    q = kahler.add_parser("coalgebra", parents=[common], help='Check a JSON {"h": [...], "b": ...}')
    q.add_argument("spec")

    p = sub.add_parser("examples", parents=[common], help="Print the spec of a named example")
    p.add_argument("name", nargs="?", help=", ".join(example_service.names()))
    p.add_argument("--list", action="store_true")
    return parser


def run_examples(args) -> int:
    if args.list or not args.name:
        print("\n".join(example_service.names()))
        return 0
    spec = example_service.spec(args.name)
    text = export_service.write_json(spec.model_dump(exclude_none=True), args.output)
    print(text, end="")
    return 0


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    try:
        if args.command == "examples":
            return run_examples(args)
        config = RunConfig(
            command=" ".join(filter(None, (args.command, getattr(args, "hopf_command", None),
                                           getattr(args, "kahler_command", None)))),
            spec=getattr(args, "spec", None) or getattr(args, "example", None),
            seed=args.seed,
            samples=args.samples or settings.samples,
            tolerance=args.tol,
            backend=args.backend,
            output=args.output,
            options={k: to_jsonable(v) for k, v in vars(args).items()
                     if k not in {"command", "spec", "seed", "samples", "tol", "backend", "output", "log_level",
                                  "hopf_command", "kahler_command"}},
        )
        checks, results = COMMANDS[args.command](args)
    except (ParseError, FloatRejectedError, ShapeMismatchError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TanMonadError as exc:
        logger.error(f"[{args.command}] {type(exc).__name__}: {exc}")
        print(f"failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1

    report = RunReport(config=config, passed=all(c.passed for c in checks), checks=checks,
                       results=to_jsonable(results))
    text = export_service.write_json(report, args.output)
    print(text, end="")
    logger.info(f"[{config.command}] {sum(c.passed for c in checks)}/{len(checks)} checks passed")
    return 0 if report.passed else 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
