"""Command-line front end.

Subcommands:
  k3        one LG run: correlators, K3, and the energy ledger
  optimize  one constrained maximization K3 s.t. dE = delta
  feasible  accessible-band bounds and/or a numeric witness search
  sweep     grid sweep exported as CSV/JSON
  verify    max-line theorem checks (1 = noiseless, 2 = dephased,
            shift = expect the maximum off the -tr(rho H) line)

Exit codes: 0 success, 1 domain/config error, 2 verification failure.
A config file (--config) holds one `key = value` per line with keys equal
to the long flag names; flags override file entries.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .dynamics import DephasingModel
from .optimize import (
    ConstraintSpec,
    SearchConfig,
    feasible_bounds_pure,
    feasible_numeric,
    k3_opt,
    max_violation_delta,
    verify_theorem_max_line,
)
from .protocol import lg_run
from .qubit import DomainError, MeasurementSetting, mixed_state, pure_state
from .sweep import (
    FAMILIES,
    MODEL_KINDS,
    GridRange,
    SweepSpec,
    export_csv,
    export_json,
    run_sweep,
)


def _parse_triple(text: str, label: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise DomainError(f"{label} needs three comma-separated numbers, got {text!r}")
    return tuple(float(p) for p in parts)  # type: ignore[return-value]


def _state_from_args(args) -> np.ndarray:
    if args.alpha is not None and args.bloch is not None:
        raise DomainError("give either --alpha or --bloch, not both")
    if args.alpha is not None:
        return pure_state(args.alpha)
    if args.bloch is not None:
        return mixed_state(_parse_triple(args.bloch, "--bloch"))
    raise DomainError("a state is required: --alpha A or --bloch mx,my,mz")


def _model_from_args(args) -> DephasingModel:
    kind = args.model
    gamma = args.gamma
    if kind == "none":
        if gamma not in (None, 0.0):
            raise DomainError("--model none admits only --gamma 0")
        return DephasingModel.none()
    if gamma is None:
        raise DomainError(f"--model {kind} requires --gamma")
    if kind == "z":
        return DephasingModel.z_basis(gamma)
    if kind == "x":
        return DephasingModel.x_basis(gamma)
    if kind == "diag45":
        return DephasingModel.diag45(gamma)
    if args.axis is None:
        raise DomainError("--model axis requires --axis nx,ny,nz")
    return DephasingModel.general_axis(_parse_triple(args.axis, "--axis"), gamma)


def _search_from_args(args) -> SearchConfig:
    kwargs = {}
    for flag, name in (
        ("theta_points", "theta_points"),
        ("phi_points", "phi_points"),
        ("dt_points", "dt_points"),
        ("dt_max", "dt_max"),
        ("refine_iterations", "refine_iterations"),
        ("refine_starts", "refine_starts"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            kwargs[name] = value
    return SearchConfig(**kwargs)


def _add_state_flags(parser):
    parser.add_argument("--alpha", type=float, help="pure state alpha|0> + sqrt(1-a^2)|1>")
    parser.add_argument("--bloch", help="mixed state Bloch components mx,my,mz")


def _add_model_flags(parser):
    parser.add_argument(
        "--model", default="none", choices=MODEL_KINDS + ("axis",), help="dephasing operator"
    )
    parser.add_argument("--gamma", type=float, help="dephasing rate hbar*gamma/J")
    parser.add_argument("--axis", help="dephasing axis nx,ny,nz for --model axis")


def _add_search_flags(parser):
    parser.add_argument("--theta-points", dest="theta_points", type=int)
    parser.add_argument("--phi-points", dest="phi_points", type=int)
    parser.add_argument("--dt-points", dest="dt_points", type=int)
    parser.add_argument("--dt-max", dest="dt_max", type=float)
    parser.add_argument("--refine-iterations", dest="refine_iterations", type=int)
    parser.add_argument("--refine-starts", dest="refine_starts", type=int)


def cmd_k3(args) -> int:
    rho = _state_from_args(args)
    model = _model_from_args(args)
    setting = MeasurementSetting(args.theta, args.phi)
    out = lg_run(rho, setting, model, args.dt)
    print(f"c12 = {out.c12:.12g}")
    print(f"c23 = {out.c23:.12g}")
    print(f"c13 = {out.c13:.12g}")
    print(f"k3 = {out.k3:.12g}")
    print(f"delta_e12 = {out.delta_e12:.12g}")
    print(f"delta_e23 = {out.delta_e23:.12g}")
    print(f"delta_e13 = {out.delta_e13:.12g}")
    print(f"delta_e_avg = {out.delta_e_avg:.12g}")
    return 0


def cmd_optimize(args) -> int:
    rho = _state_from_args(args)
    model = _model_from_args(args)
    spec = ConstraintSpec(args.delta, args.tolerance)
    result = k3_opt(rho, model, spec, _search_from_args(args))
    if not result.feasible:
        print(f"infeasible: no point satisfies |dE - ({args.delta:.12g})| <= {args.tolerance:.12g}")
        print(f"closest approach residual = {result.constraint_residual:.12g}")
        return 0
    print(f"k3_opt = {result.k3_opt:.12g}")
    print(f"theta_star = {result.theta_star:.12g}")
    print(f"phi_star = {result.phi_star:.12g}")
    print(f"dt_star = {result.dt_star:.12g}")
    print(f"residual = {result.constraint_residual:.12g}")
    print(f"evaluations = {result.evaluations}")
    return 0


def cmd_feasible(args) -> int:
    rho = _state_from_args(args)
    model = _model_from_args(args)
    if args.alpha is not None and model.kind == "none":
        lo, hi = feasible_bounds_pure(args.alpha)
        print(f"bounds: delta/J in [{lo:.12g}, {hi:.12g}]")
    if args.delta is not None:
        result = feasible_numeric(
            rho, model, ConstraintSpec(args.delta, args.tolerance), _search_from_args(args)
        )
        if result.feasible:
            print(
                f"feasible: delta = {args.delta:.12g} witness theta={result.theta:.12g} "
                f"phi={result.phi:.12g} dt={result.dt:.12g} residual={result.residual:.12g}"
            )
        else:
            print(f"infeasible: delta = {args.delta:.12g} residual={result.residual:.12g}")
    elif args.scan is not None:
        lo, hi, step = _parse_triple(args.scan, "--scan")
        if step <= 0 or hi < lo:
            raise DomainError(f"--scan needs lo,hi,step with step > 0, got {args.scan!r}")
        deltas = np.arange(lo, hi + 0.5 * step, step)
        feasible_set = []
        for d in deltas:
            r = feasible_numeric(
                rho, model, ConstraintSpec(float(d), args.tolerance), _search_from_args(args)
            )
            feasible_set.append((float(d), r.feasible))
        inside = [d for d, ok in feasible_set if ok]
        if inside:
            print(f"feasible deltas: {len(inside)}/{len(feasible_set)} "
                  f"from {min(inside):.12g} to {max(inside):.12g}")
        else:
            print(f"feasible deltas: 0/{len(feasible_set)}")
        for d, ok in feasible_set:
            print(f"delta={d:.12g} feasible={'true' if ok else 'false'}")
    elif args.alpha is None or args.model != "none":
        raise DomainError("feasible needs --delta or --scan (bounds print needs --alpha with --model none)")
    return 0


def cmd_verify(args) -> int:
    rho = _state_from_args(args)
    model = _model_from_args(args)
    if args.theorem == "1" and model.kind != "none":
        raise DomainError("--theorem 1 is the noiseless check; use --model none")

    if args.delta_range is not None:
        lo, hi, count = args.delta_range
        deltas = np.linspace(lo, hi, int(count))
    else:
        predicted = max_violation_delta(rho)
        if args.alpha is not None and model.kind == "none":
            lo, hi = feasible_bounds_pure(args.alpha)
        else:
            lo, hi = predicted - 0.5, predicted + 0.5
        deltas = np.arange(lo, hi + 0.005, 0.01)
    report = verify_theorem_max_line(rho, model, deltas, _search_from_args(args))
    if report.degenerate:
        print("degenerate: no feasible delta in the scanned grid")
        return 2
    print(f"predicted_delta = {report.predicted_delta:.12g}")
    print(f"argmax_delta = {report.argmax_delta:.12g}")
    print(f"deviation = {report.deviation:.12g}")
    print(f"shifted = {'true' if report.shifted else 'false'}")
    if args.theorem == "shift":
        return 0 if report.shifted else 2
    return 0 if not report.shifted else 2


def cmd_sweep(args) -> int:
    merged = _load_config(args.config) if args.config else {}
    overlays = {
        "family": args.family,
        "family-range": args.family_range,
        "delta-range": args.delta_range,
        "gammas": args.gammas,
        "model": args.model,
        "tolerance": args.tolerance,
        "axis": args.axis,
        "out": args.out,
        "json": args.json,
        "jobs": args.jobs,
        "theta-points": args.theta_points,
        "phi-points": args.phi_points,
        "dt-points": args.dt_points,
        "dt-max": args.dt_max,
        "refine-iterations": args.refine_iterations,
        "refine-starts": args.refine_starts,
    }
    for key, value in overlays.items():
        if value is not None:
            merged[key] = value
    for required in ("family", "family-range", "delta-range"):
        if merged.get(required) is None:
            raise DomainError(f"sweep requires {required!r} (flag or config)")

    search_kwargs = {}
    for key, cast in (
        ("theta-points", int),
        ("phi-points", int),
        ("dt-points", int),
        ("dt-max", float),
        ("refine-iterations", int),
        ("refine-starts", int),
    ):
        if merged.get(key) is not None:
            search_kwargs[key.replace("-", "_")] = cast(merged[key])
    axis = merged.get("axis")
    spec = SweepSpec(
        family=str(merged["family"]),
        family_grid=_as_range(merged["family-range"], "family-range"),
        delta_grid=_as_range(merged["delta-range"], "delta-range"),
        gamma_list=tuple(_as_floats(merged.get("gammas", "0"))),
        model_kind=str(merged.get("model", "none")),
        tolerance=float(merged.get("tolerance", 1e-4)),
        search=SearchConfig(**search_kwargs),
        general_axis=_parse_triple(str(axis), "axis") if axis is not None else None,
    )
    jobs = int(merged["jobs"]) if merged.get("jobs") is not None else None
    cells = run_sweep(spec, jobs=jobs)
    wrote = False
    if merged.get("out"):
        export_csv(cells, merged["out"], spec)
        print(f"wrote {len(cells)} cells to {merged['out']}")
        wrote = True
    if merged.get("json"):
        export_json(cells, merged["json"])
        print(f"wrote {len(cells)} cells to {merged['json']}")
        wrote = True
    if not wrote:
        raise DomainError("sweep requires an output: --out file.csv and/or --json file.json")
    return 0


def _as_range(value, label: str) -> GridRange:
    if isinstance(value, GridRange):
        return value
    if isinstance(value, str):
        parts = value.split()
    else:
        parts = list(value)
    if len(parts) != 3:
        raise DomainError(f"{label} needs three values: lo hi count")
    return GridRange(float(parts[0]), float(parts[1]), int(parts[2]))


def _as_floats(value) -> list[float]:
    if isinstance(value, str):
        return [float(p) for p in value.split(",") if p]
    return [float(v) for v in value]


def _load_config(path: str) -> dict:
    """Flat `key = value` file whose keys mirror the long flag names."""
    entries: dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise DomainError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DomainError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, value = line.split("=", 1)
        entries[key.strip()] = value.strip()
    return entries


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lgopt",
        description="Leggett-Garg K3 under an energy-cost constraint: "
        "single runs, constrained optima, feasibility, sweeps, theorem checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_k3 = sub.add_parser("k3", help="one LG run at fixed (theta, phi, dt)")
    _add_state_flags(p_k3)
    _add_model_flags(p_k3)
    p_k3.add_argument("--theta", type=float, required=True)
    p_k3.add_argument("--phi", type=float, default=0.0)
    p_k3.add_argument("--dt", type=float, required=True)
    p_k3.set_defaults(func=cmd_k3)

    p_opt = sub.add_parser("optimize", help="max K3 subject to dE = delta")
    _add_state_flags(p_opt)
    _add_model_flags(p_opt)
    _add_search_flags(p_opt)
    p_opt.add_argument("--delta", type=float, required=True)
    p_opt.add_argument("--tolerance", type=float, default=1e-4)
    p_opt.set_defaults(func=cmd_optimize)

    p_fea = sub.add_parser("feasible", help="accessible band / witness search")
    _add_state_flags(p_fea)
    _add_model_flags(p_fea)
    _add_search_flags(p_fea)
    p_fea.add_argument("--delta", type=float)
    p_fea.add_argument("--scan", help="lo,hi,step energy-cost scan")
    p_fea.add_argument("--tolerance", type=float, default=1e-4)
    p_fea.set_defaults(func=cmd_feasible)

    p_ver = sub.add_parser("verify", help="max-line theorem checks")
    _add_state_flags(p_ver)
    _add_model_flags(p_ver)
    _add_search_flags(p_ver)
    p_ver.add_argument("--theorem", required=True, choices=("1", "2", "shift"))
    p_ver.add_argument(
        "--delta-range", dest="delta_range", nargs=3, type=float, metavar=("LO", "HI", "N")
    )
    p_ver.set_defaults(func=cmd_verify)

    p_sw = sub.add_parser("sweep", help="grid sweep exported to CSV/JSON")
    p_sw.add_argument("--family", choices=FAMILIES)
    p_sw.add_argument("--family-range", dest="family_range", nargs=3, metavar=("LO", "HI", "N"))
    p_sw.add_argument("--delta-range", dest="delta_range", nargs=3, metavar=("LO", "HI", "N"))
    p_sw.add_argument("--gammas", help="comma-separated hbar*gamma/J values")
    p_sw.add_argument("--model", choices=MODEL_KINDS)
    p_sw.add_argument("--tolerance", type=float)
    p_sw.add_argument("--axis", help="direction for family bloch_general")
    p_sw.add_argument("--out", help="CSV output path")
    p_sw.add_argument("--json", help="JSON output path")
    p_sw.add_argument("--jobs", type=int, help="worker count (default LG_JOBS or machine)")
    p_sw.add_argument("--config", help="flat key = value config file")
    _add_search_flags(p_sw)
    p_sw.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
