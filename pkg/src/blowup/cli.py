"""Command-line entry point.

Subcommands: eig, check-condition, certify, run, compare, sweep.  Every
subcommand reads one scenario file (--config), optionally patched by
repeatable --set section.key=value overrides.  Human-readable reports go
to stdout at 6 significant digits; CSV files (17 significant digits) go to
the --out directory.

Exit status: 0 = completed with an admissible certificate and a consistent
outcome (or, for pure checks, a satisfied condition), 2 = completed but not
admissible / not satisfied, 1 = error.
"""

from __future__ import annotations

import argparse
import itertools
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .certificate import Certificate, blow_up_certificate
from .errors import BlowupError, ValidationError
from .evolution import (
    BlewUp,
    StepUnderflow,
    Survived,
    Trajectory,
    concavity_defect,
    export_trajectory_csv,
    minimal_concavity_M,
    run_until_blowup,
)
from .grid import build_grid
from .nonlinearity import (
    ConditionParams,
    check_condition_C,
    check_condition_IBB,
    check_condition_PP,
    search_condition_params,
)
from .scenario import (
    Scenario,
    apply_overrides,
    build_initial_data,
    load_raw,
    scenario_from_raw,
)
from .spectral import analytic_lambda0, discrete_lambda0, principal_eigenpair

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_ADMISSIBLE = 2


def _fmt(v) -> str:
    if v is None:
        return "undefined"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _csv(v) -> str:
    if v is None:
        return "nan"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _emit(lines: list[tuple[str, object]]) -> None:
    for key, value in lines:
        print(f"{key} = {_fmt(value)}")


def _outcome_label(outcome) -> str:
    if isinstance(outcome, BlewUp):
        return "blew-up"
    if isinstance(outcome, Survived):
        return "survived"
    return "step-underflow"


def _outcome_time(outcome) -> float:
    if isinstance(outcome, BlewUp):
        return outcome.t_obs
    if isinstance(outcome, Survived):
        return outcome.t_end
    return outcome.t


def _eig(scn: Scenario):
    grid = build_grid(scn.domain, scn.n)
    eig = principal_eigenpair(grid, scn.eig_tol, scn.eig_max_iter)
    return grid, eig


def _check_lambda0(scn: Scenario) -> float:
    # The beta/eigenvalue coupling is validated against the closed-form
    # continuum eigenvalue: the discrete lambda0_h sits strictly below it at
    # every resolution and would reject boundary parameters that the
    # continuum statement admits.  Parameter search stays on the
    # conservative discrete value.
    return analytic_lambda0(scn.domain)


def _resolve_params(scn: Scenario, lambda0: float) -> ConditionParams | None:
    if scn.params_mode == "explicit":
        return scn.params
    return search_condition_params(
        scn.nonlinearity,
        lambda0,
        u_max=scn.u_max,
        n_samples=scn.n_samples,
        base=scn.base,
        alpha_cap_unbounded=scn.alpha_cap,
    )


def cmd_eig(scn: Scenario) -> int:
    grid, eig = _eig(scn)
    _emit(
        [
            ("command", "eig"),
            ("n", scn.n),
            ("lambda0_h", eig.lambda0),
            ("lambda0_analytic", analytic_lambda0(scn.domain)),
            ("lambda0_discrete_exact", discrete_lambda0(grid)),
            ("residual", eig.residual),
            ("iterations", eig.iterations),
        ]
    )
    return EXIT_OK


def cmd_check_condition(scn: Scenario) -> int:
    grid, eig = _eig(scn)
    params = _resolve_params(scn, eig.lambda0)
    lines: list[tuple[str, object]] = [
        ("command", "check-condition"),
        ("f", scn.nonlinearity.describe()),
        ("lambda0_h", eig.lambda0),
        ("params_mode", scn.params_mode),
    ]
    if params is None:
        lines.append(("params", "not-found"))
        _emit(lines)
        return EXIT_NOT_ADMISSIBLE
    verdict = check_condition_C(
        scn.nonlinearity, params, _check_lambda0(scn), scn.u_max, scn.n_samples, scn.base
    )
    lines += [
        ("alpha", params.alpha),
        ("beta", params.beta),
        ("gamma", params.gamma),
        ("satisfied", verdict.satisfied),
        ("worst_margin", verdict.worst_margin),
        ("witness_u", verdict.witness_u),
        ("asymptotic_ok", verdict.asymptotic_ok),
    ]
    _emit(lines)
    return EXIT_OK if verdict.satisfied else EXIT_NOT_ADMISSIBLE


def _certificate_lines(
    scn: Scenario, eig, params: ConditionParams, cert: Certificate
) -> list[tuple[str, object]]:
    return [
        ("f", scn.nonlinearity.describe()),
        ("lambda0_h", eig.lambda0),
        ("lambda0_analytic", analytic_lambda0(scn.domain)),
        ("alpha", params.alpha),
        ("beta", params.beta),
        ("gamma", params.gamma),
        ("xi", cert.xi),
        ("J0", cert.J0),
        ("mass0", cert.mass0),
        ("M", cert.M),
        ("T_star", cert.T_star),
        ("admissible", cert.admissible),
    ]


def cmd_certify(scn: Scenario) -> int:
    grid, eig = _eig(scn)
    params = _resolve_params(scn, eig.lambda0)
    if params is None:
        _emit([("command", "certify"), ("params", "not-found"), ("admissible", False)])
        return EXIT_NOT_ADMISSIBLE
    u0 = build_initial_data(scn, grid, eig)
    cert = blow_up_certificate(
        grid, u0, scn.nonlinearity, params, _check_lambda0(scn), scn.u_max, scn.n_samples, scn.base
    )
    _emit([("command", "certify")] + _certificate_lines(scn, eig, params, cert))
    return EXIT_OK if cert.admissible else EXIT_NOT_ADMISSIBLE


def _min_defect(traj: Trajectory, xi: float) -> float | None:
    if traj.times.size < 3:
        return None
    return float(np.min(concavity_defect(traj, xi)))


def cmd_run(scn: Scenario, out_dir: str) -> int:
    grid, eig = _eig(scn)
    params = _resolve_params(scn, eig.lambda0)
    u0 = build_initial_data(scn, grid, eig)
    lines: list[tuple[str, object]] = [("command", "run")]
    if params is not None:
        cert = blow_up_certificate(
            grid, u0, scn.nonlinearity, params, _check_lambda0(scn), scn.u_max, scn.n_samples, scn.base
        )
        gamma = params.gamma
        xi = cert.xi
        M = cert.M if cert.admissible else 1.0  # monitor fallback, reported as-is
        lines += _certificate_lines(scn, eig, params, cert)
    else:
        cert = None
        gamma = 0.0
        xi = 0.0
        M = 1.0
        lines += [("params", "not-found")]
    traj = run_until_blowup(grid, u0, scn.nonlinearity, scn.solver, M, gamma=gamma)

    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, scn.trajectory_csv)
    export_trajectory_csv(traj, xi, csv_path)

    t_end = _outcome_time(traj.outcome)
    t_star = cert.T_star if cert is not None else None
    min_defect = _min_defect(traj, xi)
    lines += [
        ("outcome", _outcome_label(traj.outcome)),
        ("t_obs", t_end),
        ("t_ratio", (t_end / t_star) if (t_star and traj.blew_up) else None),
        ("n_steps", traj.n_steps),
        ("worst_dip", traj.worst_dip),
        ("min_concavity_defect", min_defect),
        ("minimal_M", minimal_concavity_M(traj, xi) if traj.times.size >= 3 else None),
        ("trajectory_csv", csv_path),
    ]
    _emit(lines)

    if cert is None or not cert.admissible:
        return EXIT_NOT_ADMISSIBLE
    consistent = not isinstance(traj.outcome, Survived) and t_end <= cert.T_star
    return EXIT_OK if consistent else EXIT_ERROR


def cmd_compare(scn: Scenario) -> int:
    if not scn.pp_eps_grid:
        raise ValidationError("the epsilon grid for the comparison is empty")
    if not scn.ibb_c_grid:
        raise ValidationError("the c grid for the comparison is empty")
    grid, eig = _eig(scn)
    nl = scn.nonlinearity
    print(f"command = compare")
    print(f"f = {nl.describe()}")
    print(f"lambda0_h = {_fmt(eig.lambda0)}")
    pp_any = False
    for eps in scn.pp_eps_grid:
        v = check_condition_PP(nl, eps, scn.u_max, scn.n_samples, scn.base)
        pp_any = pp_any or v.satisfied
        print(
            f"PP eps={_fmt(eps)}: satisfied={_fmt(v.satisfied)} "
            f"worst_margin={_fmt(v.worst_margin)}"
        )
    ibb_any = False
    for eps in scn.pp_eps_grid:
        for c in scn.ibb_c_grid:
            v = check_condition_IBB(nl, eps, c, scn.u_max, scn.n_samples, scn.base)
            ibb_any = ibb_any or v.satisfied
            print(
                f"IBB eps={_fmt(eps)} c={_fmt(c)}: satisfied={_fmt(v.satisfied)} "
                f"worst_margin={_fmt(v.worst_margin)}"
            )
    params = _resolve_params(scn, eig.lambda0)
    if params is None:
        print("C: not-found")
    else:
        print(
            f"C: alpha={_fmt(params.alpha)} beta={_fmt(params.beta)} "
            f"gamma={_fmt(params.gamma)} satisfied=true"
        )
    print(f"summary: PP={_fmt(pp_any)} IBB={_fmt(ibb_any)} C={_fmt(params is not None)}")
    return EXIT_OK if params is not None else EXIT_NOT_ADMISSIBLE


_SWEEP_COLUMNS = (
    "lambda0_h",
    "alpha",
    "beta",
    "gamma",
    "xi",
    "J0",
    "mass0",
    "M",
    "T_star",
    "outcome",
    "t_obs",
    "t_ratio",
    "min_defect",
    "error",
)


def _sweep_worker(payload: tuple[int, dict, tuple[tuple[str, str], ...]]) -> tuple[int, dict]:
    index, raw, varied = payload
    row: dict[str, object] = {key: value for key, value in varied}
    for col in _SWEEP_COLUMNS:
        row[col] = None
    try:
        scn = scenario_from_raw(raw)
        grid, eig = _eig(scn)
        row["lambda0_h"] = eig.lambda0
        params = _resolve_params(scn, eig.lambda0)
        if params is None:
            row["outcome"] = "no-params"
            return index, row
        row["alpha"], row["beta"], row["gamma"] = params.alpha, params.beta, params.gamma
        u0 = build_initial_data(scn, grid, eig)
        cert = blow_up_certificate(
            grid, u0, scn.nonlinearity, params, _check_lambda0(scn), scn.u_max, scn.n_samples, scn.base
        )
        row["xi"], row["J0"], row["mass0"] = cert.xi, cert.J0, cert.mass0
        row["M"], row["T_star"] = cert.M, cert.T_star
        M = cert.M if cert.admissible else 1.0
        traj = run_until_blowup(grid, u0, scn.nonlinearity, scn.solver, M, gamma=params.gamma)
        t_end = _outcome_time(traj.outcome)
        row["outcome"] = _outcome_label(traj.outcome)
        row["t_obs"] = t_end
        if cert.admissible and traj.blew_up:
            row["t_ratio"] = t_end / cert.T_star
        row["min_defect"] = _min_defect(traj, cert.xi)
    except BlowupError as exc:
        row["error"] = str(exc).replace(",", ";")
        row["outcome"] = "error"
    return index, row


def cmd_sweep(raw: dict, sets: list[str], out_dir: str, workers: int) -> int:
    """Cartesian sweep: --set values holding comma-separated lists become axes."""
    axes: list[tuple[str, list[str]]] = []
    scalar_sets: list[str] = []
    for item in sets:
        if "=" in item and "," in item.split("=", 1)[1]:
            key, values = item.split("=", 1)
            axes.append((key.strip(), [v.strip() for v in values.split(",") if v.strip()]))
        else:
            scalar_sets.append(item)
    base_raw = apply_overrides(raw, scalar_sets)
    if not axes:
        raise ValidationError("sweep needs at least one --set key=v1,v2,... axis")
    combos = list(itertools.product(*(values for _, values in axes)))
    payloads = []
    for index, combo in enumerate(combos):
        assignments = [f"{key}={value}" for (key, _), value in zip(axes, combo)]
        varied = tuple((key, value) for (key, _), value in zip(axes, combo))
        payloads.append((index, apply_overrides(base_raw, assignments), varied))

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = dict(pool.map(_sweep_worker, payloads))
    else:
        results = dict(map(_sweep_worker, payloads))

    scn = scenario_from_raw(base_raw)
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, scn.sweep_csv)
    varied_keys = [key for key, _ in axes]
    header = ["index"] + varied_keys + list(_SWEEP_COLUMNS)
    with open(csv_path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for index in range(len(combos)):  # merged deterministically by index
            row = results[index]
            cells = [str(index)]
            cells += [str(row.get(k, "")) for k in varied_keys]
            for col in _SWEEP_COLUMNS:
                value = row.get(col)
                cells.append(value if isinstance(value, str) else _csv(value))
            fh.write(",".join(cells) + "\n")
    print(f"command = sweep")
    print(f"scenarios = {len(combos)}")
    print(f"sweep_csv = {csv_path}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="blowup",
        description="certify and observe finite-time blow-up for semilinear heat equations",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("eig", "principal Dirichlet eigenpair of the discrete Laplacian"),
        ("check-condition", "decide the structural source condition"),
        ("certify", "evaluate the blow-up certificate on the initial data"),
        ("run", "full pipeline: certify, evolve, monitor; writes trajectory CSV"),
        ("compare", "tabulate the classical conditions against the new one"),
        ("sweep", "run a Cartesian grid of scenarios; writes a sweep CSV"),
    ):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", required=True, help="scenario file path")
        sp.add_argument("--out", default=None, help="output directory for CSV files")
        sp.add_argument(
            "--set",
            action="append",
            default=[],
            dest="sets",
            metavar="SECTION.KEY=VALUE",
            help="override a scenario key (repeatable)",
        )
        if name == "sweep":
            sp.add_argument("--workers", type=int, default=1, help="parallel workers")
    args = parser.parse_args(argv)

    try:
        raw = load_raw(args.config)
        if args.command == "sweep":
            scn = scenario_from_raw(apply_overrides(raw, []))
            out_dir = args.out or scn.out_dir
            return cmd_sweep(raw, args.sets, out_dir, args.workers)
        raw = apply_overrides(raw, args.sets)
        scn = scenario_from_raw(raw)
        if args.command == "eig":
            return cmd_eig(scn)
        if args.command == "check-condition":
            return cmd_check_condition(scn)
        if args.command == "certify":
            return cmd_certify(scn)
        if args.command == "run":
            return cmd_run(scn, args.out or scn.out_dir)
        if args.command == "compare":
            return cmd_compare(scn)
        raise ValidationError(f"unknown command {args.command!r}")
    except BlowupError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
