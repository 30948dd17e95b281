"""Command-line interface: scenario runs, slit-width sweeps, width fitting,
the discrete two-spin analogue, and oracle self-checks.

All reports are JSON with a convention block and unit-suffixed field names;
sweeps can additionally be written as CSV.  Numeric output is fixed to nine
significant digits so identical inputs give byte-identical reports.

Exit codes: 0 success, 2 configuration / input error, 3 numerical
resolution error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from . import experiments as ex
from . import grid_oracle as go
from . import spin_model as sm
from .errors import ConfigError, DomainError, ResolutionError
from .gaussian_core import PhysParams

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RESOLUTION = 3

MAX_GRID_ENV = "POPPER_SIM_MAX_GRID"

CONVENTION_BLOCK = {
    "units": "lengths in mm, transverse momenta in rad/mm, hbar = 1",
    "rescaled_wavelength": "Lambda = wavelength / pi; free flight over L adds i*Lambda*L "
                           "to the complex squared width Gamma",
    "width": "intensity exp(-2 y^2 / W^2); FWHM = sqrt(2 ln 2) * W",
    "far_field": "W^2 = s^2 + Lambda^2 D^2 / s^2 for a focused width s over distance D "
                 "(coefficient validated against the grid oracle)",
}

SPIN_PRESETS = {
    # alpha, beta with 2 alpha^2 + beta^2 = 1
    "popper": (math.sqrt(0.05), math.sqrt(0.9)),
}


def _round_sig(value, digits=9):
    """Recursively fix floats to `digits` significant digits for stable output."""
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            return None
        return float(f"{value:.{digits}g}")
    if isinstance(value, dict):
        return {k: _round_sig(v, digits) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round_sig(v, digits) for v in value]
    return value


def _measured_dict(m: ex.Measured) -> dict:
    doc = {}
    if m.analytic is not None:
        doc["analytic_mm"] = m.analytic
    if m.oracle is not None:
        doc["oracle_mm"] = m.oracle
    if m.delta_rel is not None:
        doc["delta_rel"] = m.delta_rel
    return doc


def _report_dict(report: ex.WidthReport) -> dict:
    doc = {
        "provenance": report.provenance,
        "beam_fwhm_mm": _measured_dict(report.beam_fwhm_mm),
        "coincidence_fwhm_mm": _measured_dict(report.coincidence_fwhm_mm),
    }
    if report.real_slit_fwhm_mm is not None:
        doc["real_slit_fwhm_mm"] = _measured_dict(report.real_slit_fwhm_mm)
    if report.ghost_image_width_mm is not None:
        doc["ghost_image_width_mm"] = _measured_dict(report.ghost_image_width_mm)
    if report.virtual_distance_mm is not None:
        doc["virtual_distance_mm"] = report.virtual_distance_mm
    if report.coincidence_weight is not None:
        doc["coincidence_weight"] = report.coincidence_weight
    if report.fitted is not None:
        doc["fitted"] = {"a2_mm2": report.fitted.a2, "s_mm": report.fitted.s,
                         "branch_info": dict(report.fitted.branch_info)}
    return doc


def _document(scenario_echo, results) -> dict:
    return {
        "tool": {"name": "poppersim", "version": __version__},
        "convention": CONVENTION_BLOCK,
        "scenario": scenario_echo,
        "results": results,
    }


def _emit(doc: dict, out_path: str | None):
    text = json.dumps(_round_sig(doc), indent=2) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _check_grid_cap(grid: go.GridSpec):
    cap = os.environ.get(MAX_GRID_ENV)
    if not cap:
        return
    try:
        cap_bytes = int(cap)
    except ValueError:
        raise ConfigError(f"{MAX_GRID_ENV} must be an integer byte count, got {cap!r}")
    need = grid.n * grid.n * 16  # complex128 joint amplitude
    if need > cap_bytes:
        raise ConfigError(
            f"oracle grid {grid.n}x{grid.n} needs {need} bytes, over the "
            f"{MAX_GRID_ENV} cap of {cap_bytes}"
        )


def _load_scenario(path: str, grid_n: int | None) -> ex.Scenario:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"scenario file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"malformed JSON in {path}: line {exc.lineno}, column {exc.colno}: {exc.msg}"
        )
    scenario = ex.Scenario.from_dict(doc)
    if grid_n is not None:
        base = scenario.oracle or ex.default_grid(scenario)
        grid = go.GridSpec(n=grid_n, extent=base.extent)
        scenario = ex.Scenario(name=scenario.name, params=scenario.params,
                               a=scenario.a, omega=scenario.omega,
                               slit=scenario.slit, lens=scenario.lens,
                               L1=scenario.L1, L2=scenario.L2, oracle=grid)
    return scenario


def _scenario_echo(scenario: ex.Scenario) -> dict:
    echo = {
        "name": scenario.name,
        "lambda_nm": scenario.params.wavelength_mm * 1e6,
        "a_mm": scenario.a,
        "omega_mm": scenario.omega,
        "L1_mm": scenario.L1,
        "L2_mm": scenario.L2,
    }
    if scenario.slit is not None:
        s = {"kind": scenario.slit.kind}
        if scenario.slit.kind == "gaussian":
            s["width_mm"] = scenario.slit.epsilon
        else:
            s["width_mm"] = scenario.slit.full_width
            s["convention"] = scenario.slit.convention
        s["gaussian_epsilon_mm"] = scenario.slit.gaussian_epsilon(scenario.params)
        echo["slit"] = s
    if scenario.lens is not None:
        echo["lens"] = {"f_mm": scenario.lens.f, "b1_mm": scenario.lens.b1,
                        "image_distance_mm": scenario.lens.image_distance}
    if scenario.oracle is not None:
        echo["oracle"] = {"n": scenario.oracle.n, "extent_mm": scenario.oracle.extent}
    return echo


def cmd_run(args) -> int:
    scenario = _load_scenario(args.scenario, args.grid_n)
    if args.oracle:
        _check_grid_cap(scenario.oracle or ex.default_grid(scenario))
    runner = ex.run_kim_shih if scenario.lens is not None else ex.run_popper_freespace
    report = runner(scenario, use_oracle=args.oracle)
    doc = _document(_scenario_echo(scenario), _report_dict(report))
    _emit(doc, args.out)
    if args.csv:
        rows = ["metric,analytic,oracle,delta_rel"]
        for key, measured in (("beam_fwhm_mm", report.beam_fwhm_mm),
                              ("coincidence_fwhm_mm", report.coincidence_fwhm_mm),
                              ("real_slit_fwhm_mm", report.real_slit_fwhm_mm),
                              ("ghost_image_width_mm", report.ghost_image_width_mm)):
            if measured is None:
                continue
            fmt = lambda v: "" if v is None else f"{v:.9g}"
            rows.append(f"{key},{fmt(measured.analytic)},{fmt(measured.oracle)},"
                        f"{fmt(measured.delta_rel)}")
        with open(args.csv, "w") as fh:
            fh.write("\n".join(rows) + "\n")
    return EXIT_OK


def cmd_sweep(args) -> int:
    scenario = _load_scenario(args.scenario, args.grid_n)
    if args.param != "slit_full_width":
        raise ConfigError(f"unsupported sweep parameter {args.param!r}")
    if not args.start < args.stop:
        raise ConfigError(f"sweep bounds must satisfy from < to, "
                          f"got {args.start} >= {args.stop}")
    if args.steps < 2:
        raise ConfigError(f"sweep needs at least 2 steps, got {args.steps}")
    if args.oracle:
        _check_grid_cap(scenario.oracle or ex.default_grid(scenario))
    widths = np.linspace(args.start, args.stop, args.steps)
    points = ex.run_strekalov_sweep(scenario, widths, use_oracle=args.oracle)
    rows = []
    header = "slit_full_width_mm,fwhm_analytic_mm"
    if args.oracle:
        header += ",fwhm_oracle_mm"
    rows.append(header)
    for p in points:
        row = f"{p.slit_full_width_mm:.9g},{p.fwhm_analytic_mm:.9g}"
        if args.oracle:
            row += f",{'' if p.fwhm_oracle_mm is None else format(p.fwhm_oracle_mm, '.9g')}"
        rows.append(row)
    csv_text = "\n".join(rows) + "\n"
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(csv_text)
    else:
        sys.stdout.write(csv_text)
    flagged = [p for p in points if p.error]
    results = {
        "points": [{
            "slit_full_width_mm": p.slit_full_width_mm,
            "fwhm_analytic_mm": p.fwhm_analytic_mm,
            **({"fwhm_oracle_mm": p.fwhm_oracle_mm} if p.fwhm_oracle_mm is not None else {}),
            **({"error": p.error} if p.error else {}),
        } for p in points],
    }
    if args.out:
        _emit(_document(_scenario_echo(scenario), results), args.out)
    if flagged:
        sys.stderr.write(f"{len(flagged)} sweep point(s) flagged; see report\n")
    return EXIT_OK


def cmd_fit(args) -> int:
    params = PhysParams(wavelength_mm=args.lambda_nm * 1e-6)
    fit = ex.fit_sigma_from_width(args.fwhm, args.epsilon, args.L2, params)
    doc = _document(
        {"fwhm_observed_mm": args.fwhm, "epsilon_mm": args.epsilon,
         "L2_mm": args.L2, "lambda_nm": args.lambda_nm},
        {"a2_mm2": fit.a2, "s_mm": fit.s, "branch_info": dict(fit.branch_info)},
    )
    _emit(doc, args.out)
    return EXIT_OK


def cmd_spin(args) -> int:
    if args.preset:
        alpha, beta = SPIN_PRESETS[args.preset]
    else:
        if args.alpha is None or args.beta is None:
            raise ConfigError("spin needs --alpha and --beta, or --preset")
        alpha, beta = args.alpha, args.beta
    try:
        state = sm.make_popper_spin_state(alpha, beta)
    except DomainError as exc:
        raise ConfigError(str(exc))
    conditionals = {}
    for value in sm.EIGENVALUES:
        label = f"{value:+d}" if value else "0"
        try:
            out = sm.condition_on(state, "A", "x", value)
        except DomainError:
            conditionals[label] = {"probability": 0.0, "partner_z_distribution": None}
            continue
        conditionals[label] = {
            "probability": out.probability,
            "partner_z_distribution": list(
                sm.marginal_probabilities(out.post_state, "B", "z")),
        }
    results = {
        "basis_order": "+1, 0, -1",
        "marginal_B_z": list(sm.marginal_probabilities(state, "B", "z")),
        "marginal_A_x": list(sm.marginal_probabilities(state, "A", "x")),
        "conditional_on_A_x": conditionals,
    }
    doc = _document({"alpha": alpha, "beta": beta}, results)
    _emit(doc, args.out)
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    scenario = _load_scenario(args.scenario, args.grid_n)
    if scenario.slit is None:
        raise ConfigError("oracle-check needs a scenario with a slit")
    grid = scenario.oracle or ex.default_grid(scenario)
    _check_grid_cap(grid)
    params = scenario.params
    eps = scenario.slit.gaussian_epsilon(params)
    state = go.build_grid_state(scenario.a, scenario.omega, grid)
    norm0 = state.norm()
    evolved = go.evolve_spectral(state, scenario.L1, scenario.L1, params)
    drift = abs(evolved.norm() - norm0)
    cond = go.condition(evolved, go.Aperture(kind="gaussian", epsilon=eps))
    w_cond = go.widths(cond)
    from . import gaussian_core as gc
    gamma = gc.condition_on_gaussian_slit(
        gc.make_epr_state(scenario.a, scenario.omega),
        gc.SlitSpec(kind="gaussian", epsilon=eps),
        gc.PropagationLeg(scenario.L1), params)
    w_an = gc.intensity_width(gamma)
    results = {
        "norm_drift": drift,
        "conditional_width_mm": {"analytic_mm": w_an,
                                 "oracle_mm": w_cond.gaussian_equiv_W,
                                 "delta_rel": w_cond.gaussian_equiv_W / w_an - 1.0},
        "grid": {"n": grid.n, "extent_mm": grid.extent, "dy_mm": grid.dy},
    }
    _emit(_document(_scenario_echo(scenario), results), args.out)
    ok = drift < 1e-8 and abs(results["conditional_width_mm"]["delta_rel"]) < 1e-3
    if not ok:
        raise ResolutionError("oracle self-check failed; see report deltas")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="poppersim",
        description="Correlated-pair wave optics: coincidence widths, ghost "
                    "diffraction sweeps, width fitting, and a spin-1 analogue.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", metavar="PATH", help="write the JSON report here "
                        "instead of stdout")
    common.add_argument("--seedless", action="store_true",
                        help="reserved; all computations are already deterministic")

    grid_opts = argparse.ArgumentParser(add_help=False)
    grid_opts.add_argument("--oracle", action="store_true",
                           help="also run the brute-force grid oracle")
    grid_opts.add_argument("--grid-n", type=int, default=None, metavar="N",
                           help="override the oracle grid size (power of two)")

    p_run = sub.add_parser("run", parents=[common, grid_opts],
                           help="run one scenario and report widths")
    p_run.add_argument("scenario", help="scenario JSON file")
    p_run.add_argument("--csv", metavar="PATH", help="also write metrics as CSV")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", parents=[common, grid_opts],
                             help="sweep the slit width and tabulate pattern widths")
    p_sweep.add_argument("scenario", help="scenario JSON file")
    p_sweep.add_argument("--param", default="slit_full_width",
                         help="swept parameter (slit_full_width)")
    p_sweep.add_argument("--from", dest="start", type=float, required=True,
                         metavar="MM", help="first slit full width (mm)")
    p_sweep.add_argument("--to", dest="stop", type=float, required=True,
                         metavar="MM", help="last slit full width (mm)")
    p_sweep.add_argument("--steps", type=int, required=True)
    p_sweep.add_argument("--csv", metavar="PATH",
                         help="write the curve as CSV (default: stdout)")
    p_sweep.set_defaults(func=cmd_sweep)

    p_fit = sub.add_parser("fit", parents=[common],
                           help="infer the source-correlation scale from a width")
    p_fit.add_argument("--fwhm", type=float, required=True, metavar="MM",
                       help="observed coincidence FWHM (mm)")
    p_fit.add_argument("--epsilon", type=float, default=0.0, metavar="MM",
                       help="Gaussian slit width (mm); 0 fits the total scale s")
    p_fit.add_argument("--L2", type=float, required=True, metavar="MM",
                       help="image-plane-to-detector distance (mm)")
    p_fit.add_argument("--lambda-nm", type=float, default=702.0)
    p_fit.set_defaults(func=cmd_fit)

    p_spin = sub.add_parser("spin", parents=[common],
                            help="discrete two-spin analogue distributions")
    p_spin.add_argument("--alpha", type=float, default=None)
    p_spin.add_argument("--beta", type=float, default=None)
    p_spin.add_argument("--preset", choices=sorted(SPIN_PRESETS),
                        help="named (alpha, beta) pair")
    p_spin.set_defaults(func=cmd_spin)

    p_check = sub.add_parser("oracle-check", parents=[common, grid_opts],
                             help="grid-oracle self-check against closed forms")
    p_check.add_argument("scenario", help="scenario JSON file")
    p_check.set_defaults(func=cmd_oracle_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG
    except DomainError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG
    except ResolutionError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_RESOLUTION


if __name__ == "__main__":
    sys.exit(main())
