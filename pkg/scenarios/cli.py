"""
Command-line front end.

    python run_scenarios.py scenario thm2_i --n-dim 5 --order 2 --out thm2_i.csv
    python run_scenarios.py sweep proposition_signs --axis norm_phi --values 0.5 0.8 1.2 1.5
    python run_scenarios.py solve --n-dim 3 --order 1 --phi-norm 0.5 --nodes 200
    python run_scenarios.py bubble --n-dim 7 --order 3 --epsilon 0.3
    python run_scenarios.py dual --n-dim 5 --order 2 --phi-norm 1.5

Values come from the environment (``SOBOLEV_*``), then from ``--config``
(a dotenv-format file with ``ScenarioConfig`` keys; lists comma separated),
then from explicit flags.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Dict, List, Optional

import pandas as pd
from dotenv import dotenv_values

from bubble.asymptotics import closed_form_errors
from bubble.coefficients import coefficient_defects
from duality import dual_report
from models.scenario_model import SCENARIOS, ScenarioConfig
from radial.grid import make_radial_grid
from radial.operators import BoundaryCondition
from scenarios.report import write_reports
from scenarios.runner import SWEEP_AXES, run_scenario, sweep
from settings import DEFAULT_NODES, ConfigurationError, make_logger
from solver.augmented_lagrangian import solve
from solver.phi import make_phi
from solver.problem import ProblemSpec

logger = make_logger("scenarios", "SCENARIO")

_LIST_KEYS = ("phi_norms", "levels")
_FLAG_KEYS = ("n_dim", "order", "phi_kind", "phi_norms", "levels", "tol", "seed", "epsilon", "out", "format", "workers")
_EXIT_CODES = {"pass": 0, "fail": 1, "inconclusive": 3}


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

def load_config_file(path: str) -> Dict[str, object]:
    """Parse a flat dotenv-format scenario file into raw ``ScenarioConfig`` values."""
    if not Path(path).is_file():
        raise ConfigurationError(f"config file {path} not found")
    values = dotenv_values(path)
    unknown = sorted(set(values) - set(ScenarioConfig.model_fields))
    if unknown:
        raise ConfigurationError(f"unknown config keys in {path}: {unknown}")
    parsed: Dict[str, object] = {}
    for key, raw in values.items():
        if raw is None or not raw.strip():
            continue
        if key in _LIST_KEYS:
            parsed[key] = [item.strip() for item in raw.split(",") if item.strip()]
        else:
            parsed[key] = raw.strip()
    logger.info(f"loaded {len(parsed)} config values from {path}")
    return parsed


def build_config(args: argparse.Namespace, scenario: Optional[str] = None) -> ScenarioConfig:
    merged: Dict[str, object] = {}
    if getattr(args, "config", None):
        merged.update(load_config_file(args.config))
    for key in _FLAG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    if getattr(args, "nodes", None) is not None and getattr(args, "levels", None) is None:
        merged["levels"] = [args.nodes]
    if getattr(args, "name", None):
        merged["scenario"] = args.name
    elif scenario is not None:
        merged.setdefault("scenario", scenario)
    return ScenarioConfig.model_validate(merged)


def _single_problem(config: ScenarioConfig, nodes: Optional[int], kind: str, norm: float) -> ProblemSpec:
    n = nodes or (config.levels[-1] if config.levels else DEFAULT_NODES)
    grid = make_radial_grid(config.n_dim, n)
    phi = make_phi(config.phi_kind or kind, config.phi_norms[0] if config.phi_norms else norm, grid, config.order)
    return ProblemSpec(N=config.n_dim, r=config.order, bc=BoundaryCondition.NAVIER, phi=phi, constraint_tol=config.tol)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
        logger.info(f"wrote {out}")
    else:
        print(text, end="" if text.endswith("\n") else "\n")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _cmd_solve(args: argparse.Namespace) -> int:
    config = build_config(args, scenario="proposition_signs")
    spec = _single_problem(config, args.nodes, "constant_sign_bump", 0.5)
    results = {bc.value: solve(spec.with_bc(bc)) for bc in BoundaryCondition}
    payload = {
        "N": spec.N,
        "r": spec.r,
        "nodes": spec.grid.size,
        "results": {name: res.summary() for name, res in results.items()},
    }
    _emit(json.dumps(payload, indent=2) + "\n", config.out)
    return 0 if all(res.converged for res in results.values()) else _EXIT_CODES["inconclusive"]


def _cmd_scenario(args: argparse.Namespace) -> int:
    config = build_config(args)
    report = run_scenario(config)
    text = write_reports([report], config.format, config.out)
    if not config.out:
        print(text, end="")
    for line in report.diagnostics:
        logger.info(line)
    return _EXIT_CODES[report.verdict]


def _cmd_sweep(args: argparse.Namespace) -> int:
    base = build_config(args)
    reports = sweep(base, args.axis, args.values)
    text = write_reports(reports, base.format, base.out)
    if not base.out:
        print(text, end="")
    verdicts = {report.verdict for report in reports}
    for verdict in ("fail", "inconclusive"):
        if verdict in verdicts:
            return _EXIT_CODES[verdict]
    return 0


def _cmd_bubble(args: argparse.Namespace) -> int:
    config = build_config(args, scenario="bubble_verify")
    table = pd.DataFrame(coefficient_defects(config.n_dim, config.order))
    grid = make_radial_grid(config.n_dim, args.nodes or 800, "graded")
    errors = pd.DataFrame({
        "corrected": closed_form_errors(grid, config.order, config.epsilon),
        "printed": closed_form_errors(grid, config.order, config.epsilon, variant="printed"),
    })
    errors.index.name = "j"
    print(f"coefficient table N={config.n_dim} r={config.order}")
    print(table.to_string(index=False))
    print(f"\nclosed form vs finite differences, eps={config.epsilon}, n={grid.size} (graded)")
    print(errors.to_string(float_format=lambda v: f"{v:.3e}"))
    if config.out:
        table.to_csv(config.out, index=False, lineterminator="\n")
        logger.info(f"wrote {config.out}")
    return 0


def _cmd_dual(args: argparse.Namespace) -> int:
    config = build_config(args, scenario="dual_check")
    spec = _single_problem(config, args.nodes, "h0_member", 1.5)
    result = solve(spec)
    report = dual_report(spec, result, seed=config.seed)
    payload = {"N": spec.N, "r": spec.r, "nodes": spec.grid.size, "converged": result.converged, **report.as_dict()}
    _emit(json.dumps(payload, indent=2, default=str) + "\n", config.out)
    return 0 if result.converged else _EXIT_CODES["inconclusive"]


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=str, default=None, help="dotenv-format scenario file")
    p.add_argument("--n-dim", dest="n_dim", type=int, default=None, help="dimension N")
    p.add_argument("--order", type=int, default=None, help="order r, N > 2r")
    p.add_argument("--phi-kind", dest="phi_kind", type=str, default=None)
    p.add_argument("--phi-norm", dest="phi_norms", type=float, nargs="+", default=None)
    p.add_argument("--nodes", type=int, default=None, help="single grid level")
    p.add_argument("--levels", type=int, nargs="+", default=None, help="grid levels (node counts)")
    p.add_argument("--tol", type=float, default=None, help="constraint tolerance")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--epsilon", type=float, default=None, help="bubble scale")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", type=str, default=None)
    p.add_argument("--format", choices=("csv", "json"), default=None)


def register_commands(sub: argparse._SubParsersAction) -> None:
    solve_cmd = sub.add_parser("solve", help="Solve one problem in both boundary families")
    _add_common(solve_cmd)
    solve_cmd.set_defaults(func=_cmd_solve)

    scenario_cmd = sub.add_parser("scenario", help="Run one verification scenario")
    scenario_cmd.add_argument("name", nargs="?", choices=SCENARIOS, default=None)
    _add_common(scenario_cmd)
    scenario_cmd.set_defaults(func=_cmd_scenario)

    sweep_cmd = sub.add_parser("sweep", help="Run a scenario over a list of values")
    sweep_cmd.add_argument("name", nargs="?", choices=SCENARIOS, default=None)
    sweep_cmd.add_argument("--axis", choices=SWEEP_AXES, required=True)
    sweep_cmd.add_argument("--values", type=float, nargs="+", required=True)
    _add_common(sweep_cmd)
    sweep_cmd.set_defaults(func=_cmd_sweep)

    bubble_cmd = sub.add_parser("bubble", help="Bubble coefficient table and closed-form check")
    _add_common(bubble_cmd)
    bubble_cmd.set_defaults(func=_cmd_bubble)

    dual_cmd = sub.add_parser("dual", help="Duality report for one problem")
    _add_common(dual_cmd)
    dual_cmd.set_defaults(func=_cmd_dual)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Critical Sobolev constrained minimization toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    register_commands(sub)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as e:
        # pydantic ValidationError, ConfigurationError and bad problem input
        print(f"error: {e}", file=sys.stderr)
        return 2
