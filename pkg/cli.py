#!/usr/bin/env python3
"""
hiconvex command line.

    python cli.py verify --ineq bp --model '{"kind":"catalog","name":"x4"}' --interval 0 1
    python cli.py falsify freudenthal --seed 1 --trials 10000
    python cli.py check --samples data.csv --order 3
    python cli.py --config runs.json --out report.json

Exit status is 0 when every verdict holds, 1 when any fails and 2 on input or processing errors.
"""

import argparse
import csv
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, get_args

import numpy as np
from pydantic import BaseModel, ValidationError, model_validator

from bernstein import shape_preservation_report
from config import settings
from divided_differences import SampleGrid, build_table, n_convexity_verdict, sample_grid
from errors import HiconvexError, InputError, ParameterError, UnsortedDataError
from function_models import FunctionModel
from hh_bounds import (
    WeightSpec,
    bp_bounds_check,
    fejer_check,
    hh_classical_check,
    nested_mean_checks,
    slope_bounds_check,
    weighted_3convex_check,
)
from hornich_hlawka import (
    freudenthal_search,
    hh_abs_check,
    hh_basic_check,
    special_form_check,
    va_generalized_check,
)
from matrix_ext import (
    MatrixSpec,
    SymmetricMatrix,
    exponential_family_check,
    explore_noncommuting,
    frobenius_norm,
    loewner_leq,
    matrix_function,
    matrix_hh_check,
    modulus,
)
from ordering import DiscreteMeasure, monte_carlo_order_oracle, precedes_3cvx
from schemas import InequalityReport

logger = logging.getLogger(__name__)

__version__ = "0.1.0"

Command = Literal["check", "verify", "order", "falsify", "matrix"]
Inequality = Literal["bp", "hh", "fejer", "weighted", "nested", "slope", "hh1", "res", "rhh", "mhh", "hha", "va", "matrix"]
MatrixOp = Literal["factorize", "function", "modulus", "loewner", "hh", "expfamily"]

# Sign witnesses of the Freudenthal search must clear this
WITNESS_FLOOR = 1e-9


class RunConfig(BaseModel):
    command: Command
    target: Optional[Literal["freudenthal", "noncommuting"]] = None
    ineq: Optional[Inequality] = None
    op: Optional[MatrixOp] = None
    model: Optional[Any] = None
    measure_nu: Optional[Any] = None
    measure_mu: Optional[Any] = None
    matrices: Optional[Any] = None
    samples: Optional[str] = None
    interval: Optional[Tuple[float, float]] = None
    point: Optional[List[float]] = None
    alpha: Optional[float] = None
    k: Optional[int] = None
    eps: Optional[float] = None
    weight: Optional[Any] = None
    density: Literal["uniform", "triangular", "parabolic"] = "uniform"
    form: Literal["HH1", "HH2"] = "HH1"
    order: int = 3
    table: bool = False
    degree: Optional[int] = None
    points: Optional[int] = None
    dim: int = 2
    oracle: bool = False
    tol: Optional[float] = None
    seed: int = 0
    trials: int = 10_000

    @model_validator(mode='after')
    def validate_command(self):
        if self.command == "verify" and self.ineq is None:
            raise ParameterError("verify needs --ineq")
        if self.command == "falsify" and self.target is None:
            raise ParameterError("falsify needs a target: freudenthal or noncommuting")
        if self.command == "matrix" and self.op is None:
            raise ParameterError("matrix needs --op")
        if self.command == "order" and (self.measure_nu is None or self.measure_mu is None):
            raise ParameterError("order needs --measure-nu and --measure-mu")
        if self.command == "check" and self.samples is None and self.model is None:
            raise ParameterError("check needs --samples or --model")
        return self


def load_json_source(source: Any) -> Any:
    """Inline JSON text, a path to a JSON file, or an already parsed document."""
    if not isinstance(source, str):
        return source
    text = source.strip()
    path = "<inline>"
    if not text.startswith(("{", "[")):
        path = source
        file = Path(source)
        if not file.is_file():
            raise InputError("file not found", path)
        text = file.read_text(encoding="utf-8")
        if not text.strip():
            raise InputError("empty document", path, 1, 1)
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(e.msg, path, e.lineno, e.colno) from e


def ingest_samples(path: str) -> SampleGrid:
    """Read a two-column CSV with header x,f into a validated grid."""
    file = Path(path)
    if not file.is_file():
        raise InputError("file not found", path)
    xs: List[float] = []
    ys: List[float] = []
    with file.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or [cell.strip() for cell in header] != ["x", "f"]:
            raise InputError("expected header x,f", path, 1)
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 2:
                raise InputError(f"expected 2 fields, got {len(row)}", path, line)
            try:
                x, y = float(row[0]), float(row[1])
            except ValueError as e:
                raise InputError(f"malformed row {row}", path, line) from e
            if xs and x < xs[-1]:
                raise UnsortedDataError(f"{path}:{line}: x={x} follows x={xs[-1]}")
            xs.append(x)
            ys.append(y)
    if not xs:
        raise InputError("no data rows", path, 2)
    logger.info(f"Read {len(xs)} samples from {path}")
    return SampleGrid(xs=xs, ys=ys)


def _model(config: RunConfig) -> FunctionModel:
    if config.model is None:
        raise ParameterError(f"{config.command} needs --model")
    return FunctionModel.model_validate(load_json_source(config.model))


def _measure(source: Any) -> DiscreteMeasure:
    document = load_json_source(source)
    if isinstance(document, list):
        return DiscreteMeasure.from_pairs([tuple(pair) for pair in document])
    return DiscreteMeasure.model_validate(document)


def _matrices(config: RunConfig, count: int) -> List[SymmetricMatrix]:
    if config.matrices is None:
        raise ParameterError("--matrices is required")
    document = load_json_source(config.matrices)
    specs = [document] if isinstance(document, dict) else document
    family = [SymmetricMatrix.from_spec(MatrixSpec.model_validate(spec)) for spec in specs]
    if len(family) < count:
        raise ParameterError(f"Expected at least {count} matrices, got {len(family)}")
    return family


def _weight(source: Any) -> WeightSpec:
    if source is None:
        return WeightSpec()
    if isinstance(source, str) and not source.strip().startswith("{"):
        return WeightSpec(name=source)
    return WeightSpec.model_validate(load_json_source(source))


def _point(config: RunConfig, size: Optional[int] = 3) -> List[float]:
    if config.point is None or (size is not None and len(config.point) != size):
        raise ParameterError(f"--point needs {size} values")
    return config.point


def _interval(config: RunConfig, f: FunctionModel) -> Tuple[float, float]:
    return config.interval or f.domain


def _run_check(config: RunConfig) -> List[InequalityReport]:
    if config.degree is not None:
        f = _model(config)
        return [shape_preservation_report(f, config.degree, config.order, _interval(config, f), config.points, config.tol)]
    if config.samples is not None:
        grid = ingest_samples(config.samples)
    else:
        f = _model(config)
        a, b = _interval(config, f)
        grid = sample_grid(f, np.linspace(a, b, config.points or settings.shape_grid_points))
    verdict = n_convexity_verdict(grid, config.order, config.tol)
    details: Dict[str, Any] = {"order": config.order, "nodes": len(grid)}
    if config.table:
        details["table"] = build_table(grid, config.order).entries
    return [InequalityReport.from_margin(
        verdict.margin,
        verdict.tol,
        witness={"window": verdict.witness},
        cases=[f"order_{config.order}"],
        details=details,
    )]


def _run_verify(config: RunConfig) -> List[InequalityReport]:
    ineq = config.ineq
    if ineq in ("rhh", "mhh", "hha"):
        form = {"rhh": "RHH", "mhh": "MHH", "hha": "HHalpha"}[ineq]
        return [special_form_check(form, config.alpha, *_point(config))]

    f = _model(config)
    if ineq == "matrix":
        return [matrix_hh_check(f, *_matrices(config, 3)[:3], seed=config.seed)]
    if ineq == "hh1":
        return [hh_basic_check(f, *_point(config), form=config.form)]
    if ineq == "res":
        return [hh_abs_check(f, *_point(config))]
    if ineq == "va":
        if config.k is None:
            raise ParameterError("va needs --k")
        return [va_generalized_check(f, _point(config, None), config.k)]

    a, b = _interval(config, f)
    if ineq == "bp":
        return [bp_bounds_check(f, a, b)]
    if ineq == "hh":
        if config.measure_mu is None:
            raise ParameterError("hh needs --measure-mu")
        return [hh_classical_check(f, _measure(config.measure_mu), a, b)]
    if ineq == "fejer":
        return [fejer_check(f, a, b, config.density)]
    if ineq == "weighted":
        return [weighted_3convex_check(f, _weight(config.weight), a, b)]
    if ineq == "nested":
        return [nested_mean_checks(f, a, b, config.eps)]
    return [slope_bounds_check(f, a, b)]


def _run_order(config: RunConfig) -> List[InequalityReport]:
    nu, mu = _measure(config.measure_nu), _measure(config.measure_mu)
    verdict = precedes_3cvx(nu, mu, config.interval, config.tol)
    if verdict.failing_moment is None:
        margin, tol = verdict.min_deficiency, verdict.tol
    else:
        margin, tol = -abs(verdict.moment_gaps[verdict.failing_moment]), 0.0
    details: Dict[str, Any] = {"order": verdict.model_dump()}
    if config.oracle:
        details["oracle"] = monte_carlo_order_oracle(nu, mu, config.trials, config.seed, config.interval).model_dump()
    return [InequalityReport.from_margin(
        margin,
        tol,
        witness={"knot": verdict.witness_knot},
        cases=["3cvx_order"] + ([f"moment_{verdict.failing_moment}"] if verdict.failing_moment is not None else []),
        details=details,
    )]


def _run_falsify(config: RunConfig) -> List[InequalityReport]:
    if config.target == "noncommuting":
        return [explore_noncommuting(_model(config), config.dim, config.trials, config.seed)]
    result = freudenthal_search(config.seed, config.trials)
    found = [
        result.positive_value if result.positive is not None else 0.0,
        -result.negative_value if result.negative is not None else 0.0,
    ]
    return [InequalityReport.from_margin(
        min(found) - WITNESS_FLOOR,
        0.0,
        witness={"positive": result.positive, "negative": result.negative},
        cases=["freudenthal"],
        details=result.model_dump(),
    )]


def _run_matrix(config: RunConfig) -> List[InequalityReport]:
    op = config.op
    if op == "hh":
        return [matrix_hh_check(_model(config), *_matrices(config, 3)[:3], seed=config.seed)]
    if op == "expfamily":
        return [exponential_family_check(_matrices(config, 1)[0], *_point(config))]
    if op == "loewner":
        A, B = _matrices(config, 2)[:2]
        gap = float((B - A).eigenvalues[0])
        tol = (settings.loewner_tol if config.tol is None else config.tol) * (1.0 + frobenius_norm(B - A))
        holds = loewner_leq(A, B, config.tol)
        return [InequalityReport(verdict=holds, margin=gap, tol=tol, cases=["loewner"])]

    reports = []
    for A in _matrices(config, 1):
        if op == "factorize":
            details = {"eigenvalues": A.eigenvalues.tolist(), "eigenvectors": A.eigenvectors.tolist()}
        elif op == "modulus":
            details = {"result": modulus(A).entries.tolist()}
        else:
            details = {"result": matrix_function(_model(config), A).entries.tolist()}
        reports.append(InequalityReport(verdict=True, margin=0.0, cases=[op], details=details))
    return reports


_DISPATCH = {
    "check": _run_check,
    "verify": _run_verify,
    "order": _run_order,
    "falsify": _run_falsify,
    "matrix": _run_matrix,
}


def run(config: RunConfig) -> Tuple[int, List[InequalityReport]]:
    """Execute one configuration; status 0 when all verdicts hold, 1 otherwise."""
    logger.info(f"Running {config.command} (ineq={config.ineq}, op={config.op}, target={config.target})")
    reports = _DISPATCH[config.command](config)
    status = 0 if all(report.verdict for report in reports) else 1
    return status, reports


def envelope(configs: List[RunConfig], reports: List[InequalityReport], meta: bool) -> Dict[str, Any]:
    document: Dict[str, Any] = {
        "command": configs[0].command if len(configs) == 1 else "batch",
        "seed": configs[0].seed if len(configs) == 1 else [c.seed for c in configs],
        "reports": [report.model_dump(mode="json") for report in reports],
    }
    if meta:
        document["meta"] = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "version": __version__,
        }
    return document


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hiconvex", description="Verify and falsify inequalities for 3-convex functions.")
    p.add_argument("command", nargs="?", choices=["check", "verify", "order", "falsify", "matrix"])
    p.add_argument("target", nargs="?", choices=["freudenthal", "noncommuting"], help="falsify target")
    p.add_argument("--config", help="JSON run configuration or a list of them")
    p.add_argument("--ineq", choices=get_args(Inequality), help="Inequality to verify")
    p.add_argument("--op", choices=get_args(MatrixOp), help="Matrix operation")
    p.add_argument("--model", help="Function model as inline JSON or path")
    p.add_argument("--measure-nu", dest="measure_nu", help="Measure nu as inline JSON or path")
    p.add_argument("--measure-mu", dest="measure_mu", help="Measure mu as inline JSON or path")
    p.add_argument("--matrices", help="Matrix or matrix list as inline JSON or path")
    p.add_argument("--samples", help="CSV file with header x,f")
    p.add_argument("--interval", nargs=2, type=float, metavar=("A", "B"))
    p.add_argument("--point", nargs="+", type=float, help="Input point, e.g. a triple x y z")
    p.add_argument("--alpha", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--weight", help="Weight name (linear, odd_power, cos) or JSON")
    p.add_argument("--density", choices=["uniform", "triangular", "parabolic"], default="uniform")
    p.add_argument("--form", choices=["HH1", "HH2"], default="HH1")
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--table", action="store_true", help="Include the divided-difference table")
    p.add_argument("--degree", type=int, help="Check the Bernstein polynomial of this degree instead")
    p.add_argument("--points", type=int, help="Grid size for sampled models")
    p.add_argument("--dim", type=int, default=2, help="Matrix dimension for noncommuting exploration")
    p.add_argument("--oracle", action="store_true", help="Cross-check the order with the Monte Carlo oracle")
    p.add_argument("--tol", type=float)
    p.add_argument("--seed", type=int, default=settings.default_seed)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--out", help="Write the report here instead of standard output")
    p.add_argument("--no-meta", dest="no_meta", action="store_true", help="Omit timestamp and version")
    return p


def _configs(args: argparse.Namespace) -> List[RunConfig]:
    if args.config:
        document = load_json_source(args.config)
        items = document if isinstance(document, list) else [document]
        if not items:
            raise InputError("no run configurations", args.config)
        return [RunConfig.model_validate(item) for item in items]
    if args.command is None:
        raise ParameterError("a command or --config is required")
    fields = {
        key: value for key, value in vars(args).items()
        if key not in ("config", "out", "no_meta") and value is not None
    }
    return [RunConfig.model_validate(fields)]


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(
        level=settings.log_level,
        format='%(asctime)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )
    args = build_parser().parse_args(argv)
    try:
        configs = _configs(args)
        status, reports = 0, []
        for config in configs:
            config_status, config_reports = run(config)
            status = max(status, config_status)
            reports.extend(config_reports)
    except (HiconvexError, ValidationError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return 2

    text = json.dumps(envelope(configs, reports, not args.no_meta), indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        logger.info(f"Report written to {args.out}")
    else:
        print(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
