"""Command-line front end.

    polypen fit --markers M.csv --pheno y.csv --model auto-degree:2 \\
        --method ridge --penalty deg:1=l2:1 --penalty deg:2=l2:1
    polypen check-model --model "1;1^1;1*2"
    polypen invariance ... --translate mean --expect-invariant
    polypen suite --seed 0 --trials 100
    polypen expand --poly "1*2" --translate 1,2

Reports go to stdout. With ``--out DIR`` (or ``POLYPEN_OUT_DIR``) they are
also written to ``DIR/report.txt`` plus a full-precision ``coefficients.csv``.
"""
from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .coding import apply_translation, column_mean_translation
from .coding import build_design_matrix
from .invariance import corollary_suite, run_invariance_experiment, Verdict
from .polynomial import (
    PolynomialCoefficients,
    PolynomialModel,
    completeness_check,
    format_model,
    format_monomial,
    format_polynomial,
    parse_model,
    parse_monomial,
    total_degree,
    translate_polynomial,
)
from .solvers import FitResult, Norm, PenaltySpec, fit

OUT_DIR_ENV = "POLYPEN_OUT_DIR"
METHODS = ("ols", "ridge", "lasso")


class ParseError(ValueError):
    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


class ConfigError(ValueError):
    pass


def _read_rows(path, header: bool):
    path = Path(path)
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    rows = []
    width = None
    for lineno, line in enumerate(lines, start=1):
        if header and lineno == 1:
            continue
        if not line.strip():
            continue
        cells = line.split(",")
        try:
            values = [float(c) for c in cells]
        except ValueError:
            bad = next(c for c in cells if not _is_float(c))
            raise ParseError(path, lineno, f"non-numeric cell {bad!r}") from None
        if not all(np.isfinite(values)):
            raise ParseError(path, lineno, "non-finite value")
        if width is None:
            width = len(values)
        elif len(values) != width:
            raise ParseError(path, lineno, f"expected {width} columns, found {len(values)}")
        rows.append(values)
    if not rows:
        raise ParseError(path, len(lines), "no data rows")
    return np.array(rows, dtype=float)


def _is_float(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def load_markers(path, header: bool = False) -> np.ndarray:
    """Read an n x p marker CSV: comma-delimited numbers, '.' decimals, no quoting."""
    return _read_rows(path, header)


def load_phenotypes(path, header: bool = False) -> np.ndarray:
    values = _read_rows(path, header)
    if values.shape[1] != 1:
        raise ParseError(path, 1 + int(header), f"phenotype file must have one column, found {values.shape[1]}")
    return values[:, 0]


def parse_penalty(entries, model: PolynomialModel, method: str) -> PenaltySpec:
    """Build a penalty from ``SELECTOR=[NORM:]WEIGHT`` entries.

    SELECTOR is ``deg:K`` (every monomial of total degree K, ``deg:0`` being
    the intercept) or a monomial such as ``1*2``. Later entries override
    earlier ones. Without NORM the method's own norm is used.
    """
    default = {"ridge": Norm.L2, "lasso": Norm.L1}.get(method, Norm.NONE)
    norms = [Norm.NONE] * len(model)
    weights = [0.0] * len(model)
    for entry in entries:
        selector, sep, rhs = entry.partition("=")
        if not sep:
            raise ConfigError(f"penalty entry {entry!r} must look like SELECTOR=[NORM:]WEIGHT")
        norm_text, _, weight_text = rhs.rpartition(":")
        try:
            norm = Norm.parse(norm_text) if norm_text else default
            weight = float(weight_text)
        except ValueError as exc:
            raise ConfigError(f"bad penalty entry {entry!r}: {exc}") from None
        if norm_text == "" and default is Norm.NONE and weight != 0:
            raise ConfigError(f"method {method} takes no penalty (entry {entry!r})")
        selector = selector.strip()
        if selector.startswith("deg:"):
            try:
                K = int(selector[4:])
            except ValueError:
                raise ConfigError(f"unknown penalty selector {selector!r}") from None
            targets = [i for i, m in enumerate(model.monomials) if total_degree(m) == K]
        else:
            try:
                m = parse_monomial(selector)
            except ValueError:
                raise ConfigError(f"unknown penalty selector {selector!r}") from None
            if m not in model:
                raise ConfigError(f"penalty selector {selector!r} is not a monomial of the model")
            targets = [model.index(m)]
        if not targets:
            raise ConfigError(f"penalty selector {selector!r} matches no monomial of the model")
        for i in targets:
            norms[i] = norm
            weights[i] = weight
    try:
        spec = PenaltySpec(model, tuple(norms), np.array(weights))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    expected = {"ols": Norm.NONE, "ridge": Norm.L2, "lasso": Norm.L1}[method]
    if spec.norm not in (Norm.NONE, expected):
        raise ConfigError(f"method {method} cannot use a {spec.norm.value} penalty")
    return spec


def parse_translation(text: str, M: np.ndarray | None, p: int | None = None) -> np.ndarray:
    text = text.strip().lower()
    if text == "none":
        if p is None:
            p = M.shape[1]
        return np.zeros(p)
    if text == "mean":
        if M is None:
            raise ConfigError("--translate mean needs --markers")
        return column_mean_translation(M)
    try:
        shift = np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise ConfigError(f"--translate expects none, mean or v1,v2,...; got {text!r}") from None
    if M is not None and shift.shape[0] != M.shape[1]:
        raise ConfigError(f"translation has {shift.shape[0]} entries for {M.shape[1]} markers")
    return shift


@dataclass(frozen=True)
class RunConfig:
    markers: str = ""
    pheno: str = ""
    model: str = "auto-degree:1"
    penalty: tuple[str, ...] = ()
    translate: str = "none"
    method: str = "ols"
    tol: float = 1e-6
    seed: int = 0
    header: bool = False
    decimals: int = 2
    expect_invariant: bool = False

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        return cls(
            markers=args.markers or "",
            pheno=args.pheno or "",
            model=args.model.replace("\n", ";"),
            penalty=tuple(args.penalty or ()),
            translate=args.translate,
            method=args.method,
            tol=args.tol,
            seed=args.seed,
            header=args.header,
            decimals=args.decimals,
            expect_invariant=args.expect_invariant,
        )

    def to_lines(self) -> list[str]:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "penalty":
                v = " ".join(v)
            elif isinstance(v, float):
                v = repr(v)
            out.append(f"config.{f.name} = {v}")
        return out

    @classmethod
    def from_lines(cls, lines) -> "RunConfig":
        """Inverse of :meth:`to_lines`; other lines are ignored."""
        raw = {}
        for line in lines:
            if line.startswith("config."):
                key, _, value = line[len("config."):].partition(" = ")
                raw[key] = value
        kwargs = {}
        for f in fields(cls):
            if f.name not in raw:
                continue
            v = raw[f.name]
            if f.name == "penalty":
                kwargs[f.name] = tuple(v.split())
            elif f.type in ("bool", bool):
                kwargs[f.name] = v == "True"
            elif f.type in ("int", int):
                kwargs[f.name] = int(v)
            elif f.type in ("float", float):
                kwargs[f.name] = float(v)
            else:
                kwargs[f.name] = v
        return cls(**kwargs)


@dataclass
class ReportBundle:
    config: RunConfig
    command: str
    body: list[str] = field(default_factory=list)
    table: str | None = None
    exit_code: int = 0

    def text(self) -> str:
        head = [f"# polypen {self.command} report", f"version = {__version__}"]
        return "\n".join(head + self.config.to_lines() + self.body) + "\n"


def _fmt(v: float, decimals: int) -> str:
    out = f"{v:.{decimals}f}"
    # avoid printing "-0.00"
    return out[1:] if out.startswith("-") and float(out) == 0 else out


def _fit_lines(prefix: str, res: FitResult, decimals: int) -> list[str]:
    lines = []
    for m, a in zip(res.coefficients.model.monomials, res.theta):
        lines.append(f"{prefix}coef[{format_monomial(m)}] = {_fmt(a, decimals)}")
    for i, v in enumerate(res.fitted, start=1):
        lines.append(f"{prefix}fitted[{i}] = {_fmt(v, decimals)}")
    lines.append(f"{prefix}ssr = {_fmt(res.ssr, decimals)}")
    lines.append(f"{prefix}objective = {_fmt(res.objective, decimals)}")
    return lines


def _coef_table(columns: dict[str, FitResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    names = list(columns)
    w.writerow(["monomial", "degree"] + names)
    model = next(iter(columns.values())).coefficients.model
    for i, m in enumerate(model.monomials):
        w.writerow([format_monomial(m), total_degree(m)] + [repr(float(columns[n].theta[i])) for n in names])
    return buf.getvalue()


def _load(config: RunConfig):
    if not config.markers or not config.pheno:
        raise ConfigError("--markers and --pheno are required")
    M = load_markers(config.markers, config.header)
    y = load_phenotypes(config.pheno, config.header)
    if y.shape[0] != M.shape[0]:
        raise ConfigError(f"{M.shape[0]} marker rows but {y.shape[0]} phenotypes")
    if config.method not in METHODS:
        raise ConfigError(f"unknown method {config.method!r}")
    try:
        model = parse_model(config.model, M.shape[1])
    except ValueError as exc:
        raise ConfigError(f"bad model: {exc}") from None
    if model.num_variables != M.shape[1]:
        raise ConfigError(f"model uses {model.num_variables} markers, data has {M.shape[1]}")
    penalty = parse_penalty(config.penalty, model, config.method)
    shift = parse_translation(config.translate, M)
    return M, y, model, penalty, shift


def cmd_fit(config: RunConfig) -> ReportBundle:
    M, y, model, penalty, shift = _load(config)
    Mc = apply_translation(M, shift)
    res = fit(build_design_matrix(Mc, model), y, config.method, penalty)
    body = [
        f"n = {M.shape[0]}",
        f"p = {M.shape[1]}",
        f"model = {format_model(model, ';')}",
        f"model_complete = {completeness_check(model)[0]}",
        "translation = " + ",".join(repr(float(v)) for v in shift),
    ]
    body += _fit_lines("", res, config.decimals)
    return ReportBundle(config, "fit", body, _coef_table({"estimate": res}))


def cmd_invariance(config: RunConfig) -> ReportBundle:
    M, y, model, penalty, shift = _load(config)
    if config.translate.strip().lower() == "none":
        raise ConfigError("invariance needs --translate mean or an explicit vector")
    rep = run_invariance_experiment(M, y, model, penalty, shift, config.method, config.tol)
    complete, missing = completeness_check(model)
    body = [
        f"n = {M.shape[0]}",
        f"p = {M.shape[1]}",
        f"model = {format_model(model, ';')}",
        "translation = " + ",".join(repr(float(v)) for v in shift),
    ]
    if not complete:
        body.append("warning = model is incomplete, missing " + ";".join(format_monomial(m) for m in missing))
    body += _fit_lines("original.", rep.original, config.decimals)
    body += _fit_lines("translated.", rep.translated, config.decimals)
    body += rep.to_text().splitlines()
    code = 3 if config.expect_invariant and rep.verdict is Verdict.NOT_INVARIANT else 0
    table = _coef_table({"original": rep.original, "translated": rep.translated})
    return ReportBundle(config, "invariance", body, table, code)


def cmd_check_model(spec: str, num_variables: int | None = None) -> tuple[bool, list]:
    model = parse_model(spec, num_variables)
    return completeness_check(model)


def cmd_suite(seed: int, trials: int, tol: float = 1e-6):
    return corollary_suite(seed, trials, tol)


def parse_poly(text: str, num_variables: int) -> PolynomialCoefficients:
    """``[COEF ]MONOMIAL`` entries separated by ';' or newlines (COEF defaults to 1)."""
    coefs = {}
    for entry in text.replace("\n", ";").split(";"):
        entry = entry.strip()
        if not entry:
            continue
        parts = entry.split()
        if len(parts) == 1:
            a, mono = 1.0, parts[0]
        elif len(parts) == 2:
            a, mono = float(parts[0]), parts[1]
        else:
            raise ConfigError(f"cannot parse polynomial term {entry!r}")
        m = parse_monomial(mono)
        coefs[m] = coefs.get(m, 0.0) + a
    if not coefs:
        raise ConfigError("polynomial has no terms")
    return PolynomialCoefficients.from_dict(coefs, num_variables)


def cmd_expand(f: PolynomialCoefficients, shift) -> PolynomialCoefficients:
    return translate_polynomial(f, shift)


def _emit(bundle_text: str, table: str | None, out: str | None):
    sys.stdout.write(bundle_text)
    out = out or os.environ.get(OUT_DIR_ENV)
    if out:
        d = Path(out)
        d.mkdir(parents=True, exist_ok=True)
        (d / "report.txt").write_text(bundle_text)
        if table is not None:
            (d / "coefficients.csv").write_text(table)


def _add_run_args(p):
    p.add_argument("--markers", help="marker CSV, one row per individual")
    p.add_argument("--pheno", help="phenotype CSV, one value per line")
    p.add_argument("--model", default="auto-degree:1",
                   help="monomials like '1;1^1;2;1*2' or auto-degree:D")
    p.add_argument("--penalty", action="append", metavar="SELECTOR=[NORM:]WEIGHT",
                   help="e.g. deg:1=l2:1 or 1*2=l1:0.5; repeatable")
    p.add_argument("--translate", default="none", help="none, mean or v1,v2,...")
    p.add_argument("--method", default="ols", choices=METHODS)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--header", action="store_true", help="CSV files start with a header row")
    p.add_argument("--decimals", type=int, default=2)
    p.add_argument("--expect-invariant", action="store_true")
    p.add_argument("--out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polypen", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    _add_run_args(sub.add_parser("fit", help="fit one model under one coding"))
    _add_run_args(sub.add_parser("invariance", help="fit under two codings and compare"))

    p = sub.add_parser("check-model", help="test a model for completeness")
    p.add_argument("--model", required=True)
    p.add_argument("--num-markers", type=int)

    p = sub.add_parser("suite", help="randomized invariance scenarios")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--out")

    p = sub.add_parser("expand", help="rewrite a polynomial in translated coordinates")
    p.add_argument("--poly", required=True, help="'[COEF ]MONOMIAL' terms separated by ';'")
    p.add_argument("--translate", required=True, help="v1,v2,... or mean (needs --markers)")
    p.add_argument("--markers")
    p.add_argument("--header", action="store_true")
    p.add_argument("--out")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command in ("fit", "invariance"):
            config = RunConfig.from_args(args)
            bundle = cmd_fit(config) if args.command == "fit" else cmd_invariance(config)
            _emit(bundle.text(), bundle.table, args.out)
            return bundle.exit_code
        if args.command == "check-model":
            complete, missing = cmd_check_model(args.model, args.num_markers)
            lines = [f"complete = {str(complete).lower()}",
                     "missing = " + ";".join(format_monomial(m) for m in missing)]
            sys.stdout.write("\n".join(lines) + "\n")
            return 0
        if args.command == "suite":
            summary = cmd_suite(args.seed, args.trials, args.tol)
            text = f"# polypen suite report\nversion = {__version__}\n" + summary.to_text()
            _emit(text, None, args.out)
            return 0 if summary.ok else 1
        if args.command == "expand":
            M = load_markers(args.markers, args.header) if args.markers else None
            if M is None and args.translate.strip().lower() in ("mean", "none"):
                raise ConfigError(f"--translate {args.translate} needs --markers")
            shift = parse_translation(args.translate, M, None if M is None else M.shape[1])
            f = parse_poly(args.poly, len(shift))
            g = cmd_expand(f, shift)
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["monomial", "coefficient"])
            for m, a in zip(g.model.monomials, g.values):
                w.writerow([format_monomial(m), repr(float(a))])
            text = f"polynomial = {format_polynomial(g)}\n" + buf.getvalue()
            _emit(text, None, args.out)
            return 0
    except (ConfigError, ParseError, ValueError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"polypen: error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
