"""Paired fits under two marker codings and randomized invariance scenarios.

A coding translation replaces the marker matrix M by M - 1 P^T. Any
polynomial f in the old coding has an exact counterpart g(x) = f(x + P) in
the new one with the same residuals, and the coefficients of highest total
degree agree. Whether an estimator actually returns g depends on whether the
model can absorb the lower-order terms and on which coefficients the penalty
touches; the scenarios below probe both sides.
"""
from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .coding import apply_translation, as_marker_matrix, build_design_matrix
from .polynomial import (
    INTERCEPT,
    Monomial,
    PolynomialCoefficients,
    PolynomialModel,
    complete_closure,
    completeness_check,
    format_monomial,
    full_model,
    total_degree,
    translate_polynomial,
)
from .solvers import Norm, PenaltySpec, RankDeficient, condition_estimate, fit

SSR_REL_TOL = 1e-9
DEFAULT_TOL = 1e-6
WITNESS_THRESHOLD = 1e-3
REDRAW_CONDITION = 1e10
MAX_REDRAW_RATE = 0.2


class Verdict(enum.Enum):
    INVARIANT = "INVARIANT"
    NOT_INVARIANT = "NOT_INVARIANT"


@dataclass(frozen=True)
class Proposition1Report:
    ssr_original: float
    ssr_translated: float
    ssr_rel_diff: float
    top_degree_identical: bool
    translated: PolynomialCoefficients

    @property
    def passed(self) -> bool:
        return self.ssr_rel_diff <= SSR_REL_TOL and self.top_degree_identical


def check_proposition1(f: PolynomialCoefficients, M, shift, y) -> Proposition1Report:
    """Compare f on M with its translated counterpart on M - 1 shift^T.

    Purely algebraic: nothing is refit. Top-degree coefficients are compared
    bit for bit.
    """
    M = as_marker_matrix(M)
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.shape[0] != M.shape[0]:
        raise ValueError("y and M disagree on the number of individuals")
    g = translate_polynomial(f, shift)
    Mt = apply_translation(M, shift)
    r0 = y - build_design_matrix(M, f.model).values @ f.values
    r1 = y - build_design_matrix(Mt, g.model).values @ g.values
    ssr0, ssr1 = float(r0 @ r0), float(r1 @ r1)
    rel = abs(ssr0 - ssr1) / (1.0 + ssr0)
    identical = all(
        m in g.model and np.float64(f[m]).tobytes() == np.float64(g[m]).tobytes()
        for m in f.model.top_degree_monomials()
    )
    return Proposition1Report(ssr0, ssr1, rel, identical, g)


@dataclass(frozen=True)
class InvarianceReport:
    method: str
    model: PolynomialModel
    model_complete: bool
    original: object  # FitResult
    translated: object  # FitResult
    max_pred_diff: float
    max_topdeg_coef_diff: float
    per_coefficient_diffs: dict
    ssr_original: float
    ssr_translated: float
    pred_tol: float
    coef_tol: float

    @property
    def verdict(self) -> Verdict:
        ok = self.max_pred_diff <= self.pred_tol and self.max_topdeg_coef_diff <= self.coef_tol
        return Verdict.INVARIANT if ok else Verdict.NOT_INVARIANT

    def coef_diff(self, m: Monomial) -> float:
        return self.per_coefficient_diffs[m]

    def to_text(self, decimals: int | None = None) -> str:
        """One ``key = value`` line per field."""
        fmt = (lambda v: f"{v:.{decimals}f}") if decimals is not None else repr
        lines = [
            f"method = {self.method}",
            f"model_complete = {self.model_complete}",
            f"verdict = {self.verdict.value}",
            f"max_pred_diff = {self.max_pred_diff!r}",
            f"max_topdeg_coef_diff = {self.max_topdeg_coef_diff!r}",
            f"pred_tol = {self.pred_tol!r}",
            f"coef_tol = {self.coef_tol!r}",
            f"ssr_original = {fmt(self.ssr_original)}",
            f"ssr_translated = {fmt(self.ssr_translated)}",
        ]
        for m, d in self.per_coefficient_diffs.items():
            lines.append(f"coef_diff[{format_monomial(m)}] = {d!r}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["monomial", "degree", "original", "translated", "diff"])
        for m in self.model.monomials:
            w.writerow([
                format_monomial(m),
                total_degree(m),
                repr(self.original.coefficients[m]),
                repr(self.translated.coefficients[m]),
                repr(self.per_coefficient_diffs[m]),
            ])
        return buf.getvalue()


def run_invariance_experiment(
    M,
    y,
    model: PolynomialModel,
    penalty: PenaltySpec | None,
    shift,
    method: str,
    tol: float = DEFAULT_TOL,
    relative: bool = True,
) -> InvarianceReport:
    """Fit the same model and penalty on M and on M - 1 shift^T and compare.

    With ``relative`` the prediction tolerance is ``tol * (1 + max|y|)`` and
    the coefficient tolerance ``tol * (1 + max|coef|)``; otherwise ``tol`` is
    used as is for both.
    """
    M = as_marker_matrix(M)
    y = np.asarray(y, dtype=float).reshape(-1)
    Mt = apply_translation(M, shift)
    fit0 = fit(build_design_matrix(M, model), y, method, penalty)
    fit1 = fit(build_design_matrix(Mt, model), y, method, penalty)

    diffs = {m: float(b - a) for m, a, b in zip(model.monomials, fit0.theta, fit1.theta)}
    top = model.top_degree_monomials()
    max_top = max((abs(diffs[m]) for m in top), default=0.0)
    max_pred = float(np.max(np.abs(fit0.fitted - fit1.fitted)))
    if relative:
        pred_tol = tol * (1.0 + float(np.max(np.abs(y))))
        scale = max(float(np.max(np.abs(fit0.theta), initial=0.0)), float(np.max(np.abs(fit1.theta), initial=0.0)))
        coef_tol = tol * (1.0 + scale)
    else:
        pred_tol = coef_tol = tol
    return InvarianceReport(
        method=method.lower(),
        model=model,
        model_complete=completeness_check(model)[0],
        original=fit0,
        translated=fit1,
        max_pred_diff=max_pred,
        max_topdeg_coef_diff=max_top,
        per_coefficient_diffs=diffs,
        ssr_original=fit0.ssr,
        ssr_translated=fit1.ssr,
        pred_tol=pred_tol,
        coef_tol=coef_tol,
    )


# -- randomized scenarios ------------------------------------------------------


@dataclass
class Instance:
    M: np.ndarray
    y: np.ndarray
    shift: np.ndarray
    model: PolynomialModel
    penalty: PenaltySpec | None
    method: str


@dataclass
class ScenarioResult:
    name: str
    expect_invariant: bool
    description: str
    trials: int = 0
    passes: int = 0
    witnesses: int = 0
    first_witness: int | None = None
    redraws: int = 0
    failures: list = field(default_factory=list)

    @property
    def redraw_rate(self) -> float:
        return self.redraws / self.trials if self.trials else 0.0

    @property
    def ok(self) -> bool:
        # redraw budget: 20% of the trial count, rounded up
        if self.redraws > math.ceil(MAX_REDRAW_RATE * self.trials):
            return False
        if self.name == "R":
            return self.passes == self.trials and self.witnesses > 0
        if self.expect_invariant:
            return self.passes == self.trials
        return self.witnesses > 0


@dataclass
class SuiteSummary:
    seed: int
    trials: int
    scenarios: dict

    @property
    def ok(self) -> bool:
        return all(s.ok for s in self.scenarios.values())

    def to_text(self) -> str:
        lines = [f"seed = {self.seed}", f"trials = {self.trials}"]
        for s in self.scenarios.values():
            status = "PASS" if s.ok else "FAIL"
            expect = "INVARIANT" if s.expect_invariant else "NOT_INVARIANT"
            lines.append(
                f"{s.name}: {status} expect={expect} passes={s.passes}/{s.trials} "
                f"witnesses={s.witnesses} first_witness={s.first_witness} "
                f"redraws={s.redraws} ({s.description})"
            )
        return "\n".join(lines) + "\n"


def _random_markers(rng: np.random.Generator, n: int, p: int) -> np.ndarray:
    if rng.random() < 0.5:
        return rng.integers(0, 3, size=(n, p)).astype(float)
    return rng.uniform(-1.0, 2.0, size=(n, p))


def _random_complete_model(rng: np.random.Generator, p: int, degree: int, max_power: int, max_size: int) -> PolynomialModel:
    """Closure of a few random monomials, at least one of total degree ``degree``."""
    for _ in range(100):
        seeds = []
        for j in range(rng.integers(1, 4)):
            D = degree if j == 0 else int(rng.integers(1, degree + 1))
            counts: dict[int, int] = {}
            for _ in range(50):
                if sum(counts.values()) == D:
                    break
                k = int(rng.integers(p))
                if counts.get(k, 0) < max_power:
                    counts[k] = counts.get(k, 0) + 1
            if sum(counts.values()) == D:
                seeds.append(Monomial.from_map(counts))
        if not seeds or total_degree(seeds[0]) != degree:
            continue
        model = complete_closure(PolynomialModel.from_monomials(seeds, p))
        if len(model) <= max_size:
            return model
    return complete_closure(PolynomialModel((Monomial(((0, 1),)),), p))


def _signal(rng: np.random.Generator, M: np.ndarray, model: PolynomialModel) -> np.ndarray:
    X = build_design_matrix(M, model).values
    coef = rng.normal(size=X.shape[1])
    s = X @ coef
    sd = float(np.std(s))
    return s / sd if sd > 0 else s


def _well_conditioned(inst: Instance) -> bool:
    for Mc in (inst.M, apply_translation(inst.M, inst.shift)):
        X = build_design_matrix(Mc, inst.model).values
        G = X.T @ X
        if inst.method != "ols" and inst.penalty is not None:
            # penalized slots are regularized; only the unpenalized block must be solvable
            free = ~(inst.penalty.penalized & (inst.penalty.weights > 0))
            G = G[np.ix_(free, free)]
        if condition_estimate(G) > REDRAW_CONDITION:
            return False
    return True


def _draw(rng, p_range=(1, 4), n_range=(6, 20)):
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    p = int(rng.integers(p_range[0], p_range[1] + 1))
    M = _random_markers(rng, n, p)
    shift = rng.uniform(-2.0, 2.0, size=p)
    return n, p, M, shift


def _gen_c1(rng, t):
    D = 1 + t % 3
    n, p, M, shift = _draw(rng)
    discrete = np.all(M == np.round(M)) and M.min() >= 0 and M.max() <= 2
    model = _random_complete_model(rng, p, D, 2 if discrete else 3, max(n // 2, D + 1))
    y = rng.normal(size=n) + _signal(rng, M, model)
    return Instance(M, y, shift, model, None, "ols")


def _gen_c2(rng, t):
    method = "ridge" if t % 2 == 0 else "lasso"
    D = 1 + (t // 2) % 3
    n, p, M, shift = _draw(rng)
    discrete = np.all(M == np.round(M)) and M.min() >= 0 and M.max() <= 2
    model = _random_complete_model(rng, p, D, 2 if discrete else 3, max(n // 2, D + 1))
    y = rng.normal(size=n) + _signal(rng, M, model)
    lam = float(rng.uniform(0.1, 5.0))
    norm = Norm.L2 if method == "ridge" else Norm.L1
    return Instance(M, y, shift, model, PenaltySpec.by_degree(model, {D: lam}, norm), method)


def _additive(rng, method, norm, with_intercept=True, penalize_intercept=False, lam_range=(0.1, 5.0)):
    n, p, M, shift = _draw(rng)
    model = full_model(p, 1)
    if not with_intercept:
        model = PolynomialModel(tuple(m for m in model if m != INTERCEPT), p)
    y = rng.normal(size=n) + _signal(rng, M, model) + rng.normal() * 2.0
    lam = float(rng.uniform(*lam_range))
    weights = {1: lam}
    if penalize_intercept:
        weights[0] = lam
    return Instance(M, y, shift, model, PenaltySpec.by_degree(model, weights, norm), method)


def _gen_e3c(rng, t):
    n, p, M, shift = _draw(rng, p_range=(2, 4))
    model = full_model(p, 2)
    while len(model) > n - 1:
        n, p, M, shift = _draw(rng, p_range=(2, 4))
        model = full_model(p, 2)
    y = rng.normal(size=n) + _signal(rng, M, model)
    lam = float(rng.uniform(0.05, 1.0))
    return Instance(M, y, shift, model, PenaltySpec.by_degree(model, {1: lam, 2: lam}, Norm.L1), "lasso")


REMARK_MODEL = PolynomialModel(
    (INTERCEPT, Monomial.of(0), Monomial.of(1), Monomial.of(2), Monomial.of(1, 2)), 3
)
INCOMPLETE_MODEL = PolynomialModel((INTERCEPT, Monomial.of(0), Monomial.of(0, 1)), 2)


def _gen_fixed_model(model):
    def gen(rng, t):
        n, p, M, shift = _draw(rng, p_range=(model.num_variables, model.num_variables))
        y = rng.normal(size=n) + _signal(rng, M, model)
        return Instance(M, y, shift, model, None, "ols")
    return gen


SCENARIOS = {
    "C1": (True, "OLS on complete models of degree 1-3", _gen_c1),
    "C2": (True, "ridge/LASSO penalizing only top-degree monomials", _gen_c2),
    "C3": (True, "RRBLUP, additive model, free intercept",
           lambda rng, t: _additive(rng, "ridge", Norm.L2)),
    "C4": (True, "additive LASSO, free intercept",
           lambda rng, t: _additive(rng, "lasso", Norm.L1)),
    "E3a": (False, "ridge with a penalized intercept",
            lambda rng, t: _additive(rng, "ridge", Norm.L2, penalize_intercept=True)),
    "E3b": (False, "RRBLUP without an intercept",
            lambda rng, t: _additive(rng, "ridge", Norm.L2, with_intercept=False)),
    "E3c": (False, "LASSO penalizing degrees 1 and 2", _gen_e3c),
    "R": (True, "OLS on {1, x1, x2, x3, x2*x3}: x1 and x2*x3 coefficients",
          _gen_fixed_model(REMARK_MODEL)),
    "X": (False, "OLS on the incomplete model {1, x1, x1*x2}",
          _gen_fixed_model(INCOMPLETE_MODEL)),
}


def _draw_instance(gen, rng, t, result: ScenarioResult) -> Instance:
    while True:
        inst = gen(rng, t)
        if _well_conditioned(inst):
            return inst
        result.redraws += 1
        if result.redraws > 10 * max(result.trials + 1, 10):
            raise RuntimeError(f"scenario {result.name}: too many ill-conditioned draws")


def run_scenario(name: str, seed: int, trials: int, tol: float = DEFAULT_TOL) -> ScenarioResult:
    expect, description, gen = SCENARIOS[name]
    result = ScenarioResult(name, expect, description)
    scenario_id = list(SCENARIOS).index(name)
    for t in range(trials):
        rng = np.random.default_rng([seed, scenario_id, t])
        while True:
            inst = _draw_instance(gen, rng, t, result)
            try:
                rep = run_invariance_experiment(inst.M, inst.y, inst.model, inst.penalty, inst.shift, inst.method, tol)
                break
            except RankDeficient:
                result.redraws += 1
        result.trials += 1
        if name == "R":
            scale = 1.0 + max(np.max(np.abs(rep.original.theta)), np.max(np.abs(rep.translated.theta)))
            kept = [Monomial.of(0), Monomial.of(1, 2)]
            moved = [INTERCEPT, Monomial.of(1), Monomial.of(2)]
            invariant = all(abs(rep.coef_diff(m)) <= tol * scale for m in kept)
            witness = all(abs(rep.coef_diff(m)) > WITNESS_THRESHOLD for m in moved)
        else:
            invariant = rep.verdict is Verdict.INVARIANT
            witness = rep.max_pred_diff > WITNESS_THRESHOLD
        if invariant:
            result.passes += 1
        elif expect:
            result.failures.append((t, rep.max_pred_diff, rep.max_topdeg_coef_diff))
        if witness:
            result.witnesses += 1
            if result.first_witness is None:
                result.first_witness = t
    return result


def corollary_suite(seed: int, trials: int, tol: float = DEFAULT_TOL) -> SuiteSummary:
    """Run every scenario ``trials`` times; failures are recorded, never raised."""
    if trials < 1:
        raise ValueError("trials must be positive")
    return SuiteSummary(seed, trials, {name: run_scenario(name, seed, trials, tol) for name in SCENARIOS})


def random_polynomial(rng: np.random.Generator, p: int, degree: int, max_power: int = 3) -> PolynomialCoefficients:
    """Random coefficients on a random complete model of the given degree."""
    model = _random_complete_model(rng, p, degree, max_power, 10_000)
    return PolynomialCoefficients(model, rng.normal(size=len(model)) * rng.uniform(0.1, 10.0))
