"""Monomials, polynomial regression models and translation expansion.

A monomial is stored as a sorted tuple of ``(variable_index, power)`` pairs
with 0-based variable indices and strictly positive powers. The empty tuple
is the intercept. Models keep their monomials in graded lexicographic order:
first by total degree, then lexicographically on the sorted pairs.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Iterable, Mapping, Sequence

import numpy as np

MAX_POWER = 8
MAX_TOTAL_DEGREE = 8


@dataclass(frozen=True)
class Monomial:
    exponents: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        pairs = tuple(sorted((int(k), int(d)) for k, d in self.exponents))
        indices = [k for k, _ in pairs]
        if len(set(indices)) != len(indices):
            raise ValueError(f"repeated variable index in {pairs}")
        for k, d in pairs:
            if k < 0:
                raise ValueError(f"negative variable index {k}")
            if d <= 0:
                raise ValueError(f"exponents must be positive, got {k}^{d}")
            if d > MAX_POWER:
                raise ValueError(f"power {d} exceeds the limit of {MAX_POWER}")
        if sum(d for _, d in pairs) > MAX_TOTAL_DEGREE:
            raise ValueError(f"total degree exceeds the limit of {MAX_TOTAL_DEGREE}")
        object.__setattr__(self, "exponents", pairs)

    @classmethod
    def from_map(cls, exponents: Mapping[int, int]) -> "Monomial":
        """Build from a ``{index: power}`` map; zero powers are dropped."""
        return cls(tuple((k, d) for k, d in exponents.items() if d != 0))

    @classmethod
    def of(cls, *indices: int) -> "Monomial":
        """Product of the given variables, e.g. ``Monomial.of(0, 0, 1)`` is x0^2 x1."""
        counts: dict[int, int] = {}
        for k in indices:
            counts[k] = counts.get(k, 0) + 1
        return cls.from_map(counts)

    @property
    def degree(self) -> int:
        return total_degree(self)

    @property
    def variables(self) -> tuple[int, ...]:
        return tuple(k for k, _ in self.exponents)

    def as_dict(self) -> dict[int, int]:
        return dict(self.exponents)

    def sort_key(self):
        return (total_degree(self), self.exponents)

    def __lt__(self, other: "Monomial") -> bool:
        return self.sort_key() < other.sort_key()

    def divisors(self) -> list["Monomial"]:
        """All monomials dividing this one (itself and the intercept included)."""
        ranges = [range(d + 1) for _, d in self.exponents]
        out = []
        for deltas in itertools.product(*ranges):
            out.append(Monomial(tuple((k, e) for (k, _), e in zip(self.exponents, deltas) if e)))
        return sorted(out)

    def evaluate(self, x) -> np.ndarray:
        """Evaluate on a vector (one point) or on the rows of a 2-d array."""
        x = np.asarray(x, dtype=float)
        out = np.ones(x.shape[:-1]) if x.ndim > 1 else np.float64(1.0)
        for k, d in self.exponents:
            out = out * x[..., k] ** d
        return out

    def __str__(self) -> str:
        return format_monomial(self)


INTERCEPT = Monomial()


def total_degree(m: Monomial) -> int:
    return sum(d for _, d in m.exponents)


@dataclass(frozen=True)
class PolynomialModel:
    """Ordered, duplicate-free set of monomials over ``num_variables`` markers."""

    monomials: tuple[Monomial, ...]
    num_variables: int

    def __post_init__(self):
        mons = tuple(self.monomials)
        if len(set(mons)) != len(mons):
            raise ValueError("duplicate monomials in model")
        if self.num_variables < 1:
            raise ValueError("num_variables must be positive")
        for m in mons:
            for k in m.variables:
                if k >= self.num_variables:
                    raise ValueError(
                        f"monomial {m} uses variable {k + 1} but the model has "
                        f"{self.num_variables} variables"
                    )
        object.__setattr__(self, "monomials", tuple(sorted(mons)))

    @classmethod
    def from_monomials(cls, monomials: Iterable[Monomial], num_variables: int) -> "PolynomialModel":
        return cls(tuple(dict.fromkeys(monomials)), num_variables)

    def __len__(self) -> int:
        return len(self.monomials)

    def __iter__(self):
        return iter(self.monomials)

    def __contains__(self, m) -> bool:
        return m in self._index

    @property
    def _index(self) -> dict[Monomial, int]:
        # cached lazily on the frozen instance
        try:
            return self.__dict__["_index_cache"]
        except KeyError:
            idx = {m: i for i, m in enumerate(self.monomials)}
            object.__setattr__(self, "_index_cache", idx)
            return idx

    def index(self, m: Monomial) -> int:
        return self._index[m]

    @property
    def degree(self) -> int:
        """Highest total degree among the monomials (0 for an empty model)."""
        return max((total_degree(m) for m in self.monomials), default=0)

    @property
    def has_intercept(self) -> bool:
        return INTERCEPT in self

    def degrees(self) -> np.ndarray:
        return np.array([total_degree(m) for m in self.monomials], dtype=int)

    def top_degree_monomials(self) -> tuple[Monomial, ...]:
        D = self.degree
        return tuple(m for m in self.monomials if total_degree(m) == D)


def full_model(num_variables: int, degree: int, max_power: int = 1) -> PolynomialModel:
    """All monomials of total degree <= ``degree`` with per-variable power <= ``max_power``.

    With ``max_power=1`` and ``degree=2`` this is the first-order epistasis
    model: intercept, additive terms and all pairwise products.
    """
    mons = []
    for powers in itertools.product(range(max_power + 1), repeat=num_variables):
        if sum(powers) <= degree:
            mons.append(Monomial(tuple((k, d) for k, d in enumerate(powers) if d)))
    return PolynomialModel(tuple(mons), num_variables)


def completeness_check(model: PolynomialModel) -> tuple[bool, list[Monomial]]:
    """Return ``(is_complete, missing)`` where ``missing`` lists absent divisors."""
    missing = set()
    for m in model.monomials:
        for div in m.divisors():
            if div not in model:
                missing.add(div)
    missing = sorted(missing)
    return not missing, missing


def complete_closure(model: PolynomialModel) -> PolynomialModel:
    """Smallest complete model containing every monomial of ``model``."""
    mons = set(model.monomials)
    for m in model.monomials:
        mons.update(m.divisors())
    return PolynomialModel(tuple(mons), model.num_variables)


@dataclass(frozen=True, eq=False)
class PolynomialCoefficients:
    """A polynomial: one real coefficient per monomial of ``model``.

    Equality is exact: same monomials in the same order, bitwise-equal values.
    """

    model: PolynomialModel
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        if values.shape[0] != len(self.model):
            raise ValueError(
                f"expected {len(self.model)} coefficients, got {values.shape[0]}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_dict(cls, coefs: Mapping[Monomial, float], num_variables: int) -> "PolynomialCoefficients":
        model = PolynomialModel.from_monomials(coefs.keys(), num_variables)
        return cls(model, np.array([coefs[m] for m in model.monomials], dtype=float))

    def __eq__(self, other):
        if not isinstance(other, PolynomialCoefficients):
            return NotImplemented
        return self.model == other.model and self.values.tobytes() == other.values.tobytes()

    def __hash__(self):
        return hash((self.model, self.values.tobytes()))

    def __getitem__(self, m: Monomial) -> float:
        return float(self.values[self.model.index(m)])

    def get(self, m: Monomial, default: float = 0.0) -> float:
        return self[m] if m in self.model else default

    def as_dict(self) -> dict[Monomial, float]:
        return {m: float(v) for m, v in zip(self.model.monomials, self.values)}

    def __call__(self, x):
        return evaluate_polynomial(self, x)

    def __str__(self) -> str:
        return format_polynomial(self)


def evaluate_polynomial(f: PolynomialCoefficients, x) -> float | np.ndarray:
    """Evaluate ``f`` at a point of length p, or at every row of an (n, p) array."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != f.model.num_variables:
        raise ValueError(
            f"point has {x.shape[-1]} coordinates, polynomial has {f.model.num_variables} variables"
        )
    total = np.zeros(x.shape[:-1]) if x.ndim > 1 else 0.0
    for m, a in zip(f.model.monomials, f.values):
        total = total + a * m.evaluate(x)
    return total if x.ndim > 1 else float(total)


def translate_polynomial(f: PolynomialCoefficients, shift: Sequence[float]) -> PolynomialCoefficients:
    """Re-express ``f`` in shifted variables: returns g with g(x) = f(x + shift).

    Each monomial prod (x_k + s_k)^d_k is expanded binomially. Expansion terms
    carrying a zero shift factor are skipped, so a zero shift returns the same
    monomial set. Coefficients of monomials of highest total degree are
    copied from ``f`` unchanged.
    """
    shift = np.asarray(shift, dtype=float).reshape(-1)
    p = f.model.num_variables
    if shift.shape[0] != p:
        raise ValueError(f"shift has length {shift.shape[0]}, polynomial has {p} variables")
    if not np.all(np.isfinite(shift)):
        raise ValueError("shift must be finite")

    acc: dict[Monomial, float] = {m: float(a) for m, a in zip(f.model.monomials, f.values)}
    for m, a in zip(f.model.monomials, f.values):
        ranges = []
        for k, d in m.exponents:
            # keep only powers of the shift that are non-zero
            ranges.append(range(d + 1) if shift[k] != 0.0 else range(d, d + 1))
        for deltas in itertools.product(*ranges):
            if all(e == d for e, (_, d) in zip(deltas, m.exponents)):
                continue  # the monomial's own term is already in acc
            factor = 1.0
            for e, (k, d) in zip(deltas, m.exponents):
                factor *= comb(d, e) * shift[k] ** (d - e)
            target = Monomial(tuple((k, e) for e, (k, _) in zip(deltas, m.exponents) if e))
            acc[target] = acc.get(target, 0.0) + a * factor

    D = f.model.degree
    for m, a in zip(f.model.monomials, f.values):
        if total_degree(m) == D:
            acc[m] = a  # nothing of degree D can receive lower-order terms
    return PolynomialCoefficients.from_dict(acc, p)


# -- text format -------------------------------------------------------------
#
# One monomial per entry, ``k1^d1*k2^d2`` with 1-based marker indices and
# ``1`` for the intercept. Because ``1`` is the intercept, the first marker
# on its own is written ``1^1``.


def parse_monomial(text: str) -> Monomial:
    text = text.strip()
    if not text:
        raise ValueError("empty monomial")
    if text == "1":
        return INTERCEPT
    counts: dict[int, int] = {}
    for factor in text.split("*"):
        factor = factor.strip()
        base, _, power = factor.partition("^")
        try:
            k = int(base)
            d = int(power) if power else 1
        except ValueError:
            raise ValueError(f"cannot parse monomial factor {factor!r} in {text!r}") from None
        if k < 1:
            raise ValueError(f"marker indices are 1-based, got {k} in {text!r}")
        if d < 1:
            raise ValueError(f"powers must be positive, got {d} in {text!r}")
        counts[k - 1] = counts.get(k - 1, 0) + d
    return Monomial.from_map(counts)


def format_monomial(m: Monomial) -> str:
    if not m.exponents:
        return "1"
    if m.exponents == ((0, 1),):
        return "1^1"
    return "*".join(f"{k + 1}" if d == 1 else f"{k + 1}^{d}" for k, d in m.exponents)


def parse_model(text: str, num_variables: int | None = None) -> PolynomialModel:
    """Parse newline- or semicolon-separated monomials.

    ``auto-degree:D`` expands to every multilinear monomial of total degree
    at most D and requires ``num_variables``.
    """
    stripped = text.strip()
    if stripped.startswith("auto-degree:"):
        if num_variables is None:
            raise ValueError("auto-degree models need the number of markers")
        D = int(stripped.split(":", 1)[1])
        return full_model(num_variables, D)
    entries = [e.strip() for e in stripped.replace("\n", ";").split(";")]
    entries = [e for e in entries if e and not e.startswith("#")]
    if not entries:
        raise ValueError("model text contains no monomials")
    mons = [parse_monomial(e) for e in entries]
    if len(set(mons)) != len(mons):
        raise ValueError("model text lists a monomial twice")
    needed = max((k + 1 for m in mons for k in m.variables), default=1)
    if num_variables is None:
        num_variables = needed
    return PolynomialModel(tuple(mons), num_variables)


def format_model(model: PolynomialModel, sep: str = "\n") -> str:
    return sep.join(format_monomial(m) for m in model.monomials)


def format_polynomial(f: PolynomialCoefficients, decimals: int | None = None) -> str:
    """Human-readable sum, highest degree first, e.g. ``1*x1*x2 + 2*x1 + 1*x2 + 2``."""
    terms = []
    for m, a in sorted(zip(f.model.monomials, f.values), key=lambda t: t[0].sort_key(), reverse=True):
        coef = f"{a:.{decimals}f}" if decimals is not None else repr(float(a))
        if not m.exponents:
            terms.append(coef)
        else:
            factors = "*".join(f"x{k + 1}" if d == 1 else f"x{k + 1}^{d}" for k, d in m.exponents)
            terms.append(f"{coef}*{factors}")
    return " + ".join(terms) if terms else "0"
