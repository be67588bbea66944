"""Marker matrices, coding translations and design matrices."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .polynomial import Monomial, PolynomialModel


def as_marker_matrix(M) -> np.ndarray:
    """Validate and return ``M`` as a finite float (n, p) array with n, p >= 1."""
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M.reshape(-1, 1)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise ValueError(f"marker matrix must be 2-d and non-empty, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("marker matrix contains non-finite entries")
    return M


def column_mean_translation(M) -> np.ndarray:
    """Per-column means; subtracting them centres every marker column."""
    return as_marker_matrix(M).mean(axis=0)


def apply_translation(M, shift) -> np.ndarray:
    """Translated coding ``M - 1 shift^T``."""
    M = as_marker_matrix(M)
    shift = np.asarray(shift, dtype=float).reshape(-1)
    if shift.shape[0] != M.shape[1]:
        raise ValueError(
            f"translation has length {shift.shape[0]} but the matrix has {M.shape[1]} markers"
        )
    if not np.all(np.isfinite(shift)):
        raise ValueError("translation contains non-finite entries")
    return M - shift[None, :]


@dataclass(frozen=True)
class DesignMatrix:
    """Regressor matrix with one column per model monomial, in model order."""

    model: PolynomialModel
    values: np.ndarray

    @property
    def columns(self) -> tuple[Monomial, ...]:
        return self.model.monomials

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def column(self, m: Monomial) -> np.ndarray:
        return self.values[:, self.model.index(m)]


def build_design_matrix(M, model: PolynomialModel) -> DesignMatrix:
    M = as_marker_matrix(M)
    if M.shape[1] != model.num_variables:
        raise ValueError(
            f"model is over {model.num_variables} markers, matrix has {M.shape[1]}"
        )
    X = np.empty((M.shape[0], len(model)))
    for j, m in enumerate(model.monomials):
        X[:, j] = m.evaluate(M)
    X.setflags(write=False)
    return DesignMatrix(model, X)
