import numpy as np
import pytest

from polypen import Monomial, PolynomialModel, INTERCEPT

# Five individuals, two markers (allele counts) and their phenotypes.
EXAMPLE_M = np.array([[2, 2], [1, 2], [2, 0], [2, 1], [1, 0]], dtype=float)
EXAMPLE_Y = np.array([-0.72, 2.34, 0.08, -0.89, 0.86])

X1 = Monomial.of(0)
X2 = Monomial.of(1)
X3 = Monomial.of(2)
X1X2 = Monomial.of(0, 1)


@pytest.fixture
def example_data():
    return EXAMPLE_M.copy(), EXAMPLE_Y.copy()


@pytest.fixture
def epistasis_model():
    return PolynomialModel((INTERCEPT, X1, X2, X1X2), 2)


@pytest.fixture
def example_files(tmp_path):
    m = tmp_path / "markers.csv"
    y = tmp_path / "pheno.csv"
    m.write_text("\n".join(",".join(f"{v:g}" for v in row) for row in EXAMPLE_M) + "\n")
    y.write_text("\n".join(f"{v:g}" for v in EXAMPLE_Y) + "\n")
    return m, y
