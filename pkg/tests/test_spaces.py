import numpy as np
import pytest

from filterlab.errors import DimensionMismatchError, DSLParseError, UnknownLabelError
from filterlab.filters import Frechet, Statistical
from filterlab.converge import parse_sequence
from filterlab.spaces import (
    NormedL1,
    NormedLinf,
    SeminormFamily,
    Vector,
    basis,
    cesaro_basis,
    ones,
    pairing,
    parse_functional,
    parse_space,
    parse_vector,
    seminorm,
    sparse_pointwise_limit,
)


def test_l1_norm_of_basis_vector():
    assert seminorm(NormedL1(3), "norm", basis(2, 3)) == 1.0


def test_kernel_vector_of_ones_functional():
    S = SeminormFamily((parse_functional("[1,1,1]", "y"),), 3)
    assert seminorm(S, "y", Vector([1, -1, 0])) == 0.0
    assert seminorm(S, "y", basis(1, 3)) == 1.0


def test_norms_are_sum_and_max():
    v = Vector([3, -4, 1])
    assert seminorm(NormedL1(3), "norm", v) == 8.0
    assert seminorm(NormedLinf(3), "norm", v) == 4.0


def test_unknown_label():
    with pytest.raises(UnknownLabelError):
        seminorm(NormedL1(3), "y", basis(1, 3))


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        seminorm(NormedL1(3), "norm", basis(1, 4))
    with pytest.raises(DimensionMismatchError):
        pairing(ones(3), ones(4))


def test_ones_against_basis():
    assert pairing(ones(100), basis(5, 100)) == 1.0


@pytest.mark.parametrize("k,n", [(1, 1), (3, 3), (2, 7), (7, 2)])
def test_basis_pairing_is_kronecker(k, n):
    assert pairing(basis(k, 10), basis(n, 10)) == float(k == n)


def test_ones_against_geometric_halves():
    d = 20
    y = Vector(0.5 ** np.arange(1, d + 1))
    assert pairing(ones(d), y) == pytest.approx(1 - 2.0**-d, rel=1e-15)


def test_functional_against_dense_vector():
    assert pairing(parse_functional("alternating"), Vector([1, 1, 1, 1, 1])) == -1.0


def test_cesaro_basis_is_average_of_basis():
    v = cesaro_basis(4, 6)
    assert np.allclose(v.data, [0.25] * 4 + [0, 0])


def test_vector_dsl():
    assert np.array_equal(parse_vector("basis(2)", 3).data, [0, 1, 0])
    assert np.array_equal(parse_vector("[1, 2.5]").data, [1, 2.5])
    assert parse_vector("{a: 1, b: 0}").support() == ["a"]
    assert np.array_equal(parse_vector("coords(1/k)", 2).data, [1, 0.5])


def test_space_dsl():
    assert parse_space("l1(3)") == NormedL1(3)
    assert parse_space("linf(5)") == NormedLinf(5)
    S = parse_space("weak(ones, basis(1))", 10)
    assert S.labels == ("ones", "basis(1)")
    assert parse_space("sparse(a, b)").labels == ("a", "b")


@pytest.mark.parametrize("text", ["l3", "weak()", "basis"])
def test_bad_space_expressions(text):
    with pytest.raises((DSLParseError, ValueError)):
        parse_space(text)


def test_sparse_limit_of_vanishing_sequence():
    space = parse_space("sparse(k1)")
    x = parse_sequence("scaled(scalar(1/n), {k1: 1})", space)
    limit, rep = sparse_pointwise_limit(x, Frechet(), ["k1"], 10**5)
    assert limit.data == {}
    assert rep["support_closed"]
    assert rep["flagged"] == []


def test_sparse_limit_ignores_density_zero_support():
    space = parse_space("sparse(a, b)")
    x = parse_sequence("perturbed(const({b: 1}), squares, {a: 1})", space)
    limit, rep = sparse_pointwise_limit(x, Statistical(tolerance=1e-2), ["a", "b"], 10**5)
    assert limit.support() == ["b"]
    assert rep["inspected_support"] == ["a", "b"]
    assert rep["support_closed"]


def test_sparse_limit_of_constant():
    space = parse_space("sparse(a, b)")
    x = parse_sequence("const({a: 2, b: -1})", space)
    limit, rep = sparse_pointwise_limit(x, Frechet(), ["a", "b"], 10**4)
    assert limit.data == {"a": 2.0, "b": -1.0}
