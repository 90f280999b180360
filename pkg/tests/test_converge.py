import numpy as np
import pytest

from filterlab.converge import (
    COMPOSITION_SUITE,
    ball,
    box,
    cesaro,
    cluster_implies_limit_audit,
    cluster_point_check,
    composition_pair,
    compose_with_index_map,
    extract_cauchy_from_base,
    f_cauchy_check,
    f_limit_check,
    parse_sequence,
    verify_bound,
)
from filterlab.errors import AuditSkipped, BaseNotFilterError, NotCauchyFilterError
from filterlab.filters import Frechet, FStatistical, Statistical, TrivialFilterWarning, parse_filter
from filterlab.maps import parse_map
from filterlab.modulus import builtin_modulus
from filterlab.spaces import SCALAR, NormedL1, SeminormFamily, Vector, parse_functional, parse_space

H = 10**5
H6 = 10**6
ZERO = Vector([0.0])
ONE = Vector([1.0])
# squares carry spikes of height 1; at 1e6 the squares and the 1/n head
# together stay below a 1e-2 tolerance
STAT = Statistical(tolerance=1e-2)
SPIKED = "perturbed(scalar(1/n), squares, 1)"


def out(v):
    return v.outcome


def test_vanishing_scalar_has_frechet_limit_zero():
    x = parse_sequence("scaled(scalar(1/n), basis(1))", NormedL1(3))
    assert out(f_limit_check(x, Vector([0, 0, 0]), Frechet(), None, H)) == "holds"


def test_spiked_sequence_statistical_limit_but_not_frechet():
    x = parse_sequence(SPIKED)
    assert out(f_limit_check(x, ZERO, STAT, None, H6)) == "holds"
    assert out(f_limit_check(x, ZERO, Frechet(), None, H6)) == "fails"


def test_basis_sequence_has_no_statistical_limit_zero():
    # ‖e_n‖ = 1 exactly, so the exceptional set {‖e_n‖ > ε} is all of ℕ from ε = 0.1 down
    x = parse_sequence("basis_seq", NormedL1(H))
    v = f_limit_check(x, Vector(np.zeros(H)), STAT, None, H)
    assert out(v) == "fails"
    assert [(c["eps"], c["outcome"]) for c in v.diagnostics["checks"]][:2] == [(1.0, "holds"), (0.1, "fails")]


def test_basis_sequence_not_cauchy_at_eps_one():
    x = parse_sequence("basis_seq", NormedL1(H))
    for F in (Frechet(), STAT):
        v = f_cauchy_check(x, F, None, H)
        assert out(v) == "fails"


def test_spiked_sequence_is_statistically_cauchy():
    assert out(f_cauchy_check(parse_sequence(SPIKED), STAT, None, H6)) == "holds"


def test_basis_sequence_weakly_cauchy_against_harmonic_functional():
    S = SeminormFamily((parse_functional("harmonic"),), H)
    x = parse_sequence("basis_seq", S)
    assert out(f_cauchy_check(x, Frechet(), None, H)) == "holds"


def test_cesaro_basis_cauchy_against_fstat_convergent_functionals():
    F = FStatistical(builtin_modulus("log1p"), tolerance=1e-2)
    S = parse_space("weak(ones, harmonic, coords(1 + (k==1)))", H)
    x = parse_sequence("cesaro_basis_seq", S)
    assert out(f_cauchy_check(x, F, None, H)) == "holds"


def test_cluster_points_of_alternating_sign():
    x = parse_sequence("scalar((-1)**n)")
    assert out(cluster_point_check(x, ONE, Frechet(), None, H)) == "holds"
    v = cluster_point_check(x, ZERO, Frechet(), (0.5,), H)
    assert out(v) == "fails"


def test_spiked_sequence_cluster_point_zero():
    assert out(cluster_point_check(parse_sequence(SPIKED), ZERO, STAT, None, H6)) == "holds"


@pytest.mark.parametrize(
    "seq,cand,F",
    [(SPIKED, 0.0, STAT), ("const(2.5)", 2.5, Statistical()), ("scalar(1/n)", 0.0, Frechet())],
)
def test_cluster_implies_limit_audit_holds(seq, cand, F):
    assert out(cluster_implies_limit_audit(parse_sequence(seq), Vector([cand]), F, None, H6)) == "holds"


def test_audit_skipped_when_not_cauchy():
    with pytest.raises(AuditSkipped):
        cluster_implies_limit_audit(parse_sequence("scalar((-1)**n)"), ONE, Frechet(), None, H)


def test_compose_with_identity_is_same_sequence():
    x = parse_sequence(SPIKED)
    assert compose_with_index_map(x, parse_map("identity")) is x


def test_compose_basis_with_doubling():
    x = parse_sequence("basis_seq", NormedL1(40))
    y = compose_with_index_map(x, parse_map("affine(2,0)"))
    ns = np.arange(1, 21)
    assert np.array_equal(y.features(ns), x.features(2 * ns))


def test_compose_spiked_with_square_is_constant_one():
    y = compose_with_index_map(parse_sequence("perturbed(0, squares, 1)"), parse_map("square"))
    assert np.all(y.features(np.arange(1, 1001)) == 1.0)
    assert out(f_limit_check(y, ONE, Frechet(), None, H)) == "holds"


def test_cesaro_of_alternating_sign():
    y = cesaro(parse_sequence("scalar((-1)**n)"))
    ns = np.arange(1, 101)
    assert np.allclose(y.features(ns)[:, 0], -(ns % 2) / ns)
    assert out(f_limit_check(y, ZERO, Frechet(), None, H)) == "holds"


def test_cesaro_of_constant_is_constant():
    y = cesaro(parse_sequence("const(3)"))
    assert np.allclose(y.features(np.arange(1, 50)), 3.0)


def test_cesaro_of_basis_is_cesaro_basis():
    space = NormedL1(30)
    y = cesaro(parse_sequence("basis_seq", space))
    z = parse_sequence("cesaro_basis_seq", space)
    ns = np.arange(1, 31)
    assert np.allclose(y.features(ns), z.features(ns))


def test_bound_certificate():
    x = parse_sequence("scalar(sin(n))")
    assert verify_bound(x, 1.0, H).holds
    assert verify_bound(x, 0.5, H).fails


@pytest.mark.parametrize("triple", COMPOSITION_SUITE)
def test_composition_suite_agrees(triple):
    if triple[2].startswith("const"):
        with pytest.warns(TrivialFilterWarning):
            a, b = composition_pair(*triple)
    else:
        a, b = composition_pair(*triple)
    assert [c["outcome"] for c in a.diagnostics["checks"]] == [c["outcome"] for c in b.diagnostics["checks"]]
    assert a.outcome == b.outcome


def test_extract_from_nested_balls():
    c = np.array([0.3, -0.7])
    ex = extract_cauchy_from_base([ball(c, 2.0**-k) for k in range(1, 41)])
    dist = np.linalg.norm(ex.points - c, axis=1)
    assert np.all(dist <= 2.0 ** -np.arange(1, 41))
    assert ex.audit.holds


def test_extract_from_fat_boxes_reports_diameter():
    regions = [box([0, 0], [1 + 1 / k, 0]) for k in range(1, 11)]
    with pytest.raises(NotCauchyFilterError) as info:
        extract_cauchy_from_base(regions)
    assert info.value.diagnostics["first_violation"] == 1
    assert info.value.diagnostics["diameter_check"][0]["exact"] > 1


def test_extract_from_singletons_is_constant():
    c = [1.0, 2.0]
    ex = extract_cauchy_from_base([ball(c, 0.0)] * 10)
    assert np.all(ex.points == c)


def test_extract_from_disjoint_sets_fails():
    with pytest.raises(BaseNotFilterError):
        extract_cauchy_from_base([ball([0, 0], 0.5), ball([0.7, 0], 0.1)], schedule=[1.0, 0.5])


def test_scalar_space_is_default():
    assert parse_sequence("scalar(n)").space is SCALAR


def test_filter_dsl_routes_through_checks():
    F = parse_filter("image(affine(2,0), frechet)")
    x = parse_sequence("scalar((-1)**n)")
    assert out(f_limit_check(x, ONE, F, None, H)) == "holds"
