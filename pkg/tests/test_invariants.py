"""Property suites: every numeric invariant runs 1000 derandomized cases (see conftest)."""

import warnings

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from filterlab.converge import (
    cesaro,
    cluster_point_check,
    composition_pair,
    f_cauchy_check,
    f_limit_check,
    parse_sequence,
)
from filterlab.filters import (
    Frechet,
    FStatistical,
    Statistical,
    TrivialFilterWarning,
    includes,
    member,
    parse_filter,
    standard_testbed,
)
from filterlab.modulus import CATALOG, builtin_modulus, validate_modulus
from filterlab.natset import EMPTY, NAT, f_density, has_f_density_zero, parse_set, subset
from filterlab.spaces import NormedL1, NormedLinf, SeminormFamily, Vector, pairing, parse_functional, seminorm

UNBOUNDED = ("identity", "log1p", "sqrt", "power(0.3)")
SEMINORM_TOL = 1e-9

# ---------------------------------------------------------------------------
# strategies

small = st.integers(min_value=1, max_value=30)


@st.composite
def atom_sets(draw):
    kind = draw(st.sampled_from(["ap", "poly", "powers", "finite", "idx", "named", "blocks"]))
    if kind == "ap":
        return f"ap({draw(small)},{draw(small)})"
    if kind == "poly":
        c = draw(st.lists(st.integers(0, 5), min_size=2, max_size=4))
        assume(any(c[1:]))
        return f"poly({','.join(map(str, c))})"
    if kind == "powers":
        return f"powers({draw(st.integers(2, 7))})"
    if kind == "finite":
        return "finite(" + ",".join(map(str, draw(st.lists(st.integers(1, 5000), min_size=1, max_size=6)))) + ")"
    if kind == "idx":
        lo = draw(st.integers(1, 500))
        hi = draw(st.one_of(st.just("inf"), st.integers(lo, lo + 5000).map(str)))
        return f"idx({lo},{hi})"
    if kind == "blocks":
        return "blocks(pow2)"
    return draw(st.sampled_from(["evens", "odds", "squares", "cubes", "nat", "empty"]))


@st.composite
def set_texts(draw):
    a = draw(atom_sets())
    op = draw(st.sampled_from(["atom", "compl", "union", "inter"]))
    if op == "atom":
        return a
    if op == "compl":
        return f"compl({a})"
    return f"{op}({a},{draw(atom_sets())})"


finite_floats = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False)
grid_points = st.floats(min_value=0.0, max_value=1e6, allow_nan=False, allow_infinity=False)


def vectors(dim):
    return st.lists(finite_floats, min_size=dim, max_size=dim).map(lambda v: Vector(np.array(v)))


# ---------------------------------------------------------------------------
# modulus


@given(name=st.sampled_from(sorted(CATALOG)), inner=st.sampled_from(sorted(CATALOG)), x=grid_points, y=grid_points)
def test_modulus_axioms_and_composition(name, inner, x, y):
    f = builtin_modulus(name)
    lo, hi = min(x, y), max(x, y)
    assert f(0.0) == 0.0
    assert f(lo) <= f(hi) + 1e-12
    assert f(x + y) <= (f(x) + f(y)) * (1 + SEMINORM_TOL) + SEMINORM_TOL
    # composition keeps zero and monotonicity; subadditivity is checked, not assumed
    h = f.compose(builtin_modulus(inner))
    assert h(0.0) == 0.0
    assert h(lo) <= h(hi) + 1e-12


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_catalog_validates(name):
    rep = validate_modulus(builtin_modulus(name))
    assert rep.ok


# ---------------------------------------------------------------------------
# natset


@given(text=set_texts(), n=st.integers(1, 10**6), m=st.integers(1, 10**5))
def test_counts_and_membership(text, n, m):
    A = parse_set(text)
    c0, c1 = (int(c) for c in A.counts(np.array([n, n + 1])))
    assert c0 <= c1 <= c0 + 1
    assert (c1 - c0 == 1) == bool(A.contains(np.array([n + 1]))[0])
    els = A.elements(m)
    assert (m in set(els.tolist())) == (m in A)
    assert len(els) == A.count(m)


@given(a=small, d=small, h=st.integers(10**4, 10**6))
def test_complement_additivity(a, d, h):
    f = builtin_modulus("identity")
    A = parse_set(f"ap({a},{d})")
    e, c = f_density(A, f, h), f_density(parse_set(f"compl(ap({a},{d}))"), f, h)
    assume(e.status == "converged")
    assert c.status == "converged"
    assert abs(e.value + c.value - 1.0) <= 2 * e.tolerance


@given(els=st.lists(st.integers(1, 10**6), min_size=1, max_size=20), f=st.sampled_from(UNBOUNDED), h=st.integers(10**3, 10**6))
def test_nat_density_one_and_finite_density_zero(els, f, h):
    est = f_density(NAT, builtin_modulus(f), h)
    assert est.value == 1.0
    assert all(r == 1.0 for _, r in est.samples)
    A = parse_set("finite(" + ",".join(map(str, els)) + ")")
    assert has_f_density_zero(A, builtin_modulus(f), 10**9).holds


@given(text=set_texts(), f=st.sampled_from(UNBOUNDED), h=st.integers(10**3, 10**5))
def test_density_estimate_invariants(text, f, h):
    est = f_density(parse_set(text), builtin_modulus(f), h)
    assert 0.0 <= est.tail_inf <= est.tail_sup <= 1.0
    if est.status == "converged":
        assert est.tail_sup - est.tail_inf <= est.tolerance
        assert est.value == pytest.approx((est.tail_inf + est.tail_sup) / 2, abs=1e-15)


# ---------------------------------------------------------------------------
# filters

FILTERS = ("frechet", "stat", "fstat(log1p)", "fstat(sqrt)", "subseq(evens)", "base(idx(7,inf),idx(20,inf))")


@given(F=st.sampled_from(FILTERS), i=st.integers(0, 11), extra=atom_sets())
def test_members_are_upward_closed(F, i, extra):
    A = standard_testbed()[i]
    B = parse_set(f"union({A},{extra})")
    assert subset(A, B)[0] is True
    if member(parse_filter(F), A, 10**4).holds:
        assert member(parse_filter(F), B, 10**4).holds


@pytest.mark.parametrize("F", FILTERS)
def test_nat_member_empty_not(F):
    assert member(parse_filter(F), NAT, 10**5).holds
    assert member(parse_filter(F), EMPTY, 10**5).fails


@pytest.mark.parametrize("f", UNBOUNDED)
def test_fstat_inside_stat_on_testbed(f):
    assert includes(FStatistical(builtin_modulus(f)), Statistical(), standard_testbed()).holds


@pytest.mark.parametrize("f", UNBOUNDED)
def test_frechet_inside_fstat_on_testbed(f):
    assert includes(Frechet(), FStatistical(builtin_modulus(f)), standard_testbed()).holds


# ---------------------------------------------------------------------------
# spaces

DIM = 6
FAMILIES = {
    "l1": NormedL1(DIM),
    "linf": NormedLinf(DIM),
    "weak": SeminormFamily((parse_functional("ones"), parse_functional("alternating"), parse_functional("[1,0,-2,0,3,0]", "y")), DIM),
}


@given(family=st.sampled_from(sorted(FAMILIES)), x=vectors(DIM), y=vectors(DIM), alpha=finite_floats)
def test_seminorm_axioms(family, x, y, alpha):
    S = FAMILIES[family]
    labels = S.labels if isinstance(S, SeminormFamily) else ("norm",)
    for lab in labels:
        px, py = seminorm(S, lab, x), seminorm(S, lab, y)
        assert px >= 0.0
        sxy = seminorm(S, lab, Vector(x.data + y.data))
        assert sxy <= px + py + SEMINORM_TOL * (1 + px + py)
        assert seminorm(S, lab, Vector(alpha * x.data)) == pytest.approx(abs(alpha) * px, rel=SEMINORM_TOL, abs=SEMINORM_TOL)


@given(x=vectors(DIM), y=vectors(DIM), z=vectors(DIM), a=finite_floats, b=finite_floats)
def test_pairing_bilinear_and_bounded(x, y, z, a, b):
    lhs = pairing(Vector(a * x.data + b * y.data), z)
    rhs = a * pairing(x, z) + b * pairing(y, z)
    scale = 1 + abs(a) * np.abs(x.data) @ np.abs(z.data) + abs(b) * np.abs(y.data) @ np.abs(z.data)
    assert abs(lhs - rhs) <= SEMINORM_TOL * scale
    lhs = pairing(z, Vector(a * x.data + b * y.data))
    assert abs(lhs - (a * pairing(z, x) + b * pairing(z, y))) <= SEMINORM_TOL * scale
    # |⟨x, y⟩| <= ‖x‖_∞ ‖y‖_1
    bound = np.abs(x.data).max() * np.abs(y.data).sum()
    assert abs(pairing(x, y)) <= bound * (1 + SEMINORM_TOL) + SEMINORM_TOL


# ---------------------------------------------------------------------------
# converge

H = 10**4
H_SMALL = 1000
EPS = (1.0, 0.1, 0.01)
CHECK_FILTERS = ("frechet", "stat", "fstat(log1p)", "subseq(evens)")


@st.composite
def scalar_sequences(draw):
    c = draw(st.floats(-2, 2, allow_nan=False).map(lambda v: round(v, 3)))
    kind = draw(st.sampled_from(["const", "vanish", "spiked", "alternating", "sparse_spikes"]))
    if kind == "const":
        return f"const({c})", c
    if kind == "vanish":
        return f"sum(const({c}), scalar(1/n))", c
    if kind == "spiked":
        return f"perturbed(const({c}), squares, {c + 1})", c
    if kind == "sparse_spikes":
        return f"perturbed(const({c}), powers({draw(st.integers(2, 5))}), {c - 3})", c
    return f"scalar({c}*(-1)**n)", c


@given(seq=scalar_sequences(), F=st.sampled_from(CHECK_FILTERS), shift=st.floats(-0.05, 0.05, allow_nan=False))
def test_limits_are_unique_cluster_points(seq, F, shift):
    text, c = seq
    x, F = parse_sequence(text), parse_filter(F)
    a, b = Vector([c]), Vector([c + shift])
    at_a, at_b = f_limit_check(x, a, F, EPS, H), f_limit_check(x, b, F, EPS, H)
    if at_b.holds:
        assert cluster_point_check(x, b, F, EPS, H).holds
    if at_a.holds and at_b.holds:
        assert abs(shift) <= 2 * min(EPS) + 1e-12


@given(
    coefs=st.lists(st.floats(-1, 1, allow_nan=False), min_size=3, max_size=3),
    freq=st.floats(0.01, 3, allow_nan=False),
)
def test_cesaro_means_stay_within_bound(coefs, freq):
    a, b, c = (round(v, 4) for v in coefs)
    x = parse_sequence(f"scalar({a} + {b}*sin({freq!r}*n) + {c}*(-1)**n)")
    ns = np.arange(1, 2001)
    C = float(np.abs(x.features(ns)).max())
    assert float(np.abs(cesaro(x).features(ns)).max()) <= C + 1e-9


def test_frechet_inside_statistical_on_testbed():
    assert includes(Frechet(), Statistical(), standard_testbed()).holds


@given(seq=scalar_sequences())
def test_cauchy_transfers_from_frechet_to_statistical(seq):
    x = parse_sequence(seq[0])
    if f_cauchy_check(x, Frechet(), EPS, H_SMALL).holds:
        assert f_cauchy_check(x, Statistical(), EPS, H_SMALL).outcome in ("holds", "inconclusive")


MAPS = ("identity", "affine(2,0)", "affine(3,1)", "square", "const(4)", "explicit(5,1,9,2)")


@given(seq=scalar_sequences(), g=st.sampled_from(MAPS), F=st.sampled_from(("frechet", "stat", "fstat(log1p)")))
def test_composition_identity(seq, g, F):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TrivialFilterWarning)
        a, b = composition_pair(seq[0], "scalar", g, F, EPS, H_SMALL)
    assert a.outcome == b.outcome
