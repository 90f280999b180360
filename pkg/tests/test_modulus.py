import math

import numpy as np
import pytest

from filterlab.errors import InvalidModulusError, UnknownModulusError
from filterlab.modulus import (
    CATALOG,
    ModulusFunction,
    builtin_modulus,
    default_grid,
    modulus_from_expr,
    validate_modulus,
)


def test_identity_satisfies_every_axiom():
    rep = validate_modulus(builtin_modulus("identity"))
    assert rep.ok
    assert {a.status for a in rep.axioms.values()} == {"holds"}


def test_square_fails_subadditivity_at_one_one():
    rep = validate_modulus(modulus_from_expr("t*t"))
    sub = rep.axioms["subadditive"]
    assert sub.status == "fails"
    x, y = sub.witness
    assert (x, y) == (1.0, 1.0)
    assert (x + y) ** 2 > x**2 + y**2


def test_log1p_satisfies_every_axiom():
    rep = validate_modulus(builtin_modulus("log1p"))
    assert rep.ok
    assert rep.axioms["unbounded"].status == "holds"


def test_bounded_rational_is_flagged_bounded():
    f = builtin_modulus("bounded_rational")
    assert f.is_unbounded is False
    rep = validate_modulus(f)
    assert rep.ok
    assert rep.axioms["unbounded"].status == "not-claimed"


def test_bounded_claimed_unbounded_is_inconclusive():
    rep = validate_modulus(modulus_from_expr("t/(1+t)"))
    assert rep.axioms["unbounded"].status == "inconclusive-bounded"


@pytest.mark.parametrize("name", sorted(CATALOG) + ["power(0.5)", "power(1)"])
def test_catalog_entries_validate(name):
    assert validate_modulus(builtin_modulus(name)).ok


def test_unknown_name_lists_catalog():
    with pytest.raises(UnknownModulusError) as info:
        builtin_modulus("cosh")
    assert "log1p" in str(info.value)


def test_power_outside_unit_interval_rejected():
    with pytest.raises(ValueError):
        builtin_modulus("power(1.5)")


def test_nonfinite_value_names_the_point():
    f = ModulusFunction(lambda t: np.where(t > 10, np.inf, t), "blowup")
    with pytest.raises(InvalidModulusError) as info:
        validate_modulus(f)
    assert "t=" in str(info.value)


def test_nonzero_at_origin_fails():
    rep = validate_modulus(modulus_from_expr("1 + t"))
    assert rep.axioms["zero"].status == "fails"


def test_default_grid_covers_small_integers_and_range():
    g = default_grid()
    assert set(range(65)) <= set(g)
    assert max(g) == 1e6


def test_log1p_values():
    f = builtin_modulus("log1p")
    assert f(0.0) == 0.0
    assert math.isclose(f(math.e - 1), 1.0)


def test_composition_is_validated_not_assumed():
    f = builtin_modulus("log1p").compose(builtin_modulus("sqrt"))
    rep = validate_modulus(f)
    assert rep.axioms["zero"].status == "holds"
    assert rep.axioms["monotone"].status == "holds"
    assert rep.axioms["subadditive"].status in ("holds", "fails")
