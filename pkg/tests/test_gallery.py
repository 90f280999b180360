import json

import pytest

from filterlab.gallery import (
    CFST_CANDIDATES,
    EXPERIMENTS,
    L1_CANDIDATES,
    L1_FUNCTIONALS,
    STATUSES,
    list_experiments,
    random_bounded_sequence,
    run,
    run_all,
    run_bfst_limit,
    run_cesaro_lemma,
    run_cfst_counterexample,
    run_dual_pointwise,
    run_fast_remark,
    run_l1_basis_counterexample,
    run_sparse_product,
)
from filterlab.spaces import cesaro_basis, ones, pairing


def subs(report):
    return {s["name"]: s for s in report["sub_verdicts"]}


def test_registry_lists_seven_experiments():
    assert [n for n, _, _ in list_experiments()] == list(EXPERIMENTS)
    assert len(EXPERIMENTS) == 7


@pytest.mark.parametrize("name", list(EXPERIMENTS))
def test_defaults_pass_and_embed_sub_verdicts(name):
    rep = run(name)
    assert rep["status"] == "pass"
    assert rep["sub_verdicts"]
    assert all(s["outcome"] == "holds" for s in rep["sub_verdicts"])
    assert list(rep)[:4] == ["name", "parameters", "expected", "status"]


def test_fast_remark_spiked_sequence():
    rep = run_fast_remark({"sequence": "perturbed(0, squares, 1)", "limit": 0.0, "horizon": 10**6})
    assert rep["status"] == "pass"


def test_fast_remark_constant():
    assert run_fast_remark({"sequence": "const(0.7)", "limit": 0.7, "horizon": 10**5})["status"] == "pass"


def test_fast_remark_rejects_positive_density_exceptions():
    rep = run_fast_remark({"sequence": "perturbed(0, evens, 1)", "limit": 0.0, "horizon": 10**5})
    assert rep["status"] == "rejected"


def test_fast_remark_rejects_unbounded_sequence():
    rep = run_fast_remark({"sequence": "scalar(n)", "limit": 0.0, "horizon": 10**5})
    assert rep["status"] == "rejected"


def test_random_bounded_sequences_are_seeded():
    assert random_bounded_sequence(3) == random_bounded_sequence(3)
    assert random_bounded_sequence(3) != random_bounded_sequence(4)


def test_cesaro_lemma_constant_has_threshold_one():
    rep = run_cesaro_lemma({"sequence": "const(0.3)", "horizon": 10**4})
    assert rep["status"] == "pass"
    assert subs(rep)["threshold"]["diagnostics"]["N"] == 1


def test_cesaro_lemma_persistent_exceptions_inconclusive():
    rep = run_cesaro_lemma({"sequence": "perturbed(0, ap(1,4), 1)", "witness": "compl(ap(1,4))", "horizon": 10**4})
    assert rep["status"] == "inconclusive"


def test_cesaro_lemma_premise_violation_rejected():
    rep = run_cesaro_lemma({"sequence": "scalar(sin(n))", "witness": "nat", "horizon": 10**4})
    assert rep["status"] == "rejected"


def test_bfst_wrong_candidate_fails_with_witness():
    rep = run_bfst_limit({"candidate": 2.0})
    assert rep["status"] == "fail"
    diag = subs(rep)["cesaro_near_candidate"]["diagnostics"]
    assert "witness_index" in diag


def test_bfst_constant():
    assert run_bfst_limit({"sequence": "const(0.4)", "horizon": 10**4})["status"] == "pass"


def test_l1_counterexample_gaps():
    rep = run_l1_basis_counterexample()
    rows = subs(rep)["candidates_refuted"]["diagnostics"]["candidates"]
    assert len(rows) == len(L1_CANDIDATES)
    assert all(r["gap"] >= 0.9 for r in rows)
    zero = next(r for r in rows if r["candidate"] == "zero")
    assert zero["violations"]["ones"] == pytest.approx(1.0)
    uniform = next(r for r in rows if r["candidate"].startswith("cesaro_basis"))
    assert uniform["violations"]["coordinates"] > 1e-3
    assert any("surrogate" in n for n in rep["notes"][:1])


def test_l1_surrogate_cauchy_for_every_functional():
    rep = run_l1_basis_counterexample()
    diag = subs(rep)["surrogate_cauchy"]["diagnostics"]
    assert len(diag["seminorms"]) == len(L1_FUNCTIONALS) == 20
    assert all(c["outcome"] == "holds" for c in diag["checks"])


def test_l1_alternating_limit_along_evens_is_one():
    rep = run_l1_basis_counterexample()
    limits = subs(rep)["surrogate_limits"]["diagnostics"]["limits"]
    assert limits["alternating"]["limit"] == pytest.approx(1.0)
    assert limits["ones"]["limit"] == pytest.approx(1.0)


def test_cfst_first_coordinate_candidate_gap_one():
    rep = run_cfst_counterexample()
    rows = subs(rep)["candidates_refuted"]["diagnostics"]["candidates"]
    assert len(rows) == len(CFST_CANDIDATES)
    e1 = next(r for r in rows if r["candidate"] == "basis(1)")
    assert e1["gap"] == pytest.approx(1.0)
    assert all(r["gap"] >= 0.9 for r in rows)


def test_ones_functional_constant_on_cesaro_basis():
    assert all(pairing(ones(100), cesaro_basis(n, 100)) == pytest.approx(1.0, abs=1e-15) for n in range(1, 101))


def test_cfst_pairing_matches_cesaro_means():
    rep = run_cfst_counterexample()
    assert subs(rep)["cesaro_means"]["diagnostics"]["pairing_identity_error"] < 1e-12


def test_dual_pointwise_ones_and_bound():
    rep = run_dual_pointwise({"sequence": "const(ones)", "bound": 1.0, "horizon": 10**4})
    assert rep["status"] == "pass"
    assert subs(rep)["norm_bound"]["outcome"] == "holds"


def test_dual_pointwise_majority_functional():
    rep = run_dual_pointwise()
    per = subs(rep)["coordinate_limits"]["diagnostics"]["per_coordinate"]
    assert all(c["limit"] == 1.0 and c["outcome"] == "holds" for c in per.values())


def test_sparse_product_examples():
    assert run_sparse_product({"sequence": "scaled(scalar(1/n), {k1: 1})", "keys": ["k1"], "filter": "frechet"})["status"] == "pass"
    rep = run_sparse_product()
    assert subs(rep)["pointwise_limits"]["diagnostics"]["limit"] == {"b": 1.0}
    rep = run_sparse_product({"sequence": "const({a: 2})", "keys": ["a"], "filter": "frechet", "horizon": 10**4})
    assert subs(rep)["pointwise_limits"]["diagnostics"]["limit"] == {"a": 2.0}


def test_unknown_parameter_rejected():
    with pytest.raises(KeyError):
        run("fast_remark", {"dimension": 3})


def test_reports_are_deterministic_and_merged_by_name():
    a = json.dumps(run_all(seed=7))
    b = json.dumps(run_all(seed=7, jobs=2))
    assert a == b
    assert [r["name"] for r in json.loads(a)] == list(EXPERIMENTS)


def test_statuses_are_closed_set():
    assert {r["status"] for r in run_all(seed=1)} <= set(STATUSES)


def test_timing_is_opt_in():
    assert "wall_time_s" not in run("sparse_product")
    assert "wall_time_s" in run("sparse_product", timing=True)
