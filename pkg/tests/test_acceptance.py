"""One test per acceptance criterion; a pass/fail line per criterion is printed in the summary."""

import subprocess
import sys
import time
import warnings
from pathlib import Path

import numpy as np
import pytest

from filterlab.converge import COMPOSITION_SUITE, ball, box, composition_pair, extract_cauchy_from_base
from filterlab.errors import NotCauchyFilterError
from filterlab.filters import FStatistical, Statistical, TrivialFilterWarning, includes, standard_testbed
from filterlab.gallery import run
from filterlab.modulus import builtin_modulus
from filterlab.natset import f_density, parse_set

ROOT = Path(__file__).resolve().parents[1]
IDENT = builtin_modulus("identity")
LOG = builtin_modulus("log1p")


def sub(report, name):
    return next(s for s in report["sub_verdicts"] if s["name"] == name)


@pytest.mark.criterion(1, "densities of evens, squares, log-squares and 2-adic blocks within 5 s")
def test_densities():
    t0 = time.perf_counter()
    evens = f_density(parse_set("evens"), IDENT, 10**6)
    squares = f_density(parse_set("squares"), IDENT, 10**8)
    log_squares = f_density(parse_set("squares"), LOG, 10**8)
    blocks = f_density(parse_set("blocks(pow2)"), IDENT, 10**8)
    elapsed = time.perf_counter() - t0
    assert evens.status == "converged" and abs(evens.value - 0.5) <= 1e-3
    assert squares.status == "converged" and squares.value <= 1e-3
    assert log_squares.status == "converged" and abs(log_squares.value - 0.5) <= 1e-2
    assert blocks.status == "oscillating"
    assert abs(blocks.tail_inf - 1 / 3) <= 0.05 and abs(blocks.tail_sup - 2 / 3) <= 0.05
    assert elapsed < 5


@pytest.mark.criterion(2, "f-statistical filters sit inside the statistical filter on the testbed within 10 s")
def test_fstat_inside_stat():
    t0 = time.perf_counter()
    for name in ("identity", "log1p", "sqrt"):
        v = includes(FStatistical(builtin_modulus(name)), Statistical(), standard_testbed())
        assert v.outcome == "holds", (name, v.diagnostics["witnesses"])
        assert v.diagnostics["witnesses"] == []
    assert time.perf_counter() - t0 < 10


@pytest.mark.criterion(3, "25 seeded bounded sequences: statistical limit carries to Cesàro means")
def test_fast_remark_seeds():
    for seed in range(25):
        rep = run("fast_remark", {"sequence": "random", "seed": seed, "horizon": 10**6, "tolerance": 1e-2})
        assert rep["status"] == "pass", (seed, rep["parameters"]["sequence"])


@pytest.mark.criterion(4, "10 seeded inputs: Cesàro means Cauchy past the 1/(8C) threshold with no violating pair")
def test_cesaro_lemma_seeds():
    for seed in range(10):
        rep = run("cesaro_lemma", {"sequence": "random", "seed": seed})
        assert rep["status"] == "pass", seed
        assert sub(rep, "cesaro_cauchy")["diagnostics"]["violations"] == 0


@pytest.mark.criterion(5, "basis vectors in l1(100): 20 functionals Cauchy, every candidate limit off by >= 0.9, within 2 s")
def test_l1_counterexample():
    t0 = time.perf_counter()
    rep = run("l1_basis_counterexample", {"dim": 100})
    elapsed = time.perf_counter() - t0
    assert rep["status"] == "pass"
    cauchy = sub(rep, "surrogate_cauchy")["diagnostics"]
    checks = cauchy["checks"]
    assert len(cauchy["seminorms"]) == 20 and all(c["outcome"] == "holds" for c in checks)
    assert all(r["gap"] >= 0.9 for r in sub(rep, "candidates_refuted")["diagnostics"]["candidates"])
    assert elapsed < 2


@pytest.mark.criterion(6, "Cesàro basis vectors under log1p: Cauchy part holds, every candidate off by >= 0.9")
def test_cfst_counterexample():
    rep = run("cfst_counterexample", {"modulus": "log1p"})
    assert rep["status"] == "pass"
    for name in ("fstat_limits", "cesaro_means", "cesaro_basis_cauchy"):
        assert sub(rep, name)["outcome"] == "holds"
    assert all(r["gap"] >= 0.9 for r in sub(rep, "candidates_refuted")["diagnostics"]["candidates"])


@pytest.mark.criterion(7, "x∘g along F and x along g[F] agree on every composition triple")
def test_composition_identity():
    for triple in COMPOSITION_SUITE:
        with warnings.catch_warnings():
            # a constant index map pushes any filter to a principal one
            warnings.simplefilter("ignore", TrivialFilterWarning)
            a, b = composition_pair(*triple)
        assert a.outcome == b.outcome, triple
        assert [c["outcome"] for c in a.diagnostics["checks"]] == [c["outcome"] for c in b.diagnostics["checks"]]


@pytest.mark.criterion(8, "nested balls give a 2^-n Cauchy extraction; fat boxes rejected with a diameter diagnostic")
def test_extraction():
    c = np.array([0.25, -1.5, 3.0])
    ex = extract_cauchy_from_base([ball(c, 2.0**-k) for k in range(1, 41)])
    dist = np.linalg.norm(ex.points - c, axis=1)
    assert np.all(dist <= 2.0 ** -np.arange(1, 41))
    assert ex.audit.holds
    with pytest.raises(NotCauchyFilterError) as info:
        extract_cauchy_from_base([box([0, 0], [1 + 1 / k, 0]) for k in range(1, 11)])
    assert "diameter_check" in info.value.diagnostics


@pytest.mark.criterion(9, "property suite runs in under 60 s")
def test_property_suite_budget():
    t0 = time.perf_counter()
    res = subprocess.run(
        [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", str(ROOT / "tests" / "test_invariants.py")],
        capture_output=True,
        text=True,
        cwd=ROOT,
    )
    elapsed = time.perf_counter() - t0
    assert res.returncode == 0, res.stdout[-2000:]
    assert elapsed < 60, f"{elapsed:.1f} s"


@pytest.mark.criterion(10, "gallery run-all with a fixed seed is byte-identical across runs")
def test_gallery_reproducible():
    cmd = [sys.executable, "-m", "filterlab", "gallery", "run-all", "--seed", "7"]
    a = subprocess.run(cmd, capture_output=True, cwd=ROOT)
    b = subprocess.run(cmd, capture_output=True, cwd=ROOT)
    assert a.returncode == b.returncode == 0, a.stderr
    assert a.stdout and a.stdout == b.stdout
