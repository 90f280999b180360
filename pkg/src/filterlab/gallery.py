"""Named experiments that certify the convergence results at desk scale.

Each experiment takes a parameter dict (missing keys fall back to the
experiment's defaults), evaluates the sub-verdicts it relies on and returns a
report dict with a fixed key order::

    name, parameters, expected, status, sub_verdicts, notes

``status`` is ``pass`` (every sub-verdict holds), ``fail`` (some sub-verdict
fails), ``inconclusive`` (nothing fails but something is unsettled) or
``rejected`` (an input precondition does not hold, so the experiment does
not apply).  Randomized inputs are drawn from ``numpy.random.default_rng``
seeded by the ``seed`` parameter and written back into the report, so a
report always names the exact input it certified.
"""

import dataclasses
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _dsl
from ._expr import Expression
from .converge import (
    DEFAULT_EPS,
    BasisSeq,
    CesaroBasisSeq,
    CoordinateSeq,
    FunctionalSeq,
    PerturbedSeq,
    cesaro,
    f_cauchy_check,
    f_limit_check,
    observed_indices,
    parse_sequence,
    sup_seminorms,
    verify_bound,
    zero_vector,
)
from .errors import DSLParseError
from .filters import FStatistical, Frechet, Image, Statistical, SubsequenceSurrogate, parse_filter
from .modulus import builtin_modulus
from .natset import NAT, complement, has_f_density_zero, parse_set
from .spaces import (
    Functional,
    NormedL1,
    NormedLinf,
    SeminormFamily,
    SparseProduct,
    Vector,
    functional_from_node,
    pairing,
    parse_space,
    parse_vector,
    sparse_pointwise_limit,
)
from .verdict import FAILS, HOLDS, INCONCLUSIVE, Verdict, conjunction

PASS = "pass"
FAIL = "fail"
UNSETTLED = "inconclusive"
REJECTED = "rejected"
STATUSES = (PASS, FAIL, UNSETTLED, REJECTED)

RANDOM = "random"
LINEARITY_RTOL = 1e-9

_EXCEPTIONAL_SETS = ("squares", "cubes", "powers(2)", "powers(3)", "poly(1,0,1)", "poly(0,0,0,0,1)")

L1_FUNCTIONALS = (
    "ones",
    "alternating",
    "harmonic",
    "basis(1)",
    "basis(2)",
    "basis(50)",
    "basis(100)",
    "geometric(0.5)",
    "geometric(-0.5)",
    "coords(1/k**2)",
    "coords(1 + 1/k)",
    "coords((-1)**k*(1 - 1/k))",
    "coords(exp(-k))",
    "coords(sin(pi*k/2))",
    "coords(k/(k + 1))",
    "coords(log(k)/k)",
    "coords(cos(pi*k))",
    "coords(1.0*(k > 10))",
    "coords(2 - k % 2)",
    "coords(min(k, 10)/10)",
)

L1_CANDIDATES = (
    "zero",
    "basis(1)",
    "basis(100)",
    "cesaro_basis(100)",
    "cesaro_basis(10)",
    "coords(2**(-k))",
    "coords(6/(pi**2*k**2))",
    "coords(0.5*(k <= 2))",
    "ones",
    "alternating",
)

CFST_FAMILY = (
    "1",
    "1.0*(k != 1)",
    "2 + 1/k",
    "3*(k <= 10) - 1",
    "0.5 + (-1)**k/k",
    "cos(1/k)",
    "1 - 2*(k == 7) + 1/k**2",
    "3*(k > 5)",
    "exp(-k) - 0.25",
    "0.75 + 1.0*(k % 2 == 0)/k",
)

CFST_CANDIDATES = (
    "basis(1)",
    "zero",
    "cesaro_basis(100)",
    "coords(2**(-k))",
    "basis(7)",
    "coords(6/(pi**2*k**2))",
    "ones",
    "coords(0.5*(k <= 2))",
)

CERTIFICATE_L1 = (
    "Along any free filter each coordinate functional sends e_n to 0 and the all-ones "
    "functional sends e_n to 1, so a weak limit z would need every coordinate 0 and "
    "coordinate sum 1; no z in l1 does both."
)
CERTIFICATE_CFST = (
    "For a finitely perturbed constant y the f-statistical limit ignores the perturbation "
    "while the sum of z_n y_n does not; zeroing y on the support of z leaves the sum at 0 "
    "and the limit at 1."
)


# ---------------------------------------------------------------------------
# report plumbing


class _Report:
    def __init__(self, name, params, expected):
        self.name = name
        self.params = params
        self.expected = expected
        self.subs = []
        self.notes = []
        self.rejection = None

    def add(self, label, verdict):
        self.subs.append({"name": label, "outcome": verdict.outcome, "diagnostics": verdict.diagnostics})
        return verdict

    def note(self, text):
        self.notes.append(text)

    def reject(self, reason):
        self.rejection = reason
        return self.finish()

    def finish(self, allow_inconclusive=()):
        if self.rejection is not None:
            status = REJECTED
            self.notes.append(f"precondition not met: {self.rejection}")
        else:
            outcomes = [s["outcome"] for s in self.subs if not (s["outcome"] == INCONCLUSIVE and s["name"] in allow_inconclusive)]
            if not self.subs:
                status = UNSETTLED
            elif FAILS in outcomes:
                status = FAIL
            elif INCONCLUSIVE in outcomes:
                status = UNSETTLED
            else:
                status = PASS
        return {
            "name": self.name,
            "parameters": self.params,
            "expected": self.expected,
            "status": status,
            "sub_verdicts": self.subs,
            "notes": self.notes,
        }


def _eps_grid(tol):
    return tuple(sorted({e for e in DEFAULT_EPS if e >= tol} | {float(tol)}, reverse=True))


def _with_tolerance(F, tol):
    """Certify density-filter memberships at ``tol`` instead of the library default."""
    if isinstance(F, FStatistical):
        return dataclasses.replace(F, tolerance=tol)
    if isinstance(F, Image) and not isinstance(F, SubsequenceSurrogate):
        return Image(F.g, _with_tolerance(F.inner, tol))
    return F


def _functional(text):
    """A functional from the functional DSL, or a rule expression in ``k``."""
    try:
        return functional_from_node(_dsl.parse(text), label=text)
    except DSLParseError:
        return Functional(text, rule=Expression(text, var="k"))


def _scalar(v):
    return Vector([float(v)])


def _int(v):
    return int(float(v))


def random_bounded_sequence(seed):
    """Seeded bounded scalar sequence with statistical limit ``a``, for the Cesàro remark.

    ``x_n = a + b sin(w n) / n**p`` off a sparse exceptional set, where it is
    a constant spike.  Returns ``(dsl_text, a)``.
    """
    rng = np.random.default_rng(seed)
    a = round(float(rng.uniform(-1, 1)), 3)
    b = round(float(rng.uniform(0, 1)), 3)
    w = round(float(rng.uniform(0.1, 3)), 3)
    p = round(float(rng.uniform(1, 2)), 2)
    exc = _EXCEPTIONAL_SETS[int(rng.integers(len(_EXCEPTIONAL_SETS)))]
    spike = round(float(rng.uniform(-2, 2)), 3)
    return f"perturbed(scalar({a} + {b}*sin({w}*n)/n**{p}), {exc}, {spike})", a


def random_oscillating_sequence(seed):
    """Seeded bounded scalar sequence whose oscillation off a sparse set stays below 1/2.

    ``x_n = c + b sin(w n)`` with ``b < 1/4`` off the exceptional set, a
    constant spike on it.
    """
    rng = np.random.default_rng(seed)
    c = round(float(rng.uniform(-0.5, 0.5)), 3)
    b = round(float(rng.uniform(0.01, 0.24)), 3)
    w = round(float(rng.uniform(0.5, 3)), 3)
    exc = _EXCEPTIONAL_SETS[int(rng.integers(4))]
    spike = round(float(rng.uniform(-1.5, 1.5)), 3)
    return f"perturbed(scalar({c} + {b}*sin({w}*n)), {exc}, {spike})"


# ---------------------------------------------------------------------------
# experiments


def run_fast_remark(params=None):
    """A bounded sequence with statistical limit ``a`` has Cesàro means converging to ``a``.

    Sub-verdicts: ``bounded`` (the sup over ``(h/16, h]`` does not exceed the
    sup over ``[1, h/16]`` beyond tolerance), ``exceptional_density_zero``
    (for perturbed inputs), ``stat_limit`` and ``cesaro_limit``.  Unbounded
    inputs and exceptional sets of positive density are rejected.
    """
    p = _params("fast_remark", params)
    if p["sequence"] == RANDOM:
        p["sequence"], p["limit"] = random_bounded_sequence(p["seed"])
        p["generated"] = True
    rep = _Report("fast_remark", p, EXPERIMENTS["fast_remark"].expected)
    h, tol = _int(p["horizon"]), float(p["tolerance"])
    x = parse_sequence(p["sequence"])
    a = _scalar(p["limit"])

    vals = np.abs(x.features(np.arange(1, h + 1, dtype=np.int64))[:, 0])
    head, tail = float(vals[: h // 16].max()), float(vals[h // 16 :].max())
    bounded = tail <= head * (1 + tol) + tol
    rep.add("bounded", Verdict(HOLDS if bounded else FAILS, {"sup_head": head, "sup_tail": tail, "split": h // 16}))
    if not bounded:
        return rep.reject(f"generator looks unbounded: sup over (h/16, h] = {tail:.6g} > sup over [1, h/16] = {head:.6g}")

    if isinstance(x, PerturbedSeq):
        v = rep.add("exceptional_density_zero", has_f_density_zero(x.exceptional, builtin_modulus("identity"), h, tol))
        if v.fails:
            return rep.reject(f"exceptional set {x.exceptional} does not have density zero")

    F = Statistical(tolerance=tol)
    rep.add("stat_limit", f_limit_check(x, a, F, _eps_grid(tol), h))
    y = cesaro(x)
    v = rep.add("cesaro_limit", f_limit_check(y, a, Frechet(), (tol,), h))
    v.diagnostics["cesaro_mean_at_horizon"] = float(y.value(h)[0])
    return rep.finish()


def _lemma_core(p, rep):
    """Shared premises of the Cesàro lemma and the limit experiment.

    Returns a context dict, or ``None`` after recording a rejection.
    """
    h = _int(p["horizon"])
    space = parse_space(p["space"], _int(p["dim"]))
    if not isinstance(space, (NormedL1, NormedLinf)):
        rep.rejection = f"space {space} has no point coordinates; use scalar, l1(d) or linf(d)"
        return None
    x = parse_sequence(p["sequence"], space)
    if p["witness"]:
        A = parse_set(p["witness"])
    elif isinstance(x, PerturbedSeq):
        A = complement(x.exceptional)
    else:
        A = NAT
    idx = np.arange(1, h + 1, dtype=np.int64)
    zero = zero_vector(space)

    observed = sup_seminorms(x, h)
    if p["bound"] is not None:
        C = np.full(len(observed), float(p["bound"]))
        rep.add("bound", verify_bound(x, float(p["bound"]), h, seed=p["seed"]))
    else:
        C = observed
        rep.note("C is the supremum of p(x_n) over [1, horizon]")

    inA = A.contains(idx)
    pos = np.flatnonzero(inA)
    lo, hi = x.tail_diameters(idx[pos], [0])
    osc = {"witness_set": str(A), "diameter_lower": lo[0].tolist(), "diameter_upper": hi[0].tolist()}
    if np.any(lo[0] >= 0.5):
        rep.add("oscillation_premise", Verdict(FAILS, osc))
        rep.rejection = f"p(x_n - x_m) reaches {float(lo[0].max()):.6g} >= 1/2 on the witness set"
        return None
    rep.add("oscillation_premise", Verdict(HOLDS if np.all(hi[0] < 0.5) else INCONCLUSIVE, osc))

    # N: the ratio |(ℕ∖A)(n)| / n stays below 1/(8C) on [N, horizon]
    ratio = np.cumsum(~inA) / idx
    thr = 1.0 / (8.0 * float(C.max())) if C.max() > 0 else np.inf
    bad = np.flatnonzero(ratio >= thr)
    N = int(bad[-1]) + 2 if bad.size else 1
    thr_diag = {"threshold": thr, "C": C.tolist(), "N": N, "ratio_at_horizon": float(ratio[-1])}
    if N > h // 2:
        rep.add("threshold", Verdict(INCONCLUSIVE, {**thr_diag, "reason": "ratio not below 1/(8C) on the second half of the horizon"}))
        return None
    thr_diag["ratio_at_N"] = float(ratio[N - 1])
    rep.add("threshold", Verdict(HOLDS, thr_diag))

    y = cesaro(x)
    lo, hi = y.tail_diameters(idx, [N - 1])
    diam = {"N": N, "diameter_lower": lo[0].tolist(), "diameter_upper": hi[0].tolist(), "pairs": "all n, m in [N, horizon]"}
    if np.all(hi[0] < 1):
        cauchy = HOLDS
        diam["violations"] = 0
    elif np.any(lo[0] >= 1):
        cauchy = FAILS
    else:
        cauchy = INCONCLUSIVE
    rep.add("cesaro_cauchy", Verdict(cauchy, diam))

    ysup = y.dist_to_point(idx, zero).max(axis=0)
    ok = bool(np.all(ysup <= C * (1 + 1e-12) + 1e-12))
    rep.add("cesaro_bounded", Verdict(HOLDS if ok else FAILS, {"sup_p_y": ysup.tolist(), "C": C.tolist()}))
    return {"x": x, "y": y, "A": A, "inA": inA, "C": C, "N": N, "idx": idx, "space": space, "h": h}


def run_cesaro_lemma(params=None):
    """Bounded, statistically Cauchy ``x`` has Cauchy Cesàro means: the ``1/(8C)`` construction.

    Computes ``N`` from the witness set ``A`` (default: the complement of
    the exceptional set) and checks ``p(y_n - y_m) < 1`` over every pair
    ``n, m`` in ``[N, horizon]`` and ``p(y_n) <= C``.  A witness set on which
    ``x`` oscillates by ``1/2`` or more is rejected.
    """
    p = _params("cesaro_lemma", params)
    if p["sequence"] == RANDOM:
        p["sequence"] = random_oscillating_sequence(p["seed"])
        p["generated"] = True
    rep = _Report("cesaro_lemma", p, EXPERIMENTS["cesaro_lemma"].expected)
    _lemma_core(p, rep)
    return rep.finish()


def run_bfst_limit(params=None):
    """The Cesàro limit ``a`` is a statistical limit: ``p(x_n - a) <= 1`` on ``A`` past ``M``.

    ``M >= N`` is the last index with ``p(y_n - a) >= 1/4``.  The candidate
    defaults to the Cesàro mean at the horizon; a candidate whose Cesàro
    distance stays at least ``1/4`` over the second half fails with that
    witness index.
    """
    p = _params("bfst_limit", params)
    if p["sequence"] == RANDOM:
        p["sequence"] = random_oscillating_sequence(p["seed"])
        p["generated"] = True
    rep = _Report("bfst_limit", p, EXPERIMENTS["bfst_limit"].expected)
    ctx = _lemma_core(p, rep)
    if ctx is None:
        return rep.finish()
    x, y, idx, h, inA = ctx["x"], ctx["y"], ctx["idx"], ctx["h"], ctx["inA"]
    if p["candidate"] is None:
        a = Vector(y.value(h))
        rep.note("candidate a is the Cesàro mean at the horizon")
    else:
        a = parse_vector(str(p["candidate"]), ctx["space"].dim)
    dy = y.dist_to_point(idx, a)
    far = dy >= 0.25
    last_far = [int(np.flatnonzero(far[:, j])[-1]) + 1 if far[:, j].any() else 0 for j in range(dy.shape[1])]
    near_diag = {"candidate": a.to_jsonable(), "last_far_index": last_far}
    if any(np.all(far[h // 2 :, j]) for j in range(dy.shape[1])):
        near_diag["witness_index"] = h
        near_diag["distance_at_witness"] = dy[h - 1].tolist()
        rep.add("cesaro_near_candidate", Verdict(FAILS, near_diag))
        return rep.finish()
    M = max([ctx["N"]] + last_far)
    near_diag["M"] = M
    if M > h // 2:
        rep.add("cesaro_near_candidate", Verdict(INCONCLUSIVE, near_diag))
        return rep.finish()
    rep.add("cesaro_near_candidate", Verdict(HOLDS, near_diag))

    dx = x.dist_to_point(idx[M:], a)
    viol = np.flatnonzero(inA[M:] & np.any(dx > 1.0, axis=1))
    diag = {"M": M, "checked": int(inA[M:].sum()), "max_distance": dx[inA[M:]].max(axis=0).tolist() if inA[M:].any() else []}
    if viol.size:
        diag["witness_index"] = int(viol[0]) + M + 1
        rep.add("limit_on_witness_set", Verdict(FAILS, diag))
    else:
        rep.add("limit_on_witness_set", Verdict(HOLDS, diag))
    return rep.finish()


def run_l1_basis_counterexample(params=None):
    """``e_n`` in ``σ(ℓ₁, ℓ∞)`` along a subsequence surrogate: Cauchy, but no weak limit in ``ℓ₁``.

    Part (i) checks the surrogate-Cauchy property of ``n ↦ ⟨e_n, y⟩`` for each
    test functional and records its limit.  Part (ii) certifies the limits
    of the coordinate functionals (0), of ``ones`` (1) and of ``tail``
    (the indicator of ``k > dim``, also 1), then measures for each candidate
    ``z`` the largest violation ``|⟨z, y⟩ - lim y|`` over those functionals,
    all of sup norm 1.
    """
    p = _params("l1_basis_counterexample", params)
    rep = _Report("l1_basis_counterexample", p, EXPERIMENTS["l1_basis_counterexample"].expected)
    d, h, eps = _int(p["dim"]), _int(p["horizon"]), float(p["eps"])
    F = parse_filter(p["surrogate"])
    rep.note(f"the free ultrafilter is replaced by the subsequence surrogate {F}")
    grid = _eps_grid(eps)

    Y = [_functional(t) for t in p["functionals"]]
    rep.add("surrogate_cauchy", f_cauchy_check(BasisSeq(SeminormFamily(tuple(Y), d)), F, grid, h))
    last = observed_indices(F, h)[-1:]
    limits, outs = {}, []
    for y in Y:
        lim = float(y.coords(last)[0])
        v = f_limit_check(FunctionalSeq(y), _scalar(lim), F, grid, h)
        limits[y.label] = {"limit": lim, "outcome": v.outcome}
        outs.append(v)
    rep.add("surrogate_limits", Verdict(conjunction(outs), {"limits": limits}))

    coords = SeminormFamily(tuple(Functional(f"e{k}", rule=Expression(f"1.0*(k == {k})", var="k")) for k in range(1, d + 1)), d)
    rep.add("coordinate_limits_zero", f_limit_check(BasisSeq(coords), Vector(np.zeros(d)), F, grid, h))
    ones = Functional("ones", rule=Expression("1 + 0*k", var="k"))
    tail = Functional("tail", rule=Expression(f"1.0*(k > {d})", var="k"))
    rep.add("ones_limit_one", f_limit_check(FunctionalSeq(ones), _scalar(1.0), F, grid, h))
    rep.add("tail_limit_one", f_limit_check(FunctionalSeq(tail), _scalar(1.0), F, grid, h))

    bound = 1.0 - d * eps
    rows, refuted = [], []
    for text in p["candidates"]:
        z = parse_vector(text, d)
        zd = z.dense(d)
        coord = float(np.abs(zd).max())
        total = float(zd.sum())
        viol = {"coordinates": coord, "ones": abs(total - 1.0), "tail": abs(pairing(tail, z) - 1.0)}
        gap = max(viol.values())
        rows.append(
            {
                "candidate": text,
                "violations": viol,
                "gap": gap,
                "violated_at_eps": gap > eps,
                "contradiction_bound_ok": coord > eps or abs(total - 1.0) >= bound,
            }
        )
        refuted.append(gap >= float(p["gap_min"]) and rows[-1]["contradiction_bound_ok"])
    diag = {"eps": eps, "contradiction_bound": bound, "gap_min": p["gap_min"], "candidates": rows, "certificate": CERTIFICATE_L1}
    rep.add("candidates_refuted", Verdict(HOLDS if all(refuted) else FAILS, diag))
    rep.note("non-representability is checked against the listed candidate family only; the certificate sentence covers all of l1")
    return rep.finish()


def run_cfst_counterexample(params=None):
    """Cesàro basis vectors are Cauchy in ``σ(ℓ₁, Y)`` but the limit functional is not an ``ℓ₁`` vector.

    ``Y`` holds f-statistically convergent bounded sequences, given as rule
    expressions in ``k``.  Part (i): for each ``y`` its f-statistical limit,
    the convergence of ``⟨cesaro_basis(n), y⟩`` to it, and the Cauchy property
    of ``cesaro_basis_seq`` in the seminorms of ``Y``.  Part (ii): for each
    candidate ``z`` a finite perturbation ``w`` of ``ones`` vanishing on the
    support of ``z`` (or on ``[1, dim]``) gives ``Σ z_n w_n = 0`` against the
    limit 1.
    """
    p = _params("cfst_counterexample", params)
    rep = _Report("cfst_counterexample", p, EXPERIMENTS["cfst_counterexample"].expected)
    d, h, tol = _int(p["dim"]), _int(p["horizon"]), float(p["tolerance"])
    Ffst = FStatistical(builtin_modulus(p["modulus"]), tolerance=tol)
    grid = _eps_grid(tol)

    Y = [_functional(t) for t in p["family"]]
    tail_idx = np.arange(h // 2 + 1, h + 1, dtype=np.int64)
    lims, outs_f, outs_c, pair_err = {}, [], [], 0.0
    for y in Y:
        lim = float(np.median(y.coords(tail_idx)))
        vf = f_limit_check(FunctionalSeq(y), _scalar(lim), Ffst, grid, h)
        means = cesaro(FunctionalSeq(y))
        vc = f_limit_check(means, _scalar(lim), Frechet(), (tol,), h)
        for n in (1, d // 2, d):
            pair_err = max(pair_err, abs(pairing(y, Vector(np.full(n, 1.0 / n))) - float(means.value(n)[0])))
        lims[y.label] = {"limit": lim, "fstat": vf.outcome, "cesaro": vc.outcome, "cesaro_mean_at_horizon": float(means.value(h)[0])}
        outs_f.append(vf)
        outs_c.append(vc)
    rep.add("fstat_limits", Verdict(conjunction(outs_f), {"filter": str(Ffst), "tolerance": tol, "family": lims}))
    rep.add("cesaro_means", Verdict(conjunction(outs_c), {"tolerance": tol, "pairing_identity_error": pair_err}))
    rep.add("cesaro_basis_cauchy", f_cauchy_check(CesaroBasisSeq(SeminormFamily(tuple(Y), d)), Frechet(), grid, h))

    rows, refuted = [], []
    for text in p["candidates"]:
        z = parse_vector(text, d)
        supp = z.support()
        if not supp:
            rule = "1 + 0*k"
        elif len(supp) <= 8:
            rule = "1 - " + " - ".join(f"1.0*(k == {k})" for k in supp)
        else:
            rule = f"1.0*(k > {d})"
        w = Functional(rule, rule=Expression(rule, var="k"))
        v = f_limit_check(FunctionalSeq(w), _scalar(1.0), Ffst, grid, h)
        s = pairing(w, z)
        gap = abs(s - 1.0)
        rows.append({"candidate": text, "witness": rule, "witness_limit": v.outcome, "sum_z_w": s, "limit_w": 1.0, "gap": gap})
        refuted.append(v.holds and gap >= float(p["gap_min"]))
    diag = {"gap_min": p["gap_min"], "candidates": rows, "certificate": CERTIFICATE_CFST}
    rep.add("candidates_refuted", Verdict(HOLDS if all(refuted) else FAILS, diag))
    rep.note("non-representability is checked against the listed candidate family only; the certificate sentence covers all of l1")
    return rep.finish()


def run_dual_pointwise(params=None):
    """A bounded sequence of ``ℓ∞`` functionals has a pointwise F-limit that is again bounded.

    Coordinate limits along ``F`` assemble ``f``; ``f`` is checked for
    linearity on seeded random triples, for ``|f(x)| <= C‖x‖₁`` on random
    ``x`` and as the F-limit of the sequence in the seminorms of a seeded
    random set of ``ℓ₁`` test vectors.
    """
    p = _params("dual_pointwise", params)
    rep = _Report("dual_pointwise", p, EXPERIMENTS["dual_pointwise"].expected)
    d, h, tol = _int(p["dim"]), _int(p["horizon"]), float(p["tolerance"])
    F = _with_tolerance(parse_filter(p["filter"]), tol)
    grid = _eps_grid(tol)
    rng = np.random.default_rng(p["seed"])
    x = parse_sequence(p["sequence"], NormedLinf(d))

    C = float(sup_seminorms(x, h)[0])
    if p["bound"] is not None:
        rep.add("bound", verify_bound(x, float(p["bound"]), h, seed=p["seed"]))
        C = float(p["bound"])

    idx = observed_indices(F, h)
    tail = x.features(idx[len(idx) // 2 :])
    limits, per, flagged = np.zeros(d), {}, []
    outs = []
    for k in range(1, d + 1):
        cand = float(np.median(tail[:, k - 1]))
        v = f_limit_check(CoordinateSeq(x, str(k)), _scalar(cand), F, grid, h)
        limits[k - 1] = cand
        per[str(k)] = {"limit": cand, "outcome": v.outcome}
        outs.append(v)
        if not v.holds:
            flagged.append(k)
    rep.add("coordinate_limits", Verdict(conjunction(outs), {"filter": str(F), "per_coordinate": per, "flagged": flagged}))
    f = Vector(limits)

    worst = 0.0
    for _ in range(int(p["samples"])):
        u, v = rng.normal(size=(2, d))
        al, be = rng.normal(size=2)
        lhs = float(limits @ (al * u + be * v))
        rhs = al * float(limits @ u) + be * float(limits @ v)
        scale = 1.0 + (abs(al) * np.abs(u).sum() + abs(be) * np.abs(v).sum()) * float(np.abs(limits).max())
        worst = max(worst, abs(lhs - rhs) / scale)
    rep.add("linearity", Verdict(HOLDS if worst <= LINEARITY_RTOL else FAILS, {"max_relative_error": worst, "triples": int(p["samples"])}))

    X = rng.laplace(size=(int(p["samples"]), d))
    ratio = np.abs(X @ limits) / np.abs(X).sum(axis=1)
    rep.add("norm_bound", Verdict(HOLDS if ratio.max() <= C * (1 + 1e-12) else FAILS, {"C": C, "max_ratio": float(ratio.max())}))

    T = rng.normal(size=(int(p["test_vectors"]), d))
    T /= np.abs(T).sum(axis=1, keepdims=True)
    family = SeminormFamily(tuple(Functional(f"t{i + 1}", values=tuple(T[i])) for i in range(len(T))), d)
    rep.add("weak_limit", f_limit_check(parse_sequence(p["sequence"], family), f, F, grid, h))
    rep.note(f"assembled functional: {[round(float(v), 12) for v in limits]}")
    return rep.finish()


def run_sparse_product(params=None):
    """Pointwise F-limits of finitely supported functions keep their support inside the inputs' supports."""
    p = _params("sparse_product", params)
    rep = _Report("sparse_product", p, EXPERIMENTS["sparse_product"].expected)
    h, tol = _int(p["horizon"]), float(p["tolerance"])
    space = SparseProduct(tuple(p["keys"]))
    x = parse_sequence(p["sequence"], space)
    F = _with_tolerance(parse_filter(p["filter"]), tol)
    limit, info = sparse_pointwise_limit(x, F, space.keys, h, _eps_grid(tol))
    outs = [Verdict(r["verdict"]) for r in info["per_key"].values()]
    rep.add("pointwise_limits", Verdict(conjunction(outs), {"per_key": info["per_key"], "flagged": info["flagged"], "limit": limit.to_jsonable()}))
    closed = {k: info[k] for k in ("limit_support", "inspected_support", "support_closed")}
    rep.add("support_closed", Verdict(HOLDS if info["support_closed"] else FAILS, closed))
    return rep.finish()


# ---------------------------------------------------------------------------
# registry and runners


@dataclass(frozen=True)
class Experiment:
    name: str
    runner: object
    expected: str
    summary: str
    defaults: dict = field(default_factory=dict)

    def run(self, params=None, seed=None, timing=False):
        params = dict(params or {})
        if seed is not None and "seed" not in params:
            params["seed"] = seed
        t0 = time.perf_counter()
        report = self.runner(params)
        if timing:
            report["wall_time_s"] = round(time.perf_counter() - t0, 3)
        return report


_LEMMA_DEFAULTS = {
    "sequence": "perturbed(scalar(0.2*sin(n)), squares, 1)",
    "space": "scalar",
    "dim": 1,
    "witness": "",
    "bound": None,
    "horizon": 10**5,
    "seed": 0,
}

EXPERIMENTS = {
    e.name: e
    for e in (
        Experiment(
            "fast_remark",
            run_fast_remark,
            PASS,
            "statistical limit of a bounded sequence is its Cesàro limit",
            {"sequence": "perturbed(0, squares, 1)", "limit": 0.0, "horizon": 10**6, "tolerance": 1e-2, "seed": 0},
        ),
        Experiment("cesaro_lemma", run_cesaro_lemma, PASS, "Cesàro means of a bounded statistically Cauchy sequence are Cauchy", dict(_LEMMA_DEFAULTS)),
        Experiment(
            "bfst_limit",
            run_bfst_limit,
            PASS,
            "the Cesàro limit is a statistical limit on the witness set",
            {**_LEMMA_DEFAULTS, "candidate": None},
        ),
        Experiment(
            "l1_basis_counterexample",
            run_l1_basis_counterexample,
            PASS,
            "e_n is weakly Cauchy along a surrogate filter but has no weak limit in l1",
            {
                "dim": 100,
                "surrogate": "subseq(evens)",
                "functionals": list(L1_FUNCTIONALS),
                "candidates": list(L1_CANDIDATES),
                "eps": 1e-3,
                "gap_min": 0.9,
                "horizon": 10**4,
            },
        ),
        Experiment(
            "cfst_counterexample",
            run_cfst_counterexample,
            PASS,
            "Cesàro basis vectors are weakly Cauchy but the f-statistical limit functional is not in l1",
            {
                "modulus": "log1p",
                "dim": 100,
                "family": list(CFST_FAMILY),
                "candidates": list(CFST_CANDIDATES),
                "tolerance": 1e-2,
                "gap_min": 0.9,
                "horizon": 10**5,
            },
        ),
        Experiment(
            "dual_pointwise",
            run_dual_pointwise,
            PASS,
            "pointwise F-limit of bounded functionals is a bounded functional",
            {
                "sequence": "perturbed(const(ones), cubes, alternating)",
                "dim": 20,
                "filter": "stat",
                "bound": None,
                "horizon": 10**5,
                "tolerance": 1e-2,
                "test_vectors": 8,
                "samples": 200,
                "seed": 0,
            },
        ),
        Experiment(
            "sparse_product",
            run_sparse_product,
            PASS,
            "pointwise limits of finitely supported functions stay finitely supported",
            {
                "sequence": "perturbed(const({b: 1}), squares, {a: 1})",
                "keys": ["a", "b"],
                "filter": "stat",
                "horizon": 10**5,
                "tolerance": 1e-2,
            },
        ),
    )
}


def _params(name, params):
    defaults = EXPERIMENTS[name].defaults
    params = dict(params or {})
    unknown = sorted(set(params) - set(defaults) - {"seed"})
    if unknown:
        raise KeyError(f"unknown parameters for {name}: {unknown}")
    merged = {**defaults, **params}
    merged.setdefault("seed", 0)
    return merged


def list_experiments():
    """``(name, expected status, summary)`` for every experiment, in run order."""
    return [(e.name, e.expected, e.summary) for e in EXPERIMENTS.values()]


def run(name, params=None, seed=None, timing=False):
    if name not in EXPERIMENTS:
        raise KeyError(f"unknown experiment {name!r}; known: {sorted(EXPERIMENTS)}")
    return EXPERIMENTS[name].run(params, seed, timing)


def _run_job(job):
    name, params, seed, timing = job
    return run(name, params, seed, timing)


def run_all(seed=0, jobs=1, params=None, names=None, timing=False):
    """Run experiments (default: all) and return their reports in registry order.

    ``params`` maps experiment names to parameter overrides.  With
    ``jobs > 1`` experiments run in worker processes; the merge is by name,
    so the result does not depend on the job count.
    """
    params = params or {}
    names = list(names or EXPERIMENTS)
    for n in names:
        if n not in EXPERIMENTS:
            raise KeyError(f"unknown experiment {n!r}")
    jobs_list = [(n, params.get(n), seed, timing) for n in names]
    if jobs > 1 and len(jobs_list) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(jobs_list))) as pool:
            results = list(pool.map(_run_job, jobs_list))
    else:
        results = [_run_job(j) for j in jobs_list]
    by_name = {r["name"]: r for r in results}
    return [by_name[n] for n in EXPERIMENTS if n in by_name]
