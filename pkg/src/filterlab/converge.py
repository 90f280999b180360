"""Limits, cluster points and Cauchy checks of sequences along filters on ℕ.

Every check fixes a finite neighborhood sub-base: the seminorms of the space
model times an ε-grid (default ``1, 0.1, 0.01, 0.001``).  For each pair
``(p, ε)`` the sequence is evaluated on ``1..horizon`` and the relevant index
set (``{n : p(x_n - a) <= ε}`` and friends) is handed to the filter as an
observed set.  Image filters are pulled back first: checking ``x`` along
``g[F]`` evaluates ``x`` at ``g(1), ..., g(horizon)`` and asks ``F``.

Cauchy witnesses depend on the filter kind:

* Fréchet: a tail ``[N, horizon]`` whose diameter is at most ε.
* density filters: an anchor ``m`` with ``{n : p(x_n - x_m) > ε}`` of
  density zero; anchors are tried in a fixed schedule, first success wins.
* base filters: a base element ``B`` with ``diam x(B ∩ [1, horizon]) <= ε``.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _dsl
from ._expr import Expression
from .errors import (
    AuditSkipped,
    BaseNotFilterError,
    DimensionMismatchError,
    DSLParseError,
    NotCauchyFilterError,
)
from .filters import BaseGenerated, FStatistical, Frechet, pullback
from .maps import IDENTITY, compose_maps, map_from_node
from .natset import ObservedSet, set_from_node
from .spaces import (
    SCALAR,
    NormedL1,
    NormedLinf,
    SeminormFamily,
    SparseProduct,
    Vector,
    vector_from_node,
)
from .verdict import FAILS, HOLDS, INCONCLUSIVE, Verdict, conjunction

DEFAULT_EPS = (1.0, 0.1, 0.01, 0.001)
DEFAULT_HORIZON = 10**5
DENSITY_MIN_HORIZON = 1000
ANCHOR_HEAD = 64
ANCHOR_RATIO = 1.5
TAIL_RATIO = 1.5
CHUNK_CELLS = 1 << 22
FEATURE_CACHE_CELLS = 1 << 25


# ---------------------------------------------------------------------------
# sequences


class SequenceSpec:
    """A deterministic map ``n ↦ x_n`` into a space model.

    Subclasses provide :meth:`features`, an array with one row per index
    (coordinates, functional values or key values, depending on the space).
    Distances default to differences of feature rows; sequences with closed
    forms in large truncations override them.
    """

    space = SCALAR
    bound = None

    def features(self, ns):
        raise NotImplementedError

    @property
    def labels(self):
        return tuple(self.space.labels)

    def _chunks(self, ns):
        width = max(1, self.feature_width())
        step = max(1, CHUNK_CELLS // width)
        for i in range(0, len(ns), step):
            yield ns[i : i + step]

    def feature_width(self):
        return len(self.space.labels) if isinstance(self.space, (SeminormFamily, SparseProduct)) else self.space.dim

    def dist_to_point(self, ns, a):
        """``p(x_n - a)`` for each index and seminorm, shape ``(len(ns), P)``."""
        ns = np.asarray(ns, dtype=np.int64)
        row = self.space.point_features(a)
        out = [self.space.diff_seminorms(self.features(c) - row) for c in self._chunks(ns)]
        return np.vstack(out) if out else np.zeros((0, len(self.labels)))

    def pair_dist(self, ns, m):
        """``p(x_n - x_m)`` for a fixed anchor ``m``."""
        ns = np.asarray(ns, dtype=np.int64)
        row = self.features(np.array([m], dtype=np.int64))[0]
        out = [self.space.diff_seminorms(self.features(c) - row) for c in self._chunks(ns)]
        return np.vstack(out) if out else np.zeros((0, len(self.labels)))

    def tail_diameters(self, ns, starts):
        """Lower and upper bounds on ``diam {x_n : n ∈ ns[s:]}`` for each start offset ``s``.

        Exact for coordinatewise seminorms and for the sup norm; for other
        norms the bounds are ``max_n p(x_n - x_s)`` and twice that.
        """
        ns = np.asarray(ns, dtype=np.int64)
        P = len(self.labels)
        lo = np.zeros((len(starts), P))
        hi = np.zeros((len(starts), P))
        exact = self.space.coordinatewise or isinstance(self.space, NormedLinf)
        if exact and self.feature_width() * len(ns) <= 64 * CHUNK_CELLS:
            X = self.features(ns)
            smax = np.maximum.accumulate(X[::-1], axis=0)[::-1]
            smin = np.minimum.accumulate(X[::-1], axis=0)[::-1]
            for i, s in enumerate(starts):
                rng = (smax[s] - smin[s])[None, :]
                lo[i] = hi[i] = self.space.diff_seminorms(rng)[0]
            return lo, hi
        for i, s in enumerate(starts):
            d = self.pair_dist(ns[s:], int(ns[s])).max(axis=0)
            lo[i], hi[i] = d, 2 * d
        return lo, hi

    def value(self, n):
        """``x_n`` as a feature row (convenience for reports)."""
        return self.features(np.array([n], dtype=np.int64))[0]

    def __str__(self):
        raise NotImplementedError


def _space_feature_of(space, v):
    return space.point_features(v)


@dataclass(frozen=True, eq=False)
class ScalarSeq(SequenceSpec):
    """``x_n = expr(n)`` in the scalar space."""

    expr: Expression

    space = SCALAR

    def features(self, ns):
        return self.expr(np.asarray(ns, dtype=float))[:, None]

    def __str__(self):
        return f"scalar({self.expr.text})"


@dataclass(frozen=True, eq=False)
class ConstSeq(SequenceSpec):
    v: Vector
    space: object = SCALAR

    def features(self, ns):
        row = _space_feature_of(self.space, self.v)
        return np.broadcast_to(row, (len(ns), len(row))).copy()

    def __str__(self):
        return f"const({_fmt_vec(self.v)})"


@dataclass(frozen=True, eq=False)
class ScaledSeq(SequenceSpec):
    """``x_n = s_n · v`` for a scalar sequence ``s``."""

    scalar: SequenceSpec
    v: Vector
    space: object = SCALAR

    def features(self, ns):
        s = self.scalar.features(ns)[:, 0]
        return s[:, None] * _space_feature_of(self.space, self.v)[None, :]

    def __str__(self):
        return f"scaled({self.scalar},{_fmt_vec(self.v)})"


@dataclass(frozen=True, eq=False)
class PerturbedSeq(SequenceSpec):
    """``x_n = spike`` for ``n`` in the exceptional set, ``base_n`` otherwise."""

    base: SequenceSpec
    exceptional: object
    spike: Vector

    @property
    def space(self):
        return self.base.space

    def features(self, ns):
        ns = np.asarray(ns, dtype=np.int64)
        X = self.base.features(ns)
        mask = self.exceptional.contains(ns)
        if mask.any():
            X[mask] = _space_feature_of(self.space, self.spike)
        return X

    def __str__(self):
        return f"perturbed({self.base},{self.exceptional},{_fmt_vec(self.spike)})"


@dataclass(frozen=True, eq=False)
class SumSeq(SequenceSpec):
    left: SequenceSpec
    right: SequenceSpec

    @property
    def space(self):
        return self.left.space

    def features(self, ns):
        return self.left.features(ns) + self.right.features(ns)

    def __str__(self):
        return f"sum({self.left},{self.right})"


@dataclass(frozen=True, eq=False)
class BasisSeq(SequenceSpec):
    """``x_n = e_n``."""

    space: object = NormedL1(10**4)

    def features(self, ns):
        ns = np.asarray(ns, dtype=np.int64)
        sp = self.space
        if isinstance(sp, SeminormFamily):
            return sp.functional_coords(ns)
        if isinstance(sp, (NormedL1, NormedLinf)):
            _check_dim(ns, sp.dim)
            X = np.zeros((len(ns), sp.dim))
            X[np.arange(len(ns)), ns - 1] = 1.0
            return X
        raise DimensionMismatchError(f"basis_seq is not defined in {sp}")

    def dist_to_point(self, ns, a):
        sp = self.space
        if not isinstance(sp, (NormedL1, NormedLinf)):
            return super().dist_to_point(ns, a)
        ns = np.asarray(ns, dtype=np.int64)
        _check_dim(ns, sp.dim)
        av = a.dense(sp.dim)
        an = av[ns - 1]
        if isinstance(sp, NormedL1):
            return (np.abs(av).sum() - np.abs(an) + np.abs(1 - an))[:, None]
        # sup over k != n of |a_k|, via the two largest entries
        absA = np.abs(av)
        order = np.argsort(absA)[::-1]
        top1, top2 = absA[order[0]], absA[order[1]] if len(absA) > 1 else 0.0
        other = np.where(ns - 1 == order[0], top2, top1)
        return np.maximum(other, np.abs(1 - an))[:, None]

    def pair_dist(self, ns, m):
        sp = self.space
        if not isinstance(sp, (NormedL1, NormedLinf)):
            return super().pair_dist(ns, m)
        ns = np.asarray(ns, dtype=np.int64)
        _check_dim(ns, sp.dim)
        step = 2.0 if isinstance(sp, NormedL1) else 1.0
        return (step * (ns != m))[:, None]

    def tail_diameters(self, ns, starts):
        sp = self.space
        if not isinstance(sp, (NormedL1, NormedLinf)):
            return super().tail_diameters(ns, starts)
        ns = np.asarray(ns, dtype=np.int64)
        _check_dim(ns, sp.dim)
        step = 2.0 if isinstance(sp, NormedL1) else 1.0
        d = np.array([[step if len(np.unique(ns[s:])) > 1 else 0.0] for s in starts])
        return d, d.copy()

    def feature_width(self):
        return len(self.space.labels) if isinstance(self.space, SeminormFamily) else self.space.dim

    def __str__(self):
        return "basis_seq"


@dataclass(frozen=True, eq=False)
class CesaroBasisSeq(SequenceSpec):
    """``x_n = (1/n) Σ_{k<=n} e_k``."""

    space: object = NormedL1(10**4)

    def features(self, ns):
        ns = np.asarray(ns, dtype=np.int64)
        sp = self.space
        if isinstance(sp, SeminormFamily):
            top = int(ns.max()) if ns.size else 0
            cum = np.cumsum(sp.functional_coords(np.arange(1, top + 1)), axis=0)
            return cum[ns - 1] / ns[:, None]
        if isinstance(sp, (NormedL1, NormedLinf)):
            _check_dim(ns, sp.dim)
            k = np.arange(1, sp.dim + 1)
            return (k[None, :] <= ns[:, None]) / ns[:, None].astype(float)
        raise DimensionMismatchError(f"cesaro_basis_seq is not defined in {sp}")

    def dist_to_point(self, ns, a):
        sp = self.space
        if isinstance(sp, (NormedL1, NormedLinf)):
            ns = np.asarray(ns, dtype=np.int64)
            _check_dim(ns, sp.dim)
            av = a.dense(sp.dim)
            if not av.any():
                # ‖c_n‖₁ = 1 and ‖c_n‖∞ = 1/n
                return (np.ones(len(ns)) if isinstance(sp, NormedL1) else 1.0 / ns)[:, None]
        return super().dist_to_point(ns, a)

    def pair_dist(self, ns, m):
        sp = self.space
        if not isinstance(sp, (NormedL1, NormedLinf)):
            return super().pair_dist(ns, m)
        ns = np.asarray(ns, dtype=np.int64).astype(float)
        lo, hi = np.minimum(ns, m), np.maximum(ns, m)
        if isinstance(sp, NormedL1):
            return (2 * (hi - lo) / hi)[:, None]
        return np.where(hi > lo, np.maximum(1 / lo - 1 / hi, 1 / hi), 0.0)[:, None]

    def tail_diameters(self, ns, starts):
        sp = self.space
        if not isinstance(sp, (NormedL1, NormedLinf)):
            return super().tail_diameters(ns, starts)
        ns = np.asarray(ns, dtype=np.int64)
        out = []
        for s in starts:
            tail = ns[s:]
            a, b = float(tail.min()), float(tail.max())
            if a == b:
                out.append([0.0])
            elif isinstance(sp, NormedL1):
                out.append([2 * (b - a) / b])
            else:
                second = float(np.unique(tail)[1])
                out.append([max(1 / a - 1 / b, 1 / second)])
        d = np.array(out)
        return d, d.copy()

    def feature_width(self):
        return len(self.space.labels) if isinstance(self.space, SeminormFamily) else self.space.dim

    def __str__(self):
        return "cesaro_basis_seq"


@dataclass(frozen=True, eq=False)
class CesaroSeq(SequenceSpec):
    """``y_n = (1/n) Σ_{k<=n} x_k`` by a running sum."""

    inner: SequenceSpec

    @property
    def space(self):
        return self.inner.space

    def features(self, ns):
        ns = np.asarray(ns, dtype=np.int64)
        top = int(ns.max()) if ns.size else 0
        cum = np.cumsum(self.inner.features(np.arange(1, top + 1, dtype=np.int64)), axis=0)
        return cum[ns - 1] / ns[:, None]

    def __str__(self):
        return f"cesaro({self.inner})"


@dataclass(frozen=True, eq=False)
class ComposedSeq(SequenceSpec):
    """``y_n = x_{g(n)}``."""

    inner: SequenceSpec
    g: object

    @property
    def space(self):
        return self.inner.space

    def features(self, ns):
        return self.inner.features(self.g(np.asarray(ns, dtype=np.int64)))

    def dist_to_point(self, ns, a):
        return self.inner.dist_to_point(self.g(np.asarray(ns, dtype=np.int64)), a)

    def pair_dist(self, ns, m):
        return self.inner.pair_dist(self.g(np.asarray(ns, dtype=np.int64)), int(self.g(m)))

    def tail_diameters(self, ns, starts):
        return self.inner.tail_diameters(self.g(np.asarray(ns, dtype=np.int64)), starts)

    def feature_width(self):
        return self.inner.feature_width()

    def __str__(self):
        return f"compose({self.inner},{self.g})"


@dataclass(frozen=True, eq=False)
class CoordinateSeq(SequenceSpec):
    """The scalar sequence ``n ↦ x_n(key)``: a sparse key, a functional label or a 1-based coordinate."""

    inner: SequenceSpec
    key: str

    space = SCALAR

    def features(self, ns):
        sp = self.inner.space
        if isinstance(sp, (SparseProduct, SeminormFamily)):
            col = sp.labels.index(self.key)
        else:
            col = int(self.key) - 1
        return self.inner.features(ns)[:, col : col + 1]

    def __str__(self):
        return f"coord({self.inner},{self.key})"


@dataclass(frozen=True, eq=False)
class FunctionalSeq(SequenceSpec):
    """The scalar sequence ``n ↦ y_n`` of a functional's coordinates, i.e. ``⟨e_n, y⟩``."""

    y: object

    space = SCALAR

    def features(self, ns):
        return self.y.coords(np.asarray(ns, dtype=np.int64))[:, None]

    def __str__(self):
        return f"values({self.y.label})"


@dataclass(frozen=True, eq=False)
class PointSeq(SequenceSpec):
    """A finite list of points; indices past the end repeat the last point."""

    points: np.ndarray
    space: object = None

    def features(self, ns):
        ns = np.asarray(ns, dtype=np.int64)
        idx = np.minimum(ns, len(self.points)) - 1
        return self.points[idx]

    def __str__(self):
        return f"points({len(self.points)})"


def _check_dim(ns, dim):
    if ns.size and int(ns.max()) > dim:
        raise DimensionMismatchError(f"index {int(ns.max())} exceeds truncation dimension {dim}")


def _fmt_vec(v):
    data = v.to_jsonable()
    if isinstance(data, list) and len(data) == 1:
        return _dsl.fmt_number(data[0])
    if isinstance(data, list) and len(data) > 8:
        return f"vector(dim={len(data)})"
    return str(data).replace(" ", "")


def coordinate(seq, key):
    return CoordinateSeq(seq, str(key))


def cesaro(x):
    """Cesàro means of ``x``; the means of ``basis_seq`` are ``cesaro_basis_seq``."""
    if isinstance(x, BasisSeq):
        return CesaroBasisSeq(x.space)
    return CesaroSeq(x)


def compose_with_index_map(x, g):
    """``y_n = x_{g(n)}``; repeated compositions collapse into one map."""
    if g == IDENTITY:
        return x
    if isinstance(x, ComposedSeq):
        return ComposedSeq(x.inner, compose_maps(x.g, g))
    return ComposedSeq(x, g)


# ---------------------------------------------------------------------------
# evaluation helpers


def observed_indices(F, horizon):
    """Sequence indices inspected for filter ``F``: ``g(1..horizon)`` for ``F = g[F0]``."""
    g, _ = pullback(F)
    return g(np.arange(1, int(horizon) + 1, dtype=np.int64))


def _prepare(F, horizon, eps_grid):
    eps = tuple(float(e) for e in (eps_grid or DEFAULT_EPS))
    if not eps or min(eps) <= 0:
        raise ValueError("eps_grid must be positive")
    eps = tuple(sorted(eps, reverse=True))
    horizon = int(horizon or DEFAULT_HORIZON)
    g, F0 = pullback(F)
    if isinstance(F0, FStatistical) and horizon < DENSITY_MIN_HORIZON:
        raise ValueError(f"density filters need horizon >= {DENSITY_MIN_HORIZON}")
    return eps, horizon, g, F0


def _observed(mask, label, F0=None):
    """Wrap an index mask over ``1..len(mask)`` as a set.

    For density filters the first ``len(mask) // 1024`` indices are marked as
    members: changing finitely many indices never moves an f-density, and it
    keeps the head of a slowly converging sequence out of the estimate.
    """
    if isinstance(F0, FStatistical):
        trim = len(mask) // 1024
        if trim and not mask[:trim].all():
            mask = mask.copy()
            mask[:trim] = True
    return ObservedSet(np.arange(1, len(mask) + 1, dtype=np.int64), mask, label)


def _schedule(horizon, head, ratio, limit=None):
    limit = limit or horizon
    pts = list(range(1, min(head, limit) + 1))
    v = float(max(head, 1))
    while v * ratio <= limit:
        v *= ratio
        pts.append(int(v))
    if pts[-1] != limit:
        pts.append(limit)
    return sorted(set(pts))


def _neighborhood_report(labels, eps, horizon, F):
    return {"seminorms": list(labels), "eps_grid": list(eps), "horizon": horizon, "filter": str(F)}


# ---------------------------------------------------------------------------
# checks


def f_limit_check(x, candidate, F, eps_grid=None, horizon=None):
    """Does ``{n : p(x_n - candidate) <= ε}`` belong to ``F`` for every tested ``(p, ε)``?"""
    eps, horizon, g, F0 = _prepare(F, horizon, eps_grid)
    idx = g(np.arange(1, horizon + 1, dtype=np.int64))
    D = x.dist_to_point(idx, candidate)
    checks, outcomes = [], []
    for j, label in enumerate(x.labels):
        for e in eps:
            good = D[:, j] <= e
            v = F0.member(_observed(good, f"p_{label}(x-a)<={e:g}", F0), horizon)
            bad = np.flatnonzero(~good)
            checks.append(
                {
                    "seminorm": label,
                    "eps": e,
                    "outcome": v.outcome,
                    "exceptional_count": int(bad.size),
                    "first_exceptional": [int(i) + 1 for i in bad[:5]],
                    "evidence": v.diagnostics.get("reason") or v.diagnostics.get("estimate"),
                }
            )
            outcomes.append(v)
    diag = _neighborhood_report(x.labels, eps, horizon, F)
    diag.update({"sequence": str(x), "candidate": candidate.to_jsonable(), "checks": checks})
    return Verdict(conjunction(outcomes), diag)


def cluster_point_check(x, candidate, F, eps_grid=None, horizon=None):
    """Is ``{n : p(x_n - candidate) <= ε}`` F-stationary for every tested ``(p, ε)``?"""
    eps, horizon, g, F0 = _prepare(F, horizon, eps_grid)
    idx = g(np.arange(1, horizon + 1, dtype=np.int64))
    D = x.dist_to_point(idx, candidate)
    checks, outcomes = [], []
    for j, label in enumerate(x.labels):
        for e in eps:
            near = D[:, j] <= e
            v = F0.is_stationary(_observed(near, f"p_{label}(x-a)<={e:g}"), horizon)
            checks.append({"seminorm": label, "eps": e, "outcome": v.outcome, "near_count": int(near.sum())})
            outcomes.append(v)
    diag = _neighborhood_report(x.labels, eps, horizon, F)
    diag.update({"sequence": str(x), "candidate": candidate.to_jsonable(), "checks": checks})
    return Verdict(conjunction(outcomes), diag)


def f_cauchy_check(x, F, eps_grid=None, horizon=None):
    """Search a Cauchy witness for each tested ``(p, ε)``; holds when every pair has one."""
    eps, horizon, g, F0 = _prepare(F, horizon, eps_grid)
    idx = g(np.arange(1, horizon + 1, dtype=np.int64))
    if isinstance(F0, Frechet):
        checks = _cauchy_tails(x, idx, eps)
    elif isinstance(F0, FStatistical):
        checks = _cauchy_anchors(x, idx, eps, F0, horizon)
    elif isinstance(F0, BaseGenerated):
        checks = _cauchy_base(x, idx, eps, F0, horizon)
    else:
        raise TypeError(f"no Cauchy search for filter {F0}")
    diag = _neighborhood_report(x.labels, eps, horizon, F)
    diag.update({"sequence": str(x), "checks": checks})
    return Verdict(conjunction(Verdict(c["outcome"]) for c in checks), diag)


def _cauchy_tails(x, idx, eps):
    # tails [N, horizon] for N up to horizon/2
    h = len(idx)
    starts = [s - 1 for s in _schedule(h // 2, 1, TAIL_RATIO)]
    lo, hi = x.tail_diameters(idx, starts)
    checks = []
    for j, label in enumerate(x.labels):
        for e in eps:
            ok = np.flatnonzero(hi[:, j] <= e)
            if ok.size:
                s = starts[int(ok[0])]
                checks.append({"seminorm": label, "eps": e, "outcome": HOLDS, "tail_start": s + 1, "diameter_upper": float(hi[ok[0], j])})
            elif np.all(lo[:, j] > e):
                checks.append({"seminorm": label, "eps": e, "outcome": FAILS, "min_diameter_lower": float(lo[:, j].min()), "last_tail_start": starts[-1] + 1})
            else:
                checks.append({"seminorm": label, "eps": e, "outcome": INCONCLUSIVE, "min_diameter_upper": float(hi[:, j].min())})
    return checks


def _cauchy_anchors(x, idx, eps, F0, horizon):
    h = len(idx)
    anchors = _schedule(h, ANCHOR_HEAD, ANCHOR_RATIO)
    X = None
    if x.space.coordinatewise and x.feature_width() * h <= FEATURE_CACHE_CELLS:
        X = x.features(idx)
    # An exceptional set holding more than 8*tol*h indices of (h/2, h] has
    # f(count(h))/f(h) > tol*8/(1+8*tol) by subadditivity, so its density
    # estimate cannot converge below tol: such anchors are skipped during
    # the search and only evaluated when no anchor succeeds.
    crowded = 8 * F0.tolerance * h
    checks = []
    for j, label in enumerate(x.labels):
        cache = {}
        known_fail = set()
        failed_at = None
        start = 0

        def distances(m):
            if m not in cache:
                cache.clear()
                if X is not None:
                    cache[m] = np.abs(X[:, j] - X[m - 1, j])
                else:
                    cache[m] = x.pair_dist(idx, int(idx[m - 1]))[:, j]
            return cache[m]

        tail_sorted = np.sort(X[h // 2 :, j]) if X is not None else None

        def crowd(m, e):
            if tail_sorted is None:
                return int((distances(m)[h // 2 :] > e).sum())
            c = X[m - 1, j]
            inside = np.searchsorted(tail_sorted, c + e, "right") - np.searchsorted(tail_sorted, c - e, "left")
            return len(tail_sorted) - int(inside)

        def verdict(m, e):
            good = distances(m) <= e
            return F0.member(_observed(good, f"p_{label}(x-x_{m})<={e:g}", F0), horizon), int((~good).sum())

        for e in eps:
            if failed_at is not None:
                # smaller ε only shrinks every candidate good set
                checks.append({"seminorm": label, "eps": e, "outcome": FAILS, "implied_by_eps": failed_at})
                continue
            found, states, deferred = None, {}, []
            for a_pos in range(start, len(anchors)):
                m = anchors[a_pos]
                if crowd(m, e) > crowded:
                    deferred.append(m)
                    continue
                v, n_bad = verdict(m, e)
                states[m] = v.outcome
                if v.holds:
                    found = (a_pos, m, n_bad)
                    break
            if found:
                start = found[0]
                checks.append({"seminorm": label, "eps": e, "outcome": HOLDS, "anchor": found[1], "exceptional_count": found[2]})
                continue
            for m in deferred:
                states[m] = verdict(m, e)[0].outcome
            earlier = set(anchors[:start])
            if earlier <= known_fail and all(o == FAILS for o in states.values()):
                failed_at = e
                checks.append({"seminorm": label, "eps": e, "outcome": FAILS, "anchors_tried": len(anchors)})
            else:
                checks.append({"seminorm": label, "eps": e, "outcome": INCONCLUSIVE, "anchors_tried": len(states)})
            known_fail |= {m for m, o in states.items() if o == FAILS}
            start = len(anchors)
    return checks


def _cauchy_base(x, idx, eps, F0, horizon):
    h = len(idx)
    diams = []
    for B in F0.base:
        pos = B.elements(min(h, B.cap)) - 1
        pos = pos[pos < h]
        if pos.size == 0:
            diams.append((str(B), None, None))
            continue
        lo, hi = x.tail_diameters(idx[pos], [0])
        diams.append((str(B), lo[0], hi[0]))
    checks = []
    for j, label in enumerate(x.labels):
        for e in eps:
            ok = [name for name, lo, hi in diams if hi is not None and hi[j] <= e]
            if ok:
                checks.append({"seminorm": label, "eps": e, "outcome": HOLDS, "base_element": ok[0]})
            elif all(lo is not None and lo[j] > e for _, lo, _ in diams):
                checks.append({"seminorm": label, "eps": e, "outcome": FAILS, "diameters": [float(lo[j]) for _, lo, _ in diams]})
            else:
                checks.append({"seminorm": label, "eps": e, "outcome": INCONCLUSIVE})
    return checks


def cluster_implies_limit_audit(x, candidate, F, eps_grid=None, horizon=None):
    """A cluster point of a Cauchy sequence must be its limit; audit that at tolerance.

    Raises
    ------
    AuditSkipped
        If the Cauchy or the cluster-point check does not hold.
    """
    cauchy = f_cauchy_check(x, F, eps_grid, horizon)
    cluster = cluster_point_check(x, candidate, F, eps_grid, horizon)
    if not (cauchy.holds and cluster.holds):
        raise AuditSkipped(
            "preconditions not met", {"cauchy": cauchy.outcome, "cluster_point": cluster.outcome}
        )
    limit = f_limit_check(x, candidate, F, eps_grid, horizon)
    diag = {"cauchy": cauchy.to_dict(), "cluster_point": cluster.to_dict(), "limit": limit.to_dict()}
    if limit.fails:
        diag["audit_failure"] = "cluster point of a Cauchy sequence is not a limit at these tolerances"
    return Verdict(limit.outcome, diag)


def sup_seminorms(x, horizon):
    """``max_{n <= horizon} p(x_n)`` per seminorm."""
    idx = np.arange(1, int(horizon) + 1, dtype=np.int64)
    zero = zero_vector(x.space)
    return x.dist_to_point(idx, zero).max(axis=0)


def verify_bound(x, C, horizon, samples=2000, seed=0):
    """Check ``p(x_n) <= C`` on the first ``samples`` indices plus seeded random ones below ``horizon``."""
    rng = np.random.default_rng(seed)
    head = np.arange(1, min(samples, horizon) + 1)
    rand = rng.integers(1, horizon + 1, size=samples)
    idx = np.unique(np.concatenate([head, rand])).astype(np.int64)
    vals = x.dist_to_point(idx, zero_vector(x.space))
    worst = float(vals.max())
    at = int(idx[np.unravel_index(np.argmax(vals), vals.shape)[0]])
    diag = {"bound": C, "max_seen": worst, "at_index": at, "sampled": int(idx.size)}
    return Verdict(HOLDS if worst <= C + 1e-9 else FAILS, diag)


def zero_vector(space):
    if isinstance(space, SparseProduct):
        return Vector({})
    if isinstance(space, SeminormFamily):
        return Vector(np.zeros(space.dim))
    return Vector(np.zeros(space.dim))


# ---------------------------------------------------------------------------
# composition identity

# (sequence, space, index map, filter): checking ``x∘g`` along F and ``x``
# along ``g[F]`` must give the same verdicts
COMPOSITION_SUITE = (
    ("perturbed(0, squares, 1)", "scalar", "square", "frechet"),
    ("perturbed(0, squares, 1)", "scalar", "affine(2,0)", "stat"),
    ("scalar((-1)**n)", "scalar", "affine(2,0)", "frechet"),
    ("scalar((-1)**n)", "scalar", "identity", "frechet"),
    ("basis_seq", "l1(200000)", "affine(2,0)", "frechet"),
    ("scalar(1/n)", "scalar", "square", "stat"),
    ("scalar(sin(n))", "scalar", "const(3)", "frechet"),
    ("cesaro(scalar((-1)**n))", "scalar", "affine(3,1)", "fstat(log1p)"),
)


def composition_pair(seq, space, g, F, eps_grid=None, horizon=None):
    """Cauchy verdicts of ``x∘g`` along ``F`` and of ``x`` along ``g[F]``, from DSL text."""
    from .filters import image_filter, parse_filter
    from .maps import parse_map
    from .spaces import parse_space

    x = parse_sequence(seq, parse_space(space))
    g, F = parse_map(g), parse_filter(F)
    return (
        f_cauchy_check(compose_with_index_map(x, g), F, eps_grid, horizon),
        f_cauchy_check(x, image_filter(g, F), eps_grid, horizon),
    )


# ---------------------------------------------------------------------------
# Cauchy sequences from nested sets


@dataclass(frozen=True, eq=False)
class Ball:
    center: np.ndarray
    radius: float

    def contains(self, p, norm, tol=1e-12):
        return _norm(np.asarray(p) - self.center, norm) <= self.radius + tol

    def diameter(self, norm):
        return 2.0 * self.radius

    def sample(self, rng, k, norm):
        d = len(self.center)
        u = rng.normal(size=(k, d))
        u /= np.maximum(_norm_rows(u, norm), 1e-300)[:, None]
        r = self.radius * rng.random(k) ** (1.0 / d)
        return self.center + u * r[:, None]

    def point(self):
        return np.array(self.center, dtype=float)

    def project(self, p):
        off = p - self.center
        n = np.linalg.norm(off)
        return p if n <= self.radius else self.center + off * (self.radius / n)

    def inside_ball(self, c, r, norm):
        return _norm(self.center - c, norm) + self.radius <= r + 1e-12

    def to_jsonable(self):
        return {"ball": {"center": [float(v) for v in self.center], "radius": float(self.radius)}}


@dataclass(frozen=True, eq=False)
class Box:
    lows: np.ndarray
    highs: np.ndarray

    def contains(self, p, norm=None, tol=1e-12):
        p = np.asarray(p)
        return bool(np.all(p >= self.lows - tol) and np.all(p <= self.highs + tol))

    def diameter(self, norm):
        return _norm(np.asarray(self.highs) - np.asarray(self.lows), norm)

    def sample(self, rng, k, norm):
        return self.lows + (self.highs - self.lows) * rng.random((k, len(self.lows)))

    def point(self):
        return (np.asarray(self.lows, dtype=float) + np.asarray(self.highs, dtype=float)) / 2

    def project(self, p):
        return np.clip(p, self.lows, self.highs)

    def inside_ball(self, c, r, norm):
        far = np.where(np.abs(self.lows - c) > np.abs(self.highs - c), self.lows, self.highs)
        return _norm(far - c, norm) <= r + 1e-12

    def to_jsonable(self):
        return {"box": {"lows": [float(v) for v in self.lows], "highs": [float(v) for v in self.highs]}}


def ball(center, radius):
    return Ball(np.asarray(center, dtype=float), float(radius))


def box(lows, highs):
    lows, highs = np.asarray(lows, dtype=float), np.asarray(highs, dtype=float)
    return Box(lows, highs)


def _norm(v, norm):
    v = np.abs(np.asarray(v, dtype=float))
    if norm == "l1":
        return float(v.sum())
    if norm == "linf":
        return float(v.max()) if v.size else 0.0
    return float(np.sqrt((v * v).sum()))


def _norm_rows(V, norm):
    A = np.abs(V)
    if norm == "l1":
        return A.sum(axis=1)
    if norm == "linf":
        return A.max(axis=1)
    return np.sqrt((A * A).sum(axis=1))


def halving_schedule(n):
    """Neighborhood radii ``r_k = 2**(1-k)``, i.e. sets of diameter at most ``2**(1-k)``."""
    return [2.0 ** (1 - k) for k in range(1, n + 1)]


@dataclass
class Extraction:
    points: np.ndarray
    limit: np.ndarray
    audit: Verdict
    diameters: list = field(default_factory=list)

    @property
    def sequence(self):
        return PointSeq(self.points, NormedLinf(self.points.shape[1]))

    def to_dict(self):
        return {
            "points": self.points.tolist(),
            "limit": self.limit.tolist(),
            "audit": self.audit.to_dict(),
            "diameters": self.diameters,
        }


def _select(regions, n, norm, selector, rng, iters=200):
    last = regions[n - 1]
    if selector == "center":
        p = last.point()
    elif selector == "random":
        p = last.sample(rng, 1, norm)[0]
    else:
        p = np.asarray(selector(regions[:n]), dtype=float)
    if all(r.contains(p, norm) for r in regions[:n]):
        return p
    # alternating projections (Euclidean) onto the convex regions
    for _ in range(iters):
        for r in regions[:n]:
            p = r.project(p)
        if all(r.contains(p, norm, 1e-9) for r in regions[:n]):
            return p
    return None


def extract_cauchy_from_base(regions, schedule=None, selector="center", norm="l2", eps_grid=None, seed=0, samples=64):
    """Build ``x_n ∈ A_1 ∩ ... ∩ A_n`` from a nested base and audit it.

    ``regions`` are :class:`Ball` / :class:`Box` sets ``A_1, A_2, ...`` in a
    finite-dimensional normed model; ``schedule`` gives the neighborhood
    radii ``r_k`` (default ``2**(1-k)``) that must bound ``diam A_k``.  The
    audit checks ``‖x_n - x_m‖ <= r_N`` for all ``n, m >= N`` and that every
    ball ``B(limit, ε)`` on the ε-grid contains some ``A_k``.

    Raises
    ------
    NotCauchyFilterError
        If some ``diam A_k`` exceeds ``r_k``; diagnostics carry both the exact
        and the sampled diameters.
    BaseNotFilterError
        If no point of ``A_1 ∩ ... ∩ A_n`` can be selected.
    """
    regions = list(regions)
    n = len(regions)
    schedule = list(schedule or halving_schedule(n))
    if len(schedule) < n:
        raise ValueError("schedule shorter than the list of base elements")
    rng = np.random.default_rng(seed)
    diameters = []
    for k, (A, r) in enumerate(zip(regions, schedule), start=1):
        exact = A.diameter(norm)
        S = A.sample(rng, samples, norm)
        sampled = float(max(_norm(a - b, norm) for a in S[:16] for b in S)) if samples else 0.0
        diameters.append({"k": k, "exact": exact, "sampled": sampled, "radius": r})
        if exact > r + 1e-12:
            raise NotCauchyFilterError(
                f"diam A_{k} = {exact:.6g} exceeds the neighborhood radius {r:.6g}",
                {"diameter_check": diameters, "first_violation": k},
            )
    points = []
    for k in range(1, n + 1):
        p = _select(regions, k, norm, selector, rng)
        if p is None:
            raise BaseNotFilterError(f"A_1 ∩ ... ∩ A_{k} appears empty", {"k": k})
        points.append(p)
    X = np.vstack(points)
    limit = X[-1]
    # Cauchy audit: for n, m >= N, ‖x_n - x_m‖ <= r_N
    worst = []
    for N in range(1, n + 1):
        tail = X[N - 1 :]
        spread = max(_norm(a - b, norm) for a in tail for b in tail[:: max(1, len(tail) // 32)])
        worst.append(spread)
    violations = [N for N in range(1, n + 1) if worst[N - 1] > schedule[N - 1] + 1e-12]
    eps = tuple(sorted(eps_grid or DEFAULT_EPS, reverse=True))
    nbhd = []
    for e in eps:
        k = next((k for k, A in enumerate(regions, start=1) if A.inside_ball(limit, e, norm)), None)
        nbhd.append({"eps": e, "contained_base_element": k})
    limit_ok = all(row["contained_base_element"] is not None for row in nbhd)
    outcome = HOLDS if not violations and limit_ok else FAILS
    diag = {
        "cauchy_violations": violations,
        "tail_spread": worst,
        "neighborhoods": nbhd,
        "norm": norm,
        "selector": selector if isinstance(selector, str) else "custom",
    }
    return Extraction(X, limit, Verdict(outcome, diag), diameters)


# ---------------------------------------------------------------------------
# DSL


def parse_sequence(text, space=SCALAR):
    """Sequence DSL: ``scalar(expr)``, ``const(v)``, ``perturbed(base, set, spike)``,
    ``basis_seq``, ``cesaro_basis_seq``, ``cesaro(seq)``, ``compose(seq, map)``,
    ``scaled(seq, v)``, ``sum(seq, seq)``."""
    return sequence_from_node(_dsl.parse(text), space)


def _value(node, space):
    if isinstance(node, (int, float)) and float(node) == 0.0 and space is not SCALAR:
        return zero_vector(space)
    dim = getattr(space, "dim", 1)
    return vector_from_node(node, dim)


def sequence_from_node(node, space=SCALAR):
    if isinstance(node, SequenceSpec):
        return node
    if isinstance(node, _dsl.Raw):
        return ScalarSeq(Expression(node.text, var="n"))
    if isinstance(node, (int, float, list, dict)):
        return ConstSeq(_value(node, space), space)
    if not isinstance(node, _dsl.Call):
        raise DSLParseError(f"expected a sequence, got {node!r}")
    name, args = node.name, node.args
    if name == "scalar":
        (arg,) = args
        text = _call_text(arg)
        return ScalarSeq(Expression(text, var="n"))
    if name == "const":
        (v,) = args
        return ConstSeq(_value(v, space), space)
    if name == "perturbed":
        base, exc, spike = args
        base_seq = sequence_from_node(base, space) if isinstance(base, (_dsl.Call, _dsl.Raw)) and not _is_vector_call(base) else ConstSeq(_value(base, space), space)
        return PerturbedSeq(base_seq, set_from_node(exc), _value(spike, base_seq.space))
    if name == "basis_seq" and not args:
        return BasisSeq(space)
    if name == "cesaro_basis_seq" and not args:
        return CesaroBasisSeq(space)
    if name == "cesaro":
        (inner,) = args
        return cesaro(sequence_from_node(inner, space))
    if name == "compose":
        inner, g = args
        return compose_with_index_map(sequence_from_node(inner, space), map_from_node(g))
    if name == "scaled":
        s, v = args
        return ScaledSeq(sequence_from_node(s, SCALAR), _value(v, space), space)
    if name == "sum":
        a, b = args
        return SumSeq(sequence_from_node(a, space), sequence_from_node(b, space))
    raise DSLParseError(f"unknown sequence {name!r}")


def _is_vector_call(node):
    return isinstance(node, _dsl.Call) and node.name in ("basis", "ones", "cesaro_basis", "zero", "coords", "alternating", "harmonic")


def _call_text(node):
    if isinstance(node, _dsl.Call):
        if not node.args:
            return node.name
        return node.name + "(" + ",".join(_call_text(a) for a in node.args) + ")"
    if isinstance(node, _dsl.Raw):
        return node.text
    return _dsl.fmt_number(node)

