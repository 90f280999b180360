"""Symbolic subsets of the positive integers, counting, and f-density estimates.

Sets are immutable constructor trees (``ap(1,2)``, ``squares``,
``compl(finite(1,2,3))``, ...).  Every set answers vectorized membership,
enumerates its elements in order, and counts ``|A ∩ [1, n]|``; the count uses
a closed form when the tree admits one and falls back to a chunked
membership scan otherwise.

f-densities are never computed as symbolic limits.  :func:`f_density` samples
the ratio ``f(|A ∩ [1,n]|) / f(n)`` at geometric checkpoints and reports a
tri-state status (converged / oscillating / inconclusive) from the tail of
that curve.
"""

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache, reduce

import numpy as np

from . import _dsl
from .errors import BoundedModulusError, DSLParseError, HorizonExceededError
from .verdict import FAILS, HOLDS, INCONCLUSIVE, Verdict

CLOSED_CAP = 10**9
SCAN_CAP = 10**7
CHUNK = 1 << 20
ELEMENT_TABLE_LIMIT = 10**7

DENSITY_TOL = 1e-3
DENSITY_WINDOW = 0.2
DECAY_DROP = 0.25
CHECKPOINT_RATIO = 1.01
CHECKPOINT_DOUBLINGS = 10
DEFAULT_CLOSED_HORIZON = 10**8
DEFAULT_SCAN_HORIZON = 10**6

_EMPTY = np.zeros(0, dtype=np.int64)


def _as_index_array(arr):
    arr = np.asarray(arr)
    if arr.dtype.kind not in "iu":
        arr = arr.astype(np.int64)
    return arr.astype(np.int64, copy=False)


class NatSet:
    """Base class.  Subclasses are frozen dataclasses, so equality is structural."""

    closed_form = False

    # -- membership -----------------------------------------------------
    def contains(self, arr):
        """Vectorized membership for an integer array of positive indices."""
        raise NotImplementedError

    def __contains__(self, n):
        return bool(self.contains(np.array([n], dtype=np.int64))[0])

    # -- counting -------------------------------------------------------
    @property
    def cap(self):
        return CLOSED_CAP if self.closed_form else SCAN_CAP

    @property
    def default_horizon(self):
        return DEFAULT_CLOSED_HORIZON if self.closed_form else DEFAULT_SCAN_HORIZON

    def count(self, n):
        """``|A ∩ [1, n]|``."""
        return int(self.counts(np.array([n], dtype=np.int64))[0])

    def counts(self, ns):
        ns = _as_index_array(ns)
        if ns.size == 0:
            return ns.copy()
        top = int(ns.max())
        if top > self.cap:
            kind = "closed-form" if self.closed_form else "predicate-only"
            raise HorizonExceededError(f"{self}: horizon {top} exceeds the {kind} cap {self.cap}")
        if self.closed_form:
            return self._closed_counts(np.maximum(ns, 0))
        els = self.elements(top)
        return np.searchsorted(els, ns, side="right").astype(np.int64)

    def _closed_counts(self, ns):
        raise NotImplementedError

    # -- enumeration ----------------------------------------------------
    def elements(self, upto):
        """Sorted array of the elements ``<= upto``."""
        upto = int(upto)
        if upto > SCAN_CAP and not self.closed_form:
            raise HorizonExceededError(f"{self}: cannot scan past {SCAN_CAP}")
        return _scan(self, 1, upto)

    def __iter__(self):
        start = 1
        fin = self.is_finite()
        remaining = self.count(self.cap) if fin and self.closed_form else None
        while True:
            stop = start + CHUNK - 1
            els = _scan(self, start, stop)
            for v in els:
                yield int(v)
            if remaining is not None:
                remaining -= len(els)
                if remaining <= 0:
                    return
            start = stop + 1

    def first(self, k, limit=SCAN_CAP):
        out = []
        for v in self:
            if v > limit or len(out) >= k:
                break
            out.append(v)
        return out

    # -- symbolic structure --------------------------------------------
    def is_finite(self):
        """True/False when decidable from the constructor tree, else None."""
        return None

    def is_cofinite(self):
        return None

    def complement(self):
        return complement(self)

    def __str__(self):
        raise NotImplementedError


def _scan(A, start, stop):
    out = []
    while start <= stop:
        hi = min(stop, start + CHUNK - 1)
        arr = np.arange(start, hi + 1, dtype=np.int64)
        out.append(arr[A.contains(arr)])
        start = hi + 1
    return np.concatenate(out) if out else _EMPTY.copy()


# ---------------------------------------------------------------------------
# concrete sets


@dataclass(frozen=True)
class ArithmeticProgression(NatSet):
    """``{a, a+d, a+2d, ...}``."""

    a: int
    d: int
    closed_form = True

    def __post_init__(self):
        if self.a < 1 or self.d < 1:
            raise ValueError(f"ap({self.a},{self.d}): need a >= 1 and d >= 1")

    def contains(self, arr):
        arr = _as_index_array(arr)
        return (arr >= self.a) & ((arr - self.a) % self.d == 0)

    def _closed_counts(self, ns):
        return np.where(ns < self.a, 0, (ns - self.a) // self.d + 1).astype(np.int64)

    def elements(self, upto):
        return np.arange(self.a, int(upto) + 1, self.d, dtype=np.int64)

    def is_finite(self):
        return False

    def is_cofinite(self):
        return self.d == 1

    def __str__(self):
        if (self.a, self.d) == (2, 2):
            return "evens"
        if (self.a, self.d) == (1, 2):
            return "odds"
        return f"ap({self.a},{self.d})"


@dataclass(frozen=True)
class IndexRange(NatSet):
    """``[lo, hi]``; ``hi=None`` is an unbounded tail."""

    lo: int = 1
    hi: int = None
    closed_form = True

    def __post_init__(self):
        if self.lo < 1 or (self.hi is not None and self.hi < self.lo - 1):
            raise ValueError(f"bad index range [{self.lo}, {self.hi}]")

    def contains(self, arr):
        arr = _as_index_array(arr)
        ok = arr >= self.lo
        if self.hi is not None:
            ok &= arr <= self.hi
        return ok

    def _closed_counts(self, ns):
        top = ns if self.hi is None else np.minimum(ns, self.hi)
        return np.maximum(top - (self.lo - 1), 0).astype(np.int64)

    def elements(self, upto):
        top = int(upto) if self.hi is None else min(int(upto), self.hi)
        return np.arange(self.lo, top + 1, dtype=np.int64)

    def is_finite(self):
        return self.hi is not None

    def is_cofinite(self):
        return self.hi is None

    def __str__(self):
        if self.lo == 1 and self.hi is None:
            return "nat"
        return f"idx({self.lo},{'inf' if self.hi is None else self.hi})"


@dataclass(frozen=True)
class ExplicitFinite(NatSet):
    values: tuple = ()
    closed_form = True

    def __post_init__(self):
        vals = tuple(sorted({int(v) for v in self.values}))
        if vals and vals[0] < 1:
            raise ValueError("finite sets hold positive integers")
        object.__setattr__(self, "values", vals)

    @cached_property
    def _arr(self):
        return np.array(self.values, dtype=np.int64)

    def contains(self, arr):
        return np.isin(_as_index_array(arr), self._arr)

    def _closed_counts(self, ns):
        return np.searchsorted(self._arr, ns, side="right").astype(np.int64)

    def elements(self, upto):
        return self._arr[self._arr <= int(upto)].copy()

    def __iter__(self):
        return iter(self.values)

    def is_finite(self):
        return True

    def is_cofinite(self):
        return False

    def __str__(self):
        return "finite(" + ",".join(str(v) for v in self.values) + ")"


def _poly_eval(coeffs, k):
    out = np.zeros_like(k, dtype=float)
    for c in reversed(coeffs):
        out = out * k + c
    return out


@dataclass(frozen=True)
class PolynomialImage(NatSet):
    """``{p(1), p(2), ...}`` for an integer polynomial with non-negative coefficients.

    ``coeffs`` are listed from the constant term up.  A positive coefficient
    of degree >= 1 makes ``p`` strictly increasing on the positive integers.
    """

    coeffs: tuple
    closed_form = True

    def __post_init__(self):
        cs = tuple(int(c) for c in self.coeffs)
        while len(cs) > 1 and cs[-1] == 0:
            cs = cs[:-1]
        if any(c < 0 for c in cs) or len(cs) < 2 or not any(cs[1:]):
            raise ValueError(f"poly{cs}: need non-negative coefficients and positive degree")
        object.__setattr__(self, "coeffs", cs)

    def value(self, k):
        return sum(c * k**i for i, c in enumerate(self.coeffs))

    def _closed_counts(self, ns):
        ns = np.asarray(ns, dtype=np.int64)
        lo = np.zeros_like(ns)
        hi = np.maximum(ns, 1)
        # invariant: p(lo) <= n (p(0) treated as -inf), p(hi + 1) > n
        while True:
            active = lo < hi
            if not active.any():
                break
            mid = (lo + hi + 1) // 2
            ok = _poly_eval(self.coeffs, mid.astype(float)) <= ns
            lo = np.where(active & ok, mid, lo)
            hi = np.where(active & ~ok, mid - 1, hi)
        # float evaluation can be off by one above 2**53; settle exactly
        lo = np.where((lo > 0) & (self._int_eval(lo) > ns), lo - 1, lo)
        lo = np.where(self._int_eval(lo + 1) <= ns, lo + 1, lo)
        return lo

    def _int_eval(self, k):
        out = np.zeros_like(k, dtype=np.int64)
        for c in reversed(self.coeffs):
            out = out * k + c
        return out

    def elements(self, upto):
        k = int(self._closed_counts(np.array([max(int(upto), 0)], dtype=np.int64))[0])
        return self._int_eval(np.arange(1, k + 1, dtype=np.int64))

    def contains(self, arr):
        arr = _as_index_array(arr)
        if arr.size == 0:
            return np.zeros(0, dtype=bool)
        top = max(int(arr.max()), 1)
        k = int(self._closed_counts(np.array([top], dtype=np.int64))[0])
        if k <= ELEMENT_TABLE_LIMIT:
            els = self._int_eval(np.arange(1, k + 1, dtype=np.int64))
            if k == 0:
                return np.zeros(arr.shape, dtype=bool)
            pos = np.minimum(np.searchsorted(els, arr), k - 1)
            return els[pos] == arr
        k = self._closed_counts(np.maximum(arr, 0))
        return (k > 0) & (self._int_eval(k) == arr)

    def is_finite(self):
        return False

    def is_cofinite(self):
        return len(self.coeffs) == 2 and self.coeffs[1] == 1

    def __str__(self):
        if self.coeffs == (0, 0, 1):
            return "squares"
        if self.coeffs == (0, 0, 0, 1):
            return "cubes"
        return "poly(" + ",".join(str(c) for c in self.coeffs) + ")"


@lru_cache(maxsize=None)
def _powers_table(b):
    out, v = [], 1
    while v <= 4 * 10**18:
        out.append(v)
        v *= b
    return np.array(out, dtype=np.int64)


@dataclass(frozen=True)
class Powers(NatSet):
    """``{1, b, b^2, ...}``."""

    base: int
    closed_form = True

    def __post_init__(self):
        if self.base < 2:
            raise ValueError("powers(b) needs b >= 2")

    def contains(self, arr):
        return np.isin(_as_index_array(arr), _powers_table(self.base))

    def _closed_counts(self, ns):
        return np.searchsorted(_powers_table(self.base), ns, side="right").astype(np.int64)

    def elements(self, upto):
        t = _powers_table(self.base)
        return t[t <= int(upto)].copy()

    def is_finite(self):
        return False

    def is_cofinite(self):
        return False

    def __str__(self):
        return f"powers({self.base})"


@dataclass(frozen=True)
class BlockUnion(NatSet):
    """Union of the blocks ``[b^(2k), b^(2k+1))`` for k >= 0.

    Its natural density does not exist: for ``b = 2`` the counting ratio
    swings between 1/3 and 2/3.
    """

    base: int = 2
    closed_form = True

    def __post_init__(self):
        if self.base < 2:
            raise ValueError("blocks need base >= 2")

    @cached_property
    def _table(self):
        p = _powers_table(self.base)
        starts, ends = p[0::2], p[1::2]
        m = min(len(starts), len(ends))
        starts, ends = starts[:m], ends[:m]
        sizes = ends - starts
        cum = np.concatenate([[0], np.cumsum(sizes)])
        return starts, ends, cum

    def contains(self, arr):
        arr = _as_index_array(arr)
        starts, ends, _ = self._table
        i = np.searchsorted(starts, arr, side="right") - 1
        ok = i >= 0
        return ok & (arr < ends[np.maximum(i, 0)])

    def _closed_counts(self, ns):
        starts, ends, cum = self._table
        i = np.searchsorted(starts, ns, side="right") - 1
        j = np.maximum(i, 0)
        partial = np.minimum(ns, ends[j] - 1) - starts[j] + 1
        return np.where(i < 0, 0, cum[j] + partial).astype(np.int64)

    def is_finite(self):
        return False

    def is_cofinite(self):
        return False

    def __str__(self):
        return f"blocks(pow{self.base})"


@lru_cache(maxsize=8)
def _sieve(n):
    mask = np.ones(n + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, int(n**0.5) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return mask


@dataclass(frozen=True)
class Primes(NatSet):
    """The primes; predicate-only (sieve), so counting is capped at the scan cap."""

    def contains(self, arr):
        arr = _as_index_array(arr)
        if arr.size == 0:
            return np.zeros(0, dtype=bool)
        top = int(arr.max())
        if top > SCAN_CAP:
            raise HorizonExceededError(f"primes: membership beyond {SCAN_CAP}")
        size = 1 << max(10, (top).bit_length())
        return _sieve(min(size, SCAN_CAP))[arr]

    def is_finite(self):
        return False

    def is_cofinite(self):
        return False

    def __str__(self):
        return "primes"


@dataclass(frozen=True)
class Complement(NatSet):
    inner: NatSet

    @property
    def closed_form(self):
        return self.inner.closed_form

    @property
    def cap(self):
        return self.inner.cap

    def contains(self, arr):
        return ~self.inner.contains(arr)

    @property
    def default_horizon(self):
        return self.inner.default_horizon

    def _closed_counts(self, ns):
        return ns - self.inner.counts(ns)

    def is_finite(self):
        return self.inner.is_cofinite()

    def is_cofinite(self):
        return self.inner.is_finite()

    def __str__(self):
        return f"compl({self.inner})"


def complement(A):
    if isinstance(A, Complement):
        return A.inner
    if isinstance(A, ObservedSet):
        return ObservedSet(A.points, ~A.mask, f"not {A.label}")
    return Complement(A)


def _ap_meet(a1, d1, a2, d2):
    """Intersection of two progressions as ``(a, d)`` or ``None`` when empty."""
    g = math.gcd(d1, d2)
    if (a2 - a1) % g:
        return None
    lcm = d1 // g * d2
    m = d2 // g
    t = ((a2 - a1) // g) * pow(d1 // g, -1, m) % m if m > 1 else 0
    x = a1 + d1 * t
    lo = max(a1, a2)
    if x < lo:
        x += -(-(lo - x) // lcm) * lcm
    else:
        x -= ((x - lo) // lcm) * lcm
    return x, lcm


@dataclass(frozen=True)
class Intersection(NatSet):
    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if not self.parts:
            raise ValueError("intersection of nothing")

    def contains(self, arr):
        arr = _as_index_array(arr)
        return reduce(np.logical_and, (p.contains(arr) for p in self.parts))

    @cached_property
    def folded(self):
        """An equivalent AP / IndexRange / finite set when all parts are progressions or ranges."""
        a, d, lo, hi = 1, 1, 1, None
        for p in self.parts:
            if isinstance(p, ArithmeticProgression):
                meet = _ap_meet(a, d, p.a, p.d)
                if meet is None:
                    return ExplicitFinite(())
                a, d = meet
            elif isinstance(p, IndexRange):
                lo = max(lo, p.lo)
                hi = p.hi if hi is None else (hi if p.hi is None else min(hi, p.hi))
            else:
                return None
        if a < lo:
            a += -(-(lo - a) // d) * d
        if hi is not None:
            if hi < a:
                return ExplicitFinite(())
            if (hi - a) // d < 10**6:
                return ExplicitFinite(tuple(range(a, hi + 1, d)))
            return None
        if d == 1:
            return IndexRange(a, None)
        return ArithmeticProgression(a, d)

    @cached_property
    def _count_plan(self):
        if self.folded is not None:
            return ("folded", self.folded)
        finite = [p for p in self.parts if isinstance(p, ExplicitFinite)]
        if finite:
            vals = np.array(finite[0].values, dtype=np.int64)
            keep = vals[self.contains(vals)] if vals.size else vals
            return ("folded", ExplicitFinite(tuple(int(v) for v in keep)))
        ranges = [p for p in self.parts if isinstance(p, IndexRange)]
        rest = [p for p in self.parts if not isinstance(p, IndexRange)]
        if len(rest) == 1 and ranges and rest[0].closed_form:
            his = [r.hi for r in ranges if r.hi is not None]
            return ("range", rest[0], max(r.lo for r in ranges), min(his) if his else None)
        return None

    @property
    def closed_form(self):
        return self._count_plan is not None

    def _closed_counts(self, ns):
        plan = self._count_plan
        if plan[0] == "folded":
            return plan[1].counts(ns)
        _, inner, lo, hi = plan
        top = ns if hi is None else np.minimum(ns, hi)
        below = inner.count(lo - 1) if lo > 1 else 0
        return np.maximum(inner.counts(np.maximum(top, 0)) - below, 0).astype(np.int64)

    def is_finite(self):
        if self.folded is not None:
            return self.folded.is_finite()
        flags = [p.is_finite() for p in self.parts]
        if True in flags:
            return True
        cof = [p.is_cofinite() for p in self.parts]
        others = [f for f, c in zip(flags, cof) if c is not True]
        if len(others) == 1:
            return others[0]
        return None

    def is_cofinite(self):
        flags = [p.is_cofinite() for p in self.parts]
        if False in flags:
            return False
        return True if all(flags) else None

    def __str__(self):
        return "intersection(" + ",".join(str(p) for p in self.parts) + ")"


@dataclass(frozen=True)
class Union(NatSet):
    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if not self.parts:
            raise ValueError("union of nothing")

    def contains(self, arr):
        arr = _as_index_array(arr)
        return reduce(np.logical_or, (p.contains(arr) for p in self.parts))

    @cached_property
    def _terms(self):
        if len(self.parts) > 4:
            return None
        terms = []
        for r in range(1, len(self.parts) + 1):
            for combo in itertools.combinations(self.parts, r):
                s = combo[0] if r == 1 else Intersection(combo)
                if not s.closed_form:
                    return None
                terms.append(((-1) ** (r + 1), s))
        return terms

    @property
    def closed_form(self):
        return self._terms is not None

    def _closed_counts(self, ns):
        total = np.zeros_like(ns, dtype=np.int64)
        for sign, s in self._terms:
            total += sign * s.counts(ns)
        return total

    def is_finite(self):
        flags = [p.is_finite() for p in self.parts]
        if False in flags:
            return False
        return True if all(flags) else None

    def is_cofinite(self):
        flags = [p.is_cofinite() for p in self.parts]
        if True in flags:
            return True
        return Intersection(tuple(complement(p) for p in self.parts)).is_finite()

    def __str__(self):
        return "union(" + ",".join(str(p) for p in self.parts) + ")"


@dataclass(frozen=True, eq=False)
class ObservedSet(NatSet):
    """A set known only at finitely many observed indices.

    Built from thresholded sequence data.  Queries outside the observed
    indices raise :class:`HorizonExceededError`; when the observed indices
    are exactly ``1..L`` the set counts like a scanned set up to ``L``.
    """

    points: np.ndarray
    mask: np.ndarray
    label: str = "observed"

    def __post_init__(self):
        pts = _as_index_array(self.points)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "mask", np.asarray(self.mask, dtype=bool))

    @cached_property
    def contiguous(self):
        n = len(self.points)
        return n > 0 and self.points[0] == 1 and self.points[-1] == n

    @property
    def limit(self):
        return int(self.points[-1]) if len(self.points) else 0

    @property
    def cap(self):
        return self.limit if self.contiguous else 0

    @property
    def default_horizon(self):
        return self.limit

    def contains(self, arr):
        arr = _as_index_array(arr)
        if self.contiguous:
            if arr.size and (arr.min() < 1 or arr.max() > self.limit):
                raise HorizonExceededError(f"{self.label}: observed only on [1, {self.limit}]")
            return self.mask[arr - 1]
        pos = np.searchsorted(self.points, arr)
        pos_c = np.minimum(pos, len(self.points) - 1)
        if arr.size and not np.all(self.points[pos_c] == arr):
            raise HorizonExceededError(f"{self.label}: index not observed")
        return self.mask[pos_c]

    @cached_property
    def _member_points(self):
        return self.points[self.mask]

    def elements(self, upto):
        if upto > self.limit and self.contiguous:
            raise HorizonExceededError(f"{self.label}: observed only on [1, {self.limit}]")
        mp = self._member_points
        return mp[mp <= upto].copy()

    def counts(self, ns):
        ns = _as_index_array(ns)
        if ns.size and (not self.contiguous or ns.max() > self.limit):
            raise HorizonExceededError(f"{self.label}: counts need contiguous observations up to {ns.max()}")
        return np.searchsorted(self._member_points, ns, side="right").astype(np.int64)

    def __iter__(self):
        return iter(int(v) for v in self._member_points)

    def __str__(self):
        return f"observed({self.label})"


@dataclass(frozen=True)
class PredicateSet(NatSet):
    """A set given by an arbitrary vectorized predicate (not serializable)."""

    predicate: object = field(compare=False)
    label: str = "predicate"
    scan_cap: int = SCAN_CAP

    @property
    def cap(self):
        return self.scan_cap

    def contains(self, arr):
        return np.asarray(self.predicate(_as_index_array(arr)), dtype=bool)

    def __str__(self):
        return f"predicate({self.label})"


NAT = IndexRange(1, None)
EMPTY = ExplicitFinite(())

# ---------------------------------------------------------------------------
# inclusion


def subset(A, B, scan_limit=10**5):
    """Decide ``A ⊆ B`` from the constructor trees, falling back to a scan.

    Returns ``(answer, witness)``: ``True`` when inclusion follows from the
    trees, ``False`` with an element of ``A \\ B`` as witness, ``None`` when
    neither the trees nor the first ``scan_limit`` integers settle it.
    """
    ans, _, witness = subset_evidence(A, B, scan_limit)
    return ans, witness


def subset_evidence(A, B, scan_limit=10**5):
    """Like :func:`subset` but also reports whether a scan of ``[1, scan_limit]`` came back clean.

    Returns ``(symbolic_answer, scan_clean, witness)``.
    """
    ans = _symbolic_subset(A, B)
    if ans is True:
        return True, True, None
    scanned, w = _find_witness(A, B, scan_limit)
    if w is not None:
        return False, False, w
    return ans, scanned and ans is None, None


def _find_witness(A, B, scan_limit):
    """``(scanned, witness)``; ``scanned`` is False when the scan could not run."""
    try:
        if isinstance(A, ObservedSet):
            els = A.elements(min(scan_limit, A.limit))
        elif A.closed_form or scan_limit <= A.cap:
            els = A.elements(scan_limit)
        else:
            return False, None
    except HorizonExceededError:
        return False, None
    if els.size == 0:
        return True, None
    try:
        outside = els[~B.contains(els)]
    except HorizonExceededError:
        return False, None
    return True, (int(outside[0]) if outside.size else None)


def _tri_all(values):
    values = list(values)
    if False in values:
        return False
    return True if all(v is True for v in values) else None


def _symbolic_subset(A, B):
    if A == B:
        return True
    if B == NAT or A == EMPTY:
        return True
    if isinstance(A, ExplicitFinite):
        try:
            return bool(np.all(B.contains(A._arr)))
        except HorizonExceededError:
            return None
    if isinstance(B, Intersection):
        return _tri_all(_symbolic_subset(A, p) for p in B.parts)
    if isinstance(A, Union):
        return _tri_all(_symbolic_subset(p, B) for p in A.parts)
    if isinstance(B, Union) and any(_symbolic_subset(A, p) for p in B.parts):
        return True
    if isinstance(A, Intersection):
        if A.folded is not None:
            return _symbolic_subset(A.folded, B)
        if any(_symbolic_subset(p, B) for p in A.parts):
            return True
    if isinstance(A, Complement) and isinstance(B, Complement):
        return _symbolic_subset(B.inner, A.inner)
    if isinstance(B, Complement):
        meet = Intersection((A, B.inner)).folded
        if meet is not None:
            return meet == EMPTY
    if A.is_finite() is False and B.is_finite() is True:
        return False
    if isinstance(A, ArithmeticProgression):
        if isinstance(B, ArithmeticProgression):
            return A.a >= B.a and (A.a - B.a) % B.d == 0 and A.d % B.d == 0
        if isinstance(B, IndexRange):
            return B.hi is None and A.a >= B.lo
    if isinstance(A, IndexRange) and A.hi is None:
        if isinstance(B, IndexRange):
            return B.hi is None and A.lo >= B.lo
        if isinstance(B, ArithmeticProgression):
            return B.d == 1 and A.lo >= B.a
    if isinstance(A, IndexRange) and isinstance(B, IndexRange):
        return B.lo <= A.lo and (B.hi is None or (A.hi is not None and A.hi <= B.hi))
    if isinstance(B, IndexRange) and B.hi is None and A.closed_form:
        return A.count(B.lo - 1) == 0
    return None


# ---------------------------------------------------------------------------
# DSL


def parse_set(text):
    """Parse the set DSL, e.g. ``union(squares, ap(1,2))`` or ``compl(finite(1,2,3))``."""
    return set_from_node(_dsl.parse(text))


_NAMED = {
    "nat": lambda: NAT,
    "all": lambda: NAT,
    "empty": lambda: EMPTY,
    "evens": lambda: ArithmeticProgression(2, 2),
    "odds": lambda: ArithmeticProgression(1, 2),
    "squares": lambda: PolynomialImage((0, 0, 1)),
    "cubes": lambda: PolynomialImage((0, 0, 0, 1)),
    "primes": lambda: Primes(),
}


def set_from_node(node):
    if isinstance(node, NatSet):
        return node
    if not isinstance(node, _dsl.Call):
        raise DSLParseError(f"expected a set expression, got {node!r}")
    name, args = node.name, node.args
    if name in _NAMED and not args:
        return _NAMED[name]()
    try:
        if name == "ap":
            a, d = (_dsl.expect_int(x, "ap argument") for x in args)
            return ArithmeticProgression(a, d)
        if name == "idx":
            lo = _dsl.expect_int(args[0], "idx lower bound")
            hi = None if len(args) < 2 or args[1] == math.inf else _dsl.expect_int(args[1], "idx upper bound")
            return IndexRange(lo, hi)
        if name == "finite":
            return ExplicitFinite(tuple(_dsl.expect_int(x, "finite element") for x in args))
        if name == "poly":
            return PolynomialImage(tuple(_dsl.expect_int(x, "poly coefficient") for x in args))
        if name == "powers":
            (b,) = args
            return Powers(_dsl.expect_int(b, "powers base"))
        if name == "blocks":
            (spec,) = args
            if not (isinstance(spec, _dsl.Call) and spec.name.startswith("pow") and spec.name[3:].isdigit()):
                raise DSLParseError(f"blocks expects powB, e.g. blocks(pow2); got {spec!r}")
            return BlockUnion(int(spec.name[3:]))
        if name in ("compl", "complement"):
            (inner,) = args
            return complement(set_from_node(inner))
        if name == "union":
            return Union(tuple(set_from_node(a) for a in args))
        if name in ("intersection", "inter"):
            return Intersection(tuple(set_from_node(a) for a in args))
    except (ValueError, TypeError) as exc:
        if isinstance(exc, DSLParseError):
            raise
        raise DSLParseError(f"bad arguments to {name}: {exc}") from None
    raise DSLParseError(f"unknown set constructor {name!r}")


# ---------------------------------------------------------------------------
# f-density


@dataclass
class DensityEstimate:
    """Tail evidence for ``lim f(|A ∩ [1,n]|) / f(n)``.

    ``value`` is the tail midpoint when ``status == 'converged'`` and
    ``None`` otherwise.  ``samples`` holds every ``(n, ratio)`` checkpoint.
    """

    value: float
    status: str
    horizon: int
    tail_inf: float
    tail_sup: float
    samples: list
    tolerance: float = DENSITY_TOL
    window: float = DENSITY_WINDOW
    decaying: bool = False
    set_description: str = ""
    modulus: str = ""

    def to_dict(self, with_samples=True):
        d = {
            "set": self.set_description,
            "modulus": self.modulus,
            "value": self.value,
            "status": self.status,
            "horizon": self.horizon,
            "tail_inf": self.tail_inf,
            "tail_sup": self.tail_sup,
            "tolerance": self.tolerance,
            "window": self.window,
        }
        if with_samples:
            d["samples"] = [[int(n), float(r)] for n, r in self.samples]
        return d


@lru_cache(maxsize=256)
def checkpoints(horizon, doublings=CHECKPOINT_DOUBLINGS, ratio=CHECKPOINT_RATIO):
    """Geometric checkpoints from ``horizon / 2**doublings`` up to ``horizon`` (read-only, cached)."""
    lo = max(1.0, horizon / 2.0**doublings)
    num = int(math.ceil(math.log(horizon / lo) / math.log(ratio))) + 1 if horizon > lo else 1
    pts = np.unique(np.rint(np.geomspace(lo, horizon, max(num, 2))).astype(np.int64))
    pts.flags.writeable = False
    return pts


def _drawup_drawdown(r):
    up = float(np.max(r - np.minimum.accumulate(r))) if r.size else 0.0
    down = float(np.max(np.maximum.accumulate(r) - r)) if r.size else 0.0
    return up, down


def f_density(A, f, horizon=None, window=DENSITY_WINDOW, tol=DENSITY_TOL):
    """Estimate the f-density of ``A`` from geometric checkpoints up to ``horizon``.

    The ratio is sampled on roughly 700 checkpoints spanning the ten doublings
    below ``horizon``.  The tail is the last ``window`` fraction of them
    (with the defaults, ``[horizon/4, horizon]``).

    * ``converged``: tail spread ``<= tol``; ``value`` is the tail midpoint.
    * ``oscillating``: the spread exceeds ``10 * tol`` in both of the last two
      doubling windows and the tail both rises and falls by more than
      ``10 * tol``.
    * ``inconclusive`` otherwise.

    Raises
    ------
    BoundedModulusError
        If ``f`` is not flagged unbounded.
    HorizonExceededError
        If ``horizon`` is beyond the counting cap of ``A``.
    """
    if not f.is_unbounded:
        raise BoundedModulusError(f"f-density needs an unbounded modulus; {f.name} is bounded")
    if not 0 < window < 1:
        raise ValueError("window must lie in (0, 1)")
    horizon = int(A.default_horizon if horizon is None else horizon)
    if horizon < 1000:
        raise ValueError(f"horizon must be at least 1000, got {horizon}")
    ns = checkpoints(horizon)
    cnt = A.counts(ns)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.asarray(f(cnt.astype(float)), dtype=float) / np.asarray(f(ns.astype(float)), dtype=float)
    ratio = np.clip(np.nan_to_num(ratio, nan=0.0), 0.0, 1.0)
    k = max(2, int(math.ceil(window * len(ns))))
    tail = ratio[-k:]
    t_inf, t_sup = float(tail.min()), float(tail.max())
    spread = t_sup - t_inf

    w1 = ratio[(ns >= horizon / 4) & (ns <= horizon / 2)]
    w2 = ratio[(ns >= horizon / 2)]
    s1 = float(np.ptp(w1)) if w1.size else 0.0
    s2 = float(np.ptp(w2)) if w2.size else 0.0
    up, down = _drawup_drawdown(tail)

    if spread <= tol:
        status, value = "converged", (t_inf + t_sup) / 2
    elif min(s1, s2) > 10 * tol and min(up, down) > 10 * tol:
        status, value = "oscillating", None
    else:
        status, value = "inconclusive", None
    half = len(tail) // 2
    decaying = bool(tail[half:].min() < tail[:half].min() - tol)
    return DensityEstimate(
        value=value,
        status=status,
        horizon=horizon,
        tail_inf=t_inf,
        tail_sup=t_sup,
        samples=list(zip(ns.tolist(), ratio.tolist())),
        tolerance=tol,
        window=window,
        decaying=decaying,
        set_description=str(A),
        modulus=f.name,
    )


def has_f_density_zero(A, f, horizon=None, tol=DENSITY_TOL):
    """Tri-state test of ``d_f(A) = 0``.

    Finite sets hold and cofinite sets fail outright for any unbounded ``f``.
    Otherwise the verdict comes from :func:`f_density`:

    * holds: converged to a value ``<= tol``;
    * fails: converged to a value ``> tol`` while the ratio fell by less than
      ``DECAY_DROP`` (relative) across the tail, or the tail infimum exceeds
      ``10 * tol`` while the ratio oscillates or is not decaying;
    * inconclusive otherwise.
    """
    if not f.is_unbounded:
        raise BoundedModulusError(f"f-density needs an unbounded modulus; {f.name} is bounded")
    fin = A.is_finite()
    if fin:
        return Verdict(HOLDS, {"reason": "finite set: f(|A|)/f(n) -> 0 for unbounded f", "set": str(A)})
    if A.is_cofinite():
        return Verdict(FAILS, {"reason": "cofinite set has f-density 1", "set": str(A)})
    est = f_density(A, f, horizon, tol=tol)
    diag = {"estimate": est.to_dict(with_samples=False)}
    if est.status == "converged":
        if est.value <= tol:
            return Verdict(HOLDS, diag)
        k = max(2, int(math.ceil(est.window * len(est.samples))))
        first, last = est.samples[-k][1], est.samples[-1][1]
        if first > 0 and (first - last) / first > DECAY_DROP:
            diag["reason"] = "ratio within tol of a positive value but still falling"
            return Verdict(INCONCLUSIVE, diag)
        return Verdict(FAILS, diag)
    if est.tail_inf > 10 * tol and (est.status == "oscillating" or not est.decaying):
        diag["reason"] = "ratio stays above 10*tol without decaying"
        return Verdict(FAILS, diag)
    return Verdict(INCONCLUSIVE, diag)
