"""Index maps g: ℕ -> ℕ, their images and preimages.

Maps push filters forward (``image(g, F)``) and reindex sequences
(``x ∘ g``).  A set ``A`` belongs to the image filter ``g[F]`` exactly when
``g⁻¹(A)`` belongs to ``F``: if ``g(B) ⊆ A`` for some ``B ∈ F`` then
``B ⊆ g⁻¹(A)``, and conversely ``g(g⁻¹(A)) ⊆ A``.  So preimages are the
workhorse here, computed symbolically where the map and the set allow it.
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _dsl
from .errors import DSLParseError, HorizonExceededError
from .natset import (
    EMPTY,
    NAT,
    SCAN_CAP,
    ArithmeticProgression,
    Complement,
    ExplicitFinite,
    IndexRange,
    Intersection,
    NatSet,
    PolynomialImage,
    Powers,
    Union,
    _as_index_array,
    set_from_node,
)

INT_LIMIT = 2**62


class IndexMap:
    """Base class for maps ℕ -> ℕ.  Subclasses are frozen dataclasses."""

    # largest n for which g(n) fits comfortably in int64
    domain_cap = SCAN_CAP

    def __call__(self, n):
        arr = _as_index_array(n)
        if arr.size and int(arr.max()) > self.domain_cap:
            raise HorizonExceededError(f"{self}: argument beyond {self.domain_cap}")
        out = self._apply(arr)
        return int(out) if np.ndim(n) == 0 else out

    def _apply(self, arr):
        raise NotImplementedError

    def is_injective(self):
        return None

    def is_finite_to_one(self):
        return self.is_injective()

    def is_constant(self):
        return False

    def is_strictly_increasing(self, terms=10**5):
        """Check ``g(1) < g(2) < ...`` on the first ``terms`` indices."""
        n = min(terms, self.domain_cap)
        vals = self._apply(np.arange(1, n + 1, dtype=np.int64))
        return bool(np.all(np.diff(vals) > 0))

    def image(self):
        """The set ``g(ℕ)`` when it has a symbolic form, else ``None``."""
        return None

    def __str__(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Affine(IndexMap):
    """``g(n) = a*n + b``; ``a = 0`` gives the constant map ``b``."""

    a: int
    b: int = 0

    def __post_init__(self):
        if self.a < 0 or self.a + self.b < 1:
            raise ValueError(f"affine({self.a},{self.b}) does not map ℕ into ℕ")

    @property
    def domain_cap(self):
        return SCAN_CAP if self.a <= 1 else min(SCAN_CAP * 100, INT_LIMIT // self.a)

    def _apply(self, arr):
        return self.a * arr + self.b

    def is_injective(self):
        return self.a > 0

    def is_constant(self):
        return self.a == 0

    def is_strictly_increasing(self, terms=10**5):
        return self.a > 0

    def image(self):
        if self.a == 0:
            return ExplicitFinite((self.b,))
        if self.a == 1:
            return IndexRange(1 + self.b, None)
        return ArithmeticProgression(self.a + self.b, self.a)

    def __str__(self):
        if (self.a, self.b) == (1, 0):
            return "identity"
        if self.a == 0:
            return f"const({self.b})"
        return f"affine({self.a},{self.b})"


@dataclass(frozen=True)
class PowerOfTwo(IndexMap):
    """``g(n) = 2**n``."""

    domain_cap = 62

    def _apply(self, arr):
        return np.left_shift(np.int64(1), arr)

    def is_injective(self):
        return True

    def is_strictly_increasing(self, terms=10**5):
        return True

    def image(self):
        return Intersection((Powers(2), IndexRange(2, None)))

    def __str__(self):
        return "pow2"


@dataclass(frozen=True)
class Square(IndexMap):
    """``g(n) = n**2``."""

    domain_cap = 3 * 10**9

    def _apply(self, arr):
        return arr * arr

    def is_injective(self):
        return True

    def is_strictly_increasing(self, terms=10**5):
        return True

    def image(self):
        return PolynomialImage((0, 0, 1))

    def __str__(self):
        return "square"


@dataclass(frozen=True)
class Explicit(IndexMap):
    """``g(i) = values[i-1]`` for ``i <= len(values)`` and ``g(n) = n`` beyond."""

    values: tuple

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        if not vals or min(vals) < 1:
            raise ValueError("explicit(...) needs positive integer values")
        object.__setattr__(self, "values", vals)

    @cached_property
    def _arr(self):
        return np.array(self.values, dtype=np.int64)

    def _apply(self, arr):
        k = len(self.values)
        out = arr.copy()
        head = arr <= k
        out[head] = self._arr[arr[head] - 1]
        return out

    def is_injective(self):
        k = len(self.values)
        vals = set(self.values)
        return len(vals) == k and not any(v > k for v in vals)

    def is_finite_to_one(self):
        return True

    def is_constant(self):
        return False

    def image(self):
        k = len(self.values)
        return Union((ExplicitFinite(self.values), IndexRange(k + 1, None)))

    def __str__(self):
        return "explicit(" + ",".join(str(v) for v in self.values) + ")"


@dataclass(frozen=True)
class Enumeration(IndexMap):
    """``g(j)`` = the j-th element of an infinite set, in increasing order."""

    source: NatSet

    def __post_init__(self):
        if self.source.is_finite() is True:
            raise ValueError(f"cannot enumerate the finite set {self.source}")

    @property
    def domain_cap(self):
        return SCAN_CAP

    def _apply(self, arr):
        if arr.size == 0:
            return arr.copy()
        need = int(arr.max())
        upto = max(64, 2 * need)
        while True:
            els = self.source.elements(upto)
            if len(els) >= need:
                return els[arr - 1]
            if upto >= self.source.cap:
                raise HorizonExceededError(f"{self.source} has fewer than {need} elements below {upto}")
            upto = min(self.source.cap, upto * 4)

    def is_injective(self):
        return True

    def is_strictly_increasing(self, terms=10**5):
        return True

    def image(self):
        return self.source

    def __str__(self):
        return f"enum({self.source})"


@dataclass(frozen=True)
class Composed(IndexMap):
    """``(outer ∘ inner)(n) = outer(inner(n))``."""

    outer: IndexMap
    inner: IndexMap

    @property
    def domain_cap(self):
        return self.inner.domain_cap

    def _apply(self, arr):
        return self.outer(self.inner(arr))

    def is_injective(self):
        a, b = self.outer.is_injective(), self.inner.is_injective()
        return True if a and b else None

    def is_finite_to_one(self):
        a, b = self.outer.is_finite_to_one(), self.inner.is_finite_to_one()
        return True if a and b else None

    def is_constant(self):
        return self.inner.is_constant() or self.outer.is_constant() or None

    def __str__(self):
        return f"compose({self.outer},{self.inner})"


IDENTITY = Affine(1, 0)


def compose_maps(outer, inner):
    if outer == IDENTITY:
        return inner
    if inner == IDENTITY:
        return outer
    if isinstance(outer, Affine) and isinstance(inner, Affine):
        return Affine(outer.a * inner.a, outer.a * inner.b + outer.b)
    return Composed(outer, inner)


# ---------------------------------------------------------------------------
# preimages


@dataclass(frozen=True)
class PreimageSet(NatSet):
    """``g⁻¹(A) = {n : g(n) ∈ A}``, evaluated by membership scans."""

    g: IndexMap
    target: NatSet

    @property
    def cap(self):
        return min(SCAN_CAP, self.g.domain_cap)

    @property
    def default_horizon(self):
        return min(self.target.default_horizon, self.cap)

    def contains(self, arr):
        return self.target.contains(self.g(_as_index_array(arr)))

    def is_finite(self):
        if self.g.is_finite_to_one() and self.target.is_finite() is True:
            return True
        return None

    def is_cofinite(self):
        if self.g.is_finite_to_one() and self.target.is_cofinite() is True:
            return True
        return None

    def __str__(self):
        return f"preimage({self.g},{self.target})"


def _affine_preimage_ap(g, A):
    # n >= 1 with a*n + b in {c, c+d, ...}
    a, b, c, d = g.a, g.b, A.a, A.d
    gcd = math.gcd(a, d)
    if (c - b) % gcd:
        return EMPTY
    m = d // gcd
    n0 = ((c - b) // gcd) * pow(a // gcd, -1, m) % m if m > 1 else 0
    lo = max(1, -(-(c - b) // a))
    first = n0 + (-(-(lo - n0) // m)) * m if n0 < lo else n0 - ((n0 - lo) // m) * m
    return IndexRange(first, None) if m == 1 else ArithmeticProgression(first, m)


def preimage(g, A):
    """Symbolic ``g⁻¹(A)`` when available, else a :class:`PreimageSet`.

    Preimages commute with complements, unions and intersections, so the
    constructor tree is pushed through before falling back to scanning.
    """
    if g == IDENTITY:
        return A
    if g.is_constant() is True:
        return NAT if int(g(1)) in A else EMPTY
    if isinstance(A, Complement):
        inner = preimage(g, A.inner)
        if inner == EMPTY:
            return NAT
        if inner == NAT:
            return EMPTY
        return Complement(inner)
    if isinstance(A, Union):
        return Union(tuple(preimage(g, p) for p in A.parts))
    if isinstance(A, Intersection):
        return Intersection(tuple(preimage(g, p) for p in A.parts))
    if A == NAT:
        return NAT
    img = g.image()
    if img is not None and img == A:
        return NAT
    if isinstance(g, Affine):
        if isinstance(A, ArithmeticProgression):
            return _affine_preimage_ap(g, A)
        if isinstance(A, IndexRange):
            lo = max(1, -(-(A.lo - g.b) // g.a))
            if A.hi is None:
                return IndexRange(lo, None)
            hi = (A.hi - g.b) // g.a
            return IndexRange(lo, hi) if hi >= lo else EMPTY
        if isinstance(A, ExplicitFinite):
            vals = [(v - g.b) // g.a for v in A.values if v > g.b and (v - g.b) % g.a == 0]
            return ExplicitFinite(tuple(vals))
    if isinstance(g, Explicit) and isinstance(A, ExplicitFinite):
        k = len(g.values)
        hits = [i + 1 for i, v in enumerate(g.values) if v in A.values]
        hits += [v for v in A.values if v > k]
        return ExplicitFinite(tuple(hits))
    return PreimageSet(g, A)


# ---------------------------------------------------------------------------
# DSL


def parse_map(text):
    """Parse the index-map DSL: ``affine(a,b)``, ``pow2``, ``square``, ``explicit(...)``."""
    return map_from_node(_dsl.parse(text))


def map_from_node(node):
    if isinstance(node, IndexMap):
        return node
    if not isinstance(node, _dsl.Call):
        raise DSLParseError(f"expected an index map, got {node!r}")
    name, args = node.name, node.args
    try:
        if name == "identity" and not args:
            return IDENTITY
        if name == "affine":
            a = _dsl.expect_int(args[0], "affine slope")
            b = _dsl.expect_int(args[1], "affine offset") if len(args) > 1 else 0
            return Affine(a, b)
        if name in ("const", "constant"):
            (b,) = args
            return Affine(0, _dsl.expect_int(b, "constant value"))
        if name == "pow2" and not args:
            return PowerOfTwo()
        if name == "square" and not args:
            return Square()
        if name == "explicit":
            return Explicit(tuple(_dsl.expect_int(v, "explicit value") for v in args))
        if name == "enum":
            (src,) = args
            return Enumeration(set_from_node(src))
        if name == "compose":
            outer, inner = args
            return compose_maps(map_from_node(outer), map_from_node(inner))
    except (ValueError, TypeError) as exc:
        if isinstance(exc, DSLParseError):
            raise
        raise DSLParseError(f"bad arguments to {name}: {exc}") from None
    raise DSLParseError(f"unknown index map {name!r}")


def stream_from_node(node):
    """A strictly increasing stream: an index map, or an infinite set enumerated in order."""
    try:
        return map_from_node(node)
    except DSLParseError as map_err:
        try:
            return Enumeration(set_from_node(node))
        except (DSLParseError, ValueError):
            raise map_err from None


def parse_stream(text):
    return stream_from_node(_dsl.parse(text))

