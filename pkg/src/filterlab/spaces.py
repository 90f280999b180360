"""Finite models of the sequence spaces: ℓ₁/ℓ∞ truncations, weak topologies, sparse products.

A space model fixes which seminorms are measured:

* ``NormedL1(d)`` / ``NormedLinf(d)``: one seminorm, the norm of the
  d-dimensional truncation.
* ``SeminormFamily(functionals)``: one seminorm ``p_y(x) = |⟨x, y⟩|`` per
  functional, i.e. a finite sub-base of the weak topology ``σ(ℓ₁, Y)``.
  Functionals may be rule-based (``y_k = 1/k``), so they act on indices past
  any truncation.
* ``SparseProduct(keys)``: functions on an opaque key set with finite
  support, measured coordinatewise (the product topology).

Internally a vector is reduced to a feature row (coordinates, functional
values or key values) and each model turns differences of feature rows into
seminorm values.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _dsl
from ._expr import Expression
from .errors import DimensionMismatchError, DSLParseError, UnknownLabelError

DEFAULT_DIM = 10**4
CHUNK_ROWS = 1 << 14


@dataclass(eq=False)
class Vector:
    """Dense coordinates (1-based in prose, 0-based in the array) or a sparse ``{key: value}`` map.

    Sparse vectors list finitely many entries; every other entry is zero.
    """

    data: object
    space: str = ""

    def __post_init__(self):
        if isinstance(self.data, dict):
            self.data = {str(k): float(v) for k, v in self.data.items()}
        else:
            self.data = np.asarray(self.data, dtype=float).ravel()

    @property
    def is_sparse(self):
        return isinstance(self.data, dict)

    @property
    def dim(self):
        return None if self.is_sparse else len(self.data)

    def support(self):
        if self.is_sparse:
            return sorted(k for k, v in self.data.items() if v != 0.0)
        return [int(i) + 1 for i in np.flatnonzero(self.data)]

    def get(self, key):
        if self.is_sparse:
            return self.data.get(str(key), 0.0)
        return float(self.data[int(key) - 1])

    def dense(self, dim=None):
        if self.is_sparse:
            dim = dim or max((int(k) for k in self.data), default=0)
            out = np.zeros(dim)
            for k, v in self.data.items():
                if not k.isdigit() or not 1 <= int(k) <= dim:
                    raise DimensionMismatchError(f"sparse key {k!r} is not a coordinate in 1..{dim}")
                out[int(k) - 1] = v
            return out
        if dim is not None and dim != len(self.data):
            raise DimensionMismatchError(f"vector has dimension {len(self.data)}, expected {dim}")
        return self.data

    def _combine(self, other, a, b):
        if self.is_sparse or other.is_sparse:
            if not (self.is_sparse and other.is_sparse):
                raise DimensionMismatchError("cannot combine a sparse and a dense vector")
            keys = set(self.data) | set(other.data)
            return Vector({k: a * self.data.get(k, 0.0) + b * other.data.get(k, 0.0) for k in keys}, self.space)
        if len(self.data) != len(other.data):
            raise DimensionMismatchError(f"dimensions {len(self.data)} and {len(other.data)} differ")
        return Vector(a * self.data + b * other.data, self.space)

    def __add__(self, other):
        return self._combine(other, 1.0, 1.0)

    def __sub__(self, other):
        return self._combine(other, 1.0, -1.0)

    def scale(self, alpha):
        if self.is_sparse:
            return Vector({k: alpha * v for k, v in self.data.items()}, self.space)
        return Vector(alpha * self.data, self.space)

    def __mul__(self, alpha):
        return self.scale(float(alpha))

    __rmul__ = __mul__

    def to_jsonable(self):
        if self.is_sparse:
            return {k: self.data[k] for k in sorted(self.data)}
        return [float(v) for v in self.data]

    def __repr__(self):
        return f"Vector({self.to_jsonable()!r})"


@dataclass(frozen=True)
class Functional:
    """An element of ℓ∞ acting on ℓ₁ by ``⟨x, y⟩ = Σ x_k y_k``.

    Either ``values`` (a finite list; coordinates past it are out of range)
    or ``rule``, an expression in ``k`` giving ``y_k`` for every index.
    """

    label: str
    values: tuple = None
    rule: Expression = None

    def __post_init__(self):
        if (self.values is None) == (self.rule is None):
            raise ValueError("a functional needs exactly one of values or rule")
        if self.values is not None:
            object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    @cached_property
    def _arr(self):
        return np.array(self.values, dtype=float)

    def coords(self, idx):
        """``y_k`` for a 1-based index array."""
        idx = np.asarray(idx, dtype=np.int64)
        if self.rule is not None:
            return self.rule(idx.astype(float))
        if idx.size and (idx.min() < 1 or idx.max() > len(self.values)):
            raise DimensionMismatchError(f"functional {self.label} has {len(self.values)} coordinates")
        return self._arr[idx - 1]

    def dense(self, dim):
        return self.coords(np.arange(1, dim + 1))

    def sup_norm(self, dim):
        return float(np.max(np.abs(self.dense(dim)))) if dim else 0.0

    def __str__(self):
        return self.label


class SpaceModel:
    """Common interface: labels, feature rows and seminorms of feature differences."""

    labels = ()

    def seminorm(self, label, v):
        row = self.point_features(v)[None, :]
        vals = self.diff_seminorms(row)[0]
        return float(vals[self._label_index(label)])

    def _label_index(self, label):
        labels = list(self.labels)
        if label is None and len(labels) == 1:
            return 0
        if label not in labels:
            raise UnknownLabelError(f"unknown seminorm label {label!r}; available: {', '.join(map(str, labels))}")
        return labels.index(label)

    def point_features(self, v):
        raise NotImplementedError

    def diff_seminorms(self, D):
        """Seminorm values of the difference rows ``D``, shape ``(k, len(labels))``."""
        raise NotImplementedError

    @property
    def coordinatewise(self):
        """True when every seminorm is the absolute value of one feature column."""
        return False


@dataclass(frozen=True)
class NormedL1(SpaceModel):
    dim: int = DEFAULT_DIM
    labels = ("norm",)

    @property
    def tag(self):
        return f"l1({self.dim})"

    def point_features(self, v):
        return v.dense(self.dim)

    def diff_seminorms(self, D):
        return np.abs(D).sum(axis=1, keepdims=True)

    @property
    def coordinatewise(self):
        return self.dim == 1

    def __str__(self):
        return self.tag


@dataclass(frozen=True)
class NormedLinf(SpaceModel):
    dim: int = DEFAULT_DIM
    labels = ("norm",)

    @property
    def tag(self):
        return f"linf({self.dim})"

    def point_features(self, v):
        return v.dense(self.dim)

    def diff_seminorms(self, D):
        return np.abs(D).max(axis=1, keepdims=True) if D.shape[1] else np.zeros((D.shape[0], 1))

    @property
    def coordinatewise(self):
        return self.dim == 1

    def __str__(self):
        return self.tag


@dataclass(frozen=True)
class SeminormFamily(SpaceModel):
    """Seminorms ``x ↦ |⟨x, y⟩|`` on the ``dim``-truncation of ℓ₁."""

    functionals: tuple
    dim: int = DEFAULT_DIM

    def __post_init__(self):
        object.__setattr__(self, "functionals", tuple(self.functionals))
        if not self.functionals:
            raise ValueError("a seminorm family needs at least one functional")
        labels = [y.label for y in self.functionals]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate functional labels: {labels}")

    @property
    def labels(self):
        return tuple(y.label for y in self.functionals)

    @property
    def tag(self):
        return "weak(" + ",".join(self.labels) + f";{self.dim})"

    @cached_property
    def matrix(self):
        """Functionals as rows of a ``(len(functionals), dim)`` array."""
        return np.vstack([y.dense(self.dim) for y in self.functionals])

    def point_features(self, v):
        if v.is_sparse:
            keys = [int(k) for k in v.data]
            vals = np.array(list(v.data.values()))
            if keys and (min(keys) < 1):
                raise DimensionMismatchError("sparse coordinates start at 1")
            return np.array([float(np.dot(y.coords(np.array(keys, dtype=np.int64)), vals)) for y in self.functionals])
        return self.matrix @ v.dense(self.dim)

    def functional_coords(self, idx):
        """``(len(idx), len(functionals))`` array of ``y_k`` at indices ``idx``."""
        return np.column_stack([y.coords(idx) for y in self.functionals])

    def diff_seminorms(self, D):
        return np.abs(D)

    @property
    def coordinatewise(self):
        return True

    def __str__(self):
        return self.tag


@dataclass(frozen=True)
class SparseProduct(SpaceModel):
    """Finitely supported functions on opaque keys, with seminorms ``|x(key)|``."""

    keys: tuple

    def __post_init__(self):
        object.__setattr__(self, "keys", tuple(str(k) for k in self.keys))

    @property
    def labels(self):
        return self.keys

    @property
    def tag(self):
        return "sparse(" + ",".join(self.keys) + ")"

    def point_features(self, v):
        if not v.is_sparse:
            raise DimensionMismatchError("sparse product vectors are {key: value} maps")
        return np.array([v.data.get(k, 0.0) for k in self.keys])

    def diff_seminorms(self, D):
        return np.abs(D)

    @property
    def coordinatewise(self):
        return True

    def __str__(self):
        return self.tag


SCALAR = NormedL1(1)


def seminorm(space, label, v):
    """``p_label(v)``; for a normed model the only label is ``"norm"``."""
    return space.seminorm(label, v)


def pairing(x, y):
    """``Σ x_k y_k`` for ``x`` in an ℓ∞ model and ``y`` in an ℓ₁ model.

    ``x`` may be a :class:`Functional`, which is evaluated on ``y``'s
    coordinates; otherwise both dense dimensions must agree.
    """
    if isinstance(x, Functional):
        if y.is_sparse:
            keys = np.array([int(k) for k in y.data], dtype=np.int64)
            return float(np.dot(x.coords(keys), np.array(list(y.data.values()))))
        return float(np.dot(x.dense(len(y.data)), y.data))
    if x.is_sparse and y.is_sparse:
        return float(sum(v * y.data.get(k, 0.0) for k, v in x.data.items()))
    if x.is_sparse or y.is_sparse:
        dim = y.dim or x.dim
        return float(np.dot(x.dense(dim), y.dense(dim)))
    if len(x.data) != len(y.data):
        raise DimensionMismatchError(f"pairing of dimensions {len(x.data)} and {len(y.data)}")
    return float(np.dot(x.data, y.data))


# ---------------------------------------------------------------------------
# generators and DSL


def basis(k, dim):
    if not 1 <= k <= dim:
        raise DimensionMismatchError(f"basis({k}) outside dimension {dim}")
    v = np.zeros(dim)
    v[k - 1] = 1.0
    return Vector(v)


def ones(dim):
    return Vector(np.ones(dim))


def cesaro_basis(n, dim):
    """``(1/n) Σ_{k<=n} e_k``."""
    if not 1 <= n <= dim:
        raise DimensionMismatchError(f"cesaro_basis({n}) outside dimension {dim}")
    v = np.zeros(dim)
    v[:n] = 1.0 / n
    return Vector(v)


_RULES = {
    "ones": "1",
    "alternating": "(-1)**k",
    "harmonic": "1/k",
}


def parse_vector(text, dim=DEFAULT_DIM):
    """Vector DSL: dense lists, ``{key: value}`` maps, ``basis(k)``, ``ones``, ``cesaro_basis(n)``, ``zero``, ``coords(expr in k)``."""
    return vector_from_node(_dsl.parse(text), dim)


def vector_from_node(node, dim=DEFAULT_DIM):
    if isinstance(node, Vector):
        return node
    if isinstance(node, dict):
        return Vector(node)
    if isinstance(node, list):
        return Vector([_dsl.expect_number(v, "vector entry") for v in node])
    if isinstance(node, (int, float)):
        return Vector([float(node)])
    if isinstance(node, _dsl.Call):
        name, args = node.name, node.args
        if name == "basis":
            return basis(_dsl.expect_int(args[0], "basis index"), dim)
        if name == "cesaro_basis":
            return cesaro_basis(_dsl.expect_int(args[0], "cesaro_basis index"), dim)
        if name == "zero" and not args:
            return Vector(np.zeros(dim))
        if name in _RULES or name == "coords":
            return Vector(functional_from_node(node).dense(dim))
    raise DSLParseError(f"expected a vector, got {node!r}")


def parse_functional(text, label=None):
    return functional_from_node(_dsl.parse(text), label or text.strip())


def functional_from_node(node, label=None):
    """Functionals for seminorm families; rule-based forms act on every index."""
    if isinstance(node, Functional):
        return node
    if isinstance(node, list):
        return Functional(label or "y", values=tuple(_dsl.expect_number(v, "functional entry") for v in node))
    if isinstance(node, _dsl.Call):
        name, args = node.name, node.args
        if name in _RULES and not args:
            return Functional(label or name, rule=Expression(_RULES[name], var="k"))
        if name == "coords" and len(args) == 1:
            text = _node_text(args[0])
            return Functional(label or f"coords({text})", rule=Expression(text, var="k"))
        if name == "basis" and len(args) == 1:
            k = _dsl.expect_int(args[0], "basis index")
            return Functional(label or f"basis({k})", rule=Expression(f"1.0*(k=={k})", var="k"))
        if name == "geometric" and len(args) == 1:
            r = _dsl.expect_number(args[0], "geometric ratio")
            return Functional(label or f"geometric({_dsl.fmt_number(r)})", rule=Expression(f"({r!r})**k", var="k"))
    raise DSLParseError(f"expected a functional, got {node!r}")


def parse_space(text, dim=DEFAULT_DIM):
    """Space DSL: ``l1``, ``l1(3)``, ``linf(5)``, ``scalar``, ``weak(ones, basis(1), ...)``, ``sparse(a, b)``."""
    node = _dsl.parse(text)
    if not isinstance(node, _dsl.Call):
        raise DSLParseError(f"expected a space, got {node!r}")
    name, args = node.name, node.args
    if name == "scalar" and not args:
        return SCALAR
    if name in ("l1", "linf"):
        d = _dsl.expect_int(args[0], "dimension") if args else dim
        return NormedL1(d) if name == "l1" else NormedLinf(d)
    if name == "weak":
        return SeminormFamily(tuple(functional_from_node(a, _node_text(a)) for a in args), dim)
    if name == "sparse":
        return SparseProduct(tuple(a.name if isinstance(a, _dsl.Call) else str(a) for a in args))
    raise DSLParseError(f"unknown space {name!r}")


def _node_text(node):
    if isinstance(node, _dsl.Call):
        if not node.args:
            return node.name
        return node.name + "(" + ",".join(_node_text(a) for a in node.args) + ")"
    if isinstance(node, _dsl.Raw):
        return node.text
    if isinstance(node, list):
        return "[" + ",".join(_node_text(a) for a in node) + "]"
    return _dsl.fmt_number(node)


def sparse_pointwise_limit(seq, F, keys=None, horizon=None, eps_grid=None):
    """Coordinatewise F-limit of a sequence of sparse vectors.

    Each key's scalar sequence is checked with
    :func:`~filterlab.converge.f_limit_check` against 0 and, failing that,
    against the median of its values over the last half of the observed
    indices.  The report records the
    per-key verdicts and whether the support of the limit lies inside the
    union of the inspected supports.
    """
    from .converge import DEFAULT_EPS, coordinate, f_limit_check, observed_indices

    space = seq.space
    if not isinstance(space, SparseProduct):
        raise DimensionMismatchError("sparse_pointwise_limit needs a SparseProduct sequence")
    keys = tuple(str(k) for k in (keys or space.keys))
    eps_grid = tuple(eps_grid or DEFAULT_EPS)
    horizon = int(horizon or 10**4)
    idx = observed_indices(F, horizon)
    feats = seq.features(idx)
    inspected = sorted({k for col, k in enumerate(space.keys) if np.any(feats[:, col] != 0)})
    limit, per_key, flagged = {}, {}, []
    tail = feats[len(idx) // 2 :]
    for k in keys:
        col = space.keys.index(k)
        # zero first: a key whose values vanish along F must stay out of the support
        v = f_limit_check(coordinate(seq, k), Vector([0.0]), F, eps_grid, horizon)
        cand = 0.0
        if not v.holds:
            cand = float(np.median(tail[:, col]))
            v = f_limit_check(coordinate(seq, k), Vector([cand]), F, eps_grid, horizon)
        per_key[k] = {"candidate": cand, "verdict": v.outcome}
        if not v.holds:
            flagged.append(k)
        if cand != 0.0:
            limit[k] = cand
    support = sorted(limit)
    report = {
        "keys": list(keys),
        "per_key": per_key,
        "flagged": flagged,
        "limit_support": support,
        "inspected_support": inspected,
        "support_closed": set(support) <= set(inspected),
        "horizon": horizon,
        "filter": str(F),
    }
    return Vector(limit, space.tag), report

