"""Computable filters on ℕ with horizon-bounded, tri-state membership.

Kinds
-----
``frechet``
    Cofinite sets.
``stat`` / ``fstat(f)``
    Sets whose complement has (f-)density zero.
``base(A, B, ...)``
    Supersets of a finite filter base.
``image(g, F)``
    ``{A : g⁻¹(A) ∈ F}``, the filter generated by ``{g(B) : B ∈ F}``.
``subseq(stream)``
    Tails of a strictly increasing index stream, ``image(stream, frechet)``.
    This is the constructive stand-in for a free ultrafilter: a bounded
    sequence has a convergent subsequence, and limits along it play the
    role of ultrafilter limits.

Membership is only ever certified from finite evidence, so every answer is a
:class:`~filterlab.verdict.Verdict` carrying the evidence it used.
"""

import warnings
from dataclasses import dataclass, field

from . import _dsl
from .errors import BaseNotFilterError, BoundedModulusError, DSLParseError
from .maps import IDENTITY, IndexMap, compose_maps, map_from_node, preimage, stream_from_node
from .modulus import builtin_modulus
from .natset import (
    DENSITY_TOL,
    SCAN_CAP,
    Intersection,
    complement,
    has_f_density_zero,
    parse_set,
    set_from_node,
    subset,
    subset_evidence,
)
from .verdict import FAILS, HOLDS, INCONCLUSIVE, Verdict

BASE_NONEMPTY_HORIZON = 10**6
BASE_PAIR_SCAN = 10**5
TAIL_WINDOWS = 4

STANDARD_TESTBED = (
    "nat",
    "compl(finite(1,2,3))",
    "compl(squares)",
    "compl(powers(2))",
    "compl(cubes)",
    "evens",
    "odds",
    "blocks(pow2)",
    "compl(blocks(pow2))",
    "compl(ap(1,3))",
    "idx(100,inf)",
    "union(evens,ap(1,3))",
)


def standard_testbed():
    """The twelve shipped testbed sets, parsed."""
    return [parse_set(s) for s in STANDARD_TESTBED]


class TrivialFilterWarning(UserWarning):
    """An image filter under a non-injective map may collapse to a principal filter."""


class NatFilter:
    """Base class; subclasses implement :meth:`member`."""

    def member(self, A, horizon=None):
        raise NotImplementedError

    def is_stationary(self, A, horizon=None):
        """``A`` meets every member of the filter iff ``ℕ ∖ A`` is not a member."""
        v = self.member(complement(A), horizon)
        return v.negated(set=str(A), filter=str(self), reason="stationary iff complement is not a member")

    def __str__(self):
        raise NotImplementedError


def frechet_evidence(A, horizon=None):
    """Decide cofiniteness of ``A`` from its tree, else from tail windows of its complement.

    With ``C = ℕ ∖ A`` and horizon ``h``: holds when ``C`` has no element in
    ``(h/2, h]`` (finite complement witnessed), fails when ``C`` meets each of
    the last four dyadic windows below ``h``, inconclusive otherwise.
    """
    cof = A.is_cofinite()
    if cof is True:
        return Verdict(HOLDS, {"set": str(A), "reason": "complement finite by construction"})
    if cof is False:
        return Verdict(FAILS, {"set": str(A), "reason": "complement infinite by construction"})
    C = complement(A)
    h = int(min(horizon or A.default_horizon, C.cap))
    if h < 2**TAIL_WINDOWS:
        return Verdict(INCONCLUSIVE, {"set": str(A), "reason": f"horizon {h} too small for tail windows"})
    edges = [h >> k for k in range(TAIL_WINDOWS, -1, -1)]
    counts = C.counts(edges)
    hits = [int(b - a) for a, b in zip(counts[:-1], counts[1:])]
    diag = {"set": str(A), "horizon": h, "complement_hits_per_window": hits, "window_edges": edges}
    if hits[-1] == 0:
        diag["reason"] = f"complement has no element in ({edges[-2]}, {h}]"
        diag["complement_count"] = int(counts[-1])
        return Verdict(HOLDS, diag)
    if all(hits):
        diag["reason"] = "complement meets every one of the last dyadic windows"
        return Verdict(FAILS, diag)
    return Verdict(INCONCLUSIVE, diag)


@dataclass(frozen=True)
class Frechet(NatFilter):
    def member(self, A, horizon=None):
        v = frechet_evidence(A, horizon)
        v.diagnostics["filter"] = "frechet"
        return v

    def __str__(self):
        return "frechet"


@dataclass(frozen=True)
class FStatistical(NatFilter):
    """Sets whose complement has f-density zero, certified at ``tolerance``."""

    modulus: object
    tolerance: float = DENSITY_TOL

    def __post_init__(self):
        if not self.modulus.is_unbounded:
            raise BoundedModulusError(f"fstat needs an unbounded modulus; {self.modulus.name} is bounded")

    def member(self, A, horizon=None):
        # every free filter contains the cofinite sets
        fr = frechet_evidence(A, horizon)
        if fr.holds:
            fr.diagnostics["filter"] = str(self)
            return fr
        h = horizon or A.default_horizon
        C = complement(A)
        v = has_f_density_zero(C, self.modulus, min(h, C.cap), tol=self.tolerance)
        v.diagnostics.update({"filter": str(self), "set": str(A)})
        return v

    def __str__(self):
        return f"fstat({self.modulus.name})"


@dataclass(frozen=True)
class Statistical(FStatistical):
    """Sets whose complement has natural density zero."""

    modulus: object = field(default_factory=lambda: builtin_modulus("identity"))
    tolerance: float = DENSITY_TOL

    def __str__(self):
        return "stat"


@dataclass(frozen=True)
class BaseGenerated(NatFilter):
    """The filter of supersets of a finite base.

    The base axioms are checked at construction: no element is empty below
    ``10**6``, and every pair ``(A, B)`` has a designated ``C ⊆ A ∩ B`` in the
    base, verified by constructor inclusion or a scan of ``[1, 10**5]``.
    """

    base: tuple
    designated: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        base = tuple(self.base)
        object.__setattr__(self, "base", base)
        if not base:
            raise BaseNotFilterError("a filter base needs at least one set")
        for B in base:
            h = min(BASE_NONEMPTY_HORIZON, B.cap)
            if B.count(h) == 0:
                raise BaseNotFilterError(f"base element {B} is empty below {h}", {"set": str(B), "horizon": h})
        designated = {}
        for i, A in enumerate(base):
            for j in range(i, len(base)):
                meet = Intersection((A, base[j]))
                pick = next((k for k, C in enumerate(base) if subset(C, meet, BASE_PAIR_SCAN)[0] is not False), None)
                if pick is None:
                    raise BaseNotFilterError(
                        f"no base element inside {A} ∩ {base[j]}", {"pair": [str(A), str(base[j])]}
                    )
                designated[(i, j)] = pick
        object.__setattr__(self, "designated", designated)

    def member(self, A, horizon=None):
        """Holds when some base element lies inside ``A``.

        Inclusion is taken from the constructor trees when they decide it and
        otherwise from a scan of ``[1, horizon]``; the diagnostics say which.
        """
        scan = int(min(horizon or BASE_PAIR_SCAN, SCAN_CAP))
        answers = []
        for B in self.base:
            ans, clean, witness = subset_evidence(B, A, scan)
            how = "constructor" if ans is not None else ("scan" if clean else "undecided")
            answers.append({"base_element": str(B), "subset": ans if ans is not None else clean or None, "by": how, "witness": witness})
            if ans is True or (ans is None and clean):
                diag = {"filter": str(self), "set": str(A), "contained": str(B), "by": how, "checked": answers}
                if how == "scan":
                    diag["scan_limit"] = scan
                return Verdict(HOLDS, diag)
        diag = {"filter": str(self), "set": str(A), "scan_limit": scan, "checked": answers}
        if all(a["subset"] is False for a in answers):
            return Verdict(FAILS, diag)
        return Verdict(INCONCLUSIVE, diag)

    def __str__(self):
        return "base(" + ",".join(str(B) for B in self.base) + ")"


@dataclass(frozen=True)
class Image(NatFilter):
    """``g[F]``: ``A`` is a member iff ``g⁻¹(A) ∈ F``."""

    g: IndexMap
    inner: NatFilter

    def __post_init__(self):
        if self.g.is_constant() is True:
            warnings.warn(
                f"image under the constant map {self.g} is the trivial filter of sets containing {self.g(1)}",
                TrivialFilterWarning,
                stacklevel=3,
            )
        elif self.g.is_injective() is not True:
            warnings.warn(
                f"image under the non-injective map {self.g} may be a trivial filter",
                TrivialFilterWarning,
                stacklevel=3,
            )

    def member(self, A, horizon=None):
        P = preimage(self.g, A)
        v = self.inner.member(P, horizon)
        v.diagnostics = {"filter": str(self), "set": str(A), "preimage": str(P), "inner": v.to_dict()}
        return v

    def __str__(self):
        return f"image({self.g},{self.inner})"


class SubsequenceSurrogate(Image):
    """Tails of a strictly increasing index stream (verified on its first ``10**5`` terms)."""

    def __init__(self, stream):
        if not stream.is_strictly_increasing():
            raise ValueError(f"subsequence stream {stream} is not strictly increasing")
        super().__init__(stream, Frechet())

    @property
    def stream(self):
        return self.g

    def __str__(self):
        return f"subseq({self.g})"


def image_filter(g, F):
    """Push ``F`` forward along ``g``; nested images compose into one map."""
    if g == IDENTITY:
        return F
    if isinstance(F, Image):
        return Image(compose_maps(g, F.g), F.inner)
    return Image(g, F)


def pullback(F):
    """Split ``F`` into ``(g, F0)`` with ``F = g[F0]`` and ``F0`` not an image filter."""
    if isinstance(F, Image):
        g, F0 = pullback(F.inner)
        return compose_maps(F.g, g), F0
    return IDENTITY, F


def member(F, A, horizon=None):
    return F.member(A, horizon)


def is_stationary(F, A, horizon=None):
    return F.is_stationary(A, horizon)


def includes(F1, F2, testbed, horizon=None):
    """Testbed evidence for ``F1 ⊆ F2``.

    For each set: fine when ``F2`` holds or ``F1`` fails; a witness against
    inclusion when ``F1`` holds and ``F2`` fails; inconclusive otherwise.
    """
    testbed = list(testbed)
    if not testbed:
        raise ValueError("includes needs a non-empty testbed")
    if F1 == F2:
        return Verdict(HOLDS, {"F1": str(F1), "F2": str(F2), "reason": "same filter", "rows": [], "witnesses": [], "unsettled": []})
    rows, witnesses, unsettled = [], [], []
    for A in testbed:
        v1 = F1.member(A, horizon)
        v2 = F2.member(A, horizon)
        row = {"set": str(A), "F1": v1.outcome, "F2": v2.outcome}
        rows.append(row)
        if v2.holds or v1.fails:
            continue
        if v1.holds and v2.fails:
            witnesses.append(str(A))
        else:
            unsettled.append(str(A))
    diag = {"F1": str(F1), "F2": str(F2), "rows": rows, "witnesses": witnesses, "unsettled": unsettled}
    if witnesses:
        return Verdict(FAILS, diag)
    if unsettled:
        return Verdict(INCONCLUSIVE, diag)
    return Verdict(HOLDS, diag)


# ---------------------------------------------------------------------------
# DSL


def _modulus_from_node(node):
    if isinstance(node, _dsl.Call):
        text = node.name
        if node.args:
            text += "(" + ",".join(_dsl.fmt_number(a) for a in node.args) + ")"
        return builtin_modulus(text)
    raise DSLParseError(f"expected a modulus name, got {node!r}")


def parse_filter(text):
    """Parse the filter DSL: ``frechet``, ``stat``, ``fstat(log1p)``, ``base(...)``, ``image(g, F)``, ``subseq(s)``."""
    return filter_from_node(_dsl.parse(text))


def filter_from_node(node):
    if isinstance(node, NatFilter):
        return node
    if not isinstance(node, _dsl.Call):
        raise DSLParseError(f"expected a filter, got {node!r}")
    name, args = node.name, node.args
    if name == "frechet" and not args:
        return Frechet()
    if name in ("stat", "statistical") and not args:
        return Statistical()
    if name == "fstat":
        if len(args) != 1:
            raise DSLParseError("fstat takes one modulus name")
        return FStatistical(_modulus_from_node(args[0]))
    if name == "base":
        return BaseGenerated(tuple(set_from_node(a) for a in args))
    if name == "image":
        if len(args) != 2:
            raise DSLParseError("image takes a map and a filter")
        return image_filter(map_from_node(args[0]), filter_from_node(args[1]))
    if name == "subseq":
        if len(args) != 1:
            raise DSLParseError("subseq takes one stream")
        try:
            return SubsequenceSurrogate(stream_from_node(args[0]))
        except ValueError as exc:
            if isinstance(exc, DSLParseError):
                raise
            raise DSLParseError(str(exc)) from None
    raise DSLParseError(f"unknown filter {name!r}")

