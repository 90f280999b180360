"""Modulus functions: validation by sampling and a small catalog.

A modulus is a map f: [0, inf) -> [0, inf) with f(0) = 0 that is increasing
and subadditive.  Functions are treated as black boxes; the axioms are
certified on a fixed grid rather than proven.  Continuity cannot be checked
from samples and is not reported.
"""

import re
from dataclasses import dataclass, field

import numpy as np

from ._expr import Expression
from .errors import InvalidModulusError, UnknownModulusError

MONOTONE_TOL = 1e-12
SUBADDITIVE_RTOL = 1e-9
PROBE_THRESHOLD = 1e6
PROBE_CAP = 1e12
GROWTH_RTOL = 1e-3


def default_grid():
    """Integers 0..64 followed by 121 log-spaced points in [1e-6, 1e6]."""
    ints = np.arange(0, 65, dtype=float)
    logs = np.logspace(-6, 6, 121)
    return tuple(float(v) for v in np.concatenate([ints, logs]))


@dataclass(frozen=True)
class ModulusFunction:
    """A black-box modulus with a claim about unboundedness.

    ``evaluator`` must accept a float ndarray and return an array of the same
    shape.
    """

    evaluator: object = field(compare=False)
    name: str
    is_unbounded: bool = True
    validation_grid: tuple = field(default_factory=default_grid, compare=False, repr=False)

    def __call__(self, x):
        scalar = np.ndim(x) == 0
        out = np.asarray(self.evaluator(np.asarray(x, dtype=float)), dtype=float)
        return float(out) if scalar else out

    def compose(self, inner):
        """Return ``self ∘ inner``; the result still has to be validated."""
        outer = self

        def evaluator(x):
            return outer.evaluator(inner.evaluator(x))

        return ModulusFunction(
            evaluator,
            f"{self.name}∘{inner.name}",
            self.is_unbounded and inner.is_unbounded,
            self.validation_grid,
        )

    def __str__(self):
        return self.name


@dataclass
class AxiomResult:
    status: str  # holds | fails | inconclusive-bounded | not-claimed
    witness: tuple = None
    detail: str = ""

    def to_dict(self):
        return {"status": self.status, "witness": list(self.witness) if self.witness else None, "detail": self.detail}


@dataclass
class ValidationReport:
    name: str
    axioms: dict

    @property
    def ok(self):
        """True when every axiom the function claims holds."""
        return all(a.status in ("holds", "not-claimed") for a in self.axioms.values())

    def failures(self):
        return {k: a for k, a in self.axioms.items() if a.status == "fails"}

    def to_dict(self):
        return {"name": self.name, "ok": self.ok, "axioms": {k: a.to_dict() for k, a in self.axioms.items()}}


def _evaluate_grid(f, grid):
    values = np.asarray(f.evaluator(np.asarray(grid, dtype=float)), dtype=float)
    if values.shape != np.shape(grid):
        raise InvalidModulusError(f"{f.name}: evaluator returned shape {values.shape} for grid of {len(grid)} points")
    bad = ~np.isfinite(values)
    if bad.any():
        point = float(np.asarray(grid)[np.argmax(bad)])
        raise InvalidModulusError(f"{f.name}: non-finite value at t={point!r}", point=point)
    return values


def _probe_unbounded(f, threshold, cap, growth_rtol):
    probes = []
    t = 1.0
    while t <= cap:
        probes.append(t)
        t *= 2.0
    ts = np.array(probes)
    vals = _evaluate_grid(f, ts)
    over = np.flatnonzero(vals > threshold)
    if over.size:
        i = int(over[0])
        return AxiomResult("holds", (float(ts[i]), float(vals[i])), f"f exceeds {threshold:g} at t={ts[i]:g}")
    # Semi-decision at the cap: a bounded increasing function has summable
    # increments per doubling, so require increments that neither vanish nor
    # decay by more than half over the last ten doublings.
    inc = np.diff(vals)
    scale = max(float(vals[0]), np.finfo(float).tiny)
    last, earlier = float(inc[-1]), float(inc[-11])
    if last > growth_rtol * scale and last >= 0.5 * earlier:
        return AxiomResult(
            "holds",
            (float(ts[-1]), float(vals[-1])),
            f"sustained growth: f(2t)-f(t) = {last:.4g} at t={ts[-2]:g} (no saturation before cap {cap:g})",
        )
    return AxiomResult(
        "inconclusive-bounded",
        (float(ts[-1]), float(vals[-1])),
        f"f stays below {threshold:g} up to {cap:g} and growth saturates",
    )


def validate_modulus(
    f,
    monotone_tol=MONOTONE_TOL,
    subadditive_rtol=SUBADDITIVE_RTOL,
    probe_threshold=PROBE_THRESHOLD,
    probe_cap=PROBE_CAP,
    growth_rtol=GROWTH_RTOL,
):
    """Check the modulus axioms of ``f`` on its validation grid.

    Returns a :class:`ValidationReport` whose axioms are ``zero``,
    ``nonnegative``, ``monotone``, ``subadditive`` and ``unbounded``.  Failed
    axioms carry a witness: the offending point or pair.  Pairs are searched
    over the integer part of the grid first, so the smallest integer
    counterexample is reported when one exists.

    Raises
    ------
    InvalidModulusError
        If the evaluator returns a non-finite value at a grid point.
    """
    grid = np.asarray(f.validation_grid, dtype=float)
    values = _evaluate_grid(f, grid)
    axioms = {}

    f0 = float(_evaluate_grid(f, np.array([0.0]))[0])
    axioms["zero"] = AxiomResult("holds") if f0 == 0.0 else AxiomResult("fails", (0.0, f0), f"f(0) = {f0!r}")

    neg = np.flatnonzero(values < 0)
    if neg.size:
        i = int(neg[0])
        axioms["nonnegative"] = AxiomResult("fails", (float(grid[i]), float(values[i])))
    else:
        axioms["nonnegative"] = AxiomResult("holds")

    order = np.argsort(grid, kind="stable")
    xs, fx = grid[order], values[order]
    drops = np.flatnonzero(fx[1:] < fx[:-1] - monotone_tol)
    if drops.size:
        i = int(drops[0])
        axioms["monotone"] = AxiomResult(
            "fails", (float(xs[i]), float(xs[i + 1])), f"f({xs[i]:g}) = {fx[i]:.6g} > f({xs[i+1]:g}) = {fx[i+1]:.6g}"
        )
    else:
        axioms["monotone"] = AxiomResult("holds")

    axioms["subadditive"] = _check_subadditive(f, grid, values, subadditive_rtol)

    probe = _probe_unbounded(f, probe_threshold, probe_cap, growth_rtol)
    if f.is_unbounded:
        axioms["unbounded"] = probe
    else:
        axioms["unbounded"] = AxiomResult("not-claimed", probe.witness, probe.detail)
    return ValidationReport(f.name, axioms)


def _check_subadditive(f, grid, values, rtol):
    ints = grid == np.round(grid)
    blocks = [np.flatnonzero(ints), np.arange(len(grid))]
    for block in blocks:
        x, fx = grid[block], values[block]
        X, Y = np.meshgrid(x, x, indexing="ij")
        FX, FY = np.meshgrid(fx, fx, indexing="ij")
        upper = np.triu(np.ones_like(X, dtype=bool))
        fxy = _evaluate_grid(f, (X + Y)[upper])
        rhs = (FX + FY)[upper]
        bad = np.flatnonzero(fxy > rhs + rtol * np.maximum(1.0, np.abs(rhs)))
        if bad.size:
            i = int(bad[0])
            a, b = float(X[upper][i]), float(Y[upper][i])
            return AxiomResult(
                "fails", (a, b), f"f({a + b:g}) = {fxy[i]:.6g} > f({a:g}) + f({b:g}) = {rhs[i]:.6g}"
            )
    return AxiomResult("holds")


def _power(p):
    if not 0 < p <= 1:
        raise ValueError(f"power modulus needs p in (0, 1], got {p}")
    return ModulusFunction(lambda t: np.power(t, p), f"power({p:g})", True)


CATALOG = {
    "identity": lambda: ModulusFunction(lambda t: np.array(t, dtype=float), "identity", True),
    "log1p": lambda: ModulusFunction(np.log1p, "log1p", True),
    "sqrt": lambda: ModulusFunction(np.sqrt, "sqrt", True),
    "bounded_rational": lambda: ModulusFunction(lambda t: t / (1.0 + t), "bounded_rational", False),
}

_POWER_RE = re.compile(r"^power\(\s*([0-9.eE+-]+)\s*\)$")


def builtin_modulus(name):
    """Look up a catalog modulus by name.

    The catalog holds ``identity``, ``log1p``, ``sqrt``, ``bounded_rational``
    and the family ``power(p)`` for p in (0, 1].
    """
    name = name.strip()
    if name in CATALOG:
        return CATALOG[name]()
    m = _POWER_RE.match(name)
    if m:
        return _power(float(m.group(1)))
    raise UnknownModulusError(name, list(CATALOG) + ["power(p)"])


def modulus_from_expr(expr, name=None, is_unbounded=True):
    """Build a modulus from an arithmetic expression in ``t``."""
    compiled = Expression(expr, var="t")
    return ModulusFunction(compiled, name or expr, is_unbounded)
