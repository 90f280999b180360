"""Tri-state outcomes with attached diagnostics."""

from dataclasses import dataclass, field

HOLDS = "holds"
FAILS = "fails"
INCONCLUSIVE = "inconclusive"
OUTCOMES = (HOLDS, FAILS, INCONCLUSIVE)


@dataclass
class Verdict:
    """``holds``/``fails`` only when the certifying numeric condition met its tolerance."""

    outcome: str
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.outcome not in OUTCOMES:
            raise ValueError(f"outcome must be one of {OUTCOMES}, got {self.outcome!r}")

    @property
    def holds(self):
        return self.outcome == HOLDS

    @property
    def fails(self):
        return self.outcome == FAILS

    @property
    def inconclusive(self):
        return self.outcome == INCONCLUSIVE

    def negated(self, **extra):
        flip = {HOLDS: FAILS, FAILS: HOLDS, INCONCLUSIVE: INCONCLUSIVE}[self.outcome]
        return Verdict(flip, {**extra, "negated": self.to_dict()})

    def to_dict(self):
        return {"outcome": self.outcome, "diagnostics": self.diagnostics}


def conjunction(verdicts):
    """Kleene conjunction: any fails wins, then any inconclusive, else holds."""
    outcomes = [v.outcome for v in verdicts]
    if FAILS in outcomes:
        return FAILS
    if INCONCLUSIVE in outcomes:
        return INCONCLUSIVE
    return HOLDS
