"""Central numerical tolerances.

Every threshold used anywhere in the package lives in one immutable value so
that a run can be tightened or loosened coherently instead of hunting down
magic numbers in individual modules.
"""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    #: Hermiticity / trace deviation accepted when constructing states.
    hermiticity: float = 1e-12
    #: Looser bound used by verification-style checks (TP tests, residuals).
    check: float = 1e-10
    #: Condition number above which a propagator counts as singular.
    cond_threshold: float = 1e8
    #: Per-step witness tolerance for divisibility verdicts, scaled by the
    #: complement step epsilon (a complement deviates from the identity at
    #: order epsilon, so raw eigenvalue thresholds must scale with it).
    violation_per_eps: float = 1e-7
    #: A measure above this value counts as "detected" non-Markovianity.
    detection: float = 1e-5
    #: Allowed change under step halving before RK4 output is rejected.
    integration: float = 1e-6
    #: Absolute target for adaptive quadrature of rate integrals.
    quadrature: float = 1e-10

    def with_(self, **kwargs) -> "Tolerances":
        """Copy with selected fields replaced."""
        return replace(self, **kwargs)


DEFAULT = Tolerances()
