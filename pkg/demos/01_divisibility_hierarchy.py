#!/usr/bin/env python3
"""Walk through the divisibility hierarchy on constant-rate Pauli channels.

A qubit Pauli channel with constant rates (g1, g2, g3) is:

  * PD2 (Markovian)       when every rate is nonnegative,
  * PD1 (non-Markovian,
    but invisible to any
    state-pair distance)  when only the pairwise sums are nonnegative,
  * PD0 (essentially
    non-Markovian)        otherwise.

The numeric classifier discovers this from two-point complement maps alone;
here we put it side by side with the closed-form region predicates.
"""

from kdivis import divisibility, models

CASES = [
    (1.0, 1.0, 1.0),     # deep in the Markovian octant
    (0.5, 0.2, 0.1),     # still every rate >= 0
    (1.0, 1.0, -0.5),    # one negative rate, pairwise sums fine
    (0.8, -0.3, 0.6),    # another P-divisible mix
    (1.0, -0.2, -0.5),   # a pairwise sum turns negative
    (-0.2, -0.2, -0.2),  # everything negative
]


def main():
    print(f"{'rates':>22} | {'analytic':>8} | {'numeric':>8} | worst CP violation")
    print("-" * 74)
    for g1, g2, g3 in CASES:
        analytic = divisibility.constant_pauli_class(g1, g2, g3)
        model = models.PauliChannelModel.constant(g1, g2, g3)
        verdict = divisibility.classify(model, horizon=3.0, n_steps=300)
        rates = f"({g1:+.1f}, {g2:+.1f}, {g3:+.1f})"
        print(f"{rates:>22} | {str(analytic):>8} | {str(verdict.pd_class):>8}"
              f" | {verdict.worst_cp_violation:+.2e}")
        assert verdict.pd_class == analytic

    print()
    print("The classifier sees only propagators, yet lands exactly on the")
    print("rate-space regions; its CP witness is the most negative eigenvalue")
    print("of any complement step's Choi matrix over the horizon.")


if __name__ == "__main__":
    main()
