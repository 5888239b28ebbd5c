#!/usr/bin/env python3
"""When do the BLP and RHP measures agree?

For amplitude damping into a Lorentzian reservoir there is only one
decoherence channel, and the PD1 layer collapses: a process is either
Markovian (gamma0 <= lambda/2, the survival amplitude G decays
monotonically) or essentially non-Markovian (G oscillates through zeros and
|G| regrows in between). With the hierarchy degenerate, information
backflow appears exactly where CP-divisibility fails, so both measures
detect the same parameter region.
"""

from kdivis import divisibility, measures, models


def main():
    lam = 1.0
    print(f"{'gamma0':>7} | {'class':>5} | {'BLP':>10} | {'RHP':>10} | first zero of G")
    print("-" * 60)
    for gamma0 in (0.2, 0.45, 0.6, 1.0, 2.0):
        model = models.AmplitudeDampingModel(gamma0, lam)
        verdict = divisibility.classify(model, horizon=40.0)
        blp = measures.blp_measure(model, 40.0).measure
        rhp = measures.rhp_measure(model, 40.0).measure
        zero = model.first_zero()
        zero_s = "none" if zero is None else f"t* = {zero:.2f}"
        print(f"{gamma0:7.2f} | {str(verdict.pd_class):>5} | {blp:10.3e} |"
              f" {rhp:10.3e} | {zero_s}")

    print()
    print("Contrast: the two-qubit C-NOT model has a genuine PD1 layer, and")
    print("there the BLP measure goes blind while RHP still fires:")
    print(f"{'a':>5} | {'class':>5} | {'BLP':>10} | {'RHP':>10}")
    print("-" * 42)
    for a in (0.1, 0.25, 0.4, 0.5):
        model = models.CnotControlModel(J=1.0, gamma=0.3, a=a)
        verdict = divisibility.classify(model, horizon=10.0)
        blp = measures.blp_measure(model, 10.0).measure
        rhp = measures.rhp_measure(model, 10.0).measure
        print(f"{a:5.2f} | {str(verdict.pd_class):>5} | {blp:10.3e} | {rhp:10.3e}")


if __name__ == "__main__":
    main()
