"""Mean WLN at the optimum point under pure dephasing and non-radiative decay.

All configurations share the bootstrap seeds, so differences between rows
are not masked by independent shot noise.
"""

import argparse

from rfwigner.analysis import bootstrap
from rfwigner.config import RunConfig, decoherence_budget


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeats", type=int, default=20)
    ap.add_argument("--gamma-phi", default="0,0.05,0.1,0.2")
    ap.add_argument("--gamma-mhz", type=float, default=20.0)
    ap.add_argument("--budget-khz", type=float, default=89.0)
    ap.add_argument("--ratios", default="0.5,2,8", help="gamma_nr / gamma_phi splits of the budget")
    args = ap.parse_args()

    base = RunConfig(t0=0.0, initial="steady")
    for g in (float(s) for s in args.gamma_phi.split(",")):
        rep = bootstrap(base.replace(gamma_phi=g), args.repeats)
        m, s = rep.mean_std(rep.wln_values)
        print(f"gamma_phi={g:<6g} wln {m:.5f} +- {s:.5f}")
    for ratio in (float(s) for s in args.ratios.split(",")):
        rates = decoherence_budget(args.gamma_mhz, args.budget_khz, ratio)
        rep = bootstrap(base.replace(**rates), args.repeats)
        m, s = rep.mean_std(rep.wln_values)
        print(f"budget split nr/phi={ratio:<4g} gamma_phi={rates['gamma_phi']:.3e} "
              f"gamma_nr={rates['gamma_nr']:.3e} wln {m:.5f} +- {s:.5f}")


if __name__ == "__main__":
    main()
