"""WLN over a drive-strength x integration-time grid.

Checkpoints one file per point, so an interrupted map resumes where it
stopped. Example (the full map is slow)::

    python scripts/sweep_map.py --omegas 0.1:1.0:0.1 --Ts 0.4:6.0:0.2 --out out/map
"""

import argparse
import os

from rfwigner.analysis import run_sweep
from rfwigner.cli import _float_list
from rfwigner.config import RunConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--omegas", default="0.2,0.3536,0.6")
    ap.add_argument("--Ts", default="0.4,1.8,4.0")
    ap.add_argument("--trajectories", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="out/sweep")
    args = ap.parse_args()

    cfg = RunConfig(t0=0.0, initial="steady", trajectories=args.trajectories, seed=args.seed,
                    output_dir=args.out)
    os.makedirs(args.out, exist_ok=True)
    res = run_sweep(_float_list(args.omegas), _float_list(args.Ts), cfg,
                    checkpoint_dir=os.path.join(args.out, "checkpoints"))
    res.write(os.path.join(args.out, "sweep.csv"), os.path.join(args.out, "sweep.json"))
    print("omega \\ T " + " ".join(f"{t:8.2f}" for t in res.Ts))
    for o, row in zip(res.omegas, res.wln):
        print(f"{o:9.4f} " + " ".join(f"{v:8.5f}" for v in row))


if __name__ == "__main__":
    main()
