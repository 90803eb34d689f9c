#!/usr/bin/env python3
"""Recompute the cubature feasibility calibration table.

For each exactness degree K the script bisects on the scaled parameter
c = rho * K for the largest lattice rho at which the positive-weight solve
still succeeds (seed 0, auto solver, residual 1e-9).  Results land in
src/sphradon/data/cubature_calibration.json, which the package ships as
frozen data; rho_for_degree() consumes it with a 0.7 safety factor.

Run time is a few minutes; only rerun when the solver or lattice
construction changes.
"""

import argparse
import json
import os
import time

from sphradon import cubature, lattice
from sphradon.errors import NumericalError


def feasible(K: int, rho: float) -> bool:
    lat = lattice.generate("s2", rho, seed=0)
    try:
        cubature.solve_weights(lat, K, method="auto")
        return True
    except NumericalError:
        return False


def calibrate(degrees, lo=1.8, hi=3.4, steps=7):
    table = {}
    for K in degrees:
        a, b = lo, hi
        if not feasible(K, a / K):
            print(f"K={K}: infeasible even at c={a}; recording 0")
            table[K] = 0.0
            continue
        for _ in range(steps):
            mid = 0.5 * (a + b)
            t0 = time.time()
            ok = feasible(K, mid / K)
            print(f"K={K} c={mid:.3f} rho={mid/K:.4f} -> {ok} ({time.time()-t0:.1f}s)")
            if ok:
                a = mid
            else:
                b = mid
        table[K] = a / K
        print(f"K={K}: rho_max ~ {table[K]:.4f} (c ~ {a:.3f})")
    return table


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=os.path.join(
        os.path.dirname(__file__), "..", "src", "sphradon", "data",
        "cubature_calibration.json"))
    ap.add_argument("--degrees", type=int, nargs="*",
                    default=[2, 3, 4, 6, 8, 10, 12, 16, 20, 24, 28, 32])
    args = ap.parse_args()

    table = calibrate(args.degrees)
    os.makedirs(os.path.dirname(args.out), exist_ok=True)
    with open(args.out, "w") as fh:
        json.dump({"rho_max": {str(k): v for k, v in sorted(table.items())},
                   "seed": 0, "residual_tol": 1e-9}, fh, indent=1, sort_keys=True)
        fh.write("\n")
    print("wrote", args.out)


if __name__ == "__main__":
    main()
