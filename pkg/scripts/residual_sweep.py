"""Scaled residual |x| |q_ode - q_asym| across kappa at fixed alpha.

For every kappa in the singular regime, prints the worst scaled residual on
[x_end, -6] and the end-window ratio used by the acceptance suite.  Use
--near-separatrix to add kappas with |rho| - 1 < 0.05, where b is large and
the O(1/x) constant is not expected to stay small.

    python3 scripts/residual_sweep.py --alpha 0.25
"""
from __future__ import annotations

import argparse

import numpy as np

from cmpiv.connection import Params, Regime, classify, connection_constants, kappa_star
from cmpiv.errors import CmpivError
from cmpiv.validation import residual_scan


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=0.0)
    ap.add_argument("--x-end", type=float, default=-12.0)
    ap.add_argument("--near-separatrix", action="store_true")
    args = ap.parse_args()

    ks = kappa_star(args.alpha)
    factors = [-3.0, -1.0, -0.3, 1.5, 2.0, 4.0, 10.0]
    if args.near_separatrix:
        factors += [1.02, 1.005]
    grid = np.round(np.arange(args.x_end, -6.0 + 1e-9, 0.01), 10)
    print("#kappa\tabs_rho\tb\tpsi\tmax_scaled\tend_ratio\tincluded")
    for f in factors:
        k = f * ks
        p = Params(args.alpha, k)
        if classify(p) is not Regime.SINGULAR:
            continue
        d = connection_constants(p)
        try:
            rep = residual_scan(p, grid)
        except CmpivError as e:
            print(f"{k:.17g}\t{abs(d.rho):.6g}\t{d.b:.6g}\t{d.psi:.6g}\tfailed: {e}")
            continue
        print(f"{k:.17g}\t{abs(d.rho):.6g}\t{d.b:.6g}\t{d.psi:.6g}\t{rep.max_scaled:.4f}\t"
              f"{rep.end_ratio():.4f}\t{len(rep.included())}")


if __name__ == "__main__":
    main()
