"""Pole field of q(x; kappa) on the negative axis for a sweep of kappa.

For each kappa, integrates to --x-end and prints one row per detected pole
next to its implicit-phase prediction (TSV).  Bounded-regime kappas are
integrated too and simply report no prediction.

    python3 scripts/pole_field.py --alpha 0 --kappas 1 -0.5 0.35 2
"""
from __future__ import annotations

import argparse

from cmpiv.asymptotics import PhaseData, predicted_poles
from cmpiv.connection import Params, Regime, classify, connection_constants
from cmpiv.ode import OdeSettings, integrate
from cmpiv.validation import match_poles


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=0.0)
    ap.add_argument("--kappas", type=float, nargs="+", default=[1.0, -0.5, 0.35, 2.0])
    ap.add_argument("--x-end", type=float, default=-12.0)
    ap.add_argument("--rtol", type=float, default=1e-11)
    args = ap.parse_args()

    print("#kappa\tregime\tx_pole\tresidue_sign\tn\tbranch\tx_implicit")
    for k in args.kappas:
        p = Params(args.alpha, k)
        traj = integrate(p, OdeSettings(rtol=args.rtol), x_end=args.x_end)
        regime = classify(p)
        lookup = {}
        if regime is Regime.SINGULAR:
            d = connection_constants(p)
            lattice = predicted_poles(PhaseData(d.b, d.psi), args.x_end - 2, -1e-6)
            far = [q for q in traj.poles if q.x_pole < -4.0]
            where = {(n, br.value): x for n, br, x in lattice}
            for key, rec in match_poles(far, lattice).items():
                lookup[rec.x_pole] = (*key, where[key])
        for rec in traj.poles:
            n, br, xp = lookup.get(rec.x_pole, ("", "", None))
            xp_s = "" if xp is None else format(xp, ".17g")
            print(f"{k:g}\t{regime.value}\t{rec.x_pole:.17g}\t{rec.residue_sign:+d}\t{n}\t{br}\t{xp_s}")


if __name__ == "__main__":
    main()
