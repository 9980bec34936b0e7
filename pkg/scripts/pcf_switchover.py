"""Where the pieces of D_nu agree: evidence for MACLAURIN_MAX and ASYMPTOTIC_MIN.

For each order on a grid in [-6, 6]:

* the asymptotic series at z is compared with the value obtained by running
  Weber's equation up from the Maclaurin data at 0 (upward continuation is
  unstable for the recessive solution, so only moderate z are meaningful);
* the Maclaurin start at z is compared with the downward continuation from
  the asymptotic series at ASYMPTOTIC_MIN.

Prints a TSV table of worst relative disagreement per z.

    python3 scripts/pcf_switchover.py
"""
from __future__ import annotations

import argparse

import numpy as np

from cmpiv.specfun import ASYMPTOTIC_MIN, _asymptotic, _maclaurin, _weber_taylor


def downward(nu: float, z: float, start: float = ASYMPTOTIC_MIN) -> tuple[float, float]:
    y, dy = _asymptotic(nu, start)
    zc = start
    while zc - z > 1e-15:
        h = -min(1.0, zc - z)
        y, dy = _weber_taylor(nu, zc, y, dy, h)
        zc += h
    return y, dy


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--orders", type=int, default=49)
    args = ap.parse_args()
    nus = np.linspace(-6, 6, args.orders)

    # disagreement is measured against |D| + |D'| so that zeros of D_nu
    # (positive orders) do not dominate the table
    print("#z\tmaclaurin_vs_downward\tasymptotic_vs_downward_from_16")
    for z in (0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0):
        mac = asy = None
        for nu in nus:
            y, dy = downward(nu, z)
            if z <= 4:
                e = abs(_maclaurin(nu, z)[0] - y) / (abs(y) + abs(dy))
                mac = e if mac is None else max(mac, e)
            if z >= 6:
                fy, fdy = downward(nu, z, start=16.0)
                e = abs(_asymptotic(nu, z)[0] - fy) / (abs(fy) + abs(fdy))
                asy = e if asy is None else max(asy, e)
        cells = ["" if v is None else f"{v:.3e}" for v in (mac, asy)]
        print(f"{z:g}\t{cells[0]}\t{cells[1]}")


if __name__ == "__main__":
    main()
