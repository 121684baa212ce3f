"""Sod shock tube: both schemes against the exact Riemann solution.

Run with ``python3 demos/sod_validation.py [n]``.  Prints the star state,
the L1 density error of each scheme and a coarse text profile.
"""
import sys

import numpy as np

from kconv import FlmParams, GasModel, Grid2D, exact_riemann, run_flm, run_grp, star_pressure
from kconv.bench import sod_initial

LEFT, RIGHT = [1.0, 0.0, 1.0], [0.125, 0.0, 0.1]


def main(n=128, t_end=0.2):
    gas = GasModel(1.4)
    p, u = (float(v) for v in star_pressure(np.array(LEFT), np.array(RIGHT), gas)[:2])
    print(f"star state: p* = {p:.5f}, u* = {u:.5f}")

    grid = Grid2D(n, "transmissive")
    s0 = sod_initial(grid, gas)
    gas = gas.with_floor_from(s0)
    x = grid.centers_1d()
    exact = exact_riemann(LEFT, RIGHT, gas, (x - 0.5) / t_end)[0]

    rows = {}
    for name, run in (("flm", lambda: run_flm(s0, FlmParams(), gas, t_end, diagnostics=False)),
                      ("grp", lambda: run_grp(s0, gas, t_end, diagnostics=False))):
        final, _ = run()
        rows[name] = final.rho[:, 0]
        print(f"{name}: L1 density error {np.mean(np.abs(rows[name] - exact)):.4f} on n={n}")

    print("\n    x    exact    flm     grp")
    for i in range(0, n, max(n // 16, 1)):
        print(f"{x[i]:5.3f}  {exact[i]:.4f}  {rows['flm'][i]:.4f}  {rows['grp'][i]:.4f}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 128)
