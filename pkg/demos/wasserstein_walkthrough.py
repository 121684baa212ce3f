"""Exact Wasserstein distances between small discrete measures.

Shows the transport plan for a split-mass example and the E4 building
block: the empirical measure of the per-level states in one cell.
"""
import numpy as np

from kconv import DiscreteMeasure, wq_distance


def show(title, mu, nu, q=1.0):
    d, plan = wq_distance(mu, nu, q)
    print(f"{title}: W_{q:g} = {d:.6f}")
    print(np.array2string(plan.plan, precision=3, suppress_small=True), "\n")


def main():
    # one point against two: the mass at 0 must split
    mu = DiscreteMeasure(np.array([[0.0]]), np.array([1.0]))
    nu = DiscreteMeasure(np.array([[-1.0], [2.0]]), np.array([0.5, 0.5]))
    show("split mass", mu, nu)
    show("split mass", mu, nu, q=2.0)

    # per-level states (rho, m1, m2, S, E) in one cell for two hierarchies
    rng = np.random.default_rng(1)
    coarse = rng.normal(size=(3, 5)) * 0.1 + [1.0, 0.0, 0.0, 0.5, 2.5]
    fine = np.vstack([coarse, rng.normal(size=(1, 5)) * 0.1 + [1.0, 0.0, 0.0, 0.5, 2.5]])
    show("3 levels vs 4 levels", DiscreteMeasure.empirical(coarse), DiscreteMeasure.empirical(fine))


if __name__ == "__main__":
    main()
