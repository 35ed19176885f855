"""Surrogate workflow on an analytic test problem with two Gaussian bumps.

A handful of weighted-sum solutions serve as data, a degree-4 polynomial
objective vector is fitted, and its critical set is compared with the true one.
The overfitting guard rejects degree 5 for 17 points.

Run: python3 demos/surrogate_lh22.py
"""
import numpy as np

from invmop import DescentOptions, gen_scalarized_dataset, generate_monomial_basis, solve_inverse
from invmop.critical_set import cluster_components, filter_near_data, grid_scan, hausdorff
from invmop.objective import lh22_objective
from invmop.solver import OverfittingError

box = [[-0.75, 0.75], [-2.5, 0.12]]
f = lh22_objective()
data = gen_scalarized_dataset(f, 26, [[0.0, 0.0], [0.0, -2.0]], DescentOptions(max_step=10.0), box=box)
print(f"{data.N} converged weighted-sum solutions; weights without one: {data.meta['excluded_weights']}")

try:
    solve_inverse(data, generate_monomial_basis(2, 5), guard_overfitting=True)
except OverfittingError as exc:
    print("degree 5:", exc)

sol = solve_inverse(data, generate_monomial_basis(2, 4), guard_overfitting=True)
surrogate = cluster_components(grid_scan(sol.objective, box, 301, np.inf, method="crossing"))
kept = filter_near_data(surrogate, data, 0.1)
truth = grid_scan(f, box, 301, np.inf, method="crossing")
print(f"surrogate critical set: {surrogate.labels.max() + 1} components, "
      f"{len(np.unique(kept.labels))} near the data")
print(f"Hausdorff distance to the true critical set: {hausdorff(kept.X, truth.X):.3f}")
# The fit misses part of the true critical set away from the data (largest gap
# near (0.33, -0.86)), so this stand-in data does not reach a 0.05 match.
