"""Noisy data from a sample average approximation of a stochastic location problem.

Each weighted sum is solved with its own 50 samples, so the data scatter around
the true Pareto set, the segment from a = (-1, -1) to (1, 0).

Run: python3 demos/stochastic_location.py
"""
import numpy as np

from invmop import SaaConfig, gen_saa_location, generate_monomial_basis, solve_inverse
from invmop.critical_set import grid_scan, hausdorff
from invmop.objective import LOCATION_A, LOCATION_COEF

data = gen_saa_location(SaaConfig(sample_count=50, scalarization_count=1000, seed=0))
basis = generate_monomial_basis(2, 2)

sol = solve_inverse(data, basis, skip_degenerate=True)
for note in sol.notes:
    print(note)
print("singular values:", np.array2string(sol.spectrum.singular_values[:5], precision=3))

# Within the selected span, take the member closest to the true expectation.
sol = solve_inverse(data, basis, skip_degenerate=True, align_to=LOCATION_COEF)
c = sol.coefficient * LOCATION_COEF[0] / sol.coefficient[0]
print("recovered:", np.array2string(c, precision=3))
print("true     :", np.array2string(LOCATION_COEF, precision=3))

cloud = grid_scan(sol.objective, [[-1.2, 1.2], [-1.2, 0.2]], 301, 1e-3)
seg = LOCATION_A + np.linspace(0, 1, 4001)[:, None] * (np.array([1.0, 0.0]) - LOCATION_A)
print(f"Hausdorff distance of the recovered critical set to the segment: {hausdorff(cloud.X, seg):.3f}")
