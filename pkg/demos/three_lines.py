"""Three line segments: choosing the degree, then spotting a spurious component.

Run: python3 demos/three_lines.py
"""
import numpy as np

from invmop import degree_sweep, gen_three_lines, generate_monomial_basis, solve_inverse
from invmop.critical_set import cluster_components, filter_near_data, grid_scan

data = gen_three_lines(500)

# The smallest singular value collapses once the basis is rich enough.
for deg, s1 in degree_sweep(data, range(1, 8)).items():
    print(f"degree {deg}: smallest singular value {s1:.2e}")

sol = solve_inverse(data, generate_monomial_basis(2, 5))
print("selected indices (1-based):", (sol.selected + 1).tolist())

cloud = cluster_components(grid_scan(sol.objective, [[0, 1], [-0.5, 0.5]], 301, np.inf, method="crossing"))
sizes = np.bincount(cloud.labels)
print(f"critical set of the fit: {len(sizes)} components with sizes {sizes.tolist()}")

kept = filter_near_data(cloud, data, 0.02)
sizes = np.unique(kept.labels, return_counts=True)[1]
print(f"after dropping components away from the data: sizes {sizes.tolist()}, "
      f"{len(cloud) - len(kept)} nodes removed")
# The single nodes are segment endpoints, where one gradient vanishes and the
# scan marks an isolated grid edge; they lie on the data and are kept.
