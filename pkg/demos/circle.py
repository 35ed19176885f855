"""Recover an objective vector whose Pareto critical set is the unit circle.

Run: python3 demos/circle.py
"""
import numpy as np

from invmop import gen_circle, generate_monomial_basis, solve_inverse
from invmop.critical_set import cluster_components, grid_scan, hausdorff

data = gen_circle(1000)
basis = generate_monomial_basis(2, 3)
sol = solve_inverse(data, basis)

s = sol.spectrum.singular_values
print("smallest singular values:", np.array2string(s[:4], precision=3))
print(f"{len(sol.selected)} vectors below the gap; the KKT conditions hold exactly on a 2-D space")

# A readable member of the solution space: scale so f1 has x1^3 coefficient 1.
V = sol.spectrum.right_vectors[:, sol.selected]
labels = basis.labels()
cubes = [labels.index("x1^3"), labels.index("x2^3")]
c = (V @ np.linalg.lstsq(V[cubes], np.ones(2), rcond=None)[0]).reshape(2, basis.d)
for i, row in enumerate(c, start=1):
    terms = [f"{v:+.3g} {m}" for v, m in zip(row, labels) if abs(v) > 1e-9]
    print(f"f{i} =", " ".join(terms))

# Where is the recovered critical set? Scan a grid and compare with the circle.
cloud = cluster_components(grid_scan(sol.objective, [[-1.5, 1.5], [-1.5, 1.5]], 301, np.inf, method="crossing"))
t = np.linspace(0, 2 * np.pi, 2000, endpoint=False)
circle = np.stack([np.cos(t), np.sin(t)], axis=1)
print(f"grid scan: {len(cloud)} nodes in {cloud.labels.max() + 1} component(s), "
      f"Hausdorff distance to the circle {hausdorff(cloud.X, circle):.4f}")
