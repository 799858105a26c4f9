"""Build the two fixed basis families and check their structural properties.

Run:  python demos/01_basis_systems.py
"""

import numpy as np

from fbc2c.basis import (WindowKind, build_rfm, eval_window, uniform_fem_basis,
                         window_values)

# A windowed random-feature basis: 4 partitions on [0, 1], 2 features each,
# feature parameters drawn uniformly from [-3, 3].
rfm = build_rfm(dim=1, partitions_per_dim=[4], features_per_partition=2,
                range_bound=3.0, seed=7, bounds=[[0.0, 1.0]])
print(f"random-feature basis: m = {rfm.size} functions, "
      f"{len(rfm.partitions)} partitions x {rfm.features_per_partition[0]} features")

# The smooth windows form a partition of unity: they sum to one everywhere on
# the (closed) domain because edge windows are clamped outward.
x = np.linspace(0.0, 1.0, 2001)
total = sum(window_values(p, x[:, None]) for p in rfm.partitions)
print(f"partition-of-unity deviation: {np.abs(total - 1).max():.2e}")

# Window anatomy: plateau, sine ramp, and cutoff, on the rescaled coordinate.
part = rfm.partitions[1]
for xi in (part.center[0], part.center[0] + part.radius[0],
           part.center[0] + 1.3 * part.radius[0]):
    print(f"  window at x = {xi:.4f}: {eval_window(part, [xi]):.4f}")

# Basis values are windowed activations, so they live in [-1, 1].
phi = rfm.design_matrix(x)
print(f"design matrix {phi.shape}, value range [{phi.min():.3f}, {phi.max():.3f}]")

# Rebuilding with the same seed reproduces the basis bit for bit; datasets
# therefore store only structural parameters plus the seed.
again = build_rfm(1, [4], 2, 3.0, seed=7, bounds=[[0.0, 1.0]])
print(f"deterministic rebuild: {np.array_equal(phi, again.design_matrix(x))}")

# The 1D P1 family: hat functions that interpolate nodal values exactly.
fem = uniform_fem_basis(9)
nodes = fem.nodes
print(f"\nP1 basis: m = {fem.size} nodes, design at nodes is identity: "
      f"{np.array_equal(fem.design_matrix(nodes), np.eye(9))}")

# Any piecewise-linear function is reproduced exactly between its nodes.
g = np.sin(2.5 * nodes)
err = np.abs(fem.design_matrix(x) @ g - np.interp(x, nodes, g)).max()
print(f"piecewise-linear reproduction error: {err:.2e}")
