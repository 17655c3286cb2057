"""Bounded-density projection walkthrough.

The adaptive strategy may propose any density over the grid, but only
densities whose ratio to the prior stays in [c, C] keep the privacy
accounting valid. This demo projects an out-of-bounds proposal onto that
set, with and without the KL anchoring penalty.
"""

import numpy as np

from dphypo import (
    AdaptivityBounds,
    DiscreteDensity,
    Prior,
    project_kl_penalized,
    project_l2,
    uniform_density,
)

weights = np.ones(8)
prior = Prior(uniform_density(weights))
bounds = AdaptivityBounds(C=2.0, c=0.5)

# A proposal that piles far too much mass on one point.
raw = np.array([0.55, 0.15, 0.1, 0.05, 0.05, 0.04, 0.03, 0.03])
proposal = DiscreteDensity(values=raw, weights=weights)

projected = project_l2(proposal, bounds, prior)
print("box per point: [%.4f, %.4f]" % (0.5 * 0.125, 2.0 * 0.125))
print("proposal :", np.round(proposal.values, 4))
print("projected:", np.round(projected.values, 4))
print("ratios   :", np.round(projected.values / prior.density.values, 4))

# The KL penalty pulls the solution toward the proposal's shape on the
# coordinates the box does not pin down.
for nu in (0.0, 1.0, 10.0):
    out = project_kl_penalized(proposal, bounds, prior, nu=nu)
    print(f"nu={nu:5.1f}:", np.round(out.values, 4))
