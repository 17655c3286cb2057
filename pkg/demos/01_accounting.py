"""Privacy accounting walkthrough.

Shows how the cost of a whole adaptive hyperparameter search is computed
from the base training algorithm's guarantee, the stopping-time
distribution NegBin(theta, gamma), and the adaptivity bounds (C, c).
"""

import math

from dphypo import (
    AdaptivityBounds,
    NegBinParams,
    RdpCurve,
    RdpPoint,
    hypo_curve,
    hypo_pure_dp,
    rdp_to_dp,
    solve_base_budget,
)

# --- Pure DP ----------------------------------------------------------------
# With theta=1 (geometric stopping time) and no adaptivity (C=c=1) the whole
# search costs exactly 3x the base budget.
params = NegBinParams(theta=1.0, gamma=0.5)
no_adapt = AdaptivityBounds(C=1.0, c=1.0)
print("pure DP, base eps=1, no adaptivity:", hypo_pure_dp(1.0, params, no_adapt))

# Allowing the sampling density to drift by a factor of 2 around the prior
# (C/c = 2) adds (2 + theta) * log(C/c) on top.
adapt = AdaptivityBounds(C=4 / 3, c=2 / 3)
print("pure DP, base eps=1, C/c=2:        ", hypo_pure_dp(1.0, params, adapt))

# --- RDP --------------------------------------------------------------------
# A Gaussian-mechanism-style base curve: eps(alpha) = rho * alpha.
rho = 0.05
alphas = (1.5, 2.0, 4.0, 8.0, 16.0, 32.0)
base = RdpCurve(points=tuple(RdpPoint(a, rho * a) for a in alphas))
total = hypo_curve(base, params, adapt)
print("\nbase curve -> search curve (alpha: eps):")
for p_in, p_out in zip(base.points, total.points):
    print(f"  {p_in.alpha:5.1f}: {p_in.epsilon:.4f} -> {p_out.epsilon:.4f}")

delta = 1e-5
print(f"(eps, delta)-DP of the search at delta={delta}: "
      f"{rdp_to_dp(total, delta):.4f}")

# --- Inverting the accounting ------------------------------------------------
# Given a total budget, solve for the base scale that meets it.
shape = lambda s: RdpCurve(points=tuple(RdpPoint(a, s * a) for a in alphas))
target = 8.0
scale = solve_base_budget(target, delta, params, adapt, shape)
achieved = rdp_to_dp(hypo_curve(shape(scale), params, adapt), delta)
print(f"\nbase rho meeting total eps={target} at delta={delta}: "
      f"{scale:.6f} (achieved {achieved:.6f})")
