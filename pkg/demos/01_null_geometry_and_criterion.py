"""Null-frame geometry and the global-existence criterion, pointwise.

The string surface y = phi(t, x) is timelike while the induced metric
determinant g = 1 - Lphi*Lbphi stays positive; the same quantity is the
hyperbolicity discriminant of the first-order evolution system.  This demo
walks the pointwise toolkit: null coordinates, characteristic speeds, the
polynomial weights, the corrected null multipliers, and finally the
data-restricted speed criterion that separates globally smooth families from
blow-up families.
"""

import numpy as np

from stringlab import (DataFamily, ProfileSpec, blowup_fixture, causal_norm,
                       criterion_for_family, eigenvalues, metric_scalars, multiplier,
                       null_coords, null_gradient, weight_a)

print(__doc__)

# -- null frame at a point --------------------------------------------------
pt = null_coords(t=2.0, x=1.0)
print(f"event (t, x) = (2, 1): retarded u = {pt.u}, advanced ub = {pt.ub}")

ng = null_gradient(w=0.3, p=-0.2)     # w = dt(phi), p = dx(phi)
ms = metric_scalars(ng)
print(f"gradients (w, p) = (0.3, -0.2): Lphi = {ng.lphi:.2f}, Lbphi = {ng.lbphi:.2f}")
print(f"determinant g = {ms.g:.4f};  g^uu = {ms.guu:.4f} <= 0, g^ubub = {ms.gubub:.4f} <= 0")

lam = eigenvalues(0.3, -0.2)
print(f"characteristic speeds: lambda- = {lam[0]:+.4f}, lambda+ = {lam[1]:+.4f} (|.| <= 1)\n")

# -- weights and multipliers -------------------------------------------------
gamma = 0.5
print(f"weight a(x) = (1+x^2)^(1+gamma) at x = 0, 1, 2 (gamma = {gamma}):",
      ", ".join(f"{weight_a(s, gamma):.4f}" for s in (0.0, 1.0, 2.0)))
co = multiplier("TL", pt, ng, gamma)
print(f"multiplier TL at this event: cl = {co.cl:.4f} (weight), clb = {co.clb:.6f} "
      f"(weight * |Lphi|^2)")
print(f"its squared g-norm: {causal_norm('TL', pt, ng, gamma):+.6f} (<= 0: non-spacelike)\n")

# -- the criterion on two families -------------------------------------------
x = np.linspace(-24, 24, 2001)
good = DataFamily(gamma=0.5, delta=0.1,
                  f=ProfileSpec("gaussian", 1.0, 0.0, 2.0),
                  fb=ProfileSpec("gaussian", 1.0, 0.0, 2.0))
bad = blowup_fixture()

for name, fam in (("small-delta family", good), ("colliding packets", bad)):
    rep = criterion_for_family(fam, x)
    print(f"{name}: speeds within [{rep.lam_star_lo:+.3f}, {rep.lam_star_hi:+.3f}], "
          f"gap min {rep.gap_min:+.4f}, ordering margin {rep.order_margin:+.4f} "
          f"-> {'global existence expected' if rep.passed else 'finite-time blow-up expected'}")
