"""Pointwise null-frame geometry of the timelike string surface.

Null coordinates and derivatives::

    u  = (t - x)/2   (retarded)        L  = dt + dx = d/d(ub)
    ub = (t + x)/2   (advanced)        Lb = dt - dx = d/d(u)

The induced metric of the graph y = phi(t, x) is
g_ab = eta_ab + da(phi) db(phi) with determinant g = 1 - Lphi*Lbphi,
which is also the strict-hyperbolicity discriminant 1 + p^2 - w^2 of the
first-order system.

Naming note: the time and space derivatives of phi are called w and p
everywhere in this package, so that the letter u always means the retarded
null coordinate and never the unknown.

All functions are pure, vectorize over numpy arrays, and hold no state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import HyperbolicityLoss, TimelikeViolation

GMIN_DEFAULT = 1e-6


@dataclass(frozen=True)
class NullPoint:
    """Event in both Cartesian and null coordinates; u + ub = t, ub - u = x."""

    t: float
    x: float
    u: float
    ub: float


@dataclass(frozen=True)
class NullGradientPair:
    """Null gradient (Lphi, Lbphi) = (w + p, w - p)."""

    lphi: float
    lbphi: float

    def to_wp(self):
        """Invert back to (w, p); exact up to roundoff."""
        return 0.5 * (self.lphi + self.lbphi), 0.5 * (self.lphi - self.lbphi)


@dataclass(frozen=True)
class MetricScalars:
    """Determinant and inverse-metric null components of the string metric.

    guu and gubub are nonpositive whenever g > 0: the coordinate gradients
    Du, Dub are non-spacelike on a timelike surface.
    """

    g: float
    guu: float
    gubub: float
    guub: float
    timelike: bool


@dataclass(frozen=True)
class MultiplierCoeffs:
    """Null-frame coefficients of a weighted multiplier vector field.

    The field is cl*L + clb*Lb.  For side "TL" the weight rides the advanced
    coordinate, cl = a(ub) and clb = a(ub)*|Lphi|^2; side "TLb" mirrors it,
    clb = a(u) and cl = a(u)*|Lbphi|^2.
    """

    cl: float
    clb: float
    weight: float


def null_coords(t, x) -> NullPoint:
    """Map (t, x) to the null pair (u, ub) = ((t-x)/2, (t+x)/2)."""
    t = np.asarray(t, dtype=float) if np.ndim(t) else float(t)
    x = np.asarray(x, dtype=float) if np.ndim(x) else float(x)
    return NullPoint(t=t, x=x, u=(t - x) / 2.0, ub=(t + x) / 2.0)


def null_gradient(w, p) -> NullGradientPair:
    """Switch (w, p) = (dt phi, dx phi) to the null frame (w+p, w-p)."""
    return NullGradientPair(lphi=w + p, lbphi=w - p)


def metric_scalars(ng: NullGradientPair, gmin: float = GMIN_DEFAULT) -> MetricScalars:
    """Determinant g = 1 - Lphi*Lbphi and inverse components.

    Raises TimelikeViolation when min(g) <= gmin; callers treat that as a
    blow-up indicator.  The cross component guub = -1/2 - Lphi*Lbphi/(4g)
    comes from inverting the 2x2 null-frame metric directly (checked against
    matrix inversion in the tests).
    """
    lphi = np.asarray(ng.lphi, dtype=float)
    lbphi = np.asarray(ng.lbphi, dtype=float)
    g = 1.0 - lphi * lbphi
    if np.min(g) <= gmin:
        raise TimelikeViolation(np.min(g), gmin)
    guu = -(lphi ** 2) / (4.0 * g)
    gubub = -(lbphi ** 2) / (4.0 * g)
    guub = -0.5 - lphi * lbphi / (4.0 * g)
    if np.ndim(ng.lphi) == 0:
        g, guu, gubub, guub = float(g), float(guu), float(gubub), float(guub)
    return MetricScalars(g=g, guu=guu, gubub=gubub, guub=guub, timelike=True)


def eigenvalues(w, p):
    """Characteristic speeds of the first-order system.

    lam_pm = (-w p +- sqrt(1 + p^2 - w^2)) / (1 + p^2), real and distinct
    while 1 + p^2 - w^2 > 0, and confined to [-1, 1] there (the algebraic
    identity (1 + p^2 + w p)^2 - (1 + p^2 - w^2) = (1 + p^2)(p + w)^2 makes
    the speed bound exact).
    """
    w = np.asarray(w, dtype=float)
    p = np.asarray(p, dtype=float)
    disc = 1.0 + p * p - w * w
    mdisc = np.min(disc)
    if mdisc <= 0.0:
        raise HyperbolicityLoss(mdisc)
    root = np.sqrt(disc)
    den = 1.0 + p * p
    lam_minus = (-w * p - root) / den
    lam_plus = (-w * p + root) / den
    if lam_minus.ndim == 0:
        return float(lam_minus), float(lam_plus)
    return lam_minus, lam_plus


def weight_a(x, gamma: float):
    """Spatial weight a(x) = (1 + x^2)^(1+gamma); even, >= 1, monotone in |x|.

    The same function evaluated at u or ub gives the two multiplier weights.
    gamma must lie in (0, 1).
    """
    _check_gamma(gamma)
    x = np.asarray(x, dtype=float)
    out = (1.0 + x * x) ** (1.0 + gamma)
    return float(out) if out.ndim == 0 else out


def weight_a_prime(x, gamma: float):
    """d/dx of weight_a; satisfies a'(x)/a(x) = 2(1+gamma) x/(1+x^2) <= 1+gamma."""
    _check_gamma(gamma)
    x = np.asarray(x, dtype=float)
    out = 2.0 * (1.0 + gamma) * x * (1.0 + x * x) ** gamma
    return float(out) if out.ndim == 0 else out


def _check_gamma(gamma):
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"weight exponent gamma must lie in (0, 1), got {gamma}")


def multiplier(side: str, point: NullPoint, ng: NullGradientPair, gamma: float) -> MultiplierCoeffs:
    """Coefficients of the dynamically corrected null multiplier.

    side "TL":  a(ub) * (L + |Lphi|^2 Lb)
    side "TLb": a(u)  * (Lb + |Lbphi|^2 L)
    """
    if side == "TL":
        wgt = weight_a(point.ub, gamma)
        return MultiplierCoeffs(cl=wgt, clb=wgt * np.asarray(ng.lphi) ** 2, weight=wgt)
    if side == "TLb":
        wgt = weight_a(point.u, gamma)
        return MultiplierCoeffs(cl=wgt * np.asarray(ng.lbphi) ** 2, clb=wgt, weight=wgt)
    raise ValueError(f"side must be 'TL' or 'TLb', got {side!r}")


def causal_norm(side: str, point: NullPoint, ng: NullGradientPair, gamma: float):
    """Squared g-norm of the multiplier; <= 0 means non-spacelike.

    Both multipliers share the scalar factor
    -3 + 2 Lphi Lbphi + |Lphi|^2 |Lbphi|^2, so they are causal exactly when
    that factor is <= 0 (it is -3 at the flat state).
    """
    lphi = np.asarray(ng.lphi, dtype=float)
    lbphi = np.asarray(ng.lbphi, dtype=float)
    factor = -3.0 + 2.0 * lphi * lbphi + (lphi * lbphi) ** 2
    if side == "TL":
        out = weight_a(point.ub, gamma) ** 2 * lphi ** 2 * factor
    elif side == "TLb":
        out = weight_a(point.u, gamma) ** 2 * lbphi ** 2 * factor
    else:
        raise ValueError(f"side must be 'TL' or 'TLb', got {side!r}")
    return float(out) if np.ndim(out) == 0 else out
