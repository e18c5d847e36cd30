"""Discrete verification of the geometric identities behind the energy method.

Three families of checks:

* divergence identity -- the current P^a = T^a_b xi^b of any test function
  over any background satisfies an exact balance between d_a(sqrt(g) P^a)
  and source + deformation + metric-derivative terms.  Verified on
  manufactured fields: the left side by 4th-order stencils on the
  closed-form current, the right side assembled analytically (with stencils
  only for the metric-divergence pieces), residual converging under
  refinement.

* deformation closed forms -- T^a_b d_a(xi^b) for the corrected multipliers
  has a short closed form; it is evaluated both by direct contraction and
  from the closed form, which must agree to roundoff.  The closed form
  carries a weight-derivative cross term proportional to the null-null
  stress component; that term vanishes identically when the test function
  is the base field or the background is flat, and must be kept otherwise.

* energy balance -- on the trapezoidal null regions, surface term + null
  flux equals the initial term minus the bulk divergence integral.  Checked
  discretely along a run for pure-spatial-derivative rows; the null-segment
  measure carries the Jacobian factor 2 that makes the discrete divergence
  theorem close exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TimelikeViolation
from .evolve import Grid1D, run_evolution
from .manufactured import random_mixture
from .nullgeom import GMIN_DEFAULT, weight_a, weight_a_prime
from .stencils import cubic_interp, deriv_k


@dataclass
class IdentityResidual:
    identity: str
    levels: list          # stencil spacings or grid spacings, coarse to fine
    residuals: list
    orders: list          # log2 ratios of successive residuals

    @property
    def observed_order(self):
        return float(np.mean(self.orders)) if self.orders else float("nan")


def _orders(residuals):
    out = []
    for i in range(len(residuals) - 1):
        lo = max(residuals[i + 1], 1e-300)
        out.append(float(np.log2(residuals[i] / lo)))
    return out


# ---------------------------------------------------------------------------
# Cartesian current assembly on manufactured fields


def _multiplier_cartesian(phi, t, x, gamma, side):
    """(xi^t, xi^x) of the weighted multiplier; side may be 'TL', 'TLb', or
    ('const', cl, clb) for a fixed null combination cl*L + clb*Lb."""
    if isinstance(side, tuple):
        _, cl, clb = side
        shape = np.broadcast(np.asarray(t), np.asarray(x)).shape
        cl = np.broadcast_to(float(cl), shape)
        clb = np.broadcast_to(float(clb), shape)
        return cl + clb, cl - clb
    w = phi.d(1, 0, t, x)
    p = phi.d(0, 1, t, x)
    if side == "TL":
        wgt = weight_a((np.asarray(t) + np.asarray(x)) / 2.0, gamma)
        cl, clb = wgt, wgt * (w + p) ** 2
    elif side == "TLb":
        wgt = weight_a((np.asarray(t) - np.asarray(x)) / 2.0, gamma)
        cl, clb = wgt * (w - p) ** 2, wgt
    else:
        raise ValueError(f"bad side {side!r}")
    return cl + clb, cl - clb


def _current(phi, varphi, t, x, gamma, side, gmin=GMIN_DEFAULT):
    """(V^t, V^x) = sqrt(g) * (P^t, P^x) from closed-form fields."""
    w = phi.d(1, 0, t, x)
    p = phi.d(0, 1, t, x)
    vt = varphi.d(1, 0, t, x)
    vx = varphi.d(0, 1, t, x)
    g = 1.0 - w * w + p * p
    if np.min(g) <= gmin:
        raise TimelikeViolation(np.min(g), gmin)
    gtt = -(1.0 + p * p) / g
    gtx = w * p / g
    gxx = (1.0 - w * w) / g
    gradt = gtt * vt + gtx * vx
    gradx = gtx * vt + gxx * vx
    qt = gradt * vt + gradx * vx
    t_tt = gradt * vt - 0.5 * qt
    t_tx = gradt * vx
    t_xt = gradx * vt
    t_xx = gradx * vx - 0.5 * qt
    xit, xix = _multiplier_cartesian(phi, t, x, gamma, side)
    sq = np.sqrt(g)
    return sq * (t_tt * xit + t_tx * xix), sq * (t_xt * xit + t_xx * xix)


def _metric_maps(phi, t, x):
    """sqrt(g)*g^{ab} maps: (M^tt, M^tx, M^xx)."""
    w = phi.d(1, 0, t, x)
    p = phi.d(0, 1, t, x)
    g = 1.0 - w * w + p * p
    sq = np.sqrt(g)
    return -(1.0 + p * p) / sq, w * p / sq, (1.0 - w * w) / sq


def _stencil_t(fn, t, x, h):
    return (fn(t - 2 * h, x) - 8.0 * fn(t - h, x)
            + 8.0 * fn(t + h, x) - fn(t + 2 * h, x)) / (12.0 * h)


def _stencil_x(fn, t, x, h):
    return (fn(t, x - 2 * h) - 8.0 * fn(t, x - h)
            + 8.0 * fn(t, x + h) - fn(t, x + 2 * h)) / (12.0 * h)


def divergence_residual(phi, varphi, gamma, side, h, t, x, gmin=GMIN_DEFAULT):
    """max |d_a(sqrt(g) P^a) - sqrt(g)*(source + deformation + metric terms)|
    over the sample points, with stencil spacing h."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)

    def vt_map(tt, xx):
        return _current(phi, varphi, tt, xx, gamma, side, gmin)[0]

    def vx_map(tt, xx):
        return _current(phi, varphi, tt, xx, gamma, side, gmin)[1]

    lhs = _stencil_t(vt_map, t, x, h) + _stencil_x(vx_map, t, x, h)

    # analytic pieces
    w = phi.d(1, 0, t, x)
    p = phi.d(0, 1, t, x)
    vt = varphi.d(1, 0, t, x)
    vx = varphi.d(0, 1, t, x)
    vtt = varphi.d(2, 0, t, x)
    vtx = varphi.d(1, 1, t, x)
    vxx = varphi.d(0, 2, t, x)
    g = 1.0 - w * w + p * p
    sq = np.sqrt(g)
    gtt = -(1.0 + p * p) / g
    gtx = w * p / g
    gxx = (1.0 - w * w) / g
    gradt = gtt * vt + gtx * vx
    gradx = gtx * vt + gxx * vx
    qt = gradt * vt + gradx * vx
    t_tt = gradt * vt - 0.5 * qt
    t_tx = gradt * vx
    t_xt = gradx * vt
    t_xx = gradx * vx - 0.5 * qt

    xit, xix = _multiplier_cartesian(phi, t, x, gamma, side)
    xi_varphi = xit * vt + xix * vx

    # wave operator: principal part analytic, gauge part by stencils on the
    # metric maps
    def m_tt(tt, xx):
        return _metric_maps(phi, tt, xx)[0]

    def m_tx(tt, xx):
        return _metric_maps(phi, tt, xx)[1]

    def m_xx(tt, xx):
        return _metric_maps(phi, tt, xx)[2]

    principal = gtt * vtt + 2.0 * gtx * vtx + gxx * vxx
    div_t = _stencil_t(m_tt, t, x, h) + _stencil_x(m_tx, t, x, h)   # d_a M^{a t}
    div_x = _stencil_t(m_tx, t, x, h) + _stencil_x(m_xx, t, x, h)   # d_a M^{a x}
    box_term = sq * principal * xi_varphi + (div_t * vt + div_x * vx) * xi_varphi

    # deformation term, analytic coefficient derivatives
    if isinstance(side, tuple):
        dxit_t = dxit_x = dxix_t = dxix_x = np.zeros_like(w)
    else:
        wt = phi.d(2, 0, t, x)
        wx = phi.d(1, 1, t, x)
        px = phi.d(0, 2, t, x)
        if side == "TL":
            ub = (t + x) / 2.0
            wgt, wgtp = weight_a(ub, gamma), weight_a_prime(ub, gamma)
            lg = w + p
            dcl_t, dcl_x = 0.5 * wgtp, 0.5 * wgtp
            dclb_t = 0.5 * wgtp * lg ** 2 + wgt * 2.0 * lg * (wt + wx)
            dclb_x = 0.5 * wgtp * lg ** 2 + wgt * 2.0 * lg * (wx + px)
        else:
            uu = (t - x) / 2.0
            wgt, wgtp = weight_a(uu, gamma), weight_a_prime(uu, gamma)
            lbg = w - p
            dclb_t, dclb_x = 0.5 * wgtp, -0.5 * wgtp
            dcl_t = 0.5 * wgtp * lbg ** 2 + wgt * 2.0 * lbg * (wt - wx)
            dcl_x = -0.5 * wgtp * lbg ** 2 + wgt * 2.0 * lbg * (wx - px)
        dxit_t, dxit_x = dcl_t + dclb_t, dcl_x + dclb_x
        dxix_t, dxix_x = dcl_t - dclb_t, dcl_x - dclb_x
    deform = t_tt * dxit_t + t_xt * dxit_x + t_tx * dxix_t + t_xx * dxix_x

    # xi(sqrt(g) g^{cd}) d_c varphi d_d varphi, directional stencils
    xi_mtt = xit * _stencil_t(m_tt, t, x, h) + xix * _stencil_x(m_tt, t, x, h)
    xi_mtx = xit * _stencil_t(m_tx, t, x, h) + xix * _stencil_x(m_tx, t, x, h)
    xi_mxx = xit * _stencil_t(m_xx, t, x, h) + xix * _stencil_x(m_xx, t, x, h)
    metric_term = 0.5 * (xi_mtt * vt * vt + 2.0 * xi_mtx * vt * vx + xi_mxx * vx * vx)

    rhs = box_term + sq * deform - metric_term
    return float(np.max(np.abs(lhs - rhs)))


def divergence_identity_study(phi, varphi, gamma=0.5, side="TL",
                              hs=(0.08, 0.04, 0.02), box=(0.3, 0.9, -3.0, 3.0),
                              n_t=7, n_x=41) -> IdentityResidual:
    t0, t1, x0, x1 = box
    tt, xx = np.meshgrid(np.linspace(t0, t1, n_t), np.linspace(x0, x1, n_x), indexing="ij")
    res = [divergence_residual(phi, varphi, gamma, side, h, tt, xx) for h in hs]
    name = side if isinstance(side, str) else "const"
    return IdentityResidual(identity=f"divergence_{name}", levels=list(hs),
                            residuals=res, orders=_orders(res))


# ---------------------------------------------------------------------------
# deformation closed forms


def _null_data(phi, varphi, t, x):
    w = phi.d(1, 0, t, x)
    p = phi.d(0, 1, t, x)
    vt = varphi.d(1, 0, t, x)
    vx = varphi.d(0, 1, t, x)
    wtt = phi.d(2, 0, t, x)
    wtx = phi.d(1, 1, t, x)
    wxx = phi.d(0, 2, t, x)
    B, A = w + p, w - p                     # L phi, Lb phi
    b, a = vt + vx, vt - vx                 # L varphi, Lb varphi
    llb = wtt - wxx                         # L Lb phi
    l2 = wtt + 2.0 * wtx + wxx              # L^2 phi
    lb2 = wtt - 2.0 * wtx + wxx             # Lb^2 phi
    return A, B, a, b, llb, l2, lb2


def _stress_null_components(A, B, a, b):
    g = 1.0 - A * B
    guu = -B * B / (4.0 * g)
    gubub = -A * A / (4.0 * g)
    guub = -0.5 - A * B / (4.0 * g)
    gradu = guu * a + guub * b
    gradub = guub * a + gubub * b
    qt = gradu * a + gradub * b
    return (gradu * a - 0.5 * qt,      # T^u_u
            gradu * b,                 # T^u_ub
            gradub * a,                # T^ub_u
            gradub * b - 0.5 * qt,     # T^ub_ub
            g)


def deformation_direct(phi, varphi, t, x, gamma, side):
    """T^a_b d_a(xi^b) by direct contraction with analytic coefficient
    derivatives in the null frame."""
    A, B, a, b, llb, l2, lb2 = _null_data(phi, varphi, t, x)
    t_uu, t_uub, t_ubu, t_ubub, _ = _stress_null_components(A, B, a, b)
    if side == "TL":
        ub = (np.asarray(t) + np.asarray(x)) / 2.0
        wgt, wgtp = weight_a(ub, gamma), weight_a_prime(ub, gamma)
        dy_u = 2.0 * wgt * B * llb
        dy_ub = wgtp * B * B + 2.0 * wgt * B * l2
        return t_uu * dy_u + t_ubu * dy_ub + t_ubub * wgtp
    if side == "TLb":
        uu = (np.asarray(t) - np.asarray(x)) / 2.0
        wgt, wgtp = weight_a(uu, gamma), weight_a_prime(uu, gamma)
        dyb_u = wgtp * A * A + 2.0 * wgt * A * lb2
        dyb_ub = 2.0 * wgt * A * llb
        return t_uu * wgtp + t_uub * dyb_u + t_ubub * dyb_ub
    raise ValueError(f"bad side {side!r}")


def deformation_closed(phi, varphi, t, x, gamma, side):
    """Closed form of the deformation contraction.

    correction part: products of the dynamical correction's derivatives with
    two explicit stress components.  weight part: the weight derivative
    times the null-null stress component (vanishes iff
    |Lphi Lb varphi| = |Lb phi L varphi|, e.g. varphi = phi or flat
    background, but not in general).
    """
    A, B, a, b, llb, l2, lb2 = _null_data(phi, varphi, t, x)
    g = 1.0 - A * B
    if side == "TL":
        ub = (np.asarray(t) + np.asarray(x)) / 2.0
        wgt, wgtp = weight_a(ub, gamma), weight_a_prime(ub, gamma)
        correction = ((-0.5 * a * a - A * B * a * a / (4.0 * g) - A * A * a * b / (4.0 * g))
                      * (wgtp * B * B + 2.0 * wgt * B * l2)
                      + (A * A * b * b - B * B * a * a) / (8.0 * g) * 2.0 * wgt * B * llb)
        weight_part = wgtp * (B * B * a * a - A * A * b * b) / (8.0 * g)
        return correction + weight_part
    if side == "TLb":
        uu = (np.asarray(t) - np.asarray(x)) / 2.0
        wgt, wgtp = weight_a(uu, gamma), weight_a_prime(uu, gamma)
        correction = ((-0.5 * b * b - A * B * b * b / (4.0 * g) - B * B * a * b / (4.0 * g))
                      * (wgtp * A * A + 2.0 * wgt * A * lb2)
                      + (B * B * a * a - A * A * b * b) / (8.0 * g) * 2.0 * wgt * A * llb)
        weight_part = wgtp * (A * A * b * b - B * B * a * a) / (8.0 * g)
        return correction + weight_part
    raise ValueError(f"bad side {side!r}")


def trace_residual(phi, varphi, t, x):
    """T^a_a and the quadratic scale it should be compared against."""
    A, B, a, b, *_ = _null_data(phi, varphi, t, x)
    t_uu, _, _, t_ubub, _ = _stress_null_components(A, B, a, b)
    scale = np.abs(a * b) + a * a + b * b + 1e-300
    return np.abs(t_uu + t_ubub), scale


def deformation_check(seed=0, n_fields=100, gamma=0.5, pts=None):
    """Max relative closed-vs-direct discrepancy and max relative trace over
    random field pairs; both should sit at roundoff."""
    rng = np.random.default_rng(seed)
    if pts is None:
        tt, xx = np.meshgrid(np.linspace(0.0, 2.0, 5), np.linspace(-4.0, 4.0, 33),
                             indexing="ij")
    else:
        tt, xx = pts
    worst = 0.0
    worst_trace = 0.0
    for _ in range(n_fields):
        phi = random_mixture(rng, amp=0.25)
        varphi = random_mixture(rng, amp=0.5)
        for side in ("TL", "TLb"):
            d = deformation_direct(phi, varphi, tt, xx, gamma, side)
            c = deformation_closed(phi, varphi, tt, xx, gamma, side)
            scale = np.max(np.abs(d)) + 1e-30
            worst = max(worst, float(np.max(np.abs(d - c)) / scale))
        tr, scale = trace_residual(phi, varphi, tt, xx)
        worst_trace = max(worst_trace, float(np.max(tr / scale)))
    return worst, worst_trace


# ---------------------------------------------------------------------------
# equivalence band of the stress contractions


def equivalence_ratios(seed=0, n_samples=10_000, lphi_cap=0.1, lbphi_cap=1.0):
    """Measured ratio band of each contraction against its quadratic
    comparator, sampled over the monitored regime."""
    from .energy import stress_density

    rng = np.random.default_rng(seed)
    B = rng.uniform(0.01, lphi_cap, n_samples) * rng.choice([-1, 1], n_samples)
    A = rng.uniform(0.1, lbphi_cap, n_samples) * rng.choice([-1, 1], n_samples)
    b = rng.uniform(0.1, 1.0, n_samples) * rng.choice([-1, 1], n_samples)
    a = rng.uniform(0.1, 1.0, n_samples) * rng.choice([-1, 1], n_samples)
    one = np.ones_like(A)
    comparators = {
        ("u", "TL"): b * b + 0.25 * B ** 4 * a * a,
        ("ub", "TL"): A * A * b * b + B * B * a * a,
        ("u", "TLb"): A * A * b * b + B * B * a * a,
        ("ub", "TLb"): a * a + 0.25 * A ** 4 * b * b,
        ("t", "TL"): b * b + B * B * a * a + A * A * b * b + B ** 4 * a * a,
        ("t", "TLb"): a * a + A * A * b * b + B * B * a * a + A ** 4 * b * b,
    }
    bands = {}
    for (direction, side), comp in comparators.items():
        dens = stress_density(B, A, b, a, one, side, direction)
        ratio = dens / comp
        bands[(direction, side)] = (float(np.min(ratio)), float(np.max(ratio)))
    return bands


# ---------------------------------------------------------------------------
# discrete energy balance along a run


class BalanceAccumulator:
    """Run callback accumulating all terms of one null-region energy identity.

    The test row is the pure spatial derivative d_x^{k2} phi, whose null
    gradient needs no time differencing, so every term is available at every
    step including t = 0.  side 'TLb' pairs with the region left of an
    incoming line (ub <= ub0, boundary x = 2 ub0 - t); side 'TL' with the
    region right of an outgoing line (u <= u0, boundary x = t - 2 u0).
    """

    def __init__(self, side, coord, gamma, k2=0, gmin=GMIN_DEFAULT):
        if side not in ("TL", "TLb"):
            raise ValueError(f"bad side {side!r}")
        self.side = side
        self.coord = float(coord)
        self.gamma = float(gamma)
        self.k2 = int(k2)
        self.gmin = gmin
        self._taus = []
        self._vts = []          # V^t profiles (kept: a run at desk scale fits)
        self._vxs = []
        self.sigma0 = None
        self.flux = 0.0
        self._prev_flux_integrand = None

    # geometry helpers -----------------------------------------------------
    def _boundary_x(self, tau):
        if self.side == "TLb":
            return 2.0 * self.coord - tau
        return tau - 2.0 * self.coord

    def _region_integral(self, f, grid, xb):
        x0, dx, n = grid.x0, grid.dx, grid.n
        pos = (xb - x0) / dx
        idx = int(np.floor(pos))
        if self.side == "TLb":
            if idx < 1:
                return 0.0
            idx = min(idx, n - 1)
            full = float(np.trapezoid(f[:idx + 1], dx=dx))
            frac = xb - (x0 + idx * dx)
            if frac > 0 and idx + 1 < n:
                fb = f[idx] + (f[idx + 1] - f[idx]) * frac / dx
                full += 0.5 * (f[idx] + fb) * frac
            return full
        if idx >= n - 2:
            return 0.0
        lo = max(idx + 1, 0)
        full = float(np.trapezoid(f[lo:], dx=dx))
        frac = (x0 + lo * dx) - xb
        if frac > 0 and lo >= 1:
            fb = f[lo] - (f[lo] - f[lo - 1]) * frac / dx
            full += 0.5 * (f[lo] + fb) * frac
        return full

    # current of the spatial-derivative row --------------------------------
    def _currents(self, state):
        grid = state.grid
        w, p = state.w, state.p
        vt = deriv_k(state.w, grid.dx, self.k2)
        vx = deriv_k(state.phi, grid.dx, self.k2 + 1)
        g = 1.0 - w * w + p * p
        sq = np.sqrt(np.maximum(g, 1e-300))
        gtt = -(1.0 + p * p) / g
        gtx = w * p / g
        gxx = (1.0 - w * w) / g
        gradt = gtt * vt + gtx * vx
        gradx = gtx * vt + gxx * vx
        qt = gradt * vt + gradx * vx
        t_tt = gradt * vt - 0.5 * qt
        t_tx = gradt * vx
        t_xt = gradx * vt
        t_xx = gradx * vx - 0.5 * qt
        x = grid.x
        if self.side == "TL":
            wgt = weight_a((state.t + x) / 2.0, self.gamma)
            cl, clb = wgt, wgt * (w + p) ** 2
        else:
            wgt = weight_a((state.t - x) / 2.0, self.gamma)
            cl, clb = wgt * (w - p) ** 2, wgt
        xit, xix = cl + clb, cl - clb
        vt_cur = sq * (t_tt * xit + t_tx * xix)
        vx_cur = sq * (t_xt * xit + t_xx * xix)
        return vt_cur, vx_cur

    # callback protocol ----------------------------------------------------
    def on_start(self, state):
        self._record(state)
        grid = state.grid
        self.sigma0 = self._region_integral(-self._vts[0], grid, self._boundary_x(state.t))
        self._grid = grid

    def on_step(self, state):
        self._record(state)

    def _record(self, state):
        vt_cur, vx_cur = self._currents(state)
        tau = state.t
        self._taus.append(tau)
        self._vts.append(vt_cur)
        self._vxs.append(vx_cur)
        # null flux integrand: the exact boundary measure is 2*V^{null}
        xb = self._boundary_x(tau)
        grid = state.grid
        if grid.x0 <= xb <= grid.x_end:
            vt_b = cubic_interp(vt_cur, grid.x0, grid.dx, xb)
            vx_b = cubic_interp(vx_cur, grid.x0, grid.dx, xb)
            # minus region: 2 V^ub = V^t + V^x ; plus region: 2 V^u = V^t - V^x
            integrand = -(vt_b + vx_b) if self.side == "TLb" else -(vt_b - vx_b)
        else:
            integrand = 0.0
        if self._prev_flux_integrand is not None:
            dtau = tau - self._taus[-2]
            self.flux += 0.5 * dtau * (self._prev_flux_integrand + integrand)
        self._prev_flux_integrand = integrand

    # final assembly --------------------------------------------------------
    def finalize(self):
        """Returns (residual, scale): |Sigma(t) + flux - Sigma(0) + bulk| and
        the magnitude of the largest term."""
        taus = np.asarray(self._taus)
        n = len(taus)
        if n < 3:
            raise ValueError("balance check needs at least 3 stored steps")
        dt = taus[1] - taus[0]
        grid = self._grid
        sigma_t = self._region_integral(-self._vts[-1], grid, self._boundary_x(taus[-1]))

        bulk = 0.0
        for i in range(n):
            if i == 0:
                dvt = (-3.0 * self._vts[0] + 4.0 * self._vts[1] - self._vts[2]) / (2.0 * dt)
            elif i == n - 1:
                dvt = (3.0 * self._vts[-1] - 4.0 * self._vts[-2] + self._vts[-3]) / (2.0 * dt)
            else:
                dvt = (self._vts[i + 1] - self._vts[i - 1]) / (2.0 * dt)
            xb = self._boundary_x(taus[i])
            q = self._region_integral(dvt, grid, xb)
            vx_cur = self._vxs[i]
            if grid.x0 <= xb <= grid.x_end:
                vx_b = float(cubic_interp(vx_cur, grid.x0, grid.dx, xb))
            else:
                vx_b = 0.0
            if self.side == "TLb":
                q += vx_b - vx_cur[0]
            else:
                q += vx_cur[-1] - vx_b
            wgt = 0.5 if i in (0, n - 1) else 1.0
            bulk += wgt * dt * q
        residual = abs(sigma_t + self.flux - self.sigma0 + bulk)
        scale = max(abs(sigma_t), abs(self.sigma0), abs(self.flux), abs(bulk), 1e-300)
        return residual, scale


def energy_balance_study(fam, side, coord, base_grid: Grid1D, t_end,
                         levels=3, k2=0, cfl=0.4, eps_ko=0.01) -> IdentityResidual:
    """Balance residual under simultaneous (dx, dt) refinement."""
    residuals = []
    hs = []
    grid = base_grid
    for _ in range(levels):
        acc = BalanceAccumulator(side, coord, fam.gamma, k2=k2)
        run_evolution(fam, grid, t_end=t_end, cfl=cfl, eps_ko=eps_ko, callbacks=[acc])
        res, scale = acc.finalize()
        residuals.append(res / scale)
        hs.append(grid.dx)
        grid = grid.refined()
    name = "energy_balance_plus" if side == "TL" else "energy_balance_minus"
    return IdentityResidual(identity=name, levels=hs, residuals=residuals,
                            orders=_orders(residuals))
