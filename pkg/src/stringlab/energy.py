"""Weighted energies, null fluxes, stress contractions, and run monitors.

The derivative tower holds grid samples of L(d^k phi) and Lb(d^k phi) for
all multi-indices k = (k1, k2) with k1 + k2 <= N.  Mixed traces with up to
one time derivative come from spatial stencils on (phi, w); deeper time
derivatives come from nested 2nd-order centered differences across stored
time levels, so building an order-N tower needs 2N+1 consecutive states.

Energies at order k aggregate all multi-index rows of that total order:

    E2_[k+1](t)  = sum_{|m|=k} int a(ub) |L phi_m|^2  sqrt(g) dx
    Eb2_[k+1](t) = sum_{|m|=k} int a(u)  |Lb phi_m|^2 sqrt(g) dx

and the inhomogeneous totals sum the orders k = 0..N.  Fluxes accumulate
the same weighted squares along fixed null lines (u = u0 for the
left-travelling part, ub = ub0 for the right-travelling part).

The energies are integrals over the whole line; since the integrands are
nonnegative this equals the supremum over the half-line truncations, which
is the form the run monitors bound.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientHistory, TimelikeViolation
from .evolve import FieldState, Grid1D
from .nullgeom import GMIN_DEFAULT, weight_a
from .stencils import deriv1

N_DEFAULT = 4


def null_rows(phis, ws, dt, dx, N):
    """Null-gradient rows (L and Lb of every mixed derivative) at the center
    of a level stack.

    phis/ws are sequences of 2N+1 arrays (each possibly batched, grid axis
    last) at consecutive, equally spaced times.  The k1 = 0 rows are spatial
    stencils of the base null gradients w +- d_x(phi); each extra time
    derivative is one centered difference of the row below, applied to the
    whole level stack at once.

    Differencing the null rows themselves (rather than assembling them from
    mixed-derivative fields) matters: the left-travelling rows are small and
    would otherwise inherit order-one cancellation errors from the large
    right-travelling part.  Here every row keeps a relative O(dt^2) error.
    """
    L = len(phis)
    if L < 2 * N + 1:
        raise InsufficientHistory(f"need {2 * N + 1} levels for an order-{N} tower, have {L}")
    if L % 2 == 0:
        raise InsufficientHistory("level stack must have odd length")
    ph = np.stack([np.asarray(f, dtype=float) for f in phis])
    w = np.stack([np.asarray(f, dtype=float) for f in ws])
    phx = deriv1(ph, dx)
    stacked = {(0, 0): (w + phx, w - phx)}
    for j in range(1, N + 1):
        lo, lbo = stacked[(0, j - 1)]
        stacked[(0, j)] = (deriv1(lo, dx), deriv1(lbo, dx))
    half = 2.0 * dt
    for k1 in range(1, N + 1):
        for j in range(N + 1 - k1):
            lo, lbo = stacked[(k1 - 1, j)]
            stacked[(k1, j)] = ((lo[2:] - lo[:-2]) / half, (lbo[2:] - lbo[:-2]) / half)
    return {key: (lo[lo.shape[0] // 2], lbo[lbo.shape[0] // 2])
            for key, (lo, lbo) in stacked.items()}


@dataclass
class DerivativeTower:
    """Null derivatives of all mixed derivatives up to total order N."""

    t: float
    grid: Grid1D
    N: int
    rows: dict                     # (k1, k2) -> (L row, Lb row)

    @property
    def lphi(self):
        return self.rows[(0, 0)][0]

    @property
    def lbphi(self):
        return self.rows[(0, 0)][1]

    @property
    def g(self):
        return 1.0 - self.lphi * self.lbphi

    def orders(self, k):
        """All rows of total order k."""
        return [self.rows[(k1, k - k1)] for k1 in range(k + 1)]


def build_tower(states, N=N_DEFAULT) -> DerivativeTower:
    """Tower at the center state of an odd stack of >= 2N+1 equal-dt levels."""
    states = list(states)
    times = np.array([s.t for s in states])
    if len(times) >= 2:
        dts = np.diff(times)
        if np.max(np.abs(dts - dts[0])) > 1e-9 * max(abs(dts[0]), 1e-30):
            raise InsufficientHistory("stored levels are not equally spaced in time")
        dt = float(dts[0])
    else:
        raise InsufficientHistory("need at least 3 levels")
    grid = states[0].grid
    rows = null_rows([s.phi for s in states], [s.w for s in states], dt, grid.dx, N)
    return DerivativeTower(t=float(states[len(states) // 2].t), grid=grid, N=N, rows=rows)


# ---------------------------------------------------------------------------
# stress-tensor contractions


def stress_density(base_lphi, base_lbphi, row_lphi, row_lbphi, weight, side, direction,
                   gmin=GMIN_DEFAULT):
    """T[row](-D direction, multiplier), assembled exactly from null
    components of the inverse metric; no equivalence constants involved.

    direction is 'u', 'ub', or 't' (with -Dt = -Du - Dub).  weight is the
    multiplier weight a(ub) for side 'TL' or a(u) for side 'TLb'.
    """
    B = np.asarray(base_lphi, dtype=float)
    A = np.asarray(base_lbphi, dtype=float)
    b = np.asarray(row_lphi, dtype=float)
    a = np.asarray(row_lbphi, dtype=float)
    g = 1.0 - A * B
    if np.min(g) <= gmin:
        raise TimelikeViolation(np.min(g), gmin)
    guu = -B * B / (4.0 * g)
    gubub = -A * A / (4.0 * g)
    guub = -0.5 - A * B / (4.0 * g)
    gradu = guu * a + guub * b
    gradub = guub * a + gubub * b
    qt = gradu * a + gradub * b
    t_uu = gradu * a - 0.5 * qt
    t_uub = gradu * b
    t_ubu = gradub * a
    t_ubub = gradub * b - 0.5 * qt
    if side == "TL":
        xi_u, xi_ub = weight * B * B, weight
    elif side == "TLb":
        xi_u, xi_ub = weight, weight * A * A
    else:
        raise ValueError(f"side must be 'TL' or 'TLb', got {side!r}")
    pu = t_uu * xi_u + t_uub * xi_ub
    pub = t_ubu * xi_u + t_ubub * xi_ub
    if direction == "u":
        return -pu
    if direction == "ub":
        return -pub
    if direction == "t":
        return -(pu + pub)
    raise ValueError(f"direction must be 'u', 'ub', or 't', got {direction!r}")


def stress_contraction(tower: DerivativeTower, k, side, direction, gamma, gmin=GMIN_DEFAULT):
    """Pointwise contraction density for tower row k = (k1, k2)."""
    x = tower.grid.x
    if side == "TL":
        wgt = weight_a((tower.t + x) / 2.0, gamma)
    else:
        wgt = weight_a((tower.t - x) / 2.0, gamma)
    lrow, lbrow = tower.rows[tuple(k)]
    return stress_density(tower.lphi, tower.lbphi, lrow, lbrow, wgt, side, direction, gmin)


# ---------------------------------------------------------------------------
# energies


def row_energy(tower: DerivativeTower, k, side, gamma):
    """Trapezoid quadrature of weight * |row|^2 * sqrt(g) for one row."""
    x = tower.grid.x
    lrow, lbrow = tower.rows[tuple(k)]
    sqrt_g = np.sqrt(np.maximum(tower.g, 0.0))
    if side == "TL":
        integrand = weight_a((tower.t + x) / 2.0, gamma) * lrow ** 2 * sqrt_g
    elif side == "TLb":
        integrand = weight_a((tower.t - x) / 2.0, gamma) * lbrow ** 2 * sqrt_g
    else:
        raise ValueError(f"side must be 'TL' or 'TLb', got {side!r}")
    return float(np.trapezoid(integrand, dx=tower.grid.dx))


def order_energy(tower: DerivativeTower, k, side, gamma):
    """Energy at derivative order k: sum of row energies over |m| = k."""
    return sum(row_energy(tower, (k1, k - k1), side, gamma) for k1 in range(k + 1))


def energy_orders(tower: DerivativeTower, gamma):
    e2 = np.array([order_energy(tower, k, "TL", gamma) for k in range(tower.N + 1)])
    eb2 = np.array([order_energy(tower, k, "TLb", gamma) for k in range(tower.N + 1)])
    return e2, eb2


def _sobolev_stats(tower: DerivativeTower, gamma):
    """Weighted sup bounds for rows up to order N-1.

    For h = sqrt(weight) * row the 1d embedding gives
    sup h^2 <= 2 ||h|| (c0 ||h|| + ||sqrt(weight) d_x row||) with
    c0 = (1+gamma)/4 the uniform bound on the weight's half log-derivative.
    Returns (sup_L, sup_Lb, margin_L, margin_Lb): the weighted sups per
    order and the minimal slack of the bound over all rows.
    """
    x = tower.grid.x
    dx = tower.grid.dx
    c0 = 0.25 * (1.0 + gamma)
    wl = weight_a((tower.t + x) / 2.0, gamma)
    wlb = weight_a((tower.t - x) / 2.0, gamma)
    sup_l = np.zeros(tower.N)
    sup_lb = np.zeros(tower.N)
    margin_l = np.inf
    margin_lb = np.inf
    for k1 in range(tower.N):
        for k2 in range(tower.N - k1):
            lrow, lbrow = tower.rows[(k1, k2)]
            lnext, lbnext = tower.rows[(k1, k2 + 1)]
            order = k1 + k2
            for (row, nxt, wgt, sup, which) in (
                    (lrow, lnext, wl, sup_l, "L"), (lbrow, lbnext, wlb, sup_lb, "Lb")):
                lhs = float(np.max(np.sqrt(wgt) * np.abs(row)))
                l2 = float(np.sqrt(np.trapezoid(wgt * row ** 2, dx=dx)))
                l2x = float(np.sqrt(np.trapezoid(wgt * nxt ** 2, dx=dx)))
                bound = np.sqrt(2.0 * l2 * (c0 * l2 + l2x)) if l2 > 0 else 0.0
                sup[order] = max(sup[order], lhs)
                slack = bound - lhs
                if which == "L":
                    margin_l = min(margin_l, slack)
                else:
                    margin_lb = min(margin_lb, slack)
    return sup_l, sup_lb, float(margin_l), float(margin_lb)


@dataclass
class EnergyReport:
    """Snapshot of all monitored quantities at one output time."""

    t: float
    e2: np.ndarray                # per order, side L
    eb2: np.ndarray
    min_g: float
    sup_l: np.ndarray             # sup of sqrt(weight)*|L row| per order < N
    sup_lb: np.ndarray
    agmon_l_margin: float
    agmon_lb_margin: float
    flux_t: float
    f2: np.ndarray                # (n probes_u, N+1) running flux
    fb2: np.ndarray               # (n probes_ub, N+1)

    @property
    def e2_total(self):
        return float(np.sum(self.e2))

    @property
    def eb2_total(self):
        return float(np.sum(self.eb2))


class EnergyTracker:
    """Run callback: accumulates null fluxes each step and emits periodic
    EnergyReports from the derivative tower.

    Flux probes are fixed before the run: probes_u are retarded coordinates
    u0 of outgoing lines (x = t - 2 u0), probes_ub advanced coordinates ub0
    of incoming lines (x = 2 ub0 - t).  Each accepted step adds
    dt * weight * |row|^2 * sqrt(g) at the line's current abscissa by cubic
    interpolation (trapezoidal in time, lagged to the center of the level
    ring so all tower rows exist).  A probe whose line leaves the grid is
    flagged truncated and stops accumulating.
    """

    def __init__(self, gamma, N=N_DEFAULT, probes_u=(), probes_ub=(),
                 report_every=25, gmin=GMIN_DEFAULT):
        self.gamma = float(gamma)
        self.N = int(N)
        self.probes_u = np.asarray(probes_u, dtype=float)
        self.probes_ub = np.asarray(probes_ub, dtype=float)
        self.report_every = int(report_every)
        self.gmin = gmin
        self.reports: list[EnergyReport] = []
        self._ring = deque(maxlen=2 * self.N + 1)
        self._steps = 0
        self._f2 = np.zeros((len(self.probes_u), self.N + 1))
        self._fb2 = np.zeros((len(self.probes_ub), self.N + 1))
        self._prev_f = None
        self._prev_fb = None
        self._prev_tau = None
        self.truncated_u = np.zeros(len(self.probes_u), dtype=bool)
        self.truncated_ub = np.zeros(len(self.probes_ub), dtype=bool)
        # window wide enough for N+1 nested first-derivative stencils plus
        # cubic interpolation margin
        self._hw = 2 * (self.N + 2) + 4

    def on_start(self, state: FieldState):
        self._ring.append(state.copy())

    def on_step(self, state: FieldState):
        self._ring.append(state.copy())
        self._steps += 1
        if len(self._ring) == self._ring.maxlen:
            self._accumulate_flux()
            if self._steps % self.report_every == 0:
                self.reports.append(self._make_report())

    # -- flux ---------------------------------------------------------------

    def _row_sq_at(self, states, xq, side):
        """sum over rows per order of weight*|row(xq)|^2*sqrt(g(xq)), for all
        probes at once; xq has one abscissa per active probe."""
        grid = states[0].grid
        dt = states[1].t - states[0].t
        tau = states[len(states) // 2].t
        idx = np.round((xq - grid.x0) / grid.dx).astype(int)
        i0 = idx - self._hw
        win = 2 * self._hw + 1
        offs = np.arange(win)
        take = i0[:, None] + offs[None, :]
        phis = [s.phi[take] for s in states]     # (P, win) per level
        ws = [s.w[take] for s in states]
        rows = null_rows(phis, ws, dt, grid.dx, self.N)
        # local cubic interpolation at the exact abscissa
        pos = (xq - (grid.x0 + i0 * grid.dx)) / grid.dx
        base = np.clip(np.floor(pos).astype(int) - 1, 0, win - 4)
        th = pos - base
        wts = np.stack([-(th - 1) * (th - 2) * (th - 3) / 6.0,
                        th * (th - 2) * (th - 3) / 2.0,
                        -th * (th - 1) * (th - 3) / 2.0,
                        th * (th - 1) * (th - 2) / 6.0])
        rowsel = np.arange(len(xq))

        def at(arr):
            return sum(wts[j] * arr[rowsel, base + j] for j in range(4))

        lphi0 = at(rows[(0, 0)][0])
        lbphi0 = at(rows[(0, 0)][1])
        sqrt_g = np.sqrt(np.maximum(1.0 - lphi0 * lbphi0, 0.0))
        if side == "TL":
            wgt = weight_a((tau + xq) / 2.0, self.gamma)
        else:
            wgt = weight_a((tau - xq) / 2.0, self.gamma)
        out = np.zeros((len(xq), self.N + 1))
        for (k1, k2), (lrow, lbrow) in rows.items():
            val = at(lrow) if side == "TL" else at(lbrow)
            out[:, k1 + k2] += wgt * val ** 2 * sqrt_g
        return out, tau

    def _accumulate_flux(self):
        states = list(self._ring)
        grid = states[0].grid
        tau = states[len(states) // 2].t
        margin = (self._hw + 1) * grid.dx
        cur_f = np.zeros_like(self._f2)
        cur_fb = np.zeros_like(self._fb2)
        if len(self.probes_u):
            xq = tau - 2.0 * self.probes_u
            inside = (xq > grid.x0 + margin) & (xq < grid.x_end - margin)
            self.truncated_u |= ~inside
            act = inside & ~self.truncated_u
            if np.any(act):
                vals, _ = self._row_sq_at(states, xq[act], "TL")
                cur_f[act] = vals
        if len(self.probes_ub):
            xq = 2.0 * self.probes_ub - tau
            inside = (xq > grid.x0 + margin) & (xq < grid.x_end - margin)
            self.truncated_ub |= ~inside
            act = inside & ~self.truncated_ub
            if np.any(act):
                vals, _ = self._row_sq_at(states, xq[act], "TLb")
                cur_fb[act] = vals
        if self._prev_tau is not None:
            dtau = tau - self._prev_tau
            self._f2 += 0.5 * dtau * (self._prev_f + cur_f)
            self._fb2 += 0.5 * dtau * (self._prev_fb + cur_fb)
        self._prev_f, self._prev_fb, self._prev_tau = cur_f, cur_fb, tau

    # -- reports ------------------------------------------------------------

    def _make_report(self) -> EnergyReport:
        tower = build_tower(list(self._ring), self.N)
        e2, eb2 = energy_orders(tower, self.gamma)
        sup_l, sup_lb, am_l, am_lb = _sobolev_stats(tower, self.gamma)
        return EnergyReport(
            t=tower.t, e2=e2, eb2=eb2, min_g=float(np.min(tower.g)),
            sup_l=sup_l, sup_lb=sup_lb,
            agmon_l_margin=am_l, agmon_lb_margin=am_lb,
            flux_t=self._prev_tau if self._prev_tau is not None else tower.t,
            f2=self._f2.copy(), fb2=self._fb2.copy())

    def final_report(self):
        if not self.reports or self.reports[-1].t < self._ring[len(self._ring) // 2].t:
            if len(self._ring) == self._ring.maxlen:
                self.reports.append(self._make_report())
        return self.reports


# ---------------------------------------------------------------------------
# monitors and hierarchy fits


@dataclass
class MonitorResult:
    """Bootstrap-style margins for one completed run."""

    delta: float
    sup_e2: float                  # sup over outputs of the total L energy
    sup_eb2: float
    sup_f2: float                  # max over probes of the final flux totals
    sup_fb2: float
    e2_initial: float
    eb2_initial: float
    m2: float                      # fitted bootstrap constant
    c_l: float                     # sup sqrt(weight)|L row| / (delta*M)
    c_lb: float                    # sup sqrt(weight)|Lb row| / M
    agmon_l_margin: float
    agmon_lb_margin: float
    min_g: float


def monitor(reports, delta, eps=1e-300) -> MonitorResult:
    """Fit the bootstrap constant M from a run and report weighted-sup
    ratios against it.

    M^2 := max( sup_t Eb2 + sup Fb2 , (sup_t E2 + sup F2)/delta^2 ), so the
    two-tier energy bounds hold by construction and the interesting outputs
    are the sup ratios and the Agmon margins.
    """
    if not reports:
        raise ValueError("no energy reports to monitor")
    sup_e2 = max(r.e2_total for r in reports)
    sup_eb2 = max(r.eb2_total for r in reports)
    last = reports[-1]
    sup_f2 = float(np.max(np.sum(last.f2, axis=1))) if last.f2.size else 0.0
    sup_fb2 = float(np.max(np.sum(last.fb2, axis=1))) if last.fb2.size else 0.0
    a_tier = sup_eb2 + sup_fb2
    b_tier = sup_e2 + sup_f2
    d2 = max(delta ** 2, eps)
    m2 = max(a_tier, b_tier / d2)
    m = np.sqrt(max(m2, eps))
    c_l = max(float(np.max(r.sup_l)) if r.sup_l.size else 0.0 for r in reports)
    c_lb = max(float(np.max(r.sup_lb)) if r.sup_lb.size else 0.0 for r in reports)
    return MonitorResult(
        delta=delta, sup_e2=sup_e2, sup_eb2=sup_eb2, sup_f2=sup_f2, sup_fb2=sup_fb2,
        e2_initial=reports[0].e2_total, eb2_initial=reports[0].eb2_total,
        m2=m2,
        c_l=c_l / max(abs(delta) * m, eps),
        c_lb=c_lb / m if m > 0 else 0.0,
        agmon_l_margin=min(r.agmon_l_margin for r in reports),
        agmon_lb_margin=min(r.agmon_lb_margin for r in reports),
        min_g=min(r.min_g for r in reports))


@dataclass
class HierarchyFit:
    """delta-scaling of the two energy tiers across a sweep."""

    deltas: np.ndarray
    sup_e2: np.ndarray
    sup_eb2: np.ndarray
    slope_e2: float                # log-log slope, 2 expected
    slope_eb2: float               # 0 expected
    eb2_variation: float           # max/min - 1 across the sweep
    m2: float
    c1_bar: float                  # envelope constant of the Eb tier
    c1: float                      # envelope constant of the E tier


def fit_hierarchy(monitors) -> HierarchyFit:
    """Least-squares slopes and envelope constants from a delta sweep.

    The shape constants are envelope fits: c1_bar is the largest excess of
    sup(Eb2)+sup(Fb2) over its initial value in units of delta*M^4, and c1
    the same for the small tier in units of delta^3*M^6.  Both are positive
    whenever any energy flows at all.
    """
    monitors = sorted(monitors, key=lambda mo: mo.delta)
    deltas = np.array([mo.delta for mo in monitors])
    sup_e2 = np.array([mo.sup_e2 for mo in monitors])
    sup_eb2 = np.array([mo.sup_eb2 for mo in monitors])
    a_tier = np.array([mo.sup_eb2 + mo.sup_fb2 for mo in monitors])
    b_tier = np.array([mo.sup_e2 + mo.sup_f2 for mo in monitors])
    m2 = float(np.max([mo.m2 for mo in monitors]))
    slope_e2 = float(np.polyfit(np.log(deltas), np.log(np.maximum(sup_e2, 1e-300)), 1)[0])
    slope_eb2 = float(np.polyfit(np.log(deltas), np.log(np.maximum(sup_eb2, 1e-300)), 1)[0])
    eb0 = np.array([mo.eb2_initial for mo in monitors])
    e0 = np.array([mo.e2_initial for mo in monitors])
    c1_bar = float(np.max((a_tier - eb0) / (deltas * m2 ** 2)))
    c1 = float(np.max((b_tier - e0) / (deltas ** 3 * m2 ** 3)))
    return HierarchyFit(
        deltas=deltas, sup_e2=sup_e2, sup_eb2=sup_eb2,
        slope_e2=slope_e2, slope_eb2=slope_eb2,
        eb2_variation=float(np.max(sup_eb2) / np.min(sup_eb2) - 1.0),
        m2=m2, c1_bar=c1_bar, c1=c1)
