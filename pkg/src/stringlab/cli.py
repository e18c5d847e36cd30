"""Command-line driver: deterministic experiment runs emitting CSV.

Modes
-----
run         criterion check, evolve to t_end, energy/monitor CSV.
            Exit 0 when no blow-up and all monitors pass, 2 on blow-up,
            1 on error or failed monitor.
sweep       one run per delta in `deltas`; emits per-delta sups and the
            fitted hierarchy slopes/constants.
converge    3-level refinement against the exact travelling-wave solution
            (requires delta = 0).
blowup      3-level refinement of the detected blow-up time plus
            characteristic focusing on the finest level.
verify      manufactured-field identity suite (divergence, deformation,
            trace, equivalence band, energy balance); exit 1 names the
            failing identity.
tracecheck  inductive t=0 trace table against tower time differences of the
            evolved solution under dt refinement.

CSV schemas (all files carry a header row; floats use repr-precision %.17g):
  energy.csv      t,k,E2,Eb2,F2_u<u0>...,Fb2_ub<ub0>...,min_g,
                  sobolev_L_margin,sobolev_Lb_margin
  criterion.csv   x,lambda_minus,lambda_plus
  criterion_summary.csv  lam_star_lo,lam_star_hi,gap_min,order_margin,passed
  monitor.csv     delta,sup_E2,sup_Eb2,sup_F2,sup_Fb2,M2,c_L,c_Lb,
                  agmon_L_margin,agmon_Lb_margin,min_g
  sweep.csv       monitor.csv schema, one row per delta
  hierarchy.csv   slope_E2,slope_Eb2,eb2_variation,M2,C1_bar,C1
  converge.csv    level,n,dx,err_inf,order
  blowup.csv      level,n,dx,t_blowup
  blowup_summary.csv  t_star,criterion_passed,min_separation,initial_separation
  identities.csv  identity,level,dx,residual,order
  tracecheck.csv  k1,k2,level,dx,dt,discrepancy,order
  fields.csv      t,x,phi,w,p   (with dump_fields = 1)

Same config and seed give byte-identical CSV.
"""

from __future__ import annotations

import argparse
import csv
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import energy as en
from . import identities as ident
from .config import ExperimentConfig, parse_config, validate_config
from .errors import StringLabError, ValidationError
from .evolve import Grid1D, exact_travelling, init_state, run_evolution, step, trace_characteristics
from .initialdata import criterion_for_family, higher_order_traces
from .manufactured import MovingGaussian, ZeroField, random_mixture

_g = "{:.17g}".format


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return _g(float(v))
    return str(v)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        for row in rows:
            wr.writerow([_fmt(v) for v in row])


def _grid(cfg) -> Grid1D:
    return Grid1D(cfg.x0, cfg.dx, cfg.n)


def _tracker(cfg) -> en.EnergyTracker:
    return en.EnergyTracker(gamma=cfg.gamma, N=cfg.N, probes_u=cfg.probes_u,
                            probes_ub=cfg.probes_ub, report_every=cfg.report_every,
                            gmin=cfg.gmin)


def _initial_report(cfg, fam, grid):
    table = higher_order_traces(fam, cfg.N, grid.x)
    tower = en.DerivativeTower(t=0.0, grid=grid, N=cfg.N, rows=table.rows)
    e2, eb2 = en.energy_orders(tower, cfg.gamma)
    sup_l, sup_lb, am_l, am_lb = en._sobolev_stats(tower, cfg.gamma)
    return en.EnergyReport(t=0.0, e2=e2, eb2=eb2, min_g=float(np.min(tower.g)),
                           sup_l=sup_l, sup_lb=sup_lb,
                           agmon_l_margin=am_l, agmon_lb_margin=am_lb,
                           flux_t=0.0,
                           f2=np.zeros((len(cfg.probes_u), cfg.N + 1)),
                           fb2=np.zeros((len(cfg.probes_ub), cfg.N + 1)))


def _energy_csv(path, cfg, reports):
    header = ["t", "k", "E2", "Eb2"]
    header += [f"F2_u{u0:g}" for u0 in cfg.probes_u]
    header += [f"Fb2_ub{ub0:g}" for ub0 in cfg.probes_ub]
    header += ["min_g", "sobolev_L_margin", "sobolev_Lb_margin"]
    rows = []
    for rep in reports:
        for k in range(cfg.N + 1):
            row = [rep.t, k, rep.e2[k], rep.eb2[k]]
            row += [rep.f2[i, k] for i in range(len(cfg.probes_u))]
            row += [rep.fb2[i, k] for i in range(len(cfg.probes_ub))]
            row += [rep.min_g, rep.agmon_l_margin, rep.agmon_lb_margin]
            rows.append(row)
    _write_csv(path, header, rows)


def _monitor_row(mon):
    return [mon.delta, mon.sup_e2, mon.sup_eb2, mon.sup_f2, mon.sup_fb2,
            mon.m2, mon.c_l, mon.c_lb, mon.agmon_l_margin, mon.agmon_lb_margin,
            mon.min_g]


_MONITOR_HEADER = ["delta", "sup_E2", "sup_Eb2", "sup_F2", "sup_Fb2", "M2",
                   "c_L", "c_Lb", "agmon_L_margin", "agmon_Lb_margin", "min_g"]


def _monitors_pass(cfg, mon):
    ok = mon.min_g > cfg.gmin
    # Agmon bounds are theorems up to quadrature noise
    scale = np.sqrt(max(mon.sup_eb2, mon.sup_e2, 1e-30))
    ok &= mon.agmon_l_margin > -1e-6 * scale
    ok &= mon.agmon_lb_margin > -1e-6 * scale
    # with the fitted M the weighted sups obey the embedding cap
    if cfg.delta != 0.0:
        ok &= mon.c_l <= 2.0
    ok &= mon.c_lb <= 2.0
    return bool(ok)


def _single_run(cfg, fam, grid, out=None, prefix=""):
    tracker = _tracker(cfg)
    result = run_evolution(fam, grid, t_end=cfg.t_end, cfl=cfg.cfl,
                           eps_ko=cfg.eps_ko, gmin=cfg.gmin, callbacks=[tracker])
    reports = [_initial_report(cfg, fam, grid)] + tracker.reports
    if out is not None:
        _energy_csv(out / f"{prefix}energy.csv", cfg, reports)
    mon = en.monitor(reports, cfg.delta) if reports else None
    return result, reports, mon


def cmd_run(cfg, out: Path) -> int:
    fam = cfg.family()
    grid = _grid(cfg)
    crit = criterion_for_family(fam, grid.x)
    _write_csv(out / "criterion.csv", ["x", "lambda_minus", "lambda_plus"],
               zip(grid.x, crit.lambda_minus, crit.lambda_plus))
    _write_csv(out / "criterion_summary.csv",
               ["lam_star_lo", "lam_star_hi", "gap_min", "order_margin", "passed"],
               [[crit.lam_star_lo, crit.lam_star_hi, crit.gap_min,
                 crit.order_margin, int(crit.passed)]])
    print(f"criterion: {'pass' if crit.passed else 'FAIL'} "
          f"(gap {crit.gap_min:.3e}, ordering margin {crit.order_margin:.3e})")

    result, reports, mon = _single_run(cfg, fam, grid, out)
    if cfg.dump_fields:
        st0, st1 = init_state(fam, grid), result.state
        rows = [[s.t, xi, ph, wv, pv] for s in (st0, st1)
                for xi, ph, wv, pv in zip(grid.x, s.phi, s.w, s.p)]
        _write_csv(out / "fields.csv", ["t", "x", "phi", "w", "p"], rows)
    if result.status == "blowup":
        print(f"blow-up detected at t = {result.t_blowup:.6g} ({result.blowup_reason})")
        return 2
    _write_csv(out / "monitor.csv", _MONITOR_HEADER, [_monitor_row(mon)])
    ok = _monitors_pass(cfg, mon)
    print(f"run complete: t_end={cfg.t_end:g}, min_g={mon.min_g:.4f}, "
          f"max|lambda|={result.max_speed_seen:.12f}, M2={mon.m2:.4e}, "
          f"monitors {'pass' if ok else 'FAIL'}")
    return 0 if ok else 1


def cmd_sweep(cfg, out: Path) -> int:
    if len(cfg.deltas) < 3:
        raise ValidationError("sweep needs at least 3 delta values")
    grid = _grid(cfg)

    def one(delta):
        c = cfg.with_(delta=delta)
        fam = c.family()
        _, _, mon = _single_run(c, fam, grid)
        return mon

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            monitors = list(pool.map(one, cfg.deltas))
    else:
        monitors = [one(d) for d in cfg.deltas]
    _write_csv(out / "sweep.csv", _MONITOR_HEADER, [_monitor_row(m) for m in monitors])
    fit = en.fit_hierarchy(monitors)
    _write_csv(out / "hierarchy.csv",
               ["slope_E2", "slope_Eb2", "eb2_variation", "M2", "C1_bar", "C1"],
               [[fit.slope_e2, fit.slope_eb2, fit.eb2_variation, fit.m2,
                 fit.c1_bar, fit.c1]])
    print(f"sweep: slope(E2)={fit.slope_e2:.3f} (expect 2), "
          f"slope(Eb2)={fit.slope_eb2:.3f} (expect 0), "
          f"Eb2 variation={fit.eb2_variation:.3%}, C1_bar={fit.c1_bar:.3e}, C1={fit.c1:.3e}")
    return 0


def cmd_converge(cfg, out: Path) -> int:
    if cfg.delta != 0.0:
        raise ValidationError("converge mode needs the travelling-wave oracle: set delta = 0")
    fam = cfg.family()
    rows = []
    errs = []
    grid = _grid(cfg)
    for level in range(3):
        res = run_evolution(fam, grid, t_end=cfg.t_end, cfl=cfg.cfl,
                            eps_ko=cfg.eps_ko, gmin=cfg.gmin)
        err = float(np.max(np.abs(res.state.phi - exact_travelling(fam, res.state.t, grid.x))))
        errs.append(err)
        order = "n/a"
        if level > 0 and errs[level] > 0 and errs[level - 1] > 0:
            order = np.log2(errs[level - 1] / errs[level])
        rows.append([level, grid.n, grid.dx, err, order])
        grid = grid.refined()
    _write_csv(out / "converge.csv", ["level", "n", "dx", "err_inf", "order"], rows)
    orders = [r[4] for r in rows[1:] if r[4] != "n/a"]
    print("converge: errors", ", ".join(f"{e:.3e}" for e in errs),
          "orders", ", ".join(f"{o:.2f}" for o in orders) if orders else "n/a")
    return 0


def cmd_blowup(cfg, out: Path) -> int:
    fam = cfg.family()
    grid = _grid(cfg)
    crit = criterion_for_family(fam, grid.x)
    print(f"criterion: {'pass' if crit.passed else 'FAIL (blow-up data)'} "
          f"(ordering margin {crit.order_margin:.3e})")
    rows = []
    t_blowups = []
    result_fine = None
    for level in range(3):
        res = run_evolution(fam, grid, t_end=cfg.t_end, cfl=cfg.cfl,
                            eps_ko=cfg.eps_ko, gmin=cfg.gmin,
                            store_history=(level == 2))
        tb = res.t_blowup if res.status == "blowup" else float("nan")
        rows.append([level, grid.n, grid.dx, tb])
        t_blowups.append(tb)
        if level == 2:
            result_fine = res
        grid = grid.refined()
    _write_csv(out / "blowup.csv", ["level", "n", "dx", "t_blowup"], rows)
    if any(np.isnan(tb) for tb in t_blowups):
        print("blowup: no blow-up detected on some level")
        return 1
    t_star = richardson_time(t_blowups)
    seeds, min_sep, sep0 = _focusing(cfg, fam, result_fine)
    _write_csv(out / "blowup_summary.csv",
               ["t_star", "criterion_passed", "min_separation", "initial_separation"],
               [[t_star, int(crit.passed), min_sep, sep0]])
    print(f"blowup: t = {', '.join(f'{tb:.5f}' for tb in t_blowups)} -> t* = {t_star:.5f}; "
          f"plus-family separation {sep0:.3f} -> {min_sep:.2e}")
    return 0


def richardson_time(t_blowups):
    """Extrapolate the detected times across three grids (halving dx)."""
    t0, t1, t2 = t_blowups
    d0, d1 = t1 - t0, t2 - t1
    if d1 == 0 or d0 == 0 or abs(d1) >= abs(d0):
        return t2
    r = d1 / d0
    return t2 + d1 * r / (1.0 - r)


def _focusing(cfg, fam, result):
    """Adjacent plus-family characteristic separation through the collision."""
    half = max(abs(fam.f.center), abs(fam.fb.center)) + 2.0 * max(fam.f.width, fam.fb.width)
    seeds = np.linspace(-half, half, 17)
    _, min_sep = trace_characteristics(result, seeds, family="plus")
    return seeds, min_sep, float(seeds[1] - seeds[0])


def cmd_verify(cfg, out: Path) -> int:
    rng = np.random.default_rng(cfg.seed)
    rows = []
    failures = []

    # divergence identity: flat background, constant null multiplier, exact
    flat = ident.divergence_identity_study(
        ZeroField(), MovingGaussian(0.7, 0.0, 1.3, 1.0), gamma=cfg.gamma,
        side=("const", 1.0, 0.0), hs=(0.05,))
    _collect(rows, flat)
    if flat.residuals[0] > 1e-12:
        failures.append("divergence_const")

    # divergence identity: curved background, both multipliers, refinement
    phi = random_mixture(rng, amp=0.25)
    varphi = random_mixture(rng, amp=0.5)
    for side in ("TL", "TLb"):
        study = ident.divergence_identity_study(phi, varphi, gamma=cfg.gamma, side=side)
        _collect(rows, study)
        if study.observed_order < 1.5:
            failures.append(study.identity)

    # deformation closed forms and the trace identity
    worst, worst_trace = ident.deformation_check(seed=cfg.seed, gamma=cfg.gamma)
    rows.append(["deformation_closed_vs_direct", 0, 0.0, worst, ""])
    rows.append(["trace_identity", 0, 0.0, worst_trace, ""])
    if worst > 1e-10:
        failures.append("deformation_closed_vs_direct")
    if worst_trace > 1e-13:
        failures.append("trace_identity")

    # two-sided equivalence band of the contractions
    bands = ident.equivalence_ratios(seed=cfg.seed)
    lo = min(b[0] for b in bands.values())
    hi = max(b[1] for b in bands.values())
    rows.append(["equivalence_band_lo", 0, 0.0, lo, ""])
    rows.append(["equivalence_band_hi", 0, 0.0, hi, ""])
    if not (1.0 / 16.0 <= lo and hi <= 16.0):
        failures.append("equivalence_band")

    # discrete energy balance on both null regions
    fam = cfg.family()
    bal_grid = Grid1D(-24.0, 0.125, 385)
    for side, coord in (("TL", -1.0), ("TLb", 1.0)):
        study = ident.energy_balance_study(fam, side, coord, bal_grid, t_end=4.0,
                                           cfl=cfg.cfl, eps_ko=cfg.eps_ko)
        _collect(rows, study)
        if study.observed_order < 1.5:
            failures.append(study.identity)

    _write_csv(out / "identities.csv",
               ["identity", "level", "dx", "residual", "order"], rows)
    for name in sorted({r[0] for r in rows}):
        state = "FAIL" if name in failures else "pass"
        print(f"verify: {name}: {state}")
    if failures:
        print("verify failed:", ", ".join(sorted(set(failures))))
        return 1
    return 0


def _collect(rows, study):
    for i, (h, r) in enumerate(zip(study.levels, study.residuals)):
        order = study.orders[i - 1] if i > 0 else ""
        rows.append([study.identity, i, h, r, order])


def cmd_tracecheck(cfg, out: Path) -> int:
    if cfg.N < 2:
        raise ValidationError("tracecheck needs N >= 2")
    fam = cfg.family()
    kmax = min(cfg.N, 3)
    rows_out = []
    worst = {}
    grid = _grid(cfg)
    levels = []
    for level in range(2):
        table = higher_order_traces(fam, cfg.N, grid.x)
        if level == 0:
            table.write_csv(out / "traces.csv")
        tower = _tower_at_zero(cfg, fam, grid)
        lev = {}
        for (k1, k2), (lt, lbt) in table.rows.items():
            if k1 + k2 > kmax:
                continue
            tl, tlb = tower.rows[(k1, k2)]
            scale = max(float(np.max(np.abs(lt))), float(np.max(np.abs(lbt))), 1e-12)
            lev[(k1, k2)] = max(float(np.max(np.abs(tl - lt))),
                                float(np.max(np.abs(tlb - lbt)))) / scale
        levels.append((grid.dx, lev))
        worst[level] = max(lev.values())
        grid = grid.refined()
    for (k1, k2) in sorted(levels[0][1]):
        d0, d1 = levels[0][1][(k1, k2)], levels[1][1][(k1, k2)]
        order = np.log2(d0 / d1) if d1 > 0 else "n/a"
        for lvl, dxx, dd in ((0, levels[0][0], d0), (1, levels[1][0], d1)):
            rows_out.append([k1, k2, lvl, dxx, cfg.cfl * dxx, dd,
                             order if lvl == 1 else ""])
    _write_csv(out / "tracecheck.csv",
               ["k1", "k2", "level", "dx", "dt", "discrepancy", "order"], rows_out)
    table = higher_order_traces(fam, cfg.N, _grid(cfg).x)
    print(f"tracecheck: max discrepancy {worst[0]:.3e} -> {worst[1]:.3e} under refinement; "
          f"induction denominator min {table.den_min:.6f} (>= 4)")
    return 0


def _tower_at_zero(cfg, fam, grid):
    """Tower centered at t = 0 from forward and backward evolution."""
    state0 = init_state(fam, grid)
    dt = cfg.cfl * grid.dx
    fwd, back = [], []
    s = state0.copy()
    for _ in range(cfg.N):
        s = step(s, dt=dt, eps_ko=cfg.eps_ko, gmin=cfg.gmin)
        fwd.append(s.copy())
    s = state0.copy()
    for _ in range(cfg.N):
        s = step(s, dt=-dt, eps_ko=cfg.eps_ko, gmin=cfg.gmin)
        back.append(s.copy())
    stack = list(reversed(back)) + [state0] + fwd
    return en.build_tower(stack, cfg.N)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="stringlab",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("mode", choices=("run", "sweep", "converge", "blowup",
                                     "verify", "tracecheck"))
    ap.add_argument("--config", help="path to a key = value config file")
    ap.add_argument("--out", help="output directory (default: config `out`)")
    ap.add_argument("--seed", type=int, help="override the config rng seed")
    ap.add_argument("--threads", type=int, help="parallel jobs for sweeps")
    args = ap.parse_args(argv)
    try:
        if args.config:
            cfg = parse_config(Path(args.config).read_text())
        else:
            cfg = ExperimentConfig()
        over = {"mode": args.mode}
        if args.out is not None:
            over["out"] = args.out
        if args.seed is not None:
            over["seed"] = args.seed
        if args.threads is not None:
            over["threads"] = args.threads
        cfg = cfg.with_(**over)
        validate_config(cfg)
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        dispatch = {"run": cmd_run, "sweep": cmd_sweep, "converge": cmd_converge,
                    "blowup": cmd_blowup, "verify": cmd_verify,
                    "tracecheck": cmd_tracecheck}
        return dispatch[cfg.mode](cfg, out)
    except StringLabError as exc:
        print(f"stringlab: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
