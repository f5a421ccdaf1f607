"""Acceptance criteria, each at its stated tolerance.

Every test prints one PASS/FAIL verdict line (collected again in the
terminal summary).  Criteria that the model does not meet are marked
``xfail``; they still run in full and report their measured values.
"""
import filecmp
import math

import numpy as np
import pytest

from fraclob import LatticeSpec, SourceSpec, Simulator, build_kernel, jump_probabilities
from fraclob.book import trade_rate
from fraclob.cli import main
from fraclob.dynamics import seeded_state, simple_diffusion_step, step_uniform
from fraclob.experiments._io import run_jobs
from fraclob.experiments.facts import stylised_facts
from fraclob.experiments.impact import (ImpactSetup, _relaxed, bound, crossings,
                                        default_market_volumes, impact_experiment)
from fraclob.experiments.kinks import LocalProfile, critical_volume, kink_grid, kink_oracle
from fraclob.experiments.session import SessionSetup, run_session
from fraclob.experiments.variance import spike_variance, theory_prefactor
from fraclob.experiments.volume import volume_volatility
from fraclob.forcing import generate_potential
from fraclob.kernel import memory_window_for_trades

SESSION_SEEDS = (3535956730, 4898384128, 5554355463, 586258657, 3453348462)
IMPACT_SEEDS = tuple(range(1, 11))


def test_c1_variance_fine_grid(report):
    rows, ok = [], True
    for a in (0.9, 0.8, 0.7, 0.6):
        v = spike_variance(a, 0.2)
        good = abs(v.b_hat - a) <= 0.01 and abs(v.a_hat - theory_prefactor(a)) <= 0.05
        ok &= good
        rows.append(f"a={a} b={v.b_hat:.5f} A={v.a_hat:.4f}/{theory_prefactor(a):.4f}")
    report(ok, 1, "; ".join(rows))
    assert ok


def test_c2_variance_coarse_grid(report):
    rows, ok = [], True
    for a in (1.0, 0.9, 0.8, 0.7, 0.6):
        v = spike_variance(a, 0.5)
        ok &= abs(v.b_hat - a) <= 0.03
        rows.append(f"a={a} b={v.b_hat:.5f}")
    # short memory at alpha = 0.6: 13 trade events of model time
    full = spike_variance(0.6, 0.5)
    dt = LatticeSpec(alpha=0.6).dt
    m0 = int(round(13 / dt))
    short = spike_variance(0.6, 0.5, m0=m0)
    t_dep = short.departure_time(full)
    dev = np.max(np.abs(short.variances / full.variances - 1.0))
    ok &= 12.5 <= t_dep <= 14.0 and abs(short.b_hat - 0.6) > abs(full.b_hat - 0.6)
    rows.append(f"short memory m0={m0}: departs at t={t_dep:.2f}, b={short.b_hat:.5f}, "
                f"max rel dev {dev:.2e}")
    report(ok, 2, "; ".join(rows))
    assert ok


def test_c3_degeneration(relaxed, report):
    kern = build_kernel(1.0)
    delta = np.array_equal(kern.weights, [1.0])
    lat = relaxed.lattice
    st = seeded_state(relaxed, kern)
    st.phi[190:195] += [0.2, -0.4, 0.1, 0.3, -0.2]
    st.touch()
    src = SourceSpec()
    probs = jump_probabilities(lat.jump_prob, 0.0)
    worst = 0.0
    for _ in range(1000):
        s = src.density(lat.x, st.centre)
        want = simple_diffusion_step(st.phi, lat.jump_prob, st.nu, lat.dt, s)
        step_uniform(st, kern, probs, src)
        worst = max(worst, float(np.max(np.abs(st.phi - want))))
    ok = delta and worst <= 1e-14
    report(ok, 3, f"kernel == delta: {delta}; max per-step deviation {worst:.2e} over 1000 steps")
    assert ok


def test_c4_scheme_equivalence(relaxed, report):
    rows, ok = [], True
    for alpha in (1.0, 0.8):
        lat = LatticeSpec(alpha=alpha)
        kern = build_kernel(alpha, m0=104)
        a = seeded_state(relaxed, kern)
        b = seeded_state(relaxed, kern, nonuniform=True)
        a.lattice = b.lattice = lat
        V = generate_potential(1000, 0.9, 1.0, seed=[17, 0]).values
        su = Simulator(a, kern, SourceSpec(), "uniform", V)
        sn = Simulator(b, kern, SourceSpec(), "nonuniform", V, np.full(1000, lat.dt))
        worst = 0.0
        for _ in range(1000):
            su.step()
            sn.step()
            worst = max(worst, float(np.max(np.abs(a.phi - b.phi))))
        ok &= worst <= 1e-12
        rows.append(f"a={alpha}: max deviation {worst:.2e}")
    report(ok, 4, "; ".join(rows) + " over 1000 forced steps")
    assert ok


def test_c5_mass_conservation(relaxed, report):
    rows, ok = [], True
    for alpha in (1.0, 0.8):
        kern = build_kernel(alpha, m0=memory_window_for_trades(alpha, 0.01, 13, 8))
        st = seeded_state(relaxed, kern)
        st.lattice = LatticeSpec(alpha=alpha)
        sim = Simulator(st, kern, SourceSpec())
        worst = 0.0
        for _ in range(10_000):
            sim.step()
            worst = max(worst, abs(float(np.trapezoid(st.phi, st.x))))
        ok &= worst <= 1e-8
        rows.append(f"a={alpha}: max |int phi| {worst:.2e}")
    report(ok, 5, "; ".join(rows) + " over 10^4 steps")
    assert ok


def test_c6_kink_oracle(report):
    setup = ImpactSetup(kind="flash", delays=tuple(range(1, 8)))
    prof = LocalProfile.from_state(_relaxed(setup), setup.source)
    vc = critical_volume(prof)
    V = kink_grid(vc)
    curves = impact_experiment(setup, V, fit=False)
    err = max(float(np.max(np.abs(curves[dn - 1].mean - [kink_oracle(v, prof, dn) for v in V])))
              for dn in (1, 2))
    dx = setup.lattice.dx
    over = max(float(np.max(c.mean - bound(c.delay, dx))) for c in curves)
    # slopes on either side of V_c differ: the kink sits at V_c
    h = 1e-6 * vc
    near = impact_experiment(setup, [vc - 2 * h, vc - h, vc + h, vc + 2 * h], fit=False)[1].mean
    left, right = (near[1] - near[0]) / h, (near[3] - near[2]) / h
    kink = abs(right - left) > 1e-3 * max(abs(left), abs(right))
    ok = err <= 1e-10 and over <= 1e-12 and kink and V.size == 50 and V[0] < vc < V[-1]
    report(ok, 6, f"V_c={vc:.7f}; max |sim - oracle| {err:.1e}; slopes {left:.4f} -> {right:.4f}; "
                  f"max excess over bound {over:.3f}")
    assert ok


def test_c7_market_impact_fits(report):
    q = default_market_volumes()
    det = impact_experiment(ImpactSetup(), q)
    noisy = impact_experiment(ImpactSetup(sigma=0.5, rho=0.0, warmup=64), q, IMPACT_SEEDS)
    rows, ok = [], True
    for dn, target in ((1, 0.54), (7, 0.73)):
        c = det[dn - 1]
        b = c.power.params[1]
        ok &= abs(b - target) <= 0.05
        two = crossings(c.power, c.log, q)
        ok &= two == 2
        n = noisy[dn - 1]
        bn, se = n.power.params[1], n.power.errors[1]
        inside = target - 0.05 <= bn - 2 * se and bn + 2 * se <= target + 0.05
        ok &= inside
        rows.append(f"dn={dn} det b={b:.4f} (fits cross {two}x), noisy b={bn:.4f}+/-{2 * se:.4f} "
                    f"[{abs(bn - target) / se:.1f} SE from {target}]")
    report(ok, 7, "; ".join(rows))
    assert ok


def _session(args):
    setup, seed = args
    return run_session(setup, seed)


@pytest.fixture(scope="module")
def sessions_persistent():
    setup = SessionSetup(alpha=0.8, rho=0.9, sigma=1.0)
    return run_jobs(_session, [(setup, s) for s in SESSION_SEEDS], workers=1)


@pytest.fixture(scope="module")
def sessions_white():
    setup = SessionSetup(alpha=0.8, rho=0.0, sigma=1.0)
    return run_jobs(_session, [(setup, s) for s in SESSION_SEEDS], workers=1)


@pytest.mark.xfail(reason="Y from the fitted impact exponent falls below 1", strict=False)
def test_c8_y_factor(relaxed, sessions_persistent, report):
    rate = trade_rate(relaxed.phi, relaxed.lattice, 0.5)
    c1 = impact_experiment(ImpactSetup(delays=(1,)), default_market_volumes())[0]
    a, delta = c1.power.params
    vv = volume_volatility([s.p for s in sessions_persistent], rate, a, delta)
    ok_rate = abs(rate - 0.0957) <= 0.1 * 0.0957
    ok_y = 1.0 <= vv.Y <= 10.0
    report(ok_rate and ok_y, 8,
           f"trade rate {rate:.5f} ({'in' if ok_rate else 'out of'} 10%), V_D={vv.V_D:.1f}, "
           f"sigma_h={vv.sigma_h:.2f} over {vv.n_hours} h, sigma_D={vv.sigma_D:.2f}, "
           f"a={a:.4f}, delta={delta:.4f}, Y={vv.Y:.3f}")
    assert ok_rate
    assert ok_y


@pytest.mark.xfail(reason="order-sign ACF outlives the |return| ACF in these sessions", strict=False)
def test_c9a_acf_ordering(sessions_persistent, report):
    lags = []
    for s in sessions_persistent:
        sf = stylised_facts(s.p)
        lags.append((sf.first_inside("signs"), sf.first_inside("abs")))
    ok = all(a < b for a, b in lags)
    report(ok, "9a", "first lag inside band (signs, |returns|) per session: "
           + ", ".join(f"({a},{b})" for a, b in lags))
    assert ok


@pytest.mark.xfail(reason="white-forcing sessions show isolated lags outside the 95% bands", strict=False)
def test_c9b_white_forcing_no_autocorrelation(sessions_white, report):
    res, frac = [], []
    for s in sessions_white:
        sf = stylised_facts(s.p)
        res.append(sf.all_inside("signs") and sf.all_inside("abs"))
        vals = np.concatenate((sf.acf_signs[1:], sf.acf_abs[1:]))
        frac.append(float(np.mean(np.abs(vals) < sf.band)))
    ok = all(res)
    report(ok, "9b", f"sessions with every lag inside: {sum(res)}/{len(res)}; "
           f"fraction of lags inside per session: {', '.join(f'{f:.2f}' for f in frac)}")
    assert ok


def test_c9c_light_tails(sessions_persistent, sessions_white, report):
    shapes = []
    for s in list(sessions_persistent) + list(sessions_white):
        shapes.append(stylised_facts(s.p).gpd.shape)
    ok = all(x < 0 for x in shapes)
    report(ok, "9c", "GPD shape per session (rho=0.9 then rho=0): "
           + ", ".join(f"{x:.2f}" for x in shapes))
    assert ok


def test_c10_determinism(tmp_path, report):
    def run(tag, *extra):
        out = tmp_path / tag
        argv = [*extra, "--out", str(out)]
        assert main(argv) == 0
        return out

    sim = ["simulate", "--alpha", "0.8", "--events", "60", "--seed", "1", "--seed", "2"]
    a, b = run("s1", *sim), run("s2", *sim)
    c = run("s3", *sim, "--workers", "2")
    imp = ["impact", "--sigma", "0.5", "--rho", "0", "--seed", "1", "--seed", "2", "--seed", "3",
           "--set", "q_points=6", "--set", "delays=1,3"]
    d, e = run("i1", *imp), run("i2", *imp, "--workers", "3")
    same = []
    for x, y in ((a, b), (a, c), (d, e)):
        names = sorted(p.name for p in x.glob("*.csv"))
        match, bad, _ = filecmp.cmpfiles(x, y, names, shallow=False)
        same.append(bool(names) and not bad and len(match) == len(names))
    ok = all(same)
    report(ok, 10, f"byte-identical CSVs: repeat run {same[0]}, 1 vs 2 workers {same[1]}, "
                   f"impact 1 vs 3 workers {same[2]}")
    assert ok
