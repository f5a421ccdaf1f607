"""Command line front end: ``fraclob <subcommand> [flags]``."""
from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .dynamics import SourceSpec
from .forcing import read_potential_csv, write_potential_csv, generate_potential
from .kernel import build_kernel
from .lattice import LatticeSpec

DEFAULT_SEED = 3535956730


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    L: float = 200.0
    M: int = 400
    D_alpha: float = 0.5
    nu: float = 0.5
    r: float = 0.5
    p0: float = 1300.0
    kappa: float = 1.0
    mu: float = 0.1
    alpha: float = 1.0
    sigma: float = 1.0
    rho: float = 0.9
    beta: float = 1.0
    gamma1: int = 8
    gamma2: int = 8
    m0: int = -1                 # -1: derive from memory_trades
    memory_trades: int = 13
    scheme: str = "uniform"
    interp: str = "linear"
    seeds: list = field(default_factory=lambda: [DEFAULT_SEED])
    out: str = "out"
    events: int = 100
    frames: int = 0
    workers: int = 1
    # experiment controls
    kind: str = "market"
    delays: list = field(default_factory=lambda: [1, 2, 3, 4, 5, 6, 7])
    q_max: float = 1.7
    q_points: int = 60
    warmup: int = 64
    horizon: float = 20.0
    half_width: float = 30.0
    zeta: float = -0.1
    potential: str = ""

    def validate(self) -> "RunConfig":
        errs = []
        if not self.L > 0:
            errs.append("L: must be positive")
        if self.M < 4:
            errs.append("M: must be at least 4")
        for name in ("D_alpha", "beta"):
            if not getattr(self, name) > 0:
                errs.append(f"{name}: must be positive")
        if self.nu < 0:
            errs.append("nu: must be non-negative")
        if not 0 < self.r <= 1:
            errs.append("r: must lie in (0, 1]")
        if not 0 < self.alpha <= 1:
            errs.append("alpha: must lie in (0, 1]")
        if self.sigma < 0:
            errs.append("sigma: must be non-negative")
        if not 0 <= self.rho < 1:
            errs.append("rho: must lie in [0, 1)")
        if self.gamma1 < 1:
            errs.append("gamma1: must be >= 1")
        if self.gamma2 < 1:
            errs.append("gamma2: must be >= 1")
        if self.m0 < -1:
            errs.append("m0: must be >= 0 (or -1 for the default)")
        if self.scheme not in ("uniform", "nonuniform"):
            errs.append("scheme: must be uniform or nonuniform")
        if self.interp not in ("linear", "cubic"):
            errs.append("interp: must be linear or cubic")
        if self.kind not in ("market", "flash"):
            errs.append("kind: must be market or flash")
        if self.events < 1:
            errs.append("events: must be >= 1")
        if not self.seeds:
            errs.append("seeds: at least one seed is required")
        if any(d < 1 for d in self.delays):
            errs.append("delays: must be >= 1")
        if self.workers < 1:
            errs.append("workers: must be >= 1")
        if errs:
            raise ConfigError("; ".join(errs))
        return self

    # -- derived objects
    @property
    def dx(self) -> float:
        return self.L / self.M

    def lattice(self, alpha: float | None = None) -> LatticeSpec:
        return LatticeSpec(self.L, self.M, self.alpha if alpha is None else alpha,
                           self.D_alpha, self.r, self.p0)

    def source(self) -> SourceSpec:
        return SourceSpec(self.kappa, self.mu)

    @property
    def m0_override(self):
        return None if self.m0 < 0 else self.m0

    # -- text form
    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, list):
                v = ", ".join(str(x) for x in v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        cfg = cls()
        types = {f.name: f for f in fields(cls)}
        for n, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {n}: expected 'key = value'")
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in types:
                raise ConfigError(f"line {n}: unknown key {key!r}")
            cfg.set(key, val)
        return cfg

    def set(self, key: str, val) -> None:
        default = getattr(RunConfig(), key)
        try:
            if isinstance(default, list):
                if isinstance(val, str):
                    val = [int(x) for x in val.replace(",", " ").split()]
                else:
                    val = [int(x) for x in val]
            elif isinstance(default, bool):
                val = str(val).lower() in ("1", "true", "yes")
            elif isinstance(default, int):
                val = int(val)
            elif isinstance(default, float):
                val = float(val)
            else:
                val = str(val)
        except ValueError as exc:
            raise ConfigError(f"{key}: cannot parse {val!r}") from exc
        setattr(self, key, val)


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fraclob", description="Fractional-diffusion order book simulator")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, hlp in [("simulate", "mid-price path (and optional frames)"),
                      ("variance", "spike-variance diffusion check"),
                      ("impact", "price-impact curves and fits"),
                      ("facts", "stylised facts and daily volume/volatility"),
                      ("kernel", "dump the memory kernel"),
                      ("complexity", "step-count table")]:
        p = sub.add_parser(name, help=hlp)
        p.add_argument("--config", type=Path, help="key = value file (as written to config.txt)")
        p.add_argument("--out", type=str, help="output directory")
        p.add_argument("--seed", type=int, action="append", dest="seeds", help="RNG seed, repeatable")
        p.add_argument("--alpha", type=float, action="append", dest="alphas", help="memory exponent in (0, 1], repeatable")
        p.add_argument("--rho", type=float, help="AR(1) coefficient of the potential")
        p.add_argument("--sigma", type=float, help="innovation std of the potential")
        p.add_argument("--scheme", choices=["uniform", "nonuniform"])
        p.add_argument("--interp", choices=["linear", "cubic"])
        p.add_argument("--gamma1", type=int, help="steps per trade event")
        p.add_argument("--m0", type=int, help="kernel window in steps (-1 derives it)")
        p.add_argument("--frames", type=int, help="dump the density every N events (0: never)")
        p.add_argument("--dx", type=float, help="grid spacing, sets M = L / dx")
        p.add_argument("--workers", type=int, help="process pool size")
        p.add_argument("--events", type=int, help="trade events to record")
        p.add_argument("--kind", choices=["market", "flash"], help="order type for impact runs")
        p.add_argument("--potential", type=str, help="replay a V path CSV (step, V)")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override any config key")
    return ap


def build_config(args) -> tuple[RunConfig, list]:
    cfg = RunConfig.from_text(args.config.read_text()) if args.config else RunConfig()
    for kv in args.set:
        if "=" not in kv:
            raise ConfigError(f"--set expects KEY=VALUE, got {kv!r}")
        k, v = kv.split("=", 1)
        if not hasattr(cfg, k.strip()):
            raise ConfigError(f"unknown key {k.strip()!r}")
        cfg.set(k.strip(), v.strip())
    for key in ("out", "rho", "sigma", "scheme", "interp", "gamma1", "m0", "frames", "workers",
                "events", "kind", "potential"):
        v = getattr(args, key)
        if v is not None:
            cfg.set(key, v)
    if args.seeds:
        cfg.seeds = list(args.seeds)
    if args.dx is not None:
        m = cfg.L / args.dx
        if abs(m - round(m)) > 1e-9:
            raise ConfigError(f"dx: L = {cfg.L} is not a multiple of {args.dx}")
        cfg.M = int(round(m))
    alphas = list(args.alphas) if args.alphas else [cfg.alpha]
    cfg.alpha = alphas[0]
    cfg.validate()
    for a in alphas:
        if not 0 < a <= 1:
            raise ConfigError("alpha: must lie in (0, 1]")
    return cfg, alphas


def _outdir(cfg: RunConfig) -> Path:
    d = Path(cfg.out)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _tag(a: float) -> str:
    return f"{a:g}"


# ---------------------------------------------------------------- commands

def cmd_kernel(cfg: RunConfig, alphas, out_given: bool) -> list:
    files = []
    for a in alphas:
        k = build_kernel(a, m0=cfg.m0_override)
        if out_given:
            d = _outdir(cfg)
            name = f"kernel_alpha{_tag(a)}.csv"
            k.to_csv(d / name)
            files.append(name)
        else:
            sys.stdout.write("j,K_j\n")
            for j, w in enumerate(k.weights, start=1):
                sys.stdout.write(f"{j},{float(w)!r}\n")
    return files


def _session_setup(cfg: RunConfig, alpha: float, events: int):
    from .experiments.session import SessionSetup
    return SessionSetup(alpha=alpha, rho=cfg.rho, sigma=cfg.sigma, beta=cfg.beta, nu=cfg.nu,
                        gamma1=cfg.gamma1, memory_trades=cfg.memory_trades, m0=cfg.m0_override,
                        scheme=cfg.scheme, interp=cfg.interp, events=events,
                        lattice=cfg.lattice(1.0), source=cfg.source())


def cmd_simulate(cfg: RunConfig, alphas) -> list:
    from .book import write_midprice_csv
    from .experiments.session import run_session
    d = _outdir(cfg)
    files = []
    replay = read_potential_csv(cfg.potential) if cfg.potential else None
    for a in alphas:
        for seed in cfg.seeds:
            setup = _session_setup(cfg, a, cfg.events - 1)
            stem = f"alpha{_tag(a)}_seed{seed}"
            fdir = None
            if cfg.frames:
                fdir = d / f"frames_{stem}"
                fdir.mkdir(exist_ok=True)
            n = setup.events * setup.gamma1
            V = replay
            if V is None:
                V = generate_potential(n, setup.rho, setup.sigma, seed=[int(seed), 0], beta=setup.beta).values
            s = run_session(setup, seed, cfg.frames, fdir, potentials=V)
            write_midprice_csv(d / f"midprice_{stem}.csv", s.ell, s.t, s.p)
            write_potential_csv(d / f"potential_{stem}.csv", V[:n])
            files += [f"midprice_{stem}.csv", f"potential_{stem}.csv"]
    return files


def cmd_variance(cfg: RunConfig, alphas) -> list:
    from .experiments._io import run_jobs, write_csv, write_json
    from .experiments.variance import theory_prefactor
    d = _outdir(cfg)
    jobs = [(a, cfg.dx, cfg.m0_override, cfg.horizon, cfg.half_width, cfg.D_alpha, cfg.r) for a in alphas]
    res = run_jobs(_variance_job, jobs, cfg.workers)
    files, table = [], []
    for a, v in zip(alphas, res):
        name = f"variance_alpha{_tag(a)}.csv"
        write_csv(d / name, ["t", "variance"], zip(v.times, v.variances))
        files.append(name)
        table.append({"alpha": a, "dx": v.dx, "window": v.window,
                      "sigma0_theory": theory_prefactor(a, cfg.D_alpha),
                      "alpha_hat": v.b_hat, "alpha_hat_err": v.b_err,
                      "sigma0_hat": v.a_hat, "sigma0_hat_err": v.a_err})
    write_json(d / "variance_fit.json", {"rows": table})
    files.append("variance_fit.json")
    return files


def _variance_job(job):
    from .experiments.variance import spike_variance
    a, dx, m0, horizon, hw, D, r = job
    return spike_variance(a, dx, m0, horizon, hw, D_alpha=D, r=r)


def _impact_setup(cfg: RunConfig, alpha: float):
    from .experiments.impact import ImpactSetup
    return ImpactSetup(kind=cfg.kind, alpha=alpha, scheme=cfg.scheme, interp=cfg.interp,
                       delays=tuple(cfg.delays), rho=cfg.rho, sigma=cfg.sigma,
                       warmup=cfg.warmup if cfg.sigma > 0 else 0, m0=cfg.m0_override, nu=cfg.nu,
                       lattice=cfg.lattice(1.0), source=cfg.source())


def cmd_impact(cfg: RunConfig, alphas) -> list:
    from .experiments._io import write_csv, write_json
    from .experiments.impact import crossings, default_market_volumes, impact_experiment, reference_area
    d = _outdir(cfg)
    files = []
    for a in alphas:
        setup = _impact_setup(cfg, a)
        if cfg.kind == "market":
            q = default_market_volumes(cfg.q_points, cfg.q_max)
        else:
            q = np.geomspace(cfg.q_max / 1000.0, cfg.q_max, cfg.q_points)
        curves = impact_experiment(setup, q, cfg.seeds, cfg.workers)
        rows, fits = [], []
        for c in curves:
            rows += [(c.delay, qq, m, s) for qq, m, s in zip(c.volumes, c.mean, c.std)]
            fits.append({"delay": c.delay, "replications": c.replications,
                         "power": c.power.as_dict(("a", "b")), "log": c.log.as_dict(("c", "d")),
                         "crossings": crossings(c.power, c.log, c.volumes)})
        stem = f"{cfg.kind}_alpha{_tag(a)}"
        write_csv(d / f"impact_{stem}.csv", ["delay", "Q", "dP_mean", "dP_std"], rows)
        write_json(d / f"impact_fit_{stem}.json",
                   {"kind": cfg.kind, "alpha": a, "bid_area": reference_area(setup), "fits": fits})
        files += [f"impact_{stem}.csv", f"impact_fit_{stem}.json"]
    return files


def _facts_job(job):
    from .experiments.session import run_session
    setup, seed = job
    s = run_session(setup, seed)
    return s.p, s.t, float(np.mean(s.rate))


def cmd_facts(cfg: RunConfig, alphas) -> list:
    from .book import trade_rate, write_midprice_csv
    from .dynamics import relax_to_equilibrium
    from .experiments._io import run_jobs, write_csv, write_json
    from .experiments.facts import stylised_facts
    from .experiments.impact import ImpactSetup, default_market_volumes, impact_experiment
    from .experiments.volume import volume_volatility
    d = _outdir(cfg)
    files = []
    base = relax_to_equilibrium(cfg.lattice(1.0), cfg.source(), cfg.nu)
    rate = trade_rate(base.phi, base.lattice, cfg.D_alpha)
    for a in alphas:
        setup = _session_setup(cfg, a, cfg.events)
        res = run_jobs(_facts_job, [(setup, s) for s in cfg.seeds], cfg.workers)
        paths = []
        summary = {"alpha": a, "sessions": []}
        for seed, (p, t, mean_rate) in zip(cfg.seeds, res):
            stem = f"alpha{_tag(a)}_seed{seed}"
            write_midprice_csv(d / f"midprice_{stem}.csv", np.arange(p.size), t, p)
            sf = stylised_facts(p, cfg.zeta)
            lags = np.arange(sf.acf_signs.size)
            write_csv(d / f"acf_{stem}.csv", ["lag", "signs", "returns", "abs_returns"],
                      zip(lags, sf.acf_signs, sf.acf_returns, sf.acf_abs))
            write_csv(d / f"hist_{stem}.csv", ["left", "right", "density"],
                      zip(sf.hist_edges[:-1], sf.hist_edges[1:], sf.hist_density))
            write_csv(d / f"qq_{stem}.csv", ["normal", "sample"], zip(sf.qq_theory, sf.qq_sample))
            write_csv(d / f"mean_excess_{stem}.csv", ["u", "mean_excess", "se"],
                      zip(sf.me_thresholds, sf.me_values, sf.me_errors))
            files += [f"{k}_{stem}.csv" for k in ("midprice", "acf", "hist", "qq", "mean_excess")]
            g = sf.gpd
            summary["sessions"].append({
                "seed": seed, "band": sf.band, "mean_trade_rate": mean_rate,
                "first_lag_inside": {w: sf.first_inside(w) for w in ("signs", "returns", "abs")},
                "gpd": {"shape": g.shape, "scale": g.scale, "threshold": g.threshold,
                        "n_exceed": g.n_exceed, "method": g.method, "light_tailed": g.light_tailed}})
            paths.append(p)
        if len(paths) * 8 >= 32:  # enough hourly slices
            # instantaneous deterministic market impact supplies (a, delta)
            mk = ImpactSetup(alpha=1.0, delays=(1,), lattice=cfg.lattice(1.0), source=cfg.source(),
                             nu=cfg.nu)
            c1 = impact_experiment(mk, default_market_volumes(cfg.q_points, cfg.q_max))[0]
            vv = volume_volatility(paths, rate, c1.power.params[0], c1.power.params[1], cfg.events)
            summary["volume"] = dataclasses.asdict(vv)
        write_json(d / f"facts_alpha{_tag(a)}.json", summary)
        files.append(f"facts_alpha{_tag(a)}.json")
    return files


def cmd_complexity(cfg: RunConfig, alphas) -> list:
    from .experiments._io import write_csv
    from .experiments.complexity import complexity_table
    d = _outdir(cfg)
    dxs = [cfg.dx, 0.5, 0.2, 0.1]
    dxs = sorted(set(dxs), reverse=True)
    al = alphas if len(alphas) > 1 else [1.0, 0.9, 0.8, 0.7, 0.6]
    rows = complexity_table(al, dxs, T=cfg.horizon, K=1.0, X=cfg.L)
    full = complexity_table(al, dxs, T=cfg.horizon, K=1.0, X=cfg.L, full_memory=True)
    write_csv(d / "complexity.csv", ["alpha", "dx", "steps", "steps_full_memory"],
              [(a, x, s, f[2]) for (a, x, s), f in zip(rows, full)])
    return ["complexity.csv"]


COMMANDS = {"simulate": cmd_simulate, "variance": cmd_variance, "impact": cmd_impact,
            "facts": cmd_facts, "complexity": cmd_complexity}


def main(argv=None) -> int:
    from .experiments._io import write_manifest
    args = _parser().parse_args(argv)
    try:
        cfg, alphas = build_config(args)
    except ConfigError as exc:
        print(f"fraclob: invalid config: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "kernel":
            files = cmd_kernel(cfg, alphas, args.out is not None or args.config is not None)
            if not files:
                return 0
        else:
            files = COMMANDS[args.command](cfg, alphas)
    except Exception as exc:  # reported, not swallowed: nonzero exit
        print(f"fraclob {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    params = {k: v for k, v in dataclasses.asdict(cfg).items() if k not in ("seeds", "out", "workers")}
    params["alphas"] = alphas
    params["command"] = args.command
    (Path(cfg.out) / "config.txt").write_text(cfg.to_text())
    write_manifest(cfg.out, args.command, params, cfg.seeds, files + ["config.txt"])
    return 0


if __name__ == "__main__":
    sys.exit(main())
