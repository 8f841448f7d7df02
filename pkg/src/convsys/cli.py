"""Command-line front end: simulate, estimate, diagnose, illposed-demo.

Conventions shared by all subcommands:

  * a JSON config file (--config) overrides command-line flags key by key,
    so a config checked into a project fully determines a run;
  * manifests record a short hash of the effective configuration;
  * exit code 0 on success, 2 on configuration errors, 3 on numerical
    failures, and errors are emitted as one JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, ConvsysError, NumericalError
from .families import parse_family, parse_regression
from .gridfn import GridFn, GridSpec, make_grid
from .ecf import empirical_moments
from .ident import (
    default_tau,
    kappa_a,
    kappa_b,
    recover_real,
    solve_case_a,
    solve_case_b,
    threshold_support,
)
from .regular import make_weight, solve_regularized
from .serialize import (
    config_hash,
    load_momentset,
    load_sampleset,
    save_gridfn,
    save_sampleset,
    save_solution,
)
from .sim import ModelSpec, generate
from .wellposed import (
    ClassParams,
    TailClassParams,
    check_phi_mV,
    check_tail_class,
    illposed_demo,
)


def _parse_grid(text: str) -> GridSpec:
    """'lo:hi:n' for d=1, 'lo1,lo2:hi1,hi2:n1,n2' for d=2."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid must be lo:hi:n, got {text!r}")
    lo = tuple(float(t) for t in parts[0].split(","))
    hi = tuple(float(t) for t in parts[1].split(","))
    n = tuple(int(t) for t in parts[2].split(","))
    if not (len(lo) == len(hi) == len(n)):
        raise ConfigError("grid lo/hi/n must have matching lengths")
    dim = len(lo)
    if dim not in (1, 2):
        raise ConfigError("only 1- and 2-dimensional grids are supported")
    return make_grid(dim, lo if dim > 1 else lo[0], hi if dim > 1 else hi[0], n if dim > 1 else n[0])


def _parse_reg(text: str):
    """'C:profile' with C a number or 'auto' (use the mask edge)."""
    c_txt, _, profile = text.partition(":")
    profile = profile or "raised_cosine"
    if c_txt.strip().lower() == "auto":
        return "auto", profile
    try:
        return float(c_txt), profile
    except ValueError:
        raise ConfigError(f"bad bandlimit {c_txt!r} in --reg") from None


def _parse_class(text: str):
    """'m:V' -> ClassParams, 'm:V:B:Lambda' -> TailClassParams.

    m and Lambda take comma lists for d=2 (Lambda as l11,l12,l22).
    """
    parts = text.split(":")
    if len(parts) not in (2, 4):
        raise ConfigError("class spec must be m:V or m:V:B:Lambda")
    m = tuple(int(t) for t in parts[0].split(","))
    V = float(parts[1])
    if len(parts) == 2:
        return ClassParams(m, V)
    B = float(parts[2])
    lam_vals = [float(t) for t in parts[3].split(",")]
    if len(lam_vals) == 1:
        Lam = np.array([[lam_vals[0]]])
    elif len(lam_vals) == 3:
        Lam = np.array([[lam_vals[0], lam_vals[1]], [lam_vals[1], lam_vals[2]]])
    else:
        raise ConfigError("Lambda must be a scalar or l11,l12,l22")
    return TailClassParams(B=B, Lam=Lam, m=m, V=V)


_MODEL_DEFAULTS = {
    1: {"g": "gaussian:0,1", "f": "laplace:0,1"},
    2: {"g": "linear:1,0", "f": "gaussian:0,0.25", "z": "gaussian:0,1", "uy": "gaussian:0,0.25"},
    3: {"g": "gaussian:0,1", "f": "gaussian:0,0.25"},
}


@dataclass
class RunConfig:
    """Effective options for one CLI invocation after config-file merge."""

    command: str
    model: int | None = None
    n: int = 10_000
    seed: int = 0
    grid: str | None = None
    case: str = "auto"
    tau: float | None = None
    reg: str | None = None
    cls: str | None = None
    inp: str | None = None
    out: str | None = None
    bandwidth: float | None = None
    g: str | None = None
    f: str | None = None
    ux: str | None = None
    uy: str | None = None
    z: str | None = None
    ns: str = "2:10"

    def hash_source(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if v is not None}
        return d


_CONFIG_KEYS = {
    "model", "n", "seed", "grid", "case", "tau", "reg",
    "class", "in", "out", "bandwidth", "g", "f", "ux", "uy", "z", "ns",
}
_KEY_ALIASES = {"class": "cls", "in": "inp"}


def _merge_config(cfg: RunConfig, path: str) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {path} is not valid JSON: {e}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config file must contain a JSON object")
    for key, val in raw.items():
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        setattr(cfg, _KEY_ALIASES.get(key, key), val)
    return cfg


def _auto_case(M, mask) -> str:
    """Pick the case whose log-derivative field is smoother near the origin.

    Case (a) divides out a smooth gamma, case (b) a smooth phi; whichever
    ratio field has less curvature on the central half of the mask is the
    better-conditioned exponent to integrate.
    """
    if M.spec.dim != 1 or not M.deps1:
        return "a"
    tau = mask.tau
    ka = kappa_a(M, mask, floor=tau)[0].values
    kb = kappa_b(M, mask, floor=tau)[0].values
    ax = M.spec.axis(0)
    half = 0.5 * mask.edge_radius()
    central = mask.mask & (np.abs(ax) <= max(half, M.spec.step[0] * 4))
    if central.sum() < 8:
        return "a"

    def roughness(vals):
        v = vals[central]
        dd = np.diff(v, n=2)
        return float(np.mean(np.abs(dd))) if dd.size else np.inf

    return "a" if roughness(ka) <= roughness(kb) else "b"


def cmd_simulate(cfg: RunConfig) -> int:
    if cfg.model not in (1, 2, 3):
        raise ConfigError("--model must be 1, 2, or 3")
    if cfg.out is None:
        raise ConfigError("simulate requires --out")
    defaults = _MODEL_DEFAULTS[cfg.model]
    g_txt = cfg.g or defaults["g"]
    f_txt = cfg.f or defaults["f"]
    if cfg.model == 2:
        g_dict = parse_regression(g_txt).to_dict()
    else:
        g_dict = parse_family(g_txt).to_dict()
    spec = ModelSpec(
        model=cfg.model,
        g_spec=g_dict,
        f_spec=parse_family(f_txt).to_dict(),
        u_x_spec=parse_family(cfg.ux).to_dict() if cfg.ux else None,
        u_y_spec=parse_family(cfg.uy or defaults.get("uy")).to_dict()
        if (cfg.uy or defaults.get("uy"))
        else None,
        z_spec=parse_family(cfg.z or defaults.get("z")).to_dict()
        if (cfg.z or defaults.get("z"))
        else None,
        n=cfg.n,
    )
    sample = generate(spec, cfg.seed)
    out = save_sampleset(sample, cfg.out)
    h = config_hash({"spec": spec.to_dict(), "seed": cfg.seed})
    manifest = out.with_suffix(".manifest.json")
    manifest.write_text(
        json.dumps({"kind": "sim_manifest", "spec": spec.to_dict(),
                    "seed": cfg.seed, "config_hash": h}, indent=2)
    )
    print(json.dumps({"out": str(out), "n": sample.n, "model": sample.model,
                      "config_hash": h}))
    return 0


def cmd_estimate(cfg: RunConfig) -> int:
    if cfg.inp is None:
        raise ConfigError("estimate requires --in (samples csv)")
    if cfg.grid is None:
        raise ConfigError("estimate requires --grid lo:hi:n (frequency grid)")
    if cfg.out is None:
        raise ConfigError("estimate requires --out (solution directory)")
    t0 = time.perf_counter()
    sample = load_sampleset(cfg.inp)
    freq = _parse_grid(cfg.grid)
    M = empirical_moments(sample, freq, bandwidth=cfg.bandwidth)
    tau = cfg.tau if cfg.tau is not None else default_tau(M.n_samples)
    if sample.model == "example2":
        # regression transforms are not cf-normalized; threshold relative
        # to the origin value so tau keeps its usual meaning
        tau = tau * abs(M.eps1.at_origin())

    case = cfg.case
    weight_params = None
    if cfg.reg is not None:
        C, profile = _parse_reg(cfg.reg)
        if case == "auto":
            case = "b"
        if C == "auto":
            mask = threshold_support(M.eps1, tau)
            C = 0.95 * mask.edge_radius()
            if C <= 0:
                raise NumericalError("support mask too small to choose a bandlimit")
        w = make_weight(C, profile, freq)
        sol = solve_regularized(M, w, case=case, tau=tau)
        weight_params = {"C": C, "profile": profile}
    else:
        if case == "auto":
            mask = threshold_support(M.eps1, tau)
            case = _auto_case(M, mask)
        if case == "a":
            sol = solve_case_a(M, tau=tau)
        elif case == "b":
            sol = solve_case_b(M, tau=tau)
        else:
            raise ConfigError("--case must be a, b, or auto")

    density_g = sample.model != "example2"
    g_real = recover_real(sol, "g", density=density_g)
    f_real = recover_real(sol, "f", density=True)

    h = config_hash(cfg.hash_source())
    outdir = Path(cfg.out)
    save_solution(
        sol,
        outdir,
        extra={
            "config_hash": h,
            "model": sample.model,
            "n_samples": sample.n,
            "grid": cfg.grid,
            "weight": weight_params,
            "bandwidth": M.meta.get("bandwidth"),
            "elapsed_s": round(time.perf_counter() - t0, 3),
        },
    )
    save_gridfn(g_real, outdir / "g_real")
    save_gridfn(f_real, outdir / "f_real")
    summary = {
        "out": str(outdir),
        "case": sol.case,
        "identified": sol.identified,
        "mask_points": sol.mask.count,
        "dropped_points": sol.meta.get("dropped_points"),
        "residual": sol.residual(),
        "config_hash": h,
    }
    print(json.dumps(summary))
    return 0


def cmd_diagnose(cfg: RunConfig) -> int:
    if cfg.inp is None:
        raise ConfigError("diagnose requires --in (moments dir or samples csv)")
    if cfg.cls is None:
        raise ConfigError("diagnose requires --class m:V[:B:Lambda]")
    params = _parse_class(cfg.cls)
    path = Path(cfg.inp)
    if path.is_dir():
        M = load_momentset(path)
    else:
        if cfg.grid is None:
            raise ConfigError("diagnosing raw samples requires --grid")
        sample = load_sampleset(path)
        M = empirical_moments(sample, _parse_grid(cfg.grid), bandwidth=cfg.bandwidth)
    if isinstance(params, TailClassParams):
        diag = check_tail_class(M.eps1, params)
    else:
        diag = check_phi_mV(M.eps1, params)
    payload = diag.to_dict()
    payload["config_hash"] = config_hash(cfg.hash_source())
    if cfg.out:
        Path(cfg.out).write_text(json.dumps(payload, indent=2))
    print(json.dumps({"verdict": diag.verdict, "out": cfg.out}))
    return 0


def cmd_illposed_demo(cfg: RunConfig) -> int:
    lo, _, hi = cfg.ns.partition(":")
    try:
        ns = range(int(lo), int(hi or lo) + 1)
    except ValueError:
        raise ConfigError(f"--ns must be lo:hi, got {cfg.ns!r}") from None
    report = illposed_demo(ns)
    rows = report.to_dict()["rows"]
    widths = ("n", "pairing", "weak_norm", "log_pairing_inv", "log_bound")
    print("  ".join(f"{w:>16s}" for w in widths))
    for r in rows:
        print(
            f"{r['n']:>16d}  {r['pairing_bn']:>16.6e}  {r['weak_norm']:>16.6e}  "
            f"{r['log_pairing_inverse']:>16.4f}  {r['log_lower_bound']:>16.4f}"
        )
    if cfg.out:
        Path(cfg.out).write_text(json.dumps(report.to_dict(), indent=2))
    if not report.bound_holds:
        raise NumericalError("divergence lower bound violated; inspect the grid")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="convsys",
        description="Deconvolution systems: simulate, estimate, diagnose.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("--config", help="JSON file whose keys override flags")
        sp.add_argument("--out", help="output path (file or directory)")

    sp = sub.add_parser("simulate", help="draw synthetic samples for a model")
    sp.add_argument("--model", type=int, choices=(1, 2, 3))
    sp.add_argument("--n", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--g", help="latent family (models 1/3) or regression (model 2), e.g. gaussian:0,1")
    sp.add_argument("--f", help="error family, e.g. laplace:0,1")
    sp.add_argument("--ux", help="extra measurement-error family for x")
    sp.add_argument("--uy", help="response-noise family (model 2)")
    sp.add_argument("--z", help="design family for z (model 2)")
    add_common(sp)

    sp = sub.add_parser("estimate", help="solve the convolution system from samples")
    sp.add_argument("--in", dest="inp", help="samples csv from `simulate`")
    sp.add_argument("--grid", help="frequency grid lo:hi:n")
    sp.add_argument("--case", choices=("a", "b", "auto"), default="auto")
    sp.add_argument("--tau", type=float, help="support threshold (default 2.5/sqrt(n))")
    sp.add_argument("--reg", help="spectral weight C:profile; C may be 'auto'")
    sp.add_argument("--bandwidth", type=float, help="smoother bandwidth (model 2)")
    add_common(sp)

    sp = sub.add_parser("diagnose", help="well-posedness class checks on eps1")
    sp.add_argument("--in", dest="inp", help="moments directory or samples csv")
    sp.add_argument("--class", dest="cls", help="m:V or m:V:B:Lambda")
    sp.add_argument("--grid", help="frequency grid (when --in is a csv)")
    sp.add_argument("--bandwidth", type=float)
    add_common(sp)

    sp = sub.add_parser("illposed-demo", help="divergence table for the bump sequence")
    sp.add_argument("--ns", default="2:10", help="bump index range lo:hi")
    add_common(sp)
    return p


_COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "diagnose": cmd_diagnose,
    "illposed-demo": cmd_illposed_demo,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = RunConfig(command=args.command)
    for key, val in vars(args).items():
        if key in ("command", "config") or val is None:
            continue
        setattr(cfg, key, val)
    try:
        if getattr(args, "config", None):
            cfg = _merge_config(cfg, args.config)
        return _COMMANDS[args.command](cfg)
    except ConfigError as e:
        _emit_error("config", e)
        return 2
    except NumericalError as e:
        _emit_error("numerical", e)
        return 3
    except ConvsysError as e:
        _emit_error("error", e)
        return 3


def _emit_error(kind: str, exc: Exception) -> None:
    print(json.dumps({"error": {"type": kind, "message": str(exc)}}), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
