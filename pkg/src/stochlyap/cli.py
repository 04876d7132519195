"""Command-line entry point: simulate trajectories, compute exponents,
sweep noise amplitudes and reproduce the pinned reference experiments.

Configuration is a flat ``key = value`` file overridden by command-line
flags; every output file carries a metadata header with the resolved
config hash and the noise generator id, so runs are replayable.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analysis
from .analysis import SweepConfig, SweepMode, fit_fd_sum, sweep_beta
from .cayley import run_nle
from .integrator import BlowUpError, IntegratorConfig, Scheme, simulate, spin_up
from .models import (
    Convention,
    LorenzParams,
    NoiseKind,
    SystemDef,
    convert_convention,
)
from .smallmat import CayleyDomainError, SingularMatrixError
from .wiener import GENERATOR_ID, generate_path

__all__ = ["RunConfig", "main"]

OUTDIR_ENV = "STOCHLYAP_OUTDIR"

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_CONFIG = 2
EXIT_IO = 3


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run configuration; defaults match the reference
    experiments (sigma=10, r=28, b=8/3, beta=0.5, dt=0.001, 50000 spin-up
    steps, 100000 exponent steps, eta=0.8, Euler-Maruyama)."""

    system: str = "deterministic"
    sigma: float = 10.0
    r: float = 28.0
    b: float = 8.0 / 3.0
    beta: float = 0.5
    seed: int = 1
    dt: float = 0.001
    spin_up_steps: int = 50_000
    nle_steps: int = 100_000
    eta: float = 0.8
    scheme: str = "euler-maruyama"
    convention_mode: str = "paper"
    sample_every: int = 100
    outdir: str = "."

    def validate(self) -> None:
        if self.system not in ("deterministic", "salt", "fd"):
            raise ConfigError(f"unknown system {self.system!r}")
        if self.scheme not in ("euler-maruyama", "heun"):
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if self.convention_mode not in ("paper", "stratonovich-strict"):
            raise ConfigError(f"unknown convention_mode {self.convention_mode!r}")
        if self.dt <= 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not 0 < self.eta < 1:
            raise ConfigError(f"eta must lie in (0, 1), got {self.eta}")
        if self.seed < 0:
            raise ConfigError(f"seed must be nonnegative, got {self.seed}")

    def params(self) -> LorenzParams:
        return LorenzParams(self.sigma, self.r, self.b)

    def system_def(self) -> SystemDef:
        beta = 0.0 if self.system == "deterministic" else self.beta
        kind = {
            "deterministic": NoiseKind.NONE,
            "salt": NoiseKind.SALT,
            "fd": NoiseKind.FD,
        }[self.system]
        native = (
            Convention.STRATONOVICH if kind is NoiseKind.SALT else Convention.ITO
        )
        s = SystemDef(self.params(), kind, beta, native)
        if self.convention_mode == "stratonovich-strict":
            s = convert_convention(s, Convention.STRATONOVICH)
        return s

    def scheme_enum(self) -> Scheme:
        return Scheme(self.scheme)

    def lines(self) -> list[str]:
        return [
            f"{field.name} = {getattr(self, field.name)}"
            for field in dataclasses.fields(self)
        ]

    def config_hash(self) -> str:
        digest = hashlib.sha256("\n".join(self.lines()).encode()).hexdigest()
        return digest[:12]


def _parse_config_file(filename: str) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        text = Path(filename).read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config file {filename}: {err}") from err
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{filename}:{lineno}: expected 'key = value'")
        values[key.strip()] = value.strip()
    return values


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def _coerce(name: str, value: str):
    kind = _FIELD_TYPES.get(name)
    if kind is None:
        raise ConfigError(f"unknown configuration key {name!r}")
    if kind == "int":
        return int(value)
    if kind == "float":
        return float(value)
    return value


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values: dict[str, object] = {}
    if getattr(args, "config", None):
        for key, raw in _parse_config_file(args.config).items():
            values[key] = _coerce(key, raw)
    for field in dataclasses.fields(RunConfig):
        flag = getattr(args, field.name, None)
        if flag is not None:
            values[field.name] = flag
    if values.get("outdir") is None or "outdir" not in values:
        env = os.environ.get(OUTDIR_ENV)
        if env:
            values["outdir"] = env
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


def _metadata_lines(cfg: RunConfig) -> list[str]:
    return [
        f"# config-hash = {cfg.config_hash()}",
        f"# generator-id = {GENERATOR_ID}",
    ]


def _out_path(cfg: RunConfig, name: str, override: str | None) -> Path:
    if override:
        return Path(override)
    out = Path(cfg.outdir)
    out.mkdir(parents=True, exist_ok=True)
    return out / name


def _spin_and_path(cfg: RunConfig):
    s = cfg.system_def()
    path = generate_path(cfg.seed, cfg.spin_up_steps + cfg.nle_steps, cfg.dt)
    mismatch = cfg.convention_mode == "paper"
    icfg = IntegratorConfig(
        scheme=cfg.scheme_enum(),
        dt=cfg.dt,
        n_steps=cfg.spin_up_steps,
        allow_convention_mismatch=mismatch,
    )
    x0 = spin_up(s, path, icfg)
    return s, path, x0, icfg


def cmd_simulate(cfg: RunConfig, args: argparse.Namespace) -> int:
    s, path, x0, icfg = _spin_and_path(cfg)
    traj_cfg = dataclasses.replace(icfg, n_steps=cfg.nle_steps)
    traj = simulate(s, x0, path, traj_cfg, offset=cfg.spin_up_steps)
    out = _out_path(cfg, "trajectory.csv", args.output)
    with open(out, "w", newline="\n") as fh:
        for line in _metadata_lines(cfg):
            fh.write(line + "\n")
        fh.write("t,x,y,z\n")
        for i, row in enumerate(traj):
            t = i * cfg.dt
            fh.write(
                f"{t!r},{float(row[0])!r},{float(row[1])!r},{float(row[2])!r}\n"
            )
    print(f"wrote {out} ({traj.shape[0]} states)")
    print(
        "terminal state: "
        f"x={traj[-1][0]:.6f} y={traj[-1][1]:.6f} z={traj[-1][2]:.6f}"
    )
    return EXIT_OK


def cmd_nle(cfg: RunConfig, args: argparse.Namespace) -> int:
    s, path, x0, icfg = _spin_and_path(cfg)
    res = run_nle(
        s,
        x0,
        path,
        cfg.dt,
        cfg.nle_steps,
        cfg.eta,
        scheme=cfg.scheme_enum(),
        sample_every=cfg.sample_every,
        path_offset=cfg.spin_up_steps,
        allow_convention_mismatch=icfg.allow_convention_mismatch,
    )
    w_over_t = res.w_terminal / res.t_final
    theory = analysis.theoretical_sum(s, res.w_terminal, res.t_final)

    conv = analysis.convergence_series(res)
    conv_out = _out_path(cfg, "nle_convergence.csv", args.output)
    with open(conv_out, "w", newline="\n") as fh:
        for line in _metadata_lines(cfg):
            fh.write(line + "\n")
        fh.write("t,lambda1,lambda2,lambda3,sum\n")
        for t, l1, l2, l3 in conv.tolist():
            fh.write(f"{t!r},{l1!r},{l2!r},{l3!r},{l1 + l2 + l3!r}\n")

    summary = {
        "lambdas": [float(v) for v in res.lambdas],
        "sum": res.sum,
        "trace_residual": res.trace_residual,
        "restarts": res.restarts,
        "w_T_over_T": w_over_t,
        "theoretical_sum": theory,
        "t_final": res.t_final,
        "generator_id": GENERATOR_ID,
        "config_hash": cfg.config_hash(),
    }
    json_out = _out_path(cfg, "nle_summary.json", args.json_output)
    json_out.write_text(json.dumps(summary, indent=2) + "\n")

    print(f"system: {cfg.system}  beta={cfg.beta if cfg.system != 'deterministic' else 0.0}")
    print(
        "lambda1 = {0:.4f}  lambda2 = {1:.4f}  lambda3 = {2:.4f}".format(
            *res.lambdas
        )
    )
    print(f"sum = {res.sum:.4f}  theoretical = {theory:.4f}")
    print(f"restarts = {res.restarts}  trace residual = {res.trace_residual:.3e}")
    print(f"wrote {conv_out} and {json_out}")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, args: argparse.Namespace) -> int:
    betas = np.linspace(args.beta_min, args.beta_max, args.count)
    mode = SweepMode.FIXED_PATH if args.mode == "fixed" else SweepMode.FRESH_PATH_PER_BETA
    jobs = args.jobs if args.jobs else (os.cpu_count() or 1)
    sweep_cfg = SweepConfig(
        params=cfg.params(),
        dt=cfg.dt,
        spin_up_steps=cfg.spin_up_steps,
        nle_steps=cfg.nle_steps,
        eta=cfg.eta,
        sample_every=cfg.sample_every,
        jobs=jobs,
    )
    rows = sweep_beta(betas, mode, cfg.seed, sweep_cfg)
    out = _out_path(cfg, "sweep.csv", args.output)
    with open(out, "w", newline="\n") as fh:
        for line in _metadata_lines(cfg):
            fh.write(line + "\n")
        fh.write("beta,seed,sum_salt,sum_fd,w_T_over_T,theory_fd_sum\n")
        for row in rows:
            theory = row.theory_fd_sum(cfg.params())
            fh.write(
                f"{row.beta!r},{row.seed},{row.sum_salt!r},{row.sum_fd!r},"
                f"{row.w_T_over_T!r},{theory!r}\n"
            )
    print(f"wrote {out} ({len(rows)} rows)")
    if mode is SweepMode.FIXED_PATH:
        fit = fit_fd_sum(rows)
        expected = 3.0 * rows[0].w_T_over_T
        print(
            f"fd-sum regression: slope = {fit.slope:.6f} "
            f"(theory 3*W_T/T = {expected:.6f}), "
            f"intercept = {fit.intercept:.6f}, R^2 = {fit.r_squared:.6f}"
        )
    return EXIT_OK


_REPRODUCTIONS = {
    "table1": {"system": "deterministic"},
    "table2": {"system": "deterministic", "sigma": 16.0, "r": 45.92, "b": 4.0},
    "fig-sweep-fresh": {},
    "fig-sweep-fixed": {},
}


def cmd_reproduce(cfg: RunConfig, args: argparse.Namespace) -> int:
    overrides = _REPRODUCTIONS[args.target]
    cfg = dataclasses.replace(cfg, **overrides)
    cfg.validate()
    if args.target in ("table1", "table2"):
        return cmd_nle(cfg, args)
    sweep_args = argparse.Namespace(
        beta_min=0.0,
        beta_max=1.0,
        count=100,
        mode="fixed" if args.target.endswith("fixed") else "fresh",
        jobs=args.jobs,
        output=args.output,
    )
    return cmd_sweep(cfg, sweep_args)


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key = value configuration file")
    parser.add_argument("--print-config", action="store_true",
                        help="echo the resolved configuration and exit")
    parser.add_argument("--system", choices=["deterministic", "salt", "fd"])
    parser.add_argument("--sigma", type=float)
    parser.add_argument("--r", type=float)
    parser.add_argument("--b", type=float)
    parser.add_argument("--beta", type=float)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--dt", type=float)
    parser.add_argument("--spin-up-steps", type=int, dest="spin_up_steps")
    parser.add_argument("--nle-steps", type=int, dest="nle_steps")
    parser.add_argument("--eta", type=float)
    parser.add_argument("--scheme", choices=["euler-maruyama", "heun"])
    parser.add_argument("--convention-mode",
                        choices=["paper", "stratonovich-strict"],
                        dest="convention_mode")
    parser.add_argument("--sample-every", type=int, dest="sample_every")
    parser.add_argument("--outdir")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stochlyap",
        description="Stochastic Lorenz 63 trajectories and Lyapunov exponents",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="integrate one trajectory to CSV")
    _add_config_flags(p_sim)
    p_sim.add_argument("--output", help="trajectory CSV path")
    p_sim.set_defaults(func=cmd_simulate)

    p_nle = sub.add_parser("nle", help="compute numerical Lyapunov exponents")
    _add_config_flags(p_nle)
    p_nle.add_argument("--output", help="convergence CSV path")
    p_nle.add_argument("--json-output", dest="json_output", help="JSON summary path")
    p_nle.set_defaults(func=cmd_nle)

    p_sweep = sub.add_parser("sweep", help="sweep the noise amplitude")
    _add_config_flags(p_sweep)
    p_sweep.add_argument("--beta-min", type=float, default=0.0)
    p_sweep.add_argument("--beta-max", type=float, default=1.0)
    p_sweep.add_argument("--count", type=int, default=100)
    p_sweep.add_argument("--mode", choices=["fresh", "fixed"], default="fixed")
    p_sweep.add_argument("--jobs", type=int, default=0,
                         help="parallel workers (default: all cores)")
    p_sweep.add_argument("--output", help="sweep CSV path")
    p_sweep.set_defaults(func=cmd_sweep)

    p_rep = sub.add_parser("reproduce", help="run a pinned reference experiment")
    _add_config_flags(p_rep)
    p_rep.add_argument("target", choices=sorted(_REPRODUCTIONS))
    p_rep.add_argument("--jobs", type=int, default=0)
    p_rep.add_argument("--output")
    p_rep.add_argument("--json-output", dest="json_output", default=None)
    p_rep.set_defaults(func=cmd_reproduce)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if getattr(args, "print_config", False):
            for line in cfg.lines():
                print(line)
            print(f"config_hash = {cfg.config_hash()}")
            return EXIT_OK
        return args.func(cfg, args)
    except (ConfigError, ValueError) as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (BlowUpError, CayleyDomainError, SingularMatrixError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
