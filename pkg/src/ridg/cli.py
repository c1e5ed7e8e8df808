"""Command-line harness: stability scans, convergence studies, single runs and comparisons."""
from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .errors import BlowUpError, BracketError, DomainError, ExactSolutionError, NewtonError, RIDGError
from .mesh import estimate_order_from_counts, total_mass

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

PROBLEM_NAMES = ("advection1d", "advection2d", "advection3d", "burgers1d", "burgers2d")
SCHEME_NAMES = ("lidg", "ridg", "rkdg")
CONVERGENCE_HEADER = "mesh,n_steps,runtime_s,l1,l1_order,l2,l2_order,linf,linf_order"


class ConfigError(RIDGError, ValueError):
    """Invalid run configuration."""


def fmt(x) -> str:
    """Shortest round-trip decimal form; blank for ``None``."""
    return "" if x is None else repr(float(x))


@dataclass
class RunConfig:
    problem: str = "advection1d"
    scheme: str = "ridg"
    m_deg: int = 3
    meshes: tuple = (40, 80, 160)
    nu: float | None = None
    final_time: float | None = None
    omega_resolution: int | None = None
    epsilon: float = 5e-4
    out: str | None = None
    threads: int | None = None
    seed: int = 0

    @property
    def m_dim(self) -> int:
        return int(self.problem[-2])

    @property
    def is_burgers(self) -> bool:
        return self.problem.startswith("burgers")

    def validate(self, need_problem: bool = True) -> "RunConfig":
        if need_problem and self.problem not in PROBLEM_NAMES:
            raise ConfigError(f"unknown problem {self.problem!r}")
        if self.scheme not in SCHEME_NAMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if self.m_deg < 0:
            raise ConfigError("m_deg must be >= 0")
        if need_problem:
            if not self.meshes or any(b <= a for a, b in zip(self.meshes, self.meshes[1:])):
                raise ConfigError("meshes must be non-empty and strictly increasing")
            if self.meshes[0] < 1:
                raise ConfigError("mesh sizes must be positive")
            if self.is_burgers and self.scheme == "lidg":
                raise ConfigError("burgers problems support the ridg and rkdg schemes")
            if not self.is_burgers and self.scheme == "rkdg":
                raise ConfigError("advection problems support the lidg and ridg schemes")
        if self.nu is not None and self.nu <= 0:
            raise ConfigError("nu must be > 0")
        if self.final_time is not None and self.final_time <= 0:
            raise ConfigError("final_time must be > 0")
        if self.epsilon <= 0:
            raise ConfigError("epsilon must be > 0")
        return self

    def resolved_nu(self) -> float:
        if self.nu is not None:
            return self.nu
        return {"lidg": 0.1, "ridg": 0.9, "rkdg": 0.1}[self.scheme]

    def resolved_final_time(self) -> float:
        if self.final_time is not None:
            return self.final_time
        return 0.4 if self.is_burgers else 2.0


_INT_KEYS = {"m_deg", "omega_resolution", "threads", "seed"}
_FLOAT_KEYS = {"nu", "final_time", "epsilon"}


def _convert(key: str, value: str):
    try:
        if key == "meshes":
            return tuple(int(v) for v in value.replace(" ", "").split(",") if v)
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc
    return value.strip().lower() if key in ("problem", "scheme") else value.strip()


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines (``#`` starts a comment)."""
    known = {f.name for f in fields(RunConfig)}
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        out[key] = _convert(key, value)
    return out


def load_config(path) -> dict:
    try:
        return parse_config_text(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def build_config(args) -> RunConfig:
    values = load_config(args.config) if args.config else {}
    for key in ("problem", "scheme", "m_deg", "meshes", "nu", "final_time", "omega_resolution",
                "epsilon", "out", "threads", "seed"):
        v = getattr(args, key, None)
        if v is not None:
            values[key] = _convert(key, v) if isinstance(v, str) else v
    return RunConfig(**values)


def apply_threads(cfg: RunConfig) -> None:
    if not cfg.threads:
        return
    from . import _kernels
    if _kernels.HAVE_NUMBA:
        import numba
        numba.set_num_threads(min(cfg.threads, numba.config.NUMBA_NUM_THREADS))


# --------------------------------------------------------------------------
# runs
# --------------------------------------------------------------------------


@dataclass
class Row:
    mesh: int
    n_steps: int
    runtime: float
    errors: tuple
    failed: str | None = None
    field: object = field(default=None, repr=False)


def run_one(cfg: RunConfig, n: int) -> Row:
    from .advection import run_advection
    from .burgers import run_burgers

    nu, T = cfg.resolved_nu(), cfg.resolved_final_time()
    try:
        if cfg.is_burgers:
            r = run_burgers(cfg.problem, cfg.scheme, cfg.m_deg, n, nu, T)
        else:
            r = run_advection(cfg.problem, cfg.scheme, cfg.m_deg, n, nu, T)
    except (BlowUpError, NewtonError, ExactSolutionError) as exc:
        nan = float("nan")
        return Row(n, 0, 0.0, (nan, nan, nan), failed=str(exc))
    return Row(n, r.n_steps, r.runtime, r.errors, field=r.field)


def convergence_rows(rows) -> list:
    """Format rows with orders computed between successive successful meshes."""
    ok = [r for r in rows if r.failed is None]
    orders = {}
    if len(ok) >= 2:
        for k in range(3):
            est = estimate_order_from_counts([r.errors[k] for r in ok], [r.mesh for r in ok])
            for r, o in zip(ok, est):
                orders.setdefault(r.mesh, [None] * 3)[k] = o
    out = []
    for r in rows:
        o = orders.get(r.mesh, [None] * 3)
        out.append([str(r.mesh), str(r.n_steps), fmt(r.runtime),
                    fmt(r.errors[0]), fmt(o[0]), fmt(r.errors[1]), fmt(o[1]), fmt(r.errors[2]), fmt(o[2])])
    return out


def _emit(path, header: str, rows) -> str:
    buf = io.StringIO()
    buf.write(header + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerows(rows)
    text = buf.getvalue()
    if path:
        Path(path).write_text(text, encoding="utf-8")
    return text


def cmd_stability(args, cfg: RunConfig) -> int:
    from .stability import max_cfl, stability_scan_2d, write_reports_csv, write_scan_csv

    if cfg.scheme not in ("lidg", "ridg"):
        raise ConfigError("stability analysis is available for lidg and ridg")
    d = args.dim
    if d not in (1, 2, 3):
        raise ConfigError("dim must be 1, 2 or 3")
    if args.scan:
        if d != 2:
            raise ConfigError("--scan requires --dim 2")
        grid = np.linspace(0.0, args.scan_max, args.scan_points)
        values = stability_scan_2d(cfg.scheme, cfg.m_deg, grid, grid, cfg.omega_resolution)
        path = cfg.out or "stability_scan.csv"
        write_scan_csv(path, grid, grid, values)
        diag = [v for v, f in zip(grid, np.diag(values)) if f - 1.0 > cfg.epsilon]
        onset = diag[0] if diag else None
        print(f"scan written to {path}; diagonal instability onset ~ {fmt(onset) or 'none in range'}")
        return EXIT_OK
    direction = [float(v) for v in args.direction.split(",")] if args.direction else None
    rep = max_cfl(cfg.scheme, cfg.m_deg, d, direction, epsilon=cfg.epsilon, resolution=cfg.omega_resolution)
    if cfg.out:
        write_reports_csv(cfg.out, [rep])
    print(f"{rep.scheme} m_deg={rep.m_deg} dim={rep.m_dim} max_cfl={rep.max_cfl:.4f}")
    return EXIT_OK


def cmd_converge(args, cfg: RunConfig) -> int:
    rows = [run_one(cfg, n) for n in cfg.meshes]
    text = _emit(cfg.out, CONVERGENCE_HEADER, convergence_rows(rows))
    print(text, end="")
    failed = [r for r in rows if r.failed]
    for r in failed:
        print(f"mesh {r.mesh}: {r.failed}", file=sys.stderr)
    return EXIT_NUMERICAL if failed else EXIT_OK


def cmd_solve(args, cfg: RunConfig) -> int:
    from .advection import PROBLEMS
    from .burgers import BURGERS_PROBLEMS
    from .basis import spatial_spec
    from .mesh import project

    n = cfg.meshes[-1]
    row = run_one(cfg, n)
    if row.failed:
        print(f"mesh {n}: {row.failed}", file=sys.stderr)
        return EXIT_NUMERICAL
    fld = row.field
    prob = (BURGERS_PROBLEMS if cfg.is_burgers else PROBLEMS)[cfg.problem]
    m0 = total_mass(project(prob.initial, fld.mesh, spatial_spec(cfg.m_deg, cfg.m_dim)))
    m1 = total_mass(fld)
    flat = fld.coeffs.reshape(-1, fld.coeffs.shape[-1])
    idx = np.array(np.unravel_index(np.arange(flat.shape[0]), fld.mesh.shape)).T
    header = ",".join([f"i{a}" for a in range(cfg.m_dim)] + [f"c{k}" for k in range(flat.shape[1])])
    rows = [[str(v) for v in ix] + [fmt(c) for c in cf] for ix, cf in zip(idx, flat)]
    _emit(cfg.out or "solution.csv", header, rows)
    from .basis import gauss_rule
    from .mesh import field_at_nodes
    vals = field_at_nodes(fld, gauss_rule(cfg.m_deg + 2, cfg.m_dim).nodes)
    print(f"mesh={n} steps={row.n_steps} runtime_s={row.runtime:.3f} mass_initial={fmt(m0)} "
          f"mass_final={fmt(m1)} min={fmt(vals.min())} max={fmt(vals.max())} "
          f"l1={fmt(row.errors[0])} l2={fmt(row.errors[1])} linf={fmt(row.errors[2])}")
    return EXIT_OK


COMPARE_HEADER = ("mesh,a_n_steps,b_n_steps,a_runtime_s,b_runtime_s,a_l2,b_l2,"
                  "step_ratio,runtime_ratio,l1_ratio,l2_ratio,linf_ratio")


def cmd_compare(args, cfg: RunConfig) -> int:
    schemes = [s.strip().lower() for s in args.schemes.split(",")]
    if len(schemes) != 2:
        raise ConfigError("--schemes needs exactly two comma-separated names")
    nus = [float(v) for v in args.nus.split(",")] if args.nus else [None, None]
    if len(nus) != 2:
        raise ConfigError("--nus needs two values")
    cfgs = [replace(cfg, scheme=s, nu=v if v is not None else cfg.nu).validate() for s, v in zip(schemes, nus)]
    rows, failed = [], False
    for n in cfg.meshes:
        a, b = run_one(cfgs[0], n), run_one(cfgs[1], n)
        failed |= bool(a.failed or b.failed)

        def ratio(x, y):
            return x / y if y else float("nan")

        rows.append([str(n), str(a.n_steps), str(b.n_steps), fmt(a.runtime), fmt(b.runtime),
                     fmt(a.errors[1]), fmt(b.errors[1]), fmt(ratio(a.n_steps, b.n_steps)),
                     fmt(ratio(a.runtime, b.runtime))] + [fmt(ratio(a.errors[k], b.errors[k])) for k in range(3)])
    print(_emit(cfg.out, COMPARE_HEADER, rows), end="")
    return EXIT_NUMERICAL if failed else EXIT_OK


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value configuration file; flags override it")
    p.add_argument("--problem", choices=PROBLEM_NAMES)
    p.add_argument("--scheme", type=str.lower, choices=SCHEME_NAMES)
    p.add_argument("--mdeg", "--m-deg", dest="m_deg", type=int)
    p.add_argument("--meshes", help="comma separated element counts per axis")
    p.add_argument("--nu", type=float)
    p.add_argument("--final-time", dest="final_time", type=float)
    p.add_argument("--omega-resolution", dest="omega_resolution", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--out")
    p.add_argument("--threads", type=int)
    p.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ridg", description="Regionally-implicit DG solvers and stability analysis")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("stability", help="maximum stable CFL number or a 2D stability scan")
    _common(p)
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--direction", help="comma separated CFL direction (default: diagonal)")
    p.add_argument("--scan", action="store_true", help="write f+1 on a (nu_x, nu_y) grid")
    p.add_argument("--scan-points", dest="scan_points", type=int, default=41)
    p.add_argument("--scan-max", dest="scan_max", type=float, default=0.2)
    p.set_defaults(func=cmd_stability, needs_problem=False)
    p = sub.add_parser("converge", help="convergence table over a list of meshes")
    _common(p)
    p.set_defaults(func=cmd_converge, needs_problem=True)
    p = sub.add_parser("solve", help="single run on the last mesh; writes final coefficients")
    _common(p)
    p.set_defaults(func=cmd_solve, needs_problem=True)
    p = sub.add_parser("compare", help="two schemes side by side")
    _common(p)
    p.add_argument("--schemes", default="ridg,rkdg")
    p.add_argument("--nus", help="CFL targets for the two schemes, comma separated")
    p.set_defaults(func=cmd_compare, needs_problem=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = build_config(args).validate(need_problem=args.needs_problem)
        apply_threads(cfg)
        return args.func(args, cfg)
    except (ConfigError, DomainError, TypeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BracketError, BlowUpError, NewtonError, ExactSolutionError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
