"""Command-line front end: ``entpower <subcommand> ...``.

Exit codes: 0 success, 1 tolerance failure, 2 usage error.

Every CSV is written next to a ``.manifest`` file of ``key=value`` lines
holding the fully resolved config. Passing that file back through
``--config`` reproduces the CSV bitwise; explicit flags override it.
"""
from __future__ import annotations

import argparse
import math
import os
import re
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .entanglement import concurrence, eof
from .errors import EntPowerError
from .gates import (
    CartanVector,
    canonicalize,
    cartan_kernel,
    format_angle,
    local_invariants,
    parse_angle,
    parse_cartan,
)
from .qmat import purity
from .search import InverseScanConfig, ScanConfig, ep_scan, inverse_reach_fraction, weyl_sweep
from .states import gamma_from_purity, mems, mems_rank
from .theorem import IDENTITIES, default_chi_grid, default_gamma_grid, theorem_deviations

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

IDENTITY_LABELS = {
    "rank2": "rank-2 product source -> MEMS (gamma >= 2/3)",
    "rank3": "rank-3 diagonal source -> MEMS (gamma <= 2/3)",
    "coherent": "coherent source -> MEMS (gamma <= 1/sqrt(3))",
}


class UsageError(Exception):
    pass


def fmt(x: float) -> str:
    return "%.17g" % x


# --- config files and manifests ---------------------------------------------------

def read_kv(path: str) -> dict[str, str]:
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def merged(args: argparse.Namespace, keys: dict[str, str], defaults: dict[str, str]) -> dict[str, str]:
    """defaults < config file < explicit flags, all as strings."""
    conf = read_kv(args.config) if getattr(args, "config", None) else {}
    unknown = set(conf) - set(keys.values()) - {"subcommand", "version", "duration_s", "threads"}
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    out = dict(defaults)
    out.update({k: v for k, v in conf.items() if k in defaults})
    for attr, key in keys.items():
        val = getattr(args, attr)
        if val is not None:
            out[key] = str(val)
    return out


def write_outputs(out: str, header: str, rows, manifest: dict[str, str]) -> None:
    """Write CSV and manifest via temp files; nothing is left behind on failure."""
    csv_path = Path(out)
    man_path = Path(out + ".manifest")
    tmp_csv = csv_path.with_name(csv_path.name + ".part")
    tmp_man = man_path.with_name(man_path.name + ".part")
    try:
        with open(tmp_csv, "w", newline="") as fh:
            fh.write(header + "\n")
            for row in rows:
                fh.write(",".join(v if isinstance(v, str) else fmt(v) for v in row) + "\n")
        with open(tmp_man, "w") as fh:
            for k, v in manifest.items():
                fh.write(f"{k}={v}\n")
        os.replace(tmp_csv, csv_path)
        os.replace(tmp_man, man_path)
    except BaseException:
        for p in (tmp_csv, tmp_man):
            p.unlink(missing_ok=True)
        raise


def resolve_threads(flag: int | None) -> int:
    if flag is not None:
        n = flag
    else:
        env = os.environ.get("ENTPOWER_THREADS", "").strip()
        try:
            n = int(env) if env else 1
        except ValueError as exc:
            raise UsageError(f"ENTPOWER_THREADS must be an integer, got {env!r}") from exc
    if n < 1:
        raise UsageError("thread count must be >= 1")
    return n


def _gate_str(v: CartanVector) -> str:
    return ",".join(fmt(a) for a in v)


def _on_off(text: str) -> bool:
    t = text.strip().lower()
    if t in ("on", "true", "1", "yes"):
        return True
    if t in ("off", "false", "0", "no"):
        return False
    raise UsageError(f"expected on|off, got {text!r}")


def _step(text: str, name: str) -> float:
    val = parse_angle(text)
    if not (val > 0 and math.isfinite(val)):
        raise UsageError(f"{name} must be > 0")
    return val


# --- subcommands --------------------------------------------------------------------

def cmd_theorem_check(args) -> int:
    gamma_step = _step(args.gamma_step, "--gamma-step")
    chi_step = _step(args.chi_step, "--chi-step")
    t0 = time.perf_counter()
    rep = theorem_deviations(default_chi_grid(chi_step), default_gamma_grid(gamma_step))
    dt = time.perf_counter() - t0
    ok = True
    for name in IDENTITIES:
        dev = rep.deviations[name]
        status = "ok" if dev < args.tol else "FAIL"
        ok &= dev < args.tol
        print(f"{IDENTITY_LABELS[name]:48s} points={rep.n_points[name]:5d} max_dev={dev:.3e} {status}")
    print(f"max deviation {rep.max_deviation:.3e} (tol {args.tol:g}) in {dt:.2f}s")
    return EXIT_OK if ok else EXIT_FAIL


EP_KEYS = {
    "gate": "gate",
    "source": "source_family",
    "mu_start": "mu_start",
    "mu_stop": "mu_stop",
    "mu_step": "mu_step",
    "samples": "samples_per_bin",
    "basis_step": "basis_step",
    "seed": "seed",
    "oracle_seeding": "oracle_seeding",
    "sampling": "sampling",
}


def ep_config(args) -> ScanConfig:
    d = ScanConfig()
    defaults = {
        "gate": _gate_str(d.gate),
        "source_family": d.source_family,
        "mu_start": fmt(d.mu_start),
        "mu_stop": fmt(d.mu_stop),
        "mu_step": fmt(d.mu_step),
        "samples_per_bin": str(d.samples_per_bin),
        "basis_step": fmt(d.basis_step),
        "seed": str(d.seed),
        # acceptance runs include the analytic sources; pass off for pure sampling
        "oracle_seeding": "on",
        "sampling": d.sampling,
    }
    m = merged(args, EP_KEYS, defaults)
    basis = m["basis_step"].lower()
    try:
        return ScanConfig(
            gate=parse_cartan(m["gate"]),
            source_family=m["source_family"],
            mu_start=float(m["mu_start"]),
            mu_stop=float(m["mu_stop"]),
            mu_step=float(m["mu_step"]),
            samples_per_bin=int(m["samples_per_bin"]),
            basis_step=None if basis in ("none", "uniform") else parse_angle(basis),
            seed=int(m["seed"]),
            oracle_seeding=_on_off(m["oracle_seeding"]),
            sampling=m["sampling"],
        ).validate()
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc


def ep_manifest(cfg: ScanConfig) -> dict[str, str]:
    return {
        "gate": _gate_str(cfg.gate),
        "source_family": cfg.source_family,
        "mu_start": fmt(cfg.mu_start),
        "mu_stop": fmt(cfg.mu_stop),
        "mu_step": fmt(cfg.mu_step),
        "samples_per_bin": str(cfg.samples_per_bin),
        "basis_step": "none" if cfg.basis_step is None else fmt(cfg.basis_step),
        "seed": str(cfg.seed),
        "oracle_seeding": "on" if cfg.oracle_seeding else "off",
        "sampling": cfg.sampling,
    }


def cmd_ep_scan(args) -> int:
    cfg = ep_config(args)
    threads = resolve_threads(args.threads)
    t0 = time.perf_counter()
    curve = ep_scan(cfg, threads=threads)
    dt = time.perf_counter() - t0
    manifest = {"subcommand": "ep-scan", **ep_manifest(cfg), "version": __version__,
                "duration_s": f"{dt:.3f}"}
    write_outputs(args.out, "mu,ep,n_samples", ((m, e, str(n)) for m, e, n in curve.rows()), manifest)
    print(f"wrote {len(curve.mu)} bins to {args.out} in {dt:.2f}s; max ep {curve.ep.max():.6f}")
    return EXIT_OK


INV_KEYS = {
    "alpha_z": "alpha_z",
    "grid_step": "alpha_grid_step",
    "rot_axes": "rot_axes",
    "rot_step": "rot_step",
    "gamma_step": "gamma_step",
    "tol_sep": "tol_sep",
    "mems_phi": "mems_phi",
    "gamma_grid": "gamma_grid",
    "only_cell": "only_cell",
}


def inverse_config(args) -> tuple[InverseScanConfig, tuple[float, float] | None]:
    d = InverseScanConfig()
    defaults = {
        "alpha_z": fmt(d.alpha_z),
        "alpha_grid_step": fmt(d.alpha_grid_step),
        "rot_axes": ",".join(d.rot_axes),
        "rot_step": fmt(d.rot_step),
        "gamma_step": fmt(d.gamma_step),
        "tol_sep": fmt(d.tol_sep),
        "mems_phi": fmt(d.mems_phi),
        "gamma_grid": d.gamma_grid,
        "only_cell": "",
    }
    m = merged(args, INV_KEYS, defaults)
    try:
        axes = tuple(a.strip().lower() for a in m["rot_axes"].split(","))
        cfg = InverseScanConfig(
            alpha_z=parse_angle(m["alpha_z"]),
            alpha_grid_step=parse_angle(m["alpha_grid_step"]),
            rot_axes=axes,  # type: ignore[arg-type]
            rot_step=parse_angle(m["rot_step"]),
            gamma_step=float(m["gamma_step"]),
            tol_sep=float(m["tol_sep"]),
            mems_phi=parse_angle(m["mems_phi"]),
            gamma_grid=m["gamma_grid"],
        ).validate()
        cell = None
        if m["only_cell"]:
            parts = m["only_cell"].split(",")
            if len(parts) != 2:
                raise UsageError("--only-cell takes ax,ay")
            cell = (parse_angle(parts[0]), parse_angle(parts[1]))
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc
    return cfg, cell


def cmd_inverse_scan(args) -> int:
    cfg, cell = inverse_config(args)
    threads = resolve_threads(args.threads)
    t0 = time.perf_counter()
    if cell is not None:
        fr = inverse_reach_fraction(CartanVector(cell[0], cell[1], cfg.alpha_z), cfg)
        rows = [(cell[0], cell[1], *fr)]
    else:
        rows = list(weyl_sweep(cfg.alpha_z, cfg, threads=threads).rows())
    dt = time.perf_counter() - t0
    manifest = {
        "subcommand": "inverse-scan",
        "alpha_z": fmt(cfg.alpha_z),
        "alpha_grid_step": fmt(cfg.alpha_grid_step),
        "rot_axes": ",".join(cfg.rot_axes),
        "rot_step": fmt(cfg.rot_step),
        "gamma_step": fmt(cfg.gamma_step),
        "tol_sep": fmt(cfg.tol_sep),
        "mems_phi": fmt(cfg.mems_phi),
        "gamma_grid": cfg.gamma_grid,
        "only_cell": "" if cell is None else f"{fmt(cell[0])},{fmt(cell[1])}",
        "seed": "none",
        "version": __version__,
        "duration_s": f"{dt:.3f}",
    }
    write_outputs(args.out, "alpha_x,alpha_y,fraction_all,fraction_rank2,fraction_rank3", rows, manifest)
    n_global = sum(1 for r in rows if r[2] == 1.0)
    print(f"wrote {len(rows)} cells to {args.out} in {dt:.2f}s; fraction_all=1 at {n_global} cell(s)")
    return EXIT_OK


def cmd_gate_info(args) -> int:
    try:
        v = parse_cartan(args.alpha)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc
    c = canonicalize(v)
    u = cartan_kernel(v)
    g1, g2 = local_invariants(u)
    print("input     (" + ", ".join(format_angle(a) for a in v) + ")")
    print("canonical (" + ", ".join(format_angle(a) for a in c) + ")")
    print(f"G1 = {g1.real:.12g}{g1.imag:+.12g}i")
    print(f"G2 = {g2:.12g}")
    print("kernel:")
    with np.printoptions(precision=6, suppress=True, linewidth=120):
        print(u)
    return EXIT_OK


def cmd_mems_info(args) -> int:
    if (args.gamma is None) == (args.mu is None):
        raise UsageError("give exactly one of --gamma or --mu")
    if args.mu is not None:
        if args.rank is None:
            raise UsageError("--mu needs --rank 2|3")
        gamma = gamma_from_purity(args.mu, args.rank)
    else:
        if args.rank is not None:
            raise UsageError("--rank only applies with --mu")
        gamma = args.gamma
    rho = mems(gamma, args.phi)
    print(f"gamma       = {gamma:.12g}")
    print(f"purity      = {purity(rho):.12g}")
    print(f"rank        = {mems_rank(gamma)}")
    print(f"concurrence = {concurrence(rho):.12g}")
    print(f"eof         = {eof(rho):.12g}")
    with np.printoptions(precision=6, suppress=True, linewidth=120):
        print(rho)
    return EXIT_OK


# --- parser --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="entpower", description="Entangling power of two-qubit gates.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="cmd", required=True)

    t = sub.add_parser("theorem-check", help="verify the source-to-MEMS identities on a grid")
    t.add_argument("--gamma-step", default="0.01")
    t.add_argument("--chi-step", default="pi/40")
    t.add_argument("--tol", type=float, default=1e-12)
    t.set_defaults(func=cmd_theorem_check)

    # None defaults let a --config file fill in unset flags
    e = sub.add_parser("ep-scan", help="entangling power vs purity")
    e.add_argument("--gate")
    e.add_argument("--source", choices=("cc", "product"))
    e.add_argument("--mu-start")
    e.add_argument("--mu-stop")
    e.add_argument("--mu-step")
    e.add_argument("--samples", type=int)
    e.add_argument("--basis-step", help="angle, or 'none' for uniform bases")
    e.add_argument("--seed", type=int)
    e.add_argument("--oracle-seeding", choices=("on", "off"))
    e.add_argument("--sampling", choices=("exact", "binned"))
    e.add_argument("--out", required=True)
    e.add_argument("--threads", type=int)
    e.add_argument("--config")
    e.set_defaults(func=cmd_ep_scan)

    i = sub.add_parser("inverse-scan", help="MEMS reachability over the (alpha_x, alpha_y) grid")
    i.add_argument("--alpha-z")
    i.add_argument("--grid-step")
    i.add_argument("--rot-axes")
    i.add_argument("--rot-step")
    i.add_argument("--gamma-step")
    i.add_argument("--tol-sep")
    i.add_argument("--mems-phi")
    i.add_argument("--gamma-grid", choices=("midpoint", "endpoint"))
    i.add_argument("--only-cell", metavar="AX,AY")
    i.add_argument("--out", required=True)
    i.add_argument("--threads", type=int)
    i.add_argument("--config")
    i.set_defaults(func=cmd_inverse_scan)

    g = sub.add_parser("gate-info", help="canonical form and local invariants of a kernel")
    g.add_argument("--alpha", required=True)
    g.set_defaults(func=cmd_gate_info)

    m = sub.add_parser("mems-info", help="properties of a MEMS")
    m.add_argument("--gamma", type=float)
    m.add_argument("--mu", type=float)
    m.add_argument("--rank", type=int, choices=(2, 3))
    m.add_argument("--phi", type=parse_angle, default=0.0)
    m.set_defaults(func=cmd_mems_info)
    return p


_NEG_VALUE = re.compile(r"^-[0-9.p]")


def _glue_negative_values(argv: list[str]) -> list[str]:
    """Turn ``--flag -0.25pi,0,0`` into ``--flag=-0.25pi,0,0``; argparse would read it as an option."""
    out: list[str] = []
    for tok in argv:
        prev = out[-1] if out else ""
        if _NEG_VALUE.match(tok) and prev.startswith("--") and "=" not in prev and prev != "--version":
            out[-1] = f"{prev}={tok}"
        else:
            out.append(tok)
    return out


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = _glue_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed the message
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, EntPowerError, ValueError) as exc:
        print(f"entpower {args.cmd}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
