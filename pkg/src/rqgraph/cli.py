"""Command-line front end.

Exit codes:
  0  success
  2  configuration error (bad flags, unreadable graph file, bad mask)
  3  scatter: at least one grid point was singular (rows are still written)
  4  problem too large (exact enumeration or classification limit)
  5  more than 1% of the subgraphs at some edge count were singular
"""
from __future__ import annotations

import argparse
import math
import os
import re
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__, records
from .families import from_shorthand, is_shorthand, open_kne
from .graph import GraphError, OpenQuantumGraph, SubgraphMask, graph_to_dict, load_graph
from .rqg import (DEFAULT_CAP, DEFAULT_ENUM_CAP, DEFAULT_SEED, EnumerationTooLarge,
                  TooManySingular, approx_transmission, exact_profiles, mc_profiles,
                  p_grid_for_step)
from .scattering import scatter_curve
from .symmetry import ClassificationTooLarge, classify_all

EXIT_OK, EXIT_CONFIG, EXIT_FLAGGED, EXIT_TOO_LARGE, EXIT_SINGULAR = 0, 2, 3, 4, 5

SEED_ENV = "RQGRAPH_SEED"


class ConfigError(ValueError):
    pass


_PI_EXPR = re.compile(r"^\s*([+-]?[0-9.]*(?:e[+-]?\d+)?)\s*\*?\s*pi\s*(?:/\s*([0-9.]+))?\s*$")


def parse_number(text: str) -> float:
    """A float, or a multiple of pi such as ``pi``, ``2pi``, ``pi/8``, ``3*pi/4``."""
    try:
        return float(text)
    except ValueError:
        pass
    m = _PI_EXPR.match(text.lower())
    if not m:
        raise ConfigError(f"cannot parse number {text!r}")
    factor = m.group(1)
    value = (float(factor) if factor not in ("", "+", "-") else float(factor + "1")) * math.pi
    if m.group(2):
        value /= float(m.group(2))
    return value


def parse_grid(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid {text!r} must look like min:max:points")
    lo, hi = parse_number(parts[0]), parse_number(parts[1])
    try:
        points = int(parts[2])
    except ValueError:
        raise ConfigError(f"grid point count {parts[2]!r} is not an integer") from None
    if points < 1:
        raise ConfigError("grids need at least one point")
    if lo > hi:
        raise ConfigError(f"grid minimum {lo} exceeds maximum {hi}")
    return lo, hi, points


def grid_values(spec: tuple[float, float, int]) -> np.ndarray:
    lo, hi, points = spec
    return np.linspace(lo, hi, points)


@dataclass
class RunConfig:
    command: str
    graph: str
    kl: tuple[float, float, int] | None
    p: tuple[float, float, int] | None
    cap: int
    seed: int
    output: str
    format: str
    threads: int = 1
    mask: str | None = None


def load_host(spec: str) -> OpenQuantumGraph:
    if is_shorthand(spec):
        return from_shorthand(spec)
    try:
        return load_graph(spec)
    except OSError as exc:
        raise ConfigError(f"cannot read graph file {spec!r}: {exc}") from exc


def _metadata(args, host: OpenQuantumGraph, mode: str | None = None) -> dict:
    meta = {
        "tool": "rqgraph",
        "version": __version__,
        "command": args.command,
        "graph": args.graph,
        "format": args.format,
    }
    if not is_shorthand(args.graph):
        meta["graph_document"] = graph_to_dict(host)
    for key in ("kl", "p", "mask", "cap", "seed", "enum_cap", "n", "kl_values", "p_step"):
        value = getattr(args, key, None)
        if value is not None:
            meta[key] = value
    if mode:
        meta["mode"] = mode
    return meta


def _sidecar(args) -> str | None:
    if args.profile_output:
        return args.profile_output
    if args.output in (None, "-"):
        return None
    root, ext = os.path.splitext(args.output)
    return f"{root}.profile{ext or '.csv'}"


# -- commands -----------------------------------------------------------------

def cmd_scatter(args) -> int:
    host = load_host(args.graph)
    mask = None
    if args.mask is not None:
        try:
            mask = SubgraphMask.from_hex(args.mask, host.edge_count)
        except (ValueError, GraphError) as exc:
            raise ConfigError(f"invalid mask {args.mask!r}: {exc}") from exc
    kl = grid_values(parse_grid(args.kl))
    results = scatter_curve(host, kl, mask=mask, threads=args.threads)
    rows = [(r.k, r.T, r.R, r.flux_defect, r.flagged, r.sigma.real, r.sigma.imag,
             r.rho.real, r.rho.imag) for r in results]
    records.write(args.output, args.format, _metadata(args, host), "scatter",
                  ["kl", "T", "R", "flux_defect", "flagged", "sigma_re", "sigma_im",
                   "rho_re", "rho_im"], rows)
    return EXIT_FLAGGED if any(r.flagged for r in results) else EXIT_OK


def _write_rqg(args, host, profiles, p, mode, cap=None, seed=None) -> None:
    surface = []
    for pr in profiles:
        est = approx_transmission(pr, p)
        surface += [(pr.k, float(pv), float(tv)) for pv, tv in zip(est.p_grid, est.values)]
    meta = _metadata(args, host, mode)
    records.write(args.output, args.format, meta, "surface", ["kl", "p", "T"], surface)
    side = _sidecar(args)
    if side:
        rows = [(pr.k, l, int(pr.sample_count[l]), float(pr.mean_T[l]), int(pr.flagged_count[l]))
                for pr in profiles for l in range(pr.L + 1)]
        records.write(side, args.format, meta, "profile",
                      ["kl", "l", "sample_count", "mean_T", "flagged"], rows)


def cmd_rqg_exact(args) -> int:
    host = load_host(args.graph)
    kl = grid_values(parse_grid(args.kl))
    p = grid_values(parse_grid(args.p))
    profiles = exact_profiles(host, kl, threads=args.threads, enum_cap=args.enum_cap)
    _write_rqg(args, host, profiles, p, "exact")
    return EXIT_OK


def cmd_rqg_mc(args) -> int:
    host = load_host(args.graph)
    kl = grid_values(parse_grid(args.kl))
    p = grid_values(parse_grid(args.p))
    profiles = mc_profiles(host, kl, args.cap, args.seed, threads=args.threads)
    _write_rqg(args, host, profiles, p, "monte_carlo")
    return EXIT_OK


def cmd_classify(args) -> int:
    host = load_host(args.graph)
    classes = classify_all(host)
    classes.sort(key=lambda c: (-c.edge_count, c.representative.bits))
    rows = [(c.edge_count, c.orbit_size, c.representative.hex()) for c in classes]
    records.write(args.output, args.format, _metadata(args, host), "class",
                  ["edge_count", "orbit_size", "representative_mask"], rows)
    totals: dict[int, list[int]] = {}
    for c in classes:
        totals.setdefault(c.edge_count, [0, 0])
        totals[c.edge_count][0] += c.orbit_size
        totals[c.edge_count][1] += 1
    for l in sorted(totals, reverse=True):
        masks, count = totals[l]
        print(f"l={l}: {masks} subgraphs in {count} classes", file=sys.stderr)
    print(f"total: {len(classes)} classes", file=sys.stderr)
    return EXIT_OK


def cmd_table2(args) -> int:
    try:
        ns = [int(v) for v in args.n.split(",")]
    except ValueError:
        raise ConfigError(f"--n must be a comma-separated list of integers, got {args.n!r}") from None
    kls = [parse_number(v) for v in args.kl_values.split(",")]
    if not 0.0 < args.p_step <= 0.001:
        raise ConfigError("--p-step must lie in (0, 0.001]")
    p = p_grid_for_step(args.p_step)
    rows = []
    for kl in kls:
        for n in ns:
            host = open_kne(n)
            est = approx_transmission(mc_profiles(host, [kl], args.cap, args.seed)[0], p)
            j = int(np.argmax(est.values))
            rows.append((n, kl, float(p[j]), float(est.values[j]), float(est.values[-1])))
    args.graph = "kne:" + ",".join(str(n) for n in ns)
    records.write(args.output, args.format, _metadata(args, open_kne(ns[0])), "table2",
                  ["n", "kl", "p_m", "T_m", "T_p1"], rows)
    return EXIT_OK


COMMANDS = {
    "scatter": cmd_scatter,
    "rqg-exact": cmd_rqg_exact,
    "rqg-mc": cmd_rqg_mc,
    "classify": cmd_classify,
    "table2": cmd_table2,
}


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV}={raw!r} is not an integer") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rqgraph",
        description="Transmission through open quantum graphs and randomized quantum graphs.",
        epilog=__doc__.split("\n", 2)[2],
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"rqgraph {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, graph=True):
        if graph:
            p.add_argument("--graph", required=True,
                           help="family shorthand (kne:<n>) or JSON graph file")
        p.add_argument("--output", default="-", help="output file (default: stdout)")
        p.add_argument("--format", choices=records.FORMATS, default="csv")
        p.add_argument("--threads", type=int, default=1, help="worker threads")

    p = sub.add_parser("scatter", help="T, R per wavenumber for a graph or one subgraph")
    common(p)
    p.add_argument("--mask", help="hex edge mask selecting a spanning subgraph")
    p.add_argument("--kl", required=True, help="kl grid min:max:points (l = 1)")

    for name, helptext in (("rqg-exact", "exact RQG transmission surface"),
                           ("rqg-mc", "Monte Carlo RQG transmission surface")):
        p = sub.add_parser(name, help=helptext)
        common(p)
        p.add_argument("--kl", required=True, help="kl grid min:max:points")
        p.add_argument("--p", required=True, help="p grid min:max:points")
        p.add_argument("--profile-output", help="per-edge-count profile file "
                       "(default: <output>.profile.<ext>)")
        if name == "rqg-exact":
            p.add_argument("--enum-cap", type=int, default=DEFAULT_ENUM_CAP,
                           help="largest edge count enumerated exhaustively")
        else:
            p.add_argument("--cap", type=int, default=DEFAULT_CAP)
            p.add_argument("--seed", type=int, default=None,
                           help=f"ensemble seed (default: ${SEED_ENV} or {DEFAULT_SEED})")

    p = sub.add_parser("classify", help="isomorphism classes of spanning subgraphs")
    common(p)

    p = sub.add_parser("table2", help="maximizing p and transmission for K_n^e hosts")
    common(p, graph=False)
    p.add_argument("--n", default="6,7,8", help="comma-separated vertex counts")
    p.add_argument("--kl-values", default="pi/8,pi", help="comma-separated kl values")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--p-step", type=float, default=0.001)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "seed", "absent") is None:
            args.seed = _default_seed()
        if getattr(args, "cap", 1) < 1:
            raise ConfigError("--cap must be >= 1")
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        for key in ("kl", "p"):
            if getattr(args, key, None) is not None:
                lo, hi, _ = parse_grid(getattr(args, key))
                if key == "p" and not 0.0 <= lo <= hi <= 1.0:
                    raise ConfigError("--p grid must lie in [0, 1]")
        return COMMANDS[args.command](args)
    except (ConfigError, GraphError) as exc:
        print(f"rqgraph: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EnumerationTooLarge, ClassificationTooLarge) as exc:
        hint = " (try rqg-mc)" if isinstance(exc, EnumerationTooLarge) else ""
        print(f"rqgraph: {exc}{hint}", file=sys.stderr)
        return EXIT_TOO_LARGE
    except TooManySingular as exc:
        print(f"rqgraph: {exc}", file=sys.stderr)
        return EXIT_SINGULAR


if __name__ == "__main__":
    sys.exit(main())
