"""Command-line driver: ingestion -> bases -> bounds -> verification tables.

Verbs: systole | bound | verify-kernel-bound | verify-volume-ratio | sweep |
fetch.  Every command is deterministic under a fixed configuration in
fixture mode; the effective configuration is echoed into each output, floats
are emitted with shortest round-trip formatting, and CSV/JSON schemas carry
a schema_version field.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .bounds import assemble_bound_chain, bx_closed_form
from .errors import HyperbergmanError, UsageError
from .fuchsian import HPoint, builtin_group, enumerate_ball, systole
from .lmfdb_ingest import fetch_level
from .modforms import bergman_on_cells, build_basis
from .product import (
    ProductPoint,
    canonical_volume_ratio_det,
    canonical_volume_ratio_perm,
    sample_points,
    volume_ratio_bound,
)

SCHEMA_VERSION = 1


@dataclass
class RunConfig:
    levels: list[int] = field(default_factory=lambda: [23, 29, 31, 37])
    d_values: list[int] = field(default_factory=lambda: [2, 3])
    grid: int = 200
    trials: int = 200
    seed: int = 1729
    quadrature_tol: float = 1e-9
    min_coefficients: int = 500
    cache: Optional[str] = None
    out: str = "."
    jobs: int = 1
    fixtures_only: bool = True

    def validate(self) -> None:
        from .numutil import is_prime

        for tol in (self.quadrature_tol,):
            if not tol > 0:
                raise UsageError("tolerances must be positive")
        for lvl in self.levels:
            if not is_prime(lvl):
                raise UsageError(f"level {lvl} is not prime")
        for d in self.d_values:
            if d < 1:
                raise UsageError(f"d = {d} must be >= 1")
        if self.grid < 1 or self.trials < 1 or self.jobs < 1:
            raise UsageError("grid, trials and jobs must be positive")

    @staticmethod
    def from_file(path: Optional[str]) -> "RunConfig":
        cfg = RunConfig()
        if path:
            with open(path) as fh:
                doc = json.load(fh)
            known = {f for f in cfg.__dataclass_fields__}
            unknown = set(doc) - known
            if unknown:
                raise UsageError(f"unknown config keys: {sorted(unknown)}")
            cfg = replace(cfg, **doc)
        return cfg

    def echo(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def _apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    updates = {}
    mapping = {
        "level": ("levels", lambda v: [v]),
        "levels": ("levels", lambda v: [int(x) for x in v.split(",") if x]),
        "d": ("d_values", lambda v: [v]),
        "grid": ("grid", int),
        "trials": ("trials", int),
        "seed": ("seed", int),
        "cache": ("cache", str),
        "out": ("out", str),
        "jobs": ("jobs", int),
        "coefficients": ("min_coefficients", int),
    }
    for arg_name, (field_name, conv) in mapping.items():
        val = getattr(args, arg_name.replace("-", "_"), None)
        if val is not None:
            updates[field_name] = conv(val)
    if getattr(args, "fixtures_only", False):
        updates["fixtures_only"] = True
    if getattr(args, "allow_network", False):
        updates["fixtures_only"] = False
    cfg = replace(cfg, **updates)
    cfg.validate()
    return cfg


def _write_csv(path: Path, cfg: RunConfig, header: list[str], rows: list[list]) -> None:
    lines = [
        f"# schema_version={SCHEMA_VERSION}",
        f"# config={cfg.echo()}",
        ",".join(header),
    ]
    for row in rows:
        lines.append(
            ",".join(
                repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)
                for v in row
            )
        )
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


def _level_pipeline(level: int, cfg: RunConfig):
    records = fetch_level(
        level,
        min_coefficients=cfg.min_coefficients,
        cache=cfg.cache,
        allow_network=not cfg.fixtures_only,
    )
    forms = [r.to_qexpansion() for r in sorted(records, key=lambda r: r.label)]
    basis, cells = build_basis(forms, tol=cfg.quadrature_tol)
    geom = systole(builtin_group(f"gamma0-{level}"))
    return basis, cells, geom


# ---------------------------------------------------------------------------
# commands


def cmd_systole(args: argparse.Namespace, cfg: RunConfig) -> int:
    group = builtin_group(args.group)
    radius = args.radius
    if radius is None and group.kind != "congruence":
        radius = {"bolza": 6.2, "cyclic-test": 3.0}.get(group.name)
    geom = systole(group, search_radius=radius)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "config": json.loads(cfg.echo()),
        "group": args.group,
        "systole": geom.systole,
        "injectivity_radius": geom.injectivity_radius,
        "certified": geom.certified,
        "genus": geom.genus,
        "hyp_volume": geom.hyp_volume,
        "meta": {k: v for k, v in geom.meta.items() if k != "base"},
    }
    text = json.dumps(doc, sort_keys=True)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n")
    return 0


def cmd_bound(args: argparse.Namespace, cfg: RunConfig) -> int:
    if (args.r is None) == (args.group is None):
        raise UsageError("provide exactly one of --r or --group")
    if args.r is not None:
        value = bx_closed_form(args.r)
        doc = {
            "schema_version": SCHEMA_VERSION,
            "config": json.loads(cfg.echo()),
            "closed_form_bound": value,
            "injectivity_radius": args.r,
        }
        text = json.dumps(doc, sort_keys=True)
    else:
        group = builtin_group(args.group)
        radius = {"bolza": 6.2, "cyclic-test": 4.0}.get(group.name)
        geom = systole(group, search_radius=radius)
        base = HPoint(0.0, 1.0)
        ball_radius = args.delta_frac * geom.systole + 1.0
        ball = enumerate_ball(group, base, base, ball_radius)
        report = assemble_bound_chain(ball, geom, delta_fraction=args.delta_frac)
        doc = json.loads(report.to_json())
        doc["config"] = json.loads(cfg.echo())
        doc["group"] = args.group
        text = json.dumps(doc, sort_keys=True)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n")
    return 0


def cmd_verify_kernel_bound(args: argparse.Namespace, cfg: RunConfig) -> int:
    level = cfg.levels[0]
    basis, cells, geom = _level_pipeline(level, cfg)
    bound = bx_closed_form(geom.systole)
    values = bergman_on_cells(basis, cells)
    idx = np.unique(np.linspace(0, len(values) - 1, cfg.grid).astype(int))
    rows = []
    for i in idx:
        b = float(values[i])
        z = cells.nodes[i]
        rows.append([int(i), float(z.real), float(z.imag), b, bound, bound - b])
    out = Path(cfg.out) / f"kernel-bound-level{level}.csv"
    _write_csv(out, cfg, ["node", "x", "y", "bergman", "bound", "margin"], rows)
    worst = min(r[5] for r in rows)
    print(f"level {level}: {len(rows)} points, bound {bound!r}, worst margin {worst!r}")
    print(f"wrote {out}")
    return 0


def cmd_verify_volume_ratio(args: argparse.Namespace, cfg: RunConfig) -> int:
    level = cfg.levels[0]
    d = cfg.d_values[0]
    basis, cells, geom = _level_pipeline(level, cfg)
    bound_kernel = bx_closed_form(geom.systole)
    bound = volume_ratio_bound(d, geom, bound_kernel)
    rng = np.random.default_rng([cfg.seed, level, d])
    pts = sample_points(cells, rng, cfg.trials, d)
    ratio_fn = canonical_volume_ratio_perm if args.path == "perm" else canonical_volume_ratio_det

    def one(item):
        i, p = item
        ratio = ratio_fn(basis, geom, p)
        coords = ";".join(f"{z.x!r}+{z.y!r}i" for z in p.points)
        return [i, "sample", coords, ratio, bound, bound - ratio]

    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(one, enumerate(pts)))
    else:
        rows = [one(item) for item in enumerate(pts)]
    # degenerate probe: repeating a coordinate must annihilate the ratio
    probe_base = pts[0].points[0]
    probe = ProductPoint((probe_base,) * d)
    ratio = ratio_fn(basis, geom, probe)
    coords = ";".join(f"{z.x!r}+{z.y!r}i" for z in probe.points)
    rows.append([len(pts), "dup-probe", coords, ratio, bound, bound - ratio])
    out = Path(cfg.out) / f"volume-ratio-level{level}-d{d}.csv"
    _write_csv(out, cfg, ["trial", "kind", "point", "ratio", "bound", "margin"], rows)
    worst = min(r[5] for r in rows[:-1])
    print(
        f"level {level}, d={d}: {len(pts)} trials, bound {bound!r}, "
        f"worst margin {worst!r}, dup-probe ratio {ratio!r}"
    )
    print(f"wrote {out}")
    return 0


def cmd_sweep(args: argparse.Namespace, cfg: RunConfig) -> int:
    if not cfg.levels:
        raise UsageError("no levels given")
    rows = []
    systoles = []
    for level in cfg.levels:
        geom = systole(builtin_group(f"gamma0-{level}"))
        systoles.append(geom.systole)
        rows.append(
            [
                level,
                geom.genus,
                geom.systole,
                geom.certified,
                bx_closed_form(geom.systole),
            ]
        )
    family_bound = bx_closed_form(min(systoles))
    out = Path(cfg.out) / "admissible-sweep.csv"
    _write_csv(
        out,
        cfg,
        ["level", "genus", "systole", "certified", "kernel_bound"],
        rows + [["family", "", min(systoles), all(r[3] for r in rows), family_bound]],
    )
    for r in rows:
        print(f"level {r[0]}: genus {r[1]}, systole {r[2]!r}, bound {r[4]!r}")
    print(f"family bound {family_bound!r}")
    print(f"wrote {out}")
    return 0


def cmd_fetch(args: argparse.Namespace, cfg: RunConfig) -> int:
    for level in cfg.levels:
        records = fetch_level(
            level,
            min_coefficients=cfg.min_coefficients,
            cache=cfg.cache,
            allow_network=not cfg.fixtures_only,
        )
        print(
            f"level {level}: {len(records)} embeddings "
            f"({records[0].truncation} coefficients each, source {records[0].source})"
        )
    return 0


# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hyperbergman",
        description="Bergman kernel bounds and canonical-metric comparisons "
        "on hyperbolic surfaces, at desk scale.",
    )
    parser.add_argument("--config", help="JSON config file; flags override it")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("systole", help="shortest closed geodesic of a built-in group")
    p.add_argument("group", help="cyclic-test | bolza | gamma0-N")
    p.add_argument("--radius", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_systole)

    p = sub.add_parser("bound", help="closed-form kernel bound / full bound chain")
    p.add_argument("--r", type=float, default=None, help="injectivity radius")
    p.add_argument("--group", default=None)
    p.add_argument("--delta-frac", type=float, default=0.75, dest="delta_frac")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_bound)

    p = sub.add_parser(
        "verify-kernel-bound",
        help="kernel values vs closed-form bound on a grid over one level",
    )
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--cache", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--fixtures-only", action="store_true", dest="fixtures_only")
    p.set_defaults(fn=cmd_verify_kernel_bound)

    p = sub.add_parser(
        "verify-volume-ratio",
        help="canonical/hyperbolic volume ratio vs its closed-form bound",
    )
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--path", choices=["det", "perm"], default="det")
    p.add_argument("--cache", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--fixtures-only", action="store_true", dest="fixtures_only")
    p.set_defaults(fn=cmd_verify_volume_ratio)

    p = sub.add_parser("sweep", help="systoles and kernel bounds across levels")
    p.add_argument("--levels", required=True, help="comma-separated primes")
    p.add_argument("--cache", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--fixtures-only", action="store_true", dest="fixtures_only")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("fetch", help="populate the coefficient cache")
    p.add_argument("--levels", required=True)
    p.add_argument("--coefficients", type=int, default=None)
    p.add_argument("--cache", default=None)
    p.add_argument("--allow-network", action="store_true", dest="allow_network")
    p.set_defaults(fn=cmd_fetch)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.from_file(args.config)
        cfg = _apply_overrides(cfg, args)
        return args.fn(args, cfg)
    except HyperbergmanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
