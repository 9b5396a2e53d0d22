"""Command-line front end.

    crystal-riemann classify [--format json|csv] [--out PATH]
    crystal-riemann section  --surface n,p,q --x re,im --radius R [--format csv|json|svg]
    crystal-riemann modelset --surface n,p,q --x re,im --radius R [--edges]
    crystal-riemann compare  --surface n,p,q --x re,im --radius R
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import sections
from .classify import (
    ClassificationMismatch,
    classify_all,
    compare_with_golden,
    density_json,
)
from .lattice import determinant_volume, gram_closed_form, natural_closed_form

TABLE_TRIPLES = ((5, 1, 2), (6, 1, 2), (8, 1, 3), (10, 1, 3), (12, 1, 5), (12, 2, 3), (12, 3, 4))
MAX_RADIUS = 200.0
CSV_HEADER = ["re", "im", "multiplicity", "provenance", "flags"]


def fmt(v: float) -> str:
    """12 significant digits, lowercase exponent; negative zero printed as 0."""
    v = float(v)
    if v == 0:
        return "0"
    return format(v, ".12g")


def _num(v: float) -> float:
    return float(fmt(v))


@dataclass
class RunConfig:
    command: str
    surface: tuple[int, int, int] | None = None
    x: complex = 0j
    radius: float = 10.0
    out: str | None = None
    format: str = "csv"
    seed: int | None = None
    tol: float | None = None
    edges: bool = False
    extra: dict = field(default_factory=dict)


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# serialization


def provenance_str(prov) -> str:
    parts = []
    for tag, lam in prov:
        name = f"h{tag}" if isinstance(tag, int) else str(tag)
        parts.append(f"{name}({' '.join(str(c) for c in lam)})")
    return "|".join(parts)


def points_to_csv(ps: sections.SectionPointSet) -> str:
    buf = io.StringIO()
    for w in ps.warnings:
        buf.write(f"# warning: {w}\n")
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(CSV_HEADER)
    for y, m, prov, flag in zip(ps.y, ps.multiplicity, ps.provenance, ps.flags):
        wr.writerow([fmt(y.real), fmt(y.imag), int(m), provenance_str(prov), flag])
    return buf.getvalue()


def read_points_csv(text: str) -> list[dict]:
    """Parse the CSV written by :func:`points_to_csv` (comment lines skipped)."""
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    rows = []
    for r in csv.DictReader(lines):
        rows.append({
            "y": complex(float(r["re"]), float(r["im"])),
            "multiplicity": int(r["multiplicity"]),
            "provenance": r["provenance"],
            "flags": r["flags"],
        })
    return rows


def points_to_json(ps: sections.SectionPointSet, surface) -> str:
    doc = {
        "surface": list(surface),
        "kind": ps.kind,
        "x": [_num(ps.center.real), _num(ps.center.imag)],
        "radius": _num(ps.radius),
        "warnings": ps.warnings,
        "count": len(ps),
        "total_multiplicity": ps.total_multiplicity,
        "points": [
            {"re": _num(y.real), "im": _num(y.imag), "multiplicity": int(m),
             "provenance": provenance_str(prov), "flags": flag}
            for y, m, prov, flag in zip(ps.y, ps.multiplicity, ps.provenance, ps.flags)
        ],
    }
    return json.dumps(doc, indent=1) + "\n"


def _nn_edges(y: np.ndarray, n_lengths: int = 3, tol: float = 1e-6):
    """Segments joining points at one of the few shortest neighbour distances."""
    from scipy.spatial import cKDTree

    if len(y) < 2:
        return []
    pts = np.column_stack([y.real, y.imag])
    tree = cKDTree(pts)
    d, _ = tree.query(pts, k=2)
    lengths = np.unique(np.round(d[:, 1] / tol) * tol)[:n_lengths]
    edges = []
    for i, j in sorted(tree.query_pairs(float(lengths.max()) + tol)):
        dist = np.hypot(*(pts[i] - pts[j]))
        if np.min(np.abs(lengths - dist)) <= tol:
            edges.append((i, j))
    return edges


def points_to_svg(ps: sections.SectionPointSet, edges: bool = False, size: int = 800) -> str:
    R = ps.radius
    scale = size / (2 * R)

    def X(v):
        return fmt((v.real + R) * scale)

    def Y(v):
        return fmt((R - v.imag) * scale)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect x="0" y="0" width="{size}" height="{size}" fill="white"/>',
        f'<circle cx="{fmt(size / 2)}" cy="{fmt(size / 2)}" r="{fmt(R * scale)}" '
        'fill="none" stroke="#bbbbbb" stroke-width="1"/>',
    ]
    if edges:
        for i, j in _nn_edges(ps.y):
            a, b = ps.y[i], ps.y[j]
            out.append(f'<line x1="{X(a)}" y1="{Y(a)}" x2="{X(b)}" y2="{Y(b)}" '
                       'stroke="#4477aa" stroke-width="1"/>')
    r_pt = max(1.5, 0.08 * scale)
    for y, flag in zip(ps.y, ps.flags):
        if ps.kind == "analytic":
            out.append(f'<circle cx="{X(y)}" cy="{Y(y)}" r="{fmt(r_pt)}" fill="none" '
                       f'stroke="{"#cc3311" if flag else "black"}" stroke-width="1"/>')
        else:
            out.append(f'<circle cx="{X(y)}" cy="{Y(y)}" r="{fmt(r_pt * 0.6)}" '
                       f'fill="{"#cc3311" if flag else "black"}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def pairs_to_csv(pairs, summary: dict) -> str:
    buf = io.StringIO()
    for key in ("pairs", "max_distance", "mean_distance"):
        buf.write(f"# {key}: {fmt(summary[key]) if isinstance(summary[key], float) else summary[key]}\n")
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["analytic_re", "analytic_im", "model_re", "model_im", "distance", "tile"])
    for p in pairs:
        wr.writerow([fmt(p.y_analytic.real), fmt(p.y_analytic.imag), fmt(p.y_model.real),
                     fmt(p.y_model.imag), fmt(p.distance), provenance_str([p.tile])])
    return buf.getvalue()


def _exact_json(value) -> dict:
    return density_json(value)


def classification_report(descs) -> dict:
    rows = [d.as_row() for d in descs]
    for r in rows:
        r["density"] = _num(r["density"])
    grams = []
    for d in descs:
        which = natural_closed_form(d.params)
        gram = gram_closed_form(d.params, which)
        det, vol = determinant_volume(gram)
        grams.append({
            "triple": list(d.triple),
            "basis": which,
            "gram": [[str(x) for x in row] for row in gram],
            "reduced_gram": [[str(x) for x in row] for row in d.lattice.gram],
            "determinant": str(det),
            "volume": _exact_json(vol),
            "volume_str": str(vol),
            "volume_float": _num(float(vol)),
            "root_lattice": d.root_lattice.tag,
            "root_lattice_scales": [str(s) for s in d.root_lattice.scales],
            "witness": [list(r) for r in d.root_lattice.witness or ()],
        })
    return {"surfaces": rows, "lattices": grams}


def classification_csv(report: dict) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["n", "p", "q", "quotient", "lattice", "genus", "density", "density_exact",
                 "class", "determinant", "volume"])
    for row, lat in zip(report["surfaces"], report["lattices"]):
        wr.writerow([*row["triple"], row["quotient"], row["lattice"], row["genus"],
                     fmt(row["density"]), json.dumps(row["density_exact"], separators=(",", ":")),
                     row["class"], lat["determinant"],
                     json.dumps(lat["volume"], separators=(",", ":"))])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands


def _emit(text: str, cfg: RunConfig):
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_classify(cfg: RunConfig) -> int:
    descs = classify_all(check=False)
    diffs = compare_with_golden(descs)
    report = classification_report(descs)
    report["matches_golden"] = not diffs
    if cfg.format == "csv":
        _emit(classification_csv(report), cfg)
    elif cfg.format == "json":
        _emit(json.dumps(report, indent=1) + "\n", cfg)
    else:
        raise UsageError("classify supports --format csv or json")
    if diffs:
        sys.stderr.write(str(ClassificationMismatch(diffs)) + "\n")
        return 1
    return 0


def _check_section_config(cfg: RunConfig):
    if cfg.surface not in TABLE_TRIPLES:
        raise UsageError(f"--surface must be one of {', '.join(','.join(map(str, t)) for t in TABLE_TRIPLES)}")
    if not (0 < cfg.radius <= MAX_RADIUS):
        raise UsageError(f"--radius must lie in (0, {MAX_RADIUS:g}]")


def _write_points(ps: sections.SectionPointSet, cfg: RunConfig):
    if cfg.format == "csv":
        _emit(points_to_csv(ps), cfg)
    elif cfg.format == "json":
        _emit(points_to_json(ps, cfg.surface), cfg)
    elif cfg.format == "svg":
        _emit(points_to_svg(ps, edges=cfg.edges), cfg)
    else:
        raise UsageError(f"unknown format {cfg.format!r}")
    for w in ps.warnings:
        sys.stderr.write(f"warning: {w}\n")


def cmd_section(cfg: RunConfig) -> int:
    _check_section_config(cfg)
    tol = cfg.tol if cfg.tol is not None else sections.TOL_DEDUP
    ps = sections.analytic_section(cfg.surface, cfg.x, cfg.radius, dedup_tol=tol)
    _write_points(ps, cfg)
    return 0


def cmd_modelset(cfg: RunConfig) -> int:
    _check_section_config(cfg)
    ps = sections.model_section(cfg.surface, cfg.x, cfg.radius)
    _write_points(ps, cfg)
    return 0


def cmd_compare(cfg: RunConfig) -> int:
    _check_section_config(cfg)
    try:
        pairs = sections.correspondence(cfg.surface, cfg.x, cfg.radius)
    except RuntimeError as exc:
        sys.stderr.write(f"pairing failed: {exc}\n")
        return 1
    dists = [p.distance for p in pairs]
    summary = {
        "pairs": len(pairs),
        "max_distance": float(max(dists)) if dists else 0.0,
        "mean_distance": float(np.mean(dists)) if dists else 0.0,
    }
    if cfg.format == "json":
        doc = {
            "surface": list(cfg.surface),
            "x": [_num(cfg.x.real), _num(cfg.x.imag)],
            "radius": _num(cfg.radius),
            "pairs": summary["pairs"],
            "max_distance": _num(summary["max_distance"]),
            "mean_distance": _num(summary["mean_distance"]),
            "rows": [{"analytic": [_num(p.y_analytic.real), _num(p.y_analytic.imag)],
                      "model": [_num(p.y_model.real), _num(p.y_model.imag)],
                      "distance": _num(p.distance), "tile": provenance_str([p.tile])}
                     for p in pairs],
        }
        _emit(json.dumps(doc, indent=1) + "\n", cfg)
    else:
        _emit(pairs_to_csv(pairs, summary), cfg)
    if summary["max_distance"] > 1 + 1e-9:
        sys.stderr.write(f"pair distance {summary['max_distance']} exceeds 1\n")
        return 1
    return 0


COMMANDS = {
    "classify": cmd_classify,
    "section": cmd_section,
    "modelset": cmd_modelset,
    "compare": cmd_compare,
}


# ---------------------------------------------------------------------------
# argument parsing


def _triple(text: str) -> tuple[int, int, int]:
    try:
        parts = tuple(int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected n,p,q, got {text!r}")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected n,p,q, got {text!r}")
    return parts


def _point(text: str) -> complex:
    try:
        re, im = (float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected re,im, got {text!r}")
    return complex(re, im)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crystal-riemann",
                                     description="Crystallographic Riemann surfaces of right triangles.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--tol", type=float, help="merge tolerance for coincident points")

    pc = sub.add_parser("classify", parents=[common], help="derive the seven-surface table and the lattice data")
    pc.add_argument("--format", choices=["json", "csv"], default="json")

    for name, hlp in (("section", "analytic section A(x)"),
                      ("modelset", "flattened model set"),
                      ("compare", "pair analytic and model points")):
        ps = sub.add_parser(name, parents=[common], help=hlp)
        ps.add_argument("--surface", type=_triple, required=True, help="n,p,q")
        ps.add_argument("--x", type=_point, help="re,im (default: drawn from --seed)")
        ps.add_argument("--radius", type=float, default=10.0)
        ps.add_argument("--seed", type=int, default=0, help="seed for a random x when --x is omitted")
        ps.add_argument("--format", choices=["csv", "json", "svg"] if name != "compare" else ["csv", "json"],
                        default="csv")
        if name == "modelset":
            ps.add_argument("--edges", action="store_true", help="draw nearest-neighbour edges in SVG")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command, out=args.out, format=args.format,
                    tol=getattr(args, "tol", None))
    if args.command != "classify":
        cfg.surface = args.surface
        cfg.radius = args.radius
        cfg.seed = args.seed
        cfg.edges = getattr(args, "edges", False)
        if args.x is None:
            rng = np.random.default_rng(args.seed)
            r, t = math.sqrt(rng.random()), 2 * math.pi * rng.random()
            cfg.x = complex(r * math.cos(t), r * math.sin(t))
        else:
            cfg.x = args.x
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = config_from_args(args)
    try:
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        parser.error(str(exc))
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
