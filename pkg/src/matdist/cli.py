"""Command-line front end: ``matdist run``, ``matdist catalog list``, ``matdist check-iso``."""

import argparse
import sys
import warnings
from pathlib import Path

import numpy as np

from .config import load_config
from .equations import is_material_isomorphism
from .exceptions import ConfigError, MatdistError, RankNotSaturated, SingularPointsPresent
from .field import analyze_grid
from .foliation import foliate
from .homogeneity import solve_homogeneity
from .jets import Jet, coordinate_count
from .laws import catalog_names, catalog_text
from .laws.catalog import DESCRIPTIONS
from .report import dumps, write_curve, write_grid_csv, write_report

EXIT_OK, EXIT_CONFIG, EXIT_WARN = 0, 2, 3
NUMERICAL_WARNINGS = (RankNotSaturated, SingularPointsPresent)


def read_jet_file(path, n):
    """Jet text file: x, y, the n rows of yA, the n rows of yB, then yC slices, all
    whitespace-separated decimals."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError("jet", f"cannot read {path}: {err.strerror}") from None
    try:
        values = np.array([float(t) for t in text.split()])
    except ValueError as err:
        raise ConfigError("jet", f"non-numeric entry in {path}: {err}") from None
    if values.size != coordinate_count(n):
        raise ConfigError("jet", f"expected {coordinate_count(n)} numbers for n={n}, found {values.size}")
    try:
        return Jet.from_vector(values, n)
    except (ValueError, MatdistError) as err:
        raise ConfigError("jet", str(err)) from None


def execute(cfg):
    """Run the configured commands; returns (report dict, warning messages)."""
    caught = []
    report = {
        "law": cfg.law_label,
        "n": cfg.n,
        "grid": {"lo": [float(v) for v in cfg.grid.lo], "hi": [float(v) for v in cfg.grid.hi],
                 "counts": list(cfg.grid.counts)},
        "classification": None,
        "dims": {"nh": [], "h": []},
        "second_grade_equal": [],
        "leaves": {"count": None, "dims": []},
        "homogeneity": {"verdict": None, "residual": None, "per_k": []},
        "warnings": [],
    }
    outputs = {}
    cmds = cfg.commands
    solver = cfg.solver
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        field = None
        if any(c in cmds for c in ("analyze", "foliate", "second-grade")):
            field = analyze_grid(cfg.law, cfg.grid, solver)
            report["classification"] = field.classification
            report["dims"] = {"nh": [int(v) for v in field.dim_nh], "h": [int(v) for v in field.dim_h]}
            outputs["field"] = field
        if "second-grade" in cmds:
            report["second_grade_equal"] = [bool(v) for v in field.second_grade_equal]
        if "foliate" in cmds:
            leaves = foliate(cfg.law, cfg.grid, "nh", solver, cfg.tol_angle, report=field)
            report["leaves"] = {"count": leaves.count, "dims": list(leaves.leaf_dims)}
            outputs["leaves"] = leaves
        if "homogeneity" in cmds:
            hom = solve_homogeneity(cfg.law, cfg.grid, cfg.degree, solver, cfg.tol_hom, cfg.jets_per_point)
            report["homogeneity"] = {"verdict": hom.verdict, "residual": float(hom.residual),
                                     "per_k": [float(v) for v in hom.per_k]}
            outputs["homogeneity"] = hom
        if "check-iso" in cmds:
            g = read_jet_file(cfg.jet, cfg.n)
            outputs["iso"] = is_material_isomorphism(cfg.law, g, 20, cfg.seed, cfg.tol_iso)
    for w in rec:
        if issubclass(w.category, NUMERICAL_WARNINGS):
            caught.append(f"{w.category.__name__}: {w.message}")
    report["warnings"] = caught
    return report, outputs


def iso_document(result, tol):
    return {"is_material_isomorphism": bool(result.is_iso), "deviation": float(result.deviation),
            "tolerance": float(tol)}


def write_outputs(cfg, report, outputs):
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    write_report(report, out / "report.json")
    field = outputs.get("field")
    leaves = outputs.get("leaves")
    if field is not None:
        write_grid_csv(out / "grid.csv", cfg.grid, field.dim_nh, field.dim_h,
                       None if leaves is None else leaves.label)
    if leaves is not None:
        curves = out / "curves"
        curves.mkdir(exist_ok=True)
        for old in curves.glob("leaf_*.dat"):
            old.unlink()
        for leaf, polys in leaves.curves.items():
            for j, poly in enumerate(polys):
                write_curve(curves / f"leaf_{leaf}_{j}.dat", poly)
    summary = [f"law: {cfg.law_label}"]
    if report["classification"] is not None:
        summary.append(f"classification: {field.statement()} (grid sampling)")
    if "homogeneity" in outputs:
        summary.append(f"homogeneity: {outputs['homogeneity'].statement}")
    (out / "summary.txt").write_text("\n".join(summary) + "\n", encoding="utf-8")
    if "iso" in outputs:
        (out / "iso.json").write_text(dumps(iso_document(outputs["iso"], cfg.tol_iso)) + "\n", encoding="utf-8")
    return summary


def cmd_run(args):
    cfg = load_config(args.config)
    report, outputs = execute(cfg)
    for line in write_outputs(cfg, report, outputs):
        print(line)
    for w in report["warnings"]:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_WARN if report["warnings"] else EXIT_OK


def cmd_catalog(args):
    for name in catalog_names():
        print(f"{name}: {DESCRIPTIONS[name]}")
        if args.n:
            print(f"  {catalog_text(name, args.n)}")
    return EXIT_OK


def cmd_check_iso(args):
    cfg = load_config(args.config)
    g = read_jet_file(args.jet, cfg.n)
    res = is_material_isomorphism(cfg.law, g, args.probes, cfg.seed, cfg.tol_iso)
    doc = iso_document(res, cfg.tol_iso)
    out = Path(args.output) if args.output else Path(cfg.output) / "iso.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(dumps(doc) + "\n", encoding="utf-8")
    print(dumps(doc))
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="matdist", description="Material distributions of Cosserat laws.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the analyses named in a config file")
    r.add_argument("config")
    r.set_defaults(func=cmd_run)
    c = sub.add_parser("catalog", help="catalog operations")
    csub = c.add_subparsers(dest="action", required=True)
    cl = csub.add_parser("list", help="list built-in laws")
    cl.add_argument("--n", type=int, default=0, help="also print each law's text at this dimension")
    cl.set_defaults(func=cmd_catalog)
    i = sub.add_parser("check-iso", help="test whether a jet is a material isomorphism")
    i.add_argument("config")
    i.add_argument("--jet", required=True)
    i.add_argument("--probes", type=int, default=20)
    i.add_argument("--output", default=None, help="defaults to iso.json in the config's output directory")
    i.set_defaults(func=cmd_check_iso)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
