"""Command line front end.

    monorep verify  --input SPEC [--box LO,HI,COUNT ...] [--tol F] [--margin F]
    monorep extract --input SPEC [--box ...] [--tol F]
    monorep resolve --input SPEC [--box ...] [--tol F] [--budget N]
    monorep demo    [--input CATALOG] [--tol F] [--budget N]

Every command writes its reports (and figures, unless ``--no-plots``) into
``--out``.  Exit status: 0 when every check passes, 2 when a mathematical
check fails, 1 on input or configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .duality import EUCLIDEAN, DualityMap
from .errors import MonorepError, NonMonotoneExtractionError, SpecError
from .grid import GridSpec, format_float
from .operators import (
    AnalyticOperator,
    OperatorGraph,
    analytic_resolvent,
    maximality_probe,
    probe_points,
)
from .representations import (
    closed_form_indicator,
    closed_form_phi,
    fenchel_young,
    j_transform,
    membership_check,
    representative_from_json,
)
from .witness import DEFAULT_BUDGET, extract_operator, verify_representative

log = logging.getLogger("monorep")

EXIT_OK, EXIT_INPUT, EXIT_FAIL = 0, 1, 2

DEFAULT_TOLS = {"verify": 1e-9, "extract": 1e-9, "resolve": 1e-4, "demo": 1e-4}
DEFAULT_BOXES = {"verify": "-1,1,21", "extract": "-1,1,21", "resolve": "-2,2,11"}


@dataclass
class RunConfig:
    command: str
    input: str | None
    out: str
    box: list = field(default_factory=list)
    tol: float = 1e-4
    budget: int = DEFAULT_BUDGET
    format: str = "csv"
    margin: float = 2.0
    plots: bool = True

    def __post_init__(self):
        if not self.tol > 0:
            raise SpecError(f"--tol must be positive, got {self.tol}")
        if self.budget <= 0:
            raise SpecError(f"--budget must be positive, got {self.budget}")
        if self.margin < 1:
            raise SpecError(f"--margin must be >= 1, got {self.margin}")


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    return str(value)


def _write_csv(path, header, rows):
    """Write rows (dicts keyed by ``header`` or sequences) at full precision.

    Vector-valued cells of length ``n > 1`` become columns ``name_1 .. name_n``.
    """
    rows = [[r[h] for h in header] if isinstance(r, dict) else list(r) for r in rows]
    widths = [1] * len(header)
    for r in rows:
        for i, cell in enumerate(r):
            if isinstance(cell, (list, tuple, np.ndarray)):
                widths[i] = max(widths[i], np.size(cell))
    names = []
    for h, w in zip(header, widths):
        names.extend([h] if w == 1 else [f"{h}_{k + 1}" for k in range(w)])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(names)
    for r in rows:
        out = []
        for cell, w in zip(r, widths):
            if isinstance(cell, (list, tuple, np.ndarray)):
                out.extend(_fmt(float(a)) for a in np.ravel(cell))
            else:
                out.append(_fmt(cell))
        writer.writerow(out)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if np.isfinite(value) else format_float(value)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def parse_box(text: str):
    parts = text.split(",")
    if len(parts) != 3:
        raise SpecError(f"--box expects LO,HI,COUNT, got {text!r}")
    try:
        return float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise SpecError(f"--box expects LO,HI,COUNT, got {text!r}") from None


def build_box(axes, want: int, n: int) -> GridSpec:
    """Grid with ``want`` axes from 1, ``n`` (repeated per block) or ``want`` given axes."""
    if len(axes) == 1:
        axes = axes * want
    elif len(axes) == n and want == 2 * n:
        axes = axes + axes
    elif len(axes) != want:
        raise SpecError(f"--box given {len(axes)} times; need 1, {n} or {want} axes")
    try:
        return GridSpec([a[0] for a in axes], [a[1] for a in axes], [a[2] for a in axes])
    except ValueError as exc:
        raise SpecError(f"--box: {exc}") from None


def load_input(path: str):
    """Representative and duality map from a JSON spec file."""
    if path is None:
        raise SpecError("--input is required")
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise SpecError(f"--input: cannot read {path}: {exc.strerror}") from None
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise SpecError(f"--input: {path} is not valid JSON: {exc}") from None
    base = os.path.dirname(os.path.abspath(path))
    dm = EUCLIDEAN
    if isinstance(obj, dict) and "representative" in obj:
        if "duality" in obj:
            dm = DualityMap.from_json(obj["duality"])
        obj = obj["representative"]
    rep = representative_from_json(obj, base)
    if dm.weights is not None and len(dm.weights) != rep.dim:
        raise SpecError(f"duality map: field 'weights' has length {len(dm.weights)}, representative dim is {rep.dim}")
    return rep, dm


def _figures_dir(cfg):
    path = os.path.join(cfg.out, "figures")
    os.makedirs(path, exist_ok=True)
    return path


# -- commands ------------------------------------------------------------------

def cmd_verify(cfg: RunConfig) -> int:
    os.makedirs(cfg.out, exist_ok=True)
    rep, _ = load_input(cfg.input)
    box = build_box(cfg.box, 2 * rep.dim, rep.dim)
    verdict = verify_representative(rep, box, cfg.tol, sample_box=box.expanded(cfg.margin))
    report = verdict.to_json()
    report.update({"dim": rep.dim, "box": [list(a) for a in zip(box.lower, box.upper, box.counts)],
                   "margin": cfg.margin})
    if cfg.format == "json":
        _write_json(os.path.join(cfg.out, "verify.json"), report)
    else:
        header = ["passed", "primal_ok", "dual_ok", "min_gap_h", "argmin_h_x", "argmin_h_v",
                  "min_gap_jh", "argmin_jh_x", "argmin_jh_v", "tol"]
        row = [verdict.passed, verdict.primal_ok, verdict.dual_ok, verdict.min_gap_h,
               verdict.argmin_h[0], verdict.argmin_h[1], verdict.min_gap_jh,
               verdict.argmin_jh[0], verdict.argmin_jh[1], verdict.tol]
        _write_csv(os.path.join(cfg.out, "verify.csv"), header, [row])
    if cfg.plots and rep.dim == 1:
        from .plotting import gap_heatmap

        P = box.points()
        gap_heatmap(P[:, 0], P[:, 1], np.asarray(rep(P[:, :1], P[:, 1:])) - P[:, 0] * P[:, 1],
                    os.path.join(_figures_dir(cfg), "verify_gap.png"))
    if not verdict.passed:
        which = verdict.argmin_h if not verdict.primal_ok else verdict.argmin_jh
        label = "h(x,v) >= <x,v>" if not verdict.primal_ok else "J(h)(x,v) >= <x,v>"
        print(f"FAIL: {label} violated at x={which[0].tolist()}, v={which[1].tolist()}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _graph_rows(g: OperatorGraph):
    return ["x", "v"], [[x, v] for x, v in g]


def cmd_extract(cfg: RunConfig) -> int:
    os.makedirs(cfg.out, exist_ok=True)
    rep, _ = load_input(cfg.input)
    box = build_box(cfg.box, 2 * rep.dim, rep.dim)
    verified = verify_representative(rep, box, max(cfg.tol, 1e-9), sample_box=box.expanded(cfg.margin)).passed
    try:
        g = extract_operator(rep, box, cfg.tol, verify=False)
    except NonMonotoneExtractionError as exc:
        _write_json(os.path.join(cfg.out, "extract.json"),
                    {"monotone": False, "violation": list(exc.pair), "error": str(exc), "verified": verified})
        print(f"FAIL: {exc}", file=sys.stderr)
        return EXIT_FAIL
    g.verified = verified
    header, rows = _graph_rows(g)
    _write_csv(os.path.join(cfg.out, "extracted.csv"), header, rows)
    report = {"monotone": True, "violation": None, "points": len(g), "verified": verified, "tol": cfg.tol}
    if cfg.format == "json":
        report["graph"] = g.to_json()
    _write_json(os.path.join(cfg.out, "extract.json"), report)
    if cfg.plots and len(g):
        from .plotting import extraction_plot

        extraction_plot(g, os.path.join(_figures_dir(cfg), "extracted.png"))
    if not verified:
        print("FAIL: representative did not pass verification; extraction is unverified", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


CERT_COLUMNS = ["v0", "x", "v", "gap", "fixedpoint_residual", "C", "iterations", "accepted"]


def _cert_rows(certs, v0s):
    rows = []
    for v0, c in zip(v0s, certs):
        if c is None:
            nan = np.full(len(v0), np.nan)
            rows.append([v0, nan, nan, np.nan, np.nan, np.nan, 0, False])
        else:
            rows.append([c.v0, c.x, c.v, c.gap, c.fixedpoint_residual, c.C_value, c.iterations, c.accepted])
    return rows


def cmd_resolve(cfg: RunConfig) -> int:
    os.makedirs(cfg.out, exist_ok=True)
    rep, dm = load_input(cfg.input)
    probes = build_box(cfg.box, rep.dim, rep.dim)
    report = maximality_probe(rep, dm, probes, tol=cfg.tol, budget=cfg.budget)
    v0s = probe_points(probes)
    rows = _cert_rows(report.certificates, v0s)
    if cfg.format == "json":
        _write_json(os.path.join(cfg.out, "certificates.json"),
                    [c.to_json() if c is not None else {"v0": v0.tolist(), "error": report.failures.get(k)}
                     for k, (v0, c) in enumerate(zip(v0s, report.certificates))])
    else:
        _write_csv(os.path.join(cfg.out, "certificates.csv"), CERT_COLUMNS, rows)
    _write_json(os.path.join(cfg.out, "resolve_summary.json"), {
        "probes": report.n_probes,
        "accepted": int(sum(report.accepted)),
        "fraction": report.fraction,
        "failures": {str(k): v for k, v in report.failures.items()},
        "note": report.note,
        "tol": cfg.tol,
        "budget": cfg.budget,
    })
    if cfg.plots:
        from .plotting import resolvent_plot

        certs = [c for c in report.certificates if c is not None]
        if certs:
            resolvent_plot(certs, os.path.join(_figures_dir(cfg), "resolvent.png"))
    if report.fraction < 1.0:
        print(f"FAIL: {report.n_probes - sum(report.accepted)} of {report.n_probes} probes not accepted",
              file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# -- demo ----------------------------------------------------------------------

_REP_BUILDERS = {"phi": closed_form_phi, "indicator": closed_form_indicator, "fenchel-young": fenchel_young}

DEMO_COLUMNS = [
    "name", "kind", "dim", "representatives", "verified", "min_gap_h", "min_gap_jh",
    "extracted_points", "monotone", "extraction_matches", "representatives_agree",
    "selfmap_ok", "selfmap_min_gap", "probes", "accepted_fraction", "max_resolvent_error", "status",
]


def load_catalog(path: str | None, base_dir: str | None = None):
    if path is None:
        text = resources.files("monorep").joinpath("data/catalog.json").read_text(encoding="utf-8")
        base_dir = base_dir or "."
    else:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise SpecError(f"--input: cannot read {path}: {exc.strerror}") from None
        base_dir = os.path.dirname(os.path.abspath(path))
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"catalog is not valid JSON: {exc}") from None
    if not isinstance(obj, dict) or "catalog" not in obj:
        raise SpecError("catalog: missing field 'catalog'")
    entries = obj["catalog"]
    if not isinstance(entries, list) or not entries:
        raise SpecError("catalog: field 'catalog' is empty")
    parsed = []
    for k, e in enumerate(entries):
        if not isinstance(e, dict):
            raise SpecError(f"catalog[{k}]: expected an object")
        for key in ("name", "operator", "box", "probes"):
            if key not in e:
                raise SpecError(f"catalog[{k}]: missing field {key!r}")
        op = AnalyticOperator.from_json(e["operator"])
        reps = []
        for spec in e.get("representatives", ["phi"]):
            if isinstance(spec, str):
                if spec not in _REP_BUILDERS:
                    raise SpecError(f"catalog[{k}]: unknown representative {spec!r}")
                reps.append((spec, _REP_BUILDERS[spec](op)))
            else:
                reps.append((spec.get("form", "custom") if isinstance(spec, dict) else "custom",
                             representative_from_json(spec, base_dir)))
        for label, r in reps:
            if r.dim != op.dim:
                raise SpecError(f"catalog[{k}]: representative {label!r} has dim {r.dim}, operator has dim {op.dim}")
        box = build_box([tuple(a) for a in _axes(e["box"], k, "box")], 2 * op.dim, op.dim)
        probes = _probes(e["probes"], k, op.dim)
        parsed.append({"name": str(e["name"]), "operator": op, "reps": reps, "box": box, "probes": probes})
    return parsed


def _probes(obj, k, n):
    """Probe targets: ``{"points": [[...], ...]}`` or a list of grid axes."""
    if isinstance(obj, dict):
        try:
            pts = np.asarray(obj["points"], dtype=float).reshape(-1, n)
        except (KeyError, TypeError, ValueError):
            raise SpecError(f"catalog[{k}]: field 'probes' needs 'points' as a list of length-{n} vectors") from None
        if not len(pts) or not np.all(np.isfinite(pts)):
            raise SpecError(f"catalog[{k}]: field 'probes' has no finite points")
        return pts
    return build_box([tuple(a) for a in _axes(obj, k, "probes")], n, n)


def _axes(obj, k, name):
    try:
        return [(float(a), float(b), int(n)) for a, b, n in obj]
    except (TypeError, ValueError):
        raise SpecError(f"catalog[{k}]: field {name!r} must be a list of [lo, hi, count]") from None


def _run_entry(entry, cfg: RunConfig, exact_tol: float = 1e-9):
    op, box, probes = entry["operator"], entry["box"], entry["probes"]
    sample_box = box.expanded(cfg.margin)
    n = op.dim
    verdicts = [verify_representative(r, box, exact_tol, sample_box=sample_box) for _, r in entry["reps"]]
    graphs = []
    monotone = True
    for _, r in entry["reps"]:
        try:
            graphs.append(extract_operator(r, box, exact_tol, verify=False))
        except NonMonotoneExtractionError:
            monotone = False
            graphs.append(None)
    P = box.points()
    analytic = {tuple(np.round(p, 9) + 0.0) for p in P if op.contains(p[:n], p[n:], tol=exact_tol)}
    phi_graph = graphs[0]
    matches = phi_graph is not None and phi_graph.point_set() == analytic
    agree = all(g is not None and g.point_set() == analytic for g in graphs)

    phi = entry["reps"][0][1]
    jh = j_transform(phi, box, sample_spec=sample_box)
    if phi_graph is not None:
        selfmap = membership_check(jh, phi_graph, box, exact_tol)
        selfmap_ok, selfmap_gap = selfmap.passed, selfmap.min_gap
    else:
        selfmap_ok, selfmap_gap = False, float("nan")

    report = maximality_probe(phi, EUCLIDEAN, probes, tol=cfg.tol, budget=cfg.budget)
    v0s = probe_points(probes)
    errors = [np.abs(c.x - analytic_resolvent(op, EUCLIDEAN, v0)).max() if c is not None else np.inf
              for v0, c in zip(v0s, report.certificates)]
    max_err = float(max(errors))
    ok = (all(v.passed for v in verdicts) and monotone and matches and agree and selfmap_ok
          and report.fraction == 1.0 and max_err <= cfg.tol)
    row = {
        "name": entry["name"],
        "kind": op.kind,
        "dim": n,
        "representatives": "+".join(label for label, _ in entry["reps"]),
        "verified": all(v.passed for v in verdicts),
        "min_gap_h": min(v.min_gap_h for v in verdicts),
        "min_gap_jh": min(v.min_gap_jh for v in verdicts),
        "extracted_points": len(phi_graph) if phi_graph is not None else 0,
        "monotone": monotone,
        "extraction_matches": matches,
        "representatives_agree": agree,
        "selfmap_ok": selfmap_ok,
        "selfmap_min_gap": selfmap_gap,
        "probes": report.n_probes,
        "accepted_fraction": report.fraction,
        "max_resolvent_error": max_err,
        "status": "PASS" if ok else "FAIL",
    }
    return row, phi_graph, report, v0s


def cmd_demo(cfg: RunConfig) -> int:
    os.makedirs(cfg.out, exist_ok=True)
    entries = load_catalog(cfg.input)
    rows = []
    for entry in entries:
        log.info("demo: %s", entry["name"])
        row, graph, report, v0s = _run_entry(entry, cfg)
        rows.append(row)
        if cfg.plots:
            from .plotting import extraction_plot, resolvent_plot

            fig_dir = _figures_dir(cfg)
            if graph is not None and len(graph):
                extraction_plot(graph, os.path.join(fig_dir, f"{entry['name']}_extracted.png"),
                                title=f"{entry['name']}: extracted graph")
            certs = [c for c in report.certificates if c is not None]
            if certs:
                analytic = [analytic_resolvent(entry["operator"], EUCLIDEAN, c.v0) for c in certs]
                resolvent_plot(certs, os.path.join(fig_dir, f"{entry['name']}_resolvent.png"),
                               analytic=analytic if entry["operator"].dim == 1 else None,
                               title=f"{entry['name']}: resolvent")
    if cfg.format == "json":
        _write_json(os.path.join(cfg.out, "demo_summary.json"), rows)
    _write_csv(os.path.join(cfg.out, "demo_summary.csv"), DEMO_COLUMNS, rows)
    if cfg.plots:
        from .plotting import demo_overview

        demo_overview(rows, os.path.join(_figures_dir(cfg), "overview.png"))
    failed = [r["name"] for r in rows if r["status"] != "PASS"]
    if failed:
        print(f"FAIL: {', '.join(failed)}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


COMMANDS = {"verify": cmd_verify, "extract": cmd_extract, "resolve": cmd_resolve, "demo": cmd_demo}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="monorep", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--input", help="JSON spec (demo: catalog; bundled catalog if omitted)")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--tol", type=float, default=None, help=f"tolerance (default {DEFAULT_TOLS[name]:g})")
        p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="solver iteration budget")
        p.add_argument("--box", action="append", default=None, metavar="LO,HI,COUNT",
                       help="grid axis; repeat per axis")
        p.add_argument("--format", choices=("json", "csv"), default="csv")
        p.add_argument("--margin", type=float, default=2.0,
                       help="extent factor of the sampling grid used for conjugation")
        p.add_argument("--no-plots", action="store_true", help="skip figure rendering")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        boxes = args.box if args.box is not None else ([DEFAULT_BOXES[args.command]]
                                                       if args.command in DEFAULT_BOXES else [])
        cfg = RunConfig(
            command=args.command,
            input=args.input,
            out=args.out,
            box=[parse_box(b) for b in boxes],
            tol=DEFAULT_TOLS[args.command] if args.tol is None else args.tol,
            budget=args.budget,
            format=args.format,
            margin=args.margin,
            plots=not args.no_plots,
        )
        return COMMANDS[args.command](cfg)
    except (MonorepError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
