"""Command-line driver.

``artifact run CONFIG`` executes one experiment described by an INI-style
file::

    [domain]
    kind = ellipse            ; ellipse | circle | curvature_fourier
    a = 2
    b = 1

    [experiment]
    name = rigidity           ; chart | orbits | extract | mode_lemmas | operator | rigidity | higher_order

    [numerics]
    gamma = 2.8
    qbar = 8

    [output]
    directory = out
    formats = csv, json, svg, png

and writes its tables, figures and a ``manifest.json``.  ``artifact plot``
turns an orbit CSV and a curve CSV into an SVG drawing.  Failures exit with
a nonzero status and a JSON error report on stderr (and in the output
directory when one is known).
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import platform
import re
import sys
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

EXPERIMENTS = ("chart", "orbits", "extract", "mode_lemmas", "operator", "rigidity", "higher_order")
FORMATS = ("csv", "json", "svg", "png")

EXIT_CONFIG = 2
EXIT_FAILURE = 1


class ConfigError(Exception):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.message = message
        self.line = line


# -- JSON with 17 significant digits ------------------------------------------

def to_json(obj, indent: int = 2, _level: int = 0) -> str:
    """Deterministic JSON: sorted keys, floats with 17 significant digits,
    non-finite floats as null."""
    pad, inner = " " * (indent * _level), " " * (indent * (_level + 1))
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if hasattr(obj, "tolist") and not isinstance(obj, (list, tuple, dict)):
        # numpy scalars and arrays
        return to_json(obj.tolist(), indent, _level)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return f"{obj:.17g}" if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {to_json(v, indent, _level + 1)}"
                 for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{inner}{to_json(v, indent, _level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(path, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_json(obj) + "\n", encoding="utf-8")


# -- configuration ------------------------------------------------------------

@dataclass
class Config:
    path: Path
    sections: dict
    lines: dict = field(default_factory=dict)

    def raw(self, section, key, default=None):
        # configparser folds keys to lower case
        return self.sections.get(section, {}).get(key.lower(), default)

    def line(self, section, key):
        return self.lines.get((section, key.lower()))

    def _convert(self, section, key, default, conv, what):
        value = self.raw(section, key)
        if value is None:
            if default is ConfigError:
                raise ConfigError(f"missing [{section}] {key}", self.lines.get((section, None)))
            return default
        try:
            return conv(value)
        except (ValueError, TypeError):
            raise ConfigError(f"[{section}] {key} = {value!r} is not {what}", self.line(section, key)) from None

    def get_float(self, section, key, default=ConfigError):
        return self._convert(section, key, default, float, "a number")

    def get_int(self, section, key, default=ConfigError):
        return self._convert(section, key, default, int, "an integer")

    def get_str(self, section, key, default=ConfigError):
        return self._convert(section, key, default, str, "text")

    def get_floats(self, section, key, default=ConfigError):
        return self._convert(section, key, default, _float_list, "a list of numbers")

    def get_ints(self, section, key, default=ConfigError):
        return self._convert(section, key, default, _int_list, "a list of integers")

    def echo(self):
        return {s: dict(v) for s, v in self.sections.items()}


def _split(value):
    return [v for v in re.split(r"[,\s]+", value.strip().strip("{}[]()")) if v]


def _float_list(value):
    return [float(v) for v in _split(value)]


def _int_list(value):
    """Integers separated by commas or whitespace; ``a..b`` expands to the
    powers of two from a to b when both are powers of two, else to the range."""
    out = []
    for tok in _split(value):
        if ".." in tok:
            lo, hi = (int(v) for v in tok.split(".."))
            if lo > 0 and hi > 0 and not lo & (lo - 1) and not hi & (hi - 1):
                v = lo
                while v <= hi:
                    out.append(v)
                    v *= 2
            else:
                out.extend(range(lo, hi + 1))
        else:
            out.append(int(tok))
    return out


def _line_map(text):
    lines, section = {}, None
    for no, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if not s or s[0] in "#;":
            continue
        m = re.match(r"\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip()
            lines.setdefault((section, None), no)
            continue
        m = re.match(r"([^=:]+)[=:]", s)
        if m and section is not None:
            lines[(section, m.group(1).strip().lower())] = no
    return lines


def load_config(path) -> Config:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    try:
        parser.read_string(text, source=str(path))
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("content before the first [section] header", exc.lineno) from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key {exc.option!r} in [{exc.section}]", exc.lineno) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section [{exc.section}]", exc.lineno) from None
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ConfigError("malformed line (expected key = value)", lineno) from None
    sections = {s: dict(parser[s]) for s in parser.sections()}
    cfg = Config(path, sections, _line_map(text))
    for required in ("domain", "experiment"):
        if required not in sections:
            raise ConfigError(f"missing [{required}] section")
    known = {"domain", "experiment", "numerics", "output"}
    for s in sections:
        if s not in known:
            raise ConfigError(f"unknown section [{s}]", cfg.lines.get((s, None)))
    exp = sections["experiment"]
    if "name" not in exp and "kind" in exp:
        exp["name"] = exp["kind"]
        cfg.lines[("experiment", "name")] = cfg.line("experiment", "kind")
    name = cfg.get_str("experiment", "name")
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}; expected one of {', '.join(EXPERIMENTS)}",
                          cfg.line("experiment", "name"))
    fmts = _split(cfg.get_str("output", "formats", "csv, json, svg, png"))
    bad = [f for f in fmts if f not in FORMATS]
    if bad:
        raise ConfigError(f"unknown output format(s) {bad}", cfg.line("output", "formats"))
    return cfg


def build_domain(cfg: Config):
    from .fourier import FourierSeries
    from .geometry import make_circle, make_ellipse, make_from_curvature_fourier

    kind = cfg.get_str("domain", "kind")
    if kind == "ellipse":
        return make_ellipse(cfg.get_float("domain", "a"), cfg.get_float("domain", "b"))
    if kind == "circle":
        return make_circle(cfg.get_float("domain", "radius", 1.0))
    if kind == "curvature_fourier":
        a0 = cfg.get_float("domain", "a0", 1.0)
        a = cfg.get_floats("domain", "a", [])
        b = cfg.get_floats("domain", "b", [])
        n = max(len(a), len(b))
        a, b = a + [0.0] * (n - len(a)), b + [0.0] * (n - len(b))
        return make_from_curvature_fourier(FourierSeries(a0, a, b))
    raise ConfigError(f"unknown domain kind {kind!r}", cfg.line("domain", "kind"))


def parse_mode(spec: str):
    """``cos3`` / ``sin2`` / ``const`` into a FourierSeries."""
    from .fourier import FourierSeries

    m = re.fullmatch(r"\s*(cos|sin)\s*(\d+)\s*", spec)
    if m:
        return FourierSeries.mode(int(m.group(2)), m.group(1))
    if spec.strip() in ("const", "1"):
        return FourierSeries.constant(1.0)
    raise ValueError(spec)


# -- experiments --------------------------------------------------------------

class Run:
    """Output bookkeeping for a single experiment."""

    def __init__(self, cfg: Config, outdir: Path, formats):
        self.cfg, self.outdir, self.formats = cfg, outdir, set(formats)
        self.outputs: list[str] = []
        self.timings: dict[str, float] = {}
        self.warnings: list[str] = []

    def want(self, fmt):
        return fmt in self.formats

    def path(self, name):
        self.outputs.append(name)
        return self.outdir / name

    def timed(self, label, fn, *args, **kwargs):
        t0 = time.perf_counter()
        try:
            return fn(*args, **kwargs)
        finally:
            self.timings[label] = time.perf_counter() - t0


def _boundary_points(curve, n=512):
    import numpy as np
    g, _, _ = curve.frame(2 * np.pi * np.arange(n) / n)
    return g.T


def exp_chart(run: Run, curve, chart):
    import numpy as np
    from .plotting import line_figure

    n = run.cfg.get_int("numerics", "n_grid", 256)
    table = chart.table(n)
    if run.want("csv"):
        chart.to_csv(run.path("chart.csv"), n)
        curve.to_csv(run.path("curve.csv"))
    summary = {"C": chart.C, "length": curve.length, "mu_min": float(table[:, 2].min()),
               "mu_max": float(table[:, 2].max()), "n_grid": n}
    if run.want("png"):
        line_figure(run.path("chart.png"), table[:, 0], {"mu": table[:, 2]}, "x", "mu(x)",
                    "Lazutkin density")
    return summary


def exp_orbits(run: Run, curve, chart):
    import numpy as np
    from .dynamics import birkhoff_orbit, orbit_family, write_orbits_csv
    from .plotting import orbit_figure, write_orbit_svg

    cfg = run.cfg
    p = cfg.get_int("numerics", "p", 1)
    q_list = cfg.get_ints("numerics", "q_list", [5, 8, 13])
    n = cfg.get_int("numerics", "n_points", 16)
    starts = cfg.get_int("numerics", "starts", 4)
    tol = cfg.get_float("numerics", "tol", 1e-12)
    rng = np.random.default_rng(cfg.get_int("numerics", "seed", 0))
    from . import default_workers
    workers = cfg.get_int("numerics", "workers", default_workers())
    x_grid = np.arange(n) / n
    boundary = _boundary_points(curve)
    if run.want("csv"):
        curve.to_csv(run.path("curve.csv"))
    rows = []
    for q in q_list:
        fam = run.timed(f"family_{p}_{q}", orbit_family, curve, chart, p, q, x_grid, tol, workers)
        per = np.array([o.perimeter for o in fam])
        seeds = rng.uniform(0.0, curve.length, size=starts)
        best = [birkhoff_orbit(curve, p, q, seed_s=float(s), chart=chart, tol=tol) for s in seeds]
        rows.append({"p": p, "q": q, "perimeter_max": float(per.max()),
                     "perimeter_spread": float(per.max() - per.min()),
                     "birkhoff_perimeters": [o.perimeter for o in best],
                     "birkhoff_seeds": seeds.tolist()})
        if run.want("csv"):
            write_orbits_csv(run.path(f"orbits_{p}_{q}.csv"), fam, x_grid)
        polys = [o.points(curve) for o in fam]
        if run.want("svg"):
            write_orbit_svg(run.path(f"orbits_{p}_{q}.svg"), boundary, polys, envelope=True)
        if run.want("png"):
            orbit_figure(run.path(f"orbits_{p}_{q}.png"), boundary, polys, envelope=True)
    return {"families": rows, "n_points": n}


def _extract(run: Run, curve, chart):
    from .lazutkin import extract_alpha_beta

    q_pair = tuple(run.cfg.get_ints("numerics", "q_pair", [32, 64]))
    n_grid = run.cfg.get_int("numerics", "n_grid", 64)
    if len(q_pair) != 2:
        raise ConfigError("q_pair needs two integers", run.cfg.line("numerics", "q_pair"))
    return run.timed("extract", extract_alpha_beta, curve, chart, q_pair, n_grid)


def exp_extract(run: Run, curve, chart):
    from .lazutkin import curvature_identity_residual, expansion_table, write_expansion_csv
    from .plotting import line_figure

    data = _extract(run, curve, chart)
    if run.want("csv"):
        write_expansion_csv(run.path("expansion.csv"), chart, data)
    if run.want("png"):
        t = expansion_table(chart, data)
        line_figure(run.path("expansion.png"), t[:, 0], {"alpha": t[:, 1], "beta": t[:, 2]},
                    "x", "value", "Expansion functions")
    return {"q_pair": list(data.q_pair),
            "residuals": {str(q): {"position": v[0], "angle": v[1]}
                          for q, v in data.residual_magnitudes.items()},
            "identity_residual": curvature_identity_residual(curve, chart, data),
            "identity_residual_x_derivatives": curvature_identity_residual(curve, chart, data,
                                                                           convention="x"),
            "alpha_modes": data.alpha.coefficients(), "beta_modes": data.beta.coefficients()}


def exp_mode_lemmas(run: Run, curve, chart):
    from .geometry import write_table
    from .operators import verify_mode_lemmas
    from .plotting import loglog_figure

    cfg = run.cfg
    qs = cfg.get_ints("numerics", "q_range", [16, 32, 64, 128])
    cases = _split(cfg.get_str("numerics", "cases", "constant, p=q, lq2, p=kq+r"))
    k = cfg.get_int("numerics", "k", 2)
    r = cfg.get_int("numerics", "r", 2)
    data = _extract(run, curve, chart) if "p=kq" in cases else None
    reps = run.timed("mode_lemmas", verify_mode_lemmas, curve, chart, qs, cases, k=k, r=r, data=data,
                     lq2_mode=cfg.get_int("numerics", "lq2_mode", 1),
                     slope_tol=cfg.get_float("numerics", "slope_tol", 0.5))
    if run.want("csv"):
        rows = [[i, q, v] for i, rep in enumerate(reps) for q, v in zip(rep.q, rep.values)]
        write_table(run.path("mode_lemmas.csv"), ["case_index", "q", "value"], rows)
    if run.want("png"):
        loglog_figure(run.path("mode_lemmas.png"), {rep.case: (rep.q, rep.values) for rep in reps},
                      "q", "sup norm", "Mode lemma decay")
    return {"cases": [rep.as_dict() for rep in reps], "passed": all(rep.passed for rep in reps)}


def exp_operator(run: Run, curve, chart):
    import numpy as np
    from .geometry import write_table
    from .operators import (dilation_field, operator_jet, rotation_field, translation_field)
    from .plotting import line_figure

    cfg = run.cfg
    q = cfg.get_int("numerics", "q", 16)
    n = cfg.get_int("numerics", "n_points", 64)
    spec = cfg.get_str("numerics", "f", "cos1")
    try:
        f = parse_mode(spec)
    except ValueError:
        raise ConfigError(f"f = {spec!r} is not cosN, sinN or const", cfg.line("numerics", "f")) from None
    x = np.arange(n) / n
    jet = run.timed("operator", operator_jet, curve, chart, q, x)
    l1, l2 = jet.apply(f, split=True)
    if run.want("csv"):
        write_table(run.path("operator.csv"), ["x", "Lq", "Lq1", "Lq2"], np.column_stack([x, l1 + l2, l1, l2]))
    if run.want("png"):
        line_figure(run.path("operator.png"), x, {"Lq1": l1, "Lq2": l2}, "x", "value", f"L_{q}({spec})")
    fields = {"translation_x": translation_field(chart), "translation_y": translation_field(chart, (0.0, 1.0)),
              "dilation": dilation_field(chart), "rotation": rotation_field(chart)}
    ann = {name: float(np.abs(jet.apply(fld.nu0)).max()) for name, fld in fields.items()}
    return {"q": q, "f": spec, "sup_Lq": float(np.abs(l1 + l2).max()), "sup_Lq1": float(np.abs(l1).max()),
            "sup_Lq2": float(np.abs(l2).max()), "rigid_field_residuals": ann}


def exp_rigidity(run: Run, curve, chart):
    import numpy as np
    from . import default_workers
    from .errors import NotContractive
    from .plotting import line_figure
    from .rigidity import (assemble_operator, bound_budget, deformation_space, gamma0,
                           norm_deviation, write_basis_csv)

    cfg = run.cfg
    gamma = cfg.get_float("numerics", "gamma", 2.8)
    qbar = cfg.get_int("numerics", "qbar", 8)
    Q = cfg.get_int("numerics", "Q", 4 * qbar)
    J = cfg.get_int("numerics", "J", 8 * qbar)
    B = cfg.get_float("numerics", "B", 1.5)
    tail_target = cfg.get_float("numerics", "tail_target", 0.01)
    workers = cfg.get_int("numerics", "workers", default_workers())
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        trunc = run.timed("assemble", assemble_operator, curve, chart, qbar, gamma, Q, J,
                          tail_target=tail_target, workers=workers)
        report = norm_deviation(trunc)
        contractive = report.bound < 1.0
        try:
            space = run.timed("deformation_space", deformation_space, curve, chart, qbar, gamma,
                              trunc=trunc, require_contraction=True)
        except NotContractive:
            # the basis is still reported, flagged as not justified by a Neumann series
            space = deformation_space(curve, chart, qbar, gamma, trunc=trunc, require_contraction=False)
    run.warnings.extend(str(w.message) for w in caught)
    if run.want("csv"):
        trunc.to_text(run.path("matrix.txt"))
        write_basis_csv(run.path("basis.csv"), space)
    if run.want("png"):
        qs = sorted(report.rows)
        line_figure(run.path("rigidity_rows.png"), qs, {"row deviation": [report.rows[q] for q in qs],
                                                        "limit": [report.limit] * len(qs)},
                    "q", "weighted row sum", "Distance from the identity per row")
    budget = bound_budget(gamma, B, qbar)
    return {"gamma": gamma, "qbar": qbar, "Q": trunc.Q, "J": trunc.J, "norm": report.as_dict(),
            "contractive": contractive, "tail_bound": trunc.tail_bound, "naive_tail": trunc.naive_tail,
            "envelope_C": trunc.envelope_C, "stream_J": {str(k): v for k, v in trunc.stream_J.items()},
            "dimension": space.dimension, "expected_dimension": space.expected_dimension,
            "singular_values": np.asarray(space.singular_values).tolist(),
            "basis_residual": space.residual, "gamma0": gamma0(), "budget": budget.as_dict()}


def exp_higher_order(run: Run, curve, chart):
    import numpy as np
    from .fourier import FourierSeries
    from .geometry import write_table
    from .higher_order import constraint_decay, regrouping_identity_residual, two_p_expansion_check
    from .plotting import loglog_figure

    cfg = run.cfg
    p_list = cfg.get_ints("numerics", "p_list", [17, 33, 65])
    spec = cfg.get_str("numerics", "nu0", "cos1")
    try:
        nu0 = parse_mode(spec)
    except ValueError:
        raise ConfigError(f"nu0 = {spec!r} is not cosN, sinN or const", cfg.line("numerics", "nu0")) from None
    data = _extract(run, curve, chart)
    twop = run.timed("two_p", two_p_expansion_check, curve, chart, data, p_list)
    cons = run.timed("constraint", constraint_decay, curve, chart, data, nu0, p_list)
    mu2 = FourierSeries.from_function(lambda x: chart.mu(x) ** 2)
    regroup = regrouping_identity_residual(nu0, data.alpha, data.beta, mu2)
    if run.want("csv"):
        rows = [[r.p, r.position, r.angle, r.sinc, c.exact_sup, c.displayed_sup, c.gap]
                for r, c in zip(twop.rows, cons.rows)]
        write_table(run.path("higher_order.csv"),
                    ["p", "position", "angle", "sinc", "exact", "displayed", "gap"], rows)
    if run.want("png"):
        ps = [r.p for r in twop.rows]
        loglog_figure(run.path("higher_order.png"),
                      {"position": (ps, [r.position for r in twop.rows]),
                       "angle": (ps, [r.angle for r in twop.rows]),
                       "exact - displayed": (ps, [c.gap for c in cons.rows])},
                      "p", "sup residual", "2/p orbits")
    return {"two_p": twop.as_dict(), "constraint": cons.as_dict(), "regrouping_residual": regroup,
            "nu0": spec, "p_list": p_list}


RUNNERS = {"chart": exp_chart, "orbits": exp_orbits, "extract": exp_extract,
           "mode_lemmas": exp_mode_lemmas, "operator": exp_operator, "rigidity": exp_rigidity,
           "higher_order": exp_higher_order}


def _versions():
    import matplotlib
    import numpy
    import scipy
    from . import __version__
    return {"artifact": __version__, "python": platform.python_version(), "numpy": numpy.__version__,
            "scipy": scipy.__version__, "matplotlib": matplotlib.__version__}


def _error_report(kind, exc, **extra):
    rep = {"error": kind, "type": type(exc).__name__, "message": getattr(exc, "message", str(exc))}
    if getattr(exc, "line", None) is not None:
        rep["line"] = exc.line
    if getattr(exc, "diagnostics", None):
        rep["diagnostics"] = exc.diagnostics
    rep.update(extra)
    return rep


def _fail(report, outdir=None, code=EXIT_FAILURE):
    text = to_json(report)
    print(text, file=sys.stderr)
    if outdir is not None:
        try:
            write_json(Path(outdir) / "error.json", report)
        except OSError:
            pass
    return code


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.sections.setdefault("numerics", {})["seed"] = str(args.seed)
        out = args.output or cfg.get_str("output", "directory", "artifact-output")
        outdir = Path(out)
        if not outdir.is_absolute():
            outdir = (cfg.path.parent / outdir) if args.output is None else outdir
        formats = _split(cfg.get_str("output", "formats", "csv, json, svg, png"))
        name = cfg.get_str("experiment", "name")
    except ConfigError as exc:
        return _fail(_error_report("config", exc, file=str(args.config)), code=EXIT_CONFIG)

    run = Run(cfg, outdir, formats)
    outdir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    try:
        curve = build_domain(cfg)
        from .lazutkin import build_chart
        chart = run.timed("chart", build_chart, curve)
        summary = RUNNERS[name](run, curve, chart)
    except ConfigError as exc:
        return _fail(_error_report("config", exc, file=str(args.config)), outdir, EXIT_CONFIG)
    except Exception as exc:  # report any experiment failure as JSON
        return _fail(_error_report("experiment", exc, experiment=name), outdir)
    if run.want("json"):
        write_json(run.path(f"{name}.json"), {"experiment": name, "results": summary})
    manifest = {"config": cfg.echo(), "config_file": str(cfg.path), "experiment": name,
                "seed": cfg.get_int("numerics", "seed", 0), "versions": _versions(),
                "wall_times": dict(run.timings, total=time.perf_counter() - t0),
                "outputs": run.outputs, "warnings": run.warnings}
    write_json(outdir / "manifest.json", manifest)
    if not args.quiet:
        print(f"{name}: wrote {len(run.outputs)} file(s) to {outdir}")
    return 0


def cmd_plot(args) -> int:
    import numpy as np
    from .errors import InvalidArgument
    from .geometry import curve_from_csv, read_table
    from .plotting import write_orbit_svg

    try:
        cols = read_table(args.orbits, required=("x", "k", "s_k"))
        curve = curve_from_csv(args.curve)
        bcols = read_table(args.curve, required=("x", "y"))
    except (InvalidArgument, OSError) as exc:
        return _fail(_error_report("parse", exc), code=EXIT_CONFIG)
    boundary = np.column_stack([bcols["x"], bcols["y"]])
    polys = []
    for x0 in np.unique(cols["x"]):
        sel = cols["x"] == x0
        order = np.argsort(cols["k"][sel], kind="stable")
        polys.append(curve.position(cols["s_k"][sel][order]))
    if not args.all:
        polys = polys[:1] if not args.envelope else polys
    write_orbit_svg(args.output, boundary, polys, envelope=args.envelope)
    if not args.quiet:
        print(f"wrote {args.output}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="artifact", description="Billiard rigidity experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the experiment described by a config file")
    r.add_argument("config")
    r.add_argument("-o", "--output", help="output directory (overrides [output] directory)")
    r.add_argument("--seed", type=int, help="random seed for multi-start solvers (default 0)")
    r.add_argument("-q", "--quiet", action="store_true")
    r.set_defaults(func=cmd_run)
    p = sub.add_parser("plot", help="draw an orbit CSV as SVG")
    p.add_argument("orbits", help="orbit CSV (x, k, s_k, phi_k, perimeter)")
    p.add_argument("--curve", required=True, help="curve CSV (s, x, y, rho)")
    p.add_argument("-o", "--output", default="orbit.svg")
    p.add_argument("--envelope", action="store_true", help="draw the chord envelope (all orbits in the file)")
    p.add_argument("--all", action="store_true", help="draw every orbit in the file")
    p.add_argument("-q", "--quiet", action="store_true")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
