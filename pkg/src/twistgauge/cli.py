"""Command-line entry point: ``verify`` runs suites, ``compute`` evaluates conformal data.

Exit codes: 0 pass, 1 check failure, 2 usage, 3 I/O, 4 degenerate input.

Metric spec format (one ``key = value`` per line, ``#`` starts a comment)::

    dimension = 4
    lower = -0.5 -0.5 -0.5 -0.5
    upper = 0.5 0.5 0.5 0.5
    signature = + - - -
    kind = metric                 # or: vielbein
    g00 = 1 + 0.05*x1^2           # metric entries g<mu><nu>, symmetric, missing = 0
    e23 = 0.1*x0                  # vielbein entries e<a><mu> (kind = vielbein)
    conformal_factor = 1 + 0.1*x0 # optional Ω: g -> Ω² g, e -> Ω e

Entries are polynomials in x0..x3 built from numbers, + - * / (by numbers)
and ^ or ** with non-negative integer exponents.
"""
from __future__ import annotations

import argparse
import ast
import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import conformal as CF
from .errors import DegenerateMetric, DegenerateSoldering, TwistGaugeError
from .forms import MetricField
from .jets import FieldHandle, matrix
from .lie import ETA

__all__ = [
    "EXIT_OK",
    "EXIT_FAIL",
    "EXIT_USAGE",
    "EXIT_IO",
    "EXIT_DEGENERATE",
    "MetricSpec",
    "SpecError",
    "DegenerateInput",
    "parse_metric_spec",
    "load_metric_spec",
    "write_atomic",
    "main",
]

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO, EXIT_DEGENERATE = 0, 1, 2, 3, 4
PREFLIGHT_POINTS = 64


class SpecError(TwistGaugeError, ValueError):
    pass


class DegenerateInput(TwistGaugeError, ValueError):
    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = None if point is None else [float(v) for v in point]


# -- polynomial expressions ------------------------------------------------------------
_ALLOWED_BIN = (ast.Add, ast.Sub, ast.Mult, ast.Pow, ast.Div)


def _validate(node, n: int):
    if isinstance(node, ast.Expression):
        return _validate(node.body, n)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return
    if isinstance(node, ast.Name):
        if node.id.startswith("x") and node.id[1:].isdigit() and int(node.id[1:]) < n:
            return
        raise SpecError(f"unknown variable {node.id!r}; use x0..x{n - 1}")
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
        return _validate(node.operand, n)
    if isinstance(node, ast.BinOp) and isinstance(node.op, _ALLOWED_BIN):
        if isinstance(node.op, ast.Pow):
            exp = node.right
            if not (isinstance(exp, ast.Constant) and isinstance(exp.value, int) and exp.value >= 0):
                raise SpecError("exponents must be non-negative integer literals")
        if isinstance(node.op, ast.Div) and _has_variable(node.right):
            raise SpecError("division is only allowed by numbers")
        _validate(node.left, n)
        _validate(node.right, n)
        return
    raise SpecError(f"unsupported syntax in polynomial: {ast.dump(node)}")


def _has_variable(node) -> bool:
    return any(isinstance(m, ast.Name) for m in ast.walk(node))


def _evaluator(node):
    """Closure evaluating a validated expression tree on coordinate jets."""
    if isinstance(node, ast.Expression):
        return _evaluator(node.body)
    if isinstance(node, ast.Constant):
        v = float(node.value)
        return lambda X: v
    if isinstance(node, ast.Name):
        i = int(node.id[1:])
        return lambda X: X[i]
    if isinstance(node, ast.UnaryOp):
        f = _evaluator(node.operand)
        return (lambda X: -f(X)) if isinstance(node.op, ast.USub) else f
    left, right = _evaluator(node.left), _evaluator(node.right)
    if isinstance(node.op, ast.Add):
        return lambda X: left(X) + right(X)
    if isinstance(node.op, ast.Sub):
        return lambda X: left(X) - right(X)
    if isinstance(node.op, ast.Mult):
        return lambda X: left(X) * right(X)
    if isinstance(node.op, ast.Div):
        return lambda X: left(X) * (1.0 / right(X))
    p = int(node.right.value)

    def power(X):
        base, out = left(X), 1.0
        for _ in range(p):
            out = base * out
        return out

    return power


@dataclass(frozen=True)
class Polynomial:
    source: str
    n: int

    def __post_init__(self):
        tree = self._tree()
        _validate(tree, self.n)
        object.__setattr__(self, "_fn", _evaluator(tree))

    def _tree(self):
        try:
            return ast.parse(self.source.replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise SpecError(f"cannot parse polynomial {self.source!r}: {exc.msg}") from None

    def __call__(self, X):
        v = self._fn(X)
        return X.const(np.asarray(v, dtype=float)) if isinstance(v, float) else v


@dataclass(frozen=True)
class MetricSpec:
    """Parsed metric spec; see the module docstring for the text format."""

    dimension: int
    lower: tuple
    upper: tuple
    signature: tuple
    kind: str
    entries: dict = field(default_factory=dict)
    conformal_factor: Polynomial | None = None

    def _matrix(self, X):
        n = self.dimension
        rows = [[self.entries[(i, j)](X) if (i, j) in self.entries else np.zeros(()) for j in range(n)]
                for i in range(n)]
        return matrix(rows)

    def vielbein(self) -> FieldHandle:
        """e[a, μ] (principal square root of ηg for metric specs)."""
        n = self.dimension
        if self.kind == "vielbein":
            Om = self.conformal_factor

            def fn(X):
                e = self._matrix(X)
                return e * Om(X) if Om is not None else e

            return FieldHandle(fn, n, 0, name="e")
        return CF.vielbein_from_metric(self.metric())

    def metric(self) -> MetricField:
        if self.kind == "vielbein":
            return CF.metric_from_vielbein(self.vielbein())
        Om = self.conformal_factor

        def fn(X):
            g = self._matrix(X)
            if Om is None:
                return g
            w = Om(X)
            return g * (w * w)

        return MetricField.from_fn(fn, self.dimension, self.signature)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.uniform(self.lower, self.upper, size=(count, self.dimension))

    def preflight(self, rng: np.random.Generator, count: int = PREFLIGHT_POINTS) -> None:
        """Nondegeneracy and signature on seeded box points and the box corners."""
        pts = list(self.sample(rng, count))
        pts += [np.array(c) for c in np.array(np.meshgrid(*zip(self.lower, self.upper))).reshape(self.dimension, -1).T]
        g = self.metric()
        want = (sum(1 for s in self.signature if s > 0), sum(1 for s in self.signature if s < 0))
        for x in pts:
            gx = g.at(x)
            if not np.all(np.isfinite(gx)):
                raise DegenerateInput("metric is not finite", x)
            w = np.linalg.eigvalsh(0.5 * (gx + gx.T))
            scale = max(1.0, float(np.max(np.abs(w))))
            if np.min(np.abs(w)) <= 1e-8 * scale:
                raise DegenerateInput("metric is degenerate", x)
            if (int(np.sum(w > 0)), int(np.sum(w < 0))) != want:
                raise DegenerateInput("metric signature differs from the declared one", x)
            if self.kind == "metric":
                ev = np.linalg.eigvals(ETA @ gx)
                if np.any(ev.real <= 0):
                    raise DegenerateInput("η·g has no principal square root, so no vielbein is defined", x)


def _numbers(value: str, key: str) -> tuple:
    try:
        return tuple(float(t) for t in value.replace(",", " ").split())
    except ValueError:
        raise SpecError(f"{key}: expected numbers, got {value!r}") from None


def _signature(value: str) -> tuple:
    toks = value.replace(",", " ").split()
    if len(toks) == 1 and len(toks[0]) > 1:
        toks = list(toks[0])
    out = []
    for t in toks:
        if t in ("+", "+1", "1"):
            out.append(1)
        elif t in ("-", "-1"):
            out.append(-1)
        else:
            raise SpecError(f"signature: unexpected token {t!r}")
    return tuple(out)


def parse_metric_spec(text: str) -> MetricSpec:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in raw:
            raise SpecError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    n = int(raw.pop("dimension", "4"))
    if n != 4:
        raise SpecError("only 4-dimensional charts are supported")
    lower = _numbers(raw.pop("lower", "-0.5 " * n), "lower")
    upper = _numbers(raw.pop("upper", "0.5 " * n), "upper")
    if len(lower) != n or len(upper) != n or any(a >= b for a, b in zip(lower, upper)):
        raise SpecError("box bounds must give lower < upper in every coordinate")
    signature = _signature(raw.pop("signature", "+ - - -"))
    if signature != (1, -1, -1, -1):
        raise SpecError("only the signature + - - - is supported")
    kind = raw.pop("kind", "metric")
    if kind not in ("metric", "vielbein"):
        raise SpecError("kind must be 'metric' or 'vielbein'")
    cf = raw.pop("conformal_factor", None)
    conformal = Polynomial(cf, n) if cf is not None else None
    prefix = "g" if kind == "metric" else "e"
    entries: dict = {}
    for key, value in raw.items():
        if not (key.startswith(prefix) and len(key) == 3 and key[1:].isdigit()):
            raise SpecError(f"unknown key {key!r}")
        i, j = int(key[1]), int(key[2])
        if i >= n or j >= n:
            raise SpecError(f"{key}: index out of range")
        entries[(i, j)] = Polynomial(value, n)
    if kind == "metric":
        for (i, j) in list(entries):
            if i != j:
                if (j, i) in entries and entries[(j, i)].source != entries[(i, j)].source:
                    raise SpecError(f"g{i}{j} and g{j}{i} differ; give one of them")
                entries.setdefault((j, i), entries[(i, j)])
    if not entries:
        raise SpecError("no metric or vielbein entries given")
    return MetricSpec(n, lower, upper, signature, kind, entries, conformal)


def load_metric_spec(path: str) -> MetricSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_metric_spec(fh.read())


# -- output ----------------------------------------------------------------------------
def write_atomic(path: str, text: str) -> None:
    """Write via a temporary file in the target directory and rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        write_atomic(out, text)


def _block_rows(writer, p: int, x, name: str, values: np.ndarray) -> None:
    n = values.shape[0]
    for mu in range(n):
        for nu in range(mu + 1, n):
            comp = values[mu, nu]
            for idx in np.ndindex(*comp.shape):
                v = complex(comp[idx])
                writer.writerow([p, *(f"{c:.17g}" for c in x), name, mu, nu, ".".join(map(str, idx)),
                                 f"{v.real:.17g}", f"{v.imag:.17g}"])


REL_FLOOR = 1e-12


def _rel(a: float, b: float) -> float:
    """|a − b| / max(|a|, |b|, REL_FLOOR); the floor keeps round-off on vanishing densities at zero."""
    return abs(a - b) / max(abs(a), abs(b), REL_FLOOR)


def _compute_csv(kind: str, spec: MetricSpec, points: np.ndarray) -> tuple[str, dict]:
    e = spec.vielbein()
    T = CF.tractor_connection(e)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    summary: dict = {}
    if kind in ("tractor", "twistor"):
        if kind == "tractor":
            B = CF.curvature_blocks(T)
            blocks = {"f": B.f, "T": B.T, "W": B.W, "C": B.C}
        else:
            Bt = CF.twistor_curvature_blocks(CF.twistor_connection(e, tractor=T))
            blocks = {"upper_left": Bt.upper_left, "upper_right": Bt.upper_right,
                      "lower_left": Bt.lower_left, "lower_right": Bt.lower_right}
        w.writerow(["point", "x0", "x1", "x2", "x3", "block", "mu", "nu", "value_index", "real", "imag"])
        for p, x in enumerate(points):
            for name, f in blocks.items():
                vals = f.at(x)
                _block_rows(w, p, x, name, vals)
                summary[name] = max(summary.get(name, 0.0), float(np.max(np.abs(vals), initial=0.0)))
        return buf.getvalue(), summary
    L = CF.lagrangian_conformal(T, CF.twistor_connection(e, tractor=T), spec.metric())
    w.writerow(["point", "x0", "x1", "x2", "x3", "L_tractor", "L_twistor", "L_weyl",
                "rel_tractor_twistor", "rel_tractor_weyl", "rel_twistor_weyl"])
    worst = 0.0
    for p, x in enumerate(points):
        a, b, c = L.at(x)
        rels = (_rel(a, b), _rel(a, c), _rel(b, c))
        worst = max(worst, *rels)
        w.writerow([p, *(f"{v:.17g}" for v in x), *(f"{v:.17g}" for v in (a, b, c, *rels))])
    summary["max_pairwise_relative_difference"] = worst
    return buf.getvalue(), summary


# -- commands --------------------------------------------------------------------------
def _status_line(rec) -> str:
    err = "n/a" if rec.max_abs_error is None else f"{rec.max_abs_error:.3e}"
    extra = f"  [{rec.error}]" if rec.error else ""
    return f"{rec.status.upper():4}  {rec.check_id:<48} {err} {rec.comparator} {rec.tolerance:.1e}{extra}"


def _cmd_verify(args) -> int:
    from . import suites

    try:
        samples = suites.default_samples()
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = suites.run_suite(args.suite, args.seed, samples, args.tol,
                              on_record=lambda r: print(_status_line(r), flush=True))
    path = args.report or f"twistgauge-report-{args.suite}.json"
    try:
        write_atomic(path, json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        print(f"error: cannot write report {path}: {exc}", file=sys.stderr)
        return EXIT_IO
    n_fail = sum(r.status != "pass" for r in report.records)
    print(f"{args.suite}: {len(report.records) - n_fail}/{len(report.records)} passed "
          f"in {report.duration_s:.1f}s; report {path}")
    return EXIT_OK if report.passed else EXIT_FAIL


def _cmd_compute(args) -> int:
    try:
        spec = load_metric_spec(args.metric)
    except OSError as exc:
        print(f"error: cannot read metric spec: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SpecError, ValueError) as exc:
        print(f"error: invalid metric spec: {exc}", file=sys.stderr)
        return EXIT_USAGE
    rng = np.random.default_rng(args.seed)
    try:
        spec.preflight(np.random.default_rng([args.seed, 1]))
        text, summary = _compute_csv(args.kind, spec, spec.sample(rng, args.points))
    except DegenerateInput as exc:
        print(f"error: degenerate input: {exc} at point {exc.point}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (DegenerateSoldering, DegenerateMetric) as exc:
        pts = getattr(exc, "points", None)
        print(f"error: degenerate input: {exc}" + (f" at point {pts[0]}" if pts else ""), file=sys.stderr)
        return EXIT_DEGENERATE
    try:
        _emit(text, args.out)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    for k, v in summary.items():
        print(f"{k}: {v:.3e}", file=sys.stderr)
    return EXIT_OK


def _points_arg(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def build_parser() -> argparse.ArgumentParser:
    from .suites import DEFAULT_SEED, SAMPLES_ENV, SUITES

    p = argparse.ArgumentParser(prog="twistgauge", description=__doc__.split("\n", 1)[0])
    sub = p.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", help="run a verification suite",
                       epilog=f"The sample count comes from ${SAMPLES_ENV} (default 20).")
    v.add_argument("--suite", default="all", choices=("all",) + SUITES)
    v.add_argument("--seed", type=int, default=DEFAULT_SEED)
    v.add_argument("--tol", type=float, default=None, help="override every check's tolerance")
    v.add_argument("--report", default=None, help="JSON report path (default twistgauge-report-<suite>.json)")
    v.set_defaults(func=_cmd_verify)
    c = sub.add_parser("compute", help="curvature blocks or Lagrangian densities for a metric spec")
    c.add_argument("--kind", required=True, choices=("tractor", "twistor", "lagrangian"))
    c.add_argument("--metric", required=True, help="metric spec file")
    c.add_argument("--points", type=_points_arg, default=10)
    c.add_argument("--seed", type=int, default=DEFAULT_SEED)
    c.add_argument("--out", default=None, help="CSV path (default stdout)")
    c.set_defaults(func=_cmd_compute)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
