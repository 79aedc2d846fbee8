"""Scene files: declarative problem descriptions plus task running.

A scene is a flat, line-oriented text format.  ``#`` starts a comment and
blank lines are skipped; every other line is ``<head>: <payload>`` where
the head is a directive keyword, optionally followed by a name:

    chart: x y                      # coordinate names, once, declared first
    symbol: h(x y)                  # opaque scalar symbol and dependencies
    omega: h * dy^dx                # the symplectic form (a 2-form)
    foliation U: @x + 2*x*@y        # frame fields, separated by ';'
    foliation V: @y
    structure: U | V                # which frames play F1 and F2
    adapted: x | y - x^2            # optional: p's | q's, ';'-separated
    map shear: x, y + x^2 inverse x, y - x^2
    task gammas: christoffels frame=foliation

Geometric expressions extend the scalar grammar with ``@name`` for the
coordinate vector field, ``dname`` for the coordinate 1-form, and ``^``
acting as a wedge between forms (it stays integer power on scalars).

Task lines name one of the operations validate, hess, christoffels,
curvature, flat, para, push, lift, act-check, plot, followed by
``key=value`` arguments.  Running tasks yields a report that prints as
text or serializes to versioned, deterministic JSON (the per-task
``timing_ms`` field is the documented exception).
"""

from __future__ import annotations

import json
import re
import time

from .calculus import (
    CalculusError,
    Chart,
    DegreeError,
    KForm,
    SmoothMap,
    VectorField,
    coordinate_frame,
    d_coord,
)
from .lift import (
    LiftError,
    iterate_lift,
    lift_structure,
    lifted_action_check,
    DEFAULT_MAX_DIM,
)
from .plot import PlotError, Window, leaf_plot
from .structures import (
    BiLagError,
    christoffels,
    curvature,
    hess_nabla,
    is_flat,
    para_structure,
    push_structure,
    torsion,
    validate_bilagrangian,
)
from .symexpr import (
    Expr,
    ExprError,
    OpaqueSymbol,
    ParseError,
    Rat,
    UnknownIdentifier,
    Var,
    as_expr,
    check_seed,
    parse_expr,
    resolve_name,
    tokenize,
)
from .symplectic import SymplecticError, validate_symplectic

__all__ = [
    "SceneError",
    "Task",
    "Scene",
    "TaskOutcome",
    "SceneReport",
    "REPORT_FORMAT",
    "OPERATIONS",
    "loads",
    "load_scene",
    "run_task",
    "run_tasks",
]

REPORT_FORMAT = "bilag-report/1"

OPERATIONS = (
    "validate",
    "hess",
    "christoffels",
    "curvature",
    "flat",
    "para",
    "push",
    "lift",
    "act-check",
    "plot",
)

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class SceneError(Exception):
    """Malformed scene file; carries the source line when known."""

    def __init__(self, message: str, line: int = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


# ---------------------------------------------------------------------------
# geometric expressions: scalars, vector fields, and forms in one grammar


class _GeomParser:
    """Typed mirror of the scalar grammar.

    Values are scalar Expr, VectorField, or KForm.  ``@name`` is the
    coordinate vector field, ``dname`` the coordinate 1-form; ``^``
    wedges two forms and exponentiates scalars by integer literals.
    """

    def __init__(self, text: str, chart: Chart):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0
        self.chart = chart

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", self.text, len(self.text))
        self.pos += 1
        return tok

    def parse(self):
        value = self.expr()
        tok = self.peek()
        if tok is not None:
            raise ParseError("trailing input after expression", self.text, tok[2])
        return value

    @staticmethod
    def _kind(value):
        if isinstance(value, VectorField):
            return "vector field"
        if isinstance(value, KForm):
            return f"{value.degree}-form"
        return "scalar"

    def _combine(self, op, a, b, pos):
        try:
            if op == "+":
                if isinstance(a, (VectorField, KForm)) and type(a) is type(b):
                    return a + b
                if isinstance(a, Expr) and isinstance(b, Expr):
                    return a + b
            elif op == "-":
                if isinstance(a, (VectorField, KForm)) and type(a) is type(b):
                    return a - b
                if isinstance(a, Expr) and isinstance(b, Expr):
                    return a - b
            elif op == "*":
                if isinstance(a, Expr) and isinstance(b, Expr):
                    return a * b
                if isinstance(a, Expr) and isinstance(b, (VectorField, KForm)):
                    return b.scale(a)
                if isinstance(b, Expr) and isinstance(a, (VectorField, KForm)):
                    return a.scale(b)
                if isinstance(a, KForm) and isinstance(b, KForm):
                    raise ParseError("use '^' to wedge forms", self.text, pos)
            elif op == "/":
                if isinstance(b, Expr):
                    if isinstance(a, Expr):
                        return a / b
                    return a.scale(Rat(1) / b)
        except DegreeError as exc:
            raise ParseError(str(exc), self.text, pos) from None
        raise ParseError(
            f"cannot apply {op!r} to {self._kind(a)} and {self._kind(b)}",
            self.text, pos,
        )

    def expr(self):
        value = self.term()
        while True:
            tok = self.peek()
            if tok and tok[0] == "op" and tok[1] in "+-":
                self.next()
                rhs = self.term()
                value = self._combine(tok[1], value, rhs, tok[2])
            else:
                return value

    def term(self):
        value = self.factor()
        while True:
            tok = self.peek()
            if tok and tok[0] == "op" and tok[1] in "*/":
                self.next()
                rhs = self.factor()
                value = self._combine(tok[1], value, rhs, tok[2])
            else:
                return value

    def factor(self):
        sign = 1
        while True:
            tok = self.peek()
            if tok and tok[0] == "op" and tok[1] in "+-":
                self.next()
                if tok[1] == "-":
                    sign = -sign
            else:
                break
        value = self.power()
        return value if sign > 0 else -value

    def power(self):
        value = self.atom()
        while True:
            tok = self.peek()
            if not (tok and tok[0] == "op" and tok[1] == "^"):
                return value
            self.next()
            if isinstance(value, KForm):
                from .calculus import wedge

                rhs = self.atom()
                if not isinstance(rhs, KForm):
                    raise ParseError(
                        f"'^' after a form wedges another form, got {self._kind(rhs)}",
                        self.text, tok[2],
                    )
                value = wedge(value, rhs)
                continue
            if not isinstance(value, Expr):
                raise ParseError("cannot exponentiate a vector field", self.text, tok[2])
            neg = False
            t = self.next()
            if t[0] == "op" and t[1] == "-":
                neg = True
                t = self.next()
            if t[0] != "int":
                raise ParseError("scalar exponent must be an integer literal",
                                 self.text, t[2])
            n = int(t[1])
            value = value ** (-n if neg else n)
            return value

    def atom(self):
        tok = self.next()
        kind, value, pos = tok
        if kind == "int":
            return Rat(int(value))
        if kind == "op" and value == "@":
            t = self.next()
            if t[0] != "name" or t[1] not in self.chart.names:
                raise ParseError("'@' must be followed by a coordinate name",
                                 self.text, pos)
            return coordinate_frame(self.chart)[self.chart.index(t[1])]
        if kind == "name":
            try:
                return resolve_name(value, self.chart.names, self.chart.symbols)
            except KeyError:
                pass
            if len(value) > 1 and value.startswith("d") and value[1:] in self.chart.names:
                return d_coord(self.chart, self.chart.index(value[1:]))
            raise UnknownIdentifier(f"unknown identifier {value!r}", self.text, pos)
        if kind == "op" and value == "(":
            e = self.expr()
            tok = self.next()
            if tok[0] != "op" or tok[1] != ")":
                raise ParseError("expected ')'", self.text, tok[2])
            return e
        raise ParseError(f"unexpected token {value!r}", self.text, pos)


def parse_geometric(text: str, chart: Chart):
    return _GeomParser(text, chart).parse()


# ---------------------------------------------------------------------------
# scene model


class Task:
    """A named operation with raw key=value arguments."""

    __slots__ = ("name", "operation", "args", "line")

    def __init__(self, name: str, operation: str, args: dict, line: int = None):
        self.name = name
        self.operation = operation
        self.args = dict(args)
        self.line = line

    def __repr__(self):
        args = " ".join(f"{k}={v}" for k, v in self.args.items())
        return f"Task({self.name}: {self.operation}{' ' + args if args else ''})"


class Scene:
    """A loaded scene: chart, form, frames, maps, and declared tasks."""

    def __init__(self, name, chart, omega_form, foliations, f1_name, f2_name,
                 adapted, maps, tasks):
        self.name = name
        self.chart = chart
        self.omega_form = omega_form
        self.foliations = dict(foliations)
        self.f1_name = f1_name
        self.f2_name = f2_name
        self.adapted = adapted
        self.maps = dict(maps)
        self.tasks = list(tasks)
        self._structure = None

    def structure(self):
        """The validated bi-Lagrangian structure (cached); may raise."""
        if self._structure is None:
            omega = validate_symplectic(self.omega_form)
            self._structure = validate_bilagrangian(
                omega,
                self.foliations[self.f1_name],
                self.foliations[self.f2_name],
                self.adapted,
            )
        return self._structure

    def task(self, name: str) -> Task:
        for t in self.tasks:
            if t.name == name:
                return t
        raise SceneError(f"scene has no task named {name!r}")

    def frame_labels(self):
        """One label per combined-frame field, derived from foliation names."""
        labels = []
        for fol_name in (self.f1_name, self.f2_name):
            fields = self.foliations[fol_name]
            if len(fields) == 1:
                labels.append(fol_name)
            else:
                labels.extend(f"{fol_name}{i + 1}" for i in range(len(fields)))
        return labels

    def __repr__(self):
        return f"Scene({self.name}, chart={self.chart.names})"


def _parse_symbol_decl(payload: str, chart_names, line: int) -> OpaqueSymbol:
    m = re.match(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*\(([^)]*)\)\s*$", payload)
    if not m:
        raise SceneError(f"malformed symbol declaration {payload!r}; "
                         "expected name(dep dep ...)", line)
    name, deps_raw = m.group(1), m.group(2)
    deps = [d for d in re.split(r"[,\s]+", deps_raw.strip()) if d]
    if not deps:
        raise SceneError(f"symbol {name!r} needs at least one dependency", line)
    for d in deps:
        if d not in chart_names:
            raise SceneError(f"symbol {name!r} depends on {d!r}, "
                             "which is not a chart coordinate", line)
    return OpaqueSymbol(name, deps)


def _split_head(stripped: str, line: int):
    head, sep, payload = stripped.partition(":")
    if not sep:
        raise SceneError(f"missing ':' in directive {stripped!r}", line)
    parts = head.split()
    if len(parts) == 1:
        return parts[0], None, payload.strip()
    if len(parts) == 2:
        return parts[0], parts[1], payload.strip()
    raise SceneError(f"malformed directive head {head!r}", line)


def loads(text: str, name: str = "<scene>") -> Scene:
    """Parse a scene from a string.  See the module docstring for the format."""
    records = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        records.append((lineno, *_split_head(stripped, lineno)))

    chart_rec = [r for r in records if r[1] == "chart"]
    if len(chart_rec) != 1:
        raise SceneError("scene needs exactly one chart declaration",
                         chart_rec[1][0] if len(chart_rec) > 1 else None)
    lineno, _, label, payload = chart_rec[0]
    if label is not None:
        raise SceneError("chart takes no name", lineno)
    chart_names = payload.split()
    if not chart_names:
        raise SceneError("chart needs at least one coordinate name", lineno)
    for n in chart_names:
        if not _NAME_RE.match(n):
            raise SceneError(f"bad coordinate name {n!r}", lineno)
    if len(set(chart_names)) != len(chart_names):
        raise SceneError("duplicate coordinate names", lineno)

    symbols = []
    for lineno, kind, label, payload in records:
        if kind != "symbol":
            continue
        if label is not None:
            raise SceneError("symbol takes no name before ':'", lineno)
        sym = _parse_symbol_decl(payload, chart_names, lineno)
        if any(s.name == sym.name for s in symbols):
            raise SceneError(f"symbol {sym.name!r} declared twice", lineno)
        symbols.append(sym)
    chart = Chart(chart_names, tuple(symbols))

    omega_form = None
    foliations = {}
    f1_name = f2_name = None
    adapted = None
    maps = {}
    tasks = []

    def geometric(payload, lineno, want):
        try:
            value = parse_geometric(payload, chart)
        except ExprError as exc:
            raise SceneError(str(exc), lineno) from None
        if want == "field" and not isinstance(value, VectorField):
            raise SceneError(f"expected a vector field, got "
                             f"{_GeomParser._kind(value)}: {payload!r}", lineno)
        if want == "2-form" and not (isinstance(value, KForm) and value.degree == 2):
            raise SceneError(f"expected a 2-form, got "
                             f"{_GeomParser._kind(value)}: {payload!r}", lineno)
        return value

    def scalar(payload, lineno):
        try:
            return parse_expr(payload, chart.names, chart.symbols)
        except ExprError as exc:
            raise SceneError(str(exc), lineno) from None

    for lineno, kind, label, payload in records:
        if kind in ("chart", "symbol"):
            continue
        if kind == "omega":
            if omega_form is not None:
                raise SceneError("omega declared twice", lineno)
            omega_form = geometric(payload, lineno, "2-form")
        elif kind == "foliation":
            if not label:
                raise SceneError("foliation needs a name: 'foliation NAME: ...'", lineno)
            if label in foliations:
                raise SceneError(f"foliation {label!r} declared twice", lineno)
            fields = [geometric(p.strip(), lineno, "field")
                      for p in payload.split(";") if p.strip()]
            if not fields:
                raise SceneError(f"foliation {label!r} has no fields", lineno)
            foliations[label] = tuple(fields)
        elif kind == "structure":
            if f1_name is not None:
                raise SceneError("structure declared twice", lineno)
            sides = [p.strip() for p in payload.split("|")]
            if len(sides) != 2 or not all(sides):
                raise SceneError("structure must read 'NAME | NAME'", lineno)
            f1_name, f2_name = sides
        elif kind == "adapted":
            if adapted is not None:
                raise SceneError("adapted declared twice", lineno)
            sides = payload.split("|")
            if len(sides) != 2:
                raise SceneError("adapted must read 'p; ... | q; ...'", lineno)
            ps = [scalar(p.strip(), lineno) for p in sides[0].split(";") if p.strip()]
            qs = [scalar(q.strip(), lineno) for q in sides[1].split(";") if q.strip()]
            if len(ps) != len(qs):
                raise SceneError(
                    f"adapted needs equally many p's and q's, got {len(ps)} and {len(qs)}",
                    lineno)
            adapted = tuple(ps) + tuple(qs)
        elif kind == "map":
            if not label:
                raise SceneError("map needs a name: 'map NAME: ...'", lineno)
            if label in maps:
                raise SceneError(f"map {label!r} declared twice", lineno)
            halves = re.split(r"\binverse\b", payload)
            if len(halves) != 2:
                raise SceneError("map must read 'comps inverse comps'", lineno)
            comps = [scalar(c.strip(), lineno) for c in halves[0].split(",") if c.strip()]
            invs = [scalar(c.strip(), lineno) for c in halves[1].split(",") if c.strip()]
            if len(comps) != chart.dim or len(invs) != chart.dim:
                raise SceneError(
                    f"map {label!r} needs {chart.dim} forward and inverse components",
                    lineno)
            try:
                maps[label] = SmoothMap(chart, chart, comps, invs)
            except (CalculusError, ExprError) as exc:
                raise SceneError(f"map {label!r}: {exc}", lineno) from None
        elif kind == "task":
            if not label:
                raise SceneError("task needs a name: 'task NAME: operation ...'", lineno)
            if any(t.name == label for t in tasks):
                raise SceneError(f"task {label!r} declared twice", lineno)
            words = payload.split()
            if not words:
                raise SceneError(f"task {label!r} names no operation", lineno)
            op = words[0]
            if op not in OPERATIONS:
                raise SceneError(
                    f"unknown operation {op!r}; expected one of {', '.join(OPERATIONS)}",
                    lineno)
            args = {}
            for w in words[1:]:
                key, sep, value = w.partition("=")
                if not sep or not key:
                    raise SceneError(f"task argument {w!r} must be key=value", lineno)
                args[key] = value
            tasks.append(Task(label, op, args, lineno))
        else:
            raise SceneError(f"unknown directive {kind!r}", lineno)

    if omega_form is None:
        raise SceneError("scene declares no omega")
    if f1_name is None:
        raise SceneError("scene declares no structure line")
    for fol in (f1_name, f2_name):
        if fol not in foliations:
            raise SceneError(f"structure references undeclared foliation {fol!r}")
    for t in tasks:
        if t.operation in ("push", "act-check"):
            target = t.args.get("map")
            if not target:
                raise SceneError(f"task {t.name!r} needs a map=NAME argument", t.line)
            if target not in maps:
                raise SceneError(
                    f"task {t.name!r} references undeclared map {target!r}", t.line)
    return Scene(name, chart, omega_form, foliations, f1_name, f2_name,
                 adapted, maps, tasks)


def load_scene(path) -> Scene:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    import os

    return loads(text, name=os.path.splitext(os.path.basename(str(path)))[0])


# ---------------------------------------------------------------------------
# running tasks


class TaskOutcome:
    """Result of one task: a status, a payload, and human-readable lines.

    Statuses: ``pass`` and ``fail`` for tasks that assert something,
    ``computed`` for tasks that only report a result, ``error`` when the
    operation could not run at all.  ``ok`` is true for pass/computed.
    """

    __slots__ = ("name", "operation", "status", "payload", "messages", "timing_ms")

    def __init__(self, name, operation, status, payload=None, messages=(), timing_ms=0):
        self.name = name
        self.operation = operation
        self.status = status
        self.payload = payload or {}
        self.messages = list(messages)
        self.timing_ms = timing_ms

    @property
    def ok(self) -> bool:
        return self.status in ("pass", "computed")

    def to_dict(self):
        return {
            "name": self.name,
            "operation": self.operation,
            "status": self.status,
            "payload": self.payload,
            "messages": self.messages,
            "timing_ms": self.timing_ms,
        }


class SceneReport:
    """All task outcomes for a scene, serializable as text or JSON."""

    def __init__(self, scene: Scene, outcomes):
        self.scene = scene
        self.outcomes = list(outcomes)

    @property
    def ok(self) -> bool:
        return all(o.ok for o in self.outcomes)

    def to_dict(self):
        return {
            "format": REPORT_FORMAT,
            "scene": self.scene.name,
            "chart": list(self.scene.chart.names),
            "seed": check_seed(),
            "ok": self.ok,
            "tasks": [o.to_dict() for o in self.outcomes],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_text(self) -> str:
        lines = [f"scene {self.scene.name} (chart {' '.join(self.scene.chart.names)})"]
        for o in self.outcomes:
            lines.append(f"task {o.name} [{o.operation}]: {o.status}")
            for msg in o.messages:
                lines.append(f"  {msg}")
        lines.append(f"overall: {'pass' if self.ok else 'FAIL'}")
        return "\n".join(lines) + "\n"


def _fmt(e) -> str:
    return str(as_expr(e).normal())


def _field_payload(field: VectorField):
    return [_fmt(c) for c in field.components]


def _matrix_payload(mat):
    return [[_fmt(e) for e in row] for row in mat]


def _structure_payload(s):
    return {
        "chart": list(s.chart.names),
        "omega": _matrix_payload(s.omega.form.matrix()),
        "f1": [_field_payload(f) for f in s.f1.fields],
        "f2": [_field_payload(f) for f in s.f2.fields],
        "adapted": [_fmt(a) for a in s.adapted],
    }


def _parse_bool(raw: str, task: Task, key: str) -> bool:
    low = raw.lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise SceneError(f"task {task.name!r}: {key} must be true or false, got {raw!r}")


def _run_validate(scene, task, options):
    try:
        s = scene.structure()
    except (BiLagError,) as exc:
        report = exc.report
        payload = {
            "ok": False,
            "checks": [
                {"name": c.name, "passed": c.passed, "detail": c.detail}
                for c in report.checks
            ],
        }
        messages = [repr(c) for c in report.failures()]
        return "fail", payload, messages
    except SymplecticError as exc:
        return "fail", {"ok": False, "checks": []}, [str(exc)]
    payload = {
        "ok": True,
        "checks": [
            {"name": c.name, "passed": c.passed, "detail": c.detail}
            for c in s.report.checks
        ],
        "omega_witness": _fmt(s.omega.witness),
        "omega_warnings": list(s.omega.warnings),
    }
    messages = [f"{len(s.report.checks)} checks passed"]
    if s.omega.warnings:
        messages += [f"warning: {w}" for w in s.omega.warnings]
    return "pass", payload, messages


def _run_hess(scene, task, options):
    s = scene.structure()
    labels = scene.frame_labels()
    fields = s.frame
    table = {}
    messages = []
    for i, ei in enumerate(fields):
        for j, ej in enumerate(fields):
            w = hess_nabla(s, ei, ej)
            key = f"nabla_{labels[i]} {labels[j]}"
            table[key] = _field_payload(w)
            messages.append(f"{key} = ({', '.join(table[key])})")
    payload = {
        "frame": {labels[i]: _field_payload(f) for i, f in enumerate(fields)},
        "table": table,
    }
    return "computed", payload, messages


def _run_christoffels(scene, task, options):
    frame_kind = task.args.get("frame", "foliation")
    if frame_kind not in ("foliation", "coordinate"):
        raise SceneError(f"task {task.name!r}: frame must be foliation or coordinate")
    s = scene.structure()
    conn = christoffels(s, frame_kind)
    if frame_kind == "foliation":
        labels = scene.frame_labels()
    else:
        labels = list(scene.chart.names)
    n = len(conn.frame)
    table = {}
    messages = []
    for i in range(n):
        for j in range(n):
            for k in range(n):
                value = conn.gamma[i][j][k]
                key = f"Gamma^{k + 1}_{i + 1}{j + 1}"
                table[key] = _fmt(value)
                if table[key] != "0":
                    messages.append(f"{key} = {table[key]}")
    if not messages:
        messages.append("all coefficients vanish")
    payload = {
        "frame_kind": frame_kind,
        "frame": {labels[i]: _field_payload(f) for i, f in enumerate(conn.frame)},
        "table": table,
    }
    return "computed", payload, messages


def _run_curvature(scene, task, options):
    s = scene.structure()
    curv = curvature(christoffels(s))
    entries = {}
    messages = []
    for (i, j, k, l), value in curv.nonzero_entries():
        key = f"R^{l + 1}_{i + 1}{j + 1}{k + 1}"
        entries[key] = _fmt(value)
        messages.append(f"{key} = {entries[key]}")
    if not entries:
        messages.append("curvature vanishes")
    payload = {"nonzero": entries, "zero": not entries}
    return "computed", payload, messages


def _run_flat(scene, task, options):
    s = scene.structure()
    result = is_flat(s)
    payload = {
        "flat": result.flat,
        "witnesses": {
            f"R^{l + 1}_{i + 1}{j + 1}{k + 1}": _fmt(e)
            for (i, j, k, l), e in result.witnesses
        },
    }
    messages = [f"flat: {result.flat}"]
    messages += [f"{k} = {v}" for k, v in sorted(payload["witnesses"].items())]
    if "expect" in task.args:
        expect = _parse_bool(task.args["expect"], task, "expect")
        status = "pass" if result.flat == expect else "fail"
        messages.append(f"expected flat={expect}: {status}")
        return status, payload, messages
    return "computed", payload, messages


def _run_para(scene, task, options):
    s = scene.structure()
    para = para_structure(s)
    payload = {"F": _matrix_payload(para.F), "G": _matrix_payload(para.G)}
    messages = ["F = " + json.dumps(payload["F"]), "G = " + json.dumps(payload["G"])]
    return "computed", payload, messages


def _run_push(scene, task, options):
    s = scene.structure()
    psi = scene.maps[task.args["map"]]
    pushed = push_structure(psi, s)
    payload = {"map": task.args["map"], "pushed": _structure_payload(pushed)}
    messages = [
        f"pushed omega: {json.dumps(payload['pushed']['omega'])}",
        f"pushed F1: {json.dumps(payload['pushed']['f1'])}",
        f"pushed F2: {json.dumps(payload['pushed']['f2'])}",
        "revalidated: ok",
    ]
    return "computed", payload, messages


def _run_lift(scene, task, options):
    k = int(task.args.get("k", "1"))
    fibers = task.args.get("fibers")
    s = scene.structure()
    max_dim = options.get("max_dim", DEFAULT_MAX_DIM)
    if fibers is not None:
        if k != 1:
            raise SceneError(f"task {task.name!r}: explicit fibers only apply to k=1")
        lifted = lift_structure(s, tuple(fibers.split(",")))
    else:
        lifted = iterate_lift(s, k, max_dim)
    payload = {"k": k, "lifted": _structure_payload(lifted)}
    messages = [
        f"lifted chart: {' '.join(lifted.chart.names)}",
        f"lifted omega: {json.dumps(payload['lifted']['omega'])}",
        "revalidated: ok",
    ]
    return "computed", payload, messages


def _run_act_check(scene, task, options):
    s = scene.structure()
    psi = scene.maps[task.args["map"]]
    result = lifted_action_check(psi, s)
    payload = {
        "map": task.args["map"],
        "equal": result.equal,
        "omega_match": result.omega_match,
        "fiber_block": _matrix_payload(result.lifted_map.fiber_block),
        "preserves_form": result.lifted_map.preserves_form,
        "verdicts": [
            {"label": v.label, "ok": v.ok, "detail": v.detail}
            for v in result.verdicts
        ],
    }
    messages = [f"omega agreement: {result.omega_match}"]
    messages += [repr(v) for v in result.verdicts]
    messages.append(f"actions agree: {result.equal}")
    expect = _parse_bool(task.args.get("expect", "true"), task, "expect")
    status = "pass" if result.equal == expect else "fail"
    return status, payload, messages


def _run_plot(scene, task, options):
    s = scene.structure()
    if s.chart.dim != 2:
        raise PlotError(f"leaf plots need a 2-dimensional chart, got {s.chart.dim}")
    known = {"out", "window", "leaves", "steps"}
    symbol_names = {sym.name for sym in scene.chart.symbols}
    bindings = {}
    for key, raw in task.args.items():
        if key in known:
            continue
        if key in symbol_names:
            bindings[key] = parse_expr(raw, scene.chart.names, ())
        else:
            raise SceneError(f"task {task.name!r}: unknown plot argument {key!r}")
    window = Window()
    if "window" in task.args:
        parts = task.args["window"].split(",")
        if len(parts) != 4:
            raise SceneError(f"task {task.name!r}: window must be x0,x1,y0,y1")
        window = Window(*(float(p) for p in parts))
    leaves = int(task.args.get("leaves", "9"))
    steps = int(task.args.get("steps", "240"))
    out = options.get("out") or task.args.get("out")
    if not out:
        raise SceneError(f"task {task.name!r}: plot needs out=PATH or --out")
    svg = leaf_plot(s.f1.fields[0], s.f2.fields[0], window,
                    leaves=leaves, steps=steps, bindings=bindings)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(svg)
    payload = {"out": str(out), "bytes": len(svg.encode("utf-8"))}
    return "computed", payload, [f"wrote {out} ({payload['bytes']} bytes)"]


_RUNNERS = {
    "validate": _run_validate,
    "hess": _run_hess,
    "christoffels": _run_christoffels,
    "curvature": _run_curvature,
    "flat": _run_flat,
    "para": _run_para,
    "push": _run_push,
    "lift": _run_lift,
    "act-check": _run_act_check,
    "plot": _run_plot,
}


def run_task(scene: Scene, task: Task, **options) -> TaskOutcome:
    """Run one task; operation failures become fail/error outcomes."""
    runner = _RUNNERS[task.operation]
    start = time.perf_counter()
    try:
        status, payload, messages = runner(scene, task, options)
    except BiLagError as exc:
        status, payload = "fail", {"checks": [
            {"name": c.name, "passed": c.passed, "detail": c.detail}
            for c in exc.report.checks
        ]}
        messages = [repr(c) for c in exc.report.failures()]
    except (SceneError, SymplecticError, LiftError, PlotError, CalculusError,
            ExprError, ValueError, OSError) as exc:
        status, payload, messages = "error", {}, [f"{type(exc).__name__}: {exc}"]
    ms = int((time.perf_counter() - start) * 1000)
    return TaskOutcome(task.name, task.operation, status, payload, messages, ms)


def run_tasks(scene: Scene, names=None, **options) -> SceneReport:
    """Run the named tasks (default: all declared tasks, in order)."""
    if names is None:
        tasks = list(scene.tasks)
    else:
        tasks = [scene.task(n) for n in names]
    return SceneReport(scene, [run_task(scene, t, **options) for t in tasks])
