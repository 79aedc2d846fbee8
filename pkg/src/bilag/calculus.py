"""Vector fields, differential forms, and smooth maps on coordinate charts.

Conventions fixed throughout the package:

* A k-form stores one coefficient per strictly increasing index tuple.
* The wedge of 1-forms follows the determinant convention without 1/k!
  factors: ``(a ^ b)(X, Y) = a(X) b(Y) - a(Y) b(X)``.
* Smooth maps carry explicit inverse components and are validated on
  construction (round trip to the identity, nonvanishing Jacobian
  determinant).

Linear solves are exact: Gaussian elimination over the rational-function
field with zero tests through normal forms, plus Cramer determinants, so a
frame that is singular only on a measure-zero set is usable away from it,
with its determinant showing up in denominators.
"""

from __future__ import annotations


from .symexpr import (
    Expr,
    Var,
    ZERO,
    ONE,
    as_expr,
    diff,
    directional,
    equal_zero,
    is_zero,
    substitute,
)

__all__ = [
    "CalculusError",
    "ChartMismatch",
    "DegreeError",
    "SingularFrame",
    "Chart",
    "VectorField",
    "KForm",
    "SmoothMap",
    "coordinate_frame",
    "zero_field",
    "basis_form",
    "d_coord",
    "form_from_matrix",
    "lie_bracket",
    "wedge",
    "exterior_d",
    "interior_product",
    "lie_derivative_form",
    "pushforward_field",
    "pullback_form",
    "frame_decompose",
    "span_membership",
    "FrameBasis",
    "frame_rank_full",
    "sym_det",
    "sym_solve",
    "sym_inverse",
]


class CalculusError(Exception):
    pass


class ChartMismatch(CalculusError):
    pass


class DegreeError(CalculusError):
    pass


class SingularFrame(CalculusError):
    pass


class Chart:
    """An ordered tuple of coordinate names plus the opaque symbols in scope."""

    __slots__ = ("names", "symbols")

    def __init__(self, names, symbols=()):
        self.names = tuple(names)
        self.symbols = tuple(symbols)
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate coordinate names in {self.names}")
        for sym in self.symbols:
            for dep in sym.deps:
                if dep not in self.names:
                    raise ValueError(
                        f"symbol {sym.name!r} depends on {dep!r} which is not a coordinate"
                    )

    @property
    def dim(self) -> int:
        return len(self.names)

    def coord(self, i: int) -> Expr:
        return Var(self.names[i])

    def coords(self):
        return tuple(Var(n) for n in self.names)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def extend(self, extra_names, extra_symbols=()) -> "Chart":
        return Chart(self.names + tuple(extra_names), self.symbols + tuple(extra_symbols))

    def __eq__(self, other):
        return isinstance(other, Chart) and self.names == other.names

    def __hash__(self):
        return hash(self.names)

    def __repr__(self):
        return f"Chart{self.names}"


def _require_same_chart(*objs):
    charts = {o.chart.names for o in objs}
    if len(charts) > 1:
        raise ChartMismatch(f"objects live on different charts: {sorted(charts)}")


class VectorField:
    """A vector field written in the coordinate frame of its chart."""

    __slots__ = ("chart", "components")

    def __init__(self, chart: Chart, components):
        self.chart = chart
        self.components = tuple(as_expr(c) for c in components)
        if len(self.components) != chart.dim:
            raise ValueError(
                f"expected {chart.dim} components, got {len(self.components)}"
            )

    def __add__(self, other: "VectorField") -> "VectorField":
        _require_same_chart(self, other)
        return VectorField(
            self.chart,
            tuple(a + b for a, b in zip(self.components, other.components)),
        )

    def __sub__(self, other: "VectorField") -> "VectorField":
        _require_same_chart(self, other)
        return VectorField(
            self.chart,
            tuple(a - b for a, b in zip(self.components, other.components)),
        )

    def __neg__(self) -> "VectorField":
        return VectorField(self.chart, tuple(-c for c in self.components))

    def scale(self, f) -> "VectorField":
        f = as_expr(f)
        return VectorField(self.chart, tuple(f * c for c in self.components))

    def __rmul__(self, f):
        return self.scale(f)

    def apply(self, f: Expr) -> Expr:
        """Directional derivative of a scalar."""
        return directional(self.components, self.chart.names, f)

    def is_zero(self) -> bool:
        return all(is_zero(c) for c in self.components)

    def __str__(self):
        parts = []
        for c, name in zip(self.components, self.chart.names):
            if is_zero(c):
                continue
            parts.append(f"({c})*@{name}")
        return " + ".join(parts) if parts else "0"

    __repr__ = __str__


def zero_field(chart: Chart) -> VectorField:
    return VectorField(chart, (ZERO,) * chart.dim)


def coordinate_frame(chart: Chart):
    """The tuple of coordinate vector fields."""
    fields = []
    for i in range(chart.dim):
        comps = [ZERO] * chart.dim
        comps[i] = ONE
        fields.append(VectorField(chart, comps))
    return tuple(fields)


class KForm:
    """Differential k-form; coefficients indexed by increasing index tuples."""

    __slots__ = ("chart", "degree", "coeffs")

    def __init__(self, chart: Chart, degree: int, coeffs: dict):
        # degrees above the chart dimension are allowed; such forms are
        # necessarily zero since no strictly increasing index tuple exists
        if degree < 0:
            raise DegreeError(f"negative form degree {degree}")
        self.chart = chart
        self.degree = degree
        clean = {}
        for idx, c in coeffs.items():
            idx = tuple(idx)
            if len(idx) != degree:
                raise DegreeError(f"index {idx} has wrong length for degree {degree}")
            if any(idx[i] >= idx[i + 1] for i in range(len(idx) - 1)):
                raise ValueError(f"index {idx} is not strictly increasing")
            if any(j < 0 or j >= chart.dim for j in idx):
                raise ValueError(f"index {idx} out of chart range")
            c = as_expr(c)
            if isinstance(c, type(ZERO)) and getattr(c, "value", None) == 0:
                continue
            clean[idx] = c
        self.coeffs = clean

    @staticmethod
    def scalar(chart: Chart, value) -> "KForm":
        return KForm(chart, 0, {(): as_expr(value)})

    def coefficient(self, idx) -> Expr:
        """Fully antisymmetric coefficient for an arbitrary index tuple."""
        idx = tuple(idx)
        if len(set(idx)) != len(idx):
            return ZERO
        order = tuple(sorted(idx))
        sign = _perm_sign_to_sorted(idx)
        base = self.coeffs.get(order, ZERO)
        return base if sign == 1 else -base

    def __add__(self, other: "KForm") -> "KForm":
        _require_same_chart(self, other)
        if self.degree != other.degree:
            raise DegreeError("cannot add forms of different degree")
        coeffs = dict(self.coeffs)
        for idx, c in other.coeffs.items():
            coeffs[idx] = coeffs.get(idx, ZERO) + c
        return KForm(self.chart, self.degree, coeffs)

    def __sub__(self, other: "KForm") -> "KForm":
        return self + other.scale(-1)

    def __neg__(self) -> "KForm":
        return self.scale(-1)

    def scale(self, f) -> "KForm":
        f = as_expr(f)
        return KForm(self.chart, self.degree, {i: f * c for i, c in self.coeffs.items()})

    def __rmul__(self, f):
        return self.scale(f)

    def __call__(self, *fields: VectorField) -> Expr:
        """Evaluate on k vector fields (determinant convention)."""
        if len(fields) != self.degree:
            raise DegreeError(
                f"degree-{self.degree} form applied to {len(fields)} fields"
            )
        if self.degree == 0:
            return self.coeffs.get((), ZERO)
        _require_same_chart(self, *fields)
        total = ZERO
        for idx, c in self.coeffs.items():
            minor = [[f.components[i] for f in fields] for i in idx]
            total = total + c * _small_det(minor)
        return total

    def is_zero(self) -> bool:
        return all(is_zero(c) for c in self.coeffs.values())

    def matrix(self):
        """For a 2-form: the full antisymmetric coefficient matrix."""
        if self.degree != 2:
            raise DegreeError("matrix() requires a 2-form")
        m = self.chart.dim
        rows = []
        for a in range(m):
            row = []
            for b in range(m):
                if a == b:
                    row.append(ZERO)
                elif a < b:
                    row.append(self.coeffs.get((a, b), ZERO))
                else:
                    row.append(-self.coeffs.get((b, a), ZERO))
            rows.append(tuple(row))
        return tuple(rows)

    def __str__(self):
        if not self.coeffs:
            return "0"
        names = self.chart.names
        parts = []
        for idx in sorted(self.coeffs):
            c = self.coeffs[idx]
            basis = "^".join(f"d{names[i]}" for i in idx) or "1"
            parts.append(f"({c})*{basis}" if idx else f"({c})")
        return " + ".join(parts)

    __repr__ = __str__


def basis_form(chart: Chart, idx) -> KForm:
    """The basis form dx_{i1} ^ ... ^ dx_{ik} for an increasing index tuple."""
    return KForm(chart, len(tuple(idx)), {tuple(idx): ONE})


def d_coord(chart: Chart, i: int) -> KForm:
    return KForm(chart, 1, {(i,): ONE})


def form_from_matrix(chart: Chart, mat) -> KForm:
    """Build a 2-form from an antisymmetric coefficient matrix."""
    coeffs = {}
    m = chart.dim
    for a in range(m):
        for b in range(a + 1, m):
            coeffs[(a, b)] = as_expr(mat[a][b])
    return KForm(chart, 2, coeffs)


def _perm_sign_to_sorted(idx) -> int:
    sign = 1
    idx = list(idx)
    for i in range(len(idx)):
        for j in range(i + 1, len(idx)):
            if idx[i] > idx[j]:
                sign = -sign
    return sign


def _small_det(rows) -> Expr:
    """Determinant by cofactor expansion; fine for the k x k minors of forms."""
    n = len(rows)
    if n == 0:
        return ONE
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    total = ZERO
    for j in range(n):
        entry = rows[0][j]
        if isinstance(entry, type(ZERO)) and getattr(entry, "value", None) == 0:
            continue
        minor = [row[:j] + row[j + 1:] for row in rows[1:]]
        term = entry * _small_det(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


# ---------------------------------------------------------------------------
# operations


def lie_bracket(x: VectorField, y: VectorField) -> VectorField:
    """[X, Y]^j = X(Y^j) - Y(X^j)."""
    _require_same_chart(x, y)
    comps = tuple(
        x.apply(y.components[j]) - y.apply(x.components[j])
        for j in range(x.chart.dim)
    )
    return VectorField(x.chart, comps)


def wedge(a: KForm, b: KForm) -> KForm:
    """Wedge product under the determinant convention (no 1/k! factors)."""
    _require_same_chart(a, b)
    p, q = a.degree, b.degree
    coeffs: dict = {}
    for ia, ca in a.coeffs.items():
        for ib, cb in b.coeffs.items():
            if set(ia) & set(ib):
                continue
            merged = ia + ib
            sign = _perm_sign_to_sorted(merged)
            key = tuple(sorted(merged))
            term = ca * cb if sign == 1 else -(ca * cb)
            coeffs[key] = coeffs.get(key, ZERO) + term
    return KForm(a.chart, p + q, coeffs)


def exterior_d(a: KForm) -> KForm:
    """Exterior derivative."""
    chart = a.chart
    coeffs: dict = {}
    for idx, c in a.coeffs.items():
        for j in range(chart.dim):
            if j in idx:
                continue
            dc = diff(c, chart.names[j])
            if is_zero(dc):
                continue
            pos = sum(1 for i in idx if i < j)
            new_idx = tuple(sorted(idx + (j,)))
            term = dc if pos % 2 == 0 else -dc
            coeffs[new_idx] = coeffs.get(new_idx, ZERO) + term
    return KForm(chart, a.degree + 1, coeffs)


def interior_product(x: VectorField, a: KForm) -> KForm:
    """Contraction i_X a in the first slot; degree 0 input is an error."""
    _require_same_chart(x, a)
    if a.degree == 0:
        raise DegreeError("interior product with a 0-form")
    coeffs: dict = {}
    for idx, c in a.coeffs.items():
        for r, i in enumerate(idx):
            term = c * x.components[i]
            if r % 2 == 1:
                term = -term
            key = idx[:r] + idx[r + 1:]
            coeffs[key] = coeffs.get(key, ZERO) + term
    return KForm(a.chart, a.degree - 1, coeffs)


def lie_derivative_form(x: VectorField, a: KForm) -> KForm:
    """Lie derivative via the Cartan formula L_X = i_X d + d i_X."""
    _require_same_chart(x, a)
    if a.degree == 0:
        return KForm(a.chart, 0, {(): x.apply(a.coeffs.get((), ZERO))})
    part1 = interior_product(x, exterior_d(a))
    part2 = exterior_d(interior_product(x, a))
    return part1 + part2


class SmoothMap:
    """A chart-to-chart map with declared inverse components.

    Validation on construction: both composites reduce to the identity
    coordinate tuple, and the Jacobian determinant is not identically zero.
    """

    __slots__ = ("source", "target", "components", "inverse_components", "_jac")

    def __init__(self, source: Chart, target: Chart, components, inverse_components,
                 _validate: bool = True):
        self.source = source
        self.target = target
        self.components = tuple(as_expr(c) for c in components)
        self.inverse_components = tuple(as_expr(c) for c in inverse_components)
        self._jac = None
        if source.dim != target.dim:
            raise ValueError("a map with a declared inverse needs equal chart dimensions")
        if len(self.components) != target.dim:
            raise ValueError("component count does not match target dimension")
        if len(self.inverse_components) != source.dim:
            raise ValueError("inverse component count does not match source dimension")
        if _validate:
            self._validate()

    def _validate(self):
        # components are functions of the source names, inverse components
        # of the target names; compose in both orders and demand identity
        fwd = {n: c for n, c in zip(self.target.names, self.components)}
        for name, inv in zip(self.source.names, self.inverse_components):
            back = substitute(inv, fwd)
            if not equal_zero(back - Var(name)):
                raise CalculusError(
                    f"inverse components do not invert the map: "
                    f"coordinate {name!r} round-trips to {back}"
                )
        inv_map = {n: c for n, c in zip(self.source.names, self.inverse_components)}
        for name, comp in zip(self.target.names, self.components):
            back = substitute(comp, inv_map)
            if not equal_zero(back - Var(name)):
                raise CalculusError(
                    f"forward components do not invert the inverse: "
                    f"coordinate {name!r} round-trips to {back}"
                )
        det = sym_det(self.jacobian())
        if is_zero(det):
            raise CalculusError("Jacobian determinant is identically zero")

    def jacobian(self):
        """J[i][j] = d(components[i]) / d(source coordinate j)."""
        if self._jac is None:
            self._jac = tuple(
                tuple(diff(c, n) for n in self.source.names)
                for c in self.components
            )
        return self._jac

    def inverse(self) -> "SmoothMap":
        return SmoothMap(
            self.target, self.source, self.inverse_components, self.components,
            _validate=False,
        )

    def compose(self, inner: "SmoothMap") -> "SmoothMap":
        """self after inner (= self . inner)."""
        if inner.target.names != self.source.names:
            raise ChartMismatch("composition charts do not line up")
        sub_fwd = {n: c for n, c in zip(self.source.names, inner.components)}
        comps = tuple(substitute(c, sub_fwd) for c in self.components)
        sub_inv = {n: c for n, c in zip(inner.target.names, self.inverse_components)}
        inv_comps = tuple(substitute(c, sub_inv) for c in inner.inverse_components)
        return SmoothMap(inner.source, self.target, comps, inv_comps, _validate=False)

    def push_scalar(self, f: Expr) -> Expr:
        """f . inverse, expressed in target coordinates."""
        sub = {n: c for n, c in zip(self.source.names, self.inverse_components)}
        return substitute(f, sub)

    def pull_scalar(self, f: Expr) -> Expr:
        """f . self, expressed in source coordinates."""
        sub = {n: c for n, c in zip(self.target.names, self.components)}
        return substitute(f, sub)

    def __repr__(self):
        comps = ", ".join(str(c) for c in self.components)
        return f"SmoothMap({self.source.names} -> {self.target.names}: {comps})"


def pushforward_field(psi: SmoothMap, x: VectorField) -> VectorField:
    """(psi_* X)^j = (J_psi X)^j . psi^{-1} in target coordinates."""
    if x.chart.names != psi.source.names:
        raise ChartMismatch("field does not live on the source chart")
    jac = psi.jacobian()
    pushed = []
    for i in range(psi.target.dim):
        total = ZERO
        for j in range(psi.source.dim):
            total = total + jac[i][j] * x.components[j]
        pushed.append(psi.push_scalar(total))
    return VectorField(psi.target, pushed)


def pullback_form(psi: SmoothMap, a: KForm) -> KForm:
    """psi^* a on the source chart."""
    if a.chart.names != psi.target.names:
        raise ChartMismatch("form does not live on the target chart")
    source = psi.source
    if a.degree == 0:
        return KForm(source, 0, {(): psi.pull_scalar(a.coeffs.get((), ZERO))})
    # d(psi^j) as 1-forms on the source
    d_comps = []
    for comp in psi.components:
        coeffs = {}
        for i, n in enumerate(source.names):
            dc = diff(comp, n)
            if not is_zero(dc):
                coeffs[(i,)] = dc
        d_comps.append(KForm(source, 1, coeffs))
    result = KForm(source, a.degree, {})
    for idx, c in a.coeffs.items():
        term = KForm.scalar(source, psi.pull_scalar(c))
        block = d_comps[idx[0]]
        for i in idx[1:]:
            block = wedge(block, d_comps[i])
        result = result + block.scale(term.coeffs.get((), ZERO))
    return result


# ---------------------------------------------------------------------------
# symbolic linear algebra


def _expr_is_zero(e: Expr) -> bool:
    return is_zero(e)


def _compact(e: Expr) -> Expr:
    """Rebuild an expression from its normal form to keep matrices small."""
    return e.normal().as_expr()


def sym_det(matrix) -> Expr:
    """Exact determinant by fraction-full Gaussian elimination."""
    rows = [list(r) for r in matrix]
    n = len(rows)
    for r in rows:
        if len(r) != n:
            raise ValueError("determinant of a non-square matrix")
    sign = 1
    det = ONE
    for col in range(n):
        pivot_row = None
        # prefer a rational-constant pivot; fall back to any nonzero entry
        for r in range(col, n):
            if rows[r][col].is_rational_const() and not _expr_is_zero(rows[r][col]):
                pivot_row = r
                break
        if pivot_row is None:
            for r in range(col, n):
                if not _expr_is_zero(rows[r][col]):
                    pivot_row = r
                    break
        if pivot_row is None:
            return ZERO
        if pivot_row != col:
            rows[col], rows[pivot_row] = rows[pivot_row], rows[col]
            sign = -sign
        pivot = rows[col][col]
        det = det * pivot
        inv_pivot = ONE / pivot
        for r in range(col + 1, n):
            factor = rows[r][col]
            if _expr_is_zero(factor):
                continue
            scale = _compact(factor * inv_pivot)
            for c in range(col, n):
                rows[r][c] = _compact(rows[r][c] - scale * rows[col][c])
    det = _compact(det)
    return det if sign == 1 else -det


def sym_solve(matrix, rhs):
    """Solve a square system exactly by Gauss-Jordan elimination.

    Raises SingularFrame when the matrix determinant is identically zero.
    Pivots that are singular only at points are fine symbolically: their
    reciprocals simply appear in the solution's denominators.
    """
    n = len(matrix)
    rows = [list(r) + [rhs[i]] for i, r in enumerate(matrix)]
    for col in range(n):
        pivot_row = None
        for r in range(col, n):
            if rows[r][col].is_rational_const() and not _expr_is_zero(rows[r][col]):
                pivot_row = r
                break
        if pivot_row is None:
            for r in range(col, n):
                if not _expr_is_zero(rows[r][col]):
                    pivot_row = r
                    break
        if pivot_row is None:
            raise SingularFrame("matrix determinant is identically zero")
        rows[col], rows[pivot_row] = rows[pivot_row], rows[col]
        inv_pivot = ONE / rows[col][col]
        rows[col] = [_compact(e * inv_pivot) for e in rows[col]]
        for r in range(n):
            if r == col:
                continue
            factor = rows[r][col]
            if _expr_is_zero(factor):
                continue
            rows[r] = [
                _compact(rows[r][c] - factor * rows[col][c])
                for c in range(n + 1)
            ]
    return tuple(rows[i][n] for i in range(n))


def sym_inverse(matrix):
    """Exact matrix inverse via elimination on an augmented system."""
    n = len(matrix)
    rows = [list(r) + [ONE if j == i else ZERO for j in range(n)] for i, r in enumerate(matrix)]
    for col in range(n):
        pivot_row = None
        for r in range(col, n):
            if rows[r][col].is_rational_const() and not _expr_is_zero(rows[r][col]):
                pivot_row = r
                break
        if pivot_row is None:
            for r in range(col, n):
                if not _expr_is_zero(rows[r][col]):
                    pivot_row = r
                    break
        if pivot_row is None:
            raise SingularFrame("matrix determinant is identically zero")
        rows[col], rows[pivot_row] = rows[pivot_row], rows[col]
        inv_pivot = ONE / rows[col][col]
        rows[col] = [_compact(e * inv_pivot) for e in rows[col]]
        for r in range(n):
            if r == col:
                continue
            factor = rows[r][col]
            if _expr_is_zero(factor):
                continue
            rows[r] = [
                _compact(rows[r][c] - factor * rows[col][c])
                for c in range(2 * n)
            ]
    return tuple(tuple(row[n:]) for row in rows)


def frame_decompose(x: VectorField, frame) -> tuple:
    """Coefficients of x in a full frame (len(frame) == chart dimension)."""
    frame = tuple(frame)
    _require_same_chart(x, *frame)
    n = x.chart.dim
    if len(frame) != n:
        raise ValueError(f"need {n} frame fields, got {len(frame)}")
    matrix = [[frame[j].components[i] for j in range(n)] for i in range(n)]
    try:
        return sym_solve(matrix, list(x.components))
    except SingularFrame:
        raise SingularFrame("frame fields are linearly dependent") from None


def span_membership(x: VectorField, fields) -> tuple:
    """Is x in the pointwise span of the given fields?

    Returns (True, coefficients) with a decomposition certificate, or
    (False, witness_component_index) naming an unmatchable component.
    Decided by exact elimination on the augmented component matrix.
    """
    fields = tuple(fields)
    _require_same_chart(x, *fields)
    m = x.chart.dim
    r = len(fields)
    rows = [[fields[j].components[i] for j in range(r)] + [x.components[i]]
            for i in range(m)]
    col_of_pivot = {}
    row_used = [False] * m
    for col in range(r):
        pivot_row = None
        for i in range(m):
            if row_used[i]:
                continue
            if rows[i][col].is_rational_const() and not _expr_is_zero(rows[i][col]):
                pivot_row = i
                break
        if pivot_row is None:
            for i in range(m):
                if not row_used[i] and not _expr_is_zero(rows[i][col]):
                    pivot_row = i
                    break
        if pivot_row is None:
            continue
        row_used[pivot_row] = True
        col_of_pivot[col] = pivot_row
        inv_pivot = ONE / rows[pivot_row][col]
        rows[pivot_row] = [_compact(e * inv_pivot) for e in rows[pivot_row]]
        for i in range(m):
            if i == pivot_row:
                continue
            factor = rows[i][col]
            if _expr_is_zero(factor):
                continue
            rows[i] = [
                _compact(rows[i][c] - factor * rows[pivot_row][c])
                for c in range(r + 1)
            ]
    for i in range(m):
        if not row_used[i] and not equal_zero(rows[i][r]):
            return False, i
    coeffs = [ZERO] * r
    for col, i in col_of_pivot.items():
        coeffs[col] = rows[i][r]
    return True, tuple(coeffs)


class FrameBasis:
    """A full frame with cached inverse matrix and structure functions."""

    __slots__ = ("chart", "fields", "_matrix", "_inverse", "_structure")

    def __init__(self, fields):
        self.fields = tuple(fields)
        if not self.fields:
            raise ValueError("empty frame")
        _require_same_chart(*self.fields)
        self.chart = self.fields[0].chart
        if len(self.fields) != self.chart.dim:
            raise ValueError(
                f"frame needs {self.chart.dim} fields, got {len(self.fields)}"
            )
        self._matrix = None
        self._inverse = None
        self._structure = None

    @property
    def matrix(self):
        """Columns are the frame fields' components."""
        if self._matrix is None:
            n = self.chart.dim
            self._matrix = tuple(
                tuple(self.fields[j].components[i] for j in range(n))
                for i in range(n)
            )
        return self._matrix

    @property
    def inverse(self):
        if self._inverse is None:
            try:
                self._inverse = sym_inverse(self.matrix)
            except SingularFrame:
                raise SingularFrame("frame fields are linearly dependent") from None
        return self._inverse

    def decompose(self, x: VectorField) -> tuple:
        inv = self.inverse
        n = self.chart.dim
        out = []
        for i in range(n):
            total = ZERO
            for j in range(n):
                total = total + inv[i][j] * x.components[j]
            out.append(_compact(total))
        return tuple(out)

    def structure_functions(self) -> dict:
        """c[i, j] with [E_i, E_j] = sum_k c[i, j][k] E_k, for i < j."""
        if self._structure is None:
            out = {}
            n = len(self.fields)
            for i in range(n):
                for j in range(i + 1, n):
                    out[(i, j)] = self.decompose(
                        lie_bracket(self.fields[i], self.fields[j])
                    )
            self._structure = out
        return self._structure

    def structure_coeff(self, i: int, j: int, k: int) -> Expr:
        if i == j:
            return ZERO
        if i < j:
            return self.structure_functions()[(i, j)][k]
        return -self.structure_functions()[(j, i)][k]


def frame_rank_full(fields) -> bool:
    """Do the fields have full rank (as many independent directions as fields)?"""
    fields = tuple(fields)
    if not fields:
        return True
    chart = fields[0].chart
    m = chart.dim
    r = len(fields)
    if r > m:
        return False
    # full column rank iff elimination finds a pivot in every column
    rows = [[fields[j].components[i] for j in range(r)] for i in range(m)]
    row_used = [False] * m
    for col in range(r):
        pivot_row = None
        for i in range(m):
            if row_used[i]:
                continue
            if rows[i][col].is_rational_const() and not _expr_is_zero(rows[i][col]):
                pivot_row = i
                break
        if pivot_row is None:
            for i in range(m):
                if not row_used[i] and not _expr_is_zero(rows[i][col]):
                    pivot_row = i
                    break
        if pivot_row is None:
            return False
        row_used[pivot_row] = True
        inv_pivot = ONE / rows[pivot_row][col]
        for i in range(m):
            if row_used[i] or _expr_is_zero(rows[i][col]):
                continue
            scale = _compact(rows[i][col] * inv_pivot)
            for c in range(col, r):
                rows[i][c] = _compact(rows[i][c] - scale * rows[pivot_row][c])
    return True
