"""Symplectic forms, Hamiltonian fields, Poisson brackets, tautological forms.

Sign conventions (fixed by the wedge convention in `calculus` and pinned by
substitute-back oracles in the test suite):

* the Hamiltonian field of f solves  i_{X_f} omega = -df,
* the Poisson bracket is  {f, g} = omega(X_f, X_g).

Nondegeneracy is certified by a symbolic witness: the Pfaffian of the
coefficient matrix for dimension <= 8, the determinant above that.  A witness
that is a nonconstant expression means the form degenerates on its zero set;
that is reported as a warning, not a failure.
"""

from __future__ import annotations

from .calculus import (
    Chart,
    KForm,
    VectorField,
    coordinate_frame,
    exterior_d,
    interior_product,
    sym_det,
    sym_inverse,
)
from .symexpr import Expr, ONE, ZERO, Var, as_expr, equal_zero, is_zero

__all__ = [
    "SymplecticError",
    "SymplecticForm",
    "TrivialBundleChart",
    "validate_symplectic",
    "hamiltonian_field",
    "poisson_bracket",
    "tautological_theta",
    "trivial_bundle_symplectic",
    "pfaffian",
]


class SymplecticError(Exception):
    """Validation failure; `.failures` lists (condition, detail) pairs."""

    def __init__(self, message: str, failures=()):
        super().__init__(message)
        self.failures = tuple(failures)


def pfaffian(matrix) -> Expr:
    """Pfaffian of an antisymmetric matrix by recursive first-row expansion."""
    m = len(matrix)
    if m % 2 == 1:
        return ZERO
    if m == 0:
        return ONE
    if m == 2:
        return matrix[0][1]
    total = ZERO
    for j in range(1, m):
        entry = matrix[0][j]
        keep = [i for i in range(1, m) if i != j]
        minor = [[matrix[a][b] for b in keep] for a in keep]
        term = entry * pfaffian(minor)
        total = total + term if j % 2 == 1 else total - term
    return total


class SymplecticForm:
    """A certified symplectic form: closed and nondegenerate 2-form.

    Construct through `validate_symplectic`.  Carries the nondegeneracy
    witness and any degeneracy-locus warnings, plus a cached inverse of the
    coefficient matrix for linear solves against the form.
    """

    __slots__ = ("form", "chart", "witness", "warnings", "_matrix", "_inverse")

    def __init__(self, form: KForm, witness: Expr, warnings=()):
        self.form = form
        self.chart = form.chart
        self.witness = witness
        self.warnings = tuple(warnings)
        self._matrix = None
        self._inverse = None

    @property
    def matrix(self):
        if self._matrix is None:
            self._matrix = self.form.matrix()
        return self._matrix

    @property
    def inverse_matrix(self):
        if self._inverse is None:
            self._inverse = sym_inverse(self.matrix)
        return self._inverse

    def __call__(self, x: VectorField, y: VectorField) -> Expr:
        return self.form(x, y)

    def __repr__(self):
        return f"SymplecticForm({self.form})"


def validate_symplectic(form: KForm) -> SymplecticForm:
    """Check that a 2-form is symplectic; raise SymplecticError otherwise.

    Errors: odd chart dimension, degree != 2, non-closed, identically
    degenerate.  A witness vanishing only on a proper subset produces a
    warning on the returned form.
    """
    failures = []
    if form.degree != 2:
        raise SymplecticError(
            f"expected a 2-form, got degree {form.degree}",
            [("degree", str(form.degree))],
        )
    if form.chart.dim % 2 == 1:
        raise SymplecticError(
            f"chart dimension {form.chart.dim} is odd",
            [("dimension", str(form.chart.dim))],
        )
    d = exterior_d(form)
    for idx, c in d.coeffs.items():
        if not equal_zero(c):
            names = ",".join(form.chart.names[i] for i in idx)
            failures.append(("closed", f"d(omega) has coefficient {c} on ({names})"))
    if failures:
        raise SymplecticError("form is not closed", failures)
    matrix = form.matrix()
    if form.chart.dim <= 8:
        witness = pfaffian(matrix)
    else:
        witness = sym_det(matrix)
    witness_nf = witness.normal()
    if witness_nf.is_zero:
        raise SymplecticError(
            "form is degenerate (nondegeneracy witness is identically zero)",
            [("nondegenerate", "witness normalizes to zero")],
        )
    warnings = []
    if not witness_nf.is_const():
        warnings.append(
            f"form degenerates where the witness vanishes: {witness_nf}"
        )
    return SymplecticForm(form, witness_nf.as_expr(), warnings)


def hamiltonian_field(omega: SymplecticForm, f: Expr) -> VectorField:
    """The field X_f with i_{X_f} omega = -df."""
    chart = omega.chart
    f = as_expr(f)
    from .symexpr import diff

    df = [diff(f, n) for n in chart.names]
    # (i_X omega)_j = omega(X, d/dx_j) = sum_i X^i Omega_ij = -(Omega X)_j,
    # so Omega X = df and X = Omega^{-1} df.
    inv = omega.inverse_matrix
    comps = []
    for i in range(chart.dim):
        total = ZERO
        for j in range(chart.dim):
            total = total + inv[i][j] * df[j]
        comps.append(total.normal().as_expr())
    return VectorField(chart, comps)


def poisson_bracket(omega: SymplecticForm, f: Expr, g: Expr) -> Expr:
    """{f, g} = omega(X_f, X_g)."""
    xf = hamiltonian_field(omega, f)
    xg = hamiltonian_field(omega, g)
    return omega(xf, xg).normal().as_expr()


class TrivialBundleChart:
    """Chart of M x R^m: base coordinates followed by fiber coordinates.

    Fiber coordinate i is paired with base coordinate i (same position) by
    the tautological 1-form.
    """

    __slots__ = ("base", "fiber_names", "chart")

    def __init__(self, base: Chart, fiber_names):
        self.base = base
        self.fiber_names = tuple(fiber_names)
        if len(self.fiber_names) != base.dim:
            raise ValueError(
                f"need {base.dim} fiber names, got {len(self.fiber_names)}"
            )
        clash = set(self.fiber_names) & set(base.names)
        if clash:
            raise ValueError(f"fiber names collide with base coordinates: {sorted(clash)}")
        self.chart = Chart(base.names + self.fiber_names, base.symbols)

    @property
    def dim(self) -> int:
        return self.chart.dim

    def fiber_index(self, i: int) -> int:
        """Chart index of fiber coordinate i."""
        return self.base.dim + i

    def __repr__(self):
        return f"TrivialBundleChart(base={self.base.names}, fibers={self.fiber_names})"


def tautological_theta(bundle: TrivialBundleChart) -> KForm:
    """theta = sum_i xi_i dx_i on the combined chart."""
    coeffs = {}
    for i in range(bundle.base.dim):
        coeffs[(i,)] = Var(bundle.fiber_names[i])
    return KForm(bundle.chart, 1, coeffs)


def trivial_bundle_symplectic(omega: SymplecticForm, bundle: TrivialBundleChart) -> SymplecticForm:
    """The lifted form pi^* omega + d theta, validated on the combined chart."""
    if bundle.base.names != omega.chart.names:
        raise SymplecticError("bundle base chart does not match the form's chart")
    pulled = KForm(bundle.chart, 2, dict(omega.form.coeffs))
    lifted = pulled + exterior_d(tautological_theta(bundle))
    return validate_symplectic(lifted)
