"""Lifting bi-Lagrangian structures and symplectomorphisms to M x R^2n.

The bundle chart doubles the base chart with fiber coordinates xi_1..xi_2n
and carries the symplectic form  omega~ = pi^* omega + d theta  with the
tautological 1-form  theta = sum_i xi_i dx_i.

The lifted foliations are built from the structure's adapted functions
a = (p_1..p_n, q_1..q_n) with Jacobian J = da/dx and K = (J^T)^{-1}:

* fiber frame     Phi_j = sum_i J_ji d/dxi_i,
* base-field lift E~    = E + sum_i C_i d/dxi_i  with
                  C_i   = sum_{l,m} E(J_li) K_lm xi_m,

and the split assigns Phi_{n+1..2n} to the first lifted foliation and
Phi_{1..n} to the second.  Every E~ annihilates all the functions (K xi)_l,
so the lifted structure again carries adapted functions

    (p_1..p_n, (K xi)_{n+1..2n}  |  q_1..q_n, (K xi)_{1..n})

and the construction can be iterated.  When the adapted functions are the
chart coordinates, J = K = id, the corrections vanish and the lift is the
plain coordinate split.  The lifted structure is re-validated from scratch;
a declared adapted ordering that does not straighten the foliations makes
the Lagrangian check fail, and that failure is reported, not patched.
"""

from __future__ import annotations

from .calculus import (
    Chart,
    KForm,
    SmoothMap,
    VectorField,
    pullback_form,
    span_membership,
    sym_inverse,
)
from .structures import (
    BiLagStructure,
    push_structure,
    validate_bilagrangian,
)
from .symexpr import Expr, ONE, Var, ZERO, as_expr, diff, equal_zero, is_zero
from .symplectic import (
    SymplecticForm,
    TrivialBundleChart,
    tautological_theta,
    trivial_bundle_symplectic,
    validate_symplectic,
)

__all__ = [
    "LiftError",
    "LiftedStructure",
    "LiftedMap",
    "ActionCheckResult",
    "MembershipVerdict",
    "default_fiber_names",
    "lift_structure",
    "iterate_lift",
    "lift_map",
    "lifted_action_check",
]

DEFAULT_MAX_DIM = 16


class LiftError(Exception):
    pass


def default_fiber_names(taken, count: int):
    """Deterministic fresh fiber names.

    A 2-dimensional extension prefers the classical pair ("s", "t"); any
    other size, or a collision, falls back to xi1, xi2, ... skipping names
    already in use.
    """
    taken = set(taken)
    if count == 2 and "s" not in taken and "t" not in taken:
        return ("s", "t")
    names = []
    k = 1
    while len(names) < count:
        cand = f"xi{k}"
        if cand not in taken:
            names.append(cand)
        k += 1
    return tuple(names)


def _transpose(m):
    return [list(row) for row in zip(*m)]


def _linear_in_fibers(kmat, fiber_coords):
    """The functions (K xi)_l = sum_m K_lm xi_m."""
    out = []
    for row in kmat:
        total = ZERO
        for coeff, xi in zip(row, fiber_coords):
            total = total + coeff * xi
        out.append(total.normal().as_expr())
    return out


def _lift_base_field(bundle: TrivialBundleChart, e: VectorField, jac, kxi) -> VectorField:
    """E~ = E + sum_i C_i d/dxi_i with C_i = sum_l E(J_li) (K xi)_l."""
    n2 = bundle.base.dim
    comps = list(e.components) + [ZERO] * n2
    for i in range(n2):
        total = ZERO
        for l in range(n2):
            rate = e.apply(jac[l][i])
            if not is_zero(rate):
                total = total + rate * kxi[l]
        comps[n2 + i] = total.normal().as_expr()
    return VectorField(bundle.chart, comps)


def _fiber_frame_field(bundle: TrivialBundleChart, jac, j: int) -> VectorField:
    n2 = bundle.base.dim
    comps = [ZERO] * n2 + [jac[j][i] for i in range(n2)]
    return VectorField(bundle.chart, comps)


class LiftedStructure(BiLagStructure):
    """A validated lift, remembering where it came from.

    `base` is the structure downstairs, `bundle` the chart extension; the
    base adapted ordering used for the fiber split is `base.adapted` and
    the fiber coordinate order is `bundle.fiber_names`.
    """

    __slots__ = ("base", "bundle")

    def __init__(self, validated: BiLagStructure, base: BiLagStructure,
                 bundle: TrivialBundleChart):
        super().__init__(validated.omega, validated.f1, validated.f2,
                         validated.adapted, validated.report)
        self.base = base
        self.bundle = bundle

    def __repr__(self):
        return (
            f"LiftedStructure(base chart {self.base.chart.names} -> "
            f"bundle chart {self.chart.names})"
        )


def lift_structure(s: BiLagStructure, fiber_names=None) -> LiftedStructure:
    """Lift a structure to the trivial bundle over its chart.

    The result is validated like any other structure and the full report
    travels with it; validation failure raises BiLagError with the report.
    """
    n2 = s.chart.dim
    n = s.n
    if fiber_names is None:
        fiber_names = default_fiber_names(s.chart.names, n2)
    bundle = TrivialBundleChart(s.chart, fiber_names)
    omega_lift = trivial_bundle_symplectic(s.omega, bundle)

    jac = [[diff(a, name).normal().as_expr() for name in s.chart.names]
           for a in s.adapted]
    kmat = sym_inverse(_transpose(jac))
    fiber_coords = [Var(name) for name in fiber_names]
    kxi = _linear_in_fibers(kmat, fiber_coords)

    f1 = [_lift_base_field(bundle, e, jac, kxi) for e in s.f1.fields]
    f1 += [_fiber_frame_field(bundle, jac, j) for j in range(n, n2)]
    f2 = [_lift_base_field(bundle, e, jac, kxi) for e in s.f2.fields]
    f2 += [_fiber_frame_field(bundle, jac, j) for j in range(n)]

    adapted = (
        tuple(s.adapted[:n]) + tuple(kxi[n:])
        + tuple(s.adapted[n:]) + tuple(kxi[:n])
    )
    validated = validate_bilagrangian(omega_lift, f1, f2, adapted)
    return LiftedStructure(validated, s, bundle)


def iterate_lift(s: BiLagStructure, k: int, max_dim: int = DEFAULT_MAX_DIM) -> BiLagStructure:
    """Apply lift_structure k times; k = 0 returns the structure unchanged.

    Raises LiftError before any step that would exceed max_dim chart
    dimensions (each step doubles the dimension).
    """
    if k < 0:
        raise ValueError("lift count must be non-negative")
    current = s
    for step in range(k):
        target = 2 * current.chart.dim
        if target > max_dim:
            raise LiftError(
                f"lift {step + 1} of {k} needs a {target}-dimensional chart, "
                f"above the cap of {max_dim}; raise max_dim to proceed"
            )
        current = lift_structure(current)
    return current


class LiftedMap:
    """A diffeomorphism lifted to the bundle charts.

    The fiber of the lift acts by the transposed inverse Jacobian: over a
    source point x, fiber output j is  xi'_j = sum_i xi_i (d inv_i / dy_j
    composed with the base map).  `fiber_block` records d xi'_j / d xi_i as
    functions on the source base chart; `preserves_form` reports whether
    the lift preserves omega~ (None when no base form was supplied or the
    two charts use different coordinate names, which leaves no common form
    to compare against).
    """

    __slots__ = ("map", "base", "source_bundle", "target_bundle",
                 "fiber_block", "preserves_form")

    def __init__(self, map: SmoothMap, base: SmoothMap,
                 source_bundle: TrivialBundleChart, target_bundle: TrivialBundleChart,
                 fiber_block, preserves_form):
        self.map = map
        self.base = base
        self.source_bundle = source_bundle
        self.target_bundle = target_bundle
        self.fiber_block = fiber_block
        self.preserves_form = preserves_form

    def jacobian(self):
        return self.map.jacobian()

    def __repr__(self):
        return (
            f"LiftedMap({self.source_bundle.chart.names} -> "
            f"{self.target_bundle.chart.names})"
        )


def _fiber_components(psi: SmoothMap, fiber_coords):
    """xi'_j = sum_i xi_i (d inv_i/dy_j . psi) plus the block d xi'/d xi."""
    block = []
    comps = []
    for j, tname in enumerate(psi.target.names):
        row = [
            psi.pull_scalar(diff(inv_comp, tname)).normal().as_expr()
            for inv_comp in psi.inverse_components
        ]
        total = ZERO
        for xi, entry in zip(fiber_coords, row):
            total = total + xi * entry
        block.append(tuple(row))
        comps.append(total.normal().as_expr())
    return tuple(comps), tuple(block)


def _forms_agree(a: KForm, b: KForm) -> bool:
    keys = set(a.coeffs) | set(b.coeffs)
    return all(
        equal_zero(a.coeffs.get(k, ZERO) - b.coeffs.get(k, ZERO)) for k in keys
    )


def lift_map(psi: SmoothMap, omega=None, fiber_names=None) -> LiftedMap:
    """Lift a base diffeomorphism to the bundle charts.

    The inverse of the lift is the lift of the inverse.  When `omega` (a
    symplectic form on the source chart) is supplied and the two base
    charts share coordinate names, the lift is checked against
    omega~ = pi^* omega + d theta and the verdict stored in
    `preserves_form`; the lift itself is built for any diffeomorphism.
    """
    if fiber_names is None:
        taken = set(psi.source.names) | set(psi.target.names)
        fiber_names = default_fiber_names(taken, psi.source.dim)
    source_bundle = TrivialBundleChart(psi.source, fiber_names)
    target_bundle = TrivialBundleChart(psi.target, fiber_names)
    fiber_coords = [Var(name) for name in fiber_names]

    fwd_fiber, block = _fiber_components(psi, fiber_coords)
    rev_fiber, _ = _fiber_components(psi.inverse(), fiber_coords)
    lifted = SmoothMap(
        source_bundle.chart,
        target_bundle.chart,
        psi.components + fwd_fiber,
        psi.inverse_components + rev_fiber,
    )

    preserves = None
    if omega is not None and psi.source.names == psi.target.names:
        if isinstance(omega, KForm):
            omega = validate_symplectic(omega)
        tilde = trivial_bundle_symplectic(omega, source_bundle)
        pulled = pullback_form(lifted, tilde.form)
        preserves = _forms_agree(pulled, tilde.form)
    return LiftedMap(lifted, psi, source_bundle, target_bundle, block, preserves)


class MembershipVerdict:
    """Span membership of one lifted-frame generator in the other frame."""

    __slots__ = ("label", "ok", "detail")

    def __init__(self, label: str, ok: bool, detail: str):
        self.label = label
        self.ok = ok
        self.detail = detail

    def __repr__(self):
        status = "ok" if self.ok else "FAIL"
        return f"[{status}] {self.label}: {self.detail}"


class ActionCheckResult:
    """Comparison of push-then-lift against lift-then-push.

    `hat` is the lift of the pushed structure, `tilde` the push of the
    lifted structure along the lifted map; `verdicts` holds one span
    membership per frame generator in both directions and `equal` says
    whether the two lifted foliation pairs span the same distributions.
    """

    __slots__ = ("hat", "tilde", "lifted_map", "omega_match", "verdicts", "equal")

    def __init__(self, hat, tilde, lifted_map, omega_match, verdicts):
        self.hat = hat
        self.tilde = tilde
        self.lifted_map = lifted_map
        self.omega_match = omega_match
        self.verdicts = tuple(verdicts)
        self.equal = omega_match and all(v.ok for v in self.verdicts)

    def __bool__(self):
        return self.equal

    def __repr__(self):
        lines = [f"omega agreement: {self.omega_match}"]
        lines += [repr(v) for v in self.verdicts]
        lines.append(f"actions agree: {self.equal}")
        return "\n".join(lines)


def _membership_pass(label_a: str, fields_a, label_b: str, fields_b, chart, out):
    for idx, g in enumerate(fields_a):
        ok, cert = span_membership(g, fields_b)
        if ok:
            detail = "coefficients (" + ", ".join(str(c) for c in cert) + ")"
        else:
            detail = f"unmatched component {chart.names[cert]}"
        out.append(MembershipVerdict(
            f"{label_a} generator {idx + 1} in span {label_b}", ok, detail,
        ))


def lifted_action_check(psi: SmoothMap, s: BiLagStructure,
                        fiber_names=None) -> ActionCheckResult:
    """Does pushing then lifting agree with lifting then pushing?

    Builds both structures on the same bundle chart and certifies, one
    generator at a time, that each lifted foliation frame lies in the span
    of its counterpart (both directions), alongside agreement of the two
    lifted symplectic forms.
    """
    if fiber_names is None:
        taken = set(psi.source.names) | set(psi.target.names)
        fiber_names = default_fiber_names(taken, psi.source.dim)
    hat = lift_structure(push_structure(psi, s), fiber_names)
    lm = lift_map(psi, s.omega, fiber_names)
    tilde = push_structure(lm.map, lift_structure(s, fiber_names))

    omega_match = _forms_agree(hat.omega.form, tilde.omega.form)
    verdicts = []
    chart = hat.chart
    _membership_pass("pushed-then-lifted F1", hat.f1.fields,
                     "lifted-then-pushed F1", tilde.f1.fields, chart, verdicts)
    _membership_pass("lifted-then-pushed F1", tilde.f1.fields,
                     "pushed-then-lifted F1", hat.f1.fields, chart, verdicts)
    _membership_pass("pushed-then-lifted F2", hat.f2.fields,
                     "lifted-then-pushed F2", tilde.f2.fields, chart, verdicts)
    _membership_pass("lifted-then-pushed F2", tilde.f2.fields,
                     "pushed-then-lifted F2", hat.f2.fields, chart, verdicts)
    return ActionCheckResult(hat, tilde, lm, omega_match, verdicts)
