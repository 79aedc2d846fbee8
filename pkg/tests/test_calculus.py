"""Charts, fields, forms, maps, and exact linear algebra."""

import pytest

from bilag.calculus import (
    CalculusError,
    Chart,
    ChartMismatch,
    DegreeError,
    FrameBasis,
    KForm,
    SingularFrame,
    SmoothMap,
    VectorField,
    basis_form,
    coordinate_frame,
    d_coord,
    exterior_d,
    form_from_matrix,
    frame_decompose,
    frame_rank_full,
    interior_product,
    lie_bracket,
    lie_derivative_form,
    pullback_form,
    pushforward_field,
    span_membership,
    sym_det,
    sym_inverse,
    sym_solve,
    wedge,
    zero_field,
)
from bilag.symexpr import ONE, ZERO, OpaqueSymbol, Var, as_expr, diff, equal_zero, is_zero

CH = Chart(("x", "y"))
X, Y = CH.coords()


def fields_equal(a, b):
    return all(equal_zero(p - q) for p, q in zip(a.components, b.components))


def forms_equal(a, b):
    keys = set(a.coeffs) | set(b.coeffs)
    return all(equal_zero(a.coeffs.get(k, ZERO) - b.coeffs.get(k, ZERO)) for k in keys)


class TestChart:
    def test_basics(self):
        assert CH.dim == 2
        assert CH.names == ("x", "y")
        assert CH.index("y") == 1

    def test_duplicate_names_rejected(self):
        with pytest.raises(ValueError):
            Chart(("x", "x"))

    def test_extend(self):
        big = CH.extend(("s", "t"))
        assert big.names == ("x", "y", "s", "t")

    def test_extend_collision_rejected(self):
        with pytest.raises(ValueError):
            CH.extend(("x",))


class TestVectorField:
    def test_apply_is_directional_derivative(self):
        v = VectorField(CH, (Y, X))
        out = v.apply(X * X + Y)
        assert equal_zero(out - (2 * X * Y + X))

    def test_chart_mismatch(self):
        other = Chart(("u", "v"))
        v = VectorField(CH, (ONE, ZERO))
        w = VectorField(other, (ONE, ZERO))
        with pytest.raises(ChartMismatch):
            lie_bracket(v, w)

    def test_component_count_checked(self):
        with pytest.raises(ValueError):
            VectorField(CH, (ONE,))


class TestBracket:
    def test_coordinate_fields_commute(self):
        dx, dy = coordinate_frame(CH)
        assert lie_bracket(dx, dy).is_zero()

    def test_golden_bracket(self):
        dx, _ = coordinate_frame(CH)
        w = VectorField(CH, (ZERO, X))
        br = lie_bracket(dx, w)
        assert fields_equal(br, VectorField(CH, (ZERO, ONE)))

    def test_antisymmetry(self):
        v = VectorField(CH, (X * Y, Y))
        w = VectorField(CH, (X, X + Y))
        lhs = lie_bracket(v, w)
        rhs = lie_bracket(w, v)
        assert all(equal_zero(p + q) for p, q in zip(lhs.components, rhs.components))

    def test_jacobi_identity(self):
        u = VectorField(CH, (X, Y * Y))
        v = VectorField(CH, (Y, X))
        w = VectorField(CH, (X * Y, ONE))
        total = lie_bracket(u, lie_bracket(v, w))
        total = total + lie_bracket(v, lie_bracket(w, u))
        total = total + lie_bracket(w, lie_bracket(u, v))
        assert all(equal_zero(c) for c in total.components)


class TestForms:
    def test_wedge_anticommutes_on_one_forms(self):
        dx = d_coord(CH, 0)
        dy = d_coord(CH, 1)
        assert forms_equal(wedge(dx, dy), wedge(dy, dx).scale(-ONE))

    def test_one_form_pairing(self):
        dx = d_coord(CH, 0)
        v = VectorField(CH, (X, Y))
        assert equal_zero(dx(v) - X)

    def test_two_form_evaluation(self):
        om = wedge(d_coord(CH, 1), d_coord(CH, 0))
        dxf, dyf = coordinate_frame(CH)
        assert equal_zero(om(dxf, dyf) + ONE)

    def test_d_squared_zero_on_function_form(self):
        f = X ** 3 * Y + Y ** 2
        alpha = d_coord(CH, 0).scale(f)
        assert exterior_d(exterior_d(alpha)).is_zero()

    def test_d_of_scaled_form_golden(self):
        # d(f dx) carries -f_y on the dx^dy slot
        f = X * Y
        alpha = d_coord(CH, 0).scale(f)
        da = exterior_d(alpha)
        assert equal_zero(da.coefficient((0, 1)) + X)

    def test_interior_product_golden(self):
        om = wedge(d_coord(CH, 0), d_coord(CH, 1))
        v = VectorField(CH, (X, Y))
        ia = interior_product(v, om)
        # i_V (dx^dy) = x dy - y dx
        assert equal_zero(ia.coefficient((1,)) - X)
        assert equal_zero(ia.coefficient((0,)) + Y)

    def test_cartan_formula(self):
        v = VectorField(CH, (Y, X * X))
        alpha = d_coord(CH, 0).scale(X * Y) + d_coord(CH, 1).scale(Y)
        lhs = lie_derivative_form(v, alpha)
        rhs = interior_product(v, exterior_d(alpha)) + exterior_d(interior_product(v, alpha))
        assert forms_equal(lhs, rhs)

    def test_degree_mismatch(self):
        dx = d_coord(CH, 0)
        om = wedge(dx, d_coord(CH, 1))
        with pytest.raises(DegreeError):
            dx + om

    def test_form_from_matrix_roundtrip(self):
        om = form_from_matrix(CH, [[ZERO, -ONE], [ONE, ZERO]])
        mat = om.matrix()
        assert equal_zero(mat[0][1] + ONE)
        assert equal_zero(mat[1][0] - ONE)

    def test_basis_form(self):
        f = basis_form(CH, (0, 1))
        dxf, dyf = coordinate_frame(CH)
        assert equal_zero(f(dxf, dyf) - ONE)


class TestSmoothMap:
    def affine(self):
        two = as_expr(2)
        three = as_expr(3)
        return SmoothMap(
            CH, CH,
            (two * X + three * Y + ONE, X + two * Y - ONE),
            (two * X - three * Y - as_expr(5), -X + two * Y + as_expr(3)),
        )

    def test_bad_inverse_rejected(self):
        with pytest.raises(CalculusError):
            SmoothMap(CH, CH, (X + Y, Y), (X + Y, Y))

    def test_dimension_mismatch_rejected(self):
        line = Chart(("u",))
        with pytest.raises(ValueError):
            SmoothMap(CH, line, (X,), (Var("u"), ZERO))

    def test_distinct_name_charts(self):
        uv = Chart(("u", "v"))
        u, v = uv.coords()
        psi = SmoothMap(CH, uv, (X + Y, Y), (u - v, v))
        assert equal_zero(psi.push_scalar(X) - (u - v))
        assert equal_zero(psi.pull_scalar(u) - (X + Y))

    def test_pushforward_on_distinct_charts(self):
        uv = Chart(("u", "v"))
        u, v = uv.coords()
        psi = SmoothMap(CH, uv, (X + Y, Y), (u - v, v))
        dxf, _ = coordinate_frame(CH)
        out = pushforward_field(psi, dxf)
        assert fields_equal(out, VectorField(uv, (ONE, ZERO)))

    def test_pullback_scales_area_form(self):
        psi = self.affine()
        om = wedge(d_coord(CH, 0), d_coord(CH, 1))
        pulled = pullback_form(psi, om)
        # the map has unit Jacobian determinant, so the area form is preserved
        assert forms_equal(pulled, om)

    def test_compose_functorial_on_fields(self):
        psi = self.affine()
        phi = SmoothMap(CH, CH, (X, Y + X * X), (X, Y - X * X))
        both = psi.compose(phi)
        v = VectorField(CH, (Y, X))
        direct = pushforward_field(both, v)
        stepwise = pushforward_field(psi, pushforward_field(phi, v))
        assert fields_equal(direct, stepwise)

    def test_inverse_roundtrip(self):
        psi = self.affine()
        inv = psi.inverse()
        v = VectorField(CH, (X * Y, ONE))
        back = pushforward_field(inv, pushforward_field(psi, v))
        assert fields_equal(back, v)


class TestLinearAlgebra:
    def test_det_golden(self):
        d = sym_det([[X, ONE], [ONE, X]])
        assert equal_zero(d - (X * X - ONE))

    def test_det_singular(self):
        d = sym_det([[X, Y], [X, Y]])
        assert is_zero(d)

    def test_det_permutation_sign(self):
        d = sym_det([[ZERO, ONE], [ONE, ZERO]])
        assert equal_zero(d + ONE)

    def test_solve_golden(self):
        sol = sym_solve([[X, ZERO], [ZERO, ONE]], [X * Y, X])
        assert equal_zero(sol[0] - Y)
        assert equal_zero(sol[1] - X)

    def test_solve_singular_raises(self):
        with pytest.raises(SingularFrame):
            sym_solve([[X, X], [X, X]], [ONE, ONE])

    def test_inverse_golden(self):
        inv = sym_inverse([[ONE, X], [ZERO, ONE]])
        assert equal_zero(inv[0][1] + X)
        assert equal_zero(inv[0][0] - ONE)

    def test_inverse_times_matrix_is_identity(self):
        mat = [[X + ONE, Y], [ONE, X]]
        inv = sym_inverse(mat)
        for i in range(2):
            for j in range(2):
                entry = sum((inv[i][k] * mat[k][j] for k in range(2)), ZERO)
                target = ONE if i == j else ZERO
                assert equal_zero(entry - target)

    def test_rank_full_detects_dependence(self):
        dep = [VectorField(CH, (X, Y)), VectorField(CH, (X + X, Y + Y))]
        assert not frame_rank_full(dep)

    def test_rank_full_on_symbolic_frame(self):
        frame = [VectorField(CH, (ONE, 2 * X)), VectorField(CH, (ZERO, ONE))]
        assert frame_rank_full(frame)

    def test_rank_tall_matrix(self):
        ch4 = Chart(("a", "b", "c", "d"))
        a, b, c, _ = ch4.coords()
        ok = [VectorField(ch4, (a, ZERO, ONE, ZERO)), VectorField(ch4, (ZERO, b, ZERO, ONE))]
        assert frame_rank_full(ok)
        bad = [VectorField(ch4, (a, b, ZERO, ZERO)), VectorField(ch4, (c * a, c * b, ZERO, ZERO))]
        assert not frame_rank_full(bad)

    def test_frame_decompose_golden(self):
        u = VectorField(CH, (ONE, 2 * X))
        v = VectorField(CH, (ZERO, ONE))
        coeffs = frame_decompose(VectorField(CH, (ONE, ZERO)), (u, v))
        assert equal_zero(coeffs[0] - ONE)
        assert equal_zero(coeffs[1] + 2 * X)

    def test_span_membership_positive(self):
        u = VectorField(CH, (ONE, 2 * X))
        ok, cert = span_membership(VectorField(CH, (Y, 2 * X * Y)), (u,))
        assert ok
        assert equal_zero(cert[0] - Y)

    def test_span_membership_negative_names_witness(self):
        u = VectorField(CH, (ONE, ZERO))
        ok, witness = span_membership(VectorField(CH, (ZERO, ONE)), (u,))
        assert not ok
        assert witness == 1


class TestFrameBasis:
    def test_structure_functions(self):
        u = VectorField(CH, (ONE, 2 * X))
        v = VectorField(CH, (ZERO, ONE))
        basis = FrameBasis((u, v))
        # [U, V] = 0 for this pair
        for i in range(2):
            for j in range(2):
                for k in range(2):
                    assert equal_zero(basis.structure_coeff(i, j, k))

    def test_structure_functions_nontrivial(self):
        dx = VectorField(CH, (ONE, ZERO))
        w = VectorField(CH, (ZERO, X))
        # [dx, w] = w / x, so c^1_01 = 1/x on the w leg
        basis = FrameBasis((dx, w))
        assert equal_zero(basis.structure_coeff(0, 1, 1) - ONE / X)

    def test_decompose_roundtrip(self):
        u = VectorField(CH, (ONE, 2 * X))
        v = VectorField(CH, (ZERO, ONE))
        basis = FrameBasis((u, v))
        target = VectorField(CH, (X, Y))
        coeffs = basis.decompose(target)
        rebuilt = zero_field(CH)
        for c, e in zip(coeffs, (u, v)):
            rebuilt = rebuilt + e.scale(c)
        assert fields_equal(rebuilt, target)


def test_pullback_functorial_randomized():
    import random

    rng = random.Random(7)
    uv = Chart(("u", "v"))
    u, v = uv.coords()
    psi = SmoothMap(CH, uv, (X + Y, Y), (u - v, v))
    chi = SmoothMap(uv, CH, (u, v + u * u), (X, Y - X * X))
    both = chi.compose(psi)
    for _ in range(10):
        coeff = as_expr(rng.randint(-3, 3))
        om = form_from_matrix(CH, [[ZERO, coeff * X + ONE], [-(coeff * X + ONE), ZERO]])
        direct = pullback_form(both, om)
        stepwise = pullback_form(psi, pullback_form(chi, om))
        keys = set(direct.coeffs) | set(stepwise.coeffs)
        assert all(
            equal_zero(direct.coeffs.get(k, ZERO) - stepwise.coeffs.get(k, ZERO))
            for k in keys
        )
