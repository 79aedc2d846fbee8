"""Exact scalar expressions over coordinate charts.

Expressions are immutable trees built from rational constants, coordinate
variables, and jets of opaque function symbols (an opaque symbol ``h``
declared on coordinates ``(x, y)`` comes with the lazily generated family
``h, h_x, h_y, h_xx, h_xy, ...`` of partial-derivative variables; mixed
partials commute, so ``h_xy`` and ``h_yx`` are the same variable).

Every expression has a canonical normal form: a reduced pair of multivariate
polynomials with exact ``Fraction`` coefficients, the denominator made monic
under lexicographic order.  ``equal_zero`` decides equality through the
normal form and cross-checks the verdict by evaluating the original tree at
random rational points.  No floating point enters any decision.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction
from functools import reduce

__all__ = [
    "ExprError",
    "ParseError",
    "UnknownIdentifier",
    "ZeroDenominator",
    "EvalError",
    "CompositionError",
    "OpaqueSymbol",
    "Expr",
    "Rat",
    "Var",
    "JetVar",
    "Add",
    "Mul",
    "Pow",
    "Poly",
    "NormalForm",
    "as_expr",
    "parse_expr",
    "tokenize",
    "diff",
    "directional",
    "normalize",
    "equal_zero",
    "is_zero",
    "eval_num",
    "eval_float",
    "substitute",
    "bind_symbol",
    "set_check_seed",
    "check_seed",
    "ZERO",
    "ONE",
]


class ExprError(Exception):
    """Base class for expression errors."""


class ParseError(ExprError):
    """Syntax error while parsing an expression; carries the position."""

    def __init__(self, message: str, text: str, position: int):
        self.position = position
        self.text = text
        super().__init__(f"{message} (at position {position}: {text[position:position + 12]!r})")


class UnknownIdentifier(ParseError):
    """An identifier that is neither a coordinate nor a declared symbol jet."""


class ZeroDenominator(ExprError):
    """Division by something that is identically zero, or zero at a point."""


class EvalError(ExprError):
    """Numeric evaluation failed (missing assignment)."""


class CompositionError(ExprError):
    """A substitution would need the composite of an opaque symbol."""


# ---------------------------------------------------------------------------
# multivariate polynomials


def _frac_gcd(a: Fraction, b: Fraction) -> Fraction:
    """gcd on rationals: gcd of numerators over lcm of denominators."""
    num = math.gcd(a.numerator, b.numerator)
    den = math.lcm(a.denominator, b.denominator)
    return Fraction(num, den)


def _mono_mul(m1, m2):
    exps = dict(m1)
    for var, e in m2:
        exps[var] = exps.get(var, 0) + e
    return tuple(sorted((v, e) for v, e in exps.items() if e))


def _mono_divides(m1, m2):
    """Does monomial m1 divide m2?"""
    d2 = dict(m2)
    return all(d2.get(v, 0) >= e for v, e in m1)


def _mono_div(m1, m2):
    """m1 / m2, assuming m2 divides m1."""
    exps = dict(m1)
    for var, e in m2:
        exps[var] = exps[var] - e
    return tuple(sorted((v, e) for v, e in exps.items() if e))


class Poly:
    """Sparse multivariate polynomial with Fraction coefficients.

    Terms map a monomial -- a sorted tuple of (variable, exponent) pairs with
    positive exponents -- to a nonzero coefficient.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: dict):
        self.terms = {m: c for m, c in terms.items() if c}

    @staticmethod
    def const(c) -> "Poly":
        c = Fraction(c)
        return Poly({(): c} if c else {})

    @staticmethod
    def variable(name: str) -> "Poly":
        return Poly({((name, 1),): Fraction(1)})

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_const(self) -> bool:
        return all(m == () for m in self.terms)

    def const_value(self) -> Fraction:
        if not self.is_const:
            raise ValueError("not a constant polynomial")
        return self.terms.get((), Fraction(0))

    def variables(self) -> set:
        out = set()
        for m in self.terms:
            for v, _ in m:
                out.add(v)
        return out

    def __eq__(self, other):
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other: "Poly") -> "Poly":
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms.get(m, Fraction(0)) + c
        return Poly(terms)

    def __neg__(self) -> "Poly":
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        terms = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                terms[m] = terms.get(m, Fraction(0)) + c1 * c2
        return Poly(terms)

    def scale(self, c) -> "Poly":
        c = Fraction(c)
        if not c:
            return Poly({})
        return Poly({m: k * c for m, k in self.terms.items()})

    def pow_int(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = Poly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def degree_in(self, var: str) -> int:
        deg = 0
        for m in self.terms:
            deg = max(deg, dict(m).get(var, 0))
        return deg

    def coeffs_in(self, var: str) -> dict:
        """Collect as a univariate polynomial in `var`: degree -> Poly."""
        out: dict = {}
        for m, c in self.terms.items():
            d = dict(m)
            e = d.pop(var, 0)
            rest = tuple(sorted(d.items()))
            bucket = out.setdefault(e, {})
            bucket[rest] = bucket.get(rest, Fraction(0)) + c
        return {e: Poly(t) for e, t in out.items() if any(t.values())}

    @staticmethod
    def from_coeffs_in(var: str, coeffs: dict) -> "Poly":
        terms: dict = {}
        for e, p in coeffs.items():
            for m, c in p.terms.items():
                mm = _mono_mul(m, ((var, e),) if e else ())
                terms[mm] = terms.get(mm, Fraction(0)) + c
        return Poly(terms)

    def _sorted_monos(self):
        """Monomials in descending lexicographic order over sorted variables."""
        varlist = sorted(self.variables())

        def key(m):
            d = dict(m)
            return tuple(d.get(v, 0) for v in varlist)

        return sorted(self.terms, key=key, reverse=True)

    def leading(self):
        """(monomial, coefficient) of the lex-leading term; poly must be nonzero."""
        m = self._sorted_monos()[0]
        return m, self.terms[m]

    def diff(self, var: str) -> "Poly":
        terms: dict = {}
        for m, c in self.terms.items():
            d = dict(m)
            e = d.get(var, 0)
            if not e:
                continue
            d[var] = e - 1
            mm = tuple(sorted((v, k) for v, k in d.items() if k))
            terms[mm] = terms.get(mm, Fraction(0)) + c * e
        return Poly(terms)

    def eval(self, env: dict) -> Fraction:
        total = Fraction(0)
        for m, c in self.terms.items():
            term = c
            for v, e in m:
                term *= Fraction(env[v]) ** e
            total += term
        return total

    def eval_float(self, env: dict) -> float:
        total = 0.0
        for m, c in self.terms.items():
            term = float(c)
            for v, e in m:
                term *= float(env[v]) ** e
            total += term
        return total

    def __str__(self):
        if self.is_zero:
            return "0"
        parts = []
        for m in self._sorted_monos():
            c = self.terms[m]
            factors = []
            for v, e in m:
                factors.append(v if e == 1 else f"{v}^{e}")
            if not factors:
                body = _frac_str(abs(c))
            elif abs(c) == 1:
                body = "*".join(factors)
            else:
                body = "*".join([_frac_str(abs(c))] + factors)
            if not parts:
                parts.append(body if c > 0 else "-" + body)
            else:
                parts.append(("+ " if c > 0 else "- ") + body)
        return " ".join(parts)

    __repr__ = __str__


def _frac_str(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def _poly_divexact(a: Poly, b: Poly) -> Poly:
    """Exact division a / b; raises ValueError if it does not divide."""
    if b.is_zero:
        raise ZeroDivisionError("polynomial division by zero")
    if a.is_zero:
        return a
    varlist = sorted(a.variables() | b.variables())

    def key(m):
        d = dict(m)
        return tuple(d.get(v, 0) for v in varlist)

    bm, bc = max(b.terms, key=key), None
    bc = b.terms[bm]
    quotient: dict = {}
    rem = a
    while not rem.is_zero:
        rm = max(rem.terms, key=key)
        rc = rem.terms[rm]
        if not _mono_divides(bm, rm):
            raise ValueError("inexact polynomial division")
        qm = _mono_div(rm, bm)
        qc = rc / bc
        quotient[qm] = quotient.get(qm, Fraction(0)) + qc
        rem = rem - b * Poly({qm: qc})
    return Poly(quotient)


def _rational_content(p: Poly) -> Fraction:
    """c > 0 with p = c * (integer, content-free polynomial)."""
    if p.is_zero:
        return Fraction(1)
    nums = [c.numerator for c in p.terms.values()]
    dens = [c.denominator for c in p.terms.values()]
    return Fraction(reduce(math.gcd, nums), reduce(math.lcm, dens))


def _int_primitive(p: Poly) -> Poly:
    """Scale to integer coefficients with content 1 and positive lex-leading coefficient."""
    if p.is_zero:
        return p
    q = p.scale(1 / _rational_content(p))
    _, lc = q.leading()
    return q if lc > 0 else -q


def _prem(a: Poly, b: Poly, var: str) -> Poly:
    """Pseudo-remainder of a by b, both viewed as univariate in `var`."""
    da, db = a.degree_in(var), b.degree_in(var)
    bc = b.coeffs_in(var)
    lb = bc[db]
    r = a
    e = da - db + 1
    while not r.is_zero:
        dr = r.degree_in(var)
        if dr < db:
            break
        lr = r.coeffs_in(var)[dr]
        shift = Poly({((var, dr - db),): Fraction(1)}) if dr > db else Poly.const(1)
        r = lb * r - shift * lr * b
        e -= 1
    if e > 0:
        r = lb.pow_int(e) * r
    return r


def _content_in(p: Poly, var: str) -> Poly:
    """gcd of the coefficients of p collected in `var`."""
    coeffs = list(p.coeffs_in(var).values())
    g = coeffs[0]
    for c in coeffs[1:]:
        g = poly_gcd(g, c)
    return g


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Primitive gcd via a primitive pseudo-remainder sequence.

    Returns an integer-primitive polynomial with positive leading
    coefficient (1 for nonzero constants).
    """
    if a.is_zero and b.is_zero:
        return Poly({})
    if a.is_zero:
        return _int_primitive(b)
    if b.is_zero:
        return _int_primitive(a)
    a = _int_primitive(a)
    b = _int_primitive(b)
    if a.is_const or b.is_const:
        return Poly.const(1)
    shared = a.variables() & b.variables()
    if not shared:
        return Poly.const(1)
    var = sorted(shared)[0]
    ca, cb = _content_in(a, var), _content_in(b, var)
    g_cont = poly_gcd(ca, cb)
    pa = _int_primitive(_poly_divexact(a, ca))
    pb = _int_primitive(_poly_divexact(b, cb))
    if pa.degree_in(var) < pb.degree_in(var):
        pa, pb = pb, pa
    while not pb.is_zero:
        r = _prem(pa, pb, var)
        if r.is_zero:
            pa = pb
            break
        pa, pb = pb, _int_primitive(_poly_divexact(r, _content_in(r, var)))
    else:
        pass
    return _int_primitive(g_cont * pa)


# ---------------------------------------------------------------------------
# normal forms


def _merge_atoms(a: dict, b: dict) -> dict:
    if not b:
        return a
    if not a:
        return b
    merged = dict(a)
    for name, atom in b.items():
        seen = merged.get(name)
        if seen is None:
            merged[name] = atom
        elif not _atom_same(seen, atom):
            raise ExprError(
                f"the name {name!r} denotes two different atoms in one expression"
            )
    return merged


def _atom_same(a, b) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, JetVar):
        return a.symbol == b.symbol and a.orders == b.orders
    return a.name == b.name


class NormalForm:
    """Reduced numerator/denominator pair; the denominator is monic in lex order.

    Structural equality of normal forms is semantic equality of the
    expressions they came from.  The atom table remembers which polynomial
    variable names stand for jets of opaque symbols, so `as_expr` can
    rebuild a tree that still differentiates correctly.
    """

    __slots__ = ("num", "den", "atoms")

    def __init__(self, num: Poly, den: Poly, atoms=None, reduced: bool = False):
        if den.is_zero:
            raise ZeroDenominator("denominator is identically zero")
        self.atoms = atoms or {}
        if not reduced:
            if num.is_zero:
                den = Poly.const(1)
            else:
                g = poly_gcd(num, den)
                if not (g.is_const and g.const_value() == 1):
                    num = _poly_divexact(num, g)
                    den = _poly_divexact(den, g)
        if num.is_zero:
            self.num, self.den = num, Poly.const(1)
            return
        _, lc = den.leading()
        if lc != 1:
            num = num.scale(1 / lc)
            den = den.scale(1 / lc)
        self.num, self.den = num, den

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    def is_const(self) -> bool:
        return self.num.is_const and self.den.is_const

    def const_value(self) -> Fraction:
        return self.num.const_value() / self.den.const_value()

    def __eq__(self, other):
        return isinstance(other, NormalForm) and self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def add(self, other: "NormalForm") -> "NormalForm":
        atoms = _merge_atoms(self.atoms, other.atoms)
        g = poly_gcd(self.den, other.den)
        e1 = _poly_divexact(self.den, g)
        e2 = _poly_divexact(other.den, g)
        num = self.num * e2 + other.num * e1
        gg = poly_gcd(num, g)
        if not (gg.is_const and gg.const_value() == 1):
            num = _poly_divexact(num, gg)
            g = _poly_divexact(g, gg)
        return NormalForm(num, g * e1 * e2, atoms, reduced=True)

    def mul(self, other: "NormalForm") -> "NormalForm":
        atoms = _merge_atoms(self.atoms, other.atoms)
        g1 = poly_gcd(self.num, other.den)
        g2 = poly_gcd(other.num, self.den)
        num = _poly_divexact(self.num, g1) * _poly_divexact(other.num, g2)
        den = _poly_divexact(self.den, g2) * _poly_divexact(other.den, g1)
        return NormalForm(num, den, atoms, reduced=True)

    def neg(self) -> "NormalForm":
        return NormalForm(-self.num, self.den, self.atoms, reduced=True)

    def inv(self) -> "NormalForm":
        if self.num.is_zero:
            raise ZeroDenominator("division by an expression that normalizes to zero")
        return NormalForm(self.den, self.num, self.atoms)

    def pow_int(self, n: int) -> "NormalForm":
        if n < 0:
            return self.inv().pow_int(-n)
        return NormalForm(self.num.pow_int(n), self.den.pow_int(n), self.atoms, reduced=True)

    def as_expr(self) -> "Expr":
        num = _poly_to_expr(self.num, self.atoms)
        if self.den.is_const and self.den.const_value() == 1:
            return num
        return num / _poly_to_expr(self.den, self.atoms)

    def __str__(self):
        if self.den.is_const and self.den.const_value() == 1:
            return str(self.num)
        num = str(self.num)
        den = str(self.den)
        if len(self.num.terms) > 1:
            num = f"({num})"
        if len(self.den.terms) > 1 or not self.den.is_const and _needs_parens_as_den(self.den):
            den = f"({den})"
        return f"{num}/{den}"

    __repr__ = __str__


def _needs_parens_as_den(p: Poly) -> bool:
    # a single monomial like 2*x*h needs parens to parse back as one factor
    if len(p.terms) != 1:
        return True
    (m, c), = p.terms.items()
    nontrivial = len(m) + (0 if abs(c) == 1 else 1)
    return nontrivial > 1 or c < 0 or (len(m) == 0)


def _poly_to_expr(p: Poly, atoms=None) -> "Expr":
    atoms = atoms or {}
    terms = []
    for m in p._sorted_monos():
        c = p.terms[m]
        factors = [Rat(c)] if c != 1 or not m else []
        for v, e in m:
            base = atoms.get(v) or Var(v)
            factors.append(base if e == 1 else Pow(base, e))
        if not factors:
            terms.append(Rat(c))
        elif len(factors) == 1:
            terms.append(factors[0])
        else:
            terms.append(Mul(tuple(factors)))
    if not terms:
        return ZERO
    if len(terms) == 1:
        return terms[0]
    return Add(tuple(terms))


# ---------------------------------------------------------------------------
# expression trees


class OpaqueSymbol:
    """An undetermined smooth function of a fixed list of coordinates."""

    __slots__ = ("name", "deps")

    def __init__(self, name: str, deps):
        self.name = name
        self.deps = tuple(deps)
        if len(set(self.deps)) != len(self.deps):
            raise ValueError(f"duplicate dependency in symbol {name}")

    def __call__(self) -> "JetVar":
        return JetVar(self, (0,) * len(self.deps))

    def jet(self, orders) -> "JetVar":
        return JetVar(self, tuple(orders))

    def __eq__(self, other):
        return (
            isinstance(other, OpaqueSymbol)
            and self.name == other.name
            and self.deps == other.deps
        )

    def __hash__(self):
        return hash((self.name, self.deps))

    def __repr__(self):
        return f"OpaqueSymbol({self.name}, deps={self.deps})"


class Expr:
    """Immutable scalar expression node."""

    __slots__ = ("_nf",)

    def __init__(self):
        self._nf = None

    # -- construction sugar -------------------------------------------------

    def __add__(self, other):
        return _make_add(self, as_expr(other))

    def __radd__(self, other):
        return _make_add(as_expr(other), self)

    def __sub__(self, other):
        return _make_add(self, _make_neg(as_expr(other)))

    def __rsub__(self, other):
        return _make_add(as_expr(other), _make_neg(self))

    def __neg__(self):
        return _make_neg(self)

    def __pos__(self):
        return self

    def __mul__(self, other):
        return _make_mul(self, as_expr(other))

    def __rmul__(self, other):
        return _make_mul(as_expr(other), self)

    def __truediv__(self, other):
        return _make_div(self, as_expr(other))

    def __rtruediv__(self, other):
        return _make_div(as_expr(other), self)

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("only integer powers are supported")
        return _make_pow(self, n)

    # -- semantics ----------------------------------------------------------

    def normal(self) -> NormalForm:
        if self._nf is None:
            self._nf = self._normal()
        return self._nf

    def _normal(self) -> NormalForm:
        raise NotImplementedError

    def __eq__(self, other):
        try:
            other = as_expr(other)
        except TypeError:
            return NotImplemented
        return equal_zero(self - other)

    def __hash__(self):
        return hash(self.normal())

    def atoms(self) -> set:
        """All variable names occurring in the tree (coordinates and jets)."""
        out: set = set()
        self._collect_atoms(out)
        return out

    def _collect_atoms(self, out: set):
        raise NotImplementedError

    def jet_atoms(self) -> set:
        out: set = set()
        self._collect_jets(out)
        return out

    def _collect_jets(self, out: set):
        raise NotImplementedError

    def is_rational_const(self) -> bool:
        return isinstance(self, Rat)

    def __str__(self):
        return self._fmt(0)

    def __repr__(self):
        return self._fmt(0)

    def _fmt(self, prec: int) -> str:
        raise NotImplementedError


# precedence levels for printing: 0 sum, 1 product, 2 unary, 3 power, 4 atom


class Rat(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        super().__init__()
        self.value = Fraction(value)

    def _normal(self):
        return NormalForm(Poly.const(self.value), Poly.const(1), reduced=True)

    def _collect_atoms(self, out):
        pass

    def _collect_jets(self, out):
        pass

    def _fmt(self, prec):
        s = _frac_str(self.value)
        if (self.value < 0 and prec >= 1) or ("/" in s and prec >= 1):
            return f"({s})"
        return s

    def _eval(self, env, numeric):
        return self.value if not numeric else float(self.value)


class Var(Expr):
    """A coordinate variable."""

    __slots__ = ("name",)

    def __init__(self, name: str):
        super().__init__()
        self.name = name

    def _normal(self):
        return NormalForm(Poly.variable(self.name), Poly.const(1),
                          {self.name: self}, reduced=True)

    def _collect_atoms(self, out):
        out.add(self.name)

    def _collect_jets(self, out):
        pass

    def _fmt(self, prec):
        return self.name

    def _eval(self, env, numeric):
        try:
            v = env[self.name]
        except KeyError:
            raise EvalError(f"missing assignment for {self.name!r}") from None
        return float(v) if numeric else Fraction(v)


class JetVar(Expr):
    """A jet of an opaque symbol: the symbol differentiated per a multi-index."""

    __slots__ = ("symbol", "orders")

    def __init__(self, symbol: OpaqueSymbol, orders):
        super().__init__()
        self.symbol = symbol
        self.orders = tuple(orders)
        if len(self.orders) != len(symbol.deps):
            raise ValueError("jet multi-index length does not match symbol arity")
        if any(o < 0 for o in self.orders):
            raise ValueError("negative differentiation order")

    @property
    def name(self) -> str:
        """The printable (and re-parseable) variable name, e.g. ``h_xxy``."""
        if not any(self.orders):
            return self.symbol.name
        suffix = "".join(
            dep * order for dep, order in zip(self.symbol.deps, self.orders)
        )
        return f"{self.symbol.name}_{suffix}"

    def bump(self, coord: str) -> "JetVar":
        i = self.symbol.deps.index(coord)
        orders = list(self.orders)
        orders[i] += 1
        return JetVar(self.symbol, orders)

    def _normal(self):
        return NormalForm(Poly.variable(self.name), Poly.const(1),
                          {self.name: self}, reduced=True)

    def _collect_atoms(self, out):
        out.add(self.name)

    def _collect_jets(self, out):
        out.add(self)

    def _fmt(self, prec):
        return self.name

    def _eval(self, env, numeric):
        try:
            v = env[self.name]
        except KeyError:
            raise EvalError(f"missing assignment for {self.name!r}") from None
        return float(v) if numeric else Fraction(v)

    # JetVar is used in sets during traversal; identity there must be
    # structural, not semantic, so override the Expr comparison.
    def __eq__(self, other):
        if isinstance(other, JetVar):
            return self.symbol == other.symbol and self.orders == other.orders
        return Expr.__eq__(self, other)

    def __hash__(self):
        return hash((self.symbol, self.orders))


class Add(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms):
        super().__init__()
        self.terms = tuple(terms)

    def _normal(self):
        nf = self.terms[0].normal()
        for t in self.terms[1:]:
            nf = nf.add(t.normal())
        return nf

    def _collect_atoms(self, out):
        for t in self.terms:
            t._collect_atoms(out)

    def _collect_jets(self, out):
        for t in self.terms:
            t._collect_jets(out)

    def _fmt(self, prec):
        parts = [self.terms[0]._fmt(0)]
        for t in self.terms[1:]:
            s = t._fmt(0)
            parts.append("- " + s[1:].lstrip() if s.startswith("-") else "+ " + s)
        body = " ".join(parts)
        return f"({body})" if prec >= 1 else body

    def _eval(self, env, numeric):
        return sum(t._eval(env, numeric) for t in self.terms)


class Mul(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors):
        super().__init__()
        self.factors = tuple(factors)

    def _normal(self):
        nf = self.factors[0].normal()
        for f in self.factors[1:]:
            nf = nf.mul(f.normal())
        return nf

    def _collect_atoms(self, out):
        for f in self.factors:
            f._collect_atoms(out)

    def _collect_jets(self, out):
        for f in self.factors:
            f._collect_jets(out)

    def _fmt(self, prec):
        # negative-power factors print as division
        num, den = [], []
        for f in self.factors:
            if isinstance(f, Pow) and f.exponent < 0:
                den.append(f.base._fmt(3) if f.exponent == -1 else Pow(f.base, -f.exponent)._fmt(1))
            else:
                num.append(f._fmt(1))
        body = "*".join(num) if num else "1"
        for d in den:
            body += f"/{d}"
        return f"({body})" if prec >= 2 else body

    def _eval(self, env, numeric):
        out = 1.0 if numeric else Fraction(1)
        for f in self.factors:
            out *= f._eval(env, numeric)
        return out


class Pow(Expr):
    __slots__ = ("base", "exponent")

    def __init__(self, base: Expr, exponent: int):
        super().__init__()
        self.base = base
        self.exponent = exponent

    def _normal(self):
        return self.base.normal().pow_int(self.exponent)

    def _collect_atoms(self, out):
        self.base._collect_atoms(out)

    def _collect_jets(self, out):
        self.base._collect_jets(out)

    def _fmt(self, prec):
        if self.exponent < 0:
            body = f"1/{Pow(self.base, -self.exponent)._fmt(3)}" if self.exponent != -1 else f"1/{self.base._fmt(3)}"
            return f"({body})" if prec >= 2 else body
        body = f"{self.base._fmt(3)}^{self.exponent}"
        return f"({body})" if prec >= 4 else body

    def _eval(self, env, numeric):
        b = self.base._eval(env, numeric)
        if self.exponent < 0 and not b:
            raise ZeroDenominator("division by zero at the evaluation point")
        return b ** self.exponent


ZERO = Rat(0)
ONE = Rat(1)


def as_expr(value) -> Expr:
    """Coerce ints, Fractions and strings-of-integers into expressions."""
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, Fraction)):
        return Rat(value)
    raise TypeError(f"cannot interpret {value!r} as an expression")


def _make_add(*parts: Expr) -> Expr:
    terms = []
    const = Fraction(0)
    for p in parts:
        queue = list(p.terms) if isinstance(p, Add) else [p]
        for t in queue:
            if isinstance(t, Rat):
                const += t.value
            else:
                terms.append(t)
    if const:
        terms.append(Rat(const))
    if not terms:
        return ZERO
    if len(terms) == 1:
        return terms[0]
    return Add(tuple(terms))


def _make_neg(e: Expr) -> Expr:
    if isinstance(e, Rat):
        return Rat(-e.value)
    return _make_mul(Rat(-1), e)


def _make_mul(*parts: Expr) -> Expr:
    factors = []
    const = Fraction(1)
    for p in parts:
        queue = list(p.factors) if isinstance(p, Mul) else [p]
        for f in queue:
            if isinstance(f, Rat):
                const *= f.value
            else:
                factors.append(f)
    if not const:
        return ZERO
    if const != 1:
        factors.insert(0, Rat(const))
    if not factors:
        return ONE
    if len(factors) == 1:
        return factors[0]
    return Mul(tuple(factors))


def _make_pow(base: Expr, n: int) -> Expr:
    if n == 0:
        return ONE
    if n == 1:
        return base
    if isinstance(base, Rat):
        if base.value == 0 and n < 0:
            raise ZeroDenominator("division by an expression that normalizes to zero")
        return Rat(base.value ** n)
    if isinstance(base, Pow):
        return _make_pow(base.base, base.exponent * n)
    if n < 0 and base.normal().is_zero:
        raise ZeroDenominator("division by an expression that normalizes to zero")
    return Pow(base, n)


def _make_div(a: Expr, b: Expr) -> Expr:
    return _make_mul(a, _make_pow(b, -1))


# ---------------------------------------------------------------------------
# parsing

_TOKEN_SYMBOLS = ("+", "-", "*", "/", "^", "(", ")", ",", ";", "@", "|", "=", "->")


def tokenize(text: str):
    """Split into (kind, value, position) tokens.

    Kinds: ``int``, ``name``, ``op``.  Raises ParseError on anything else.
    """
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and (text[j] == "." or text[j].isalpha()):
                if text[j] == ".":
                    raise ParseError("decimal literals are not supported; use exact fractions", text, j)
                raise ParseError("missing operator between number and name", text, j)
            tokens.append(("int", text[i:j], i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j], i))
            i = j
            continue
        if text.startswith("->", i):
            tokens.append(("op", "->", i))
            i += 2
            continue
        if ch in "+-*/^(),;@|=":
            tokens.append(("op", ch, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", text, i)
    return tokens


def _split_jet_suffix(suffix: str, deps) -> tuple | None:
    """Decompose a differentiation suffix into dependency coordinates.

    Returns the multi-index, or None if no decomposition exists.  Raises
    ParseError-free ValueError on ambiguity (caller rephrases).
    """
    solutions = []

    def walk(rest, counts):
        if not rest:
            solutions.append(tuple(counts))
            return
        for i, d in enumerate(deps):
            if rest.startswith(d):
                counts[i] += 1
                walk(rest[len(d):], counts)
                counts[i] -= 1

    walk(suffix, [0] * len(deps))
    if not solutions:
        return None
    distinct = set(solutions)
    if len(distinct) > 1:
        raise ValueError(f"ambiguous jet suffix {suffix!r}")
    return solutions[0]


def resolve_name(name: str, chart_names, symbols) -> Expr:
    """Map an identifier to a coordinate Var or a JetVar of a declared symbol."""
    if name in chart_names:
        return Var(name)
    by_name = {s.name: s for s in symbols}
    if name in by_name:
        return by_name[name]()
    if "_" in name:
        head, _, suffix = name.partition("_")
        if head in by_name and suffix:
            sym = by_name[head]
            try:
                orders = _split_jet_suffix(suffix, sym.deps)
            except ValueError as exc:
                raise KeyError(str(exc)) from None
            if orders is not None:
                return sym.jet(orders)
    raise KeyError(name)


class _Parser:
    """Recursive-descent parser for scalar expressions.

    Grammar::

        expr   := term (('+' | '-') term)*
        term   := factor (('*' | '/') factor)*
        factor := ('+' | '-')* power
        power  := atom ('^' ('-')? int)?
        atom   := int | name | '(' expr ')'
    """

    def __init__(self, text: str, tokens, chart_names, symbols):
        self.text = text
        self.tokens = tokens
        self.pos = 0
        self.chart_names = tuple(chart_names)
        self.symbols = tuple(symbols)

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", self.text, len(self.text))
        self.pos += 1
        return tok

    def expect_op(self, value):
        tok = self.next()
        if tok[0] != "op" or tok[1] != value:
            raise ParseError(f"expected {value!r}", self.text, tok[2])
        return tok

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok is not None:
            raise ParseError("trailing input after expression", self.text, tok[2])
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            tok = self.peek()
            if tok and tok[0] == "op" and tok[1] in "+-":
                self.next()
                rhs = self.term()
                e = e + rhs if tok[1] == "+" else e - rhs
            else:
                return e

    def term(self) -> Expr:
        e = self.factor()
        while True:
            tok = self.peek()
            if tok and tok[0] == "op" and tok[1] in "*/":
                self.next()
                rhs = self.factor()
                if tok[1] == "*":
                    e = e * rhs
                else:
                    try:
                        e = e / rhs
                    except ZeroDenominator:
                        raise ParseError("division by zero", self.text, tok[2]) from None
            else:
                return e

    def factor(self) -> Expr:
        sign = 1
        while True:
            tok = self.peek()
            if tok and tok[0] == "op" and tok[1] in "+-":
                self.next()
                if tok[1] == "-":
                    sign = -sign
            else:
                break
        e = self.power()
        return e if sign > 0 else -e

    def power(self) -> Expr:
        e = self.atom()
        tok = self.peek()
        if tok and tok[0] == "op" and tok[1] == "^":
            self.next()
            neg = False
            t = self.next()
            if t[0] == "op" and t[1] == "-":
                neg = True
                t = self.next()
            if t[0] != "int":
                raise ParseError("exponent must be an integer literal", self.text, t[2])
            n = int(t[1])
            try:
                e = e ** (-n if neg else n)
            except ZeroDenominator:
                raise ParseError("zero raised to a negative power", self.text, t[2]) from None
        return e

    def atom(self) -> Expr:
        tok = self.next()
        kind, value, pos = tok
        if kind == "int":
            return Rat(int(value))
        if kind == "name":
            try:
                return resolve_name(value, self.chart_names, self.symbols)
            except KeyError as exc:
                detail = str(exc).strip("'")
                raise UnknownIdentifier(f"unknown identifier {detail!r}", self.text, pos) from None
        if kind == "op" and value == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        raise ParseError(f"unexpected token {value!r}", self.text, pos)


def parse_expr(text: str, chart_names, symbols=()) -> Expr:
    """Parse a scalar expression over the given coordinate names and symbols."""
    tokens = tokenize(text)
    return _Parser(text, tokens, chart_names, symbols).parse()


# ---------------------------------------------------------------------------
# calculus on scalars


def diff(e: Expr, var: str) -> Expr:
    """Partial derivative with respect to a coordinate name.

    Jets of opaque symbols differentiate by bumping the multi-index when the
    coordinate is among the symbol's dependencies, and to zero otherwise.
    """
    if isinstance(e, Rat):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == var else ZERO
    if isinstance(e, JetVar):
        if var in e.symbol.deps:
            return e.bump(var)
        return ZERO
    if isinstance(e, Add):
        return _make_add(*(diff(t, var) for t in e.terms))
    if isinstance(e, Mul):
        terms = []
        for i, f in enumerate(e.factors):
            df = diff(f, var)
            if isinstance(df, Rat) and df.value == 0:
                continue
            rest = e.factors[:i] + e.factors[i + 1:]
            terms.append(_make_mul(df, *rest))
        return _make_add(*terms) if terms else ZERO
    if isinstance(e, Pow):
        db = diff(e.base, var)
        if isinstance(db, Rat) and db.value == 0:
            return ZERO
        return _make_mul(Rat(e.exponent), _make_pow(e.base, e.exponent - 1), db)
    raise TypeError(f"cannot differentiate {e!r}")


def directional(components, chart_names, f: Expr) -> Expr:
    """Derivative of f along a vector with the given components."""
    return _make_add(*(
        _make_mul(c, diff(f, name))
        for c, name in zip(components, chart_names)
    ))


def normalize(e: Expr) -> NormalForm:
    """Canonical reduced numerator/denominator pair for the expression."""
    return as_expr(e).normal()


_DEFAULT_CHECK_SEED = 97131
_check_seed_value = _DEFAULT_CHECK_SEED
_check_rng = random.Random(_DEFAULT_CHECK_SEED)


def set_check_seed(seed: int):
    """Reseed the random-point cross-check used by equal_zero."""
    global _check_rng, _check_seed_value
    _check_seed_value = int(seed)
    _check_rng = random.Random(_check_seed_value)


def check_seed() -> int:
    """The seed currently driving the random-point cross-check."""
    return _check_seed_value


def _random_point(names, rng, spread):
    return {
        name: Fraction(rng.randint(-spread, spread), rng.randint(1, 7))
        for name in names
    }


def equal_zero(e: Expr, points: int = 20) -> bool:
    """Decide whether the expression is identically zero.

    The verdict comes from the normal form; it is then cross-checked by
    evaluating the original tree at `points` random rational points that
    avoid denominator zeros.  Disagreement raises RuntimeError, since it
    would mean the normalizer itself is wrong.
    """
    e = as_expr(e)
    verdict = e.normal().is_zero
    names = sorted(e.atoms())
    rng = _check_rng
    checked = 0
    saw_nonzero = False
    spread = 12
    attempts = 0
    while checked < points and attempts < 40 * points:
        attempts += 1
        env = _random_point(names, rng, spread)
        try:
            value = e._eval(env, numeric=False)
        except ZeroDenominator:
            spread += 1
            continue
        checked += 1
        if value != 0:
            saw_nonzero = True
            if verdict:
                raise RuntimeError(
                    f"normal form claims zero but {e} evaluates to {value} at {env}"
                )
            break
    if checked == 0:
        raise RuntimeError(f"could not sample an evaluation point for {e}")
    if not verdict and not saw_nonzero and checked >= points:
        # Vanishing at many random rational points while the normal form is
        # nonzero would indicate a normalizer defect.
        raise RuntimeError(
            f"normal form claims nonzero but {e} vanished at {checked} random points"
        )
    return verdict


def is_zero(e: Expr) -> bool:
    """Fast zero test through the normal form only (no random cross-check)."""
    return as_expr(e).normal().is_zero


def eval_num(e: Expr, assignment: dict) -> Fraction:
    """Exact evaluation at a rational point.

    The assignment maps variable names (coordinates and jet names such as
    ``h_x``) to ints or Fractions.  Missing assignments raise EvalError;
    division by zero at the point raises ZeroDenominator.
    """
    return as_expr(e)._eval(assignment, numeric=False)


def eval_float(e: Expr, assignment: dict) -> float:
    """Floating-point evaluation; used only by the SVG plotter."""
    return as_expr(e)._eval(assignment, numeric=True)


def substitute(e: Expr, mapping: dict) -> Expr:
    """Simultaneous substitution of coordinate names by expressions.

    Substituting into a jet is only possible when every dependency of its
    symbol is either left alone or replaced by itself; anything else would
    require representing the composite of an opaque function, which this
    representation cannot do (CompositionError).
    """
    mapping = {name: as_expr(v) for name, v in mapping.items()}

    def walk(node: Expr) -> Expr:
        if isinstance(node, Rat):
            return node
        if isinstance(node, Var):
            return mapping.get(node.name, node)
        if isinstance(node, JetVar):
            for dep in node.symbol.deps:
                if dep in mapping:
                    target = mapping[dep]
                    if not (isinstance(target, Var) and target.name == dep):
                        raise CompositionError(
                            f"cannot substitute {dep!r} inside opaque symbol "
                            f"{node.symbol.name!r}: composites of opaque functions "
                            "are not representable"
                        )
            return node
        if isinstance(node, Add):
            return _make_add(*(walk(t) for t in node.terms))
        if isinstance(node, Mul):
            return _make_mul(*(walk(f) for f in node.factors))
        if isinstance(node, Pow):
            return _make_pow(walk(node.base), node.exponent)
        raise TypeError(f"cannot substitute into {node!r}")

    return walk(as_expr(e))


def bind_symbol(e: Expr, symbol: OpaqueSymbol, value: Expr) -> Expr:
    """Replace every jet of `symbol` by the matching derivative of `value`.

    `value` must not itself contain opaque symbols.
    """
    value = as_expr(value)
    if value.jet_atoms():
        raise CompositionError("binding value must be free of opaque symbols")

    def deriv(orders):
        out = value
        for dep, order in zip(symbol.deps, orders):
            for _ in range(order):
                out = diff(out, dep)
        return out

    def walk(node: Expr) -> Expr:
        if isinstance(node, (Rat, Var)):
            return node
        if isinstance(node, JetVar):
            if node.symbol == symbol:
                return deriv(node.orders)
            return node
        if isinstance(node, Add):
            return _make_add(*(walk(t) for t in node.terms))
        if isinstance(node, Mul):
            return _make_mul(*(walk(f) for f in node.factors))
        if isinstance(node, Pow):
            return _make_pow(walk(node.base), node.exponent)
        raise TypeError(f"cannot bind inside {node!r}")

    return walk(as_expr(e))
