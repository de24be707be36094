"""Sparse multivariate polynomials over exact rationals.

Monomials are exponent tuples indexed by a shared variable registry; the
registry fixes the variable precedence used by the monomial order.  All
arithmetic is exact (fractions.Fraction coefficients) and all values are
immutable after construction.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction


class RegistryMismatch(ValueError):
    """Raised when two polynomials do not share a registry/order."""


class VarRegistry:
    """An ordered set of variable names; the order fixes monomial precedence."""

    __slots__ = ("names", "order", "_index")

    def __init__(self, names, order="grevlex"):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable names")
        for n in names:
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", n):
                raise ValueError(f"bad variable name: {n!r}")
        if order not in ("grevlex", "lex"):
            raise ValueError(f"unknown monomial order: {order!r}")
        self.names = names
        self.order = order
        self._index = {n: i for i, n in enumerate(names)}

    def index(self, name):
        return self._index[name]

    def __len__(self):
        return len(self.names)

    def __eq__(self, other):
        return (isinstance(other, VarRegistry)
                and self.names == other.names and self.order == other.order)

    def __hash__(self):
        return hash((self.names, self.order))

    def __repr__(self):
        return f"VarRegistry({list(self.names)}, order={self.order!r})"

    def with_order(self, order):
        return VarRegistry(self.names, order)

    @property
    def zero_mon(self):
        return (0,) * len(self.names)

    def mon_key(self, m):
        """Sort key: larger key = larger monomial in this registry's order."""
        if self.order == "grevlex":
            return (sum(m), tuple(-e for e in reversed(m)))
        return m


def mon_mul(a, b):
    return tuple(x + y for x, y in zip(a, b))


def mon_div(a, b):
    """a / b, or None if b does not divide a."""
    q = []
    for x, y in zip(a, b):
        if x < y:
            return None
        q.append(x - y)
    return tuple(q)


def mon_lcm(a, b):
    return tuple(max(x, y) for x, y in zip(a, b))


def mon_gcd(a, b):
    return tuple(min(x, y) for x, y in zip(a, b))


def mon_deg(a):
    return sum(a)


class Poly:
    """Immutable sparse polynomial attached to a VarRegistry."""

    __slots__ = ("reg", "terms", "_lead")

    def __init__(self, reg, terms=None):
        self.reg = reg
        clean = {}
        n = len(reg)
        if terms:
            for m, c in terms.items():
                if len(m) != n or any(e < 0 for e in m):
                    raise ValueError(f"bad exponent vector {m}")
                c = Fraction(c)
                if c:
                    prev = clean.get(m)
                    c = c + prev if prev is not None else c
                    if c:
                        clean[m] = c
                    else:
                        del clean[m]
        self.terms = clean
        self._lead = None

    # -- constructors ---------------------------------------------------

    @classmethod
    def zero(cls, reg):
        return cls(reg)

    @classmethod
    def constant(cls, reg, c):
        c = Fraction(c)
        return cls(reg, {reg.zero_mon: c} if c else {})

    @classmethod
    def variable(cls, reg, name, power=1):
        m = [0] * len(reg)
        m[reg.index(name)] = power
        return cls(reg, {tuple(m): Fraction(1)})

    # -- basic structure -------------------------------------------------

    def is_zero(self):
        return not self.terms

    def total_degree(self):
        return max((mon_deg(m) for m in self.terms), default=-1)

    def lead(self):
        """(monomial, coefficient) of the leading term; error on zero."""
        if self._lead is None:
            if not self.terms:
                raise ValueError("zero polynomial has no leading term")
            m = max(self.terms, key=self.reg.mon_key)
            self._lead = (m, self.terms[m])
        return self._lead

    def lead_mon(self):
        return self.lead()[0]

    def lead_coeff(self):
        return self.lead()[1]

    def variables(self):
        """Names of variables actually present."""
        used = [False] * len(self.reg)
        for m in self.terms:
            for i, e in enumerate(m):
                if e:
                    used[i] = True
        return tuple(n for n, u in zip(self.reg.names, used) if u)

    def as_constant(self):
        """The constant value if the polynomial is constant, else None."""
        if not self.terms:
            return Fraction(0)
        if len(self.terms) == 1 and self.reg.zero_mon in self.terms:
            return self.terms[self.reg.zero_mon]
        return None

    # -- arithmetic -------------------------------------------------------

    def _check(self, other):
        if self.reg != other.reg:
            raise RegistryMismatch("polynomials use different registries")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.constant(self.reg, other)
        self._check(other)
        res = dict(self.terms)
        for m, c in other.terms.items():
            s = res.get(m, 0) + c
            if s:
                res[m] = s
            else:
                res.pop(m, None)
        return Poly(self.reg, res)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.reg, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.constant(self.reg, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = Fraction(other)
            if not c:
                return Poly.zero(self.reg)
            return Poly(self.reg, {m: v * c for m, v in self.terms.items()})
        self._check(other)
        res = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = mon_mul(m1, m2)
                s = res.get(m, 0) + c1 * c2
                if s:
                    res[m] = s
                else:
                    del res[m]
        return Poly(self.reg, res)

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result = Poly.constant(self.reg, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.as_constant() == Fraction(other)
        return (isinstance(other, Poly) and self.reg == other.reg
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.reg, tuple(sorted(self.terms.items()))))

    # -- normalization ----------------------------------------------------

    def primitive(self):
        """Integer-primitive multiple with positive leading coefficient.

        The result equals ``self`` up to a positive rational scalar, which is
        the right notion of canonical form for ideal membership work.
        """
        if not self.terms:
            return self
        den = 1
        for c in self.terms.values():
            den = den * c.denominator // math.gcd(den, c.denominator)
        num = 0
        for c in self.terms.values():
            num = math.gcd(num, abs(c.numerator * (den // c.denominator)))
        scale = Fraction(den, num)
        p = self * scale
        if p.lead_coeff() < 0:
            p = -p
        return p

    def monic(self):
        if self.is_zero():
            return self
        return self * (1 / self.lead_coeff())

    # -- evaluation --------------------------------------------------------

    def evaluate(self, values):
        """Evaluate with ``values`` mapping every present variable to a ring
        element (exact scalars such as Cyclotomic, Fraction, or Poly)."""
        idx = {self.reg.index(n): v for n, v in values.items()}
        total = None
        for m, c in self.terms.items():
            term = None
            for i, e in enumerate(m):
                if not e:
                    continue
                if i not in idx:
                    raise KeyError(f"no value for variable {self.reg.names[i]}")
                f = idx[i] ** e
                term = f if term is None else term * f
            term = c if term is None else term * c
            total = term if total is None else total + term
        if total is None:
            return Fraction(0)
        return total

    # -- printing / parsing -------------------------------------------------

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, key=self.reg.mon_key, reverse=True):
            c = self.terms[m]
            factors = []
            for name, e in zip(self.reg.names, m):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            mag = abs(c)
            if not factors:
                body = _frac_str(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = _frac_str(mag) + "*" + "*".join(factors)
            if not parts:
                parts.append(body if c > 0 else "-" + body)
            else:
                parts.append((" + " if c > 0 else " - ") + body)
        return "".join(parts)

    def __repr__(self):
        return f"Poly({self})"


def _frac_str(q):
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


# -- arithmetic entry point matching the documented op surface ---------------

def poly_arith(a, b, op):
    """Exact add/sub/mul on polynomials sharing a registry."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def poly_reduce(f, divisors):
    """Full normal form of f modulo an ordered divisor sequence.

    No term of the remainder is divisible by any divisor's leading term;
    the result is deterministic in the given divisor order.
    """
    divisors = [d for d in divisors if not d.is_zero()]
    for d in divisors:
        f._check(d)
    leads = [(d.lead_mon(), d.lead_coeff(), d) for d in divisors]
    reg = f.reg
    key = reg.mon_key
    work = dict(f.terms)
    remainder = {}
    while work:
        m = max(work, key=key)
        c = work.pop(m)
        for lm, lc, d in leads:
            q = mon_div(m, lm)
            if q is not None:
                factor = c / lc
                for dm, dc in d.terms.items():
                    if dm == lm:
                        continue
                    t = mon_mul(q, dm)
                    s = work.get(t, 0) - factor * dc
                    if s:
                        work[t] = s
                    else:
                        work.pop(t, None)
                break
        else:
            remainder[m] = c
    return Poly(reg, remainder)


def exact_div(f, g):
    """Quotient f/g when g divides f exactly, else None."""
    f._check(g)
    if g.is_zero():
        raise ZeroDivisionError("division by zero polynomial")
    if f.is_zero():
        return Poly.zero(f.reg)
    gm, gc = g.lead()
    work = dict(f.terms)
    quot = {}
    key = f.reg.mon_key
    while work:
        m = max(work, key=key)
        c = work[m]
        q = mon_div(m, gm)
        if q is None:
            return None
        factor = c / gc
        quot[q] = factor
        for dm, dc in g.terms.items():
            t = mon_mul(q, dm)
            s = work.get(t, 0) - factor * dc
            if s:
                work[t] = s
            else:
                work.pop(t, None)
    return Poly(f.reg, quot)


# -- parser -------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|([-+*/^()]))")


def _tokenize(s):
    pos = 0
    out = []
    while pos < len(s):
        m = _TOKEN.match(s, pos)
        if not m or m.end() == pos:
            raise ValueError(f"bad character in polynomial at {s[pos:pos+10]!r}")
        pos = m.end()
        if m.group(1):
            out.append(("int", int(m.group(1))))
        elif m.group(2):
            out.append(("name", m.group(2)))
        else:
            out.append(("op", m.group(3)))
    out.append(("end", None))
    return out


class _Parser:
    """Recursive-descent parser for the documented polynomial grammar:
    integers, rationals (n/m), registry variables, + - * / ^ and parentheses.
    """

    def __init__(self, reg, tokens):
        self.reg = reg
        self.toks = tokens
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def parse(self):
        e = self.expr()
        if self.peek()[0] != "end":
            raise ValueError(f"trailing input near token {self.peek()!r}")
        return e

    def expr(self):
        kind, val = self.peek()
        neg = False
        if kind == "op" and val in "+-":
            self.next()
            neg = val == "-"
        e = self.term()
        if neg:
            e = -e
        while True:
            kind, val = self.peek()
            if kind == "op" and val in "+-":
                self.next()
                rhs = self.term()
                e = e - rhs if val == "-" else e + rhs
            else:
                return e

    def term(self):
        e = self.factor()
        while True:
            kind, val = self.peek()
            if kind == "op" and val == "*":
                self.next()
                e = e * self.factor()
            elif kind == "op" and val == "/":
                self.next()
                kind2, val2 = self.next()
                if kind2 != "int":
                    raise ValueError("denominator must be an integer literal")
                e = e * Fraction(1, val2)
            else:
                return e

    def factor(self):
        base = self.atom()
        kind, val = self.peek()
        if kind == "op" and val == "^":
            self.next()
            kind2, val2 = self.next()
            if kind2 != "int":
                raise ValueError("exponent must be an integer literal")
            return base ** val2
        return base

    def atom(self):
        kind, val = self.next()
        if kind == "int":
            return Poly.constant(self.reg, val)
        if kind == "name":
            if val not in self.reg._index:
                raise ValueError(f"unknown variable {val!r}")
            return Poly.variable(self.reg, val)
        if kind == "op" and val == "(":
            e = self.expr()
            kind2, val2 = self.next()
            if (kind2, val2) != ("op", ")"):
                raise ValueError("missing closing parenthesis")
            return e
        if kind == "op" and val == "-":
            return -self.atom()
        raise ValueError(f"unexpected token {val!r}")


def parse_poly(reg, s):
    """Parse a polynomial string against a registry (round-trips str(poly))."""
    return _Parser(reg, _tokenize(s)).parse()
