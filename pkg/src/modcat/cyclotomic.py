"""Exact arithmetic in cyclotomic fields Q(zeta_N).

Elements are stored as rational coordinate vectors in the power basis
zeta^0 .. zeta^{phi(N)-1}, canonically reduced modulo the N-th cyclotomic
polynomial.  Mixed-conductor arithmetic lifts both operands to the least
common conductor; equality is decided exactly on canonical forms.  The
floating embedding exists for cross-checks only and never drives decisions.
"""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath

from .poly import Poly, VarRegistry

_X = VarRegistry(("x",))


def factorize(n):
    """Prime factorization as a dict prime -> multiplicity (trial division)."""
    out = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def euler_phi(n):
    phi = 1
    for p, e in factorize(n).items():
        phi *= (p - 1) * p ** (e - 1)
    return phi


def divisors(n):
    ds = [1]
    for p, e in factorize(n).items():
        ds = [d * p ** i for d in ds for i in range(e + 1)]
    return sorted(ds)


def units_mod(n):
    if n == 1:
        return [1]
    return [k for k in range(1, n) if math.gcd(k, n) == 1]


def _poly_divmod_int(num, den):
    """Exact divmod for dense integer coefficient lists (monic-safe here)."""
    num = list(num)
    q = [0] * (len(num) - len(den) + 1)
    for i in range(len(num) - len(den), -1, -1):
        c = num[i + len(den) - 1]
        if c % den[-1]:
            raise ArithmeticError("non-exact division in cyclotomic setup")
        c //= den[-1]
        q[i] = c
        for j, d in enumerate(den):
            num[i + j] -= c * d
    while num and num[-1] == 0:
        num.pop()
    return q, num


_CYCLO_CACHE = {}


def cyclotomic_polynomial(n):
    """Coefficients of Phi_n, ascending, as integers."""
    if n in _CYCLO_CACHE:
        return _CYCLO_CACHE[n]
    poly = [-1] + [0] * (n - 1) + [1]  # x^n - 1
    for d in divisors(n):
        if d == n:
            continue
        poly, rem = _poly_divmod_int(poly, cyclotomic_polynomial(d))
        if rem:
            raise ArithmeticError("cyclotomic recursion failed")
    _CYCLO_CACHE[n] = tuple(poly)
    return _CYCLO_CACHE[n]


class _Field:
    """Cached per-conductor data: phi, Phi_N, and x^e mod Phi_N tables."""

    __slots__ = ("n", "phi", "minpoly", "powtab")

    def __init__(self, n):
        self.n = n
        self.phi = euler_phi(n)
        self.minpoly = cyclotomic_polynomial(n)
        # powtab[e] = coordinates of zeta^e in the power basis, 0 <= e < n
        phi = self.phi
        rows = []
        for e in range(phi):
            row = [0] * phi
            row[e] = 1
            rows.append(tuple(row))
        # x^phi = -(c_0 + ... + c_{phi-1} x^{phi-1}) since Phi is monic
        top = tuple(-c for c in self.minpoly[:phi])
        for e in range(phi, n):
            prev = rows[e - 1]
            shifted = (0,) + prev[:-1]
            carry = prev[-1]
            if carry:
                shifted = tuple(s + carry * t for s, t in zip(shifted, top))
            rows.append(shifted)
        self.powtab = rows


_FIELDS = {}


def _field(n):
    f = _FIELDS.get(n)
    if f is None:
        f = _Field(n)
        _FIELDS[n] = f
    return f


class Cyclotomic:
    """An element of Q(zeta_N) in canonical power-basis form."""

    __slots__ = ("n", "c")

    def __init__(self, conductor, coeffs):
        f = _field(conductor)
        coeffs = tuple(Fraction(x) for x in coeffs)
        if len(coeffs) != f.phi:
            raise ValueError(f"need {f.phi} coordinates at conductor {conductor}")
        self.n = conductor
        self.c = coeffs

    # -- constructors ----------------------------------------------------

    @classmethod
    def root(cls, conductor, exponent=1):
        """zeta_conductor ** exponent in canonical form."""
        if conductor < 1:
            raise ValueError("conductor must be >= 1")
        f = _field(conductor)
        e = exponent % conductor
        return cls(conductor, f.powtab[e])

    @classmethod
    def from_rational(cls, q):
        return cls(1, (Fraction(q),))

    @classmethod
    def zero(cls):
        return cls(1, (Fraction(0),))

    @classmethod
    def one(cls):
        return cls(1, (Fraction(1),))

    # -- structure ---------------------------------------------------------

    def is_zero(self):
        return all(x == 0 for x in self.c)

    def rational_value(self):
        """The element as a Fraction if it lies in Q, else None."""
        if any(self.c[1:]):
            return None
        return self.c[0]

    def lift(self, m):
        """Rewrite at conductor m (self.n must divide m)."""
        if m == self.n:
            return self
        if m % self.n:
            raise ValueError("can only lift to a multiple of the conductor")
        f = _field(m)
        step = m // self.n
        acc = [Fraction(0)] * f.phi
        for i, q in enumerate(self.c):
            if not q:
                continue
            row = f.powtab[(i * step) % m]
            for j, r in enumerate(row):
                if r:
                    acc[j] += q * r
        return Cyclotomic(m, acc)

    def _pair(self, other):
        if isinstance(other, (int, Fraction)):
            other = Cyclotomic.from_rational(other)
        if not isinstance(other, Cyclotomic):
            return None, None
        if self.n == other.n:
            return self, other
        m = self.n * other.n // math.gcd(self.n, other.n)
        return self.lift(m), other.lift(m)

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        return Cyclotomic(a.n, tuple(x + y for x, y in zip(a.c, b.c)))

    __radd__ = __add__

    def __neg__(self):
        return Cyclotomic(self.n, tuple(-x for x in self.c))

    def __sub__(self, other):
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        return Cyclotomic(a.n, tuple(x - y for x, y in zip(a.c, b.c)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        f = _field(a.n)
        phi = f.phi
        prod = [Fraction(0)] * (2 * phi - 1)
        for i, x in enumerate(a.c):
            if not x:
                continue
            for j, y in enumerate(b.c):
                if y:
                    prod[i + j] += x * y
        acc = list(prod[:phi])
        for e in range(phi, 2 * phi - 1):
            q = prod[e]
            if not q:
                continue
            row = f.powtab[e]
            for j, r in enumerate(row):
                if r:
                    acc[j] += q * r
        return Cyclotomic(a.n, acc)

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("cyclotomic division by zero")
        f = _field(self.n)
        # extended Euclid for self (as a poly) against Phi_n over Q[x]
        r0 = [Fraction(c) for c in f.minpoly]
        r1 = list(self.c)
        while r1 and not r1[-1]:
            r1.pop()
        s0, s1 = [], [Fraction(1)]
        while True:
            deg1 = len(r1) - 1
            if deg1 == 0:
                inv = 1 / r1[0]
                coeffs = [x * inv for x in s1]
                coeffs += [Fraction(0)] * (f.phi - len(coeffs))
                return Cyclotomic(self.n, coeffs[:f.phi])
            # r0 = q*r1 + r2
            r2 = list(r0)
            q = [Fraction(0)] * (len(r0) - len(r1) + 1)
            for i in range(len(r0) - len(r1), -1, -1):
                c = r2[i + deg1] / r1[-1]
                q[i] = c
                if c:
                    for j, d in enumerate(r1):
                        r2[i + j] -= c * d
            while r2 and not r2[-1]:
                r2.pop()
            if not r2:
                raise ZeroDivisionError("element not invertible (unreduced?)")
            # s2 = s0 - q*s1
            s2 = list(s0) + [Fraction(0)] * max(0, len(q) + len(s1) - 1 - len(s0))
            for i, qc in enumerate(q):
                if qc:
                    for j, sc in enumerate(s1):
                        s2[i + j] -= qc * sc
            r0, r1, s0, s1 = r1, r2, s1, s2

    def __truediv__(self, other):
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        return a * b.inverse()

    def __rtruediv__(self, other):
        return Cyclotomic.from_rational(other) / self

    def __pow__(self, n):
        if not isinstance(n, int):
            raise ValueError("exponent must be an integer")
        if n < 0:
            return self.inverse() ** (-n)
        result = Cyclotomic.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        return a.c == b.c

    def __hash__(self):
        m = self.min_conductor()
        return hash((m.n, m.c))

    # -- Galois action ----------------------------------------------------------

    def galois(self, k):
        """Image under zeta -> zeta^k; requires gcd(k, conductor) = 1."""
        n = self.n
        k %= n
        if n == 1:
            return self
        if math.gcd(k, n) != 1:
            raise ValueError(f"{k} is not a unit modulo {n}")
        f = _field(n)
        acc = [Fraction(0)] * f.phi
        for i, q in enumerate(self.c):
            if not q:
                continue
            row = f.powtab[(i * k) % n]
            for j, r in enumerate(row):
                if r:
                    acc[j] += q * r
        return Cyclotomic(n, acc)

    def conj(self):
        """Complex conjugate (the Galois map zeta -> zeta^{-1})."""
        return self.galois(self.n - 1) if self.n > 1 else self

    def conjugates(self):
        """Distinct Galois conjugates over Q."""
        seen = []
        for k in units_mod(self.n):
            g = self.galois(k)
            if g not in seen:
                seen.append(g)
        return seen

    def min_poly(self):
        """Monic integer minimal polynomial over Q as a univariate Poly."""
        conjs = self.conjugates()
        coeffs = [Cyclotomic.one()]  # leading first
        for c in conjs:
            nxt = [Cyclotomic.zero() for _ in range(len(coeffs) + 1)]
            for i, a in enumerate(coeffs):
                nxt[i] = nxt[i] + a          # a * x^(deg+1-i) shift
                nxt[i + 1] = nxt[i + 1] - a * c
            coeffs = nxt
        terms = {}
        deg = len(coeffs) - 1
        for i, a in enumerate(coeffs):
            q = a.rational_value()
            if q is None:
                raise ArithmeticError("minimal polynomial has irrational coefficient")
            if q.denominator != 1:
                raise ArithmeticError("minimal polynomial not integral")
            if q:
                terms[(deg - i,)] = q
        return Poly(_X, terms)

    # -- subfield / descent -------------------------------------------------------

    def descend(self, m):
        """Representation at conductor m (m | conductor) if the element lies
        in Q(zeta_m), else None."""
        if self.n == m:
            return self
        if self.n % m:
            raise ValueError("descent target must divide the conductor")
        fm = _field(m)
        fn = _field(self.n)
        step = self.n // m
        # columns: zeta_n^(j*step) in the big basis, j < phi(m)
        cols = [fn.powtab[(j * step) % self.n] for j in range(fm.phi)]
        sol = _solve_exact(cols, self.c, fn.phi)
        if sol is None:
            return None
        return Cyclotomic(m, sol)

    def min_conductor(self):
        """Canonical copy at the smallest conductor representing the element."""
        for d in divisors(self.n):
            got = self.descend(d)
            if got is not None:
                return got
        return self

    # -- roots of unity ---------------------------------------------------------

    def unity_order(self):
        """Multiplicative order if the element is a root of unity, else None."""
        if self.is_zero():
            return None
        bound = self.n if self.n % 2 == 0 else 2 * self.n
        for m in divisors(bound):
            if (self ** m) == 1:
                return m
        return None

    # -- numeric embedding --------------------------------------------------------

    def embed(self):
        """Complex floating approximation (50-digit internal precision)."""
        with mpmath.workdps(50):
            total = mpmath.mpc(0)
            for i, q in enumerate(self.c):
                if not q:
                    continue
                w = mpmath.expjpi(mpmath.mpf(2 * i) / self.n)
                total += w * mpmath.mpf(q.numerator) / q.denominator
            return complex(total)

    # -- serialization --------------------------------------------------------------

    def to_json(self):
        return {"conductor": self.n,
                "coeffs": [_frac_str(q) for q in self.c]}

    @classmethod
    def from_json(cls, obj):
        return cls(int(obj["conductor"]), [Fraction(s) for s in obj["coeffs"]])

    def __repr__(self):
        q = self.rational_value()
        if q is not None:
            return f"Cyc({_frac_str(q)})"
        parts = []
        for i, a in enumerate(self.c):
            if not a:
                continue
            basis = "1" if i == 0 else (f"z{self.n}" if i == 1 else f"z{self.n}^{i}")
            parts.append(f"{_frac_str(a)}*{basis}" if basis != "1" else _frac_str(a))
        return "Cyc(" + " + ".join(parts) + ")"


def _frac_str(q):
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _solve_exact(cols, target, nrows):
    """Solve sum_j x_j * cols[j] = target exactly over Q; None if unsolvable."""
    ncols = len(cols)
    a = [[Fraction(cols[j][i]) for j in range(ncols)] + [Fraction(target[i])]
         for i in range(nrows)]
    piv_cols = []
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, nrows) if a[i][col]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][col]
        a[r] = [x * inv for x in a[r]]
        for i in range(nrows):
            if i != r and a[i][col]:
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        piv_cols.append(col)
        r += 1
        if r == nrows:
            break
    # consistency
    for i in range(r, nrows):
        if a[i][ncols]:
            return None
    sol = [Fraction(0)] * ncols
    for i, col in enumerate(piv_cols):
        sol[col] = a[i][ncols]
    # verify (guards against free-variable underdetermination)
    for i in range(nrows):
        s = sum(sol[j] * cols[j][i] for j in range(ncols))
        if s != target[i]:
            return None
    return sol


# -- documented op surface -------------------------------------------------------

def cyc_make(conductor, exponent):
    return Cyclotomic.root(conductor, exponent)


def cyc_arith(a, b, op):
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown op {op!r}")


def cyc_galois(a, k):
    return a.galois(k)


def cyc_embed(a):
    return a.embed()


def cyc_min_poly(a):
    return a.min_poly()


def cyc_conj(a):
    return a.conj()
