"""Exact arithmetic in unramified extensions of Q_p.

A number is a truncated expansion ``sum a_n p^n`` whose coefficients come from
a system of representatives of the residue field F_{p^f}.  Coefficients are
stored as small integer *digit codes*:

* polynomial system: code ``d = sum a_i p^i`` stands for ``sum a_i zeta^i``
  with ``0 <= a_i < p``;
* Teichmueller system: code ``0`` is zero and code ``k + 1`` is ``zeta^k``.

Under both systems code 0 is the zero representative and code 1 is the
representative ``1``.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from .errors import (
    IndistinguishableError,
    InvalidInputError,
    UnsupportedOperationError,
)

DEFAULT_PRECISION = 64

POLYNOMIAL = "polynomial"
TEICHMULLER = "teichmuller"
REP_SYSTEMS = (POLYNOMIAL, TEICHMULLER)

Residue = tuple  # f coordinates in [0, p) w.r.t. 1, zeta, ..., zeta^(f-1)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    return all(n % k for k in range(3, math.isqrt(n) + 1, 2))


# -- polynomials over F_p (coefficient lists, lowest degree first) ----------

def _trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_divmod(a, b, p):
    a, b = _trim(a), _trim(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    inv_lead = pow(b[-1], -1, p)
    q = [0] * max(len(a) - len(b) + 1, 1)
    r = a[:]
    while len(r) >= len(b) and r:
        k = len(r) - len(b)
        c = r[-1] * inv_lead % p
        q[k] = c
        for i, bc in enumerate(b):
            r[i + k] = (r[i + k] - c * bc) % p
        r = _trim(r)
    return _trim(q), r


def _poly_mul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _trim(out)


def _poly_sub(a, b, p):
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return _trim([(x - y) % p for x, y in zip(a, b)])


def _has_factor_of_degree(poly, d, p):
    for tail in itertools.product(range(p), repeat=d):
        divisor = list(tail) + [1]
        if not _poly_divmod(poly, divisor, p)[1]:
            return True
    return False


def is_irreducible(poly, p) -> bool:
    poly = _trim(poly)
    deg = len(poly) - 1
    if deg < 1:
        return False
    return not any(_has_factor_of_degree(poly, d, p) for d in range(1, deg // 2 + 1))


def find_modulus(p: int, f: int) -> tuple:
    """Lexicographically smallest monic irreducible polynomial of degree ``f``.

    Coefficients are listed and compared lowest degree first, so ``(2, 2)``
    gives ``(1, 1, 1)``, i.e. ``x^2 + x + 1``.
    """
    if not is_prime(p):
        raise InvalidInputError(f"{p} is not prime")
    if f < 1:
        raise InvalidInputError(f"degree must be >= 1, got {f}")
    for tail in itertools.product(range(p), repeat=f):
        cand = tuple(tail) + (1,)
        if is_irreducible(cand, p):
            return cand
    raise AssertionError("no irreducible polynomial found")  # unreachable


# -- field descriptor --------------------------------------------------------

@dataclass(frozen=True)
class FieldDescriptor:
    """K unramified of degree ``f`` over Q_p (``e`` is bookkeeping only).

    Teichmueller labels use a generator ``zeta`` of the multiplicative group
    of the residue field; it is the class of ``x`` when that generates,
    otherwise the first generator in residue enumeration order.  Roots of
    unity of order ``p^f - 1`` are meant, which keeps K unramified.
    """

    p: int
    f: int = 1
    rep_system: str = POLYNOMIAL
    modulus: tuple = None
    e: int = 1
    zeta: Residue = field(default=None, compare=False)

    def __post_init__(self):
        if not is_prime(self.p):
            raise InvalidInputError(f"{self.p} is not prime")
        if self.f < 1 or self.e < 1:
            raise InvalidInputError("degree and ramification index must be >= 1")
        if self.rep_system not in REP_SYSTEMS:
            raise InvalidInputError(f"unknown representative system {self.rep_system!r}")
        if self.modulus is None:
            object.__setattr__(self, "modulus", find_modulus(self.p, self.f))
        else:
            mod = tuple(int(c) % self.p for c in self.modulus)
            if len(mod) != self.f + 1 or mod[-1] != 1:
                raise InvalidInputError(f"modulus must be monic of degree {self.f}")
            if not is_irreducible(mod, self.p):
                raise InvalidInputError(f"modulus {mod} is reducible over F_{self.p}")
            object.__setattr__(self, "modulus", mod)
        object.__setattr__(self, "zeta", self._find_generator())

    @property
    def q(self) -> int:
        """Size of the residue field."""
        return self.p ** self.f

    def with_rep_system(self, rep_system):
        return FieldDescriptor(self.p, self.f, rep_system, self.modulus, self.e)

    def _find_generator(self):
        order = self.q - 1
        x = tuple(1 if i == 1 else 0 for i in range(self.f)) if self.f > 1 else None
        candidates = [x] if x is not None else []
        candidates += [self.residue_from_index(i) for i in range(1, self.q)]
        for cand in candidates:
            if multiplicative_order(self, cand) == order:
                return cand
        raise AssertionError("residue field has no generator")  # unreachable

    # residue enumeration: index sum a_i p^i
    def residue_from_index(self, index: int) -> Residue:
        coords = []
        for _ in range(self.f):
            index, a = divmod(index, self.p)
            coords.append(a)
        return tuple(coords)

    def residue_index(self, r: Residue) -> int:
        return sum(a * self.p ** i for i, a in enumerate(r))

    @cached_property
    def _teich_residues(self):
        out = [tuple([0] * self.f)]
        cur = tuple([1] + [0] * (self.f - 1))
        for _ in range(self.q - 1):
            out.append(cur)
            cur = residue_arith(self, cur, self.zeta, "mul")
        return tuple(out)

    @cached_property
    def _teich_codes(self):
        return {r: code for code, r in enumerate(self._teich_residues)}

    def residue_of(self, code: int) -> Residue:
        """Residue class of the representative with digit code ``code``."""
        if not 0 <= code < self.q:
            raise InvalidInputError(f"digit code {code} outside [0, {self.q})")
        if self.rep_system == POLYNOMIAL:
            return self.residue_from_index(code)
        return self._teich_residues[code]

    def code_of(self, r: Residue) -> int:
        """Digit code of the representative lying over residue ``r``."""
        r = tuple(r)
        if self.rep_system == POLYNOMIAL:
            return self.residue_index(r)
        return self._teich_codes[r]

    def describe(self) -> dict:
        return {
            "p": self.p,
            "f": self.f,
            "e": self.e,
            "rep_system": self.rep_system,
            "modulus": list(self.modulus),
            "zeta": list(self.zeta),
        }


def multiplicative_order(fd: FieldDescriptor, a: Residue) -> int:
    if not any(a):
        return 0
    one = tuple([1] + [0] * (fd.f - 1))
    cur, k = a, 1
    while cur != one:
        cur = residue_arith(fd, cur, a, "mul")
        k += 1
        if k > fd.q:
            raise AssertionError("order exceeds field size")
    return k


def residue_arith(fd: FieldDescriptor, a: Residue, b: Residue = None, op: str = "add") -> Residue:
    """Arithmetic in F_{p^f} = F_p[x]/(modulus); ``op`` in add, sub, mul, inv."""
    p, f = fd.p, fd.f
    if op == "add":
        return tuple((x + y) % p for x, y in zip(a, b))
    if op == "sub":
        return tuple((x - y) % p for x, y in zip(a, b))
    if op == "mul":
        prod = _poly_mul(_trim(a), _trim(b), p)
        rem = _poly_divmod(prod, fd.modulus, p)[1] if len(prod) > f else prod
        return tuple(rem) + (0,) * (f - len(rem))
    if op == "inv":
        if not any(a):
            raise ZeroDivisionError("inverse of zero in the residue field")
        # extended Euclid: track s with s*a = r (mod modulus)
        r0, r1 = list(fd.modulus), _trim(a)
        s0, s1 = [], [1]
        while len(r1) > 1:
            quo, rem = _poly_divmod(r0, r1, p)
            r0, r1 = r1, rem
            s0, s1 = s1, _poly_sub(s0, _poly_mul(quo, s1, p), p)
        scale = pow(r1[0], -1, p)
        inv = [c * scale % p for c in s1]
        inv = _poly_divmod(inv, fd.modulus, p)[1] if len(inv) > f else inv
        return tuple(inv) + (0,) * (f - len(inv))
    raise InvalidInputError(f"unknown residue operation {op!r}")


# -- truncated expansions ----------------------------------------------------

@dataclass(frozen=True)
class PAdicNumber:
    """``sum digits[i] * p^(v0 + i)`` known for all exponents below ``precision``.

    Leading and trailing zero digits are stripped at construction, so equal
    numbers of equal precision compare equal.  Zero has ``v0 == 0`` and no
    digits.
    """

    field: FieldDescriptor
    v0: int
    digits: tuple
    precision: int = DEFAULT_PRECISION

    def __post_init__(self):
        digits = [int(d) for d in self.digits]
        q = self.field.q
        for d in digits:
            if not 0 <= d < q:
                raise InvalidInputError(f"digit code {d} outside [0, {q})")
        v0 = self.v0
        lead = 0
        while lead < len(digits) and digits[lead] == 0:
            lead += 1
        digits = digits[lead:]
        v0 += lead
        while digits and digits[-1] == 0:
            digits.pop()
        if not digits:
            v0 = 0
        elif v0 + len(digits) > self.precision:
            raise InvalidInputError(
                f"digits up to exponent {v0 + len(digits) - 1} exceed precision {self.precision}"
            )
        object.__setattr__(self, "digits", tuple(digits))
        object.__setattr__(self, "v0", v0)

    @classmethod
    def zero(cls, fd, precision=DEFAULT_PRECISION):
        return cls(fd, 0, (), precision)

    @classmethod
    def from_digits(cls, fd, digits, precision=None, v0=0):
        """Expansion ``sum digits[i] p^(v0+i)``; precision defaults to the larger
        of ``DEFAULT_PRECISION`` and what the digits need."""
        digits = tuple(digits)
        if precision is None:
            precision = max(DEFAULT_PRECISION, v0 + len(digits))
        return cls(fd, v0, digits, precision)

    @classmethod
    def from_terms(cls, fd, terms, precision=DEFAULT_PRECISION):
        """Build from a mapping exponent -> digit code."""
        terms = {k: d for k, d in terms.items() if d}
        if not terms:
            return cls.zero(fd, precision)
        lo, hi = min(terms), max(terms)
        return cls(fd, lo, tuple(terms.get(k, 0) for k in range(lo, hi + 1)), precision)

    @classmethod
    def from_int(cls, fd, n: int, precision=DEFAULT_PRECISION):
        """Rational integer ``n`` (negative values wrap modulo ``p^precision``)."""
        p = fd.p
        if n == 0:
            return cls.zero(fd, precision)
        v = 0
        while n % p == 0:
            n //= p
            v += 1
        if v >= precision:
            return cls.zero(fd, precision)
        n %= p ** (precision - v)
        digits = []
        while n:
            n, a = divmod(n, p)
            digits.append(a)
        if fd.rep_system == TEICHMULLER and any(a > 1 for a in digits):
            raise UnsupportedOperationError(
                "integer digits >= 2 have no direct Teichmueller expansion"
            )
        return cls(fd, v, tuple(digits), precision)

    def is_zero(self) -> bool:
        return not self.digits

    def digit(self, n: int) -> int:
        i = n - self.v0
        if 0 <= i < len(self.digits):
            return self.digits[i]
        return 0

    def terms(self) -> dict:
        return {self.v0 + i: d for i, d in enumerate(self.digits) if d}

    def valuation(self):
        return valuation(self)

    def norm(self) -> Fraction:
        if self.is_zero():
            return Fraction(0)
        return Fraction(self.field.p) ** (-self.v0)

    def truncate(self, m: int) -> PAdicNumber:
        """Keep the digits below exponent ``m``; the rest are known zeros."""
        return PAdicNumber.from_terms(
            self.field, {k: d for k, d in self.terms().items() if k < m}, self.precision
        )

    def __add__(self, other):
        return add_sub(self, other, "add")

    def __sub__(self, other):
        return add_sub(self, other, "sub")

    def __str__(self):
        return format_padic(self)


def valuation(x: PAdicNumber):
    """Exponent of the lowest non-zero digit; ``math.inf`` for zero."""
    return math.inf if x.is_zero() else x.v0


def norm(x: PAdicNumber) -> Fraction:
    return x.norm()


def _check_same_field(x, y):
    if x.field != y.field:
        raise InvalidInputError("numbers belong to different field descriptors")


def difference_valuation(x: PAdicNumber, y: PAdicNumber) -> int:
    """Smallest exponent at which the digits of ``x`` and ``y`` differ.

    Distinct representatives are distinct modulo p, so this is the valuation
    of ``x - y`` without any arithmetic.  Raises ``IndistinguishableError``
    when the numbers agree on every digit known to both.
    """
    _check_same_field(x, y)
    n_max = min(x.precision, y.precision)
    starts = [z.v0 for z in (x, y) if not z.is_zero()]
    lo = min(starts) if starts else n_max
    for n in range(lo, n_max):
        if x.digit(n) != y.digit(n):
            return n
    raise IndistinguishableError(n_max)


def add_sub(x: PAdicNumber, y: PAdicNumber, op: str = "add") -> PAdicNumber:
    """Sum or difference; each zeta-coordinate carries independently in base p."""
    _check_same_field(x, y)
    fd = x.field
    if fd.rep_system != POLYNOMIAL:
        raise UnsupportedOperationError(
            "ring operations need polynomial representatives"
        )
    if op not in ("add", "sub"):
        raise InvalidInputError(f"unknown operation {op!r}")
    n_max = min(x.precision, y.precision)
    starts = [z.v0 for z in (x, y) if not z.is_zero()]
    if not starts or min(starts) >= n_max:
        return PAdicNumber.zero(fd, n_max)
    lo = min(starts)
    width = n_max - lo
    p, f = fd.p, fd.f
    modulus = p ** width

    def coords(z):
        out = [0] * f
        for k, d in z.terms().items():
            if k >= n_max:
                continue
            for i, a in enumerate(fd.residue_from_index(d)):
                out[i] += a * p ** (k - lo)
        return out

    cx, cy = coords(x), coords(y)
    sign = 1 if op == "add" else -1
    res = [(a + sign * b) % modulus for a, b in zip(cx, cy)]
    digits = []
    for n in range(width):
        digits.append(sum(((r // p ** n) % p) * p ** i for i, r in enumerate(res)))
    return PAdicNumber(fd, lo, tuple(digits), n_max)


def shift(x: PAdicNumber, k: int) -> PAdicNumber:
    """Multiply by ``p^k``."""
    if x.is_zero():
        return PAdicNumber.zero(x.field, x.precision + k)
    return PAdicNumber(x.field, x.v0 + k, x.digits, x.precision + k)


# -- text form ---------------------------------------------------------------
#
#   p^v0*(c0 + c1*p + c2*p^2 + ...) + O(p^N)
#
# with the actual prime written for p.  Coefficients are integers when f = 1
# (polynomial system), zeta-polynomials such as ``(1+z)`` when f > 1, and
# ``z^k`` for Teichmueller labels.

def format_label(fd: FieldDescriptor, code: int) -> str:
    if code == 0:
        return "0"
    if fd.rep_system == TEICHMULLER:
        return f"z^{code - 1}"
    if fd.f == 1:
        return str(code)
    parts = []
    for i, a in enumerate(fd.residue_from_index(code)):
        if not a:
            continue
        mono = "" if i == 0 else ("z" if i == 1 else f"z^{i}")
        if not mono:
            parts.append(str(a))
        else:
            parts.append(mono if a == 1 else f"{a}*{mono}")
    return "+".join(parts)


def format_padic(x: PAdicNumber) -> str:
    P = str(x.field.p)
    tail = f"O({P}^{x.precision})"
    if x.is_zero():
        return f"0 + {tail}"
    terms = []
    for i, d in enumerate(x.digits):
        if not d:
            continue
        c = format_label(x.field, d)
        if "+" in c or "*" in c:
            c = f"({c})"
        terms.append(c if i == 0 else (f"{c}*{P}" if i == 1 else f"{c}*{P}^{i}"))
    body = " + ".join(terms)
    if x.v0 == 0:
        return f"{body} + {tail}"
    return f"{P}^{x.v0}*({body}) + {tail}"


_TOKEN = re.compile(r"\s*(?:(\d+)|(.))")


class _Parser:
    def __init__(self, text, fd):
        self.fd = fd
        self.P = str(fd.p)
        self.toks = []
        for m in _TOKEN.finditer(text):
            if m.group(1) is not None:
                self.toks.append(m.group(1))
            elif m.group(2) is not None and not m.group(2).isspace():
                self.toks.append(m.group(2))
        self.i = 0

    def peek(self, k=0):
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise InvalidInputError(f"expected {expected or 'token'}, got {tok!r}")
        self.i += 1
        return tok

    def number(self):
        tok = self.take()
        if not tok.isdigit():
            raise InvalidInputError(f"expected a number, got {tok!r}")
        return int(tok)

    def signed_int(self):
        neg = False
        if self.peek() == "-":
            self.take()
            neg = True
        elif self.peek() == "(":
            self.take()
            val = self.signed_int()
            self.take(")")
            return val
        tok = self.take()
        if not tok.isdigit():
            raise InvalidInputError(f"expected integer, got {tok!r}")
        return -int(tok) if neg else int(tok)

    def ppow(self):
        self.take(self.P)
        if self.peek() == "^":
            self.take()
            return self.signed_int()
        return 1

    def is_ppow_start(self):
        if self.peek() != self.P:
            return False
        return self.peek(1) != "*" or self.peek(2) == "("

    def zpoly(self):
        coords = [0] * self.fd.f
        teich = None
        while True:
            coef = 1
            tok = self.peek()
            if tok is not None and tok.isdigit():
                coef = self.number()
                if self.peek() == "*":
                    self.take()
                else:
                    coords[0] += coef
                    if self.peek() != "+" or self.peek(1) == "O":
                        break
                    self.take()
                    continue
            self.take("z")
            k = 1
            if self.peek() == "^":
                self.take()
                k = self.number()
            if self.fd.rep_system == TEICHMULLER:
                if teich is not None or coef != 1:
                    raise InvalidInputError("Teichmueller labels are single powers z^k")
                teich = k
            else:
                if k >= self.fd.f:
                    raise InvalidInputError(f"z^{k} exceeds degree {self.fd.f}")
                coords[k] += coef
            if self.peek() != "+" or self.peek(1) == "O":
                break
            self.take()
        fd = self.fd
        if fd.rep_system == TEICHMULLER:
            if teich is None:
                if coords[0] not in (0, 1) or any(coords[1:]):
                    raise InvalidInputError("Teichmueller labels are 0 or z^k")
                return coords[0]
            if any(coords) or not 0 <= teich <= fd.q - 2:
                raise InvalidInputError(f"invalid Teichmueller label z^{teich}")
            return teich + 1
        if any(a >= fd.p for a in coords):
            raise InvalidInputError(f"coefficient coordinates must lie in [0, {fd.p})")
        return fd.residue_index(coords)

    def coeff(self):
        if self.peek() == "(":
            self.take()
            code = self.zpoly()
            self.take(")")
            return code
        tok = self.peek()
        if tok == "z":
            return self.zpoly_single()
        val = self.number()
        if self.fd.rep_system == TEICHMULLER:
            if val not in (0, 1):
                raise InvalidInputError("Teichmueller coefficients are 0 or z^k")
            return val
        if val >= self.fd.p:
            raise InvalidInputError(f"coefficient {val} is not a digit mod {self.fd.p}")
        return val

    def zpoly_single(self):
        self.take("z")
        k = 1
        if self.peek() == "^":
            self.take()
            k = self.number()
        fd = self.fd
        if fd.rep_system == TEICHMULLER:
            if not 0 <= k <= fd.q - 2:
                raise InvalidInputError(f"invalid Teichmueller label z^{k}")
            return k + 1
        if not 1 <= k < fd.f:
            raise InvalidInputError(f"z^{k} is not a basis element for f = {fd.f}")
        return fd.p ** k

    def series(self, terms, offset):
        while True:
            if self.peek() == "O":
                return
            if self.is_ppow_start():
                exp, code = self.ppow(), 1
            else:
                code = self.coeff()
                exp = 0
                if self.peek() == "*":
                    self.take()
                    exp = self.ppow()
            exp += offset
            if exp in terms:
                raise InvalidInputError(f"exponent {exp} occurs twice")
            terms[exp] = code
            if self.peek() != "+":
                return
            self.take()

    def parse(self):
        terms = {}
        precision = None
        start = self.i
        offset = None
        if self.peek() == self.P and self.peek(1) == "^":
            try:
                off = self.ppow()
                self.take("*")
                self.take("(")
                offset = off
            except InvalidInputError:
                self.i = start
        if offset is not None:
            self.series(terms, offset)
            self.take(")")
            if self.peek() == "+":
                self.take()
        else:
            self.series(terms, 0)
        if self.peek() == "O":
            self.take()
            self.take("(")
            self.take(self.P)
            self.take("^")
            precision = self.signed_int()
            self.take(")")
        if self.peek() is not None:
            raise InvalidInputError(f"unexpected trailing input {self.peek()!r}")
        return terms, precision


def parse_padic(text: str, fd: FieldDescriptor, precision=None) -> PAdicNumber:
    """Parse the text form; a bare (signed) integer is read as a rational integer."""
    s = text.strip()
    if re.fullmatch(r"-?\d+", s):
        return PAdicNumber.from_int(fd, int(s), precision or DEFAULT_PRECISION)
    terms, n = _Parser(s, fd).parse()
    if n is None:
        n = precision or DEFAULT_PRECISION
        if terms:
            n = max(n, max(terms) + 1)
    return PAdicNumber.from_terms(fd, terms, n)
