"""Isometric encoding of strings as p-adic integers, and the Baire distance."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import InvalidInputError, NotInImageError
from .padic_core import (
    DEFAULT_PRECISION,
    POLYNOMIAL,
    TEICHMULLER,
    FieldDescriptor,
    PAdicNumber,
)


class EncodingError(InvalidInputError):
    def __init__(self, position, symbol):
        self.position = position
        self.symbol = symbol
        super().__init__(f"symbol {symbol!r} at position {position} is not in the alphabet")


@dataclass(frozen=True)
class AlphabetCode:
    """Alphabet identified with representatives; ``alphabet[0]`` is the blank (code 0)."""

    alphabet: tuple
    field: FieldDescriptor
    letter_map: dict  # symbol -> digit code

    def __post_init__(self):
        codes = list(self.letter_map.values())
        if len(set(codes)) != len(codes):
            raise InvalidInputError("letter map is not injective")
        if self.letter_map.get(self.blank) != 0:
            raise InvalidInputError("the blank must map to the zero representative")
        if len(self.alphabet) > self.field.q:
            raise InvalidInputError("alphabet larger than the residue field")

    @property
    def blank(self):
        return self.alphabet[0]

    @property
    def p(self):
        return self.field.p

    def symbol_of(self, code):
        try:
            return self._inverse[code]
        except KeyError:
            raise NotInImageError(f"digit code {code} is not the image of a letter") from None

    @property
    def _inverse(self):
        return {c: s for s, c in self.letter_map.items()}

    def with_rep_system(self, rep_system):
        """Same letters over the other representative system, residue by residue."""
        fd = self.field.with_rep_system(rep_system)
        mapping = {
            s: fd.code_of(self.field.residue_of(c)) for s, c in self.letter_map.items()
        }
        return AlphabetCode(self.alphabet, fd, mapping)


def minimal_degree(size: int, p: int) -> int:
    f = 1
    while p ** f < size:
        f += 1
    return f


def build_code(alphabet, p, rep_system=POLYNOMIAL, blank=None, f=None):
    """Identify ``alphabet`` with representatives, blank first.

    Labels follow the canonical enumeration 0, 1, then ascending digit codes
    (zeta, 1 + zeta, ... for polynomial representatives; zeta, zeta^2, ...
    for Teichmueller ones).  Without an explicit ``blank`` the first symbol
    plays that role.  ``f`` defaults to the smallest degree that fits.
    """
    alphabet = list(alphabet)
    if not alphabet:
        raise InvalidInputError("alphabet is empty")
    if len(set(alphabet)) != len(alphabet):
        raise InvalidInputError("alphabet has duplicate symbols")
    if blank is not None:
        if blank not in alphabet:
            raise InvalidInputError(f"blank {blank!r} is not in the alphabet")
        alphabet.remove(blank)
        alphabet.insert(0, blank)
    if f is None:
        f = minimal_degree(len(alphabet), p)
    fd = FieldDescriptor(p, f, rep_system)
    if len(alphabet) > fd.q:
        raise InvalidInputError(f"{len(alphabet)} letters do not fit into F_{p}^{f}")
    return AlphabetCode(tuple(alphabet), fd, {s: i for i, s in enumerate(alphabet)})


def _preset_kk():
    fd = FieldDescriptor(2, 2, POLYNOMIAL)
    one, zeta = (1, 0), (0, 1)
    one_plus_zeta = (1, 1)
    mapping = {
        "A": 0,
        "G": fd.code_of(zeta),
        "T": fd.code_of(one),
        "C": fd.code_of(one_plus_zeta),
    }
    return AlphabetCode(("A", "G", "T", "C"), fd, mapping)


PRESETS = {
    # rational 5-adic model, nucleotides as 1..4
    "dna5": lambda: build_code(["-", "A", "C", "G", "T"], 5, POLYNOMIAL),
    # (A, G, T, C) -> (0, 1, z, z^2); A doubles as blank
    "dna2-teich": lambda: build_code(["A", "G", "T", "C"], 2, TEICHMULLER),
    # (A, G, T, C) -> (0, z, 1, 1+z) over F_2[z]/(z^2+z+1)
    "dna2-kk": _preset_kk,
    # f = 3 leaves room for a separate blank
    "dna2-blank": lambda: build_code(["-", "A", "G", "T", "C"], 2, TEICHMULLER, f=3),
}


def preset(name: str) -> AlphabetCode:
    try:
        return PRESETS[name]()
    except KeyError:
        raise InvalidInputError(
            f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}"
        ) from None


def encode_string(code: AlphabetCode, s, precision=None) -> PAdicNumber:
    """Letter ``s[n]`` becomes the coefficient of ``p^n``; trailing blanks vanish.

    Precision is at least ``DEFAULT_PRECISION`` and at least ``len(s)``: the
    result is a finite expansion, so every digit up to there is known.
    """
    digits = []
    for n, sym in enumerate(s):
        try:
            digits.append(code.letter_map[sym])
        except KeyError:
            raise EncodingError(n, sym) from None
    if precision is None:
        precision = max(DEFAULT_PRECISION, len(s))
    return PAdicNumber(code.field, 0, tuple(digits), precision)


def decode_string(code: AlphabetCode, x: PAdicNumber, length=None):
    """Inverse of ``encode_string``; ``length`` pads with blanks."""
    if x.field != code.field:
        raise InvalidInputError("number and alphabet use different fields")
    if x.is_zero():
        out = []
    else:
        if x.v0 < 0:
            raise NotInImageError("negative valuation: not the code of a string")
        out = [code.blank] * x.v0 + [code.symbol_of(d) for d in x.digits]
    if length is not None:
        if length < len(out):
            raise InvalidInputError(f"decoded string is longer than {length}")
        out += [code.blank] * (length - len(out))
    if all(isinstance(c, str) and len(c) == 1 for c in out):
        return "".join(out)
    return out


def baire_distance(s, t, p, k=None, blank=None):
    """``p^-n`` with ``n`` the length of the common prefix (capped at ``k``).

    Strings are compared as if padded with ``blank``; equal strings give
    ``Fraction(0)`` unless a cutoff is set, in which case they sit at ``p^-k``.
    """
    if blank is not None:
        s, t = _strip_blanks(s, blank), _strip_blanks(t, blank)
        width = max(len(s), len(t))
        s = s + [blank] * (width - len(s))
        t = t + [blank] * (width - len(t))
    n = 0
    limit = min(len(s), len(t))
    while n < limit and s[n] == t[n]:
        n += 1
    equal = n == limit and len(s) == len(t)
    if equal and k is None:
        return Fraction(0)
    if k is not None:
        n = min(n, k)
    return Fraction(1, p ** n)


def _strip_blanks(s, blank):
    s = list(s)
    while s and s[-1] == blank:
        s.pop()
    return s


def read_sequences(lines):
    """``(label, string)`` pairs from plain lines or FASTA records.

    Plain lines are labelled by themselves; FASTA headers become labels.
    """
    lines = [ln.rstrip("\r\n") for ln in lines]
    if any(ln.startswith(">") for ln in lines):
        records, label, buf = [], None, []
        for ln in lines:
            if ln.startswith(">"):
                if label is not None:
                    records.append((label, "".join(buf)))
                label, buf = ln[1:].strip(), []
            elif ln.strip():
                if label is None:
                    raise InvalidInputError("FASTA sequence before the first header")
                buf.append(ln.strip())
        if label is not None:
            records.append((label, "".join(buf)))
        return records
    return [(ln, ln) for ln in lines if ln.strip()]
