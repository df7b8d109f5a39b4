import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from padic_dendro.errors import IndistinguishableError, InvalidInputError, NotInImageError
from padic_dendro.padic_core import POLYNOMIAL, TEICHMULLER, PAdicNumber, difference_valuation
from padic_dendro.strings import (
    PRESETS,
    EncodingError,
    baire_distance,
    build_code,
    decode_string,
    encode_string,
    preset,
    read_sequences,
)

from oracles import baire


def test_build_code_5adic():
    code = build_code(["-", "1", "2", "3", "4"], 5)
    assert code.field.f == 1
    assert [code.letter_map[s] for s in "1234"] == [1, 2, 3, 4]


def test_build_code_teichmuller_dna():
    code = build_code(["A", "G", "C", "T"], 2, TEICHMULLER)
    assert code.field.f == 2
    # codes 0, 1, 2, 3 stand for 0, 1, zeta, zeta^2
    assert sorted(code.letter_map.values()) == [0, 1, 2, 3]
    assert code.field.residue_of(code.letter_map["C"]) == code.field.zeta


def test_build_code_with_blank_needs_f3():
    assert build_code(["-", "A", "G", "C", "T"], 2, TEICHMULLER).field.f == 3


def test_build_code_errors():
    with pytest.raises(InvalidInputError):
        build_code(["a", "a"], 2)
    with pytest.raises(InvalidInputError):
        build_code([], 2)
    with pytest.raises(InvalidInputError):
        build_code(["a", "b", "c"], 2, f=1)


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_every_alphabet_size_fits(p):
    for size in range(2, 65):
        code = build_code([f"s{i}" for i in range(size)], p)
        f = code.field.f
        assert p ** f >= size
        assert f == 1 or p ** (f - 1) < size


def test_encode_examples():
    assert encode_string(preset("dna2-teich"), "").is_zero()
    kk = preset("dna2-kk")
    assert encode_string(kk, "T") == PAdicNumber.from_digits(kk.field, [1])
    five = build_code(["-", "1", "2", "3", "4"], 5)
    assert encode_string(five, "12") == PAdicNumber.from_int(five.field, 11)


def test_encode_unknown_symbol_names_position():
    with pytest.raises(EncodingError) as info:
        encode_string(preset("dna5"), "ACXT")
    assert (info.value.position, info.value.symbol) == (2, "X")


def test_trailing_blanks_vanish():
    code = preset("dna5")
    assert encode_string(code, "AC--") == encode_string(code, "AC")


def test_decode_examples():
    five = build_code(["-", "1", "2", "3", "4"], 5)
    assert decode_string(five, PAdicNumber.from_int(five.field, 11)) == "12"
    assert decode_string(five, PAdicNumber.zero(five.field)) == ""
    assert decode_string(five, PAdicNumber.from_int(five.field, 5), length=4) == "-1--"


def test_decode_outside_image():
    code = build_code(["-", "A", "C"], 5)
    with pytest.raises(NotInImageError):
        decode_string(code, PAdicNumber.from_int(code.field, 4))


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_decode_encode_round_trip(name):
    code = preset(name)
    rng = random.Random(name)
    letters = list(code.alphabet)
    for _ in range(1000):
        s = "".join(rng.choice(letters) for _ in range(rng.randint(0, 20))).rstrip(code.blank)
        assert decode_string(code, encode_string(code, s)) == s


def test_baire_examples():
    assert baire_distance("ACG", "ACG", 2) == 0
    assert baire_distance("AG", "AT", 2) == Fraction(1, 2)
    assert baire_distance("AGxyz", "AGuvw", 2, k=2) == Fraction(1, 4)
    assert baire_distance("AGAGA", "AGAGT", 2, k=2) == Fraction(1, 4)


@settings(max_examples=300, deadline=None)
@given(st.text("ab", max_size=8), st.text("ab", max_size=8), st.sampled_from([2, 3, 5]))
def test_baire_matches_prefix_oracle(s, t, p):
    assert baire_distance(s, t, p) == baire(s, t, p)


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_prefix_of_long_stream_is_close(name):
    code = preset(name)
    rng = random.Random(len(name))
    for _ in range(200):
        stream = [rng.choice(code.alphabet) for _ in range(60)]
        n = rng.randint(0, 59)
        x, y = encode_string(code, stream[:n]), encode_string(code, stream)
        try:
            assert difference_valuation(x, y) >= n
        except IndistinguishableError:
            pass


def test_representative_change_keeps_residues():
    code = preset("dna5")
    teich = code.with_rep_system(TEICHMULLER)
    assert teich.field.rep_system == TEICHMULLER
    for s in code.alphabet:
        assert teich.field.residue_of(teich.letter_map[s]) == code.field.residue_of(code.letter_map[s])
    assert teich.with_rep_system(POLYNOMIAL).letter_map == code.letter_map


def test_unknown_preset():
    with pytest.raises(InvalidInputError):
        preset("rna7")


def test_read_sequences_plain_and_fasta():
    assert read_sequences(["ACGT\n", "\n", "GG"]) == [("ACGT", "ACGT"), ("GG", "GG")]
    fasta = [">one\n", "AC\n", "GT\n", ">two\n", "TT\n"]
    assert read_sequences(fasta) == [("one", "ACGT"), ("two", "TT")]
    with pytest.raises(InvalidInputError):
        read_sequences(["AC", ">x", "GG"])


def test_baire_pads_with_blanks():
    assert baire_distance("AC", "AC-T", 5, blank="-") == Fraction(1, 125)
    assert baire_distance("A-", "A", 5, blank="-") == 0
