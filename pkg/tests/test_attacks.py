import numpy as np
import pytest
from hypothesis import given, strategies as st

from collufp.attacks import (Coalition, ForgedCopy, Mode, averaging_attack, coalition_of,
                             detectable_positions, erasures_from_average, memoryless_marking_attack,
                             unerased_bits, validate_marking, xor3_attack)
from collufp.ensembles import gen_iid_codebook
from collufp.gf2 import BitWord


def coalition(*words):
    return Coalition(tuple(range(len(words))), tuple(BitWord.from_str(w) for w in words))


def random_coalition(rng, t, n):
    return Coalition(tuple(range(t)),
                     tuple(BitWord.from_bits(rng.integers(0, 2, n)) for _ in range(t)))


class TestCoalition:
    def test_rejects_duplicates_and_singletons(self):
        w = BitWord.from_str("01")
        with pytest.raises(ValueError):
            Coalition((1, 1), (w, w))
        with pytest.raises(ValueError):
            Coalition((1,), (w,))
        with pytest.raises(ValueError):
            Coalition((1, 2), (w, BitWord.from_str("011")))


class TestAveraging:
    def test_two_pirates(self):
        # bit 1 is +1: x1=(+1,-1,+1), x2=(+1,+1,-1)
        y = averaging_attack(coalition("101", "110"))
        assert y.values().tolist() == [1.0, 0.0, 0.0]
        assert erasures_from_average(y).erased.tolist() == [1, 2]

    def test_identical_pirates(self):
        y = averaging_attack(coalition("1001", "1001"))
        assert y.values().tolist() == [1, -1, -1, 1]
        assert erasures_from_average(y).erased.size == 0

    def test_three_pirates_extremes(self):
        rng = np.random.default_rng(0)
        y = averaging_attack(random_coalition(rng, 3, 10_000))
        frac = (np.abs(y.values()) == 1).mean()
        assert abs(frac - 0.25) < 0.02

    def test_third_valued_symbols_are_erased(self):
        y = averaging_attack(coalition("100", "110", "111"))
        assert y.values().tolist() == pytest.approx([1, 1 / 3, -1 / 3])
        assert erasures_from_average(y).erased.tolist() == [1, 2]

    def test_pair_erasure_fraction(self):
        y = averaging_attack(random_coalition(np.random.default_rng(1), 2, 10_000))
        assert abs(erasures_from_average(y).erased.size / 10_000 - 0.5) < 0.02

    @given(st.integers(2, 7), st.integers(1, 200), st.integers(0, 2**32))
    def test_alphabet_and_erasures(self, t, n, seed):
        c = random_coalition(np.random.default_rng(seed), t, n)
        y = averaging_attack(c)
        alphabet = {(2 * j - t) / t for j in range(t + 1)}
        assert set(y.values().tolist()) <= alphabet
        pattern = erasures_from_average(y)
        assert sorted(np.r_[pattern.erased, pattern.kept].tolist()) == list(range(n))
        assert pattern.erased.tolist() == detectable_positions(c).tolist()
        kept = pattern.kept
        assert (unerased_bits(y)[kept] == c.words[0].bits()[kept]).all()

    def test_binary_copy_has_no_erasures(self):
        with pytest.raises(ValueError):
            erasures_from_average(ForgedCopy(Mode.BINARY, 2, word=BitWord.from_str("1")))


class TestDetectable:
    def test_examples(self):
        assert detectable_positions(coalition("0101", "0110")).tolist() == [2, 3]
        assert detectable_positions(coalition("0101", "0101")).size == 0
        assert detectable_positions(coalition("0110", "1010", "1001")).tolist() == [0, 1, 2, 3]


class TestMarking:
    def test_no_detectable_positions(self):
        c = coalition("0110", "0110")
        y = memoryless_marking_attack(c, np.random.default_rng(0))
        assert y.word == c.words[0]

    def test_undetectable_bits_forced(self):
        c = coalition("0101", "0110")
        rng = np.random.default_rng(3)
        seen = set()
        for _ in range(200):
            bits = memoryless_marking_attack(c, rng).word.bits().tolist()
            assert bits[:2] == [0, 1]
            seen.add(tuple(bits[2:]))
        assert seen == {(0, 0), (0, 1), (1, 0), (1, 1)}

    def test_distance_to_pirate(self):
        c = random_coalition(np.random.default_rng(4), 2, 10_000)
        y = memoryless_marking_attack(c, np.random.default_rng(5))
        assert abs(y.word.distance(c.words[0]) / 10_000 - 0.25) < 0.02

    def test_needs_two(self):
        with pytest.raises(ValueError):
            memoryless_marking_attack(coalition("0", "1", "1"), np.random.default_rng(0))

    def test_closure_many_trials(self):
        rng = np.random.default_rng(6)
        cb = gen_iid_codebook(64, 1 << 20, 1)
        for _ in range(10_000):
            u = rng.choice(1 << 20, 2, replace=False)
            c = coalition_of(cb, u)
            assert validate_marking(memoryless_marking_attack(c, rng), c)


class TestXor3:
    def test_example(self):
        y = xor3_attack(BitWord.from_str("101"), BitWord.from_str("011"), BitWord.from_str("110"))
        assert y.word == BitWord.from_str("000")

    def test_involution(self):
        x1, x2 = BitWord.from_str("1100"), BitWord.from_str("1010")
        assert xor3_attack(x1, x2, x2).word == x1

    def test_distance_half(self):
        rng = np.random.default_rng(7)
        c = random_coalition(rng, 3, 10_000)
        y = xor3_attack(*c.words)
        for w in c.words:
            assert abs(y.word.distance(w) / 10_000 - 0.5) < 0.02

    @given(st.integers(1, 100), st.integers(0, 2**32))
    def test_passes_marking(self, n, seed):
        c = random_coalition(np.random.default_rng(seed), 3, n)
        assert validate_marking(xor3_attack(*c.words), c)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            xor3_attack(BitWord.from_str("1"), BitWord.from_str("10"), BitWord.from_str("1"))


class TestValidateMarking:
    def test_pirate_copy_is_legal(self):
        c = coalition("0011", "0101")
        assert validate_marking(ForgedCopy(Mode.BINARY, 2, word=c.words[0]), c)

    def test_flipped_undetectable_bit(self):
        c = coalition("0011", "0101")
        y = ForgedCopy(Mode.BINARY, 2, word=BitWord.from_str("1011"))
        assert not validate_marking(y, c)

    def test_requires_binary(self):
        c = coalition("01", "10")
        with pytest.raises(ValueError):
            validate_marking(averaging_attack(c), c)
