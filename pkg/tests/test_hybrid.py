import random

import pytest

from hybridgrp.build import _all_elements, fixtures
from hybridgrp.hybrid import (
    CacheConfig,
    HybridError,
    extension_order,
    format_element,
    group_order,
    parse_element,
)
from hybridgrp.perm import Permutation


@pytest.fixture(scope="module")
def corpus_local():
    return fixtures()


def f(corpus_local, name):
    return corpus_local[name]


class TestSmallFixtureArithmetic:
    def test_f1_exhaustive(self, corpus_local):
        fx = f(corpus_local, "F1")
        g, iso = fx.group, fx.reference
        els = list(_all_elements(g))
        assert len(els) == 6 == g.order()
        perms = {iso.to_perm(e) for e in els}
        assert len(perms) == 6
        for a in els:
            assert iso.to_perm(a.inv()) == iso.to_perm(a).inv()
            assert a.order() == iso.to_perm(a).order()
            for b in els:
                assert iso.to_perm(a * b) == iso.to_perm(a) * iso.to_perm(b)

    def test_f5_nonsplit(self, corpus_local):
        fx = f(corpus_local, "F5")
        g = fx.group
        x = g.generator(1)
        assert g.order() == 4
        assert x.order() == 4  # the extension does not split
        assert (x * x).xword == ()  # x^2 lands in the normal subgroup
        assert not (x * x).bpart.is_identity()
        assert x.inv() * x == g.identity()

    def test_nu_is_homomorphism(self, corpus_local):
        fx = f(corpus_local, "F1")
        g = fx.group
        els = list(_all_elements(g))
        for a in els:
            for b in els:
                assert (a * b).nu() == a.nu() * b.nu()


class TestRandomizedAgainstReference:
    @pytest.mark.parametrize("name", ["F2", "F3"])
    def test_mul_inv_order(self, corpus_local, name):
        fx = f(corpus_local, name)
        g, iso = fx.group, fx.reference
        rng = random.Random(99)
        for _ in range(400):
            a = g.random_element(rng)
            b = g.random_element(rng)
            pa, pb = iso.to_perm(a), iso.to_perm(b)
            assert iso.to_perm(a * b) == pa * pb
            assert iso.to_perm(a.inv()) == pa.inv()
            assert a.order() == pa.order()
            assert iso.to_hybrid(pa) == a

    @pytest.mark.parametrize("name", ["F2", "F4"])
    def test_pow(self, corpus_local, name):
        fx = f(corpus_local, name)
        g, iso = fx.group, fx.reference
        rng = random.Random(5)
        for _ in range(60):
            a = g.random_element(rng)
            k = rng.randint(-6, 6)
            assert iso.to_perm(a**k) == iso.to_perm(a) ** k


class TestCollection:
    def test_signed_word_agrees_with_products(self, corpus_local):
        fx = f(corpus_local, "F2")
        g = fx.group
        rng = random.Random(17)
        for _ in range(200):
            letters = [i for i in range(1, g.k + 1)] + [
                -i for i in range(1, g.k + 1)
            ]
            word = [rng.choice(letters) for _ in range(rng.randint(0, 8))]
            by_word = g.element_from_signed_word(word)
            acc = g.identity()
            for c in word:
                t = g.generator(c) if c > 0 else g.gen_inverse(-c - 1)
                acc = acc * t
            assert by_word == acc

    def test_collect_mixed_expression(self, corpus_local):
        fx = f(corpus_local, "F1")
        g = fx.group
        x = g.generator(1)
        y = g.b_element(g.b_pres.generator(1))
        # d * x = x * alpha_x(d): y x = x y^2 in this group
        assert y * x == g.element((0,), g.b_pres.element((2,)))
        assert (y * x) == x * g.b_element(g.b_pres.element((2,)))


class TestCaches:
    def test_cached_arithmetic_matches(self, corpus_local):
        plain = f(corpus_local, "F2").group
        cached_fx = fixtures()  # fresh instances so caches do not leak
        cached = cached_fx["F2"].group
        report = cached.build_caches(
            CacheConfig(inverse=True, product_depth=2, segments=True)
        )
        assert report["inverse"] == cached.k
        rng_a, rng_b = random.Random(4), random.Random(4)
        for _ in range(300):
            a1, a2 = plain.random_element(rng_a), cached.random_element(rng_b)
            b1, b2 = plain.random_element(rng_a), cached.random_element(rng_b)
            assert (a1 * b1).xword == (a2 * b2).xword
            assert (a1 * b1).bpart.exponents == (a2 * b2).bpart.exponents
            assert a1.inv().bpart.exponents == a2.inv().bpart.exponents


class TestUniformSampling:
    def test_f1_covers_uniformly(self, corpus_local):
        g = f(corpus_local, "F1").group
        rng = random.Random(1)
        counts = {}
        n = 3000
        for _ in range(n):
            e = g.random_element(rng)
            counts[(e.xword, e.bpart.exponents)] = (
                counts.get((e.xword, e.bpart.exponents), 0) + 1
            )
        assert len(counts) == 6
        for c in counts.values():
            assert abs(c - n / 6) < 120


class TestMisc:
    def test_extension_order(self):
        assert extension_order(6, 4) == 24
        assert extension_order(1, 1) == 1

    def test_group_order(self, corpus_local):
        g = f(corpus_local, "F2").group
        assert group_order(g) == g.order() == 24

    def test_parse_format_round_trip(self, corpus_local):
        g = f(corpus_local, "F2").group
        rng = random.Random(8)
        for _ in range(50):
            e = g.random_element(rng)
            assert parse_element(g, format_element(e)) == e
        assert format_element(g.identity()) == "1 | 1"
        assert parse_element(g, "1 | 1") == g.identity()

    def test_parse_error(self, corpus_local):
        g = f(corpus_local, "F1").group
        with pytest.raises(HybridError):
            parse_element(g, "x9 | 1")

    def test_element_validation(self, corpus_local):
        g = f(corpus_local, "F1").group
        with pytest.raises(HybridError):
            g.generator(5)
