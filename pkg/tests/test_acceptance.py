"""Acceptance gate: the end-to-end criteria the package must meet.

Each test maps to one numbered criterion; all checks are exact unless the
criterion itself is a timing budget.
"""

import random
import statistics
import time

import pytest

from hybridgrp.build import _all_elements, validate
from hybridgrp.hybrid import extension_order
from hybridgrp.perm import schreier_sims
from hybridgrp.rws import MonoidPresentation, enumerate_normal_forms, knuth_bendix
from hybridgrp.service import h_bench
from hybridgrp.subgrp import (
    factor_group,
    hybrid_bits,
    sub_contains,
    sub_order,
    transversal,
)

SMALL = ["F1", "F2", "F3", "F4", "F5"]


def random_subset_gens(group, rng):
    count = rng.randint(1, 3)
    return [group.random_element(rng) for _ in range(count)]


class TestCriterion1OracleArithmetic:
    def test_mul_inv_against_reference(self, corpus):
        start = time.perf_counter()
        per_fixture = 10_000 // len(SMALL) * len(SMALL)  # 10^4 total pairs
        assert per_fixture == 10_000
        for name in SMALL:
            fx = corpus[name]
            g, iso = fx.group, fx.reference
            rng = random.Random(20_240_101)
            for _ in range(10_000 // len(SMALL)):
                a = g.random_element(rng)
                b = g.random_element(rng)
                assert iso.to_perm(a * b) == iso.to_perm(a) * iso.to_perm(b)
                assert iso.to_perm(a.inv()) == iso.to_perm(a).inv()
        assert time.perf_counter() - start < 60.0


class TestCriterion2NormalFormConfluence:
    def test_randomized_association_agrees_with_leftmost(self, corpus):
        start = time.perf_counter()
        for name in SMALL + ["F6"]:
            g = corpus[name].group
            rng = random.Random(717)
            letters = list(range(1, g.k + 1)) + [-i for i in range(1, g.k + 1)]
            for _ in range(1000):
                word = [rng.choice(letters) for _ in range(rng.randint(1, 8))] if letters else []
                b_noise = g.b_pres.element(
                    tuple(
                        rng.randrange(o) for o in g.b_pres.relative_orders
                    )
                )
                # leftmost collection of the whole word
                terms = [
                    (g.generator(c) if c > 0 else g.gen_inverse(-c - 1))
                    for c in word
                ] + [g.b_element(b_noise)]
                leftmost = g.identity()
                for t in terms:
                    leftmost = leftmost * t
                # random association order
                pool = list(terms)
                while len(pool) > 1:
                    i = rng.randrange(len(pool) - 1)
                    pool[i : i + 2] = [pool[i] * pool[i + 1]]
                assert pool[0] == leftmost
        assert time.perf_counter() - start < 60.0


class TestCriterion3ElementOrder:
    @pytest.mark.parametrize("name", SMALL)
    def test_order_matches_mapped_perm(self, corpus, name):
        fx = corpus[name]
        g, iso = fx.group, fx.reference
        rng = random.Random(33)
        for _ in range(1000):
            a = g.random_element(rng)
            assert a.order() == iso.to_perm(a).order()


class TestCriterion4SubgroupOrder:
    @pytest.mark.parametrize("name", SMALL)
    def test_sub_order_matches_schreier_sims(self, corpus, name):
        fx = corpus[name]
        g, iso = fx.group, fx.reference
        rng = random.Random(44)
        for _ in range(20):
            gens = random_subset_gens(g, rng)
            bits = hybrid_bits(g, gens)
            chain = schreier_sims(
                [iso.to_perm(s) for s in gens], iso.degree
            )
            assert sub_order(bits) == chain.order()


class TestCriterion5Transversals:
    def pairs(self, corpus):
        f1 = corpus["F1"].group
        f2 = corpus["F2"].group
        f5 = corpus["F5"].group
        y1 = f1.b_element(f1.b_pres.generator(1))
        out = [
            (f1, [f1.generator(1), y1], [y1]),
            (f1, [f1.generator(1), y1], [f1.generator(1)]),
            (f2, [f2.generator(1), f2.generator(2)],
             [f2.b_element(f2.b_pres.generator(1)),
              f2.b_element(f2.b_pres.generator(2))]),
            (f2, [f2.generator(1), f2.generator(2)], [f2.generator(1)]),
            (f5, [f5.generator(1)], [f5.b_element(f5.b_pres.generator(1))]),
        ]
        return out

    def test_representatives_enumerate_s_once(self, corpus):
        for g, s_gens, u_gens in self.pairs(corpus):
            s_bits = hybrid_bits(g, s_gens)
            u_bits = hybrid_bits(g, u_gens)
            assert sub_order(s_bits) <= 1000
            tr = transversal(s_bits, u_bits)
            reps = tr.representatives()
            # every element of S is u * rep for exactly one rep
            s_elements = [
                el for el in _all_elements(g) if sub_contains(s_bits, el)
            ]
            assert len(reps) * sub_order(u_bits) == len(s_elements)
            for el in s_elements:
                hits = [
                    r for r in reps if sub_contains(u_bits, el * r.inv())
                ]
                assert len(hits) == 1

    def test_coset_id_constant_on_cosets(self, corpus):
        rng = random.Random(55)
        for g, s_gens, u_gens in self.pairs(corpus):
            s_bits = hybrid_bits(g, s_gens)
            u_bits = hybrid_bits(g, u_gens)
            tr = transversal(s_bits, u_bits)
            s_elements = [
                el for el in _all_elements(g) if sub_contains(s_bits, el)
            ]
            u_elements = [
                el for el in s_elements if sub_contains(u_bits, el)
            ]
            for _ in range(100):
                s = rng.choice(s_elements)
                u = rng.choice(u_elements)
                assert tr.coset_id(u * s) == tr.coset_id(s)


class TestCriterion6KnuthBendix:
    CASES = [
        ("C2", 1, [], [2], 2),
        ("C3", 1, [], [3], 3),
        ("V4", 2, [((0, 1), (1, 0))], [2, 2], 4),
        ("S3", 2, [((0, 1, 0, 1), ())], [2, 3], 6),
        ("D8", 2, [((0, 1, 0, 1), ())], [2, 4], 8),
        ("Q8", 2, [((0, 0), (1, 1)), ((1, 0), (0, 1, 1, 1))], [4, 4], 8),
        ("A4", 2, [((0, 1, 0, 1, 0, 1), ())], [2, 3], 12),
        ("S4", 2, [((0, 1, 0, 1, 0, 1, 0, 1), ())], [2, 3], 24),
    ]

    def test_completions_count_normal_forms(self):
        start = time.perf_counter()
        for name, k, rels, orders, expected in self.CASES:
            rws = knuth_bendix(MonoidPresentation(k, rels, orders))
            assert rws.complete, name
            assert len(enumerate_normal_forms(rws, 10_000)) == expected, name
        assert time.perf_counter() - start < 30.0


class TestCriterion7FactorGroups:
    def test_f2_over_v4(self, corpus):
        g = corpus["F2"].group
        n = hybrid_bits(
            g,
            [g.b_element(g.b_pres.generator(1)), g.b_element(g.b_pres.generator(2))],
        )
        quotient, epi = factor_group(g, n)
        assert quotient.order() == 6
        orders = {el.order() for el in _all_elements(quotient)}
        from math import lcm

        assert lcm(*orders) == 6  # exponent 6
        rng = random.Random(66)
        for _ in range(1000):
            a, b = g.random_element(rng), g.random_element(rng)
            assert epi(a * b) == epi(a) * epi(b)

    def test_f5_over_y(self, corpus):
        g = corpus["F5"].group
        n = hybrid_bits(g, [g.b_element(g.b_pres.generator(1))])
        quotient, epi = factor_group(g, n)
        assert quotient.order() == 2


class TestCriterion8NonsplitDetection:
    def test_order_four_census_distinguishes_extensions(self, corpus):
        from hybridgrp.pc import PcAutomorphism, PcPresentation
        from hybridgrp.build import ExtensionData, from_extension_data
        from hybridgrp.perm import parse_permutation
        from hybridgrp.rws import MonoidPresentation

        nonsplit = corpus["F5"].group
        orders_nonsplit = sorted(el.order() for el in _all_elements(nonsplit))
        assert 4 in orders_nonsplit

        # split analogue: same factor, same normal subgroup, trivial tail
        b = PcPresentation((2,), ((0,),), {})
        rules = knuth_bendix(MonoidPresentation(1, [], [2]))
        split = from_extension_data(
            ExtensionData(
                perm_images=[parse_permutation("(1,2)", 2)],
                factor_rules=rules,
                b_pres=b,
                tails=[b.identity() for _ in rules.rules],
                action=[PcAutomorphism(b, [b.generator(1)])],
                name="C2xC2",
            )
        )
        assert split.order() == 4
        orders_split = sorted(el.order() for el in _all_elements(split))
        assert max(orders_split) == 2  # exponent 2: no order-4 element
        assert orders_nonsplit != orders_split


class TestCriterion9OrderFormula:
    def test_component_order_product(self):
        assert (
            extension_order(23499295948800, 2**16) == 1540049859300556800
        )


class TestCriterion10PerformanceSmoke:
    def test_f6_mul_under_budget_and_packing(self, corpus):
        g = corpus["F6"].group
        rng = random.Random(101)
        pairs = [
            (g.random_element(rng), g.random_element(rng)) for _ in range(200)
        ]
        samples = 10_000
        times = []
        i = 0
        start_all = time.perf_counter()
        for _ in range(samples):
            a, b = pairs[i]
            i = (i + 1) % len(pairs)
            t0 = time.perf_counter()
            a * b
            times.append(time.perf_counter() - t0)
        mean_ms = statistics.fmean(times) * 1000
        assert mean_ms < 5.0, f"mean multiply {mean_ms:.3f} ms"

        # packed B-part: <= 2 * 20 bits + 16 bytes overhead
        budget = (2 * 20 + 7) // 8 + 16
        el = g.random_element(rng)
        assert len(el.bpart.pack()) <= budget


class TestCriterion11BenchFormat:
    GOLDEN = [
        "group: F1  order: 6  b-part-bytes: #",
        "op            samples    mean-ms  median-ms",
        "x*y                40     #     #",
        "x^-1               40     #     #",
    ]

    @staticmethod
    def mask(line):
        import re

        line = re.sub(r"\d+\.\d+", "#", line)
        return re.sub(r"b-part-bytes: \d+", "b-part-bytes: #", line)

    def test_table_matches_golden(self):
        report = h_bench("F1", ops=("mul", "inv"), samples=40, seed=7)
        got = [self.mask(ln) for ln in report.table().splitlines()]
        assert got == self.GOLDEN

    def test_deterministic_given_seed(self):
        a = h_bench("F1", ops=("mul", "inv"), samples=40, seed=7, log_ops=True)
        b = h_bench("F1", ops=("mul", "inv"), samples=40, seed=7, log_ops=True)
        assert a.op_log == b.op_log
