import json
import random

import pytest

from hybridgrp.build import (
    BuildError,
    _all_elements,
    from_permutation_group,
    group_to_dict,
    load_group_dict,
    load_group_file,
    save_group_file,
    validate,
)
from hybridgrp.perm import parse_permutation, schreier_sims
from oracles import closure_order

EXPECTED_ORDERS = {
    "F1": 6,
    "F2": 24,
    "F3": 24,
    "F4": 960,
    "F5": 4,
    "F6": 62914560,
}


class TestFixtures:
    def test_orders(self, corpus):
        for name, expected in EXPECTED_ORDERS.items():
            assert corpus[name].group.order() == expected

    @pytest.mark.parametrize("name", ["F1", "F2", "F3", "F5"])
    def test_validate_overall(self, corpus, name):
        fx = corpus[name]
        report = validate(fx.group, reference=fx.reference, samples=500, seed=1)
        assert report.overall, report.failures()

    def test_validate_f4_f6(self, corpus):
        for name in ("F4", "F6"):
            report = validate(corpus[name].group, samples=200, seed=1)
            assert report.overall, report.failures()

    @pytest.mark.parametrize("name", ["F1", "F2", "F3", "F5"])
    def test_reference_is_isomorphism(self, corpus, name):
        fx = corpus[name]
        g, iso = fx.group, fx.reference
        rng = random.Random(10)
        for _ in range(200):
            a = g.random_element(rng)
            b = g.random_element(rng)
            assert iso.to_perm(a * b) == iso.to_perm(a) * iso.to_perm(b)
            assert iso.to_hybrid(iso.to_perm(a)) == a

    def test_reference_order_matches_closure(self, corpus):
        for name in ("F1", "F2", "F3"):
            fx = corpus[name]
            imgs = [
                fx.reference.to_perm(fx.group.generator(i + 1))
                for i in range(fx.group.k)
            ]
            b_imgs = [
                fx.reference.to_perm(
                    fx.group.b_element(fx.group.b_pres.generator(j + 1))
                )
                for j in range(fx.group.b_pres.n)
            ]
            assert closure_order(imgs + b_imgs) == fx.group.order()


class TestFromPermutationGroup:
    def test_s4_over_v4(self):
        g_gens = [parse_permutation("(1,2)", 4), parse_permutation("(1,2,3,4)", 4)]
        b_gens = [
            parse_permutation("(1,2)(3,4)", 4),
            parse_permutation("(1,3)(2,4)", 4),
        ]
        group, iso = from_permutation_group(g_gens, b_gens)
        assert group.order() == 24
        assert group.b_pres.order() == 4

    def test_rejects_non_normal(self):
        g_gens = [parse_permutation("(1,2)", 3), parse_permutation("(2,3)", 3)]
        b_gens = [parse_permutation("(1,2)", 3)]
        with pytest.raises(BuildError):
            from_permutation_group(g_gens, b_gens)

    def test_rejects_non_solvable_normal(self):
        # A5 normal in S5 but not solvable
        g_gens = [parse_permutation("(1,2,3,4,5)", 5), parse_permutation("(1,2)", 5)]
        b_gens = [parse_permutation("(1,2,3)", 5), parse_permutation("(3,4,5)", 5)]
        with pytest.raises(BuildError):
            from_permutation_group(g_gens, b_gens)

    def test_rejects_subset_violation(self):
        g_gens = [parse_permutation("(1,2,3)", 4)]
        b_gens = [parse_permutation("(1,2)(3,4)", 4)]
        with pytest.raises(BuildError):
            from_permutation_group(g_gens, b_gens)

    def test_trivial_factor(self):
        # A trivial: the hybrid group is just B
        b_gens = [parse_permutation("(1,2,3,4)", 4)]
        group, iso = from_permutation_group(b_gens, b_gens)
        assert group.order() == 4
        assert group.k == 0 or group.factor_chain.order() == 1

    def test_sl23(self):
        # order-24 group with quaternion normal subgroup on 8 points
        vecs = [(a, b) for a in range(3) for b in range(3) if (a, b) != (0, 0)]
        index = {v: i for i, v in enumerate(vecs)}

        def mat_perm(m):
            images = []
            for a, b in vecs:
                w = (
                    (m[0][0] * a + m[1][0] * b) % 3,
                    (m[0][1] * a + m[1][1] * b) % 3,
                )
                images.append(index[w])
            from hybridgrp.perm import Permutation

            return Permutation(tuple(images))

        t = mat_perm([[1, 1], [0, 1]])
        s = mat_perm([[0, 2], [1, 0]])
        j = mat_perm([[1, 1], [1, 2]])
        group, iso = from_permutation_group([t, s], [s, j])
        assert group.order() == 24
        assert group.b_pres.order() == 8


class TestGroupFiles:
    @pytest.mark.parametrize("name", ["F1", "F2", "F3", "F5"])
    def test_round_trip(self, corpus, name, tmp_path):
        fx = corpus[name]
        path = tmp_path / f"{name}.json"
        save_group_file(fx.group, str(path))
        loaded = load_group_file(str(path))
        assert loaded.order() == fx.group.order()
        rng_a, rng_b = random.Random(6), random.Random(6)
        for _ in range(100):
            a1, a2 = fx.group.random_element(rng_a), loaded.random_element(rng_b)
            b1, b2 = fx.group.random_element(rng_a), loaded.random_element(rng_b)
            assert (a1 * b1).xword == (a2 * b2).xword
            assert (a1 * b1).bpart.exponents == (a2 * b2).bpart.exponents

    def test_dict_round_trip(self, corpus):
        g = corpus["F2"].group
        doc = group_to_dict(g)
        back = load_group_dict(json.loads(json.dumps(doc)))
        assert back.order() == g.order()

    def test_parse_error_names_location(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"name": "x",\n  "degree": }')
        with pytest.raises(BuildError) as exc:
            load_group_file(str(path))
        assert "line" in str(exc.value)

    def test_missing_field(self):
        with pytest.raises(BuildError):
            load_group_dict({"name": "x"})

    def test_corrupted_action_rejected_at_load(self, corpus):
        doc = group_to_dict(corpus["F2"].group)
        # swap the action of the first factor generator to the identity
        doc["action"][0] = ["1" for _ in doc["action"][0]]
        with pytest.raises(BuildError) as exc:
            load_group_dict(doc)
        assert "validation failed" in str(exc.value)


class TestValidateWitness:
    def test_failure_carries_witness(self, corpus):
        from hybridgrp.hybrid import HybridGroup
        from hybridgrp.pc import identity_automorphism

        g = corpus["F2"].group
        broken = HybridGroup(
            g.perm_images,
            g.factor_rules,
            g.b_pres,
            g.tails,
            [identity_automorphism(g.b_pres) for _ in range(g.k)],
        )
        report = validate(broken, samples=300, seed=2)
        assert not report.overall
        bad = report.failures()
        assert bad
        assert any(witness is not None for _, witness in bad)
