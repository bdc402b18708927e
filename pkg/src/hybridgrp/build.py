"""Constructors and validators for hybrid groups.

Two entry points: `from_extension_data` assembles a group from explicit
ingredients (factor rules, pc presentation, tails, action), and
`from_permutation_group` derives everything from a permutation group with
a designated solvable normal subgroup B — pc presentation from a refined
derived series, factor rules from a Knuth-Bendix-completed Cayley-graph
presentation of the coset action, tails and automorphisms extracted by
membership tests.  `fixtures` defines the standard test corpus F1-F6.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product as iproduct
from random import Random

from .hybrid import CacheConfig, HybridElement, HybridGroup
from .pc import (
    PcAutomorphism,
    PcElement,
    PcPresentation,
    format_pc_text,
    parse_pc_text,
)
from .perm import (
    Permutation,
    StabilizerChain,
    evaluate_word,
    parse_permutation,
    presentation_from,
    right_transversal,
    schreier_sims,
)
from .rws import (
    MonoidPresentation,
    RewritingSystem,
    enumerate_normal_forms,
    format_word_text,
    is_confluent,
    knuth_bendix,
    parse_word_text,
)


class BuildError(Exception):
    pass


# -- explicit extension data -------------------------------------------------

@dataclass
class ExtensionData:
    """Raw ingredients of a hybrid group.

    `factor_rules` may be a confluent RewritingSystem or a
    MonoidPresentation still to be completed; tails are indexed parallel
    to the (completed) rule list, action parallel to the A-generators.
    """

    perm_images: list[Permutation]
    factor_rules: RewritingSystem | MonoidPresentation
    b_pres: PcPresentation
    tails: list[PcElement]
    action: list[PcAutomorphism]
    name: str = ""


def from_extension_data(
    data: ExtensionData, check: bool = True, samples: int = 1000, seed: int = 12345
) -> HybridGroup:
    """Assemble and (by default) validate a hybrid group."""
    rules = data.factor_rules
    if isinstance(rules, MonoidPresentation):
        rules = knuth_bendix(rules)
    group = HybridGroup(
        perm_images=list(data.perm_images),
        factor_rules=rules,
        b_pres=data.b_pres,
        tails=list(data.tails),
        action=list(data.action),
        name=data.name,
    )
    if check:
        report = validate(group, samples=samples, seed=seed)
        if not report.overall:
            raise BuildError(f"validation failed: {report.failures()}")
    return group


# -- validation --------------------------------------------------------------

@dataclass
class ValidationReport:
    checks: list[tuple[str, bool, object]] = field(default_factory=list)

    @property
    def overall(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    def failures(self):
        return [(name, witness) for name, ok, witness in self.checks if not ok]

    def add(self, name: str, ok: bool, witness=None):
        self.checks.append((name, bool(ok), witness))


def _all_elements(group: HybridGroup):
    words = enumerate_normal_forms(group.factor_rules, 10**7)
    ranges = [range(o) for o in group.b_pres.relative_orders]
    for w in words:
        for exps in iproduct(*ranges):
            yield group.element(w, group.b_pres.element(exps))


def validate(
    group: HybridGroup,
    reference=None,
    strict: bool = False,
    samples: int = 10_000,
    seed: int = 12345,
) -> ValidationReport:
    """Empirical checks a-f; failures are reported, never raised."""
    report = ValidationReport()

    # (a) factor rules confluent
    ok, witness = is_confluent(group.factor_rules)
    report.add("factor-rules-confluent", ok, witness)

    # (b) each automorphism preserves the pc relations and is bijective
    for i, alpha in enumerate(group.action, 1):
        ok = alpha.preserves_relations() and alpha.is_bijective()
        report.add(f"action-x{i}-automorphism", ok)

    # (c) nu well-defined: each rule's permutation image holds
    for r in group.factor_rules.rules:
        left = evaluate_word(tuple(c + 1 for c in r.left), group.perm_images, group.degree)
        right = evaluate_word(tuple(c + 1 for c in r.right), group.perm_images, group.degree)
        report.add("rule-perm-image", left == right, (r.left, r.right))

    # (d) tails lie in B (same presentation, right count)
    ok = len(group.tails) == len(group.factor_rules.rules) and all(
        t.pres is group.b_pres for t in group.tails
    )
    report.add("tails-in-b", ok)

    # (e) associativity
    order = group.order()
    exhaustive = strict or order**3 <= 2 * 10**6
    witness = None
    ok = True
    if exhaustive:
        elements = list(_all_elements(group))
        for a in elements:
            for b in elements:
                ab = a * b
                for c in elements:
                    if ab * c != a * (b * c):
                        ok, witness = False, (a, b, c)
                        break
                if not ok:
                    break
            if not ok:
                break
    else:
        rng = Random(seed)
        for _ in range(samples):
            a = group.random_element(rng)
            b = group.random_element(rng)
            c = group.random_element(rng)
            if (a * b) * c != a * (b * c):
                ok, witness = False, (a, b, c)
                break
    report.add("associativity", ok, witness)

    # (f) order consistency against a reference representation
    if reference is not None and order <= 10**4:
        gens = [reference.to_perm(group.generator(i)) for i in range(1, group.k + 1)]
        gens += [
            reference.to_perm(group.b_element(group.b_pres.generator(j)))
            for j in range(1, group.b_pres.n + 1)
        ]
        closure = schreier_sims(gens, degree=reference.degree).order()
        report.add("order-vs-reference", closure == order, (closure, order))

    return report


# -- permutation-group pipeline ---------------------------------------------

def _factorize(n: int) -> list[int]:
    """Prime factors with multiplicity, ascending."""
    out = []
    d = 2
    while d * d <= n:
        while n % d == 0:
            out.append(d)
            n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _normal_closure_gens(h_gens, seeds, degree):
    """Generators of the normal closure of <seeds> under conjugation by
    h_gens, as an explicit list (desk scale)."""
    chain = schreier_sims(seeds, degree=degree)
    out = [s for s in seeds if not s.is_identity()]
    queue = list(out)
    while queue:
        g = queue.pop(0)
        for h in h_gens:
            c = h.inv() * g * h
            if not chain.contains(c):
                out.append(c)
                queue.append(c)
                chain = schreier_sims(out, degree=degree)
    return out


def _derived_series(gens, degree):
    """Generating lists D_0 > D_1 > ... > trivial; raises if not solvable."""
    series = [list(gens)]
    current = list(gens)
    cur_order = schreier_sims(current, degree=degree).order()
    while cur_order > 1:
        comms = [
            a.inv() * b.inv() * a * b for a in current for b in current
        ]
        comms = [c for c in comms if not c.is_identity()]
        derived = _normal_closure_gens(current, comms, degree) if comms else []
        d_order = schreier_sims(derived, degree=degree).order() if derived else 1
        if d_order == cur_order:
            raise BuildError("normal subgroup is not solvable")
        series.append(derived)
        current = derived
        cur_order = d_order
    return series


class _Pcgs:
    """A prime-step polycyclic generating sequence for a solvable
    permutation group, with exponent extraction by membership tests."""

    def __init__(self, b_gens, degree):
        series = _derived_series(b_gens, degree)
        added = []  # (perm, relative order, chain below), bottom to top
        u_gens: list[Permutation] = []
        u_chain = schreier_sims([], degree=degree)
        for layer_gens in reversed(series[:-1]):
            for g in layer_gens:
                m = self._order_mod(g, u_chain)
                if m == 1:
                    continue
                primes = _factorize(m)
                # block top to bottom: g, g^p1, g^(p1 p2), ...
                block = []
                e = 1
                for p in primes:
                    block.append((g**e, p))
                    e *= p
                for z, p in reversed(block):
                    added.append((z, p, u_chain))
                    u_gens = u_gens + [z]
                    u_chain = schreier_sims(u_gens, degree=degree)
        added.reverse()  # top first
        self.degree = degree
        self.gens = [z for z, _, _ in added]
        self.relative_orders = [p for _, p, _ in added]
        self.below = [c for _, _, c in added]
        self.chain = u_chain  # the full group

    @staticmethod
    def _order_mod(g: Permutation, u_chain: StabilizerChain) -> int:
        o = g.order()
        for m in sorted(d for d in range(1, o + 1) if o % d == 0):
            if u_chain.contains(g**m):
                return m
        return o  # unreachable

    def extract(self, p: Permutation) -> tuple[int, ...]:
        """Exponent vector of a member; raises if p is outside the group."""
        vec = []
        r = p
        for y, o, below in zip(self.gens, self.relative_orders, self.below):
            for e in range(o):
                if below.contains((y**e).inv() * r):
                    vec.append(e)
                    r = (y**e).inv() * r
                    break
            else:
                raise BuildError(f"{p} is not in the designated normal subgroup")
        if not r.is_identity():
            raise BuildError(f"{p} is not in the designated normal subgroup")
        return tuple(vec)

    def presentation(self) -> PcPresentation:
        n = len(self.gens)
        power_tails = []
        conj = {}
        for i, (y, o) in enumerate(zip(self.gens, self.relative_orders)):
            power_tails.append(self.extract(y**o))
            for j in range(i + 1, n):
                z = self.gens[j]
                tail = self.extract(y.inv() * z * y)
                if tail != tuple(1 if t == j else 0 for t in range(n)):
                    conj[(i + 1, j + 1)] = tail
        return PcPresentation(
            tuple(self.relative_orders), tuple(power_tails), conj
        )

    def evaluate(self, vec) -> Permutation:
        p = Permutation.identity(self.degree)
        for y, e in zip(self.gens, vec):
            p = p * y**e
        return p


class ReferenceIso:
    """Element maps between a hybrid group and its source permutation group."""

    def __init__(self, group: HybridGroup, g_gens, pcgs: _Pcgs, chain_a, rt, degree):
        self.group = group
        self.g_gens = list(g_gens)
        self.pcgs = pcgs
        self.chain_a = chain_a
        self._rt = rt
        self.degree = degree

    def _coset_perm(self, p: Permutation) -> Permutation:
        reps = self._rt.representatives
        return Permutation(
            tuple(self._rt.coset_index(r * p) - 1 for r in reps)
        )

    def to_perm(self, el: HybridElement) -> Permutation:
        p = Permutation.identity(self.degree)
        for c in el.xword:
            p = p * self.g_gens[c]
        return p * self.pcgs.evaluate(el.bpart.exponents)

    def to_hybrid(self, p: Permutation) -> HybridElement:
        word = self.chain_a.factor_word(self._coset_perm(p))
        e0 = self.group.element_from_signed_word(word)
        d = self.to_perm(e0).inv() * p
        return e0 * self.group.b_element(
            self.group.b_pres.element(self.pcgs.extract(d))
        )


def from_permutation_group(g_gens: list[Permutation], b_gens: list[Permutation], name: str = ""):
    """Hybrid group for G = <g_gens> over the solvable normal B = <b_gens>.

    Returns (group, ReferenceIso).
    """
    if not g_gens:
        raise BuildError("need at least one generator for G")
    degree = g_gens[0].degree
    chain_g = schreier_sims(g_gens, degree=degree)
    chain_b = schreier_sims(b_gens, degree=degree)
    for b in b_gens:
        if not chain_g.contains(b):
            raise BuildError("B is not contained in G")
    for b in b_gens:
        for g in g_gens:
            if not chain_b.contains(g.inv() * b * g):
                raise BuildError("B is not normal in G")

    pcgs = _Pcgs(b_gens, degree)
    b_pres = pcgs.presentation()

    # coset action of G on right cosets of B
    rt = right_transversal(chain_g, chain_b)
    reps = rt.representatives

    def coset_perm(p: Permutation) -> Permutation:
        return Permutation(tuple(rt.coset_index(r * p) - 1 for r in reps))

    a_images = [coset_perm(g) for g in g_gens]
    a_degree = len(reps)
    chain_a = schreier_sims(a_images, degree=a_degree)

    pres_a = presentation_from(chain_a)
    rules = knuth_bendix(
        MonoidPresentation(
            alphabet_size=len(g_gens),
            relations=[(r, ()) for r in pres_a.relators],
            generator_orders=[p.order() for p in a_images],
        )
    )

    # tails: the rule l -> r holds in A, so r(gens)^-1 l(gens) is in B
    tails = []
    for r in rules.rules:
        left = evaluate_word(tuple(c + 1 for c in r.left), g_gens, degree)
        right = evaluate_word(tuple(c + 1 for c in r.right), g_gens, degree)
        tails.append(b_pres.element(pcgs.extract(right.inv() * left)))

    # conjugation action of each generator on the pcgs
    action = []
    for g in g_gens:
        images = [
            b_pres.element(pcgs.extract(g.inv() * y * g)) for y in pcgs.gens
        ]
        action.append(PcAutomorphism(b_pres, images))

    group = HybridGroup(
        perm_images=a_images,
        factor_rules=rules,
        b_pres=b_pres,
        tails=tails,
        action=action,
        name=name,
    )
    return group, ReferenceIso(group, g_gens, pcgs, chain_a, rt, degree)


# -- fixtures ----------------------------------------------------------------

@dataclass
class Fixture:
    name: str
    group: HybridGroup
    reference: ReferenceIso | None


class _ExplicitIso:
    """ReferenceIso built from explicit generator images."""

    def __init__(self, group: HybridGroup, x_images, y_images, degree):
        self.group = group
        self.degree = degree
        self._x = list(x_images)
        self._y = list(y_images)
        gens = list(x_images) + list(y_images)
        self._chain = schreier_sims(gens, degree=degree)
        # membership table is affordable at fixture scale
        self._table = {}
        for el in _all_elements(group):
            self._table[self.to_perm(el).images] = el

    def to_perm(self, el: HybridElement) -> Permutation:
        p = Permutation.identity(self.degree)
        for c in el.xword:
            p = p * self._x[c]
        for y, e in zip(self._y, el.bpart.exponents):
            p = p * y**e
        return p

    def to_hybrid(self, p: Permutation) -> HybridElement:
        return self._table[p.images]


def _deleted_module_matrices(perm: Permutation):
    """Action of a 5-point permutation on the sum-zero subspace of F2^5,
    rows over the basis f_i = e_i + e_5 (i = 1..4)."""
    rows = []
    for i in range(4):
        # f_i maps to e_{s(i)} + e_{s(5)} = f_{s(i)} + f_{s(5)} (f_5 = 0)
        row = [0] * 4
        for image in (perm.images[i], perm.images[4]):
            if image != 4:
                row[image] ^= 1
        rows.append(tuple(row))
    return rows


def _f1():
    b = PcPresentation((3,), ((0,),), {})
    rules = knuth_bendix(
        MonoidPresentation(1, [], [2])
    )
    data = ExtensionData(
        perm_images=[parse_permutation("(1,2)", 2)],
        factor_rules=rules,
        b_pres=b,
        tails=[b.identity() for _ in rules.rules],
        action=[PcAutomorphism(b, [b.element((2,))])],
        name="F1",
    )
    group = from_extension_data(data)
    iso = _ExplicitIso(
        group,
        [parse_permutation("(2,3)", 3)],
        [parse_permutation("(1,2,3)", 3)],
        3,
    )
    return Fixture("F1", group, iso)


def _f2():
    g_gens = [parse_permutation("(1,2)", 4), parse_permutation("(1,2,3,4)", 4)]
    b_gens = [parse_permutation("(1,2)(3,4)", 4), parse_permutation("(1,3)(2,4)", 4)]
    group, iso = from_permutation_group(g_gens, b_gens, name="F2")
    return Fixture("F2", group, iso)


def _f3():
    # SL(2,3) on the 8 nonzero vectors of F3^2 (right multiplication)
    vecs = [(a, b) for a in range(3) for b in range(3) if (a, b) != (0, 0)]
    index = {v: i for i, v in enumerate(vecs)}

    def mat_perm(m):
        return Permutation(
            tuple(
                index[
                    (
                        (v[0] * m[0][0] + v[1] * m[1][0]) % 3,
                        (v[0] * m[0][1] + v[1] * m[1][1]) % 3,
                    )
                ]
                for v in vecs
            )
        )

    s = mat_perm(((0, 2), (1, 0)))  # order 4, the quaternion i
    t = mat_perm(((1, 1), (0, 1)))  # order 3
    j = mat_perm(((1, 1), (1, 2)))
    group, iso = from_permutation_group([t, s], [s, j], name="F3")
    return Fixture("F3", group, iso)


def _affine_perm(matrix_rows, shift):
    """Permutation of the 16 points of F2^4 given by v -> v*M + shift."""
    def apply(v):
        out = list(shift)
        for i in range(4):
            if v & (1 << i):
                for jbit in range(4):
                    out[jbit] ^= matrix_rows[i][jbit]
        return sum(bit << k for k, bit in enumerate(out))

    return Permutation(tuple(apply(v) for v in range(16)))


def _f4():
    a = parse_permutation("(1,2,3,4,5)", 5)
    b = parse_permutation("(1,2,3)", 5)
    lin_a = _affine_perm(_deleted_module_matrices(a), (0, 0, 0, 0))
    lin_b = _affine_perm(_deleted_module_matrices(b), (0, 0, 0, 0))
    shifts = [
        _affine_perm([(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)], s)
        for s in [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)]
    ]
    group, iso = from_permutation_group(
        [lin_a, lin_b, shifts[0]], shifts, name="F4"
    )
    return Fixture("F4", group, iso)


def _f5():
    b = PcPresentation((2,), ((0,),), {})
    rules = knuth_bendix(MonoidPresentation(1, [], [2]))
    data = ExtensionData(
        perm_images=[parse_permutation("(1,2)", 2)],
        factor_rules=rules,
        b_pres=b,
        tails=[b.element((1,)) for _ in rules.rules],
        action=[PcAutomorphism(b, [b.element((1,))])],
        name="F5",
    )
    group = from_extension_data(data)
    iso = _ExplicitIso(
        group,
        [parse_permutation("(1,2,3,4)", 4)],
        [parse_permutation("(1,3)(2,4)", 4)],
        4,
    )
    return Fixture("F5", group, iso)


def _f6():
    # 2^20 : A5, five copies of the 4-dimensional module, split
    a = parse_permutation("(1,2,3,4,5)", 5)
    b = parse_permutation("(1,2,3)", 5)
    chain = schreier_sims([a, b], degree=5)
    pres = presentation_from(chain)
    rules = knuth_bendix(
        MonoidPresentation(2, [(r, ()) for r in pres.relators], [a.order(), b.order()])
    )
    n = 20
    b_pres = PcPresentation((2,) * n, tuple((0,) * n for _ in range(n)), {})

    def block_action(perm):
        rows = _deleted_module_matrices(perm)
        images = []
        for copy in range(5):
            for i in range(4):
                vec = [0] * n
                for jcol in range(4):
                    vec[copy * 4 + jcol] = rows[i][jcol]
                images.append(b_pres.element(tuple(vec)))
        return PcAutomorphism(b_pres, images)

    data = ExtensionData(
        perm_images=[a, b],
        factor_rules=rules,
        b_pres=b_pres,
        tails=[b_pres.identity() for _ in rules.rules],
        action=[block_action(a), block_action(b)],
        name="F6",
    )
    group = from_extension_data(data, check=False)
    group.build_caches(CacheConfig(inverse=True, product_depth=2,
                                   bottom_matrices=True, bottom_start=1))
    return Fixture("F6", group, None)


@lru_cache(maxsize=1)
def _fixture_list():
    return [_f1(), _f2(), _f3(), _f4(), _f5(), _f6()]


def fixtures() -> dict[str, Fixture]:
    """The standard corpus F1-F6, built once per process."""
    return {f.name: f for f in _fixture_list()}


# -- group definition files --------------------------------------------------

_B_TERM = re.compile(r"y(\d+)(?:\^(\d+))?$")


def parse_b_text(text: str, pres: PcPresentation) -> PcElement:
    """Parse "y1^2 y3" (or "1") into a normal-form element."""
    text = text.strip()
    vec = [0] * pres.n
    if text and text != "1":
        for term in text.split():
            m = _B_TERM.match(term)
            if not m:
                raise BuildError(f"bad b-word term {term!r}")
            i = int(m.group(1))
            if not 1 <= i <= pres.n:
                raise BuildError(f"generator y{i} out of range")
            vec[i - 1] = int(m.group(2) or 1) % pres.relative_orders[i - 1]
    return pres.element(tuple(vec))


def format_b_text(b: PcElement) -> str:
    parts = [f"y{i + 1}^{e}" for i, e in enumerate(b.exponents) if e]
    return " ".join(parts) if parts else "1"


def load_group_dict(doc: dict) -> HybridGroup:
    """Build a group from the JSON group-definition document."""
    try:
        degree = int(doc["degree"])
        perm_images = [parse_permutation(t, degree) for t in doc["a_perm_images"]]
        b_pres = parse_pc_text(doc["pc"])
        k = len(perm_images)
        lefts, rights, tails = [], [], []
        for entry in doc["rules"]:
            lefts.append(parse_word_text(entry["left"], k))
            rights.append(parse_word_text(entry["right"], k))
            tails.append(parse_b_text(entry.get("tail", "1"), b_pres))
        action = []
        for images_text in doc["action"]:
            if len(images_text) != b_pres.n:
                raise BuildError("action needs one image per pc generator")
            action.append(
                PcAutomorphism(b_pres, [parse_b_text(t, b_pres) for t in images_text])
            )
        orders = [p.order() for p in perm_images]
    except (KeyError, TypeError, ValueError) as exc:
        raise BuildError(f"malformed group definition: {exc}") from exc

    pres = MonoidPresentation(k, list(zip(lefts, rights)), orders)
    rules = knuth_bendix(pres)
    # map tails onto the completed rule list: rules kept verbatim keep their
    # tail; everything else must be a split consequence (identity tail),
    # which from_extension_data validation will confirm
    given = {(l, r): t for l, r, t in zip(lefts, rights, tails)}
    completed_tails = [
        given.get((r.left, r.right), b_pres.identity()) for r in rules.rules
    ]
    data = ExtensionData(perm_images, rules, b_pres, completed_tails, action,
                         name=str(doc.get("name", "")))
    return from_extension_data(data)


def load_group_file(path: str) -> HybridGroup:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise BuildError(f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}")
    return load_group_dict(doc)


def group_to_dict(group: HybridGroup) -> dict:
    return {
        "name": group.name,
        "degree": group.degree,
        "a_perm_images": [str(p) for p in group.perm_images],
        "rules": [
            {
                "left": format_word_text(r.left),
                "right": format_word_text(r.right),
                "tail": format_b_text(t),
            }
            for r, t in zip(group.factor_rules.rules, group.tails)
        ],
        "pc": format_pc_text(group.b_pres),
        "action": [
            [format_b_text(im) for im in alpha.images] for alpha in group.action
        ],
    }


def save_group_file(group: HybridGroup, path: str):
    with open(path, "w") as fh:
        json.dump(group_to_dict(group), fh, indent=2)
        fh.write("\n")
