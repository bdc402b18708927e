"""Hybrid group representation and arithmetic.

A hybrid group is an extension of a permutation-represented finite factor
group A (generators x_1..x_k with a confluent positive rewriting system) by
a polycyclic normal subgroup B.  Every element has a unique normal form
w(X) * b with w irreducible and b an exponent vector.  Multiplication works
by from-the-left collection: scan the X-projection for the leftmost factor
rule, push intervening B-elements rightward through the conjugation
automorphisms, then apply the rule together with its B-valued tail.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .pc import PcAutomorphism, PcElement, PcPresentation
from .perm import Permutation, StabilizerChain, schreier_sims
from .rws import RewritingSystem, Word, is_irreducible, reduce_word


class HybridError(Exception):
    pass


@dataclass
class CacheConfig:
    inverse: bool = True
    product_depth: int = 0  # cache automorphism products for x-words up to this length
    segments: bool = False
    bottom_matrices: bool = False
    bottom_start: int | None = None  # 1-based first generator of the bottom layer
    segment_boundaries: list[int] | None = None


class HybridGroup:
    """Extension data: factor rules with B-valued tails, plus the
    conjugation automorphism of B for each factor generator."""

    def __init__(
        self,
        perm_images: list[Permutation],
        factor_rules: RewritingSystem,
        b_pres: PcPresentation,
        tails: list[PcElement],
        action: list[PcAutomorphism],
        name: str = "",
    ):
        k = factor_rules.alphabet_size
        if len(perm_images) != k:
            raise HybridError("need one permutation image per factor generator")
        if len(tails) != len(factor_rules.rules):
            raise HybridError("need one tail per factor rule")
        if len(action) != k:
            raise HybridError("need one automorphism per factor generator")
        for t in tails:
            if t.pres is not b_pres:
                raise HybridError("tail from a different pc presentation")
        for a in action:
            if a.pres is not b_pres:
                raise HybridError("automorphism over a different pc presentation")
        self.k = k
        self.perm_images = list(perm_images)
        self.degree = perm_images[0].degree if perm_images else 1
        self.factor_chain: StabilizerChain = schreier_sims(
            perm_images, degree=self.degree
        )
        self.b_pres = b_pres
        self.factor_rules = factor_rules
        self.tails = list(tails)
        self.action = list(action)
        self.name = name
        self._gen_inverses: list[HybridElement] | None = None
        self._aut_products: dict[Word, PcAutomorphism] = {}
        self._aut_product_depth = 0

    # -- elements ----------------------------------------------------------

    def identity(self) -> "HybridElement":
        return HybridElement(self, (), self.b_pres.identity())

    def element(self, xword, bpart: PcElement | None = None) -> "HybridElement":
        """Normal-form element from an irreducible x-word and a B-part."""
        xword = tuple(xword)
        if bpart is None:
            bpart = self.b_pres.identity()
        if not is_irreducible(self.factor_rules, xword):
            raise HybridError(f"x-word {xword} is not in normal form")
        if bpart.pres is not self.b_pres:
            raise HybridError("B-part from a different presentation")
        return HybridElement(self, xword, bpart)

    def generator(self, i: int) -> "HybridElement":
        """x_i as an element (1-based)."""
        return self.collect([i - 1])

    def b_element(self, b: PcElement) -> "HybridElement":
        return HybridElement(self, (), b)

    def order(self) -> int:
        return extension_order(self.factor_chain.order(), self.b_pres.order())

    # -- collection --------------------------------------------------------

    def collect(self, expr) -> "HybridElement":
        """Normal form of an alternating expression of x-letters (ints,
        0-based) and B-elements (PcElement)."""
        xs: list[int] = []
        bs: list[PcElement | None] = []  # b element sitting after xs[i]
        lead: PcElement | None = None  # b element before any letter

        def push_b(b: PcElement):
            nonlocal lead
            if not xs:
                lead = b if lead is None else lead * b
            elif bs[-1] is None:
                bs[-1] = b
            else:
                bs[-1] = bs[-1] * b

        for item in expr:
            if isinstance(item, PcElement):
                if item.pres is not self.b_pres:
                    raise HybridError("B-element from a different presentation")
                if not item.is_identity():
                    push_b(item)
            elif isinstance(item, HybridElement):
                if item.group is not self:
                    raise HybridError("element from a different group")
                for c in item.xword:
                    xs.append(c)
                    bs.append(None)
                if not item.bpart.is_identity():
                    push_b(item.bpart)
            else:
                c = int(item)
                if not 0 <= c < self.k:
                    raise HybridError(f"letter {c} out of range")
                xs.append(c)
                bs.append(None)

        trie = self.factor_rules._trie
        rules = self.factor_rules.rules
        back = self.factor_rules.max_left_len
        i = 0
        while i < len(xs):
            m = trie.match(xs, i)
            if m is None:
                i += 1
                continue
            idx, length = m
            # push B-elements inside the matched span to its right end
            carry: PcElement | None = None
            for pos in range(i, i + length - 1):
                b = bs[pos]
                bs[pos] = None
                if carry is not None:
                    b = carry if b is None else carry * b
                if b is None or b.is_identity():
                    carry = None
                    continue
                carry = self._push_through(b, xs, pos + 1, pos + 2)
            tail_b = bs[i + length - 1]
            acc = self.tails[idx]
            if carry is not None:
                acc = acc * carry
            if tail_b is not None:
                acc = acc * tail_b
            right = rules[idx].right
            xs[i : i + length] = list(right)
            bs[i : i + length] = [None] * len(right)
            if not acc.is_identity():
                if right:
                    bs[i + len(right) - 1] = acc
                elif i > 0:
                    bs[i - 1] = acc if bs[i - 1] is None else bs[i - 1] * acc
                else:
                    lead = acc if lead is None else lead * acc
            i = max(0, i - back + 1)
        # no factor rule applies anywhere; sweep remaining B-elements right
        final = self.b_pres.identity()
        if lead is not None:
            final = self._push_through(lead, xs, 0, len(xs))
        for pos in range(len(xs)):
            b = bs[pos]
            if b is not None and not b.is_identity():
                pushed = self._push_through(b, xs, pos + 1, len(xs))
                final = pushed if final.is_identity() else final * pushed
        # positions further right were already to the right of earlier ones,
        # so the products above accumulate in word order
        return HybridElement(self, tuple(xs), final)

    def _push_through(self, b: PcElement, xs: list[int], start: int, stop: int) -> PcElement:
        """Move b rightward past xs[start:stop]: d * x = x * alpha_x(d)."""
        pos = start
        while pos < stop:
            if self._aut_product_depth > 1:
                run = min(self._aut_product_depth, stop - pos)
                while run > 1:
                    key = tuple(xs[pos : pos + run])
                    aut = self._aut_products.get(key)
                    if aut is not None:
                        b = aut(b)
                        pos += run
                        break
                    run -= 1
                else:
                    b = self.action[xs[pos]](b)
                    pos += 1
                continue
            b = self.action[xs[pos]](b)
            pos += 1
        return b

    # -- caches ------------------------------------------------------------

    def build_caches(self, config: CacheConfig | None = None) -> dict:
        """Precompute inverse/product/segment/matrix caches; semantics of
        the arithmetic are unchanged."""
        config = config or CacheConfig()
        report = {}
        if config.inverse:
            self._gen_inverses = [self._compute_gen_inverse(i) for i in range(self.k)]
            report["inverse"] = self.k
        if config.product_depth > 1:
            if config.product_depth > 4:
                raise HybridError("product cache depth is limited to 4")
            self._aut_products = {}
            words = [(c,) for c in range(self.k)]
            auts = {(c,): self.action[c] for c in range(self.k)}
            for _ in range(config.product_depth - 1):
                nxt = []
                for w in words:
                    for c in range(self.k):
                        w2 = w + (c,)
                        auts[w2] = auts[w].compose(self.action[c])
                        nxt.append(w2)
                words = nxt
            self._aut_products = {w: a for w, a in auts.items() if len(w) > 1}
            self._aut_product_depth = config.product_depth
            report["aut_products"] = len(self._aut_products)
        if config.segments:
            for a in self.action:
                a.enable_segment_cache(config.segment_boundaries)
            report["segments"] = True
        if config.bottom_matrices:
            start = config.bottom_start or 1
            for a in self.action:
                a.enable_bottom_matrix(start)
            report["bottom_matrices"] = start
        return report

    def _compute_gen_inverse(self, c: int) -> "HybridElement":
        o = self.perm_images[c].order()
        head = self.collect([c] * (o - 1))
        full = self.collect([c] * o)
        if full.xword:
            raise HybridError("factor rules do not reduce x^o(x) to the identity")
        return self.collect([head, full.bpart.inv()])

    def gen_inverse(self, c: int) -> "HybridElement":
        if self._gen_inverses is None:
            self._gen_inverses = [self._compute_gen_inverse(i) for i in range(self.k)]
        return self._gen_inverses[c]

    # -- whole-group operations --------------------------------------------

    def random_element(self, rng: random.Random) -> "HybridElement":
        """Exactly uniform: a uniform factor element (one transversal rep
        per coset of the chain) times a uniform B-element."""
        expr: list = []
        # deepest level first: the product of one transversal rep per level
        # in that order hits every factor element exactly once
        for level in reversed(self.factor_chain.levels):
            pt = rng.choice(sorted(level.transversal))
            _, word = level.transversal[pt]
            for c in word:
                if c > 0:
                    expr.append(c - 1)
                else:
                    expr.append(self.gen_inverse(-c - 1))
        bvec = tuple(
            rng.randrange(o) for o in self.b_pres.relative_orders
        )
        expr.append(PcElement(self.b_pres, bvec))
        return self.collect(expr)

    def element_from_signed_word(self, word) -> "HybridElement":
        """Element of a signed 1-based x-letter word (inverses allowed)."""
        expr: list = []
        for c in word:
            if c > 0:
                expr.append(c - 1)
            else:
                expr.append(self.gen_inverse(-c - 1))
        return self.collect(expr)


class HybridElement:
    """Normal form w(X) * b: an irreducible x-word and a B exponent vector."""

    __slots__ = ("group", "xword", "bpart")

    def __init__(self, group: HybridGroup, xword: Word, bpart: PcElement):
        self.group = group
        self.xword = xword
        self.bpart = bpart

    def __eq__(self, other):
        # structural equality is sound: both components are normal forms
        return (
            isinstance(other, HybridElement)
            and self.group is other.group
            and self.xword == other.xword
            and self.bpart == other.bpart
        )

    def __hash__(self):
        return hash((self.xword, self.bpart.exponents))

    def is_identity(self) -> bool:
        return not self.xword and self.bpart.is_identity()

    def __mul__(self, other: "HybridElement") -> "HybridElement":
        if self.group is not other.group:
            raise HybridError("elements from different groups")
        return self.group.collect([self, other])

    def inv(self) -> "HybridElement":
        """(a*b)^-1 = b^-1 * a^-1 with a^-1 assembled from the cached
        per-generator inverses of the reversed x-word, in one collection."""
        g = self.group
        expr: list = []
        if not self.bpart.is_identity():
            expr.append(self.bpart.inv())
        for c in reversed(self.xword):
            expr.append(g.gen_inverse(c))
        return g.collect(expr)

    def __pow__(self, k: int) -> "HybridElement":
        if k < 0:
            return self.inv() ** (-k)
        result = self.group.identity()
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def nu(self) -> Permutation:
        """Image in the permutation representation of the factor group."""
        p = Permutation.identity(self.group.degree)
        for c in self.xword:
            p = p * self.group.perm_images[c]
        return p

    def order(self) -> int:
        o = self.nu().order()
        power = self ** o
        if power.xword:
            raise HybridError("inconsistent group data: nu-order power left the kernel")
        return o * power.bpart.order()

    def __str__(self) -> str:
        xtext = "*".join(f"x{c + 1}" for c in self.xword) if self.xword else "1"
        return f"{xtext} | {self.bpart}"


def extension_order(factor_order: int, normal_order: int) -> int:
    """|G| = |A| * |B| for an extension of A by B."""
    return factor_order * normal_order


def group_order(g: HybridGroup) -> int:
    return g.order()


# -- element text grammar ---------------------------------------------------

def parse_element(g: HybridGroup, text: str) -> HybridElement:
    """Grammar: "<xword> | <bword>"; xword "*"-separated x<i> tokens or "1",
    bword space-separated y<i>^<e> tokens or "1"."""
    if "|" not in text:
        raise HybridError(f"element text needs ' | ': {text!r}")
    xpart, bpart = text.split("|", 1)
    xpart, bpart = xpart.strip(), bpart.strip()
    letters: list[int] = []
    if xpart != "1":
        for tok in xpart.split("*"):
            tok = tok.strip()
            if not tok.startswith("x"):
                raise HybridError(f"bad x token {tok!r}")
            i = int(tok[1:])
            if not 1 <= i <= g.k:
                raise HybridError(f"x token {tok!r} out of range")
            letters.append(i - 1)
    vec = [0] * g.b_pres.n
    if bpart not in ("", "1"):
        for tok in bpart.split():
            if "^" not in tok or not tok.startswith("y"):
                raise HybridError(f"bad y token {tok!r}")
            i, e = tok[1:].split("^")
            i = int(i)
            if not 1 <= i <= g.b_pres.n:
                raise HybridError(f"y token {tok!r} out of range")
            vec[i - 1] = int(e) % g.b_pres.relative_orders[i - 1]
    return g.collect(letters + [PcElement(g.b_pres, tuple(vec))])


def format_element(e: HybridElement) -> str:
    return str(e)
