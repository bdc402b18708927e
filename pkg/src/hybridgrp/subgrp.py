"""Subgroups of hybrid groups: hybrid bits, membership, transversals,
homomorphism evaluation, and factor groups G/N for N inside B.

A subgroup S = <gens> is stored as its "hybrid bits": a stabilizer chain
for the image nu(S) in the factor group, and an induced generating
sequence (Igs) for the kernel part S meet B, found by evaluating relators
of a presentation of nu(S) in the generators and closing under
S-conjugation.  Every kernel Igs member carries a word over the subgroup
generators, so membership decisions come with word expressions.
"""

from __future__ import annotations

from dataclasses import dataclass

from .hybrid import HybridElement, HybridGroup, HybridError
from .pc import Igs, PcAutomorphism, PcElement, PcQuotient, igs_from
from .perm import (
    RightTransversal,
    StabilizerChain,
    invert_word,
    presentation_from,
    right_transversal,
    schreier_sims,
)

Word = tuple[int, ...]  # signed 1-based indices into a generator list


class SubgroupError(Exception):
    pass


def _evaluate(gens: list[HybridElement], word) -> HybridElement:
    """Evaluate a signed 1-based word over gens."""
    if not gens:
        raise SubgroupError("cannot evaluate a word over an empty generator list")
    out = gens[0].group.identity()
    for c in word:
        out = out * (gens[c - 1] if c > 0 else gens[-c - 1].inv())
    return out


@dataclass
class HybridBits:
    """The stored structure for S = <gens>."""

    group: HybridGroup
    gens: list[HybridElement]
    image_chain: StabilizerChain  # chain for nu(S)
    kernel_igs: Igs  # Igs for S meet B
    kernel_words: list[Word]  # word over gens per Igs member
    l0: list[PcElement]  # evaluated-relator seed set

    def order(self) -> int:
        return self.image_chain.order() * self.kernel_igs.order()

    def contains(self, g: HybridElement) -> bool:
        return sub_contains(self, g)


def hybrid_bits(
    group: HybridGroup,
    gens: list[HybridElement],
    seed_length: int = 0,
) -> HybridBits:
    """Build the hybrid bits of S = <gens>.

    The kernel S meet B is normally generated (in S) by the evaluated
    relators of a presentation of nu(S); the closure loop conjugates every
    kernel generator by every subgroup generator, inserting anything the
    growing Igs rejects, until stable.  `seed_length` > 0 additionally
    seeds the kernel with all short generator products of trivial image
    before the relator evaluation.
    """
    for g in gens:
        if g.group is not group:
            raise SubgroupError("generator from a different group")
    nu_gens = [g.nu() for g in gens]
    image_chain = schreier_sims(nu_gens, degree=group.degree)

    # kernel generators with their words over gens
    kernel: list[tuple[PcElement, Word]] = []
    igs = igs_from(group.b_pres, [])

    def insert(b: PcElement, word: Word) -> bool:
        nonlocal igs
        if b.is_identity() or igs.contains(b):
            return False
        kernel.append((b, word))
        igs = igs_from(group.b_pres, [e for e, _ in kernel], words=True)
        return True

    l0: list[PcElement] = []
    if seed_length > 0:
        for el, word in _short_kernel_pairs(group, gens, seed_length):
            l0.append(el.bpart)
            insert(el.bpart, word)
    if gens:
        pres = presentation_from(image_chain)
        for rel in pres.relators:
            word = tuple(c + 1 for c in rel)
            el = _evaluate(gens, word)
            if el.xword:
                raise SubgroupError("relator of nu(S) left the kernel")
            l0.append(el.bpart)
            insert(el.bpart, word)

    # normal closure under S-conjugation, breadth-first over the growing list
    i = 0
    while i < len(kernel):
        b, word = kernel[i]
        i += 1
        b_el = group.b_element(b)
        for s in range(1, len(gens) + 1):
            conj = gens[s - 1].inv() * b_el * gens[s - 1]
            if conj.xword:
                raise SubgroupError("conjugate of a kernel element left B")
            insert(conj.bpart, (-s,) + word + (s,))

    kernel_words = _igs_member_words(igs, kernel)
    return HybridBits(group, list(gens), image_chain, igs, kernel_words, l0)


def _igs_member_words(igs: Igs, kernel: list[tuple[PcElement, Word]]) -> list[Word]:
    """Expand the Igs member words (over the kernel list) to words over gens."""
    out = []
    for mw in igs.member_words or []:
        word: list[int] = []
        for c in mw:
            kw = kernel[abs(c) - 1][1]
            word.extend(kw if c > 0 else invert_word(kw))
        out.append(tuple(word))
    return out


def _kernel_word_for(bits: HybridBits, b: PcElement) -> Word | None:
    """Word over bits.gens for a member of S meet B."""
    expr = bits.kernel_igs.express(b)
    if expr is None:
        return None
    word: list[int] = []
    for w, x in zip(bits.kernel_words, expr):
        word.extend(list(w) * x)
    return tuple(word)


def sub_contains(bits: HybridBits, g: HybridElement) -> bool:
    """Membership g in S via the nu-level chain and the kernel Igs."""
    if g.group is not bits.group:
        raise SubgroupError("element from a different group")
    nu = g.nu()
    if not bits.image_chain.contains(nu):
        return False
    word = bits.image_chain.factor_word(nu)
    h = _evaluate(bits.gens, word) if bits.gens else bits.group.identity()
    d = h.inv() * g
    if d.xword:
        return False
    return bits.kernel_igs.contains(d.bpart)


def sub_order(bits: HybridBits) -> int:
    return bits.order()


def express(bits: HybridBits, g: HybridElement) -> Word:
    """A signed 1-based word over bits.gens re-evaluating to exactly g."""
    if g.group is not bits.group:
        raise SubgroupError("element from a different group")
    nu = g.nu()
    if not bits.image_chain.contains(nu):
        raise SubgroupError("element is not in the subgroup")
    word = bits.image_chain.factor_word(nu)
    h = _evaluate(bits.gens, word) if bits.gens else bits.group.identity()
    d = h.inv() * g
    if d.xword:
        raise SubgroupError("element is not in the subgroup")
    tail = _kernel_word_for(bits, d.bpart)
    if tail is None:
        raise SubgroupError("element is not in the subgroup")
    return tuple(word) + tail


def evaluate_hom(bits: HybridBits, images: list, g, strict: bool = False):
    """Image of g under the homomorphism sending bits.gens[i] to images[i].

    Codomain elements only need `*` and `.inv()` (hybrid elements and
    permutations both qualify).  With strict=True the relators of the
    nu(S) presentation are evaluated in the images first and any
    nonidentity result raises.
    """
    if len(images) != len(bits.gens):
        raise SubgroupError("need one image per generator")
    if not images:
        raise SubgroupError("cannot map out of the trivial generator list")
    if strict:
        ident = images[0] * images[0].inv()
        pres = presentation_from(bits.image_chain)
        for rel in pres.relators:
            if _evaluate_in(images, tuple(c + 1 for c in rel)) != ident:
                raise SubgroupError("images do not define a homomorphism")
    return _evaluate_in(images, express(bits, g))


def _evaluate_in(images: list, word):
    out = None
    for c in word:
        step = images[c - 1] if c > 0 else images[-c - 1].inv()
        out = step if out is None else out * step
    if out is None:
        # empty word: identity of the codomain
        sample = images[0]
        return sample * sample.inv()
    return out


class Transversal:
    """Right transversal of U in S: the products V_i * T_j.

    T_j are pre-images in S of a right transversal of nu(U) in nu(S);
    V_i are canonical sift residues representing (U meet B) \\ (S meet B).
    Coset ids are 1-based, numbered (j - 1) * q + i.
    """

    def __init__(self, s_bits: HybridBits, u_bits: HybridBits):
        for u in u_bits.gens:
            if not sub_contains(s_bits, u):
                raise SubgroupError("U is not a subgroup of S")
        self.s_bits = s_bits
        self.u_bits = u_bits
        self._nu_rt: RightTransversal = right_transversal(
            s_bits.image_chain, u_bits.image_chain
        )
        group = s_bits.group
        self.t_bar = [
            _evaluate(s_bits.gens, s_bits.image_chain.factor_word(rep))
            if s_bits.gens
            else group.identity()
            for rep in self._nu_rt.representatives
        ]
        # canonical residues of S meet B under the kernel Igs of U
        seen = set()
        v: list[HybridElement] = []
        for b in _igs_elements(s_bits.kernel_igs):
            r = u_bits.kernel_igs.sift(b)
            if r.exponents not in seen:
                seen.add(r.exponents)
                v.append(group.b_element(r))
        self.v = v
        self.index = len(self.t_bar) * len(v)
        if self.index != s_bits.order() // u_bits.order():
            raise SubgroupError("transversal size mismatch")  # unreachable

    def representatives(self) -> list[HybridElement]:
        """All V_i * T_j in coset-id order."""
        return [vi * tj for tj in self.t_bar for vi in self.v]

    def coset_id(self, s: HybridElement) -> int:
        """1-based id of the coset U * s; constant on cosets."""
        j = self._nu_rt.coset_index(s.nu())
        c = s * self.t_bar[j - 1].inv()
        for i, vi in enumerate(self.v, 1):
            if sub_contains(self.u_bits, c * vi.inv()):
                return (j - 1) * len(self.v) + i
        raise SubgroupError("element is not in S")


def _igs_elements(igs: Igs):
    """Every element of the subgroup the Igs spans, deterministically."""
    pres = igs.pres
    out = [pres.identity()]
    for m, k in zip(igs.members, igs.relative_indices):
        powers = [m ** e for e in range(k)]
        out = [a * p for a in out for p in powers]
    return out


def transversal(s_bits: HybridBits, u_bits: HybridBits) -> Transversal:
    return Transversal(s_bits, u_bits)


def factor_group(group: HybridGroup, n_bits: HybridBits):
    """G/N for N <= B normal in G: same factor rules, tails and action
    pushed through the pc quotient B/N.

    Returns (quotient group, epimorphism); the epimorphism maps
    (w(X), b) to (w(X), b*N).
    """
    if n_bits.group is not group:
        raise SubgroupError("subgroup of a different group")
    if n_bits.image_chain.order() != 1:
        raise SubgroupError("N is not contained in B")
    n_igs = n_bits.kernel_igs
    # normality under the X-generators (PcQuotient checks B-normality)
    for m in n_igs.members:
        m_el = group.b_element(m)
        for i in range(1, group.k + 1):
            x = group.generator(i)
            conj = x.inv() * m_el * x
            if conj.xword or not n_igs.contains(conj.bpart):
                raise SubgroupError(f"N is not normalized by x{i}")
    q = PcQuotient(group.b_pres, n_igs)
    new_tails = [q.map(t) for t in group.tails]
    new_action = []
    for alpha in group.action:
        images = [q.map(alpha(q.lift(q.quotient.generator(j))))
                  for j in range(1, q.quotient.n + 1)]
        new_action.append(PcAutomorphism(q.quotient, images))
    quotient = HybridGroup(
        perm_images=list(group.perm_images),
        factor_rules=group.factor_rules,
        b_pres=q.quotient,
        tails=new_tails,
        action=new_action,
        name=f"{group.name}/N" if group.name else "G/N",
    )

    def epimorphism(g: HybridElement) -> HybridElement:
        if g.group is not group:
            raise SubgroupError("element from a different group")
        return HybridElement(quotient, g.xword, q.map(g.bpart))

    return quotient, epimorphism


def _short_kernel_pairs(group: HybridGroup, gens: list[HybridElement], bound: int):
    """(element, word) for every distinct product of gens of length <= bound
    with trivial nu-image, breadth-first."""
    out = []
    seen = {(group.identity().xword, group.identity().bpart.exponents)}
    layer: list[tuple[HybridElement, Word]] = [(group.identity(), ())]
    if bound >= 0:
        out.append((group.identity(), ()))
    for _ in range(bound):
        nxt = []
        for el, word in layer:
            for s, g in enumerate(gens, 1):
                p = el * g
                key = (p.xword, p.bpart.exponents)
                if key in seen:
                    continue
                seen.add(key)
                nxt.append((p, word + (s,)))
                if not p.xword:
                    out.append((p, word + (s,)))
        layer = nxt
    return out


def kernel_short_words(
    group: HybridGroup, gens: list[HybridElement], length_bound: int
) -> list[HybridElement]:
    """All distinct products of gens of length <= length_bound whose
    nu-image is trivial; usable as an L0 seed before relator evaluation."""
    return [el for el, _ in _short_kernel_pairs(group, gens, length_bound)]
