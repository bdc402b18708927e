"""Permutation arithmetic and stabilizer chains.

Points are 1-based in all external interfaces and permutations act on the
right (point ** p), so composition is "apply p first, then q".  Internally a
permutation stores the 0-based image tuple.

Words over a generator list are tuples of signed 1-based indices:
``3`` means the third generator, ``-3`` its inverse.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from math import gcd

Letter = int
GenWord = tuple[Letter, ...]


class PermError(Exception):
    pass


class MembershipError(PermError):
    pass


@dataclass(frozen=True)
class Permutation:
    images: tuple[int, ...]  # 0-based: point i maps to images[i]

    def __post_init__(self):
        if sorted(self.images) != list(range(len(self.images))):
            raise PermError("images do not form a bijection")

    @classmethod
    def identity(cls, degree: int) -> "Permutation":
        return cls(tuple(range(degree)))

    @classmethod
    def from_cycles(cls, cycles, degree: int) -> "Permutation":
        """cycles use 1-based points."""
        images = list(range(degree))
        for cyc in cycles:
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                images[a - 1] = b - 1
        return cls(tuple(images))

    @property
    def degree(self) -> int:
        return len(self.images)

    def __mul__(self, other: "Permutation") -> "Permutation":
        if self.degree != other.degree:
            raise PermError("degree mismatch")
        oi = other.images
        return Permutation(tuple(oi[i] for i in self.images))

    def inv(self) -> "Permutation":
        out = [0] * self.degree
        for i, j in enumerate(self.images):
            out[j] = i
        return Permutation(tuple(out))

    def __pow__(self, k: int) -> "Permutation":
        if k < 0:
            return self.inv() ** (-k)
        result = Permutation.identity(self.degree)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def apply(self, point: int) -> int:
        """Image of a 1-based point."""
        return self.images[point - 1] + 1

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.images))

    def order(self) -> int:
        n = 1
        for cyc in self.cycles():
            n = n * len(cyc) // gcd(n, len(cyc))
        return n

    def cycles(self):
        """Nontrivial cycles on 1-based points."""
        seen = set()
        out = []
        for i in range(self.degree):
            if i in seen or self.images[i] == i:
                continue
            cyc = [i]
            j = self.images[i]
            while j != i:
                seen.add(j)
                cyc.append(j)
                j = self.images[j]
            out.append([p + 1 for p in cyc])
        return out

    def __str__(self) -> str:
        cycs = self.cycles()
        if not cycs:
            return "()"
        return "".join("(" + ",".join(map(str, c)) + ")" for c in cycs)


_CYCLE_RE = re.compile(r"\(([0-9,\s]*)\)")


def parse_permutation(text: str, degree: int) -> Permutation:
    """Parse disjoint-cycle text like "(1,2,3)(4,5)"; "()" is the identity."""
    text = text.strip()
    if not re.fullmatch(r"(\(([0-9]+(\s*,\s*[0-9]+)*)?\)\s*)+", text):
        raise PermError(f"cannot parse permutation {text!r}")
    cycles = []
    for m in _CYCLE_RE.finditer(text):
        body = m.group(1).strip()
        if body:
            pts = [int(t) for t in body.split(",")]
            if any(p < 1 or p > degree for p in pts):
                raise PermError(f"point out of range in {text!r}")
            if len(set(pts)) != len(pts):
                raise PermError(f"repeated point in cycle in {text!r}")
            cycles.append(pts)
    return Permutation.from_cycles(cycles, degree)


def invert_word(word: GenWord) -> GenWord:
    return tuple(-c for c in reversed(word))


def evaluate_word(word: GenWord, gens: list[Permutation], degree: int) -> Permutation:
    p = Permutation.identity(degree)
    for c in word:
        p = p * (gens[c - 1] if c > 0 else gens[-c - 1].inv())
    return p


@dataclass
class _Level:
    base_point: int  # 0-based
    # orbit point -> (transversal rep, word); rep maps base_point to the point
    transversal: dict[int, tuple[Permutation, GenWord]] = field(default_factory=dict)


class StabilizerChain:
    """Base and strong generating set with per-generator words.

    Built deterministically by explicit Schreier-generator processing; every
    strong generator carries a word in the original input generators, so
    `factor_word` can express members in those generators.
    """

    def __init__(self, gens: list[Permutation], degree: int | None = None):
        if gens:
            degree = gens[0].degree
            if any(g.degree != degree for g in gens):
                raise PermError("degree mismatch among generators")
        elif degree is None:
            raise PermError("empty generator list needs an explicit degree")
        self.degree = degree
        self.gens = list(gens)
        self.levels: list[_Level] = []
        # strong generators as (perm, word, level): the generating set of the
        # i-th stabilizer is every strong generator at level >= i
        self._strong: list[tuple[Permutation, GenWord, int]] = []
        for i, g in enumerate(gens):
            if not g.is_identity():
                self._insert(g, (i + 1,))
        self._close()

    # -- construction ------------------------------------------------------

    def _level_gens(self, i: int):
        return [(g, w) for g, w, li in self._strong if li >= i]

    def _rebuild_orbit(self, i: int):
        level = self.levels[i]
        ident = Permutation.identity(self.degree)
        level.transversal = {level.base_point: (ident, ())}
        queue = [level.base_point]
        gens = self._level_gens(i)
        while queue:
            pt = queue.pop(0)
            rep, word = level.transversal[pt]
            for g, gw in gens:
                img = g.images[pt]
                if img not in level.transversal:
                    level.transversal[img] = (rep * g, word + gw)
                    queue.append(img)

    def _insert(self, p: Permutation, word: GenWord) -> int:
        """Sift p; append the residue as a strong generator at the level
        where sifting stopped.  Returns that level (or -1 if p sifts to
        identity)."""
        residue, wordpart = p, word
        for li, level in enumerate(self.levels):
            img = residue.images[level.base_point]
            if img not in level.transversal:
                self._strong.append((residue, wordpart, li))
                self._rebuild_orbit(li)
                return li
            rep, repw = level.transversal[img]
            residue = residue * rep.inv()
            wordpart = wordpart + invert_word(repw)
        if residue.is_identity():
            return -1
        bp = min(i for i in range(self.degree) if residue.images[i] != i)
        self.levels.append(_Level(bp))
        li = len(self.levels) - 1
        self._strong.append((residue, wordpart, li))
        self._rebuild_orbit(li)
        return li

    def _close(self):
        """Fixpoint: every Schreier generator of every level sifts to the
        identity.  Any insertion can enlarge orbits of shallower levels, so
        restart the scan after each change."""
        changed = True
        while changed:
            changed = False
            for i in range(len(self.levels)):
                self._rebuild_orbit(i)
                level = self.levels[i]
                gens = self._level_gens(i)
                for pt in sorted(level.transversal):
                    rep, repw = level.transversal[pt]
                    for g, gw in gens:
                        img = g.images[pt]
                        rep2, rep2w = level.transversal[img]
                        schreier = rep * g * rep2.inv()
                        if schreier.is_identity():
                            continue
                        sw = repw + gw + invert_word(rep2w)
                        if self._insert(schreier, sw) >= 0:
                            changed = True
                    if changed:
                        break
                if changed:
                    break

    # -- queries -----------------------------------------------------------

    def order(self) -> int:
        n = 1
        for level in self.levels:
            n *= len(level.transversal)
        return n

    def base(self) -> list[int]:
        return [level.base_point + 1 for level in self.levels]

    def strong_generators(self) -> list[tuple[Permutation, GenWord]]:
        out = []
        for level in self.levels:
            out.extend(zip(level.gens, level.gen_words))
        return out

    def sift(self, p: Permutation):
        """Return (residue, factorization) with p = rep_k * ... * rep_1 when
        the residue is trivial; factorization lists the rep words outermost
        (deepest level) first."""
        if p.degree != self.degree:
            raise PermError("degree mismatch")
        rep_words = []
        for level in self.levels:
            img = p.images[level.base_point]
            if img not in level.transversal:
                return p, None
            rep, repw = level.transversal[img]
            p = p * rep.inv()
            rep_words.append(repw)
        if not p.is_identity():
            return p, None
        return p, list(reversed(rep_words))

    def contains(self, p: Permutation) -> bool:
        residue, _ = self.sift(p)
        return residue.is_identity()

    def factor_word(self, p: Permutation) -> GenWord:
        """A word in the original generators evaluating to p exactly."""
        residue, parts = self.sift(p)
        if parts is None:
            raise MembershipError(f"{p} is not a member")
        word: GenWord = ()
        for w in parts:
            word = word + w
        return word

    def elements(self):
        """Every group element, deterministically ordered (BFS over the
        generators).  Only sensible at desk scale."""
        ident = Permutation.identity(self.degree)
        seen = {ident.images: ident}
        queue = [ident]
        while queue:
            p = queue.pop(0)
            for g in self.gens:
                q = p * g
                if q.images not in seen:
                    seen[q.images] = q
                    queue.append(q)
        return list(seen.values())


def schreier_sims(gens: list[Permutation], degree: int | None = None) -> StabilizerChain:
    return StabilizerChain(gens, degree)


# -- presentations ---------------------------------------------------------

@dataclass
class Presentation:
    generator_count: int
    relators: list[tuple[int, ...]]  # positive words, 0-based letters


PRESENTATION_LIMIT = 100_000


def presentation_from(chain: StabilizerChain, limit: int = PRESENTATION_LIMIT) -> Presentation:
    """Relators for the chain's group in its original generators.

    Uses spanning-tree relators of the Cayley graph of the regular
    representation: every non-tree edge word(g) + [x] + word(g*x)^-1 is a
    relator, and together with the generator order rules these normally
    generate the kernel of the evaluation map.  Inverse letters are
    eliminated through x^-1 = x^(o(x)-1).
    """
    if chain.order() > limit:
        raise PermError(f"group order {chain.order()} exceeds presentation limit {limit}")
    gens = chain.gens
    k = len(gens)
    orders = [g.order() for g in gens]

    def positive(word: GenWord) -> tuple[int, ...]:
        out = []
        for c in word:
            if c > 0:
                out.append(c - 1)
            else:
                out.extend([-c - 1] * (orders[-c - 1] - 1))
        return tuple(out)

    relators = [tuple([i] * orders[i]) for i in range(k)]
    ident = Permutation.identity(chain.degree)
    words: dict[tuple, GenWord] = {ident.images: ()}
    queue = [ident]
    while queue:
        p = queue.pop(0)
        pw = words[p.images]
        for i, g in enumerate(gens):
            q = p * g
            if q.images not in words:
                words[q.images] = pw + (i + 1,)
                queue.append(q)
            else:
                rel = positive(pw + (i + 1,) + invert_word(words[q.images]))
                if rel:
                    relators.append(rel)
    return Presentation(k, relators)


# -- transversals ----------------------------------------------------------

class RightTransversal:
    """Right coset representatives of U in S with coset identification.

    Representatives are minimal in S's deterministic enumeration order;
    coset_index sifts s * rep^-1 through U's chain.
    """

    def __init__(self, chain_S: StabilizerChain, chain_U: StabilizerChain):
        for g in chain_U.gens:
            if not chain_S.contains(g):
                raise MembershipError("U is not a subgroup of S")
        if chain_U.order() == 0 or chain_S.order() % chain_U.order():
            raise PermError("index is not integral")  # unreachable by Lagrange
        self.chain_U = chain_U
        index = chain_S.order() // chain_U.order()
        reps: list[Permutation] = []
        for p in chain_S.elements():
            if all(not chain_U.contains(p * r.inv()) for r in reps):
                reps.append(p)
                if len(reps) == index:
                    break
        self.representatives = reps

    def coset_index(self, p: Permutation) -> int:
        """1-based index j with U*p = U*rep_j."""
        for j, r in enumerate(self.representatives, 1):
            if self.chain_U.contains(p * r.inv()):
                return j
        raise MembershipError(f"{p} is not in the ambient group")


def right_transversal(chain_S: StabilizerChain, chain_U: StabilizerChain) -> RightTransversal:
    return RightTransversal(chain_S, chain_U)
