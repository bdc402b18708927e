"""Polycyclic presentations and collection.

A presentation has generators y_1..y_n with relative orders o_i >= 2
(prime in the default builder profile), power relations y_i^o_i = t_i with
t_i a normal word in generators of index > i, and conjugation relations
y_j^y_i = w_ij (j > i) with w_ij a normal word in generators of index > i.
Elements are exponent vectors 0 <= e_i < o_i; collection from the left
turns arbitrary words over y_i^{+-1} into this normal form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd

Vector = tuple[int, ...]
PcWord = tuple[int, ...]  # signed 1-based generator indices


class PcError(Exception):
    pass


def _vector_to_letters(vec: Vector) -> list[int]:
    out = []
    for i, e in enumerate(vec):
        out.extend([i + 1] * e)
    return out


@dataclass(frozen=True)
class PcPresentation:
    relative_orders: tuple[int, ...]
    # power_tails[i] = normal-form vector for y_{i+1}^o, zero below index i+1
    power_tails: tuple[Vector, ...]
    # conjugate_tails[(i, j)] = vector for y_j^y_i, 1-based, j > i; absent
    # entries mean y_j^y_i = y_j (commuting)
    conjugate_tails: dict = field(default_factory=dict, hash=False, compare=False)

    def __post_init__(self):
        n = self.n
        if len(self.power_tails) != n:
            raise PcError("need one power tail per generator")
        for o in self.relative_orders:
            if o < 2:
                raise PcError("relative orders must be >= 2")
        for i, tail in enumerate(self.power_tails):
            self._check_vector(tail)
            if any(tail[k] for k in range(i + 1)):
                raise PcError(f"power tail of y{i + 1} must lie above index {i + 1}")
        for (i, j), tail in self.conjugate_tails.items():
            if not 1 <= i < j <= n:
                raise PcError(f"bad conjugate pair ({i}, {j})")
            self._check_vector(tail)
            if any(tail[k] for k in range(i)):
                raise PcError(f"conjugate tail y{j}^y{i} must lie above index {i}")

    def _check_vector(self, vec: Vector):
        if len(vec) != self.n:
            raise PcError("vector length mismatch")
        for e, o in zip(vec, self.relative_orders):
            if not 0 <= e < o:
                raise PcError(f"exponent {e} out of range")

    @property
    def n(self) -> int:
        return len(self.relative_orders)

    def order(self) -> int:
        out = 1
        for o in self.relative_orders:
            out *= o
        return out

    def identity(self) -> "PcElement":
        return PcElement(self, (0,) * self.n)

    def element(self, exponents) -> "PcElement":
        vec = tuple(exponents)
        self._check_vector(vec)
        return PcElement(self, vec)

    def generator(self, i: int) -> "PcElement":
        """y_i, 1-based."""
        return PcElement(self, tuple(1 if k == i - 1 else 0 for k in range(self.n)))

    def conjugate_tail(self, i: int, j: int) -> Vector:
        tail = self.conjugate_tails.get((i, j))
        if tail is None:
            return tuple(1 if k == j - 1 else 0 for k in range(self.n))
        return tail

    def collect(self, word) -> "PcElement":
        return collect(self, word)


@dataclass(frozen=True)
class PcElement:
    pres: PcPresentation
    exponents: Vector

    def __eq__(self, other):
        return (
            isinstance(other, PcElement)
            and self.pres is other.pres
            and self.exponents == other.exponents
        )

    def __hash__(self):
        return hash(self.exponents)

    def is_identity(self) -> bool:
        return not any(self.exponents)

    def depth(self) -> int:
        """1-based index of the first nonzero exponent; n+1 for the identity."""
        for i, e in enumerate(self.exponents):
            if e:
                return i + 1
        return self.pres.n + 1

    def __mul__(self, other: "PcElement") -> "PcElement":
        if self.pres is not other.pres:
            raise PcError("presentation mismatch")
        return collect(self.pres, _vector_to_letters(other.exponents), start=self.exponents)

    def inv(self) -> "PcElement":
        return collect(self.pres, [-c for c in reversed(_vector_to_letters(self.exponents))])

    def __pow__(self, k: int) -> "PcElement":
        if k < 0:
            return self.inv() ** (-k)
        result = self.pres.identity()
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conjugate_by(self, other: "PcElement") -> "PcElement":
        return other.inv() * self * other

    def order(self) -> int:
        """Computed by descending the pc series: at each depth the image is
        cyclic of order dividing the relative order."""
        n = 1
        cur = self
        while not cur.is_identity():
            d = cur.depth()
            o = cur.pres.relative_orders[d - 1]
            m = o // gcd(o, cur.exponents[d - 1])
            n *= m
            cur = cur ** m
        return n

    def pack(self) -> bytes:
        """Packed encoding: ceil(log2 o_i) bits per exponent."""
        bits = 0
        acc = 0
        for e, o in zip(self.exponents, self.pres.relative_orders):
            width = (o - 1).bit_length()
            acc |= e << bits
            bits += width
        return acc.to_bytes((bits + 7) // 8 or 1, "little")

    def __str__(self) -> str:
        if self.is_identity():
            return "1"
        return " ".join(f"y{i + 1}^{e}" for i, e in enumerate(self.exponents) if e)


def collect(pres: PcPresentation, word, start: Vector | None = None) -> PcElement:
    """From-the-left collection of a word over signed 1-based generators.

    Maintains a collected exponent vector and a stack of pending letters.
    Appending y_j when deeper positions are occupied conjugates the trailing
    segment past y_j; inverse letters expand through y_j^-1 =
    y_j^(o_j - 1) * t_j^-1.
    """
    n = pres.n
    orders = pres.relative_orders
    vec = list(start) if start is not None else [0] * n
    stack = [c for c in reversed(list(word))]
    for c in stack:
        if c == 0 or abs(c) > n:
            raise PcError(f"letter {c} out of range")
    while stack:
        c = stack.pop()
        if c < 0:
            j = -c
            # y_j^-1 = y_j^(o_j-1) * (y_j^o_j)^-1
            tail = pres.power_tails[j - 1]
            inv_tail = [-t for t in reversed(_vector_to_letters(tail))]
            stack.extend(reversed(inv_tail))
            stack.extend([j] * (orders[j - 1] - 1))
            continue
        j = c
        deeper = [(k, vec[k]) for k in range(j, n) if vec[k]]
        if deeper:
            # vec = C * T with T the part below index j: T*y_j = y_j * T^y_j
            pushed: list[int] = []
            for k, e in deeper:
                vec[k] = 0
                tail_letters = _vector_to_letters(pres.conjugate_tail(j, k + 1))
                pushed.extend(tail_letters * e)
            stack.extend(reversed(pushed))
        vec[j - 1] += 1
        if vec[j - 1] == orders[j - 1]:
            vec[j - 1] = 0
            tail = pres.power_tails[j - 1]
            if any(tail):
                stack.extend(reversed(_vector_to_letters(tail)))
    return PcElement(pres, tuple(vec))


# -- induced generating sequences ------------------------------------------

@dataclass
class Igs:
    """Depth-sorted generating sequence for a subgroup of a pc group.

    members have strictly increasing depth; relative_indices[i] is the order
    of member i modulo the deeper members; member_words (when tracked) are
    words over an external generating set, signed 1-based.
    """

    pres: PcPresentation
    members: list[PcElement]
    relative_indices: list[int]
    member_words: list[PcWord] | None = None

    def order(self) -> int:
        out = 1
        for m in self.relative_indices:
            out *= m
        return out

    def contains(self, a: PcElement) -> bool:
        return self.sift(a).is_identity()

    def sift(self, a: PcElement) -> PcElement:
        """Reduce a by the members in depth order; the residue is the
        identity exactly for members of the subgroup."""
        a, _ = self._sift_expr(a)
        return a

    def express(self, a: PcElement):
        """Exponents x_i with a = prod members[i]^x_i (depth order), or None
        if a is not in the subgroup."""
        residue, expr = self._sift_expr(a)
        return expr if residue.is_identity() else None

    def _sift_expr(self, a: PcElement):
        expr = [0] * len(self.members)
        by_depth = {m.depth(): i for i, m in enumerate(self.members)}
        while not a.is_identity():
            d = a.depth()
            i = by_depth.get(d)
            if i is None:
                return a, None
            m = self.members[i]
            o = self.pres.relative_orders[d - 1]
            lead = m.exponents[d - 1]
            g = gcd(lead, o)
            if a.exponents[d - 1] % g:
                return a, None
            x = (a.exponents[d - 1] // g) * pow(lead // g, -1, o // g) % (o // g)
            expr[i] = x
            a = (m ** x).inv() * a
        return a, expr

    def word_for(self, a: PcElement) -> PcWord | None:
        """Word over the external generating set evaluating to a."""
        if self.member_words is None:
            raise PcError("this Igs does not carry member words")
        expr = self.express(a)
        if expr is None:
            return None
        out: list[int] = []
        for w, x in zip(self.member_words, expr):
            out.extend(list(w) * x)
        return tuple(out)


def igs_from(pres: PcPresentation, gens, words: bool = False) -> Igs:
    """Non-commutative Gauss elimination: sift each pending element into a
    depth-indexed table; on insertion enqueue its power dropping the depth
    and its products with the other table entries, until stable."""
    table: dict[int, tuple[PcElement, PcWord]] = {}
    pending: list[tuple[PcElement, PcWord]] = [
        (g, (i + 1,)) for i, g in enumerate(gens)
    ]

    def sift(a: PcElement, w: PcWord):
        """Reduce (a, w) against the table; returns the residue pair."""
        while not a.is_identity():
            d = a.depth()
            entry = table.get(d)
            if entry is None:
                return a, w
            m, mw = entry
            o = pres.relative_orders[d - 1]
            lead, alead = m.exponents[d - 1], a.exponents[d - 1]
            g = gcd(lead, o)
            if alead % g:
                # replace the entry by a combination whose lead is the gcd
                _, u, v = _ext_gcd(lead, alead)
                comb = (m ** (u % o)) * (a ** (v % o))
                combw = mw * (u % o) + w * (v % o)
                del table[d]
                pending.append((m, mw))
                pending.append((a, w))
                a, w = comb, combw
                continue
            x = (alead // g) * pow(lead // g, -1, o // g) % (o // g)
            inv_pow = (m ** x).inv()
            a = inv_pow * a
            if x:
                w = _invert_pc_word(mw * x) + w
        return a, w

    while pending:
        a, w = pending.pop()
        a, w = sift(a, w)
        if a.is_identity():
            continue
        d = a.depth()
        table[d] = (a, w)
        # power dropping below this depth
        o = pres.relative_orders[d - 1]
        x = o // gcd(a.exponents[d - 1], o)
        pending.append((a ** x, w * x))
        # products with the other entries, both sides
        for d2, (b, bw) in list(table.items()):
            if d2 == d:
                continue
            pending.append((a * b, w + bw))
            pending.append((b * a, bw + w))

    depths = sorted(table)
    members = [table[d][0] for d in depths]
    rel = []
    for d, m in zip(depths, members):
        o = pres.relative_orders[d - 1]
        g = gcd(m.exponents[d - 1], o)
        rel.append(o // g)
    return Igs(
        pres,
        members,
        rel,
        member_words=[table[d][1] for d in depths] if words else None,
    )


def _ext_gcd(a: int, b: int):
    """g, u, v with u*a + v*b = g."""
    old_r, r = a, b
    old_u, u = 1, 0
    old_v, v = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_u, u = u, old_u - q * u
        old_v, v = v, old_v - q * v
    return old_r, old_u, old_v


def _invert_pc_word(w: PcWord) -> PcWord:
    return tuple(-c for c in reversed(w))


# -- quotients --------------------------------------------------------------

class PcQuotient:
    """B/N for N given by an Igs, with the canonical epimorphism.

    Requires prime relative orders at the depths N occupies (the default
    builder profile), so each N member has an invertible leading exponent
    and removes exactly one series step.
    """

    def __init__(self, pres: PcPresentation, n_igs: Igs):
        if n_igs.pres is not pres:
            raise PcError("Igs belongs to a different presentation")
        self._check_normal(pres, n_igs)
        depths = [m.depth() for m in n_igs.members]
        for d in depths:
            if _is_composite(pres.relative_orders[d - 1]):
                raise PcError("pc_quotient needs prime relative orders at N's depths")
        self.pres = pres
        self.n_igs = n_igs
        self.kept = [i for i in range(1, pres.n + 1) if i not in set(depths)]
        orders = tuple(pres.relative_orders[d - 1] for d in self.kept)
        # combined IGS covering every depth: N's member where N has one, the
        # plain generator elsewhere; expressing b in it and dropping the N
        # factors (which map to the identity) reads off the coset exponents
        member_at = {m.depth(): m for m in n_igs.members}
        combined = [
            member_at.get(d, pres.generator(d)) for d in range(1, pres.n + 1)
        ]
        full = Igs(pres, combined, [1] * pres.n)

        def project(b: PcElement) -> Vector:
            expr = full.express(b)
            if expr is None:  # cannot happen: every depth is covered
                raise PcError("projection failed")
            return tuple(expr[d - 1] for d in self.kept)

        self._project = project
        power_tails = []
        conj_tails = {}
        for qi, d in enumerate(self.kept):
            y = pres.generator(d)
            power_tails.append(project(y ** pres.relative_orders[d - 1]))
            for qj in range(qi + 1, len(self.kept)):
                d2 = self.kept[qj]
                tail = project(pres.generator(d2).conjugate_by(y))
                if tail != tuple(1 if k == qj else 0 for k in range(len(self.kept))):
                    conj_tails[(qi + 1, qj + 1)] = tail
        self.quotient = PcPresentation(orders, tuple(power_tails), conj_tails)

    @staticmethod
    def _check_normal(pres: PcPresentation, n_igs: Igs):
        for m in n_igs.members:
            for i in range(1, pres.n + 1):
                if not n_igs.contains(m.conjugate_by(pres.generator(i))):
                    raise PcError("subgroup is not normal")

    def map(self, b: PcElement) -> PcElement:
        """The epimorphism B -> B/N on normal forms."""
        return PcElement(self.quotient, self._project(b))

    def lift(self, q: PcElement) -> PcElement:
        """A pre-image of a quotient element."""
        vec = [0] * self.pres.n
        for e, d in zip(q.exponents, self.kept):
            vec[d - 1] = e
        return PcElement(self.pres, tuple(vec))


def _is_composite(o: int) -> bool:
    return any(o % p == 0 for p in range(2, int(o ** 0.5) + 1))


def pc_quotient(pres: PcPresentation, n_igs: Igs) -> PcQuotient:
    return PcQuotient(pres, n_igs)


# -- automorphisms ----------------------------------------------------------

class PcAutomorphism:
    """Automorphism of a pc group, given by the images of the generators.

    Optional caches: per-segment image tables (segments are contiguous
    generator ranges of at most 12 generators) and, for a bottom elementary
    abelian layer, the action as a matrix on exponent vectors.
    """

    MAX_SEGMENT = 12

    def __init__(self, pres: PcPresentation, images: list[PcElement]):
        if len(images) != pres.n:
            raise PcError("need one image per generator")
        for im in images:
            if im.pres is not pres:
                raise PcError("image from a different presentation")
        self.pres = pres
        self.images = list(images)
        self._segments: list[tuple[int, int]] | None = None
        self._segment_cache: list[dict] | None = None
        self._bottom: tuple[int, int, list[Vector]] | None = None

    def __call__(self, a: PcElement) -> PcElement:
        if a.pres is not self.pres:
            raise PcError("element from a different presentation")
        if self._bottom is not None:
            start, p, rows = self._bottom
            if all(e == 0 for e in a.exponents[: start - 1]):
                n = self.pres.n
                out = [0] * n
                for i in range(start - 1, n):
                    e = a.exponents[i]
                    if e:
                        row = rows[i - start + 1]
                        for k in range(n):
                            out[k] += e * row[k]
                return PcElement(self.pres, tuple(v % p for v in out))
        if self._segments is not None:
            return self._apply_segmented(a)
        return self._apply_plain(a)

    def _apply_plain(self, a: PcElement) -> PcElement:
        out = self.pres.identity()
        for i, e in enumerate(a.exponents):
            if e:
                out = out * (self.images[i] ** e)
        return out

    def _apply_segmented(self, a: PcElement) -> PcElement:
        out = self.pres.identity()
        for si, (lo, hi) in enumerate(self._segments):
            seg = a.exponents[lo - 1 : hi]
            if not any(seg):
                continue
            cache = self._segment_cache[si]
            img = cache.get(seg)
            if img is None:
                img = self.pres.identity()
                for i in range(lo - 1, hi):
                    if a.exponents[i]:
                        img = img * (self.images[i] ** a.exponents[i])
                cache[seg] = img
            out = out * img
        return out

    def enable_segment_cache(self, boundaries: list[int] | None = None):
        """Lazily filled per-segment image tables.  `boundaries` lists the
        1-based start of each segment; defaults to ranges of MAX_SEGMENT."""
        n = self.pres.n
        if boundaries is None:
            boundaries = list(range(1, n + 1, self.MAX_SEGMENT))
        segs = []
        for i, lo in enumerate(boundaries):
            hi = boundaries[i + 1] - 1 if i + 1 < len(boundaries) else n
            if hi - lo + 1 > self.MAX_SEGMENT:
                raise PcError("segment longer than MAX_SEGMENT")
            segs.append((lo, hi))
        self._segments = segs
        self._segment_cache = [{} for _ in segs]

    def enable_bottom_matrix(self, start: int):
        """Matrix action on the elementary abelian layer y_start..y_n.

        Requires a common prime order, trivial tails inside the layer, and
        images staying inside the layer."""
        n = self.pres.n
        p = self.pres.relative_orders[start - 1]
        if _is_composite(p):
            raise PcError("bottom layer must have prime order steps")
        for i in range(start - 1, n):
            if self.pres.relative_orders[i] != p or any(self.pres.power_tails[i]):
                raise PcError("bottom layer is not elementary abelian")
            if self.images[i].depth() < start:
                raise PcError("automorphism does not preserve the bottom layer")
        for (i, j), tail in self.pres.conjugate_tails.items():
            if i >= start and tail != tuple(
                1 if k == j - 1 else 0 for k in range(n)
            ):
                raise PcError("bottom layer is not abelian")
        rows = [self.images[i].exponents for i in range(start - 1, n)]
        self._bottom = (start, p, rows)

    def compose(self, other: "PcAutomorphism") -> "PcAutomorphism":
        """Apply self, then other."""
        return PcAutomorphism(self.pres, [other(im) for im in self.images])

    def inverse(self) -> "PcAutomorphism":
        igs = igs_from(self.pres, self.images, words=True)
        if igs.order() != self.pres.order():
            raise PcError("not bijective")
        pre = []
        for i in range(1, self.pres.n + 1):
            word = igs.word_for(self.pres.generator(i))
            if word is None:
                raise PcError("not bijective")
            # a word over the images is, read through the automorphism, the
            # same word over the generators: evaluate it there
            pre.append(collect(self.pres, word))
        return PcAutomorphism(self.pres, pre)

    def is_identity_map(self) -> bool:
        return all(
            im == self.pres.generator(i + 1) for i, im in enumerate(self.images)
        )

    def preserves_relations(self) -> bool:
        """Check the defining relations on the images."""
        pres = self.pres
        for i in range(1, pres.n + 1):
            lhs = self(pres.generator(i)) ** pres.relative_orders[i - 1]
            rhs = self(PcElement(pres, pres.power_tails[i - 1]))
            if lhs != rhs:
                return False
            for j in range(i + 1, pres.n + 1):
                lhs = self(pres.generator(j)).conjugate_by(self(pres.generator(i)))
                rhs = self(PcElement(pres, pres.conjugate_tail(i, j)))
                if lhs != rhs:
                    return False
        return True

    def is_bijective(self) -> bool:
        return igs_from(self.pres, self.images).order() == self.pres.order()


def identity_automorphism(pres: PcPresentation) -> PcAutomorphism:
    return PcAutomorphism(pres, [pres.generator(i) for i in range(1, pres.n + 1)])


# -- text format ------------------------------------------------------------

def parse_pc_text(text: str) -> PcPresentation:
    """Parse the pc text format:

        pc n
        orders o1 .. on
        pow i: y3^1 ...
        conj i j: y3^1 ...

    Omitted pow/conj lines mean trivial tails.
    """
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or not lines[0].startswith("pc "):
        raise PcError("expected header 'pc n'")
    n = int(lines[0].split()[1])
    if len(lines) < 2 or not lines[1].startswith("orders "):
        raise PcError("expected 'orders o1 .. on'")
    orders = tuple(int(t) for t in lines[1].split()[1:])
    if len(orders) != n:
        raise PcError("order count mismatch")

    def parse_tail(body: str) -> Vector:
        vec = [0] * n
        for tok in body.split():
            if "^" not in tok or not tok.startswith("y"):
                raise PcError(f"bad tail token {tok!r}")
            g, e = tok[1:].split("^")
            vec[int(g) - 1] = int(e)
        return tuple(vec)

    power_tails = [tuple([0] * n) for _ in range(n)]
    conj_tails = {}
    for ln in lines[2:]:
        head, _, body = ln.partition(":")
        parts = head.split()
        if parts[0] == "pow" and len(parts) == 2:
            power_tails[int(parts[1]) - 1] = parse_tail(body)
        elif parts[0] == "conj" and len(parts) == 3:
            conj_tails[(int(parts[1]), int(parts[2]))] = parse_tail(body)
        else:
            raise PcError(f"bad pc line {ln!r}")
    return PcPresentation(orders, tuple(power_tails), conj_tails)


def format_pc_text(pres: PcPresentation) -> str:
    def tail_text(vec: Vector) -> str:
        return " ".join(f"y{i + 1}^{e}" for i, e in enumerate(vec) if e)

    lines = [f"pc {pres.n}", "orders " + " ".join(map(str, pres.relative_orders))]
    for i, tail in enumerate(pres.power_tails):
        if any(tail):
            lines.append(f"pow {i + 1}: {tail_text(tail)}")
    for (i, j), tail in sorted(pres.conjugate_tails.items()):
        lines.append(f"conj {i} {j}: {tail_text(tail)}")
    return "\n".join(lines)
