"""String rewriting over finite positive alphabets.

Words are tuples of 0-based letter indices.  Rules rewrite a left word to a
strictly smaller right word under the active ordering (shortlex, or a
wreath-product ordering given by per-letter levels), so reduction always
terminates.  Left sides are matched through a prefix tree rather than by
substring search.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

Word = tuple[int, ...]

EMPTY: Word = ()


class RwsError(Exception):
    pass


class CompletionLimitExceeded(RwsError):
    """Knuth-Bendix gave up; carries the partial system."""

    def __init__(self, message, partial):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class Rule:
    left: Word
    right: Word

    def __post_init__(self):
        if not self.left:
            raise RwsError("rule with empty left side")


class Ordering:
    """Word ordering; must be a reduction ordering on positive words."""

    def key(self, w: Word):
        raise NotImplementedError

    def less(self, a: Word, b: Word) -> bool:
        return self.key(a) < self.key(b)


class ShortLex(Ordering):
    def __init__(self, alphabet_size: int, ranking: list[int] | None = None):
        # ranking[i] = position of letter i; lower rank compares smaller
        self.alphabet_size = alphabet_size
        self.ranking = list(ranking) if ranking else list(range(alphabet_size))

    def key(self, w: Word):
        return (len(w), tuple(self.ranking[c] for c in w))


class WreathProduct(Ordering):
    """Wreath product of shortlex orderings by letter level.

    Words are compared first on the subsequence of their highest-level
    letters (shortlex), then recursively, left to right, on the lower-level
    gap words between them.  A single letter of a higher level therefore
    dominates any number of lower-level letters; this is the ordering under
    which mixed power/conjugation rule sets terminate.
    """

    def __init__(self, levels: list[int], ranking: list[int] | None = None):
        self.levels = list(levels)
        self.ranking = list(ranking) if ranking else list(range(len(levels)))

    def key(self, w: Word):
        return self._key(w, max(self.levels, default=0))

    def _key(self, w: Word, level: int):
        if level < 0:
            return ()
        heads: list[int] = []
        gaps: list[Word] = [()]
        for c in w:
            if self.levels[c] == level:
                heads.append(self.ranking[c])
                gaps.append(())
            else:
                gaps[-1] = gaps[-1] + (c,)
        gap_keys = tuple(self._key(g, level - 1) for g in gaps)
        return ((len(heads), tuple(heads)), gap_keys)


class _Trie:
    """Prefix tree over rule left sides; maps a word position to the rule
    whose left side starts there (shortest match wins)."""

    __slots__ = ("root",)

    def __init__(self, rules: list[Rule]):
        self.root: dict = {}
        for idx, rule in enumerate(rules):
            node = self.root
            for c in rule.left:
                node = node.setdefault(c, {})
            node.setdefault(None, idx)

    def match(self, word, start: int):
        """Return (rule index, match length) for the first left side found at
        `start`, or None."""
        node = self.root
        i = start
        n = len(word)
        while True:
            if None in node:
                return node[None], i - start
            if i >= n:
                return None
            node = node.get(word[i])
            if node is None:
                return None
            i += 1


@dataclass
class RewritingSystem:
    alphabet_size: int
    rules: list[Rule]
    ordering: Ordering
    complete: bool = True
    _trie: _Trie = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for r in self.rules:
            if any(c < 0 or c >= self.alphabet_size for c in r.left + r.right):
                raise RwsError("rule letter out of range")
            if not self.ordering.less(r.right, r.left):
                raise RwsError(f"rule not reducing: {r.left} -> {r.right}")
        self._trie = _Trie(self.rules)

    @property
    def max_left_len(self) -> int:
        return max((len(r.left) for r in self.rules), default=0)


def reduce_word(rws: RewritingSystem, w) -> Word:
    """Leftmost reduction of `w` to an irreducible word."""
    w = list(w)
    if any(c < 0 or c >= rws.alphabet_size for c in w):
        raise RwsError("letter out of range")
    trie = rws._trie
    back = rws.max_left_len
    i = 0
    while i < len(w):
        m = trie.match(w, i)
        if m is None:
            i += 1
            continue
        idx, length = m
        w[i : i + length] = rws.rules[idx].right
        i = max(0, i - back + 1)
    return tuple(w)


def is_irreducible(rws: RewritingSystem, w) -> bool:
    trie = rws._trie
    return all(trie.match(w, i) is None for i in range(len(w)))


def _critical_words(r1: Rule, r2: Rule):
    """Yield (word, reduct1, reduct2) for every overlap of r1's left side
    with r2's left side (r1 applied first / leftmost)."""
    l1, l2 = r1.left, r2.left
    # proper overlap: a suffix of l1 is a prefix of l2
    for k in range(1, min(len(l1), len(l2))):
        if l1[-k:] == l2[:k]:
            word = l1 + l2[k:]
            yield word, r1.right + l2[k:], l1[:-k] + r2.right
    # containment: l2 occurs inside l1
    if len(l2) <= len(l1):
        for i in range(len(l1) - len(l2) + 1):
            if l1[i : i + len(l2)] == l2:
                yield l1, r1.right, l1[:i] + r2.right + l1[i + len(l2):]


def is_confluent(rws: RewritingSystem):
    """Check all critical pairs.  Returns (True, None) or
    (False, witness word with two distinct reduced forms)."""
    for r1 in rws.rules:
        for r2 in rws.rules:
            for word, a, b in _critical_words(r1, r2):
                if reduce_word(rws, a) != reduce_word(rws, b):
                    return False, word
    return True, None


def reduce_system(rws: RewritingSystem) -> RewritingSystem:
    """Turn a confluent system into the equivalent reduced one: no left side
    contains another left side, every right side irreducible."""
    ok, witness = is_confluent(rws)
    if not ok:
        raise RwsError(f"cannot reduce a non-confluent system (witness {witness})")
    rules = list(rws.rules)
    changed = True
    while changed:
        changed = False
        for i, r in enumerate(rules):
            others = RewritingSystem(
                rws.alphabet_size, rules[:i] + rules[i + 1 :], rws.ordering
            )
            if not is_irreducible(others, r.left):
                # left side reachable by the other rules: redundant
                rules.pop(i)
                changed = True
                break
            rr = reduce_word(others, r.right)
            if rr != r.right:
                rules[i] = Rule(r.left, rr)
                changed = True
                break
    return RewritingSystem(rws.alphabet_size, rules, rws.ordering)


@dataclass
class MonoidPresentation:
    alphabet_size: int
    relations: list[tuple[Word, Word]]
    generator_orders: list[int] | None = None


def knuth_bendix(
    pres: MonoidPresentation,
    ordering: Ordering | None = None,
    max_rules: int = 10_000,
    max_length: int = 64,
) -> RewritingSystem:
    """Complete a positive group presentation to a confluent system.

    `generator_orders` must be present: the order rules x^o(x) -> 1 are what
    make a positive alphabet suffice for a group.  On exceeding the limits a
    CompletionLimitExceeded is raised carrying the partial system (flagged
    complete=False).
    """
    if pres.generator_orders is None:
        raise RwsError("group completion needs generator orders")
    if ordering is None:
        ordering = ShortLex(pres.alphabet_size)

    rules: list[Rule] = []
    sys_cache: list[RewritingSystem | None] = [None]

    def current_sys() -> RewritingSystem:
        if sys_cache[0] is None:
            sys_cache[0] = RewritingSystem(
                pres.alphabet_size, rules, ordering, complete=False
            )
        return sys_cache[0]

    def reduce_current(w: Word) -> Word:
        return reduce_word(current_sys(), w)

    def orient(a: Word, b: Word) -> Rule | None:
        a, b = reduce_current(a), reduce_current(b)
        if a == b:
            return None
        ka, kb = ordering.key(a), ordering.key(b)
        if ka == kb:
            # ordering ties broken lexicographically; identical handled above
            return Rule(a, b) if a > b else Rule(b, a)
        return Rule(a, b) if ka > kb else Rule(b, a)

    def add_rule(rule: Rule):
        if len(rule.left) > max_length:
            raise CompletionLimitExceeded("left side exceeds length limit", current_sys())
        rules.append(rule)
        sys_cache[0] = None
        if len(rules) > max_rules:
            raise CompletionLimitExceeded("rule count limit exceeded", current_sys())

    pending: list[tuple[int, int, Word, Word]] = []
    tick = 0

    def push(l: Word, r: Word):
        nonlocal tick
        tick += 1
        heapq.heappush(pending, (len(l) + len(r), tick, l, r))

    for x, o in enumerate(pres.generator_orders):
        push((x,) * o, EMPTY)
    for l, r in pres.relations:
        push(l, r)

    while pending:
        _, _, l, r = heapq.heappop(pending)
        rule = orient(l, r)
        if rule is None:
            continue
        add_rule(rule)
        # re-reduce existing right sides under the grown system
        for i, rr in enumerate(rules):
            red = reduce_current(rr.right)
            if red != rr.right:
                rules[i] = Rule(rr.left, red)
                sys_cache[0] = None
        # queue critical pairs involving the new rule
        for other in list(rules):
            for a, b in ((rule, other), (other, rule)):
                for _, u, v in _critical_words(a, b):
                    ru, rv = reduce_current(u), reduce_current(v)
                    if ru != rv:
                        push(ru, rv)
    # drop rules whose left side became reducible by the rest
    out = reduce_system(
        RewritingSystem(pres.alphabet_size, rules, ordering, complete=False)
    )
    out.complete = True
    return out


def enumerate_normal_forms(rws: RewritingSystem, bound: int = 1_000_000) -> list[Word]:
    """All irreducible words in length-then-ordering order.

    For a confluent group system this enumerates the group.  Raises if more
    than `bound` words are found (system presents an infinite or too-large
    monoid)."""
    letters = sorted(range(rws.alphabet_size), key=lambda c: rws.ordering.key((c,)))
    out: list[Word] = [EMPTY]
    frontier: list[Word] = [EMPTY]
    while frontier:
        nxt = []
        for w in frontier:
            for c in letters:
                cand = w + (c,)
                if is_irreducible(rws, cand):
                    nxt.append(cand)
                    out.append(cand)
                    if len(out) > bound:
                        raise RwsError(f"more than {bound} normal forms")
        frontier = nxt
    return out


# --- text format: one rule per line, "l -> r", tokens x1..xk, "1" = empty ---

def parse_word_text(text: str, alphabet_size: int) -> Word:
    text = text.strip()
    if text == "1":
        return EMPTY
    letters = []
    for tok in text.replace("*", " ").split():
        if not tok.startswith("x"):
            raise RwsError(f"bad letter token {tok!r}")
        i = int(tok[1:])
        if not 1 <= i <= alphabet_size:
            raise RwsError(f"letter {tok!r} out of range")
        letters.append(i - 1)
    return tuple(letters)


def format_word_text(w: Word) -> str:
    if not w:
        return "1"
    return " ".join(f"x{c + 1}" for c in w)


def parse_rules_text(text: str, alphabet_size: int) -> list[tuple[Word, Word]]:
    pairs = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "->" not in line:
            raise RwsError(f"line {lineno}: expected 'l -> r'")
        l, r = line.split("->", 1)
        pairs.append((parse_word_text(l, alphabet_size), parse_word_text(r, alphabet_size)))
    return pairs


def format_rules_text(rws: RewritingSystem) -> str:
    return "\n".join(
        f"{format_word_text(r.left)} -> {format_word_text(r.right)}" for r in rws.rules
    )
