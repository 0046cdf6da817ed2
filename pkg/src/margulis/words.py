"""Reduced words in free products of cyclic groups."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

Orders = Sequence["int | None"]

_SYLLABLE = re.compile(r"^g(\d+)(?:\^(-?\d+))?$")


@dataclass(frozen=True, order=False)
class Word:
    """Syllables ``(generator index, nonzero exponent)``, 0-based indices."""

    syllables: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "syllables", tuple((int(i), int(e)) for i, e in self.syllables))

    def letters(self) -> Iterator[tuple[int, int]]:
        for i, e in self.syllables:
            s = 1 if e > 0 else -1
            for _ in range(abs(e)):
                yield i, s

    def __len__(self) -> int:
        return sum(abs(e) for _, e in self.syllables)

    def __bool__(self) -> bool:
        return bool(self.syllables)

    def inverse(self, orders: Orders | None = None) -> "Word":
        return reduce_word([(i, -e) for i, e in reversed(self.syllables)], orders)

    def __mul__(self, other: "Word") -> "Word":
        return reduce_word(self.syllables + other.syllables)

    def __str__(self) -> str:
        if not self.syllables:
            return "e"
        return ".".join(f"g{i + 1}" if e == 1 else f"g{i + 1}^{e}" for i, e in self.syllables)

    @classmethod
    def parse(cls, text: str) -> "Word":
        text = text.strip()
        if text in ("", "e"):
            return cls()
        out = []
        for part in text.split("."):
            m = _SYLLABLE.match(part.strip())
            if m is None:
                raise ValueError(f"cannot parse syllable {part!r}")
            out.append((int(m.group(1)) - 1, int(m.group(2) or 1)))
        return cls(tuple(out))

    def sort_key(self):
        return (len(self), tuple((i, 0 if e > 0 else 1, abs(e)) for i, e in self.syllables))


def gen(i: int, e: int = 1) -> Word:
    return Word(((i, e),))


def _normalize_exp(e: int, order: int | None) -> int:
    return e % order if order else e


def reduce_word(raw: Iterable[tuple[int, int]], orders: Orders | None = None) -> Word:
    """Free-product normal form: merge neighbours, drop trivial syllables.

    Exponents of finite-order generators land in ``1..m-1``.
    """
    stack: list[list[int]] = []
    for i, e in raw:
        order = orders[i] if orders is not None and i < len(orders) else None
        if stack and stack[-1][0] == i:
            stack[-1][1] = _normalize_exp(stack[-1][1] + e, order)
            if stack[-1][1] == 0:
                stack.pop()
            continue
        e = _normalize_exp(e, order)
        if e != 0:
            stack.append([i, e])
    return Word(tuple((i, e) for i, e in stack))


def enumerate_words(n_gens: int, orders: Orders | None, max_len: int) -> list[Word]:
    """All nonempty reduced words of letter length <= max_len.

    Ordered by letter count, then syllable-wise by generator index, sign
    (positive first) and magnitude.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    orders = list(orders) if orders is not None else [None] * n_gens
    out: list[Word] = []

    def extend(prefix: tuple, last: int, budget: int):
        for i in range(n_gens):
            if i == last:
                continue
            m = orders[i]
            if m:
                exps = range(1, min(m - 1, budget) + 1)
            else:
                exps = [s * k for k in range(1, budget + 1) for s in (1, -1)]
            for e in exps:
                w = prefix + ((i, e),)
                out.append(Word(w))
                if budget - abs(e) > 0:
                    extend(w, i, budget - abs(e))

    extend((), -1, max_len)
    out.sort(key=Word.sort_key)
    return out


def cyclic_reduce(w: Word, orders: Orders | None = None) -> Word:
    """Shortest cyclic conjugate: fold the last syllable into the first while
    they share a generator."""
    syl = list(w.syllables)
    while len(syl) > 1 and syl[0][0] == syl[-1][0]:
        i, e = syl.pop()
        syl = list(reduce_word([(i, e)] + syl, orders).syllables)
    return Word(tuple(syl))
