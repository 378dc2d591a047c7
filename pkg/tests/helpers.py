"""Shared shorthands for tests."""

from __future__ import annotations

from itertools import product

from ltlshield.formula import letters


def lt(*names: str) -> frozenset:
    return frozenset(names)


E = lt()


def words_up_to(ap: list[str], max_len: int) -> list[list[frozenset]]:
    sigma = letters(ap)
    out: list[list[frozenset]] = []
    for n in range(max_len + 1):
        out.extend(list(w) for w in product(sigma, repeat=n))
    return out


def cycles_up_to(ap: list[str], max_len: int) -> list[list[frozenset]]:
    sigma = letters(ap)
    out: list[list[frozenset]] = []
    for n in range(1, max_len + 1):
        out.extend(list(w) for w in product(sigma, repeat=n))
    return out
