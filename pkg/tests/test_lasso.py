import numpy as np
import pytest

from ltlshield.formula import (And, Atom, Finally, Globally, Not, Until,
                               letters, random_formula)
from ltlshield.lasso import LassoTable, lasso_satisfies

from helpers import E, lt


def test_never_a_holds_on_empty_cycle():
    assert lasso_satisfies(Globally(Not(Atom("a"))), [], [E])


def test_crossing_spec_on_eventual_crossing():
    f = Until(Not(Atom("t")), And(Atom("t"), Atom("f")))
    assert lasso_satisfies(f, [E], [lt("t", "f")])


def test_finally_fails_when_a_never_holds():
    assert not lasso_satisfies(Finally(Atom("a")), [], [E])


def test_cycle_must_be_nonempty():
    with pytest.raises(ValueError):
        lasso_satisfies(Atom("a"), [lt("a")], [])


def test_until_requires_left_to_hold():
    f = Until(Atom("a"), Atom("b"))
    assert lasso_satisfies(f, [lt("a"), lt("a")], [lt("b")])
    assert not lasso_satisfies(f, [lt("a"), E], [lt("b")])


def test_weak_until_differs_from_until_on_forever_words():
    from ltlshield.formula import WeakUntil
    u = Until(Not(Atom("t")), And(Atom("t"), Atom("f")))
    w = WeakUntil(Not(Atom("t")), And(Atom("t"), Atom("f")))
    assert not lasso_satisfies(u, [], [E])
    assert lasso_satisfies(w, [], [E])


def test_table_matches_single_evaluations():
    rng = np.random.default_rng(7)
    ap = ["a", "b"]
    sigma = letters(ap)
    for _ in range(40):
        f = random_formula(rng, ap, int(rng.integers(1, 7)))
        cycle = [sigma[rng.integers(0, 4)]
                 for _ in range(int(rng.integers(1, 4)))]
        table = LassoTable(f, cycle).all_prefixes(sigma, 3)
        for word, got in table.items():
            assert got == lasso_satisfies(f, list(word), cycle)
