"""Direct LTL semantics on ultimately periodic words.

This is the independent test oracle for the monitor pipeline: it never
touches automata.  A lasso word ``prefix . cycle^w`` has finitely many
distinct positions (the prefix positions plus the cycle positions, with
the successor of the last cycle position wrapping to the first), so each
temporal operator can be evaluated by a fixpoint over those positions:
least fixpoints for Until/Finally, greatest for Release/WeakUntil/Globally.
"""

from __future__ import annotations

from .formula import (And, Atom, FalseF, Finally, Formula, Globally, Letter,
                      Next, Not, Or, Release, TrueF, Until, WeakUntil,
                      subformulas)


def _ordered_subformulas(f: Formula) -> list[Formula]:
    seen: dict[Formula, None] = {}
    for g in subformulas(f):
        seen.setdefault(g, None)
    return list(seen)


def _eval_on_cycle(subs: list[Formula], cycle: list[Letter]) -> dict[Formula, list[bool]]:
    """Truth of every subformula at each cycle position of cycle^w."""
    n = len(cycle)
    succ = [(i + 1) % n for i in range(n)]
    sat: dict[Formula, list[bool]] = {}
    for g in subs:  # children first
        if isinstance(g, TrueF):
            sat[g] = [True] * n
        elif isinstance(g, FalseF):
            sat[g] = [False] * n
        elif isinstance(g, Atom):
            sat[g] = [g.name in cycle[i] for i in range(n)]
        elif isinstance(g, Not):
            sat[g] = [not v for v in sat[g.arg]]
        elif isinstance(g, And):
            sat[g] = [a and b for a, b in zip(sat[g.left], sat[g.right])]
        elif isinstance(g, Or):
            sat[g] = [a or b for a, b in zip(sat[g.left], sat[g.right])]
        elif isinstance(g, Next):
            inner = sat[g.arg]
            sat[g] = [inner[succ[i]] for i in range(n)]
        else:
            sat[g] = _fixpoint_on_cycle(g, sat, succ)
    return sat


def _fixpoint_on_cycle(g: Formula, sat: dict[Formula, list[bool]],
                       succ: list[int]) -> list[bool]:
    n = len(succ)
    least = isinstance(g, (Until, Finally))
    cur = [not least] * n
    for _ in range(n + 1):
        nxt = [_local_step(g, sat, cur, succ[i], i) for i in range(n)]
        if nxt == cur:
            break
        cur = nxt
    return cur


def _local_step(g: Formula, sat, self_next: list[bool], j: int, i: int) -> bool:
    # One application of the operator's expansion law at position i, with
    # the operator's own truth at the successor position j taken from
    # self_next.
    if isinstance(g, Until) or isinstance(g, WeakUntil):
        return sat[g.right][i] or (sat[g.left][i] and self_next[j])
    if isinstance(g, Release):
        return sat[g.right][i] and (sat[g.left][i] or self_next[j])
    if isinstance(g, Finally):
        return sat[g.arg][i] or self_next[j]
    if isinstance(g, Globally):
        return sat[g.arg][i] and self_next[j]
    raise TypeError(g)


def _step_back(subs: list[Formula], sigma: Letter,
               nxt: dict[Formula, bool]) -> dict[Formula, bool]:
    """Truth at position 0 of sigma.s given truth at position 0 of s."""
    cur: dict[Formula, bool] = {}
    for g in subs:
        if isinstance(g, TrueF):
            v = True
        elif isinstance(g, FalseF):
            v = False
        elif isinstance(g, Atom):
            v = g.name in sigma
        elif isinstance(g, Not):
            v = not cur[g.arg]
        elif isinstance(g, And):
            v = cur[g.left] and cur[g.right]
        elif isinstance(g, Or):
            v = cur[g.left] or cur[g.right]
        elif isinstance(g, Next):
            v = nxt[g.arg]
        elif isinstance(g, (Until, WeakUntil)):
            v = cur[g.right] or (cur[g.left] and nxt[g])
        elif isinstance(g, Release):
            v = cur[g.right] and (cur[g.left] or nxt[g])
        elif isinstance(g, Finally):
            v = cur[g.arg] or nxt[g]
        elif isinstance(g, Globally):
            v = cur[g.arg] and nxt[g]
        else:
            raise TypeError(g)
        cur[g] = v
    return cur


def lasso_satisfies(f: Formula, prefix: list[Letter], cycle: list[Letter]) -> bool:
    """Whether the infinite word prefix . cycle^w satisfies ``f``."""
    if not cycle:
        raise ValueError("cycle must be nonempty")
    subs = _ordered_subformulas(f)
    on_cycle = _eval_on_cycle(subs, list(cycle))
    cur = {g: on_cycle[g][0] for g in subs}
    for sigma in reversed(list(prefix)):
        cur = _step_back(subs, sigma, cur)
    return cur[f]


class LassoTable:
    """Batch evaluator: truth of ``f`` on p . cycle^w for many prefixes p.

    Prefixes sharing a suffix share work; the per-letter backward step is
    memoized on the (letter, truth-vector) pair, which keeps exhaustive
    enumeration of all prefixes up to a length bound cheap.
    """

    def __init__(self, f: Formula, cycle: list[Letter]):
        if not cycle:
            raise ValueError("cycle must be nonempty")
        self.f = f
        self.subs = _ordered_subformulas(f)
        on_cycle = _eval_on_cycle(self.subs, list(cycle))
        self.empty_prefix = tuple(on_cycle[g][0] for g in self.subs)
        self._root = self.subs.index(f)
        self._memo: dict[tuple[Letter, tuple[bool, ...]], tuple[bool, ...]] = {}

    def extend(self, sigma: Letter, vec: tuple[bool, ...]) -> tuple[bool, ...]:
        """Truth vector for sigma.p given the vector for p."""
        key = (sigma, vec)
        out = self._memo.get(key)
        if out is None:
            nxt = dict(zip(self.subs, vec))
            cur = _step_back(self.subs, sigma, nxt)
            out = tuple(cur[g] for g in self.subs)
            self._memo[key] = out
        return out

    def holds(self, vec: tuple[bool, ...]) -> bool:
        return vec[self._root]

    def all_prefixes(self, alphabet: list[Letter], max_len: int) -> dict[tuple[Letter, ...], bool]:
        """Truth of f on p . cycle^w for every prefix p up to max_len.

        Prefixes are built front-first: the vector of sigma.p derives from
        the vector of p, so enumeration walks a suffix tree.
        """
        out: dict[tuple[Letter, ...], bool] = {(): self.holds(self.empty_prefix)}
        level: list[tuple[tuple[Letter, ...], tuple[bool, ...]]] = [
            ((), self.empty_prefix)
        ]
        for _ in range(max_len):
            nxt_level = []
            for word, vec in level:
                for sigma in alphabet:
                    v2 = self.extend(sigma, vec)
                    w2 = (sigma,) + word
                    out[w2] = self.holds(v2)
                    nxt_level.append((w2, v2))
            level = nxt_level
        return out
