"""Nondeterministic Buchi automata from LTL formulas.

The construction is the declarative tableau: automaton states are sets of
obligations (subformulas that must hold from the current position), and the
one-step expansion of a state into (literals, next-obligations) branches
follows the operator expansion laws.  Strong-until obligations that are
postponed forever must be rejected, which is handled by generalized
acceptance over the postponement sets, degeneralized into plain Buchi
acceptance with a counter layer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .formula import (And, Atom, FalseF, Formula, Letter, Next, Not, Or,
                      Release, TrueF, Until, WeakUntil, is_nnf, letters)


class StateLimitError(RuntimeError):
    """Construction exceeded the configured state budget."""


@dataclass
class NBA:
    """Buchi automaton over the alphabet 2^AP (explicit letters)."""

    ap: tuple[str, ...]
    states: list[str]
    initial: frozenset[str]
    transitions: dict[tuple[str, Letter], frozenset[str]]
    accepting: frozenset[str]

    @property
    def alphabet(self) -> list[Letter]:
        return letters(list(self.ap))

    def successors(self, state: str, sigma: Letter) -> frozenset[str]:
        return self.transitions.get((state, sigma), frozenset())


@dataclass
class _Branch:
    pos: set[str] = field(default_factory=set)
    neg: set[str] = field(default_factory=set)
    nexts: set[Formula] = field(default_factory=set)
    postponed: set[Formula] = field(default_factory=set)


def _expand(obligations: frozenset[Formula]) -> list[_Branch]:
    """All ways of satisfying a set of obligations at the current position.

    Each branch fixes literals for the current letter plus obligations for
    the next position; ``postponed`` records strong untils whose fulfilment
    was deferred to the future.
    """
    done: list[_Branch] = []
    work: list[tuple[_Branch, list[Formula]]] = [(_Branch(), sorted(obligations, key=str))]
    while work:
        br, todo = work.pop()
        while todo:
            f = todo.pop()
            if isinstance(f, TrueF):
                continue
            if isinstance(f, FalseF):
                br = None
                break
            if isinstance(f, Atom):
                if f.name in br.neg:
                    br = None
                    break
                br.pos.add(f.name)
            elif isinstance(f, Not):
                if f.arg.name in br.pos:  # type: ignore[union-attr]
                    br = None
                    break
                br.neg.add(f.arg.name)  # type: ignore[union-attr]
            elif isinstance(f, And):
                todo.extend([f.left, f.right])
            elif isinstance(f, Next):
                br.nexts.add(f.arg)
            elif isinstance(f, Or):
                alt = _Branch(set(br.pos), set(br.neg), set(br.nexts),
                              set(br.postponed))
                work.append((alt, todo + [f.right]))
                todo.append(f.left)
            elif isinstance(f, Until) or isinstance(f, WeakUntil):
                alt = _Branch(set(br.pos), set(br.neg), set(br.nexts),
                              set(br.postponed))
                alt.nexts.add(f)
                if isinstance(f, Until):
                    alt.postponed.add(f)
                work.append((alt, todo + [f.left]))
                todo.append(f.right)
            elif isinstance(f, Release):
                alt = _Branch(set(br.pos), set(br.neg), set(br.nexts),
                              set(br.postponed))
                alt.nexts.add(f)
                work.append((alt, todo + [f.right]))
                todo.extend([f.left, f.right])
            else:
                raise TypeError(f"not in negation normal form: {f!r}")
        if br is not None:
            done.append(br)
    return done


def _obligation_name(obligations: frozenset[Formula], layer: int) -> str:
    inner = ",".join(sorted(str(g) for g in obligations))
    return "{" + inner + "}" + f"#{layer}"


def formula_to_nba(f: Formula, ap: list[str], state_cap: int = 10**6) -> NBA:
    """Tableau translation; the language of the result is the language of f.

    ``f`` must be in negation normal form (see :func:`to_nnf`).
    """
    if not is_nnf(f):
        raise ValueError("formula must be in negation normal form")
    extra = {g.name for g in _collect(f) if isinstance(g, Atom)} - set(ap)
    if extra:
        raise ValueError(f"formula uses undeclared atoms {sorted(extra)}")
    sigma = letters(ap)
    untils = sorted({g for g in _collect(f) if isinstance(g, Until)}, key=str)
    k = len(untils)

    expand_cache: dict[frozenset[Formula], list[_Branch]] = {}

    def branches(ob: frozenset[Formula]) -> list[_Branch]:
        if ob not in expand_cache:
            expand_cache[ob] = _expand(ob)
        return expand_cache[ob]

    init_ob = frozenset([f])
    initial = (init_ob, 0)
    names: dict[tuple[frozenset[Formula], int], str] = {}
    transitions: dict[tuple[str, Letter], set[str]] = {}
    todo = [initial]
    names[initial] = _obligation_name(*initial)
    while todo:
        state = todo.pop()
        ob, layer = state
        eff = 0 if layer == k else layer
        for br in branches(ob):
            # Counter advances when the until it is waiting on was not
            # postponed by this branch; layer k is the accepting flag.
            if k == 0:
                nxt_layer = 0
            elif untils[eff] in br.postponed:
                nxt_layer = eff
            else:
                nxt_layer = eff + 1
            target = (frozenset(br.nexts), nxt_layer)
            if target not in names:
                if len(names) >= state_cap:
                    raise StateLimitError(
                        f"automaton construction exceeded {state_cap} states")
                names[target] = _obligation_name(*target)
                todo.append(target)
            for let in sigma:
                if br.pos <= let and not (br.neg & let):
                    transitions.setdefault((names[state], let), set()).add(
                        names[target])
    accepting = frozenset(
        name for (ob, layer), name in names.items()
        if (layer == k if k else True))
    return NBA(
        ap=tuple(ap),
        states=sorted(names.values()),
        initial=frozenset([names[initial]]),
        transitions={key: frozenset(v) for key, v in transitions.items()},
        accepting=accepting,
    )


def _collect(f: Formula) -> set[Formula]:
    out = {f}
    if isinstance(f, (Not, Next)):
        out |= _collect(f.arg)
    elif isinstance(f, (And, Or, Until, WeakUntil, Release)):
        out |= _collect(f.left) | _collect(f.right)
    return out


def _strongly_connected_components(nodes: list[str],
                                   succ: dict[str, set[str]]) -> list[list[str]]:
    """Tarjan's algorithm, iterative to be safe on deep graphs."""
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    sccs: list[list[str]] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work: list[tuple[str, list[str]]] = [(root, sorted(succ.get(root, ())))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, children = work[-1]
            advanced = False
            while children:
                child = children.pop()
                if child not in index:
                    index[child] = low[child] = counter
                    counter += 1
                    stack.append(child)
                    on_stack.add(child)
                    work.append((child, sorted(succ.get(child, ()))))
                    advanced = True
                    break
                if child in on_stack:
                    low[node] = min(low[node], index[child])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                sccs.append(comp)
    return sccs


def live_states(a: NBA) -> frozenset[str]:
    """States with a nonempty language.

    A state is live when it can reach a cycle through an accepting state:
    a strongly connected component that contains an accepting state and has
    at least one internal transition.
    """
    succ: dict[str, set[str]] = {s: set() for s in a.states}
    for (src, _), targets in a.transitions.items():
        succ[src].update(targets)
    sccs = _strongly_connected_components(a.states, succ)
    comp_of = {}
    for idx, comp in enumerate(sccs):
        for s in comp:
            comp_of[s] = idx
    good: set[int] = set()
    for idx, comp in enumerate(sccs):
        members = set(comp)
        has_cycle = len(comp) > 1 or any(
            s in succ[s] for s in comp)
        if has_cycle and members & a.accepting:
            good.add(idx)
    # Backward closure: everything that reaches a good component is live.
    pred: dict[str, set[str]] = {s: set() for s in a.states}
    for src, targets in succ.items():
        for t in targets:
            pred[t].add(src)
    live = {s for s in a.states if comp_of[s] in good}
    frontier = list(live)
    while frontier:
        node = frontier.pop()
        for p in pred[node]:
            if p not in live:
                live.add(p)
                frontier.append(p)
    return frozenset(live)


def nba_accepts_lasso(a: NBA, prefix: list[Letter], cycle: list[Letter]) -> bool:
    """Whether the automaton accepts the word prefix . cycle^w.

    Used by tests to compare the tableau against the direct semantics.
    Runs the product of the lasso shape with the automaton and looks for a
    reachable accepting cycle in the periodic part.
    """
    if not cycle:
        raise ValueError("cycle must be nonempty")
    p, c = len(prefix), len(cycle)
    total = p + c

    def letter_at(i: int) -> Letter:
        return prefix[i] if i < p else cycle[(i - p) % c]

    def succ_pos(i: int) -> int:
        return i + 1 if i + 1 < total else p

    nodes: set[tuple[int, str]] = set()
    succ: dict[tuple[int, str], set[tuple[int, str]]] = {}
    frontier = [(0, q) for q in a.initial]
    nodes.update(frontier)
    while frontier:
        node = frontier.pop()
        i, q = node
        nexts = {(succ_pos(i), q2) for q2 in a.successors(q, letter_at(i))}
        succ[node] = nexts
        for n2 in nexts:
            if n2 not in nodes:
                nodes.add(n2)
                frontier.append(n2)
    node_names = {n: f"{n[0]}|{n[1]}" for n in nodes}
    name_succ = {node_names[n]: {node_names[m] for m in succ.get(n, set())}
                 for n in nodes}
    sccs = _strongly_connected_components(sorted(name_succ), name_succ)
    accepting_names = {node_names[(i, q)] for (i, q) in nodes
                       if q in a.accepting}
    for comp in sccs:
        members = set(comp)
        has_cycle = len(comp) > 1 or any(m in name_succ[m] for m in comp)
        if has_cycle and members & accepting_names:
            return True
    return False
