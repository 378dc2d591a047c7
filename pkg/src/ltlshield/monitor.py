"""Three-valued runtime monitors compiled from LTL formulas.

A monitor is a deterministic, total finite-state machine whose state output
reports the verdict of the finite word read so far: TOP when every infinite
extension satisfies the formula (good prefix), BOT when none does (bad
prefix), INC otherwise.  Compilation builds Buchi automata for the formula
and its negation, marks states with nonempty language, determinizes both by
subset construction, takes the product with the verdict output map, and
minimizes the result with Moore's partition refinement.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

from .automata import NBA, StateLimitError, _strongly_connected_components, \
    formula_to_nba, live_states
from .formula import (Formula, Letter, Not, atoms_of, letters, parse_formula,
                      to_nnf)


class Verdict(enum.Enum):
    TOP = "top"
    BOT = "bot"
    INC = "inc"

    def symbol(self) -> str:
        return {"top": "T", "bot": "F", "inc": "?"}[self.value]


class SafetyClass(enum.Enum):
    SAFETY = "Safety"
    NOT_SAFETY = "NotSafety"


@dataclass(frozen=True)
class Monitor:
    """Deterministic total machine with three-valued state outputs."""

    ap: tuple[str, ...]
    states: tuple[str, ...]
    initial: str
    delta: dict[tuple[str, Letter], str]
    output: dict[str, Verdict]

    @property
    def alphabet(self) -> list[Letter]:
        return letters(list(self.ap))

    def step(self, state: str, sigma: Letter) -> str:
        extra = sigma - set(self.ap)
        if extra:
            raise ValueError(f"letter uses undeclared atoms {sorted(extra)}")
        return self.delta[(state, frozenset(sigma))]

    def run(self, word: list[Letter]) -> Verdict:
        state = self.initial
        for sigma in word:
            state = self.step(state, sigma)
        return self.output[state]

    def run_states(self, word: list[Letter]) -> list[str]:
        out = [self.initial]
        for sigma in word:
            out.append(self.step(out[-1], sigma))
        return out

    def verdict_state(self, verdict: Verdict) -> str | None:
        """The unique state with the given trap verdict, if present."""
        found = [q for q in self.states if self.output[q] == verdict]
        if len(found) > 1:
            raise ValueError(f"monitor has {len(found)} states with output "
                             f"{verdict.value}")
        return found[0] if found else None

    @property
    def top_state(self) -> str | None:
        return self.verdict_state(Verdict.TOP)

    @property
    def bot_state(self) -> str | None:
        return self.verdict_state(Verdict.BOT)

    def is_trap(self, state: str) -> bool:
        return all(self.delta[(state, sigma)] == state
                   for sigma in self.alphabet)


def monitor_step(m: Monitor, q: str, sigma: Letter) -> str:
    return m.step(q, sigma)


def run_word(m: Monitor, word: list[Letter]) -> Verdict:
    return m.run(word)


@dataclass(frozen=True)
class _DFA:
    states: tuple[str, ...]
    initial: str
    delta: dict[tuple[str, Letter], str]
    alive: dict[str, bool]


def _determinize(nba: NBA, live: frozenset[str], sigma: list[Letter],
                 state_cap: int) -> _DFA:
    """Subset construction.

    A macrostate is alive when it contains a state with nonempty language,
    i.e. some infinite continuation of the word read so far is accepted.
    Macrostates are named by their sorted member lists so construction is
    deterministic across runs.
    """

    def name(members: frozenset[str]) -> str:
        return "[" + ";".join(sorted(members)) + "]"

    init = frozenset(nba.initial)
    macros: dict[frozenset[str], str] = {init: name(init)}
    delta: dict[tuple[str, Letter], str] = {}
    alive: dict[str, bool] = {}
    todo = [init]
    while todo:
        members = todo.pop()
        alive[name(members)] = bool(members & live)
        for let in sigma:
            succ = frozenset(
                q2 for q in members for q2 in nba.successors(q, let))
            if succ not in macros:
                if len(macros) >= state_cap:
                    raise StateLimitError(
                        f"determinization exceeded {state_cap} states")
                macros[succ] = name(succ)
                todo.append(succ)
            delta[(name(members), let)] = name(succ)
    return _DFA(states=tuple(sorted(macros.values())), initial=name(init),
                delta=delta, alive=alive)


def _product_monitor(pos: _DFA, neg: _DFA, ap: list[str],
                     sigma: list[Letter], state_cap: int) -> Monitor:
    """Pair the formula-side and negation-side DFAs and attach verdicts.

    Output map: both sides alive -> INC; negation side dead -> TOP (no
    extension can violate); formula side dead -> BOT.  Both sides dead is
    impossible for a correct construction and is rejected loudly.
    """
    states: dict[tuple[str, str], str] = {}
    delta: dict[tuple[str, Letter], str] = {}
    output: dict[str, Verdict] = {}

    def name(pair: tuple[str, str]) -> str:
        return pair[0] + "*" + pair[1]

    init = (pos.initial, neg.initial)
    states[init] = name(init)
    todo = [init]
    while todo:
        pair = todo.pop()
        p, n = pair
        if pos.alive[p] and neg.alive[n]:
            verdict = Verdict.INC
        elif pos.alive[p]:
            verdict = Verdict.TOP
        elif neg.alive[n]:
            verdict = Verdict.BOT
        else:
            raise AssertionError(
                "monitor construction reached a state where neither the "
                "formula nor its negation is satisfiable")
        output[name(pair)] = verdict
        for let in sigma:
            succ = (pos.delta[(p, let)], neg.delta[(n, let)])
            if succ not in states:
                if len(states) >= state_cap:
                    raise StateLimitError(
                        f"product exceeded {state_cap} states")
                states[succ] = name(succ)
                todo.append(succ)
            delta[(name(pair), let)] = name(succ)
    return Monitor(ap=tuple(ap), states=tuple(sorted(states.values())),
                   initial=name(init), delta=delta, output=output)


def _reachable(m: Monitor) -> set[str]:
    seen = {m.initial}
    todo = [m.initial]
    while todo:
        q = todo.pop()
        for sigma in m.alphabet:
            q2 = m.delta[(q, sigma)]
            if q2 not in seen:
                seen.add(q2)
                todo.append(q2)
    return seen


def _canonical_rename(m: Monitor) -> Monitor:
    """Stable state ids q0, q1, ... in breadth-first letter order."""
    sigma = m.alphabet
    order: list[str] = [m.initial]
    seen = {m.initial}
    i = 0
    while i < len(order):
        q = order[i]
        i += 1
        for let in sigma:
            q2 = m.delta[(q, let)]
            if q2 not in seen:
                seen.add(q2)
                order.append(q2)
    rename = {q: f"q{idx}" for idx, q in enumerate(order)}
    return Monitor(
        ap=m.ap,
        states=tuple(rename[q] for q in order),
        initial=rename[m.initial],
        delta={(rename[q], let): rename[t] for (q, let), t in m.delta.items()
               if q in rename},
        output={rename[q]: v for q, v in m.output.items() if q in rename},
    )


def minimize_dfa(m: Monitor) -> Monitor:
    """Moore minimization: drop unreachable states, merge output-equivalent
    states by partition refinement, and rename canonically."""
    sigma = m.alphabet
    reachable = _reachable(m)
    blocks: dict[str, int] = {}
    by_verdict: dict[Verdict, int] = {}
    for q in sorted(reachable):
        v = m.output[q]
        if v not in by_verdict:
            by_verdict[v] = len(by_verdict)
        blocks[q] = by_verdict[v]
    while True:
        signatures: dict[tuple, int] = {}
        new_blocks: dict[str, int] = {}
        for q in sorted(reachable):
            sig = (blocks[q],) + tuple(
                blocks[m.delta[(q, let)]] for let in sigma)
            if sig not in signatures:
                signatures[sig] = len(signatures)
            new_blocks[q] = signatures[sig]
        if len(signatures) == len(set(blocks.values())):
            break
        blocks = new_blocks
    rep: dict[int, str] = {}
    for q in sorted(reachable):
        rep.setdefault(blocks[q], q)
    block_name = {b: f"b{b}" for b in rep}
    merged = Monitor(
        ap=m.ap,
        states=tuple(sorted(block_name[b] for b in rep)),
        initial=block_name[blocks[m.initial]],
        delta={(block_name[b], let): block_name[blocks[m.delta[(q, let)]]]
               for b, q in rep.items() for let in sigma},
        output={block_name[b]: m.output[q] for b, q in rep.items()},
    )
    return _canonical_rename(merged)


def build_monitor(f: Formula | str, ap: list[str], *, minimize: bool = True,
                  state_cap: int = 10**6) -> Monitor:
    """Compile a formula into its verdict monitor.

    For every finite word w the monitor's run ends in a state whose output
    is TOP/BOT/INC exactly when w is a good prefix / bad prefix / neither.
    """
    if isinstance(f, str):
        f = parse_formula(f, ap)
    extra = atoms_of(f) - set(ap)
    if extra:
        raise ValueError(f"formula uses undeclared atoms {sorted(extra)}")
    sigma = letters(ap)
    pos_nnf = to_nnf(f)
    neg_nnf = to_nnf(Not(f))
    pos_nba = formula_to_nba(pos_nnf, ap, state_cap)
    neg_nba = formula_to_nba(neg_nnf, ap, state_cap)
    pos_dfa = _determinize(pos_nba, live_states(pos_nba), sigma, state_cap)
    neg_dfa = _determinize(neg_nba, live_states(neg_nba), sigma, state_cap)
    raw = _product_monitor(pos_dfa, neg_dfa, list(ap), sigma, state_cap)
    if minimize:
        return minimize_dfa(raw)
    return _canonical_rename(raw)


def classify_safety(f: Formula | str, ap: list[str],
                    state_cap: int = 10**6) -> SafetyClass:
    """Safety iff every violating infinite word has a bad prefix.

    Decided on the product of the negation automaton with the monitor
    restricted to non-BOT states: a reachable accepting cycle there is an
    infinite violation whose finite prefixes are all extendable, so the
    property is not a safety property.
    """
    if isinstance(f, str):
        f = parse_formula(f, ap)
    m = build_monitor(f, ap, state_cap=state_cap)
    neg = formula_to_nba(to_nnf(Not(f)), list(ap), state_cap)
    bot = m.bot_state
    sigma = letters(list(ap))

    if m.output[m.initial] == Verdict.BOT:
        return SafetyClass.SAFETY

    nodes: set[tuple[str, str]] = set()
    succ: dict[tuple[str, str], set[tuple[str, str]]] = {}
    frontier = [(n0, m.initial) for n0 in sorted(neg.initial)]
    nodes.update(frontier)
    while frontier:
        node = frontier.pop()
        n, q = node
        nexts = set()
        for let in sigma:
            q2 = m.delta[(q, let)]
            if bot is not None and q2 == bot:
                continue
            for n2 in neg.successors(n, let):
                nexts.add((n2, q2))
        succ[node] = nexts
        for n2 in nexts:
            if n2 not in nodes:
                nodes.add(n2)
                frontier.append(n2)
    names = {node: f"{node[0]}&{node[1]}" for node in nodes}
    name_succ = {names[n]: {names[t] for t in succ.get(n, set())}
                 for n in nodes}
    accepting = {names[(n, q)] for (n, q) in nodes if n in neg.accepting}
    for comp in _strongly_connected_components(sorted(name_succ), name_succ):
        members = set(comp)
        has_cycle = len(comp) > 1 or any(s in name_succ[s] for s in comp)
        if has_cycle and members & accepting:
            return SafetyClass.NOT_SAFETY
    return SafetyClass.SAFETY


def letter_to_list(sigma: Letter) -> list[str]:
    return sorted(sigma)


def monitor_to_doc(m: Monitor) -> str:
    """Serialize to the JSON monitor document (lossless round-trip)."""
    doc = {
        "ap": sorted(m.ap),
        "states": [{"id": q, "output": m.output[q].value} for q in m.states],
        "initial": m.initial,
        "transitions": [
            [q, letter_to_list(let), m.delta[(q, let)]]
            for q in m.states for let in m.alphabet
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def monitor_from_doc(text: str) -> Monitor:
    doc = json.loads(text)
    output = {s["id"]: Verdict(s["output"]) for s in doc["states"]}
    delta = {(src, frozenset(let)): dst
             for src, let, dst in doc["transitions"]}
    return Monitor(
        ap=tuple(sorted(doc["ap"])),
        states=tuple(s["id"] for s in doc["states"]),
        initial=doc["initial"],
        delta=delta,
        output=output,
    )


def monitor_to_dot(m: Monitor) -> str:
    """Graph description for visualization.

    One node per state labeled with its output; the TOP trap gets a doubled
    border and the BOT trap a dashed one.
    """
    lines = ["digraph monitor {", "  rankdir=LR;",
             '  __init [shape=point, label=""];']
    for q in m.states:
        v = m.output[q]
        style = ""
        if v == Verdict.TOP:
            style = ", peripheries=2"
        elif v == Verdict.BOT:
            style = ', style="dashed"'
        lines.append(f'  "{q}" [label="{q}\\n{v.symbol()}"{style}];')
    lines.append(f'  __init -> "{m.initial}";')
    grouped: dict[tuple[str, str], list[str]] = {}
    for q in m.states:
        for let in m.alphabet:
            dst = m.delta[(q, let)]
            label = "{" + ",".join(letter_to_list(let)) + "}"
            grouped.setdefault((q, dst), []).append(label)
    for (src, dst), labels in sorted(grouped.items()):
        lines.append(f'  "{src}" -> "{dst}" [label="{" ".join(labels)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
