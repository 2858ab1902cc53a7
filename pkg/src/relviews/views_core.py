"""The generic relational-view layer.

A view monoid supplies composition, a unit, disjunction, reification and a
frame strategy; this module implements what is common to all monoids: the
linearization-point relation on (abstract state, tokens) pairs, the
frame-quantified action judgement, and the repartitioning implication.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .command_lang import AbstractTable, PrimCommand, TransformerTable
from .state_model import DONE, FAULT, Heap, Token, TokenMap, World


@dataclass(frozen=True)
class Semantics:
    """Bundles the transformer tables and the arithmetic modulus."""

    ctable: TransformerTable
    atable: AbstractTable
    modulus: int


def lp_step(sigma_a: Heap, toks: TokenMap, sem: Semantics) -> frozenset:
    """One linearization step: fire any pending todo token whose abstract
    command can run, flipping it to done."""
    out = set()
    for tid, ap in toks.todos():
        for sigma2 in sem.atable.apply(ap.method, ap.arg, ap.ret, tid,
                                       sigma_a, sem.modulus):
            if sigma2 is FAULT:
                continue  # abstract transformers block rather than fault
            out.add((sigma2, toks.set(tid, Token(DONE, ap))))
    return frozenset(out)


def lp_star(sigma_a: Heap, toks: TokenMap, sem: Semantics) -> frozenset:
    """Reflexive-transitive closure of lp_step; finite because every step
    consumes one todo token."""
    seen = {(sigma_a, toks)}
    frontier = [(sigma_a, toks)]
    while frontier:
        s, d = frontier.pop()
        for nxt in lp_step(s, d, sem):
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return frozenset(seen)


@dataclass
class ActionCounterexample:
    """A witness that an action judgement fails: replaying the primitive from
    the recorded world under the recorded frame reproduces the failure."""

    thread: int
    prim: PrimCommand
    frame: object
    world: World
    sigma2: object  # resulting concrete state, or FAULT
    reason: str

    def __str__(self):
        return (
            f"action judgement fails for t={self.thread} {self.prim!r}: "
            f"{self.reason}; world={self.world!r}, result={self.sigma2!r}, "
            f"frame={self.frame!r}"
        )


class ImplVerdict(Enum):
    HOLDS = "holds"
    FAILS = "fails"
    NOT_ESTABLISHED = "not established"

    def ok(self) -> bool:
        return self is ImplVerdict.HOLDS


class ViewMonoid:
    """Interface a monoid instantiation must supply.

    Subclasses provide extensional views plus a frame-checking strategy that
    decides the (in principle frame-quantified) action judgement and
    repartitioning implication.
    """

    sem: Semantics

    def compose(self, p, q):
        raise NotImplementedError

    @property
    def unit(self):
        raise NotImplementedError

    @property
    def empty(self):
        """The view with empty reification (for unreachable annotations)."""
        raise NotImplementedError

    def disjoin(self, p, q):
        raise NotImplementedError

    def reify(self, p) -> frozenset:
        raise NotImplementedError

    def check_action(self, t: int, alpha: PrimCommand, p, q):
        raise NotImplementedError

    def repart_implies(self, p, q) -> ImplVerdict:
        raise NotImplementedError

    def eval_vassn(self, rho, interp):
        raise NotImplementedError


def check_action_with_frames(monoid: ViewMonoid, t: int, alpha: PrimCommand,
                             p, q, frames: Iterable):
    """The action judgement of the simulation condition, quantified over the
    given frames: every primitive step from a reified pre-world must be
    matched by zero or more linearization steps landing in the framed
    postcondition.  Returns True or the first counterexample under the
    deterministic enumeration order."""
    sem = monoid.sem
    for r in frames:
        pre = sorted(monoid.reify(monoid.compose(p, r)), key=_world_key)
        if not pre:
            continue
        post = monoid.reify(monoid.compose(q, r))
        for world in pre:
            sigma, sigma_a, toks = world
            for sigma2 in sem.ctable.apply(alpha, t, sigma, sem.modulus):
                if sigma2 is FAULT:
                    return ActionCounterexample(
                        t, alpha, r, world, FAULT, "fault reachable")
                if not any(
                    World(sigma2, s2, d2) in post
                    for s2, d2 in lp_star(sigma_a, toks, sem)
                ):
                    return ActionCounterexample(
                        t, alpha, r, world, sigma2,
                        "no linearization choice reaches the postcondition")
    return True


def repart_implies_with_frames(monoid: ViewMonoid, p, q,
                               frames: Iterable) -> ImplVerdict:
    """Frame-preserving inclusion of reifications over the given frames."""
    for r in frames:
        pre = monoid.reify(monoid.compose(p, r))
        if not pre:
            continue
        post = monoid.reify(monoid.compose(q, r))
        if not pre <= post:
            return ImplVerdict.FAILS
    return ImplVerdict.HOLDS


def _world_key(w: World):
    return (w.conc.items(), w.abst.items(), w.toks.items())
