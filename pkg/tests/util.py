"""Shared builders for micro domains, semantics and random view generation."""

from __future__ import annotations

import random

from relviews.command_lang import (
    AbstractTable,
    GuardedUpdate,
    PrimCommand,
    Read,
    Const,
    Eq,
    TransformerTable,
)
from relviews.monoid_dcsl import DcslMonoid
from relviews.state_model import APCom, Domains, enumerate_worlds
from relviews.views_core import Semantics


def micro_domains(cloc=None, aloc=None, nthreads=1, apcoms=(), values=(0, 1),
                  modulus=None, cap=200_000) -> Domains:
    cloc = {"l": tuple(values)} if cloc is None else cloc
    aloc = {} if aloc is None else aloc
    return Domains.make(
        values=values,
        modulus=modulus if modulus is not None else len(values),
        nthreads=nthreads,
        cloc=cloc,
        aloc=aloc,
        apcoms=apcoms,
        cap=cap,
    )


def micro_semantics(dom: Domains, abstract=None) -> Semantics:
    """Concrete builtins only; abstract methods default to pure token flips
    (guard-free identity), so every todo token can always fire."""
    methods = {"op": GuardedUpdate()}
    if abstract:
        methods.update(abstract)
    return Semantics(TransformerTable(), AbstractTable(methods), dom.modulus)


def micro_dcsl(cloc=None, aloc=None, nthreads=1, apcoms=(), values=(0, 1),
               abstract=None) -> DcslMonoid:
    dom = micro_domains(cloc, aloc, nthreads, apcoms, values)
    return DcslMonoid(dom, micro_semantics(dom, abstract))


def sample_view(rng: random.Random, worlds, max_size=3):
    k = rng.randint(0, min(max_size, len(worlds)))
    return frozenset(rng.sample(list(worlds), k))


PRIMS_1LOC = (
    PrimCommand("id"),
    PrimCommand("assume", (Eq(Read("l"), Const(0)),)),
    PrimCommand("store", (Read("l"), Const(1))),
    PrimCommand("cas_succ", (Read("l"), Const(0), Const(1))),
    PrimCommand("cas_fail", (Read("l"), Const(0), Const(1))),
)


def strongest_post(monoid, t, alpha, p):
    """All worlds reachable from p's worlds by one alpha step followed by any
    number of linearization steps; None if alpha can fault.  By locality this
    is a valid postcondition for the (frame-quantified) action judgement."""
    from relviews.state_model import FAULT, World
    from relviews.views_core import lp_star

    out = set()
    for w in p:
        for sigma2 in monoid.sem.ctable.apply(alpha, t, w.conc,
                                              monoid.sem.modulus):
            if sigma2 is FAULT:
                return None
            for s2, d2 in lp_star(w.abst, w.toks, monoid.sem):
                out.add(World(sigma2, s2, d2))
    return frozenset(out)


def suite_monoid():
    """The micro DCSL monoid the appendix property suites run on: one
    concrete and one abstract location, one always-fireable token kind."""
    ident = GuardedUpdate()
    return micro_dcsl(cloc={"l": (0, 1)}, aloc={"x": (0,)},
                      apcoms=(APCom("op", 0, 0),), values=(0, 1),
                      abstract={"op": ident})


def run_locality(count, seed=11):
    """Action judgements survive framing; returns the non-vacuous count."""
    from relviews.state_model import enumerate_worlds

    mono = suite_monoid()
    worlds = enumerate_worlds(mono.dom)
    rng = random.Random(seed)
    checked = 0
    for _ in range(count):
        p = sample_view(rng, worlds, 2)
        alpha = rng.choice(PRIMS_1LOC)
        q = strongest_post(mono, 1, alpha, p)
        if q is None:
            continue
        if mono.check_action(1, alpha, p, q) is not True:
            continue
        r = sample_view(rng, worlds, 1)
        assert mono.check_action(
            1, alpha, mono.compose(p, r), mono.compose(q, r)) is True
        checked += 1
    return checked


def run_consequence(count, seed=12):
    from relviews.state_model import enumerate_worlds
    from relviews.views_core import ImplVerdict

    mono = suite_monoid()
    worlds = enumerate_worlds(mono.dom)
    rng = random.Random(seed)
    checked = 0
    for _ in range(count):
        p = sample_view(rng, worlds, 2)
        alpha = rng.choice(PRIMS_1LOC)
        q = strongest_post(mono, 1, alpha, p)
        if q is None or mono.check_action(1, alpha, p, q) is not True:
            continue
        p_strong = frozenset(w for w in p if rng.random() < 0.7)
        q_weak = q | sample_view(rng, worlds, 1)
        assert mono.repart_implies(p_strong, p) is ImplVerdict.HOLDS
        assert mono.repart_implies(q, q_weak) is ImplVerdict.HOLDS
        assert mono.check_action(1, alpha, p_strong, q_weak) is True
        checked += 1
    return checked


def run_distributivity(count, seed=13):
    from relviews.state_model import enumerate_worlds

    mono = suite_monoid()
    worlds = enumerate_worlds(mono.dom)
    rng = random.Random(seed)
    checked = 0
    for _ in range(count):
        alpha = rng.choice(PRIMS_1LOC)
        p1 = sample_view(rng, worlds, 2)
        p2 = sample_view(rng, worlds, 2)
        q1 = strongest_post(mono, 1, alpha, p1)
        q2 = strongest_post(mono, 1, alpha, p2)
        if q1 is None or q2 is None:
            continue
        if (mono.check_action(1, alpha, p1, q1) is not True
                or mono.check_action(1, alpha, p2, q2) is not True):
            continue
        assert mono.check_action(
            1, alpha, mono.disjoin(p1, p2), mono.disjoin(q1, q2)) is True
        checked += 1
    return checked
