import itertools
import random

import pytest

from relviews.errors import ModelError, UniverseTooLarge
from relviews.monoid_dcsl import (
    EMPTY_VIEW,
    UNIT_DCSL,
    compose_dcsl,
    eval_vassn_dcsl,
    frames_dcsl,
    powerset_frames,
    reify_dcsl,
    token_exclusive,
)
from relviews.state_model import (
    APCom,
    Heap,
    TODO,
    Token,
    TokenMap,
    World,
    enumerate_worlds,
)
from relviews.vassn import (
    APt,
    BoxA,
    CPt,
    EmpA,
    ExistsA,
    OrA,
    PureA,
    StarA,
    TokA,
    WorldsA,
)
from relviews.command_lang import Const, Eq, LVar
from util import micro_dcsl, micro_domains, sample_view

AP = APCom("op", 0, 0)


def w(conc=None, abst=None, toks=None):
    return World(Heap(conc or {}), Heap(abst or {}), TokenMap(toks or {}))


def test_compose_unit():
    p = frozenset({w({"l1": 1}), w({"l2": 0})})
    assert compose_dcsl(p, UNIT_DCSL) == p
    assert compose_dcsl(UNIT_DCSL, p) == p


def test_compose_overlap_drops_to_empty():
    p = frozenset({w({"l1": 1})})
    q = frozenset({w({"l1": 2})})
    assert compose_dcsl(p, q) == EMPTY_VIEW


def test_compose_disjoint_with_token():
    p = frozenset({w({"l1": 1})})
    q = frozenset({w({"l2": 2}, toks={1: Token(TODO, AP)})})
    got = compose_dcsl(p, q)
    assert got == frozenset({w({"l1": 1, "l2": 2},
                               toks={1: Token(TODO, AP)})})


def test_reify_is_identity():
    assert reify_dcsl(UNIT_DCSL) == UNIT_DCSL
    assert reify_dcsl(EMPTY_VIEW) == frozenset()
    p = frozenset({w({"l1": 1})})
    q = frozenset({w({"l2": 0})})
    pq = reify_dcsl(compose_dcsl(p, q))
    pointwise = {c for a in p for b in q
                 for c in [compose_dcsl(frozenset([a]), frozenset([b]))]}
    assert pq <= frozenset().union(*pointwise)


def test_frames_counts():
    dom = micro_domains(cloc={"l": (0,)}, aloc={"m": (0,)}, values=(0,))
    frames = list(frames_dcsl(dom))
    assert frames[0] == UNIT_DCSL
    assert len(frames) == 1 + 4
    empty = micro_domains(cloc={}, aloc={}, values=(0,))
    assert len(list(frames_dcsl(empty))) == 2
    big = micro_domains(cloc={"l": (0, 1)}, aloc={"m": (0, 1)},
                        values=(0, 1))
    with pytest.raises(UniverseTooLarge):
        list(frames_dcsl(big, cap=3))


def test_token_exclusivity_preserved_by_compose():
    p = frozenset({w(toks={1: Token(TODO, AP)})})
    q = frozenset({w(toks={1: Token(TODO, AP)})})
    assert compose_dcsl(p, q) == EMPTY_VIEW
    r = frozenset({w(toks={2: Token(TODO, AP)})})
    assert token_exclusive(compose_dcsl(p, r))


# ---------------------------------------------------------------------------
# Monoid and disjunction laws: exhaustive on a small world subuniverse


def _law_universe():
    dom = micro_domains(cloc={"l": (0,)}, aloc={"m": (0,)}, apcoms=(AP,),
                        values=(0,))
    worlds = enumerate_worlds(dom)[:5]
    views = [frozenset(c) for n in range(3)
             for c in itertools.combinations(worlds, n)]
    return views


def test_monoid_laws_exhaustive_small():
    views = _law_universe()
    for p, q in itertools.product(views, views):
        assert compose_dcsl(p, q) == compose_dcsl(q, p)
    for p in views:
        assert compose_dcsl(p, UNIT_DCSL) == p
    for p, q, r in itertools.product(views[:8], views[:8], views[:8]):
        assert (compose_dcsl(compose_dcsl(p, q), r)
                == compose_dcsl(p, compose_dcsl(q, r)))


def test_disjunction_laws():
    views = _law_universe()
    for p, q in itertools.product(views, views):
        assert reify_dcsl(p | q) == reify_dcsl(p) | reify_dcsl(q)
    for p, q, r in itertools.product(views[:8], views[:8], views[:8]):
        assert (compose_dcsl(p | q, r)
                == compose_dcsl(p, r) | compose_dcsl(q, r))


# ---------------------------------------------------------------------------
# Assertion evaluation


def _dom():
    return micro_domains(cloc={"l": (0, 1)}, aloc={"m": (0, 1)},
                         apcoms=(AP,), values=(0, 1))


def test_eval_emp_and_cells():
    dom = _dom()
    assert eval_vassn_dcsl(EmpA(), {}, dom, 2) == UNIT_DCSL
    got = eval_vassn_dcsl(CPt("l", Const(1)), {}, dom, 2)
    assert got == frozenset({w({"l": 1})})
    got = eval_vassn_dcsl(APt("m", Const(0)), {}, dom, 2)
    assert got == frozenset({w(abst={"m": 0})})


def test_eval_star_or_exists():
    dom = _dom()
    rho = StarA((CPt("l", LVar("V")), APt("m", LVar("V"))))
    both = eval_vassn_dcsl(ExistsA("V", rho), {}, dom, 2)
    assert both == frozenset({w({"l": 0}, {"m": 0}), w({"l": 1}, {"m": 1})})
    either = eval_vassn_dcsl(OrA((CPt("l", Const(0)), CPt("l", Const(1)))),
                             {}, dom, 2)
    assert len(either) == 2


def test_eval_pure_and_token():
    dom = _dom()
    assert eval_vassn_dcsl(PureA(Eq(Const(1), Const(1))), {}, dom, 2) \
        == UNIT_DCSL
    assert eval_vassn_dcsl(PureA(Eq(Const(1), Const(0))), {}, dom, 2) \
        == EMPTY_VIEW
    tok = TokA(TODO, Const(1), "op", Const(0), Const(0))
    assert eval_vassn_dcsl(tok, {}, dom, 2) == frozenset(
        {w(toks={1: Token(TODO, AP)})})


def test_eval_worlds_literal_and_box_rejected():
    dom = _dom()
    lit = WorldsA((w({"l": 0}),))
    assert eval_vassn_dcsl(lit, {}, dom, 2) == frozenset({w({"l": 0})})
    with pytest.raises(ModelError):
        eval_vassn_dcsl(BoxA(EmpA()), {}, dom, 2)


def test_eval_out_of_domain_cell_denotes_nothing():
    dom = _dom()
    assert eval_vassn_dcsl(CPt("l", Const(7)), {}, dom, 8) == EMPTY_VIEW


# ---------------------------------------------------------------------------
# The singleton+unit frame strategy agrees with the powerset (small scale;
# the acceptance suite runs the full sampled comparison)


def test_powerset_frames_enumeration():
    worlds = [w({"l": 0}), w({"l": 1})]
    assert len(list(powerset_frames(worlds))) == 4


def test_frame_reduction_smoke():
    from relviews.views_core import (
        check_action_with_frames,
        repart_implies_with_frames,
    )
    from util import PRIMS_1LOC

    mono = micro_dcsl(cloc={"l": (0, 1)}, aloc={"x": (0, 1)}, values=(0, 1))
    worlds = enumerate_worlds(mono.dom)
    all_frames = tuple(powerset_frames(worlds))
    rng = random.Random(5)
    for _ in range(25):
        p = sample_view(rng, worlds, 2)
        q = sample_view(rng, worlds, 2)
        alpha = rng.choice(PRIMS_1LOC)
        fast = mono.check_action(1, alpha, p, q) is True
        slow = check_action_with_frames(mono, 1, alpha, p, q,
                                        all_frames) is True
        assert fast == slow
        fast_i = mono.repart_implies(p, q).ok()
        slow_i = repart_implies_with_frames(mono, p, q, all_frames).ok()
        assert fast_i == slow_i
