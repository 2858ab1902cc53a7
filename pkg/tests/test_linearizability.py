import json

import pytest

from relviews.errors import FaultReachable, ModelError
from relviews.linearizability import (
    abstract_histories,
    check_linearizable,
    check_obligations,
    concrete_histories,
    history_sort_key,
    render_event,
    render_history,
)
from relviews.model_io import attach_outlines, load_model, parse_model

FIX = "src/relviews/fixtures"


def _atomic():
    return load_model(f"{FIX}/atomic-inc/model.json")


def test_histories_bound_zero_is_epsilon():
    m = _atomic()
    assert concrete_histories(m, 0) == frozenset({()})
    assert abstract_histories(m, 0) == frozenset({()})


def test_single_call_histories_at_depth_one():
    m = _atomic()
    hs = concrete_histories(m, 1)
    # depth one admits exactly the single-call events (deduplicated across
    # the expected-return guesses, which calls do not record)
    calls = {h for h in hs if h}
    assert calls == {((t, "call", "inc", 1),) for t in (1, 2)}


def test_overlapping_calls_history_present():
    m = _atomic()
    hs = concrete_histories(m, 6)
    want = ((1, "call", "inc", 1), (2, "call", "inc", 1),
            (1, "ret", "inc", 1), (2, "ret", "inc", 2))
    assert want in hs


def test_abstract_call_ret_pair():
    m = _atomic()
    hs = abstract_histories(m, 3)
    assert ((1, "call", "inc", 1), (1, "ret", "inc", 1)) in hs
    # a return the spec blocks on never appears
    assert ((1, "call", "inc", 1), (1, "ret", "inc", 3)) not in hs


def test_prefix_closure_and_monotonicity():
    m = _atomic()
    h5 = concrete_histories(m, 5)
    h6 = concrete_histories(m, 6)
    assert h5 <= h6
    for h in h6:
        for cut in range(len(h)):
            assert h[:cut] in h6


def test_per_thread_alternation():
    m = _atomic()
    for h in concrete_histories(m, 6):
        pending = {}
        for t, kind, method, _v in h:
            if kind == "call":
                assert t not in pending
                pending[t] = method
            else:
                assert pending.pop(t) == method


def test_trivial_wrapper_model_ok_at_any_bound():
    m = _atomic()
    for bound in (2, 5, 8):
        assert check_linearizable(m, bound).ok


def test_render_formats():
    assert render_event((1, "call", "inc", 1)) == "t=1 call inc(1)"
    assert render_event((2, "ret", "inc", 2)) == "t=2 ret inc(2)"
    assert render_history(()) == "ε"
    two = ((1, "call", "inc", 1), (1, "ret", "inc", 1))
    assert render_history(two) == "t=1 call inc(1)\nt=1 ret inc(1)"
    assert history_sort_key(()) < history_sort_key(two)


def test_fault_reachable_reported():
    doc = json.load(open(f"{FIX}/atomic-inc/model.json"))
    doc["domains"]["locations"]["ghost"] = [0]
    doc["primitives"]["inc_atomic"]["updates"].append(["ghost", 0])
    # ghost is declared but never initialized: the update faults
    m = parse_model(doc)
    with pytest.raises(FaultReachable):
        concrete_histories(m, 4)


def test_obligation_two_fails_without_token():
    doc = json.load(open(f"{FIX}/atomic-inc/model.json"))
    doc["assertions"]["inc"]["pre"] = ["box", ["macro", "kinv_any"]]
    m = parse_model(doc)
    out = json.load(open(f"{FIX}/atomic-inc/outline.json"))
    attach_outlines(out, m)
    rep = check_obligations(m, instances=[("inc", 1, 1, 1)])
    failed = {it.obligation for it in rep.items if not it.ok}
    assert "(2) todo pinned" in failed


def test_obligation_three_fails_on_asymmetric_families():
    # pin the postcondition cell contents: post worlds no longer differ from
    # the pre worlds by the token alone
    doc = json.load(open(f"{FIX}/dcsl-cell/model.json"))
    doc["assertions"]["put"]["post"] = [
        "star", ["macro", "cell", ["var", "r"]],
        ["done", ["var", "t"], "put", ["var", "a"], ["var", "r"]]]
    m = parse_model(doc)
    out = json.load(open(f"{FIX}/dcsl-cell/outline.json"))
    attach_outlines(out, m)
    rep = check_obligations(m, instances=[("put", 1, 0, 0)])
    failed = {it.obligation for it in rep.items if not it.ok}
    assert "(3) token swap" in failed


def test_dom_mismatch_rejected_at_load():
    doc = json.load(open(f"{FIX}/atomic-inc/model.json"))
    del doc["abstract"]["inc"]
    with pytest.raises(ModelError, match="dom mismatch"):
        parse_model(doc)


def test_counterexample_is_shortest_then_lexicographic():
    m = load_model(f"{FIX}/flat-combiner-nolock/model.json")
    res = check_linearizable(m, 12)
    assert not res.ok
    assert res.counterexample == ((1, "call", "inc", 1),
                                  (1, "ret", "inc", 0))


def test_mutated_final_token_rejected():
    # flipping the postcondition's done token back to todo breaks both the
    # pinned-token obligation and the final reclaim step of the outline
    doc = json.load(open(f"{FIX}/flat-combiner/model.json"))
    doc["assertions"]["inc"]["post"] = [
        "star", ["macro", "global"], ["macro", "M", ["var", "t"]],
        ["todo", ["var", "t"], "inc", ["var", "a"], ["var", "r"]]]
    m = parse_model(doc)
    out = json.load(open(f"{FIX}/flat-combiner/outline.json"))
    attach_outlines(out, m)
    rep = check_obligations(m, instances=[("inc", 1, 1, 0)])
    failed = {it.obligation for it in rep.items if not it.ok}
    assert "(2) done pinned" in failed
    assert "(1) outline" in failed


def _drive_until(cmd, sigma, t, model, stop_prim):
    """Follow the unique transition chain until the named primitive fires."""
    from relviews.command_lang import state_step

    while True:
        steps = state_step(cmd, sigma, t, model.ctable, model.dom.modulus)
        assert len(steps) == 1, "prefix is not deterministic"
        ((alpha, cmd, sigma),) = steps
        if alpha.name == stop_prim:
            return cmd, sigma


def _complete(cmd, sigma, t, model, avoid=()):
    """Some terminal state reachable without firing the avoided primitives,
    or None."""
    from relviews.command_lang import Skip, state_step
    from relviews.state_model import Heap

    seen = set()
    stack = [(cmd, sigma)]
    while stack:
        c, s = stack.pop()
        if isinstance(c, Skip):
            return s
        if (c, s) in seen:
            continue
        seen.add((c, s))
        for alpha, c2, s2 in state_step(c, s, t, model.ctable,
                                        model.dom.modulus):
            if alpha.name in avoid or not isinstance(s2, Heap):
                continue
            stack.append((c2, s2))
    return None


def test_helping_completes_a_spinning_thread():
    m = load_model(f"{FIX}/flat-combiner/model.json")
    sigma0 = m.init_conc
    # thread 2 cannot finish on its own without the lock
    assert _complete(m.body("inc", 1, 0), sigma0, 2, m,
                     avoid=("cas_succ", "cas_fail")) is None
    # thread 2 publishes its task and spins
    t2_cmd, sigma1 = _drive_until(m.body("inc", 1, 0), sigma0, 2, m,
                                  "publish")
    assert sigma1["res[2]"] == 4
    # thread 1 runs to completion as the combiner (it must take the lock and
    # must process thread 2's pending task along the way)
    sigma2 = _complete(m.body("inc", 1, 0), sigma1, 1, m,
                       avoid=("cas_fail",))
    assert sigma2 is not None
    assert sigma2["k"] == 2 and sigma2["res[2]"] == 0 and sigma2["L"] == 0
    # now thread 2 finishes without ever touching the lock: its
    # linearization point happened in thread 1
    done = _complete(t2_cmd, sigma2, 2, m, avoid=("cas_succ", "cas_fail"))
    assert done is not None
