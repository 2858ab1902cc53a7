"""Library models, bounded history generation and the soundness obligations.

Concrete histories arise from interleaving method bodies under the
small-step semantics with nondeterministically chosen expected return
values; abstract histories run each method as one atomic command.  A
library is linearizable up to a bound when its concrete history set is
included in the abstract one.  The obligations checklist verifies the
hypotheses under which that inclusion holds at every bound: per-method
proof outlines plus token pinning and the token-swap correspondence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .command_lang import (
    AbstractTable,
    Command,
    Skip,
    TransformerTable,
    state_step,
)
from .errors import (
    FaultReachable,
    ModelError,
    RelviewsError,
    UniverseTooLarge,
)
from .logic import (
    Assertion,
    AssertionEnv,
    OutlineNode,
    ProofOutline,
    check_proof,
)
from .monoid_dcsl import DcslMonoid
from .monoid_rgsep import RgsepMonoid
from .state_model import (
    DONE,
    TODO,
    APCom,
    Domains,
    Heap,
    Token,
    TokenMap,
    World,
    world_in_domains,
)
from .subst import subst_assertion, subst_outline
from .vassn import VAssn
from .views_core import Semantics

Event = Tuple[int, str, str, int]  # (thread, "call"|"ret", method, value)
History = Tuple[Event, ...]

IDLE = None


@dataclass
class LibraryModel:
    """A fully instantiated model: everything downstream checks consume."""

    name: str
    monoid_kind: str  # "dcsl" | "rgsep"
    dom: Domains
    ctable: TransformerTable
    atable: AbstractTable
    init_conc: Heap
    init_abst: Heap
    method_args: Dict[str, Tuple[int, ...]]
    bodies: Dict[Tuple[str, int, int], Command]
    # proof data (optional)
    pre_templates: Dict[str, Assertion] = field(default_factory=dict)
    post_templates: Dict[str, Assertion] = field(default_factory=dict)
    outline_templates: Dict[str, OutlineNode] = field(default_factory=dict)
    actions: Dict[str, Tuple[VAssn, VAssn]] = field(default_factory=dict)
    guarantee_names: Tuple[str, ...] = ()
    rely_extra_names: Tuple[str, ...] = ()
    shared_universe_assn: Optional[VAssn] = None
    macros_raw: Dict[str, dict] = field(default_factory=dict)
    source: Optional[dict] = None  # round-trippable document

    def __post_init__(self):
        self._monoid = None
        self._guars = None
        self._relys = None

    def semantics(self) -> Semantics:
        return Semantics(self.ctable, self.atable, self.dom.modulus)

    def methods(self) -> Tuple[str, ...]:
        return tuple(sorted(self.method_args))

    def body(self, m: str, a: int, r: int) -> Command:
        key = (m, a, r)
        if key not in self.bodies:
            raise ModelError(f"no body for {m}({a})->{r}")
        return self.bodies[key]

    def apcom_space(self) -> Tuple[APCom, ...]:
        out = []
        for m in self.methods():
            for a in self.method_args[m]:
                for r in self.dom.values:
                    out.append(APCom(m, a, r))
        return tuple(out)

    def monoid(self, cap: Optional[int] = None):
        if self._monoid is None:
            sem = self.semantics()
            if self.monoid_kind == "dcsl":
                self._monoid = DcslMonoid(self.dom, sem, cap)
            elif self.monoid_kind == "rgsep":
                universe = None
                if self.shared_universe_assn is not None:
                    probe = RgsepMonoid(self.dom, sem,
                                        shared_universe=(World(
                                            self.init_conc, self.init_abst,
                                            TokenMap()),))
                    universe = frozenset(
                        w for w in probe.fragments(self.shared_universe_assn,
                                                   {})
                        if world_in_domains(w, self.dom))
                    if not universe:
                        raise ModelError("declared shared universe is empty")
                    cap_eff = cap if cap is not None else self.dom.cap
                    if len(universe) > cap_eff:
                        raise UniverseTooLarge(len(universe), cap_eff)
                self._monoid = RgsepMonoid(self.dom, sem,
                                           shared_universe=universe, cap=cap)
            else:
                raise ModelError(f"unknown monoid {self.monoid_kind!r}")
        return self._monoid

    # -- per-thread rely/guarantee materialization (RGSep only)

    def guarantee(self, t: int):
        self._materialize_rg()
        return self._guars[t]

    def rely(self, t: int):
        self._materialize_rg()
        return self._relys[t]

    def _materialize_rg(self):
        if self._guars is not None:
            return
        if self.monoid_kind != "rgsep":
            raise ModelError("rely/guarantee only exist for RGSep models")
        mon = self.monoid()
        denote = {}
        for name, (pre, post) in self.actions.items():
            for t in self.dom.thread_ids():
                from .subst import subst_vassn

                pre_t = subst_vassn(pre, {"t": t})
                post_t = subst_vassn(post, {"t": t})
                denote[(name, t)] = mon.denote_action(pre_t, post_t)
        guars = {}
        for t in self.dom.thread_ids():
            g = frozenset()
            for name in self.guarantee_names:
                g |= denote[(name, t)]
            guars[t] = g
        relys = {}
        for t in self.dom.thread_ids():
            r = frozenset()
            for t2 in self.dom.thread_ids():
                if t2 == t:
                    continue
                r |= guars[t2]
                for name in self.rely_extra_names:
                    r |= denote[(name, t2)]
            relys[t] = r
        self._guars = guars
        self._relys = relys

    def assertion_env(self, t: int) -> AssertionEnv:
        mon = self.monoid()
        if self.monoid_kind == "rgsep":
            return AssertionEnv(mon, rely=self.rely(t), guar=self.guarantee(t))
        return AssertionEnv(mon)

    def pre_assertion(self, m: str, t: int, a: int, r: int) -> Assertion:
        if m not in self.pre_templates:
            raise ModelError(f"method {m!r} declares no precondition family")
        return subst_assertion(self.pre_templates[m], {"t": t, "a": a, "r": r})

    def post_assertion(self, m: str, t: int, a: int, r: int) -> Assertion:
        if m not in self.post_templates:
            raise ModelError(f"method {m!r} declares no postcondition family")
        return subst_assertion(self.post_templates[m], {"t": t, "a": a, "r": r})

    def outline(self, m: str, t: int, a: int, r: int) -> ProofOutline:
        if m not in self.outline_templates:
            raise ModelError(f"method {m!r} has no proof outline")
        body = subst_outline(self.outline_templates[m], {"t": t, "a": a, "r": r})
        return ProofOutline(
            thread=t,
            pre=self.pre_assertion(m, t, a, r),
            body=body,
            post=self.post_assertion(m, t, a, r),
        )


# ---------------------------------------------------------------------------
# History generation


def render_event(ev: Event) -> str:
    t, kind, m, v = ev
    return f"t={t} {kind} {m}({v})"


def render_history(h: History) -> str:
    if not h:
        return "ε"
    return "\n".join(render_event(ev) for ev in h)


def history_sort_key(h: History):
    return (len(h), tuple(render_event(ev) for ev in h))


class _HistoryGen:
    """Memoized recursive generator for the inductive history sets.

    Every recursion level contributes the empty history, so level n yields
    the union of all depths up to n; the sets are prefix-closed and
    monotone in the bound by construction.
    """

    def __init__(self, model: LibraryModel, cap: Optional[int] = None):
        self.model = model
        self.cap = cap if cap is not None else model.dom.cap
        self.memo: Dict = {}
        self.sem = model.semantics()

    def stats(self) -> Dict[str, int]:
        return {"configurations": len(self.memo)}

    def _guard_cap(self):
        if len(self.memo) > self.cap:
            raise UniverseTooLarge(len(self.memo), self.cap)

    def concrete(self, n: int, pool=None, sigma=None) -> frozenset:
        model = self.model
        if pool is None:
            pool = tuple(IDLE for _ in model.dom.thread_ids())
            sigma = model.init_conc
        key = ("c", n, pool, sigma)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        self._guard_cap()
        out = {()}
        if n > 0:
            for idx, slot in enumerate(pool):
                t = idx + 1
                if slot is IDLE:
                    for m in model.methods():
                        for a in model.method_args[m]:
                            for v in model.dom.values:
                                body = model.body(m, a, v)
                                sub = self.concrete(
                                    n - 1,
                                    _set(pool, idx, (m, body, v)),
                                    sigma)
                                ev = (t, "call", m, a)
                                out.update((ev,) + h for h in sub)
                else:
                    m, cmd, v = slot
                    if isinstance(cmd, Skip):
                        sub = self.concrete(n - 1, _set(pool, idx, IDLE),
                                            sigma)
                        ev = (t, "ret", m, v)
                        out.update((ev,) + h for h in sub)
                    else:
                        for alpha, cmd2, sigma2 in state_step(
                                cmd, sigma, t, model.ctable,
                                model.dom.modulus):
                            if isinstance(sigma2, Heap):
                                out.update(self.concrete(
                                    n - 1, _set(pool, idx, (m, cmd2, v)),
                                    sigma2))
                            else:
                                raise FaultReachable(
                                    f"thread {t} faults executing "
                                    f"{alpha!r} in method {m} at state "
                                    f"{sigma!r}")
        result = frozenset(out)
        self.memo[key] = result
        return result

    def abstract(self, n: int, pool=None, sigma=None) -> frozenset:
        model = self.model
        if pool is None:
            pool = tuple(IDLE for _ in model.dom.thread_ids())
            sigma = model.init_abst
        key = ("a", n, pool, sigma)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        self._guard_cap()
        out = {()}
        if n > 0:
            for idx, slot in enumerate(pool):
                t = idx + 1
                if slot is IDLE:
                    for m in model.methods():
                        for a in model.method_args[m]:
                            for v in model.dom.values:
                                sub = self.abstract(
                                    n - 1,
                                    _set(pool, idx, ("pending", m, a, v)),
                                    sigma)
                                ev = (t, "call", m, a)
                                out.update((ev,) + h for h in sub)
                elif slot[0] == "pending":
                    _, m, a, v = slot
                    for sigma2 in model.atable.apply(m, a, v, t, sigma,
                                                     model.dom.modulus):
                        if isinstance(sigma2, Heap):
                            out.update(self.abstract(
                                n - 1, _set(pool, idx, ("done", m, v)),
                                sigma2))
                else:
                    _, m, v = slot
                    sub = self.abstract(n - 1, _set(pool, idx, IDLE), sigma)
                    ev = (t, "ret", m, v)
                    out.update((ev,) + h for h in sub)
        result = frozenset(out)
        self.memo[key] = result
        return result


def _set(pool: tuple, idx: int, value) -> tuple:
    return pool[:idx] + (value,) + pool[idx + 1:]


def concrete_histories(model: LibraryModel, bound: int,
                       cap: Optional[int] = None,
                       sigma: Optional[Heap] = None) -> frozenset:
    gen = _HistoryGen(model, cap)
    if sigma is None:
        return gen.concrete(bound)
    pool = tuple(IDLE for _ in model.dom.thread_ids())
    return gen.concrete(bound, pool, sigma)


def abstract_histories(model: LibraryModel, bound: int,
                       cap: Optional[int] = None,
                       sigma: Optional[Heap] = None) -> frozenset:
    gen = _HistoryGen(model, cap)
    if sigma is None:
        return gen.abstract(bound)
    pool = tuple(IDLE for _ in model.dom.thread_ids())
    return gen.abstract(bound, pool, sigma)


@dataclass
class LinResult:
    ok: bool
    bound: int
    counterexample: Optional[History]
    stats: Dict[str, int]
    still_growing: bool

    def verdict(self) -> str:
        if self.ok:
            return f"no violation up to bound {self.bound}"
        return "counterexample history found"


def check_linearizable(model: LibraryModel, bound: int,
                       cap: Optional[int] = None) -> LinResult:
    """History inclusion up to the bound.  The abstract bound equals the
    concrete one: an abstract run needs at most one step per completed call,
    never more than the concrete run it matches."""
    gen = _HistoryGen(model, cap)
    conc = gen.concrete(bound)
    abst = gen.abstract(bound)
    missing = conc - abst
    prev = gen.concrete(bound - 1) if bound > 0 else frozenset()
    stats = gen.stats()
    stats["concrete_histories"] = len(conc)
    stats["abstract_histories"] = len(abst)
    if missing:
        ce = min(missing, key=history_sort_key)
        return LinResult(False, bound, ce, stats, conc != prev)
    return LinResult(True, bound, None, stats, conc != prev)


# ---------------------------------------------------------------------------
# The soundness obligations


@dataclass
class ObligationItem:
    obligation: str
    subject: str
    ok: bool
    detail: str = ""

    def line(self) -> str:
        mark = "pass" if self.ok else "FAIL"
        detail = f": {self.detail}" if self.detail and not self.ok else ""
        return f"[{mark}] {self.obligation} {self.subject}{detail}"


@dataclass
class ObligationReport:
    items: List[ObligationItem]

    @property
    def ok(self) -> bool:
        return all(it.ok for it in self.items)

    def first_failure(self) -> Optional[ObligationItem]:
        for it in self.items:
            if not it.ok:
                return it
        return None


def _token_worlds(model: LibraryModel, view):
    mon = model.monoid()
    if isinstance(mon, RgsepMonoid):
        return list(mon.reified_token_worlds(view))
    return sorted(mon.reify(view), key=lambda w: repr(w))


def _strip_tokens(model: LibraryModel, view, t: int):
    mon = model.monoid()
    if isinstance(mon, RgsepMonoid):
        return mon.strip_token_set(view, t)
    out = set()
    for w in mon.reify(view):
        out.add(World(w.conc, w.abst, w.toks.remove(t)))
    return frozenset(out)


def all_instances(model: LibraryModel) -> List[Tuple[str, int, int, int]]:
    return [
        (m, t, a, r)
        for m in model.methods()
        for t in model.dom.thread_ids()
        for a in model.method_args[m]
        for r in model.dom.values
    ]


def check_obligations(model: LibraryModel,
                      instances: Optional[List[Tuple[str, int, int, int]]] = None,
                      include_shared: bool = True,
                      ) -> ObligationReport:
    """Verify the linearizability obligations over the declared domains:
    per-method outlines, token pinning in the pre/post families, the
    token-swap correspondence, and coverage of the initial states by the
    composed preconditions.

    `instances` restricts the per-instance checks; `include_shared` controls
    the instance-independent ones, so parallel drivers can split the work
    and reassemble an identical report."""
    items: List[ObligationItem] = []
    methods = model.methods()
    if include_shared:
        missing = [m for m in methods if m not in model.atable.methods]
        items.append(ObligationItem(
            "dom(concrete)=dom(abstract)", "library",
            not missing, f"abstract methods missing: {missing}"))

    todo_insts = instances
    if todo_insts is None:
        todo_insts = all_instances(model)

    for m, t, a, r in todo_insts:
        env = model.assertion_env(t)
        outline = model.outline(m, t, a, r)
        fail = check_proof(outline, env)
        items.append(ObligationItem(
            "(1) outline", f"{m}(a={a},r={r}) in thread {t}",
            fail is None, str(fail) if fail else ""))

        ap = APCom(m, a, r)
        try:
            pre = env.eval(outline.pre, {})
            post = env.eval(outline.post, {})
        except RelviewsError as exc:
            items.append(ObligationItem(
                "(2) todo pinned", f"{m}(a={a},r={r}) in thread {t}",
                False, f"assertion family not evaluable: {exc}"))
            continue
        bad_pre = [w for w in _token_worlds(model, pre)
                   if w.toks.get(t) != Token(TODO, ap)]
        items.append(ObligationItem(
            "(2) todo pinned", f"{m}(a={a},r={r}) in thread {t}",
            not bad_pre,
            f"{len(bad_pre)} precondition worlds lack todo({ap!r})"))
        bad_post = [w for w in _token_worlds(model, post)
                    if w.toks.get(t) != Token(DONE, ap)]
        items.append(ObligationItem(
            "(2) done pinned", f"{m}(a={a},r={r}) in thread {t}",
            not bad_post,
            f"{len(bad_post)} postcondition worlds lack done({ap!r})"))

    if not include_shared:
        return ObligationReport(items)

    # (3): across every pair of command instances, post and pre states agree
    # up to the thread's token.
    insts = [(m, a, r) for m in methods for a in model.method_args[m]
             for r in model.dom.values]
    for t in model.dom.thread_ids():
        env = model.assertion_env(t)
        try:
            stripped = {}
            for m, a, r in insts:
                p = env.eval(model.pre_assertion(m, t, a, r), {})
                q = env.eval(model.post_assertion(m, t, a, r), {})
                stripped[("P", m, a, r)] = _strip_tokens(model, p, t)
                stripped[("Q", m, a, r)] = _strip_tokens(model, q, t)
            base = stripped[("P", *insts[0])]
            ok = all(stripped[("P", *i)] == base for i in insts) and all(
                stripped[("Q", *i)] == base for i in insts)
            detail = "pre/post families differ by more than the thread's token"
        except RelviewsError as exc:
            ok, detail = False, f"assertion family not evaluable: {exc}"
        items.append(ObligationItem("(3) token swap", f"thread {t}", ok,
                                    detail))

    try:
        items.append(_initial_coverage(model, insts))
    except RelviewsError as exc:
        items.append(ObligationItem(
            "initial coverage", "library", False,
            f"assertion family not evaluable: {exc}"))
    return ObligationReport(items)


def _initial_coverage(model: LibraryModel, insts) -> ObligationItem:
    """The composed per-thread preconditions must describe the declared
    initial states for some choice of pending commands; otherwise the
    linearizability conclusion is vacuous (e.g. two threads both claiming
    the same token or cell)."""
    import itertools as it

    mon = model.monoid()
    tids = list(model.dom.thread_ids())
    for combo in it.product(insts, repeat=len(tids)):
        view = None
        for t, (m, a, r) in zip(tids, combo):
            env = model.assertion_env(t)
            p = env.eval(model.pre_assertion(m, t, a, r), {})
            view = p if view is None else mon.compose(view, p)
        toks = TokenMap({t: Token(TODO, APCom(*inst))
                         for t, inst in zip(tids, combo)})
        target = World(model.init_conc, model.init_abst, toks)
        if target in mon.reify(view):
            return ObligationItem("initial coverage", "library", True)
    return ObligationItem(
        "initial coverage", "library", False,
        "no choice of pending commands makes the composed preconditions "
        "cover the initial states (token composition undefined or "
        "assertions too strong)")
