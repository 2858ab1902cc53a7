"""The rely/guarantee-with-separation view monoid.

A view is either the inconsistent bottom or a triple of a predicate (pairs
of local and shared world fragments), a rely and a guarantee (relations on
shared fragments).  Predicates must be stable under the rely.  Composition
demands that each side's guarantee is covered by the other's rely and
otherwise merges local parts over a common shared part.

Everything is materialized extensionally over a finite universe of shared
states: by default all world triples over the declared domains, optionally
restricted by a model-declared shared-universe assertion to keep larger
models enumerable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Iterator, Optional, Tuple

from .command_lang import PrimCommand, eval_expr
from .errors import (
    LocalityViolation,
    ModelError,
    StabilityViolation,
    UndefinedLocation,
)
from .state_model import (
    EMPTY_HEAP,
    EMPTY_TOKENS,
    EMPTY_WORLD,
    FAULT,
    APCom,
    Domains,
    Heap,
    Token,
    TokenMap,
    World,
    compose_states,
    compose_tokens,
    compose_worlds,
    enumerate_worlds,
    world_leq,
    world_minus,
    world_sort_key,
)
from .vassn import (
    APt,
    BoxA,
    CPt,
    EmpA,
    ExistsA,
    OrA,
    PureA,
    StarA,
    TokA,
    TrueA,
    VAssn,
    WorldsA,
    free_lvars,
)
from .views_core import (
    ActionCounterexample,
    ImplVerdict,
    Semantics,
    ViewMonoid,
    check_action_with_frames,
    lp_star,
)

Pair = Tuple[World, World]  # (local, shared)
Rel = FrozenSet[Tuple[World, World]]


@dataclass(frozen=True)
class RgsepView:
    """Bot, or (pred, rely, guar).  rely=None encodes the full relation."""

    pred: FrozenSet[Pair]
    rely: Optional[Rel]
    guar: Rel
    bot: bool = False

    def __repr__(self):
        if self.bot:
            return "BOT"
        rely = "full" if self.rely is None else f"{len(self.rely)} pairs"
        return (
            f"RgsepView(|pred|={len(self.pred)}, rely={rely}, "
            f"|guar|={len(self.guar)})"
        )


BOT = RgsepView(frozenset(), frozenset(), frozenset(), bot=True)


def _rely_contains(rely: Optional[Rel], pairs: Rel) -> bool:
    return rely is None or pairs <= rely


def _rely_meet(r1: Optional[Rel], r2: Optional[Rel]) -> Optional[Rel]:
    if r1 is None:
        return r2
    if r2 is None:
        return r1
    return r1 & r2


def compose_rgsep(v1: RgsepView, v2: RgsepView) -> RgsepView:
    """Bot if either side is bot or a guarantee escapes the other's rely;
    otherwise local parts merge over the common shared part."""
    if v1.bot or v2.bot:
        return BOT
    if not _rely_contains(v2.rely, v1.guar) or not _rely_contains(v1.rely, v2.guar):
        return BOT
    by_shared: Dict[World, list] = {}
    for l, s in v2.pred:
        by_shared.setdefault(s, []).append(l)
    pred = set()
    for l1, s in v1.pred:
        for l2 in by_shared.get(s, ()):
            l = compose_worlds(l1, l2)
            if l is not None:
                pred.add((l, s))
    return RgsepView(frozenset(pred), _rely_meet(v1.rely, v2.rely),
                     v1.guar | v2.guar)


def reify_rgsep(v: RgsepView) -> frozenset:
    if v.bot:
        return frozenset()
    out = set()
    for l, s in v.pred:
        w = compose_worlds(l, s)
        if w is not None:
            out.add(w)
    return frozenset(out)


def stable(pred: FrozenSet[Pair], rely: Optional[Rel],
           universe: Iterable[World]) -> Optional[Tuple[World, World, World]]:
    """None when stable; otherwise a witness (local, shared, shared')."""
    locals_by_shared: Dict[World, set] = {}
    for l, s in pred:
        locals_by_shared.setdefault(s, set()).add(l)
    if rely is None:
        shareds = list(universe)
        for s, ls in locals_by_shared.items():
            for s2 in shareds:
                for l in ls:
                    if l not in locals_by_shared.get(s2, ()):
                        return (l, s, s2)
        return None
    succ: Dict[World, set] = {}
    for s, s2 in rely:
        succ.setdefault(s, set()).add(s2)
    for s, ls in locals_by_shared.items():
        for s2 in succ.get(s, ()):
            covered = locals_by_shared.get(s2, ())
            for l in ls:
                if l not in covered:
                    return (l, s, s2)
    return None


def stabilize(pred: FrozenSet[Pair], rely: Optional[Rel],
              universe: Iterable[World]) -> FrozenSet[Pair]:
    """Rely-closure of a predicate; a diagnostic aid, never applied
    silently."""
    if rely is None:
        shareds = tuple(universe)
        return frozenset((l, s2) for (l, _s) in pred for s2 in shareds)
    succ: Dict[World, set] = {}
    for s, s2 in rely:
        succ.setdefault(s, set()).add(s2)
    out = set(pred)
    frontier = list(pred)
    while frontier:
        l, s = frontier.pop()
        for s2 in succ.get(s, ()):
            if (l, s2) not in out:
                out.add((l, s2))
                frontier.append((l, s2))
    return frozenset(out)


# ---------------------------------------------------------------------------
# Satisfaction


class RgsepMonoid(ViewMonoid):
    def __init__(self, dom: Domains, sem: Semantics,
                 shared_universe: Optional[Iterable[World]] = None,
                 cap: Optional[int] = None):
        self.dom = dom
        self.sem = sem
        if shared_universe is None:
            shared_universe = enumerate_worlds(dom, cap)
        self.universe = tuple(sorted(set(shared_universe), key=world_sort_key))
        self._universe_set = frozenset(self.universe)
        self._frag_cache: Dict = {}
        self._local_ok: set = set()
        self._unit = None
        self._cloc = dict(dom.cloc)
        self._aloc = dict(dom.aloc)
        self._apcoms = frozenset(dom.apcoms)

    # -- monoid operations

    def compose(self, p, q):
        return compose_rgsep(p, q)

    @property
    def unit(self) -> RgsepView:
        if self._unit is None:
            pred = frozenset((EMPTY_WORLD, s) for s in self.universe)
            self._unit = RgsepView(pred, None, frozenset())
        return self._unit

    @property
    def empty(self) -> RgsepView:
        return BOT

    def disjoin(self, p: RgsepView, q: RgsepView) -> RgsepView:
        if p.bot:
            return q
        if q.bot:
            return p
        if p.rely != q.rely or p.guar != q.guar:
            raise ModelError(
                "disjunction of RGSep views requires equal rely and guarantee")
        return RgsepView(p.pred | q.pred, p.rely, p.guar)

    def reify(self, p):
        return reify_rgsep(p)

    # -- assertion satisfaction

    def fragments(self, rho: VAssn, interp: Dict[str, int]) -> frozenset:
        """All world fragments exactly satisfying a box-free assertion."""
        key = (rho, tuple(sorted(interp.items())))
        hit = self._frag_cache.get(key)
        if hit is not None:
            return hit
        out = self._fragments(rho, interp)
        self._frag_cache[key] = out
        return out

    def _fragments(self, rho: VAssn, interp) -> frozenset:
        if isinstance(rho, EmpA):
            return frozenset({EMPTY_WORLD})
        if isinstance(rho, WorldsA):
            return frozenset(rho.worlds)
        if isinstance(rho, CPt):
            v = self._value(rho.value, interp)
            loc = _loc(rho.loc, interp)
            if v not in self._cloc.get(loc, ()):
                return frozenset()  # outside the declared domains
            return frozenset({World(Heap({loc: v}), EMPTY_HEAP,
                                    EMPTY_TOKENS)})
        if isinstance(rho, APt):
            v = self._value(rho.value, interp)
            loc = _loc(rho.loc, interp)
            if v not in self._aloc.get(loc, ()):
                return frozenset()
            return frozenset({World(EMPTY_HEAP, Heap({loc: v}),
                                    EMPTY_TOKENS)})
        if isinstance(rho, TokA):
            tid = self._value(rho.tid, interp)
            a = self._value(rho.arg, interp)
            r = self._value(rho.ret, interp)
            if tid not in self.dom.thread_ids():
                return frozenset()
            ap = APCom(rho.method, a, r)
            if ap not in self._apcoms:
                return frozenset()
            tok = Token(rho.kind, ap)
            return frozenset({World(EMPTY_HEAP, EMPTY_HEAP,
                                    TokenMap({tid: tok}))})
        if isinstance(rho, PureA):
            if self._value(rho.cond, interp) != 0:
                return frozenset({EMPTY_WORLD})
            return frozenset()
        if isinstance(rho, StarA):
            cur = frozenset({EMPTY_WORLD})
            for part in rho.parts:
                nxt = set()
                for f1 in cur:
                    for f2 in self.fragments(part, interp):
                        f = compose_worlds(f1, f2)
                        if f is not None:
                            nxt.add(f)
                cur = frozenset(nxt)
                if not cur:
                    return cur
            return cur
        if isinstance(rho, OrA):
            out = set()
            for part in rho.parts:
                out |= self.fragments(part, interp)
            return frozenset(out)
        if isinstance(rho, ExistsA):
            out = set()
            for n in self.dom.values:
                out |= self.fragments(rho.body, {**interp, rho.var: n})
            return frozenset(out)
        if isinstance(rho, (BoxA, TrueA)):
            raise ModelError(
                "boxed/true assertions cannot appear in fragment position")
        raise ModelError(f"unknown assertion node {rho!r}")

    def _value(self, e, interp) -> int:
        try:
            return eval_expr(e, EMPTY_HEAP, interp, 0, self.sem.modulus)
        except UndefinedLocation as exc:
            raise ModelError(
                f"assertion value expressions may not read the heap "
                f"(location {exc.loc!r})")

    def box_holds(self, body: VAssn, s: World, interp) -> bool:
        """Does the shared state satisfy the box interior? `true` conjuncts
        absorb an arbitrary remainder; without one the match is exact."""
        if isinstance(body, OrA):
            return any(self.box_holds(p, s, interp) for p in body.parts)
        if isinstance(body, ExistsA):
            return any(
                self.box_holds(body.body, s, {**interp, body.var: n})
                for n in self.dom.values
            )
        parts = body.parts if isinstance(body, StarA) else (body,)
        rest = []
        has_true = False
        for p in parts:
            if isinstance(p, TrueA):
                has_true = True
            else:
                rest.append(p)
        core = StarA(tuple(rest)) if len(rest) != 1 else rest[0]
        frags = (self.fragments(core, interp) if rest
                 else frozenset({EMPTY_WORLD}))
        if has_true:
            return any(world_leq(f, s) for f in frags)
        return s in frags

    def local_sets(self, rho: VAssn, s: World, interp) -> frozenset:
        """All local fragments l with (l, s) satisfying the assertion."""
        if isinstance(rho, BoxA):
            if self.box_holds(rho.body, s, interp):
                return frozenset({EMPTY_WORLD})
            return frozenset()
        if isinstance(rho, StarA):
            cur = frozenset({EMPTY_WORLD})
            for part in rho.parts:
                nxt = set()
                for l1 in cur:
                    for l2 in self.local_sets(part, s, interp):
                        l = compose_worlds(l1, l2)
                        if l is not None:
                            nxt.add(l)
                cur = frozenset(nxt)
                if not cur:
                    return cur
            return cur
        if isinstance(rho, OrA):
            out = set()
            for part in rho.parts:
                out |= self.local_sets(part, s, interp)
            return frozenset(out)
        if isinstance(rho, ExistsA):
            out = set()
            for n in self.dom.values:
                out |= self.local_sets(rho.body, s, {**interp, rho.var: n})
            return frozenset(out)
        if isinstance(rho, TrueA):
            raise ModelError("`true` is only supported inside boxes")
        return self.fragments(rho, interp)

    def satisfies(self, local: World, shared: World, interp,
                  rho: VAssn) -> bool:
        """Does the (local, shared) pair satisfy the assertion?"""
        return local in self.local_sets(rho, shared, interp)

    def eval_vassn_rg(self, rho: VAssn, rely: Optional[Rel], guar: Rel,
                      interp: Dict[str, int]) -> RgsepView:
        """Materialize an assertion as a view; rejects unstable predicates
        rather than silently stabilizing them."""
        pred = set()
        for s in self.universe:
            for l in self.local_sets(rho, s, interp):
                pred.add((l, s))
        pred = frozenset(pred)
        witness = stable(pred, rely, self.universe)
        if witness is not None:
            raise StabilityViolation(*witness)
        return RgsepView(pred, rely, guar)

    def eval_vassn(self, rho, interp):
        raise ModelError(
            "RGSep assertions need a rely and a guarantee; "
            "use eval_vassn_rg")

    # -- action denotations

    def denote_action(self, pre: VAssn, post: VAssn) -> Rel:
        """All shared-state transitions rewriting a pre fragment into a post
        fragment while preserving the remainder, restricted to the shared
        universe."""
        names = sorted(free_lvars(pre) | free_lvars(post))
        domain = sorted(set(self.dom.values) | set(self.dom.thread_ids()))
        pairs = set()
        for combo in itertools.product(domain, repeat=len(names)):
            interp = dict(zip(names, combo))
            pre_frags = self.fragments(pre, interp)
            if not pre_frags:
                continue
            post_frags = self.fragments(post, interp)
            if not post_frags:
                continue
            for s in self.universe:
                for f in pre_frags:
                    if not world_leq(f, s):
                        continue
                    rem = world_minus(s, f)
                    for f2 in post_frags:
                        s2 = compose_worlds(f2, rem)
                        if s2 is not None and s2 in self._universe_set:
                            pairs.add((s, s2))
        return frozenset(pairs)

    # -- the frame-free action check (sufficient condition)

    def check_locality(self, alpha: PrimCommand, t: int) -> None:
        """Transformer locality, checked exhaustively over the primitive's
        footprint locations extended by one fresh location (with value
        domains as declared); cached per primitive."""
        from .command_lang import resolve_loc

        key = (alpha, t)
        if key in self._local_ok:
            return
        footprint = set()
        for e in alpha.args:
            footprint |= _prim_locs(e)
        spec = self.sem.ctable.custom.get(alpha.name)
        if spec is not None:
            if spec.guard is not None:
                footprint |= _prim_locs(spec.guard)
            for loc, e in spec.updates:
                footprint.add(loc)
                footprint |= _prim_locs(e)
        footprint = {resolve_loc(loc, t) for loc in footprint}
        cloc = dict(self.dom.cloc)
        locdoms = [(loc, cloc.get(loc, self.dom.values[:2]))
                   for loc in sorted(footprint)]
        extra = next((l for l in sorted(cloc) if l not in footprint), None)
        frame_doms = [(extra, cloc[extra])] if extra is not None else []
        for sigma in _heaps_over(locdoms):
            res = self.sem.ctable.apply(alpha, t, sigma, self.sem.modulus)
            if FAULT in res:
                continue
            for frame in _heaps_over(frame_doms):
                if not frame.items():
                    continue
                combined = compose_states(sigma, frame)
                if combined is None:
                    continue
                got = set(self.sem.ctable.apply(alpha, t, combined,
                                                self.sem.modulus))
                want = set()
                for s2 in res:
                    joined = compose_states(s2, frame)
                    if joined is None:
                        raise LocalityViolation(alpha.name, sigma, frame)
                    want.add(joined)
                if got != want:
                    raise LocalityViolation(alpha.name, sigma, frame)
        self._local_ok.add(key)

    def check_action(self, t: int, alpha: PrimCommand, p: RgsepView,
                     q: RgsepView):
        """Sufficient frame-free condition for the action judgement: every
        primitive step from a predicate pair resplits into a post pair whose
        shared change is in the guarantee (or is no change at all) and whose
        abstract side is reachable by linearization steps."""
        if p.bot:
            return True
        if q.bot:
            for l, s in sorted(p.pred, key=_pair_key):
                joined = _join(l, s)
                if joined is not None:
                    return ActionCounterexample(
                        t, alpha, None, World(*joined), None,
                        "postcondition is inconsistent (bottom view)")
            return True
        if p.rely != q.rely or p.guar != q.guar:
            raise ModelError(
                "action checks require pre and post views sharing rely and "
                "guarantee")
        self.check_locality(alpha, t)
        sem = self.sem
        post_by_conc: Dict[Heap, list] = {}
        if not q.bot:
            for l2, s2 in sorted(q.pred, key=_pair_key):
                joined = _join(l2, s2)
                if joined is None:
                    continue
                sigma2, abs2, toks2 = joined
                post_by_conc.setdefault(sigma2, []).append(
                    (s2, abs2, toks2))
        guar = p.guar
        for l, s in sorted(p.pred, key=_pair_key):
            joined = _join(l, s)
            if joined is None:
                continue
            sigma, sigma_a, toks = joined
            world = World(sigma, sigma_a, toks)
            lp_set = None
            for sigma2 in sem.ctable.apply(alpha, t, sigma, sem.modulus):
                if sigma2 is FAULT:
                    return ActionCounterexample(
                        t, alpha, None, world, FAULT, "fault reachable")
                if lp_set is None:
                    lp_set = lp_star(sigma_a, toks, sem)
                ok = False
                for s2, abs2, toks2 in post_by_conc.get(sigma2, ()):
                    if (abs2, toks2) not in lp_set:
                        continue
                    if s2 == s or (s, s2) in guar:
                        ok = True
                        break
                if not ok:
                    return ActionCounterexample(
                        t, alpha, None, world, sigma2,
                        "no post predicate pair matches with a guarantee "
                        "transition and linearization steps")
        return True

    def repart_implies(self, p: RgsepView, q: RgsepView) -> ImplVerdict:
        """Sufficient condition only: pred containment with a narrower rely
        and a wider guarantee.  Incompleteness is reported as
        `not established`, never as failure."""
        if p.bot:
            return ImplVerdict.HOLDS
        if q.bot:
            return ImplVerdict.NOT_ESTABLISHED
        rely_ok = q.rely is None or (p.rely is not None and p.rely <= q.rely)
        if p.pred <= q.pred and rely_ok and q.guar <= p.guar:
            return ImplVerdict.HOLDS
        return ImplVerdict.NOT_ESTABLISHED

    # -- the fully-quantified oracle (small universes only)

    def def2_frames(self, guar: Rel) -> Iterator[RgsepView]:
        """Unit plus all rely-stabilized singleton frames.  Complete for the
        frame quantification in the action judgement: predicates distribute
        over unions of pairs, so a failing frame projects onto a failing
        stabilized singleton."""
        yield self.unit
        locals_pool = enumerate_worlds(self.dom)
        for l in locals_pool:
            for s in self.universe:
                pred = stabilize(frozenset({(l, s)}), guar, self.universe)
                yield RgsepView(pred, guar, frozenset())

    def check_action_def2(self, t: int, alpha: PrimCommand, p: RgsepView,
                          q: RgsepView):
        """The action judgement with full frame quantification; the oracle
        used to validate the frame-free sufficient condition."""
        if p.bot:
            return True
        return check_action_with_frames(self, t, alpha, p, q,
                                        self.def2_frames(p.guar))

    # -- obligation helpers

    def reified_token_worlds(self, p: RgsepView):
        if p.bot:
            return
        for l, s in sorted(p.pred, key=_pair_key):
            joined = _join(l, s)
            if joined is None:
                continue
            yield World(*joined)

    def strip_token_set(self, p: RgsepView, t: int) -> frozenset:
        """Predicate pairs with thread t's token erased (keeping its side),
        for the token-swap correspondence check."""
        out = set()
        for l, s in p.pred:
            joined = _join(l, s)
            if joined is None:
                continue
            side = "local" if t in l.toks else (
                "shared" if t in s.toks else "none")
            out.add((
                World(l.conc, l.abst, l.toks.remove(t)),
                World(s.conc, s.abst, s.toks.remove(t)),
                side,
            ))
        return frozenset(out)


def _loc(loc: str, interp: Dict[str, int]) -> str:
    if "{" not in loc:
        return loc
    try:
        return loc.format_map(interp)
    except KeyError as exc:
        raise ModelError(
            f"location {loc!r} references unbound logical variable {exc}")


def _prim_locs(e) -> set:
    from .command_lang import expr_locs

    return set(expr_locs(e))


def _heaps_over(locdoms):
    choices = []
    for loc, vals in locdoms:
        choices.append([(loc, v) for v in [None] + list(vals)])
    for combo in itertools.product(*choices):
        yield Heap({loc: v for loc, v in combo if v is not None})


def _join(l: World, s: World):
    sigma = compose_states(l.conc, s.conc)
    if sigma is None or sigma is FAULT:
        return None
    abs_ = compose_states(l.abst, s.abst)
    if abs_ is None or abs_ is FAULT:
        return None
    toks = compose_tokens(l.toks, s.toks)
    if toks is None:
        return None
    return (sigma, abs_, toks)


def _pair_key(pair: Pair):
    l, s = pair
    return (world_sort_key(l), world_sort_key(s))
