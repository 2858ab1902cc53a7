"""Sequential commands and their two-level small-step semantics.

Commands are finite trees over primitives, sequencing, binary choice and
finite iteration.  Stepping is split into a stateless relation on command
shapes and a stateful one that additionally runs the fired primitive's
transformer.  Conditionals and loops are encodings on top of assume.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Optional, Tuple, Union

from .errors import ModelError, UndefinedLocation
from .state_model import FAULT, Heap, HeapState

# ---------------------------------------------------------------------------
# Expressions


@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class LVar:
    name: str


@dataclass(frozen=True)
class Read:
    loc: str


@dataclass(frozen=True)
class Tid:
    pass


@dataclass(frozen=True)
class Plus:
    a: "Expr"
    b: "Expr"


@dataclass(frozen=True)
class Eq:
    a: "Expr"
    b: "Expr"


@dataclass(frozen=True)
class Lt:
    a: "Expr"
    b: "Expr"


@dataclass(frozen=True)
class Not:
    a: "Expr"


@dataclass(frozen=True)
class And:
    a: "Expr"
    b: "Expr"


@dataclass(frozen=True)
class Or:
    a: "Expr"
    b: "Expr"


Expr = Union[Const, LVar, Read, Tid, Plus, Eq, Lt, Not, And, Or]


def resolve_loc(loc: str, t: int) -> str:
    """Thread-local cells: `{t}` in a location resolves to the executing
    thread at transformer-application time."""
    if "{" in loc:
        return loc.format_map({"t": t})
    return loc


def eval_expr(e: Expr, sigma: Heap, interp: Dict[str, int], t: int, modulus: int) -> int:
    """Total evaluation over the declared values; raises UndefinedLocation
    when a read location is absent from the state."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, LVar):
        if e.name not in interp:
            raise ModelError(f"unbound logical variable {e.name!r}")
        return interp[e.name]
    if isinstance(e, Read):
        loc = resolve_loc(e.loc, t)
        v = sigma.get(loc)
        if v is None:
            raise UndefinedLocation(loc)
        return v
    if isinstance(e, Tid):
        return t
    if isinstance(e, Plus):
        return (eval_expr(e.a, sigma, interp, t, modulus)
                + eval_expr(e.b, sigma, interp, t, modulus)) % modulus
    if isinstance(e, Eq):
        return int(eval_expr(e.a, sigma, interp, t, modulus)
                   == eval_expr(e.b, sigma, interp, t, modulus))
    if isinstance(e, Lt):
        return int(eval_expr(e.a, sigma, interp, t, modulus)
                   < eval_expr(e.b, sigma, interp, t, modulus))
    if isinstance(e, Not):
        return int(eval_expr(e.a, sigma, interp, t, modulus) == 0)
    if isinstance(e, And):
        return int(eval_expr(e.a, sigma, interp, t, modulus) != 0
                   and eval_expr(e.b, sigma, interp, t, modulus) != 0)
    if isinstance(e, Or):
        return int(eval_expr(e.a, sigma, interp, t, modulus) != 0
                   or eval_expr(e.b, sigma, interp, t, modulus) != 0)
    raise ModelError(f"unknown expression node {e!r}")


def expr_locs(e: Expr) -> frozenset:
    if isinstance(e, Read):
        return frozenset([e.loc])
    if isinstance(e, (Plus, Eq, Lt, And, Or)):
        return expr_locs(e.a) | expr_locs(e.b)
    if isinstance(e, Not):
        return expr_locs(e.a)
    return frozenset()


# ---------------------------------------------------------------------------
# Commands


@dataclass(frozen=True)
class PrimCommand:
    name: str
    args: Tuple[Expr, ...] = ()

    def __repr__(self):
        if not self.args:
            return self.name
        return f"{self.name}({', '.join(map(repr, self.args))})"


@dataclass(frozen=True)
class Prim:
    prim: PrimCommand


@dataclass(frozen=True)
class Seq:
    first: "Command"
    second: "Command"


@dataclass(frozen=True)
class Choice:
    left: "Command"
    right: "Command"


@dataclass(frozen=True)
class Iter:
    body: "Command"


@dataclass(frozen=True)
class Skip:
    pass


Command = Union[Prim, Seq, Choice, Iter, Skip]

SKIP = Skip()
ID = PrimCommand("id")


def seq(*cmds: Command) -> Command:
    """Right-nested sequencing of one or more commands."""
    if not cmds:
        return SKIP
    out = cmds[-1]
    for c in reversed(cmds[:-1]):
        out = Seq(c, out)
    return out


# ---------------------------------------------------------------------------
# Transformer tables

ASSUME = "assume"
STORE = "store"
LOAD = "load"
CAS_SUCC = "cas_succ"
CAS_FAIL = "cas_fail"


@dataclass(frozen=True)
class GuardedUpdate:
    """A model-declared atomic primitive: optional guard plus simultaneous
    location updates.  Guard false blocks; any read or written location
    missing from the state faults."""

    params: Tuple[str, ...] = ()
    guard: Optional[Expr] = None
    updates: Tuple[Tuple[str, Expr], ...] = ()


class TransformerTable:
    """Maps primitive names to their semantics.

    The builtin names id/assume/load/store/cas_succ/cas_fail are always
    present; models may declare further guarded-update primitives.
    """

    _BUILTIN_ARITY = {
        "id": 0,
        ASSUME: 1,
        STORE: 2,
        LOAD: 2,
        CAS_SUCC: 3,
        CAS_FAIL: 3,
    }

    def __init__(self, custom: Optional[Dict[str, GuardedUpdate]] = None):
        self.custom = dict(custom or {})
        for name in self.custom:
            if name in self._BUILTIN_ARITY:
                raise ModelError(f"primitive {name!r} shadows a builtin")

    def arity(self, name: str) -> int:
        if name in self._BUILTIN_ARITY:
            return self._BUILTIN_ARITY[name]
        if name in self.custom:
            return len(self.custom[name].params)
        raise ModelError(f"undeclared primitive {name!r}")

    def declared(self, name: str) -> bool:
        return name in self._BUILTIN_ARITY or name in self.custom

    def apply(self, alpha: PrimCommand, t: int, sigma: Heap,
              modulus: int) -> Tuple[HeapState, ...]:
        """Run one primitive atomically; the result set is empty when the
        primitive blocks and contains FAULT on a memory error."""
        name = alpha.name
        if self.arity(name) != len(alpha.args):
            raise ModelError(f"arity mismatch for {name!r}")
        try:
            if name == "id":
                return (sigma,)
            if name == ASSUME:
                val = eval_expr(alpha.args[0], sigma, {}, t, modulus)
                return (sigma,) if val != 0 else ()
            if name == STORE:
                loc = resolve_loc(_loc_arg(alpha.args[0]), t)
                written = eval_expr(alpha.args[1], sigma, {}, t, modulus)
                if loc not in sigma:
                    return (FAULT,)
                return (sigma.set(loc, written),)
            if name == LOAD:
                src = resolve_loc(_loc_arg(alpha.args[0]), t)
                dst = resolve_loc(_loc_arg(alpha.args[1]), t)
                val = eval_expr(Read(src), sigma, {}, t, modulus)
                if dst not in sigma:
                    return (FAULT,)
                return (sigma.set(dst, val),)
            if name in (CAS_SUCC, CAS_FAIL):
                loc = resolve_loc(_loc_arg(alpha.args[0]), t)
                if loc not in sigma:
                    return (FAULT,)
                old = eval_expr(alpha.args[1], sigma, {}, t, modulus)
                if name == CAS_FAIL:
                    return (sigma,) if sigma[loc] != old else ()
                new = eval_expr(alpha.args[2], sigma, {}, t, modulus)
                return (sigma.set(loc, new),) if sigma[loc] == old else ()
            spec = self.custom[name]
            env = {}
            for p, arg in zip(spec.params, alpha.args):
                env[p] = eval_expr(arg, sigma, {}, t, modulus)
            return apply_guarded(spec, env, t, sigma, modulus)
        except UndefinedLocation:
            return (FAULT,)


def apply_guarded(spec: GuardedUpdate, env: Dict[str, int], t: int,
                  sigma: Heap, modulus: int) -> Tuple[HeapState, ...]:
    try:
        if spec.guard is not None:
            if eval_expr(spec.guard, sigma, env, t, modulus) == 0:
                return ()
        out = []
        for loc, e in spec.updates:
            loc = resolve_loc(loc, t)
            if loc not in sigma:
                return (FAULT,)
            out.append((loc, eval_expr(e, sigma, env, t, modulus)))
        return (sigma.set_many(out),)
    except UndefinedLocation:
        return (FAULT,)


class AbstractTable:
    """Transformers for abstract primitive commands, one per method.

    Each entry is a guarded update whose expressions may mention the
    logical variables "a" and "r", bound from the command instance.
    """

    def __init__(self, methods: Dict[str, GuardedUpdate]):
        self.methods = dict(methods)

    def apply(self, method: str, arg: int, ret: int, t: int, sigma: Heap,
              modulus: int) -> Tuple[HeapState, ...]:
        if method not in self.methods:
            raise ModelError(f"no abstract command for method {method!r}")
        spec = self.methods[method]
        return apply_guarded(spec, {"a": arg, "r": ret}, t, sigma, modulus)


def _loc_arg(e: Expr) -> str:
    if isinstance(e, Read):
        return e.loc
    raise ModelError(f"expected a location argument, got {e!r}")


def assume(e: Expr) -> Command:
    return Prim(PrimCommand(ASSUME, (e,)))


def store(loc: str, e: Expr) -> Command:
    return Prim(PrimCommand(STORE, (Read(loc), e)))


def cas(loc: str, old: Expr, new: Expr, then: Command, other: Command) -> Command:
    """CAS split into a success/failure pair of atomic primitives."""
    succ = Prim(PrimCommand(CAS_SUCC, (Read(loc), old, new)))
    fail = Prim(PrimCommand(CAS_FAIL, (Read(loc), old, new)))
    return Choice(seq(succ, then), seq(fail, other))


# ---------------------------------------------------------------------------
# Stepping


@lru_cache(maxsize=None)
def step(c: Command) -> frozenset:
    """All stateless transitions of a command shape."""
    if isinstance(c, Skip):
        return frozenset()
    if isinstance(c, Prim):
        return frozenset({(c.prim, SKIP)})
    if isinstance(c, Seq):
        if isinstance(c.first, Skip):
            return frozenset({(ID, c.second)})
        return frozenset(
            (alpha, Seq(c1, c.second)) for alpha, c1 in step(c.first)
        )
    if isinstance(c, Choice):
        return frozenset({(ID, c.left), (ID, c.right)})
    if isinstance(c, Iter):
        return frozenset({(ID, Seq(c.body, c)), (ID, SKIP)})
    raise ModelError(f"unknown command node {c!r}")


def state_step(c: Command, sigma: Heap, t: int, table: TransformerTable,
               modulus: int) -> frozenset:
    """Stateful transitions; the fault state may appear in results and is
    surfaced to callers for reporting."""
    out = set()
    for alpha, c2 in step(c):
        for sigma2 in table.apply(alpha, t, sigma, modulus):
            out.add((alpha, c2, sigma2))
    return frozenset(out)


def reachable_commands(c: Command) -> frozenset:
    """All command shapes reachable from c by stepping (finite)."""
    seen = {c}
    frontier = [c]
    while frontier:
        cur = frontier.pop()
        for _, nxt in step(cur):
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return frozenset(seen)


# ---------------------------------------------------------------------------
# Encodings of structured control flow


def desugar_if(e: Expr, then: Command, other: Command) -> Command:
    return Choice(Seq(assume(e), then), Seq(assume(Not(e)), other))


def desugar_while(e: Expr, body: Command) -> Command:
    return Seq(Iter(Seq(assume(e), body)), assume(Not(e)))


def command_prims(c: Command) -> frozenset:
    if isinstance(c, Skip):
        return frozenset()
    if isinstance(c, Prim):
        return frozenset([c.prim.name])
    if isinstance(c, Seq):
        return command_prims(c.first) | command_prims(c.second)
    if isinstance(c, Choice):
        return command_prims(c.left) | command_prims(c.right)
    if isinstance(c, Iter):
        return command_prims(c.body)
    raise ModelError(f"unknown command node {c!r}")


def validate_command(c: Command, table: TransformerTable) -> None:
    for name in command_prims(c):
        if not table.declared(name):
            raise ModelError(f"command uses undeclared primitive {name!r}")
