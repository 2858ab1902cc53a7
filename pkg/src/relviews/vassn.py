"""View-assertion syntax shared by the two monoids.

A view assertion describes a set of world fragments: singleton concrete or
abstract cells, token literals, pure facts, separating conjunction,
disjunction and finite existentials.  Boxed assertions (shared-state
fragments) and `true` are meaningful only for the RGSep monoid and are
rejected by the DCSL evaluator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple, Union

from .command_lang import Expr
from .errors import ModelError
from .state_model import World


@dataclass(frozen=True)
class EmpA:
    pass


@dataclass(frozen=True)
class CPt:
    """Concrete singleton cell: loc |-> value."""

    loc: str
    value: Expr


@dataclass(frozen=True)
class APt:
    """Abstract singleton cell: loc ~> value."""

    loc: str
    value: Expr


@dataclass(frozen=True)
class TokA:
    """Token literal [kind(method(arg, ret))]_tid."""

    kind: str  # "todo" | "done"
    tid: int
    method: str
    arg: Expr
    ret: Expr


@dataclass(frozen=True)
class PureA:
    """Pure fact over values; holds of the empty fragment only."""

    cond: Expr


@dataclass(frozen=True)
class StarA:
    parts: Tuple["VAssn", ...]


@dataclass(frozen=True)
class OrA:
    parts: Tuple["VAssn", ...]


@dataclass(frozen=True)
class ExistsA:
    var: str
    body: "VAssn"


@dataclass(frozen=True)
class TrueA:
    """Soaks up an arbitrary remainder; RGSep boxes only."""


@dataclass(frozen=True)
class BoxA:
    """Shared-state assertion; must not be nested."""

    body: "VAssn"


@dataclass(frozen=True)
class WorldsA:
    """Explicit world-set literal (DCSL only)."""

    worlds: Tuple[World, ...]


VAssn = Union[EmpA, CPt, APt, TokA, PureA, StarA, OrA, ExistsA, TrueA, BoxA,
              WorldsA]


def star(*parts: VAssn) -> VAssn:
    flat = []
    for p in parts:
        if isinstance(p, StarA):
            flat.extend(p.parts)
        elif not isinstance(p, EmpA):
            flat.append(p)
    if not flat:
        return EmpA()
    if len(flat) == 1:
        return flat[0]
    return StarA(tuple(flat))


def disj(*parts: VAssn) -> VAssn:
    flat = []
    for p in parts:
        if isinstance(p, OrA):
            flat.extend(p.parts)
        else:
            flat.append(p)
    if len(flat) == 1:
        return flat[0]
    return OrA(tuple(flat))


def free_lvars_expr(e) -> frozenset:
    from .command_lang import LVar, Plus, Eq, Lt, Not, And, Or

    if isinstance(e, LVar):
        return frozenset([e.name])
    if isinstance(e, (Plus, Eq, Lt, And, Or)):
        return free_lvars_expr(e.a) | free_lvars_expr(e.b)
    if isinstance(e, Not):
        return free_lvars_expr(e.a)
    return frozenset()


def free_lvars(a: VAssn) -> frozenset:
    if isinstance(a, (EmpA, TrueA, WorldsA)):
        return frozenset()
    if isinstance(a, (CPt, APt)):
        return free_lvars_expr(a.value)
    if isinstance(a, TokA):
        return (free_lvars_expr(a.tid) | free_lvars_expr(a.arg)
                | free_lvars_expr(a.ret))
    if isinstance(a, PureA):
        return free_lvars_expr(a.cond)
    if isinstance(a, (StarA, OrA)):
        out = frozenset()
        for p in a.parts:
            out |= free_lvars(p)
        return out
    if isinstance(a, ExistsA):
        return free_lvars(a.body) - {a.var}
    if isinstance(a, BoxA):
        return free_lvars(a.body)
    raise ModelError(f"unknown assertion node {a!r}")


def check_no_nested_box(a: VAssn, inside: bool = False) -> None:
    if isinstance(a, BoxA):
        if inside:
            raise ModelError("boxed assertions must not be nested")
        check_no_nested_box(a.body, True)
    elif isinstance(a, (StarA, OrA)):
        for p in a.parts:
            check_no_nested_box(p, inside)
    elif isinstance(a, ExistsA):
        check_no_nested_box(a.body, inside)
