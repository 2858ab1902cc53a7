"""States, tokens and world triples.

Concrete and abstract states are finite partial heaps (location -> value)
plus a distinguished fault element.  Token maps assign each thread at most
one one-time permission, either still pending (todo) or spent (done).
A world triple bundles one concrete state, one abstract state and one token
map; reification of any view produces a set of these.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Tuple, Union

from .errors import UniverseTooLarge


class _Fault:
    """The fault state; absorbing for composition."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "FAULT"

    def __reduce__(self):  # keep the singleton through pickling
        return (_Fault, ())


FAULT = _Fault()


class Heap:
    """Immutable finite partial map from locations to values."""

    __slots__ = ("_d", "_key", "_hash")

    def __init__(self, items: Union[dict, Iterable[Tuple[str, int]]] = ()):
        d = dict(items)
        self._d = d
        self._key = tuple(sorted(d.items()))
        self._hash = hash(self._key)

    def get(self, loc: str) -> Optional[int]:
        return self._d.get(loc)

    def __contains__(self, loc: str) -> bool:
        return loc in self._d

    def __getitem__(self, loc: str) -> int:
        return self._d[loc]

    def __len__(self) -> int:
        return len(self._d)

    def dom(self) -> frozenset:
        return frozenset(self._d)

    def items(self) -> Tuple[Tuple[str, int], ...]:
        return self._key

    def set(self, loc: str, val: int) -> "Heap":
        d = dict(self._d)
        d[loc] = val
        return Heap(d)

    def set_many(self, pairs: Iterable[Tuple[str, int]]) -> "Heap":
        d = dict(self._d)
        for loc, val in pairs:
            d[loc] = val
        return Heap(d)

    def remove(self, locs: Iterable[str]) -> "Heap":
        drop = set(locs)
        return Heap({k: v for k, v in self._d.items() if k not in drop})

    def restrict(self, locs: Iterable[str]) -> "Heap":
        keep = set(locs)
        return Heap({k: v for k, v in self._d.items() if k in keep})

    def subheap_of(self, other: "Heap") -> bool:
        return all(other.get(k) == v for k, v in self._key)

    def __eq__(self, other):
        return isinstance(other, Heap) and self._key == other._key

    def __hash__(self):
        return self._hash

    def __repr__(self):
        inner = ", ".join(f"{k}:{v}" for k, v in self._key)
        return "[" + inner + "]"

    def __reduce__(self):
        return (Heap, (self._key,))


EMPTY_HEAP = Heap()

HeapState = Union[Heap, _Fault]

TODO = "todo"
DONE = "done"


class APCom(NamedTuple):
    """An abstract primitive command instance: method applied to (arg, ret)."""

    method: str
    arg: int
    ret: int

    def __repr__(self):
        return f"{self.method}({self.arg},{self.ret})"


class Token(NamedTuple):
    kind: str  # TODO or DONE
    apcom: APCom

    def __repr__(self):
        return f"{self.kind}({self.apcom!r})"


class TokenMap:
    """Immutable finite partial map from thread ids to tokens."""

    __slots__ = ("_d", "_key", "_hash")

    def __init__(self, items: Union[dict, Iterable[Tuple[int, Token]]] = ()):
        d = dict(items)
        self._d = d
        self._key = tuple(sorted(d.items()))
        self._hash = hash(self._key)

    def get(self, tid: int) -> Optional[Token]:
        return self._d.get(tid)

    def __contains__(self, tid: int) -> bool:
        return tid in self._d

    def __len__(self) -> int:
        return len(self._d)

    def dom(self) -> frozenset:
        return frozenset(self._d)

    def items(self) -> Tuple[Tuple[int, Token], ...]:
        return self._key

    def set(self, tid: int, tok: Token) -> "TokenMap":
        d = dict(self._d)
        d[tid] = tok
        return TokenMap(d)

    def remove(self, tid: int) -> "TokenMap":
        d = dict(self._d)
        d.pop(tid, None)
        return TokenMap(d)

    def todos(self) -> Tuple[Tuple[int, APCom], ...]:
        return tuple((t, tok.apcom) for t, tok in self._key if tok.kind == TODO)

    def __eq__(self, other):
        return isinstance(other, TokenMap) and self._key == other._key

    def __hash__(self):
        return self._hash

    def __repr__(self):
        inner = ", ".join(f"{t}:{tok!r}" for t, tok in self._key)
        return "{" + inner + "}"

    def __reduce__(self):
        return (TokenMap, (self._key,))


EMPTY_TOKENS = TokenMap()


class World(NamedTuple):
    """One (concrete state, abstract state, token map) triple."""

    conc: Heap
    abst: Heap
    toks: TokenMap

    def __repr__(self):
        return f"({self.conc!r}, {self.abst!r}, {self.toks!r})"


EMPTY_WORLD = World(EMPTY_HEAP, EMPTY_HEAP, EMPTY_TOKENS)


def compose_states(s1: HeapState, s2: HeapState) -> Optional[HeapState]:
    """Partial composition of states; None marks the undefined case.

    Fault is absorbing; otherwise the union of the two maps when their
    domains are disjoint.
    """
    if s1 is FAULT or s2 is FAULT:
        return FAULT
    if len(s1) < len(s2):
        s1, s2 = s2, s1
    for loc, _ in s2.items():
        if loc in s1:
            return None
    return s1.set_many(s2.items())


def compose_tokens(d1: TokenMap, d2: TokenMap) -> Optional[TokenMap]:
    """Disjoint union of token maps; None when a thread id is shared."""
    if len(d1) < len(d2):
        d1, d2 = d2, d1
    for tid, _ in d2.items():
        if tid in d1:
            return None
    out = dict(d1.items())
    for tid, tok in d2.items():
        out[tid] = tok
    return TokenMap(out)


def compose_worlds(w1: World, w2: World) -> Optional[World]:
    """Componentwise composition; None if any component is undefined."""
    c = compose_states(w1.conc, w2.conc)
    if c is None:
        return None
    a = compose_states(w1.abst, w2.abst)
    if a is None:
        return None
    t = compose_tokens(w1.toks, w2.toks)
    if t is None:
        return None
    return World(c, a, t)


def world_leq(w: World, big: World) -> bool:
    """Is w a sub-world of big (pointwise sub-map)?"""
    if not w.conc.subheap_of(big.conc):
        return False
    if not w.abst.subheap_of(big.abst):
        return False
    return all(big.toks.get(t) == tok for t, tok in w.toks.items())


def world_minus(big: World, w: World) -> World:
    """Remove a sub-world; caller guarantees world_leq(w, big)."""
    return World(
        big.conc.remove(loc for loc, _ in w.conc.items()),
        big.abst.remove(loc for loc, _ in w.abst.items()),
        TokenMap({t: tok for t, tok in big.toks.items() if t not in w.toks}),
    )


@dataclass(frozen=True)
class Domains:
    """Finite model-declared domains everything is enumerated over.

    cloc/aloc map each concrete/abstract location to its per-location value
    domain.  apcoms is the token alphabet.  modulus drives wrapping
    arithmetic; cap bounds any universe enumeration.
    """

    values: Tuple[int, ...]
    modulus: int
    nthreads: int
    cloc: Tuple[Tuple[str, Tuple[int, ...]], ...]
    aloc: Tuple[Tuple[str, Tuple[int, ...]], ...]
    apcoms: Tuple[APCom, ...]
    cap: int = 200_000

    @staticmethod
    def make(values, modulus, nthreads, cloc, aloc, apcoms, cap=200_000):
        def norm(m):
            return tuple(sorted((k, tuple(v)) for k, v in dict(m).items()))

        return Domains(
            values=tuple(values),
            modulus=modulus,
            nthreads=nthreads,
            cloc=norm(cloc),
            aloc=norm(aloc),
            apcoms=tuple(apcoms),
            cap=cap,
        )

    def thread_ids(self):
        return range(1, self.nthreads + 1)


def _heap_count(locdoms) -> int:
    n = 1
    for _, vals in locdoms:
        n *= len(vals) + 1
    return n


def _enumerate_heaps(locdoms):
    choices = []
    for loc, vals in locdoms:
        opts = [None] + list(vals)
        choices.append([(loc, v) for v in opts])
    for combo in itertools.product(*choices):
        yield Heap({loc: v for loc, v in combo if v is not None})


def _token_options(dom: Domains):
    opts = [None]
    for ap in dom.apcoms:
        opts.append(Token(TODO, ap))
        opts.append(Token(DONE, ap))
    return opts


def count_worlds(dom: Domains) -> int:
    per_thread = 1 + 2 * len(dom.apcoms)
    return (
        _heap_count(dom.cloc)
        * _heap_count(dom.aloc)
        * per_thread ** dom.nthreads
    )


def enumerate_worlds(dom: Domains, cap: Optional[int] = None) -> Tuple[World, ...]:
    """The complete universe of world triples over the declared domains.

    Heaps range over all partial maps respecting the per-location domains;
    token maps over all assignments of at most one token per thread.
    """
    cap = dom.cap if cap is None else cap
    size = count_worlds(dom)
    if size > cap:
        raise UniverseTooLarge(size, cap)
    tok_opts = _token_options(dom)
    tids = list(dom.thread_ids())
    worlds = []
    for conc in _enumerate_heaps(dom.cloc):
        for abst in _enumerate_heaps(dom.aloc):
            for combo in itertools.product(tok_opts, repeat=len(tids)):
                toks = TokenMap(
                    {t: tok for t, tok in zip(tids, combo) if tok is not None}
                )
                worlds.append(World(conc, abst, toks))
    worlds.sort(key=world_sort_key)
    return tuple(worlds)


def world_sort_key(w: World):
    return (w.conc.items(), w.abst.items(), w.toks.items())


def heap_json(h: Heap) -> dict:
    """Heaps serialize as objects mapping locations to values."""
    return {loc: v for loc, v in h.items()}


def tokens_json(d: TokenMap) -> dict:
    """Token maps serialize per thread with the command spelled out."""
    return {
        str(tid): {"kind": tok.kind, "method": tok.apcom.method,
                   "arg": tok.apcom.arg, "ret": tok.apcom.ret}
        for tid, tok in d.items()
    }


def world_json(w: World) -> dict:
    return {"concrete": heap_json(w.conc), "abstract": heap_json(w.abst),
            "tokens": tokens_json(w.toks)}


def world_in_domains(w: World, dom: Domains) -> bool:
    """Component-wise respect of the declared location/value domains and the
    token alphabet."""
    cloc = dict(dom.cloc)
    for loc, v in w.conc.items():
        if loc not in cloc or v not in cloc[loc]:
            return False
    aloc = dict(dom.aloc)
    for loc, v in w.abst.items():
        if loc not in aloc or v not in aloc[loc]:
            return False
    apcoms = set(dom.apcoms)
    for tid, tok in w.toks.items():
        if tid not in dom.thread_ids() or tok.apcom not in apcoms:
            return False
    return True
