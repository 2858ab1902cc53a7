"""Loading, validating and serializing model and outline files.

One JSON document describes a model: domains, primitive transformers,
concrete method bodies, abstract atomic commands, initial states, the
monoid selection, and (for proofs) predicate macros, rely/guarantee
actions and per-method assertion families.  Outlines live in a second
document mirroring the command tree with assertion slots.

Serialization emits the parsed form (macros expanded, structured control
flow desugared); loading the output reproduces the model exactly.
"""

from __future__ import annotations

import json
from typing import Dict, List, Optional, Tuple

from .command_lang import (
    And,
    Choice,
    Command,
    Const,
    Eq,
    Expr,
    GuardedUpdate,
    Iter,
    LVar,
    Lt,
    Not,
    Or,
    Plus,
    Prim,
    PrimCommand,
    Read,
    Seq,
    Skip,
    Tid,
    AbstractTable,
    TransformerTable,
    desugar_if,
    desugar_while,
    validate_command,
)
from .errors import ModelError
from .linearizability import LibraryModel
from .logic import (
    ExistsAssn,
    OChoice,
    OConseq,
    OIter,
    OPrim,
    OSeq,
    OSkip,
    OrAssn,
    RImplAssn,
    StarAssn,
    VLeaf,
)
from .state_model import APCom, Domains, Heap
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
    check_no_nested_box,
)


def _fail(path: str, msg: str):
    raise ModelError(f"{path}: {msg}")


# ---------------------------------------------------------------------------
# Expressions


def parse_expr(doc, path: str = "expr") -> Expr:
    if isinstance(doc, bool):
        return Const(int(doc))
    if isinstance(doc, int):
        return Const(doc)
    if not isinstance(doc, list) or not doc:
        _fail(path, f"expected an expression, got {doc!r}")
    tag = doc[0]
    args = doc[1:]
    if tag == "const" and len(args) == 1:
        return Const(int(args[0]))
    if tag == "var" and len(args) == 1:
        return LVar(str(args[0]))
    if tag == "read" and len(args) == 1:
        return Read(str(args[0]))
    if tag == "tid" and not args:
        return Tid()
    if tag == "+" and len(args) == 2:
        return Plus(parse_expr(args[0], path), parse_expr(args[1], path))
    if tag == "==" and len(args) == 2:
        return Eq(parse_expr(args[0], path), parse_expr(args[1], path))
    if tag == "!=" and len(args) == 2:
        return Not(Eq(parse_expr(args[0], path), parse_expr(args[1], path)))
    if tag == "<" and len(args) == 2:
        return Lt(parse_expr(args[0], path), parse_expr(args[1], path))
    if tag == "not" and len(args) == 1:
        return Not(parse_expr(args[0], path))
    if tag == "and" and len(args) == 2:
        return And(parse_expr(args[0], path), parse_expr(args[1], path))
    if tag == "or" and len(args) == 2:
        return Or(parse_expr(args[0], path), parse_expr(args[1], path))
    _fail(path, f"unknown expression form {doc!r}")


def dump_expr(e: Expr):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, LVar):
        return ["var", e.name]
    if isinstance(e, Read):
        return ["read", e.loc]
    if isinstance(e, Tid):
        return ["tid"]
    if isinstance(e, Plus):
        return ["+", dump_expr(e.a), dump_expr(e.b)]
    if isinstance(e, Eq):
        return ["==", dump_expr(e.a), dump_expr(e.b)]
    if isinstance(e, Lt):
        return ["<", dump_expr(e.a), dump_expr(e.b)]
    if isinstance(e, Not):
        return ["not", dump_expr(e.a)]
    if isinstance(e, And):
        return ["and", dump_expr(e.a), dump_expr(e.b)]
    if isinstance(e, Or):
        return ["or", dump_expr(e.a), dump_expr(e.b)]
    raise ModelError(f"cannot serialize expression {e!r}")


# ---------------------------------------------------------------------------
# Commands


def parse_command(doc, path: str = "cmd") -> Command:
    if not isinstance(doc, list) or not doc:
        _fail(path, f"expected a command, got {doc!r}")
    tag = doc[0]
    args = doc[1:]
    if tag == "skip":
        return Skip()
    if tag == "prim":
        if not args:
            _fail(path, "prim needs a name")
        return Prim(PrimCommand(
            str(args[0]),
            tuple(parse_expr(a, f"{path}/{args[0]}") for a in args[1:])))
    if tag == "assume" and len(args) == 1:
        return Prim(PrimCommand("assume", (parse_expr(args[0], path),)))
    if tag == "store" and len(args) == 2:
        return Prim(PrimCommand(
            "store", (Read(str(args[0])), parse_expr(args[1], path))))
    if tag == "load" and len(args) == 2:
        return Prim(PrimCommand(
            "load", (Read(str(args[0])), Read(str(args[1])))))
    if tag == "seq":
        if not args:
            return Skip()
        parts = [parse_command(a, f"{path}/seq[{i}]")
                 for i, a in enumerate(args)]
        out = parts[-1]
        for c in reversed(parts[:-1]):
            out = Seq(c, out)
        return out
    if tag == "choice" and len(args) == 2:
        return Choice(parse_command(args[0], f"{path}/left"),
                      parse_command(args[1], f"{path}/right"))
    if tag == "iter" and len(args) == 1:
        return Iter(parse_command(args[0], f"{path}/iter"))
    if tag == "cas" and len(args) == 5:
        from .command_lang import cas

        return cas(str(args[0]), parse_expr(args[1], path),
                   parse_expr(args[2], path),
                   parse_command(args[3], f"{path}/then"),
                   parse_command(args[4], f"{path}/else"))
    if tag == "if" and len(args) == 3:
        return desugar_if(parse_expr(args[0], path),
                          parse_command(args[1], f"{path}/then"),
                          parse_command(args[2], f"{path}/else"))
    if tag == "while" and len(args) == 2:
        return desugar_while(parse_expr(args[0], path),
                             parse_command(args[1], f"{path}/do"))
    _fail(path, f"unknown command form {doc!r}")


def dump_command(c: Command):
    if isinstance(c, Skip):
        return ["skip"]
    if isinstance(c, Prim):
        return ["prim", c.prim.name, *[dump_expr(a) for a in c.prim.args]]
    if isinstance(c, Seq):
        return ["seq", dump_command(c.first), dump_command(c.second)]
    if isinstance(c, Choice):
        return ["choice", dump_command(c.left), dump_command(c.right)]
    if isinstance(c, Iter):
        return ["iter", dump_command(c.body)]
    raise ModelError(f"cannot serialize command {c!r}")


# ---------------------------------------------------------------------------
# View assertions (with macro expansion)


class MacroTable:
    def __init__(self, raw: Dict[str, dict]):
        self.raw = raw

    def expand(self, name: str, args: List, path: str, stack: Tuple[str, ...]):
        if name in stack:
            _fail(path, f"recursive macro {name!r} "
                        f"(expansion chain {' -> '.join(stack)})")
        if name not in self.raw:
            _fail(path, f"unknown macro {name!r}")
        spec = self.raw[name]
        params = spec.get("params", [])
        if len(params) != len(args):
            _fail(path, f"macro {name!r} expects {len(params)} arguments")
        body = _subst_json(spec["body"], dict(zip(params, args)), path)
        return body, stack + (name,)


def _subst_json(doc, binding: Dict[str, object], path: str):
    """Purely syntactic substitution of macro parameters: `["var", p]`
    nodes are replaced by the argument document and `{p}` placeholders in
    location strings by its rendering."""
    if isinstance(doc, list):
        if len(doc) == 2 and doc[0] == "var" and doc[1] in binding:
            return binding[doc[1]]
        return [_subst_json(d, binding, path) for d in doc]
    if isinstance(doc, str) and "{" in doc:
        out = doc
        for p, arg in binding.items():
            hole = "{" + p + "}"
            if hole not in out:
                continue
            if isinstance(arg, int):
                out = out.replace(hole, str(arg))
            elif isinstance(arg, list) and len(arg) == 2 and arg[0] == "var":
                out = out.replace(hole, "{" + arg[1] + "}")
            else:
                _fail(path, f"cannot splice {arg!r} into location {doc!r}")
        return out
    return doc


def parse_vassn(doc, macros: MacroTable, nthreads: int, path: str = "vassn",
                stack: Tuple[str, ...] = ()):
    if not isinstance(doc, list) or not doc:
        _fail(path, f"expected a view assertion, got {doc!r}")
    tag = doc[0]
    args = doc[1:]
    if tag == "emp":
        return EmpA()
    if tag == "true":
        return TrueA()
    if tag == "pt" and len(args) == 2:
        return CPt(str(args[0]), parse_expr(args[1], path))
    if tag == "apt" and len(args) == 2:
        return APt(str(args[0]), parse_expr(args[1], path))
    if tag in ("todo", "done") and len(args) == 4:
        return TokA(tag, parse_expr(args[0], path), str(args[1]),
                    parse_expr(args[2], path), parse_expr(args[3], path))
    if tag == "pure" and len(args) == 1:
        return PureA(parse_expr(args[0], path))
    if tag == "star":
        return StarA(tuple(
            parse_vassn(a, macros, nthreads, f"{path}/star[{i}]", stack)
            for i, a in enumerate(args)))
    if tag == "or":
        return OrA(tuple(
            parse_vassn(a, macros, nthreads, f"{path}/or[{i}]", stack)
            for i, a in enumerate(args)))
    if tag == "exists" and len(args) == 2:
        return ExistsA(str(args[0]),
                       parse_vassn(args[1], macros, nthreads,
                                   f"{path}/exists", stack))
    if tag == "box" and len(args) == 1:
        return BoxA(parse_vassn(args[0], macros, nthreads, f"{path}/box",
                                stack))
    if tag == "macro" and args:
        body, stack2 = macros.expand(str(args[0]), list(args[1:]), path, stack)
        return parse_vassn(body, macros, nthreads, f"{path}/{args[0]}",
                           stack2)
    if tag == "sep_threads" and len(args) == 2:
        var = str(args[0])
        parts = []
        for j in range(1, nthreads + 1):
            body = _subst_json(args[1], {var: j}, path)
            parts.append(parse_vassn(body, macros, nthreads,
                                     f"{path}/sep[{j}]", stack))
        return StarA(tuple(parts))
    _fail(path, f"unknown view assertion form {doc!r}")


def dump_vassn(a):
    if isinstance(a, EmpA):
        return ["emp"]
    if isinstance(a, TrueA):
        return ["true"]
    if isinstance(a, CPt):
        return ["pt", a.loc, dump_expr(a.value)]
    if isinstance(a, APt):
        return ["apt", a.loc, dump_expr(a.value)]
    if isinstance(a, TokA):
        return [a.kind, dump_expr(a.tid), a.method, dump_expr(a.arg),
                dump_expr(a.ret)]
    if isinstance(a, PureA):
        return ["pure", dump_expr(a.cond)]
    if isinstance(a, StarA):
        return ["star", *[dump_vassn(p) for p in a.parts]]
    if isinstance(a, OrA):
        return ["or", *[dump_vassn(p) for p in a.parts]]
    if isinstance(a, ExistsA):
        return ["exists", a.var, dump_vassn(a.body)]
    if isinstance(a, BoxA):
        return ["box", dump_vassn(a.body)]
    raise ModelError(f"cannot serialize assertion {a!r}")


def _validate_vassn(a, allow_box: bool, path: str):
    check_no_nested_box(a)
    _validate_true_placement(a, False, path)


def _validate_true_placement(a, inside_box: bool, path: str):
    if isinstance(a, TrueA):
        if not inside_box:
            _fail(path, "`true` is only supported inside boxed assertions")
    elif isinstance(a, BoxA):
        _validate_true_placement(a.body, True, path)
    elif isinstance(a, (StarA, OrA)):
        for p in a.parts:
            _validate_true_placement(p, inside_box, path)
    elif isinstance(a, ExistsA):
        _validate_true_placement(a.body, inside_box, path)


# ---------------------------------------------------------------------------
# Assertion trees for outlines (logic level)


def parse_assertion(doc, macros: MacroTable, nthreads: int,
                    path: str = "assn"):
    if isinstance(doc, list) and doc and doc[0] == "rimpl" and len(doc) == 3:
        return RImplAssn(parse_assertion(doc[1], macros, nthreads, path),
                         parse_assertion(doc[2], macros, nthreads, path))
    rho = parse_vassn(doc, macros, nthreads, path)
    _validate_vassn(rho, True, path)
    return VLeaf(rho)


def dump_assertion(a):
    if isinstance(a, VLeaf):
        return dump_vassn(a.rho)
    if isinstance(a, StarAssn):
        return ["star", *[dump_assertion(p) for p in a.parts]]
    if isinstance(a, OrAssn):
        return ["or", *[dump_assertion(p) for p in a.parts]]
    if isinstance(a, ExistsAssn):
        return ["exists", a.var, dump_assertion(a.body)]
    if isinstance(a, RImplAssn):
        return ["rimpl", dump_assertion(a.pre), dump_assertion(a.post)]
    raise ModelError(f"cannot serialize assertion {a!r}")


def parse_outline_node(doc, macros: MacroTable, nthreads: int,
                       path: str = "outline"):
    if not isinstance(doc, dict) or "kind" not in doc:
        _fail(path, f"expected an outline node object, got {doc!r}")
    kind = doc["kind"]
    if kind == "prim":
        cmd = parse_command(doc["cmd"], f"{path}/cmd")
        if not isinstance(cmd, Prim):
            _fail(path, "outline prim node must hold a primitive command")
        return OPrim(cmd.prim)
    if kind == "skip":
        return OSkip()
    if kind == "seq":
        steps = doc.get("steps", [])
        if len(steps) < 3 or len(steps) % 2 == 0:
            _fail(path, "seq steps must alternate node, assertion, node, ...")
        children = []
        mids = []
        for i, entry in enumerate(steps):
            if i % 2 == 0:
                children.append(parse_outline_node(
                    entry, macros, nthreads, f"{path}/seq[{i // 2}]"))
            else:
                mids.append(parse_assertion(
                    entry, macros, nthreads, f"{path}/mid[{i // 2}]"))
        return OSeq(tuple(children), tuple(mids))
    if kind == "choice":
        return OChoice(
            parse_outline_node(doc["left"], macros, nthreads, f"{path}/left"),
            parse_outline_node(doc["right"], macros, nthreads,
                               f"{path}/right"))
    if kind == "iter":
        return OIter(
            parse_assertion(doc["invariant"], macros, nthreads,
                            f"{path}/invariant"),
            parse_outline_node(doc["body"], macros, nthreads, f"{path}/body"))
    if kind == "conseq":
        return OConseq(
            parse_assertion(doc["pre"], macros, nthreads, f"{path}/pre"),
            parse_assertion(doc["post"], macros, nthreads, f"{path}/post"),
            parse_outline_node(doc["inner"], macros, nthreads,
                               f"{path}/inner"))
    _fail(path, f"unknown outline node kind {kind!r}")


def dump_outline_node(node):
    if isinstance(node, OPrim):
        return {"kind": "prim", "cmd": dump_command(Prim(node.prim))}
    if isinstance(node, OSkip):
        return {"kind": "skip"}
    if isinstance(node, OSeq):
        steps = []
        for i, child in enumerate(node.children):
            if i:
                steps.append(dump_assertion(node.mids[i - 1]))
            steps.append(dump_outline_node(child))
        return {"kind": "seq", "steps": steps}
    if isinstance(node, OChoice):
        return {"kind": "choice", "left": dump_outline_node(node.left),
                "right": dump_outline_node(node.right)}
    if isinstance(node, OIter):
        return {"kind": "iter", "invariant": dump_assertion(node.invariant),
                "body": dump_outline_node(node.body)}
    if isinstance(node, OConseq):
        return {"kind": "conseq", "pre": dump_assertion(node.pre),
                "post": dump_assertion(node.post),
                "inner": dump_outline_node(node.inner)}
    raise ModelError(f"cannot serialize outline node {node!r}")


# ---------------------------------------------------------------------------
# Models


def parse_model(doc: dict, path: str = "model") -> LibraryModel:
    if not isinstance(doc, dict):
        _fail(path, "model document must be an object")
    for key in ("name", "monoid", "domains", "methods", "abstract",
                "initial"):
        if key not in doc:
            _fail(path, f"missing required section {key!r}")
    name = doc["name"]
    monoid_kind = doc["monoid"]
    if monoid_kind not in ("dcsl", "rgsep"):
        _fail(path, f"monoid must be 'dcsl' or 'rgsep', got {monoid_kind!r}")

    dd = doc["domains"]
    for key in ("values", "modulus", "threads", "locations",
                "abstract_locations"):
        if key not in dd:
            _fail(path, f"domains section missing {key!r}")
    values = tuple(int(v) for v in dd["values"])
    if not values:
        _fail(path, "values must be nonempty")

    prims = {}
    for pname, spec in doc.get("primitives", {}).items():
        guard = (parse_expr(spec["guard"], f"{path}/primitives/{pname}")
                 if spec.get("guard") is not None else None)
        updates = tuple(
            (str(loc), parse_expr(e, f"{path}/primitives/{pname}"))
            for loc, e in spec.get("updates", []))
        prims[pname] = GuardedUpdate(
            params=tuple(spec.get("params", [])), guard=guard,
            updates=updates)
    ctable = TransformerTable(prims)

    amethods = {}
    for mname, spec in doc["abstract"].items():
        guard = (parse_expr(spec["guard"], f"{path}/abstract/{mname}")
                 if spec.get("guard") is not None else None)
        updates = tuple(
            (str(loc), parse_expr(e, f"{path}/abstract/{mname}"))
            for loc, e in spec.get("updates", []))
        amethods[mname] = GuardedUpdate(params=("a", "r"), guard=guard,
                                        updates=updates)
    atable = AbstractTable(amethods)

    method_args = {}
    bodies = {}
    body_templates = {}
    for mname, spec in doc["methods"].items():
        if mname not in amethods:
            _fail(path, f"dom mismatch: method {mname!r} has no abstract "
                        "counterpart")
        args = tuple(int(a) for a in spec.get("args", values))
        method_args[mname] = args
        template = parse_command(spec["body"], f"{path}/methods/{mname}")
        body_templates[mname] = template
        from .subst import subst_command

        for a in args:
            for r in values:
                body = subst_command(template, {"a": a, "r": r})
                validate_command(body, ctable)
                if isinstance(body, Skip):
                    # a zero-step body would let concrete histories outrun
                    # the abstract generator at equal bounds
                    _fail(path, f"method {mname!r} body must perform at "
                                "least one step")
                bodies[(mname, a, r)] = body
    for mname in amethods:
        if mname not in method_args:
            _fail(path, f"dom mismatch: abstract method {mname!r} has no "
                        "concrete body")

    apcoms = tuple(
        APCom(m, a, r)
        for m in sorted(method_args)
        for a in method_args[m]
        for r in values
    )
    dom = Domains.make(
        values=values,
        modulus=int(dd["modulus"]),
        nthreads=int(dd["threads"]),
        cloc={str(k): tuple(int(x) for x in v)
              for k, v in dd["locations"].items()},
        aloc={str(k): tuple(int(x) for x in v)
              for k, v in dd["abstract_locations"].items()},
        apcoms=apcoms,
        cap=int(dd.get("cap", 200_000)),
    )

    init = doc["initial"]
    init_conc = Heap({str(k): int(v)
                      for k, v in init.get("concrete", {}).items()})
    init_abst = Heap({str(k): int(v)
                      for k, v in init.get("abstract", {}).items()})
    cloc = dict(dom.cloc)
    for loc, _v in init_conc.items():
        if loc not in cloc:
            _fail(path, f"initial concrete state uses undeclared "
                        f"location {loc!r}")
    aloc = dict(dom.aloc)
    for loc, _v in init_abst.items():
        if loc not in aloc:
            _fail(path, f"initial abstract state uses undeclared "
                        f"location {loc!r}")

    macros = MacroTable(doc.get("macros", {}))
    nthreads = dom.nthreads

    shared_universe = None
    if doc.get("shared_universe") is not None:
        shared_universe = parse_vassn(doc["shared_universe"], macros,
                                      nthreads, f"{path}/shared_universe")
        _validate_vassn(shared_universe, False, f"{path}/shared_universe")

    actions = {}
    for aname, spec in doc.get("actions", {}).items():
        pre = parse_vassn(spec["pre"], macros, nthreads,
                          f"{path}/actions/{aname}/pre")
        post = parse_vassn(spec["post"], macros, nthreads,
                           f"{path}/actions/{aname}/post")
        for side in (pre, post):
            _validate_vassn(side, False, f"{path}/actions/{aname}")
        actions[aname] = (pre, post)
    for aname in list(doc.get("guarantee", [])) + list(doc.get("rely_extra",
                                                               [])):
        if aname not in actions:
            _fail(path, f"guarantee/rely references unknown action {aname!r}")

    pre_templates = {}
    post_templates = {}
    for mname, spec in doc.get("assertions", {}).items():
        if mname not in method_args:
            _fail(path, f"assertions declared for unknown method {mname!r}")
        pre_templates[mname] = parse_assertion(
            spec["pre"], macros, nthreads, f"{path}/assertions/{mname}/pre")
        post_templates[mname] = parse_assertion(
            spec["post"], macros, nthreads, f"{path}/assertions/{mname}/post")

    model = LibraryModel(
        name=name,
        monoid_kind=monoid_kind,
        dom=dom,
        ctable=ctable,
        atable=atable,
        init_conc=init_conc,
        init_abst=init_abst,
        method_args=method_args,
        bodies=bodies,
        pre_templates=pre_templates,
        post_templates=post_templates,
        outline_templates={},
        actions=actions,
        guarantee_names=tuple(doc.get("guarantee", [])),
        rely_extra_names=tuple(doc.get("rely_extra", [])),
        shared_universe_assn=shared_universe,
        macros_raw=dict(doc.get("macros", {})),
        source=None,
    )
    model.source = serialize_model(model, body_templates)
    return model


def serialize_model(model: LibraryModel,
                    body_templates: Optional[Dict[str, Command]] = None) -> dict:
    """Emit the parsed (macro-expanded, desugared) document."""
    if body_templates is None and model.source is not None:
        return model.source
    doc = {
        "name": model.name,
        "monoid": model.monoid_kind,
        "domains": {
            "values": list(model.dom.values),
            "modulus": model.dom.modulus,
            "threads": model.dom.nthreads,
            "locations": {k: list(v) for k, v in model.dom.cloc},
            "abstract_locations": {k: list(v) for k, v in model.dom.aloc},
            "cap": model.dom.cap,
        },
        "primitives": {
            name: {
                "params": list(spec.params),
                "guard": dump_expr(spec.guard) if spec.guard is not None
                         else None,
                "updates": [[loc, dump_expr(e)] for loc, e in spec.updates],
            }
            for name, spec in sorted(model.ctable.custom.items())
        },
        "abstract": {
            name: {
                "guard": dump_expr(spec.guard) if spec.guard is not None
                         else None,
                "updates": [[loc, dump_expr(e)] for loc, e in spec.updates],
            }
            for name, spec in sorted(model.atable.methods.items())
        },
        "methods": {},
        "initial": {
            "concrete": {k: v for k, v in model.init_conc.items()},
            "abstract": {k: v for k, v in model.init_abst.items()},
        },
    }
    for mname in model.methods():
        if body_templates and mname in body_templates:
            template = body_templates[mname]
        else:
            a = model.method_args[mname][0]
            r = model.dom.values[0]
            template = model.body(mname, a, r)
        doc["methods"][mname] = {
            "args": list(model.method_args[mname]),
            "body": dump_command(template),
        }
    if model.macros_raw:
        doc["macros"] = model.macros_raw
    if model.shared_universe_assn is not None:
        doc["shared_universe"] = dump_vassn(model.shared_universe_assn)
    if model.actions:
        doc["actions"] = {
            name: {"pre": dump_vassn(pre), "post": dump_vassn(post)}
            for name, (pre, post) in sorted(model.actions.items())
        }
        doc["guarantee"] = list(model.guarantee_names)
        doc["rely_extra"] = list(model.rely_extra_names)
    if model.pre_templates:
        doc["assertions"] = {
            m: {"pre": dump_assertion(model.pre_templates[m]),
                "post": dump_assertion(model.post_templates[m])}
            for m in sorted(model.pre_templates)
        }
    return doc


def load_model(path: str) -> LibraryModel:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelError(
                f"{path}: invalid JSON at line {exc.lineno} column "
                f"{exc.colno}: {exc.msg}")
    return parse_model(doc, path)


def load_outlines(path: str, model: LibraryModel) -> None:
    """Attach an outline document to a model (mutates the model)."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelError(
                f"{path}: invalid JSON at line {exc.lineno} column "
                f"{exc.colno}: {exc.msg}")
    attach_outlines(doc, model, path)


def attach_outlines(doc: dict, model: LibraryModel, path: str = "outline") -> None:
    macros = MacroTable({**model.macros_raw, **doc.get("macros", {})})
    outlines = doc.get("outlines")
    if not isinstance(outlines, dict):
        _fail(path, "outline document needs an 'outlines' object")
    templates = {}
    for mname, node in outlines.items():
        if mname not in model.method_args:
            _fail(path, f"outline for unknown method {mname!r}")
        templates[mname] = parse_outline_node(
            node, macros, model.dom.nthreads, f"{path}/{mname}")
    missing = [m for m in model.method_args if m not in templates]
    if missing:
        _fail(path, f"outlines missing for methods: {missing}")
    model.outline_templates = templates
