"""Service layer: the operations behind the CLI and the HTTP API.

Handlers (`h_*`) are plain functions over core objects so the CLI can call
them in-process; the FastAPI app wraps them with pydantic request models
and an in-memory group registry.  Errors carry the exit-code convention:
1 usage/parse, 2 validation failure, 3 resource limit.
"""

import re
import statistics
import time
import uuid
from dataclasses import dataclass, field
from random import Random

from .build import (
    BuildError,
    fixtures,
    group_to_dict,
    load_group_dict,
    validate,
)
from .hybrid import HybridElement, HybridGroup, HybridError, parse_element
from .pc import PcError
from .perm import PermError
from .rws import (
    CompletionLimitExceeded,
    MonoidPresentation,
    RewritingSystem,
    RwsError,
    ShortLex,
    format_rules_text,
    is_confluent,
    knuth_bendix,
    parse_rules_text,
    parse_word_text,
)
from . import subgrp

PARSE_ERROR = 1
VALIDATION_ERROR = 2
LIMIT_ERROR = 3


class ServiceError(Exception):
    def __init__(self, message: str, code: int = PARSE_ERROR):
        super().__init__(message)
        self.code = code


def resolve_group(spec) -> HybridGroup:
    """A fixture name (F1..F6), a definition dict, or a group itself."""
    if isinstance(spec, HybridGroup):
        return spec
    if isinstance(spec, str):
        fx = fixtures()
        if spec in fx:
            return fx[spec].group
        raise ServiceError(f"unknown fixture {spec!r}", PARSE_ERROR)
    if isinstance(spec, dict):
        try:
            return load_group_dict(spec)
        except BuildError as exc:
            code = VALIDATION_ERROR if "validation" in str(exc) else PARSE_ERROR
            raise ServiceError(str(exc), code) from exc
        except CompletionLimitExceeded as exc:
            raise ServiceError(str(exc), LIMIT_ERROR) from exc
    raise ServiceError("cannot resolve group specification", PARSE_ERROR)


def _parse_el(group: HybridGroup, text: str) -> HybridElement:
    try:
        return parse_element(group, text)
    except (HybridError, PcError, ValueError) as exc:
        raise ServiceError(f"bad element {text!r}: {exc}", PARSE_ERROR) from exc


# -- expression evaluation ---------------------------------------------------

_TOKEN = re.compile(r"\(|\)|\*|[^()*]+")
_EXPONENT = re.compile(r"\^\s*(-?\d+)$")


def evaluate_expression(group: HybridGroup, text: str) -> HybridElement:
    """Grammar: expr := term ('*' term)*; term := '(' expr ')' ('^' int)?
    | element literal.  Powers require parentheses so the '^' of b-word
    exponents inside literals stays unambiguous."""
    tokens = [t.strip() for t in _TOKEN.findall(text)]
    tokens = [t for t in tokens if t]
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else None

    def expr() -> HybridElement:
        nonlocal pos
        out = term()
        while peek() == "*":
            pos += 1
            out = out * term()
        return out

    def term() -> HybridElement:
        nonlocal pos
        tok = peek()
        if tok is None:
            raise ServiceError("unexpected end of expression", PARSE_ERROR)
        if tok == "(":
            pos += 1
            out = expr()
            if peek() != ")":
                raise ServiceError("missing ')'", PARSE_ERROR)
            pos += 1
            nxt = peek()
            if nxt is not None and nxt.startswith("^"):
                m = _EXPONENT.fullmatch(nxt)
                if not m:
                    raise ServiceError(f"bad exponent {nxt!r}", PARSE_ERROR)
                pos += 1
                out = out ** int(m.group(1))
            return out
        pos += 1
        return _parse_el(group, tok)

    out = expr()
    if pos != len(tokens):
        raise ServiceError(f"trailing tokens in expression: {tokens[pos:]}", PARSE_ERROR)
    return out


# -- handlers ----------------------------------------------------------------

def h_build(doc: dict) -> dict:
    group = resolve_group(doc)
    return {
        "name": group.name,
        "order": group.order(),
        "b_order": group.b_pres.order(),
        "factor_order": group.factor_chain.order(),
        "factor_degree": group.degree,
        "rules": len(group.factor_rules.rules),
        "definition": group_to_dict(group),
    }


def h_order(group_spec, element: str | None = None) -> dict:
    group = resolve_group(group_spec)
    if element is None:
        return {"order": group.order()}
    return {"order": evaluate_expression(group, element).order()}


def h_eval(group_spec, expression: str, want_order=False, want_image=False) -> dict:
    group = resolve_group(group_spec)
    el = evaluate_expression(group, expression)
    out = {"element": str(el)}
    if want_order:
        out["order"] = el.order()
    if want_image:
        out["image"] = str(el.nu())
    return out


def h_subgroup(group_spec, generators: list[str], op: str = "order",
               element: str | None = None, u_generators: list[str] | None = None) -> dict:
    group = resolve_group(group_spec)
    gens = [_parse_el(group, t) for t in generators]
    try:
        bits = subgrp.hybrid_bits(group, gens)
    except PermError as exc:
        raise ServiceError(str(exc), LIMIT_ERROR) from exc
    if op == "order":
        return {"order": bits.order()}
    if op == "contains":
        if element is None:
            raise ServiceError("contains needs an element", PARSE_ERROR)
        el = _parse_el(group, element)
        return {"contains": subgrp.sub_contains(bits, el)}
    if op == "transversal":
        u_gens = [_parse_el(group, t) for t in (u_generators or [])]
        try:
            u_bits = subgrp.hybrid_bits(group, u_gens)
            t = subgrp.transversal(bits, u_bits)
        except subgrp.SubgroupError as exc:
            raise ServiceError(str(exc), VALIDATION_ERROR) from exc
        return {"index": t.index}
    raise ServiceError(f"unknown subgroup op {op!r}", PARSE_ERROR)


def h_transversal(group_spec, s_generators: list[str], u_generators: list[str]) -> dict:
    group = resolve_group(group_spec)
    s_bits = subgrp.hybrid_bits(group, [_parse_el(group, t) for t in s_generators])
    u_bits = subgrp.hybrid_bits(group, [_parse_el(group, t) for t in u_generators])
    try:
        t = subgrp.transversal(s_bits, u_bits)
    except subgrp.SubgroupError as exc:
        raise ServiceError(str(exc), VALIDATION_ERROR) from exc
    return {
        "index": t.index,
        "representatives": [str(r) for r in t.representatives()],
    }


def h_factor(group_spec, n_generators: list[str]) -> dict:
    group = resolve_group(group_spec)
    n_bits = subgrp.hybrid_bits(group, [_parse_el(group, t) for t in n_generators])
    try:
        quotient, _ = subgrp.factor_group(group, n_bits)
    except (subgrp.SubgroupError, PcError) as exc:
        raise ServiceError(str(exc), VALIDATION_ERROR) from exc
    return {
        "order": quotient.order(),
        "b_order": quotient.b_pres.order(),
        "definition": group_to_dict(quotient),
    }


def h_validate(group_spec, strict=False, samples=10_000, seed=12345) -> dict:
    group = resolve_group(group_spec)
    fx = fixtures() if isinstance(group_spec, str) else {}
    reference = fx[group_spec].reference if group_spec in fx else None
    report = validate(group, reference=reference, strict=strict,
                      samples=samples, seed=seed)
    return {
        "overall": report.overall,
        "checks": [
            {"name": name, "ok": ok, "witness": None if w is None else str(w)}
            for name, ok, w in report.checks
        ],
    }


# -- bench -------------------------------------------------------------------

OP_LABELS = {
    "mul": "x*y",
    "inv": "x^-1",
    "order": "|x|",
    "subgroup-order": "sub-order",
}


@dataclass
class BenchReport:
    group: str
    order: int
    element_bytes: int
    rows: list[dict] = field(default_factory=list)
    op_log: list[str] | None = None

    def table(self) -> str:
        head = f"group: {self.group}  order: {self.order}  b-part-bytes: {self.element_bytes}"
        cols = f"{'op':<12} {'samples':>8} {'mean-ms':>10} {'median-ms':>10}"
        lines = [head, cols]
        for row in self.rows:
            lines.append(
                f"{row['op']:<12} {row['samples']:>8} "
                f"{row['mean_ms']:>10.4f} {row['median_ms']:>10.4f}"
            )
        return "\n".join(lines)

    def machine_lines(self) -> list[str]:
        return [
            f"bench group={self.group} op={row['op']} samples={row['samples']} "
            f"mean_ms={row['mean_ms']:.6f} median_ms={row['median_ms']:.6f}"
            for row in self.rows
        ]


def h_bench(group_spec, ops=("mul", "inv"), samples=1000, seed=1,
            log_ops=False) -> BenchReport:
    group = resolve_group(group_spec)
    if samples <= 0:
        raise ServiceError("sample count must be positive", PARSE_ERROR)
    for op in ops:
        if op not in OP_LABELS:
            raise ServiceError(f"unknown op {op!r}", PARSE_ERROR)
    name = group.name or (group_spec if isinstance(group_spec, str) else "group")
    rng = Random(seed)
    pool = [group.random_element(rng) for _ in range(min(samples, 512))]
    report = BenchReport(
        group=name,
        order=group.order(),
        element_bytes=len(pool[0].bpart.pack()),
        op_log=[] if log_ops else None,
    )
    for op in ops:
        times = []
        for s in range(samples):
            if op == "mul":
                a = pool[rng.randrange(len(pool))]
                b = pool[rng.randrange(len(pool))]
                if log_ops:
                    report.op_log.append(f"mul {a} {b}")
                t0 = time.perf_counter()
                _ = a * b
                times.append(time.perf_counter() - t0)
            elif op == "inv":
                a = pool[rng.randrange(len(pool))]
                if log_ops:
                    report.op_log.append(f"inv {a}")
                t0 = time.perf_counter()
                _ = a.inv()
                times.append(time.perf_counter() - t0)
            elif op == "order":
                a = pool[rng.randrange(len(pool))]
                if log_ops:
                    report.op_log.append(f"order {a}")
                t0 = time.perf_counter()
                _ = a.order()
                times.append(time.perf_counter() - t0)
            else:  # subgroup-order
                a = pool[rng.randrange(len(pool))]
                b = pool[rng.randrange(len(pool))]
                if log_ops:
                    report.op_log.append(f"subgroup-order {a} {b}")
                t0 = time.perf_counter()
                bits = subgrp.hybrid_bits(group, [a, b])
                _ = bits.order()
                times.append(time.perf_counter() - t0)
        report.rows.append({
            "op": OP_LABELS[op],
            "samples": samples,
            "mean_ms": statistics.mean(times) * 1000,
            "median_ms": statistics.median(times) * 1000,
        })
    return report


# -- presentation files ------------------------------------------------------

def parse_presentation_text(text: str) -> MonoidPresentation:
    """Format: "presentation <k>", "orders o1 .. ok", then relation lines
    "<word> = <word>" in x<i> word syntax ("1" for the empty word)."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or not lines[0].startswith("presentation"):
        raise ServiceError("presentation file must start with 'presentation <k>'", PARSE_ERROR)
    try:
        k = int(lines[0].split()[1])
        if not lines[1].startswith("orders"):
            raise ServiceError("second line must be 'orders ...'", PARSE_ERROR)
        orders = [int(t) for t in lines[1].split()[1:]]
        if len(orders) != k:
            raise ServiceError("need one order per generator", PARSE_ERROR)
        relations = []
        for ln in lines[2:]:
            if "=" not in ln:
                raise ServiceError(f"relation line needs '=': {ln!r}", PARSE_ERROR)
            l, r = ln.split("=", 1)
            relations.append((parse_word_text(l, k), parse_word_text(r, k)))
    except (ValueError, IndexError, RwsError) as exc:
        raise ServiceError(f"bad presentation file: {exc}", PARSE_ERROR) from exc
    return MonoidPresentation(k, relations, orders)


def h_complete(presentation_text: str, max_rules: int = 10_000) -> dict:
    pres = parse_presentation_text(presentation_text)
    try:
        rws = knuth_bendix(pres, max_rules=max_rules)
    except CompletionLimitExceeded as exc:
        raise ServiceError(f"completion limit exceeded: {exc}", LIMIT_ERROR) from exc
    return {
        "rules": format_rules_text(rws),
        "rule_count": len(rws.rules),
        "confluent": rws.complete,
    }


def parse_rules_file(text: str) -> RewritingSystem:
    """Format: "alphabet <k>" then rule lines "l -> r"."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or not lines[0].startswith("alphabet"):
        raise ServiceError("rules file must start with 'alphabet <k>'", PARSE_ERROR)
    try:
        k = int(lines[0].split()[1])
        pairs = parse_rules_text("\n".join(lines[1:]), k)
    except (ValueError, IndexError, RwsError) as exc:
        raise ServiceError(f"bad rules file: {exc}", PARSE_ERROR) from exc
    from .rws import Rule

    return RewritingSystem(k, [Rule(l, r) for l, r in pairs], ShortLex(k), complete=False)


def h_check_confluence(rules_text: str) -> dict:
    rws = parse_rules_file(rules_text)
    ok, witness = is_confluent(rws)
    return {"confluent": ok, "witness": None if witness is None else str(list(witness))}


# -- FastAPI app -------------------------------------------------------------

def create_app():
    from fastapi import FastAPI, HTTPException
    from pydantic import BaseModel, Field

    app = FastAPI(title="hybridgrp", version="0.1.0")
    registry: dict[str, HybridGroup] = {}

    class GroupRef(BaseModel):
        fixture: str | None = None
        group_id: str | None = None
        definition: dict | None = None

    def look_up(ref: GroupRef) -> HybridGroup:
        if ref.group_id is not None:
            if ref.group_id not in registry:
                raise HTTPException(404, f"unknown group id {ref.group_id}")
            return registry[ref.group_id]
        spec = ref.fixture if ref.fixture is not None else ref.definition
        if spec is None:
            raise HTTPException(422, "need fixture, group_id, or definition")
        return guard(resolve_group, spec)

    def guard(fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ServiceError as exc:
            raise HTTPException(400 + exc.code, str(exc))

    class BuildRequest(GroupRef):
        pass

    class EvalRequest(GroupRef):
        expression: str
        order: bool = False
        image: bool = False

    class OrderRequest(GroupRef):
        element: str | None = None

    class SubgroupRequest(GroupRef):
        generators: list[str]
        op: str = "order"
        element: str | None = None
        u_generators: list[str] | None = None

    class TransversalRequest(GroupRef):
        s_generators: list[str]
        u_generators: list[str]

    class FactorRequest(GroupRef):
        n_generators: list[str]

    class ValidateRequest(GroupRef):
        strict: bool = False
        samples: int = 10_000
        seed: int = 12345

    class BenchRequest(GroupRef):
        ops: list[str] = Field(default_factory=lambda: ["mul", "inv"])
        samples: int = 1000
        seed: int = 1
        log_ops: bool = False

    class CompleteRequest(BaseModel):
        presentation: str
        max_rules: int = 10_000

    class ConfluenceRequest(BaseModel):
        rules: str

    @app.post("/groups")
    def register_group(req: BuildRequest):
        group = look_up(req)
        gid = uuid.uuid4().hex[:12]
        registry[gid] = group
        summary = guard(h_build, group_to_dict(group))
        summary["group_id"] = gid
        return summary

    @app.post("/build")
    def build(req: BuildRequest):
        group = look_up(req)
        return guard(h_build, group_to_dict(group))

    @app.post("/eval")
    def eval_(req: EvalRequest):
        return guard(h_eval, look_up(req), req.expression, req.order, req.image)

    @app.post("/order")
    def order(req: OrderRequest):
        return guard(h_order, look_up(req), req.element)

    @app.post("/subgroup")
    def subgroup(req: SubgroupRequest):
        return guard(h_subgroup, look_up(req), req.generators, req.op,
                     req.element, req.u_generators)

    @app.post("/transversal")
    def transversal(req: TransversalRequest):
        return guard(h_transversal, look_up(req), req.s_generators, req.u_generators)

    @app.post("/factor")
    def factor(req: FactorRequest):
        return guard(h_factor, look_up(req), req.n_generators)

    @app.post("/validate")
    def validate_(req: ValidateRequest):
        return guard(h_validate, look_up(req), req.strict, req.samples, req.seed)

    @app.post("/bench")
    def bench(req: BenchRequest):
        report = guard(h_bench, look_up(req), tuple(req.ops), req.samples,
                       req.seed, req.log_ops)
        return {
            "table": report.table(),
            "rows": report.rows,
            "machine": report.machine_lines(),
            "op_log": report.op_log,
        }

    @app.post("/complete")
    def complete(req: CompleteRequest):
        return guard(h_complete, req.presentation, req.max_rules)

    @app.post("/check-confluence")
    def check_confluence(req: ConfluenceRequest):
        return guard(h_check_confluence, req.rules)

    return app
