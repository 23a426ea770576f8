"""Scenario runner: `covalgebra run | list | describe | schema`."""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from importlib import resources
from pathlib import Path

import jsonschema

from . import __version__
from .scenario_schema import SCHEMA, TASK_TYPES

EXIT_OK, EXIT_FAIL, EXIT_SCHEMA = 0, 1, 2


class ScenarioError(Exception):
    """Invalid scenario file; carries a 1-based line/column when known."""

    def __init__(self, msg, line=None, col=None, path=None):
        super().__init__(msg)
        self.msg, self.line, self.col, self.path = msg, line, col, path

    def __str__(self):
        loc = f"line {self.line}, column {self.col}: " if self.line is not None else ""
        where = f" (at {'/'.join(str(p) for p in self.path)})" if self.path else ""
        return f"{loc}{self.msg}{where}"


class SkipTask(Exception):
    pass


# -- locating JSON paths in source text ---------------------------------------------

_decoder = json.JSONDecoder()


def _ws(text, i):
    while i < len(text) and text[i] in " \t\r\n":
        i += 1
    return i


def locate(text, path):
    """Offset of the value at `path` (keys / indices) in the JSON text."""
    i = _ws(text, 0)
    for step in path:
        if i >= len(text):
            break
        if text[i] == "{":
            i = _ws(text, i + 1)
            found = False
            while i < len(text) and text[i] != "}":
                key, i = json.decoder.scanstring(text, i + 1)
                i = _ws(text, i)
                i = _ws(text, i + 1)          # past ':'
                if key == step:
                    found = True
                    break
                _, i = _decoder.raw_decode(text, i)
                i = _ws(text, i)
                if text[i] == ",":
                    i = _ws(text, i + 1)
            if not found:
                break
        elif text[i] == "[":
            i = _ws(text, i + 1)
            for _ in range(int(step)):
                _, i = _decoder.raw_decode(text, i)
                i = _ws(text, i)
                if text[i] == ",":
                    i = _ws(text, i + 1)
        else:
            break
    return i


def line_col(text, offset):
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


# -- loading and validation -------------------------------------------------------

def bundled_dir():
    return resources.files("covalgebra") / "scenarios"


def bundled_scenarios():
    return sorted(p.name for p in bundled_dir().iterdir() if p.name.endswith(".json"))


def resolve_scenario(name) -> Path:
    p = Path(name)
    if p.exists():
        return p
    for cand in (name, f"{name}.json"):
        q = bundled_dir() / cand
        if q.is_file():
            return Path(str(q))
    raise ScenarioError(f"scenario file not found: {name}")


_BUILTIN_REPS = ("regular", "trivial")


def validate_scenario(data, text=""):
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: (len(list(e.absolute_path)), str(e.message)))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        path = list(err.absolute_path)
        line, col = line_col(text, locate(text, path)) if text else (None, None)
        raise ScenarioError(f"schema violation: {err.message}", line, col, path)
    _check_references(data, text)
    return data


def _check_references(data, text):
    reps = data.get("representations", {})
    known = set(reps) | set(_BUILTIN_REPS)

    def bad(path, label):
        line, col = line_col(text, locate(text, path)) if text else (None, None)
        raise ScenarioError(f"undeclared representation {label!r}", line, col, path)

    for name, spec in reps.items():
        if isinstance(spec, dict):
            for key in ("sum", "tensor"):
                for i, lab in enumerate(spec.get(key, [])):
                    if lab not in known or lab == name:
                        bad(["representations", name, key, i], lab)
            if "dual" in spec and (spec["dual"] not in known or spec["dual"] == name):
                bad(["representations", name, "dual"], spec["dual"])
    seen = set()
    for t, task in enumerate(data["tasks"]):
        tid = task.get("id", f"{task['type']}-{t}")
        if tid in seen:
            line, col = line_col(text, locate(text, ["tasks", t])) if text else (None, None)
            raise ScenarioError(f"duplicate task id {tid!r}", line, col, ["tasks", t])
        seen.add(tid)
        if "rep" in task and task["rep"] not in known:
            bad(["tasks", t, "rep"], task["rep"])
        mod = task.get("module")
        if isinstance(mod, dict):
            for key in ("hom_functor", "trivial_with_rep"):
                if key in mod and mod[key] not in known:
                    bad(["tasks", t, "module", key], mod[key])
        if isinstance(task.get("pairs"), list):
            for i, pr in enumerate(task["pairs"]):
                for j, lab in enumerate(pr):
                    if lab not in known:
                        bad(["tasks", t, "pairs", i, j], lab)
        if isinstance(task.get("reps"), list) and task["type"] == "witness":
            for i, lab in enumerate(task["reps"]):
                if lab not in known:
                    bad(["tasks", t, "reps", i], lab)


def load_scenario(path):
    path = resolve_scenario(str(path))
    text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from None
    return validate_scenario(data, text), path


# -- execution context -------------------------------------------------------------

class Context:
    """Lazily built objects shared by the tasks of one scenario."""

    def __init__(self, data, flat_bound=None):
        from .algebra.numberfield import parse_field
        from .covers import LaurentAlgebra
        self.data = data
        self.field = parse_field(_field_spec(data["field"]))
        self.base = LaurentAlgebra(self.field, int(data["num_vars"]))
        self.flat_bound = flat_bound
        self._cache = {}

    def _get(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    @property
    def cover(self):
        from .covers import build_cover, parse_recipe
        return self._get("cover", lambda: build_cover(parse_recipe(self.data["cover"], self.base), self.base))

    @property
    def action(self):
        from .covers import parse_action
        from .groups import build_group
        act = self._get("action", lambda: parse_action(self.data.get("action", "canonical"), self.cover,
                                                        build_group))
        if act is None:
            raise SkipTask("no Galois action for this cover over the given field")
        return act

    @property
    def group(self):
        return self.action.group

    @property
    def symmetry(self):
        return self._get("symmetry", self._build_symmetry)

    def _build_symmetry(self):
        from .covers import ExtraSymmetry, MonomialSubstitution
        spec = self.data.get("extra_symmetry")
        if not spec:
            return None
        gens, labels = [], []
        for g in spec["generators"]:
            sig = MonomialSubstitution(tuple(Fraction(str(c)) for c in g["scalars"]),
                                       tuple(tuple(int(a) for a in e) for e in g["exponents"]))
            S = [[self.base.parse(x) for x in row] for row in g["matrix"]]
            gens.append((sig, S))
            labels.append(g.get("label", f"s{len(labels)}"))
        sym = ExtraSymmetry(gens, labels, spec.get("order"))
        sym.validate(self.cover, self.action)
        return sym

    @property
    def push(self):
        from .connmod import pushforward
        return self._get("push", lambda: pushforward(self.cover, self.action, self.symmetry))

    def irreducibles(self):
        from .groups import irreducibles
        return irreducibles(self.group, self.field)

    def rep(self, label):
        return self._get(("rep", label), lambda: self._build_rep(label))

    def _build_rep(self, label):
        import random
        from .groups import (GroupRep, direct_sum, dual_rep, random_rep, regular_rep, tensor_rep,
                             trivial_rep)
        G, k = self.group, self.field
        spec = self.data.get("representations", {}).get(label, label)
        if spec == "regular":
            return regular_rep(G, k)
        if spec == "trivial":
            return trivial_rep(G, k)
        if "irreducible" in spec:
            key = spec["irreducible"]
            blocks = self.irreducibles()
            if isinstance(key, int):
                if key >= len(blocks):
                    raise ValueError(f"only {len(blocks)} irreducibles")
                return blocks[key].rep
            for b in blocks:
                if b.label == key:
                    return b.rep
            raise ValueError(f"no irreducible labelled {key!r}; have {[b.label for b in blocks]}")
        if "sum" in spec:
            return direct_sum(*[self.rep(x) for x in spec["sum"]])
        if "tensor" in spec:
            return tensor_rep(self.rep(spec["tensor"][0]), self.rep(spec["tensor"][1]))
        if "dual" in spec:
            return dual_rep(self.rep(spec["dual"]))
        if "random" in spec:
            r = spec["random"]
            return random_rep(G, k, random.Random(r.get("seed", 0)), r.get("max_dim", 4))
        if "matrices" in spec:
            from .algebra.numberfield import elem_from_json
            gens = {int(g): [[elem_from_json(k, x) for x in row] for row in M]
                    for g, M in spec["matrices"].items()}
            return GroupRep.from_generators(G, k, gens, label)
        raise ValueError(f"cannot build representation {label!r}")

    def module(self, ref):
        from .connmod import ConnectionModule, hom_functor, trivial_with_rep
        if ref == "pushforward":
            return self.push
        if "hom_functor" in ref:
            return hom_functor(self.rep(ref["hom_functor"]), self.push)
        if "trivial_with_rep" in ref:
            return trivial_with_rep(self.rep(ref["trivial_with_rep"]), self.base)
        gam = [[[self.base.parse(x) for x in row] for row in G] for G in ref["gamma"]]
        M = ConnectionModule(self.base, len(gam[0]), gam, label="explicit")
        M.validate()
        return M

    def bound(self, task):
        if self.flat_bound is not None:
            return self.flat_bound
        if "bound" in task:
            return task["bound"]
        return self.data.get("flat_bound")


def _field_spec(spec):
    if isinstance(spec, str):
        return {"kind": "rational"}
    return spec


def _mat(M):
    return [[str(x) for x in row] for row in M]


# -- tasks ------------------------------------------------------------------------------

def task_beta_check(ctx, task):
    from .covers import beta_check, check_derivation_galois_commutation, lift_is_unique
    B, act = ctx.cover, ctx.action
    r = beta_check(B, act)
    data = r.to_json()
    data["lift_unique"] = lift_is_unique(B)
    if r.galois:
        data["commutation"] = all(check_derivation_galois_commutation(B, act, v)
                                  for v in ctx.base.coordinate_derivations())
        return r.galois and data["commutation"], data
    return False, data


def task_constants(ctx, task):
    from .covers import constants
    ring = constants(ctx.cover)
    return True, ring.to_json()


def task_base_change(ctx, task):
    from .algebra.numberfield import field_to_json, parse_field
    from .covers import base_change_constants, constants, galois_closure_field
    ring = constants(ctx.cover)
    if "field" in task:
        L = parse_field(_field_spec(task["field"]))
    else:
        L = galois_closure_field(ring, ctx.field)
        if L is None:
            raise SkipTask("no cyclotomic splitting field of order <= 120")
    res = base_change_constants(ctx.cover, L)
    data = {"field": field_to_json(L), "constants_dim": ring.dim, "components": res.components,
            "constants_dim_after": res.ring.dim}
    return res.components == ring.dim, data


def task_components(ctx, task):
    from .covers import components
    comps = components(ctx.cover, ctx.action)
    data = {"count": len(comps), "components": [c.to_json() for c in comps]}
    return True, data


def task_decompose(ctx, task):
    from .connmod import decompose_pushforward
    from .groups import central_idempotents
    D = decompose_pushforward(ctx.push, central_idempotents(ctx.group, ctx.field))
    return D.invertible, D.to_json()


def task_hom_functor(ctx, task):
    from .connmod import hom_functor
    V = ctx.rep(task["rep"])
    H = hom_functor(V, ctx.push)
    data = {"rep": task["rep"], "dim": V.dim, "rank": H.rank, "module": H.to_json()}
    return H.rank == V.dim, data


def task_flat_sections(ctx, task):
    from .connmod import flat_sections, is_trivializable
    M = ctx.module(task["module"])
    bound = ctx.bound(task)
    sols = flat_sections(M, bound)
    data = {"rank": M.rank, "bound": bound, **sols.to_json(), "trivializable": is_trivializable(M, sols)}
    ok = sols.dim <= M.rank
    if task.get("compare_bounded"):
        if ctx.base.nvars != 1:
            raise SkipTask("bounded comparison is only run in one variable")
        alt = flat_sections(M, bound, method="box")
        data["bounded_dim"] = alt.dim
        data["solvers_agree"] = alt.dim == sols.dim and [[str(x) for x in v] for v in alt.basis] == \
            [[str(x) for x in v] for v in sols.basis]
        ok = ok and data["solvers_agree"]
    return ok, data


def task_fully_faithful(ctx, task):
    from .connmod import hom_connection, hom_functor
    from .groups import hom_dim
    pairs = task.get("pairs", "all_irreducibles")
    if pairs == "all_irreducibles":
        blocks = ctx.irreducibles()
        items = [((a.label, a.rep), (b.label, b.rep)) for a in blocks for b in blocks]
    else:
        items = [((a, ctx.rep(a)), (b, ctx.rep(b))) for a, b in pairs]
    rows, ok = [], True
    Hs = {}
    for (la, Va), (lb, Vb) in items:
        for lab, V in ((la, Va), (lb, Vb)):
            if lab not in Hs:
                Hs[lab] = hom_functor(V, ctx.push)
        d = hom_connection(Hs[la], Hs[lb]).dim
        e = hom_dim(Va, Vb)
        rows.append({"V": la, "W": lb, "hom_dim": d, "character_inner": e})
        ok = ok and d == e
    return ok, {"pairs": rows}


def task_regular_rep(ctx, task):
    from .connmod import regular_rep_check
    r = regular_rep_check(ctx.push)
    return r.ok, r.to_json()


def task_witness(ctx, task):
    from .connmod import ConstantsObstruction, bundle_finiteness
    from .groups import finiteness_witness, verify_witness
    reps = task.get("reps", "all_irreducibles")
    if reps == "all_irreducibles":
        items = [(b.label, b.rep) for b in ctx.irreducibles()]
    else:
        items = [(lab, ctx.rep(lab)) for lab in reps]
    rows, ok = [], True
    for lab, V in items:
        fw = finiteness_witness(V)
        good = verify_witness(V, fw.witness)
        rows.append({"rep": lab, "witness": str(fw.witness), "verified": good, "S_V": fw.classes})
        ok = ok and good
    data = {"witnesses": rows}
    if task.get("bundle"):
        try:
            bf = bundle_finiteness(ctx.push, ctx.symmetry)
            data["bundle"] = bf.to_json()
            ok = ok and bf.beta.ok and bf.rank_check
        except ConstantsObstruction as exc:
            data["bundle"] = {"obstruction": str(exc), "witness": str(exc.witness),
                              "constants_dim": exc.constants_dim}
            ok = False
    return ok, data


def task_roundtrip(ctx, task):
    from .connmod import galois_equivalence_roundtrip
    M = ctx.module(task["module"])
    r = galois_equivalence_roundtrip(M, ctx.cover, ctx.action)
    return r.ok, r.to_json()


def task_intermediate(ctx, task):
    from .connmod import intermediate_compatibility, kummer_tower
    from .groups import irreducibles
    tower = kummer_tower(task["n_big"], task["n_mid"], ctx.base)
    blocks = irreducibles(tower.mid_action.group, ctx.field)
    sel = task.get("reps", "all_irreducibles")
    idx = range(len(blocks)) if sel == "all_irreducibles" else sel
    rows, ok = [], True
    for i in idx:
        r = intermediate_compatibility(tower, blocks[i].rep)
        rows.append({"rep": blocks[i].label, "ok": r.ok, **r.to_json()})
        ok = ok and r.ok
    return ok, {"normal_subgroup": tower.normal, "results": rows}


def task_component_compat(ctx, task):
    from .connmod import component_compatibility
    r = component_compatibility(ctx.cover, ctx.action, ctx.rep(task["rep"]), task.get("component", 0))
    return r.ok, r.to_json()


def _pbw_pair(ctx, spec):
    from .lie_rinehart import derivation_pair, euler_pair, free_pair
    if spec == "derivations":
        return derivation_pair(ctx.base)
    if spec == "euler":
        return euler_pair(ctx.base)
    if spec == "sl2":
        names = ctx.base.var_names()
        x = names[0]
        z = ["0"] * ctx.base.nvars

        def vf(f):
            return [f] + z[1:]
        br = [[["0", "0", "0"], ["1", "0", "0"], ["0", "2", "0"]],
              [["-1", "0", "0"], ["0", "0", "0"], ["0", "0", "1"]],
              [["0", "-2", "0"], ["0", "0", "-1"], ["0", "0", "0"]]]
        return free_pair(ctx.base, [vf("1"), vf(x), vf(f"{x}^2")], br, ["e", "h", "f"])
    return free_pair(ctx.base, spec["anchor"], spec.get("bracket"), spec.get("names"))


def task_pbw_suite(ctx, task):
    import random
    from .lie_rinehart import action_check, confluence_check, graded_dimension_check, uea_base_change
    pair = _pbw_pair(ctx, task["pair"])
    pair.validate()
    rng = random.Random(task.get("seed", 0))
    data = {"rank": pair.rank}
    data["confluence_failures"] = confluence_check(pair, rng, task.get("trials", 200))
    data["action_failures"] = action_check(pair, rng, task.get("action_trials", 50))
    gr = graded_dimension_check(pair, task.get("degree", 5))
    data["graded"] = gr.to_json()
    ok = data["confluence_failures"] == 0 and data["action_failures"] == 0 and gr.ok
    bc = [uea_base_change(pair)]
    if task.get("base_change", False):
        bc.append(uea_base_change(pair, ctx.cover))
    data["base_change"] = [c.to_json() for c in bc]
    ok = ok and all(c.ok for c in bc)
    return ok, data


TASKS = {
    "beta_check": task_beta_check,
    "constants": task_constants,
    "base_change": task_base_change,
    "components": task_components,
    "decompose": task_decompose,
    "hom_functor": task_hom_functor,
    "flat_sections": task_flat_sections,
    "fully_faithful_check": task_fully_faithful,
    "regular_rep_check": task_regular_rep,
    "witness": task_witness,
    "roundtrip": task_roundtrip,
    "intermediate": task_intermediate,
    "component_compat": task_component_compat,
    "pbw_suite": task_pbw_suite,
}
assert set(TASKS) == set(TASK_TYPES)

TASK_DOCS = {
    "beta_check": "Galois criterion for the declared action: the map B (x)_A B -> prod_g B, "
                  "x (x) y -> (x g(y))_g, must be square, have rank-one invariants and a unit "
                  "determinant. On success also checks that every lifted coordinate derivation "
                  "commutes with the group action.",
    "constants": "Ring of constants c(B): the common kernel of all lifted derivations, with its "
                 "structure constants, minimal polynomial and idempotents.",
    "base_change": "Extends scalars to a splitting field of c(B) (default: the smallest cyclotomic "
                   "one) and checks that the number of connected components equals dim_k c(B).",
    "components": "Connected components e B cut by primitive idempotents of c(B), with stabilizers "
                  "and the induced actions.",
    "decompose": "Isotypic decomposition of the pushforward: f_*O = sum over irreducibles rho of "
                 "e_rho f_*O, where e_rho are the central primitive idempotents of k[N]. Checks the "
                 "direct-sum certificate (block basis matrix) has unit determinant.",
    "hom_functor": "The module Hom_{k[N]}(V, f_*O) as the Reynolds image in f_*O (x) V^*, with the "
                   "induced connection; its rank must equal dim V.",
    "flat_sections": "Flat sections of a connection module. Complete solvers for residue-form and "
                     "one-variable simple-pole connections, bounded box search otherwise; "
                     "checks dim <= rank and optionally cross-checks against the bounded solver.",
    "fully_faithful_check": "Compares flat equivariant morphisms H(V) -> H(W) with the character "
                            "inner product <chi_V, chi_W>. Fails when c(B)^G != k.",
    "regular_rep_check": "Evaluation at 1 identifies H(k[N]) with the pushforward; compares k[N] "
                         "with the flat endomorphisms of the pushforward and reports the excess "
                         "dimension when constants are larger than k.",
    "witness": "Finiteness witnesses f(V) = g(V) read off the tensor-multiplication matrix, checked "
               "on characters; with bundle=true the regular witness is re-checked on the bundle "
               "side through the beta isomorphism, which requires c(B)^G = k.",
    "roundtrip": "Unit M -> (f^* M)^N of pullback followed by invariants is a flat isomorphism; "
                 "for the pushforward also certifies f^* f_*O = O_B^{|N|} via beta.",
    "intermediate": "Kummer tower y_big^(n_big/n_mid) = y_mid: Hom over N/N0 into the intermediate "
                    "cover matches Hom over N of the inflation into the big cover.",
    "component_compat": "Cutting by a component idempotent identifies Hom_{k[N]}(V, B) with "
                        "Hom_{k[H0]}(V restricted to the stabilizer, e0 B).",
    "pbw_suite": "PBW normal forms in U(L): associativity on random triples, action homomorphism, "
                 "associated graded dimensions against Sym, and base-change certificates.",
}


@dataclass
class TaskResult:
    id: str
    type: str
    status: str
    reason: str | None
    data: dict
    seconds: float = 0.0
    traceback: str | None = dc_field(default=None)

    def to_json(self):
        out = {"id": self.id, "type": self.type, "status": self.status}
        if self.reason:
            out["reason"] = self.reason
        out["data"] = self.data
        return out


def _jsonable(x):
    return json.loads(json.dumps(x, default=str))


def _check_expect(expect, data):
    for k, v in expect.items():
        if k not in data:
            return f"expected key {k!r} missing from result"
        if _jsonable(data[k]) != v:
            return f"expected {k} = {v!r}, got {_jsonable(data[k])!r}"
    return None


def run_task(ctx, index, task) -> TaskResult:
    tid = task.get("id", f"{task['type']}-{index}")
    expected = task.get("expect_status", "pass")
    t0 = time.perf_counter()
    try:
        ok, data = TASKS[task["type"]](ctx, task)
        data = _jsonable(data)
    except SkipTask as exc:
        return TaskResult(tid, task["type"], "skipped", str(exc), {}, time.perf_counter() - t0)
    except Exception as exc:  # unexpected: reported, exit code 1
        return TaskResult(tid, task["type"], "fail", f"{type(exc).__name__}: {exc}", {},
                          time.perf_counter() - t0, traceback.format_exc())
    dt = time.perf_counter() - t0
    mismatch = _check_expect(task.get("expect", {}), data)
    if mismatch:
        return TaskResult(tid, task["type"], "fail", mismatch, data, dt)
    if ok and expected == "pass":
        return TaskResult(tid, task["type"], "pass", None, data, dt)
    if not ok and expected == "expected_fail":
        return TaskResult(tid, task["type"], "expected_fail", task.get("note"), data, dt)
    if ok:
        return TaskResult(tid, task["type"], "fail", "check passed but was declared expected_fail", data, dt)
    return TaskResult(tid, task["type"], "fail", "check failed", data, dt)


_WORKER_CTX = {}


def _worker(payload):
    text, index, flat_bound = payload
    data = json.loads(text)
    key = (text, flat_bound)
    ctx = _WORKER_CTX.get(key)
    if ctx is None:
        ctx = _WORKER_CTX[key] = Context(data, flat_bound)
    return run_task(ctx, index, data["tasks"][index])


def run_scenario(data, parallel=None, flat_bound=None):
    tasks = data["tasks"]
    if parallel is not None and parallel != 1 and len(tasks) > 1:
        text = json.dumps(data, sort_keys=True)
        workers = parallel or min(len(tasks), os.cpu_count() or 2)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_worker, [(text, i, flat_bound) for i in range(len(tasks))]))
    ctx = Context(data, flat_bound)
    return [run_task(ctx, i, t) for i, t in enumerate(tasks)]


# -- reports ----------------------------------------------------------------------------

def build_report(data, results):
    counts = {s: sum(r.status == s for r in results) for s in ("pass", "fail", "expected_fail", "skipped")}
    return {
        "tool": "covalgebra",
        "version": __version__,
        "schema_version": data["schema_version"],
        "scenario": data["name"],
        "summary": counts,
        "ok": counts["fail"] == 0,
        "tasks": [r.to_json() for r in results],
        "scenario_echo": data,
    }


def report_text(report, results):
    lines = [f"scenario {report['scenario']} (covalgebra {report['version']})"]
    for r in results:
        tag = r.status.upper()
        line = f"  [{tag}] {r.id} ({r.type})"
        if r.reason:
            line += f": {r.reason}"
        lines.append(line)
    s = report["summary"]
    lines.append(f"summary: {s['pass']} pass, {s['expected_fail']} expected_fail, "
                 f"{s['skipped']} skipped, {s['fail']} fail")
    return "\n".join(lines) + "\n"


def write_reports(report, results, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report, indent=2) + "\n")
    (out / "report.txt").write_text(report_text(report, results))
    timing = {r.id: round(r.seconds, 4) for r in results}
    (out / "timing.json").write_text(json.dumps(timing, indent=2) + "\n")
    tracebacks = [f"== {r.id}\n{r.traceback}" for r in results if r.traceback]
    if tracebacks:
        (out / "errors.txt").write_text("\n".join(tracebacks))
    return out


def report_dir_for(name, cli_dir):
    env = os.environ.get("COVALGEBRA_REPORT_DIR")
    root = env or cli_dir or "covalgebra-reports"
    return Path(root) / name


# -- commands ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    """Settings for one `covalgebra run` invocation."""
    scenario: str
    parallel: int | None = None     # None: in-process; 0: one worker per task (capped by cpu count)
    report_dir: str | None = None
    flat_bound: int | None = None   # overrides task and scenario bounds
    quiet: bool = False

    @classmethod
    def from_args(cls, args):
        return cls(args.scenario, args.parallel, args.report_dir, args.flat_bound, args.quiet)


def cmd_run(args):
    cfg = RunConfig.from_args(args)
    try:
        data, path = load_scenario(cfg.scenario)
    except ScenarioError as exc:
        print(f"{cfg.scenario}: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    results = run_scenario(data, cfg.parallel, cfg.flat_bound)
    report = build_report(data, results)
    out = write_reports(report, results, report_dir_for(data["name"], cfg.report_dir))
    if not cfg.quiet:
        sys.stdout.write(report_text(report, results))
        print(f"reports written to {out}")
    return EXIT_OK if report["ok"] else EXIT_FAIL


def list_scenarios():
    rows = []
    for name in bundled_scenarios():
        data = json.loads((bundled_dir() / name).read_text())
        rows.append((name, data.get("description", "")))
    return rows


def cmd_list(args):
    for name, desc in list_scenarios():
        print(f"{name:32s} {desc}")
    return EXIT_OK


def describe(task):
    if task not in TASK_DOCS:
        raise KeyError(task)
    return f"{task}: {TASK_DOCS[task]}"


def cmd_describe(args):
    try:
        print(describe(args.task))
    except KeyError:
        print(f"unknown task {args.task!r}; known tasks: {', '.join(TASK_TYPES)}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_schema(args):
    text = json.dumps(SCHEMA, indent=2) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _parallel_arg(s):
    n = int(s)
    if n < 0:
        raise argparse.ArgumentTypeError("worker count must be >= 0")
    return n


def make_parser():
    p = argparse.ArgumentParser(prog="covalgebra", description="Run covalgebra scenario files.")
    p.add_argument("--version", action="version", version=f"covalgebra {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a scenario file (path or bundled name)")
    r.add_argument("scenario")
    r.add_argument("--parallel", nargs="?", const=0, type=_parallel_arg, default=None,
                   help="run tasks in worker processes (optional worker count; 0 = auto)")
    r.add_argument("--report-dir", default=None)
    r.add_argument("--flat-bound", type=int, default=None,
                   help="exponent bound for the bounded flat-section search")
    r.add_argument("--quiet", action="store_true")
    r.set_defaults(func=cmd_run)
    sub.add_parser("list", help="list bundled scenarios").set_defaults(func=cmd_list)
    d = sub.add_parser("describe", help="document a task type")
    d.add_argument("task")
    d.set_defaults(func=cmd_describe)
    s = sub.add_parser("schema", help="print the scenario JSON schema")
    s.add_argument("--output", default=None)
    s.set_defaults(func=cmd_schema)
    return p


def main(argv=None):
    args = make_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
