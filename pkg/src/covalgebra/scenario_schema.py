"""JSON schema for scenario files (version 1)."""

SCHEMA_VERSION = "1"

_rational = {"oneOf": [{"type": "integer"}, {"type": "string", "pattern": r"^-?\d+(/\d+)?$"}]}
_laurent = {"oneOf": [{"type": "integer"}, {"type": "string"}, {"type": "object"}]}
_matrix = {"type": "array", "items": {"type": "array", "items": _laurent}}

_field = {
    "oneOf": [
        {"type": "string", "enum": ["Q", "rational"]},
        {"type": "object", "additionalProperties": False, "required": ["kind"],
         "properties": {"kind": {"enum": ["rational"]}}},
        {"type": "object", "additionalProperties": False, "required": ["kind", "n"],
         "properties": {"kind": {"const": "cyclotomic"}, "n": {"type": "integer", "minimum": 1, "maximum": 120}}},
        {"type": "object", "additionalProperties": False, "required": ["kind", "coeffs"],
         "properties": {"kind": {"const": "min_poly"}, "coeffs": {"type": "array", "items": _rational,
                                                                  "minItems": 2},
                        "label": {"type": "string"}}},
    ]
}

_recipe = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["kummer", "constant", "tensor", "disjoint", "split", "trivial", "explicit"]},
        "n": {"type": "integer", "minimum": 1},
        "u": _laurent,
        "cyclotomic": {"type": "integer", "minimum": 1},
        "min_poly": {"type": "array", "items": _rational},
        "name": {"type": "string"},
        "left": {"$ref": "#/$defs/recipe"},
        "right": {"$ref": "#/$defs/recipe"},
        "sub": {"$ref": "#/$defs/recipe"},
        "copies": {"type": "integer", "minimum": 1},
        "rank": {"type": "integer", "minimum": 1},
        "mult": {"type": "array"},
        "labels": {"type": "array", "items": {"type": "string"}},
    },
    "additionalProperties": False,
    "allOf": [
        {"if": {"properties": {"kind": {"const": "kummer"}}}, "then": {"required": ["n"]}},
        {"if": {"properties": {"kind": {"const": "tensor"}}}, "then": {"required": ["left", "right"]}},
        {"if": {"properties": {"kind": {"const": "disjoint"}}}, "then": {"required": ["copies", "sub"]}},
        {"if": {"properties": {"kind": {"const": "split"}}}, "then": {"required": ["copies"]}},
        {"if": {"properties": {"kind": {"const": "explicit"}}}, "then": {"required": ["rank", "mult"]}},
    ],
}

_group = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["cyclic", "dihedral", "symmetric", "quaternion8", "direct_product", "units",
                          "holomorph", "trivial", "table"]},
        "n": {"type": "integer", "minimum": 1},
        "left": {"$ref": "#/$defs/group"},
        "right": {"$ref": "#/$defs/group"},
        "table": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
        "label": {"type": "string"},
        "names": {"type": "array", "items": {"type": "string"}},
    },
    "additionalProperties": False,
}

_action = {
    "oneOf": [
        {"const": "canonical"},
        {"type": "object", "additionalProperties": False, "required": ["group"],
         "properties": {"group": {"$ref": "#/$defs/group"}, "trivial": {"type": "boolean"},
                        "generators": {"type": "object", "additionalProperties": _matrix},
                        "unchecked": {"type": "boolean"}}},
    ]
}

_symmetry = {
    "type": "object", "additionalProperties": False, "required": ["generators"],
    "properties": {
        "order": {"type": "integer", "minimum": 1},
        "generators": {"type": "array", "minItems": 1, "items": {
            "type": "object", "additionalProperties": False, "required": ["scalars", "exponents", "matrix"],
            "properties": {"scalars": {"type": "array", "items": _rational},
                           "exponents": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
                           "matrix": _matrix, "label": {"type": "string"}}}},
    },
}

_rep = {
    "oneOf": [
        {"enum": ["regular", "trivial"]},
        {"type": "object", "additionalProperties": False, "required": ["irreducible"],
         "properties": {"irreducible": {"oneOf": [{"type": "string"}, {"type": "integer", "minimum": 0}]}}},
        {"type": "object", "additionalProperties": False, "required": ["sum"],
         "properties": {"sum": {"type": "array", "items": {"type": "string"}, "minItems": 1}}},
        {"type": "object", "additionalProperties": False, "required": ["tensor"],
         "properties": {"tensor": {"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2}}},
        {"type": "object", "additionalProperties": False, "required": ["dual"],
         "properties": {"dual": {"type": "string"}}},
        {"type": "object", "additionalProperties": False, "required": ["random"],
         "properties": {"random": {"type": "object", "additionalProperties": False,
                                   "properties": {"seed": {"type": "integer"},
                                                  "max_dim": {"type": "integer", "minimum": 1}}}}},
        {"type": "object", "additionalProperties": False, "required": ["matrices"],
         "properties": {"matrices": {"type": "object", "additionalProperties": {
             "type": "array", "items": {"type": "array", "items": _rational}}}}},
    ]
}

_module_ref = {
    "oneOf": [
        {"const": "pushforward"},
        {"type": "object", "additionalProperties": False, "required": ["hom_functor"],
         "properties": {"hom_functor": {"type": "string"}}},
        {"type": "object", "additionalProperties": False, "required": ["trivial_with_rep"],
         "properties": {"trivial_with_rep": {"type": "string"}}},
        {"type": "object", "additionalProperties": False, "required": ["gamma"],
         "properties": {"gamma": {"type": "array", "items": _matrix, "minItems": 1}}},
    ]
}

_pair = {
    "oneOf": [
        {"enum": ["derivations", "euler", "sl2"]},
        {"type": "object", "additionalProperties": False, "required": ["anchor"],
         "properties": {"anchor": {"type": "array", "items": {"type": "array", "items": _laurent}},
                        "bracket": {"type": "array"},
                        "names": {"type": "array", "items": {"type": "string"}}}},
    ]
}

_common_task = {
    "id": {"type": "string"},
    "type": {"type": "string"},
    "expect": {"type": "object"},
    "expect_status": {"enum": ["pass", "expected_fail"]},
    "note": {"type": "string"},
}

_TASK_PARAMS = {
    "beta_check": {},
    "constants": {},
    "base_change": {"field": _field},
    "components": {},
    "decompose": {},
    "hom_functor": {"rep": {"type": "string"}},
    "flat_sections": {"module": _module_ref, "bound": {"type": "integer", "minimum": 0},
                      "compare_bounded": {"type": "boolean"}},
    "fully_faithful_check": {"pairs": {"oneOf": [
        {"const": "all_irreducibles"},
        {"type": "array", "items": {"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2}}]}},
    "regular_rep_check": {},
    "witness": {"reps": {"oneOf": [{"const": "all_irreducibles"},
                                   {"type": "array", "items": {"type": "string"}}]},
                "bundle": {"type": "boolean"}},
    "roundtrip": {"module": _module_ref},
    "intermediate": {"n_big": {"type": "integer", "minimum": 2}, "n_mid": {"type": "integer", "minimum": 1},
                     "reps": {"oneOf": [{"const": "all_irreducibles"},
                                        {"type": "array", "items": {"type": "integer", "minimum": 0}}]}},
    "component_compat": {"rep": {"type": "string"}, "component": {"type": "integer", "minimum": 0}},
    "pbw_suite": {"pair": _pair, "trials": {"type": "integer", "minimum": 1},
                  "action_trials": {"type": "integer", "minimum": 1},
                  "degree": {"type": "integer", "minimum": 0, "maximum": 6},
                  "seed": {"type": "integer"}, "base_change": {"type": "boolean"}},
}

_REQUIRED = {
    "hom_functor": ["rep"],
    "flat_sections": ["module"],
    "roundtrip": ["module"],
    "intermediate": ["n_big", "n_mid"],
    "component_compat": ["rep"],
    "pbw_suite": ["pair"],
}

TASK_TYPES = tuple(_TASK_PARAMS)


def _task_schema():
    branches = []
    for name, params in _TASK_PARAMS.items():
        props = dict(_common_task)
        props.update(params)
        props["type"] = {"const": name}
        branches.append({"if": {"properties": {"type": {"const": name}}, "required": ["type"]},
                         "then": {"properties": props, "additionalProperties": False,
                                  "required": ["type"] + _REQUIRED.get(name, [])}})
    return {"type": "object", "required": ["type"],
            "properties": {"type": {"enum": list(TASK_TYPES)}},
            "allOf": branches}


SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$id": "https://example.invalid/covalgebra/scenario.schema.json",
    "title": "covalgebra scenario",
    "type": "object",
    "additionalProperties": False,
    "required": ["schema_version", "name", "field", "num_vars", "cover", "tasks"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string", "pattern": r"^[A-Za-z0-9_.-]+$"},
        "description": {"type": "string"},
        "field": _field,
        "num_vars": {"type": "integer", "minimum": 1, "maximum": 3},
        "cover": {"$ref": "#/$defs/recipe"},
        "action": _action,
        "extra_symmetry": _symmetry,
        "representations": {"type": "object", "additionalProperties": _rep},
        "flat_bound": {"type": "integer", "minimum": 0},
        "tasks": {"type": "array", "minItems": 1, "items": _task_schema()},
    },
    "$defs": {"recipe": _recipe, "group": _group},
}
