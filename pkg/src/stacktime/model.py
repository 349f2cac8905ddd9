"""JSON model files.

A model file declares an environment, named programs, a base vocabulary,
an optional stack of layers, statements, trajectories, contributor
sections, phenomenal claims and analysis parameters. See ``MODEL_SCHEMA``
and the README for the full format.

Ingredient references are either a program name (a string) or an inline
list of states. They are resolved extensionally against the vocabulary of
the layer they belong to.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

from .exceptions import (
    ChangeConstraintError,
    EnumerationBudgetError,
    InvalidTaskError,
    ModelError,
    StackTimeError,
)
from .gap import DEFAULT_ENVIRONMENT_CAP, ContributorModel, PhenClaim, Scheduler, build_contributor_env, simulate
from .kernel import (
    DEFAULT_VOCABULARY_CAP,
    Environment,
    Program,
    Statement,
    Task,
    Vocabulary,
    is_statement,
)
from .stack import StackState, abstractor
from .temporal import DEFAULT_WINDOW_CAP, Trajectory

__all__ = [
    "SCHEMA_VERSION",
    "MODEL_SCHEMA",
    "BUNDLED",
    "Caps",
    "ContributorSection",
    "ClaimSpec",
    "ModelFile",
    "resolve_model_path",
    "load_model",
    "parse_model",
    "model_to_dict",
]

SCHEMA_VERSION = 1
BUNDLED = ("thm3_witness", "alternating_n2", "synchronous_n3", "sparse_ticks_100", "stack_demo")

_state = {"type": ["string", "integer"]}
_ingredient = {"oneOf": [{"type": "string"}, {"type": "array", "items": _state}]}
_ingredients = {"type": "array", "items": _ingredient}

MODEL_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "environment"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "description": {"type": "string"},
        "environment": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "size": {"type": "integer", "minimum": 1},
                "labels": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                "contributors": {
                    "type": "object",
                    "required": ["n"],
                    "additionalProperties": False,
                    "properties": {
                        "n": {"type": "integer", "minimum": 2},
                        "data_size": {"type": "integer", "minimum": 1},
                    },
                },
            },
            "oneOf": [{"required": ["size"]}, {"required": ["labels"]}, {"required": ["contributors"]}],
        },
        "programs": {
            "type": "object",
            "additionalProperties": {
                "oneOf": [{"const": "*"}, {"type": "array", "items": _state}],
            },
        },
        "vocabulary": _ingredients,
        "stack": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["policy"],
                "additionalProperties": False,
                "properties": {
                    "policy": _ingredients,
                    "task": {
                        "type": "object",
                        "required": ["inputs"],
                        "additionalProperties": False,
                        "properties": {
                            "inputs": {"type": "array", "items": _ingredients},
                            "outputs": {"type": "array", "items": _ingredients},
                        },
                    },
                    "vocabulary": _ingredients,
                },
            },
        },
        "statements": {
            "type": "object",
            "additionalProperties": {
                "oneOf": [
                    _ingredients,
                    {
                        "type": "object",
                        "required": ["ingredients"],
                        "additionalProperties": False,
                        "properties": {
                            "layer": {"type": "integer", "minimum": 0},
                            "ingredients": _ingredients,
                        },
                    },
                ]
            },
        },
        "trajectories": {
            "type": "object",
            "additionalProperties": {
                "oneOf": [
                    {"type": "array", "items": _state, "minItems": 1},
                    {
                        "type": "object",
                        "required": ["simulate"],
                        "additionalProperties": False,
                        "properties": {"simulate": {"type": "string"}},
                    },
                ]
            },
        },
        "contributors": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["capacity", "steps"],
                "additionalProperties": False,
                "properties": {
                    "n": {"type": "integer", "minimum": 2},
                    "data_size": {"type": "integer", "minimum": 1},
                    "capacity": {"type": "integer", "minimum": 1},
                    "steps": {"type": "integer", "minimum": 1},
                    "paired_capacity": {"type": "integer", "minimum": 1},
                    "scheduler": {
                        "type": "object",
                        "additionalProperties": False,
                        "properties": {
                            "kind": {"enum": ["round-robin", "uniform-random", "bursty"]},
                            "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
                            "burst_length": {"type": "integer", "minimum": 1},
                        },
                    },
                },
            },
        },
        "claims": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["statement", "trajectory", "t", "delta"],
                "additionalProperties": False,
                "properties": {
                    "statement": {"type": "string"},
                    "trajectory": {"type": "string"},
                    "t": {"type": "integer", "minimum": 0},
                    "delta": {"type": "integer", "minimum": 0},
                },
            },
        },
        "analysis": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "delta_max": {"type": ["integer", "null"], "minimum": 0},
                "caps": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "vocabulary": {"type": "integer", "minimum": 0},
                        "windows": {"type": "integer", "minimum": 1},
                        "environment": {"type": "integer", "minimum": 1},
                    },
                },
            },
        },
    },
}


@dataclass(frozen=True)
class Caps:
    vocabulary: int = DEFAULT_VOCABULARY_CAP
    windows: int = DEFAULT_WINDOW_CAP
    environment: int = DEFAULT_ENVIRONMENT_CAP


@dataclass(frozen=True)
class ContributorSection:
    model: ContributorModel
    scheduler: Scheduler
    steps: int
    paired_capacity: int | None = None

    def partner(self) -> ContributorSection:
        """The same run on the other side of the capacity threshold."""
        n = self.model.n
        c = self.paired_capacity
        if c is None:
            c = n if self.model.capacity < n else n - 1
        m = ContributorModel(n, self.model.data_size, c)
        return ContributorSection(m, self.scheduler, self.steps, self.model.capacity)


@dataclass(frozen=True)
class ClaimSpec:
    statement: str
    trajectory: str
    t: int
    delta: int


@dataclass
class ModelFile:
    env: Environment
    programs: dict[str, Program]
    stack: StackState
    statements: dict[str, tuple[int, Statement]]
    trajectories: dict[str, Trajectory]
    trajectory_sources: dict[str, str | None]
    contributors: dict[str, ContributorSection]
    claims: dict[str, ClaimSpec]
    delta_max: int | None = None
    caps: Caps = field(default_factory=Caps)
    contributor_env: tuple[int, int] | None = None
    description: str = ""

    def statement(self, name: str) -> tuple[int, Statement]:
        try:
            return self.statements[name]
        except KeyError:
            raise ModelError(f"unresolved reference: no statement named {name!r}") from None

    def trajectory(self, name: str) -> Trajectory:
        try:
            return self.trajectories[name]
        except KeyError:
            raise ModelError(f"unresolved reference: no trajectory named {name!r}") from None

    def contributor(self, name: str) -> ContributorSection:
        try:
            return self.contributors[name]
        except KeyError:
            raise ModelError(f"unresolved reference: no contributor section named {name!r}") from None

    def phen_claims(self) -> list[tuple[PhenClaim, str]]:
        out = []
        for name, spec in self.claims.items():
            layer, l = self.statement(spec.statement)
            if layer != self.stack.depth:
                raise ModelError(f"claim {name!r}: statement {spec.statement!r} is not over the top layer")
            out.append((PhenClaim(l, spec.t, spec.delta, name), spec.trajectory))
        return out


def resolve_model_path(ref: str | Path) -> Path:
    """A filesystem path, or the name of a bundled fixture."""
    p = Path(ref)
    if p.exists():
        return p
    name = str(ref).removesuffix(".json")
    candidate = resources.files("stacktime") / "fixtures" / f"{name}.json"
    if candidate.is_file():
        return Path(str(candidate))
    raise ModelError(f"model file {str(ref)!r} not found and not a bundled fixture {BUNDLED}")


def load_model(ref: str | Path) -> ModelFile:
    path = resolve_model_path(ref)
    text = path.read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelError(f"{path}: parse error at line {e.lineno}, column {e.colno}: {e.msg}") from e
    return parse_model(doc, source=str(path))


class _Resolver:
    def __init__(self, env: Environment, programs: dict[str, Program]):
        self.env = env
        self.programs = programs

    def program(self, ref, where) -> Program:
        if isinstance(ref, str):
            try:
                return self.programs[ref]
            except KeyError:
                raise ModelError(f"{where}: unresolved reference to program {ref!r}") from None
        try:
            return self.env.program(ref)
        except ValueError as e:
            raise ModelError(f"{where}: {e}") from None

    def statement(self, refs, v: Vocabulary, where) -> Statement:
        idx = set()
        for ref in refs:
            p = self.program(ref, where)
            if p not in v:
                raise ModelError(f"{where}: program {ref!r} is not in the vocabulary of this layer")
            idx.add(v.index(p))
        if not is_statement(idx, v):
            raise ModelError(f"{where}: ingredients {refs!r} have an empty joint truth set")
        return Statement(frozenset(idx))

    def vocabulary(self, refs, where) -> Vocabulary:
        progs = [self.program(r, where) for r in refs]
        try:
            return Vocabulary(self.env, progs)
        except ValueError as e:
            raise ModelError(f"{where}: {e}") from None


def parse_model(doc: dict, source: str = "<model>") -> ModelFile:
    try:
        jsonschema.validate(doc, MODEL_SCHEMA)
    except jsonschema.ValidationError as e:
        where = "/".join(map(str, e.absolute_path)) or "<root>"
        raise ModelError(f"{source}: schema violation at {where}: {e.message}") from None
    try:
        return _parse(doc, source)
    except (ModelError, StackTimeError):
        raise
    except ValueError as e:
        raise ModelError(f"{source}: {e}") from e


def _parse(doc, source):
    analysis = doc.get("analysis", {})
    caps = Caps(**analysis.get("caps", {}))
    env_doc = doc["environment"]
    programs: dict[str, Program] = {}
    contributor_env = None
    base_refs = doc.get("vocabulary")
    if "contributors" in env_doc:
        cm = ContributorModel(env_doc["contributors"]["n"], env_doc["contributors"].get("data_size", 2), 1)
        env, v0, _ = build_contributor_env(cm, caps.environment)
        contributor_env = (cm.n, cm.data_size)
        for i in range(cm.n):
            programs[f"p{i + 1}"] = v0[i]
        if base_refs is None:
            base_refs = [f"p{i + 1}" for i in range(cm.n)]
    elif "labels" in env_doc:
        env = Environment.from_labels(env_doc["labels"])
    else:
        env = Environment(env_doc["size"])
    if env.size > caps.environment:
        raise EnumerationBudgetError("environment", env.size, caps.environment)

    resolver = _Resolver(env, programs)
    for name, members in doc.get("programs", {}).items():
        if name in programs:
            raise ModelError(f"{source}: program {name!r} is already defined")
        programs[name] = env.full() if members == "*" else resolver.program(members, f"program {name!r}")

    base = resolver.vocabulary(base_refs or [], "vocabulary")
    if len(base) > caps.vocabulary:
        raise EnumerationBudgetError("base vocabulary", len(base), caps.vocabulary)
    vocabs = [base]
    policies, tasks = [], []
    for i, layer in enumerate(doc.get("stack", [])):
        v = vocabs[-1]
        where = f"stack layer {i}"
        pi = resolver.statement(layer["policy"], v, f"{where} policy")
        task_doc = layer.get("task", {"inputs": [[]]})
        inputs = [resolver.statement(s, v, f"{where} task input") for s in task_doc["inputs"]]
        if "outputs" in task_doc:
            outputs = [resolver.statement(s, v, f"{where} task output") for s in task_doc["outputs"]]
            task = Task(frozenset(inputs), frozenset(outputs))
        else:
            task = Task.derive(inputs, pi, v, caps.vocabulary)
        try:
            task.check(v, caps.vocabulary)
        except InvalidTaskError as e:
            raise ModelError(f"{where}: {e}") from None
        if "vocabulary" in layer:
            nxt = resolver.vocabulary(layer["vocabulary"], f"{where} vocabulary")
        else:
            nxt = abstractor(v, pi, caps.vocabulary)
        policies.append(pi)
        tasks.append(task)
        vocabs.append(nxt)
    stack = StackState(tuple(vocabs), tuple(policies), tuple(tasks))

    statements = {}
    for name, sdoc in doc.get("statements", {}).items():
        if isinstance(sdoc, list):
            layer, refs = stack.depth, sdoc
        else:
            layer, refs = sdoc.get("layer", stack.depth), sdoc["ingredients"]
        if layer > stack.depth:
            raise ModelError(f"statement {name!r}: layer {layer} above stack depth {stack.depth}")
        statements[name] = (layer, resolver.statement(refs, vocabs[layer], f"statement {name!r}"))

    contributors = {}
    for name, cdoc in doc.get("contributors", {}).items():
        n = cdoc.get("n", contributor_env[0] if contributor_env else None)
        ds = cdoc.get("data_size", contributor_env[1] if contributor_env else 2)
        if n is None:
            raise ModelError(f"contributor section {name!r} needs n")
        if contributor_env and (n, ds) != contributor_env:
            raise ModelError(f"contributor section {name!r} does not match the contributor environment")
        try:
            m = ContributorModel(n, ds, cdoc["capacity"])
            sched = Scheduler(**cdoc.get("scheduler", {}))
        except ValueError as e:
            raise ModelError(f"contributor section {name!r}: {e}") from None
        if m.env_size > caps.environment:
            raise EnumerationBudgetError(f"contributor section {name!r} environment", m.env_size, caps.environment)
        contributors[name] = ContributorSection(m, sched, cdoc["steps"], cdoc.get("paired_capacity"))

    trajectories, sources = {}, {}
    for name, tdoc in doc.get("trajectories", {}).items():
        if isinstance(tdoc, dict):
            sec_name = tdoc["simulate"]
            if sec_name not in contributors:
                raise ModelError(f"trajectory {name!r}: unresolved reference to contributor section {sec_name!r}")
            if contributor_env is None:
                raise ModelError(f"trajectory {name!r}: simulated trajectories need a contributor environment")
            sec = contributors[sec_name]
            trajectories[name] = simulate(sec.model, sec.scheduler, sec.steps)
            sources[name] = sec_name
            continue
        try:
            states = tuple(env.state(s) for s in tdoc)
            trajectories[name] = Trajectory(states, env)
        except ChangeConstraintError as e:
            raise ModelError(f"trajectory {name!r}: change constraint violated at index {e.index}") from e
        except ValueError as e:
            raise ModelError(f"trajectory {name!r}: {e}") from None
        sources[name] = None

    claims = {}
    for name, cdoc in doc.get("claims", {}).items():
        if cdoc["statement"] not in statements:
            raise ModelError(f"claim {name!r}: unresolved reference to statement {cdoc['statement']!r}")
        if cdoc["trajectory"] not in trajectories:
            raise ModelError(f"claim {name!r}: unresolved reference to trajectory {cdoc['trajectory']!r}")
        claims[name] = ClaimSpec(cdoc["statement"], cdoc["trajectory"], cdoc["t"], cdoc["delta"])

    return ModelFile(
        env=env,
        programs=programs,
        stack=stack,
        statements=statements,
        trajectories=trajectories,
        trajectory_sources=sources,
        contributors=contributors,
        claims=claims,
        delta_max=analysis.get("delta_max"),
        caps=caps,
        contributor_env=contributor_env,
        description=doc.get("description", ""),
    )


def _state_ref(env, s):
    return env.labels[s] if env.labels is not None else s


def model_to_dict(model: ModelFile) -> dict:
    """Serialize a resolved model; :func:`parse_model` of the result is equal to ``model``."""
    env = model.env
    names = {p.mask: name for name, p in model.programs.items()}

    def prog(p):
        return names.get(p.mask, [_state_ref(env, s) for s in p])

    def stmt(l, v):
        return [prog(v[i]) for i in l]

    def ordered(stmts):
        return sorted(stmts, key=Statement.sort_key)

    doc = {"schema_version": SCHEMA_VERSION}
    if model.description:
        doc["description"] = model.description
    if model.contributor_env is not None:
        n, ds = model.contributor_env
        doc["environment"] = {"contributors": {"n": n, "data_size": ds}}
        auto = {f"p{i + 1}" for i in range(n)}
        own = {name: p for name, p in model.programs.items() if name not in auto}
    else:
        doc["environment"] = {"labels": list(env.labels)} if env.labels is not None else {"size": env.size}
        own = model.programs
    if own:
        doc["programs"] = {
            name: "*" if p.mask == env.full_mask else [_state_ref(env, s) for s in p] for name, p in own.items()
        }
    stack = model.stack
    doc["vocabulary"] = [prog(p) for p in stack.base]
    if stack.depth:
        layers = []
        for i in range(stack.depth):
            v = stack.vocabularies[i]
            layers.append({
                "policy": stmt(stack.policies[i], v),
                "task": {
                    "inputs": [stmt(s, v) for s in ordered(stack.tasks[i].inputs)],
                    "outputs": [stmt(s, v) for s in ordered(stack.tasks[i].outputs)],
                },
                "vocabulary": [prog(p) for p in stack.vocabularies[i + 1]],
            })
        doc["stack"] = layers
    if model.statements:
        doc["statements"] = {
            name: {"layer": layer, "ingredients": stmt(l, stack.vocabularies[layer])}
            for name, (layer, l) in model.statements.items()
        }
    if model.contributors:
        doc["contributors"] = {}
        for name, sec in model.contributors.items():
            d = {
                "n": sec.model.n,
                "data_size": sec.model.data_size,
                "capacity": sec.model.capacity,
                "steps": sec.steps,
                "scheduler": {"kind": sec.scheduler.kind, "seed": sec.scheduler.seed,
                              "burst_length": sec.scheduler.burst_length},
            }
            if sec.paired_capacity is not None:
                d["paired_capacity"] = sec.paired_capacity
            doc["contributors"][name] = d
    if model.trajectories:
        doc["trajectories"] = {
            name: ({"simulate": model.trajectory_sources[name]} if model.trajectory_sources.get(name)
                   else [_state_ref(env, s) for s in tau])
            for name, tau in model.trajectories.items()
        }
    if model.claims:
        doc["claims"] = {
            name: {"statement": c.statement, "trajectory": c.trajectory, "t": c.t, "delta": c.delta}
            for name, c in model.claims.items()
        }
    doc["analysis"] = {
        "delta_max": model.delta_max,
        "caps": {"vocabulary": model.caps.vocabulary, "windows": model.caps.windows,
                 "environment": model.caps.environment},
    }
    return doc
