"""Read and write declarative model files (YAML or JSON).

Knowledge bases are given as id lists rather than matrices::

    operands: [water]
    machines: [m1]
    independent_buffers: [b1]
    transporters: [h1]
    transformation_processes:
      - {id: treat, machines: [m1], inputs: [water], outputs: [water]}
    holding_processes:
      - {id: carry_water, inputs: [water], outputs: [water]}
    capabilities:
      holding: [[carry_water, m1], [carry_water, b1], [carry_water, h1]]
      transport: [[m1, m1, m1], [b1, b1, b1], [h1, m1, b1]]
    constraints:
      transformation: [[treat, m1]]
      refined_transport: [[carry_water, h1, m1, b1]]
    options:
      holding_is_operand: true
      functional_graph: [[treat, "carry_water:m1->b1"]]

``capabilities.transport`` rows are (resource, origin, destination).
Transformation hosts may come from each process's ``machines`` list,
from ``capabilities.transformation`` pairs, or from both.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import yaml

from .boolmat import BoolMatrix
from .model import (
    E_DANGLING,
    E_DUPLICATE,
    E_SCHEMA,
    Process,
    SystemModel,
    ValidationError,
    make_model,
)

_TOP = {
    "name", "operands", "machines", "independent_buffers", "transporters",
    "transformation_processes", "holding_processes", "capabilities",
    "constraints", "options",
}


def load_document(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError(E_SCHEMA, f"cannot read model file: {exc.strerror}", str(path)) from exc
    try:
        doc = json.loads(text) if path.suffix.lower() == ".json" else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ValidationError(E_SCHEMA, f"unparseable document: {exc}", str(path)) from exc
    if not isinstance(doc, dict):
        raise ValidationError(E_SCHEMA, "top level must be a mapping", str(path))
    return doc


def _list(doc, key, where, required=False):
    val = doc.get(key)
    if val is None:
        if required:
            raise ValidationError(E_SCHEMA, f"missing required section {key!r}", f"{where}{key}")
        return []
    if not isinstance(val, list):
        raise ValidationError(E_SCHEMA, f"{key!r} must be a list", f"{where}{key}")
    return val


def _ids(doc, key):
    out = []
    for k, item in enumerate(_list(doc, key, "")):
        if not isinstance(item, (str, int)) or isinstance(item, bool):
            raise ValidationError(E_SCHEMA, "ids must be strings", f"{key}[{k}]")
        out.append(str(item))
    return out


def _index(ids, what, locs):
    idx = {}
    for k, i in enumerate(ids):
        if i in idx:
            raise ValidationError(E_DUPLICATE, f"duplicate {what} id {i!r}", locs[k])
        idx[i] = k
    return idx


def _locs(*sections):
    return [f"{name}[{k}]" for name, items in sections for k in range(len(items))]


def _ref(idx, key, what, where):
    key = str(key)
    if key not in idx:
        raise ValidationError(E_DANGLING, f"undeclared {what} {key!r}", where)
    return idx[key]


def _tuples(section, key, arity, where):
    rows = _list(section, key, where + ".")
    for k, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != arity:
            raise ValidationError(E_SCHEMA, f"entries must have {arity} fields", f"{where}.{key}[{k}]")
    return rows


def _processes(doc, key, op_idx):
    procs = []
    for k, p in enumerate(_list(doc, key, "")):
        where = f"{key}[{k}]"
        if not isinstance(p, dict) or "id" not in p:
            raise ValidationError(E_SCHEMA, "process entries need an 'id'", where)
        sets = []
        for field in ("inputs", "outputs"):
            vals = p.get(field, [])
            if not isinstance(vals, list):
                raise ValidationError(E_SCHEMA, f"{field!r} must be a list", f"{where}.{field}")
            for op in vals:
                _ref(op_idx, op, "operand", f"{where}.{field}")
            sets.append({str(v) for v in vals})
        verb = p.get("verb")
        procs.append((Process(str(p["id"]), sets[0], sets[1], None if verb is None else str(verb)), p))
    return procs


def model_from_dict(doc: dict, source: str = "<memory>") -> SystemModel:
    """Compile a parsed document into a validated :class:`SystemModel`."""
    unknown = sorted(set(doc) - _TOP)
    if unknown:
        raise ValidationError(E_SCHEMA, f"unknown section(s) {unknown}", source)
    _list(doc, "operands", "", required=True)
    operands = _ids(doc, "operands")
    machines = _ids(doc, "machines")
    buffers = _ids(doc, "independent_buffers")
    transporters = _ids(doc, "transporters")
    op_idx = _index(operands, "operand", _locs(("operands", operands)))
    res_ids = machines + buffers + transporters
    res_idx = _index(res_ids, "resource", _locs(("machines", machines), ("independent_buffers", buffers),
                                                ("transporters", transporters)))
    bs_idx = {r: k for k, r in enumerate(machines + buffers)}
    m_idx = {r: k for k, r in enumerate(machines)}

    tps = _processes(doc, "transformation_processes", op_idx)
    hps = _processes(doc, "holding_processes", op_idx)
    _index([p.id for p, _ in tps] + [p.id for p, _ in hps], "process",
           _locs(("transformation_processes", tps), ("holding_processes", hps)))
    t_idx = {p.id: k for k, (p, _) in enumerate(tps)}
    g_idx = {p.id: k for k, (p, _) in enumerate(hps)}
    n_BS, n_R = len(bs_idx), len(res_ids)

    J_M = np.zeros((len(tps), len(machines)), dtype=np.int8)
    for k, (_p, raw) in enumerate(tps):
        hosts = raw.get("machines", [])
        if not isinstance(hosts, list):
            raise ValidationError(E_SCHEMA, "'machines' must be a list", f"transformation_processes[{k}].machines")
        for m in hosts:
            J_M[k, _ref(m_idx, m, "machine", f"transformation_processes[{k}].machines")] = 1

    caps = doc.get("capabilities") or {}
    cons = doc.get("constraints") or {}
    opts = doc.get("options") or {}
    for name, sec in (("capabilities", caps), ("constraints", cons), ("options", opts)):
        if not isinstance(sec, dict):
            raise ValidationError(E_SCHEMA, "section must be a mapping", name)

    for k, (p, m) in enumerate(_tuples(caps, "transformation", 2, "capabilities")):
        where = f"capabilities.transformation[{k}]"
        J_M[_ref(t_idx, p, "transformation process", where), _ref(m_idx, m, "machine", where)] = 1

    J_gamma = np.zeros((len(hps), n_R), dtype=np.int8)
    for k, (g, r) in enumerate(_tuples(caps, "holding", 2, "capabilities")):
        where = f"capabilities.holding[{k}]"
        J_gamma[_ref(g_idx, g, "holding process", where), _ref(res_idx, r, "resource", where)] = 1

    J_H = np.zeros((n_BS * n_BS, n_R), dtype=np.int8)
    for k, (r, y1, y2) in enumerate(_tuples(caps, "transport", 3, "capabilities")):
        where = f"capabilities.transport[{k}]"
        v = _ref(res_idx, r, "resource", where)
        J_H[n_BS * _ref(bs_idx, y1, "buffer", where) + _ref(bs_idx, y2, "buffer", where), v] = 1

    K_M = np.zeros_like(J_M)
    for k, (p, m) in enumerate(_tuples(cons, "transformation", 2, "constraints")):
        where = f"constraints.transformation[{k}]"
        K_M[_ref(t_idx, p, "transformation process", where), _ref(m_idx, m, "machine", where)] = 1

    K_Hbar = np.zeros((len(hps) * n_BS * n_BS, n_R), dtype=np.int8)
    for k, (g, r, y1, y2) in enumerate(_tuples(cons, "refined_transport", 4, "constraints")):
        where = f"constraints.refined_transport[{k}]"
        row = (n_BS * n_BS * _ref(g_idx, g, "holding process", where)
               + n_BS * _ref(bs_idx, y1, "buffer", where) + _ref(bs_idx, y2, "buffer", where))
        K_Hbar[row, _ref(res_idx, r, "resource", where)] = 1

    flag = opts.get("holding_is_operand", False)
    if not isinstance(flag, bool):
        raise ValidationError(E_SCHEMA, "must be true or false", "options.holding_is_operand")

    model = make_model(
        operands=operands, machines=machines, buffers=buffers, transporters=transporters,
        transformations=[p for p, _ in tps], holdings=[p for p, _ in hps],
        J_M=J_M, J_gamma=J_gamma, J_H=J_H, K_M=K_M, K_Hbar=K_Hbar,
        holding_is_operand=flag, name=str(doc.get("name", Path(source).stem)),
    )
    pairs = _tuples(opts, "functional_graph", 2, "options")
    if pairs or "functional_graph" in opts:
        w_idx = {pid: w for w, pid in enumerate(model.process_ids)}
        rows, cols = [], []
        for k, (a, b) in enumerate(pairs):
            where = f"options.functional_graph[{k}]"
            rows.append(_ref(w_idx, a, "process", where))
            cols.append(_ref(w_idx, b, "process", where))
        A_P = BoolMatrix((model.n_P, model.n_P), rows, cols)
        model = SystemModel(model.operands, model.resources, model.transformations, model.holdings,
                            model.J_M, model.J_gamma, model.J_H, model.K_M, model.K_Hbar, A_P,
                            model.holding_is_operand, model.name)
    return model


def ingest(path) -> SystemModel:
    """Load, validate and compile a model file; locations are prefixed with the path."""
    doc = load_document(path)
    try:
        return model_from_dict(doc, str(path))
    except ValidationError as exc:
        where = f"{path}: {exc.location}" if exc.location and exc.location != str(path) else str(path)
        raise ValidationError(exc.code, exc.message, where) from None


def model_to_dict(model: SystemModel) -> dict:
    """Inverse of :func:`model_from_dict` up to host lists being emitted as pairs."""
    from .model import ResourceKind

    def by(kind):
        return [r.id for r in model.resources if r.kind is ResourceKind(kind)]

    bs = [r.id for r in model.buffers]
    res = [r.id for r in model.resources]
    n_BS = model.n_BS

    def proc(p):
        d = {"id": p.id, "inputs": sorted(p.inputs), "outputs": sorted(p.outputs)}
        if p.verb is not None:
            d["verb"] = p.verb
        return d

    doc = {
        "name": model.name,
        "operands": [o.id for o in model.operands],
        "machines": by("machine"),
        "independent_buffers": by("buffer"),
        "transporters": by("transporter"),
        "transformation_processes": [proc(p) for p in model.transformations],
        "holding_processes": [proc(p) for p in model.holdings],
        "capabilities": {
            "transformation": [[model.transformations[j].id, res[m]] for j, m in model.J_M.coords()],
            "holding": [[model.holdings[g].id, res[v]] for g, v in model.J_gamma.coords()],
            "transport": [[res[v], bs[u // n_BS], bs[u % n_BS]] for u, v in model.J_H.coords()],
        },
        "constraints": {
            "transformation": [[model.transformations[j].id, res[m]] for j, m in model.K_M.coords()],
            "refined_transport": [
                [model.holdings[phi // (n_BS * n_BS)].id, res[v],
                 bs[(phi // n_BS) % n_BS], bs[phi % n_BS]]
                for phi, v in model.K_Hbar.coords()
            ],
        },
        "options": {"holding_is_operand": model.holding_is_operand},
    }
    if model.A_P is not None:
        ids = model.process_ids
        doc["options"]["functional_graph"] = [[ids[a], ids[b]] for a, b in model.A_P.coords()]
    return doc
