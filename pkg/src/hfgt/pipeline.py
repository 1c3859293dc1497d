"""Stage orchestration, artifact export and run manifests.

All outputs are plain text with stable ordering and no timestamps, so a
rerun on the same input and options reproduces every byte.
"""
from __future__ import annotations

import hashlib
import json
import os
from functools import cached_property
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from . import __version__
from .adjacency import functional_graph, graph_loop, graph_tensor
from .boolmat import BoolMatrix, BoolTensor, write_mtx, write_tensor
from .descriptors import (
    METRICS,
    ConvergenceError,
    MetricReport,
    capability_dsm,
    closeness,
    katz_centrality,
    modularity,
    spectral_radius,
)
from .incidence import build_incidence, dual_adjacency, graph_incidence
from .layers import enumerate_layers, layer_incidence_and_adjacency, restrict
from .model import SystemModel, formal_graph, multicommodity

STAGES = (
    "concept",
    "adjacency-loop",
    "adjacency-tensor",
    "adjacency-incidence",
    "layers",
    "dual",
    "descriptors",
)
ADJACENCY_STAGES = ("adjacency-loop", "adjacency-tensor", "adjacency-incidence")
MANIFEST = "manifest.json"
OUT_ENV = "HFGT_OUT"


class StageError(ValueError):
    """Requested stages are unknown or miss a prerequisite."""


class PathCollision(FileExistsError):
    """Output location holds files this tool did not write."""


class CheckMismatch(RuntimeError):
    def __init__(self, diffs: dict):
        self.diffs = diffs
        detail = ", ".join(f"{k}: {v} entries" for k, v in diffs.items())
        super().__init__(f"adjacency paths disagree ({detail})")


class ExportError(ValueError):
    pass


def _requirements(stage: str) -> list:
    """Each inner list is a disjunction of stages, one of which must be present."""
    if stage == "concept":
        return []
    if stage in ADJACENCY_STAGES:
        return [["concept"]]
    if stage in ("layers", "dual"):
        return [["adjacency-incidence"]]
    if stage == "descriptors":
        return [list(ADJACENCY_STAGES)]
    raise StageError(f"unknown stage {stage!r}; choose from {', '.join(STAGES)}")


def resolve_stages(stages: Iterable[str]) -> list:
    """Validate a stage selection and return it in execution order."""
    chosen = set(stages)
    for s in sorted(chosen, key=lambda s: STAGES.index(s) if s in STAGES else -1):
        for group in _requirements(s):
            if not chosen.intersection(group):
                need = " or ".join(repr(g) for g in group)
                raise StageError(f"stage {s!r} requires {need}")
    return [s for s in STAGES if s in chosen]


# ---------------------------------------------------------------------------
# axis legends


def axis_labels(model: SystemModel, kind: str) -> list:
    res = [r.id for r in model.resources]
    bs = [r.id for r in model.buffers]
    procs = model.process_ids
    if kind == "operand":
        return [o.id for o in model.operands]
    if kind == "resource":
        return res
    if kind == "machine":
        return res[: model.n_M]
    if kind == "buffer":
        return bs
    if kind == "transformation":
        return [p.id for p in model.transformations]
    if kind == "holding":
        return [p.id for p in model.holdings]
    if kind == "process":
        return procs
    if kind == "refined":
        return procs[model.n_Pmu:]
    if kind == "transport":
        return [f"{a}->{b}" for a in bs for b in bs]
    if kind == "capability":
        return [f"{procs[w]}@{res[v]}" for w, v in model.capabilities.pairs()]
    if kind == "pair":
        return [f"{procs[x % model.n_P]}@{res[x // model.n_P]}" for x in range(model.n_P * model.n_R)]
    if kind == "operand_buffer":
        ops = [o.id for o in model.operands]
        return [f"{ops[x % model.n_L]}@{bs[x // model.n_L]}" for x in range(model.n_L * model.n_BS)]
    if kind == "one":
        return ["1"]
    raise KeyError(kind)


def legend_text(model: SystemModel, axes: Iterable[str]) -> str:
    lines = ["axis\tindex\tkind\tlabel"]
    for a, kind in enumerate(axes, start=1):
        lines.extend(f"{a}\t{k}\t{kind}\t{lab}" for k, lab in enumerate(axis_labels(model, kind), start=1))
    return "\n".join(lines) + "\n"


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def table_text(header: list, rows: Iterable[Iterable]) -> str:
    out = ["\t".join(header)]
    out.extend("\t".join(v if isinstance(v, str) else _fmt(v) for v in row) for row in rows)
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# computations


class Workspace:
    """Lazily computed artifacts of one model under fixed options."""

    def __init__(self, model: SystemModel, scheme: str = "input", custom_map: Optional[dict] = None,
                 metrics: Optional[Iterable[str]] = None, closeness_variant: str = "harmonic",
                 katz_alpha: Optional[float] = None):
        self.model = model
        self.scheme = scheme
        self.custom_map = custom_map
        # an explicit metric list makes undefined metrics an error; the default set skips them
        self.metrics_explicit = metrics is not None
        self.metrics = list(METRICS) if metrics is None else list(metrics)
        for m in self.metrics:
            if m not in METRICS:
                raise StageError(f"unknown metric {m!r}; choose from {', '.join(METRICS)}")
        self.closeness_variant = closeness_variant
        self.katz_alpha = katz_alpha

    @cached_property
    def A_P(self) -> BoolMatrix:
        return functional_graph(self.model)

    @cached_property
    def graph_loop(self):
        return graph_loop(self.model, self.A_P)

    @cached_property
    def graph_tensor(self):
        return graph_tensor(self.model, self.A_P)

    @cached_property
    def incidence(self):
        return build_incidence(self.model)

    @cached_property
    def graph_incidence(self):
        return graph_incidence(self.model, self.incidence)

    @property
    def incidence_exact(self) -> bool:
        """The incidence product only reproduces the derived A_P, not an override."""
        return self.model.A_P is None

    @property
    def graph_primary(self):
        return self.graph_incidence if self.incidence_exact else self.graph_tensor

    @property
    def check_paths(self) -> list:
        return ["loop", "tensor"] + (["incidence"] if self.incidence_exact else [])

    def graph(self, stage: str):
        return {"adjacency-loop": self.graph_loop, "adjacency-tensor": self.graph_tensor,
                "adjacency-incidence": self.graph_incidence}[stage]

    @cached_property
    def layers(self):
        scheme = enumerate_layers(self.model, self.scheme, self.custom_map)
        for layer in scheme.layers:
            if self.incidence_exact:
                layer_incidence_and_adjacency(layer, self.incidence.M3u_minus, self.incidence.M3u_plus)
            else:
                layer.adjacency = restrict(self.graph_primary.A_rho, layer.projector)
        return scheme

    @cached_property
    def dual(self) -> BoolTensor:
        t = self.incidence
        return dual_adjacency(t.M2_minus, t.M2_plus, self.model.n_BS, self.model.n_L)

    def check(self) -> dict:
        """Entry counts of pairwise disagreement between the three constructions."""
        ref = self.graph_loop
        diffs = {}
        for name in self.check_paths[1:]:
            g = getattr(self, f"graph_{name}")
            for attr in ("A_rho_proj", "A_rho"):
                a, b = getattr(ref, attr).to_dense(), getattr(g, attr).to_dense()
                n = int((a != b).sum())
                if n:
                    diffs[f"loop~{name}:{attr}"] = n
        return diffs

    def _metric(self, name: str, A) -> MetricReport:
        if name == "closeness":
            return closeness(A, self.closeness_variant)
        if name == "katz":
            alpha = self.katz_alpha
            if alpha is None:
                rho = spectral_radius(A)
                alpha = 0.5 / rho if rho > 0 else 0.5
            return katz_centrality(A, alpha)
        return METRICS[name](A)

    def descriptors(self, A) -> list:
        reports = []
        for name in self.metrics:
            try:
                reports.append(self._metric(name, A))
            except ConvergenceError as exc:
                if self.metrics_explicit:
                    raise
                reports.append(MetricReport(name, {}, {"skipped": str(exc)}))
        return reports


# ---------------------------------------------------------------------------
# artifact registry: name -> (axes, builder)


def _matrix_artifacts(ws: Workspace) -> dict:
    m = ws.model
    return {
        "J_M": (("transformation", "machine"), lambda: m.J_M),
        "J_gamma": (("holding", "resource"), lambda: m.J_gamma),
        "J_H": (("transport", "resource"), lambda: m.J_H),
        "J_Hbar": (("refined", "resource"), lambda: m.J_Hbar),
        "J_S": (("process", "resource"), lambda: m.J_S),
        "K_S": (("process", "resource"), lambda: m.K_S),
        "A_S": (("process", "resource"), lambda: m.A_S),
        "P_S": (("capability", "pair"), lambda: m.capabilities.projector),
        "A_P": (("process", "process"), lambda: ws.A_P),
        "A_BS": (("buffer", "buffer"), lambda: formal_graph(m.JH_tensor())),
        "A_rho": (("capability", "capability"), lambda: ws.graph_primary.A_rho_proj),
        "A_rho_full": (("pair", "pair"), lambda: ws.graph_primary.A_rho),
        "M2_minus": (("operand_buffer", "capability"), lambda: ws.incidence.M2_minus),
        "M2_plus": (("operand_buffer", "capability"), lambda: ws.incidence.M2_plus),
    }


def _tensor_artifacts(ws: Workspace) -> dict:
    m = ws.model
    t4 = ("operand", "buffer", "process", "resource")
    return {
        "J_H_tensor": (("buffer", "buffer", "resource"), lambda: m.JH_tensor()),
        "J_Hbar_tensor": (("holding", "buffer", "buffer", "resource"), lambda: m.JHbar_tensor()),
        "A_LBS": (("holding", "buffer", "buffer"),
                  lambda: multicommodity(m.JHbar_tensor(), m.holding_is_operand)),
        "M3_minus": (("operand", "buffer", "capability"), lambda: ws.incidence.M3_minus),
        "M3_plus": (("operand", "buffer", "capability"), lambda: ws.incidence.M3_plus),
        "M4_minus": (t4, lambda: ws.incidence.M4_minus),
        "M4_plus": (t4, lambda: ws.incidence.M4_plus),
        "dual": (("buffer", "buffer", "operand", "operand"), lambda: ws.dual),
    }


TABLE_ARTIFACTS = ("capabilities", "descriptors", "layers")
FORMATS = {"mtx": "matrix", "tns": "tensor", "tsv": "table"}


def artifact_names(ws: Workspace) -> list:
    return sorted(_matrix_artifacts(ws)) + sorted(_tensor_artifacts(ws)) + list(TABLE_ARTIFACTS)


class _Writer:
    """Tracks every file written below `root` for the manifest."""

    def __init__(self, root: Path):
        self.root = root
        self.files: dict = {}

    def _path(self, rel: str) -> Path:
        if rel in self.files:
            raise PathCollision(f"two artifacts map to {rel}")
        p = self.root / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        return p

    def _record(self, rel: str, p: Path):
        self.files[rel] = hashlib.sha256(p.read_bytes()).hexdigest()

    def text(self, rel: str, text: str):
        p = self._path(rel)
        p.write_text(text)
        self._record(rel, p)

    def matrix(self, rel: str, M, comment=None):
        p = self._path(rel)
        write_mtx(p, M, comment)
        self._record(rel, p)

    def tensor(self, rel: str, T, comment=None):
        p = self._path(rel)
        write_tensor(p, T, comment)
        self._record(rel, p)


def _capability_rows(model: SystemModel):
    procs, res = model.process_ids, [r.id for r in model.resources]
    for psi, (chi, (w, v)) in enumerate(zip(model.capabilities.chi.tolist(), model.capabilities.pairs())):
        yield [psi + 1, chi + 1, procs[w], res[v]]


def capabilities_table(model: SystemModel) -> str:
    return table_text(["psi", "chi", "process", "resource"], _capability_rows(model))


def descriptor_table(model: SystemModel, reports: list, positions=None) -> str:
    """One row per capability; `positions` selects a subset of capabilities by psi."""
    rows = list(_capability_rows(model))
    if positions is not None:
        rows = [rows[k] for k in positions]
    header = ["psi", "chi", "process", "resource"]
    cols = []
    for rep in reports:
        for key in sorted(rep.values):
            header.append(key)
            cols.append(rep.values[key])
    body = [row + [c[k] for c in cols] for k, row in enumerate(rows)]
    return table_text(header, body)


def layers_table(model: SystemModel, scheme) -> str:
    rows = []
    for layer in scheme.layers:
        bits = "" if layer.lambda_v is None else "".join(str(b) for b in layer.lambda_v)
        lam_d = "" if layer.lambda_D is None else str(layer.lambda_D)
        rows.append([layer.index + 1, lam_d, bits, layer.label, layer.size,
                     int(layer.adjacency.nnz) if layer.adjacency is not None else 0])
    return table_text(["lambda", "lambda_D", "lambda_v", "label", "capabilities", "edges"], rows)


def _parameters(reports: list) -> dict:
    return {r.metric: {k: (v if isinstance(v, (str, int)) else float(v)) for k, v in sorted(r.params.items())}
            for r in reports}


# ---------------------------------------------------------------------------
# export and pipeline


def export(ws: Workspace, name: str, fmt: str, dest) -> list:
    """Write one artifact plus its legend; returns the written paths."""
    if fmt not in FORMATS:
        raise ExportError(f"unknown format {fmt!r}; choose from {', '.join(FORMATS)}")
    dest = Path(dest)
    dest.parent.mkdir(parents=True, exist_ok=True)
    mats, tens = _matrix_artifacts(ws), _tensor_artifacts(ws)
    kind = "matrix" if name in mats else "tensor" if name in tens else "table" if name in TABLE_ARTIFACTS else None
    if kind is None:
        raise ExportError(f"unknown artifact {name!r}")
    if FORMATS[fmt] != kind:
        raise ExportError(f"artifact {name!r} is a {kind}; format {fmt!r} writes a {FORMATS[fmt]}")
    legend = dest.with_name(dest.name + ".legend.tsv")
    m = ws.model
    if kind == "matrix":
        axes, build = mats[name]
        write_mtx(dest, build(), name)
    elif kind == "tensor":
        axes, build = tens[name]
        write_tensor(dest, build(), name)
    else:
        axes = ("capability",)
        if name == "capabilities":
            dest.write_text(capabilities_table(m))
        elif name == "descriptors":
            dest.write_text(descriptor_table(m, ws.descriptors(ws.graph_primary.A_rho_proj)))
        else:
            axes = ()
            dest.write_text(layers_table(m, ws.layers))
            legend.write_text(_layer_membership(ws))
            return [dest, legend]
    legend.write_text(legend_text(m, axes))
    return [dest, legend]


def _layer_membership(ws: Workspace) -> str:
    labels = axis_labels(ws.model, "capability")
    pos = {int(c): k for k, c in enumerate(ws.model.capabilities.chi.tolist())}
    rows = [[layer.index + 1, pos[int(c)] + 1, labels[pos[int(c)]]]
            for layer in ws.layers.layers for c in layer.capabilities.tolist()]
    return table_text(["lambda", "psi", "capability"], rows)


def output_root(explicit=None, model_name: str = "model") -> Path:
    if explicit:
        return Path(explicit)
    return Path(os.environ.get(OUT_ENV, "hfgt-out")) / model_name


def _prepare(root: Path):
    """Refuse to write into a non-empty directory that lacks our manifest."""
    if root.exists() and not root.is_dir():
        raise PathCollision(f"{root} exists and is not a directory")
    if root.is_dir():
        entries = list(root.iterdir())
        if entries and not (root / MANIFEST).is_file():
            raise PathCollision(f"{root} is not empty and holds no {MANIFEST}; choose another output")
        if (root / MANIFEST).is_file():
            old = json.loads((root / MANIFEST).read_text())
            for rel in old.get("outputs", {}):
                p = root / rel
                if p.is_file():
                    p.unlink()
    root.mkdir(parents=True, exist_ok=True)


def run_pipeline(ws: Workspace, stages: Iterable[str], root, check: bool = False,
                 input_bytes: bytes = b"") -> dict:
    """Run the selected stages, write their artifacts under `root` and return the manifest."""
    order = resolve_stages(stages)
    if check:
        diffs = ws.check()
        if diffs:
            raise CheckMismatch(diffs)
    root = Path(root)
    _prepare(root)
    out = _Writer(root)
    m = ws.model
    summary = {}

    def matrix(name, rel):
        axes, build = _matrix_artifacts(ws)[name]
        out.matrix(rel, build(), name)
        out.text(rel + ".legend.tsv", legend_text(m, axes))

    def tensor(name, rel):
        axes, build = _tensor_artifacts(ws)[name]
        out.tensor(rel, build(), name)
        out.text(rel + ".legend.tsv", legend_text(m, axes))

    for stage in order:
        if stage == "concept":
            for name in ("J_M", "J_gamma", "J_H", "J_Hbar", "J_S", "K_S", "A_S", "A_P", "A_BS"):
                matrix(name, f"concept/{name}.mtx")
            if m.holding_is_operand:
                tensor("A_LBS", "concept/A_LBS.tns")
            out.text("concept/capabilities.tsv", capabilities_table(m))
            summary["concept"] = {"DOF_S": m.dof_s, "DOF_M": m.dof_m, "DOF_H": m.dof_h,
                                  "n_L": m.n_L, "n_R": m.n_R, "n_P": m.n_P,
                                  "A_P": "derived" if ws.incidence_exact else "override"}
        elif stage in ADJACENCY_STAGES:
            g = ws.graph(stage)
            out.matrix(f"{stage}/A_rho.mtx", g.A_rho_proj, "A_rho")
            out.text(f"{stage}/A_rho.mtx.legend.tsv", legend_text(m, ("capability", "capability")))
            summary[stage] = {"DOF_rho": g.dof_rho, "DOF_rho_unprojected": int(g.A_rho.nnz)}
            if stage == "adjacency-incidence":
                for name in ("M3_minus", "M3_plus"):
                    tensor(name, f"{stage}/{name}.tns")
        elif stage == "layers":
            scheme = ws.layers
            out.text("layers/layers.tsv", layers_table(m, scheme))
            out.text("layers/membership.tsv", _layer_membership(ws))
            for layer in scheme.layers:
                rel = f"layers/layer_{layer.index + 1}.mtx"
                out.matrix(rel, layer.adjacency, f"layer {layer.index + 1}: {layer.label}")
                out.text(rel + ".legend.tsv", _layer_legend(m, layer))
            summary["layers"] = {"scheme": scheme.kind, "count": len(scheme.layers)}
        elif stage == "dual":
            tensor("dual", "dual/A_BSL.tns")
            summary["dual"] = {"entries": int(ws.dual.nnz)}
        elif stage == "descriptors":
            src = [s for s in ADJACENCY_STAGES if s in order][-1]
            if src == "adjacency-incidence" and not ws.incidence_exact:
                src = "adjacency-tensor"
            A = ws.graph(src).A_rho_proj
            reports = ws.descriptors(A)
            out.text("descriptors/descriptors.tsv", descriptor_table(m, reports))
            info = {"source": src, "parameters": _parameters(reports)}
            if "layers" in order:
                info["layers"] = _layer_descriptors(ws, A, out)
            summary["descriptors"] = info

    manifest = {
        "tool": "hfgt",
        "version": __version__,
        "model": m.name,
        "input_sha256": hashlib.sha256(input_bytes).hexdigest(),
        "options": {
            "stages": order,
            "check": check,
            "scheme": ws.scheme,
            "metrics": ws.metrics,
            "metrics_explicit": ws.metrics_explicit,
            "closeness": ws.closeness_variant,
            "katz_alpha": ws.katz_alpha,
        },
        "summary": summary,
        "outputs": dict(sorted(out.files.items())),
    }
    (root / MANIFEST).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def _layer_legend(model: SystemModel, layer) -> str:
    labels = axis_labels(model, "capability")
    pos = {int(c): k for k, c in enumerate(model.capabilities.chi.tolist())}
    lines = ["axis\tindex\tkind\tlabel"]
    for a in (1, 2):
        for k, c in enumerate(layer.capabilities.tolist(), start=1):
            lines.append(f"{a}\t{k}\tcapability\t{labels[pos[int(c)]]}")
    return "\n".join(lines) + "\n"


def _layer_descriptors(ws: Workspace, A: BoolMatrix, out: _Writer) -> dict:
    m = ws.model
    chi = m.capabilities.chi
    partition = [None] * len(chi)
    for layer in ws.layers.layers:
        positions = np.searchsorted(chi, layer.capabilities)
        for p in positions.tolist():
            partition[p] = layer.index + 1
        reports = ws.descriptors(layer.adjacency)
        out.text(f"descriptors/layer_{layer.index + 1}.tsv", descriptor_table(m, reports, positions.tolist()))
    if any(p is None for p in partition):
        return {}
    dsm = capability_dsm(A, partition)
    return {
        "modularity": modularity(A, partition),
        "intra_edges": dsm.intra_edges,
        "inter_edges": dsm.inter_edges,
        "block_edges": dsm.block_edges.tolist(),
    }


__all__ = [
    "STAGES", "StageError", "PathCollision", "CheckMismatch", "ExportError", "Workspace",
    "resolve_stages", "run_pipeline", "export", "output_root", "legend_text", "axis_labels",
    "artifact_names",
]
