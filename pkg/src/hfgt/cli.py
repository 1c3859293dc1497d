"""Command-line interface: ``hfgt validate|build|layers|descriptors|export``.

Exit status: 0 success, 2 invalid input, 3 computation failure,
4 disagreement between adjacency constructions under ``--check``.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import yaml

from . import __version__
from .boolmat import DimensionError
from .descriptors import METRICS, ConvergenceError
from .layers import PartitionError
from .model import E_SCHEMA, ValidationError
from .modelfile import ingest, load_document
from .pipeline import (
    STAGES,
    CheckMismatch,
    ExportError,
    PathCollision,
    StageError,
    Workspace,
    artifact_names,
    export,
    layers_table,
    output_root,
    run_pipeline,
)

EXIT_OK, EXIT_INVALID, EXIT_COMPUTE, EXIT_MISMATCH = 0, 2, 3, 4


def _csv(text: str) -> list:
    return [t.strip() for t in text.split(",") if t.strip()]


def load_custom_map(path) -> dict:
    """Read ``[[process, resource, layer], ...]`` (YAML or JSON) into a lookup."""
    doc = load_document(path)
    rows = doc.get("layers")
    if not isinstance(rows, list):
        raise ValidationError(E_SCHEMA, "custom layer map needs a 'layers' list", str(path))
    out = {}
    for k, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != 3:
            raise ValidationError(E_SCHEMA, "entries must be [process, resource, layer]", f"layers[{k}]")
        key = (str(row[0]), str(row[1]))
        if key in out:
            raise PartitionError(f"capability {key} assigned twice")
        out[key] = str(row[2])
    return out


def _scheme(text: str):
    if text in ("input", "output"):
        return text, None
    if text.startswith("custom="):
        return "custom", load_custom_map(text[len("custom="):])
    raise StageError(f"scheme must be input, output or custom=<map>, got {text!r}")


def _workspace(args, model) -> Workspace:
    scheme, custom = _scheme(getattr(args, "scheme", "input"))
    metrics = _csv(args.metrics) if getattr(args, "metrics", None) else None
    return Workspace(model, scheme, custom, metrics,
                     getattr(args, "closeness", "harmonic"), getattr(args, "katz_alpha", None))


def _run(args, stages):
    model = ingest(args.model)
    ws = _workspace(args, model)
    root = output_root(args.out, model.name)
    manifest = run_pipeline(ws, stages, root, check=getattr(args, "check", False),
                            input_bytes=Path(args.model).read_bytes())
    return ws, root, manifest


def cmd_validate(args) -> int:
    m = ingest(args.model)
    print(f"ok {m.name}: operands={m.n_L} resources={m.n_R} processes={m.n_P} "
          f"capabilities={len(m.capabilities)} DOF_S={m.dof_s}")
    return EXIT_OK


def cmd_build(args) -> int:
    stages = _csv(args.stages) if args.stages else list(STAGES)
    ws, root, manifest = _run(args, stages)
    for stage, info in manifest["summary"].items():
        print(f"{stage}: " + " ".join(f"{k}={v}" for k, v in sorted(info.items()) if not isinstance(v, dict)))
    if args.check:
        print(f"check: {', '.join(ws.check_paths)} adjacency agree")
        if not ws.incidence_exact:
            print("check: incidence path skipped, it cannot express an A_P override")
    print(f"wrote {len(manifest['outputs'])} files to {root}")
    return EXIT_OK


def cmd_layers(args) -> int:
    ws, root, _ = _run(args, ["concept", "adjacency-incidence", "layers"])
    sys.stdout.write(layers_table(ws.model, ws.layers))
    print(f"wrote layer files to {root / 'layers'}")
    return EXIT_OK


def cmd_descriptors(args) -> int:
    stages = ["concept", "adjacency-incidence", "descriptors"]
    if args.by_layer:
        stages.append("layers")
    _ws, root, _ = _run(args, stages)
    sys.stdout.write((root / "descriptors" / "descriptors.tsv").read_text())
    return EXIT_OK


def cmd_export(args) -> int:
    model = ingest(args.model)
    ws = _workspace(args, model)
    if args.list:
        print("\n".join(artifact_names(ws)))
        return EXIT_OK
    if not args.artifact:
        raise ExportError("--artifact is required (see --list)")
    fmt = args.format or {"tsv": "tsv", "tns": "tns"}.get(Path(args.output or "").suffix.lstrip("."), "mtx")
    dest = Path(args.output) if args.output else output_root(None, model.name) / "export" / f"{args.artifact}.{fmt}"
    for p in export(ws, args.artifact, fmt, dest):
        print(p)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hfgt", description="Hetero-functional graph toolkit.")
    p.add_argument("--version", action="version", version=f"hfgt {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def model_cmd(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("model", help="model file (.yaml/.yml/.json)")
        return sp

    def out_opt(sp):
        sp.add_argument("--out", help="output directory (default: $HFGT_OUT/<model name>)")

    def metric_opts(sp):
        sp.add_argument("--metrics", help=f"comma list from {','.join(METRICS)} (default: all)")
        sp.add_argument("--closeness", choices=("harmonic", "classic"), default="harmonic")
        sp.add_argument("--katz-alpha", type=float, help="attenuation (default: 0.5 / spectral radius)")

    sp = model_cmd("validate", "check a model file")
    sp.set_defaults(func=cmd_validate)

    sp = model_cmd("build", "run pipeline stages and write artifacts")
    sp.add_argument("--stages", help=f"comma list from {','.join(STAGES)} (default: all)")
    sp.add_argument("--check", action="store_true", help="require the three adjacency constructions to agree")
    sp.add_argument("--scheme", default="input", help="layer scheme: input, output or custom=<map file>")
    metric_opts(sp)
    out_opt(sp)
    sp.set_defaults(func=cmd_build)

    sp = model_cmd("layers", "decompose the capability graph into layers")
    sp.add_argument("--scheme", default="input", help="input, output or custom=<map file>")
    out_opt(sp)
    sp.set_defaults(func=cmd_layers)

    sp = model_cmd("descriptors", "compute network descriptors of the capability graph")
    metric_opts(sp)
    sp.add_argument("--by-layer", action="store_true", help="also report per-layer descriptors and modularity")
    sp.add_argument("--scheme", default="input", help="layer scheme used with --by-layer")
    out_opt(sp)
    sp.set_defaults(func=cmd_descriptors)

    sp = model_cmd("export", "write a single artifact with its legend")
    sp.add_argument("--artifact", help="artifact name (see --list)")
    sp.add_argument("--format", help="mtx, tns or tsv (default: from the output suffix, else mtx)")
    sp.add_argument("-o", "--output", help="destination file")
    sp.add_argument("--list", action="store_true", help="list artifact names")
    sp.add_argument("--scheme", default="input", help="layer scheme for the 'layers' artifact")
    metric_opts(sp)
    sp.set_defaults(func=cmd_export)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (PartitionError, StageError, PathCollision, ExportError, yaml.YAMLError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except CheckMismatch as exc:
        print(f"mismatch: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except (ConvergenceError, DimensionError, ArithmeticError, ValueError) as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
