"""Model persistence as self-describing JSON.

Floats are written with repr (shortest round-trip form) and keys are sorted,
so saving the same model twice produces byte-identical files and a load/save
round trip is exact.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import DataFormatError
from .classify import PairMachine, SvcModel
from .kernels import KernelSpec
from .preprocessing import Standardizer
from .regress import SvrModel

FORMAT_VERSION = 1


def _dump(doc: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def _load(path: str | Path) -> dict:
    doc = json.loads(Path(path).read_text())
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise DataFormatError(f"unsupported model format version: {version}")
    return doc


def save_svc(model: SvcModel, path: str | Path) -> None:
    doc = {
        "format_version": FORMAT_VERSION,
        "model_type": "svc",
        "classes": model.classes,
        "kernel": model.kernel.to_dict(),
        "c": model.c,
        "seed": model.seed,
        "standardizer": model.standardizer.to_dict(),
        "sv_pool": model.sv_pool.tolist(),
        "machines": [
            {
                "class_a": m.class_a,
                "class_b": m.class_b,
                "pool_slots": m.pool_slots.tolist(),
                "dual_coefs": m.dual_coefs.tolist(),
                "bias": m.bias,
                "n_iter": m.n_iter,
                "converged": m.converged,
            }
            for m in model.machines
        ],
    }
    _dump(doc, path)


def load_svc(path: str | Path) -> SvcModel:
    doc = _load(path)
    if doc.get("model_type") != "svc":
        raise DataFormatError(f"expected an svc model, got {doc.get('model_type')!r}")
    machines = [
        PairMachine(
            class_a=m["class_a"],
            class_b=m["class_b"],
            pool_slots=np.array(m["pool_slots"], dtype=np.int64),
            dual_coefs=np.array(m["dual_coefs"], dtype=np.float64),
            bias=float(m["bias"]),
            n_iter=int(m["n_iter"]),
            converged=bool(m["converged"]),
        )
        for m in doc["machines"]
    ]
    return SvcModel(
        classes=list(doc["classes"]),
        machines=machines,
        standardizer=Standardizer.from_dict(doc["standardizer"]),
        kernel=KernelSpec.from_dict(doc["kernel"]),
        c=float(doc["c"]),
        sv_pool=np.array(doc["sv_pool"], dtype=np.float64),
        seed=doc.get("seed"),
    )


def save_svr(model: SvrModel, path: str | Path) -> None:
    doc = {
        "format_version": FORMAT_VERSION,
        "model_type": "svr",
        "kernel": model.kernel.to_dict(),
        "c": model.c,
        "epsilon": model.epsilon,
        "seed": model.seed,
        "standardizer": model.standardizer.to_dict(),
        "support_vectors": model.support_vectors.tolist(),
        "dual_coefs": model.dual_coefs.tolist(),
        "support_indices": model.support_indices.tolist(),
        "bias": model.bias,
        "n_iter": model.n_iter,
        "converged": model.converged,
    }
    _dump(doc, path)


def load_svr(path: str | Path) -> SvrModel:
    doc = _load(path)
    if doc.get("model_type") != "svr":
        raise DataFormatError(f"expected an svr model, got {doc.get('model_type')!r}")
    return SvrModel(
        support_vectors=np.array(doc["support_vectors"], dtype=np.float64),
        dual_coefs=np.array(doc["dual_coefs"], dtype=np.float64),
        bias=float(doc["bias"]),
        kernel=KernelSpec.from_dict(doc["kernel"]),
        c=float(doc["c"]),
        epsilon=float(doc["epsilon"]),
        standardizer=Standardizer.from_dict(doc["standardizer"]),
        support_indices=np.array(doc["support_indices"], dtype=np.int64),
        n_iter=int(doc["n_iter"]),
        converged=bool(doc["converged"]),
        seed=doc.get("seed"),
    )
