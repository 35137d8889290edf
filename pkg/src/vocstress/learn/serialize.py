"""Versioned text serialization for trained models (round-trip exact)."""

from __future__ import annotations

import numpy as np

from .models import ModelSpec, RandomForestModel, SVMModel

MAGIC = "VOCSTRESS-MODEL v1"


def _fmt(x: float) -> str:
    return repr(float(x))


def dumps_model(model) -> str:
    lines = []
    if isinstance(model, RandomForestModel):
        lines.append(f"{MAGIC} rf")
        s = model.spec
        lines.append(
            f"n_trees={s.n_trees} max_depth={s.max_depth} min_samples_split={s.min_samples_split} "
            f"bootstrap={int(s.bootstrap)} n_features={model.n_features}"
        )
        for t, sl in enumerate(model.tree_slices()):
            n_nodes = sl.stop - sl.start
            lines.append(f"TREE {t} nodes={n_nodes}")
            for i in range(sl.start, sl.stop):
                lines.append(
                    f"{model.features[i]},{_fmt(model.thresholds[i])},{model.lefts[i]},"
                    f"{model.rights[i]},{_fmt(model.values[i])},{_fmt(model.covers[i])}"
                )
    elif isinstance(model, SVMModel):
        lines.append(f"{MAGIC} svm")
        s = model.spec
        lines.append(
            f"kind={s.kind} kernel={model.kernel} C={_fmt(s.C)} gamma={_fmt(model.gamma_value)} "
            f"n_features={model.n_features} bias={_fmt(model.bias)} "
            f"platt_a={_fmt(model.platt_a)} platt_b={_fmt(model.platt_b)} "
            f"converged={int(model.converged)} iterations={model.iterations} "
            f"n_sv={model.dual_coef.size}"
        )
        for i in range(model.dual_coef.size):
            row = [_fmt(model.dual_coef[i])] + [_fmt(v) for v in model.support_X[i]]
            lines.append(",".join(row))
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    return "\n".join(lines) + "\n"


def loads_model(text: str):
    lines = text.rstrip("\n").split("\n")
    head = lines[0]
    if not head.startswith(MAGIC):
        raise ValueError("not a serialized model")
    flavor = head[len(MAGIC) + 1 :]
    params = dict(kv.split("=", 1) for kv in lines[1].split(" "))
    if flavor == "rf":
        spec = ModelSpec(
            kind="rf",
            n_trees=int(params["n_trees"]),
            max_depth=int(params["max_depth"]),
            min_samples_split=int(params["min_samples_split"]),
            bootstrap=bool(int(params["bootstrap"])),
        )
        feats, thrs, lefts, rights, vals, covers, counts = [], [], [], [], [], [], []
        i = 2
        while i < len(lines):
            assert lines[i].startswith("TREE ")
            n_nodes = int(lines[i].split("nodes=")[1])
            counts.append(n_nodes)
            for line in lines[i + 1 : i + 1 + n_nodes]:
                f, th, le, ri, va, co = line.split(",")
                feats.append(int(f))
                thrs.append(float(th))
                lefts.append(int(le))
                rights.append(int(ri))
                vals.append(float(va))
                covers.append(float(co))
            i += 1 + n_nodes
        offsets = np.zeros(len(counts) + 1, np.int64)
        offsets[1:] = np.cumsum(counts)
        return RandomForestModel(
            spec=spec,
            n_features=int(params["n_features"]),
            features=np.asarray(feats, np.int64),
            thresholds=np.asarray(thrs, np.float64),
            lefts=np.asarray(lefts, np.int64),
            rights=np.asarray(rights, np.int64),
            values=np.asarray(vals, np.float64),
            covers=np.asarray(covers, np.float64),
            offsets=offsets,
        )
    if flavor == "svm":
        spec = ModelSpec(kind=params["kind"], C=float(params["C"]))
        n_sv = int(params["n_sv"])
        dual = np.empty(n_sv, np.float64)
        n_features = int(params["n_features"])
        support = np.empty((n_sv, n_features), np.float64)
        for i, line in enumerate(lines[2 : 2 + n_sv]):
            parts = line.split(",")
            dual[i] = float(parts[0])
            support[i] = [float(v) for v in parts[1:]]
        kernel = params["kernel"]
        model = SVMModel(
            spec=spec,
            n_features=n_features,
            kernel=kernel,
            gamma_value=float(params["gamma"]),
            support_X=support,
            dual_coef=dual,
            bias=float(params["bias"]),
            platt_a=float(params["platt_a"]),
            platt_b=float(params["platt_b"]),
            converged=bool(int(params["converged"])),
            iterations=int(params["iterations"]),
            weights=None,
        )
        if kernel == "linear":
            model.weights = support.T @ dual
        return model
    raise ValueError(f"unknown model flavor {flavor!r}")


def save_model(model, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_model(model))


def load_model(path):
    with open(path, "r", encoding="utf-8") as fh:
        return loads_model(fh.read())
