"""Channel and job descriptions in canonical JSON (strictly validated)."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np

from .algebra import BlockAlgebra, random_state, segal_entropy
from .channel import (
    Channel,
    completely_depolarizing,
    conditional_expectation,
    convolution_channel,
    covariant_channel,
    diagonal_basis,
    fourier_multiplier_vn,
    herz_schur_channel,
    identity_channel,
    subgroup_expectation,
)
from .groups import GroupFunction, parse_group, parse_rep
from .optimize import OptimizerConfig
from .qgroup import QuantumGroup, density_flags, parse_qgroup
from .serialize import (
    FormatError,
    algebra_from_obj,
    element_from_obj,
    pair_to_complex,
    require_keys,
)

JOB_KINDS = ("verify-qgroup", "entropy", "norms", "capacity", "structure", "suite")
CHANNEL_KINDS = ("fourier", "herz_schur", "covariant", "cond_exp", "explicit", "identity", "depolarizing")


@dataclass
class ChannelContext:
    """A channel plus what is known about it in closed form."""

    channel: Channel
    kind: str
    closed_entropy: float | None = None
    density: Any = None
    qgroup: QuantumGroup | None = None
    extras: dict = field(default_factory=dict)


def _complex_list(values, where: str) -> np.ndarray:
    if not isinstance(values, list) or not values:
        raise FormatError(f"{where}: expected a non-empty list")
    return np.array([pair_to_complex(v, where) for v in values])


def _algebra_or_qgroup(obj: dict, where: str) -> BlockAlgebra:
    if "qgroup" in obj:
        return parse_qgroup(obj["qgroup"]).algebra
    if "algebra" in obj:
        return algebra_from_obj(obj["algebra"])
    raise FormatError(f"{where}: needs 'algebra' or 'qgroup'")


def parse_channel_spec(obj, seed: int = 0) -> ChannelContext:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise FormatError("channel spec must be an object with a 'kind'")
    kind = obj["kind"]
    try:
        if kind == "fourier":
            obj = require_keys(obj, {"kind", "qgroup"}, {"density", "phi", "seed"}, where="fourier")
            qg = parse_qgroup(obj["qgroup"])
            s = int(obj.get("seed", seed))
            if "phi" in obj:
                if qg.group is None or not qg.name.startswith("vng:"):
                    raise FormatError("'phi' requires a vng:<group> quantum group")
                phi = GroupFunction(qg.group, _complex_list(obj["phi"], "phi"))
                t = fourier_multiplier_vn(phi)
                f = qg.from_coefficients(phi.values)
                closed = segal_entropy(f) if density_flags(f, qg).eligible else None
                return ChannelContext(t, kind, closed, f, qg)
            dens = obj.get("density", "random")
            if dens == "random":
                f = random_state(qg.algebra, s, full_support=True).element
            elif dens in ("unit", "uniform"):
                f = qg.algebra.unit()
            else:
                f = element_from_obj(dens)
            if not density_flags(f, qg).eligible:
                raise FormatError("density must be positive with unit L1 norm")
            return ChannelContext(convolution_channel(f, qg), kind, segal_entropy(f), f, qg)
        if kind == "herz_schur":
            obj = require_keys(obj, {"kind", "group", "phi"}, where="herz_schur")
            g = parse_group(obj["group"])
            phi = GroupFunction(g, _complex_list(obj["phi"], "phi"))
            return ChannelContext(herz_schur_channel(phi), kind, None, phi)
        if kind == "covariant":
            obj = require_keys(obj, {"kind", "group", "rep", "f"}, where="covariant")
            g = parse_group(obj["group"])
            rep = parse_rep(obj["rep"], g)
            f = np.real(_complex_list(obj["f"], "f"))
            from .entropy import group_density_entropy

            return ChannelContext(covariant_channel(rep, f), kind, None, f, extras={"rep": rep,
                                  "h_f": group_density_entropy(f)})
        if kind == "cond_exp":
            obj = require_keys(obj, {"kind", "onto"}, {"algebra", "qgroup"}, where="cond_exp")
            onto = obj["onto"]
            if isinstance(onto, str) and onto.startswith("subgroup:"):
                if "qgroup" not in obj:
                    raise FormatError("subgroup expectations need a vng:<group> 'qgroup'")
                qg = parse_qgroup(obj["qgroup"])
                gens = [int(x) for x in onto.split(":", 1)[1].split(",") if x.strip()]
                sub = qg.group.generated_subgroup(gens)
                return ChannelContext(subgroup_expectation(qg, sub), kind, extras={"subgroup": sorted(sub)})
            alg = _algebra_or_qgroup(obj, "cond_exp")
            if onto == "diagonal":
                basis = diagonal_basis(alg)
            elif onto == "scalars":
                basis = [alg.unit()]
            elif isinstance(onto, list):
                basis = [element_from_obj(b) for b in onto]
            else:
                raise FormatError(f"cond_exp: unknown target {onto!r}")
            return ChannelContext(conditional_expectation(alg, basis), kind)
        if kind in ("identity", "depolarizing"):
            obj = require_keys(obj, {"kind"}, {"algebra", "qgroup"}, where=kind)
            alg = _algebra_or_qgroup(obj, kind)
            t = identity_channel(alg) if kind == "identity" else completely_depolarizing(alg)
            return ChannelContext(t, kind)
        if kind == "explicit":
            obj = require_keys(obj, {"kind", "domain", "matrix"}, {"codomain"}, where="explicit")
            dom = algebra_from_obj(obj["domain"])
            cod = algebra_from_obj(obj["codomain"]) if "codomain" in obj else dom
            rows = obj["matrix"]
            if not isinstance(rows, list) or len(rows) != cod.dim:
                raise FormatError(f"explicit: matrix needs {cod.dim} rows")
            mat = np.array([_complex_list(r, "matrix") for r in rows])
            return ChannelContext(Channel(dom, cod, mat, "explicit"), kind)
    except (ValueError, KeyError, TypeError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"{kind}: {exc}") from exc
    raise FormatError(f"unknown channel kind {kind!r}; expected one of {CHANNEL_KINDS}")


# --------------------------------------------------------------------------
# jobs

OPTION_KEYS = {"restarts", "max_iters", "seed", "unit", "out", "tol", "p", "objective_tol"}


@dataclass
class JobSpec:
    kind: str
    target: Any
    restarts: int = 32
    max_iters: int = 2000
    objective_tol: float = 1e-8
    seed: int = 0
    unit: str = "nats"
    out: str | None = None
    tol: float | None = None
    p: tuple = ("1.5", "2", "4", "inf")

    def config(self) -> OptimizerConfig:
        return OptimizerConfig(restarts=self.restarts, max_iters=self.max_iters,
                               objective_tol=self.objective_tol, seed=self.seed)


def parse_job(obj, base_dir: Path | None = None) -> JobSpec:
    obj = require_keys(obj, {"kind", "target"}, {"options"}, where="job")
    kind = obj["kind"]
    if kind not in JOB_KINDS:
        raise FormatError(f"job kind must be one of {JOB_KINDS}")
    target = obj["target"]
    if isinstance(target, str) and base_dir is not None and kind != "suite" and (base_dir / target).is_file():
        target = json.loads((base_dir / target).read_text())
    opts = obj.get("options", {})
    if not isinstance(opts, dict):
        raise FormatError("options must be an object")
    unknown = set(opts) - OPTION_KEYS
    if unknown:
        raise FormatError(f"options: unknown keys {sorted(unknown)}")
    job = JobSpec(kind, target)
    for k, v in opts.items():
        if k in ("restarts", "max_iters", "seed"):
            if isinstance(v, bool) or not isinstance(v, int) or v < (1 if k != "seed" else 0):
                raise FormatError(f"options.{k} must be a valid integer")
        elif k in ("tol", "objective_tol"):
            if isinstance(v, bool) or not isinstance(v, (int, float)) or v <= 0:
                raise FormatError(f"options.{k} must be a positive number")
            v = float(v)
        elif k == "unit":
            if v not in ("nats", "bits"):
                raise FormatError("options.unit must be 'nats' or 'bits'")
        elif k == "p":
            if not isinstance(v, list) or not v:
                raise FormatError("options.p must be a non-empty list")
            v = tuple(str(x) for x in v)
        job = replace(job, **{k: v})
    return job


def load_job(path: str | Path) -> JobSpec:
    path = Path(path)
    try:
        obj = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read job spec {path}: {exc}") from exc
    return parse_job(obj, path.parent)
