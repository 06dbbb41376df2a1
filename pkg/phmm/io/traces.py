"""ChainTrace export and import.

CSV: one row per retained draw with columns iter, pi_i, A_ij, B_ij, loglik, ms_forward,
ms_params. JSON mirrors the rows under "draws" and adds the per-iteration timings,
acceptance flags and step counts, the sampler configuration and, if kept, the latents.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, List, Mapping

import numpy as np
import pandas as pd

from phmm.definitions import LatentKind
from phmm.errors import DomainError
from phmm.io.tables import read_csv, read_json, write_csv, write_json
from phmm.samplers.base import ChainTrace, SamplerConfig


def parameter_columns(K: int, M: int) -> List[str]:
    columns = [f"pi_{i}" for i in range(K)]
    columns += [f"A_{i}{j}" for i in range(K) for j in range(K)]
    columns += [f"B_{i}{j}" for i in range(K) for j in range(M)]
    return columns


def trace_frame(trace: ChainTrace) -> pd.DataFrame:
    N = len(trace)
    values = np.hstack([trace.pi, trace.A.reshape(N, -1), trace.B.reshape(N, -1)])
    frame = pd.DataFrame(values, columns=parameter_columns(trace.K, trace.M))
    frame.insert(0, "iter", trace.iteration)
    frame["loglik"] = trace.loglik
    frame["ms_forward"] = trace.ms_forward[trace.iteration]
    frame["ms_params"] = trace.ms_params[trace.iteration]
    return frame


def _trace_meta(trace: ChainTrace) -> Dict[str, Any]:
    return {"sampler": trace.sampler, "K": trace.K, "M": trace.M, "config": trace.config.to_dict()}


def write_trace_csv(path: Path, trace: ChainTrace, meta: Mapping[str, Any]) -> None:
    write_csv(path, trace_frame(trace), {**meta, **_trace_meta(trace)})


def write_trace_json(path: Path, trace: ChainTrace, meta: Mapping[str, Any]) -> None:
    data = {
        **meta,
        **_trace_meta(trace),
        "latent_kind": trace.latent_kind.value,
        "draws": trace_frame(trace).to_dict(orient="list"),
        "iterations": {
            "ms_cache": trace.ms_cache,
            "ms_latent": trace.ms_latent,
            "ms_params": trace.ms_params,
            "z_steps": trace.z_steps,
            "accept_A": trace.accept_A.astype(int),
            "accept_pi": trace.accept_pi.astype(int),
        },
    }
    if trace.latents is not None:
        data["latents"] = trace.latents
    write_json(path, data)


def _from_frame(frame: pd.DataFrame, sampler: str, K: int, M: int, config: SamplerConfig, kind: LatentKind) -> ChainTrace:
    missing = [c for c in ["iter", *parameter_columns(K, M)] if c not in frame.columns]
    if missing:
        raise DomainError(f"trace lacks columns {missing}")
    if frame.empty:
        raise DomainError("trace has no draws")
    if len(frame) != config.retained:
        config = SamplerConfig(**{**config.to_dict(), "iterations": len(frame), "burn_in": 0, "thin": 1})
    N = len(frame)
    loglik = None
    if "loglik" in frame.columns:
        loglik = pd.to_numeric(frame["loglik"], errors="coerce").to_numpy(dtype=float)
    return ChainTrace.from_draws(
        sampler,
        config,
        kind,
        frame["iter"].to_numpy(dtype=np.int64),
        frame[[f"pi_{i}" for i in range(K)]].to_numpy(dtype=float),
        frame[[f"A_{i}{j}" for i in range(K) for j in range(K)]].to_numpy(dtype=float).reshape(N, K, K),
        frame[[f"B_{i}{j}" for i in range(K) for j in range(M)]].to_numpy(dtype=float).reshape(N, K, M),
        loglik,
    )


def read_trace(path: Path) -> ChainTrace:
    """Load a trace written by write_trace_csv or write_trace_json"""
    path = Path(path)
    if path.suffix.lower() == ".json":
        data = read_json(path)
        config = SamplerConfig(**data["config"])
        frame = pd.DataFrame(data["draws"])
        trace = _from_frame(frame, data["sampler"], int(data["K"]), int(data["M"]), config, LatentKind(data["latent_kind"]))
        per_iter = data.get("iterations", {})
        if len(per_iter.get("ms_cache", ())) == trace.config.iterations:
            trace.ms_cache[:] = per_iter["ms_cache"]
            trace.ms_latent[:] = per_iter["ms_latent"]
            trace.ms_params[:] = per_iter["ms_params"]
            trace.z_steps[:] = per_iter["z_steps"]
            trace.accept_A[:] = np.asarray(per_iter["accept_A"], dtype=bool).reshape(trace.accept_A.shape)
            trace.accept_pi[:] = np.asarray(per_iter["accept_pi"], dtype=bool)
        if data.get("latents") is not None:
            trace.latents = np.asarray(data["latents"], dtype=np.int8)
        return trace
    frame, meta = read_csv(path)
    try:
        config = SamplerConfig(**json.loads(meta["config"]))
        trace = _from_frame(frame, meta["sampler"], int(meta["K"]), int(meta["M"]), config, LatentKind.OBSERVED)
    except KeyError as err:
        raise DomainError(f"{path}: trace header lacks {err}") from None
    if trace.config.iterations == config.iterations:
        trace.ms_latent[trace.iteration] = frame["ms_forward"].to_numpy(dtype=float)
        trace.ms_params[trace.iteration] = frame["ms_params"].to_numpy(dtype=float)
    return trace
