"""Figure-reproduction presets loaded from ``presets.yaml``."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import yaml

from ..errors import InvalidParameterError
from ..io import metadata_path, write_curve_csv, write_metadata
from ..sources import parse_source
from ..states import QuditRegister
from .convergence import ErrorCurve, ExperimentConfig, fit_decay_rate, run_convergence

log = logging.getLogger(__name__)

PRESETS_FILE = Path(__file__).with_name("presets.yaml")
CONFIG_KEYS = ("mode", "scheme", "K", "variant", "metric", "theory_law")


def load_presets(path: Path = PRESETS_FILE) -> Dict[str, Dict[str, Any]]:
    return yaml.safe_load(path.read_text(encoding="utf-8"))


def preset_ids() -> Tuple[str, ...]:
    return tuple(load_presets())


def build_config(
    figure_id: str,
    seed: int = 0,
    trajectories: Optional[int] = None,
    threads: int = 1,
    M_max: Optional[int] = None,
) -> Tuple[ExperimentConfig, Dict[str, Any]]:
    presets = load_presets()
    if figure_id not in presets:
        raise InvalidParameterError(f"unknown preset {figure_id!r}; choose from {sorted(presets)}")
    p = presets[figure_id]
    reg = QuditRegister(int(p["n_qudits"]), int(p["local_dim"]))
    cfg = ExperimentConfig(
        register=reg,
        source=parse_source(p["source"], reg.local_dim),
        M_max=int(p["M_max"]) if M_max is None else M_max,
        trajectories=int(p["trajectories"]) if trajectories is None else trajectories,
        seed=seed,
        threads=threads,
        label=figure_id,
        **{k: p[k] for k in CONFIG_KEYS if k in p},
    )
    return cfg, p


@dataclass
class Reproduction:
    curve: ErrorCurve
    csv_path: Path
    metadata_path: Path
    fit: Optional[Tuple[float, float]]


def reproduce(
    figure_id: str,
    out: Path,
    seed: int = 0,
    trajectories: Optional[int] = None,
    threads: int = 1,
    M_max: Optional[int] = None,
) -> Reproduction:
    """Run a preset and write ``out`` (CSV) plus ``<stem>.meta.json``."""
    cfg, preset = build_config(figure_id, seed, trajectories, threads, M_max)
    curve = run_convergence(cfg)

    fit = None
    window = preset.get("fit_window")
    if window:
        try:
            fit = fit_decay_rate(curve, (int(window[0]), int(window[1])))
        except InvalidParameterError as e:
            log.warning("%s: no decay fit over %s: %s", figure_id, window, e)

    meta = dict(curve.metadata)
    meta["preset"] = figure_id
    meta["description"] = preset.get("description", "")
    if fit is not None:
        meta["fit"] = {"window": list(window), "rate_bits_per_iteration": fit[0], "goodness": fit[1]}
    curve.metadata = meta

    write_curve_csv(out, curve.frame)
    meta_out = metadata_path(out)
    write_metadata(meta_out, meta)
    log.info("%s written to %s", figure_id, out)
    return Reproduction(curve, Path(out), meta_out, fit)
