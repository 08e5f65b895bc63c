"""Optional SQL store of finished runs, keyed by run id."""
from __future__ import annotations

import json
import logging
import math
from typing import Optional, Tuple

from sqlalchemy import select

from ..db import open_run_store
from ..errors import InvalidParameterError
from ..models import CurvePoint, RunRecord
from .convergence import ErrorCurve

log = logging.getLogger(__name__)


def save_run(
    db_url: str,
    run_id: str,
    curve: ErrorCurve,
    preset: str = "",
    fit: Optional[Tuple[float, float]] = None,
) -> None:
    Session = open_run_store(db_url)
    config = curve.metadata.get("config", {})
    with Session() as session:
        if session.get(RunRecord, run_id) is not None:
            raise InvalidParameterError(f"run id {run_id!r} already exists in {db_url}")
        session.add(
            RunRecord(
                run_id=run_id,
                preset=preset,
                seed=int(curve.metadata.get("seed", 0)),
                version=str(curve.metadata.get("version", "")),
                config_json=json.dumps(config, sort_keys=True, default=str),
                fit_rate=fit[0] if fit else None,
                fit_goodness=fit[1] if fit else None,
            )
        )
        for row in curve.frame.itertuples(index=False):
            theory = None if math.isnan(row.theory) else float(row.theory)
            session.add(
                CurvePoint(
                    run_id=run_id,
                    iteration=int(row.iteration),
                    mean_sq_error=float(row.mean_sq_error),
                    std_error=float(row.std_error),
                    theory=theory,
                )
            )
        session.commit()
    log.info("stored run %s (%d points) in %s", run_id, len(curve), db_url)


def load_run(db_url: str, run_id: str) -> Tuple[RunRecord, ErrorCurve]:
    Session = open_run_store(db_url)
    with Session() as session:
        record = session.get(RunRecord, run_id)
        if record is None:
            raise InvalidParameterError(f"run id {run_id!r} not found in {db_url}")
        session.expunge(record)
        points = session.scalars(
            select(CurvePoint).where(CurvePoint.run_id == run_id).order_by(CurvePoint.iteration)
        ).all()
        curve = ErrorCurve.from_arrays(
            [p.iteration for p in points],
            [p.mean_sq_error for p in points],
            [p.std_error for p in points],
            [float("nan") if p.theory is None else p.theory for p in points],
            {"config": json.loads(record.config_json), "seed": record.seed, "version": record.version},
        )
    return record, curve
