from __future__ import annotations

import datetime as dt

from sqlalchemy import DateTime, Float, Integer, String, Text
from sqlalchemy.orm import Mapped, mapped_column

from .db import Base


class RunRecord(Base):
    __tablename__ = "runs"

    run_id: Mapped[str] = mapped_column(String, primary_key=True)
    created_at: Mapped[dt.datetime] = mapped_column(
        DateTime(timezone=True), nullable=False, default=lambda: dt.datetime.now(dt.timezone.utc)
    )
    preset: Mapped[str] = mapped_column(String, nullable=False, default="")
    seed: Mapped[int] = mapped_column(Integer, nullable=False, default=0)
    version: Mapped[str] = mapped_column(String, nullable=False, default="")
    config_json: Mapped[str] = mapped_column(Text, nullable=False, default="{}")
    fit_rate: Mapped[float | None] = mapped_column(Float, nullable=True)  # bits/iteration
    fit_goodness: Mapped[float | None] = mapped_column(Float, nullable=True)


class CurvePoint(Base):
    __tablename__ = "curve_points"

    id: Mapped[int] = mapped_column(Integer, primary_key=True, autoincrement=True)
    run_id: Mapped[str] = mapped_column(String, index=True)
    iteration: Mapped[int] = mapped_column(Integer)
    mean_sq_error: Mapped[float] = mapped_column(Float)
    std_error: Mapped[float] = mapped_column(Float)
    theory: Mapped[float | None] = mapped_column(Float, nullable=True)
