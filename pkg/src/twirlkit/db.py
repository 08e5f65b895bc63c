"""SQLAlchemy plumbing for the run store."""
from __future__ import annotations

from pathlib import Path

from sqlalchemy import create_engine
from sqlalchemy.engine import make_url
from sqlalchemy.orm import DeclarativeBase, sessionmaker


class Base(DeclarativeBase):
    pass


def open_run_store(db_url: str) -> sessionmaker:
    """Session factory for ``db_url`` with the run tables created.

    A file-backed SQLite url gets its parent directory created first.
    """
    url = make_url(db_url)
    if url.get_backend_name() == "sqlite" and url.database not in (None, "", ":memory:"):
        Path(url.database).parent.mkdir(parents=True, exist_ok=True)
    engine = create_engine(url, future=True)
    from . import models  # noqa: F401  (registers the tables on Base)

    Base.metadata.create_all(engine)
    return sessionmaker(bind=engine, autoflush=False, future=True)
