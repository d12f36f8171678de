"""Repository Pattern - SpecDec Lab"""

import os
import json
import logging
from typing import Dict, List, Optional, Any

from sqlalchemy import create_engine, select, desc, func
from sqlalchemy.orm import sessionmaker

from src.config import get_settings
from .models import Base, ResultRow

logger = logging.getLogger(__name__)


class ResultRepository:
    """Ledger of experiment results."""

    def __init__(self, database_url: str):
        if database_url.startswith('postgres://'):
            database_url = database_url.replace('postgres://', 'postgresql://', 1)
        if database_url.startswith('sqlite:///') and database_url != 'sqlite:///:memory:':
            directory = os.path.dirname(database_url[len('sqlite:///'):])
            if directory:
                os.makedirs(directory, exist_ok=True)
        self.engine = create_engine(database_url)
        Base.metadata.create_all(self.engine)
        self._session = sessionmaker(bind=self.engine, expire_on_commit=False)

    def save_record(self, record) -> ResultRow:
        row = ResultRow(
            experiment_id=record.experiment_id,
            kind=record.kind,
            config_hash=record.config_hash,
            seed=record.seed,
            metrics_json=json.dumps(record.metrics, default=str),
            summary_json=json.dumps(record.summary, default=str),
            environment_json=json.dumps(record.environment, default=str)
        )
        with self._session() as session:
            session.add(row)
            session.commit()
        return row

    def list_results(self, kind: Optional[str] = None, limit: int = 50) -> List[ResultRow]:
        query = select(ResultRow)
        if kind:
            query = query.where(ResultRow.kind == kind)
        query = query.order_by(desc(ResultRow.created_at)).limit(limit)
        with self._session() as session:
            return list(session.scalars(query))

    def get_results(self, experiment_id: str) -> List[ResultRow]:
        with self._session() as session:
            return list(session.scalars(
                select(ResultRow).where(ResultRow.experiment_id == experiment_id).order_by(ResultRow.created_at)
            ))

    def find_by_config_hash(self, config_hash: str) -> List[ResultRow]:
        with self._session() as session:
            return list(session.scalars(
                select(ResultRow).where(ResultRow.config_hash == config_hash).order_by(ResultRow.created_at)
            ))

    def summary(self) -> Dict[str, Any]:
        with self._session() as session:
            counts = dict(session.execute(
                select(ResultRow.kind, func.count(ResultRow.id)).group_by(ResultRow.kind)
            ).all())
        return {'total': sum(counts.values()), 'by_kind': counts}


_repository: Optional[ResultRepository] = None


def get_repository(database_url: Optional[str] = None) -> ResultRepository:
    """Get or create the repository singleton."""
    global _repository
    if _repository is None or database_url is not None:
        _repository = ResultRepository(database_url or get_settings().resolved_database_url)
    return _repository
