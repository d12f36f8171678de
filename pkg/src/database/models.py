"""Database Models - SpecDec Lab"""

import json
import uuid
from datetime import datetime
from typing import Dict, Any

from sqlalchemy import String, Integer, Text, DateTime
from sqlalchemy.orm import DeclarativeBase, Mapped, mapped_column


def generate_uuid() -> str:
    return str(uuid.uuid4())


class Base(DeclarativeBase):
    pass


class ResultRow(Base):
    """One ResultRecord in the ledger."""
    __tablename__ = 'result_record'
    id: Mapped[str] = mapped_column(String(36), primary_key=True, default=generate_uuid)
    experiment_id: Mapped[str] = mapped_column(String(200), nullable=False, index=True)
    kind: Mapped[str] = mapped_column(String(50), nullable=False, index=True)
    config_hash: Mapped[str] = mapped_column(String(64), nullable=False, index=True)
    seed: Mapped[int] = mapped_column(Integer, default=0)

    metrics_json: Mapped[str] = mapped_column(Text, default='[]')
    summary_json: Mapped[str] = mapped_column(Text, default='{}')
    environment_json: Mapped[str] = mapped_column(Text, default='{}')

    created_at: Mapped[datetime] = mapped_column(DateTime, default=datetime.utcnow)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'id': self.id,
            'experiment_id': self.experiment_id,
            'kind': self.kind,
            'config_hash': self.config_hash,
            'seed': self.seed,
            'metrics': json.loads(self.metrics_json or '[]'),
            'summary': json.loads(self.summary_json or '{}'),
            'environment': json.loads(self.environment_json or '{}'),
            'created_at': self.created_at.isoformat() if self.created_at else None
        }
