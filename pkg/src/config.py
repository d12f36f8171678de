"""Settings - SpecDec Lab

Environment-driven settings, loaded once per process.
"""

import os
import logging
from dataclasses import dataclass
from typing import Dict, Any, Optional

from dotenv import load_dotenv

logger = logging.getLogger(__name__)


@dataclass
class Settings:
    out_dir: str = "results"
    seed: int = 0
    warmup: int = 3
    repetitions: int = 30
    log_level: str = "INFO"
    database_url: Optional[str] = None
    secret_key: str = "dev-secret-key"
    port: int = 5110

    @property
    def resolved_database_url(self) -> str:
        url = self.database_url or f"sqlite:///{os.path.join(self.out_dir, 'specdec_results.db')}"
        if url.startswith('postgres://'):
            url = url.replace('postgres://', 'postgresql://', 1)
        return url

    def to_dict(self) -> Dict[str, Any]:
        return {
            "out_dir": self.out_dir,
            "seed": self.seed,
            "warmup": self.warmup,
            "repetitions": self.repetitions,
            "log_level": self.log_level,
            "database_url": self.resolved_database_url,
            "port": self.port
        }


_settings: Optional[Settings] = None


def get_settings(reload: bool = False) -> Settings:
    """Get or create the settings singleton."""
    global _settings
    if _settings is None or reload:
        load_dotenv()
        _settings = Settings(
            out_dir=os.getenv('SPECDEC_OUT_DIR', 'results'),
            seed=int(os.getenv('SPECDEC_SEED', '0')),
            warmup=int(os.getenv('SPECDEC_WARMUP', '3')),
            repetitions=int(os.getenv('SPECDEC_REPETITIONS', '30')),
            log_level=os.getenv('SPECDEC_LOG_LEVEL', 'INFO').upper(),
            database_url=os.getenv('DATABASE_URL'),
            secret_key=os.getenv('SECRET_KEY', 'dev-secret-key'),
            port=int(os.getenv('PORT', '5110'))
        )
        logger.debug(f"Loaded settings: {_settings.to_dict()}")
    return _settings


def configure_logging(level: Optional[str] = None) -> None:
    logging.basicConfig(
        level=getattr(logging, (level or get_settings().log_level), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )
