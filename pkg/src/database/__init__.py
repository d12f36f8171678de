"""SpecDec Lab - Database Module"""

from .models import Base, ResultRow
from .repository import ResultRepository, get_repository

__all__ = ['Base', 'ResultRow', 'ResultRepository', 'get_repository']
