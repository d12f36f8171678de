"""
SpecDec Lab - Design Explorer

Parameter and KV accounting, fixed-budget enumeration and wide-vs-deep
comparison of draft architectures.
"""

from .params import (
    ParamConvention,
    create_opt350m_convention,
    create_llama_convention,
    count_params,
    param_formula,
    kv_bytes,
    kv_bytes_per_token,
    kv_saving
)
from .explorer import (
    ParamBudgetSpec,
    ConfigReport,
    REPORT_COLUMNS,
    enumerate_configs,
    DraftCandidate,
    CompareVerdict,
    compare_wide_vs_deep
)

__all__ = [
    'ParamConvention',
    'create_opt350m_convention',
    'create_llama_convention',
    'count_params',
    'param_formula',
    'kv_bytes',
    'kv_bytes_per_token',
    'kv_saving',
    'ParamBudgetSpec',
    'ConfigReport',
    'REPORT_COLUMNS',
    'enumerate_configs',
    'DraftCandidate',
    'CompareVerdict',
    'compare_wide_vs_deep'
]
