"""Flask Application - SpecDec Lab (what-if API)"""
import os
import sys
from flask import Flask, request, jsonify

# Add parent directory to path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from flask_limiter import Limiter
from flask_limiter.util import get_remote_address
import logging

from src.config import get_settings, configure_logging
from src.errors import ValidationError
from src.model_core import ModelConfig
from src.perf_model import (
    DraftMeasurement, throughput, parity_latency, extra_tar, check_required_tar, improvement_factor,
    leviathan_speedup, parity_table, extra_tar_table
)
from src.design_explorer import ParamConvention, count_params, kv_bytes_per_token, param_formula

settings = get_settings()
configure_logging()
logger = logging.getLogger(__name__)

APP_NAME = "SpecDec Lab"
APP_VERSION = "0.1.0"

app = Flask(__name__)
app.secret_key = settings.secret_key

limiter = Limiter(key_func=get_remote_address, app=app, default_limits=["200 per day", "50 per hour"])

_repo = None


def get_repo():
    global _repo
    if _repo is None:
        from src.database import get_repository
        _repo = get_repository()
    return _repo


def _payload() -> dict:
    data = request.get_json(silent=True)
    if not isinstance(data, dict):
        raise ValidationError("JSON object body required")
    return data


def _measurements(data: dict) -> list:
    try:
        return [DraftMeasurement(**row) for row in data["rows"]]
    except TypeError as e:
        raise ValidationError(f"bad measurement row: {e}")


def _number(data: dict, key: str) -> float:
    if key not in data:
        raise ValidationError(f"{key} required")
    try:
        return float(data[key])
    except (TypeError, ValueError):
        raise ValidationError(f"{key} must be a number")


def _integer(data: dict, key: str, default: int) -> int:
    value = data.get(key, default)
    if isinstance(value, bool):
        raise ValidationError(f"{key} must be an integer")
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{key} must be an integer")
    if not number.is_integer():
        raise ValidationError(f"{key} must be an integer")
    return int(number)


@app.errorhandler(ValidationError)
def validation_error(e):
    return jsonify({'success': False, 'error': str(e)}), 400


# API Routes
@app.route('/api/predict', methods=['POST'])
@limiter.limit("100 per hour")
def api_predict():
    data = _payload()
    tar = _number(data, 'tar')
    t_draft, t_target = _number(data, 't_draft_ms') / 1e3, _number(data, 't_target_ms') / 1e3
    result = {'throughput': throughput(tar, t_target, t_draft)}
    if 'alpha' in data and 'gamma' in data:
        alpha, gamma = _number(data, 'alpha'), _integer(data, 'gamma', 0)
        result['improvement_factor'] = improvement_factor(alpha, gamma)
        result['leviathan_speedup'] = leviathan_speedup(alpha, gamma, t_draft / gamma / t_target)
    return jsonify({'success': True, 'prediction': result})


@app.route('/api/parity', methods=['POST'])
@limiter.limit("100 per hour")
def api_parity():
    data = _payload()
    if 'rows' in data:
        rows = _measurements(data)
        return jsonify({'success': True, 'table': parity_table(rows, data.get('baseline'))})
    result = parity_latency((_number(data, 'tar'), _number(data, 't_draft_ms') / 1e3),
                            _number(data, 'baseline_throughput'), _number(data, 't_target_ms') / 1e3)
    return jsonify({'success': True, 'parity': {
        'parity_latency_ms': result.parity_latency * 1e3,
        'reduction_pct': result.reduction_pct,
        'clamped': result.clamped
    }})


@app.route('/api/extra-tar', methods=['POST'])
@limiter.limit("100 per hour")
def api_extra_tar():
    data = _payload()
    gamma = _integer(data, 'gamma', 7)
    if 'rows' in data:
        rows = _measurements(data)
        return jsonify({'success': True, 'table': extra_tar_table(rows, gamma, data.get('baseline'))})
    result = extra_tar((_number(data, 'tar'), _number(data, 't_draft_ms') / 1e3),
                       _number(data, 'baseline_throughput'), _number(data, 't_target_ms') / 1e3, gamma)
    return jsonify({'success': True, 'extra_tar': result.to_dict()})


@app.route('/api/required-tar', methods=['POST'])
@limiter.limit("100 per hour")
def api_required_tar():
    data = _payload()
    result = check_required_tar(_number(data, 'throughput'), _number(data, 't_target_ms') / 1e3,
                                _number(data, 't_draft_ms') / 1e3, _integer(data, 'gamma', 7))
    return jsonify({'success': True, 'required_tar': result.required, 'reachable': result.reachable,
                    'cap': result.cap})


@app.route('/api/count-params', methods=['POST'])
@limiter.limit("100 per hour")
def api_count_params():
    data = _payload()
    config = ModelConfig.from_dict(data.get('config', {}))
    convention = ParamConvention.from_dict(data.get('convention', {}))
    return jsonify({
        'success': True,
        'params': count_params(config, convention),
        'kv_bytes_per_token': kv_bytes_per_token(config, _integer(data, 'bytes_per_element', 2)),
        'formula': param_formula(convention)
    })


@app.route('/api/results', methods=['GET'])
def api_results():
    kind = request.args.get('kind')
    limit = request.args.get('limit', 50, type=int)
    try:
        rows = get_repo().list_results(kind=kind, limit=limit)
    except Exception as e:
        logger.error(f"Result ledger unavailable: {e}")
        return jsonify({'success': False, 'error': 'Result ledger unavailable'}), 500
    return jsonify({'success': True, 'results': [r.to_dict() for r in rows], 'count': len(rows)})


@app.route('/api/results/<experiment_id>', methods=['GET'])
def api_result_detail(experiment_id):
    rows = get_repo().get_results(experiment_id)
    if not rows:
        return jsonify({'success': False, 'error': 'Not found'}), 404
    return jsonify({'success': True, 'results': [r.to_dict() for r in rows]})


@app.route('/health')
@limiter.exempt
def health():
    return jsonify({'status': 'healthy', 'app': APP_NAME, 'version': APP_VERSION})


@app.errorhandler(404)
def not_found(e):
    return jsonify({'error': 'Not found'}), 404


if __name__ == '__main__':
    app.run(host='0.0.0.0', port=settings.port, debug=os.getenv('FLASK_ENV') != 'production')
