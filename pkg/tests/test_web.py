"""Tests for the what-if JSON API."""

import pytest

import web.app as web_app
from src.harness import ResultRecord
from src.database import ResultRepository
from src.model_core import create_opt_125m_config

DRAFT_ROWS = [
    {"model_id": "opt-125m", "tar": 3.2, "t_draft_ms": 43.7, "t_target_ms": 60.0},
    {"model_id": "opt-350m", "tar": 3.4, "t_draft_ms": 79.8, "t_target_ms": 60.0},
]


@pytest.fixture
def repository(tmp_path, monkeypatch):
    repo = ResultRepository(f"sqlite:///{tmp_path / 'web.db'}")
    monkeypatch.setattr(web_app, "_repo", repo)
    return repo


@pytest.fixture
def client(repository):
    web_app.app.config["TESTING"] = True
    return web_app.app.test_client()


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.get_json()["status"] == "healthy"


def test_predict(client):
    response = client.post("/api/predict", json={"tar": 3.7, "t_draft_ms": 53.5, "t_target_ms": 60.03,
                                                 "alpha": 0.8, "gamma": 4})
    prediction = response.get_json()["prediction"]
    assert prediction["throughput"] == pytest.approx(32.59, abs=0.01)
    assert prediction["improvement_factor"] == pytest.approx(1 + 0.8 + 0.64 + 0.512 + 0.4096)


def test_predict_rejects_bad_input(client):
    response = client.post("/api/predict", json={"tar": "lots", "t_draft_ms": 1, "t_target_ms": 1})
    assert response.status_code == 400
    assert response.get_json()["success"] is False
    assert client.post("/api/predict", data="not json").status_code == 400


def test_parity_single(client):
    response = client.post("/api/parity", json={"tar": 3.4, "t_draft_ms": 79.8, "t_target_ms": 60.0,
                                                "baseline_throughput": 3.2 / 0.1037})
    parity = response.get_json()["parity"]
    assert parity["parity_latency_ms"] < 79.8
    assert 0 < parity["reduction_pct"] < 100


def test_parity_table(client):
    response = client.post("/api/parity", json={"rows": DRAFT_ROWS, "baseline": "opt-125m"})
    assert response.status_code == 200
    assert [row["model"] for row in response.get_json()["table"]] == ["opt-125m", "opt-350m"]


def test_parity_rejects_malformed_rows(client):
    response = client.post("/api/parity", json={"rows": [{"model_id": "x", "speed": 3}]})
    assert response.status_code == 400


def test_extra_tar_infeasible(client):
    response = client.post("/api/extra-tar", json={"tar": 4.0, "t_draft_ms": 139.5, "t_target_ms": 60.0,
                                                   "baseline_throughput": 60.0, "gamma": 7})
    result = response.get_json()["extra_tar"]
    assert result["feasible"] is False
    assert result["cap"] == 8


def test_required_tar(client):
    response = client.post("/api/required-tar", json={"throughput": 30, "t_target_ms": 60.0,
                                                      "t_draft_ms": 43.7, "gamma": 7})
    data = response.get_json()
    assert data["required_tar"] == pytest.approx(3.111)
    assert data["reachable"] is True
    assert data["cap"] == 8


def test_count_params(client):
    response = client.post("/api/count-params", json={"config": create_opt_125m_config().to_dict()})
    data = response.get_json()
    assert data["params"] == 125239296
    assert data["kv_bytes_per_token"] == 2 * 12 * 768 * 2
    assert data["formula"].startswith("V*d")


def test_count_params_rejects_unknown_fields(client):
    response = client.post("/api/count-params", json={"config": {"layers": 2}})
    assert response.status_code == 400


def test_results(client, repository):
    repository.save_record(ResultRecord(experiment_id="exp-9", kind="predict", metrics=[{"throughput": 1.0}],
                                        config_hash="h", seed=0))
    listed = client.get("/api/results?kind=predict").get_json()
    assert listed["count"] == 1
    detail = client.get("/api/results/exp-9").get_json()
    assert detail["results"][0]["metrics"] == [{"throughput": 1.0}]


def test_unknown_result(client):
    response = client.get("/api/results/missing")
    assert response.status_code == 404


def test_unknown_route_is_json(client):
    response = client.get("/nowhere")
    assert response.status_code == 404
    assert response.get_json() == {"error": "Not found"}


@pytest.mark.parametrize("route, payload", [
    ("/api/extra-tar", {"tar": 4.0, "t_draft_ms": 139.5, "t_target_ms": 60.0, "baseline_throughput": 60.0,
                        "gamma": "seven"}),
    ("/api/required-tar", {"throughput": 30, "t_target_ms": 60.0, "t_draft_ms": 43.7, "gamma": [7]}),
    ("/api/predict", {"tar": 3.7, "t_draft_ms": 53.5, "t_target_ms": 60.03, "alpha": 0.8, "gamma": 4.5}),
    ("/api/count-params", {"config": create_opt_125m_config().to_dict(), "bytes_per_element": "two"}),
])
def test_integer_fields_are_validated(client, route, payload):
    response = client.post(route, json=payload)
    assert response.status_code == 400
    assert response.get_json()["success"] is False
