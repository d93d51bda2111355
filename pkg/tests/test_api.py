import pytest
from fastapi.testclient import TestClient

from src import __version__
from src.api.main import app

SCENARIO = {
    "gains": [1e-8, 4e-8],
    "noise_power_mw": 3.98e-11,
    "p_max_mw": 16.0,
    "dc_bias": 20.0,
    "peak_intensity": 30.0,
    "pam_coefficient": 1.0,
}


@pytest.fixture
def client():
    return TestClient(app)


def test_health_check(client):
    response = client.get("/")
    assert response.status_code == 200
    assert response.json() == {"status": "noma-vlc is running", "version": __version__}


def test_solve(client):
    response = client.post("/api/solve", json={"scenario": SCENARIO})
    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "optimal"
    assert sum(body["powers_mw"]) == pytest.approx(16.0, rel=1e-6)


def test_solve_with_config(client):
    response = client.post("/api/solve", json={"scenario": SCENARIO, "config": {"max_outer": 1}})
    assert response.status_code == 200
    assert response.json()["status"] == "max_iterations"


def test_bad_scenario_names_the_field(client):
    response = client.post("/api/solve", json={"scenario": {**SCENARIO, "gains": [0.0, 1e-8]}})
    assert response.status_code == 422
    assert response.json()["detail"].startswith("gains[0]")


def test_bad_config_names_the_field(client):
    response = client.post("/api/solve", json={"scenario": SCENARIO, "config": {"warm_start": True}})
    assert response.status_code == 422
    assert response.json()["detail"].startswith("warm_start")


def test_sweep(client):
    response = client.post("/api/sweep", json={"scenario": SCENARIO, "p_max_values": [8.0, 16.0]})
    assert response.status_code == 200
    rows = response.json()
    assert [row["p_max_mw"] for row in rows] == [8.0, 16.0]
    assert all(row["status"] == "optimal" for row in rows)
    assert rows[1]["harmonic_objective"] <= rows[0]["harmonic_objective"]


def test_sweep_rejects_unsorted_values(client):
    response = client.post("/api/sweep", json={"scenario": SCENARIO, "p_max_values": [16.0, 8.0]})
    assert response.status_code == 422
    assert response.json()["detail"].startswith("p_max_values")
    assert "\n" not in response.json()["detail"]
    assert "strictly increasing" in response.json()["detail"]
