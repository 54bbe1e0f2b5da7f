"""HTTP service: endpoint behavior, error mapping, payload validation."""

import pytest
from fastapi.testclient import TestClient

from ehsched import __version__
from ehsched.service import app

client = TestClient(app)

WORKED_INSTANCE = {
    "bits": 2.0,
    "rx_power": 1.0,
    "rate": {"kind": "log2", "scale": 1.0},
    "tx": [{"t": 0.0, "e": 1.0}, {"t": 1.0, "e": 3.0}],
    "rx": [{"t": 0.0, "e": 1.0}],
}


class TestHealth:
    def test_health_reports_version(self):
        response = client.get("/health")
        assert response.status_code == 200
        body = response.json()
        assert body["status"] == "ok"
        assert body["version"] == __version__


class TestSolveOffline:
    def test_worked_instance(self):
        response = client.post("/solve/offline", json={"instance": WORKED_INSTANCE})
        assert response.status_code == 200
        body = response.json()
        assert body["finish"] == pytest.approx(1.3406842664338692, rel=1e-8)
        assert body["start"] == pytest.approx(0.3406842664338693, rel=1e-8)
        assert body["iterations"] == 1
        assert body["anchor_epoch"] == 1.0
        assert len(body["policy"]["segments"]) == 2
        assert body["policy"]["segments"][0]["power"] == pytest.approx(
            1.5167240050395339, rel=1e-8
        )
        assert body["notes"] == []
        assert len(body["duration_trace"]) == 2

    def test_infeasible_maps_to_unprocessable(self):
        bad = dict(WORKED_INSTANCE, bits=50.0)
        response = client.post("/solve/offline", json={"instance": bad})
        assert response.status_code == 422
        body = response.json()
        assert body["kind"] == "InsufficientHarvestError"
        assert "window" in body["detail"]

    def test_multi_purse_maps_to_unprocessable(self):
        bad = dict(
            WORKED_INSTANCE, rx=[{"t": 0.0, "e": 1.0}, {"t": 1.0, "e": 1.0}]
        )
        response = client.post("/solve/offline", json={"instance": bad})
        assert response.status_code == 422
        assert response.json()["kind"] == "OfflineRestrictionError"

    def test_malformed_payload_is_rejected(self):
        response = client.post("/solve/offline", json={"instance": {"bits": -1}})
        assert response.status_code == 422
        response = client.post("/solve/offline", json={})
        assert response.status_code == 422


class TestSolveOnline:
    def test_worked_instance(self):
        response = client.post("/solve/online", json={"instance": WORKED_INSTANCE})
        assert response.status_code == 200
        body = response.json()
        assert body["start"] == 1.0
        assert body["finish"] == pytest.approx(1.7519189409462603, rel=1e-8)
        assert len(body["power_steps"]) == 1
        assert body["ratio"]["basis"] == "exact-offline"
        assert body["ratio"]["ratio"] == pytest.approx(1.3067349149970447, rel=1e-7)

    def test_multi_purse_uses_lower_bound_basis(self):
        payload = dict(
            WORKED_INSTANCE,
            bits=1.5,
            rx=[{"t": 0.0, "e": 1.0}, {"t": 0.5, "e": 1.0}],
        )
        response = client.post("/solve/online", json={"instance": payload})
        assert response.status_code == 200
        assert response.json()["ratio"]["basis"] == "lower-bound"


class TestOracle:
    def test_explicit_grid(self):
        response = client.post(
            "/oracle", json={"instance": WORKED_INSTANCE, "grid_step": 1e-3}
        )
        assert response.status_code == 200
        body = response.json()
        assert body["grid_step"] == pytest.approx(1e-3)
        assert abs(body["finish"] - 1.3406842664338692) <= 2e-3

    def test_default_grid(self):
        response = client.post("/oracle", json={"instance": WORKED_INSTANCE})
        assert response.status_code == 200
        body = response.json()
        assert body["grid_step"] > 0.0


class TestVerify:
    def solved_policy(self):
        return client.post(
            "/solve/offline", json={"instance": WORKED_INSTANCE}
        ).json()["policy"]

    def test_solver_output_verifies(self):
        response = client.post(
            "/verify",
            json={"instance": WORKED_INSTANCE, "policy": self.solved_policy()},
        )
        assert response.status_code == 200
        body = response.json()
        assert body["ok"] is True
        assert body["feasible"] is True
        for name in (
            "bit_target",
            "monotone_powers",
            "epoch_boundaries",
            "duration_rule",
            "anchor_on_boundary",
        ):
            assert body[name]["passed"] is True, name

    def test_tampered_policy_fails(self):
        policy = self.solved_policy()
        for segment in policy["segments"]:
            segment["power"] *= 1.1
        response = client.post(
            "/verify", json={"instance": WORKED_INSTANCE, "policy": policy}
        )
        assert response.status_code == 200
        body = response.json()
        assert body["ok"] is False
        assert body["bit_target"]["passed"] is False

    def test_custom_tolerance_is_honored(self):
        policy = self.solved_policy()
        response = client.post(
            "/verify",
            json={"instance": WORKED_INSTANCE, "policy": policy, "tol": 1e-12},
        )
        assert response.status_code == 200
        assert response.json()["ok"] is False


class TestGenerate:
    def test_seeded_generation_is_stable(self):
        request = {"spec": {}, "seed": 7}
        first = client.post("/generate", json=request).json()
        second = client.post("/generate", json=request).json()
        assert first == second
        assert first["digest"] == "3115c07b0f2d7af4"
        assert first["instance"]["tx"][0]["t"] == 0.0

    def test_generated_instance_solves(self):
        body = client.post("/generate", json={"spec": {}, "seed": 3}).json()
        response = client.post("/solve/offline", json={"instance": body["instance"]})
        assert response.status_code == 200

    def test_spec_overrides(self):
        body = client.post(
            "/generate",
            json={"spec": {"rate_kind": "ln", "rx_power": 2.0}, "seed": 1},
        ).json()
        assert body["instance"]["rate"]["kind"] == "ln"
        assert body["instance"]["rx_power"] == 2.0


class TestExperiment:
    def test_small_campaign(self):
        response = client.post(
            "/experiment",
            json={"instances": 6, "master_seed": 3, "oracle_instances": 2},
        )
        assert response.status_code == 200
        body = response.json()
        assert body["ok"] is True
        assert body["failures"] == 0
        assert body["instances"] == 6
        assert body["max_ratio"] < 2.0
        assert body["records"] is None

    def test_records_can_be_included(self):
        response = client.post(
            "/experiment",
            json={
                "instances": 4,
                "master_seed": 3,
                "oracle_instances": 0,
                "include_records": True,
            },
        )
        body = response.json()
        assert len(body["records"]) == 4
        assert body["records"][0]["ok"] is True
        assert body["records"][0]["error"] == ""

    def test_empty_campaign(self):
        response = client.post("/experiment", json={"instances": 0})
        assert response.status_code == 200
        body = response.json()
        assert body["ok"] is True
        assert body["instances"] == 0
        assert body["max_ratio"] is None

    def test_invalid_config_is_rejected(self):
        response = client.post("/experiment", json={"instances": -1})
        assert response.status_code == 422
