import time

import pytest
from fastapi.testclient import TestClient

from fmkit.service import ServiceConfig, create_app

from conftest import CAR_UVL


def slow_model_text(n=30):
    lines = ["features", "\tRoot", "\t\toptional"]
    lines += [f"\t\t\tC{i}" for i in range(n)]
    return "\n".join(lines) + "\n"


@pytest.fixture()
def client():
    app = create_app(ServiceConfig())
    with TestClient(app) as c:
        yield c


def submit(client, operation, text=CAR_UVL, fmt="uvl", params=None):
    body = {"operation": operation, "model": {"format": fmt, "text": text}}
    if params:
        body["params"] = params
    response = client.post("/jobs", json=body)
    assert response.status_code == 202
    return response.json()["jobId"]


def wait_for(client, job_id, timeout=30.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        body = client.get(f"/jobs/{job_id}").json()
        if body["status"] in ("DONE", "FAILED"):
            return body
        time.sleep(0.01)
    raise AssertionError(f"job {job_id} did not finish: {body}")


def test_healthz(client):
    response = client.get("/healthz")
    assert response.status_code == 200
    assert response.json() == "ok"


def test_analyze_job_lifecycle(client):
    job_id = submit(client, "ANALYZE")
    first = client.get(f"/jobs/{job_id}").json()
    assert first["status"] in ("PENDING", "RUNNING", "DONE")
    body = wait_for(client, job_id)
    assert body["status"] == "DONE"
    assert body["operation"] == "ANALYZE"
    assert body["finishedAt"] >= body["submittedAt"]
    assert body["result"]["void"] is False
    assert body["result"]["core"] == ["Car", "Engine"]
    assert body["result"]["dead"] == []
    assert body["result"]["falseOptional"] == []


def test_transform_job(client):
    job_id = submit(client, "TRANSFORM", params={"to": "xml"})
    body = wait_for(client, job_id)
    assert body["status"] == "DONE"
    assert body["result"]["format"] == "xml"
    assert "<featureModel>" in body["result"]["text"]

    job_id = submit(client, "TRANSFORM", params={"to": "dimacs"})
    body = wait_for(client, job_id)
    assert body["status"] == "DONE"
    assert body["result"]["text"].splitlines()[0] == "c 1 Car"

    job_id = submit(client, "TRANSFORM", params={"to": "svg"})
    body = wait_for(client, job_id)
    assert body["status"] == "FAILED"
    assert body["error"]["code"] == "unsupported-direction"


def test_count_job(client):
    job_id = submit(client, "COUNT")
    body = wait_for(client, job_id)
    assert body["status"] == "DONE"
    assert body["result"] == {"count": 3}

    job_id = submit(client, "COUNT", text=slow_model_text(30), params={"bound": 5})
    body = wait_for(client, job_id)
    assert body["status"] == "FAILED"
    assert body["error"]["code"] == "enumeration-bound"


def test_slice_job(client):
    job_id = submit(client, "SLICE", params={"remove": ["Electric"]})
    body = wait_for(client, job_id)
    assert body["status"] == "DONE"
    assert "Electric" not in body["result"]["model"]["text"]
    assert body["result"]["derivedConstraints"] == ["!Gas | !Radio"]


def test_sample_job_deterministic(client):
    results = []
    for _ in range(2):
        job_id = submit(client, "SAMPLE", params={"t": 2, "seed": 9})
        body = wait_for(client, job_id)
        assert body["status"] == "DONE"
        assert body["result"]["coverage"]["ratio"] == 1.0
        results.append(body["result"]["configurations"])
    assert results[0] == results[1]


def test_propagate_job_and_sync_endpoint(client):
    params = {"select": ["Radio"]}
    job_id = submit(client, "PROPAGATE", params=params)
    body = wait_for(client, job_id)
    assert body["status"] == "DONE"

    sync = client.post(
        "/propagate",
        json={"model": {"format": "uvl", "text": CAR_UVL}, "params": params},
    )
    assert sync.status_code == 200
    result = sync.json()
    assert result == body["result"]
    assert result["valid"] is True
    assert result["states"]["Electric"] == {"state": "selected", "provenance": "implied"}
    assert result["states"]["Gas"] == {"state": "deselected", "provenance": "implied"}
    assert result["open"] == []


def test_propagate_conflict(client):
    sync = client.post(
        "/propagate",
        json={
            "model": {"format": "uvl", "text": CAR_UVL},
            "params": {"select": ["Radio", "Gas"]},
        },
    )
    assert sync.status_code == 200
    result = sync.json()
    assert result["valid"] is False
    assert result["open"] == []
    assert result["conflict"]


def test_error_responses(client):
    # unknown operation is rejected at submission time
    response = client.post(
        "/jobs",
        json={"operation": "EXPLODE", "model": {"format": "uvl", "text": CAR_UVL}},
    )
    assert response.status_code == 400
    assert response.json()["code"] == "unknown-operation"

    # malformed body
    response = client.post("/jobs", content=b"not json")
    assert response.status_code == 400
    assert response.json()["code"] == "invalid-json"

    # unknown job
    response = client.get("/jobs/doesnotexist")
    assert response.status_code == 404
    assert response.json()["code"] == "unknown-job"

    # parse failures surface as failed jobs with diagnostics in the message
    job_id = submit(client, "ANALYZE", text="features\n\tA\n  B\n")
    body = wait_for(client, job_id)
    assert body["status"] == "FAILED"
    assert body["error"]["code"] == "parse-error"

    # synchronous endpoints report parse diagnostics directly
    response = client.post(
        "/propagate", json={"model": {"format": "uvl", "text": "constraints\nA\n"}}
    )
    assert response.status_code == 400
    assert response.json()["code"] == "parse-error"
    assert response.json()["diagnostics"]

    # export-only formats cannot be submitted as input
    response = client.post(
        "/propagate", json={"model": {"format": "dimacs", "text": "p cnf 0 0"}}
    )
    assert response.status_code == 400


def test_model_size_limit():
    app = create_app(ServiceConfig(model_size_limit=64))
    with TestClient(app) as client:
        response = client.post(
            "/jobs",
            json={"operation": "ANALYZE", "model": {"format": "uvl", "text": "x" * 100}},
        )
        assert response.status_code == 413
        assert response.json()["code"] == "model-too-large"


def test_cancel_pending_and_running():
    app = create_app(ServiceConfig(workers=1))
    with TestClient(app) as client:
        slow = submit(client, "SAMPLE", text=slow_model_text(30), params={"t": 3})
        queued = submit(client, "ANALYZE")
        # the queued job is canceled before it ever runs
        body = client.post(f"/jobs/{queued}/cancel").json()
        assert body["status"] == "FAILED"
        assert body["error"]["code"] == "canceled"

        # the running job observes its cancel checkpoint quickly
        client.post(f"/jobs/{slow}/cancel")
        start = time.time()
        body = wait_for(client, slow, timeout=5)
        assert body["status"] == "FAILED"
        assert body["error"]["code"] == "canceled"
        assert time.time() - start < 1.0

        # canceling a finished job leaves it untouched
        done = submit(client, "COUNT")
        body = wait_for(client, done)
        assert body["status"] == "DONE"
        body = client.post(f"/jobs/{done}/cancel").json()
        assert body["status"] == "DONE"
        assert body["result"] == {"count": 3}


def test_service_stays_live_during_slow_job(client):
    slow = submit(client, "SAMPLE", text=slow_model_text(30), params={"t": 3})
    fast = submit(client, "ANALYZE")
    body = wait_for(client, fast, timeout=10)
    assert body["status"] == "DONE"
    slow_status = client.get(f"/jobs/{slow}").json()["status"]
    assert slow_status in ("PENDING", "RUNNING")
    client.post(f"/jobs/{slow}/cancel")
    wait_for(client, slow, timeout=5)


def test_job_store_eviction():
    app = create_app(ServiceConfig(job_store_size=2))
    with TestClient(app) as client:
        first = submit(client, "COUNT")
        wait_for(client, first)
        submit(client, "COUNT")
        submit(client, "COUNT")
        response = client.get(f"/jobs/{first}")
        assert response.status_code == 404


def test_websocket_session_flow(client):
    response = client.post(
        "/sessions",
        json={"model": {"format": "uvl", "text": CAR_UVL}, "hostName": "Alice"},
    )
    assert response.status_code == 200
    session = response.json()
    sid = session["sessionId"]
    assert session["shareLink"].endswith(sid)

    path = f"/sessions/{sid}/socket"
    with client.websocket_connect(path) as host:
        host.send_json({"type": "Join", "payload": {"name": "Alice"}})
        welcome = host.receive_json()
        assert welcome["type"] == "Welcome"
        assert welcome["payload"]["participantId"] == "p1"
        assert welcome["payload"]["editor"] == "p1"
        assert "Car" in welcome["payload"]["model"]

        with client.websocket_connect(path) as guest:
            guest.send_json({"type": "Join", "payload": {"name": "Bob"}})
            guest_welcome = guest.receive_json()
            assert guest_welcome["type"] == "Welcome"
            guest_pid = guest_welcome["payload"]["participantId"]
            assert guest_pid != "p1"
            update = host.receive_json()
            assert update["type"] == "ParticipantUpdate"
            assert update["payload"]["joined"] == "Bob"

            # host edits; both sockets receive the sequenced broadcast
            host.send_json(
                {
                    "type": "ApplyOp",
                    "sessionId": sid,
                    "payload": {
                        "op": {"kind": "CreateFeature", "name": "Nav", "parent": "Car"}
                    },
                }
            )
            for ws in (host, guest):
                broadcast = ws.receive_json()
                assert broadcast["type"] == "ApplyOp"
                assert broadcast["seq"] == 1

            # guest edits without the token and is rejected privately
            guest.send_json(
                {
                    "type": "ApplyOp",
                    "sessionId": sid,
                    "payload": {
                        "op": {"kind": "CreateFeature", "name": "USB", "parent": "Car"}
                    },
                }
            )
            reject = guest.receive_json()
            assert reject["type"] == "Reject"

            guest.send_json({"type": "Leave", "sessionId": sid})
            left = host.receive_json()
            assert left["type"] == "ParticipantUpdate"
            assert left["payload"]["left"] == "Bob"


def test_websocket_unknown_session(client):
    with client.websocket_connect("/sessions/nope/socket") as ws:
        reject = ws.receive_json()
        assert reject["type"] == "Reject"


def test_websocket_requires_join_handshake(client):
    response = client.post(
        "/sessions", json={"model": {"format": "uvl", "text": CAR_UVL}}
    )
    sid = response.json()["sessionId"]
    with client.websocket_connect(f"/sessions/{sid}/socket") as ws:
        ws.send_json({"type": "Undo", "sessionId": sid})
        reject = ws.receive_json()
        assert reject["type"] == "Reject"


def test_config_from_env(monkeypatch):
    monkeypatch.setenv("FMKIT_PORT", "9101")
    monkeypatch.setenv("FMKIT_WORKERS", "3")
    monkeypatch.setenv("FMKIT_ENUM_BOUND", "10")
    monkeypatch.setenv("FMKIT_JOB_STORE_SIZE", "5")
    config = ServiceConfig.from_env()
    assert config.port == 9101
    assert config.workers == 3
    assert config.enumeration_bound == 10
    assert config.job_store_size == 5
