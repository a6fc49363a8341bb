import pytest
from fastapi.testclient import TestClient

from pqa import sampledata
from pqa.config import EngineConfig
from pqa.engine import Engine
from pqa.service import create_app

from conftest import STUDENT_QUERY


@pytest.fixture
def client(tmp_path):
    engine = Engine(EngineConfig(data_dir=tmp_path / "svc"))
    return TestClient(create_app(engine))


def test_create_session_distinct_ids(client):
    a = client.post("/v1/sessions").json()
    b = client.post("/v1/sessions").json()
    assert a["session_id"] != b["session_id"]
    assert a["phase"] == "await_query"


def test_unknown_session_404(client):
    response = client.get("/v1/sessions/nope")
    assert response.status_code == 404
    body = response.json()
    assert body["error"]["code"] == "unknown_session"
    assert "message" in body["error"]


def test_full_flow_over_http(client):
    csv_text = sampledata.student_performance_csv()
    upload = client.post("/v1/datasets?name=Student_Performance", content=csv_text)
    assert upload.status_code == 201
    assert upload.json()["row_count"] == 10000

    session_id = client.post("/v1/sessions").json()["session_id"]
    offer = client.post(f"/v1/sessions/{session_id}/messages", json={"text": STUDENT_QUERY})
    assert offer.json()["kind"] == "train_offer"
    client.post(f"/v1/sessions/{session_id}/messages", json={"text": "new"})
    answer = client.post(
        f"/v1/sessions/{session_id}/messages", json={"text": "linear_regression"}
    ).json()
    assert answer["kind"] == "answer"
    assert answer["payload"]["prediction"] == pytest.approx(91.89, abs=2.0)

    # two-message matched-model script in a fresh session
    session2 = client.post("/v1/sessions").json()["session_id"]
    card = client.post(f"/v1/sessions/{session2}/messages", json={"text": STUDENT_QUERY}).json()
    assert card["kind"] == "candidate_card"
    final = client.post(f"/v1/sessions/{session2}/messages", json={"text": "yes"}).json()
    assert final["kind"] == "answer"
    assert isinstance(final["payload"]["prediction"], float)


def test_oversize_message_rejected(client):
    session_id = client.post("/v1/sessions").json()["session_id"]
    response = client.post(
        f"/v1/sessions/{session_id}/messages", json={"text": "x" * 9216}
    )
    assert response.status_code == 413
    assert "error" in response.json()


def test_help_routes_to_guide(client):
    session_id = client.post("/v1/sessions").json()["session_id"]
    reply = client.post(f"/v1/sessions/{session_id}/messages", json={"text": "help"}).json()
    assert reply["kind"] == "guide"
    state = client.get(f"/v1/sessions/{session_id}").json()
    assert [role for role, _ in state["transcript"]] == ["user", "system"]


def test_concurrent_sessions_and_ingest(tmp_path):
    import threading

    engine = Engine(EngineConfig(data_dir=tmp_path / "conc"))
    engine.ingest_dataset(sampledata.student_performance_csv(), "Student_Performance")
    errors = []

    def chat_worker(i):
        try:
            session = engine.create_session()
            for text in ("help", STUDENT_QUERY, "new"):
                engine.handle_message(session.id, text)
        except Exception as exc:  # surfaced after join
            errors.append(exc)

    def ingest_worker():
        try:
            engine.ingest_dataset(sampledata.medical_insurance_csv(), "insurance")
        except Exception as exc:
            errors.append(exc)

    threads = [threading.Thread(target=chat_worker, args=(i,)) for i in range(6)]
    threads.append(threading.Thread(target=ingest_worker))
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert errors == []
    assert {d.name for d in engine.list_datasets()} == {"Student_Performance", "insurance"}


def test_dataset_endpoints(client):
    client.post("/v1/datasets?name=insurance", content=sampledata.medical_insurance_csv())
    listing = client.get("/v1/datasets").json()["datasets"]
    assert [d["name"] for d in listing] == ["insurance"]
    assert listing[0]["row_count"] == 1338
    assert len(listing[0]["columns"]) == 7

    duplicate = client.post("/v1/datasets?name=insurance", content="a,b\n1,2\n")
    assert duplicate.status_code == 409
    assert duplicate.json()["error"]["code"] == "duplicate_name"

    missing = client.get("/v1/datasets/nope/profile")
    assert missing.status_code == 404


def test_profile_endpoint_byte_identical(tmp_path):
    engine = Engine(EngineConfig(data_dir=tmp_path / "svc2"))
    client = TestClient(create_app(engine))
    client.post("/v1/datasets?name=Real_estate", content=sampledata.REAL_ESTATE_CSV)
    via_http = client.get("/v1/datasets/Real_estate/profile").text
    assert via_http == engine.get_dataset("Real_estate").profile_text


def test_model_list_sorted_and_profile_exact(client):
    client.post("/v1/datasets?name=Student_Performance", content=sampledata.student_performance_csv())
    session_id = client.post("/v1/sessions").json()["session_id"]
    client.post(f"/v1/sessions/{session_id}/messages", json={"text": STUDENT_QUERY})
    client.post(f"/v1/sessions/{session_id}/messages", json={"text": "new"})
    client.post(f"/v1/sessions/{session_id}/messages", json={"text": "linear_regression"})

    models = client.get("/v1/models").json()["models"]
    assert [m["name"] for m in models] == sorted(m["name"] for m in models)
    name = models[0]["name"]
    text = client.get(f"/v1/models/{name}/profile").text
    assert text.startswith(f"Model Name: {name}")
    assert client.get("/v1/models/ghost/profile").status_code == 404


def test_restart_preserves_catalog_and_replies(tmp_path):
    data_dir = tmp_path / "durable"
    engine = Engine(EngineConfig(data_dir=data_dir))
    client = TestClient(create_app(engine))
    client.post("/v1/datasets?name=Student_Performance", content=sampledata.student_performance_csv())
    session_id = client.post("/v1/sessions").json()["session_id"]
    client.post(f"/v1/sessions/{session_id}/messages", json={"text": STUDENT_QUERY})
    client.post(f"/v1/sessions/{session_id}/messages", json={"text": "new"})
    client.post(f"/v1/sessions/{session_id}/messages", json={"text": "linear_regression"})
    model_name = client.get("/v1/models").json()["models"][0]["name"]
    profile_before = client.get(f"/v1/models/{model_name}/profile").text
    dataset_before = client.get("/v1/datasets/Student_Performance/profile").text

    restarted = TestClient(create_app(Engine(EngineConfig(data_dir=data_dir))))
    assert restarted.get(f"/v1/models/{model_name}/profile").text == profile_before
    assert restarted.get("/v1/datasets/Student_Performance/profile").text == dataset_before

    session2 = restarted.post("/v1/sessions").json()["session_id"]
    card = restarted.post(f"/v1/sessions/{session2}/messages", json={"text": STUDENT_QUERY}).json()
    assert card["kind"] == "candidate_card"
    assert card["payload"]["model"] == model_name


def test_session_transcript_persisted(tmp_path):
    data_dir = tmp_path / "transcripts"
    engine = Engine(EngineConfig(data_dir=data_dir))
    client = TestClient(create_app(engine))
    session_id = client.post("/v1/sessions").json()["session_id"]
    client.post(f"/v1/sessions/{session_id}/messages", json={"text": "help"})
    log = (data_dir / "sessions" / f"{session_id}.jsonl").read_text().splitlines()
    assert len(log) == 2  # user line + system line
