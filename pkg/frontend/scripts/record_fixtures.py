#!/usr/bin/env python3
"""Record API fixtures for the UI contract tests.

Spins up the service in-process around a small deterministic corpus, walks
the labeling loop once, and snapshots every response the frontend consumes.
Rerun after changing the server:  python3 frontend/scripts/record_fixtures.py
"""

import json
from pathlib import Path

from fastapi.testclient import TestClient

from commflow.server import create_app

HERE = Path(__file__).resolve().parent
FIXTURES = HERE.parent / "test" / "fixtures"

# alice<->bob is the classic two-burst pair; carol<->dave only stretches the
# corpus span to 803 days starting at the epoch (1970..1972, three years).
CORPUS = "\n".join(
    [
        "alice bob 0",
        "alice bob 1",
        "alice bob 2",
        "bob alice 100",
        "bob alice 101",
        "bob alice 102",
        "carol dave 40000000",
        "dave carol 69400000",
    ]
) + "\n"

DETECTION = {
    "sigma": 1.0,
    "h": 1.0,
    "grid_n": 512,
    "epsilon": 0.05,
    "epsilon_mode": "relative-to-peak",
}


def save(name: str, payload) -> None:
    path = FIXTURES / f"{name}.json"
    path.write_text(json.dumps(payload, indent=2) + "\n")
    print(f"wrote {path.relative_to(HERE.parent.parent)}")


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    client = TestClient(create_app(corpus_text=CORPUS))

    save("health", client.get("/api/health").json())
    save("pairs", client.get("/api/pairs").json())

    view = {k: DETECTION[k] for k in ("sigma", "h", "grid_n")}
    save("profile_alice_bob",
         client.get("/api/pairs/alice/bob/profile", params=view).json())

    episodes = client.get(
        "/api/pairs/alice/bob/episodes", params=DETECTION).json()
    save("episodes_alice_bob", episodes)

    refs = [ep["ref"] for ep in episodes["episodes"]]
    assert len(refs) == 2, f"expected the two-burst fixture, got {len(refs)}"

    sid = client.post("/api/sessions").json()["id"]
    client.put(f"/api/sessions/{sid}/labels",
               json={"episode_ref": refs[0], "label": "positive"})
    client.put(f"/api/sessions/{sid}/labels",
               json={"episode_ref": refs[1], "label": "negative"})

    save("train", client.post(
        f"/api/sessions/{sid}/models/relevant/train", json={}).json())
    save("predictions", client.get(
        f"/api/sessions/{sid}/models/relevant/predictions").json())
    save("predictions_conf90", client.get(
        f"/api/sessions/{sid}/models/relevant/predictions",
        params={"min_confidence": 0.9, "polarity": "positive"}).json())
    save("uncertain", client.get(
        f"/api/sessions/{sid}/models/relevant/uncertain",
        params={"limit": 10}).json())

    session = client.get(f"/api/sessions/{sid}").json()
    session["id"] = "fixture-session"  # recorded ids would churn on rerecord
    save("session", session)


if __name__ == "__main__":
    main()
