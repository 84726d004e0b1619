"""Drive the HTTP API end to end against an in-process server.

Run:  python3 demos/07_http_service.py
"""

import io
import time
import zipfile

from fastapi.testclient import TestClient

from privcharts.data import to_csv
from privcharts.fixtures import adult_like
from privcharts.service import create_app

app = create_app(state_dir=None)
client = TestClient(app)

sid = client.post("/sessions").json()["id"]
print("session:", sid)

r = client.post(f"/sessions/{sid}/dataset", content=to_csv(adult_like(n=400)))
print("upload:", r.json()["rows"], "rows")

r = client.put(f"/sessions/{sid}/filter", json={"intervals": {"age": [18, 75]}})
print("filtered rows:", r.json()["rows"])

cid = client.post(
    f"/sessions/{sid}/charts", json={"chart_type": "scatter", "x": "bmi", "y": "charges"}
).json()["id"]
points = client.get(f"/sessions/{sid}/charts/{cid}/data").json()["data"]
print(f"chart {cid}: {len(points)} points")

pattern = client.post(
    f"/sessions/{sid}/patterns",
    json={"chart": cid, "selection": {"kind": "region", "rect": [40, 32, 50, 50]}, "weight": 1.0},
).json()
print(f"pattern {pattern['id']}: {len(pattern['records'])} records")

r = client.post(f"/sessions/{sid}/schemes", json={"epsilon": 2.0, "k": 1, "seed": 3})
scheme_id = r.json()["id"]
while client.get(f"/sessions/{sid}/schemes/{scheme_id}").json()["status"] != "complete":
    time.sleep(0.1)
print("scheme complete:", scheme_id)

report = client.get(f"/sessions/{sid}/schemes/{scheme_id}/metrics").json()
print("mean attribute fidelity:", round(report["summary"]["mean_attribute_fidelity"], 4))

export = client.get(f"/sessions/{sid}/schemes/{scheme_id}/export")
archive = zipfile.ZipFile(io.BytesIO(export.content))
print("export contains:", sorted(archive.namelist()))
