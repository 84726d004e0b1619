"""Stateful HTTP facade: sessions, dataset upload, chart/pattern/weight
configuration, asynchronous scheme generation, and analytics endpoints.

Raw record rows leave the service only through the chart-data and flow
endpoints (trust-zone views for the data custodian); scheme exports carry
synthetic data and aggregate reports only.
"""

from __future__ import annotations

import io
import json
import os
import threading
import zipfile
from dataclasses import dataclass, field
from typing import Optional

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import analytics
from .charts import (
    PATTERN_FOR_CHART,
    ChartError,
    ChartSpec,
    PatternCatalog,
    Selection,
    render_chart_data,
)
from .data import (
    DataError,
    Dataset,
    FilterSpec,
    apply_filter,
    discretize_all,
    load_csv,
    to_csv,
)
from .engine import Scheme, generate_scheme, load_scheme, save_scheme
from .mechanisms import MechanismError, split_budget
from .metrics import evaluate_scheme


class ApiError(Exception):
    def __init__(self, status: int, message: str):
        self.status = status
        self.message = message


@dataclass
class SessionState:
    id: str
    dataset: Dataset | None = None
    filter: FilterSpec = field(default_factory=FilterSpec)
    working: Dataset | None = None
    disc: dict | None = None
    charts: dict = field(default_factory=dict)
    catalog: PatternCatalog = field(default_factory=PatternCatalog)
    schemes: dict = field(default_factory=dict)
    scheme_status: dict = field(default_factory=dict)
    reports: dict = field(default_factory=dict)
    next_chart: int = 0
    next_scheme: int = 0
    defaults: dict = field(
        default_factory=lambda: {"max_bins": 8, "k": 2, "structure_fraction": 0.5}
    )
    lock: threading.Lock = field(default_factory=threading.Lock)
    generating: bool = False


class ServiceStore:
    """All sessions plus their on-disk persistence root."""

    def __init__(self, state_dir: str | None = None, max_bins: int = 8, default_k: int = 2):
        self.state_dir = state_dir
        self.max_bins = max_bins
        self.default_k = default_k
        self._sessions: dict[str, SessionState] = {}
        self._next = 0
        self._lock = threading.Lock()

    def create_session(self) -> SessionState:
        with self._lock:
            sid = f"s{self._next}"
            self._next += 1
            session = SessionState(id=sid)
            session.defaults["max_bins"] = self.max_bins
            session.defaults["k"] = self.default_k
            self._sessions[sid] = session
            return session

    def get(self, sid: str) -> SessionState:
        try:
            return self._sessions[sid]
        except KeyError:
            raise ApiError(404, f"unknown session {sid!r}") from None

    # ----- persistence -----

    def session_dir(self, sid: str) -> str:
        return os.path.join(self.state_dir, "sessions", sid)

    def persist(self, session: SessionState) -> None:
        if not self.state_dir:
            return
        root = self.session_dir(session.id)
        os.makedirs(root, exist_ok=True)
        meta = {
            "v": 1,
            "id": session.id,
            "filter": session.filter.to_json(),
            "charts": {cid: spec.to_json() for cid, spec in session.charts.items()},
            "patterns": [p.to_json() for p in session.catalog.list()],
            "next_chart": session.next_chart,
            "next_scheme": session.next_scheme,
            "next_pattern": session.catalog._next_id,
            "defaults": session.defaults,
            "schemes": {
                sid: session.scheme_status[sid] for sid in session.schemes
            },
        }
        with open(os.path.join(root, "session.json"), "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
        if session.dataset is not None:
            with open(os.path.join(root, "dataset.csv"), "w", encoding="utf-8") as fh:
                fh.write(to_csv(session.dataset))
            with open(os.path.join(root, "schema.json"), "w", encoding="utf-8") as fh:
                json.dump([a.to_json() for a in session.dataset.schema], fh, indent=2)
        for scheme_id, scheme in session.schemes.items():
            sdir = os.path.join(root, "schemes", scheme_id)
            if not os.path.exists(os.path.join(sdir, "scheme.json")):
                save_scheme(scheme, sdir)
                report = session.reports.get(scheme_id)
                if report is not None:
                    with open(os.path.join(sdir, "metrics.json"), "w", encoding="utf-8") as fh:
                        json.dump(report.to_json(), fh, indent=2, sort_keys=True)

    def restore(self, sid: str) -> SessionState:
        root = self.session_dir(sid)
        path = os.path.join(root, "session.json")
        if not os.path.exists(path):
            raise ApiError(404, f"no persisted session {sid!r}")
        try:
            with open(path, encoding="utf-8") as fh:
                meta = json.load(fh)
            session = SessionState(id=sid)
            session.defaults = meta["defaults"]
            schema = None
            if os.path.exists(os.path.join(root, "dataset.csv")):
                from .data import Attribute

                with open(os.path.join(root, "schema.json"), encoding="utf-8") as fh:
                    schema = [Attribute.from_json(a) for a in json.load(fh)]
                with open(os.path.join(root, "dataset.csv"), encoding="utf-8") as fh:
                    session.dataset = load_csv(fh.read(), schema=schema)
            session.filter = FilterSpec.from_json(meta["filter"])
            if session.dataset is not None:
                _refresh_working(session)
            session.charts = {
                cid: ChartSpec.from_json(obj) for cid, obj in meta["charts"].items()
            }
            session.next_chart = meta["next_chart"]
            session.next_scheme = meta["next_scheme"]
            from .charts import PatternConstraint

            for pobj in meta["patterns"]:
                pattern = PatternConstraint.from_json(pobj)
                session.catalog._patterns[pattern.id] = pattern
            session.catalog._next_id = meta["next_pattern"]
            for scheme_id, status in meta.get("schemes", {}).items():
                sdir = os.path.join(root, "schemes", scheme_id)
                if status == "complete" and os.path.exists(sdir):
                    session.schemes[scheme_id] = load_scheme(sdir, session.dataset.schema)
                    session.scheme_status[scheme_id] = "complete"
            self._sessions[sid] = session
            parsed = [int(s[1:]) for s in self._sessions if s[1:].isdigit()]
            self._next = max(self._next, max(parsed) + 1 if parsed else 0)
            return session
        except (KeyError, ValueError, DataError) as exc:
            raise ApiError(500, f"corrupt session store for {sid!r}: {exc}") from exc


def _refresh_working(session: SessionState) -> None:
    """Re-filter the dataset, re-discretize, and re-resolve saved patterns."""
    session.working = apply_filter(session.dataset, session.filter)
    session.disc = discretize_all(session.working, session.defaults["max_bins"])
    from .charts import resolve_pattern
    from dataclasses import replace

    for pattern in session.catalog.list():
        spec = session.charts.get(pattern.chart_id)
        if spec is None:
            continue
        records = resolve_pattern(session.working, spec, pattern.selection)
        session.catalog._patterns[pattern.id] = replace(
            pattern, records=tuple(int(i) for i in records)
        )


def _require_dataset(session: SessionState) -> Dataset:
    if session.working is None:
        raise ApiError(400, "no dataset uploaded for this session")
    return session.working


async def _json_body(request: Request) -> dict:
    try:
        body = await request.json()
    except Exception:
        raise ApiError(400, "invalid JSON body") from None
    if not isinstance(body, dict):
        raise ApiError(400, "body must be a JSON object")
    return body


def create_app(state_dir: str | None = None, max_bins: int = 8, default_k: int = 2, static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="privcharts", version="1")
    store = ServiceStore(state_dir=state_dir, max_bins=max_bins, default_k=default_k)
    app.state.store = store

    @app.exception_handler(ApiError)
    async def _api_error(_req, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={"v": 1, "error": exc.message})

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_req, exc):
        return JSONResponse(status_code=400, content={"v": 1, "error": str(exc)})

    @app.exception_handler(ChartError)
    async def _chart_error(_req, exc):
        return JSONResponse(status_code=422, content={"v": 1, "error": str(exc)})

    @app.exception_handler(DataError)
    async def _data_error(_req, exc):
        return JSONResponse(status_code=400, content={"v": 1, "error": str(exc)})

    @app.exception_handler(MechanismError)
    async def _mech_error(_req, exc):
        return JSONResponse(status_code=400, content={"v": 1, "error": str(exc)})

    # ----- sessions -----

    @app.post("/sessions", status_code=201)
    def create_session():
        session = store.create_session()
        store.persist(session)
        return {"v": 1, "id": session.id}

    @app.post("/sessions/{sid}/dataset")
    async def upload_dataset(sid: str, request: Request):
        session = store.get(sid)
        content_type = request.headers.get("content-type", "")
        schema = None
        if content_type.startswith("multipart/form-data"):
            form = await request.form()
            if "file" not in form:
                raise ApiError(400, "multipart upload needs a 'file' field")
            csv_text = (await form["file"].read()).decode("utf-8")
            if "schema" in form:
                schema = json.loads(form["schema"])  # descriptors; domains may be omitted
        else:
            csv_text = (await request.body()).decode("utf-8")
        session.dataset = load_csv(csv_text, schema=schema)
        session.filter = FilterSpec()
        _refresh_working(session)
        store.persist(session)
        return {
            "v": 1,
            "rows": session.dataset.n,
            "attributes": [a.to_json() for a in session.dataset.schema],
        }

    @app.put("/sessions/{sid}/filter")
    async def put_filter(sid: str, request: Request):
        session = store.get(sid)
        _require_dataset(session)
        body = await _json_body(request)
        session.filter = FilterSpec.from_json(body)
        _refresh_working(session)
        store.persist(session)
        return {"v": 1, "rows": session.working.n}

    # ----- charts -----

    @app.post("/sessions/{sid}/charts", status_code=201)
    async def post_chart(sid: str, request: Request):
        session = store.get(sid)
        ds = _require_dataset(session)
        body = await _json_body(request)
        cid = f"c{session.next_chart}"
        try:
            spec = ChartSpec.from_json({**body, "id": cid})
            spec.validate(ds.schema)
        except (KeyError, TypeError) as exc:
            raise ApiError(400, f"invalid chart spec: {exc}") from None
        session.charts[cid] = spec
        session.next_chart += 1
        store.persist(session)
        return {"v": 1, "id": cid}

    @app.get("/sessions/{sid}/charts/{cid}/data")
    def get_chart_data(sid: str, cid: str):
        session = store.get(sid)
        ds = _require_dataset(session)
        spec = session.charts.get(cid)
        if spec is None:
            raise ApiError(404, f"unknown chart {cid!r}")
        return render_chart_data(ds, spec).to_json()

    # ----- patterns -----

    @app.post("/sessions/{sid}/patterns", status_code=201)
    async def post_pattern(sid: str, request: Request):
        session = store.get(sid)
        ds = _require_dataset(session)
        body = await _json_body(request)
        chart_id = body.get("chart")
        spec = session.charts.get(chart_id)
        if spec is None:
            raise ApiError(404, f"unknown chart {chart_id!r}")
        try:
            selection = Selection.from_json(body.get("selection", {}))
            weight = float(body.get("weight", 0.0))
        except (KeyError, TypeError, ValueError) as exc:
            raise ApiError(400, f"invalid pattern body: {exc}") from None
        if weight < 0:
            raise ApiError(400, "weight must be >= 0")
        pattern = session.catalog.add(ds, spec, selection, weight)
        store.persist(session)
        return pattern.to_json()

    @app.patch("/sessions/{sid}/patterns/{pid}")
    async def patch_pattern(sid: str, pid: str, request: Request):
        session = store.get(sid)
        body = await _json_body(request)
        if "weight" not in body:
            raise ApiError(400, "a weight field is required")
        weight = float(body["weight"])
        if weight < 0:
            raise ApiError(400, "weight must be >= 0")
        try:
            updated = session.catalog.set_weight(pid, weight)
        except ChartError:
            raise ApiError(404, f"unknown pattern {pid!r}") from None
        store.persist(session)
        return updated.to_json()

    @app.delete("/sessions/{sid}/patterns/{pid}", status_code=204)
    def delete_pattern(sid: str, pid: str):
        session = store.get(sid)
        try:
            session.catalog.remove(pid)
        except ChartError:
            raise ApiError(404, f"unknown pattern {pid!r}") from None
        store.persist(session)
        return Response(status_code=204)

    @app.get("/sessions/{sid}/patterns")
    def list_patterns(sid: str):
        session = store.get(sid)
        return {"v": 1, "patterns": [p.to_json() for p in session.catalog.list()]}

    # ----- analytics -----

    @app.get("/sessions/{sid}/analytics/relationship")
    def get_relationship(sid: str):
        session = store.get(sid)
        ds = _require_dataset(session)
        patterns = session.catalog.list()
        if not patterns:
            raise ApiError(422, "relationship analytics needs at least one pattern")
        graph = analytics.relationship_graph(ds, patterns, session.defaults["k"], session.disc)
        return graph.to_json()

    @app.get("/sessions/{sid}/analytics/flow")
    def get_flow(sid: str, highlight: Optional[str] = None):
        session = store.get(sid)
        ds = _require_dataset(session)
        pattern = session.catalog.get(highlight) if highlight else None
        flow = analytics.sankey_flow(
            ds, session.disc, [a.name for a in ds.schema], highlight=pattern
        )
        return flow.to_json()

    @app.get("/sessions/{sid}/analytics/network")
    def get_network(sid: str, scheme: str):
        session = store.get(sid)
        sch = session.schemes.get(scheme)
        if sch is None:
            raise ApiError(404, f"unknown scheme {scheme!r}")
        layout = analytics.network_layout(sch.network)
        return {"v": 1, "network": sch.network.to_json(), "layout": layout.to_json()}

    @app.get("/sessions/{sid}/analytics/distributions")
    def get_distributions(sid: str, attr: str, scheme: str):
        session = store.get(sid)
        ds = _require_dataset(session)
        sch = session.schemes.get(scheme)
        if sch is None:
            raise ApiError(404, f"unknown scheme {scheme!r}")
        if attr not in {a.name for a in ds.schema}:
            raise ApiError(404, f"unknown attribute {attr!r}")
        return analytics.node_distributions(ds, sch.synthetic, attr, session.disc)

    # ----- schemes -----

    @app.post("/sessions/{sid}/schemes", status_code=202)
    async def post_scheme(sid: str, request: Request):
        session = store.get(sid)
        ds = _require_dataset(session)
        body = await _json_body(request)
        if "epsilon" not in body:
            raise ApiError(400, "epsilon is required")
        try:
            epsilon = float(body["epsilon"])
            fraction = float(body.get("structure_fraction", session.defaults["structure_fraction"]))
            k = int(body.get("k", session.defaults["k"]))
            n_out = body.get("n_out")
            n_out = int(n_out) if n_out is not None else None
            seed = int(body.get("seed", 0))
            oracle = bool(body.get("oracle", False))
            baseline = bool(body.get("baseline", False))
        except (TypeError, ValueError) as exc:
            raise ApiError(400, f"invalid scheme parameters: {exc}") from None
        if epsilon <= 0:
            raise ApiError(400, "epsilon must be > 0")
        if k < 0:
            raise ApiError(400, "k must be >= 0")
        budget = split_budget(epsilon, fraction)
        with session.lock:
            if session.generating:
                raise ApiError(409, "a generation is already in flight for this session")
            session.generating = True
            scheme_id = f"m{session.next_scheme}"
            session.next_scheme += 1
            session.scheme_status[scheme_id] = "pending"

        patterns = session.catalog.list()
        disc = session.disc
        charts = list(session.charts.values())
        overrides = {p.id: 0.0 for p in patterns} if baseline else None

        def run():
            try:
                scheme = generate_scheme(
                    ds, patterns, overrides, budget, k=k, n_out=n_out, seed=seed,
                    disc=disc, oracle=oracle, scheme_id=scheme_id,
                )
                scheme.metrics = evaluate_scheme(ds, scheme, patterns, charts)
                session.schemes[scheme_id] = scheme
                session.reports[scheme_id] = scheme.metrics
                session.scheme_status[scheme_id] = "complete"
                store.persist(session)
            except Exception as exc:  # surfaced via status polling
                session.scheme_status[scheme_id] = f"failed: {exc}"
            finally:
                session.generating = False

        threading.Thread(target=run, daemon=True).start()
        return {"v": 1, "id": scheme_id, "status": "pending"}

    @app.get("/sessions/{sid}/schemes/{scheme_id}")
    def get_scheme(sid: str, scheme_id: str):
        session = store.get(sid)
        status = session.scheme_status.get(scheme_id)
        if status is None:
            raise ApiError(404, f"unknown scheme {scheme_id!r}")
        payload = {"v": 1, "id": scheme_id, "status": status}
        scheme = session.schemes.get(scheme_id)
        if scheme is not None:
            payload["scheme"] = scheme.to_json()
            payload["network"] = scheme.network.to_json()
        return payload

    @app.get("/sessions/{sid}/schemes/{scheme_id}/metrics")
    def get_metrics(sid: str, scheme_id: str):
        session = store.get(sid)
        report = session.reports.get(scheme_id)
        if report is None:
            raise ApiError(404, f"no metrics for scheme {scheme_id!r}")
        return report.to_json()

    @app.get("/sessions/{sid}/schemes")
    def list_schemes(sid: str):
        session = store.get(sid)
        rows = []
        for scheme_id, status in session.scheme_status.items():
            row = {"id": scheme_id, "status": status}
            scheme = session.schemes.get(scheme_id)
            report = session.reports.get(scheme_id)
            if scheme is not None:
                row["epsilon"] = scheme.budget.epsilon_total
                row["weights"] = scheme.weights
                row["private"] = scheme.private
                row["seed"] = scheme.seed
            if report is not None:
                row["summary"] = report.summary
                row["patterns"] = [
                    {
                        "pattern": p["pattern"],
                        "metrics": [
                            {k: m[k] for k in ("metric", "before", "after", "delta") if k in m}
                            for m in p.get("metrics", [])
                        ],
                    }
                    for p in report.patterns
                ]
            rows.append(row)
        return {"v": 1, "schemes": rows}

    @app.get("/sessions/{sid}/schemes/{scheme_id}/charts/{cid}/data")
    def get_synthetic_chart_data(sid: str, scheme_id: str, cid: str):
        """Chart payload recomputed on the scheme's synthetic data (safe to publish)."""
        session = store.get(sid)
        scheme = session.schemes.get(scheme_id)
        if scheme is None:
            raise ApiError(404, f"unknown or incomplete scheme {scheme_id!r}")
        spec = session.charts.get(cid)
        if spec is None:
            raise ApiError(404, f"unknown chart {cid!r}")
        return render_chart_data(scheme.synthetic, spec).to_json()

    @app.get("/sessions/{sid}/schemes/{scheme_id}/export")
    def export_scheme(sid: str, scheme_id: str):
        session = store.get(sid)
        scheme = session.schemes.get(scheme_id)
        if scheme is None:
            raise ApiError(404, f"unknown or incomplete scheme {scheme_id!r}")
        buf = io.BytesIO()
        with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as zf:
            zf.writestr("synthetic.csv", to_csv(scheme.synthetic))
            zf.writestr("scheme.json", json.dumps(scheme.to_json(), indent=2, sort_keys=True))
            zf.writestr("network.json", json.dumps(scheme.network.to_json(), indent=2))
            report = session.reports.get(scheme_id)
            if report is not None:
                zf.writestr("report.json", json.dumps(report.to_json(), indent=2, sort_keys=True))
            # charts rendered from synthetic data only: safe to publish
            for cid, spec in session.charts.items():
                payload = render_chart_data(scheme.synthetic, spec).to_json()
                zf.writestr(f"charts/{cid}.json", json.dumps(payload, indent=2))
        return Response(
            content=buf.getvalue(),
            media_type="application/zip",
            headers={"Content-Disposition": f"attachment; filename={scheme_id}.zip"},
        )

    if static_dir and os.path.isdir(static_dir):
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
