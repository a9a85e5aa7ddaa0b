"""HTTP exploration service over completed runs.

Read endpoints project the run report and galleries; the mutation endpoint
evaluates user-proposed or combined concepts through exactly the same code
path as the CLI, appending each evaluation to an append-only session ledger
whose replay reconstructs the session state. Evaluations in the oracle world
are synchronous; every result is also registered as a completed job so
clients can use one polling shape for oracle and wire-backed runs alike.
"""
from __future__ import annotations

import hashlib
import json
import threading
from pathlib import Path
from typing import Dict, List, Optional

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .concepts import ConceptError, combine, parse_concept
from .pipeline import ARTIFACTS, RunConfig, load_report, load_run_config
from .summarizer import CandidateExplanation
from .verification import OracleEditor, build_validation_set, coarse_filter, evaluate

LEDGER_FILE = "session.jsonl"


class ServiceError(Exception):
    def __init__(self, status: int, code: str, message: str, detail: str = ""):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail


class EvaluateRequest(BaseModel):
    concepts: List[str]
    run: Optional[str] = None
    target_class: int = 1


class _RunContext:
    """Cached per-run evaluation state (model, validation set, editor)."""

    def __init__(self, run_dir: Path, config: RunConfig):
        self.run_dir = run_dir
        self.config = config
        self.model = config.model()
        self.vset = build_validation_set(
            self.model, config.world,
            n1=config.n_validation_1, n0=config.n_validation_0, seed=config.seed)
        self.editor = OracleEditor(world=config.world)
        self.lock = threading.Lock()  # serializes evaluations per session ledger


def create_app(runs_root, ui_dir=None) -> FastAPI:
    runs_root = Path(runs_root)
    app = FastAPI(title="rulelens exploration service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"])

    if ui_dir and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    contexts: Dict[str, _RunContext] = {}
    jobs: Dict[str, dict] = {}

    @app.exception_handler(ServiceError)
    async def _service_error(request: Request, exc: ServiceError):
        return JSONResponse(
            status_code=exc.status,
            content={"code": exc.code, "message": exc.message, "detail": exc.detail})

    def run_dirs() -> List[Path]:
        if not runs_root.exists():
            return []
        return sorted(p.parent for p in runs_root.glob(f"*/{ARTIFACTS['report']}"))

    def resolve_run(name: Optional[str]) -> Path:
        dirs = run_dirs()
        if not dirs:
            raise ServiceError(404, "no_runs", "no completed runs under the runs root")
        if name is None:
            return dirs[-1]
        for d in dirs:
            if d.name == name:
                return d
        for d in dirs:
            try:
                if load_report(d).get("run_id") == name:
                    return d
            except Exception:
                continue
        raise ServiceError(404, "unknown_run", f"no run named {name!r}")

    def context_for(run_dir: Path) -> _RunContext:
        key = str(run_dir)
        if key not in contexts:
            contexts[key] = _RunContext(run_dir, load_run_config(run_dir))
        return contexts[key]

    @app.get("/runs")
    def list_runs():
        out = []
        for d in run_dirs():
            report = load_report(d)
            out.append({
                "run": d.name,
                "run_id": report.get("run_id"),
                "base_rule": report["config"]["classifier"]["base_rule"],
                "bias_rule": report["config"]["classifier"]["bias_rule"],
                "ranking_key": report.get("ranking_key"),
                "candidates": report["counts"]["candidates"],
            })
        return out

    @app.get("/runs/{name}")
    def get_run(name: str):
        return load_report(resolve_run(name))

    @app.get("/runs/{name}/candidates")
    def get_candidates(name: str):
        report = load_report(resolve_run(name))
        return {
            "ranking_key": report.get("ranking_key"),
            "di_threshold": report.get("di_threshold"),
            "ranked": report["ranked"],
            "coarse": report["coarse"],
            "session": read_ledger(resolve_run(name)),
        }

    def read_ledger(run_dir: Path) -> List[dict]:
        path = run_dir / LEDGER_FILE
        if not path.exists():
            return []
        with open(path, "r", encoding="utf-8") as fh:
            return [json.loads(line) for line in fh if line.strip()]

    @app.get("/pairs/{pair_id}/gallery")
    def get_gallery(pair_id: str):
        if ":" in pair_id:
            run_name, item_id = pair_id.split(":", 1)
            run_dir = resolve_run(run_name)
        else:
            run_dir, item_id = resolve_run(None), pair_id
        manifest_path = run_dir / "gallery" / "gallery.json"
        if not manifest_path.exists():
            raise ServiceError(404, "no_gallery", f"run {run_dir.name} has no gallery")
        with open(manifest_path, "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
        for kind in ("pairs", "interventions"):
            for item in manifest[kind]:
                if item["id"] == item_id:
                    before = (run_dir / item["before"]).read_text(encoding="utf-8")
                    after = (run_dir / item["after"]).read_text(encoding="utf-8")
                    return {**item, "kind": kind, "before_svg": before, "after_svg": after}
        raise ServiceError(404, "unknown_gallery_item", f"no gallery item {item_id!r}")

    @app.post("/concepts/evaluate")
    def evaluate_concepts(req: EvaluateRequest):
        if not req.concepts:
            raise ServiceError(400, "empty_request", "provide at least one concept")
        run_dir = resolve_run(req.run)
        ctx = context_for(run_dir)
        parsed = [parse_concept(text) for text in req.concepts]
        opaque = [c for c in parsed if c.is_opaque()]
        if opaque:
            raise ServiceError(
                400, "malformed_concept",
                "concepts outside the grammar cannot be evaluated in oracle mode",
                detail="; ".join(c.opaque_text for c in opaque))
        try:
            combined = combine(parsed)
        except ConceptError as exc:
            raise ServiceError(400, "malformed_concept", "cannot combine the concepts",
                               detail=str(exc))

        with ctx.lock:
            entry_id = hashlib.sha256(
                f"{run_dir.name}:{combined.to_string()}:{req.target_class}".encode()
            ).hexdigest()[:12]
            for entry in read_ledger(run_dir):
                if entry["entry_id"] == entry_id:
                    jobs.setdefault(entry_id, {"status": "done", "result": entry})
                    return {"job_id": entry_id, "status": "done", "reused": True, **entry}

            candidate = CandidateExplanation(
                target_class=req.target_class, concept=combined, origin="user")
            coarse = coarse_filter([candidate], ctx.vset, threshold=ctx.config.di_threshold)
            evaluated = evaluate([candidate], ctx.vset, editor=ctx.editor,
                                 model=ctx.model, seed=ctx.config.seed)
            if not evaluated:
                raise ServiceError(
                    422, "editor_failure",
                    "the intervention editor produced no usable outcome rows",
                    detail=combined.to_string())
            report = evaluated[0].report
            entry = {
                "entry_id": entry_id,
                "concepts": list(req.concepts),
                "combined": combined.to_string(),
                "target_class": req.target_class,
                "origin": "user",
                "metrics": report.to_dict(),
                "coarse_di": coarse[0].di,
            }
            with open(run_dir / LEDGER_FILE, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry, sort_keys=True, separators=(",", ":")) + "\n")
            jobs[entry_id] = {"status": "done", "result": entry}
        return {"job_id": entry_id, "status": "done", "reused": False, **entry}

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        if job_id not in jobs:
            raise ServiceError(404, "unknown_job", f"no job {job_id!r}")
        return {"job_id": job_id, **jobs[job_id]}

    return app
