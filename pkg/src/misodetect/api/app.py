"""HTTP JSON service exposing the moderation workflow.

Endpoints: GET /health, GET /models, POST /predict/text,
POST /predict/meme (multipart), POST /explain, GET /explain/{job_id},
GET /artifacts/{id}.png, POST /rationale, POST /feedback.

Predictions are synchronous; explanations run as queued jobs (see
jobs.py). Every error body is ``{"error": {"code", "message"}}`` with the
documented status code. Response shapes are pinned by the JSON schema
files next to this module.
"""

from __future__ import annotations

import base64
import binascii
import io
import re
from pathlib import Path

import numpy as np
from fastapi import Body, FastAPI, File, Form, Request, UploadFile
from fastapi.exceptions import HTTPException, RequestValidationError
from fastapi.responses import JSONResponse, Response
from PIL import Image

from ..feedback import FeedbackError, FeedbackStore, feedback_from_dict, rationale_from_dict
from ..mmclf import OcrTransportError, extract_meme_text
from ..taxonomy import sublabels_for
from ..xai import explain_image, explain_text, render_saliency_overlay
from ..xai.solvers import SOLVERS
from .jobs import JobManager
from .registry import ModelRegistry, ServerConfig, build_ocr_engine

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
_JPEG_MAGIC = b"\xff\xd8\xff"
_ARTIFACT_ID = re.compile(r"^[0-9a-f]{6,32}$")


def _error(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status_code=status, detail={"code": code, "message": message})


def _check_image_payload(data: bytes, cap: int):
    if len(data) > cap:
        raise _error(413, "image_too_large", f"image exceeds the {cap} byte limit")
    if not (data.startswith(_PNG_MAGIC) or data.startswith(_JPEG_MAGIC)):
        raise _error(400, "image_format_unsupported", "only PNG and JPEG images are accepted")


def create_app(config: ServerConfig) -> FastAPI:
    app = FastAPI(title="misodetect", version="0.1.0")
    registry = ModelRegistry(config.registry, config.base_dir)
    store = FeedbackStore(Path(config.base_dir) / config.store_path)
    jobs = JobManager(config.job_concurrency)
    ocr_engine = build_ocr_engine(config.ocr, config.base_dir)
    artifacts_dir = Path(config.base_dir) / config.artifacts_dir
    artifacts_dir.mkdir(parents=True, exist_ok=True)
    app.state.registry = registry
    app.state.store = store
    app.state.jobs = jobs

    @app.exception_handler(HTTPException)
    async def _on_http_error(request: Request, exc: HTTPException):
        detail = exc.detail
        if not isinstance(detail, dict):
            detail = {"code": "http_error", "message": str(detail)}
        return JSONResponse(status_code=exc.status_code, content={"error": detail})

    @app.exception_handler(RequestValidationError)
    async def _on_validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"error": {"code": "payload_invalid", "message": str(exc.errors()[:1])}},
        )

    def _get_model(model_id, modality: str):
        if not model_id:
            raise _error(400, "payload_missing", "model_id is required")
        model = registry.get(model_id)
        if model is None:
            raise _error(400, "model_unknown", f"no model registered under id {model_id!r}")
        if model.modality != modality:
            raise _error(
                400,
                "model_modality_mismatch",
                f"model {model_id!r} serves {model.modality!r}, not {modality!r}",
            )
        return model

    def _require_text(text) -> str:
        if text is None:
            raise _error(400, "payload_missing", "text is required for the text modality")
        if not str(text).strip():
            raise _error(422, "empty_text", "text is empty after trimming")
        return str(text)

    @app.get("/health")
    def health():
        return {"status": "ok", "models": registry.to_dicts()}

    @app.get("/models")
    def models():
        return {"models": registry.to_dicts()}

    @app.post("/predict/text")
    def predict_text_endpoint(body: dict = Body(...)):
        model = _get_model(body.get("model_id"), "text")
        text = _require_text(body.get("text"))
        return model.predict(text).to_dict()

    @app.post("/predict/meme")
    async def predict_meme_endpoint(
        model_id: str = Form(...),
        image: UploadFile = File(...),
        text: str | None = Form(None),
    ):
        model = _get_model(model_id, "meme")
        data = await image.read()
        _check_image_payload(data, config.upload_cap_bytes)
        ocr_info = None
        if text is None:
            try:
                ocr = extract_meme_text(data, ocr_engine)
            except OcrTransportError as exc:
                raise _error(502, "ocr_unreachable", str(exc))
            text = ocr.raw_text
            ocr_info = {
                "raw_text": ocr.raw_text,
                "engine_id": ocr.engine_id,
                "confidence": ocr.confidence,
            }
        try:
            prediction = model.predict(data, text)
        except ValueError as exc:
            raise _error(400, "image_undecodable", str(exc))
        payload = prediction.to_dict()
        payload["ocr"] = ocr_info
        return payload

    def _target_for(modality: str, requested) -> str:
        target = requested or "binary_positive"
        if target != "binary_positive" and target not in sublabels_for(modality):
            raise _error(400, "target_unknown", f"unknown explanation target {target!r}")
        return target

    def _text_model_fn(model, target: str, *, image: bytes | None = None):
        if image is None:
            def score(text: str) -> float:
                pred = model.predict(text)
                return pred.binary_confidence if target == "binary_positive" else pred.sublabel_scores[target]
        else:
            def score(text: str) -> float:
                pred = model.predict(image, text)
                return pred.binary_confidence if target == "binary_positive" else pred.sublabel_scores[target]
        return score

    def _image_model_fn(model, target: str):
        def score(pixels: np.ndarray, text: str) -> float:
            buf = io.BytesIO()
            Image.fromarray(pixels).save(buf, format="PNG")
            pred = model.predict(buf.getvalue(), text)
            return pred.binary_confidence if target == "binary_positive" else pred.sublabel_scores[target]

        return score

    @app.post("/explain", status_code=202)
    def explain_endpoint(body: dict = Body(...)):
        modality = body.get("modality")
        if modality not in ("text", "meme"):
            raise _error(400, "payload_missing", "modality must be 'text' or 'meme'")
        method = body.get("xai_method")
        if method not in SOLVERS:
            raise _error(400, "method_unknown", f"unknown xai_method {method!r}")
        model = _get_model(body.get("model_id"), modality)
        target = _target_for(modality, body.get("target"))
        n_perturbations = int(body.get("n_perturbations", 1000))
        seed = body.get("seed")

        if modality == "text":
            text = _require_text(body.get("text"))

            def work(job):
                report = explain_text(
                    _text_model_fn(model, target),
                    text,
                    method=method,
                    target=target,
                    n_perturbations=n_perturbations,
                    seed=job.seed,
                )
                return {"attribution_report": report.to_dict()}

        else:
            image_b64 = body.get("image_b64")
            if not image_b64:
                raise _error(400, "payload_missing", "image_b64 is required for the meme modality")
            try:
                data = base64.b64decode(image_b64, validate=True)
            except (binascii.Error, ValueError):
                raise _error(400, "image_invalid_base64", "image_b64 is not valid base64")
            _check_image_payload(data, config.upload_cap_bytes)
            n_regions = int(body.get("n_regions", 8))
            override_text = body.get("text")

            def work(job):
                if override_text is None:
                    text = extract_meme_text(data, ocr_engine).raw_text
                else:
                    text = str(override_text)
                saliency = explain_image(
                    _image_model_fn(model, target),
                    data,
                    text,
                    method=method,
                    target=target,
                    n_perturbations=n_perturbations,
                    seed=job.seed,
                    n_regions=n_regions,
                )
                overlay = render_saliency_overlay(saliency, data)
                (artifacts_dir / f"{job.job_id}.png").write_bytes(overlay)
                result = {
                    "saliency_map": saliency.to_dict(),
                    "artifact_url": f"/artifacts/{job.job_id}.png",
                }
                if text.strip():
                    text_report = explain_text(
                        _text_model_fn(model, target, image=data),
                        text,
                        method=method,
                        target=target,
                        n_perturbations=n_perturbations,
                        seed=job.seed,
                    )
                    result["attribution_report"] = text_report.to_dict()
                return result

        job = jobs.submit(work, seed=int(seed) if seed is not None else None)
        return job.to_dict()

    @app.get("/explain/{job_id}")
    def explain_status(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            raise _error(404, "job_unknown", f"no job with id {job_id!r}")
        return job.to_dict()

    @app.get("/artifacts/{artifact_id}.png")
    def artifact(artifact_id: str):
        if not _ARTIFACT_ID.match(artifact_id):
            raise _error(404, "artifact_unknown", "no such artifact")
        path = artifacts_dir / f"{artifact_id}.png"
        if not path.exists():
            raise _error(404, "artifact_unknown", "no such artifact")
        return Response(content=path.read_bytes(), media_type="image/png")

    @app.post("/rationale", status_code=201)
    def post_rationale(body: dict = Body(...)):
        try:
            annotation = rationale_from_dict(body)
        except (FeedbackError, KeyError, TypeError) as exc:
            raise _error(422, "validation_error", str(exc))
        return {"id": store.save_rationale(annotation)}

    @app.post("/feedback", status_code=201)
    def post_feedback(body: dict = Body(...)):
        try:
            record = feedback_from_dict(body)
        except (FeedbackError, KeyError, TypeError) as exc:
            raise _error(422, "validation_error", str(exc))
        return {"id": store.save_feedback(record)}

    return app
