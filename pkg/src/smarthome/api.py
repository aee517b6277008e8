"""HTTP/JSON control surface: status, device control, thresholds, energy
history, CSV export and session login.

State-mutating calls are validated here, then queued to the engine and
applied at the next tick boundary; reads come from the immutable per-tick
snapshot, so no handler can block or race the tick loop.
"""

from __future__ import annotations

import secrets
import threading
import time
from pathlib import Path

from fastapi import Depends, FastAPI, HTTPException, Query, Request, Response
from fastapi.responses import RedirectResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, ConfigDict, Field

from .config import ConfigStore, verify_password
from .energy import parse_sim_timestamp
from .engine import Mode, Thresholds, ThresholdError
from .service import Service, SetDuty, SetMode, SetThresholds


class SessionStore:
    """Opaque bearer tokens with expiry; logout revokes immediately."""

    def __init__(self, ttl_s: float):
        self.ttl_s = ttl_s
        self._sessions: dict[str, float] = {}
        self._lock = threading.Lock()

    def issue(self) -> tuple[str, float]:
        token = secrets.token_urlsafe(32)
        expiry = time.time() + self.ttl_s
        with self._lock:
            self._sessions[token] = expiry
        return token, expiry

    def revoke(self, token: str) -> None:
        with self._lock:
            self._sessions.pop(token, None)

    def is_valid(self, token: str) -> bool:
        with self._lock:
            expiry = self._sessions.get(token)
            if expiry is None:
                return False
            if expiry < time.time():
                del self._sessions[token]
                return False
            return True


class LoginThrottle:
    """Fixed-delay brake after repeated consecutive failures."""

    def __init__(self, after: int, delay_s: float):
        self.after = after
        self.delay_s = delay_s
        self._failures = 0
        self._lock = threading.Lock()

    def before_attempt(self) -> None:
        with self._lock:
            throttled = self._failures >= self.after
        if throttled and self.delay_s > 0:
            time.sleep(self.delay_s)

    def record(self, success: bool) -> None:
        with self._lock:
            self._failures = 0 if success else self._failures + 1


class LoginRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    user: str
    password: str = Field(alias="pass")


class ModeRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    mode: Mode


class DutyRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    duty_pct: int = Field(ge=0, le=100, strict=True)


class ThresholdsRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    lux_off: float
    lux_full: float
    fan_t1_c: float
    fan_t2_c: float
    fan_t3_c: float
    fan_h3_pct: float
    occupancy_hold_s: float


def thresholds_json(t: Thresholds) -> dict:
    return {
        "lux_off": t.lux_off,
        "lux_full": t.lux_full,
        "fan_t1_c": t.fan_t1_c,
        "fan_t2_c": t.fan_t2_c,
        "fan_t3_c": t.fan_t3_c,
        "fan_h3_pct": t.fan_h3_pct,
        "occupancy_hold_s": t.occupancy_hold_s,
    }


def create_app(
    service: Service,
    store: ConfigStore,
    dashboard_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="smarthome", docs_url=None, redoc_url=None)
    sessions = SessionStore(store.config.session_ttl_s)
    throttle = LoginThrottle(
        store.config.login_throttle_after, store.config.login_throttle_delay_s
    )
    app.state.sessions = sessions

    def require_session(request: Request) -> str:
        header = request.headers.get("authorization", "")
        token = header.removeprefix("Bearer ").strip()
        if not token or not sessions.is_valid(token):
            raise HTTPException(status_code=401, detail="not authenticated")
        return token

    @app.post("/api/login")
    def login(body: LoginRequest):
        throttle.before_attempt()
        config = store.config
        # Always run the hash check so failures cost the same with or
        # without a matching username (no user enumeration).
        name_ok = secrets.compare_digest(body.user.encode(), config.username.encode())
        pass_ok = verify_password(body.password, config.password_hash)
        if not (name_ok and pass_ok):
            throttle.record(success=False)
            raise HTTPException(status_code=401, detail="invalid credentials")
        throttle.record(success=True)
        token, expiry = sessions.issue()
        return {
            "token": token,
            "expires_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(expiry)),
        }

    @app.post("/api/logout")
    def logout(token: str = Depends(require_session)):
        sessions.revoke(token)
        return {"ok": True}

    @app.get("/api/status")
    def status(_: str = Depends(require_session)):
        snapshot = service.snapshot
        if snapshot is None:
            raise HTTPException(status_code=503, detail="no tick completed yet")
        return snapshot

    @app.post("/api/devices/{device_id}/mode")
    def set_mode(device_id: str, body: ModeRequest, _: str = Depends(require_session)):
        if not service.has_device(device_id):
            raise HTTPException(status_code=404, detail=f"unknown device {device_id!r}")
        service.submit(SetMode(device_id, body.mode))
        return {"device_id": device_id, "mode": body.mode.value}

    @app.post("/api/devices/{device_id}/duty")
    def set_duty(device_id: str, body: DutyRequest, _: str = Depends(require_session)):
        if not service.has_device(device_id):
            raise HTTPException(status_code=404, detail=f"unknown device {device_id!r}")
        if service.device_mode(device_id) is not Mode.MANUAL:
            raise HTTPException(
                status_code=409,
                detail=f"device {device_id!r} is not in MANUAL mode",
            )
        service.submit(SetDuty(device_id, body.duty_pct))
        return {"device_id": device_id, "duty_pct": body.duty_pct}

    @app.get("/api/thresholds")
    def get_thresholds(_: str = Depends(require_session)):
        return thresholds_json(store.config.thresholds)

    @app.put("/api/thresholds")
    def put_thresholds(body: ThresholdsRequest, _: str = Depends(require_session)):
        try:
            thresholds = Thresholds(**body.model_dump()).validate()
        except ThresholdError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        store.update_thresholds(thresholds)
        service.submit(SetThresholds(thresholds))
        return thresholds_json(thresholds)

    @app.get("/api/energy")
    def energy_history(
        since: str | None = Query(default=None), _: str = Depends(require_session)
    ):
        records = service.records
        if since is not None:
            try:
                since_t = parse_sim_timestamp(since)
            except ValueError as exc:
                raise HTTPException(
                    status_code=422, detail=f"bad 'since' timestamp: {since!r}"
                ) from exc
            records = [r for r in records if parse_sim_timestamp(r.timestamp) > since_t]
        return [r.to_json() for r in records]

    @app.get("/api/export.csv")
    def export_csv(_: str = Depends(require_session)):
        return Response(
            content=service.writer.read_bytes(),
            media_type="text/csv",
            headers={"Content-Disposition": "attachment; filename=energy_log.csv"},
        )

    if dashboard_dir is not None and Path(dashboard_dir).is_dir():
        app.mount("/dashboard", StaticFiles(directory=dashboard_dir, html=True), name="dashboard")

        @app.get("/")
        def root():
            return RedirectResponse(url="/dashboard/")

    else:

        @app.get("/")
        def root():
            return {"service": "smarthome", "api": "/api", "status": "/api/status"}

    return app
