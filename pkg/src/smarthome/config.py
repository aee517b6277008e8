"""Server configuration: thresholds, tariff and login credentials.

Persisted as one YAML file, written atomically (temp file + rename) so a
crash can never leave a half-written config. Passwords are stored as salted
PBKDF2 hashes; verification is constant-time.
"""

from __future__ import annotations

import hashlib
import hmac
import os
import secrets
import tempfile
from dataclasses import dataclass, replace
from pathlib import Path

import yaml

from .energy import DEFAULT_TARIFF_GBP_PER_KWH
from .engine import Thresholds

PBKDF2_ITERATIONS = 120_000

DEFAULT_USERNAME = "admin"
DEFAULT_PASSWORD = "admin"  # demo credential; override via the config file


def hash_password(password: str, *, iterations: int = PBKDF2_ITERATIONS) -> str:
    salt = secrets.token_hex(16)
    digest = hashlib.pbkdf2_hmac(
        "sha256", password.encode("utf-8"), bytes.fromhex(salt), iterations
    )
    return f"pbkdf2_sha256${iterations}${salt}${digest.hex()}"


def verify_password(password: str, stored: str) -> bool:
    try:
        algorithm, iterations, salt, expected = stored.split("$")
        if algorithm != "pbkdf2_sha256":
            return False
        digest = hashlib.pbkdf2_hmac(
            "sha256", password.encode("utf-8"), bytes.fromhex(salt), int(iterations)
        )
        return hmac.compare_digest(digest.hex(), expected)
    except (ValueError, TypeError):
        return False


@dataclass(frozen=True)
class ServerConfig:
    thresholds: Thresholds
    tariff_gbp_per_kwh: float = DEFAULT_TARIFF_GBP_PER_KWH
    username: str = DEFAULT_USERNAME
    password_hash: str = ""
    session_ttl_s: float = 86400.0
    login_throttle_after: int = 5
    login_throttle_delay_s: float = 1.0


def default_config() -> ServerConfig:
    return ServerConfig(thresholds=Thresholds(), password_hash=hash_password(DEFAULT_PASSWORD))


def _config_to_dict(config: ServerConfig) -> dict:
    t = config.thresholds
    return {
        "thresholds": {
            "lux_off": t.lux_off,
            "lux_full": t.lux_full,
            "fan_t1_c": t.fan_t1_c,
            "fan_t2_c": t.fan_t2_c,
            "fan_t3_c": t.fan_t3_c,
            "fan_h3_pct": t.fan_h3_pct,
            "occupancy_hold_s": t.occupancy_hold_s,
        },
        "tariff_gbp_per_kwh": config.tariff_gbp_per_kwh,
        "auth": {"username": config.username, "password_hash": config.password_hash},
        "session_ttl_s": config.session_ttl_s,
        "login_throttle_after": config.login_throttle_after,
        "login_throttle_delay_s": config.login_throttle_delay_s,
    }


def _config_from_dict(raw: dict) -> ServerConfig:
    base = default_config()
    thresholds = base.thresholds
    if "thresholds" in raw:
        thresholds = Thresholds(**raw["thresholds"]).validate()
    auth = raw.get("auth", {})
    return ServerConfig(
        thresholds=thresholds,
        tariff_gbp_per_kwh=float(raw.get("tariff_gbp_per_kwh", base.tariff_gbp_per_kwh)),
        username=str(auth.get("username", base.username)),
        password_hash=str(auth.get("password_hash", base.password_hash)),
        session_ttl_s=float(raw.get("session_ttl_s", base.session_ttl_s)),
        login_throttle_after=int(raw.get("login_throttle_after", base.login_throttle_after)),
        login_throttle_delay_s=float(
            raw.get("login_throttle_delay_s", base.login_throttle_delay_s)
        ),
    )


class ConfigStore:
    """Load-at-boot, persist-on-change view of the server config file.

    A missing file yields the defaults; the file is created on first write.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        if self.path.exists():
            raw = yaml.safe_load(self.path.read_text(encoding="utf-8")) or {}
            self.config = _config_from_dict(raw)
        else:
            self.config = default_config()

    def update_thresholds(self, thresholds: Thresholds) -> None:
        self.config = replace(self.config, thresholds=thresholds.validate())
        self.save()

    def save(self) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        payload = yaml.safe_dump(_config_to_dict(self.config), sort_keys=False)
        fd, tmp_name = tempfile.mkstemp(dir=self.path.parent, prefix=".config-", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(payload)
                handle.flush()
                os.fsync(handle.fileno())
            os.replace(tmp_name, self.path)
        except BaseException:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
            raise
