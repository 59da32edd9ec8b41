"""OSV vulnerability database client.

The wire protocol is a POST to /v1/query with either a purl or a
name/ecosystem/version package object (batched queries go to
/v1/querybatch). Transports are pluggable: the live transport retries
with exponential backoff, the fixture transport replays recorded
responses byte-for-byte from a directory keyed by request hash, so the
whole suite runs offline.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
import urllib.error
import urllib.request
from pathlib import Path
from typing import Callable, Protocol

from .errors import DomainError, ParseError, TransportError
from .sbom import (
    SbomPackage,
    VersionInterval,
    VulnerabilityRecord,
    compare_versions,
    ecosystem_for_purl_type,
    parse_purl,
)

DEFAULT_OSV_URL = "https://api.osv.dev/v1/query"
OSV_URL_ENV = "UPGRADE_LENS_OSV_URL"

_BACKOFF_SECONDS = (1.0, 2.0, 4.0)


def osv_endpoint() -> str:
    return os.environ.get(OSV_URL_ENV, DEFAULT_OSV_URL)


def canonical_request(body: dict) -> bytes:
    return json.dumps(body, sort_keys=True, separators=(",", ":")).encode("utf-8")


def request_hash(body: dict) -> str:
    return hashlib.sha256(canonical_request(body)).hexdigest()


class Transport(Protocol):
    def post(self, body: dict) -> bytes: ...


class LiveTransport:
    """HTTP transport with the retry policy: 3 retries backing off 1s/2s/4s."""

    def __init__(
        self,
        url: str | None = None,
        timeout: float = 30.0,
        sleep: Callable[[float], None] | None = None,
    ):
        self.url = url or osv_endpoint()
        self.timeout = timeout
        self._sleep = time.sleep if sleep is None else sleep

    def post(self, body: dict) -> bytes:
        url = self.url
        data = canonical_request(body)
        last_error: Exception | None = None
        for attempt, backoff in enumerate((*_BACKOFF_SECONDS, None)):
            request = urllib.request.Request(
                url,
                data=data,
                headers={"Content-Type": "application/json"},
                method="POST",
            )
            try:
                with urllib.request.urlopen(request, timeout=self.timeout) as response:
                    return response.read()
            except (urllib.error.URLError, OSError, TimeoutError) as exc:
                last_error = exc
                if backoff is not None:
                    self._sleep(backoff)
        raise TransportError(f"OSV query failed after {attempt + 1} attempts: {last_error}")


class FixtureTransport:
    """Replays recorded responses from ``root``/<request sha256>.json.

    Requests with no recorded response behave as packages without
    advisories (an empty response object).
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def post(self, body: dict) -> bytes:
        path = self.root / f"{request_hash(body)}.json"
        if path.exists():
            return path.read_bytes()
        return b"{}"

    def record(self, body: dict, response: bytes) -> Path:
        """Store a response for later replay; used to build fixture sets."""
        self.root.mkdir(parents=True, exist_ok=True)
        path = self.root / f"{request_hash(body)}.json"
        path.write_bytes(response)
        return path


def query_body(pkg: SbomPackage) -> dict:
    """The /v1/query request body for one package."""
    if pkg.purl is not None:
        parse_purl(pkg.purl)  # malformed purl fails before any request
        return {"package": {"purl": pkg.purl}}
    if not pkg.ecosystem:
        raise DomainError(
            f"package {pkg.name!r} has neither purl nor ecosystem; cannot query OSV"
        )
    return {
        "package": {"name": pkg.name, "ecosystem": pkg.ecosystem},
        "version": pkg.version,
    }


def _matches_package(affected: dict, pkg: SbomPackage) -> bool:
    info = affected.get("package", {})
    if not isinstance(info, dict):
        return False
    purl = info.get("purl")
    if purl and pkg.purl:
        try:
            return parse_purl(purl)[:3] == parse_purl(pkg.purl)[:3]
        except Exception:
            return False
    name_matches = info.get("name") == pkg.name
    eco = info.get("ecosystem", "")
    if pkg.ecosystem:
        return name_matches and eco == pkg.ecosystem
    if pkg.purl:
        ptype = parse_purl(pkg.purl)[0]
        return name_matches and eco == ecosystem_for_purl_type(ptype)
    return name_matches


def parse_osv_response(payload: bytes, pkg: SbomPackage) -> list[VulnerabilityRecord]:
    """Extract vulnerability records relevant to ``pkg`` from a response."""
    try:
        data = json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"malformed OSV response: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseError("malformed OSV response: expected an object")
    records = []
    for vuln in data.get("vulns") or []:
        if not isinstance(vuln, dict) or not vuln.get("id"):
            raise ParseError("malformed OSV response: vulnerability without id")
        intervals: list[VersionInterval] = []
        fixed: str | None = None
        for affected in vuln.get("affected") or []:
            if not _matches_package(affected, pkg):
                continue
            for rng in affected.get("ranges") or []:
                introduced = None
                for event in rng.get("events") or []:
                    if "introduced" in event:
                        introduced = event["introduced"]
                    if "fixed" in event:
                        intervals.append(VersionInterval(introduced, event["fixed"]))
                        if fixed is None or compare_versions(event["fixed"], fixed)[0] > 0:
                            fixed = event["fixed"]
                        introduced = None
                if introduced is not None:
                    intervals.append(VersionInterval(introduced, None))
        records.append(
            VulnerabilityRecord(
                id=vuln["id"],
                affected_package=pkg,
                affected_ranges=tuple(intervals),
                fixed_version=fixed,
                summary=vuln.get("summary", ""),
            )
        )
    return records


def query_osv(pkg: SbomPackage, transport: Transport) -> list[VulnerabilityRecord]:
    """All known advisories for one package version (empty when none)."""
    body = query_body(pkg)
    payload = transport.post(body)
    if not payload.strip():
        return []
    return parse_osv_response(payload, pkg)


def query_osv_batch(
    packages: list[SbomPackage], transport: Transport
) -> dict[tuple[str, str, str], list[VulnerabilityRecord]]:
    """Query every package and key the records for map_vulnerabilities."""
    return {pkg.key: query_osv(pkg, transport) for pkg in packages}
