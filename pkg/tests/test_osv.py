import http.server
import json
import threading
import time

import pytest

from upgrade_lens import DomainError, ParseError, SbomPackage, query_osv, query_osv_batch
from upgrade_lens.errors import TransportError
from upgrade_lens.osv import (
    FixtureTransport,
    LiveTransport,
    canonical_request,
    osv_endpoint,
    parse_osv_response,
    query_body,
    request_hash,
)

from conftest import FIXTURES

REQUESTS_PKG = SbomPackage("requests", "2.19.0", "PyPI", "pkg:pypi/requests@2.19.0")


class TestRequestShape:
    def test_purl_body(self):
        assert query_body(REQUESTS_PKG) == {"package": {"purl": "pkg:pypi/requests@2.19.0"}}

    def test_name_ecosystem_body(self):
        pkg = SbomPackage("requests", "2.19.0", "PyPI")
        assert query_body(pkg) == {
            "package": {"name": "requests", "ecosystem": "PyPI"},
            "version": "2.19.0",
        }

    def test_no_ecosystem_no_purl_rejected(self):
        with pytest.raises(DomainError):
            query_body(SbomPackage("requests", "2.19.0"))

    def test_canonical_request_is_stable(self):
        body = {"version": "1", "package": {"name": "a", "ecosystem": "PyPI"}}
        assert canonical_request(body) == canonical_request(json.loads(canonical_request(body)))
        assert request_hash(body) == request_hash(dict(reversed(list(body.items()))))


class TestFixtureTransport:
    def test_replays_recorded_bytes_exactly(self):
        transport = FixtureTransport(FIXTURES / "osv")
        body = query_body(REQUESTS_PKG)
        first = transport.post(body)
        second = transport.post(body)
        assert first == second
        assert (FIXTURES / "osv" / f"{request_hash(body)}.json").read_bytes() == first

    def test_unknown_package_is_empty(self):
        transport = FixtureTransport(FIXTURES / "osv")
        pkg = SbomPackage("unknown-lib", "9.9.9", "PyPI", "pkg:pypi/unknown-lib@9.9.9")
        assert query_osv(pkg, transport) == []

    def test_known_fixture_ids(self):
        transport = FixtureTransport(FIXTURES / "osv")
        records = query_osv(REQUESTS_PKG, transport)
        assert [r.id for r in records] == ["GHSA-x84v-xcm2-53pg", "GHSA-j8r2-6x86-q33q"]
        assert records[0].fixed_version == "2.20.0"
        assert records[1].fixed_version == "2.31.0"
        assert records[0].affected_package == REQUESTS_PKG

    def test_referentially_transparent(self):
        transport = FixtureTransport(FIXTURES / "osv")
        a = query_osv(REQUESTS_PKG, transport)
        b = query_osv(REQUESTS_PKG, transport)
        assert a == b

    def test_malformed_purl_fails_before_any_request(self):
        class Exploding:
            def post(self, body):
                raise AssertionError("transport must not be reached")

        pkg = SbomPackage("x", "1.0", "PyPI")
        object.__setattr__(pkg, "purl", "not-a-purl")  # bypass constructor check
        with pytest.raises(DomainError):
            query_osv(pkg, Exploding())


class TestResponseParsing:
    def test_malformed_response(self):
        with pytest.raises(ParseError):
            parse_osv_response(b"{not json", REQUESTS_PKG)
        with pytest.raises(ParseError):
            parse_osv_response(b"[]", REQUESTS_PKG)

    def test_vuln_without_id_rejected(self):
        payload = json.dumps({"vulns": [{"summary": "x"}]}).encode()
        with pytest.raises(ParseError):
            parse_osv_response(payload, REQUESTS_PKG)

    def test_empty_object_means_no_advisories(self):
        assert parse_osv_response(b"{}", REQUESTS_PKG) == []

    def test_fixed_version_is_max_across_ranges(self):
        payload = json.dumps(
            {
                "vulns": [
                    {
                        "id": "V-1",
                        "affected": [
                            {
                                "package": {"ecosystem": "PyPI", "name": "requests"},
                                "ranges": [
                                    {"type": "ECOSYSTEM", "events": [{"introduced": "0"}, {"fixed": "2.20.0"}]},
                                    {"type": "ECOSYSTEM", "events": [{"introduced": "2.21"}, {"fixed": "2.24.0"}]},
                                ],
                            }
                        ],
                    }
                ]
            }
        ).encode()
        records = parse_osv_response(payload, REQUESTS_PKG)
        assert records[0].fixed_version == "2.24.0"
        assert len(records[0].affected_ranges) == 2

    def test_unrelated_affected_entries_ignored(self):
        payload = json.dumps(
            {
                "vulns": [
                    {
                        "id": "V-1",
                        "affected": [
                            {
                                "package": {"ecosystem": "PyPI", "name": "otherlib"},
                                "ranges": [{"type": "ECOSYSTEM", "events": [{"fixed": "9.9"}]}],
                            }
                        ],
                    }
                ]
            }
        ).encode()
        records = parse_osv_response(payload, REQUESTS_PKG)
        assert records[0].fixed_version is None


class _OsvHandler(http.server.BaseHTTPRequestHandler):
    seen: list[tuple[str, dict, str]] = []
    fail_times = 0

    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        _OsvHandler.seen.append((self.path, body, self.headers.get("Content-Type", "")))
        if _OsvHandler.fail_times > 0:
            _OsvHandler.fail_times -= 1
            self.send_error(503)
            return
        payload = json.dumps({"vulns": [{"id": "V-LIVE", "affected": []}]}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


@pytest.fixture()
def osv_server():
    server = http.server.HTTPServer(("127.0.0.1", 0), _OsvHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _OsvHandler.seen = []
    _OsvHandler.fail_times = 0
    yield f"http://127.0.0.1:{server.server_address[1]}/v1/query"
    server.shutdown()


class TestLiveTransport:
    def test_wire_protocol(self, osv_server):
        transport = LiveTransport(url=osv_server, sleep=lambda s: None)
        records = query_osv(REQUESTS_PKG, transport)
        assert [r.id for r in records] == ["V-LIVE"]
        path, body, content_type = _OsvHandler.seen[0]
        assert path == "/v1/query"
        assert content_type == "application/json"
        assert body == {"package": {"purl": "pkg:pypi/requests@2.19.0"}}

    def test_retries_then_succeeds(self, osv_server):
        _OsvHandler.fail_times = 2
        slept = []
        transport = LiveTransport(url=osv_server, sleep=slept.append)
        records = query_osv(REQUESTS_PKG, transport)
        assert [r.id for r in records] == ["V-LIVE"]
        assert slept == [1.0, 2.0]

    def test_exhausts_retry_policy(self):
        slept = []
        transport = LiveTransport(
            url="http://127.0.0.1:9/v1/query", timeout=0.2, sleep=slept.append
        )
        with pytest.raises(TransportError, match="4 attempts"):
            transport.post({"package": {"purl": "pkg:pypi/requests@2.19.0"}})
        assert slept == [1.0, 2.0, 4.0]

    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("UPGRADE_LENS_OSV_URL", "http://example.invalid/v1/query")
        assert osv_endpoint() == "http://example.invalid/v1/query"
        monkeypatch.delenv("UPGRADE_LENS_OSV_URL")
        assert osv_endpoint() == "https://api.osv.dev/v1/query"


class TestBatch:
    def test_batch_keys_align_with_packages(self):
        transport = FixtureTransport(FIXTURES / "osv")
        packages = [
            REQUESTS_PKG,
            SbomPackage("six", "1.16.0", "PyPI", "pkg:pypi/six@1.16.0"),
        ]
        records = query_osv_batch(packages, transport)
        assert set(records) == {p.key for p in packages}
        assert len(records[REQUESTS_PKG.key]) == 2
        assert records[packages[1].key] == []
