"""Shared test infrastructure.

The default suite must pass with no external network and no model
backend, so an autouse guard blocks every non-loopback socket connection
(export TOPICLABEL_ALLOW_NETWORK=1 to lift it for the opt-in networked
benchmarks). HTTP-facing code is exercised against in-process loopback
stub servers instead.
"""

from __future__ import annotations

import json
import os
import socket
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Any, Callable

import pytest

FIXTURES = Path(__file__).parent / "fixtures"

_LOOPBACK_HOSTS = {"127.0.0.1", "::1", "localhost"}
_real_connect = socket.socket.connect


def _guarded_connect(self, address):
    if os.environ.get("TOPICLABEL_ALLOW_NETWORK") != "1" and self.family in (
        socket.AF_INET,
        socket.AF_INET6,
    ):
        host = address[0]
        if isinstance(host, bytes):
            host = host.decode("ascii", "replace")
        if host not in _LOOPBACK_HOSTS:
            raise RuntimeError(f"test suite blocked non-loopback connection to {host!r}")
    return _real_connect(self, address)


@pytest.fixture(scope="session", autouse=True)
def block_external_network():
    socket.socket.connect = _guarded_connect
    yield
    socket.socket.connect = _real_connect


@dataclass
class RecordedRequest:
    method: str
    path: str
    body: Any = None


@dataclass
class StubServer:
    """Loopback HTTP server with scripted responses.

    Responses come from ``handler`` when set, else from the ``responses``
    queue (the last entry repeats once the queue empties). A response is
    ``(status, payload)``: dict payloads are sent as JSON, strings as-is.
    """

    requests: list[RecordedRequest] = field(default_factory=list)
    responses: list[tuple[int, Any]] = field(default_factory=list)
    handler: Callable[[RecordedRequest], tuple[int, Any]] | None = None
    url: str = ""
    _httpd: ThreadingHTTPServer | None = None

    def next_response(self, request: RecordedRequest) -> tuple[int, Any]:
        if self.handler is not None:
            return self.handler(request)
        if not self.responses:
            return 500, {"error": "stub has no scripted response"}
        if len(self.responses) > 1:
            return self.responses.pop(0)
        return self.responses[0]

    def start(self) -> None:
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def _serve(self, body):
                request = RecordedRequest(method=self.command, path=self.path, body=body)
                stub.requests.append(request)
                status, payload = stub.next_response(request)
                data = (
                    json.dumps(payload).encode("utf-8")
                    if isinstance(payload, (dict, list))
                    else str(payload).encode("utf-8")
                )
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def do_GET(self):
                self._serve(None)

            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                raw = self.rfile.read(length)
                try:
                    body = json.loads(raw) if raw else None
                except json.JSONDecodeError:
                    body = raw.decode("utf-8", "replace")
                self._serve(body)

        self._httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.url = f"http://127.0.0.1:{self._httpd.server_port}"
        threading.Thread(target=self._httpd.serve_forever, daemon=True).start()

    def stop(self) -> None:
        if self._httpd is not None:
            self._httpd.shutdown()
            self._httpd.server_close()


@pytest.fixture
def stub_server():
    server = StubServer()
    server.start()
    yield server
    server.stop()


@pytest.fixture
def no_retry_sleep(monkeypatch):
    """Record retry backoffs instead of sleeping through them."""
    import topiclabel.conceptnet
    import topiclabel.embedding

    sleeps: list[float] = []
    monkeypatch.setattr(topiclabel.embedding, "_sleep", sleeps.append)
    monkeypatch.setattr(topiclabel.conceptnet, "_sleep", sleeps.append)
    return sleeps


@pytest.fixture
def fixture_cache_dir() -> Path:
    """Committed ConceptNet fixture corpus, in the client's cache layout."""
    return FIXTURES / "cache"
