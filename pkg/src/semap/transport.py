"""HTTP transport for agents: card discovery plus JSON-RPC invocation.

Each agent gets its own single-threaded server (one agent, one logical
actor, requests handled in arrival order). The served card bytes are
precomputed once so repeated GETs are byte-identical. The server performs
no contract validation — the agent boundary is untrusted by design, so
enforcement stays engine-side.
"""

from __future__ import annotations

import json
import socket
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer
from urllib import error as urlerror
from urllib import request as urlrequest

from .agents import Agent, AgentInvocation
from .contracts import Artifact, artifact_from_json, artifact_to_json
from .errors import (
    BindFailureError,
    MessageError,
    RemoteError,
    ScriptExhaustedError,
    TransportError,
    TransportTimeoutError,
)
from .messaging import JSONRPC_VERSION, TypedMessage, decode, encode

CARD_PATH = "/.well-known/agent-card"

INVALID_REQUEST = -32600
SERVER_ERROR = -32000

DEFAULT_TIMEOUT = 10.0


def _json_bytes(doc: dict) -> bytes:
    return json.dumps(doc, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


class AgentServer:
    """Running HTTP server handle for one agent."""

    def __init__(self, agent: Agent, host: str = "127.0.0.1", port: int = 0):
        card_bytes = _json_bytes(agent.card.to_json_dict())

        class Handler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"

            def log_message(self, *args) -> None:  # quiet by default
                pass

            def _reply(self, status: int, body: bytes) -> None:
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def do_GET(self) -> None:
                if self.path == CARD_PATH:
                    self._reply(200, card_bytes)
                else:
                    self._reply(404, _json_bytes({"error": "not found"}))

            def do_POST(self) -> None:
                if self.path != "/":
                    self._reply(404, _json_bytes({"error": "not found"}))
                    return
                length = int(self.headers.get("Content-Length", "0"))
                body = self.rfile.read(length)
                try:
                    msg = decode(body)
                except MessageError as exc:
                    self._reply(200, _json_bytes({
                        "jsonrpc": JSONRPC_VERSION,
                        "id": None,
                        "error": {"code": INVALID_REQUEST, "message": exc.message},
                    }))
                    return
                try:
                    produced = agent.invoke(
                        AgentInvocation(inputs=msg.payload, round=msg.round)
                    )
                except ScriptExhaustedError as exc:
                    self._reply(200, _json_bytes({
                        "jsonrpc": JSONRPC_VERSION,
                        "id": msg.message_id,
                        "error": {"code": SERVER_ERROR, "message": exc.message},
                    }))
                    return
                self._reply(200, _json_bytes({
                    "jsonrpc": JSONRPC_VERSION,
                    "id": msg.message_id,
                    "result": {"payload": [artifact_to_json(a) for a in produced]},
                }))

        try:
            self._server = HTTPServer((host, port), Handler)
        except OSError as exc:
            raise BindFailureError(f"cannot bind {host}:{port}: {exc}") from exc
        self.address = f"http://{host}:{self._server.server_address[1]}"
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        self._thread.join()


def serve_agent(agent: Agent, host: str = "127.0.0.1", port: int = 0) -> AgentServer:
    return AgentServer(agent, host=host, port=port)


def remote_invoke(
    endpoint: str, msg: TypedMessage, timeout: float = DEFAULT_TIMEOUT
) -> list[Artifact]:
    """encode -> POST -> decode the JSON-RPC result payload."""
    req = urlrequest.Request(
        endpoint,
        data=encode(msg),
        headers={"Content-Type": "application/json"},
        method="POST",
    )
    try:
        with urlrequest.urlopen(req, timeout=timeout) as response:
            body = response.read()
    except socket.timeout as exc:
        raise TransportTimeoutError(f"no reply from {endpoint} within {timeout}s") from exc
    except urlerror.URLError as exc:
        if isinstance(exc.reason, socket.timeout):
            raise TransportTimeoutError(f"no reply from {endpoint} within {timeout}s") from exc
        raise TransportError(f"cannot reach {endpoint}: {exc.reason}") from exc
    except OSError as exc:
        raise TransportError(f"cannot reach {endpoint}: {exc}") from exc

    try:
        doc = json.loads(body)
    except json.JSONDecodeError as exc:
        raise TransportError(f"non-JSON reply from {endpoint}") from exc
    if not isinstance(doc, dict):
        raise TransportError(f"malformed reply from {endpoint}")
    if "error" in doc:
        err = doc["error"] or {}
        raise RemoteError(int(err.get("code", SERVER_ERROR)), str(err.get("message", "")))
    result = doc.get("result")
    if not isinstance(result, dict) or "payload" not in result:
        raise TransportError(f"reply from {endpoint} lacks a result payload")
    return [artifact_from_json(item) for item in result["payload"]]


def fetch_card(endpoint: str, timeout: float = DEFAULT_TIMEOUT) -> dict:
    """GET the agent card document from an agent endpoint."""
    url = endpoint.rstrip("/") + CARD_PATH
    try:
        with urlrequest.urlopen(url, timeout=timeout) as response:
            return json.loads(response.read())
    except socket.timeout as exc:
        raise TransportTimeoutError(f"no card from {url} within {timeout}s") from exc
    except (urlerror.URLError, OSError, json.JSONDecodeError) as exc:
        raise TransportError(f"cannot fetch card from {url}: {exc}") from exc
