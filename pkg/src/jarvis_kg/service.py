"""Service core and JSON-RPC 2.0 HTTP front end.

The ask pipeline is: classify -> clear slots -> instantiate the intent's
query template -> evaluate -> intent handler. Every failure becomes a
well-formed apology response with null engine/subsystem; JSON-RPC errors
are reserved for malformed envelopes and the mutation endpoints.

State follows a single-writer / multi-reader contract: mutations
(add_engine, add_update_method, update_values) take the write lock, asks
and snapshots the read lock.
"""

from __future__ import annotations

import json
import os
import re
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from importlib import resources
from pathlib import Path
from typing import Optional

from jarvis_kg.errors import (
    DependencyCycle,
    DuplicateEngineId,
    EvalError,
    ExprSyntaxError,
    JarvisError,
    NoBoundary,
    NoCandidates,
    NoData,
    NoSamples,
    SchemaError,
    SlotClearingFailed,
    UnknownCharacteristic,
    UnknownEngine,
    UnknownFleet,
    UnknownIdentifier,
    UnknownSubsystem,
)
from jarvis_kg.fleet import (
    Fleet,
    UpdateMethod,
    assert_engine,
    engine_from_dict,
    fleet_from_dict,
    fleet_to_dict,
)
from jarvis_kg.handlers import Handlers, SystemResponse
from jarvis_kg.kg.graph import Graph, seed_tbox
from jarvis_kg.kg.terms import AERO, RDF_TYPE, RDFS_LABEL, text
from jarvis_kg.nlu import IntentSpec, classify, clear_slots, parse_training_file

_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


# --- failure classes for apology messages ------------------------------------

_FAILURE_LABELS = (
    (SlotClearingFailed, "slot clearing failed"),
    (NoCandidates, "no matching entity"),
    (UnknownEngine, "unknown engine"),
    (UnknownSubsystem, "unknown subsystem"),
    (UnknownCharacteristic, "unknown characteristic"),
    (UnknownFleet, "unknown fleet"),
    (NoBoundary, "missing map boundary"),
    (NoSamples, "no history samples"),
    (NoData, "no data"),
    (JarvisError, "internal error"),
)

APOLOGY_NO_MATCH = "I am sorry, I did not understand that command."
APOLOGY_TEMPLATE = "I am sorry, I could not answer that command ({reason})."


def apology(reason: str) -> SystemResponse:
    return SystemResponse(None, None, APOLOGY_TEMPLATE.format(reason=reason))


class _RWLock:
    """Writer-preferring readers-writer lock."""

    def __init__(self):
        self._cond = threading.Condition()
        self._readers = 0
        self._writer = False
        self._writers_waiting = 0

    def acquire_read(self):
        with self._cond:
            while self._writer or self._writers_waiting:
                self._cond.wait()
            self._readers += 1

    def release_read(self):
        with self._cond:
            self._readers -= 1
            if self._readers == 0:
                self._cond.notify_all()

    def acquire_write(self):
        with self._cond:
            self._writers_waiting += 1
            while self._writer or self._readers:
                self._cond.wait()
            self._writers_waiting -= 1
            self._writer = True

    def release_write(self):
        with self._cond:
            self._writer = False
            self._cond.notify_all()


class TextSpeechAdapter:
    """Default adapter: identity on text, no audio dependency."""

    def transcribe(self, source: str) -> str:
        return source

    def synthesize(self, message: str) -> str:
        return message


def packaged_data_path(name: str) -> Path:
    return Path(str(resources.files("jarvis_kg") / "data" / name))


def load_templates(directory: Path) -> dict[str, str]:
    templates = {}
    for path in sorted(Path(directory).glob("*.rq")):
        templates[path.stem] = path.read_text(encoding="utf-8")
    return templates


class JarvisService:
    """In-process service: the full ask pipeline plus the mutation methods."""

    def __init__(
        self,
        fleet: Fleet,
        specs: list[IntentSpec],
        templates: dict[str, str],
        adapter: Optional[TextSpeechAdapter] = None,
    ):
        self.graph = seed_tbox(Graph())
        self.fleet = fleet
        for record in fleet.engines.values():
            assert_engine(self.graph, record)
        self.graph.materialize()
        self.specs = specs
        self.handlers = Handlers(self.graph, self.fleet, templates)
        self.adapter = adapter or TextSpeechAdapter()
        self._lock = _RWLock()
        self._highlight_lock = threading.Lock()
        self.highlight: Optional[tuple[int, Optional[str]]] = None

    @classmethod
    def from_paths(
        cls,
        fleet_path: Optional[Path] = None,
        intents_path: Optional[Path] = None,
        templates_dir: Optional[Path] = None,
    ) -> "JarvisService":
        fleet_path = Path(fleet_path or packaged_data_path("demo_fleet.json"))
        intents_path = Path(intents_path or packaged_data_path("intents.md"))
        templates_dir = Path(templates_dir or packaged_data_path("templates"))
        fleet = fleet_from_dict(json.loads(fleet_path.read_text(encoding="utf-8")))
        specs = parse_training_file(intents_path.read_text(encoding="utf-8"))
        return cls(fleet, specs, load_templates(templates_dir))

    # -- ask pipeline ---------------------------------------------------------

    def ask(self, utterance) -> SystemResponse:
        """Total: any failure yields an apology response, never an exception."""
        try:
            utterance = self.adapter.transcribe(utterance)
            if not isinstance(utterance, str):
                return apology("command was not text")
            self._lock.acquire_read()
            try:
                command = classify(utterance, self.specs)
                if command is None:
                    response = SystemResponse(None, None, APOLOGY_NO_MATCH)
                else:
                    cleared = clear_slots(command, self.graph)
                    response = self.handlers.handle(cleared)
            finally:
                self._lock.release_read()
        except Exception as exc:
            response = apology(self._failure_label(exc))
        with self._highlight_lock:
            if response.engine_id is not None:
                self.highlight = (response.engine_id, response.subsystem)
            else:
                self.highlight = None
        self.adapter.synthesize(response.message)
        return response

    @staticmethod
    def _failure_label(exc: Exception) -> str:
        if isinstance(exc, SlotClearingFailed):
            inner = _label_or_none(exc.reason)
            return f"slot clearing failed: {inner}" if inner else "slot clearing failed"
        return _label_or_none(exc) or "internal error"

    # -- mutation endpoints ---------------------------------------------------

    def add_engine(self, spec: dict):
        record = engine_from_dict(spec)
        self._lock.acquire_write()
        try:
            self.fleet.add_engine(record, self.graph)
            self.graph.materialize()
        finally:
            self._lock.release_write()
        return {"ok": True, "vr_id": record.vr_id}

    def add_update_method(self, spec: dict):
        try:
            target = spec["characteristic"]
            func_args = spec["func_args"]
            source = spec["func_expr"]
        except (KeyError, TypeError) as exc:
            raise SchemaError(
                "add_update_method needs characteristic, func_args, func_expr"
            ) from exc
        for name in [target, *func_args]:
            if not isinstance(name, str) or not _IDENT_RE.match(name):
                raise UnknownCharacteristic(f"invalid characteristic name {name!r}")
        method = UpdateMethod.from_expression(target, func_args, source)
        self._lock.acquire_write()
        try:
            self.fleet.register_update_method(method)
            fn_iri = getattr(AERO, f"Function_{target}")
            self.graph.add(fn_iri, RDF_TYPE, AERO.Function)
            self.graph.add(fn_iri, RDFS_LABEL, text(f"Function_{target}"))
            self.graph.add(fn_iri, AERO.computes, getattr(AERO, target))
        finally:
            self._lock.release_write()
        return {"ok": True, "characteristic": target}

    def update_values(self, spec: dict):
        try:
            vr_id = int(spec["engine_id"])
            kind = spec["subsystem"]
            values = dict(spec["values"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(
                "update_values needs engine_id, subsystem, values"
            ) from exc
        hours = spec.get("flight_hours")
        self._lock.acquire_write()
        try:
            changed = self.fleet.apply_updates(
                vr_id, kind, values,
                float(hours) if hours is not None else None,
                self.graph,
            )
        finally:
            self._lock.release_write()
        return {"changed": {name: value for name, value in sorted(changed.items())}}

    def get_fleet_state(self):
        self._lock.acquire_read()
        try:
            snapshot = fleet_to_dict(self.fleet)
        finally:
            self._lock.release_read()
        with self._highlight_lock:
            highlight = (
                {"engine_id": self.highlight[0], "subsystem": self.highlight[1]}
                if self.highlight is not None
                else None
            )
        snapshot["highlight"] = highlight
        return snapshot


def _label_or_none(exc: Exception) -> Optional[str]:
    for exc_type, label in _FAILURE_LABELS:
        if isinstance(exc, exc_type):
            return label
    return None


# --- JSON-RPC over HTTP ------------------------------------------------------

class BindError(JarvisError):
    pass


@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 8377
    fleet_path: Optional[Path] = None
    intents_path: Optional[Path] = None
    templates_dir: Optional[Path] = None
    log_path: Optional[Path] = None
    extra: dict = field(default_factory=dict)


_PARSE_ERROR = -32700
_INVALID_REQUEST = -32600
_METHOD_NOT_FOUND = -32601
_INVALID_PARAMS = -32602
_APPLICATION_ERROR = -32000


class JsonRpcHttpServer:
    """Single endpoint POST /rpc speaking JSON-RPC 2.0."""

    METHODS = ("ask", "add_engine", "add_update_method", "update_values",
               "get_fleet_state")

    def __init__(self, service: JarvisService, config: ServerConfig):
        self.service = service
        self.config = config
        self._log_lock = threading.Lock()
        self._log_file = None
        if config.log_path:
            self._log_file = open(config.log_path, "a", encoding="utf-8")
        try:
            self.httpd = ThreadingHTTPServer(
                (config.host, config.port), self._handler_class()
            )
        except OSError as exc:
            raise BindError(f"cannot bind {config.host}:{config.port}: {exc}") from exc
        self.httpd.daemon_threads = True

    @property
    def port(self) -> int:
        return self.httpd.server_address[1]

    def _log(self, method: str, latency_ms: float):
        if self._log_file is None:
            return
        line = json.dumps({
            "ts": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            "method": method,
            "latency_ms": round(latency_ms, 3),
        })
        with self._log_lock:
            self._log_file.write(line + "\n")
            self._log_file.flush()

    def dispatch(self, method: str, params: dict):
        service = self.service
        if method == "ask":
            if not isinstance(params, dict) or "text" not in params:
                raise _ParamsError("ask needs a 'text' parameter")
            return service.ask(params["text"]).to_wire()
        if method == "add_engine":
            if not isinstance(params, dict) or "engine" not in params:
                raise _ParamsError("add_engine needs an 'engine' parameter")
            return service.add_engine(params["engine"])
        if method == "add_update_method":
            return service.add_update_method(params if isinstance(params, dict) else {})
        if method == "update_values":
            return service.update_values(params if isinstance(params, dict) else {})
        if method == "get_fleet_state":
            return service.get_fleet_state()
        raise _MethodNotFound(method)

    def handle_body(self, body: bytes) -> dict:
        try:
            envelope = json.loads(body.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            return _error_response(None, _PARSE_ERROR, "parse error")
        if not isinstance(envelope, dict):
            return _error_response(None, _INVALID_REQUEST, "request must be an object")
        req_id = envelope.get("id")
        if envelope.get("jsonrpc") != "2.0" or not isinstance(envelope.get("method"), str):
            return _error_response(req_id, _INVALID_REQUEST, "invalid JSON-RPC envelope")
        method = envelope["method"]
        params = envelope.get("params", {})
        start = time.perf_counter()
        try:
            result = self.dispatch(method, params)
        except _MethodNotFound:
            return _error_response(req_id, _METHOD_NOT_FOUND, f"unknown method {method!r}")
        except _ParamsError as exc:
            return _error_response(req_id, _INVALID_PARAMS, str(exc))
        except JarvisError as exc:
            return _error_response(
                req_id, _APPLICATION_ERROR, str(exc),
                data={"error_class": type(exc).__name__},
            )
        finally:
            self._log(method, (time.perf_counter() - start) * 1000.0)
        return {"jsonrpc": "2.0", "id": req_id, "result": result}

    def _handler_class(self):
        server = self

        class Handler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"

            def do_POST(self):
                if self.path != "/rpc":
                    self.send_error(404)
                    return
                length = int(self.headers.get("Content-Length", 0))
                body = self.rfile.read(length)
                payload = json.dumps(server.handle_body(body)).encode("utf-8")
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(payload)))
                self.send_header("Access-Control-Allow-Origin", "*")
                self.end_headers()
                self.wfile.write(payload)

            def do_OPTIONS(self):
                self.send_response(204)
                self.send_header("Access-Control-Allow-Origin", "*")
                self.send_header("Access-Control-Allow-Methods", "POST, OPTIONS")
                self.send_header("Access-Control-Allow-Headers", "Content-Type")
                self.send_header("Content-Length", "0")
                self.end_headers()

            def log_message(self, *args):  # quiet by default
                pass

        return Handler

    def serve_forever(self):
        try:
            self.httpd.serve_forever()
        finally:
            self.close()

    def shutdown(self):
        self.httpd.shutdown()

    def close(self):
        self.httpd.server_close()
        if self._log_file is not None:
            self._log_file.flush()
            self._log_file.close()
            self._log_file = None


class _MethodNotFound(Exception):
    pass


class _ParamsError(Exception):
    pass


def _error_response(req_id, code: int, message: str, data: Optional[dict] = None) -> dict:
    error: dict = {"code": code, "message": message}
    if data:
        error["data"] = data
    return {"jsonrpc": "2.0", "id": req_id, "error": error}


def resolve_port(config: ServerConfig) -> int:
    env_port = os.environ.get("JARVIS_PORT")
    if config.extra.get("port_from_flag"):
        return config.port
    if env_port:
        return int(env_port)
    return config.port


def serve(config: ServerConfig) -> JsonRpcHttpServer:
    """Validate config, build the service and return a bound, unstarted server."""
    for path in (config.fleet_path, config.intents_path, config.templates_dir):
        if path is not None and not Path(path).exists():
            raise JarvisError(f"missing file or directory: {path}")
    service = JarvisService.from_paths(
        config.fleet_path, config.intents_path, config.templates_dir
    )
    config = ServerConfig(
        host=config.host,
        port=resolve_port(config),
        fleet_path=config.fleet_path,
        intents_path=config.intents_path,
        templates_dir=config.templates_dir,
        log_path=config.log_path,
        extra=config.extra,
    )
    return JsonRpcHttpServer(service, config)
