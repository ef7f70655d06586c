import json
import threading
import urllib.request

import pytest

from jarvis_kg.service import JarvisService, JsonRpcHttpServer, ServerConfig


@pytest.fixture(scope="session")
def demo_service() -> JarvisService:
    """One shared read-only service over the packaged demo data."""
    return JarvisService.from_paths()


@pytest.fixture()
def service() -> JarvisService:
    """A fresh service for tests that mutate state."""
    return JarvisService.from_paths()


class RpcClient:
    def __init__(self, port: int):
        self.url = f"http://127.0.0.1:{port}/rpc"
        self._next_id = 0

    def post_raw(self, body: bytes) -> dict:
        req = urllib.request.Request(
            self.url, body, {"Content-Type": "application/json"}
        )
        with urllib.request.urlopen(req) as resp:
            return json.loads(resp.read())

    def call(self, method: str, params=None) -> dict:
        self._next_id += 1
        envelope = {"jsonrpc": "2.0", "id": self._next_id, "method": method}
        if params is not None:
            envelope["params"] = params
        return self.post_raw(json.dumps(envelope).encode())

    def result(self, method: str, params=None):
        reply = self.call(method, params)
        assert "error" not in reply, reply
        return reply["result"]


@pytest.fixture()
def rpc_server(service):
    server = JsonRpcHttpServer(service, ServerConfig(port=0))
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield server
    server.shutdown()
    thread.join(timeout=5)


@pytest.fixture()
def rpc(rpc_server) -> RpcClient:
    return RpcClient(rpc_server.port)
