"""In-process stub of a chat-completions VLM endpoint, for tests and local
dry runs.

Records every request body it accepts and can be scripted to fail with
given HTTP status codes before succeeding, which is how the retry policy
is exercised.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable, Optional

DEFAULT_REPLY = "A fiú festi le a lányt."


class StubVLMServer:
    """Minimal OpenAI-ish chat-completions endpoint.

    reply_fn maps a request body to the assistant text; fail_statuses is a
    queue of HTTP statuses served (one per request) before normal replies
    resume.
    """

    def __init__(
        self,
        reply_fn: Optional[Callable[[dict], str]] = None,
        fail_statuses: Optional[list[int]] = None,
    ):
        self.reply_fn = reply_fn or (lambda body: DEFAULT_REPLY)
        self._lock = threading.Lock()
        self.fail_statuses = list(fail_statuses or [])
        self.requests: list[dict] = []
        self.request_count = 0
        self._server: Optional[ThreadingHTTPServer] = None
        self._thread: Optional[threading.Thread] = None

    # -- lifecycle ---------------------------------------------------------

    def start(self, port: int = 0) -> str:
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):  # noqa: N802 (http.server API)
                length = int(self.headers.get("Content-Length", 0))
                body = json.loads(self.rfile.read(length) or b"{}")
                status, payload = stub._handle(body)
                data = json.dumps(payload, ensure_ascii=False).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def log_message(self, *args):
                pass

        self._server = ThreadingHTTPServer(("127.0.0.1", port), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        host, actual_port = self._server.server_address[:2]
        return f"http://{host}:{actual_port}/v1/chat/completions"

    def stop(self) -> None:
        if self._server is not None:
            self._server.shutdown()
            self._server.server_close()
            self._server = None

    def __enter__(self):
        self.url = self.start()
        return self

    def __exit__(self, *exc):
        self.stop()

    # -- behaviour ---------------------------------------------------------

    def _handle(self, body: dict) -> tuple[int, dict]:
        with self._lock:
            self.request_count += 1
            if self.fail_statuses:
                status = self.fail_statuses.pop(0)
                return status, {"error": {"message": f"scripted failure {status}"}}
            self.requests.append(body)
            text = self.reply_fn(body)
        return 200, {
            "id": f"stub-{self.request_count}",
            "object": "chat.completion",
            "choices": [
                {
                    "index": 0,
                    "message": {"role": "assistant", "content": text},
                    "finish_reason": "stop",
                }
            ],
        }
