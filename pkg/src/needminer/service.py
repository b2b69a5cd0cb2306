"""HTTP labeling service.

Endpoints (bodies are JSON objects, matching the corpus line format):

    GET  /api/items/next?labeler=<id>  -> 200 {item_id, text} | 204
    POST /api/votes                    -> 201 {verdict, vote_count}
                                          409 DuplicateVote/ItemComplete
                                          404 UnknownItem
    GET  /api/progress                 -> 200 progress object
    GET  /api/export                   -> 200 completed items, one JSON
                                          object per line

A static UI bundle, when configured, is served under /ui. The server
is a threading HTTP/1.1 server; the label store serializes vote writes
internally, so concurrent submissions are safe.
"""
from __future__ import annotations

import json
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .errors import DuplicateVote, ItemComplete, UnknownItem
from .labeling import LabelStore, export_to_line

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json; charset=utf-8",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
}


def create_server(
    store: LabelStore,
    host: str = "127.0.0.1",
    port: int = 0,
    ui_dir: str | Path | None = None,
) -> ThreadingHTTPServer:
    """Build (but do not start) the labeling HTTP server."""
    ui_root = Path(ui_dir).resolve() if ui_dir is not None else None

    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        # Silence per-request stderr logging; the CLI logs startup only.
        def log_message(self, fmt: str, *args: object) -> None:
            pass

        def _send(self, status: int, body: bytes, content_type: str) -> None:
            self.send_response(status)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _send_json(self, status: int, payload: dict) -> None:
            body = json.dumps(payload, ensure_ascii=False, sort_keys=True).encode("utf-8")
            self._send(status, body, "application/json; charset=utf-8")

        def _send_error(self, status: int, name: str, detail: str = "") -> None:
            self._send_json(status, {"error": name, "detail": detail})

        def do_GET(self) -> None:  # noqa: N802 (http.server API)
            url = urlparse(self.path)
            if url.path == "/api/items/next":
                self._items_next(url.query)
            elif url.path == "/api/progress":
                self._progress()
            elif url.path == "/api/export":
                self._export()
            elif url.path == "/" or url.path == "/ui" or url.path.startswith("/ui/"):
                self._static(url.path)
            else:
                self._send_error(404, "NotFound", url.path)

        def do_POST(self) -> None:  # noqa: N802
            url = urlparse(self.path)
            if url.path != "/api/votes":
                self._send_error(404, "NotFound", url.path)
                return
            length = int(self.headers.get("Content-Length", "0"))
            raw = self.rfile.read(length) if length else b""
            try:
                payload = json.loads(raw.decode("utf-8"))
                item_id = str(payload["item_id"])
                labeler = str(payload["labeler"])
                has_need = payload["has_need"]
            except (json.JSONDecodeError, UnicodeDecodeError, KeyError, TypeError):
                self._send_error(400, "BadRequest", "expected {item_id, labeler, has_need}")
                return
            if not isinstance(has_need, bool) or not labeler:
                self._send_error(400, "BadRequest", "has_need must be boolean, labeler non-empty")
                return
            try:
                agg = store.submit_vote(item_id, labeler, has_need)
            except DuplicateVote as exc:
                self._send_error(409, "DuplicateVote", str(exc))
            except ItemComplete as exc:
                self._send_error(409, "ItemComplete", str(exc))
            except UnknownItem as exc:
                self._send_error(404, "UnknownItem", str(exc))
            else:
                self._send_json(201, {"verdict": agg.verdict.value, "vote_count": agg.vote_count})

        def _items_next(self, query: str) -> None:
            labeler = parse_qs(query).get("labeler", [""])[0]
            if not labeler:
                self._send_error(400, "BadRequest", "labeler query parameter required")
                return
            nxt = store.next_item(labeler)
            if nxt is None:
                self.send_response(204)
                self.send_header("Content-Length", "0")
                self.end_headers()
                return
            item_id, text = nxt
            self._send_json(200, {"item_id": item_id, "text": text})

        def _progress(self) -> None:
            p = store.progress()
            self._send_json(
                200,
                {
                    "items_total": p.items_total,
                    "completed": p.completed,
                    "pending": p.pending,
                    "votes_total": p.votes_total,
                    "per_labeler": dict(sorted(p.per_labeler.items())),
                },
            )

        def _export(self) -> None:
            lines = [export_to_line(*row) for row in store.export()]
            body = ("\n".join(lines) + ("\n" if lines else "")).encode("utf-8")
            self._send(200, body, "application/x-ndjson; charset=utf-8")

        def _static(self, path: str) -> None:
            if ui_root is None:
                self._send_error(404, "NotFound", "no UI bundle configured")
                return
            rel = path[len("/ui"):] if path.startswith("/ui") else path
            rel = rel.lstrip("/") or "index.html"
            target = (ui_root / rel).resolve()
            # Keep requests inside the bundle directory.
            if not target.is_relative_to(ui_root) or not target.is_file():
                self._send_error(404, "NotFound", path)
                return
            content_type = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
            self._send(200, target.read_bytes(), content_type)

    return ThreadingHTTPServer((host, port), Handler)


def serve_forever(server: ThreadingHTTPServer) -> None:
    """Run until interrupted; used by the CLI."""
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
