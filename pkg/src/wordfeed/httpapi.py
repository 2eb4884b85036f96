"""Plain-HTTP JSON API over the study service, plus demo static files.

Endpoints (full field documentation in docs/api.md):

    GET  /api/health
    GET  /api/next-item?user=U[&condition=in_feed_quiz]
    POST /api/answer        {"user", "quiz_id", "chosen_index"}
    GET  /api/link-item?user=U[&condition=link]
    POST /api/link-click    {"user"}
    GET  /api/match?url=...[&page=...][&third_party=0|1]
    GET  /api/layout?w=...&h=...
    GET  /api/plan?user=U&length=N[&condition=...]
    GET  /api/metrics?user=U

Users are enrolled on first contact with next-item / link-item / plan; the
optional `condition` parameter fixes their study condition (default
in_feed_quiz) and may not change afterwards.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlsplit

from .analytics import Metrics
from .filters import InvalidUrlError, MatchDecision
from .placement import Condition, FeedPlan, SlotFill
from .quizgen import AnswerResult, IntroCard, Quiz, QuizError
from .service import (
    ConditionError,
    QuizStateError,
    ServiceError,
    StudyService,
    UnknownUserError,
)

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".png": "image/png",
    ".svg": "image/svg+xml",
    ".ico": "image/x-icon",
    ".map": "application/json",
}


class BadRequest(ValueError):
    pass


def quiz_json(quiz: Quiz) -> dict:
    # correct_index and option glosses stay server-side; the client learns
    # a meaning only through answer feedback.
    return {
        "type": "quiz",
        "quiz_id": quiz.quiz_id,
        "direction": quiz.direction.value,
        "prompt_word": quiz.prompt_word,
        "prompt_text": quiz.prompt_text,
        "options": [{"word_id": o.word_id, "text": o.text} for o in quiz.options],
    }


def intro_json(card: IntroCard) -> dict:
    return {
        "type": "intro",
        "word_id": card.word_id,
        "romanized": card.romanized,
        "gloss": card.gloss,
    }


def answer_json(result: AnswerResult) -> dict:
    return {
        "correct": result.correct,
        "next_action": result.next_action.value,
        "feedback": None
        if result.feedback is None
        else {
            "word_id": result.feedback.chosen_word_id,
            "meaning": result.feedback.chosen_meaning,
        },
    }


def match_json(decision: MatchDecision) -> dict:
    return {
        "verdict": decision.verdict.value,
        "rule": None if decision.rule is None else decision.rule.raw,
    }


def layout_json(fill: SlotFill | None) -> dict:
    if fill is None:
        return {"fit": None}
    return {
        "fit": {
            "unit": {"name": fill.unit.name, "width": fill.unit.width, "height": fill.unit.height},
            "columns": fill.columns,
            "rows": fill.rows,
            "scale": fill.scale,
            "tile_width": fill.tile_w,
            "tile_height": fill.tile_h,
        }
    }


def plan_json(plan: FeedPlan) -> dict:
    return {
        "feed_length": plan.feed_length,
        "rate": plan.rate,
        "condition": plan.condition.value,
        "positions": list(plan.positions),
        "kinds": [k.value for k in plan.kinds],
    }


def metrics_json(metrics: Metrics) -> dict:
    return {
        "quizzes_answered": metrics.quizzes_answered,
        "study_sessions": metrics.study_sessions,
        "distinct_study_days": metrics.distinct_study_days,
        "days_visited": metrics.days_visited,
        "words_learned": metrics.words_learned,
    }


def _condition_param(params: dict, default: Condition | None = None) -> Condition | None:
    text = _opt(params, "condition")
    if text is None:
        return default
    try:
        return Condition(text)
    except ValueError:
        raise BadRequest(f"unknown condition {text!r}") from None


def _opt(params: dict, key: str) -> str | None:
    values = params.get(key)
    return values[0] if values else None


def _req(params: dict, key: str) -> str:
    value = _opt(params, key)
    if value is None:
        raise BadRequest(f"missing parameter {key!r}")
    return value


def _int(text: str, key: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise BadRequest(f"parameter {key!r} must be an integer") from None


class ApiHandler(BaseHTTPRequestHandler):
    server_version = "wordfeed/0.1"
    protocol_version = "HTTP/1.1"

    @property
    def service(self) -> StudyService:
        return self.server.service  # type: ignore[attr-defined]

    def log_message(self, fmt, *args):  # quiet by default
        if getattr(self.server, "verbose", False):
            super().log_message(fmt, *args)

    # -- plumbing ------------------------------------------------------

    def _send_json(self, payload: dict, status: int = 200) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _send_error_json(self, exc: Exception) -> None:
        status = 500
        if isinstance(exc, UnknownUserError):
            status = 404
        elif isinstance(exc, (ConditionError, QuizStateError)):
            status = 409
        elif isinstance(exc, (BadRequest, QuizError, ServiceError, InvalidUrlError, ValueError)):
            status = 400
        self._send_json({"error": str(exc)}, status=status)

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        if not raw:
            raise BadRequest("empty request body")
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise BadRequest(f"bad JSON body: {exc}") from None
        if not isinstance(data, dict):
            raise BadRequest("request body must be a JSON object")
        return data

    # -- routing -------------------------------------------------------

    def do_GET(self):
        parts = urlsplit(self.path)
        params = parse_qs(parts.query)
        try:
            handler = {
                "/api/health": self._get_health,
                "/api/next-item": self._get_next_item,
                "/api/link-item": self._get_link_item,
                "/api/match": self._get_match,
                "/api/layout": self._get_layout,
                "/api/plan": self._get_plan,
                "/api/metrics": self._get_metrics,
            }.get(parts.path)
            if handler is not None:
                handler(params)
            else:
                self._serve_static(parts.path)
        except Exception as exc:  # noqa: BLE001 - boundary of the process
            self._send_error_json(exc)

    def do_POST(self):
        parts = urlsplit(self.path)
        try:
            if parts.path == "/api/answer":
                self._post_answer()
            elif parts.path == "/api/link-click":
                self._post_link_click()
            else:
                self._send_json({"error": "not found"}, status=404)
        except Exception as exc:  # noqa: BLE001
            self._send_error_json(exc)

    def do_OPTIONS(self):
        # CORS preflight, so the demo client can run from another origin.
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    # -- endpoint bodies -----------------------------------------------

    def _get_health(self, params):
        self._send_json(
            {
                "status": "ok",
                "study_words": len(self.service.study_set),
                "users": len(self.service.users),
            }
        )

    def _get_next_item(self, params):
        user = _req(params, "user")
        self.service.get_or_enroll(user, _condition_param(params))
        item = self.service.get_next_item(user)
        self._send_json(quiz_json(item) if isinstance(item, Quiz) else intro_json(item))

    def _post_answer(self):
        body = self._read_body()
        for key in ("user", "quiz_id", "chosen_index"):
            if key not in body:
                raise BadRequest(f"missing field {key!r}")
        if not isinstance(body["chosen_index"], int) or isinstance(body["chosen_index"], bool):
            raise BadRequest("chosen_index must be an integer")
        result = self.service.post_answer(str(body["user"]), str(body["quiz_id"]), body["chosen_index"])
        self._send_json(answer_json(result))

    def _get_link_item(self, params):
        user = _req(params, "user")
        self.service.get_or_enroll(user, _condition_param(params))
        self._send_json({"url": self.service.get_link_item(user)})

    def _post_link_click(self):
        body = self._read_body()
        if "user" not in body:
            raise BadRequest("missing field 'user'")
        self.service.post_link_click(str(body["user"]))
        self._send_json({"ok": True})

    def _get_match(self, params):
        url = _req(params, "url")
        page = _opt(params, "page")
        tp_text = _opt(params, "third_party")
        third_party = None if tp_text is None else tp_text in ("1", "true", "yes")
        self._send_json(match_json(self.service.get_match(url, page, third_party)))

    def _get_layout(self, params):
        width = _int(_req(params, "w"), "w")
        height = _int(_req(params, "h"), "h")
        self._send_json(layout_json(self.service.get_layout(width, height)))

    def _get_plan(self, params):
        user = _req(params, "user")
        self.service.get_or_enroll(user, _condition_param(params))
        length = _int(_req(params, "length"), "length")
        self._send_json(plan_json(self.service.get_plan(user, length)))

    def _get_metrics(self, params):
        user = _req(params, "user")
        self._send_json(metrics_json(self.service.get_metrics(user)))

    # -- static demo files ----------------------------------------------

    def _serve_static(self, path: str) -> None:
        root = self.service.config.static_dir
        if root is None:
            self._send_json({"error": "not found"}, status=404)
            return
        rel = path.lstrip("/") or "index.html"
        target = (Path(root) / rel).resolve()
        try:
            target.relative_to(Path(root).resolve())
        except ValueError:
            self._send_json({"error": "not found"}, status=404)
            return
        if target.is_dir():
            target = target / "index.html"
        if not target.is_file():
            self._send_json({"error": "not found"}, status=404)
            return
        body = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", _CONTENT_TYPES.get(target.suffix, "application/octet-stream"))
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


def make_server(service: StudyService, listen: str | None = None) -> ThreadingHTTPServer:
    """Bind a threading HTTP server to the service. Port 0 picks a free
    port (the bound address is on server.server_address)."""
    listen = listen or service.config.listen
    host, _, port_text = listen.rpartition(":")
    if not host:
        raise ServiceError(f"listen address must be host:port, got {listen!r}")
    server = ThreadingHTTPServer((host, int(port_text)), ApiHandler)
    server.service = service  # type: ignore[attr-defined]
    server.daemon_threads = True
    return server


def start_in_thread(service: StudyService, listen: str = "127.0.0.1:0"):
    """Run the server on a daemon thread; returns (server, thread)."""
    server = make_server(service, listen)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server, thread
