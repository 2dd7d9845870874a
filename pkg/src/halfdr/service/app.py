"""HTTP front end: Motion JPEG stream, still snapshot and run statistics.

Endpoints::

    GET /stream    200 multipart/x-mixed-replace; boundary=hdrframe
                   each part: --hdrframe CRLF
                              Content-Type: image/jpeg CRLF
                              Content-Length: <n> CRLF CRLF <n bytes> CRLF
                   the stream ends with --hdrframe-- when the run finishes
    GET /snapshot  200 image/jpeg of the newest frame, 503 before the first one
    GET /stats     200 text/plain, key=value lines (see StatsModel.to_text)
"""

from __future__ import annotations

import logging
import socket
import threading
from typing import Callable, Optional

import uvicorn
from fastapi import FastAPI
from fastapi.responses import PlainTextResponse, Response, StreamingResponse

from halfdr.pipeline import PipelineStats
from halfdr.service.schemas import StatsModel
from halfdr.service.slot import EncodedFrame, FrameSlot

log = logging.getLogger(__name__)

BOUNDARY = "hdrframe"
STREAM_CONTENT_TYPE = f"multipart/x-mixed-replace; boundary={BOUNDARY}"

StatsProvider = Callable[[], PipelineStats]


def encode_part(entry: EncodedFrame) -> bytes:
    head = (
        f"--{BOUNDARY}\r\nContent-Type: image/jpeg\r\n"
        f"Content-Length: {len(entry.jpeg)}\r\n\r\n"
    ).encode("ascii")
    return head + entry.jpeg + b"\r\n"


def create_app(
    slot: FrameSlot,
    stats_provider: Optional[StatsProvider] = None,
    first_frame_timeout: float = 10.0,
) -> FastAPI:
    app = FastAPI(title="halfdr", docs_url=None, redoc_url=None, openapi_url=None)

    @app.get("/stream")
    async def stream():
        first = await slot.next_after(0, first_frame_timeout)
        if first is None:
            return PlainTextResponse("no frame available\n", status_code=503)

        async def parts():
            entry: Optional[EncodedFrame] = first
            while entry is not None:
                yield encode_part(entry)
                entry = await slot.next_after(entry.generation)
            yield f"--{BOUNDARY}--\r\n".encode("ascii")

        return StreamingResponse(
            parts(),
            media_type=STREAM_CONTENT_TYPE,
            headers={"Cache-Control": "no-cache, private", "Pragma": "no-cache"},
        )

    @app.get("/snapshot")
    def snapshot():
        entry = slot.latest()
        if entry is None:
            return PlainTextResponse("no frame available\n", status_code=503)
        return Response(entry.jpeg, media_type="image/jpeg",
                        headers={"X-Frame-Index": str(entry.index)})

    @app.get("/stats", response_class=PlainTextResponse)
    def stats():
        current = stats_provider() if stats_provider is not None else PipelineStats()
        return StatsModel.from_stats(current).to_text()

    return app


def parse_address(address: str) -> tuple[str, int]:
    host, sep, port = address.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"expected host:port, got {address!r}")
    return host or "0.0.0.0", int(port)


class MJPEGServer:
    """Runs the app with uvicorn on a background thread."""

    def __init__(self, app: FastAPI, host: str = "127.0.0.1", port: int = 0):
        self.app = app
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._sock.bind((host, port))
        self.host, self.port = self._sock.getsockname()[:2]
        config = uvicorn.Config(
            app, log_level="warning", lifespan="off", timeout_graceful_shutdown=1
        )
        self._server = uvicorn.Server(config)
        self._thread: Optional[threading.Thread] = None

    @property
    def url(self) -> str:
        return f"http://{self.host}:{self.port}"

    def start(self) -> MJPEGServer:
        self._thread = threading.Thread(
            target=self._server.run, kwargs={"sockets": [self._sock]},
            name="halfdr-http", daemon=True,
        )
        self._thread.start()
        while not self._server.started:
            if not self._thread.is_alive():
                raise RuntimeError("HTTP server failed to start")
            self._thread.join(0.01)
        log.info("serving Motion JPEG on %s/stream", self.url)
        return self

    def stop(self) -> None:
        self._server.should_exit = True
        if self._thread is not None:
            self._thread.join(5)
        self._sock.close()

    def __enter__(self) -> MJPEGServer:
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()


def serve(address: str, slot: FrameSlot, stats_provider: Optional[StatsProvider] = None) -> None:
    """Serve in the foreground until interrupted."""
    host, port = parse_address(address)
    uvicorn.run(create_app(slot, stats_provider), host=host, port=port, log_level="warning")
