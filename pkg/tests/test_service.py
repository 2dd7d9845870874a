import asyncio
import email
import email.policy
import http.client
import threading
import time

import pytest
from fastapi.testclient import TestClient

from halfdr.pipeline import PipelineStats
from halfdr.service.app import BOUNDARY, MJPEGServer, create_app, parse_address
from halfdr.service.schemas import StatsModel
from halfdr.service.slot import FrameSlot

from conftest import solid


def parse_multipart(content_type: str, body: bytes):
    """Split a multipart body with the standard library email parser."""
    raw = f"Content-Type: {content_type}\r\n\r\n".encode() + body
    msg = email.message_from_bytes(raw, policy=email.policy.HTTP)
    assert msg.is_multipart() and not msg.defects
    return [(dict(p.items()), p.get_payload(decode=True)) for p in msg.iter_parts()]


def test_latest_frame_wins():
    slot = FrameSlot()
    slot.publish(solid(8, 8, (0, 0, 0), 0))
    slot.publish(solid(8, 8, (255, 255, 255), 1))
    entry = slot.wait_newer(0, timeout=0)
    assert entry.index == 1 and entry.generation == 2


def test_wait_before_first_frame_times_out():
    slot = FrameSlot()
    t = time.monotonic()
    assert slot.wait_newer(0, timeout=0.05) is None
    assert time.monotonic() - t >= 0.04


def test_publish_must_increase_index():
    slot = FrameSlot()
    slot.publish_encoded(b"a", 3)
    with pytest.raises(ValueError):
        slot.publish_encoded(b"b", 3)


def test_slow_reader_sees_ordered_subsequence():
    slot = FrameSlot()
    seen = []

    def reader():
        gen = 0
        while True:
            entry = slot.wait_newer(gen, timeout=5)
            if entry is None:
                return
            seen.append(entry.index)
            gen = entry.generation
            time.sleep(0.002)

    th = threading.Thread(target=reader)
    th.start()
    for i in range(1000):
        slot.publish_encoded(b"x%d" % i, i)
    slot.close()
    th.join(10)
    assert seen, "reader saw nothing"
    assert seen == sorted(set(seen))
    assert seen[-1] == 999
    assert len(seen) < 1000  # it really was too slow for some


def test_async_waiter_woken_from_other_thread():
    slot = FrameSlot()

    async def main():
        task = asyncio.create_task(slot.next_after(0, timeout=5))
        await asyncio.sleep(0.01)
        threading.Thread(target=slot.publish_encoded, args=(b"j", 7)).start()
        return await task

    assert asyncio.run(main()).index == 7


def test_async_waiter_timeout_and_close():
    slot = FrameSlot()
    assert asyncio.run(slot.next_after(0, timeout=0.02)) is None
    slot.close()
    assert asyncio.run(slot.next_after(0)) is None


def test_snapshot_stats_and_unknown_path():
    slot = FrameSlot()
    stats = PipelineStats(frames_in=12, frames_out=2, wall_fps=40.5, threads_used=2, warmup_frames=10)
    stats.record("observe", 0.002)
    client = TestClient(create_app(slot, lambda: stats, first_frame_timeout=0.05))
    assert client.get("/snapshot").status_code == 503
    assert client.get("/stream").status_code == 503
    slot.publish(solid(16, 16, (10, 20, 30), 4))
    r = client.get("/snapshot")
    assert r.status_code == 200 and r.headers["content-type"] == "image/jpeg"
    assert r.content[:2] == b"\xff\xd8" and r.headers["x-frame-index"] == "4"
    assert client.get("/nope").status_code == 404
    r = client.get("/stats")
    assert r.status_code == 200 and r.headers["content-type"].startswith("text/plain")
    parsed = StatsModel.parse_text(r.text)
    assert parsed.frames_in == 12 and parsed.threads_used == 2
    assert parsed.per_stage_ms["observe"] == pytest.approx(2.0)


def test_stats_text_round_trip():
    m = StatsModel(frames_in=3, frames_out=1, wall_fps=9.5, threads_used=1, warmup_frames=2,
                   per_stage_ms={"observe": 1.25, "encode": 3.5})
    assert StatsModel.parse_text(m.to_text()) == m
    assert "wall_fps=9.500" in m.to_text().splitlines()


def test_parse_address():
    assert parse_address("0.0.0.0:8080") == ("0.0.0.0", 8080)
    assert parse_address(":9000") == ("0.0.0.0", 9000)
    with pytest.raises(ValueError):
        parse_address("localhost")


def test_stream_two_frames_over_http():
    slot = FrameSlot()
    f0, f1 = solid(32, 16, (200, 0, 0), 0), solid(32, 16, (0, 0, 200), 1)
    with MJPEGServer(create_app(slot)) as server:
        e0 = slot.publish(f0)
        conn = http.client.HTTPConnection(server.host, server.port, timeout=10)
        conn.request("GET", "/stream")
        resp = conn.getresponse()
        assert resp.status == 200
        ctype = resp.getheader("Content-Type")
        assert ctype == f"multipart/x-mixed-replace; boundary={BOUNDARY}"
        e1 = slot.publish(f1)
        slot.close()
        body = resp.read()
        conn.close()
    parts = parse_multipart(ctype, body)
    assert [p for _, p in parts] == [e0.jpeg, e1.jpeg]
    for headers, payload in parts:
        assert headers["Content-Type"] == "image/jpeg"
        assert int(headers["Content-Length"]) == len(payload)
