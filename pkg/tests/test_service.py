import asyncio
import base64
import hashlib
import json
import struct

import numpy as np
import pytest

from knotdyn import kernels
from knotdyn.service import serve


class LineClient:
    def __init__(self, reader, writer):
        self.reader = reader
        self.writer = writer
        self.pending = []

    @classmethod
    async def connect(cls, port):
        reader, writer = await asyncio.open_connection("127.0.0.1", port)
        return cls(reader, writer)

    async def send_raw(self, text: str):
        self.writer.write((text + "\n").encode())
        await self.writer.drain()

    async def send(self, **msg):
        await self.send_raw(json.dumps(msg))

    async def _read(self, timeout=30.0):
        line = await asyncio.wait_for(self.reader.readline(), timeout)
        assert line, "connection closed"
        return json.loads(line)

    async def recv(self, timeout=30.0):
        if self.pending:
            return self.pending.pop(0)
        return await self._read(timeout)

    async def recv_type(self, wanted, timeout=30.0):
        for i, msg in enumerate(self.pending):
            if msg.get("type") == wanted:
                return self.pending.pop(i)
        while True:
            msg = await self._read(timeout)
            if msg.get("type") == wanted:
                return msg
            self.pending.append(msg)

    async def command(self, **msg):
        await self.send(**msg)
        while True:
            reply = await self._read()
            if reply.get("type") in ("status", "error"):
                return reply
            self.pending.append(reply)

    def close(self):
        self.writer.close()


@pytest.fixture()
def service_port():
    """Runs the service on an ephemeral port inside the test's event loop."""
    return 0  # resolved by run_service


def run_service(coro_fn):
    """Run `async def coro_fn(port)` against a fresh service instance."""

    async def main():
        loop = asyncio.get_event_loop()
        ready = loop.create_future()
        server_task = asyncio.ensure_future(serve(0, None, ready))
        port = await ready
        try:
            await asyncio.wait_for(coro_fn(port), 120)
        finally:
            server_task.cancel()
            try:
                await server_task
            except asyncio.CancelledError:
                pass

    asyncio.run(main())


class TestProtocol:
    def test_load_run_pause_roundtrip(self):
        async def scenario(port):
            client = await LineClient.connect(port)
            status = await client.command(cmd="load", spec="N((1,1,1))", beads=120)
            assert status["type"] == "status"
            assert status["beads"] == 120
            assert status["running"] is False
            frame = await client.recv_type("frame")
            assert len(frame["points"]) == 120

            status = await client.command(cmd="run")
            assert status["running"] is True
            frame = await client.recv_type("frame")
            assert frame["step"] > 0
            energy = kernels.simon_energy(np.asarray(frame["points"]))
            assert abs(energy - frame["energy"]) <= 1e-12 * abs(energy)

            status = await client.command(cmd="pause")
            assert status["running"] is False
            client.close()

        run_service(scenario)

    def test_mode_switch_and_set(self):
        async def scenario(port):
            client = await LineClient.connect(port)
            await client.command(cmd="load", spec="T(2,3)", beads=100)
            status = await client.command(cmd="mode", value="free")
            assert status["mode"] == "free"
            status = await client.command(cmd="set", param="spring_k", value=10.0)
            assert status["params"]["spring_constant"] == 10.0
            status = await client.command(cmd="set", param="dt", value=5e-4)
            assert status["params"]["dt"] == 5e-4
            status = await client.command(cmd="mode", value="constrained")
            assert status["mode"] == "constrained"
            client.close()

        run_service(scenario)

    def test_set_rejects_out_of_range(self):
        async def scenario(port):
            client = await LineClient.connect(port)
            await client.command(cmd="load", spec="T(2,3)", beads=100)
            before = await client.command(cmd="subscribe")
            reply = await client.command(cmd="set", param="repulsion_exponent", value=-1)
            assert reply["type"] == "error"
            after = await client.command(cmd="subscribe")
            assert after["params"] == before["params"]
            client.close()

        run_service(scenario)

    def test_perturb_deterministic(self):
        async def scenario(port):
            c1 = await LineClient.connect(port)
            await c1.command(cmd="load", spec="T(2,3)", beads=100, session="a")
            await c1.recv_type("frame")  # the load broadcast
            await c1.command(cmd="perturb", magnitude=0.001, seed=7, session="a")
            f1 = await c1.recv_type("frame")

            await c1.command(cmd="load", spec="T(2,3)", beads=100, session="b")
            await c1.recv_type("frame")
            await c1.command(cmd="perturb", magnitude=0.001, seed=7, session="b")
            f2 = await c1.recv_type("frame")
            assert f1["points"] == f2["points"]
            c1.close()

        run_service(scenario)

    def test_malformed_message_keeps_connection(self):
        async def scenario(port):
            client = await LineClient.connect(port)
            await client.send_raw("{this is not json")
            err = await client.recv()
            assert err["type"] == "error"
            await client.send(foo="bar")
            err = await client.recv()
            assert err["type"] == "error"
            status = await client.command(cmd="load", spec="T(2,3)", beads=100)
            assert status["type"] == "status"
            client.close()

        run_service(scenario)

    def test_unknown_command(self):
        async def scenario(port):
            client = await LineClient.connect(port)
            reply = await client.command(cmd="frobnicate")
            assert reply["type"] == "error"
            client.close()

        run_service(scenario)

    def test_two_subscribers_same_session(self):
        async def scenario(port):
            c1 = await LineClient.connect(port)
            c2 = await LineClient.connect(port)
            await c1.command(cmd="load", spec="N((1,1,1))", beads=120, session="shared")
            await c2.command(cmd="subscribe", session="shared")
            await c1.command(cmd="set", param="frame_stride", value=5, session="shared")
            await c1.command(cmd="run", session="shared")
            f1 = await c1.recv_type("frame")
            f2 = await c2.recv_type("frame")
            while f1["step"] != f2["step"]:  # align on a common step
                if f1["step"] < f2["step"]:
                    f1 = await c1.recv_type("frame")
                else:
                    f2 = await c2.recv_type("frame")
            assert f1["points"] == f2["points"]
            await c1.command(cmd="pause", session="shared")
            c1.close()
            c2.close()

        run_service(scenario)

    def test_frame_stride_multiples(self):
        async def scenario(port):
            client = await LineClient.connect(port)
            await client.command(cmd="load", spec="T(2,3)", beads=100)
            await client.command(cmd="set", param="frame_stride", value=10)
            await client.command(cmd="run")
            seen = [await (client.recv_type("frame")) for _ in range(3)]
            assert all(f["step"] % 10 == 0 for f in seen)
            await client.command(cmd="pause")
            client.close()

        run_service(scenario)

    def test_snapshot_writes_curve(self, tmp_path):
        async def scenario(port):
            client = await LineClient.connect(port)
            await client.command(cmd="load", spec="N((1,1,1))", beads=120)
            path = str(tmp_path / "snap.json")
            status = await client.command(cmd="snapshot", path=path)
            assert status["type"] == "status"
            from knotdyn.io import load_curve

            assert len(load_curve(path)) == 120
            client.close()

        run_service(scenario)


class TestWebSocket:
    def test_websocket_upgrade_and_command(self):
        async def scenario(port):
            reader, writer = await asyncio.open_connection("127.0.0.1", port)
            key = base64.b64encode(b"0123456789abcdef").decode()
            writer.write(
                (
                    f"GET / HTTP/1.1\r\nHost: x\r\nUpgrade: websocket\r\n"
                    f"Connection: Upgrade\r\nSec-WebSocket-Key: {key}\r\n"
                    f"Sec-WebSocket-Version: 13\r\n\r\n"
                ).encode()
            )
            await writer.drain()
            status_line = await reader.readline()
            assert b"101" in status_line
            accept_expect = base64.b64encode(
                hashlib.sha1(
                    (key + "258EAFA5-E914-47DA-95CA-C5AB0DC85B11").encode()
                ).digest()
            ).decode()
            headers = b""
            while not headers.endswith(b"\r\n\r\n"):
                headers += await reader.readexactly(1)
            assert accept_expect.encode() in headers

            def mask_frame(payload: bytes) -> bytes:
                mask = b"\x11\x22\x33\x44"
                masked = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
                header = bytes([0x81])
                n = len(payload)
                assert n < 126
                header += bytes([0x80 | n])
                return header + mask + masked

            async def read_frame():
                head = await reader.readexactly(2)
                length = head[1] & 0x7F
                if length == 126:
                    length = struct.unpack(">H", await reader.readexactly(2))[0]
                elif length == 127:
                    length = struct.unpack(">Q", await reader.readexactly(8))[0]
                return json.loads(await reader.readexactly(length))

            writer.write(mask_frame(json.dumps({"cmd": "load", "spec": "T(2,3)", "beads": 100}).encode()))
            await writer.drain()
            messages = [await read_frame(), await read_frame()]
            types = {m["type"] for m in messages}
            assert "status" in types and "frame" in types
            writer.close()

        run_service(scenario)
