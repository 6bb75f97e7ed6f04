"""Steering service: live simulations over a line-delimited JSON protocol.

Clients hold a persistent TCP connection and exchange one JSON object per
line.  Connections that start with an HTTP GET are upgraded to WebSocket
(text frames carry the same JSON messages), so browser clients speak the
identical protocol.  Sessions own exactly one simulation loop; commands
are applied between physics steps, never inside one.  Slow subscribers
lose intermediate frames rather than stalling the loop.

Commands:   load{spec,beads?} run{} pause{} mode{value} perturb{magnitude,seed}
            set{param,value} snapshot{path} subscribe{}
Replies:    status{params,step,mode,running} frame{step,energy,points}
            error{message}
Every command may carry "session"; the default session id is "main".
"""

from __future__ import annotations

import asyncio
import base64
import hashlib
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

from . import kernels
from .dynamics import (
    Mode,
    SimParams,
    SimState,
    enter_constrained,
    params_for_curve,
    perturb,
    step,
)
from .errors import KnotdynError
from .io import TrajectoryWriter
from .specs import build_curve_from_spec

_SETTABLE = {
    "dt": "dt",
    "spring_k": "spring_constant",
    "gamma": "viscous_damping",
    "repulsion_exponent": "repulsion_exponent",
    "repulsion_strength": "repulsion_strength",
    "max_disp_fraction": "max_disp_fraction",
}


@dataclass
class Session:
    session_id: str
    record_dir: Path | None = None
    state: SimState | None = None
    params: SimParams | None = None
    running: bool = False
    frame_stride: int = 10
    spec: str = ""
    subscribers: list = field(default_factory=list)
    commands: asyncio.Queue = field(default_factory=asyncio.Queue)
    closed: bool = False
    writer: TrajectoryWriter | None = None

    def status(self) -> dict:
        params = self.params.to_dict() if self.params else {}
        params["frame_stride"] = self.frame_stride
        return {
            "type": "status",
            "session": self.session_id,
            "spec": self.spec,
            "params": params,
            "step": self.state.step_index if self.state else None,
            "mode": self.params.mode.value if self.params else None,
            "running": self.running,
            "beads": len(self.state.curve) if self.state else 0,
        }

    def frame_message(self) -> dict:
        return {
            "type": "frame",
            "session": self.session_id,
            "step": self.state.step_index,
            "energy": self.state.last_energy,
            "points": self.state.curve.points.tolist(),
        }

    def broadcast(self, message: dict):
        for queue in list(self.subscribers):
            if queue.full():
                try:
                    queue.get_nowait()  # drop the oldest frame, never block
                except asyncio.QueueEmpty:
                    pass
            queue.put_nowait(message)

    def record_frame(self):
        if self.record_dir is None or self.state is None:
            return
        if self.writer is None:
            path = self.record_dir / f"{self.session_id}.jsonl"
            self.writer = TrajectoryWriter(
                path, self.params.to_dict() if self.params else {}, []
            )
        self.writer.write_frame(
            self.state.step_index, self.state.last_energy, self.state.curve.points
        )

    # -- command handling ---------------------------------------------------

    def handle(self, msg: dict) -> dict:
        cmd = msg.get("cmd")
        handler = getattr(self, f"_cmd_{cmd}", None)
        if handler is None:
            raise KnotdynError(f"unknown command {cmd!r}")
        return handler(msg)

    def _cmd_load(self, msg):
        spec = msg.get("spec")
        if not isinstance(spec, str) or not spec:
            raise KnotdynError("load needs a 'spec' string")
        beads = msg.get("beads")
        if beads is not None and (not isinstance(beads, int) or beads < 12):
            raise KnotdynError("beads must be an integer >= 12")
        curve = build_curve_from_spec(spec, beads)
        self.running = False
        self.spec = spec
        self.params = params_for_curve(curve, dt=1e-3)
        self.state = SimState.at_rest(curve, self.params.energy_include_adjacent)
        status = self.status()
        self.broadcast(self.frame_message())
        self.record_frame()
        return status

    def _require_state(self):
        if self.state is None or self.params is None:
            raise KnotdynError("no configuration loaded")

    def _cmd_run(self, msg):
        self._require_state()
        self.running = True
        return self.status()

    def _cmd_pause(self, msg):
        self._require_state()
        self.running = False
        return self.status()

    def _cmd_mode(self, msg):
        self._require_state()
        value = msg.get("value")
        try:
            mode = Mode(value)
        except ValueError:
            raise KnotdynError(f"unknown mode {value!r}") from None
        if mode is not self.params.mode:
            self.params = SimParams(**{**self.params.to_dict(), "mode": mode})
            if mode is Mode.CONSTRAINED:
                self.state = enter_constrained(self.state, self.params)
        return self.status()

    def _cmd_perturb(self, msg):
        self._require_state()
        magnitude = msg.get("magnitude")
        seed = msg.get("seed", 0)
        if not isinstance(magnitude, (int, float)) or magnitude < 0:
            raise KnotdynError("perturb needs magnitude >= 0")
        if not isinstance(seed, int):
            raise KnotdynError("perturb seed must be an integer")
        curve = perturb(self.state.curve, float(magnitude), seed)
        self.state = SimState(
            curve,
            self.state.velocities.copy(),
            self.state.step_index,
            kernels.simon_energy(curve.points, self.params.energy_include_adjacent),
        )
        self.broadcast(self.frame_message())
        self.record_frame()
        return self.status()

    def _cmd_set(self, msg):
        self._require_state()
        name = msg.get("param")
        value = msg.get("value")
        if name == "frame_stride":
            if not isinstance(value, int) or value < 1:
                raise KnotdynError("frame_stride must be an integer >= 1")
            self.frame_stride = value
            return self.status()
        if name not in _SETTABLE:
            raise KnotdynError(f"parameter {name!r} is not settable")
        if not isinstance(value, (int, float)):
            raise KnotdynError("value must be a number")
        fields = self.params.to_dict()
        fields[_SETTABLE[name]] = float(value)
        self.params = SimParams(**fields)  # raises ParameterRangeError if bad
        return self.status()

    def _cmd_snapshot(self, msg):
        self._require_state()
        path = msg.get("path")
        if not isinstance(path, str) or not path:
            raise KnotdynError("snapshot needs a 'path' string")
        from .io import save_curve

        save_curve(self.state.curve, path)
        return self.status()

    def _cmd_subscribe(self, msg):
        return self.status()

    # -- simulation loop ----------------------------------------------------

    async def actor(self):
        while not self.closed:
            if self.running and self.state is not None:
                try:
                    while True:
                        msg, reply = self.commands.get_nowait()
                        self._apply(msg, reply)
                except asyncio.QueueEmpty:
                    pass
                if not self.running:
                    continue
                try:
                    self.state = step(self.state, self.params)
                except KnotdynError as err:
                    self.running = False
                    self.broadcast({"type": "error", "message": str(err)})
                    continue
                if self.state.step_index % self.frame_stride == 0:
                    self.broadcast(self.frame_message())
                    self.record_frame()
                await asyncio.sleep(0)
            else:
                msg, reply = await self.commands.get()
                self._apply(msg, reply)

    def _apply(self, msg, reply: asyncio.Future):
        try:
            result = self.handle(msg)
            if not reply.done():
                reply.set_result(result)
        except KnotdynError as err:
            if not reply.done():
                reply.set_result({"type": "error", "message": str(err)})
        except Exception as err:  # never kill the loop on a bad command
            if not reply.done():
                reply.set_result({"type": "error", "message": f"internal: {err}"})

    def close(self):
        self.closed = True
        if self.writer is not None:
            self.writer.close()
            self.writer = None


class KnotService:
    def __init__(self, record_dir: str | None = None):
        self.record_dir = Path(record_dir) if record_dir else None
        if self.record_dir:
            self.record_dir.mkdir(parents=True, exist_ok=True)
        self.sessions: dict[str, Session] = {}
        self.tasks: list[asyncio.Task] = []

    def session(self, session_id: str) -> Session:
        if session_id not in self.sessions:
            sess = Session(session_id, self.record_dir)
            self.sessions[session_id] = sess
            self.tasks.append(asyncio.ensure_future(sess.actor()))
        return self.sessions[session_id]

    async def handle_message(self, msg: dict) -> dict:
        session = self.session(str(msg.get("session", "main")))
        reply: asyncio.Future = asyncio.get_event_loop().create_future()
        await session.commands.put((msg, reply))
        return await reply

    async def _serve_connection(self, read_message, write_message):
        queue: asyncio.Queue = asyncio.Queue(maxsize=16)
        joined: list[Session] = []

        async def pump():
            while True:
                write = await queue.get()
                if write is None:
                    return
                await write_message(write)

        pump_task = asyncio.ensure_future(pump())
        try:
            while True:
                msg = await read_message()
                if msg is None:
                    break
                if not isinstance(msg, dict) or "cmd" not in msg:
                    await write_message(
                        {"type": "error", "message": "message must be a JSON object with 'cmd'"}
                    )
                    continue
                session = self.session(str(msg.get("session", "main")))
                if queue not in session.subscribers:
                    session.subscribers.append(queue)
                    joined.append(session)
                reply = await self.handle_message(msg)
                await write_message(reply)
        finally:
            for session in joined:
                if queue in session.subscribers:
                    session.subscribers.remove(queue)
            pump_task.cancel()

    async def handle_tcp(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        try:
            first = await reader.readline()
        except ConnectionError:
            return
        if not first:
            writer.close()
            return
        try:
            if first.startswith(b"GET "):
                await self._handle_websocket(first, reader, writer)
            else:
                await self._handle_lines(first, reader, writer)
        except (ConnectionError, asyncio.IncompleteReadError):
            pass
        finally:
            try:
                writer.close()
            except Exception:
                pass

    async def _handle_lines(self, first: bytes, reader, writer):
        pending = [first]

        async def read_message():
            if pending:
                line = pending.pop()
            else:
                line = await reader.readline()
            if not line:
                return None
            try:
                return json.loads(line)
            except json.JSONDecodeError as err:
                return {"cmd": None, "_parse_error": str(err)}

        async def write_message(msg):
            writer.write((json.dumps(msg) + "\n").encode())
            await writer.drain()

        async def read_checked():
            msg = await read_message()
            if isinstance(msg, dict) and "_parse_error" in msg:
                await write_message(
                    {"type": "error", "message": f"bad JSON: {msg['_parse_error']}"}
                )
                return {"cmd": "__skip__"}
            return msg

        async def read_skipping():
            while True:
                msg = await read_checked()
                if isinstance(msg, dict) and msg.get("cmd") == "__skip__":
                    continue
                return msg

        await self._serve_connection(read_skipping, write_message)

    # -- minimal RFC 6455 framing --------------------------------------------

    async def _handle_websocket(self, first: bytes, reader, writer):
        headers = {}
        while True:
            line = await reader.readline()
            if line in (b"\r\n", b"\n", b""):
                break
            key, _, value = line.decode("latin1").partition(":")
            headers[key.strip().lower()] = value.strip()
        key = headers.get("sec-websocket-key", "")
        accept = base64.b64encode(
            hashlib.sha1(
                (key + "258EAFA5-E914-47DA-95CA-C5AB0DC85B11").encode()
            ).digest()
        ).decode()
        writer.write(
            (
                "HTTP/1.1 101 Switching Protocols\r\n"
                "Upgrade: websocket\r\nConnection: Upgrade\r\n"
                f"Sec-WebSocket-Accept: {accept}\r\n\r\n"
            ).encode()
        )
        await writer.drain()

        async def read_frame():
            head = await reader.readexactly(2)
            opcode = head[0] & 0x0F
            masked = head[1] & 0x80
            length = head[1] & 0x7F
            if length == 126:
                length = struct.unpack(">H", await reader.readexactly(2))[0]
            elif length == 127:
                length = struct.unpack(">Q", await reader.readexactly(8))[0]
            mask = await reader.readexactly(4) if masked else b"\x00" * 4
            payload = bytearray(await reader.readexactly(length))
            if masked:
                for i in range(length):
                    payload[i] ^= mask[i % 4]
            return opcode, bytes(payload)

        def encode_frame(opcode: int, payload: bytes) -> bytes:
            head = bytes([0x80 | opcode])
            n = len(payload)
            if n < 126:
                head += bytes([n])
            elif n < 65536:
                head += bytes([126]) + struct.pack(">H", n)
            else:
                head += bytes([127]) + struct.pack(">Q", n)
            return head + payload

        async def read_message():
            while True:
                try:
                    opcode, payload = await read_frame()
                except (asyncio.IncompleteReadError, ConnectionError):
                    return None
                if opcode == 0x8:  # close
                    return None
                if opcode == 0x9:  # ping
                    writer.write(encode_frame(0xA, payload))
                    await writer.drain()
                    continue
                if opcode in (0x1, 0x2):
                    try:
                        return json.loads(payload)
                    except json.JSONDecodeError as err:
                        writer.write(
                            encode_frame(
                                0x1,
                                json.dumps(
                                    {"type": "error", "message": f"bad JSON: {err}"}
                                ).encode(),
                            )
                        )
                        await writer.drain()
                        continue

        async def write_message(msg):
            writer.write(encode_frame(0x1, json.dumps(msg).encode()))
            await writer.drain()

        await self._serve_connection(read_message, write_message)

    async def shutdown(self):
        for session in self.sessions.values():
            session.close()
        for task in self.tasks:
            task.cancel()


async def serve(port: int, record_dir: str | None = None, ready=None):
    """Run the service until cancelled; flushes recordings on shutdown."""
    service = KnotService(record_dir)
    server = await asyncio.start_server(service.handle_tcp, "0.0.0.0", port)
    if ready is not None:
        ready.set_result(server.sockets[0].getsockname()[1])
    try:
        async with server:
            await server.serve_forever()
    except asyncio.CancelledError:
        pass
    finally:
        await service.shutdown()
