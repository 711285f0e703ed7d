"""Byte transports connecting protocol roles.

Both transports move opaque frames between named roles and expose the same
two calls: ``send(sender, receiver, frame)`` and ``recv(receiver, sender)``.
Receiving is per-sender FIFO: a receiver asks for the next frame *from a
specific sender*, so the relative arrival order of frames from different
senders never influences a run.

``InProcessTransport`` keeps one queue per directed channel.

``TcpTransport`` runs every channel over loopback sockets through a small
router thread. Each endpoint opens one client connection and identifies
itself with its 3-byte role tag; afterwards every unit on the wire is a
3-byte peer tag (receiver when heading to the router, sender when heading
back out) followed by one protocol frame. The router never blocks on a
slow receiver: it parks outbound bytes in per-connection buffers and
flushes them as sockets become writable, so multi-megabyte frames can be
exchanged even when both endpoints send before either reads.
"""

from __future__ import annotations

import select
import socket
import threading
import time
from collections import deque

from .errors import FramingError, TransportError, TransportTimeout
from .messages import ROLE_PREFIX_BYTES, Role, role_from_tag

DEFAULT_TIMEOUT = 30.0


class Transport:
    def send(self, sender: Role, receiver: Role, frame: bytes) -> None:
        raise NotImplementedError

    def recv(self, receiver: Role, sender: Role) -> bytes:
        raise NotImplementedError

    def close(self) -> None:
        pass


class InProcessTransport(Transport):
    def __init__(self):
        self._queues: dict[tuple[Role, Role], deque] = {}

    def send(self, sender: Role, receiver: Role, frame: bytes) -> None:
        self._queues.setdefault((sender, receiver), deque()).append(bytes(frame))

    def recv(self, receiver: Role, sender: Role) -> bytes:
        queue = self._queues.get((sender, receiver))
        if not queue:
            raise TransportTimeout(
                f"no frame queued from {sender.name} to {receiver.name}")
        return queue.popleft()


def _recv_exact(conn: socket.socket, n: int, timeout: float) -> bytes:
    conn.settimeout(timeout)
    buf = bytearray()
    while len(buf) < n:
        chunk = conn.recv(n - len(buf))
        if not chunk:
            raise TransportError("connection closed during handshake")
        buf += chunk
    return bytes(buf)


def _split_units(buffer: bytearray):
    """Extract complete ``role tag || frame`` units from a byte buffer."""
    units = []
    while True:
        if len(buffer) < ROLE_PREFIX_BYTES + 4:
            break
        length = int.from_bytes(
            buffer[ROLE_PREFIX_BYTES:ROLE_PREFIX_BYTES + 4], "big")
        total = ROLE_PREFIX_BYTES + 4 + length
        if len(buffer) < total:
            break
        units.append((bytes(buffer[:ROLE_PREFIX_BYTES]),
                      bytes(buffer[ROLE_PREFIX_BYTES:total])))
        del buffer[:total]
    return units


class _Router(threading.Thread):
    """Accepts one connection per role, then forwards routed frames."""

    def __init__(self, listener: socket.socket, expected: int):
        super().__init__(daemon=True)
        self.listener = listener
        self.expected = expected
        self.conns: dict[bytes, socket.socket] = {}
        self.inbuf: dict[socket.socket, bytearray] = {}
        self.outbuf: dict[socket.socket, bytearray] = {}
        self.tags: dict[socket.socket, bytes] = {}
        self.ready = threading.Event()
        self.stopping = False
        self.error: Exception | None = None

    def run(self):
        try:
            self._accept_all()
            self.ready.set()
            self._route()
        except Exception as exc:  # surfaced by the owning transport
            self.error = exc
            self.ready.set()
        finally:
            for conn in self.conns.values():
                try:
                    conn.close()
                except OSError:
                    pass

    def _accept_all(self):
        self.listener.settimeout(DEFAULT_TIMEOUT)
        while len(self.conns) < self.expected:
            conn, _addr = self.listener.accept()
            tag = _recv_exact(conn, ROLE_PREFIX_BYTES, DEFAULT_TIMEOUT)
            conn.setblocking(False)
            self.conns[tag] = conn
            self.tags[conn] = tag
            self.inbuf[conn] = bytearray()
            self.outbuf[conn] = bytearray()
        self.listener.close()

    def _route(self):
        sockets = list(self.conns.values())
        while not self.stopping:
            writable_wanted = [s for s in sockets if self.outbuf[s]]
            readable, writable, _ = select.select(
                sockets, writable_wanted, [], 0.05)
            for conn in readable:
                try:
                    chunk = conn.recv(1 << 16)
                except OSError:
                    chunk = b""
                if not chunk:
                    self.stopping = True
                    break
                self.inbuf[conn] += chunk
                for receiver_tag, frame in _split_units(self.inbuf[conn]):
                    dest = self.conns.get(receiver_tag)
                    if dest is None:
                        raise TransportError("frame routed to unknown role")
                    self.outbuf[dest] += self.tags[conn] + frame
            for conn in writable:
                if not self.outbuf[conn]:
                    continue
                try:
                    sent = conn.send(self.outbuf[conn])
                except OSError:
                    self.stopping = True
                    break
                del self.outbuf[conn][:sent]


class TcpTransport(Transport):
    def __init__(self, roles, host: str = "127.0.0.1", port: int = 0,
                 timeout: float = DEFAULT_TIMEOUT):
        self.timeout = timeout
        roles = list(roles)
        listener = socket.create_server((host, port))
        self.address = listener.getsockname()
        self.router = _Router(listener, expected=len(roles))
        self.router.start()
        self._clients: dict[Role, socket.socket] = {}
        self._pending: dict[Role, dict[bytes, deque]] = {}
        self._buffers: dict[Role, bytearray] = {}
        for role in roles:
            client = socket.create_connection(self.address, timeout=timeout)
            client.sendall(role.tag())
            self._clients[role] = client
            self._pending[role] = {}
            self._buffers[role] = bytearray()
        self.router.ready.wait(timeout)
        if self.router.error is not None:
            raise TransportError(f"router failed to start: {self.router.error}")
        if not self.router.ready.is_set():
            raise TransportError("router did not come up in time")

    def send(self, sender: Role, receiver: Role, frame: bytes) -> None:
        client = self._clients.get(sender)
        if client is None:
            raise TransportError(f"{sender.name} has no connection")
        try:
            client.sendall(receiver.tag() + frame)
        except OSError as exc:
            raise TransportError(f"send from {sender.name} failed: {exc}")

    def recv(self, receiver: Role, sender: Role) -> bytes:
        client = self._clients.get(receiver)
        if client is None:
            raise TransportError(f"{receiver.name} has no connection")
        queues = self._pending[receiver]
        wanted = sender.tag()
        deadline = time.monotonic() + self.timeout
        while True:
            queue = queues.get(wanted)
            if queue:
                return queue.popleft()
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise TransportTimeout(
                    f"timed out waiting for a frame from {sender.name}"
                    f" at {receiver.name}")
            client.settimeout(remaining)
            try:
                chunk = client.recv(1 << 16)
            except socket.timeout:
                continue
            except OSError as exc:
                raise TransportError(f"recv at {receiver.name} failed: {exc}")
            if not chunk:
                raise TransportError(
                    f"connection closed while {receiver.name} awaited"
                    f" {sender.name}")
            self._buffers[receiver] += chunk
            for sender_tag, frame in _split_units(self._buffers[receiver]):
                try:
                    role_from_tag(sender_tag)
                except FramingError:
                    raise TransportError("malformed sender tag on frame")
                queues.setdefault(sender_tag, deque()).append(frame)

    def close(self) -> None:
        self.router.stopping = True
        for client in self._clients.values():
            try:
                client.close()
            except OSError:
                pass
        self.router.join(timeout=2.0)
