"""Address-event packets, the FIFO schedulers, and the inter-core channel.

Wire format (9 bits): bit 8 is the control flag; data packets (spikes) carry
the source neuron address in bits 7..0, control packets carry a sentinel
address instead — 0 for end-of-time-step, 1 for end-of-input. Those sentinel
values are protocol constants of this implementation.

Transport is handshake-based with backpressure: a sender holds its packet
until the receiving queue has room. Nothing is ever dropped or reordered.
"""

from __future__ import annotations

import enum
import threading
from collections import deque
from dataclasses import dataclass

from .errors import ConfigError, DeadlockError, ProtocolError

CONTROL_BIT = 1 << 8
EOTS_SENTINEL = 0
EOIN_SENTINEL = 1


class PacketKind(enum.Enum):
    ASPL = "ASPL"   # spike from the previous layer
    ASCL = "ASCL"   # spike within the current layer (recurrent reuse)
    EOTS = "EOTS"   # end of time step
    EOIN = "EOIN"   # end of input sequence


class DecodeContext(enum.Enum):
    INTER_CORE = "inter_core"
    RECURRENT = "recurrent"


@dataclass(frozen=True)
class AerPacket:
    kind: PacketKind
    address: int = 0

    def __post_init__(self):
        if self.kind is PacketKind.EOTS:
            object.__setattr__(self, "address", EOTS_SENTINEL)
        elif self.kind is PacketKind.EOIN:
            object.__setattr__(self, "address", EOIN_SENTINEL)
        elif not 0 <= self.address <= 255:
            raise ProtocolError(f"spike address must fit 8 bits, got {self.address}")

    @property
    def is_terminator(self) -> bool:
        return self.kind in (PacketKind.EOTS, PacketKind.EOIN)


EOTS = AerPacket(PacketKind.EOTS)
EOIN = AerPacket(PacketKind.EOIN)


def encode_packet(packet: AerPacket) -> int:
    """Pack a packet into its 9-bit wire word."""
    if packet.is_terminator:
        return CONTROL_BIT | packet.address
    return packet.address


def decode_packet(word: int, context: DecodeContext = DecodeContext.INTER_CORE) -> AerPacket:
    """Inverse of `encode_packet`; the context decides how data words read."""
    if not 0 <= word < 512:
        raise ProtocolError(f"packet word must be 9 bits, got {word}")
    if word & CONTROL_BIT:
        sentinel = word & 0xFF
        if sentinel == EOTS_SENTINEL:
            return EOTS
        if sentinel == EOIN_SENTINEL:
            return EOIN
        raise ProtocolError(f"unknown control sentinel {sentinel}")
    if context is DecodeContext.RECURRENT:
        return AerPacket(PacketKind.ASCL, word)
    return AerPacket(PacketKind.ASPL, word)


class BoundedQueue:
    """Plain FIFO with a hard capacity; used as the wire in polled mode."""

    def __init__(self, capacity: int = 16):
        if capacity < 1:
            raise ConfigError(f"queue capacity must be at least 1, got {capacity}")
        self.capacity = capacity
        self._items: deque = deque()

    def __len__(self) -> int:
        return len(self._items)

    @property
    def full(self) -> bool:
        return len(self._items) >= self.capacity

    def try_push(self, item) -> bool:
        if self.full:
            return False
        self._items.append(item)
        return True

    def pop(self):
        if not self._items:
            raise IndexError("pop from empty queue")
        return self._items.popleft()


class Channel:
    """Thread-safe bounded FIFO with blocking handshake semantics.

    `send` blocks while the queue is full, `recv` while it is empty; closing
    the channel wakes both sides. Receiving drains any items queued before the
    close; sending on a closed channel is an error.
    """

    def __init__(self, capacity: int = 16):
        if capacity < 1:
            raise ConfigError(f"channel capacity must be at least 1, got {capacity}")
        self.capacity = capacity
        self._items: deque = deque()
        self._lock = threading.Lock()
        self._not_full = threading.Condition(self._lock)
        self._not_empty = threading.Condition(self._lock)
        self._closed = False

    def close(self) -> None:
        with self._lock:
            self._closed = True
            self._not_full.notify_all()
            self._not_empty.notify_all()

    def send(self, item, timeout: float | None = None) -> None:
        with self._not_full:
            while len(self._items) >= self.capacity:
                if self._closed:
                    raise DeadlockError("send on closed channel")
                if not self._not_full.wait(timeout):
                    raise DeadlockError(
                        f"sender stalled for {timeout}s on a full queue")
            if self._closed:
                raise DeadlockError("send on closed channel")
            self._items.append(item)
            self._not_empty.notify()

    def try_send(self, item) -> bool:
        with self._not_full:
            if self._closed or len(self._items) >= self.capacity:
                return False
            self._items.append(item)
            self._not_empty.notify()
            return True

    def recv(self, timeout: float | None = None):
        with self._not_empty:
            while not self._items:
                if self._closed:
                    raise DeadlockError("recv on closed empty channel")
                if not self._not_empty.wait(timeout):
                    raise DeadlockError(
                        f"receiver stalled for {timeout}s on an empty queue")
            item = self._items.popleft()
            self._not_full.notify()
            return item

    def __len__(self) -> int:
        with self._lock:
            return len(self._items)
