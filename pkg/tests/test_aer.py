"""Packet codec, bounded queues, and the backpressure channel."""

import random
import threading
import time

import pytest

from spikemux.aer import (EOIN, EOTS, AerPacket, BoundedQueue, Channel,
                          DecodeContext, PacketKind, decode_packet,
                          encode_packet)
from spikemux.errors import ConfigError, DeadlockError, ProtocolError


class TestCodec:
    def test_spike_word(self):
        assert encode_packet(AerPacket(PacketKind.ASPL, 17)) == 0b0_00010001

    def test_terminator_sentinels(self):
        assert encode_packet(EOTS) == 0b1_00000000
        assert encode_packet(EOIN) == 0b1_00000001

    def test_decode_examples(self):
        assert decode_packet(0b0_00010001) == AerPacket(PacketKind.ASPL, 17)
        assert decode_packet(0b1_00000000) == EOTS
        assert decode_packet(0b1_00000001) == EOIN
        assert decode_packet(0b0_00000101, DecodeContext.RECURRENT) == \
            AerPacket(PacketKind.ASCL, 5)

    def test_roundtrip_all_words(self):
        for addr in range(256):
            for kind, ctx in ((PacketKind.ASPL, DecodeContext.INTER_CORE),
                              (PacketKind.ASCL, DecodeContext.RECURRENT)):
                packet = AerPacket(kind, addr)
                assert decode_packet(encode_packet(packet), ctx) == packet
        for packet in (EOTS, EOIN):
            assert decode_packet(encode_packet(packet)) == packet

    def test_unknown_control_sentinel(self):
        for sentinel in (2, 17, 255):
            with pytest.raises(ProtocolError):
                decode_packet((1 << 8) | sentinel)

    def test_word_range(self):
        with pytest.raises(ProtocolError):
            decode_packet(512)
        with pytest.raises(ProtocolError):
            AerPacket(PacketKind.ASPL, 256)


class TestBoundedQueue:
    def test_fifo_order_and_capacity(self):
        q = BoundedQueue(3)
        assert all(q.try_push(i) for i in range(3))
        assert not q.try_push(99)
        assert [q.pop(), q.pop(), q.pop()] == [0, 1, 2]

    def test_capacity_validation(self):
        with pytest.raises(ConfigError):
            BoundedQueue(0)


class TestChannel:
    def test_immediate_accept_when_empty(self):
        ch = Channel(4)
        ch.send("a")
        assert ch.recv() == "a"

    def test_sender_blocks_on_full_queue_without_loss(self):
        ch = Channel(4)
        sent = []

        def producer():
            for i in range(5):
                ch.send(i)
                sent.append(i)

        t = threading.Thread(target=producer, daemon=True)
        t.start()
        time.sleep(0.1)
        assert t.is_alive()            # fifth send is observably blocked
        assert len(ch) == 4
        assert sent == [0, 1, 2, 3]
        got = [ch.recv(1.0) for _ in range(5)]
        t.join(1.0)
        assert got == [0, 1, 2, 3, 4]  # zero losses, in order

    def test_try_send_reports_backpressure(self):
        ch = Channel(1)
        assert ch.try_send(1)
        assert not ch.try_send(2)
        assert ch.recv() == 1

    def test_stress_lossless_in_order(self):
        rng = random.Random(9001)
        ch = Channel(4)
        payload = list(range(1000))
        received = []

        def consumer():
            while len(received) < len(payload):
                received.append(ch.recv(5.0))
                if rng.random() < 0.02:
                    time.sleep(0.0005)

        t = threading.Thread(target=consumer, daemon=True)
        t.start()
        for item in payload:
            ch.send(item, 5.0)
        t.join(5.0)
        assert received == payload

    def test_closed_channel_raises(self):
        ch = Channel(2)
        ch.close()
        with pytest.raises(DeadlockError):
            ch.send(1)
        with pytest.raises(DeadlockError):
            ch.recv()

    def test_recv_timeout(self):
        ch = Channel(1)
        with pytest.raises(DeadlockError):
            ch.recv(timeout=0.05)
