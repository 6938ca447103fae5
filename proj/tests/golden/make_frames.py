#!/usr/bin/env python3
"""Writes the golden wire frames and their manifest.

Built with struct only, independent of the C++ encoder. Each manifest line is
`<file> <opcode hex> <app hex or -> <payload hex or ->`.
"""
import os
import struct

OUT = os.path.dirname(os.path.abspath(__file__))

PUBLISH, CONSUME, DECODE, RETRIEVE, STATUS, ERROR = 1, 2, 3, 4, 5, 0x7F
REPLY = 0x80


def frame(opcode, app, payload):
    return (b"SM" + bytes([1, opcode, len(app)]) + app +
            struct.pack(">I", len(payload)) + payload)


def u32(n):
    return struct.pack(">I", n)


def blobs(items):
    return u32(len(items)) + b"".join(u32(len(i)) + i for i in items)


def records(items):
    return u32(len(items)) + b"".join(
        struct.pack(">QI", seq, len(d)) + d for seq, d in items)


APP1 = b"a"
APP64 = bytes(ord("A") + (i % 26) for i in range(64))
APP = b"chat"
BLOCK = bytes(range(16))

CASES = [
    ("publish_request", PUBLISH, APP, b"hello"),
    ("publish_reply", PUBLISH | REPLY, APP, u32(2)),
    ("consume_request", CONSUME, APP, u32(10)),
    ("consume_reply", CONSUME | REPLY, APP, records([(1, BLOCK), (2, BLOCK[::-1])])),
    ("consume_reply_empty", CONSUME | REPLY, APP, records([])),
    ("decode_request", DECODE, APP, blobs([BLOCK, bytes(16)])),
    ("decode_reply", DECODE | REPLY, APP, u32(1) + u32(0)),
    ("retrieve_request", RETRIEVE, APP, u32(0xFFFFFFFF)),
    ("retrieve_reply", RETRIEVE | REPLY, APP, records([(7, b"hello")])),
    ("status_request", STATUS, APP, b""),
    ("status_reply", STATUS | REPLY, APP, b"scheme=iv\nout_depth=0\n"),
    ("error_reply", ERROR, APP, "unknown app 'chat'".encode()),
    ("error_reply_no_app", ERROR, b"", b"bad frame magic"),
    ("app_len_1", PUBLISH, APP1, b"\x00"),
    ("app_len_64", PUBLISH, APP64, b"\xff" * 3),
    ("app_utf8", STATUS, "café".encode(), b""),
]


def main():
    lines = []
    for name, opcode, app, payload in CASES:
        path = os.path.join(OUT, name + ".bin")
        with open(path, "wb") as f:
            f.write(frame(opcode, app, payload))
        lines.append("%s.bin %02x %s %s" % (name, opcode, app.hex() or "-", payload.hex() or "-"))
    with open(os.path.join(OUT, "manifest.txt"), "w") as f:
        f.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
