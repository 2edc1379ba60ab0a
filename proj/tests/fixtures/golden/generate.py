#!/usr/bin/env python3
"""Writes the golden object and frame fixtures.

Built with struct.pack from the documented layouts only; shares no code with
the C++ implementation. Run from any directory:

    python3 tests/fixtures/golden/generate.py
"""

import json
import os
import struct
import zlib

HERE = os.path.dirname(os.path.abspath(__file__))

KIND_TABLE, KIND_ARRAY = 0, 1
I64, F64, UTF8 = "i64", "f64", "utf8"


def u8(v): return struct.pack("<B", v)
def u16(v): return struct.pack("<H", v)
def u32(v): return struct.pack("<I", v)
def u64(v): return struct.pack("<Q", v)
def i64(v): return struct.pack("<q", v)
def f64(v): return struct.pack("<d", v)
def str16(s): b = s.encode(); return u16(len(b)) + b
def str32(s): b = s.encode(); return u32(len(b)) + b


def cell(t, v):
    if t == I64:
        return i64(v)
    if t == F64:
        return f64(v)
    return str32(v)


def sealed(schema, rows, kind=KIND_TABLE, compressed=False):
    payload = b"".join(cell(t, v) for row in rows for (_, t), v in zip(schema, row))
    if compressed:
        payload = zlib.compress(payload)
    out = b"SKY1" + u8(kind) + u32(1)
    out += str32(",".join(f"{n}:{t}" for n, t in schema))
    out += u64(len(rows)) + u8(1 if compressed else 0)
    for c, (_, t) in enumerate(schema):
        if t == UTF8 or not rows:
            out += u8(0)
        else:
            vals = [r[c] for r in rows]
            out += u8(1) + cell(t, min(vals)) + cell(t, max(vals))
    return out + u64(len(payload)) + payload


def frame(request_id, msg_type, payload):
    return u32(8 + 1 + len(payload)) + u64(request_id) + u8(msg_type) + payload


def ok(body=b""): return u8(0) + body
def err(status, code, msg): return u8(status) + u8(code) + msg.encode()


# Message types and internal error codes used below.
PUT, GET, EXEC, BUILD_INDEX, LOOKUP_INDEX, PING, SUBMIT_QUERY, COMPRESS = range(1, 9)
RESP = 0x80
CODE_NOT_FOUND, CODE_BAD_REQUEST = 6, 27

MIXED_SCHEMA = [("a", I64), ("b", F64), ("s", UTF8)]
MIXED_ROWS = [(1, 2.5, "x"), (3, -1.0, "héllo")]

objects = {
    "object_empty.bin": sealed([("a", I64)], []),
    "object_single.bin": sealed([("a", I64)], [(7,)]),
    "object_mixed.bin": sealed(MIXED_SCHEMA, MIXED_ROWS),
    "object_array_chunk.bin": sealed([("v", F64)], [(0.5,), (1.5,), (0.0,), (-2.0,)], kind=KIND_ARRAY),
    "object_compressed.bin": sealed([("a", I64)], [(i,) for i in range(16)], compressed=True),
}

mixed = objects["object_mixed.bin"]
name = "t.00000000"

# One request/response pair per message type, replayable in order against a
# fresh node "n1" (PUT first). The driver-only SUBMIT_QUERY pair assumes dataset t
# holds MIXED_ROWS.
frames = [
    ("put", frame(1, PUT, str16(name) + mixed), frame(1, PUT | RESP, ok())),
    ("get", frame(2, GET, str16(name)), frame(2, GET | RESP, ok(mixed))),
    ("exec_rows", frame(3, EXEC, str16(name) + str32("SELECT * FROM t WHERE a > 1")),
     frame(3, EXEC | RESP, ok(u8(0) + sealed(MIXED_SCHEMA, MIXED_ROWS[1:])))),
    # sum state: tag 1, f64 column, one exact partial 1.5, n = 2
    ("exec_sum", frame(4, EXEC, str16(name) + str32("SELECT sum(b) FROM t")),
     frame(4, EXEC | RESP, ok(u8(1) + u8(1) + u8(1) + u32(1) + f64(1.5) + u64(2)))),
    ("build_index", frame(5, BUILD_INDEX, str16(name) + str16("a")), frame(5, BUILD_INDEX | RESP, ok(u64(2)))),
    ("lookup_index", frame(6, LOOKUP_INDEX, str16("t") + str16("a") + u8(0) + i64(3)),
     frame(6, LOOKUP_INDEX | RESP, ok(u32(1) + u64(0) + u32(1) + u32(1)))),
    ("ping", frame(7, PING, b""), frame(7, PING | RESP, ok())),
    ("compress", frame(8, COMPRESS, str16(name) + u8(1)), frame(8, COMPRESS | RESP, ok(u8(0)))),
    ("exec_missing", frame(9, EXEC, str16("t.00000009") + str32("SELECT * FROM t")),
     frame(9, EXEC | RESP, err(1, CODE_NOT_FOUND, "object t.00000009 not found on node n1"))),
    ("unknown_type", frame(10, 0x20, b""),
     frame(10, 0x20 | RESP, err(255, CODE_BAD_REQUEST, "unknown message type 32"))),
    ("submit_count", frame(11, SUBMIT_QUERY, str32("SELECT count(a) FROM t")),
     frame(11, SUBMIT_QUERY | RESP, ok(u8(1) + i64(2) + u8(0)))),
    ("submit_avg", frame(12, SUBMIT_QUERY, str32("SELECT avg(b) FROM t")),
     frame(12, SUBMIT_QUERY | RESP, ok(u8(1) + f64(0.75) + u8(1)))),
    ("submit_rows", frame(13, SUBMIT_QUERY, str32("SELECT a, s FROM t WHERE b < 0")),
     frame(13, SUBMIT_QUERY | RESP, ok(u8(0) + sealed([("a", I64), ("s", UTF8)], [(3, "héllo")])))),
]

manifest = {
    "objects": {
        "object_empty.bin": {"kind": KIND_TABLE, "schema": "a:i64", "rows": []},
        "object_single.bin": {"kind": KIND_TABLE, "schema": "a:i64", "rows": [[7]]},
        "object_mixed.bin": {"kind": KIND_TABLE, "schema": "a:i64,b:f64,s:utf8",
                             "rows": [list(r) for r in MIXED_ROWS]},
        "object_array_chunk.bin": {"kind": KIND_ARRAY, "schema": "v:f64", "rows": [[0.5], [1.5], [0.0], [-2.0]]},
        "object_compressed.bin": {"kind": KIND_TABLE, "schema": "a:i64", "rows": [[i] for i in range(16)],
                                  "compressed": True},
    },
    "frames": [{"name": n, "request": f"frame_{n}_request.bin", "response": f"frame_{n}_response.bin"}
               for n, _, _ in frames],
}


def main():
    for fname, data in objects.items():
        with open(os.path.join(HERE, fname), "wb") as f:
            f.write(data)
    for n, req, resp in frames:
        with open(os.path.join(HERE, f"frame_{n}_request.bin"), "wb") as f:
            f.write(req)
        with open(os.path.join(HERE, f"frame_{n}_response.bin"), "wb") as f:
            f.write(resp)
    with open(os.path.join(HERE, "manifest.json"), "w") as f:
        json.dump(manifest, f, indent=2, ensure_ascii=False)
        f.write("\n")


if __name__ == "__main__":
    main()
