"""Loopback test double for the remote sampling service.

Accepts the wire-protocol request, solves the transported QUBO by exhaustive
enumeration (small problems only), and replies with the minimum-energy masks.
Misbehavior toggles let the test suite exercise every client error path.
"""
from __future__ import annotations

import argparse
import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

STUB_MAX_BITS = 16
STUB_QPU_TIME_US = 2000.0


def _solve_wire_qubo(payload: dict) -> dict:
    linear = payload["linear"]
    quadratic = payload.get("quadratic", {})
    offset = float(payload.get("offset", 0.0))
    indices = [int(i) for i in linear]
    for key in quadratic:
        a, b = (int(t) for t in key.split(","))
        if a >= b:
            raise ValueError(f"quadratic key {key!r} must satisfy i < j")
        indices.extend((a, b))
    m = max(indices) + 1 if indices else 0
    if m < 1:
        raise ValueError("empty problem")
    if m > STUB_MAX_BITS:
        raise ValueError(f"stub refuses M={m} > {STUB_MAX_BITS}")
    q = np.zeros((m, m))
    for i, v in linear.items():
        q[int(i), int(i)] = float(v)
    for key, v in quadratic.items():
        a, b = (int(t) for t in key.split(","))
        q[a, b] = float(v)

    codes = np.arange(1 << m, dtype=np.uint32)
    bits = ((codes[:, None] >> np.arange(m, dtype=np.uint32)) & 1).astype(np.float64)
    energies = np.einsum("ci,ci->c", bits @ q, bits) + offset
    best = energies.min()
    winners = np.flatnonzero(energies == best)
    num_reads = int(payload.get("num_reads", 1))
    if num_reads < 1:
        raise ValueError("num_reads must be positive")
    winners = winners[: max(1, min(len(winners), num_reads))]
    # spread the requested reads over the minimizers, first ones get the rest
    base = num_reads // len(winners)
    extra = num_reads - base * len(winners)
    occurrences = [base + (1 if i < extra else 0) for i in range(len(winners))]
    return {
        "samples": [[int(b) for b in bits[w]] for w in winners],
        "energies": [float(energies[w]) for w in winners],
        "num_occurrences": occurrences,
        "timing": {"qpu_access_time_us": STUB_QPU_TIME_US},
    }


class StubHandler(BaseHTTPRequestHandler):
    corrupt_energy = False
    drop_field: str | None = None
    delay_s = 0.0

    def do_POST(self) -> None:  # noqa: N802 (http.server naming)
        if self.delay_s:
            time.sleep(self.delay_s)
        try:
            length = int(self.headers.get("content-length", 0))
            payload = json.loads(self.rfile.read(length))
            reply = _solve_wire_qubo(payload)
        except (ValueError, KeyError, json.JSONDecodeError) as exc:
            self.send_response(400)
            self.end_headers()
            self.wfile.write(str(exc).encode())
            return
        if self.corrupt_energy:
            reply["energies"] = [e + 1.0 for e in reply["energies"]]
        if self.drop_field:
            reply.pop(self.drop_field, None)
        body = json.dumps(reply).encode()
        self.send_response(200)
        self.send_header("content-type", "application/json")
        self.send_header("content-length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args) -> None:
        pass


class StubServer:
    """Context-managed loopback server bound to an ephemeral port."""

    def __init__(self, corrupt_energy: bool = False,
                 drop_field: str | None = None, delay_s: float = 0.0) -> None:
        handler = type(
            "ConfiguredStubHandler",
            (StubHandler,),
            {
                "corrupt_energy": corrupt_energy,
                "drop_field": drop_field,
                "delay_s": delay_s,
            },
        )
        self._httpd = ThreadingHTTPServer(("127.0.0.1", 0), handler)
        self._thread = threading.Thread(
            target=self._httpd.serve_forever, daemon=True
        )

    @property
    def endpoint(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}/"

    def __enter__(self) -> "StubServer":
        self._thread.start()
        return self

    def __exit__(self, *exc_info) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Serve the loopback QUBO sampling stub over HTTP."
    )
    parser.add_argument("--port", type=int, default=8765)
    args = parser.parse_args(argv)
    httpd = ThreadingHTTPServer(("127.0.0.1", args.port), StubHandler)
    print(f"stub sampler listening on http://127.0.0.1:{args.port}/")
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
