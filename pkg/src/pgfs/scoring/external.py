"""Line-protocol client for external scorer processes.

Protocol: the client writes one canonical SMILES per line to the child's
stdin and reads one reply line per molecule from its stdout, in order. A
reply is either a decimal float or ``ERR <message>``, which scores that
molecule at the configured floor. The whole batch shares one timeout.
Child exit, timeout, or an unparseable reply raise ExternalScorerError.
"""

from __future__ import annotations

import os
import select
import shlex
import subprocess
import time


class ExternalScorerError(RuntimeError):
    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        self.detail = detail
        super().__init__(f"external scorer {reason}" + (f": {detail}" if detail else ""))


class ExternalScorer:
    def __init__(
        self,
        command: str | list[str],
        timeout: float = 30.0,
        floor: float = 0.0,
    ):
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        if not argv:
            raise ValueError("empty scorer command")
        self.timeout = timeout
        self.floor = floor
        self.err_count = 0
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
            )
        except OSError as exc:
            raise ExternalScorerError("failed to start", str(exc)) from exc
        self._buffer = b""

    def _read_line(self, deadline: float) -> bytes:
        fd = self._proc.stdout.fileno()
        while True:
            nl = self._buffer.find(b"\n")
            if nl >= 0:
                line = self._buffer[:nl]
                self._buffer = self._buffer[nl + 1 :]
                return line
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise ExternalScorerError("timeout")
            ready, _, _ = select.select([fd], [], [], remaining)
            if not ready:
                raise ExternalScorerError("timeout")
            chunk = os.read(fd, 65536)
            if not chunk:
                raise ExternalScorerError(
                    "child exited", f"return code {self._proc.poll()}"
                )
            self._buffer += chunk

    def score(self, smiles: list[str]) -> list[float]:
        """Score a batch, order-preserving."""
        if self._proc.poll() is not None:
            raise ExternalScorerError(
                "child exited", f"return code {self._proc.returncode}"
            )
        try:
            payload = "".join(s + "\n" for s in smiles).encode("utf-8")
            self._proc.stdin.write(payload)
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ExternalScorerError("child exited", str(exc)) from exc

        deadline = time.monotonic() + self.timeout
        out = []
        for _ in smiles:
            line = self._read_line(deadline).decode("utf-8", "replace").strip()
            if line.startswith("ERR"):
                self.err_count += 1
                out.append(self.floor)
                continue
            try:
                out.append(float(line))
            except ValueError as exc:
                raise ExternalScorerError("unparseable reply", line) from exc
        return out

    def close(self) -> None:
        if self._proc.poll() is None:
            self._proc.terminate()
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:  # pragma: no cover
                self._proc.kill()
                self._proc.wait()
        for stream in (self._proc.stdin, self._proc.stdout):
            if stream:
                stream.close()

    def __enter__(self) -> "ExternalScorer":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
