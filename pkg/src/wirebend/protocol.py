"""Wire protocol, machine controller, and a conformant machine emulator.

Protocol (ASCII, LF-terminated, single-space separated), host to machine:

    F <steps>      feed both feed motors the signed step count, lock-step
    B <steps>      full bend cycle: sweep the peg <steps>, equal return
    R <steps>      rotate the bending plane by the signed step count
    RETRACT 0|1    extend (0) / retract (1) the bending peg servo
    HOME           seek the bend-axis limit switch and zero the axis
    STOP           abort the in-flight command between motor pulses

Machine to host: `OK` (command done), `ERR <code>` (rejected or aborted),
`HIT` (limit switch event, emitted during homing before the OK).  Responses
are issued strictly in request order; one command is outstanding at a time,
except STOP which may be sent at any moment.

Error codes: 1 unknown command, 2 bad argument, 3 out of range,
4 bend before homing, 5 aborted by stop, 6 bend direction change without a
retract cycle.

The emulator executes this protocol with step-accurate axis positions and
its own wire-geometry fold (kept independent of the simulator so the two
can cross-check each other).  A bend cycle deforms the wire by the swept
angle; the peg return does not unbend (the peg separates from the wire).
"""

from __future__ import annotations

import math
import queue
import socket
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .instructions import (
    BEND,
    FEED,
    ROTATE,
    Instruction,
    InstructionProgram,
    emit_text,
)
from .machine import HOME, RETRACT, MachineProfile, StepCommand, StepPlanner, to_steps

ERR_UNKNOWN = 1
ERR_BAD_ARG = 2
ERR_RANGE = 3
ERR_NOT_HOMED = 4
ERR_STOPPED = 5
ERR_DIRECTION = 6


class TransportError(RuntimeError):
    pass


class ProtocolError(RuntimeError):
    pass


class LocalChannel:
    """One side of an in-process duplex line channel."""

    def __init__(self, inbox: "queue.SimpleQueue[str | None]",
                 outbox: "queue.SimpleQueue[str | None]"):
        self._inbox = inbox
        self._outbox = outbox
        self._closed = False

    def write_line(self, line: str) -> None:
        if self._closed:
            raise TransportError("channel closed")
        self._outbox.put(line)

    def read_line(self, timeout: float | None = None) -> str | None:
        try:
            item = self._inbox.get(timeout=timeout) if timeout is not None else self._inbox.get()
        except queue.Empty:
            return None
        return item

    def try_read_line(self) -> str | None:
        try:
            return self._inbox.get_nowait()
        except queue.Empty:
            return None

    def close(self) -> None:
        if not self._closed:
            self._closed = True
            self._outbox.put(None)


def local_channel_pair() -> tuple[LocalChannel, LocalChannel]:
    a_to_b: "queue.SimpleQueue[str | None]" = queue.SimpleQueue()
    b_to_a: "queue.SimpleQueue[str | None]" = queue.SimpleQueue()
    return LocalChannel(b_to_a, a_to_b), LocalChannel(a_to_b, b_to_a)


class TcpChannel:
    """Line channel over a TCP socket."""

    def __init__(self, sock: socket.socket):
        self._sock = sock
        self._buffer = b""
        self._closed = False

    @staticmethod
    def connect(host: str, port: int, timeout: float = 5.0) -> "TcpChannel":
        sock = socket.create_connection((host, port), timeout=timeout)
        return TcpChannel(sock)

    def write_line(self, line: str) -> None:
        if self._closed:
            raise TransportError("channel closed")
        try:
            self._sock.sendall(line.encode("ascii") + b"\n")
        except OSError as exc:
            raise TransportError(str(exc)) from exc

    def read_line(self, timeout: float | None = None) -> str | None:
        deadline = None if timeout is None else time.monotonic() + timeout
        while b"\n" not in self._buffer:
            if self._closed:
                return None
            remaining = None if deadline is None else max(0.0, deadline - time.monotonic())
            if remaining == 0.0:
                return None
            self._sock.settimeout(remaining)
            try:
                chunk = self._sock.recv(4096)
            except socket.timeout:
                return None
            except OSError as exc:
                raise TransportError(str(exc)) from exc
            if not chunk:
                self._closed = True
                return None
            self._buffer += chunk
        line, self._buffer = self._buffer.split(b"\n", 1)
        return line.decode("ascii")

    def try_read_line(self) -> str | None:
        if b"\n" in self._buffer:
            line, self._buffer = self._buffer.split(b"\n", 1)
            return line.decode("ascii")
        self._sock.setblocking(False)
        try:
            chunk = self._sock.recv(4096)
            if chunk:
                self._buffer += chunk
        except (BlockingIOError, socket.timeout):
            pass
        except OSError as exc:
            raise TransportError(str(exc)) from exc
        finally:
            self._sock.setblocking(True)
        if b"\n" in self._buffer:
            line, self._buffer = self._buffer.split(b"\n", 1)
            return line.decode("ascii")
        return None

    def close(self) -> None:
        self._closed = True
        try:
            self._sock.close()
        except OSError:
            pass


def _rotate_vec(v: np.ndarray, axis: np.ndarray, deg: float) -> np.ndarray:
    # Firmware-side rotation; intentionally separate from the simulator's.
    t = math.radians(deg)
    c, s = math.cos(t), math.sin(t)
    return v * c + np.cross(axis, v) * s + axis * float(np.dot(axis, v)) * (1.0 - c)


class Emulator:
    """Step-accurate stand-in for the machine firmware.

    Axis positions are integer step counters; odometers accumulate total
    steps moved.  `time_scale` scales motion durations (0 = instant, 1 =
    physical speed); stop requests are honored between motion slices.
    """

    def __init__(self, profile: MachineProfile | None = None, time_scale: float = 0.0):
        self.profile = profile or MachineProfile()
        self.time_scale = time_scale
        self._lock = threading.Lock()
        self._thread: threading.Thread | None = None
        self.reset()

    def reset(self) -> None:
        with self._lock:
            self.feed_steps = 0
            self.bend_steps = 0
            self.rotate_steps = 0
            self.odometer = {FEED: 0, BEND: 0, ROTATE: 0}
            self.homed = False
            self.retracted = False
            self.peg_side = 0  # +1 / -1 after a bend; 0 = either direction allowed
            self.events: list[str] = []
            self._position = np.zeros(3)
            self._heading = np.array([1.0, 0.0, 0.0])
            self._normal = np.array([0.0, 0.0, 1.0])
            self._points: list[tuple[float, float, float]] = [(0.0, 0.0, 0.0)]

    # -- inspection ------------------------------------------------------

    def wire_polyline(self) -> list[tuple[float, float, float]]:
        with self._lock:
            return list(self._points)

    def axis_positions(self) -> dict[str, int]:
        with self._lock:
            return {FEED: self.feed_steps, BEND: self.bend_steps, ROTATE: self.rotate_steps}

    def axis_odometer(self) -> dict[str, int]:
        with self._lock:
            return dict(self.odometer)

    # -- serving ---------------------------------------------------------

    def serve(self, channel) -> None:
        """Process protocol lines until the channel closes (blocking)."""
        pending: list[str] = []
        while True:
            line = pending.pop(0) if pending else channel.read_line()
            if line is None:
                return
            for response in self._handle(line.strip(), channel, pending):
                channel.write_line(response)

    def start(self) -> LocalChannel:
        """Spawn the service loop on a daemon thread; returns the host side."""
        host_side, machine_side = local_channel_pair()
        self._thread = threading.Thread(target=self.serve, args=(machine_side,), daemon=True)
        self._thread.start()
        return host_side

    # -- command handling --------------------------------------------------

    def _handle(self, line: str, channel, pending: list[str]) -> list[str]:
        if not line:
            return []
        parts = line.split()
        cmd = parts[0]
        if cmd == "STOP":
            return ["OK"]  # nothing in flight
        if cmd == HOME:
            if len(parts) != 1:
                return [f"ERR {ERR_BAD_ARG}"]
            return self._home()
        if cmd == RETRACT:
            if len(parts) != 2 or parts[1] not in ("0", "1"):
                return [f"ERR {ERR_BAD_ARG}"]
            return self._retract(parts[1] == "1")
        if cmd in (FEED, BEND, ROTATE):
            if len(parts) != 2:
                return [f"ERR {ERR_BAD_ARG}"]
            try:
                steps = int(parts[1])
            except ValueError:
                return [f"ERR {ERR_BAD_ARG}"]
            return self._motion(cmd, steps, channel, pending)
        return [f"ERR {ERR_UNKNOWN}"]

    def _home(self) -> list[str]:
        with self._lock:
            self.bend_steps = 0
            self.homed = True
            self.retracted = False
            self.peg_side = 0
            self.events.append("HIT")
        return ["HIT", "OK"]

    def _retract(self, state: bool) -> list[str]:
        with self._lock:
            if self.retracted and not state:
                self.peg_side = 0  # peg re-extends on the other side of the wire
            self.retracted = state
            self.events.append(f"RETRACT {int(state)}")
        return ["OK"]

    def _motion(self, axis: str, steps: int, channel, pending: list[str]) -> list[str]:
        profile = self.profile
        if axis == FEED and steps < 0:
            return [f"ERR {ERR_BAD_ARG}"]
        if axis == BEND:
            if not self.homed:
                return [f"ERR {ERR_NOT_HOMED}"]
            if self.retracted:
                return [f"ERR {ERR_DIRECTION}"]
            angle = steps * profile.bend_resolution
            if abs(angle) > profile.bend.hard_stop + 1e-9:
                return [f"ERR {ERR_RANGE}"]
            sign = 1 if steps > 0 else -1 if steps < 0 else 0
            if sign and self.peg_side and sign != self.peg_side:
                return [f"ERR {ERR_DIRECTION}"]
        if axis == ROTATE:
            target = (self.rotate_steps + steps) * profile.rotate_resolution
            if abs(target) > profile.rotate.max_cumulative + 1e-9:
                return [f"ERR {ERR_RANGE}"]

        moved = self._run_steps(axis, steps, channel, pending)
        self._apply_motion(axis, moved)
        if moved != steps:
            return [f"ERR {ERR_STOPPED}", "OK"]  # aborted command, then the STOP ack
        if axis == BEND:
            # Return sweep: peg back to home, no wire deformation.
            self._run_steps(axis, -steps, channel, pending, returning=True)
            with self._lock:
                if steps:
                    self.peg_side = 1 if steps > 0 else -1
        return ["OK"]

    def _speed_steps_per_s(self, axis: str) -> float:
        p = self.profile
        if axis == FEED:
            return p.speeds.feed / p.feed_resolution
        if axis == BEND:
            return p.speeds.bend / p.bend_resolution
        return p.speeds.rotate / p.rotate_resolution

    def _run_steps(self, axis: str, steps: int, channel, pending: list[str],
                   returning: bool = False) -> int:
        """Advance the axis counter slice by slice, polling for STOP.

        Returns the steps actually performed (differs from `steps` only when
        aborted).  The return sweep of a bend is not abortable state-wise: it
        always completes (the peg must come home), so stops during it are
        deferred to the pending queue.
        """
        if steps == 0:
            return 0
        direction = 1 if steps > 0 else -1
        remaining = abs(steps)
        per_s = self._speed_steps_per_s(axis)
        slice_steps = remaining if self.time_scale == 0 else max(1, int(per_s * 0.01))
        done = 0
        while remaining > 0:
            chunk = min(slice_steps, remaining)
            if self.time_scale > 0:
                time.sleep(chunk / per_s * self.time_scale)
            with self._lock:
                if axis == FEED:
                    self.feed_steps += chunk * direction
                elif axis == BEND:
                    self.bend_steps += chunk * direction
                else:
                    self.rotate_steps += chunk * direction
                self.odometer[axis] += chunk
            done += chunk
            remaining -= chunk
            if remaining > 0 or self.time_scale > 0:
                line = channel.try_read_line()
                if line is not None:
                    if line.strip() == "STOP" and not returning:
                        return done * direction
                    pending.append(line)
        return done * direction

    def _apply_motion(self, axis: str, steps: int) -> None:
        """Fold completed motion into the firmware's wire reconstruction."""
        if steps == 0:
            return
        p = self.profile
        with self._lock:
            if axis == FEED:
                length = steps * p.feed_resolution
                self._position = self._position + self._heading * length
                self._points.append(tuple(float(c) for c in self._position))
            elif axis == BEND:
                angle = steps * p.bend_resolution
                self._heading = _rotate_vec(self._heading, self._normal, angle)
            else:
                angle = steps * p.rotate_resolution
                self._normal = _rotate_vec(self._normal, self._heading, angle)


@dataclass
class RunReport:
    status: str  # "done", "stopped", "failed"
    commands_sent: int
    total_commands: int
    events: list[str]
    step_totals: dict[str, int]
    elapsed_s: float
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "commands_sent": self.commands_sent,
            "total_commands": self.total_commands,
            "events": list(self.events),
            "step_totals": dict(self.step_totals),
            "elapsed_s": self.elapsed_s,
            "error": self.error,
        }


class MachineController:
    """Host-side protocol client: homing, jogs, program runs, stop.

    One controller owns one transport; jog/home/run are serialized, stop may
    be called from another thread at any time and is honored between motor
    pulses.
    """

    def __init__(self, channel, profile: MachineProfile | None = None,
                 ack_timeout: float = 5.0):
        self.channel = channel
        self.profile = profile or MachineProfile()
        self.ack_timeout = ack_timeout
        self.session_log: list[Instruction] = []
        self.homed = False
        self._jog_planner = StepPlanner(self.profile)
        self._session_lock = threading.RLock()
        self._stop_lock = threading.Lock()
        self._stop_requested = False
        self._stop_ack_pending = False
        self._running = False

    # -- low level ---------------------------------------------------------

    def _command_timeout(self, cmd: StepCommand) -> float:
        p = self.profile
        if cmd.op == RETRACT:
            return self.ack_timeout
        if cmd.op == FEED:
            motion = abs(cmd.steps) * p.feed_resolution / p.speeds.feed
        elif cmd.op == BEND:
            motion = 2.0 * abs(cmd.steps) * p.bend_resolution / p.speeds.bend
        else:
            motion = abs(cmd.steps) * p.rotate_resolution / p.speeds.rotate
        return self.ack_timeout + 2.0 * motion

    def _exchange(self, line: str, timeout: float, events: list[str]) -> str:
        self.channel.write_line(line)
        return self._await_response(timeout, events)

    def _await_response(self, timeout: float, events: list[str]) -> str:
        deadline = time.monotonic() + timeout
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise TransportError(f"timeout waiting for response (>{timeout:.1f}s)")
            line = self.channel.read_line(timeout=remaining)
            if line is None:
                raise TransportError("transport closed or timed out")
            line = line.strip()
            if line == "HIT":
                events.append("HIT")
                continue
            return line

    def _drain_stop_ack(self, events: list[str]) -> None:
        with self._stop_lock:
            if not self._stop_ack_pending:
                return
            self._stop_ack_pending = False
        response = self._await_response(self.ack_timeout, events)
        if response != "OK":
            raise ProtocolError(f"unexpected stop acknowledgment {response!r}")

    # -- public API ---------------------------------------------------------

    def home(self) -> list[str]:
        """Home the bend axis; returns the limit-switch events observed."""
        with self._session_lock:
            events: list[str] = []
            response = self._exchange("HOME", self.ack_timeout + 30.0, events)
            if response != "OK":
                raise ProtocolError(f"homing failed: {response}")
            self.homed = True
            return events

    def jog(self, instruction: Instruction) -> list[str]:
        """Execute one instruction and append it to the session log.

        Step residuals carry across jogs, as they would within a program.
        """
        with self._session_lock:
            if instruction.kind == BEND and not self.homed:
                raise ProtocolError("bend requires homing first")
            commands = self._jog_planner.plan(instruction.kind, instruction.magnitude,
                                              len(self.session_log))
            events: list[str] = []
            for cmd in commands:
                self._send_command(cmd, events)
            self.session_log.append(instruction)
            return events

    def save_session(self, path: str | Path) -> None:
        Path(path).write_bytes(emit_text(InstructionProgram(tuple(self.session_log))))

    def _send_command(self, cmd: StepCommand, events: list[str]) -> None:
        if cmd.op == RETRACT:
            line = f"RETRACT {cmd.steps}"
        else:
            line = f"{cmd.op} {cmd.steps}"
        response = self._exchange(line, self._command_timeout(cmd), events)
        if response.startswith("ERR"):
            code = response.split()[1] if len(response.split()) > 1 else "?"
            if code == str(ERR_STOPPED):
                raise _StoppedSignal()
            raise ProtocolError(f"machine rejected {line!r}: {response}")
        if response != "OK":
            raise ProtocolError(f"unexpected response {response!r} to {line!r}")

    def run_program(self, p: InstructionProgram, home_first: bool = True) -> RunReport:
        """Stream a program to the machine with per-command acknowledgment."""
        with self._session_lock:
            with self._stop_lock:
                self._stop_requested = False
                self._stop_ack_pending = False
                self._running = True
            events: list[str] = []
            commands = to_steps(p, self.profile)
            totals: dict[str, int] = {FEED: 0, BEND: 0, ROTATE: 0}
            sent = 0
            started = time.monotonic()
            status, error = "done", None
            try:
                if home_first:
                    response = self._exchange("HOME", self.ack_timeout + 30.0, events)
                    if response != "OK":
                        raise ProtocolError(f"homing failed: {response}")
                    self.homed = True
                for cmd in commands:
                    with self._stop_lock:
                        if self._stop_requested:
                            status = "stopped"
                            break
                    self._send_command(cmd, events)
                    sent += 1
                    if cmd.op in totals:
                        totals[cmd.op] += abs(cmd.steps)
            except _StoppedSignal:
                status = "stopped"
                sent += 1
            except (TransportError, ProtocolError) as exc:
                status, error = "failed", str(exc)
            finally:
                try:
                    self._drain_stop_ack(events)
                except (TransportError, ProtocolError):
                    if status == "done":
                        status, error = "failed", "lost stop acknowledgment"
                with self._stop_lock:
                    self._running = False
                    self._stop_requested = False
            return RunReport(status, sent, len(commands), events, totals,
                             time.monotonic() - started, error)

    def stop(self) -> None:
        """Request an immediate abort; safe to call from any thread."""
        with self._stop_lock:
            self._stop_requested = True
            self._stop_ack_pending = True
            self.channel.write_line("STOP")
            if self._running:
                return  # the run loop drains the acknowledgment
        events: list[str] = []
        self._drain_stop_ack(events)


class _StoppedSignal(Exception):
    pass


class EmulatorServer:
    """Expose one emulator over a local TCP socket (sequential clients)."""

    def __init__(self, profile: MachineProfile | None = None,
                 host: str = "127.0.0.1", port: int = 0, time_scale: float = 0.0):
        self.emulator = Emulator(profile, time_scale=time_scale)
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._sock.bind((host, port))
        self._sock.listen(1)
        self.address = self._sock.getsockname()
        self._thread: threading.Thread | None = None
        self._closing = False

    def start(self) -> "EmulatorServer":
        self._thread = threading.Thread(target=self._accept_loop, daemon=True)
        self._thread.start()
        return self

    def _accept_loop(self) -> None:
        while not self._closing:
            try:
                client, _ = self._sock.accept()
            except OSError:
                return
            channel = TcpChannel(client)
            try:
                self.emulator.serve(channel)
            except TransportError:
                pass
            finally:
                channel.close()

    def close(self) -> None:
        self._closing = True
        try:
            self._sock.close()
        except OSError:
            pass


def open_channel(address: str, profile: MachineProfile | None = None):
    """Open a transport from an address string.

    `emulate:` starts a fresh in-process emulator; `tcp:HOST:PORT` connects
    to a served machine (a real controller behind a serial-to-TCP bridge, or
    an EmulatorServer).
    """
    if address == "emulate:" or address == "emulate":
        return Emulator(profile).start()
    if address.startswith("tcp:"):
        rest = address[4:]
        host, _, port_text = rest.rpartition(":")
        if not host or not port_text.isdigit():
            raise ValueError(f"bad tcp address {address!r}, expected tcp:HOST:PORT")
        return TcpChannel.connect(host, int(port_text))
    raise ValueError(f"unknown transport address {address!r}")
