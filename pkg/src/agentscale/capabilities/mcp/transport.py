"""
       Copyright 2026 Inmanta

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
"""

import abc
import logging
import shlex
import subprocess
from queue import Empty, Queue
from threading import Thread
from typing import IO, Optional, Union

import requests

from agentscale.capabilities.mcp.mock_server import MockMcpServer
from agentscale.config.schema import McpServerSpec, McpTransportKind
from agentscale.exceptions import McpTransportError
from agentscale.helpers.utils import io_logger

LOGGER = logging.getLogger(__name__)

END_OF_QUEUE = object()

LOOPBACK = "loopback"


def receiver(stream: IO[str], output_queue: Queue) -> None:
    """
    This function should be executed as a thread and will push every line of the stream to the
    output queue, until the stream is closed.  The end of the stream is marked with END_OF_QUEUE.

    :param stream: The stream to read the frames from, one frame per line
    :param output_queue: The queue to push the frames to
    """
    try:
        for line in stream:
            if line.strip():
                output_queue.put(line.rstrip("\n"))
    except ValueError:
        # The stream got closed under our feet
        pass

    output_queue.put(END_OF_QUEUE)


class McpTransport(abc.ABC):
    """
    A bidirectional channel of json-rpc frames.  Frames are exchanged as text, one frame at a time.
    """

    def __init__(self, name: str) -> None:
        self.name = name
        self._responses: Optional[Queue] = None

    @property
    def closed(self) -> bool:
        return self._responses is None

    @abc.abstractmethod
    def open(self) -> None:
        pass

    @abc.abstractmethod
    def send(self, frame: str) -> None:
        pass

    def receive(self, timeout: Optional[float] = None) -> str:
        """
        Wait for the next frame of the server.

        :raises McpTransportError: If the timeout expires or the server went away
        """
        if self._responses is None:
            raise McpTransportError(f"Transport {self.name} is not open")

        try:
            frame: Union[str, object] = self._responses.get(timeout=timeout)
        except Empty:
            raise McpTransportError(f"Timeout while waiting for a frame from {self.name}")

        if frame is END_OF_QUEUE:
            # Keep the marker for any other reader
            self._responses.put(END_OF_QUEUE)
            raise McpTransportError(f"Server {self.name} closed the connection")

        assert isinstance(frame, str)
        return frame

    @abc.abstractmethod
    def close(self) -> None:
        pass


class StdioTransport(McpTransport):
    """
    Talk to a server started as a subprocess, frames are exchanged as lines on its stdin and stdout.
    """

    def __init__(self, name: str, command: str) -> None:
        super().__init__(name)
        self.cmd = shlex.split(command)
        self._process: Optional[subprocess.Popen] = None
        self._receiver_thread: Optional[Thread] = None
        self._logs_thread: Optional[Thread] = None

    def open(self) -> None:
        if not self.closed:
            raise RuntimeError("Can not open a transport that is already open")

        LOGGER.debug(f"Starting mcp server {self.name}: {self.cmd}")
        try:
            self._process = subprocess.Popen(
                self.cmd,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                universal_newlines=True,
                encoding="utf-8",
            )
        except OSError as e:
            raise McpTransportError(f"Failed to start mcp server {self.name}: {e}")

        self._responses = Queue()
        self._receiver_thread = Thread(target=receiver, args=(self._process.stdout, self._responses), daemon=True)
        self._receiver_thread.start()

        self._logs_thread = Thread(
            target=io_logger,
            args=(self._process.stderr, f"mcp[{self.name}]-stderr"),
            daemon=True,
        )
        self._logs_thread.start()

    def send(self, frame: str) -> None:
        if self._process is None or self._process.stdin is None:
            raise McpTransportError(f"Transport {self.name} is not open")

        try:
            self._process.stdin.write(frame + "\n")
            self._process.stdin.flush()
        except (BrokenPipeError, ValueError) as e:
            raise McpTransportError(f"Failed to send a frame to {self.name}: {e}")

    def close(self) -> None:
        if self._process is None:
            return

        assert self._process.stdin is not None
        try:
            self._process.stdin.close()
        except BrokenPipeError:
            pass

        try:
            self._process.wait(5)
        except subprocess.TimeoutExpired:
            LOGGER.warning(f"Mcp server {self.name} did not stop after its input was closed, killing it")
            self._process.kill()
            self._process.wait()

        for thread in (self._receiver_thread, self._logs_thread):
            if thread is not None:
                thread.join(5)
                if thread.is_alive():
                    LOGGER.warning(f"Failed to join the io threads of mcp server {self.name}")

        self._process = None
        self._receiver_thread = None
        self._logs_thread = None
        self._responses = None


class HttpTransport(McpTransport):
    """
    Talk to a server over http, each frame is posted and the response body is the answer.
    """

    def __init__(self, name: str, url: str, *, timeout: float = 30, session: Optional[requests.Session] = None) -> None:
        super().__init__(name)
        self.url = url
        self.timeout = timeout
        self._session = session
        self._owns_session = session is None

    def open(self) -> None:
        if self._session is None:
            self._session = requests.Session()
        self._responses = Queue()

    def send(self, frame: str) -> None:
        if self._session is None or self._responses is None:
            raise McpTransportError(f"Transport {self.name} is not open")

        try:
            response = self._session.post(
                self.url,
                data=frame.encode("utf-8"),
                headers={"Content-Type": "application/json", "Accept": "application/json"},
                timeout=self.timeout,
            )
            response.raise_for_status()
        except requests.RequestException as e:
            raise McpTransportError(f"Failed to reach mcp server {self.name} at {self.url}: {e}")

        # Notifications are acknowledged without a body
        if response.text.strip():
            self._responses.put(response.text.strip())

    def close(self) -> None:
        if self._session is not None and self._owns_session:
            self._session.close()
            self._session = None
        self._responses = None


class LoopbackTransport(McpTransport):
    """
    Talk to an in-process mock server, frames go through the same text encoding as on a real wire.
    """

    def __init__(self, name: str, server: Optional[MockMcpServer] = None) -> None:
        super().__init__(name)
        self.server = server or MockMcpServer()

    def open(self) -> None:
        self._responses = Queue()

    def send(self, frame: str) -> None:
        if self._responses is None:
            raise McpTransportError(f"Transport {self.name} is not open")

        response = self.server.handle_line(frame)
        if response is not None:
            self._responses.put(response)

    def close(self) -> None:
        self._responses = None


def open_transport(spec: McpServerSpec) -> McpTransport:
    """
    Build the transport for a server declaration.  The stdio endpoint "loopback", optionally followed by
    ":<faults>", designates the in-process mock server.
    """
    if spec.transport == McpTransportKind.HTTP:
        return HttpTransport(spec.name, spec.endpoint)

    kind, _, faults = spec.endpoint.partition(":")
    if kind == LOOPBACK:
        return LoopbackTransport(spec.name, MockMcpServer.from_spec(faults))

    return StdioTransport(spec.name, spec.endpoint)
