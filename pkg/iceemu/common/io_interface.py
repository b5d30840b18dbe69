"""
This module contains the IOInterface abstract base class and its implementations.

Library code never prints directly: progress lines and reports are handed to an
IOInterface, and the command-line front end decides where they end up.
"""

from __future__ import annotations

import asyncio
from abc import ABC, abstractmethod
from typing import Optional

import aiofiles


class IOInterface(ABC):
    """
    Abstract base class for an IO interface.

    Methods
    -------
    @abstractmethod
    def output(self, message: str):
        Output a message to the interface.
    """

    @abstractmethod
    def output(self, message: str):
        """Output a message to the interface."""

    def output_lines(self, lines):
        """Output several messages in order."""
        for line in lines:
            self.output(line)


class DummyIOInterface(IOInterface):
    """
    A dummy IO interface for batch runs and benchmarks. Does not perform any actual IO.
    """

    def output(self, message):
        """Simulates output operation."""
        pass


class TestIOInterface(IOInterface):
    """
    A test IO interface for testing purposes. Collects output messages.

    Methods
    -------
    def output(self, message):
        Collect an output message.

    def contains(self, fragment: str) -> bool:
        Check whether any collected message contains the fragment.
    """

    __test__ = False

    def __init__(self):
        self.sent_messages = []

    def output(self, message):
        self.sent_messages.append(message)

    def contains(self, fragment: str) -> bool:
        """Check whether any collected message contains the fragment."""
        return any(fragment in message for message in self.sent_messages)


class ConsoleIOInterface(IOInterface):
    """
    A console IO interface for interactive runs.
    """

    def output(self, message: str):
        print(message)


class LoggingIOInterface(IOInterface):
    """
    A logging IO interface for recording purposes. Appends output messages to a log file.

    Methods
    -------
    async def write(self, message):
        Append an output message to the log file.

    def output(self, message):
        Synchronous entry point used by the library. Outside an event loop it runs
        `write` to completion; inside a running loop it schedules the write after
        the previously scheduled one.

    async def flush(self):
        Wait for every scheduled write.
    """

    def __init__(self, log_file_path):
        self.log_file_path = log_file_path
        self._pending: Optional[asyncio.Task] = None

    async def write(self, message):
        async with aiofiles.open(
            self.log_file_path, mode="a", encoding="utf-8"
        ) as log_file:
            await log_file.write(message + "\n")
        await asyncio.sleep(0)  # Yield control to the event loop

    async def _write_after(self, previous: Optional[asyncio.Task], message):
        if previous is not None:
            await previous
        await self.write(message)

    def output(self, message):
        try:
            loop = asyncio.get_running_loop()
        except RuntimeError:
            asyncio.run(self.write(message))
            return
        previous = self._pending
        if previous is not None and (previous.done() or previous.get_loop() is not loop):
            previous = None
        self._pending = loop.create_task(self._write_after(previous, message))

    async def flush(self):
        pending = self._pending
        if pending is not None and pending.get_loop() is asyncio.get_running_loop():
            await pending
