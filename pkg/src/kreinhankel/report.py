"""
Report serialization: versioned JSON envelopes and plain CSV tables.
"""
from __future__ import annotations

import csv
import io
import json
import logging
from typing import Any, Dict, Iterable, Optional, Sequence, Type

import attr
from cattr import GenConverter

from kreinhankel.errors import InvalidArgumentError
from kreinhankel.structs import (
    AcDecayReport,
    CrossCheckPair,
    CrossCheckReport,
    DivergenceScan,
    FillReport,
    FillScan,
    ParityReport,
    SpectrumReport,
    TraceCheckReport,
    TraceTrialSuite,
)

logger = logging.getLogger(__name__)

__all__ = (
    "SCHEMA_VERSION",
    "TOOL_NAME",
    "converter",
    "PAYLOAD_KINDS",
    "ReportEnvelope",
    "dump_envelope",
    "parse_envelope",
    "format_float",
    "write_csv",
)

#: The JSON schema version. Reports only ever gain fields.
SCHEMA_VERSION = 1

TOOL_NAME = "khl"

# payload fields are structured by type first, then handed to their attrs converters
converter = GenConverter()

#: Every payload type, by the ``kind`` it is tagged with.
PAYLOAD_KINDS: Dict[str, Type] = {
    cls.__name__: cls
    for cls in (
        SpectrumReport,
        FillReport,
        FillScan,
        AcDecayReport,
        ParityReport,
        TraceTrialSuite,
        DivergenceScan,
        CrossCheckReport,
    )
}

# the payload classes are annotated lazily; cattrs needs real types to build structure hooks
for _cls in (*PAYLOAD_KINDS.values(), CrossCheckPair, TraceCheckReport):
    attr.resolve_types(_cls)


@attr.s(frozen=True, slots=True)
class ReportEnvelope(object):
    """
    The top-level JSON object every command writes.
    """

    #: The tool version that wrote this report.
    version: str = attr.ib()

    #: The subcommand that produced the payload.
    command: str = attr.ib()

    #: An echo of the run configuration.
    config: Dict[str, Any] = attr.ib()

    #: The report itself; one of :data:`PAYLOAD_KINDS`.
    payload: Any = attr.ib()

    #: Wall clock timing, only recorded when asked for, since it breaks output determinism.
    timing: Optional[Dict[str, float]] = attr.ib(default=None)

    schema: int = attr.ib(default=SCHEMA_VERSION)
    tool: str = attr.ib(default=TOOL_NAME)

    @property
    def kind(self) -> str:
        return type(self.payload).__name__


def dump_envelope(envelope: ReportEnvelope) -> str:
    """
    :return: The envelope as indented JSON with sorted keys and a trailing newline.
    """
    kind = envelope.kind
    if kind not in PAYLOAD_KINDS:
        raise InvalidArgumentError(f"unknown payload type {kind}", operation="report.dump_envelope")

    body = {
        "schema": envelope.schema,
        "tool": envelope.tool,
        "version": envelope.version,
        "command": envelope.command,
        "config": envelope.config,
        "kind": kind,
        "payload": converter.unstructure(envelope.payload),
    }
    if envelope.timing is not None:
        body["timing"] = envelope.timing

    return json.dumps(body, indent=2, sort_keys=True) + "\n"


def parse_envelope(text: str) -> ReportEnvelope:
    """
    Parses a JSON report back into an envelope with a typed payload. Dumping the result reproduces
    ``text`` byte for byte.
    """
    data = json.loads(text)
    schema = data.get("schema")
    if schema != SCHEMA_VERSION:
        raise InvalidArgumentError(f"unsupported report schema {schema}", operation="report.parse_envelope")

    kind = data.get("kind")
    cls = PAYLOAD_KINDS.get(kind)
    if cls is None:
        raise InvalidArgumentError(f"unknown payload kind {kind!r}", operation="report.parse_envelope")

    return ReportEnvelope(
        version=data["version"],
        command=data["command"],
        config=data["config"],
        payload=converter.structure(data["payload"], cls),
        timing=data.get("timing"),
        schema=schema,
        tool=data["tool"],
    )


def format_float(value: float) -> str:
    """
    Formats a float with 17 significant digits, which round-trips every double.
    """
    return format(value, ".17g")


def _cell(value) -> str:
    if value is None:
        return ""

    if isinstance(value, float):
        return format_float(value)

    return str(value)


def write_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """
    :return: A CSV table with a header row, ``,`` separators and ``\\n`` line endings.
    """
    stream = io.StringIO()
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])

    return stream.getvalue()
