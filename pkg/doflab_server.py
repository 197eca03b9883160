#!/usr/bin/env python3
"""
doflab MCP Server

Exposes exact DoF regions, regime classification, feedback scheme plans,
Monte Carlo decoding and the exhaustive config sweep as MCP tools over stdio.
"""

from __future__ import annotations

import asyncio
import json
import logging
from typing import Any

from mcp.server import Server
from mcp.server.stdio import stdio_server
from mcp.types import TextContent, Tool

from dof_lab import DEFAULT_TRIALS, MODES, SWEEP_CHECKS, DofLab
from dof_regions import FAMILY_ALIASES, AntennaConfig, DofLabError, InvalidConfig
from dof_schemes import POINTS

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S",
)
logger = logging.getLogger("doflab-mcp")

server = Server("doflab-mcp")

# Sweeps over large bounds are expensive; keep tool calls responsive.
MAX_SWEEP_ANTENNAS = 8
MAX_TOOL_TRIALS = 1000


def _scalar_or_string(base_type: str) -> dict[str, Any]:
    """Schema helper: the field accepts a native JSON value or its string form.

    Some MCP clients serialize non-string tool arguments as JSON strings in
    transit, so integer fields declare ``oneOf [integer, string]``.
    """

    return {"oneOf": [{"type": base_type}, {"type": "string"}]}


def _coerce_arguments(
    arguments: dict[str, Any],
    *,
    ints: tuple[str, ...] = (),
    arrays: tuple[str, ...] = (),
) -> dict[str, Any]:
    """Convert stringified tool arguments back to native types.

    Unconvertible strings are left as-is so the handler's error message wins.
    """

    out = dict(arguments)
    for key in ints:
        v = out.get(key)
        if isinstance(v, str):
            try:
                out[key] = int(v)
            except ValueError:
                pass
    for key in arrays:
        v = out.get(key)
        if isinstance(v, str):
            try:
                parsed = json.loads(v)
            except (json.JSONDecodeError, TypeError):
                parsed = [part.strip() for part in v.split(",")]
            if isinstance(parsed, list):
                out[key] = parsed
    return out


def _config(arguments: dict[str, Any]) -> AntennaConfig:
    antennas = arguments.get("antennas")
    if not isinstance(antennas, list):
        raise InvalidConfig("'antennas' must be an array [M1, M2, N1, N2].")
    try:
        values = [int(v) for v in antennas]
    except (TypeError, ValueError) as exc:
        raise InvalidConfig(f"'antennas' must hold integers, got {antennas}.") from exc
    return AntennaConfig.of(values)


def _text(document: dict[str, Any]) -> list[TextContent]:
    return [TextContent(type="text", text=json.dumps(document, indent=2))]


@server.list_tools()
async def list_tools() -> list[Tool]:
    """List available doflab tools."""

    antennas_schema = {
        "oneOf": [
            {"type": "array", "items": _scalar_or_string("integer"), "minItems": 4, "maxItems": 4},
            {"type": "string"},
        ],
        "description": "Antenna counts [M1, M2, N1, N2] of Tx1, Tx2, Rx1, Rx2.",
    }
    point_schema = {
        "type": "string",
        "enum": list(POINTS),
        "description": (
            "Corner point: 'p0' (CaseA two-phase plan), 'p1' (CaseB two-phase plan) "
            "or 'p2' (CaseB sum-rate corner)."
        ),
    }

    return [
        Tool(
            name="doflab_region",
            description=(
                "Exact DoF region of the two-user MIMO interference channel: canonical "
                "half-planes and counterclockwise vertices, rationals as 'p/q' strings."
            ),
            inputSchema={
                "type": "object",
                "properties": {
                    "antennas": antennas_schema,
                    "family": {
                        "type": "string",
                        "enum": sorted(FAMILY_ALIASES),
                        "default": "fb_dcsit",
                        "description": (
                            "Which region: p_csit (perfect CSIT), d_csit (delayed CSIT), "
                            "fb_dcsit (output feedback + delayed CSIT) or the "
                            "no_csit_fixture available only for (6,2,4,3)."
                        ),
                    },
                },
                "required": ["antennas"],
            },
        ),
        Tool(
            name="doflab_classify",
            description=(
                "Classify a config as EqualDelayed, CaseA or CaseB and list the corner "
                "points the feedback schemes reach."
            ),
            inputSchema={
                "type": "object",
                "properties": {"antennas": antennas_schema},
                "required": ["antennas"],
            },
        ),
        Tool(
            name="doflab_plan",
            description=(
                "Slot-by-slot transmission plan for a corner point, with its symbol ledger "
                "and the receiver counting report."
            ),
            inputSchema={
                "type": "object",
                "properties": {"antennas": antennas_schema, "point": point_schema},
                "required": ["antennas", "point"],
            },
        ),
        Tool(
            name="doflab_simulate",
            description=(
                "Run a corner-point plan over random generic channels and report how many "
                "trials decode every symbol exactly."
            ),
            inputSchema={
                "type": "object",
                "properties": {
                    "antennas": antennas_schema,
                    "point": point_schema,
                    "trials": {
                        **_scalar_or_string("integer"),
                        "default": DEFAULT_TRIALS,
                        "description": f"Number of trials (1..{MAX_TOOL_TRIALS}).",
                    },
                    "seed": {
                        **_scalar_or_string("integer"),
                        "description": "Base seed; falls back to $DOFLAB_SEED, then 0.",
                    },
                    "mode": {"type": "string", "enum": list(MODES), "default": "exact"},
                },
                "required": ["antennas", "point"],
            },
        ),
        Tool(
            name="doflab_sweep",
            description=(
                "Check region inclusions, classification, corner points, vertex enumeration "
                "and mirror symmetry for every config with antennas in [1, max_antennas]."
            ),
            inputSchema={
                "type": "object",
                "properties": {
                    "max_antennas": {
                        **_scalar_or_string("integer"),
                        "description": f"Upper antenna bound (1..{MAX_SWEEP_ANTENNAS}).",
                    },
                    "checks": {
                        "oneOf": [
                            {
                                "type": "array",
                                "items": {"type": "string", "enum": list(SWEEP_CHECKS)},
                            },
                            {"type": "string"},
                        ],
                        "description": "Subset of checks to run; default all.",
                    },
                },
                "required": ["max_antennas"],
            },
        ),
    ]


@server.call_tool()
async def call_tool(name: str, arguments: dict[str, Any]) -> list[TextContent]:
    """Handle doflab tool calls."""

    arguments = _coerce_arguments(
        arguments or {},
        ints=("trials", "seed", "max_antennas"),
        arrays=("antennas", "checks"),
    )

    try:
        if name == "doflab_region":
            lab = DofLab()
            return _text(lab.region(_config(arguments), arguments.get("family", "fb_dcsit")))

        if name == "doflab_classify":
            return _text(DofLab().classify(_config(arguments)))

        if name == "doflab_plan":
            return _text(DofLab().plan(_config(arguments), arguments["point"]))

        if name == "doflab_simulate":
            trials = arguments.get("trials", DEFAULT_TRIALS)
            if not isinstance(trials, int) or not 1 <= trials <= MAX_TOOL_TRIALS:
                raise InvalidConfig(f"trials must be an integer in 1..{MAX_TOOL_TRIALS}.")
            lab = DofLab(arguments.get("seed"), mode=arguments.get("mode", "exact"))
            summary = await asyncio.to_thread(
                lab.simulate, _config(arguments), arguments["point"], trials=trials
            )
            return _text(summary)

        if name == "doflab_sweep":
            bound = arguments.get("max_antennas")
            if not isinstance(bound, int) or not 1 <= bound <= MAX_SWEEP_ANTENNAS:
                raise InvalidConfig(
                    f"max_antennas must be an integer in 1..{MAX_SWEEP_ANTENNAS}."
                )
            report = await asyncio.to_thread(DofLab().sweep, bound, arguments.get("checks"))
            return _text(report.to_dict())

        return [TextContent(type="text", text=f"❌ Unknown tool: {name}")]

    except KeyError as exc:
        return [TextContent(type="text", text=f"❌ Missing argument: {exc.args[0]}")]
    except DofLabError as exc:
        return [TextContent(type="text", text=f"❌ {exc}")]
    except Exception as exc:  # pragma: no cover
        logger.exception("Unexpected error in %s", name)
        return [TextContent(type="text", text=f"❌ Unexpected error: {exc}")]


async def main() -> None:
    """Run the doflab MCP server."""

    logger.info("Starting doflab MCP server")
    async with stdio_server() as (read_stream, write_stream):
        await server.run(read_stream, write_stream, server.create_initialization_options())


def run() -> None:
    """Synchronous wrapper for package entrypoints."""

    asyncio.run(main())


if __name__ == "__main__":
    run()
