"""Thin command-line client.

Every verification subcommand builds a request and sends it through the
HTTP service: against a remote server when --url is given, otherwise
through an in-process ASGI transport, so the CLI works standalone while
exercising exactly the service surface.

Exit codes: 0 all checks pass, 1 some check failed, 2 load/usage error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import httpx

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib


def _client(url: str | None) -> httpx.Client:
    if url:
        return httpx.Client(base_url=url, timeout=600.0)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DeprecationWarning)
        from starlette.testclient import TestClient

    from .service import app

    return TestClient(app, raise_server_exceptions=True)


def _read_descriptor(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        click.echo(f"error: no such input file {path}", err=True)
        sys.exit(2)
    raw = p.read_bytes()
    if p.suffix == ".toml":
        return tomllib.loads(raw.decode())
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        click.echo(f"error: input is not valid JSON: {exc}", err=True)
        sys.exit(2)


def _parse_caps(text: str | None) -> dict | None:
    if not text:
        return None
    out = {}
    names = {"mult": "mult", "enum": "enum_bound", "samples": "samples", "dim": "dim_bound", "exhaust": "exhaust_dim"}
    for part in text.split(","):
        if "=" not in part:
            raise click.UsageError(f"bad caps entry {part!r}; use name=value")
        k, v = part.split("=", 1)
        k = k.strip()
        if k not in names:
            raise click.UsageError(f"unknown cap {k!r}; known: {', '.join(names)}")
        out[names[k]] = int(v)
    return out


def _parse_pair(u: str | None, v: str | None) -> dict | None:
    if u is None and v is None:
        return None
    return {
        "U": [s for s in (u or "").split(",") if s],
        "V": [s for s in (v or "").split(",") if s],
    }


def _parse_field(text: str | None) -> dict | None:
    if not text:
        return None
    if text in ("Q", "rationals"):
        return {"rationals": True}
    if text.startswith("F_"):
        return {"prime": int(text[2:])}
    return {"prime": int(text)}


def _emit(resp: httpx.Response, fmt: str) -> int:
    if resp.status_code == 422:
        detail = resp.json().get("detail", resp.text)
        click.echo(f"error: {detail}", err=True)
        return 2
    resp.raise_for_status()
    data = resp.json()
    if fmt == "json":
        click.echo(json.dumps(data, sort_keys=True, indent=2))
    else:
        from .certificates import Certificate

        click.echo(Certificate.model_validate(data).to_text())
    return 1 if any(c["status"] == "FAIL" for c in data.get("checks", [])) else 0


def _run_options(fn):
    fn = click.option("--format", "fmt", type=click.Choice(["json", "text"]), default="json", show_default=True)(fn)
    fn = click.option("--seed", type=int, default=0, show_default=True)(fn)
    fn = click.option("--caps", "caps_text", default=None, help="e.g. mult=2,enum=10000")(fn)
    fn = click.option("--field", "field_text", default=None, help="override, e.g. F_101, 5 or Q")(fn)
    fn = click.option("--pair-u", default=None, help="comma-separated U labels")(fn)
    fn = click.option("--pair-v", default=None, help="comma-separated V labels")(fn)
    fn = click.option("--url", default=None, help="remote service URL (default: in-process)")(fn)
    fn = click.option("--timing", is_flag=True, help="include wall-clock timing (breaks byte-identity)")(fn)
    return fn


@click.group()
def main():
    """Certificates for finite extriangulated categories."""


def _register(command: str):
    @main.command(name=command)
    @click.argument("input_path", required=command != "selftest", default=None)
    @_run_options
    def _cmd(input_path, fmt, seed, caps_text, field_text, pair_u, pair_v, url, timing, _command=command):
        payload = {
            "command": _command,
            "seed": seed,
            "timing": timing,
        }
        if _command != "selftest":
            payload["descriptor"] = _read_descriptor(input_path)
        caps = _parse_caps(caps_text)
        if caps:
            payload["caps"] = caps
        pair = _parse_pair(pair_u, pair_v)
        if pair:
            payload["pair"] = pair
        field = _parse_field(field_text)
        if field:
            payload["field"] = field
        with _client(url) as client:
            resp = client.post("/run", json=payload)
        sys.exit(_emit(resp, fmt))

    _cmd.__name__ = f"cmd_{command.replace('-', '_')}"
    return _cmd


from .runner import COMMANDS

for _c in COMMANDS:
    _register(_c)


@main.command()
@click.argument("certificate_path")
@click.option("--url", default=None)
def replay(certificate_path, url):
    """Re-check the replayable witnesses of a stored certificate."""
    p = Path(certificate_path)
    if not p.exists():
        click.echo(f"error: no such certificate {certificate_path}", err=True)
        sys.exit(2)
    try:
        cert = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        click.echo(f"error: certificate is not valid JSON: {exc}", err=True)
        sys.exit(2)
    with _client(url) as client:
        resp = client.post("/replay", json={"certificate": cert})
    if resp.status_code == 422:
        click.echo(f"error: {resp.json().get('detail')}", err=True)
        sys.exit(2)
    resp.raise_for_status()
    results = resp.json()["results"]
    for name, verdict in results:
        click.echo(f"{name}: {verdict}")
    bad = [v for _, v in results if v == "NOT-REPRODUCED"]
    sys.exit(1 if bad else 0)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8787, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("extricat.service:app", host=host, port=port)


if __name__ == "__main__":
    main()
