"""Command-line entry points: serve, ingest, chat, index rebuild."""

from __future__ import annotations

from pathlib import Path

import click

from .config import ENV_DATA_DIR, ENV_PORT, load_config
from .engine import Engine
from .errors import PqaError


def _engine(data_dir: str | None, config_path: str | None) -> Engine:
    cfg = load_config(path=config_path, data_dir=data_dir)
    return Engine(cfg)


@click.group()
def main():
    """Prediction-query answering engine."""


_data_dir_option = click.option(
    "--data-dir",
    envvar=ENV_DATA_DIR,
    default="pqa_data",
    show_default=True,
    help="Engine data directory (env PQA_DATA_DIR).",
)
_config_option = click.option(
    "--config", "config_path", default=None, help="Path to a JSON config file."
)


@main.command()
@click.option("--port", envvar=ENV_PORT, default=8000, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@_data_dir_option
@_config_option
def serve(port: int, host: str, data_dir: str, config_path: str | None):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    app = create_app(_engine(data_dir, config_path))
    uvicorn.run(app, host=host, port=port)


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--name", default=None, help="Dataset name (defaults to the file stem).")
@_data_dir_option
@_config_option
def ingest(file: str, name: str | None, data_dir: str, config_path: str | None):
    """Ingest a CSV file into the data lake."""
    engine = _engine(data_dir, config_path)
    try:
        profile = engine.ingest_dataset(
            Path(file).read_text(encoding="utf-8"), name or Path(file).stem
        )
    except PqaError as exc:
        raise click.ClickException(f"[{exc.code}] {exc.message}")
    dtypes = ", ".join(f"{c.name}:{c.dtype}" for c in profile.columns)
    click.echo(f"ingested '{profile.name}': {profile.row_count} rows, columns {dtypes}")


@main.command()
@_data_dir_option
@_config_option
def chat(data_dir: str, config_path: str | None):
    """Interactive chat session against the local engine."""
    engine = _engine(data_dir, config_path)
    session = engine.create_session()
    click.echo("pqa chat - type a prediction query, 'help' for guidance, Ctrl-D to quit.")
    while True:
        try:
            text = input("you> ").strip()
        except (EOFError, KeyboardInterrupt):
            click.echo()
            break
        if not text:
            continue
        try:
            reply = engine.handle_message(session.id, text)
        except PqaError as exc:
            click.echo(f"pqa! [{exc.code}] {exc.message}")
            continue
        click.echo(f"pqa> {reply.text}")


@main.group()
def index():
    """Vector-index maintenance."""


@index.command("rebuild")
@_data_dir_option
@_config_option
def index_rebuild(data_dir: str, config_path: str | None):
    """Re-embed all profiles and rewrite the index files (run after changing
    encoder settings)."""
    engine = _engine(data_dir, config_path)
    engine.rebuild_index()
    click.echo(
        f"rebuilt indices: {len(engine.list_models())} models, "
        f"{len(engine.list_datasets())} datasets"
    )


if __name__ == "__main__":
    main()
