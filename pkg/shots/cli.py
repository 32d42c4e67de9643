# shots/cli.py
"""Argument and error plumbing shared by the management commands."""
from __future__ import annotations

from django.conf import settings
from django.core.management.base import CommandError

from .config import PipelineConfig, load_config, parse_overrides
from .exceptions import ConfigInvalid, ShotLabError
from .template import read_model, read_template

USAGE = 2
RUNTIME = 1


def add_config_arguments(parser) -> None:
    parser.add_argument("--config", help="Flat JSON file of pipeline settings.")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override one pipeline setting (repeatable; wins over --config).",
    )


def add_artifact_arguments(parser) -> None:
    parser.add_argument("--template", default=None, help="Template JSON (default: KICKLAB_TEMPLATE_PATH).")
    parser.add_argument("--model", default=None, help="Model JSON (default: KICKLAB_MODEL_PATH).")


def config_from_options(options) -> PipelineConfig:
    try:
        return load_config(options.get("config"), parse_overrides(options.get("overrides")))
    except ConfigInvalid as e:
        raise CommandError(f"invalid config ({e.field}): {e}", returncode=USAGE)


def artifacts_from_options(options):
    template_path = options.get("template") or settings.KICKLAB_TEMPLATE_PATH
    model_path = options.get("model") or settings.KICKLAB_MODEL_PATH
    try:
        return read_template(template_path), read_model(model_path)
    except (OSError, ValueError, KeyError) as e:
        raise CommandError(f"cannot read artifacts: {e}", returncode=RUNTIME)
    except ShotLabError as e:
        raise CommandError(f"cannot read artifacts: {e.code}: {e}", returncode=RUNTIME)


def runtime_error(stage: str, error: Exception) -> CommandError:
    code = getattr(error, "code", type(error).__name__)
    return CommandError(f"{stage}: {code}: {error}", returncode=RUNTIME)
