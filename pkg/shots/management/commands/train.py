from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand

from shots.cli import add_config_arguments, config_from_options, runtime_error
from shots.exceptions import ShotLabError
from shots.pipeline import StageError, train_from_directory
from shots.template import write_model, write_template


class Command(BaseCommand):
    help = "Build the Ground Truth template and outcome model from labelled sessions."

    def add_arguments(self, parser):
        parser.add_argument("--data-dir", required=True)
        parser.add_argument("--labels", default=None, help="labels.json (default: <data-dir>/labels.json).")
        parser.add_argument("--template-out", default=None)
        parser.add_argument("--model-out", default=None)
        add_config_arguments(parser)

    def handle(self, *args, **options):
        cfg = config_from_options(options)
        data_dir = Path(options["data_dir"])
        labels = options["labels"] or data_dir / "labels.json"
        template_out = Path(options["template_out"] or settings.KICKLAB_TEMPLATE_PATH)
        model_out = Path(options["model_out"] or settings.KICKLAB_MODEL_PATH)

        try:
            result = train_from_directory(data_dir, labels, cfg)
        except StageError as e:
            raise runtime_error(e.stage, e)
        except ShotLabError as e:
            raise runtime_error("train", e)

        for name, code, message in result.skipped:
            self.stderr.write(f"skipped {name}: {code}: {message}")

        try:
            template_out.parent.mkdir(parents=True, exist_ok=True)
            model_out.parent.mkdir(parents=True, exist_ok=True)
            write_template(result.template, template_out)
            write_model(result.model, model_out)
        except OSError as e:
            raise runtime_error("write", e)

        self.stdout.write(
            f"trained on {len(result.used)} shots ({result.template.source_count} success, "
            f"{len(result.skipped)} skipped); template -> {template_out}, model -> {model_out}"
        )
