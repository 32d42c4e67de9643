import csv
import io
import json

from django.core.management.base import BaseCommand

from shots.cli import add_artifact_arguments, add_config_arguments, artifacts_from_options, config_from_options, runtime_error
from shots.pipeline import StageError, load_sessions, score_sessions
from shots.scoring import EVENT_KEYS, encode_event


class Command(BaseCommand):
    help = "Score session CSVs against a trained template and model."

    def add_arguments(self, parser):
        parser.add_argument("--input", required=True, help="A session CSV or a directory of them.")
        parser.add_argument("--format", choices=["json", "csv"], default="json")
        parser.add_argument("--output", default=None, help="Write here instead of stdout.")
        parser.add_argument(
            "--diagnostics", action="store_true",
            help="Also write per-channel RMSE and peak leg angle for each scored shot to stderr.",
        )
        add_artifact_arguments(parser)
        add_config_arguments(parser)

    def handle(self, *args, **options):
        cfg = config_from_options(options)
        template, model = artifacts_from_options(options)

        try:
            sessions = load_sessions(options["input"])
        except StageError as e:
            raise runtime_error(e.stage, e)
        if not sessions:
            raise runtime_error("ingest", FileNotFoundError(f"no session CSVs under {options['input']}"))

        report = score_sessions(sessions, template, model, cfg, diagnostics=options["diagnostics"])
        for skip in report.skipped:
            self.stderr.write(json.dumps({"skipped": skip}))
        for item in report.diagnostics or ():
            self.stderr.write(json.dumps({"diagnostics": item}))

        if options["format"] == "csv":
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(EVENT_KEYS)
            for event in report.events:
                writer.writerow([event[key] for key in EVENT_KEYS])
            text = buf.getvalue()
            self.stderr.write(json.dumps({"summary": report.summary}))
        else:
            lines = [encode_event(event) for event in report.events]
            lines.append(json.dumps({"summary": report.summary}, separators=(",", ":")))
            text = "\n".join(lines) + "\n"

        if options["output"]:
            try:
                with open(options["output"], "w", encoding="utf-8", newline="") as f:
                    f.write(text)
            except OSError as e:
                raise runtime_error("write", e)
        else:
            self.stdout.write(text, ending="")
