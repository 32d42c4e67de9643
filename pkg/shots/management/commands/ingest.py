import json

from django.core.management.base import BaseCommand

from shots.exceptions import ShotLabError
from shots.ingest import detect_gaps, iter_session_files, read_session_file


class Command(BaseCommand):
    help = "Audit session CSVs for dropout: one JSON gap report per file."

    def add_arguments(self, parser):
        parser.add_argument("--input", required=True, help="A session CSV or a directory of them.")

    def handle(self, *args, **options):
        for path in iter_session_files(options["input"]):
            row = {"file": path.name}
            try:
                session = read_session_file(path)
                row["player_id"] = session.meta.player_id
                row["samples"] = len(session)
                row.update(detect_gaps(session).to_dict())
            except ShotLabError as e:
                row["error"] = e.code
                row["message"] = str(e)
            except OSError as e:
                row["error"] = type(e).__name__
                row["message"] = str(e)
            self.stdout.write(json.dumps(row))
