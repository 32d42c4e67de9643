import asyncio

from django.core.management.base import BaseCommand, CommandError

from shots.cli import USAGE, runtime_error
from shots.exceptions import ShotLabError
from shots.ingest import read_session_file
from shots.scoring import encode_event
from shots.stream import parse_listen, replay_session


class Command(BaseCommand):
    help = "Stream one session CSV to a running `serve` and print the events it returns."

    def add_arguments(self, parser):
        parser.add_argument("--connect", required=True, help="host:port of the stream server.")
        parser.add_argument("--input", required=True, help="Session CSV.")

    def handle(self, *args, **options):
        try:
            host, port = parse_listen(options["connect"])
        except ValueError as e:
            raise CommandError(str(e), returncode=USAGE)
        try:
            session = read_session_file(options["input"])
        except OSError as e:
            raise runtime_error("ingest", e)
        except ShotLabError as e:
            raise runtime_error("ingest", e)

        try:
            events = asyncio.run(replay_session(host, port, session))
        except OSError as e:
            raise runtime_error("connect", e)

        for event in events:
            self.stdout.write(encode_event(event))
