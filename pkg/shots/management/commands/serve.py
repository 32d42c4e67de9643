import asyncio

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from shots.cli import USAGE, add_artifact_arguments, add_config_arguments, artifacts_from_options, config_from_options, runtime_error
from shots.stream import StreamScorer, parse_listen, serve_stream


class Command(BaseCommand):
    help = "Score NDJSON sample streams over TCP until interrupted."

    def add_arguments(self, parser):
        parser.add_argument("--listen", default=None, help="host:port (default: KICKLAB_STREAM_LISTEN).")
        add_artifact_arguments(parser)
        add_config_arguments(parser)

    def handle(self, *args, **options):
        cfg = config_from_options(options)
        try:
            host, port = parse_listen(options["listen"] or settings.KICKLAB_STREAM_LISTEN)
        except ValueError as e:
            raise CommandError(str(e), returncode=USAGE)
        template, model = artifacts_from_options(options)

        def make_scorer():
            return StreamScorer(template, model, cfg)

        async def run():
            server = await serve_stream(host, port, make_scorer)
            async with server:
                await server.serve_forever()

        self.stdout.write(f"listening on {host}:{port}")
        try:
            asyncio.run(run())
        except KeyboardInterrupt:
            self.stdout.write("stopped")
        except OSError as e:
            raise runtime_error("bind", e)
