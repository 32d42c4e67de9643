import json
from collections import defaultdict

from django.core.management.base import BaseCommand

from shots.cli import runtime_error
from shots.types import SUCCESS


class Command(BaseCommand):
    help = "Per-player summary of a `score --format json` output."

    def add_arguments(self, parser):
        parser.add_argument("--scores", required=True)

    def handle(self, *args, **options):
        try:
            with open(options["scores"], encoding="utf-8") as f:
                lines = [line for line in f if line.strip()]
        except OSError as e:
            raise runtime_error("read", e)

        per_player = defaultdict(list)
        for no, line in enumerate(lines, start=1):
            try:
                event = json.loads(line)
            except ValueError as e:
                raise runtime_error(f"line {no}", e)
            if "player_id" in event and "probability" in event:
                per_player[event["player_id"]].append(event)

        self.stdout.write(f"{'player':<16}{'shots':>7}{'success':>9}{'mean_p':>9}{'rmse_acc_y':>12}{'rmse_gyro_z':>13}")
        for player in sorted(per_player):
            events = per_player[player]
            n = len(events)
            success = sum(1 for e in events if e["classified"] == SUCCESS)
            self.stdout.write(
                f"{player:<16}{n:>7}{success / n:>9.2f}"
                f"{sum(e['probability'] for e in events) / n:>9.3f}"
                f"{sum(e['rmse_acc_y'] for e in events) / n:>12.3f}"
                f"{sum(e['rmse_gyro_z'] for e in events) / n:>13.3f}"
            )
