import csv
import io

import numpy as np
from django.core.management.base import BaseCommand

from shots.cli import add_config_arguments, config_from_options, runtime_error
from shots.exceptions import ShotLabError
from shots.ingest import read_session_file, session_to_shot
from shots.scoring import aligned_phase
from shots.template import read_template
from shots.types import CHANNELS


class Command(BaseCommand):
    help = "Dump shot vs template curves for one channel as CSV (for plotting)."

    def add_arguments(self, parser):
        parser.add_argument("--shot", required=True, help="Session CSV.")
        parser.add_argument("--template", required=True)
        parser.add_argument("--channel", choices=CHANNELS, default="acc_y")
        parser.add_argument("--out", default=None)
        add_config_arguments(parser)

    def handle(self, *args, **options):
        cfg = config_from_options(options)
        try:
            template = read_template(options["template"])
        except (OSError, ValueError, KeyError) as e:
            raise runtime_error("template", e)
        except ShotLabError as e:
            raise runtime_error("template", e)

        try:
            shot = session_to_shot(read_session_file(options["shot"]), cfg)
            aligned, phase = aligned_phase(shot, template, cfg)
        except OSError as e:
            raise runtime_error("ingest", e)
        except ShotLabError as e:
            raise runtime_error("align", e)

        name = options["channel"]
        ys = aligned.channel(name)
        ts = template.channel(name)
        dt = aligned.meta.dt_s

        buf = io.StringIO()
        buf.write(f"# phase_start_s={phase.start_index * dt!r}\n")
        buf.write(f"# phase_end_s={phase.end_index * dt!r}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t_s", "shot", "template", "gap"])
        for k in range(template.grid_len):
            writer.writerow([repr(k * dt), repr(float(ys[k])), repr(float(ts[k])), repr(float(np.abs(ys[k] - ts[k])))])

        if options["out"]:
            try:
                with open(options["out"], "w", encoding="utf-8", newline="") as f:
                    f.write(buf.getvalue())
            except OSError as e:
                raise runtime_error("write", e)
        else:
            self.stdout.write(buf.getvalue(), ending="")
