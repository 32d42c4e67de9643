from django.core.management.base import BaseCommand, CommandError

from shots.cli import USAGE, add_config_arguments, config_from_options, runtime_error
from shots.exceptions import InvalidParams
from shots.simulator import default_profiles, generate_dataset, load_profiles, write_dataset
from shots.types import SUCCESS


class Command(BaseCommand):
    help = "Write a synthetic kick dataset (shot_<i>.csv + labels.json)."

    def add_arguments(self, parser):
        parser.add_argument("--n", type=int, default=1000, help="Number of shots.")
        parser.add_argument("--profiles", default="default5", help="'default5' or a JSON list of player profiles.")
        parser.add_argument("--seed", type=int, default=0)
        parser.add_argument("--out-dir", required=True)
        add_config_arguments(parser)

    def handle(self, *args, **options):
        if options["n"] < 1:
            raise CommandError("--n must be >= 1", returncode=USAGE)
        if options["seed"] < 0:
            raise CommandError("--seed must be >= 0", returncode=USAGE)
        cfg = config_from_options(options)

        try:
            if options["profiles"] == "default5":
                profiles = default_profiles()
            else:
                profiles = load_profiles(options["profiles"])
        except InvalidParams as e:
            raise CommandError(f"profiles: {e}", returncode=USAGE)

        try:
            shots = generate_dataset(options["n"], profiles, options["seed"], cfg)
            write_dataset(shots, options["out_dir"])
        except InvalidParams as e:
            raise runtime_error("simulate", e)
        except OSError as e:
            raise runtime_error("write", e)

        successes = sum(1 for s in shots if s.label == SUCCESS)
        self.stdout.write(
            f"wrote {len(shots)} shots ({successes} success) over {len(profiles)} players to {options['out_dir']}"
        )
