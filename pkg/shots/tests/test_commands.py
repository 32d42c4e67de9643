import io
import json
import socket
import tempfile
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from shots.scoring import EVENT_KEYS


def run(*args):
    out, err = io.StringIO(), io.StringIO()
    call_command(*args, stdout=out, stderr=err)
    return out.getvalue(), err.getvalue()


class CommandTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls._tmp = tempfile.TemporaryDirectory()
        cls.root = Path(cls._tmp.name)
        cls.data = cls.root / "data"
        run("simulate", "--n", "40", "--seed", "7", "--out-dir", str(cls.data))
        cls.template = cls.root / "template.json"
        cls.model = cls.root / "model.json"
        run(
            "train", "--data-dir", str(cls.data),
            "--template-out", str(cls.template), "--model-out", str(cls.model),
        )

    @classmethod
    def tearDownClass(cls):
        cls._tmp.cleanup()
        super().tearDownClass()

    # ---------- simulate ----------

    def test_simulate_is_byte_identical_for_a_seed(self):
        again = self.root / "again"
        run("simulate", "--n", "40", "--seed", "7", "--out-dir", str(again))
        for path in sorted(self.data.iterdir()):
            self.assertEqual(path.read_bytes(), (again / path.name).read_bytes(), path.name)
        labels = json.loads((self.data / "labels.json").read_text())
        self.assertEqual(len(labels), 40)

    def test_simulate_rejects_zero_shots(self):
        with self.assertRaises(CommandError) as ctx:
            run("simulate", "--n", "0", "--out-dir", str(self.root / "none"))
        self.assertEqual(ctx.exception.returncode, 2)

    # ---------- train ----------

    def test_train_is_deterministic(self):
        template, model = self.root / "t2.json", self.root / "m2.json"
        run("train", "--data-dir", str(self.data), "--template-out", str(template), "--model-out", str(model))
        self.assertEqual(template.read_bytes(), self.template.read_bytes())
        self.assertEqual(model.read_bytes(), self.model.read_bytes())
        self.assertEqual(json.loads(model.read_text())["feature_names"][0], "rmse_acc_y")

    def test_train_needs_labels_for_every_file(self):
        labels = self.root / "partial.json"
        labels.write_text(json.dumps({"shot_0": "success"}))
        with self.assertRaises(CommandError) as ctx:
            run(
                "train", "--data-dir", str(self.data), "--labels", str(labels),
                "--template-out", str(self.root / "x.json"), "--model-out", str(self.root / "y.json"),
            )
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn("labels", str(ctx.exception))

    def test_train_without_successes(self):
        labels = {f"shot_{i}": "fail" for i in range(40)}
        path = self.root / "all_fail.json"
        path.write_text(json.dumps(labels))
        with self.assertRaises(CommandError) as ctx:
            run(
                "train", "--data-dir", str(self.data), "--labels", str(path),
                "--template-out", str(self.root / "x.json"), "--model-out", str(self.root / "y.json"),
            )
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn("NoSuccessfulShots", str(ctx.exception))

    def test_bad_override_is_a_usage_error(self):
        with self.assertRaises(CommandError) as ctx:
            run("train", "--data-dir", str(self.data), "--set", "bogus=1")
        self.assertEqual(ctx.exception.returncode, 2)

    # ---------- score ----------

    def score(self, *extra):
        return run(
            "score", "--input", str(self.data),
            "--template", str(self.template), "--model", str(self.model), *extra,
        )

    def test_score_json_lines(self):
        out, _ = self.score()
        lines = [json.loads(line) for line in out.splitlines()]
        self.assertIn("summary", lines[-1])
        events = lines[:-1]
        self.assertEqual(tuple(events[0]), EVENT_KEYS)
        self.assertEqual([e["shot_index"] for e in events], sorted(e["shot_index"] for e in events))
        self.assertEqual(lines[-1]["summary"]["count"], len(events))
        self.assertEqual(out, self.score()[0])

    def test_score_csv(self):
        out, err = self.score("--format", "csv")
        rows = out.splitlines()
        self.assertEqual(rows[0], ",".join(EVENT_KEYS))
        self.assertIn('"summary"', err)

    def test_score_diagnostics_go_to_stderr(self):
        out, err = self.score("--diagnostics")
        self.assertEqual(out, self.score()[0])
        events = [json.loads(line) for line in out.splitlines()][:-1]
        details = [json.loads(line)["diagnostics"] for line in err.splitlines() if '"diagnostics"' in line]
        self.assertEqual([d["shot_index"] for d in details], [e["shot_index"] for e in events])
        self.assertEqual(len(details[0]["channel_rmse"]), 6)
        self.assertIn("peak_leg_angle_deg", details[0])

    def test_score_to_file(self):
        target = self.root / "scores.ndjson"
        out, _ = self.score("--output", str(target))
        self.assertEqual(out, "")
        self.assertEqual(target.read_text(), self.score()[0])

    def test_score_missing_artifacts(self):
        with self.assertRaises(CommandError) as ctx:
            run("score", "--input", str(self.data), "--template", str(self.root / "nope.json"), "--model", str(self.model))
        self.assertEqual(ctx.exception.returncode, 1)

    def test_score_unreadable_input(self):
        broken = self.root / "broken"
        broken.mkdir(exist_ok=True)
        (broken / "shot_0.csv").write_text("not,a,log\n")
        with self.assertRaises(CommandError) as ctx:
            run("score", "--input", str(broken), "--template", str(self.template), "--model", str(self.model))
        self.assertEqual(ctx.exception.returncode, 1)

    # ---------- plotdata / ingest / report ----------

    def test_plotdata(self):
        out, _ = run(
            "plotdata", "--shot", str(self.data / "shot_0.csv"),
            "--template", str(self.template), "--channel", "gyro_z",
        )
        lines = out.splitlines()
        self.assertTrue(lines[0].startswith("# phase_start_s="))
        self.assertTrue(lines[1].startswith("# phase_end_s="))
        self.assertEqual(lines[2], "t_s,shot,template,gap")
        self.assertEqual(len(lines), 3 + 49)

    def test_ingest_reports_gaps(self):
        out, _ = run("ingest", "--input", str(self.data))
        rows = [json.loads(line) for line in out.splitlines()]
        self.assertEqual(len(rows), 40)
        self.assertEqual(rows[0]["file"], "shot_0.csv")
        self.assertIn("loss_fraction", rows[0])

    def test_report_per_player(self):
        scores = self.root / "for_report.ndjson"
        self.score("--output", str(scores))
        out, _ = run("report", "--scores", str(scores))
        lines = out.splitlines()
        self.assertTrue(lines[0].startswith("player"))
        self.assertEqual(len(lines), 1 + 5)

    # ---------- serve ----------

    def test_serve_bind_failure(self):
        with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as blocker:
            blocker.bind(("127.0.0.1", 0))
            blocker.listen(1)
            port = blocker.getsockname()[1]
            with self.assertRaises(CommandError) as ctx:
                run(
                    "serve", "--listen", f"127.0.0.1:{port}",
                    "--template", str(self.template), "--model", str(self.model),
                )
        self.assertEqual(ctx.exception.returncode, 1)
