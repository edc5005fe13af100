"""End-to-end checks of the klrace command line: exit codes, report schema,
corpus gate and determinism.

Usage: test_cli.py <klrace executable> <source dir>
"""

import json
import os
import shutil
import subprocess
import sys
import tempfile
import unittest

import jsonschema

KLRACE = None
ROOT = None


def corpus(*parts):
    return os.path.join(ROOT, "corpus", *parts)


def run(*args, env=None):
    return subprocess.run([KLRACE, *args], capture_output=True, text=True, env=env, timeout=120)


def strip_timing(doc):
    if isinstance(doc, dict):
        return {k: strip_timing(v) for k, v in doc.items() if k != "timing"}
    if isinstance(doc, list):
        return [strip_timing(v) for v in doc]
    return doc


class Cli(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        with open(os.path.join(ROOT, "schema", "report.schema.json")) as f:
            cls.schema = json.load(f)
        jsonschema.Draft202012Validator.check_schema(cls.schema)

    def report(self, *args):
        p = run(*args, "--output", "json")
        doc = json.loads(p.stdout)
        jsonschema.validate(doc, self.schema)
        self.assertEqual(doc["exit_code"], p.returncode)
        return doc, p.returncode

    def test_analyze_exit_codes(self):
        cases = {
            "benign_const_store.kl": (0, "race-free"),
            "tid_store.kl": (1, "potential-race"),
            "disjoint_store.kl": (0, "race-free"),
            "oob.kl": (2, "definite-error"),
            "fig1.kl": (2, "definite-error"),
            "counter_loop.kl": (3, "inconclusive"),
        }
        for kernel, (code, verdict) in cases.items():
            with self.subTest(kernel=kernel):
                doc, rc = self.report(corpus(kernel))
                self.assertEqual(rc, code)
                self.assertEqual(doc["analyzer"]["verdict"], verdict)
                self.assertIsNone(doc["oracle"])

    def test_text_and_json_agree_on_exit_code(self):
        for kernel in ["benign_const_store.kl", "tid_store.kl", "oob.kl", "counter_loop.kl"]:
            args = ["--mode", "both", "--threads", "2", "--inputs", corpus("inputs", "A4.txt"), corpus(kernel)]
            if kernel == "counter_loop.kl":
                args[5] = corpus("inputs", "counter.txt")
            with self.subTest(kernel=kernel):
                self.assertEqual(run(*args).returncode, run(*args, "--output", "json").returncode)

    def test_fig2_known_unsound_miss(self):
        doc, rc = self.report("--mode", "both", "--threads", "2", "--inputs", corpus("inputs", "fig2.txt"),
                              corpus("fig2.kl"))
        self.assertEqual(doc["analyzer"]["verdict"], "race-free")
        self.assertEqual(doc["oracle"]["verdict"], "race")
        self.assertEqual(doc["agreement"], "known-unsound-miss")
        self.assertEqual(rc, 1)
        w = doc["oracle"]["witness"]
        self.assertNotEqual(w["schedule"], w["alternative"])

    def test_race_witness_triple(self):
        doc, _ = self.report(corpus("tid_store.kl"))
        race = doc["analyzer"]["findings"][0]["race"]
        self.assertEqual(race["location"], "A[k]")
        self.assertTrue(race["value_i"] and race["value_j"] and race["condition"])

    def test_oracle_strict_mode(self):
        doc, rc = self.report("--mode", "oracle", "--oracle-semantics", "strict", "--threads", "2", "--inputs",
                              corpus("inputs", "A4.txt"), corpus("disjoint_store.kl"))
        self.assertIsNone(doc["analyzer"])
        self.assertEqual(doc["config"]["oracle_semantics"], "strict")
        self.assertIn(rc, (0, 1))

    def test_usage_errors(self):
        self.assertEqual(run().returncode, 4)
        self.assertEqual(run("--bogus").returncode, 4)
        self.assertEqual(run(corpus("missing.kl")).returncode, 4)
        self.assertEqual(run("--mode", "oracle", corpus("tid_store.kl")).returncode, 4)  # no inputs
        self.assertEqual(run("--require", "nthreads <", corpus("tid_store.kl")).returncode, 4)
        with tempfile.TemporaryDirectory() as d:
            bad = os.path.join(d, "bad.kl")
            with open(bad, "w") as f:
                f.write("kernel(int A[]) { A[0] = ; }")
            p = run(bad)
            self.assertEqual(p.returncode, 4)
            self.assertIn("parse failed", p.stderr)
            inputs = os.path.join(d, "in.txt")
            with open(inputs, "w") as f:
                f.write("A = [1, x]\n")
            p = run("--mode", "oracle", "--inputs", inputs, corpus("tid_store.kl"))
            self.assertEqual(p.returncode, 4)
            self.assertIn("inputs line 1", p.stderr)

    def test_solver_from_environment(self):
        with tempfile.TemporaryDirectory() as d:
            solver = os.path.join(d, "solver.sh")
            with open(solver, "w") as f:
                f.write("#!/bin/sh\necho unknown\n")
            os.chmod(solver, 0o755)
            env = dict(os.environ, KLRACE_SOLVER=solver)
            p = run(corpus("tid_store.kl"), "--output", "json", env=env)
            doc = json.loads(p.stdout)
            self.assertEqual(doc["config"]["solver"], solver)
            self.assertEqual(doc["analyzer"]["verdict"], "potential-race")

    def test_corpus_check_and_determinism(self):
        a = run("corpus-check", "--output", "json")
        b = run("corpus-check", "--output", "json")
        self.assertEqual(a.returncode, 0, a.stdout)
        da, db = json.loads(a.stdout), json.loads(b.stdout)
        jsonschema.validate(da, self.schema)
        self.assertEqual(json.dumps(strip_timing(da), sort_keys=True), json.dumps(strip_timing(db), sort_keys=True))
        self.assertEqual(run("corpus-check", "--output", "json", "--no-timing").stdout,
                         run("corpus-check", "--output", "json", "--no-timing").stdout)

    def test_tampered_manifest(self):
        with tempfile.TemporaryDirectory() as d:
            shutil.copytree(corpus(), os.path.join(d, "corpus"))
            path = os.path.join(d, "corpus", "manifest.json")
            with open(path) as f:
                doc = json.load(f)
            doc["kernels"][0]["expect"]["analyzer"] = "potential-race"
            with open(path, "w") as f:
                json.dump(doc, f)
            p = run("corpus-check", "--manifest", path)
            self.assertNotEqual(p.returncode, 0)
            self.assertIn("analyzer: expected potential-race, observed race-free", p.stdout)
            self.assertIn("DRIFT", p.stdout)


if __name__ == "__main__":
    KLRACE, ROOT = sys.argv[1], sys.argv[2]
    unittest.main(argv=sys.argv[:1], verbosity=2)
