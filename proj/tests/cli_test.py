"""End-to-end checks of the mils_cli binary.

Usage: cli_test.py PATH_TO_MILS_CLI SOURCE_DIR
"""

import filecmp
import json
import math
import os
import subprocess
import sys
import tempfile
import unittest
from pathlib import Path

import jsonschema

CLI = ""
SRC = Path()


def run(*args, env=None, check=True):
    proc = subprocess.run([CLI, *map(str, args)], capture_output=True, text=True, env=env)
    if check and proc.returncode != 0:
        raise AssertionError(f"{args} exited {proc.returncode}: {proc.stderr}")
    return proc


def same_tree(a: Path, b: Path) -> bool:
    cmp = filecmp.dircmp(a, b)
    if cmp.left_only or cmp.right_only or cmp.funny_files:
        return False
    _, mismatch, errors = filecmp.cmpfiles(a, b, cmp.common_files, shallow=False)
    if mismatch or errors:
        return False
    return all(same_tree(a / d, b / d) for d in cmp.common_dirs)


def read_pbm_p1(path: Path):
    tokens = [line for line in path.read_text().splitlines() if not line.startswith("#")]
    assert tokens[0] == "P1"
    width, height = map(int, tokens[1].split())
    rows = tokens[2:]
    assert len(rows) == height and all(len(r) == width for r in rows)
    return rows


class CliTest(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def write(self, name, text):
        p = self.tmp / name
        p.write_text(text)
        return p

    # ctm-gen ---------------------------------------------------------------

    def test_ctm_gen_is_deterministic(self):
        run("ctm-gen", "--states", 2, "--max-steps", 6, "--out", self.tmp / "a.csv")
        run("--workers", 4, "ctm-gen", "--states", 2, "--max-steps", 6, "--out", self.tmp / "b.csv")
        self.assertTrue(filecmp.cmp(self.tmp / "a.csv", self.tmp / "b.csv", shallow=False))
        self.assertIn("kind,dims,bits,value", (self.tmp / "a.csv").read_text())

    def test_ctm_gen_rejects_zero_states(self):
        proc = run("ctm-gen", "--states", 0, "--max-steps", 6, "--out", self.tmp / "x.csv", check=False)
        self.assertEqual(proc.returncode, 2)
        self.assertFalse((self.tmp / "x.csv").exists())

    # complexity --------------------------------------------------------------

    def test_complexity_single_block_case(self):
        table = SRC / "data" / "ctm-b2-d4x4.csv"
        zero = None
        for line in table.read_text().splitlines():
            if line.startswith("array,4x4,0000000000000000,"):
                zero = float(line.split(",")[3])
        self.assertIsNotNone(zero)
        matrix = self.write("zero.txt", "00000000\n" * 8)
        out = run("complexity", "--input", matrix, "--table", table).stdout.strip()
        self.assertEqual(out, f"{2.0 + zero:.6f}")
        # The table directory can also come from the environment.
        env = dict(os.environ, MILS_TABLE_PATH=str(SRC / "data"))
        self.assertEqual(run("complexity", "--input", matrix, env=env).stdout.strip(), out)

    def test_complexity_entropy_of_uniform_input(self):
        matrix = self.write("ones.txt", "11111111\n" * 8)
        self.assertEqual(run("complexity", "--input", matrix, "--method", "entropy").stdout.strip(), "0.000000")

    def test_complexity_missing_block(self):
        run("ctm-gen", "--states", 1, "--max-steps", 3, "--out", self.tmp / "t1.csv")
        string = self.write("s.txt", "010110100111001011\n")
        proc = run("complexity", "--input", string, "--table", self.tmp / "t1.csv", check=False)
        self.assertNotEqual(proc.returncode, 0)
        self.assertIn("MissingBlock", proc.stderr)

    # sparsify ----------------------------------------------------------------

    def test_sparsify_k4_collapses(self):
        k4 = self.write("k4.edges", "0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n")
        run("sparsify", "--graph", k4, "--method", "mils", "--target", 0, "--out", self.tmp / "k4")
        edges = [l for l in (self.tmp / "k4" / "reduced.edges").read_text().splitlines()
                 if l and not l.startswith("#") and " " in l]
        self.assertEqual(edges, [])
        trace = json.loads((self.tmp / "k4" / "trace.json").read_text())
        self.assertEqual(len(trace["steps"]), 1)
        self.assertEqual(trace["final_edges"], 0)

    def test_sparsify_random_is_reproducible(self):
        g = self.write("g.edges", "".join(f"{i} {j}\n" for i in range(8) for j in range(i + 1, 8) if (i + j) % 3))
        for name in ("a", "b"):
            run("sparsify", "--graph", g, "--method", "random", "--target", 5, "--seed", 9,
                "--out", self.tmp / name)
        self.assertTrue(same_tree(self.tmp / "a", self.tmp / "b"))

    def test_sparsify_target_too_large(self):
        g = self.write("g.edges", "0 1\n1 2\n")
        proc = run("sparsify", "--graph", g, "--method", "random", "--target", 3, "--out", self.tmp / "o",
                   check=False)
        self.assertEqual(proc.returncode, 2)

    def test_sparsify_worker_count_does_not_matter(self):
        pairs = sorted({tuple(sorted((i, (i * 7 + 3) % 30))) for i in range(30)} |
                       {tuple(sorted((i, (i * i + 1) % 30))) for i in range(30)})
        g = self.write("g.edges", "".join(f"{u} {v}\n" for u, v in pairs if u != v))
        run("--workers", 1, "sparsify", "--graph", g, "--method", "mils", "--target", 10, "--out", self.tmp / "w1")
        run("--workers", 8, "sparsify", "--graph", g, "--method", "mils", "--target", 10, "--out", self.tmp / "w8")
        self.assertTrue(same_tree(self.tmp / "w1", self.tmp / "w8"))

    def test_sparsify_baselines(self):
        dag = self.write("dag.edges", "directed\n0 1\n1 2\n0 2\n2 3\n0 3\n")
        run("sparsify", "--graph", dag, "--method", "transitive", "--target", 0, "--out", self.tmp / "tr")
        kept = [l for l in (self.tmp / "tr" / "reduced.edges").read_text().splitlines()
                if " " in l and not l.startswith("#")]
        self.assertEqual(sorted(kept), ["0 1", "1 2", "2 3"])
        k5 = self.write("k5.edges", "".join(f"{i} {j}\n" for i in range(5) for j in range(i + 1, 5)))
        run("sparsify", "--graph", k5, "--method", "spectral", "--target", 0, "--seed", 3, "--out", self.tmp / "sp")
        trace = json.loads((self.tmp / "sp" / "trace.json").read_text())
        self.assertEqual(len(trace["weights"]), 10)
        run("sparsify", "--graph", k5, "--method", "spanning-tree", "--target", 0, "--out", self.tmp / "st")
        self.assertEqual(json.loads((self.tmp / "st" / "trace.json").read_text())["final_edges"], 4)

    # evaluate ----------------------------------------------------------------

    def experiment(self, schedule, out="report"):
        cfg = {
            "inputs": [{"generator": {"model": "gnm", "nodes": 40, "edges": 80, "seed": s}} for s in (1, 2)],
            "methods": [{"method": "mils"}, {"method": "mils-seq"}, {"method": "random", "seeds": [1, 2, 3]}],
            "metrics": ["degree", "betweenness", "edge-betweenness", "eigenvector"],
            "schedule": schedule,
            "output": out,
        }
        return self.write("experiment.json", json.dumps(cfg))

    def validate_report(self, path: Path):
        schema = json.loads((SRC / "schema" / "mils-report.schema.json").read_text())
        report = json.loads(path.read_text())
        jsonschema.validate(report, schema)
        return report

    def test_evaluate_without_deletion(self):
        cfg = self.experiment({"removed": [0]})
        run("evaluate", "--config", cfg)
        report = self.validate_report(self.tmp / "report" / "report.json")
        for entry in report["inputs"]:
            for r in entry["runs"]:
                for m in r["metrics"].values():
                    self.assertEqual(m["tv"], 0)
                    self.assertEqual(m["intersection"], 1)

    def test_evaluate_report_and_artifacts(self):
        cfg = self.experiment({"removed": [0, 20, 40]})
        run("evaluate", "--config", cfg, "--out", self.tmp / "r1")
        run("--workers", 4, "evaluate", "--config", cfg, "--out", self.tmp / "r2")
        self.assertTrue(same_tree(self.tmp / "r1", self.tmp / "r2"))
        report = self.validate_report(self.tmp / "r1" / "report.json")
        self.assertEqual(report["schema"], "mils-report/1")
        first = report["inputs"][0]
        self.assertEqual(first["schedule"], [80, 60, 40])
        self.assertEqual(len(first["runs"]), (1 + 1 + 3) * 3)
        for r in first["runs"]:
            if r["trace"]:
                self.assertTrue((self.tmp / "r1" / r["trace"]).exists())
        csvs = sorted((self.tmp / "r1" / "histograms").glob("*.csv"))
        self.assertTrue(csvs)
        for c in csvs:
            lines = c.read_text().splitlines()
            self.assertEqual(lines[0], "bin_low,bin_high,count")
            self.assertTrue(all(len(l.split(",")) == 3 for l in lines[1:]))
        degree_csv = (self.tmp / "r1" / "histograms" / "gnm-1-original-degree.csv").read_text().splitlines()
        self.assertEqual(len(degree_csv) - 1, len(first["original"]["degree"]))
        self.assertEqual(len(first["original"]["edge-betweenness"]), 20)

    def test_evaluate_missing_input(self):
        cfg = self.write("bad.json", json.dumps({
            "inputs": ["does-not-exist.edges"], "methods": [{"method": "random"}], "schedule": {"removed": [0]}}))
        proc = run("evaluate", "--config", cfg, check=False)
        self.assertNotEqual(proc.returncode, 0)
        self.assertIn("does-not-exist.edges", proc.stderr)

    # eca ----------------------------------------------------------------------

    def test_eca_rule_0(self):
        run("eca", "--rule", 0, "--width", 21, "--steps", 5, "--out", self.tmp / "e")
        rows = read_pbm_p1(self.tmp / "e" / "diagram.pbm")
        self.assertEqual(rows[0], "0" * 10 + "1" + "0" * 10)
        self.assertTrue(all(r == "0" * 21 for r in rows[1:]))

    def test_eca_rejects_incompatible_regions(self):
        proc = run("eca", "--rule", 22, "--width", 101, "--steps", 100, "--coarse-grain", "8,0.6",
                   "--out", self.tmp / "e", check=False)
        self.assertNotEqual(proc.returncode, 0)
        self.assertIn("crop to 96", proc.stderr)

    def test_eca_coarse_grain(self):
        args = ("eca", "--rule", 22, "--width", 104, "--steps", 103, "--coarse-grain", "8,0.6")
        run(*args, "--out", self.tmp / "a")
        run("--workers", 4, *args, "--out", self.tmp / "b")
        self.assertTrue(same_tree(self.tmp / "a", self.tmp / "b"))
        regions = json.loads((self.tmp / "a" / "regions.json").read_text())
        self.assertEqual(regions["regions"], 169)
        self.assertGreaterEqual(len(regions["masked"]), math.ceil(0.4 * 169))
        self.assertEqual(len(regions["ranking"]), 169)
        mask = read_pbm_p1(self.tmp / "a" / "mask.pbm")
        diagram = read_pbm_p1(self.tmp / "a" / "diagram.pbm")
        self.assertEqual(len(diagram), 104)
        masked = set(regions["masked"])
        for r in range(104):
            for c in range(104):
                self.assertEqual(mask[r][c] == "1", (r // 8) * 13 + c // 8 in masked)


if __name__ == "__main__":
    CLI = sys.argv[1]
    SRC = Path(sys.argv[2])
    unittest.main(argv=[sys.argv[0], "-v"])
