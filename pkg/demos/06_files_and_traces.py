"""SVMlight files in, trace files out: the same path the command line takes.

Run: python3 demos/06_files_and_traces.py
"""
import tempfile
from pathlib import Path

from quantopt import make_blobs
from quantopt.data import parse_svmlight, serialize_svmlight, SVMLightParseError
from quantopt.harness import ExperimentConfig, read_traces, run_experiment

# Labels may be +1/-1 or 1/0; indices are 1-based in the file.
d = parse_svmlight("+1 1:0.5 3:2.0\n0 2:1.0  # a comment\n")
print("parsed", len(d), "points, dim", d.dim, "p =", d.pos_fraction)

# Every malformed line is reported at once.
try:
    parse_svmlight("1 1:1\n2 1:1\n1 3:x\n")
except SVMLightParseError as exc:
    print("errors:", exc.errors)

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "blobs.svm"
    path.write_text(serialize_svmlight(make_blobs(3000, seed=2)))
    out = Path(tmp) / "trace.csv"
    cfg = ExperimentConfig(data=str(path), measure="qmeasure", max_samples=5000, trace_every=1000, out=str(out))
    run_experiment(cfg)
    print("\n" + "\n".join(out.read_text().splitlines()[:4]))
    print("...", len(read_traces(out, "csv")), "records; metadata in", out.name + ".meta.json")

# Equivalent command line:
#   quantopt --data blobs.svm --measure qmeasure --max-samples 5000 --trace-every 1000 --out trace.csv
