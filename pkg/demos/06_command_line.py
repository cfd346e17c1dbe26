import json
import subprocess
import sys
import tempfile
from pathlib import Path

# ### The gifw command
#
# `gen` writes a pair of graph6 files plus metadata, `solve` prints one JSON
# object and exits 0 / 1 / 2 for isomorphic / non-isomorphic / inconclusive,
# `presolve` reports fixings only and `bench` runs methods over a directory.


def gifw(*args):
    proc = subprocess.run([sys.executable, "-m", "gifw", *args], capture_output=True, text=True)
    return proc.returncode, proc.stdout


work = Path(tempfile.mkdtemp())
for seed in range(3):
    gifw("gen", "--regular", "30", "3", "--seed", str(seed), "--family", "reg30",
         "--out", str(work / f"iso{seed}"))
    gifw("gen", "--mode", "noniso", "--flips", "2", "--regular", "30", "3", "--seed", str(seed),
         "--family", "reg30-flip", "--out", str(work / f"non{seed}"))
print(sorted(p.name for p in work.iterdir())[:6], "...")

code, out = gifw("solve", str(work / "iso0_A.g6"), str(work / "iso0_B.g6"), "--method", "boscia-star")
doc = json.loads(out)
print("exit", code, doc["status"], "nodes", doc["stats"]["nodes"], "fixings", doc["stats"]["fixings_fraction"])

code, out = gifw("presolve", str(work / "iso1_A.g6"), str(work / "iso1_B.g6"))
print("presolve:", out.strip())

# `bench` reports the shifted geometric mean of solve times (shift 1 s),
# counting unsolved runs at the time limit.

code, out = gifw("bench", str(work), "--methods", "boscia-dfs,boscia-clique-star",
                 "--time-limit-ms", "20000", "--format", "json")
for row in json.loads(out)["summary"]:
    print(row)
