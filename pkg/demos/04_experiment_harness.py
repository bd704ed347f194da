"""
Repeated experiments and their files
====================================

``run_experiment`` repeats sampling and scoring on fixed data and writes
JSON reports plus plot-ready CSV. The same run is available from the shell
as ``python3 -m ta2s2 experiment``.
"""

# %%
import json
import tempfile
from pathlib import Path

from ta2s2.experiment import ExperimentSpec, run_experiment
from ta2s2.tmcmc import RunConfig

out = Path(tempfile.mkdtemp(prefix="ta2s2-demo-"))
spec = ExperimentSpec(model="wing_weight", n_train=40, n_test=100, repeats=2,
                      run=RunConfig(N=200, seed=11), output_dir=str(out))
summary = run_experiment(spec)

# %%
for r in summary["repeats"]:
    print(r["repeat"], r["status"], r["levels"], "levels",
          {k: round(v, 4) for k, v in r["mean_crps"].items()})
print("files:", sorted(p.relative_to(out).as_posix() for p in out.rglob("*") if p.is_file()))

# %%
report = json.loads((out / "repeat_000" / "report.json").read_text())
print("report keys:", sorted(report))
print("MAP sample:", report["samples_summary"]["map"])
