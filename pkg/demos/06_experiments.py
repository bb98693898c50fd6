"""
Running the experiments
=======================

Every limit theorem has a named experiment with a config, a JSON report and
a CSV of samples. The same runs are available from the shell as
``betacoal <name> --alpha ... --out-dir ...``.
"""

import tempfile

from betacoal import experiments as ex
from betacoal.errors import ConfigError

out = tempfile.mkdtemp(prefix="betacoal-")

# These runs are small, so verdicts are not the point: at 300 replicates the
# KS distance between two samples of the same law is often near 0.1, and the
# speed check at t = 0.05 sees both finite-t and finite-n effects (compare
# statistics["finite_n_prediction"] in the report).
runs = {
    "poisson": ex.ExperimentConfig(alpha=1.5, reps=1000),
    "speed": ex.ExperimentConfig(alpha=1.5, t=0.05, reps=100),
    "rfluct": ex.ExperimentConfig(alpha=1.5, t=1e-3, step=1e-6, reps=300),
    "csbp": ex.ExperimentConfig(alpha=1.5, t=1.0, step=1e-3, reps=5000),
}
for name, cfg in runs.items():
    rep = ex.EXPERIMENTS[name](cfg)
    json_path, csv_path = ex.write_outputs(rep, out)
    print(f"{name}: passed={rep.passed}  ({rep.runtime_seconds:.1f}s)")
    for key, v in rep.verdicts.items():
        print(f"    {key}: measured {v['measured']}, tolerance {v['tolerance']}")

# Below the 50 v(t) gate a run is refused unless explicitly overridden.
try:
    ex.run_clt_experiment(ex.ExperimentConfig(alpha=1.5, t=0.02, n_blocks=10**4))
except ConfigError as exc:
    print("refused:", exc)

print("outputs in", out)
