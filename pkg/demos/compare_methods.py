"""Five ways to recover the same signals, from most to least informed.

The planted basis is the identity tiled into blocks, so it is also a
member of the finite catalog and sparse over the identity dictionary.
Each method is run through the experiment driver at a reduced size.
"""

import tempfile

from bcs.experiments import default_config, run_experiment

with tempfile.TemporaryDirectory() as out:
    cfg = default_config("comparative", trials=2, output_dir=out)
    report = run_experiment(cfg)

by_method = {}
for row in report.rows:
    by_method.setdefault(row.method, []).append(row.mean_error_pct)
for method, errs in by_method.items():
    print(f"{method:18s} {sum(errs) / len(errs):.4g}%")
