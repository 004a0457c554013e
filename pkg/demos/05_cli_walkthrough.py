"""The command-line workflow: extract, evaluate, report.

Equivalent shell session, run from this directory after rendering a corpus:

    melrp extract --manifest corpus/manifest.csv --family mel-rp --dims 26 --seed 0 --cache cache
    melrp evaluate --config example_config.yaml --out results
    melrp report --results results --out results/summary

Here the same calls go through ``melrp.cli.main`` inside a scratch copy.
"""

import shutil
import tempfile
from pathlib import Path

from melrp.cli import main
from melrp.synthetic import make_synthetic_corpus

work = Path(tempfile.mkdtemp())
make_synthetic_corpus(work / "corpus", n_tracks=40, seed=0)
shutil.copy(Path(__file__).with_name("example_config.yaml"), work / "config.yaml")

# %% precompute track vectors; a second run finds everything in the cache
for _ in range(2):
    code = main(["extract", "--manifest", str(work / "corpus/manifest.csv"), "--family", "mel-rp",
                 "--dims", "26", "--seed", "0", "--cache", str(work / "cache")])
    print("exit", code)

# %% the sweep from the config: one JSON per dimensionality plus a sweep CSV
print("exit", main(["evaluate", "--config", str(work / "config.yaml"), "--out", str(work / "results")]))
for path in sorted((work / "results").iterdir()):
    print("  ", path.name)

# %% best setting per dataset / family / classifier
print("exit", main(["report", "--results", str(work / "results"), "--out", str(work / "summary")]))

# %% a broken config names the offending field and exits with 2
(work / "bad.yaml").write_text("dataset: {manifest: corpus/manifest.csv}\nfamily: mel-xx\n")
print("exit", main(["evaluate", "--config", str(work / "bad.yaml")]))
