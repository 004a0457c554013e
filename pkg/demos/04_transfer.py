"""Learning the frame encoder on one corpus and classifying another.

The autoencoder is trained without labels on the source corpus, then
frozen; only the SVM sees target labels.  The target here has its
fundamentals and noise bands shifted by half again.
"""

import tempfile
from pathlib import Path

from melrp.evaluation import ExperimentConfig, run_experiment, run_transfer
from melrp.features import FrameStore
from melrp.synthetic import make_synthetic_corpus

root = Path(tempfile.mkdtemp())
source = make_synthetic_corpus(root / "a", n_tracks=40, seed=0, name="A")
target = make_synthetic_corpus(root / "b", n_tracks=40, seed=1, f0_scale=1.5, name="B")
src_store, tgt_store = FrameStore(source, root / "a"), FrameStore(target, root / "b")

options = {"max_epochs": 60}  # shortened for the demo

# %% in-dataset baseline: encoder refit inside every training fold
inside = run_experiment(ExperimentConfig(target, "mel-ae", 16, "svm", 5, 0, ae_options=options), tgt_store)
print(f"B -> B (per-fold encoder): {inside.mean:.3f} +/- {inside.std:.3f}")

# %% transfer: one encoder from A, applied to every fold of B
cfg = ExperimentConfig(target, "mel-ae", 16, "svm", 5, 0, ae_options=options)
moved = run_transfer(src_store, tgt_store, 16, cfg)
print(f"A -> B: {moved.mean:.3f} +/- {moved.std:.3f}, sources {moved.config['transfer_sources']}")

# %% combined sources: A and B frames pooled for the encoder
both = run_transfer([src_store, tgt_store], tgt_store, 16, cfg)
print(f"A+B -> B: {both.mean:.3f} +/- {both.std:.3f}")
