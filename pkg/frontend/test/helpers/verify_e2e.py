"""Check the log persisted by the UI smoke flight: it must survive the
quality-control filter and replay bit-for-bit to a successful landing."""

import sys
from pathlib import Path

from aeronav.agents import replay
from aeronav.datastore import load_corpus, qc_filter, read_logs

corpus_dir = Path(sys.argv[1])
corpus = load_corpus(corpus_dir)
logs = read_logs(corpus_dir / "logs" / "human.jsonl")
assert len(logs) == 1, f"expected one persisted log, found {len(logs)}"

index = corpus.episode_index()
accepted, rejected = qc_filter(logs, index)
assert len(accepted) == 1 and not rejected, "log rejected by qc_filter"

log = logs[0]
ep = index[log.episode_id]
out = replay(log, corpus.scenes[ep.scene_id], ep)
assert out.final_distance <= 20.0, f"replayed flight missed: {out.final_distance:.1f} m"
print("ok")
