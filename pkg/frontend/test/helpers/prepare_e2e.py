"""Build a small corpus and print the shortest-path action script for
its first episode as JSON, for the end-to-end UI smoke test."""

import json
import sys

from aeronav.agents import OracleAgent
from aeronav.datastore import generate_corpus, save_corpus
from aeronav.worldmodel import GeneratorParams

out_dir = sys.argv[1]
corpus = generate_corpus(21, n_scenes=4, episodes_per_scene=3,
                         params=GeneratorParams(extent=600.0, n_objects=120))
save_corpus(corpus, out_dir)

ep = corpus.episodes[0]
scene = corpus.scenes[ep.scene_id]
agent = OracleAgent()
agent.reset(scene, ep)
actions = [a.value for a in agent._plan]
print(json.dumps({
    "scene_id": ep.scene_id,
    "episode_id": ep.id,
    "actions": actions,
}))
