"""Aerial navigation simulator, semantic mapping, and evaluation harness."""

from .geodesy import Action, MapTransform, Pose, apply_action, euclidean_distance
from .simcore import Episode, FloodSpec, NoiseSpec, Split, is_success, sample_start, step
from .worldmodel import GeneratorParams, Landmark, Scene, SceneObject, generate_scene
from .gsm import DescriptionCues, GsmStack, export_gsm, extract_cues
from .metrics import EvalReport, TrajectoryLog, dataset_stats, evaluate
from .agents import LandmarkPilot, OracleAgent, RandomAgent, oracle_plan, replay, run_episode
from .datastore import Corpus, generate_corpus, load_corpus, make_splits, qc_filter, save_corpus

__version__ = "0.1.0"

__all__ = [
    "Action", "MapTransform", "Pose", "apply_action", "euclidean_distance",
    "Episode", "FloodSpec", "NoiseSpec", "Split", "is_success", "sample_start", "step",
    "GeneratorParams", "Landmark", "Scene", "SceneObject", "generate_scene",
    "DescriptionCues", "GsmStack", "export_gsm", "extract_cues",
    "EvalReport", "TrajectoryLog", "dataset_stats", "evaluate",
    "LandmarkPilot", "OracleAgent", "RandomAgent", "oracle_plan", "replay", "run_episode",
    "Corpus", "generate_corpus", "load_corpus", "make_splits", "qc_filter", "save_corpus",
]
