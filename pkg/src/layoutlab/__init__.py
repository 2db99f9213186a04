"""layoutlab: A* over perfect mazes with AoS and SoA node stores, a
multi-threaded executor, and a trace-driven cache simulator."""

from .cachesim import CacheConfig, CacheReport, LevelConfig, compare_reports, default_config, simulate
from .layoutstore import Field, Layout, MemoryTrace, NodeStore, memory_model_bytes, new_store
from .maze import CellCoord, GridMaze, generate_perfect_maze, load_maze, open_neighbors, save_maze, validate_perfect
from .parallel import ParallelPlan, astar_mt, observed_worker_count
from .search import SearchResult, astar, bfs_oracle, manhattan, reconstruct_path

__version__ = "0.1.0"

__all__ = [
    "CacheConfig", "CacheReport", "LevelConfig", "compare_reports", "default_config", "simulate",
    "Field", "Layout", "MemoryTrace", "NodeStore", "memory_model_bytes", "new_store",
    "CellCoord", "GridMaze", "generate_perfect_maze", "load_maze", "open_neighbors", "save_maze",
    "validate_perfect", "ParallelPlan", "astar_mt", "observed_worker_count",
    "SearchResult", "astar", "bfs_oracle", "manhattan", "reconstruct_path",
]
