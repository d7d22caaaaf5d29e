"""
Maze benchmark toolkit: grids, ground truth, generation, rendering,
datasets, grading, evaluation runs and reports.

Submodules are imported directly (e.g. `from maze.generator import generate`);
`maze.harness` pulls in the provider adapters and is not imported here.
"""
__version__ = "1.0.0"
