"""
mrtapf: multi-robot task assignment and path finding on grid maps.

Goals are assigned to robots by greedy insertion refined with simulated
annealing, then conflict-free timed paths are planned with recurrent
conflict-based search.
"""

__version__ = '0.1.0'
