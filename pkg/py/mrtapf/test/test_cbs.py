import unittest

import numpy as np

from mrtapf.util import Deadline, TimeLimitExceeded
from mrtapf.gridmap import GridMap
from mrtapf.distance import shortest_dist
from mrtapf.conflict import VERTEX, EDGE, find_conflicts, step_conflict
from mrtapf.cbs import (Path, LowLevelExhausted, UnreachableGoal, CBSLimitExceeded,
                        vertex_constraint, edge_constraint, low_level_search,
                        detect_first_conflict, cbs_solve)
from mrtapf.validate import joint_state_optimum
from .util import ascii_map, empty_map, is_legal_path, long_tests


def random_micro_instance(rng, nrobots):
    """Random map of at most 5x5 with distinct starts and goals"""
    width, height = rng.integers(2, 6, size=2)
    mask = rng.random((height, width)) < 0.2
    gridmap = GridMap.from_mask(mask)
    free = gridmap.free_cells()
    if len(free) < nrobots:
        return None
    starts = [free[i] for i in rng.choice(len(free), size=nrobots, replace=False)]
    goals = [free[i] for i in rng.choice(len(free), size=nrobots, replace=False)]
    return gridmap, starts, goals


class TestConflicts(unittest.TestCase):

    def test_step_conflict(self):
        self.assertEqual(step_conflict((0, 0), (1, 0), (2, 0), (1, 0)), VERTEX)
        self.assertEqual(step_conflict((0, 0), (1, 0), (1, 0), (0, 0)), EDGE)
        #- following into a vacated cell is allowed
        self.assertIsNone(step_conflict((0, 0), (1, 0), (1, 0), (2, 0)))
        self.assertIsNone(step_conflict((0, 0), (0, 0), (1, 0), (1, 0)))

    def test_none(self):
        self.assertIsNone(detect_first_conflict([Path([(0, 0)]), Path([(2, 2)])]))

    def test_vertex(self):
        c = detect_first_conflict([Path([(0, 0), (1, 0)]), Path([(2, 0), (1, 0)])])
        self.assertEqual((c.robots, c.kind, c.u, c.t), ((0, 1), VERTEX, (1, 0), 1))

    def test_edge(self):
        c = detect_first_conflict([Path([(0, 0), (1, 0)]), Path([(1, 0), (0, 0)])])
        self.assertEqual((c.robots, c.kind, c.u, c.v, c.t), ((0, 1), EDGE, (0, 0), (1, 0), 0))

    def test_padding(self):
        #- robot 0 stays on (1,0) after arriving; robot 1 passes through at t=2
        paths = [Path([(0, 0), (1, 0)]), Path([(3, 0), (2, 0), (1, 0), (0, 0)])]
        c = detect_first_conflict(paths)
        self.assertEqual((c.robots, c.kind, c.u, c.t), ((0, 1), VERTEX, (1, 0), 2))

    def test_order(self):
        #- vertex at t=1 for (1,2) comes before the edge conflict at t=1 for (0,3)
        cells = [
            [(0, 0), (1, 0), (2, 0)],
            [(0, 2), (1, 2), (1, 2)],
            [(2, 2), (1, 2), (1, 2)],
            [(3, 0), (2, 0), (1, 0)],
        ]
        conflicts = find_conflicts(cells)
        self.assertEqual(conflicts[0].kind, VERTEX)
        self.assertEqual(conflicts[0].robots, (1, 2))
        self.assertEqual(conflicts[0].t, 1)
        kinds = [(c.t, c.kind) for c in conflicts]
        self.assertIn((1, EDGE), kinds)


class TestLowLevel(unittest.TestCase):

    def test_unconstrained(self):
        path = low_level_search(empty_map(3, 3), (0, 0), (2, 0))
        self.assertEqual(path.cost, 2)
        self.assertEqual(path.cells, ((0, 0), (1, 0), (2, 0)))

    def test_vertex_constraint(self):
        path = low_level_search(empty_map(3, 3), (0, 0), (2, 0),
                                [vertex_constraint(0, (1, 0), 1)])
        self.assertEqual(path.cost, 3)
        self.assertNotEqual(path.at(1), (1, 0))
        self.assertTrue(is_legal_path(empty_map(3, 3), path.cells))

    def test_edge_constraint(self):
        g = empty_map(3, 1)
        path = low_level_search(g, (0, 0), (2, 0), [edge_constraint(0, (0, 0), (1, 0), 0)])
        self.assertEqual(path.cells, ((0, 0), (0, 0), (1, 0), (2, 0)))

    def test_identity(self):
        path = low_level_search(empty_map(3, 3), (1, 1), (1, 1))
        self.assertEqual(path.cost, 0)
        self.assertEqual(path.cells, ((1, 1),))

    def test_goal_constraint_later(self):
        #- the robot must not be on its goal at t=4 so it cannot stop before t=5
        g = empty_map(3, 3)
        path = low_level_search(g, (0, 0), (2, 0), [vertex_constraint(0, (2, 0), 4)])
        self.assertEqual(path.cost, 5)
        self.assertNotEqual(path.at(4), (2, 0))
        self.assertEqual(path.cells[-1], (2, 0))

    def test_tie_break_deterministic(self):
        a = low_level_search(empty_map(4, 4), (0, 0), (3, 3))
        b = low_level_search(empty_map(4, 4), (0, 0), (3, 3))
        self.assertEqual(a, b)
        self.assertEqual(a.cost, 6)

    def test_exhausted(self):
        g = ascii_map('.@.')
        with self.assertRaises(LowLevelExhausted):
            low_level_search(g, (0, 0), (2, 0))
        with self.assertRaises(ValueError):
            low_level_search(g, (0, 0), (1, 0))

    def test_constraint_t(self):
        with self.assertRaises(ValueError):
            vertex_constraint(0, (0, 0), 0)


class TestCBS(unittest.TestCase):

    def test_disjoint_rows(self):
        g = empty_map(4, 3)
        starts, goals = [(0, 0), (0, 2)], [(3, 0), (2, 2)]
        stats = dict()
        paths = cbs_solve(g, starts, goals, stats=stats)
        self.assertEqual(sum(p.cost for p in paths), 5)
        self.assertEqual(stats['expanded'], 1)
        self.assertEqual(stats['soc'], 5)

    def test_swap_3x2(self):
        g = empty_map(3, 2)
        starts, goals = [(0, 0), (2, 0)], [(2, 0), (0, 0)]
        paths = cbs_solve(g, starts, goals)
        self.assertEqual(sum(p.cost for p in paths), 6)
        self.assertIsNone(detect_first_conflict(paths))
        for p, s, goal in zip(paths, starts, goals):
            self.assertEqual(p.cells[0], s)
            self.assertEqual(p.cells[-1], goal)
            self.assertTrue(is_legal_path(g, p.cells))

    def test_corridor_limit(self):
        g = empty_map(3, 1)
        with self.assertRaisesRegex(CBSLimitExceeded, 'CBS limit exceeded'):
            cbs_solve(g, [(0, 0), (2, 0)], [(2, 0), (0, 0)], node_limit=10000)

    def test_unreachable_goal(self):
        g = ascii_map('.@.', '.@.')
        with self.assertRaisesRegex(UnreachableGoal, 'unreachable goal'):
            cbs_solve(g, [(0, 0)], [(2, 0)])

    def test_bad_arguments(self):
        g = empty_map(3, 3)
        with self.assertRaises(ValueError):
            cbs_solve(g, [(0, 0)], [(1, 1), (2, 2)])
        with self.assertRaises(ValueError):
            cbs_solve(g, [(0, 0), (0, 0)], [(1, 1), (2, 2)])

    def test_deadline(self):
        g = empty_map(3, 2)
        with self.assertRaises(TimeLimitExceeded):
            cbs_solve(g, [(0, 0), (2, 0)], [(2, 0), (0, 0)], deadline=Deadline(0))

    def test_paths_optimal_under_constraints(self):
        g = ascii_map('....', '.@..', '....')
        starts, goals = [(0, 0), (3, 0), (0, 2)], [(3, 0), (0, 0), (3, 2)]
        paths = cbs_solve(g, starts, goals)
        self.assertIsNone(detect_first_conflict(paths))
        for p, s, goal in zip(paths, starts, goals):
            self.assertGreaterEqual(p.cost, shortest_dist(g, s, goal))
            self.assertTrue(is_legal_path(g, p.cells))

    def test_replan_under_solution_constraints(self):
        g = empty_map(3, 2)
        starts, goals = [(0, 0), (2, 0)], [(2, 0), (0, 0)]
        stats = dict()
        paths = cbs_solve(g, starts, goals, stats=stats)
        self.assertGreater(len(stats['constraints']), 0)
        for i, (p, s, goal) in enumerate(zip(paths, starts, goals)):
            mine = [c for c in stats['constraints'] if c.robot == i]
            self.assertEqual(low_level_search(g, s, goal, mine).cost, p.cost)

    def test_soc_nondecreasing_along_tree(self):
        for g, starts, goals in [
                (empty_map(3, 2), [(0, 0), (2, 0)], [(2, 0), (0, 0)]),
                (ascii_map('....', '.@..', '....'), [(0, 0), (3, 0), (0, 2)], [(3, 0), (0, 0), (3, 2)]),
                (empty_map(3, 3), [(0, 1), (1, 0), (2, 1)], [(2, 1), (1, 2), (0, 1)])]:
            stats = dict()
            cbs_solve(g, starts, goals, stats=stats)
            trace = stats['trace']
            self.assertEqual(len(trace), stats['expanded'])
            self.assertIsNone(trace[0][0])
            for parent_soc, soc in trace[1:]:
                self.assertGreaterEqual(soc, parent_soc)
            #- best-first: expanded sums of costs never decrease either
            socs = [soc for _, soc in trace]
            self.assertEqual(socs, sorted(socs))
            self.assertEqual(socs[-1], stats['soc'])

    def _check_oracle(self, ninstances, seed):
        rng = np.random.default_rng(seed)
        nchecked = 0
        while nchecked < ninstances:
            nrobots = int(rng.integers(1, 4))
            micro = random_micro_instance(rng, nrobots)
            if micro is None:
                continue
            gridmap, starts, goals = micro
            expected = joint_state_optimum(gridmap, starts, goals)
            if expected is None:
                continue
            paths = cbs_solve(gridmap, starts, goals)
            self.assertIsNone(detect_first_conflict(paths))
            self.assertEqual(sum(p.cost for p in paths), expected,
                             f'{gridmap} starts={starts} goals={goals}')
            nchecked += 1

    def test_oracle_small(self):
        self._check_oracle(15, seed=1)

    @unittest.skipIf(not long_tests, 'set MRTAPF_LONG_TESTS to run')
    def test_oracle(self):
        self._check_oracle(100, seed=2)


if __name__ == '__main__':
    unittest.main()
