import unittest
import os
import tempfile

import numpy as np

from mrtapf.gridmap import Instance, generate_instance
from mrtapf.distance import (UNREACHABLE, CostMatrix, shortest_dist, distance_table,
                             build_cost_matrix)
from mrtapf.io import write_cost_matrix
from .util import ascii_map, empty_map, bfs_distance


class TestShortestDist(unittest.TestCase):

    def test_identity(self):
        self.assertEqual(shortest_dist(empty_map(3, 3), (0, 0), (0, 0)), 0)

    def test_corner_to_corner(self):
        self.assertEqual(shortest_dist(empty_map(3, 3), (0, 0), (2, 2)), 4)

    def test_unreachable(self):
        g = ascii_map('.@.', '.@.', '.@.')
        self.assertEqual(shortest_dist(g, (0, 0), (2, 0)), UNREACHABLE)
        self.assertTrue(np.isinf(shortest_dist(g, (0, 0), (2, 0))))

    def test_detour(self):
        g = ascii_map('.@.', '.@.', '...')
        self.assertEqual(shortest_dist(g, (0, 0), (2, 0)), 6)

    def test_blocked_endpoint(self):
        g = ascii_map('.@.')
        with self.assertRaises(ValueError):
            shortest_dist(g, (0, 0), (1, 0))
        with self.assertRaises(ValueError):
            shortest_dist(g, (0, 0), (5, 0))

    def test_matches_bfs_oracle(self):
        rng = np.random.default_rng(42)
        for seed in range(10):
            g = generate_instance(12, 10, 0.3, 1, 0, seed=seed).map
            free = g.free_cells()
            for _ in range(100):
                a = free[rng.integers(len(free))]
                b = free[rng.integers(len(free))]
                expected = bfs_distance(g, a, b)
                d = shortest_dist(g, a, b)
                if expected is None:
                    self.assertTrue(np.isinf(d))
                else:
                    self.assertEqual(d, expected)
                    self.assertEqual(shortest_dist(g, b, a), d)

    def test_distance_table(self):
        g = ascii_map('..@', '...')
        table = distance_table(g, (0, 0))
        self.assertEqual(table.shape, (2, 3))
        self.assertEqual(table[1, 2], 3)
        self.assertTrue(np.isinf(table[0, 2]))


class TestCostMatrix(unittest.TestCase):

    def test_example(self):
        inst = Instance(empty_map(3, 3), [(0, 0)], [(2, 0), (0, 2)])
        c = build_cost_matrix(inst)
        self.assertEqual(c.size, 3)
        self.assertEqual(c[0, 1], 2)
        self.assertEqual(c[1, 2], 4)
        self.assertEqual(c[2, 1], 4)
        self.assertEqual(c.labels, ['d0', 'g0', 'g1'])

    def test_depot_columns_zero(self):
        inst = generate_instance(16, 16, 0.4, 4, 6, seed=5)
        c = build_cost_matrix(inst)
        self.assertTrue(np.all(c.values[:, :inst.n] == 0))
        self.assertTrue(np.all(np.diag(c.values) == 0))
        for i, a in enumerate(list(inst.starts) + list(inst.goals)):
            for j, b in enumerate(inst.goals):
                self.assertEqual(c[i, inst.n+j], shortest_dist(inst.map, a, b))

    def test_triangle_inequality(self):
        inst = generate_instance(16, 16, 0.3, 3, 6, seed=11)
        c = build_cost_matrix(inst)
        goals = range(inst.n, c.size)
        for i in range(c.size):
            for k in goals:
                for j in goals:
                    if np.isfinite(c[i, k]) and np.isfinite(c[k, j]) and i != j:
                        self.assertLessEqual(c[i, j], c[i, k] + c[k, j])

    def test_walled_off_goal(self):
        g = ascii_map('..@.', '..@.')
        inst = Instance(g, [(0, 0), (1, 0)], [(0, 1), (3, 0)])
        c = build_cost_matrix(inst)
        #- goal 1 (matrix index 3) is walled off
        self.assertTrue(np.all(c.values[:, :2] == 0))
        for i in (0, 1, 2):
            self.assertTrue(np.isinf(c[i, 3]))
        self.assertTrue(np.isinf(c[3, 2]))
        self.assertEqual(c[3, 3], 0)

    def test_read_only(self):
        c = CostMatrix(np.zeros((2, 2)), 1, 1)
        with self.assertRaises(ValueError):
            c.values[0, 1] = 5
        with self.assertRaises(ValueError):
            CostMatrix(np.zeros((2, 2)), 2, 1)


class TestWriteCostMatrix(unittest.TestCase):

    def setUp(self):
        self.tempdir = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tempdir.cleanup()

    def test_csv(self):
        g = ascii_map('..@.')
        inst = Instance(g, [(0, 0)], [(1, 0), (3, 0)])
        filename = os.path.join(self.tempdir.name, 'cost.csv')
        write_cost_matrix(filename, build_cost_matrix(inst))
        with open(filename) as fx:
            lines = fx.read().splitlines()
        self.assertEqual(lines[0], 'd0,g0,g1')
        self.assertEqual(lines[1], '0,1,inf')
        self.assertEqual(lines[2], '0,0,inf')
        self.assertEqual(lines[3], '0,inf,0')


if __name__ == '__main__':
    unittest.main()
