import unittest

from mrtapf.util import TimeLimitExceeded
from mrtapf.gridmap import Instance, generate_instance
from mrtapf.assign import SAParams, InsertionError, route_cost
from mrtapf.core import solve_instance
from mrtapf.validate import validate
from .util import empty_map, make_instance, long_tests


class TestSolveInstance(unittest.TestCase):

    def test_pipeline(self):
        inst = generate_instance(16, 16, 0.3, 4, 8, seed=12)
        result = solve_instance(inst, sa_params=SAParams(max_iter=3000, seed=5), loglevel='warning')
        self.assertTrue(result['report'].ok, result['report'].to_text())
        self.assertLessEqual(result['sa_cost'], result['initial_cost'])
        self.assertEqual(result['sa_cost'], route_cost(result['plan'], result['cost_matrix']))
        solution = result['solution']
        self.assertGreater(solution.sa_seconds, 0)
        self.assertGreater(solution.recbs_seconds, 0)
        self.assertTrue(validate(inst, solution, result['plan']).ok)
        for name in ('cost matrix', 'greedy insertion', 'annealing', 'recurrent cbs', 'validate'):
            self.assertGreaterEqual(result['timer'].elapsed(name), 0)

    def test_deterministic(self):
        inst = generate_instance(12, 12, 0.3, 3, 6, seed=4)
        params = SAParams(max_iter=2000, seed=3)
        a = solve_instance(inst, sa_params=params, loglevel='warning')
        b = solve_instance(inst, sa_params=params, loglevel='warning')
        self.assertEqual(a['plan'], b['plan'])
        self.assertEqual([p.cells for p in a['solution'].paths],
                         [p.cells for p in b['solution'].paths])

    def test_small(self):
        inst = Instance(empty_map(3, 3), [(0, 0)], [(2, 0), (0, 2)])
        result = solve_instance(inst, loglevel='warning')
        self.assertEqual(result['sa_cost'], 6)
        self.assertEqual(result['solution'].flowtime, 6)

    def test_time_limit(self):
        inst = generate_instance(16, 16, 0.3, 3, 6, seed=1)
        with self.assertRaises(TimeLimitExceeded):
            solve_instance(inst, time_limit=1e-9, loglevel='warning')

    def test_unreachable(self):
        inst = make_instance(['..@.'], [(0, 0)], [(1, 0), (3, 0)])
        with self.assertRaises(InsertionError):
            solve_instance(inst, loglevel='warning')

    @unittest.skipIf(not long_tests, 'set MRTAPF_LONG_TESTS to run')
    def test_soundness(self):
        nsolved = 0
        k = 0
        for n in (2, 5, 10, 20):
            for m in (5, 10, 20, 40):
                for i in range(12 if n < 20 else 14):
                    k += 1
                    inst = generate_instance(32, 32, 0.4, n, m, seed=5000+k)
                    try:
                        result = solve_instance(inst, time_limit=60, loglevel='warning')
                    except RuntimeError:
                        continue
                    self.assertTrue(result['report'].ok, result['report'].to_text())
                    nsolved += 1
        self.assertGreater(nsolved, 0)


if __name__ == '__main__':
    unittest.main()
