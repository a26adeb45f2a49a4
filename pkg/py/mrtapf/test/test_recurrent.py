import unittest

from mrtapf.gridmap import Instance, generate_instance
from mrtapf.distance import build_cost_matrix
from mrtapf.assign import RoutePlan, greedy_insertion
from mrtapf.cbs import Path, CBSLimitExceeded
from mrtapf.conflict import find_conflicts
from mrtapf.recurrent import (WORKING, DONE, RoundState, TimedSolution, advance_round,
                              solve_recurrent)
from mrtapf.validate import validate
from .util import empty_map, make_instance


class TestRoundState(unittest.TestCase):

    def test_initial(self):
        plan = RoutePlan([[0], []])
        state = RoundState.initial([(0, 0), (2, 0)], plan)
        self.assertEqual(state.status, [WORKING, DONE])
        self.assertEqual(state.idx, [1, 1])
        self.assertEqual(state.clock, 0)
        self.assertEqual(state.accumulated, [[(0, 0)], [(2, 0)]])

    def test_copy_independent(self):
        state = RoundState.initial([(0, 0)], RoutePlan([[0]]))
        other = state.copy()
        other.accumulated[0].append((1, 0))
        other.idx[0] = 2
        self.assertEqual(state.accumulated, [[(0, 0)]])
        self.assertEqual(state.idx, [1])


class TestAdvanceRound(unittest.TestCase):

    def test_single_robot(self):
        g = empty_map(3, 1)
        plan = RoutePlan([[0]])
        state = RoundState.initial([(0, 0)], plan)
        state = advance_round(state, g, plan, [(2, 0)])
        self.assertFalse(state.finished)
        self.assertEqual(state.accumulated, [[(0, 0), (1, 0), (2, 0)]])
        self.assertEqual(state.s_temp, [(2, 0)])
        self.assertEqual(state.status, [DONE])
        self.assertEqual(state.arrivals, [[2]])
        self.assertEqual(state.rounds, 1)

        state = advance_round(state, g, plan, [(2, 0)])
        self.assertTrue(state.finished)
        self.assertEqual(state.rounds, 2)
        self.assertEqual(state.clock, 2)

    def test_tie_and_zero_length_slice(self):
        g = empty_map(5, 2)
        plan = RoutePlan([[0], [1]])
        goals = [(2, 0), (2, 1)]
        state = RoundState.initial([(0, 0), (0, 1)], plan)

        #- equal costs: robot 0 is the fastest
        state = advance_round(state, g, plan, goals)
        self.assertEqual(state.status, [DONE, WORKING])
        self.assertEqual(state.s_temp, [(2, 0), (2, 1)])
        self.assertEqual(state.arrivals, [[2], []])

        #- robot 1 already stands on its goal: no motion, index advances
        state = advance_round(state, g, plan, goals)
        self.assertEqual(state.clock, 2)
        self.assertEqual(state.status, [DONE, DONE])
        self.assertEqual(state.arrivals, [[2], [2]])

        state = advance_round(state, g, plan, goals)
        self.assertTrue(state.finished)
        self.assertEqual(state.rounds, 3)

    def test_equal_lengths(self):
        inst = generate_instance(12, 12, 0.3, 3, 6, seed=8)
        plan = greedy_insertion(build_cost_matrix(inst), inst.n, inst.m)
        state = RoundState.initial(inst.starts, plan)
        while not state.finished:
            state = advance_round(state, inst.map, plan, inst.goals)
            lengths = set(len(cells) for cells in state.accumulated)
            self.assertEqual(len(lengths), 1)
            for i in range(inst.n):
                self.assertEqual(state.accumulated[i][-1], state.s_temp[i])


class TestSolveRecurrent(unittest.TestCase):

    def test_no_goals(self):
        inst = Instance(empty_map(3, 3), [(0, 0), (2, 2)], [])
        solution = solve_recurrent(inst, RoutePlan([[], []]))
        self.assertEqual(solution.flowtime, 0)
        self.assertEqual(solution.rounds, 1)
        self.assertEqual(solution.makespan, 0)
        self.assertEqual([p.cells for p in solution.paths], [((0, 0),), ((2, 2),)])

    def test_two_goals(self):
        inst = Instance(empty_map(3, 3), [(0, 0)], [(2, 0), (0, 2)])
        plan = RoutePlan([[0, 1]])
        solution = solve_recurrent(inst, plan)
        self.assertEqual(solution.flowtime, 6)
        self.assertEqual(solution.rounds, 3)
        self.assertEqual(solution.arrivals, [[2, 6]])
        self.assertEqual(solution.per_robot_distance, [6])
        self.assertTrue(validate(inst, solution, plan).ok)

    def test_done_robot_blocking(self):
        #- robot 0 has no tasks and stands between robot 1 and its goal
        inst = make_instance(['...', '...'], [(1, 0), (0, 0)], [(2, 0)])
        plan = RoutePlan([[], [0]])
        solution = solve_recurrent(inst, plan)
        self.assertIn(solution.flowtime, (2, 4))
        self.assertEqual(solution.per_robot_cost[0], 0)
        self.assertEqual(solution.paths[0].cells[-1], (1, 0))
        self.assertTrue(validate(inst, solution, plan).ok)

    def test_corridor_deadlock(self):
        inst = make_instance(['....'], [(0, 0), (3, 0)], [(2, 0), (1, 0)])
        plan = RoutePlan([[0], [1]])
        with self.assertRaisesRegex(CBSLimitExceeded, 'CBS limit exceeded'):
            solve_recurrent(inst, plan, node_limit=500)

    def test_bad_plan(self):
        inst = Instance(empty_map(3, 3), [(0, 0)], [(2, 0), (0, 2)])
        with self.assertRaises(ValueError):
            solve_recurrent(inst, RoutePlan([[0]]))
        with self.assertRaises(ValueError):
            solve_recurrent(inst, RoutePlan([[0], [1]]))

    def test_generated(self):
        for seed in range(3):
            inst = generate_instance(16, 16, 0.3, 4, 8, seed=seed)
            plan = greedy_insertion(build_cost_matrix(inst), inst.n, inst.m)
            solution = solve_recurrent(inst, plan)
            self.assertEqual(find_conflicts([p.cells for p in solution.paths]), [])
            self.assertEqual(solution.flowtime, sum(solution.per_robot_cost))
            self.assertLessEqual(solution.rounds, inst.m + inst.n + 1)
            report = validate(inst, solution, plan)
            self.assertTrue(report.ok, report.to_text())


class TestTimedSolution(unittest.TestCase):

    def test_unequal_lengths(self):
        with self.assertRaises(ValueError):
            TimedSolution([Path([(0, 0)]), Path([(1, 0), (1, 1)])], [0, 1], 1)

    def test_metrics(self):
        paths = [Path([(0, 0), (1, 0), (1, 0), (2, 0)]), Path([(0, 1), (0, 1), (0, 1), (0, 1)])]
        solution = TimedSolution(paths, [3, 0], 2)
        self.assertEqual(solution.flowtime, 3)
        self.assertEqual(solution.makespan, 3)
        self.assertEqual(solution.per_robot_distance, [2, 0])


if __name__ == '__main__':
    unittest.main()
